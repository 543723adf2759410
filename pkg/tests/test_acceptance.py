"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.  The
Monte Carlo criteria use the compiled kernels when available; the stated
runtime limits assume them.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from levyfluct.identities import (
    TransformQuery,
    first_jump_transform,
    inverse_local_time_exponent,
    local_time_jump_rate,
    lower_passage_transform,
    minimum_transform,
    two_sided_exit,
    upper_passage_transform,
)
from levyfluct.model import tilt
from levyfluct.scale import Backend, make_evaluator
from levyfluct.simulate import (
    estimate_first_jump_transform,
    estimate_inverse_local_time_process,
    estimate_minimum_transform,
    estimate_passage_functional,
)

from conftest import BM, CL


def _report(num: int, name: str, ok: bool, detail: str = ""):
    print(f"ACCEPTANCE {num:2d} {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def _ev(spec, q):
    try:
        return make_evaluator(spec, q)
    except Exception:
        return make_evaluator(spec, q, Backend.NUMERIC_INVERSION)


def test_01_numeric_inversion_matches_closed_form_scale():
    t0 = time.perf_counter()
    ev = make_evaluator(BM, 1.0, Backend.NUMERIC_INVERSION)
    xs = np.linspace(0.01, 5.0, 1000)
    worst = max(abs(ev.w(x) - math.sinh(x)) / math.sinh(x) for x in xs)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 5.0
    _report(1, "numeric scale vs sinh", ok,
            f"max rel err {worst:.2e}, {elapsed:.2f}s")


def test_02_laplace_transform_identity():
    worst = 0.0
    for spec, q in ((BM, 1.0), (CL, 0.1)):
        ev = make_evaluator(spec, q)
        for off in (0.5, 1.0, 2.0):
            alpha = ev.phi_q + off
            # truncation point with exp((Phi(q) - alpha) * T) < 1e-10
            horizon = 1.05 * math.log(1e10) / off
            target = 1.0 / (float(spec.exponent(alpha)) - q)
            got, _ = quad(lambda x: math.exp(-alpha * x) * ev.w(x),
                          0.0, horizon, limit=400, epsabs=1e-13, epsrel=1e-11)
            worst = max(worst, abs(got - target) / abs(target))
    _report(2, "transform identity", worst <= 1e-6, f"max rel err {worst:.2e}")


def test_03_trivial_point_exactness():
    errs = []
    for spec in (BM, CL):
        ev = _ev(spec, 0.7)
        q_at_b = TransformQuery(q=0.7, alpha=ev.phi_q + 1.0, theta=0.0,
                                x0=1.5, b=1.5)
        errs.append(abs(upper_passage_transform(ev, q_at_b).value - 1.0))
        for x in (0.5, 2.0):
            errs.append(
                abs(ev.z(ev.phi_q, x) / math.exp(ev.phi_q * x) - 1.0)
            )
        ev0 = _ev(spec, 0.0)
        total = lower_passage_transform(
            ev0, TransformQuery(q=0.0, alpha=0.0, theta=0.0, x0=1.0, b=2.0)
        ).value
        errs.append(abs(total - 1.0))
    worst = max(errs)
    _report(3, "trivial-point exactness", worst <= 1e-10, f"max err {worst:.2e}")


def test_04_tilt_consistency_grid():
    b, theta = 1.5, 0.4
    worst = 0.0
    points = 0
    for spec in (BM, CL):
        for q in (0.1, 1.0):
            ev = make_evaluator(spec, q)
            evt = make_evaluator(tilt(spec, q).process, 0.0)
            for off in (0.0, 0.7):
                alpha = ev.phi_q + off
                for x0 in (0.0, b / 2.0, b):
                    query = TransformQuery(q=q, alpha=alpha, theta=theta,
                                           x0=x0, b=b)
                    tilted = TransformQuery(q=0.0, alpha=off,
                                            theta=theta + ev.phi_q, x0=x0, b=b)
                    lhs = lower_passage_transform(ev, query).value
                    rhs = math.exp(ev.phi_q * x0) * lower_passage_transform(
                        evt, tilted
                    ).value
                    worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
                    lhs_u = upper_passage_transform(ev, query).value
                    rhs_u = math.exp(ev.phi_q * (x0 - b)) * (
                        upper_passage_transform(evt, tilted).value
                    )
                    worst = max(worst, abs(lhs_u - rhs_u) / max(1.0, abs(lhs_u)))
                    points += 1
    assert points == 24
    _report(4, "tilt consistency (24 pts)", worst <= 1e-9, f"max err {worst:.2e}")


def test_05_monte_carlo_vs_formula_exact_simulation():
    t0 = time.perf_counter()
    q = 0.1
    ev = make_evaluator(CL, q)
    alpha = ev.phi_q + 0.5
    theta, x0, b, n = 0.3, 1.0, 2.0, 100_000
    query = TransformQuery(q=q, alpha=alpha, theta=theta, x0=x0, b=b)
    lo_an = lower_passage_transform(ev, query).value
    up_an = upper_passage_transform(ev, query).value
    lo = estimate_passage_functional(CL, q, alpha, theta, x0, b, "lower", n,
                                     seed=501)
    up = estimate_passage_functional(CL, q, alpha, 0.0, x0, b, "upper", n,
                                     seed=502)
    elapsed = time.perf_counter() - t0
    z_lo = (lo.mean - lo_an) / lo.std_error
    z_up = (up.mean - up_an) / up.std_error
    ok = abs(z_lo) <= 3.0 and abs(z_up) <= 3.0 and elapsed < 60.0
    _report(5, "MC vs formula (event-exact)", ok,
            f"z_lower={z_lo:+.2f} z_upper={z_up:+.2f}, {elapsed:.1f}s")


def test_06_monte_carlo_vs_formula_euler():
    t0 = time.perf_counter()
    q, alpha, x0, b, dt, n = 1.0, 2.0, 0.5, 1.0, 1e-4, 100_000
    ev = make_evaluator(BM, q)
    analytic = upper_passage_transform(
        ev, TransformQuery(q=q, alpha=alpha, theta=0.0, x0=x0, b=b)
    ).value
    est = estimate_passage_functional(BM, q, alpha, 0.0, x0, b, "upper", n,
                                      seed=601, dt=dt)
    elapsed = time.perf_counter() - t0
    diff = abs(est.mean - analytic)
    tol = max(3.0 * est.std_error, 0.02 * analytic)
    ok = diff <= tol and elapsed < 300.0
    _report(6, "MC vs formula (Euler, dt=1e-4)", ok,
            f"rel dev {diff / analytic:+.3%} vs 2% slack, "
            f"z={diff / est.std_error:.1f}, {elapsed:.1f}s")


def test_07_ladder_jump_rate_brownian():
    t0 = time.perf_counter()
    ilt = estimate_inverse_local_time_process(BM, 2.0, 50.0, 200, seed=701,
                                              dt=1e-4)
    elapsed = time.perf_counter() - t0
    rel = abs(ilt.jump_rate.mean - 0.5) / 0.5
    _report(7, "ladder jump rate (W'/W = 1/2)", rel <= 0.05,
            f"rate {ilt.jump_rate.mean:.4f}, rel dev {rel:.2%}, {elapsed:.1f}s")


def test_08_inverse_local_time_exponent_vs_simulation():
    # bounded-variation spec in event-exact mode: bias-free 3-SE check
    b, x_max, n = 2.0, 50.0, 200
    ev0 = make_evaluator(CL, 0.0)
    ilt = estimate_inverse_local_time_process(CL, b, x_max, n, seed=801)
    zs = []
    for alpha in (0.5, 1.0):
        tr = ilt.increment_transform(alpha)
        expected = math.exp(inverse_local_time_exponent(ev0, 0.0, alpha, b))
        zs.append((tr.mean - expected) / tr.std_error)
    ok = all(abs(z) <= 3.0 for z in zs)
    _report(8, "ladder exponent vs MC", ok,
            "z=" + ",".join(f"{z:+.2f}" for z in zs))


def test_09_pollaczek_khinchine():
    assert minimum_transform(CL, 1.0) == pytest.approx(2.0 / 3.0, rel=1e-12)
    est = estimate_minimum_transform(CL, 1.0, horizon=60.0, n_paths=50_000,
                                     seed=901)
    z = (est.mean - 2.0 / 3.0) / est.std_error
    _report(9, "Pollaczek-Khinchine (2/3)", abs(z) <= 3.0,
            f"mc {est.mean:.5f}, z={z:+.2f}")


def test_10_first_jump_transform():
    lam = 2.0
    mixture = ((1.0, 1.0),)
    zs = []
    for stream, (alpha, theta) in enumerate([(0.5, 0.7), (0.25, 1.3)]):
        # (lam + psi(alpha)) / (lam + theta) with psi the exponent of
        # exp(-alpha X(1)) for X jumping down by Exp(1) magnitudes
        psi = lam * (1.0 / (1.0 - alpha) - 1.0)
        analytic = (lam + psi) / (lam + theta)
        via_op = first_jump_transform(lam, lambda a: 1.0 / (1.0 - a), alpha, theta)
        assert via_op == pytest.approx(analytic, rel=1e-12)
        est = estimate_first_jump_transform(lam, mixture, alpha, theta,
                                            100_000, seed=1001 + stream)
        zs.append((est.mean - analytic) / est.std_error)
    ok = all(abs(z) <= 3.0 for z in zs)
    _report(10, "first-jump transform", ok, "z=" + ",".join(f"{z:+.2f}" for z in zs))


def test_11_q_continuity_of_identities():
    worst = 0.0
    for spec in (BM, CL):
        alpha, theta, x0, b = 0.8, 0.5, 1.0, 2.0
        vals = []
        for q in (0.0, 1e-6):
            ev = _ev(spec, q)
            query = TransformQuery(q=q, alpha=alpha, theta=theta, x0=x0, b=b)
            vals.append(
                (
                    upper_passage_transform(ev, query).value,
                    lower_passage_transform(ev, query).value,
                    two_sided_exit(ev, 1.0, 1.0),
                    inverse_local_time_exponent(ev, q, alpha, b),
                    local_time_jump_rate(ev, b),
                )
            )
        for v0, ve in zip(*vals):
            worst = max(worst, abs(ve - v0) / max(1.0, abs(v0)))
    _report(11, "q->0 continuity", worst <= 1e-3, f"max rel dev {worst:.2e}")
