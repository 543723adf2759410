import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyfluct.errors import DomainError, NonTerminationError, UnsupportedSpecError
from levyfluct.identities import (
    TransformQuery,
    first_jump_transform,
    lower_passage_transform,
    minimum_transform,
    occupation_transform,
    two_sided_exit,
    upper_passage_transform,
)
from levyfluct.model import ProcessSpec, tilt
from levyfluct.scale import make_evaluator
from levyfluct.simulate import (
    StopRule,
    estimate_first_jump_transform,
    estimate_inverse_local_time_process,
    estimate_minimum_transform,
    estimate_passage_functional,
    estimate_two_sided_exit,
    one_sided_lower_reflection,
    simulate_euler,
    simulate_event_exact,
)
from levyfluct.simulate import paths as paths_mod
from levyfluct.simulate.rng import StreamFactory, path_generator

from conftest import BM, CL

_K = paths_mod._K


class TestEventExact:
    def test_hand_computed_piecewise_path(self):
        # x0=0, c=2, B=1: first jump at t=1 of size 3; the preset uniforms
        # pin the interarrival (-log1p(-u) = 1) and the magnitude (= 3)
        rng = _K.RandomSource(
            uniforms=[1.0 - math.exp(-1.0), 1.0 - math.exp(-3.0), 0.9]
        )
        rec = []
        res = paths_mod._run_path(
            CL, 0.0, 1.0, True, _K.STOP_TIME, 1.2, 0.0, rng, None, rec
        )
        arr = np.array(rec)
        assert arr[:, 0].tolist() == [0.0, 0.5, 1.0, 1.2]  # t
        assert arr[:, 2].tolist() == pytest.approx([0.0, 1.0, 0.0, 0.4], abs=1e-12)
        assert arr[:, 3].tolist() == [0.0, 0.0, 2.0, 2.0]  # l jumps by 2 at t=1
        assert arr[:, 4].tolist() == [0.0, 0.0, 1.0, 1.0]  # u(1-) = 1
        assert res[7] == 0.5  # first upper-regulator increase
        assert res[10] == 1.0 and res[11] == 2.0 and res[12] == 1.0

    def test_pure_drift_segment_reaches_barrier(self):
        # interarrival pushed past the passage: tau_u0 = (B - x0)/c, l = 0
        spec = ProcessSpec(drift=1.0, gaussian_sq=0.0, jump_intensity=0.1,
                           jump_mixture=((1.0, 1.0),))
        rng = _K.RandomSource(uniforms=[0.9])  # interarrival ~ 23
        res = paths_mod._run_path(
            spec, 0.0, 1.0, True, _K.STOP_UPPER, 0.0, 0.0, rng, None
        )
        assert res[7] == 1.0 and res[8] == 0.0 and res[5] == 0.0

    def test_fixed_seed_reproduces_path(self):
        p1 = simulate_event_exact(CL, 0.5, 2.0, StopRule.time(25.0), seed=9)
        p2 = simulate_event_exact(CL, 0.5, 2.0, StopRule.time(25.0), seed=9)
        assert np.array_equal(p1.times, p2.times)
        assert np.array_equal(p1.w, p2.w)
        p3 = simulate_event_exact(CL, 0.5, 2.0, StopRule.time(25.0), seed=10)
        assert not np.array_equal(p1.w, p3.w)

    def test_rejects_gaussian_component(self):
        with pytest.raises(UnsupportedSpecError):
            simulate_event_exact(BM, 0.5, 1.0, StopRule.first_upper(), seed=1)

    def test_start_at_barrier_gives_zero_passage(self):
        p = simulate_event_exact(CL, 2.0, 2.0, StopRule.first_upper(), seed=4)
        assert p.passage.tau_u0 == 0.0 and p.passage.l_at_tau_u0 == 0.0

    def test_first_lower_contact_is_by_jump_with_positive_overshoot(self):
        for seed in range(5):
            p = simulate_event_exact(CL, 1.0, 2.0, StopRule.first_lower(), seed=seed)
            assert p.passage.l_at_tau_l0 > 0.0
            p.check_invariants()

    def test_invariants_on_long_path(self):
        p = simulate_event_exact(CL, 1.0, 2.0, StopRule.u_level(10.0), seed=3)
        p.check_invariants()
        assert p.u[-1] == pytest.approx(10.0, abs=1e-12)

    def test_zero_size_jump_keeps_time_monotone(self):
        # u = 0.0 draws a zero jump magnitude, leaving w at the barrier
        # while unpinned; the recomputed contact must not move time back
        us = [1.0 - math.exp(-0.1), 0.0, 1.0 - math.exp(-0.05),
              1.0 - math.exp(-1.0), 0.99, 0.5]
        rng = _K.RandomSource(uniforms=us)
        rec = []
        paths_mod._run_path(CL, 1.9, 2.0, True, _K.STOP_TIME, 0.3, 0.0,
                            rng, None, rec)
        times = [row[0] for row in rec]
        assert all(a <= b for a, b in zip(times, times[1:]))


class TestEuler:
    def test_invariants_hold_constructively(self):
        for seed in range(4):
            p = simulate_euler(
                ProcessSpec(drift=0.2, gaussian_sq=1.5, jump_intensity=1.0,
                            jump_mixture=((0.7, 1.0), (0.3, 4.0))),
                0.6, 1.2, 1e-3, StopRule.time(5.0), seed=seed,
            )
            p.check_invariants()

    def test_start_at_barrier_accrues_immediately(self):
        p = simulate_euler(BM, 1.0, 1.0, 1e-4, StopRule.first_upper(), seed=5)
        assert p.passage.tau_u0 <= 10 * 1e-4

    def test_jump_epochs_recorded_exactly(self):
        p = simulate_euler(CL, 1.0, 2.0, 0.25, StopRule.time(10.0), seed=8)
        off_grid = [t for t in p.times if (t / 0.25) % 1.0 not in (0.0,)]
        # exact jump epochs appear as off-grid event rows
        assert len(off_grid) >= 1
        p.check_invariants()

    def test_grid_dt_must_be_positive(self):
        with pytest.raises(DomainError):
            simulate_euler(BM, 0.5, 1.0, 0.0, StopRule.time(1.0), seed=1)


class TestOneSided:
    def test_high_start_short_horizon_never_reflects(self):
        p = one_sided_lower_reflection(CL, 10.0, StopRule.time(1.0), seed=2)
        assert np.all(p.l == 0.0)
        assert np.all(p.u == 0.0)

    def test_running_minimum_equality_is_exact(self):
        # incremental reflection must match -min(min x, 0) bit-for-bit
        for spec, dt in ((CL, None), (BM, 1e-3)):
            p = one_sided_lower_reflection(spec, 0.3, StopRule.time(8.0), seed=6,
                                           dt=dt)
            runmin = np.minimum.accumulate(np.minimum(p.x, 0.0))
            assert np.array_equal(p.l, -runmin)
            p.check_invariants()

    def test_stop_must_be_bounded(self):
        with pytest.raises(DomainError):
            one_sided_lower_reflection(CL, 0.0, StopRule.first_upper(), seed=1)

    def test_minimum_transform_against_formula(self):
        # positive-mean spec: sample mean of e^{alpha*minX} ~ PK formula
        est = estimate_minimum_transform(CL, 1.0, horizon=60.0, n_paths=20000,
                                         seed=21)
        expected = minimum_transform(CL, 1.0)
        assert abs(est.mean - expected) <= 3.0 * est.std_error


class TestEstimators:
    def test_upper_at_barrier_is_deterministic_one(self):
        est = estimate_passage_functional(CL, 0.5, 1.0, 0.0, 2.0, 2.0, "upper",
                                          100, seed=1)
        assert est.mean == 1.0 and est.std_error == 0.0

    def test_lower_all_zero_arguments_is_one(self):
        est = estimate_passage_functional(CL, 0.0, 0.0, 0.0, 1.0, 2.0, "lower",
                                          100, seed=1)
        assert est.mean == 1.0 and est.std_error == 0.0

    def test_passage_vs_formula_exact_mode(self):
        q = 0.1
        ev = make_evaluator(CL, q)
        alpha = ev.phi_q + 0.5
        query = TransformQuery(q=q, alpha=alpha, theta=0.3, x0=1.0, b=2.0)
        lo = lower_passage_transform(ev, query).value
        up = upper_passage_transform(ev, query).value
        est_lo = estimate_passage_functional(CL, q, alpha, 0.3, 1.0, 2.0,
                                             "lower", 20000, seed=31)
        est_up = estimate_passage_functional(CL, q, alpha, 0.0, 1.0, 2.0,
                                             "upper", 20000, seed=32)
        assert abs(est_lo.mean - lo) <= 3.0 * est_lo.std_error
        assert abs(est_up.mean - up) <= 3.0 * est_up.std_error

    def test_two_sided_exit_vs_formula(self):
        ev = make_evaluator(CL, 0.0)
        expected = two_sided_exit(ev, 1.0, 1.0)
        est = estimate_two_sided_exit(CL, 0.0, 1.0, 1.0, 20000, seed=41)
        assert abs(est.mean - expected) <= 3.0 * est.std_error

    def test_exact_vs_euler_agreement_bounded_variation(self):
        # same functional through both modes: 3 combined SE plus O(dt) slack
        q, alpha, theta = 0.1, 0.6, 0.3
        a = estimate_passage_functional(CL, q, alpha, theta, 1.0, 2.0, "lower",
                                        8000, seed=51)
        b = estimate_passage_functional(CL, q, alpha, theta, 1.0, 2.0, "lower",
                                        8000, seed=52, dt=1e-4)
        se = math.hypot(a.std_error, b.std_error)
        assert abs(a.mean - b.mean) <= 3.0 * se + 2e-3

    def test_budget_guard_raises(self, monkeypatch):
        # jumps too small to ever reach the lower barrier
        spec = ProcessSpec(drift=2.0, gaussian_sq=0.0, jump_intensity=1.0,
                           jump_mixture=((1.0, 500.0),))
        monkeypatch.setattr(paths_mod, "MAX_JUMPS", 2000)
        with pytest.raises(NonTerminationError):
            estimate_passage_functional(spec, 0.0, 0.1, 0.0, 1.0, 2.0, "lower",
                                        4, seed=1)

    def test_requires_dt_for_gaussian_component(self):
        with pytest.raises(DomainError):
            estimate_passage_functional(BM, 1.0, 2.0, 0.0, 0.5, 1.0, "upper",
                                        10, seed=1)


class TestInverseLocalTime:
    def test_zero_alpha_transform_is_one(self):
        ilt = estimate_inverse_local_time_process(CL, 2.0, 10.0, 50, seed=61)
        tr = ilt.increment_transform(0.0)
        assert tr.mean == 1.0 and tr.std_error == 0.0

    def test_unit_records_are_complete_and_monotone(self):
        ilt = estimate_inverse_local_time_process(CL, 2.0, 12.0, 30, seed=62)
        assert not np.any(np.isnan(ilt.dl))
        assert np.all(ilt.dl >= 0.0)
        assert np.all(ilt.dtau > 0.0)
        assert len(ilt.dl) == 30 * 12

    def test_ladder_events_reconstruct_increments(self):
        ilt = estimate_inverse_local_time_process(CL, 2.0, 8.0, 20, seed=63,
                                                  collect_events=True)
        count = 0
        for events in ilt.events:
            for level, _l_after in events:
                assert 0.0 <= level < 8.0
                count += 1
        assert count == round(ilt.jump_rate.mean * 8.0 * 20)

    def test_unpacks_as_rate_and_transform(self):
        rate, transform = estimate_inverse_local_time_process(CL, 2.0, 5.0, 10,
                                                              seed=65)
        assert rate.n == 10
        assert transform(0.0).mean == 1.0

    def test_jump_rate_vs_formula(self):
        ev = make_evaluator(CL, 0.0)
        from levyfluct.identities import local_time_jump_rate

        expected = local_time_jump_rate(ev, 2.0)
        ilt = estimate_inverse_local_time_process(CL, 2.0, 40.0, 150, seed=64)
        assert abs(ilt.jump_rate.mean - expected) <= 3.0 * ilt.jump_rate.std_error


class TestFirstJumpEstimator:
    def test_against_formula(self):
        rate, alpha, theta = 2.0, 0.4, 0.7
        expected = first_jump_transform(
            rate, lambda a: CL.jump_size_transform(-a), alpha, theta
        )
        est = estimate_first_jump_transform(rate, CL.jump_mixture, alpha, theta,
                                            100000, seed=71)
        assert abs(est.mean - expected) <= 3.0 * est.std_error

    def test_alpha_zero_matches_epoch_law(self):
        est = estimate_first_jump_transform(2.0, CL.jump_mixture, 0.0, 1.0,
                                            100000, seed=72)
        assert abs(est.mean - 2.0 / 3.0) <= 3.0 * est.std_error


class TestOccupationMonteCarlo:
    def test_occupation_transform_vs_simulated_ladder(self):
        # integrate e^{alpha X(T_x)} dx along tilted paths using the exact
        # ladder jump sequence; X(T_x) = x + B - L(T_x)
        tl = tilt(CL, 0.3)
        proc = tl.process
        ev = make_evaluator(proc, 0.0)
        alpha, x0, b = -0.25, 0.5, 1.0
        expected = occupation_transform(ev, alpha, x0, b)
        x_max = 60.0
        n = 400
        ilt = estimate_inverse_local_time_process(
            proc, b, x_max, n, seed=81, collect_events=True
        )
        # per-path integral of e^{alpha x - alpha L(T_x)} over [0, x_max];
        # this run starts at the barrier, so it estimates the x0 = B case
        # and the x0-dependent start is handled by a separate passage factor
        vals = []
        for events, base_l in zip(ilt.events, [0.0] * n):
            total = 0.0
            lev_prev = 0.0
            l_cur = base_l
            for level, l_after in events + [(x_max, None)]:
                if level > lev_prev:
                    total += math.exp(-alpha * l_cur) * (
                        math.exp(alpha * level) - math.exp(alpha * lev_prev)
                    ) / alpha
                if l_after is None:
                    break
                lev_prev = level
                l_cur = l_after
            vals.append(math.exp(alpha * b) * total)
        mc = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / math.sqrt(n))
        expected_b = occupation_transform(ev, alpha, b, b)
        assert abs(mc - expected_b) <= 3.0 * se + 1e-3
        assert expected > 0.0


class TestDeterminismContracts:
    def test_stream_factory_matches_fresh_generators(self):
        factory = StreamFactory(12345)
        for idx in (0, 3, 2**40 + 17):
            a = factory.generator(idx).random(16)
            b = path_generator(12345, idx).random(16)
            assert np.array_equal(a, b)

    def test_estimates_reproducible(self):
        e1 = estimate_passage_functional(CL, 0.1, 0.6, 0.3, 1.0, 2.0, "lower",
                                         3000, seed=91)
        e2 = estimate_passage_functional(CL, 0.1, 0.6, 0.3, 1.0, 2.0, "lower",
                                         3000, seed=91)
        assert e1 == e2

    def test_stream_offset_shifts_paths(self):
        e1 = estimate_passage_functional(CL, 0.1, 0.6, 0.3, 1.0, 2.0, "lower",
                                         3000, seed=91)
        e3 = estimate_passage_functional(CL, 0.1, 0.6, 0.3, 1.0, 2.0, "lower",
                                         3000, seed=91, stream_offset=1 << 40)
        assert e1 != e3

    def test_thread_count_does_not_change_results(self, monkeypatch):
        args = (CL, 0.1, 0.6, 0.3, 1.0, 2.0, "upper", 5000)
        monkeypatch.setenv("LEVYFLUCT_THREADS", "1")
        e1 = estimate_passage_functional(*args, seed=95)
        monkeypatch.setenv("LEVYFLUCT_THREADS", "4")
        e4 = estimate_passage_functional(*args, seed=95)
        assert e1 == e4


@st.composite
def sim_specs(draw):
    sigma2 = draw(st.sampled_from([0.0, 1.0]))
    drift = draw(st.floats(-1.0, 3.0))
    lam = draw(st.floats(0.3, 2.0))
    rate = draw(st.floats(0.3, 4.0))
    if sigma2 == 0.0 and drift <= 0.0:
        drift = 0.5 - drift
    return ProcessSpec(drift=drift, gaussian_sq=sigma2, jump_intensity=lam,
                       jump_mixture=((1.0, rate),))


@settings(max_examples=25, deadline=None)
@given(sim_specs(), st.integers(0, 10_000), st.sampled_from([0.8, 2.0]))
def test_path_invariants_property(spec, seed, b):
    if spec.gaussian_sq == 0.0:
        p = simulate_event_exact(spec, b / 2.0, b, StopRule.time(6.0), seed=seed)
    else:
        p = simulate_euler(spec, b / 2.0, b, 2e-3, StopRule.time(3.0), seed=seed)
    p.check_invariants()
