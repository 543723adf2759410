"""Pure-Python reference kernels for the reflected-path simulator.

The compiled module ``_kernels_cy`` implements the same two entry points
with the same state updates and the same random-number consumption order,
so both backends produce bit-identical paths; this module is the import
fallback and the baseline the benchmark compares against.

State convention shared by both kernels: the primary state is the triple
(x_cum, l, u) of cumulative quantities, and the constrained value is always
recomputed through the canonical expression

    w = ((x0 + x_cum) + l) - u

so the reconstruction invariant of a recorded path holds bit-for-bit.
Reflection increments therefore leave w within a few ulps of the barrier
rather than exactly on it (except one-sided lower reflection, which uses
the running-minimum form and pins w to 0 exactly).

Random-number consumption order (identical in both backends):
* one uniform when the first jump is scheduled, and one after every jump;
* at a jump: one uniform for the mixture component (only when the mixture
  has more than one term), then one uniform for the magnitude;
* Euler only: one standard normal per integration sub-interval of positive
  length, drawn before any jump draw of the same event.
Exponential variates are formed as -log1p(-u)/rate.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import CHUNK0, CHUNK_GROWTH, CHUNK_MAX

INF = math.inf
NAN = math.nan

STOP_UPPER = 0
STOP_LOWER = 1
STOP_TIME = 2
STOP_ULEVEL = 3
STOP_WLEVEL = 4
STOP_EXIT = 5

STATUS_OK = 0
STATUS_STEP_BUDGET = 1
STATUS_JUMP_BUDGET = 2

_EMPTY = np.empty(0)


class RandomSource:
    """Chunk-buffered uniform/normal stream over one numpy Generator.

    Preset arrays may be supplied instead of a generator to drive a path by
    hand; exhausting a preset raises RuntimeError.
    """

    __slots__ = ("_gen", "_u", "_ui", "_uchunk", "_n", "_ni", "_nchunk")

    def __init__(self, gen=None, uniforms=None, normals=None):
        self._gen = gen
        self._u = np.ascontiguousarray(uniforms, dtype=np.float64) if uniforms is not None else _EMPTY
        self._n = np.ascontiguousarray(normals, dtype=np.float64) if normals is not None else _EMPTY
        self._ui = 0
        self._ni = 0
        self._uchunk = CHUNK0
        self._nchunk = CHUNK0

    def next_uniform(self) -> float:
        if self._ui == self._u.shape[0]:
            if self._gen is None:
                raise RuntimeError("preset uniform stream exhausted")
            self._u = self._gen.random(self._uchunk)
            self._ui = 0
            if self._uchunk < CHUNK_MAX:
                self._uchunk = min(self._uchunk * CHUNK_GROWTH, CHUNK_MAX)
        v = self._u[self._ui]
        self._ui += 1
        return float(v)

    def next_normal(self) -> float:
        if self._ni == self._n.shape[0]:
            if self._gen is None:
                raise RuntimeError("preset normal stream exhausted")
            self._n = self._gen.standard_normal(self._nchunk)
            self._ni = 0
            if self._nchunk < CHUNK_MAX:
                self._nchunk = min(self._nchunk * CHUNK_GROWTH, CHUNK_MAX)
        v = self._n[self._ni]
        self._ni += 1
        return float(v)


def run_exact(
    drift,
    lam,
    cum_weights,
    rates,
    x0,
    barrier,
    reflect_lower,
    stop_mode,
    stop_a,
    stop_b,
    max_steps,
    max_jumps,
    rng,
    record=None,
    unit_l=None,
    unit_t=None,
    ilt_events=None,
):
    """Event-exact path of the reflected bounded-variation process
    (sigma = 0, drift > 0, compound Poisson downward jumps).

    Piecewise-deterministic: between jumps w rises at rate ``drift`` and
    pins at the barrier while u accrues at the same rate; a jump of size y
    drops w by y with any deficit absorbed into an l jump.  No
    discretization error.
    """
    k = len(rates)
    t = 0.0
    x_cum = 0.0
    l = 0.0
    u = 0.0
    n_steps = 0
    n_jumps = 0
    status = STATUS_OK
    hit = 0
    have_u0 = 0
    tau_u0 = NAN
    l_at_u0 = NAN
    have_l0 = 0
    tau_l0 = NAN
    l_at_l0 = NAN
    u_at_l0 = NAN
    ilt_jumps = 0
    exc_l = 0.0
    pinned = False
    track_ilt = unit_l is not None or ilt_events is not None
    n_units = 0 if unit_l is None else len(unit_l)
    next_unit = 1

    a = x0 + x_cum
    w = (a + l) - u
    if record is not None:
        record.append((t, a, w, l, u))

    if barrier != INF and x0 >= barrier:
        pinned = True
        have_u0 = 1
        tau_u0 = 0.0
        l_at_u0 = 0.0
        if stop_mode == STOP_UPPER:
            return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
                    tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)
    if stop_mode in (STOP_WLEVEL, STOP_EXIT) and w >= stop_a:
        hit = 1
        return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
                tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)

    uu = rng.next_uniform()
    next_jump = t + (-math.log1p(-uu) / lam)

    while True:
        n_steps += 1
        if n_steps > max_steps:
            status = STATUS_STEP_BUDGET
            break

        seg_end = next_jump
        is_time_stop = False
        if stop_mode == STOP_TIME and stop_a <= seg_end:
            seg_end = stop_a
            is_time_stop = True

        if not pinned:
            t_hit = INF
            if barrier != INF:
                # a zero-size jump draw can leave w at the barrier (ulp
                # noise included), so never place the contact in the past
                t_hit = t + (barrier - w) / drift
                if t_hit < t:
                    t_hit = t
            t_wstop = INF
            if stop_mode in (STOP_WLEVEL, STOP_EXIT) and w < stop_a:
                t_wstop = t + (stop_a - w) / drift
            if t_wstop <= seg_end and t_wstop <= t_hit:
                x_cum += stop_a - w
                t = t_wstop
                a = x0 + x_cum
                w = (a + l) - u
                hit = 1
                if record is not None:
                    record.append((t, a, w, l, u))
                break
            if t_hit <= seg_end:
                x_cum += barrier - w
                t = t_hit
                a = x0 + x_cum
                w = (a + l) - u
                pinned = True
                if not have_u0:
                    have_u0 = 1
                    tau_u0 = t
                    l_at_u0 = l
                elif track_ilt and l > exc_l:
                    # excursion from the barrier accumulated lower local
                    # time: one jump of the ladder process at level exc_u
                    ilt_jumps += 1
                    if ilt_events is not None:
                        ilt_events.append((u, l))
                if record is not None:
                    record.append((t, a, w, l, u))
                if stop_mode == STOP_UPPER:
                    break
                continue
            x_cum += drift * (seg_end - t)
            t = seg_end
            a = x0 + x_cum
            w = (a + l) - u
            if is_time_stop:
                if record is not None:
                    record.append((t, a, w, l, u))
                break
        else:
            du_full = drift * (seg_end - t)
            if stop_mode == STOP_ULEVEL and u + du_full >= stop_a:
                u_old = u
                du = stop_a - u
                t_stop = t + du / drift
                while next_unit <= n_units and stop_a > next_unit:
                    unit_t[next_unit - 1] = t + (next_unit - u_old) / drift
                    unit_l[next_unit - 1] = l
                    next_unit += 1
                x_cum += du
                u = stop_a
                t = t_stop
                while next_unit <= n_units and u >= next_unit:
                    unit_t[next_unit - 1] = t
                    unit_l[next_unit - 1] = l
                    next_unit += 1
                a = x0 + x_cum
                w = (a + l) - u
                if record is not None:
                    record.append((t, a, w, l, u))
                break
            u_old = u
            u_new = u + du_full
            while next_unit <= n_units and u_new > next_unit:
                unit_t[next_unit - 1] = t + (next_unit - u_old) / drift
                unit_l[next_unit - 1] = l
                next_unit += 1
            x_cum += du_full
            u = u_new
            t = seg_end
            a = x0 + x_cum
            w = (a + l) - u
            if is_time_stop:
                if record is not None:
                    record.append((t, a, w, l, u))
                break

        # jump at t == next_jump
        if n_jumps >= max_jumps:
            status = STATUS_JUMP_BUDGET
            break
        n_jumps += 1
        comp = 0
        if k > 1:
            v = rng.next_uniform()
            while comp < k - 1 and v >= cum_weights[comp]:
                comp += 1
        uu = rng.next_uniform()
        y = -math.log1p(-uu) / rates[comp]
        if pinned:
            pinned = False
            exc_l = l
            # ladder-level bookkeeping uses the frozen u via ilt_events
        x_cum -= y
        a = x0 + x_cum
        w = (a + l) - u
        stopped = False
        if reflect_lower and w < 0.0:
            if barrier == INF:
                neg_a = -a
                if neg_a > l:
                    l = neg_a
                w = (a + l) - u
            else:
                l += -w
                w = (a + l) - u
            if not have_l0:
                have_l0 = 1
                tau_l0 = t
                l_at_l0 = l
                u_at_l0 = u
            if stop_mode == STOP_LOWER:
                stopped = True
        elif (not reflect_lower) and stop_mode == STOP_EXIT and w < stop_b:
            hit = -1
            stopped = True
        if record is not None:
            record.append((t, a, w, l, u))
        if stopped:
            break
        uu = rng.next_uniform()
        next_jump = t + (-math.log1p(-uu) / lam)

    return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
            tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)


def run_euler(
    drift,
    sigma,
    lam,
    cum_weights,
    rates,
    dt,
    x0,
    barrier,
    reflect_lower,
    stop_mode,
    stop_a,
    stop_b,
    max_steps,
    max_jumps,
    rng,
    record=None,
    unit_l=None,
    unit_t=None,
    ilt_events=None,
):
    """Euler-grid path with exact jump epochs.

    Events are the grid ticks k*dt plus the exact jump times; per event the
    increment is drift*delta + N(0, sigma^2*delta) (+ the jump, if any) and
    reflection is applied lower-barrier-first.  Barrier contact between
    events is not bridge-corrected, so passage detection carries an O(dt)
    (local times: O(sqrt(dt))) bias.
    """
    k = len(rates)
    t = 0.0
    x_cum = 0.0
    l = 0.0
    u = 0.0
    kg = 0
    n_steps = 0
    n_jumps = 0
    status = STATUS_OK
    hit = 0
    have_u0 = 0
    tau_u0 = NAN
    l_at_u0 = NAN
    have_l0 = 0
    tau_l0 = NAN
    l_at_l0 = NAN
    u_at_l0 = NAN
    ilt_jumps = 0
    contact_l = 0.0
    track_ilt = unit_l is not None or ilt_events is not None
    n_units = 0 if unit_l is None else len(unit_l)
    next_unit = 1
    gauss = sigma > 0.0

    a = x0 + x_cum
    w = (a + l) - u
    if record is not None:
        record.append((t, a, w, l, u))

    if stop_mode in (STOP_WLEVEL, STOP_EXIT) and w >= stop_a:
        hit = 1
        return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
                tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)
    if stop_mode == STOP_TIME and stop_a <= 0.0:
        return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
                tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)

    if lam > 0.0:
        uu = rng.next_uniform()
        next_jump = t + (-math.log1p(-uu) / lam)
    else:
        next_jump = INF

    while True:
        n_steps += 1
        if n_steps > max_steps:
            status = STATUS_STEP_BUDGET
            break

        te = dt * (kg + 1)
        is_jump = False
        if next_jump <= te:
            te = next_jump
            is_jump = True
        is_time_stop = False
        if stop_mode == STOP_TIME and stop_a <= te:
            te = stop_a
            is_jump = False
            is_time_stop = True

        delta = te - t
        dx = drift * delta
        if gauss and delta > 0.0:
            dx += sigma * math.sqrt(delta) * rng.next_normal()
        if is_jump:
            if n_jumps >= max_jumps:
                status = STATUS_JUMP_BUDGET
                break
            n_jumps += 1
            comp = 0
            if k > 1:
                v = rng.next_uniform()
                while comp < k - 1 and v >= cum_weights[comp]:
                    comp += 1
            uu = rng.next_uniform()
            dx -= -math.log1p(-uu) / rates[comp]
        x_cum += dx
        t = te
        a = x0 + x_cum
        w = (a + l) - u
        stopped = False

        if reflect_lower and w < 0.0:
            if barrier == INF:
                neg_a = -a
                if neg_a > l:
                    l = neg_a
                w = (a + l) - u
            else:
                l += -w
                w = (a + l) - u
            if not have_l0:
                have_l0 = 1
                tau_l0 = t
                l_at_l0 = l
                u_at_l0 = u
            if stop_mode == STOP_LOWER:
                stopped = True
        elif (not reflect_lower) and stop_mode == STOP_EXIT and w < stop_b:
            hit = -1
            stopped = True

        if not stopped and barrier != INF and w > barrier:
            if have_u0 and track_ilt and l > contact_l:
                ilt_jumps += 1
                if ilt_events is not None:
                    ilt_events.append((u, l))
            du = w - barrier
            u += du
            w = (a + l) - u
            if not have_u0:
                have_u0 = 1
                tau_u0 = t
                l_at_u0 = l
            contact_l = l
            while next_unit <= n_units and u > next_unit:
                unit_t[next_unit - 1] = t
                unit_l[next_unit - 1] = l
                next_unit += 1
            if stop_mode == STOP_UPPER:
                stopped = True
            elif stop_mode == STOP_ULEVEL and u >= stop_a:
                while next_unit <= n_units and u >= next_unit:
                    unit_t[next_unit - 1] = t
                    unit_l[next_unit - 1] = l
                    next_unit += 1
                stopped = True

        if not stopped and stop_mode in (STOP_WLEVEL, STOP_EXIT) and w >= stop_a:
            hit = 1
            stopped = True

        if record is not None:
            record.append((t, a, w, l, u))
        if stopped or is_time_stop:
            break
        if is_jump:
            while dt * (kg + 1) <= t:
                kg += 1
            uu = rng.next_uniform()
            next_jump = t + (-math.log1p(-uu) / lam)
        else:
            kg += 1

    return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
            tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)
