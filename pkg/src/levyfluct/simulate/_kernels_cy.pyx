# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulator kernels.

Line-for-line port of ``_kernels_py``: identical state updates and random
consumption order, so paths are bit-identical to the pure-Python fallback.
See that module's docstring for the state and stream conventions.
"""

import numpy as np

from libc.math cimport INFINITY, NAN, log1p, sqrt

from .rng import CHUNK0, CHUNK_GROWTH, CHUNK_MAX

STOP_UPPER = 0
STOP_LOWER = 1
STOP_TIME = 2
STOP_ULEVEL = 3
STOP_WLEVEL = 4
STOP_EXIT = 5

STATUS_OK = 0
STATUS_STEP_BUDGET = 1
STATUS_JUMP_BUDGET = 2

cdef int _STOP_UPPER = 0
cdef int _STOP_LOWER = 1
cdef int _STOP_TIME = 2
cdef int _STOP_ULEVEL = 3
cdef int _STOP_WLEVEL = 4
cdef int _STOP_EXIT = 5

cdef int _STATUS_OK = 0
cdef int _STATUS_STEP_BUDGET = 1
cdef int _STATUS_JUMP_BUDGET = 2

_EMPTY = np.empty(0)


cdef class RandomSource:
    """Chunk-buffered uniform/normal stream over one numpy Generator.

    Preset arrays may be supplied instead of a generator to drive a path by
    hand; exhausting a preset raises RuntimeError.
    """

    cdef object _gen
    cdef double[::1] _u
    cdef double[::1] _n
    cdef Py_ssize_t _ui
    cdef Py_ssize_t _ni
    cdef Py_ssize_t _uchunk
    cdef Py_ssize_t _nchunk

    def __init__(self, gen=None, uniforms=None, normals=None):
        self._gen = gen
        self._u = (
            np.ascontiguousarray(uniforms, dtype=np.float64)
            if uniforms is not None else _EMPTY
        )
        self._n = (
            np.ascontiguousarray(normals, dtype=np.float64)
            if normals is not None else _EMPTY
        )
        self._ui = 0
        self._ni = 0
        self._uchunk = CHUNK0
        self._nchunk = CHUNK0

    cdef double _next_uniform(self) except? -1.0:
        cdef double v
        if self._ui == self._u.shape[0]:
            if self._gen is None:
                raise RuntimeError("preset uniform stream exhausted")
            self._u = self._gen.random(self._uchunk)
            self._ui = 0
            if self._uchunk < CHUNK_MAX:
                self._uchunk = min(self._uchunk * CHUNK_GROWTH, CHUNK_MAX)
        v = self._u[self._ui]
        self._ui += 1
        return v

    cdef double _next_normal(self) except? -1.0:
        cdef double v
        if self._ni == self._n.shape[0]:
            if self._gen is None:
                raise RuntimeError("preset normal stream exhausted")
            self._n = self._gen.standard_normal(self._nchunk)
            self._ni = 0
            if self._nchunk < CHUNK_MAX:
                self._nchunk = min(self._nchunk * CHUNK_GROWTH, CHUNK_MAX)
        v = self._n[self._ni]
        self._ni += 1
        return v

    def next_uniform(self):
        return self._next_uniform()

    def next_normal(self):
        return self._next_normal()


def run_exact(
    double drift,
    double lam,
    double[::1] cum_weights,
    double[::1] rates,
    double x0,
    double barrier,
    bint reflect_lower,
    int stop_mode,
    double stop_a,
    double stop_b,
    long max_steps,
    long max_jumps,
    RandomSource rng,
    object record=None,
    double[::1] unit_l=None,
    double[::1] unit_t=None,
    object ilt_events=None,
):
    """Event-exact path of the reflected bounded-variation process; see the
    pure-Python twin for the full contract."""
    cdef Py_ssize_t k = rates.shape[0]
    cdef double t = 0.0
    cdef double x_cum = 0.0
    cdef double l = 0.0
    cdef double u = 0.0
    cdef long n_steps = 0
    cdef long n_jumps = 0
    cdef int status = _STATUS_OK
    cdef int hit = 0
    cdef int have_u0 = 0
    cdef double tau_u0 = NAN
    cdef double l_at_u0 = NAN
    cdef int have_l0 = 0
    cdef double tau_l0 = NAN
    cdef double l_at_l0 = NAN
    cdef double u_at_l0 = NAN
    cdef long ilt_jumps = 0
    cdef double exc_l = 0.0
    cdef bint pinned = False
    cdef bint track_ilt = unit_l is not None or ilt_events is not None
    cdef Py_ssize_t n_units = 0 if unit_l is None else unit_l.shape[0]
    cdef Py_ssize_t next_unit = 1
    cdef bint recording = record is not None
    cdef bint eventing = ilt_events is not None

    cdef double a, w, seg_end, t_hit, t_wstop, du_full, du, t_stop
    cdef double u_old, u_new, uu, v, y, neg_a
    cdef bint is_time_stop, stopped
    cdef Py_ssize_t comp

    a = x0 + x_cum
    w = (a + l) - u
    if recording:
        record.append((t, a, w, l, u))

    if barrier != INFINITY and x0 >= barrier:
        pinned = True
        have_u0 = 1
        tau_u0 = 0.0
        l_at_u0 = 0.0
        if stop_mode == _STOP_UPPER:
            return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
                    tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)
    if (stop_mode == _STOP_WLEVEL or stop_mode == _STOP_EXIT) and w >= stop_a:
        hit = 1
        return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
                tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)

    uu = rng._next_uniform()
    cdef double next_jump = t + (-log1p(-uu) / lam)

    while True:
        n_steps += 1
        if n_steps > max_steps:
            status = _STATUS_STEP_BUDGET
            break

        seg_end = next_jump
        is_time_stop = False
        if stop_mode == _STOP_TIME and stop_a <= seg_end:
            seg_end = stop_a
            is_time_stop = True

        if not pinned:
            t_hit = INFINITY
            if barrier != INFINITY:
                # a zero-size jump draw can leave w at the barrier (ulp
                # noise included), so never place the contact in the past
                t_hit = t + (barrier - w) / drift
                if t_hit < t:
                    t_hit = t
            t_wstop = INFINITY
            if (stop_mode == _STOP_WLEVEL or stop_mode == _STOP_EXIT) and w < stop_a:
                t_wstop = t + (stop_a - w) / drift
            if t_wstop <= seg_end and t_wstop <= t_hit:
                x_cum += stop_a - w
                t = t_wstop
                a = x0 + x_cum
                w = (a + l) - u
                hit = 1
                if recording:
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
                    ilt_jumps += 1
                    if eventing:
                        ilt_events.append((u, l))
                if recording:
                    record.append((t, a, w, l, u))
                if stop_mode == _STOP_UPPER:
                    break
                continue
            x_cum += drift * (seg_end - t)
            t = seg_end
            a = x0 + x_cum
            w = (a + l) - u
            if is_time_stop:
                if recording:
                    record.append((t, a, w, l, u))
                break
        else:
            du_full = drift * (seg_end - t)
            if stop_mode == _STOP_ULEVEL and u + du_full >= stop_a:
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
                if recording:
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
                if recording:
                    record.append((t, a, w, l, u))
                break

        # jump at t == next_jump
        if n_jumps >= max_jumps:
            status = _STATUS_JUMP_BUDGET
            break
        n_jumps += 1
        comp = 0
        if k > 1:
            v = rng._next_uniform()
            while comp < k - 1 and v >= cum_weights[comp]:
                comp += 1
        uu = rng._next_uniform()
        y = -log1p(-uu) / rates[comp]
        if pinned:
            pinned = False
            exc_l = l
        x_cum -= y
        a = x0 + x_cum
        w = (a + l) - u
        stopped = False
        if reflect_lower and w < 0.0:
            if barrier == INFINITY:
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
            if stop_mode == _STOP_LOWER:
                stopped = True
        elif (not reflect_lower) and stop_mode == _STOP_EXIT and w < stop_b:
            hit = -1
            stopped = True
        if recording:
            record.append((t, a, w, l, u))
        if stopped:
            break
        uu = rng._next_uniform()
        next_jump = t + (-log1p(-uu) / lam)

    return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
            tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)


def run_euler(
    double drift,
    double sigma,
    double lam,
    double[::1] cum_weights,
    double[::1] rates,
    double dt,
    double x0,
    double barrier,
    bint reflect_lower,
    int stop_mode,
    double stop_a,
    double stop_b,
    long max_steps,
    long max_jumps,
    RandomSource rng,
    object record=None,
    double[::1] unit_l=None,
    double[::1] unit_t=None,
    object ilt_events=None,
):
    """Euler-grid path with exact jump epochs; see the pure-Python twin."""
    cdef Py_ssize_t k = rates.shape[0]
    cdef double t = 0.0
    cdef double x_cum = 0.0
    cdef double l = 0.0
    cdef double u = 0.0
    cdef long kg = 0
    cdef long n_steps = 0
    cdef long n_jumps = 0
    cdef int status = _STATUS_OK
    cdef int hit = 0
    cdef int have_u0 = 0
    cdef double tau_u0 = NAN
    cdef double l_at_u0 = NAN
    cdef int have_l0 = 0
    cdef double tau_l0 = NAN
    cdef double l_at_l0 = NAN
    cdef double u_at_l0 = NAN
    cdef long ilt_jumps = 0
    cdef double contact_l = 0.0
    cdef bint track_ilt = unit_l is not None or ilt_events is not None
    cdef Py_ssize_t n_units = 0 if unit_l is None else unit_l.shape[0]
    cdef Py_ssize_t next_unit = 1
    cdef bint gauss = sigma > 0.0
    cdef bint recording = record is not None
    cdef bint eventing = ilt_events is not None

    cdef double a, w, te, delta, dx, uu, v, du, neg_a
    cdef double next_jump
    cdef bint is_jump, is_time_stop, stopped
    cdef Py_ssize_t comp

    a = x0 + x_cum
    w = (a + l) - u
    if recording:
        record.append((t, a, w, l, u))

    if (stop_mode == _STOP_WLEVEL or stop_mode == _STOP_EXIT) and w >= stop_a:
        hit = 1
        return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
                tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)
    if stop_mode == _STOP_TIME and stop_a <= 0.0:
        return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
                tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)

    if lam > 0.0:
        uu = rng._next_uniform()
        next_jump = t + (-log1p(-uu) / lam)
    else:
        next_jump = INFINITY

    while True:
        n_steps += 1
        if n_steps > max_steps:
            status = _STATUS_STEP_BUDGET
            break

        te = dt * (kg + 1)
        is_jump = False
        if next_jump <= te:
            te = next_jump
            is_jump = True
        is_time_stop = False
        if stop_mode == _STOP_TIME and stop_a <= te:
            te = stop_a
            is_jump = False
            is_time_stop = True

        delta = te - t
        dx = drift * delta
        if gauss and delta > 0.0:
            dx += sigma * sqrt(delta) * rng._next_normal()
        if is_jump:
            if n_jumps >= max_jumps:
                status = _STATUS_JUMP_BUDGET
                break
            n_jumps += 1
            comp = 0
            if k > 1:
                v = rng._next_uniform()
                while comp < k - 1 and v >= cum_weights[comp]:
                    comp += 1
            uu = rng._next_uniform()
            dx -= -log1p(-uu) / rates[comp]
        x_cum += dx
        t = te
        a = x0 + x_cum
        w = (a + l) - u
        stopped = False

        if reflect_lower and w < 0.0:
            if barrier == INFINITY:
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
            if stop_mode == _STOP_LOWER:
                stopped = True
        elif (not reflect_lower) and stop_mode == _STOP_EXIT and w < stop_b:
            hit = -1
            stopped = True

        if not stopped and barrier != INFINITY and w > barrier:
            if have_u0 and track_ilt and l > contact_l:
                ilt_jumps += 1
                if eventing:
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
            if stop_mode == _STOP_UPPER:
                stopped = True
            elif stop_mode == _STOP_ULEVEL and u >= stop_a:
                while next_unit <= n_units and u >= next_unit:
                    unit_t[next_unit - 1] = t
                    unit_l[next_unit - 1] = l
                    next_unit += 1
                stopped = True

        if not stopped and (stop_mode == _STOP_WLEVEL or stop_mode == _STOP_EXIT) and w >= stop_a:
            hit = 1
            stopped = True

        if recording:
            record.append((t, a, w, l, u))
        if stopped or is_time_stop:
            break
        if is_jump:
            while dt * (kg + 1) <= t:
                kg += 1
            uu = rng._next_uniform()
            next_jump = t + (-log1p(-uu) / lam)
        else:
            kg += 1

    return (status, hit, t, a, w, l, u, tau_u0, l_at_u0, have_u0,
            tau_l0, l_at_l0, u_at_l0, have_l0, n_steps, n_jumps, ilt_jumps)
