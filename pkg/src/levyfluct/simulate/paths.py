"""Reflected paths, passage records and Monte Carlo estimators.

Every estimator derives per-path randomness from a splittable counter-based
stream keyed by (seed, stream_offset + path_index) and merges per-path
results in path-index order, so estimates are bit-identical for a given
seed regardless of the degree of parallelism (capped by the
LEVYFLUCT_THREADS environment variable) or of the kernel backend.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    DomainError,
    InvalidValueError,
    NonTerminationError,
    UnsupportedSpecError,
)
from ..model import ProcessSpec
from . import _backend
from .rng import StreamFactory, path_generator

__all__ = [
    "MAX_STEPS",
    "MAX_JUMPS",
    "StopRule",
    "PassageRecord",
    "ReflectedPath",
    "McEstimate",
    "InverseLocalTimeEstimate",
    "simulate_event_exact",
    "simulate_euler",
    "one_sided_lower_reflection",
    "estimate_passage_functional",
    "estimate_two_sided_exit",
    "estimate_inverse_local_time_process",
    "estimate_minimum_transform",
    "estimate_first_jump_transform",
]

# Hard per-path budgets; exceeding either signals parameter pathology.
MAX_STEPS = 10**8
MAX_JUMPS = 10**6

_CHUNK_PATHS = 2048

_K = _backend.kernels()

_STOP_CODES = {
    "first-upper": _K.STOP_UPPER,
    "first-lower": _K.STOP_LOWER,
    "time": _K.STOP_TIME,
    "u-level": _K.STOP_ULEVEL,
    "w-level": _K.STOP_WLEVEL,
}


@dataclass(frozen=True)
class StopRule:
    """Stop condition for a single simulated path."""

    kind: str
    value: float | None = None

    def __post_init__(self):
        if self.kind not in _STOP_CODES:
            raise DomainError(f"unknown stop rule {self.kind!r}")
        if self.kind in ("time", "u-level", "w-level"):
            if self.value is None or not self.value > 0.0:
                raise DomainError(f"stop rule {self.kind!r} needs a positive value")
        elif self.value is not None:
            raise DomainError(f"stop rule {self.kind!r} takes no value")

    @classmethod
    def first_upper(cls):
        return cls("first-upper")

    @classmethod
    def first_lower(cls):
        return cls("first-lower")

    @classmethod
    def time(cls, horizon: float):
        return cls("time", float(horizon))

    @classmethod
    def u_level(cls, level: float):
        return cls("u-level", float(level))

    @classmethod
    def w_level(cls, level: float):
        return cls("w-level", float(level))


@dataclass(frozen=True)
class PassageRecord:
    """First-passage bookkeeping of one path (NaN when not observed).

    tau_u0 is the first strict-increase time of the upper regulator (the
    passage of the one-sided reflection over the barrier; no overshoot),
    tau_l0 the first strict-increase time of the lower regulator, with the
    overshoot l_at_tau_l0 and the upper local time spent by then.
    """

    tau_u0: float
    l_at_tau_u0: float
    tau_l0: float
    l_at_tau_l0: float
    u_at_tau_l0: float


@dataclass
class ReflectedPath:
    """Realization of the two-sided Skorokhod solution at recorded events.

    ``x`` holds the unregulated process value X(t) (starting at x0), and
    ``w = (x + l) - u`` holds bit-exactly at every row because the kernels
    build w through that expression.
    """

    times: np.ndarray
    x: np.ndarray
    w: np.ndarray
    l: np.ndarray
    u: np.ndarray
    b: float
    x0: float
    mode: str
    passage: PassageRecord
    status: int = 0

    @property
    def x_incr(self) -> np.ndarray:
        """Per-interval increments of the unregulated process."""
        return np.diff(self.x, prepend=self.x0)

    def check_invariants(self) -> None:
        """Assert the structural path invariants; raises AssertionError."""
        scale = 1.0 + float(np.max(np.abs(self.x)) + self.l[-1] + self.u[-1])
        if math.isfinite(self.b):
            scale = max(scale, self.b)
        eps = 1e-9 * scale
        assert np.all(np.diff(self.times) >= 0.0), "times must be nondecreasing"
        assert self.l[0] == 0.0 and self.u[0] == 0.0, "regulators must start at 0"
        assert np.all(np.diff(self.l) >= 0.0), "l must be nondecreasing"
        assert np.all(np.diff(self.u) >= 0.0), "u must be nondecreasing"
        assert np.array_equal(self.w, (self.x + self.l) - self.u), (
            "w must reconstruct exactly from x, l, u"
        )
        assert np.all(self.w >= -eps), "w must stay above the lower barrier"
        if math.isfinite(self.b):
            assert np.all(self.w <= self.b + eps), "w must stay below the barrier"
        dl = np.diff(self.l)
        du = np.diff(self.u)
        rows_l = np.nonzero(dl > 0.0)[0] + 1
        assert np.all(np.abs(self.w[rows_l]) <= eps), (
            "l may only increase when the path is pushed off 0"
        )
        rows_u = np.nonzero(du > 0.0)[0] + 1
        if self.mode == "event-exact":
            # u accrues between a barrier-contact row and the next event
            assert np.all(np.abs(self.w[rows_u - 1] - self.b) <= eps), (
                "u may only accrue while pinned at the barrier"
            )
        else:
            assert np.all(np.abs(self.w[rows_u] - self.b) <= eps), (
                "u may only increase when the path is pushed off the barrier"
            )


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate with its standard error."""

    mean: float
    std_error: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidValueError("McEstimate needs n >= 1")
        if not self.std_error >= 0.0:
            raise InvalidValueError("std_error must be >= 0")


def _mc(values: np.ndarray) -> McEstimate:
    n = len(values)
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(mean=mean, std_error=se, n=n)


def _thread_count() -> int:
    raw = os.environ.get("LEVYFLUCT_THREADS", "")
    try:
        n = int(raw) if raw else 1
    except ValueError:
        n = 1
    return max(1, n)


def _map_paths(task, n_paths: int, seed: int, stream_offset: int):
    """Run task(i, gen) over i in range(n_paths) and merge the results in
    path-index order; gen is the path's counter-based stream."""
    threads = _thread_count()
    spans = [
        (lo, min(n_paths, lo + _CHUNK_PATHS))
        for lo in range(0, n_paths, _CHUNK_PATHS)
    ]

    def run_span(span):
        lo, hi = span
        factory = StreamFactory(seed)
        return [task(i, factory.generator(stream_offset + i)) for i in range(lo, hi)]

    if threads <= 1 or len(spans) <= 1:
        out: list = []
        for span in spans:
            out.extend(run_span(span))
        return out
    out = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for part in pool.map(run_span, spans):
            out.extend(part)
    return out


def _mixture_arrays(spec: ProcessSpec):
    if spec.jump_intensity == 0.0:
        return np.empty(0), np.empty(0)
    weights = np.array([w for w, _ in spec.jump_mixture])
    rates = np.array([m for _, m in spec.jump_mixture])
    return np.cumsum(weights), rates


def _select_mode(spec: ProcessSpec, dt: float | None) -> str:
    if dt is not None:
        if not dt > 0.0:
            raise DomainError(f"dt must be > 0, got {dt}")
        return "euler"
    if spec.gaussian_sq > 0.0:
        raise DomainError("a Gaussian component requires the Euler mode: pass dt")
    return "event-exact"


def _run_path(spec, x0, barrier, reflect_lower, stop_code, stop_a, stop_b,
              rng, dt, record=None, unit_l=None, unit_t=None, ilt_events=None):
    cum_w, rates = _mixture_arrays(spec)
    if dt is None:
        return _K.run_exact(
            spec.drift, spec.jump_intensity, cum_w, rates, x0, barrier,
            reflect_lower, stop_code, stop_a, stop_b, MAX_STEPS, MAX_JUMPS,
            rng, record, unit_l, unit_t, ilt_events,
        )
    return _K.run_euler(
        spec.drift, math.sqrt(spec.gaussian_sq), spec.jump_intensity, cum_w,
        rates, dt, x0, barrier, reflect_lower, stop_code, stop_a, stop_b,
        MAX_STEPS, MAX_JUMPS, rng, record, unit_l, unit_t, ilt_events,
    )


def _check_status(status: int, path_index: int) -> None:
    if status == _K.STATUS_STEP_BUDGET:
        raise NonTerminationError(
            f"path {path_index} exceeded {MAX_STEPS} steps; "
            "parameters look pathological"
        )
    if status == _K.STATUS_JUMP_BUDGET:
        raise NonTerminationError(
            f"path {path_index} exceeded {MAX_JUMPS} jump events"
        )


def _build_path(record, result, b, x0, mode) -> ReflectedPath:
    arr = np.array(record, dtype=np.float64)
    (status, _hit, _t, _a, _w, _l, _u, tau_u0, l_at_u0, have_u0,
     tau_l0, l_at_l0, u_at_l0, have_l0, _ns, _nj, _ilt) = result
    passage = PassageRecord(
        tau_u0=tau_u0 if have_u0 else math.nan,
        l_at_tau_u0=l_at_u0 if have_u0 else math.nan,
        tau_l0=tau_l0 if have_l0 else math.nan,
        l_at_tau_l0=l_at_l0 if have_l0 else math.nan,
        u_at_tau_l0=u_at_l0 if have_l0 else math.nan,
    )
    return ReflectedPath(
        times=arr[:, 0], x=arr[:, 1], w=arr[:, 2], l=arr[:, 3], u=arr[:, 4],
        b=b, x0=x0, mode=mode, passage=passage, status=status,
    )


def _stop_to_kernel(stop: StopRule):
    code = _STOP_CODES[stop.kind]
    value = stop.value if stop.value is not None else 0.0
    return code, value


# -- path-producing operations ----------------------------------------------


def simulate_event_exact(
    spec: ProcessSpec, x0: float, b: float, stop: StopRule, seed: int,
    stream_index: int = 0,
) -> ReflectedPath:
    """Exact piecewise-deterministic path of a bounded-variation spec
    reflected in [0, b].  Deterministic given (seed, stream_index)."""
    if spec.gaussian_sq > 0.0:
        raise UnsupportedSpecError(
            "event-exact simulation requires sigma^2 = 0; use simulate_euler"
        )
    _check_two_sided_start(x0, b)
    code, value = _stop_to_kernel(stop)
    rng = _K.RandomSource(path_generator(seed, stream_index))
    record: list = []
    result = _run_path(spec, x0, b, True, code, value, 0.0, rng, None, record)
    _check_status(result[0], stream_index)
    return _build_path(record, result, b, x0, "event-exact")


def simulate_euler(
    spec: ProcessSpec, x0: float, b: float, dt: float, stop: StopRule,
    seed: int, stream_index: int = 0,
) -> ReflectedPath:
    """Euler-grid path (exact jump epochs) reflected in [0, b]."""
    if not dt > 0.0:
        raise DomainError(f"dt must be > 0, got {dt}")
    _check_two_sided_start(x0, b)
    code, value = _stop_to_kernel(stop)
    rng = _K.RandomSource(path_generator(seed, stream_index))
    record: list = []
    result = _run_path(spec, x0, b, True, code, value, 0.0, rng, dt, record)
    _check_status(result[0], stream_index)
    return _build_path(record, result, b, x0, "euler")


def one_sided_lower_reflection(
    spec: ProcessSpec, x0: float, stop: StopRule, seed: int,
    dt: float | None = None, stream_index: int = 0,
) -> ReflectedPath:
    """Path reflected at 0 only (barrier at infinity), so u is identically 0
    and l(t) = -min(min_s (x0 + X(s) - X(0)), 0) by the running-minimum
    form, which the kernels apply verbatim in this mode."""
    if x0 < 0.0:
        raise DomainError(f"x0 must be >= 0, got {x0}")
    if stop.kind not in ("time", "w-level"):
        raise DomainError("one-sided reflection needs a time- or level-bounded stop")
    mode = _select_mode(spec, dt)
    code, value = _stop_to_kernel(stop)
    rng = _K.RandomSource(path_generator(seed, stream_index))
    record: list = []
    result = _run_path(
        spec, x0, math.inf, True, code, value, 0.0, rng,
        dt if mode == "euler" else None, record,
    )
    _check_status(result[0], stream_index)
    return _build_path(record, result, math.inf, x0, mode)


def _check_two_sided_start(x0: float, b: float) -> None:
    if not b > 0.0:
        raise DomainError(f"barrier b must be > 0, got {b}")
    if not 0.0 <= x0 <= b:
        raise DomainError(f"x0 must lie in [0, {b}], got {x0}")


# -- estimators ---------------------------------------------------------------


def estimate_passage_functional(
    spec: ProcessSpec,
    q: float,
    alpha: float,
    theta: float,
    x0: float,
    b: float,
    which: str,
    n_paths: int,
    seed: int,
    dt: float | None = None,
    stream_offset: int = 0,
) -> McEstimate:
    """Sample mean and standard error of the passage functional
    exp(-alpha*L(T_u) - q*T_u)             (which="upper") or
    exp(-alpha*L(T_l) - theta*U(T_l) - q*T_l)  (which="lower")
    over independent replications."""
    if which not in ("upper", "lower"):
        raise DomainError(f"which must be 'upper' or 'lower', got {which!r}")
    if n_paths < 2:
        raise DomainError("n_paths must be >= 2")
    if q < 0.0 or theta < 0.0:
        raise DomainError("q and theta must be >= 0")
    _check_two_sided_start(x0, b)
    if which == "upper" and x0 == b:
        # the upper regulator starts increasing immediately: the functional
        # is 1 on every path
        return McEstimate(mean=1.0, std_error=0.0, n=n_paths)
    mode = _select_mode(spec, dt)
    use_dt = dt if mode == "euler" else None
    code = _K.STOP_UPPER if which == "upper" else _K.STOP_LOWER

    def task(i: int, gen) -> float:
        rng = _K.RandomSource(gen)
        res = _run_path(spec, x0, b, True, code, 0.0, 0.0, rng, use_dt)
        _check_status(res[0], i)
        if which == "upper":
            return math.exp(-alpha * res[8] - q * res[7])
        return math.exp(-alpha * res[11] - theta * res[12] - q * res[10])

    return _mc(np.array(_map_paths(task, n_paths, seed, stream_offset)))


def estimate_two_sided_exit(
    spec: ProcessSpec,
    q: float,
    a: float,
    b: float,
    n_paths: int,
    seed: int,
    dt: float | None = None,
    stream_offset: int = 0,
) -> McEstimate:
    """Sample transform of the unreflected two-sided exit: each path starts
    at 0, contributes exp(-q*T) when it creeps over b before dropping below
    -a and 0 otherwise."""
    if a < 0.0 or b < 0.0 or a + b <= 0.0:
        raise DomainError("need a, b >= 0 with a + b > 0")
    if n_paths < 2:
        raise DomainError("n_paths must be >= 2")
    mode = _select_mode(spec, dt)
    use_dt = dt if mode == "euler" else None

    def task(i: int, gen) -> float:
        rng = _K.RandomSource(gen)
        res = _run_path(
            spec, 0.0, math.inf, False, _K.STOP_EXIT, b, -a, rng, use_dt
        )
        _check_status(res[0], i)
        return math.exp(-q * res[2]) if res[1] == 1 else 0.0

    return _mc(np.array(_map_paths(task, n_paths, seed, stream_offset)))


@dataclass
class InverseLocalTimeEstimate:
    """Empirical law of the ladder process x -> L(T_x) on the u-grid.

    Unpacks as (jump_rate, increment_transform)."""

    jump_rate: McEstimate
    x_max: float
    n_paths: int
    dl: np.ndarray
    dtau: np.ndarray
    events: list | None = field(default=None, repr=False)

    def increment_transform(self, alpha: float, q: float = 0.0) -> McEstimate:
        """Sample transform E exp(-alpha*dL - q*dT) of the unit-x increments
        of (L(T_x), T_x), pooled over paths."""
        return _mc(np.exp(-alpha * self.dl - q * self.dtau))

    def __iter__(self):
        yield self.jump_rate
        yield self.increment_transform


def estimate_inverse_local_time_process(
    spec: ProcessSpec,
    b: float,
    x_max: float,
    n_paths: int,
    seed: int,
    dt: float | None = None,
    stream_offset: int = 0,
    collect_events: bool = False,
) -> InverseLocalTimeEstimate:
    """Run each path (started at the barrier) until u >= x_max, recording
    L(T_x) on the integer u-grid and counting the jumps of x -> L(T_x).

    jump_rate averages (jumps / x_max) over paths; the pooled unit-x
    increments back increment_transform.  collect_events additionally keeps
    the per-path ladder jump sequence [(level, L after)] for
    occupation-type functionals.
    """
    if not b > 0.0:
        raise DomainError(f"barrier b must be > 0, got {b}")
    if not x_max > 0.0:
        raise DomainError(f"x_max must be > 0, got {x_max}")
    if n_paths < 2:
        raise DomainError("n_paths must be >= 2")
    mode = _select_mode(spec, dt)
    use_dt = dt if mode == "euler" else None
    n_units = int(math.floor(x_max))

    def task(i: int, gen):
        rng = _K.RandomSource(gen)
        unit_l = np.full(n_units, math.nan)
        unit_t = np.full(n_units, math.nan)
        events: list | None = [] if collect_events else None
        res = _run_path(
            spec, b, b, True, _K.STOP_ULEVEL, x_max, 0.0, rng, use_dt,
            None, unit_l, unit_t, events,
        )
        _check_status(res[0], i)
        base_l, base_t = res[8], res[7]
        dl = np.diff(unit_l, prepend=base_l)
        dtau = np.diff(unit_t, prepend=base_t)
        return res[16], dl, dtau, events

    parts = _map_paths(task, n_paths, seed, stream_offset)
    rates = np.array([p[0] / x_max for p in parts])
    dl = np.concatenate([p[1] for p in parts]) if n_units else np.empty(0)
    dtau = np.concatenate([p[2] for p in parts]) if n_units else np.empty(0)
    events = [p[3] for p in parts] if collect_events else None
    return InverseLocalTimeEstimate(
        jump_rate=_mc(rates), x_max=x_max, n_paths=n_paths,
        dl=dl, dtau=dtau, events=events,
    )


def estimate_minimum_transform(
    spec: ProcessSpec,
    alpha: float,
    horizon: float,
    n_paths: int,
    seed: int,
    dt: float | None = None,
    stream_offset: int = 0,
) -> McEstimate:
    """Sample mean of exp(alpha * min_{t <= horizon} X(t)) for paths started
    at 0; with positive mean and a long horizon this estimates the
    all-time-minimum transform."""
    if not alpha > 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    if not horizon > 0.0:
        raise DomainError(f"horizon must be > 0, got {horizon}")
    if n_paths < 2:
        raise DomainError("n_paths must be >= 2")
    mode = _select_mode(spec, dt)
    use_dt = dt if mode == "euler" else None

    def task(i: int, gen) -> float:
        rng = _K.RandomSource(gen)
        res = _run_path(
            spec, 0.0, math.inf, True, _K.STOP_TIME, horizon, 0.0, rng, use_dt
        )
        _check_status(res[0], i)
        return math.exp(-alpha * res[5])  # min X = -l for x0 = 0

    return _mc(np.array(_map_paths(task, n_paths, seed, stream_offset)))


def estimate_first_jump_transform(
    rate: float,
    mixture,
    alpha: float,
    theta: float,
    n_paths: int,
    seed: int,
    jump_sign: float = -1.0,
    stream_offset: int = 0,
) -> McEstimate:
    """Sample mean of exp(-alpha*X(J) - theta*J) where J is the first jump
    epoch of a compound Poisson process with the given arrival rate and
    hyperexponential magnitude law, jumping by jump_sign * magnitude."""
    if not rate > 0.0:
        raise DomainError(f"rate must be > 0, got {rate}")
    if theta < 0.0:
        raise DomainError(f"theta must be >= 0, got {theta}")
    if n_paths < 2:
        raise DomainError("n_paths must be >= 2")
    weights = np.array([w for w, _ in mixture])
    rates = np.array([m for _, m in mixture])
    gen = path_generator(seed, stream_offset)
    epochs = gen.exponential(1.0 / rate, size=n_paths)
    comps = np.searchsorted(np.cumsum(weights), gen.random(n_paths), side="right")
    comps = np.minimum(comps, len(rates) - 1)
    sizes = gen.exponential(1.0, size=n_paths) / rates[comps]
    values = np.exp(-alpha * (jump_sign * sizes) - theta * epochs)
    return _mc(values)
