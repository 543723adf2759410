"""Spectrally negative Levy process parameterization.

The process family is linear drift plus a Brownian component plus compound
Poisson downward jumps with hyperexponential magnitudes:

    X(t) = c*t + sigma*B(t) - sum_{i <= N(t)} xi_i,   xi ~ sum_j w_j Exp(m_j)

Its Laplace exponent, defined by E exp(a*X(t)) = exp(phi(a)*t), is the
rational function

    phi(a) = c*a + (sigma2/2)*a^2 - lam * a * sum_j w_j / (m_j + a),

finite for a > -min_j m_j, convex on a >= 0 and exactly zero at a = 0.
This module owns the parameter validation, the exponent and its derivative,
the right inverse of the exponent, and the exponential tilt that turns a
discounted problem into an undiscounted one for a process of the same
family with positive drift.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import (
    BadMixtureError,
    ConvergenceFailure,
    DomainError,
    InvalidValueError,
    MonotonePathError,
    NegativeParameterError,
    ParseError,
    UnknownKeyError,
)

__all__ = [
    "ProcessSpec",
    "TiltedSpec",
    "validate_spec",
    "phi",
    "phi_prime",
    "right_inverse",
    "tilt",
    "spec_from_json",
    "spec_to_json",
]

_WEIGHT_SUM_TOL = 1e-12
_ROOT_RTOL = 1e-12
# doubling past this would overflow; roots beyond it are not representable
_BRACKET_MAX = 2.0**1022


@dataclass(frozen=True)
class ProcessSpec:
    """Validated parameters of a spectrally negative Levy process.

    Attributes:
        drift: linear drift coefficient c (space/time).
        gaussian_sq: Gaussian coefficient sigma^2 >= 0 (space^2/time).
        jump_intensity: arrival rate of downward jumps >= 0 (1/time).
        jump_mixture: tuple of (weight, rate) pairs describing the
            hyperexponential law of the jump magnitude; weights sum to one;
            empty exactly when jump_intensity == 0.

    Instances are immutable and safe for unrestricted concurrent reads.
    """

    drift: float
    gaussian_sq: float = 0.0
    jump_intensity: float = 0.0
    jump_mixture: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        drift = _finite_float(self.drift, "drift")
        sigma2 = _finite_float(self.gaussian_sq, "gaussian_sq")
        lam = _finite_float(self.jump_intensity, "jump_intensity")
        if sigma2 < 0.0:
            raise NegativeParameterError("gaussian_sq must be >= 0")
        if lam < 0.0:
            raise NegativeParameterError("jump_intensity must be >= 0")

        mixture = tuple(
            (_finite_float(w, "mixture weight"), _finite_float(m, "mixture rate"))
            for (w, m) in self.jump_mixture
        )
        if lam == 0.0:
            if mixture:
                raise BadMixtureError("mixture must be empty when jump_intensity is 0")
        else:
            if not mixture:
                raise BadMixtureError("mixture must be nonempty when jump_intensity > 0")
            for w, m in mixture:
                if not 0.0 < w <= 1.0:
                    raise BadMixtureError(f"mixture weight {w} not in (0, 1]")
                if m <= 0.0:
                    raise BadMixtureError(f"mixture rate {m} not > 0")
            total = math.fsum(w for w, _ in mixture)
            if abs(total - 1.0) > _WEIGHT_SUM_TOL:
                raise BadMixtureError(f"mixture weights sum to {total!r}, expected 1")

        if sigma2 == 0.0 and lam == 0.0:
            raise MonotonePathError("sigma^2 = 0 with no jumps gives a deterministic path")
        if sigma2 == 0.0 and drift <= 0.0:
            raise MonotonePathError(
                "sigma^2 = 0 with drift <= 0 gives a nonincreasing path"
            )

        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "gaussian_sq", sigma2)
        object.__setattr__(self, "jump_intensity", lam)
        object.__setattr__(self, "jump_mixture", mixture)

    # -- exponent ---------------------------------------------------------

    def exponent(self, a):
        """Laplace exponent phi(a); accepts scalars, complex values or
        numpy arrays on the analyticity domain Re(a) > -min rate."""
        jump = 0.0
        if self.jump_intensity > 0.0:
            acc = 0.0
            for w, m in self.jump_mixture:
                acc = acc + w / (m + a)
            jump = -self.jump_intensity * a * acc
        return self.drift * a + 0.5 * self.gaussian_sq * a * a + jump

    def exponent_derivative(self, a):
        """Analytic derivative phi'(a) on the same domain as exponent()."""
        jump = 0.0
        if self.jump_intensity > 0.0:
            acc = 0.0
            for w, m in self.jump_mixture:
                acc = acc + w * m / ((m + a) * (m + a))
            jump = -self.jump_intensity * acc
        return self.drift + self.gaussian_sq * a + jump

    @property
    def mean(self) -> float:
        """E X(1) = phi'(0+)."""
        return self.exponent_derivative(0.0)

    @property
    def min_jump_rate(self) -> float:
        """Smallest mixture rate; +inf when the process has no jumps.

        The exponent is finite exactly for arguments above its negative."""
        if not self.jump_mixture:
            return math.inf
        return min(m for _, m in self.jump_mixture)

    def jump_size_transform(self, a):
        """E exp(-a*xi) for the jump magnitude xi; finite for a > -min rate."""
        if not self.jump_mixture:
            raise DomainError("spec has no jumps")
        return sum(w * m / (m + a) for w, m in self.jump_mixture)


@dataclass(frozen=True)
class TiltedSpec:
    """Exponentially tilted process bound to a discount rate q > 0.

    Under the tilt the exponent becomes psi(a) = phi(a + Phi(q)) - q, which
    for the hyperexponential family is again in the family: ``process``
    carries the re-parameterized spec (drift c + sigma^2*Phi(q), rates
    shifted by Phi(q), intensity scaled by E exp(-Phi(q)*xi)).  The tilted
    process has positive drift: psi'(0) = phi'(Phi(q)) > 0.
    """

    base: ProcessSpec
    q: float
    phi_q: float
    process: ProcessSpec = field(compare=False)

    def exponent(self, a):
        return self.process.exponent(a)

    def exponent_derivative(self, a):
        return self.process.exponent_derivative(a)

    @property
    def mean(self) -> float:
        return self.process.mean


def _finite_float(x, name: str) -> float:
    if isinstance(x, bool):
        raise InvalidValueError(f"{name} must be a number, got a boolean")
    try:
        v = float(x)
    except (TypeError, ValueError) as exc:
        raise InvalidValueError(f"{name} must be a number, got {x!r}") from exc
    if not math.isfinite(v):
        raise InvalidValueError(f"{name} must be finite, got {v!r}")
    return v


def validate_spec(
    drift,
    gaussian_sq=0.0,
    jump_intensity=0.0,
    jump_mixture=(),
) -> ProcessSpec:
    """Validate raw parameters and return a ProcessSpec.

    Raises MonotonePathError, BadMixtureError, NegativeParameterError or
    InvalidValueError naming the violated invariant.
    """
    return ProcessSpec(
        drift=drift,
        gaussian_sq=gaussian_sq,
        jump_intensity=jump_intensity,
        jump_mixture=tuple(tuple(pair) for pair in jump_mixture),
    )


def phi(spec: ProcessSpec, alpha: float) -> float:
    """Laplace exponent phi(alpha) for real alpha >= 0."""
    if alpha < 0.0:
        raise DomainError(f"phi requires alpha >= 0, got {alpha}")
    return float(spec.exponent(alpha))


def phi_prime(spec: ProcessSpec, alpha: float) -> float:
    """Derivative phi'(alpha) for real alpha >= 0; phi'(0) is the mean."""
    if alpha < 0.0:
        raise DomainError(f"phi_prime requires alpha >= 0, got {alpha}")
    return float(spec.exponent_derivative(alpha))


def right_inverse(spec: ProcessSpec, q: float) -> float:
    """Largest nonnegative solution Phi(q) of phi(alpha) = q.

    For q > 0 this is the unique positive root; for q = 0 it is 0 when
    phi'(0) >= 0 and the positive root otherwise.  The residual satisfies
    |phi(Phi(q)) - q| <= 1e-12 * max(1, q).
    """
    q = float(q)
    if q < 0.0:
        raise DomainError(f"right_inverse requires q >= 0, got {q}")
    if q == 0.0:
        if spec.exponent_derivative(0.0) >= 0.0:
            return 0.0
        # phi dips negative immediately; bracket the far positive root.
        lo = 1.0
        while spec.exponent(lo) >= 0.0:
            lo *= 0.5
            if lo < 1e-300:
                raise ConvergenceFailure("could not bracket the positive root of phi")
        hi = max(2.0 * lo, 1.0)
        while spec.exponent(hi) <= 0.0:
            if hi >= _BRACKET_MAX:
                raise ConvergenceFailure(
                    "positive root of phi exceeds the double range"
                )
            hi *= 2.0
        return _newton_bracketed(spec, 0.0, lo, hi)

    hi = 1.0
    while spec.exponent(hi) <= q:
        if hi >= _BRACKET_MAX:
            raise ConvergenceFailure("Phi(q) exceeds the double range")
        hi *= 2.0
    return _newton_bracketed(spec, q, 0.0, hi)


def _newton_bracketed(spec: ProcessSpec, q: float, lo: float, hi: float) -> float:
    """Safeguarded Newton for phi(x) = q on a sign-changing bracket.

    phi is convex and increasing at the sought root, so Newton from the
    upper end converges monotonically; bisection guards pathological steps.
    """
    tol = _ROOT_RTOL * max(1.0, abs(q))
    x = hi
    fx = spec.exponent(x) - q
    for _ in range(200):
        if fx == 0.0:
            return x
        if fx > 0.0:
            hi = x
        else:
            lo = x
        d = spec.exponent_derivative(x)
        step = fx / d if d != 0.0 else math.nan
        xn = x - step
        if not (lo < xn < hi) or not math.isfinite(xn):
            xn = 0.5 * (lo + hi)
        if xn == x:
            break
        x = xn
        fx = spec.exponent(x) - q
    if abs(spec.exponent(x) - q) <= tol:
        return x
    raise ConvergenceFailure(
        f"right inverse did not reach residual {tol:g} (q={q}, x={x})"
    )


def tilt(spec: ProcessSpec, q: float) -> TiltedSpec:
    """Exponential tilt at rate q > 0.

    Returns a TiltedSpec whose ``process`` realizes psi(a) = phi(a+Phi(q))-q
    within the same parametric family.
    """
    q = float(q)
    if q <= 0.0:
        raise DomainError(f"tilt requires q > 0, got {q}")
    p = right_inverse(spec, q)
    return TiltedSpec(base=spec, q=q, phi_q=p, process=shifted_spec(spec, p))


def shifted_spec(spec: ProcessSpec, p: float) -> ProcessSpec:
    """Re-parameterize so the new exponent is a -> phi(a + p) - phi(p).

    Requires p >= 0.  Drift picks up sigma^2*p, each mixture rate shifts by
    p, the intensity scales by E exp(-p*xi) and the weights are reweighted
    accordingly; the family is closed under this shift.
    """
    if p < 0.0:
        raise DomainError("shift must be nonnegative")
    if p == 0.0:
        return spec
    drift = spec.drift + spec.gaussian_sq * p
    if spec.jump_intensity == 0.0:
        return ProcessSpec(drift=drift, gaussian_sq=spec.gaussian_sq)
    raw = [(w * m / (m + p), m + p) for (w, m) in spec.jump_mixture]
    total = math.fsum(v for v, _ in raw)
    mixture = tuple((v / total, m) for v, m in raw)
    return ProcessSpec(
        drift=drift,
        gaussian_sq=spec.gaussian_sq,
        jump_intensity=spec.jump_intensity * total,
        jump_mixture=mixture,
    )


# -- JSON interchange ------------------------------------------------------

_TOP_KEYS = {"drift", "sigma2", "jumps"}
_JUMP_KEYS = {"intensity", "mixture"}
_TERM_KEYS = {"weight", "rate"}


def spec_from_json(source: str | dict) -> ProcessSpec:
    """Parse the process-specification JSON object.

    Schema: {"drift": num, "sigma2": num,
             "jumps": {"intensity": num,
                       "mixture": [{"weight": num, "rate": num}, ...]}}
    "jumps" may be omitted for a process without jumps.  Unknown keys are
    rejected so that typos in model parameters cannot pass silently.
    """
    if isinstance(source, str):
        try:
            obj = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    else:
        obj = source
    if not isinstance(obj, dict):
        raise ParseError("process specification must be a JSON object")
    _reject_unknown(obj, _TOP_KEYS, "process")
    if "drift" not in obj or "sigma2" not in obj:
        raise InvalidValueError("process specification requires 'drift' and 'sigma2'")
    drift = _finite_float(obj["drift"], "drift")
    sigma2 = _finite_float(obj["sigma2"], "sigma2")
    intensity = 0.0
    mixture: list[tuple[float, float]] = []
    if "jumps" in obj:
        jumps = obj["jumps"]
        if not isinstance(jumps, dict):
            raise InvalidValueError("'jumps' must be an object")
        _reject_unknown(jumps, _JUMP_KEYS, "jumps")
        if "intensity" not in obj["jumps"]:
            raise InvalidValueError("'jumps' requires 'intensity'")
        intensity = _finite_float(jumps["intensity"], "jumps.intensity")
        terms = jumps.get("mixture", [])
        if not isinstance(terms, list):
            raise InvalidValueError("'jumps.mixture' must be a list")
        for i, term in enumerate(terms):
            if not isinstance(term, dict):
                raise InvalidValueError(f"mixture term {i} must be an object")
            _reject_unknown(term, _TERM_KEYS, f"mixture term {i}")
            if "weight" not in term or "rate" not in term:
                raise InvalidValueError(f"mixture term {i} requires 'weight' and 'rate'")
            mixture.append(
                (
                    _finite_float(term["weight"], f"mixture term {i} weight"),
                    _finite_float(term["rate"], f"mixture term {i} rate"),
                )
            )
    return validate_spec(drift, sigma2, intensity, mixture)


def spec_to_json(spec: ProcessSpec) -> dict:
    """Inverse of spec_from_json (round-trips exactly)."""
    out: dict = {"drift": spec.drift, "sigma2": spec.gaussian_sq}
    if spec.jump_intensity > 0.0:
        out["jumps"] = {
            "intensity": spec.jump_intensity,
            "mixture": [{"weight": w, "rate": m} for (w, m) in spec.jump_mixture],
        }
    return out


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise UnknownKeyError(f"unknown key {key!r} in {where}")
