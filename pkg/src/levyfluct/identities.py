"""Passage-time and local-time transforms of the doubly reflected process.

All formulas are assembled from one ScaleEvaluator bound to (spec, q):

* two-sided exit          W_q(a) / W_q(a+b)
* upper passage           E_x0 exp(-alpha*L(T_u) - q*T_u)
                            = Z_q(alpha, x0) / Z_q(alpha, B)
* lower passage           E_x0 exp(-alpha*L(T_l) - theta*U(T_l) - q*T_l)
                            = Z_q(alpha, x0)
                              + W_q(x0) * [W_q(B)(phi(alpha) - q)
                                           - (alpha+theta) Z_q(alpha, B)]
                                / (W_q'(B) + theta*W_q(B))
* inverse-local-time exponent (per unit of upper local time)
                          W_q(B)(phi(alpha) - q) / Z_q(alpha, B) - alpha

where T_u / T_l are the first strict-increase times of the upper / lower
regulators and L, U the regulators themselves.  Queries are admissible for
q > 0, alpha >= Phi(q), theta >= 0; q = 0 is evaluated directly with W_0
and Z_0 (the identities extend continuously, guarded by the q-continuity
tests).  Evaluating the same operations on a tilted spec at q = 0
reproduces the undiscounted transforms under the tilted measure; the
tilt-consistency tests pin the substitution alpha -> alpha - Phi(q),
theta -> theta + Phi(q), with an exp(Phi(q) x0) prefactor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import AdmissibilityError, DivergedTransform, DomainError
from .model import ProcessSpec, TiltedSpec
from .scale import ScaleEvaluator

__all__ = [
    "TransformQuery",
    "IdentityValue",
    "two_sided_exit",
    "upper_passage_transform",
    "lower_passage_transform",
    "inverse_local_time_exponent",
    "local_time_jump_rate",
    "minimum_transform",
    "occupation_transform",
    "first_jump_transform",
]

_ADMISSIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class TransformQuery:
    """Admissible parameter tuple for a passage transform.

    Requires q >= 0, theta >= 0 and 0 <= x0 <= b; the alpha >= Phi(q)
    admissibility depends on the evaluator and is checked per operation.
    """

    q: float
    alpha: float
    theta: float
    x0: float
    b: float

    def __post_init__(self):
        if self.q < 0.0:
            raise DomainError(f"q must be >= 0, got {self.q}")
        if self.theta < 0.0:
            raise DomainError(f"theta must be >= 0, got {self.theta}")
        if self.b <= 0.0:
            raise DomainError(f"barrier b must be > 0, got {self.b}")
        if not 0.0 <= self.x0 <= self.b:
            raise DomainError(f"x0 must lie in [0, {self.b}], got {self.x0}")


@dataclass(frozen=True)
class IdentityValue:
    """Transform value plus the intermediate quantities it was built from,
    so failures localize and the CLI can print diagnostics."""

    value: float
    components: dict = field(compare=False)
    kind: str = ""

    def reassemble(self) -> float:
        """Recompute value from components (bit-level agreement expected)."""
        c = self.components
        if self.kind == "upper":
            return c["z_alpha_x0"] / c["z_alpha_b"]
        if self.kind == "lower":
            return c["z_alpha_x0"] + c["w_x0"] * (
                c["w_b"] * (c["phi_alpha"] - c["q"])
                - (c["alpha"] + c["theta"]) * c["z_alpha_b"]
            ) / (c["w_prime_b"] + c["theta"] * c["w_b"])
        raise ValueError(f"unknown identity kind {self.kind!r}")


def _check_alpha(ev: ScaleEvaluator, alpha: float) -> None:
    if alpha < ev.phi_q - _ADMISSIBILITY_SLACK * max(1.0, abs(ev.phi_q)):
        raise AdmissibilityError(
            f"alpha={alpha} below Phi(q)={ev.phi_q}; transform not admissible"
        )


def _check_query(ev: ScaleEvaluator, query: TransformQuery) -> None:
    if abs(query.q - ev.q) > 1e-12 * max(1.0, abs(ev.q)):
        raise DomainError(
            f"query q={query.q} does not match evaluator q={ev.q}"
        )
    _check_alpha(ev, query.alpha)


def two_sided_exit(ev: ScaleEvaluator, a: float, b: float) -> float:
    """E exp(-q * T_b+) on {T_b+ < T_-a-} for the free process started at 0,
    i.e. W_q(a) / W_q(a+b)."""
    if a < 0.0 or b < 0.0:
        raise DomainError("exit levels must be nonnegative")
    if a + b <= 0.0:
        raise DomainError("exit interval must have positive width")
    return ev.w(a) / ev.w(a + b)


def upper_passage_transform(ev: ScaleEvaluator, query: TransformQuery) -> IdentityValue:
    """Transform of (upper passage time, lower local time at that time);
    theta is ignored.  Equals 1 exactly at x0 = B."""
    _check_query(ev, query)
    z_x0 = ev.z(query.alpha, query.x0)
    z_b = ev.z(query.alpha, query.b) if query.x0 != query.b else z_x0
    return IdentityValue(
        value=z_x0 / z_b,
        components={
            "z_alpha_x0": z_x0,
            "z_alpha_b": z_b,
            "phi_q": ev.phi_q,
            "q": ev.q,
            "alpha": query.alpha,
            "x0": query.x0,
            "b": query.b,
        },
        kind="upper",
    )


def lower_passage_transform(ev: ScaleEvaluator, query: TransformQuery) -> IdentityValue:
    """Joint transform of (lower passage time, its overshoot into the lower
    local time, the upper local time spent so far)."""
    _check_query(ev, query)
    alpha, theta = query.alpha, query.theta
    z_x0 = ev.z(alpha, query.x0)
    z_b = ev.z(alpha, query.b) if query.x0 != query.b else z_x0
    w_x0 = ev.w(query.x0)
    w_b = ev.w(query.b) if query.x0 != query.b else w_x0
    w_prime_b = ev.w_prime(query.b)
    phi_alpha = float(ev.spec.exponent(alpha))
    numer = w_b * (phi_alpha - ev.q) - (alpha + theta) * z_b
    value = z_x0 + w_x0 * numer / (w_prime_b + theta * w_b)
    return IdentityValue(
        value=value,
        components={
            "z_alpha_x0": z_x0,
            "z_alpha_b": z_b,
            "w_x0": w_x0,
            "w_b": w_b,
            "w_prime_b": w_prime_b,
            "phi_q": ev.phi_q,
            "phi_alpha": phi_alpha,
            "q": ev.q,
            "alpha": alpha,
            "theta": theta,
            "x0": query.x0,
            "b": query.b,
        },
        kind="lower",
    )


def inverse_local_time_exponent(
    ev: ScaleEvaluator, q: float, alpha: float, b: float
) -> float:
    """Levy exponent of the bivariate ladder process: per unit of upper
    local time, log E exp(-alpha * dL - q * dT) where dL and dT are the
    increments of the lower local time and of real time."""
    if abs(q - ev.q) > 1e-12 * max(1.0, abs(ev.q)):
        raise DomainError(f"q={q} does not match evaluator q={ev.q}")
    if b <= 0.0:
        raise DomainError(f"barrier b must be > 0, got {b}")
    _check_alpha(ev, alpha)
    phi_alpha = float(ev.spec.exponent(alpha))
    return ev.w(b) * (phi_alpha - ev.q) / ev.z(alpha, b) - alpha


def local_time_jump_rate(ev: ScaleEvaluator, b: float) -> float:
    """Definitional ratio W_q'(B)/W_q(B).

    At q = 0 this is the arrival rate, per unit of upper local time, of
    jumps of the lower-local-time ladder process (excursions from the upper
    barrier deep enough to touch 0)."""
    if b <= 0.0:
        raise DomainError(f"barrier b must be > 0, got {b}")
    return ev.w_prime(b) / ev.w(b)


def minimum_transform(spec: ProcessSpec | TiltedSpec, alpha: float) -> float:
    """E exp(alpha * inf_t X(t)) for a positive-mean process,
    equal to phi'(0) * alpha / phi(alpha) for alpha > 0."""
    process = spec.process if isinstance(spec, TiltedSpec) else spec
    if alpha <= 0.0:
        raise DomainError(f"minimum_transform requires alpha > 0, got {alpha}")
    mean = process.mean
    if mean <= 0.0:
        raise DomainError("minimum_transform requires a positive-mean process")
    return mean * alpha / float(process.exponent(alpha))


def occupation_transform(
    ev: ScaleEvaluator, alpha: float, x0: float, b: float
) -> float:
    """int_0^inf E_x0 exp(alpha * X(T_x)) dx for alpha < 0, where T_x is the
    passage time of the upper regulator over level x:

        exp(alpha*(B + x0)) * (int_0^x0 exp(-alpha*y) W(y) dy - 1/psi(alpha))
            / W(B).

    Requires a zero-discount evaluator of a positive-drift (tilted) spec.
    The region of convergence is approximated conservatively: psi(alpha)
    must be finite (alpha above the negative of the smallest jump rate) and
    strictly negative, otherwise DivergedTransform is raised.
    """
    if ev.q != 0.0:
        raise DomainError("occupation_transform requires a q = 0 evaluator")
    if alpha >= 0.0:
        raise DomainError(f"occupation_transform requires alpha < 0, got {alpha}")
    if b <= 0.0 or not 0.0 <= x0 <= b:
        raise DomainError("need 0 <= x0 <= b with b > 0")
    if alpha <= -ev.spec.min_jump_rate:
        raise DivergedTransform(
            f"psi({alpha}) is not finite (jump transform diverges)"
        )
    psi_alpha = float(ev.spec.exponent(alpha))
    if psi_alpha >= 0.0:
        raise DivergedTransform(
            f"psi({alpha}) = {psi_alpha} >= 0: outside the convergence region"
        )
    integral = ev.w_transform_integral(alpha, x0)
    return math.exp(alpha * (b + x0)) * (integral - 1.0 / psi_alpha) / ev.w(b)


def first_jump_transform(rate: float, jump_transform, alpha: float, theta: float) -> float:
    """E exp(-alpha*X(J) - theta*J) for a compound Poisson X with arrival
    rate ``rate`` and first jump epoch J.

    ``jump_transform`` maps alpha to E exp(-alpha * jump); for a process
    that jumps by -xi (downward jumps of magnitude xi) pass
    ``lambda a: E exp(a*xi)``.  The value equals
    (rate + psi(alpha)) / (rate + theta) with
    psi(alpha) = log E exp(-alpha*X(1)) = rate*(jump_transform(alpha) - 1),
    which collapses to rate * jump_transform(alpha) / (rate + theta)."""
    if rate <= 0.0:
        raise DomainError(f"rate must be > 0, got {rate}")
    if theta < 0.0:
        raise DomainError(f"theta must be >= 0, got {theta}")
    return rate * float(jump_transform(alpha)) / (rate + theta)
