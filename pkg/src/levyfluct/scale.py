"""Scale-function evaluation.

W_q is the unique strictly increasing continuous function on [0, inf) with
Laplace transform 1/(phi(a) - q) for a > Phi(q); Z_q is its integrated
companion

    Z_q(alpha, x) = exp(alpha*x) * (1 + (q - phi(alpha)) *
                    int_0^x exp(-alpha*y) W_q(y) dy).

Two interchangeable backends are provided:

* ClosedForm factors the rational transform into simple real poles.  For
  the hyperexponential family 1/(phi(a)-q) = D(a)/N(a) with deg N =
  deg D + 1 or + 2, and all roots of N are real and simple away from a
  measure-zero parameter set, so W_q(x) = sum_i A_i exp(r_i x) with
  A_i = 1/phi'(r_i).  Near-repeated roots raise FactorizationFailure.
* NumericInversion inverts the tilted transform 1/psi(a), whose target
  W(x) = exp(-Phi(q) x) W_q(x) stays bounded (it grows at most linearly in
  the flagged zero-mean q=0 case), then multiplies back exp(Phi(q) x).

Both backends agree to ~1e-6 relative on the test family; the closed form
is exact up to root-finding residuals and is the default.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    FactorizationFailure,
    UnsupportedBackendError,
)
from .inversion import DEFAULT_TERM_COUNT, euler_inversion
from .model import ProcessSpec, right_inverse, shifted_spec

__all__ = [
    "Backend",
    "InversionParams",
    "ScaleEvaluator",
    "make_evaluator",
    "w_q",
    "w_q_right_derivative",
    "z_q",
    "scale_table_rows",
]


class Backend(enum.Enum):
    CLOSED_FORM = "closed"
    NUMERIC_INVERSION = "numeric"


@dataclass(frozen=True)
class InversionParams:
    """Tuning of the numeric backend: number of damped-Fourier terms and the
    absolute accuracy the workspace is trusted to deliver (used to size the
    finite-difference ladder for derivatives)."""

    term_count: int = DEFAULT_TERM_COUNT
    precision: float = 1e-9


_ROOT_SEPARATION_RTOL = 1e-7
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


class ScaleEvaluator:
    """Evaluator of (W_q, W_q', Z_q) bound to a spec and discount rate.

    Immutable except for the value cache, which is a pure memo: insertions
    are idempotent (evaluation is deterministic) and reads are safe under
    CPython's atomic dict operations, so concurrent use is allowed.
    """

    def __init__(
        self,
        spec: ProcessSpec,
        q: float,
        backend: Backend,
        phi_q: float,
        closed_form_terms=None,
        inversion_params: InversionParams | None = None,
        shifted: ProcessSpec | None = None,
    ):
        self.spec = spec
        self.q = q
        self.backend = backend
        self.phi_q = phi_q
        self.closed_form_terms = closed_form_terms
        self.inversion_params = inversion_params
        self.zero_mean_at_q0 = q == 0.0 and abs(spec.mean) < 1e-12
        self._shifted = shifted
        self._cache: dict[float, float] = {}

    # -- W_q ---------------------------------------------------------------

    def w(self, x: float) -> float:
        """W_q(x) for x >= 0.

        W_q(0) follows the small-x behavior of the transform: 0 for a
        Gaussian component (unbounded variation), 1/drift otherwise."""
        x = float(x)
        if x < 0.0:
            raise DomainError(f"w_q requires x >= 0, got {x}")
        if x == 0.0:
            return self.value_at_zero
        hit = self._cache.get(x)
        if hit is not None:
            return hit
        if self.backend is Backend.CLOSED_FORM:
            coef, roots = self.closed_form_terms
            val = float(np.dot(coef, np.exp(roots * x)))
        else:
            bounded = euler_inversion(
                self._tilted_transform, x, self.inversion_params.term_count
            )
            val = math.exp(self.phi_q * x) * bounded
        self._cache[x] = val
        return val

    @property
    def value_at_zero(self) -> float:
        return 0.0 if self.spec.gaussian_sq > 0.0 else 1.0 / self.spec.drift

    def _tilted_transform(self, s):
        return 1.0 / self._shifted.exponent(s)

    # -- W_q' --------------------------------------------------------------

    def w_prime(self, x: float) -> float:
        """Right derivative of W_q at x > 0."""
        return self.w_prime_with_error(x)[0]

    def w_prime_with_error(self, x: float) -> tuple[float, float]:
        """Right derivative with an error estimate.

        ClosedForm differentiates the exponential sum analytically (error
        estimate 0).  NumericInversion uses one-sided forward differences
        with a Richardson ladder; the estimate is the last correction."""
        x = float(x)
        if x <= 0.0:
            raise DomainError(f"w_q derivative requires x > 0, got {x}")
        if self.backend is Backend.CLOSED_FORM:
            coef, roots = self.closed_form_terms
            return float(np.dot(coef * roots, np.exp(roots * x))), 0.0
        # Step sized so FD noise (~precision/h) stays near the ladder error.
        h0 = max(0.05, 0.05 * x)
        levels = 5
        tbl = [
            [(self.w(x + h0 * 2.0**-j) - self.w(x)) / (h0 * 2.0**-j)]
            for j in range(levels)
        ]
        for i in range(1, levels):
            fac = 2.0**i
            for j in range(i, levels):
                tbl[j].append((fac * tbl[j][i - 1] - tbl[j - 1][i - 1]) / (fac - 1.0))
        best = tbl[levels - 1][levels - 1]
        err = abs(best - tbl[levels - 1][levels - 2])
        noise = self.inversion_params.precision / (h0 * 2.0 ** -(levels - 1))
        return best, err + noise

    # -- Z_q ---------------------------------------------------------------

    def z(self, alpha: float, x: float) -> float:
        """Z_q(alpha, x) for alpha >= 0, x >= 0."""
        alpha = float(alpha)
        x = float(x)
        if alpha < 0.0:
            raise DomainError(f"z_q requires alpha >= 0, got {alpha}")
        if x < 0.0:
            raise DomainError(f"z_q requires x >= 0, got {x}")
        if x == 0.0:
            return 1.0
        integral = self.w_transform_integral(alpha, x)
        return math.exp(alpha * x) * (
            1.0 + (self.q - float(self.spec.exponent(alpha))) * integral
        )

    def w_transform_integral(self, alpha: float, x: float) -> float:
        """int_0^x exp(-alpha*y) W_q(y) dy for any real alpha (the finite
        integral converges regardless of sign)."""
        if x == 0.0:
            return 0.0
        if self.backend is Backend.CLOSED_FORM:
            coef, roots = self.closed_form_terms
            total = 0.0
            for a_i, r_i in zip(coef, roots):
                beta = r_i - alpha
                if beta == 0.0:
                    total += a_i * x
                else:
                    total += a_i * math.expm1(beta * x) / beta
            return total
        return _adaptive_gauss(
            lambda y: math.exp(-alpha * y) * self.w(y), 0.0, x, 1e-10
        )


def _adaptive_gauss(f, a: float, b: float, tol: float, depth: int = 0) -> float:
    """Adaptive Gauss-Legendre panels with recursive bisection.

    Panel error is estimated by comparing the whole-panel rule against the
    two half-panel rules; the tolerance is absolute and split per half."""
    whole = _gauss_panel(f, a, b)
    mid = 0.5 * (a + b)
    left = _gauss_panel(f, a, mid)
    right = _gauss_panel(f, mid, b)
    refined = left + right
    if abs(refined - whole) <= max(tol, 4e-16 * abs(refined)) or depth >= 48:
        return refined
    return _adaptive_gauss(f, a, mid, 0.5 * tol, depth + 1) + _adaptive_gauss(
        f, mid, b, 0.5 * tol, depth + 1
    )


def _gauss_panel(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    return half * math.fsum(
        w * f(center + half * t) for t, w in zip(_GL_NODES, _GL_WEIGHTS)
    )


def make_evaluator(
    spec: ProcessSpec,
    q: float,
    backend: Backend | str = Backend.CLOSED_FORM,
    inversion_params: InversionParams | None = None,
) -> ScaleEvaluator:
    """Construct a ScaleEvaluator for (spec, q) with the chosen backend.

    The string forms "closed" and "numeric" are accepted.  ClosedForm
    raises FactorizationFailure when the transform has (near-)repeated
    poles, e.g. q = 0 for a zero-mean spec; NumericInversion remains
    available there.
    """
    q = float(q)
    if q < 0.0:
        raise DomainError(f"make_evaluator requires q >= 0, got {q}")
    if isinstance(backend, str):
        try:
            backend = Backend(backend)
        except ValueError as exc:
            raise UnsupportedBackendError(f"unknown backend {backend!r}") from exc
    if not isinstance(backend, Backend):
        raise UnsupportedBackendError(f"unknown backend {backend!r}")
    phi_q = right_inverse(spec, q)
    if backend is Backend.CLOSED_FORM:
        terms = _partial_fractions(spec, q, phi_q)
        return ScaleEvaluator(spec, q, backend, phi_q, closed_form_terms=terms)
    return ScaleEvaluator(
        spec,
        q,
        backend,
        phi_q,
        inversion_params=inversion_params or InversionParams(),
        shifted=shifted_spec(spec, phi_q),
    )


def _partial_fractions(spec: ProcessSpec, q: float, phi_q: float):
    """Factor 1/(phi(a) - q) into simple real-pole partial fractions.

    Returns (coefficients, roots) as float arrays sorted by descending
    root, with the leading root replaced by the solver's Phi(q) so that the
    dominant exponential of W_q is exactly exp(Phi(q) x).
    """
    rates = np.array([m for _, m in spec.jump_mixture])
    weights = np.array([w for w, _ in spec.jump_mixture])
    lam = spec.jump_intensity
    denom = np.poly(-rates) if rates.size else np.array([1.0])
    if spec.gaussian_sq > 0.0:
        base = np.array([0.5 * spec.gaussian_sq, spec.drift, -(lam + q)])
    else:
        base = np.array([spec.drift, -(lam + q)])
    num = np.polymul(base, denom)
    for i in range(rates.size):
        others = np.poly(-np.delete(rates, i)) if rates.size > 1 else np.array([1.0])
        num = np.polyadd(num, lam * weights[i] * rates[i] * others)

    roots = np.roots(num)
    scale = max(1.0, float(np.max(np.abs(roots))) if roots.size else 1.0)
    if np.any(np.abs(roots.imag) > 1e-7 * scale):
        raise FactorizationFailure(
            "complex poles in 1/(phi - q); closed form unavailable"
        )
    roots = np.sort(roots.real)[::-1]

    # Polish against the analytic exponent; np.roots alone carries the
    # companion-matrix conditioning.
    polished = []
    for r in roots:
        x = r
        for _ in range(3):
            fx = spec.exponent(x) - q
            d = spec.exponent_derivative(x)
            if d == 0.0:
                break
            step = fx / d
            if not math.isfinite(step) or abs(step) > 0.5 * (1.0 + abs(x)):
                break
            x -= step
        polished.append(x if abs(spec.exponent(x) - q) <= abs(spec.exponent(r) - q) else r)
    roots = np.array(polished)
    roots[::-1].sort()

    if abs(roots[0] - phi_q) > 1e-10 * max(1.0, abs(phi_q)):
        raise FactorizationFailure(
            f"leading pole {roots[0]!r} does not match Phi(q)={phi_q!r}"
        )
    roots[0] = phi_q

    gaps = np.diff(roots[::-1])
    if roots.size > 1 and float(np.min(gaps)) < _ROOT_SEPARATION_RTOL * scale:
        raise FactorizationFailure(
            "repeated roots of phi(a) = q; use the NumericInversion backend"
        )
    coef = np.array([1.0 / spec.exponent_derivative(r) for r in roots])
    return coef, roots


# -- spec'd operation wrappers ----------------------------------------------


def w_q(ev: ScaleEvaluator, x: float) -> float:
    """Scale function W_q(x), x >= 0."""
    return ev.w(x)


def w_q_right_derivative(ev: ScaleEvaluator, x: float) -> float:
    """Right derivative of W_q at x > 0."""
    return ev.w_prime(x)


def z_q(ev: ScaleEvaluator, alpha: float, x: float) -> float:
    """Second scale function Z_q(alpha, x)."""
    return ev.z(alpha, x)


def scale_table_rows(ev: ScaleEvaluator, alpha: float, xs) -> list[tuple[float, ...]]:
    """Rows (x, W_q, W_q', Z_q(alpha, x)) for a sweep; x = 0 reports the
    right limit of the derivative via the smallest positive grid point."""
    rows = []
    for x in xs:
        x = float(x)
        wp = ev.w_prime(x) if x > 0.0 else math.nan
        rows.append((x, ev.w(x), wp, ev.z(alpha, x)))
    return rows
