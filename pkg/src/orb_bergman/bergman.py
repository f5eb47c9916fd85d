"""Evaluation of kernels B_k, their weighted sums, and polynomially
reweighted variants on both model geometries.

The kernel at a point is sum_alpha |s_alpha(x)|^2 / |s_alpha|^2_{L^2} times
the metric factor e^{-k phi(x)}, over the monomial basis of the weight-k
section space.  Both models have diagonal Gram matrices (circle symmetry),
so no orthonormalisation beyond dividing by the exact norms is ever needed,
and diagonal values depend only on the coordinate moduli.

Football values at rational points are computed entirely in exact rational
arithmetic; the kernel there is

    B_k(rho) = sum_{b = r(k) mod m} m (k+1)! / (b! (k-b)!) * rho^b (1+rho)^(-k)

with rho = |u|^2 the squared chart modulus, and rho = inf handled through the
b <-> k-b chart symmetry.  A log-space float path (lgamma plus compensated
summation) covers irrational rho and powers large enough to overflow double
binomials.

Flat values default to the closed averaged form

    B_k(x) = k^n sum_{s=0}^{m-1} lambda^{-ks} exp(k (psi(zeta^s x, x) - |x|^2)),

m terms instead of a truncated series.  Near the zeros of the kernel the m
terms cancel almost completely, so the sum is evaluated in extended
precision (a private mpmath context) and returned as a float carrying a
certified absolute error bound.  The monomial series, a sum of positive
terms with a certified geometric-ratio bound on its Poisson-type tail, is
kept as an independent cross-check path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath

from .coeffs import CoefficientSequence
from .models import FlatCyclicModel, FootballModel, Model

#: Extended-precision context for the averaged flat sum.  50 digits leaves
#: ~33 after worst-case cancellation of the m unit-modulus terms.
_CTX = mpmath.mp.clone()
_CTX.dps = 50

#: Football point at the second fixed point (chart coordinate at infinity).
INFINITY = math.inf

Point = Union[Fraction, int, float, tuple]


class TruncationError(ArithmeticError):
    """Requested series tolerance not certifiable at the allowed cap."""

    def __init__(self, message: str, achieved_bound: float):
        super().__init__(message)
        self.achieved_bound = achieved_bound


@dataclass(frozen=True)
class KernelValue:
    """A kernel evaluation: exact rational, or float with certified error.

    ``err_bound`` is an absolute bound on |stored - true|; it is 0 for exact
    values.
    """

    k: int
    point: Point
    value: Union[Fraction, float]
    exact: bool
    err_bound: float = 0.0

    def __post_init__(self):
        if self.exact and self.err_bound != 0.0:
            raise ValueError("exact values carry no error bound")
        if self.value < 0:
            raise ValueError("kernel values are nonnegative")

    def __float__(self) -> float:
        return float(self.value)


def bergman_value(model: Model, k: int, point: Point) -> KernelValue:
    """Kernel of the weight-k section space at a point.

    Football: `point` is rho = |u|^2 in [0, inf]; exact rationals (including
    int) give an exact rational value, floats give a float with error bound.
    Flat: `point` is the vector of coordinate moduli (a scalar is promoted in
    dimension one); evaluation uses the closed averaged form.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(model, FootballModel):
        return _football_value(model, k, point)
    moduli = _as_moduli(model, point)
    return _flat_closed_diagonal(model, k, moduli)


def weighted_bergman(model: Model, c: CoefficientSequence, k: int, point: Point) -> KernelValue:
    """sum_i c_i B_{k+i}(point); exact whenever every summand is exact."""
    parts = [(ci, bergman_value(model, k + i, point)) for i, ci in c]
    return _combine(parts, k, point)


@dataclass(frozen=True)
class HomogeneousWeight:
    """Homogeneous bivariate reweighting gamma(k, i) of declared degree.

    ``coeffs[a]`` multiplies k^(degree-a) i^a, so the leading-in-k data of
    the expansion read A = coeffs[0] and B = coeffs[1] (when present).
    """

    degree: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        coeffs = tuple(Fraction(g) for g in self.coeffs)
        if len(coeffs) != self.degree + 1:
            raise ValueError(
                f"not homogeneous of declared degree: expected {self.degree + 1} "
                f"coefficients, got {len(coeffs)}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, k: int, i: int) -> Fraction:
        total = Fraction(0)
        for a, g in enumerate(self.coeffs):
            if g == 0:
                continue
            kpow = k ** (self.degree - a) if self.degree - a > 0 else 1
            ipow = i**a if a > 0 else 1
            total += g * kpow * ipow
        return total


def weighted_bergman_gamma(
    model: Model,
    c: CoefficientSequence,
    gamma: HomogeneousWeight,
    k: int,
    point: Point,
) -> KernelValue:
    """sum_i c_i gamma(k, i) B_{k+i}(point).

    The degree of gamma must stay within the smoothing budget of ``c`` for
    the expansion statements to apply; that is the caller's contract and is
    not checked here.
    """
    parts = [(ci * gamma(k, i), bergman_value(model, k + i, point)) for i, ci in c]
    return _combine(parts, k, point)


def _combine(parts: list[tuple[Fraction, KernelValue]], k: int, point: Point) -> KernelValue:
    if all(kv.exact for _, kv in parts):
        total = sum((w * kv.value for w, kv in parts), Fraction(0))
        return KernelValue(k=k, point=point, value=total, exact=True)
    total = math.fsum(float(w) * float(kv.value) for w, kv in parts)
    bound = math.fsum(
        abs(float(w)) * (kv.err_bound + abs(float(kv.value)) * 1e-16) for w, kv in parts
    )
    return KernelValue(k=k, point=point, value=max(total, 0.0), exact=False, err_bound=bound)


# ---------------------------------------------------------------------------
# Football evaluation
# ---------------------------------------------------------------------------


def _football_value(model: FootballModel, k: int, point) -> KernelValue:
    if isinstance(point, float) and not math.isinf(point):
        if point < 0:
            raise ValueError("rho must be >= 0")
        value, bound = _football_float(model, k, point)
        return KernelValue(k=k, point=point, value=value, exact=False, err_bound=bound)
    value = _football_exact(model, k, point)
    return KernelValue(k=k, point=point, value=value, exact=True)


def _football_exact(model: FootballModel, k: int, point) -> Fraction:
    if isinstance(point, float) and math.isinf(point):
        # Chart symmetry b <-> k-b: only the b = k monomial survives at the
        # second fixed point, and it is admissible iff (t+1)k = 0 mod m.
        return Fraction(model.m * (k + 1)) if k % model.m == model.residue(k) else Fraction(0)
    rho = Fraction(point)
    if rho < 0:
        raise ValueError("rho must be >= 0")
    one_plus = (1 + rho) ** k
    total = Fraction(0)
    for b in model.exponents(k):
        if rho == 0 and b > 0:
            break
        total += Fraction(model.m * (k + 1) * math.comb(k, b)) * rho**b
    return total / one_plus


def _football_float(model: FootballModel, k: int, rho: float) -> tuple[float, float]:
    """Log-space accumulation with compensated summation; relative error
    ~ (number of terms) * eps plus lgamma noise, reported as err_bound."""
    if rho == 0.0:
        value = float(_football_exact(model, k, 0))
        return value, 0.0
    total = 0.0
    comp = 0.0  # Kahan compensation
    count = 0
    for b in model.exponents(k):
        # log of m (k+1)! / (b!(k-b)!) rho^b (1+rho)^(-k)
        log_term = (
            math.log(model.m)
            + math.lgamma(k + 2)
            - math.lgamma(b + 1)
            - math.lgamma(k - b + 1)
            + b * math.log(rho)
            - k * math.log1p(rho)
        )
        term = math.exp(log_term)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        count += 1
    # lgamma is accurate to a few ulp; exp turns that into ~1e-14 relative.
    bound = total * (5e-14 + count * 1.2e-16)
    return total, bound


# ---------------------------------------------------------------------------
# Flat evaluation: closed averaged form (default) and monomial series
# ---------------------------------------------------------------------------


def _as_moduli(model: FlatCyclicModel, point) -> tuple[float, ...]:
    if isinstance(point, (int, float, Fraction)):
        point = (point,)
    moduli = tuple(float(x) for x in point)
    if len(moduli) != model.n:
        raise ValueError(f"expected {model.n} coordinate moduli, got {len(moduli)}")
    if any(x < 0 for x in moduli):
        raise ValueError("coordinate moduli must be >= 0")
    return moduli


def _flat_closed_diagonal(model: FlatCyclicModel, k: int, moduli: Sequence[float]) -> KernelValue:
    if all(x == 0 for x in moduli):
        value = Fraction(model.m * k**model.n) if k % model.m == 0 else Fraction(0)
        return KernelValue(k=k, point=tuple(moduli), value=value, exact=True)
    value, bound = _averaged_diagonal_sum(model.m, model.n, model.weights, k, moduli)
    return KernelValue(
        k=k, point=tuple(moduli), value=max(value, 0.0), exact=False, err_bound=bound
    )


def _averaged_diagonal_sum(
    m: int, n: int, weights: Sequence[int], k: int, moduli: Sequence[float]
) -> tuple[float, float]:
    """k^n sum_s lambda^{-ks} exp(k sum_j (lambda^{a_j s} - 1) |x_j|^2) in
    extended precision.  Returns (float value, certified absolute bound)."""
    total = _CTX.mpf(0)
    scale = 0.0  # sum of term moduli, for the cancellation-aware bound
    for s in range(m):
        phase = _CTX.expjpi(_CTX.mpf(2 * ((-k * s) % m)) / m)
        exponent = _CTX.mpf(0)
        for a, x in zip(weights, moduli):
            lam = _CTX.expjpi(_CTX.mpf(2 * ((a * s) % m)) / m)
            exponent += k * (lam - 1) * (x * x)
        term = phase * _CTX.exp(exponent)
        total += term.real
        scale += float(abs(term))
    front = float(k) ** n
    value = front * float(total)
    # Extended-precision roundoff: ~10^(2-dps) relative to the sum of term
    # moduli; conversion to double adds an ulp of the result.
    bound = front * scale * 10.0 ** (2 - _CTX.dps) + abs(value) * 2.3e-16
    return value, bound


def bergman_value_closed_flat(
    model: FlatCyclicModel, k: int, x: Union[complex, Sequence[complex]]
) -> KernelValue:
    """Closed averaged diagonal value at a genuine complex point.

    Identical to :func:`bergman_value` on the modulus vector of ``x``
    (diagonal values only see moduli); accepting complex input makes that
    invariance directly testable.
    """
    if not isinstance(model, FlatCyclicModel):
        raise TypeError("closed averaged form is defined for the flat model only")
    if isinstance(x, (int, float, complex)):
        x = (x,)
    moduli = tuple(abs(complex(z)) for z in x)
    if len(moduli) != model.n:
        raise ValueError(f"expected {model.n} coordinates, got {len(moduli)}")
    return _flat_closed_diagonal(model, k, moduli)


def bergman_value_series(
    model: FlatCyclicModel,
    k: int,
    point: Point,
    rel_tol: float = 1e-12,
    cap: Optional[int] = None,
) -> KernelValue:
    """Monomial-series evaluation with a certified truncation bound.

    Sums m k^n k^|alpha| |x^alpha|^2 / alpha! * e^(-k|x|^2) over admissible
    alpha with |alpha| <= D, choosing D so that the certified tail bound is
    at most ``rel_tol`` of the value.  The terms are positive, so partial
    sums increase to the value and float summation is well conditioned.  If
    ``cap`` is given and the bound cannot be met there, raises
    :class:`TruncationError` carrying the bound that was achieved.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    moduli = _as_moduli(model, point)
    if all(x == 0 for x in moduli):
        return _flat_closed_diagonal(model, k, moduli)
    T = k * sum(x * x for x in moduli)
    hard_cap = cap if cap is not None else max(2 * model.m, int(T + 14 * math.sqrt(T) + 60))
    depth = min(hard_cap, max(model.m, int(T + 6 * math.sqrt(T) + 10)))
    while True:
        tail = _poisson_tail_bound(model.m, model.n, k, T, depth)
        value = _flat_series_sum(model, k, moduli, depth)
        if math.isfinite(tail) and value > 0 and tail <= rel_tol * value:
            return KernelValue(
                k=k,
                point=tuple(moduli),
                value=value,
                exact=False,
                err_bound=tail + value * (depth + 1) * 1.2e-16,
            )
        if depth >= hard_cap:
            raise TruncationError(
                f"series tail bound {tail:.3e} exceeds {rel_tol:.1e} * value at cap {depth}",
                achieved_bound=tail,
            )
        depth = min(hard_cap, 2 * depth)


def _poisson_tail_bound(m: int, n: int, k: int, T: float, depth: int) -> float:
    """Certified bound on the discarded series tail beyond degree `depth`.

    The degree-j shell sums to (k|x|^2)^j / j! by the multinomial theorem, so
    the tail of the normalised series is a Poisson upper tail, bounded by its
    first term times a geometric ratio whenever depth + 2 > T:

        sum_{j > D} T^j / j!  <=  T^(D+1)/(D+1)! * 1 / (1 - T/(D+2)).
    """
    if depth + 2 <= T:
        return math.inf
    log_first = (depth + 1) * math.log(T) - math.lgamma(depth + 2) if T > 0 else -math.inf
    ratio = 1.0 / (1.0 - T / (depth + 2))
    log_front = math.log(m) + n * math.log(k) - T
    return math.exp(log_front + log_first) * ratio


def _flat_series_sum(model: FlatCyclicModel, k: int, moduli: Sequence[float], depth: int) -> float:
    T = k * sum(x * x for x in moduli)
    log_front = math.log(model.m) + model.n * math.log(k) - T
    log_mod = [math.log(x) if x > 0 else -math.inf for x in moduli]
    terms = []
    for alpha in model.exponents(k, depth):
        log_term = log_front
        for a, lx in zip(alpha, log_mod):
            if a == 0:
                continue
            if lx == -math.inf:
                log_term = -math.inf
                break
            log_term += a * (math.log(k) + 2 * lx) - math.lgamma(a + 1)
        if log_term != -math.inf:
            terms.append(math.exp(log_term))
    return math.fsum(terms)
