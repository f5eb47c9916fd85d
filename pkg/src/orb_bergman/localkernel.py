"""The averaged local reproducing kernel of the flat model.

The flat Gaussian space has the exact reproducing kernel k^n e^{k psi(y, x)}
with sesqui-holomorphic phase psi(y, x) = sum_j y_j conj(x_j) (holomorphic
in the first slot, anti-holomorphic in the second, psi(x, x) = |x|^2); all
higher expansion coefficients vanish identically.  Group-averaging it over a
linear cyclic action produces the kernel of the weight-k subspace:

    K_av(y, x) = (1/m) sum_{u,v} lambda^{k(v-u)} k^n e^{k psi(zeta^u y, zeta^v x)}
               =       sum_{s}   lambda^{-ks}    k^n e^{k psi(zeta^s y, x)},

the collapse because psi(zeta^u y, zeta^v x) depends only on u - v.  The
averaged kernel has weight k in the first variable and -k in the second, and
is Hermitian.

Two numerical checks live here.  `verify_reproducing` measures the defect of
the local reproducing identity u(x) = (chi u, K_av_x) for a weight-k
monomial u against a cutoff chi that is 1 inside half the quadrature radius:
since the kernel reproduces over the whole plane exactly, the defect equals
the integral of (1 - chi) u conj(K_av_x) e^{-k phi} over the outer region,
and it is evaluated in that form.  (Evaluating u(x) minus the inner pairing
directly would bury the exponentially small true defect under float
cancellation noise around k ~ 20; the outer-region form is the same number
and stays resolvable to ~1e-300.  The inner pairing is still exposed for
cross-checks.)  `decay_check` sweeps the off-diagonal damping factor

    eta(x) = e^{psi(zeta^u x, zeta^v x) - phi(x)},   u != v,

and records the supremum of k^s |(eta - 1)^s eta^k|, which stays bounded in
k because |eta| <= e^{-delta |x|^2} off the fixed locus.

Quadrature is tensor Gauss-Legendre in radius times uniform trapezoid in
angle (spectrally accurate for periodic integrands); node counts are doubled
until the result stabilises to three digits.  The cutoff is a C^2 quintic
bump rather than a C-infinity one; at the tested powers the defect is
insensitive to the difference, far below quadrature error.  Quadrature is
implemented for one complex variable, which is the only case the checks
need; the kernel sums themselves work in any dimension.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

ComplexVector = Union[complex, Sequence[complex]]


class QuadratureError(ArithmeticError):
    """Node doubling hit its cap before the result stabilised."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


def _as_vector(x: ComplexVector) -> tuple[complex, ...]:
    if isinstance(x, (int, float, complex)):
        return (complex(x),)
    return tuple(complex(z) for z in x)


def _weights_for(n: int, weights: Optional[Sequence[int]]) -> tuple[int, ...]:
    if weights is None:
        return (1,) * n
    if len(weights) != n:
        raise ValueError(f"expected {n} action weights, got {len(weights)}")
    return tuple(int(a) for a in weights)


def fock_phase(y: ComplexVector, x: ComplexVector) -> complex:
    """psi(y, x) = sum_j y_j conj(x_j)."""
    yv, xv = _as_vector(y), _as_vector(x)
    if len(yv) != len(xv):
        raise ValueError("dimension mismatch")
    return sum(a * b.conjugate() for a, b in zip(yv, xv))


def _rotate(x: tuple[complex, ...], m: int, s: int, weights: tuple[int, ...]) -> tuple[complex, ...]:
    return tuple(cmath.exp(2j * math.pi * ((a * s) % m) / m) * z for a, z in zip(weights, x))


def averaged_kernel(
    m: int,
    k: int,
    y: ComplexVector,
    x: ComplexVector,
    weights: Optional[Sequence[int]] = None,
) -> complex:
    """Collapsed single-sum form k^n sum_s lambda^{-ks} e^{k psi(zeta^s y, x)}."""
    yv, xv = _as_vector(y), _as_vector(x)
    n = len(yv)
    wts = _weights_for(n, weights)
    total = 0j
    for s in range(m):
        phase = cmath.exp(2j * math.pi * ((-k * s) % m) / m)
        total += phase * cmath.exp(k * fock_phase(_rotate(yv, m, s, wts), xv))
    return k**n * total


def averaged_kernel_double(
    m: int,
    k: int,
    y: ComplexVector,
    x: ComplexVector,
    weights: Optional[Sequence[int]] = None,
) -> complex:
    """Full double-sum form (1/m) sum_{u,v} lambda^{k(v-u)} k^n e^{k psi(zeta^u y, zeta^v x)}."""
    yv, xv = _as_vector(y), _as_vector(x)
    n = len(yv)
    wts = _weights_for(n, weights)
    total = 0j
    for u in range(m):
        yu = _rotate(yv, m, u, wts)
        for v in range(m):
            xvv = _rotate(xv, m, v, wts)
            phase = cmath.exp(2j * math.pi * ((k * (v - u)) % m) / m)
            total += phase * cmath.exp(k * fock_phase(yu, xvv))
    return k**n * total / m


def bump(r: float, radius: float) -> float:
    """C^2 cutoff: 1 on [0, radius/2], quintic descent to 0 at radius."""
    if r <= radius / 2:
        return 1.0
    if r >= radius:
        return 0.0
    t = (r - radius / 2) / (radius / 2)
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)


def _kernel_conj_on_grid(m: int, k: int, ybar, x: complex, weight: int):
    """conj(K_av(y, x)) = k sum_s lambda^{ks} e^{k conj(lambda^{ws} y) x} on an
    ndarray of conjugated sample points ``ybar``."""
    total = np.zeros_like(ybar, dtype=complex)
    for s in range(m):
        phase = cmath.exp(2j * math.pi * ((k * s) % m) / m)
        lam_conj = cmath.exp(-2j * math.pi * ((weight * s) % m) / m)
        total += phase * np.exp(k * (lam_conj * x) * ybar)
    return k * total


def _polar_quadrature(
    m: int,
    k: int,
    alpha: int,
    x: complex,
    weight: int,
    radial_weight,
    r_lo: float,
    r_hi: float,
    n_r: int,
    n_theta: int,
) -> tuple[complex, float]:
    """integral of w(r) y^alpha conj(K_av(y, x)) e^{-k r^2} r dr dtheta over a
    polar rectangle, Gauss-Legendre in radius and trapezoid in angle, paired
    with the same quadrature applied to the integrand's modulus."""
    nodes, wts = np.polynomial.legendre.leggauss(n_r)
    rs = 0.5 * (r_hi - r_lo) * (nodes + 1.0) + r_lo
    ws = 0.5 * (r_hi - r_lo) * wts
    radial = np.array([radial_weight(r) for r in rs])
    keep = radial != 0.0
    if not keep.any():
        return 0j, 0.0
    rs, ws, radial = rs[keep], ws[keep], radial[keep]
    thetas = 2.0 * math.pi * np.arange(n_theta) / n_theta
    y = rs[:, None] * np.exp(1j * thetas)[None, :]
    values = (y**alpha) * _kernel_conj_on_grid(m, k, np.conj(y), x, weight)
    angular = values.sum(axis=1) * (2.0 * math.pi / n_theta)
    angular_abs = np.abs(values).sum(axis=1) * (2.0 * math.pi / n_theta)
    gauss = np.exp(-k * rs * rs)
    value = complex(np.sum(ws * rs * radial * gauss * angular))
    scale = float(np.sum(np.abs(ws * rs * radial) * gauss * angular_abs))
    return value, scale


def local_pairing(
    m: int,
    k: int,
    alpha: int,
    x: complex,
    radius: float = 3.0,
    n_r: int = 96,
    n_theta: int = 256,
    weight: int = 1,
) -> complex:
    """(chi u, K_av_x) with u(y) = y^alpha, by quadrature over the ball.

    One complex variable; `weight` is the action weight of the coordinate.
    The inner product carries the 1/m quotient volume factor and the flat
    volume form dA/pi.
    """
    value, _ = _polar_quadrature(
        m, k, alpha, x, weight, lambda r: bump(r, radius), 0.0, radius, n_r, n_theta
    )
    return value / (m * math.pi)


def _outer_defect(
    m: int,
    k: int,
    alpha: int,
    x: complex,
    radius: float,
    n_r: int,
    n_theta: int,
    weight: int,
) -> tuple[complex, float]:
    """integral of (1 - chi 1_ball) u conj(K_av_x) e^{-k phi} over r >= radius/2.

    The integrand decays like e^{-k r (r - |x|)}; one unit beyond the cutoff
    radius it is negligible relative to the defect itself, so the radial
    range [radius/2, radius + 1] suffices.  Returns the defect together with
    the integral of the integrand's modulus, whose roundoff sets the floor
    below which the defect cannot be resolved.
    """
    annulus, scale_a = _polar_quadrature(
        m, k, alpha, x, weight, lambda r: 1.0 - bump(r, radius), radius / 2, radius, n_r, n_theta
    )
    exterior, scale_e = _polar_quadrature(
        m, k, alpha, x, weight, lambda r: 1.0, radius, radius + 1.0, n_r, n_theta
    )
    return (annulus + exterior) / (m * math.pi), (scale_a + scale_e) / (m * math.pi)


def verify_reproducing(
    m: int,
    k: int,
    alpha: int,
    x: complex,
    radius: float = 3.0,
    weight: int = 1,
    max_doublings: int = 5,
) -> float:
    """Defect |u(x) - (chi u, K_av_x)| of the local reproducing identity.

    `alpha` must index a weight-k monomial (weight * alpha = k mod m) and
    `radius` should be >= 3 so the cutoff region is well separated from
    |x| <= 1.  Node counts double until three-digit stabilisation; on
    failure a :class:`QuadratureError` carries the last estimate.
    """
    if (weight * alpha - k) % m != 0:
        raise ValueError(f"monomial weight {weight * alpha} is not k={k} mod m={m}")
    if radius < 3.0:
        raise ValueError("quadrature radius must be >= 3")
    if abs(x) > 1.0:
        raise ValueError("evaluation point must satisfy |x| <= 1")
    n_r, n_theta = 64, 256
    previous = None
    for _ in range(max_doublings + 1):
        raw, scale = _outer_defect(m, k, alpha, x, radius, n_r, n_theta, weight)
        value = abs(raw)
        floor = 1e-13 * scale  # quadrature roundoff on the modulus integral
        if previous is not None:
            if abs(value - previous) <= 1e-3 * max(value, previous) + floor:
                return value
        previous = value
        n_r *= 2
        n_theta *= 2
    raise QuadratureError(
        f"defect quadrature did not stabilise at {n_r}x{n_theta} nodes", achieved=previous
    )


@dataclass(frozen=True)
class DecayCheck:
    """Per-power suprema of k^s |(eta - 1)^s eta^k| over a modulus grid."""

    m: int
    s: int
    u: int
    v: int
    ks: tuple[int, ...]
    sup_per_k: tuple[float, ...]

    @property
    def sup(self) -> float:
        return max(self.sup_per_k)

    def half_range_maxima(self) -> tuple[float, float]:
        """(max over lower half of k-range, max over upper half)."""
        half = len(self.ks) // 2
        return max(self.sup_per_k[:half]), max(self.sup_per_k[half:])


def decay_check(
    m: int,
    s: int,
    u: int,
    v: int,
    x_grid: Sequence[float],
    k_range: Sequence[int],
    weight: int = 1,
) -> DecayCheck:
    """Sup over the modulus grid of k^s |(eta-1)^s eta^k| for each k.

    eta = e^{psi(zeta^u x, zeta^v x) - |x|^2} with u != v mod m; at a fixed
    point eta = 1 and the quantity vanishes.  The contract under test is
    that the suprema stay bounded uniformly in k.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if (u - v) % m == 0:
        raise ValueError("u and v must differ mod m")
    d = (weight * (u - v)) % m
    lam_d = cmath.exp(2j * math.pi * d / m)
    ks = tuple(int(k) for k in k_range)
    sup_per_k = []
    for k in ks:
        best = 0.0
        for x in x_grid:
            w = (lam_d - 1.0) * (x * x)
            eta = cmath.exp(w)
            value = k**s * abs((eta - 1.0) ** s) * abs(eta) ** k
            best = max(best, value)
        sup_per_k.append(best)
    return DecayCheck(m=m, s=s, u=u, v=v, ks=ks, sup_per_k=tuple(sup_per_k))
