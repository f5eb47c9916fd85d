"""The two exactly solvable model geometries and their section spaces.

Flat model
----------
``C^n`` with potential ``phi(z) = |z|^2`` (so the Kaehler form is the flat
Gaussian one) and a cyclic group of order m acting linearly: the generator
multiplies the coordinate ``z_j`` by ``lambda^{a_j}`` with
``lambda = exp(2 pi i / m)``.  We fix this primitive root once and for all;
every diagonal kernel value computed here depends only on the coordinate
moduli and is independent of that choice.  Sections of the k-th power of the
equivariant line correspond to functions of character weight k mod m, with
monomial basis {z^alpha : sum_j a_j alpha_j = k mod m} and exact Gaussian
norms

    |z^alpha|^2_{L^2}  =  alpha! / (m k^{|alpha| + n}),

the 1/m because integrals on the quotient are 1/m times invariant integrals
upstairs.

Football model
--------------
The quotient of the projective line by the order-m rotation
``[z0 : z1] -> [z0 : lambda z1]``, with the Fubini-Study potential
``phi(u) = log(1 + |u|^2)`` in the affine chart ``u = z1/z0``.  Sections of
O(k) are degree-k forms in (z0, z1).  Under the rotation the monomial
``z0^{k-b} z1^b`` picks up character weight b; twisting the linearisation of
O(1) by the character t adds t per tensor factor, so the monomial carries
total weight t*k + b as an equivariant section of O(k).  It descends to the
quotient iff

    t*k + b = 0 (mod m),   i.e.   b = r(k) := (-t*k) mod m.

At the fixed points [1:0] and [0:1] the stabiliser acts on the fibre of O(1)
with weights t and t+1 (the weights of the nonvanishing sections z0 and z1),
and faithfulness of both fibre actions requires gcd(t, m) = gcd(t+1, m) = 1.
Consecutive integers cannot both be coprime to an even m, so this model
exists exactly for odd m; even orders are exercised by the flat model.  The
monomial norms are exact Beta integrals,

    |z0^{k-b} z1^b|^2_{L^2}  =  (1/m) * b! (k-b)! / (k+1)!.

Scalar curvature normalisation: conventions here are pinned by the exact
identity that the unweighted kernel on the unquotiented projective line
(m = 1) is identically k + 1, which forces the subleading coefficient
1 = Scal/2, i.e. Scal = 2 for the round metric and 0 for the flat one.  The
same normalisation is expressed by the potential formula

    Scal(phi)(u) = -(1 / phi_{u ubar}) * d_u d_ubar log phi_{u ubar},

which the test suite checks by finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

Exponent = Union[int, tuple[int, ...]]


@dataclass(frozen=True)
class FlatCyclicModel:
    """C^n with the flat Gaussian potential and a linear cyclic action.

    ``weights[j]`` is the character weight of the coordinate ``z_j``; the
    action is effective iff gcd(weights..., m) = 1.
    """

    n: int
    m: int
    weights: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension n must be >= 1")
        if self.m < 1:
            raise ValueError("group order m must be >= 1")
        weights = self.weights or (1,) * self.n
        weights = tuple(int(a) % self.m for a in weights)
        if len(weights) != self.n:
            raise ValueError(f"expected {self.n} action weights, got {len(weights)}")
        if math.gcd(self.m, *weights) != 1:
            raise ValueError("action is not effective: gcd(weights, m) != 1")
        object.__setattr__(self, "weights", weights)

    @property
    def compact(self) -> bool:
        return False

    def admissible(self, k: int, alpha: Sequence[int]) -> bool:
        """Whether the monomial z^alpha has character weight k mod m."""
        return sum(a * x for a, x in zip(self.weights, alpha)) % self.m == k % self.m

    def monomial_norm_sq(self, k: int, alpha: Sequence[int]) -> Fraction:
        """Exact Gaussian L^2 norm squared of z^alpha: alpha! / (m k^(|alpha|+n))."""
        fact = 1
        for a in alpha:
            fact *= math.factorial(a)
        return Fraction(fact, self.m * k ** (sum(alpha) + self.n))

    def exponents(self, k: int, cap: int):
        """All alpha with |alpha| <= cap and weight k mod m, lexicographic."""
        target = k % self.m

        def rec(prefix, budget, weight):
            if len(prefix) == self.n:
                if weight % self.m == target:
                    yield tuple(prefix)
                return
            for a in range(budget + 1):
                yield from rec(prefix + [a], budget - a, weight + a * self.weights[len(prefix)])

        yield from rec([], cap, 0)


@dataclass(frozen=True)
class FootballModel:
    """The projective line modulo the order-m rotation, with twist t on O(1).

    Requires gcd(t, m) = gcd(t+1, m) = 1 (fibre weights at both fixed points
    are units mod m), which is satisfiable exactly when m is odd.
    """

    m: int
    t: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("group order m must be >= 1")
        if self.m % 2 == 0:
            raise ValueError(
                "football model requires odd m: no twist t has both t and t+1 invertible mod an even m"
            )
        if math.gcd(self.t, self.m) != 1 or math.gcd(self.t + 1, self.m) != 1:
            raise ValueError("twist t must satisfy gcd(t, m) = gcd(t+1, m) = 1")

    @property
    def n(self) -> int:
        return 1

    @property
    def compact(self) -> bool:
        return True

    def residue(self, k: int) -> int:
        """The residue class r(k) = (-t*k) mod m of admissible exponents b."""
        return (-self.t * k) % self.m

    def monomial_norm_sq(self, k: int, b: int) -> Fraction:
        """Exact Fubini-Study L^2 norm squared of z0^(k-b) z1^b."""
        if not 0 <= b <= k:
            raise ValueError(f"exponent b={b} outside [0, {k}]")
        return Fraction(
            math.factorial(b) * math.factorial(k - b), self.m * math.factorial(k + 1)
        )

    def exponents(self, k: int):
        return range(self.residue(k), k + 1, self.m)


Model = Union[FlatCyclicModel, FootballModel]


@dataclass(frozen=True)
class SectionBasis:
    """Monomial exponents with exact L^2 norms squared for one power k."""

    k: int
    entries: tuple[tuple[Exponent, Fraction], ...] = field(default=())

    def __post_init__(self):
        seen = set()
        for exponent, norm_sq in self.entries:
            if exponent in seen:
                raise ValueError(f"duplicate exponent {exponent}")
            seen.add(exponent)
            if norm_sq <= 0:
                raise ValueError(f"norm^2 at {exponent} must be positive")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def section_basis(model: Model, k: int, cap: Optional[int] = None) -> SectionBasis:
    """Monomial basis of the weight-k section space with exact norms squared.

    Football: all b in [0, k] with b = r(k) mod m.  Flat: all alpha with
    |alpha| <= cap in the right weight class; the basis is infinite, so `cap`
    is mandatory there.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(model, FootballModel):
        entries = tuple((b, model.monomial_norm_sq(k, b)) for b in model.exponents(k))
        return SectionBasis(k=k, entries=entries)
    if cap is None:
        raise ValueError("infinite basis requires cap")
    entries = tuple(
        (alpha, model.monomial_norm_sq(k, alpha)) for alpha in model.exponents(k, cap)
    )
    return SectionBasis(k=k, entries=entries)


def h0(model: Model, k: int) -> int:
    """Dimension of the weight-k section space on the compact model."""
    if not isinstance(model, FootballModel):
        raise ValueError("noncompact model has no h0")
    if k < 1:
        raise ValueError("k must be >= 1")
    return (k - model.residue(k)) // model.m + 1


def scalar_curvature(model: Model, point=None) -> Fraction:
    """Scalar curvature in the conventions fixed in the module docstring.

    Both models have constant curvature: 0 for the flat Gaussian metric, 2
    for the round Fubini-Study football (any stabiliser acts by isometries
    upstairs, so the value is the same at orbifold points).  The `point`
    argument is accepted for interface uniformity and ignored.
    """
    if isinstance(model, FootballModel):
        return Fraction(2)
    return Fraction(0)


def geometric_degrees(model: Model) -> tuple[Fraction, Fraction]:
    """(deg L, deg K) as orbifold integrals on the compact model.

    Global-quotient integrals are 1/m times the integrals upstairs, so the
    football gives (1/m) * 1 for the hyperplane class and (1/m) * (-2) for
    the canonical class of the projective line.
    """
    if not isinstance(model, FootballModel):
        raise ValueError("noncompact model has no geometric degrees")
    return Fraction(1, model.m), Fraction(-2, model.m)


def model_to_json_dict(model: Model) -> dict:
    if isinstance(model, FootballModel):
        return {"kind": "football", "m": model.m, "t": model.t}
    return {"kind": "flat", "n": model.n, "m": model.m, "weights": list(model.weights)}


def model_from_json_dict(data: Mapping) -> Model:
    kind = data.get("kind")
    if kind == "football":
        return FootballModel(m=int(data["m"]), t=int(data.get("t", 1)))
    if kind == "flat":
        weights = tuple(int(a) for a in data.get("weights", ()))
        return FlatCyclicModel(n=int(data["n"]), m=int(data["m"]), weights=weights)
    raise ValueError(f"unknown model kind {kind!r}")
