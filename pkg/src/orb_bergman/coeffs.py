"""Weight sequences for smoothed kernel sums, and their moment conditions.

A weight sequence assigns a positive rational c_i to finitely many
nonnegative integer offsets i.  Summing kernels of consecutive powers with
these weights smooths out the mod-m periodicity created by cyclic stabiliser
groups, provided the weights distribute their power moments equally over the
residue classes mod m:

    sum_{i = u mod m} i^p c_i  =  (1/m) sum_i i^p c_i    for p = 0, ..., P

for every residue u.  Equivalently (and this equivalence is a theorem that
the test suite checks exhaustively), the generating polynomial sum_i c_i z^i
is divisible by (1 + z + ... + z^{m-1})^(P+1), i.e. it vanishes to order at
least P+1 at every m-th root of unity other than 1.

Everything in this module is exact: coefficients are `fractions.Fraction`,
moment sums are rational, and root orders are computed by exact polynomial
division.  Floats never enter.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

RationalLike = Union[int, Fraction, str]


class Unconstrained:
    """Sentinel for the root order when m = 1 (no nontrivial roots of unity)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "unconstrained"


#: Returned by :func:`root_order_at_unity` when m = 1.
UNCONSTRAINED = Unconstrained()


def _as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


@dataclass(frozen=True)
class CoefficientSequence:
    """Finitely supported map i -> c_i with distinct indices i >= 0 and c_i > 0.

    Immutable; entries are stored sorted by index.
    """

    entries: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("coefficient sequence must have nonempty support")
        seen = set()
        for i, c in self.entries:
            if not isinstance(i, int) or i < 0:
                raise ValueError(f"index {i!r} must be a nonnegative integer")
            if i in seen:
                raise ValueError(f"duplicate index {i}")
            seen.add(i)
            if not isinstance(c, Fraction) or c <= 0:
                raise ValueError(f"coefficient at index {i} must be a positive rational")
        ordered = tuple(sorted(self.entries))
        object.__setattr__(self, "entries", ordered)

    @classmethod
    def from_dict(cls, data: Mapping[int, RationalLike]) -> "CoefficientSequence":
        return cls(tuple((int(i), _as_fraction(c)) for i, c in data.items()))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, RationalLike]]) -> "CoefficientSequence":
        return cls(tuple((int(i), _as_fraction(c)) for i, c in pairs))

    def to_dict(self) -> dict[int, Fraction]:
        return dict(self.entries)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def degree(self) -> int:
        return self.entries[-1][0]

    def __getitem__(self, i: int) -> Fraction:
        for j, c in self.entries:
            if j == i:
                return c
        return Fraction(0)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def total(self) -> Fraction:
        """sum_i c_i."""
        return sum((c for _, c in self.entries), Fraction(0))

    def moment(self, p: int) -> Fraction:
        """sum_i i^p c_i, with the convention 0^0 = 1."""
        return sum((c * (i**p if (i, p) != (0, 0) else 1) for i, c in self.entries), Fraction(0))

    def class_moment(self, p: int, u: int, m: int) -> Fraction:
        """sum over i = u (mod m) of i^p c_i, with 0^0 = 1."""
        return sum(
            (c * (i**p if (i, p) != (0, 0) else 1) for i, c in self.entries if i % m == u % m),
            Fraction(0),
        )

    def polynomial(self) -> list[Fraction]:
        """Dense coefficient list of sum_i c_i z^i, constant term first."""
        out = [Fraction(0)] * (self.degree + 1)
        for i, c in self.entries:
            out[i] = c
        return out

    def scaled_by_index_power(self, a: int) -> "CoefficientSequence":
        """The sequence i^a * c_i, dropping any index where that vanishes."""
        pairs = [(i, c * i**a) for i, c in self.entries if (i, a) == (0, 0) or i > 0]
        if a == 0:
            return self
        if not pairs:
            raise ValueError("i^a * c_i has empty support")
        return CoefficientSequence(tuple(pairs))

    # JSON wire format: {"entries": [[i, "p/q"], ...]} with decimal-free
    # rational strings ("3" for integers, "3/2" otherwise).
    def to_json_dict(self) -> dict:
        return {"entries": [[i, str(c)] for i, c in self.entries]}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "CoefficientSequence":
        try:
            pairs = data["entries"]
        except (KeyError, TypeError):
            raise ValueError('expected an object of the form {"entries": [[i, "p/q"], ...]}')
        return cls.from_pairs((i, _as_fraction(c)) for i, c in pairs)


@dataclass(frozen=True)
class SmoothnessSpec:
    """Smoothing budget: group order m, expansion order N, derivative order r.

    The moment condition must hold for p = 0, ..., P with P = N + r.
    """

    m: int
    N: int
    r: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.N < 0 or self.r < 0:
            raise ValueError("N and r must be >= 0")

    @property
    def P(self) -> int:
        return self.N + self.r


@dataclass(frozen=True)
class MomentRow:
    p: int
    residue: int
    class_sum: Fraction
    mean: Fraction

    @property
    def ok(self) -> bool:
        return self.class_sum == self.mean


@dataclass(frozen=True)
class MomentConditionReport:
    """Outcome of the residue-class moment check, truth value plus full table."""

    m: int
    max_power: int
    holds: bool
    rows: tuple[MomentRow, ...]

    def __bool__(self) -> bool:
        return self.holds

    def failures(self) -> tuple[MomentRow, ...]:
        return tuple(row for row in self.rows if not row.ok)

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "max_power": self.max_power,
            "holds": self.holds,
            "rows": [
                {
                    "p": row.p,
                    "residue": row.residue,
                    "class_sum": str(row.class_sum),
                    "mean": str(row.mean),
                }
                for row in self.rows
            ],
        }


def canonical_sequence(m: int, q: int) -> CoefficientSequence:
    """Coefficients of (1 + z + ... + z^{m-1})^q.

    The standard choice of smoothing weights: integer, symmetric, with support
    {0, ..., q(m-1)} and total m^q.  For m = 1 the empty geometric sum is 1 and
    the result is the singleton {0: 1}.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if q < 1:
        raise ValueError("q must be >= 1")
    poly = [1]
    base = [1] * m
    for _ in range(q):
        poly = _poly_mul(poly, base)
    return CoefficientSequence.from_pairs((i, c) for i, c in enumerate(poly) if c != 0)


def satisfies_condition(c: CoefficientSequence, m: int, P: int) -> MomentConditionReport:
    """Check the residue-class moment condition for p = 0, ..., P.

    Returns a truthy report iff for every p <= P and every residue u mod m,

        sum_{i = u mod m} i^p c_i  ==  (1/m) sum_i i^p c_i,

    computed in exact rational arithmetic (0^0 = 1).  The report lists every
    residue-class sum alongside the mean it is compared to.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if P < 0:
        raise ValueError("P must be >= 0")
    rows = []
    holds = True
    for p in range(P + 1):
        mean = c.moment(p) / m
        for u in range(m):
            class_sum = c.class_moment(p, u, m)
            rows.append(MomentRow(p=p, residue=u, class_sum=class_sum, mean=mean))
            holds = holds and class_sum == mean
    return MomentConditionReport(m=m, max_power=P, holds=holds, rows=tuple(rows))


def root_order_at_unity(c: CoefficientSequence, m: int) -> int | Unconstrained:
    """Vanishing order of sum_i c_i z^i at the nontrivial m-th roots of unity.

    Computed as the largest q such that (1 + z + ... + z^{m-1})^q divides the
    generating polynomial, by repeated exact division over the rationals.
    Since 1 + ... + z^{m-1} has simple roots exactly at the m-th roots of
    unity other than 1, this equals the minimum vanishing order over all of
    them.  For m = 1 there are no such roots and the sentinel
    :data:`UNCONSTRAINED` is returned.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return UNCONSTRAINED
    divisor = [Fraction(1)] * m
    poly = c.polynomial()
    order = 0
    while True:
        quotient, remainder = _poly_divmod(poly, divisor)
        if any(r != 0 for r in remainder):
            return order
        poly = quotient
        order += 1
        if not any(x != 0 for x in poly):  # pragma: no cover - c is nonzero
            return order


def _poly_mul(a: list, b: list) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_divmod(num: list[Fraction], den: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Exact quotient and remainder of polynomials over the rationals.

    Coefficient lists are constant-term first; the divisor's leading
    coefficient must be nonzero.
    """
    num = [Fraction(x) for x in num]
    dd = len(den) - 1
    while dd >= 0 and den[dd] == 0:
        dd -= 1
    if dd < 0:
        raise ZeroDivisionError("polynomial division by zero")
    lead = Fraction(den[dd])
    quotient = [Fraction(0)] * max(len(num) - dd, 1)
    rem = num[:]
    nd = len(rem) - 1
    while nd >= 0 and rem[nd] == 0:
        nd -= 1
    while nd >= dd:
        factor = rem[nd] / lead
        shift = nd - dd
        quotient[shift] = factor
        for j in range(dd + 1):
            rem[shift + j] -= factor * den[j]
        nd = len(rem) - 1
        while nd >= 0 and rem[nd] == 0:
            nd -= 1
    return quotient, rem
