"""Weighted Hilbert-function identities on the compact model.

Summing section counts with conforming weights removes the quasi-polynomial
periodicity of h0 and leaves a genuine polynomial:

    sum_i c_i h0(k + i)  =  a_0 k^n + a_1 k^(n-1) + lower order,

with coefficients determined by the geometry,

    a_0 = (sum_i c_i / n!) deg L,
    a_1 = (sum_i i c_i / (n-1)!) deg L - (sum_i c_i / (2 (n-1)!)) deg K,

which on the one-dimensional football specialises to
a_0 = sum c_i / m and a_1 = (sum i c_i + sum c_i) / m.  The conformance
needed is the residue-class moment condition for p in {0, 1}.  Everything
here is exact rational arithmetic; on this model the identity turns out to
hold on the nose for k >= some small threshold rather than merely up to
O(k^(n-2)), and `rr_check` reports that threshold instead of assuming it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .coeffs import CoefficientSequence, satisfies_condition
from .models import FootballModel, Model, geometric_degrees, h0


@dataclass(frozen=True)
class RRRow:
    k: int
    weighted_h0: Fraction
    predicted: Fraction

    @property
    def difference(self) -> Fraction:
        return self.weighted_h0 - self.predicted


@dataclass(frozen=True)
class RRReport:
    """Exact comparison of the weighted Hilbert function with its polynomial."""

    a0: Fraction
    a1: Fraction
    rows: tuple[RRRow, ...]
    conforming: bool

    @property
    def stable_from(self) -> int | None:
        """Smallest k in the table from which all later differences vanish."""
        threshold = None
        for row in self.rows:
            if row.difference != 0:
                threshold = None
            elif threshold is None:
                threshold = row.k
        return threshold

    @property
    def all_zero(self) -> bool:
        return all(row.difference == 0 for row in self.rows)

    def to_json_dict(self) -> dict:
        return {
            "a0": str(self.a0),
            "a1": str(self.a1),
            "conforming": self.conforming,
            "stable_from": self.stable_from,
            "rows": [
                {
                    "k": row.k,
                    "weighted_h0": str(row.weighted_h0),
                    "predicted": str(row.predicted),
                    "difference": str(row.difference),
                }
                for row in self.rows
            ],
        }


def _require_compact(model: Model) -> FootballModel:
    if not isinstance(model, FootballModel):
        raise ValueError("noncompact model has no section counts")
    return model


def _check_conforming(model: FootballModel, c: CoefficientSequence) -> bool:
    report = satisfies_condition(c, model.m, 1)
    if not report:
        warnings.warn(
            "weights do not satisfy the p <= 1 moment condition at m="
            f"{model.m}; the weighted Hilbert function will stay quasi-polynomial",
            stacklevel=3,
        )
    return bool(report)


def weighted_hilbert(model: Model, c: CoefficientSequence, k: int) -> Fraction:
    """sum_i c_i h0(k + i), exact."""
    football = _require_compact(model)
    _check_conforming(football, c)
    return sum((ci * h0(football, k + i) for i, ci in c), Fraction(0))


def predicted_a0_a1(model: Model, c: CoefficientSequence) -> tuple[Fraction, Fraction]:
    """(a_0, a_1) from the weight sums and the model's geometric degrees."""
    football = _require_compact(model)
    deg_l, deg_k = geometric_degrees(football)
    a0 = c.total() * deg_l
    a1 = c.moment(1) * deg_l - c.total() * deg_k / 2
    return a0, a1


def rr_check(model: Model, c: CoefficientSequence, k_range: Sequence[int]) -> RRReport:
    """Tabulate sum_i c_i h0(k+i) against a_0 k + a_1 over `k_range`, exactly."""
    football = _require_compact(model)
    conforming = _check_conforming(football, c)
    a0, a1 = predicted_a0_a1(football, c)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for k in k_range:
            weighted = weighted_hilbert(football, c, k)
            rows.append(RRRow(k=k, weighted_h0=weighted, predicted=a0 * k + a1))
    return RRReport(a0=a0, a1=a1, rows=tuple(rows), conforming=conforming)
