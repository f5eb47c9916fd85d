"""Acceptance suite: one test per criterion, one pass/fail line each.

Every tolerance is pinned here, in the assertion, and nowhere else.  Run with
``pytest tests/test_acceptance.py -v -s`` to see the per-criterion lines.
"""

import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from orb_bergman.bergman import (
    HomogeneousWeight,
    bergman_value,
    bergman_value_series,
    weighted_bergman,
    weighted_bergman_gamma,
)
from orb_bergman.coeffs import (
    CoefficientSequence,
    canonical_sequence,
    root_order_at_unity,
    satisfies_condition,
)
from orb_bergman.expansion import EXACT, fit_expansion, periodicity_probe, remainder_slope
from orb_bergman.localkernel import decay_check, verify_reproducing
from orb_bergman.models import FlatCyclicModel, FootballModel
from orb_bergman.riemannroch import predicted_a0_a1, rr_check


@contextmanager
def criterion(number, name, budget_seconds):
    start = time.monotonic()
    try:
        yield
    except Exception:
        print(f"[{number:2d}] {name}: FAIL")
        raise
    elapsed = time.monotonic() - start
    if elapsed > budget_seconds:
        print(f"[{number:2d}] {name}: FAIL (exceeded {budget_seconds}s budget: {elapsed:.1f}s)")
        raise AssertionError(f"exceeded {budget_seconds}s budget: {elapsed:.1f}s")
    print(f"[{number:2d}] {name}: PASS ({elapsed:.2f}s)")


def random_sequence(rng, m):
    size = rng.randint(1, 3 * m)
    support = rng.sample(range(4 * m), min(size, 4 * m))
    return CoefficientSequence.from_dict({i: rng.randint(1, 9) for i in support})


def smoothed_sequence(rng, m, q):
    base = canonical_sequence(m, q)
    g = random_sequence(rng, m)
    prod = {}
    for i, ci in base:
        for j, gj in g:
            prod[i + j] = prod.get(i + j, Fraction(0)) + ci * gj
    return CoefficientSequence.from_dict(prod)


def test_01_moment_condition_root_order_equivalence():
    with criterion(1, "moment condition <=> root order", 5.0):
        for m in range(2, 9):
            rng = random.Random(97 + m)
            for trial in range(200):
                if trial % 2 == 0:
                    c = random_sequence(rng, m)
                else:
                    c = smoothed_sequence(rng, m, rng.randint(1, 4))
                order = root_order_at_unity(c, m)
                for P in range(5):
                    assert bool(satisfies_condition(c, m, P)) == (order >= P + 1)


def test_02_flat_exact_polynomial_law():
    with criterion(2, "flat origin exact polynomial law", 5.0):
        for m in range(1, 7):
            for n in (1, 2):
                model = FlatCyclicModel(n=n, m=m)
                c = canonical_sequence(m, n + 1)
                for k in range(1, 51):
                    value = weighted_bergman(model, c, k, (0.0,) * n)
                    assert value.exact
                    assert value.value == sum(ci * (k + i) ** n for i, ci in c)


def test_03_football_orbifold_point_exactness():
    with criterion(3, "football orbifold-point exact law", 10.0):
        for m, t in ((3, 1), (5, 1), (7, 1)):
            model = FootballModel(m=m, t=t)
            c = canonical_sequence(m, 2)
            b0 = c.total()
            b1 = sum((ci * (i + 1) for i, ci in c), Fraction(0))
            if m == 3:
                assert (b0, b1) == (9, 27)
            for k in range(1, 101):
                value = weighted_bergman(model, c, k, 0)
                assert value.exact
                assert value.value == b0 * k + b1


def test_04_smooth_point_expansion():
    with criterion(4, "smooth-point expansion fit (N=1)", 60.0):
        model = FootballModel(m=3, t=1)
        c = canonical_sequence(3, 2)
        for rho in (Fraction(1, 4), Fraction(1), Fraction(4)):
            samples = [(k, weighted_bergman(model, c, k, rho).value) for k in range(20, 201)]
            fit = fit_expansion(samples, n=1, N=1)
            assert abs(fit.b0 - 9) <= 1e-3 * 9
            assert abs(fit.b1 - 27) <= 1e-2 * 27
            slope = remainder_slope(fit)
            assert slope != EXACT and slope <= -0.85


def test_05_weighted_riemann_roch():
    with criterion(5, "weighted section-count identity", 5.0):
        for m in (3, 5):
            model = FootballModel(m=m, t=1)
            c = canonical_sequence(m, 2)
            report = rr_check(model, c, range(m, 101))
            assert report.conforming
            assert report.all_zero
        assert predicted_a0_a1(FootballModel(m=3, t=1), canonical_sequence(3, 2)) == (3, 9)


def test_06_necessity_of_conditions():
    with criterion(6, "necessity: bare kernel oscillates, smoothed does not", 5.0):
        model = FootballModel(m=3, t=1)
        bare = periodicity_probe(model, CoefficientSequence.from_dict({0: 1}), 0, range(1, 61))
        assert bare.period == 3
        first, second = bare.window_amplitudes
        assert second > 1.5 * first > 0
        # linear growth: amplitude scales like the window mean of k
        mean_first = (1 + 30) / 2
        mean_second = (31 + 60) / 2
        assert second / first == pytest.approx(mean_second / mean_first, rel=0.25)
        smoothed = periodicity_probe(model, canonical_sequence(3, 2), 0, range(1, 61))
        assert smoothed.period is None
        assert smoothed.amplitude == 0.0


def test_07_averaged_kernel_identities():
    with criterion(7, "averaged kernel: closed=series, reproducing defect", 60.0):
        for m in range(1, 7):
            model = FlatCyclicModel(n=1, m=m)
            for k in range(1, 61):
                origin = bergman_value(model, k, (0.0,))
                assert origin.exact
                assert origin.value == (m * k if k % m == 0 else 0)
                for x in (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0):
                    closed = float(bergman_value(model, k, (x,)).value)
                    series = float(bergman_value_series(model, k, (x,), rel_tol=1e-13).value)
                    assert abs(closed - series) <= 1e-10 * max(closed, series)
        defects = [verify_reproducing(2, k, 1, 0.3, radius=3.0) for k in (11, 21, 41)]
        assert defects[0] > defects[1] > defects[2]
        assert defects[2] <= 1e-6


def test_08_decay_claim():
    with criterion(8, "off-diagonal decay stays bounded", 10.0):
        ks = range(10, 201)
        xs = [0.25 * i for i in range(9)]
        for m in (2, 3, 4, 5, 6):
            for d in range(1, m):
                for s in (1, 2, 3):
                    result = decay_check(m, s, d, 0, xs, ks)
                    lower, upper = result.half_range_maxima()
                    assert upper <= lower + 1e-6, (m, d, s)


def test_09_gamma_weighting():
    with criterion(9, "polynomially reweighted sums", 30.0):
        model = FootballModel(m=3, t=1)
        c = canonical_sequence(3, 2)
        gamma = HomogeneousWeight(degree=1, coeffs=(Fraction(1), Fraction(1)))
        for k in range(3, 100, 3):
            value = weighted_bergman_gamma(model, c, gamma, k, 0)
            assert value.exact
            assert value.value == 9 * k * k + 45 * k + 72
        samples = [
            (k, weighted_bergman_gamma(model, c, gamma, k, Fraction(1)).value)
            for k in range(20, 201)
        ]
        fit = fit_expansion(samples, n=2, N=2)
        assert abs(fit.b0 - 9) <= 1e-2 * 9
        assert abs(fit.b1 - 45) <= 1e-2 * 45


def test_10_norm_quadrature_oracle():
    with criterion(10, "section norms match quadrature", 30.0):
        rng = random.Random(206)
        football = FootballModel(m=5, t=1)
        for _ in range(20):
            admissible = []
            while not admissible:  # tiny k can have an empty section space
                k = rng.randint(1, 80)
                admissible = list(football.exponents(k))
            b = rng.choice(admissible)
            exact = float(football.monomial_norm_sq(k, b))
            integral, _ = quad(
                lambda s: s**b * (1 + s) ** (-k - 2), 0, math.inf, epsabs=0, epsrel=1e-11
            )
            assert abs(integral / football.m - exact) <= 1e-8 * exact
        flat = FlatCyclicModel(n=2, m=3, weights=(1, 2))
        for _ in range(20):
            k = rng.randint(1, 50)
            alpha = (rng.randint(0, 7), rng.randint(0, 7))
            exact = float(flat.monomial_norm_sq(k, alpha))
            approx = 1.0 / flat.m
            for a in alpha:
                upper = math.sqrt((2 * a + 80) / k)
                integral, _ = quad(
                    lambda r: 2 * r ** (2 * a + 1) * math.exp(-k * r * r),
                    0,
                    upper,
                    epsabs=0,
                    epsrel=1e-11,
                )
                approx *= integral
            assert abs(approx - exact) <= 1e-8 * exact


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
