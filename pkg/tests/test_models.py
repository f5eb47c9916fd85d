"""Model geometries: bases, norms, counts, curvature, degrees."""

import json
import math
import random
from fractions import Fraction

import pytest
from scipy.integrate import quad

from orb_bergman.models import (
    FlatCyclicModel,
    FootballModel,
    geometric_degrees,
    h0,
    model_from_json_dict,
    model_to_json_dict,
    scalar_curvature,
    section_basis,
)


class TestConstruction:
    @pytest.mark.parametrize("m", [2, 4, 6, 10])
    def test_football_rejects_even_m(self, m):
        with pytest.raises(ValueError, match="odd"):
            FootballModel(m=m)

    @pytest.mark.parametrize("m", [1, 3, 5, 7, 9])
    def test_football_accepts_odd_m(self, m):
        assert FootballModel(m=m).m == m

    def test_football_rejects_bad_twist(self):
        with pytest.raises(ValueError, match="twist"):
            FootballModel(m=9, t=3)
        with pytest.raises(ValueError, match="twist"):
            FootballModel(m=9, t=2)  # t+1 = 3 shares a factor with 9

    def test_football_accepts_unit_twists(self):
        assert FootballModel(m=9, t=4).t == 4  # gcd(4,9)=gcd(5,9)=1

    @pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6, 7, 8])
    def test_flat_accepts_every_m(self, m):
        assert FlatCyclicModel(n=1, m=m, weights=(1,)).m == m

    def test_flat_rejects_ineffective_action(self):
        with pytest.raises(ValueError, match="effective"):
            FlatCyclicModel(n=2, m=4, weights=(2, 2))

    def test_flat_default_weights(self):
        assert FlatCyclicModel(n=3, m=5).weights == (1, 1, 1)


class TestSectionBasis:
    def test_football_m3_k3(self):
        basis = section_basis(FootballModel(m=3, t=1), 3)
        assert dict(basis) == {0: Fraction(1, 12), 3: Fraction(1, 12)}

    def test_football_m1_k2(self):
        basis = section_basis(FootballModel(m=1), 2)
        assert dict(basis) == {0: Fraction(1, 3), 1: Fraction(1, 6), 2: Fraction(1, 3)}

    def test_flat_k3_cap5(self):
        model = FlatCyclicModel(n=1, m=2, weights=(1,))
        basis = section_basis(model, 3, cap=5)
        exponents = sorted(alpha[0] for alpha, _ in basis)
        assert exponents == [1, 3, 5]
        assert dict(basis)[(1,)] == Fraction(1, 18)

    def test_flat_requires_cap(self):
        with pytest.raises(ValueError, match="cap"):
            section_basis(FlatCyclicModel(n=1, m=2), 3)

    def test_football_ignores_cap(self):
        basis = section_basis(FootballModel(m=3, t=1), 3, cap=1)
        assert len(basis) == 2

    @pytest.mark.parametrize("k", [1, 2, 3, 17, 50, 121, 200])
    def test_count_matches_h0(self, k):
        model = FootballModel(m=3, t=1)
        assert len(section_basis(model, k)) == h0(model, k)

    def test_count_matches_h0_all_k(self):
        for model in (FootballModel(m=5, t=1), FootballModel(m=7, t=3)):
            for k in range(1, 201):
                assert len(section_basis(model, k)) == h0(model, k)

    def test_weight_congruence(self):
        model = FootballModel(m=5, t=2)
        for k in (7, 30, 61):
            for b, _ in section_basis(model, k):
                assert (model.t * k + b) % model.m == 0
        flat = FlatCyclicModel(n=2, m=3, weights=(1, 2))
        for k in (4, 9):
            for alpha, _ in section_basis(flat, k, cap=6):
                assert (alpha[0] + 2 * alpha[1]) % 3 == k % 3

    def test_norms_positive(self):
        for model, kwargs in ((FootballModel(m=7, t=1), {}), (FlatCyclicModel(n=2, m=2), {"cap": 5})):
            for _, norm_sq in section_basis(model, 9, **kwargs):
                assert norm_sq > 0


class TestH0:
    def test_examples(self):
        assert h0(FootballModel(m=3, t=1), 3) == 2
        assert h0(FootballModel(m=3, t=1), 4) == 1

    @pytest.mark.parametrize("k", [1, 2, 5, 40])
    def test_trivial_quotient(self, k):
        assert h0(FootballModel(m=1), k) == k + 1

    def test_flat_raises(self):
        with pytest.raises(ValueError, match="noncompact"):
            h0(FlatCyclicModel(n=1, m=2), 3)

    def test_enumeration_oracle(self):
        model = FootballModel(m=5, t=2)
        for k in range(1, 80):
            expected = sum(1 for b in range(k + 1) if (model.t * k + b) % model.m == 0)
            assert h0(model, k) == expected


class TestScalarCurvature:
    def test_flat_zero(self):
        assert scalar_curvature(FlatCyclicModel(n=2, m=3)) == 0

    def test_football_two(self):
        assert scalar_curvature(FootballModel(m=3, t=1)) == 2
        assert scalar_curvature(FootballModel(m=3, t=1), point=Fraction(0)) == 2

    @pytest.mark.parametrize("u", [0.3 + 0.1j, 1.0 + 0j, 0.2 - 0.7j])
    def test_finite_difference_oracle(self, u):
        # Scal(phi) = -(1/phi_uub) d_u d_ub log phi_uub by central differences.
        h = 1e-3

        def lap_quarter(f, z):
            # (1/4) * flat Laplacian = d_u d_ubar
            return (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4 * f(z)) / (4 * h * h)

        def check(phi, expect):
            def density(z):
                return lap_quarter(phi, z)

            val = -lap_quarter(lambda z: math.log(density(z)), u) / density(u)
            assert abs(val - expect) < 5e-3

        check(lambda z: abs(z) ** 2, 0.0)
        check(lambda z: math.log(1 + abs(z) ** 2), 2.0)


class TestGeometricDegrees:
    def test_trivial_quotient(self):
        assert geometric_degrees(FootballModel(m=1)) == (1, -2)

    def test_m3(self):
        assert geometric_degrees(FootballModel(m=3, t=1)) == (Fraction(1, 3), Fraction(-2, 3))

    def test_flat_raises(self):
        with pytest.raises(ValueError, match="noncompact"):
            geometric_degrees(FlatCyclicModel(n=1, m=2))


class TestNormOracle:
    """Exact norms against adaptive quadrature of the defining integrals."""

    def test_football_norms(self):
        rng = random.Random(7)
        model = FootballModel(m=5, t=1)
        for _ in range(8):
            k = rng.randint(1, 60)
            b = rng.choice(list(model.exponents(k)))
            exact = model.monomial_norm_sq(k, b)
            # (1/m) * Beta integral: int_0^inf s^b (1+s)^(-k-2) ds
            integral, _ = quad(
                lambda s: s**b * (1 + s) ** (-k - 2), 0, math.inf, epsabs=0, epsrel=1e-11
            )
            assert abs(integral / model.m - exact) <= 1e-8 * exact

    def test_flat_norms(self):
        rng = random.Random(11)
        model = FlatCyclicModel(n=2, m=3, weights=(1, 2))
        for _ in range(8):
            k = rng.randint(1, 40)
            alpha = (rng.randint(0, 6), rng.randint(0, 6))
            exact = model.monomial_norm_sq(k, alpha)
            # (1/m) * prod_j (1/pi) int |z|^(2 a) e^(-k|z|^2) dA = prod 2 int r^(2a+1) e^(-k r^2) dr
            approx = 1.0 / model.m
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
            assert abs(approx - exact) <= 1e-8 * float(exact)


class TestSerialization:
    def test_round_trip(self):
        for model in (FootballModel(m=7, t=3), FlatCyclicModel(n=2, m=4, weights=(1, 3))):
            blob = json.dumps(model_to_json_dict(model))
            assert model_from_json_dict(json.loads(blob)) == model

    def test_shapes(self):
        assert model_to_json_dict(FootballModel(m=3, t=1)) == {"kind": "football", "m": 3, "t": 1}
        assert model_to_json_dict(FlatCyclicModel(n=1, m=2)) == {
            "kind": "flat",
            "n": 1,
            "m": 2,
            "weights": [1],
        }

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            model_from_json_dict({"kind": "teardrop"})
