"""Averaged local kernel: algebraic identities, reproducing defect, decay."""

import cmath
import math
import random

import pytest
from scipy.integrate import quad

from orb_bergman.bergman import bergman_value
from orb_bergman.localkernel import (
    DecayCheck,
    QuadratureError,
    averaged_kernel,
    averaged_kernel_double,
    bump,
    decay_check,
    fock_phase,
    local_pairing,
    verify_reproducing,
)
from orb_bergman.models import FlatCyclicModel


def random_vector(rng, n, scale=1.5):
    return tuple(complex(rng.uniform(-scale, scale), rng.uniform(-scale, scale)) for _ in range(n))


class TestKernelSums:
    def test_collapse_identity(self):
        rng = random.Random(2024)
        for m in (1, 2, 3, 5, 6):
            for n, weights in ((1, (1,)), (2, (1, 2))):
                for k in (1, 4, 17):
                    y, x = random_vector(rng, n), random_vector(rng, n)
                    single = averaged_kernel(m, k, y, x, weights=weights)
                    double = averaged_kernel_double(m, k, y, x, weights=weights)
                    scale = max(abs(single), abs(double), 1.0)
                    assert abs(single - double) <= 1e-12 * scale

    def test_origin_phase_sum(self):
        for m in (2, 3, 5):
            for k in range(1, 3 * m + 1):
                value = averaged_kernel(m, k, 0, 0)
                expected = m * k if k % m == 0 else 0.0
                assert abs(value - expected) <= 1e-9 * max(1.0, m * k)

    def test_trivial_group_is_fock(self):
        y, x = 0.4 + 0.2j, -0.1 + 0.9j
        k = 7
        assert averaged_kernel(1, k, y, x) == pytest.approx(
            k * cmath.exp(k * y * x.conjugate()), rel=1e-14
        )

    def test_equivariance_first_slot(self):
        rng = random.Random(7)
        m, k = 5, 8
        lam = cmath.exp(2j * math.pi / m)
        y, x = random_vector(rng, 1)[0], random_vector(rng, 1)[0]
        assert averaged_kernel(m, k, lam * y, x) == pytest.approx(
            lam**k * averaged_kernel(m, k, y, x), rel=1e-12
        )

    def test_equivariance_second_slot(self):
        rng = random.Random(8)
        m, k = 3, 10
        lam = cmath.exp(2j * math.pi / m)
        y, x = random_vector(rng, 1)[0], random_vector(rng, 1)[0]
        assert averaged_kernel(m, k, y, lam * x) == pytest.approx(
            lam ** (-k) * averaged_kernel(m, k, y, x), rel=1e-12
        )

    def test_hermitian_symmetry(self):
        rng = random.Random(9)
        for m, k in ((2, 5), (4, 9)):
            y, x = random_vector(rng, 2), random_vector(rng, 2)
            left = averaged_kernel(m, k, y, x, weights=(1, 3))
            right = averaged_kernel(m, k, x, y, weights=(1, 3)).conjugate()
            assert left == pytest.approx(right, rel=1e-12)

    def test_phase_properties(self):
        y, x = (0.3 + 1j, 0.2j), (1.1, -0.4 + 0.5j)
        assert fock_phase(x, x) == pytest.approx(sum(abs(z) ** 2 for z in x))
        assert fock_phase(y, x) == pytest.approx(fock_phase(x, y).conjugate())

    def test_diagonal_matches_bergman(self):
        # K_av(x,x) e^{-k|x|^2} is the kernel value: the global and averaged
        # local kernels agree without remainder on the flat model.
        model = FlatCyclicModel(n=1, m=4)
        for k in (3, 8, 21):
            for x in (0.3, 1.1 + 0.7j):
                local = (averaged_kernel(4, k, x, x) * math.exp(-k * abs(x) ** 2)).real
                global_ = float(bergman_value(model, k, (abs(x),)).value)
                assert local == pytest.approx(global_, rel=1e-10, abs=1e-13)


class TestBump:
    def test_plateau_and_support(self):
        assert bump(0.0, 3.0) == 1.0
        assert bump(1.5, 3.0) == 1.0
        assert bump(3.0, 3.0) == 0.0
        assert bump(4.0, 3.0) == 0.0

    def test_c2_join(self):
        # first and second differences vanish at both joins
        h = 1e-4
        for r0 in (1.5, 3.0):
            d1 = (bump(r0 + h, 3.0) - bump(r0 - h, 3.0)) / (2 * h)
            d2 = (bump(r0 + h, 3.0) - 2 * bump(r0, 3.0) + bump(r0 - h, 3.0)) / (h * h)
            assert abs(d1) < 1e-6
            assert abs(d2) < 1e-2


class TestReproducing:
    def test_defect_small_and_decreasing(self):
        residuals = [verify_reproducing(2, k, 1, 0.3, radius=3.0) for k in (11, 21, 41)]
        assert residuals[-1] <= 1e-6
        assert residuals[0] > residuals[1] > residuals[2]

    def test_defect_matches_direct_difference(self):
        # At k = 11 the defect is still above float cancellation noise, so
        # the stable outer-region form must agree with u(x) - pairing.
        m, k, alpha, x = 2, 11, 1, 0.3
        defect = verify_reproducing(m, k, alpha, x)
        direct = abs(x**alpha - local_pairing(m, k, alpha, x))
        assert abs(defect - direct) <= 1e-12

    def test_defect_against_radial_oracle(self):
        # Weight orthogonality collapses the angular integral in closed form,
        # leaving defect = 2 k^(alpha+1) x^alpha / alpha! *
        # int (1 - chi 1_ball) r^(2 alpha + 1) e^(-k r^2) dr; check by 1D
        # adaptive quadrature.
        m, k, alpha, x, R = 2, 11, 1, 0.3, 3.0

        def radial(r):
            w = 1.0 - bump(r, R) if r <= R else 1.0
            return w * r ** (2 * alpha + 1) * math.exp(-k * r * r)

        integral, _ = quad(radial, R / 2, R + 1.0, epsabs=0, epsrel=1e-10)
        oracle = 2 * k ** (alpha + 1) * x**alpha / math.factorial(alpha) * integral
        assert verify_reproducing(m, k, alpha, x) == pytest.approx(oracle, rel=1e-8)

    def test_vanishing_monomial_at_origin(self):
        assert verify_reproducing(3, 6, 3, 0.0) <= 1e-12

    def test_pairing_of_wrong_weight_vanishes(self):
        # A monomial whose weight is not k mod m pairs to ~0 with the
        # weight-k kernel (angular orthogonality).
        m, k = 2, 12
        value = local_pairing(m, k, 1, 0.3)  # alpha=1 odd, k even
        assert abs(value) <= 1e-10

    def test_rejects_wrong_weight_class(self):
        with pytest.raises(ValueError, match="weight"):
            verify_reproducing(2, 12, 1, 0.3)

    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError, match="radius"):
            verify_reproducing(2, 11, 1, 0.3, radius=2.0)
        with pytest.raises(ValueError, match="|x|"):
            verify_reproducing(2, 11, 1, 1.5)

    def test_nonconvergence_raises_with_estimate(self):
        with pytest.raises(QuadratureError) as info:
            verify_reproducing(2, 11, 1, 0.3, max_doublings=0)
        assert info.value.achieved is None or info.value.achieved >= 0


class TestDecay:
    def test_fixed_point_gives_zero(self):
        result = decay_check(2, 1, 0, 1, [0.0], range(10, 30))
        assert result.sup == 0.0

    def test_example_eta_value(self):
        # m=2, u=0, v=1, |x|=1: eta = e^{-2}, and the sequence dies fast.
        lam = cmath.exp(2j * math.pi / 2)
        eta = cmath.exp((lam - 1) * 1.0)
        assert eta.real == pytest.approx(math.exp(-2))
        result = decay_check(2, 1, 0, 1, [1.0], range(10, 101, 10))
        values = result.sup_per_k
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-50

    def test_bounded_over_sweep(self):
        ks = range(10, 201)
        xs = [0.25 * i for i in range(9)]
        for m in (2, 3, 4, 5, 6):
            for d in range(1, m):
                for s in (1, 2, 3):
                    result = decay_check(m, s, d, 0, xs, ks)
                    lower, upper = result.half_range_maxima()
                    assert upper <= lower + 1e-6, (m, d, s)

    def test_rejects_equal_residues(self):
        with pytest.raises(ValueError, match="differ"):
            decay_check(3, 1, 2, 5, [1.0], range(10, 20))

    def test_rejects_bad_s(self):
        with pytest.raises(ValueError, match="s"):
            decay_check(3, 0, 0, 1, [1.0], range(10, 20))

    def test_result_structure(self):
        result = decay_check(3, 2, 0, 1, [0.5, 1.0], [10, 20, 30, 40])
        assert isinstance(result, DecayCheck)
        assert result.ks == (10, 20, 30, 40)
        assert len(result.sup_per_k) == 4
        assert result.sup == max(result.sup_per_k)
