import math
import random

import pytest
from hypothesis import given, strategies as st

from raycensus.exponential import (
    ESCAPED,
    MapModel,
    SingularValueHit,
    derivative,
    evaluate,
    fundamental_domain_of,
    in_fundamental_domain_exact,
    inverse_branch,
    is_escaped,
    on_cut,
    singular_values,
)

TWO_PI = 2 * math.pi
M2 = MapModel(c=-2)


class TestEvaluate:
    def test_at_zero(self):
        assert evaluate(M2, 0) == -1

    def test_at_i_pi(self):
        assert abs(evaluate(M2, complex(0, math.pi)) - (-3)) < 1e-12

    def test_at_one(self):
        assert abs(evaluate(M2, 1) - (math.e - 2)) < 1e-12

    def test_overflow_sentinel(self):
        assert is_escaped(evaluate(M2, 701))
        assert is_escaped(evaluate(M2, ESCAPED))


class TestDerivative:
    def test_at_zero(self):
        assert derivative(M2, 0) == 1

    def test_at_log3(self):
        assert abs(derivative(M2, math.log(3)) - 3) < 1e-12

    def test_fixed_point_identity(self):
        # at a fixed point e^{z0} = z0 - c
        z0 = 1.1461932206205825
        assert abs(derivative(M2, z0) - (z0 + 2)) < 1e-12

    def test_derivative_minus_evaluate_is_minus_c(self):
        rng = random.Random(7)
        for _ in range(1000):
            z = complex(rng.uniform(-20, 20), rng.uniform(-20, 20))
            d = derivative(M2, z) - evaluate(M2, z)
            assert abs(d - 2) < 1e-9 * max(1.0, abs(evaluate(M2, z)))


class TestSingularValues:
    @pytest.mark.parametrize("c", [-2, complex(0.7375, 4.5588), 0])
    def test_single_asymptotic_value(self, c):
        assert singular_values(MapModel(c=c)) == [c]


class TestInverseBranch:
    def test_principal(self):
        assert abs(inverse_branch(M2, 10, 0) - math.log(12)) < 1e-14

    def test_k_one(self):
        expect = complex(math.log(12), TWO_PI)
        assert abs(inverse_branch(M2, 10, 1) - expect) < 1e-14

    def test_singular_value_hit(self):
        with pytest.raises(SingularValueHit):
            inverse_branch(M2, -2, 0)

    def test_cut_hit(self):
        with pytest.raises(SingularValueHit) as exc:
            inverse_branch(M2, -5, 0)
        assert exc.value.on_cut
        assert on_cut(M2, -5)
        assert not on_cut(M2, 10)

    def test_cut_tolerant_variant_takes_plus_pi_side(self):
        from raycensus.exponential import inverse_branch_cut_ok
        z, flagged = inverse_branch_cut_ok(M2, -5, 0)
        assert flagged
        assert abs(z - complex(math.log(3), math.pi)) < 1e-14
        z2, flagged2 = inverse_branch_cut_ok(M2, 10, 0)
        assert not flagged2
        assert z2 == inverse_branch(M2, 10, 0)
        # signed zero never selects the -pi side
        z3, _ = inverse_branch_cut_ok(M2, complex(-5, -0.0), 0)
        assert z3.imag == math.pi

    @given(st.floats(-50, 50), st.floats(-50, 50), st.integers(-10, 10))
    def test_round_trip(self, re, im, k):
        w = complex(re, im)
        if abs(w) <= M2.R or on_cut(M2, w):
            return
        z = inverse_branch(M2, w, k)
        assert abs(evaluate(M2, z) - w) <= 1e-12 * max(1.0, abs(w))

    @given(st.floats(-50, 50), st.floats(-50, 50), st.integers(-9, 9))
    def test_branch_separation_two_pi(self, re, im, k):
        # separation is 2*pi at representation level (each branch rounds
        # its own imaginary part once, so allow a few ulps, no drift in k)
        w = complex(re, im)
        if w == M2.c or on_cut(M2, w):
            return
        lo = inverse_branch(M2, w, k)
        hi = inverse_branch(M2, w, k + 1)
        assert abs((hi.imag - lo.imag) - TWO_PI) < 1e-14
        assert hi.real == lo.real


class TestFundamentalDomain:
    M5 = MapModel(c=-2, R=5)

    def test_real_point(self):
        assert fundamental_domain_of(self.M5, 10) == 0

    def test_translated_point(self):
        assert fundamental_domain_of(self.M5, complex(10, TWO_PI)) == 1

    def test_left_of_tract(self):
        assert fundamental_domain_of(self.M5, -10) is None

    def test_label_consistency(self):
        rng = random.Random(3)
        for _ in range(200):
            z = complex(rng.uniform(M2.tract_threshold + 0.1, 30),
                        rng.uniform(-20, 20))
            k = fundamental_domain_of(M2, z)
            w = evaluate(M2, z)
            if is_escaped(w) or on_cut(M2, w):
                continue
            back = inverse_branch(M2, w, k)
            assert fundamental_domain_of(M2, back) == k

    def test_exact_membership(self):
        # far-out real point is in F_0 for any slit radius up to |f(z)|
        assert in_fundamental_domain_exact(M2, 10.0, 0, radius=5.0)
        assert not in_fundamental_domain_exact(M2, 1.5 + 0.2j, 0, radius=5.0)
        assert not in_fundamental_domain_exact(M2, complex(10, TWO_PI), 0)


class TestModelValidation:
    def test_default_radius_contains_c_and_f0(self):
        for c in (-2, 0, complex(0.7375, 4.5588), 5j):
            m = MapModel(c=c)
            assert abs(c) < m.R and abs(1 + c) < m.R
            assert math.log(m.R - abs(c)) > -m.R

    def test_radius_too_small_rejected(self):
        with pytest.raises(ValueError):
            MapModel(c=-2, R=1.5)

    def test_unknown_family_rejected(self):
        with pytest.raises(ValueError):
            MapModel(c=-2, family="cosine")
