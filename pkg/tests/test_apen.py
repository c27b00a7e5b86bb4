import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fatiguekit import ApEnParams, ArgumentError, InsufficientDataError, approximate_entropy
from oracles import apen_oracle


class TestOracleAgreement:
    def test_alternating_sequence(self):
        x = [1, 2, 1, 2, 1, 2, 1, 2, 1, 2]
        p = ApEnParams(m=2, r=0.5)
        expected = apen_oracle(x, 2, 0.5)
        assert abs(approximate_entropy(x, p) - expected) < 1e-9

    def test_random_batch(self):
        rng = np.random.default_rng(20240811)
        for _ in range(200):
            n = int(rng.integers(6, 61))
            m = int(rng.integers(1, 3))
            x = rng.normal(size=n)
            sigma = float(np.std(x))
            r = float(rng.uniform(0.1, 0.5)) * sigma
            if r <= 0:
                continue
            got = approximate_entropy(x, ApEnParams(m=m, r=r))
            want = apen_oracle(x, m, r)
            assert abs(got - want) < 1e-9, (n, m, r)

    def test_ramp(self):
        x = list(range(20))
        p = ApEnParams(m=2, r=1.5)
        assert abs(approximate_entropy(x, p) - apen_oracle(x, 2, 1.5)) < 1e-9


class TestConstantSeries:
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_exact_zero(self, m):
        x = [4.2] * 30
        assert approximate_entropy(x, ApEnParams(m=m, r=0.1)) == 0.0

    def test_zero_with_default_tolerance(self):
        # sigma is 0, so the relative default degenerates; still exactly 0
        x = [7.0] * 10
        assert approximate_entropy(x, ApEnParams(m=2)) == 0.0


class TestParams:
    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            approximate_entropy([1.0, 2.0, 3.0], ApEnParams(m=2, r=0.5))

    def test_boundary_length_accepted(self):
        approximate_entropy([1.0, 2.0, 3.0, 4.0], ApEnParams(m=2, r=0.5))

    def test_bad_m(self):
        with pytest.raises(ArgumentError):
            ApEnParams(m=0, r=0.5)

    def test_bad_r(self):
        with pytest.raises(ArgumentError):
            ApEnParams(m=2, r=0.0)
        with pytest.raises(ArgumentError):
            ApEnParams(m=2, r=-1.0)

    def test_bad_r_scale(self):
        with pytest.raises(ArgumentError):
            ApEnParams(m=2, r=None, r_scale=0.0)

    def test_relative_tolerance_matches_explicit(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=40)
        sigma = float(np.std(x))
        via_default = approximate_entropy(x, ApEnParams(m=2))
        via_explicit = approximate_entropy(x, ApEnParams(m=2, r=0.2 * sigma))
        assert via_default == via_explicit

    def test_two_dimensional_input_rejected(self):
        with pytest.raises(ArgumentError):
            approximate_entropy(np.zeros((4, 4)), ApEnParams(m=1, r=0.5))


class TestProperties:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-100, max_value=100, allow_nan=False),
                    min_size=6, max_size=40),
           st.floats(min_value=-1000, max_value=1000, allow_nan=False))
    def test_shift_invariance(self, xs, c):
        sigma = float(np.std(xs))
        if sigma < 1e-6:
            return
        p = ApEnParams(m=2, r=0.3 * sigma)
        a = approximate_entropy(xs, p)
        b = approximate_entropy([x + c for x in xs], p)
        assert math.isclose(a, b, rel_tol=0, abs_tol=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False),
                    min_size=6, max_size=30))
    def test_non_negative_up_to_rounding(self, xs):
        sigma = float(np.std(xs))
        if sigma < 1e-6:
            return
        value = approximate_entropy(xs, ApEnParams(m=1, r=0.25 * sigma))
        assert value >= -1e-12
