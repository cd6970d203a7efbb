import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from fracbvp.errors import DomainError, RangeWarning, ValidationError
from fracbvp.fraccore import GridFunction
from fracbvp.green import (
    c_delta,
    green_branches,
    green_eval,
    green_inner_integral,
    green_row_integrals,
    h1_integral,
    kernel_order,
    kernel_property_summary,
    lower_kernel_integral,
)

unit = st.floats(0.0, 1.0)
betas = st.floats(3.0001, 4.0)


def row_exact(s, beta):
    return s / special.gamma(beta) - s**beta / special.gamma(beta + 1)


class TestKernel:
    @pytest.mark.parametrize("beta", [3.0, 2.5, 4.01])
    def test_order_range(self, beta):
        with pytest.raises(ValidationError):
            kernel_order(beta)

    def test_domain(self):
        with pytest.raises(DomainError):
            green_eval(1.2, 0.5, 3.5)

    def test_value(self):
        t, s, b = 0.7, 0.2, 3.5
        ref = (t * (b - 1) * (1 - s) ** (b - 2) - (t - s) ** (b - 1)) / special.gamma(b)
        assert green_eval(t, s, b) == pytest.approx(ref, rel=1e-14)
        assert green_eval(s, t, b) == pytest.approx(s * (b - 1) * (1 - t) ** (b - 2) / special.gamma(b), rel=1e-14)

    def test_vanishes_at_t0_and_s1(self):
        assert green_eval(0.0, 0.4, 3.3) == 0.0
        assert green_eval(0.6, 1.0, 3.3) == 0.0

    @given(unit, unit, betas)
    def test_nonnegative_and_dominated(self, t, s, beta):
        h = green_eval(t, s, beta)
        h1 = green_eval(1.0, s, beta)
        assert h >= -1e-15
        assert h <= h1 + 1e-15
        assert t ** (beta - 1) * h1 <= h + 1e-14

    @given(unit, betas)
    def test_branch_continuity(self, s, beta):
        below, above = green_branches(s, s, beta)
        assert below == pytest.approx(above, abs=1e-15)

    @pytest.mark.parametrize("beta", [3.1, 3.5, 4.0])
    def test_summary_passes(self, beta):
        assert kernel_property_summary(beta).passes()


class TestRowIntegrals:
    @pytest.mark.parametrize("beta", [3.2, 3.5, 4.0])
    def test_constant_weight(self, beta):
        w = GridFunction.constant(1.0, 64)
        for s in (0.0, 0.13, 0.5, 0.9, 1.0):
            assert green_inner_integral(s, w, beta) == pytest.approx(row_exact(s, beta), abs=1e-13)

    def test_rows_match_pointwise(self):
        w = GridFunction.from_function(lambda t: np.exp(t), 40)
        rows = green_row_integrals(w, 3.7).values
        pts = [green_inner_integral(t, w, 3.7) for t in w.t]
        np.testing.assert_allclose(rows, pts, atol=1e-14)

    def test_smooth_weight_against_mpmath(self):
        beta, s = 3.3, 0.6
        w = GridFunction.from_function(np.cos, 1024)
        ref = mpmath.quad(lambda tau: _h(s, tau, beta) * mpmath.cos(tau), [0, s, 1])
        assert green_inner_integral(s, w, beta) == pytest.approx(float(ref), abs=1e-7)


def _h(t, s, b):
    g = mpmath.gamma(b)
    common = t * (b - 1) * (1 - s) ** (b - 2)
    return (common - (t - s) ** (b - 1)) / g if s <= t else common / g


class TestH1:
    @pytest.mark.parametrize("beta", [3.1, 3.5, 4.0])
    def test_constant(self, beta):
        r = h1_integral(lambda t: np.ones_like(t), beta)
        assert r.holds
        assert r.value == pytest.approx((beta - 1) / (beta * special.gamma(beta)), rel=1e-12)

    def test_tail(self):
        beta, d = 3.5, 0.5
        ref = ((1 - d) ** (beta - 1) - (1 - d) ** beta / beta) / special.gamma(beta)
        assert h1_integral(lambda t: np.ones_like(t), beta, lower=d).value == pytest.approx(ref, rel=1e-12)

    def test_singular_weight(self):
        beta = 3.5
        got = h1_integral(lambda t: t**-0.5, beta).value
        ref = mpmath.quad(lambda t: _h(1, t, beta) * t**-0.5, [0, 1])
        assert got == pytest.approx(float(ref), rel=1e-9)

    def test_grid_weight(self):
        r = h1_integral(GridFunction.constant(2.0, 32), 3.5)
        assert r.value == pytest.approx(2 * 2.5 / (3.5 * special.gamma(3.5)), rel=1e-13)

    def test_zero_weight_fails(self):
        assert not h1_integral(lambda t: np.zeros_like(t), 3.5).holds

    def test_lower_range(self):
        with pytest.raises(DomainError):
            h1_integral(np.exp, 3.5, lower=1.0)


class TestConstants:
    @pytest.mark.parametrize("alpha, beta, q, d", [(1.5, 3.5, 2.0, 0.5), (1.2, 3.9, 3.0, 0.25), (2.0, 3.1, 1.5, 0.8)])
    def test_c_delta(self, alpha, beta, q, d):
        ref = mpmath.quad(lambda s: alpha * (1 - s) ** (alpha - 2) * (s ** (beta - 1)) ** (q - 1), [0, d])
        assert c_delta(alpha, beta, q, d) == pytest.approx(float(ref), rel=1e-11)

    def test_c_delta_demo_value(self):
        assert c_delta(1.5, 3.5, 2.0, 0.5) == pytest.approx(0.048810778, rel=1e-8)

    def test_c_delta_range_warning(self):
        with pytest.warns(RangeWarning):
            c_delta(1.1, 3.1, 1.2, 0.99)

    @pytest.mark.parametrize("d", [0.0, 1.0, -0.5])
    def test_c_delta_domain(self, d):
        with pytest.raises(DomainError):
            c_delta(1.5, 3.5, 2.0, d)

    @pytest.mark.parametrize("alpha, beta, q", [(1.5, 3.5, 2.0), (1.1, 3.2, 1.5), (2.0, 4.0, 3.0), (1.3, 3.7, 1.25)])
    def test_lower_kernel_beta_function(self, alpha, beta, q):
        ref = special.beta(alpha - 1, (beta - 1) * (q - 1) + 1) / special.gamma(alpha)
        assert lower_kernel_integral(alpha, beta, q) == pytest.approx(ref, rel=1e-10)
