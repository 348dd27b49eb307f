"""Logarithmic potential, regularized branches, and slope bounds."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfch import potential

INTERIOR = st.floats(min_value=-0.999999, max_value=0.999999)
DELTAS = (1e-1, 1e-2, 1e-3)


def params(theta=0.4, epsilon=0.1, delta=None):
    return potential.PotentialParams(theta=theta, epsilon=epsilon, delta=delta)


class TestParams:
    @pytest.mark.parametrize("theta", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_theta_outside_open_interval(self, theta):
        with pytest.raises(ValueError):
            params(theta=theta)

    @pytest.mark.parametrize("epsilon", [0.0, -1.0])
    def test_rejects_nonpositive_epsilon(self, epsilon):
        with pytest.raises(ValueError):
            params(epsilon=epsilon)

    @pytest.mark.parametrize("delta", [0.0, 0.5, 0.7, -0.01])
    def test_rejects_delta_outside_range(self, delta):
        with pytest.raises(ValueError):
            params(delta=delta)

    def test_delta_optional(self):
        assert params().delta is None
        assert params(delta=0.01).delta == 0.01


class TestFLog:
    def test_zero(self):
        assert potential.f_log(0.0) == 0.0

    def test_closed_form_at_half(self):
        assert potential.f_log(0.5) == pytest.approx(np.log(3.0), abs=1e-15)
        assert potential.f_log(-0.5) == pytest.approx(-np.log(3.0), abs=1e-15)

    @given(INTERIOR)
    def test_odd(self, r):
        assert potential.f_log(-r) == -potential.f_log(r)

    @given(st.floats(min_value=-0.99, max_value=0.99))
    def test_derivative_matches_finite_difference(self, r):
        step = 1e-7
        fd = (potential.f_log(r + step) - potential.f_log(r - step)) / (2 * step)
        assert potential.f_log_prime(r) == pytest.approx(fd, rel=1e-5)

    def test_accurate_near_pole(self):
        # log1p formulation: f(1 - 2^-40) = log(2 - 2^-40) - log(2^-40)
        r = 1.0 - 2.0**-40
        exact = np.log(2.0 - 2.0**-40) + 40.0 * np.log(2.0)
        assert potential.f_log(r) == pytest.approx(exact, rel=1e-14)

    @pytest.mark.parametrize("r", [1.0, -1.0, 1.5, np.inf])
    def test_rejects_pole_and_beyond(self, r):
        with pytest.raises(ValueError):
            potential.f_log(r)
        with pytest.raises(ValueError):
            potential.f_log_prime(r)

    def test_vectorized(self):
        out = potential.f_log(np.array([0.0, 0.5]))
        np.testing.assert_allclose(out, [0.0, np.log(3.0)], atol=1e-15)


class TestFTotal:
    def test_value_at_zero_is_half_for_any_theta(self):
        for theta in (0.1, 0.4, 0.9):
            assert potential.F_total(0.0, params(theta=theta)) == 0.5

    def test_endpoint_limit(self):
        # (1 -+ r) log(1 -+ r) -> 0, so F_log(+-1) = 2 log 2
        assert potential.F_log(1.0) == pytest.approx(2.0 * np.log(2.0), abs=1e-15)
        value = potential.F_total(1.0, params(theta=0.4))
        assert value == pytest.approx(0.4 * np.log(2.0), abs=1e-15)

    @given(st.floats(min_value=-1.0, max_value=1.0))
    def test_even(self, r):
        p = params()
        assert potential.F_total(r, p) == potential.F_total(-r, p)

    def test_rejects_outside_closed_interval(self):
        with pytest.raises(ValueError):
            potential.F_total(1.0000001, params())


class TestRegularizedBranches:
    def test_zero(self):
        assert potential.f_delta(0.0, params(delta=0.1)) == 0.0

    @pytest.mark.parametrize("delta", DELTAS)
    def test_continuity_at_knots(self, delta):
        # interior formula and the linear branch, both evaluated at the knot
        p = params(delta=delta)
        knot = 1.0 - delta
        interior = potential.f_delta(knot, p)
        branch = (
            np.log(2.0 - delta) - np.log(delta)
            - (1.0 - knot) / delta + (1.0 + knot) / (2.0 - delta)
        )
        assert abs(branch - interior) < 1e-12 * max(1.0, abs(interior))
        assert potential.f_delta(-knot, p) == -potential.f_delta(knot, p)

    @pytest.mark.parametrize("delta", DELTAS)
    def test_no_jump_across_knots(self, delta):
        p = params(delta=delta)
        knot = 1.0 - delta
        slope = 1.0 / delta + 1.0 / (2.0 - delta)
        spacing = 2.0 * knot * 1e-13
        for sign in (1.0, -1.0):
            below = potential.f_delta(sign * knot * (1.0 - 1e-13), p)
            above = potential.f_delta(sign * knot * (1.0 + 1e-13), p)
            assert abs(above - below) < 2.0 * slope * spacing + 1e-12

    @pytest.mark.parametrize("delta", DELTAS)
    def test_knot_value_closed_form(self, delta):
        p = params(delta=delta)
        expected = np.log((2.0 - delta) / delta)
        assert potential.f_delta(1.0 - delta, p) == pytest.approx(expected, rel=1e-14)

    def test_knot_value_frozen(self):
        assert potential.f_delta(0.9, params(delta=0.1)) == pytest.approx(
            2.94443897916644046, abs=1e-14
        )

    @pytest.mark.parametrize("delta", DELTAS)
    def test_outer_slope_constant(self, delta):
        p = params(delta=delta)
        expected = 1.0 / delta + 1.0 / (2.0 - delta)
        for r in (1.0 - delta / 2.0, 1.0, 1.7, -2.4):
            if abs(r) > 1.0 - delta:
                assert potential.f_delta_prime(r, p) == expected

    @pytest.mark.parametrize("delta", DELTAS)
    def test_first_derivative_continuous_at_knots(self, delta):
        # inner slope at the knot is 2/((1-r)(1+r)) = 2/(delta (2-delta)),
        # which equals the outer constant, so f_delta is C^1
        p = params(delta=delta)
        knot = 1.0 - delta
        inner = potential.f_delta_prime(knot * (1.0 - 1e-13), p)
        outer = potential.f_delta_prime(knot * (1.0 + 1e-13), p)
        assert abs(inner - outer) < 1e-10 * outer

    @pytest.mark.parametrize("delta", DELTAS)
    def test_prime_matches_finite_difference(self, delta):
        p = params(delta=delta)
        rng = np.random.default_rng(3)
        samples = rng.uniform(-2.0, 2.0, size=200)
        knot = 1.0 - delta
        # keep clear of the knots where one-sided curvature kicks in
        samples = samples[np.abs(np.abs(samples) - knot) > 1e-3]
        step = 1e-6
        fd = (
            potential.f_delta(samples + step, p)
            - potential.f_delta(samples - step, p)
        ) / (2.0 * step)
        np.testing.assert_allclose(fd, potential.f_delta_prime(samples, p), rtol=1e-6)

    def test_odd(self):
        p = params(delta=0.01)
        r = np.linspace(-2.5, 2.5, 301)
        np.testing.assert_allclose(
            potential.f_delta(-r, p), -potential.f_delta(r, p), atol=1e-13
        )

    def test_requires_delta(self):
        with pytest.raises(ValueError):
            potential.f_delta(0.0, params())


class TestRegularizedEnergy:
    def test_matches_exact_inside(self):
        p = params(delta=0.1)
        r = np.linspace(-0.9, 0.9, 181)
        np.testing.assert_allclose(
            potential.F_delta_total(r, p),
            potential.F_total(r, p),
            rtol=0,
            atol=1e-14,
        )

    def test_quadratic_branch_frozen_value(self):
        # upper branch evaluated at r=2, delta=0.1 (50-digit evaluation)
        p = params(delta=0.1)
        assert potential.F_delta_log(2.0, p) == pytest.approx(
            10.596567804142808959, rel=1e-15
        )
        assert potential.F_delta_total(2.0, params(theta=0.4, delta=0.1)) == (
            pytest.approx(0.61931356082856179, rel=1e-13)
        )

    @pytest.mark.parametrize("delta", DELTAS)
    def test_global_lower_bound(self, delta):
        p = params(delta=delta)
        r = np.linspace(-3.0, 3.0, 6001)
        assert np.min(potential.F_delta_log(r, p)) >= -1.0

    def test_even(self):
        p = params(delta=0.01)
        r = np.linspace(-3.0, 3.0, 601)
        np.testing.assert_allclose(
            potential.F_delta_log(r, p), potential.F_delta_log(-r, p), atol=1e-13
        )

    @pytest.mark.parametrize("delta", DELTAS)
    def test_energy_derivative_is_f_delta(self, delta):
        p = params(theta=0.4, delta=delta)
        rng = np.random.default_rng(5)
        r = rng.uniform(-2.0, 2.0, size=100)
        r = r[np.abs(np.abs(r) - (1.0 - delta)) > 1e-3]
        step = 1e-6
        fd = (
            potential.F_delta_total(r + step, p) - potential.F_delta_total(r - step, p)
        ) / (2.0 * step)
        expected = 0.5 * p.theta * potential.f_delta(r, p) - r
        np.testing.assert_allclose(fd, expected, rtol=1e-5, atol=1e-8)


class TestSlopeBounds:
    @pytest.mark.parametrize("delta", DELTAS)
    def test_monotonicity_lower_bound(self, delta):
        # (f_delta(r) - f_delta(s))(r - s) >= (r - s)^2: slope is at least 2
        p = params(delta=delta)
        rng = np.random.default_rng(17)
        r = rng.uniform(-2.0, 2.0, size=2000)
        s = rng.uniform(-2.0, 2.0, size=2000)
        gap = (potential.f_delta(r, p) - potential.f_delta(s, p)) * (r - s)
        assert np.all(gap >= (r - s) ** 2 * (1.0 - 1e-12))

    @pytest.mark.parametrize("delta", DELTAS)
    def test_global_slope_upper_bound(self, delta):
        # the steepest slope is the outer-branch constant 1/delta + 1/(2-delta)
        p = params(delta=delta)
        rng = np.random.default_rng(19)
        r = rng.uniform(-2.0, 2.0, size=2000)
        s = rng.uniform(-2.0, 2.0, size=2000)
        lipschitz = 1.0 / delta + 1.0 / (2.0 - delta)
        gap = (potential.f_delta(r, p) - potential.f_delta(s, p)) * (r - s)
        assert np.all(gap <= lipschitz * (r - s) ** 2 * (1.0 + 1e-9))

    @pytest.mark.parametrize("delta", DELTAS)
    def test_outer_region_strong_monotonicity(self, delta):
        # same-side saturated pairs: slope at least 1/(2 delta)
        p = params(delta=delta)
        rng = np.random.default_rng(23)
        r = rng.uniform(1.0 - delta, 2.0, size=1000)
        s = rng.uniform(1.0 - delta, 2.0, size=1000)
        for sign in (1.0, -1.0):
            gap = (
                potential.f_delta(sign * r, p) - potential.f_delta(sign * s, p)
            ) * (sign * r - sign * s)
            assert np.all(gap >= (r - s) ** 2 / (2.0 * delta) * (1.0 - 1e-12))
