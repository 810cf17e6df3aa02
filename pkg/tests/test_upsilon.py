import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from hardchains.upsilon import (
    UpsilonParams,
    smoothness_constant,
    upsilon_deriv,
    upsilon_grad_sup,
    upsilon_higher_deriv,
    upsilon_lipschitz_estimate,
    upsilon_value,
)

# adaptive quadrature of the defining integral, frozen
QUADRATURE_VALUES = [
    (0.0, 1.0, 7.3410512259029215),
    (0.0, 2.0, 9.116104620867493),
    (0.0, 10.0, 9.960212961406423),
    (-1.0, 1.0, 51.504440784612406),
    (2.0, 1.0, 43.63262261514777),
    (0.5, 3.0, 6.503010121069882),
    (-3.0, 100.0, 3517.9597581154094),
    (3.0, 10.0, 1278.1578056740582),
]

r_values = st.floats(1.0, 1e4)
x_values = st.floats(-50.0, 50.0)


def quadrature(x, r):
    integrand = lambda t: 120 * t * t * (t - 1) / (1 + (t / r) ** 2)  # noqa: E731
    return quad(integrand, 1.0, x, epsabs=0, epsrel=1e-13, limit=200)[0]


def test_params_reject_small_r():
    with pytest.raises(ValueError):
        UpsilonParams(0.5)
    with pytest.raises(ValueError):
        UpsilonParams(float("nan"))


@pytest.mark.parametrize("r", [1.0, 7.0, 1e6])
def test_value_vanishes_at_one(r):
    assert upsilon_value(1.0, UpsilonParams(r)) == 0.0


def test_value_at_origin_matches_closed_expression():
    expected = 120 * (0.5 - math.pi / 4 + math.log(2) / 2)
    assert upsilon_value(0.0) == pytest.approx(expected, rel=1e-14)


def test_large_r_tends_to_quartic():
    assert upsilon_value(0.0, 1e6) == pytest.approx(10.0, rel=1e-9)
    x = np.linspace(-2, 2, 41)
    assert np.allclose(upsilon_value(x, 1e6), 30 * x**4 - 40 * x**3 + 10, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("x,r,expected", QUADRATURE_VALUES)
def test_frozen_quadrature_values(x, r, expected):
    assert upsilon_value(x, r) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(x_values, r_values)
def test_closed_form_matches_quadrature(x, r):
    q = quadrature(x, r)
    assert upsilon_value(x, r) == pytest.approx(q, rel=1e-9, abs=1e-12)


def test_vectorized_matches_scalar():
    x = np.linspace(-4, 4, 37)
    vec = upsilon_value(x, 3.0)
    assert vec.shape == x.shape
    assert np.array_equal(vec, [upsilon_value(v, 3.0) for v in x])


@pytest.mark.parametrize("x,r", [(0.0, 1.0), (1.0, 7.0)])
def test_first_derivative_vanishes_at_stationary_points(x, r):
    assert upsilon_deriv(x, r, 1) == 0.0


def test_first_derivative_at_half():
    assert upsilon_deriv(0.5, 1.0, 1) == pytest.approx(-12.0, rel=1e-15)


def test_unsupported_order_points_to_finite_differences():
    with pytest.raises(ValueError, match="finite differences"):
        upsilon_deriv(0.3, 1.0, 3)


@settings(max_examples=100, deadline=None)
@given(st.floats(-5.0, 5.0), st.floats(1.0, 100.0), st.sampled_from([1, 2]))
def test_analytic_derivatives_match_finite_differences(x, r, order):
    h = 1e-5 * max(1.0, abs(x))
    lower = upsilon_value if order == 1 else (lambda z, p: upsilon_deriv(z, p, 1))
    fd = (lower(x + h, r) - lower(x - h, r)) / (2 * h)
    exact = upsilon_deriv(x, r, order)
    scale = max(1.0, abs(exact), abs(upsilon_deriv(x, r, 1)) if order == 2 else 1.0)
    assert abs(fd - exact) <= 1e-6 * scale


def test_higher_derivative_of_quartic_limit():
    # U_inf''' = 720 x - 240 and U_inf'''' = 720
    r = 1e7
    assert upsilon_higher_deriv(0.3, r, 3) == pytest.approx(720 * 0.3 - 240, rel=1e-5)
    assert upsilon_higher_deriv(0.3, r, 4) == pytest.approx(720, rel=1e-3)


@settings(max_examples=60, deadline=None)
@given(x_values, r_values)
def test_nonnegative_with_minimum_at_one(x, r):
    assert upsilon_value(x, r) >= 0.0


@settings(max_examples=60, deadline=None)
@given(r_values)
def test_origin_value_bounded_by_ten(r):
    assert upsilon_value(0.0, r) <= 10.0


@settings(max_examples=100, deadline=None)
@given(x_values, r_values)
def test_derivative_sign_pattern(x, r):
    d = upsilon_deriv(x, r, 1)
    if x <= 1:
        assert d <= 0
    if x >= 1:
        assert d >= 0


@settings(max_examples=100, deadline=None)
@given(st.one_of(st.floats(0.1, 0.9), st.floats(-50.0, -0.1)), r_values)
def test_derivative_strongly_negative_off_stationary_points(x, r):
    assert upsilon_deriv(x, r, 1) < -1.0


def test_lipschitz_estimate_reports_spacing():
    est, spacing = upsilon_lipschitz_estimate(UpsilonParams(1.0), 1)
    assert spacing == pytest.approx(10.0 / 40000)
    assert 0 < est <= smoothness_constant(1)


def test_lipschitz_estimate_matches_optimizer_oracle():
    # |U_1''| maximized by a bounded scalar search on each branch of the grid
    est, _ = upsilon_lipschitz_estimate(UpsilonParams(1.0), 1)
    best = 0.0
    for lo, hi in [(-5, -1), (-1, 0), (0, 1), (1, 5)]:
        res = minimize_scalar(lambda z: -abs(upsilon_deriv(z, 1.0, 2)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        best = max(best, -res.fun)
    assert est == pytest.approx(best, rel=1e-6)


def test_lipschitz_estimate_scaling_law_order_three():
    a = upsilon_lipschitz_estimate(UpsilonParams(1.0), 3)[0]
    b = upsilon_lipschitz_estimate(UpsilonParams(2.0), 3)[0]
    assert b <= a


def test_second_derivative_vanishes_at_origin():
    assert upsilon_deriv(0.0, 1.0, 2) == 0.0


def test_lipschitz_estimate_rejects_bad_grid():
    with pytest.raises(ValueError, match="empty grid"):
        upsilon_lipschitz_estimate(UpsilonParams(1.0), 1, points=1)
    with pytest.raises(ValueError):
        upsilon_lipschitz_estimate(UpsilonParams(1.0), 1, half_width=1.0)


def test_smoothness_constants_cover_unit_scale():
    for q in (1, 2, 3):
        est = upsilon_lipschitz_estimate(UpsilonParams(1.0), q)[0]
        assert smoothness_constant(q) >= est


def test_gradient_supremum_on_unit_interval():
    z = np.linspace(0, 1, 2001)
    assert upsilon_grad_sup(1.0) >= np.max(np.abs(upsilon_deriv(z, 1.0, 1)))
    res = minimize_scalar(lambda t: upsilon_deriv(t, 1.0, 1), bounds=(0, 1), method="bounded",
                          options={"xatol": 1e-12})
    assert upsilon_grad_sup(1.0) == pytest.approx(-res.fun, rel=1e-8)
