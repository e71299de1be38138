import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specrecon.entire import (AnalyticHandle, _sc_series, boundary_preset,
                              const_handle, poly_handle, rho_of, sc_derivative,
                              sc_values, s_over_lambda, SpectralPoint)
from specrecon.errors import QuadratureDivergence

PI = np.pi


@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False,
                          allow_infinity=False))
def test_rho_branch(lam):
    r = complex(rho_of(lam))
    assert abs(r * r - lam) <= 1e-12 * max(1.0, abs(lam))
    # arg in [-pi/2, pi/2) means Re >= 0 minus the positive imaginary axis
    assert r.real >= 0
    assert not (r.real == 0 and r.imag > 0)


def test_spectral_point_validates():
    p = SpectralPoint.of(-4.0)
    assert p.rho == pytest.approx(-2j)
    with pytest.raises(ValueError):
        SpectralPoint(4.0, 2.1)


def test_sc_basic_values():
    t = np.array([0.0, PI / 2, PI])
    s, c = sc_values(t, 4.0)
    np.testing.assert_allclose(s, 2 * np.sin(2 * t), atol=1e-14)
    np.testing.assert_allclose(c, np.cos(2 * t), atol=1e-14)
    s0, c0 = sc_values(t, 0.0)
    np.testing.assert_allclose(s0, 0.0, atol=1e-16)
    np.testing.assert_allclose(c0, 1.0, atol=1e-16)


def test_s_over_lambda_entire_at_zero():
    t = np.array([PI])
    assert s_over_lambda(t, 0.0)[0] == pytest.approx(PI, rel=1e-14)
    # continuity across the series/closed-form switch
    lo = s_over_lambda(t, 0.2499)[0]
    hi = s_over_lambda(t, 0.2501)[0]
    assert abs(lo - hi) < 1e-3


@pytest.mark.parametrize("lam", [0.3, 0.8 + 0.4j, 2.0, 5.0 - 1.0j])
@pytest.mark.parametrize("nu", [0, 1, 2, 3])
def test_sc_derivative_series_vs_closed(lam, nu):
    # the Taylor-in-lambda branch and the rho-recurrence branch are
    # independent evaluation paths; they must agree well inside both domains
    t = np.array([0.5, 1.7, PI, 2 * PI])
    s_c, c_c = sc_derivative(t, lam, nu)
    s_s, c_s = _sc_series(t, lam, nu)
    np.testing.assert_allclose(s_c, s_s, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(c_c, c_s, rtol=1e-9, atol=1e-12)


def test_c_derivative_closed_form_example():
    # (d/dlam) cos(sqrt(lam) pi) at lam = 4 is -pi sin(2 pi)/(2*2) = 0
    _, dc = sc_derivative(np.array([PI]), 4.0, 1)
    assert abs(dc[0]) < 1e-14


def test_poly_handle_derivatives():
    p = poly_handle([0.0, 0.0, 1.0])  # lam^2
    assert p.derivative(3.0, 1) == pytest.approx(6.0)
    assert p.derivative(3.0, 2) == pytest.approx(1.0)
    assert p.derivative(3.0, 3) == 0.0


def test_contour_derivative_matches_closed_form():
    fn = lambda lam: np.cos(rho_of(lam) * PI)  # noqa: E731
    h = AnalyticHandle(fn=fn, derivative_mode="contour")
    for lam in [4.0, 7.3 + 0.2j, 0.5, 2.0 - 1.0j, 11.0]:
        _, dc = sc_derivative(np.array([PI]), lam, 1)
        assert abs(h.derivative(lam, 1) - dc[0]) <= 1e-7 * (1 + abs(dc[0]))


def test_closed_form_contour_cross_check():
    # handle invariant: closed-form and contour derivatives agree at
    # five probe points to relative 1e-7
    p = poly_handle([1.0, -2.0 + 1j, 0.5])
    contour = AnalyticHandle(fn=p.fn, derivative_mode="contour")
    for lam in [0.0, 1.0, -3.0, 2.0 + 2.0j, 10.0]:
        for j in (1, 2):
            a = p.derivative(lam, j)
            b = contour.derivative(lam, j)
            assert abs(a - b) <= 1e-7 * (1 + abs(a))


def test_contour_derivative_divergence_detected():
    # a pole just outside the contour ruins the geometric convergence of the
    # trapezoid rule, so the 64- and 128-point values disagree
    center = 1.0
    bad = AnalyticHandle(fn=lambda lam: 1.0 / (lam - (center + 0.0103)),
                         derivative_mode="contour", contour_radius=1e-2)
    with pytest.raises(QuadratureDivergence):
        bad.derivative(center, 3)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=4),
       st.complex_numbers(max_magnitude=9.0, allow_nan=False,
                          allow_infinity=False))
def test_poly_derivative_property(j, lam):
    coeffs = [1.0, -2.0, 0.5j, 3.0]
    p = poly_handle(coeffs)
    # normalized derivative via small central differences on the nose
    if j == 0:
        want = sum(a * lam ** k for k, a in enumerate(coeffs))
        assert abs(p.derivative(lam, 0) - want) < 1e-9 * (1 + abs(want))
    else:
        assert p.derivative(lam, j) == pytest.approx(
            sum(a * math.comb(k, j) * lam ** (k - j)
                for k, a in enumerate(coeffs) if k >= j), abs=1e-12)


def test_boundary_presets():
    lams = np.array([1.0, 2.0 + 1j])
    bd = boundary_preset("dirichlet")
    np.testing.assert_array_equal(bd.f1(lams), 0.0)
    np.testing.assert_array_equal(bd.f2(lams), 1.0)
    bn = boundary_preset("neumann")
    np.testing.assert_array_equal(bn.f1(lams), 1.0)
    br = boundary_preset("robin", h=2.5)
    np.testing.assert_array_equal(br.f2(lams), 2.5)
    bpoly = boundary_preset("poly", c1=[0, 1], c2=[1])
    np.testing.assert_allclose(bpoly.f1(lams), lams)
    with pytest.raises(ValueError):
        boundary_preset("weird")


def test_handles_evaluate_at_probes():
    # BoundaryPair invariant: both members evaluable at any probe
    bp = boundary_preset("poly", c1=[1, 2, 3], c2=[0, 1])
    probes = np.array([0.0, 1.0, -5.0, 2.0 + 3.0j, 100.0])
    f1, f2 = bp.f_values(probes)
    assert np.all(np.isfinite(f1)) and np.all(np.isfinite(f2))
