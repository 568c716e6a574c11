"""Radial calculus operations against closed-form and quadrature oracles."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from qcurv6 import calculus, profiles
from qcurv6.calculus import (OutOfRangeError, OverflowGaugeError,
                             closed_form_defint, closed_form_defint_printed,
                             curvature_integral, derivative_from_laplacian,
                             outward_integrate, radial_laplacian, rescale)
from qcurv6.constants import LAMBDA1, OMEGA5
from qcurv6.grid import GridError, RadialField, RadialGrid
from qcurv6.vspec import VSpec, gauge_transform

FINE = RadialGrid.default(r_max=5.0, r_inner=1e-4, ratio=1.05, step=0.01)


# -- radial_laplacian --------------------------------------------------------

def test_laplacian_r2_constant_12():
    f = RadialField.from_callable(FINE, lambda r: r * r)
    lap = radial_laplacian(f)
    np.testing.assert_allclose(lap.values, 12.0, rtol=1e-9)


def test_laplacian_r4():
    # quartics are not in the cubic-interpolation space; the discretization
    # error on this grid is ~2e-4 relative and shrinks with the grading step
    f = RadialField.from_callable(FINE, lambda r: r**4)
    lap = radial_laplacian(f)
    np.testing.assert_allclose(lap.values, 32.0 * FINE.nodes**2, rtol=4e-4, atol=1e-6)
    fine2 = RadialGrid.default(r_max=5.0, r_inner=1e-4, ratio=1.02, step=0.004)
    lap2 = radial_laplacian(RadialField.from_callable(fine2, lambda r: r**4))
    sel = fine2.nodes >= 0.01
    err2 = np.max(np.abs(lap2.values[sel] - 32.0 * fine2.nodes[sel] ** 2) / (32.0 * fine2.nodes[sel] ** 2))
    assert err2 < 4e-5


def test_laplacian_eta_origin_minus_12():
    # Taylor-series oracle: eta = log2 - r^2 + r^4/2 - ..., Lap eta(0) = -12.
    f = RadialField.from_callable(FINE, profiles.eta)
    lap = radial_laplacian(f)
    assert lap.values[0] == pytest.approx(-12.0, abs=5e-6)


def test_laplacian_insufficient_resolution():
    g = RadialGrid(np.array([0.0, 1.0, 2.0, 3.0]))
    with pytest.raises(GridError, match="insufficient resolution"):
        radial_laplacian(RadialField(g, np.zeros(4)))


# -- derivative_from_laplacian ----------------------------------------------

def test_derivative_from_laplacian_r2():
    g = RadialField.from_callable(FINE, lambda r: np.full_like(r, 12.0))
    assert derivative_from_laplacian(g, 1.0) == pytest.approx(2.0, rel=1e-12)


def test_derivative_from_laplacian_r4():
    assert derivative_from_laplacian(lambda s: 32.0 * s * s, 2.0) == pytest.approx(32.0, rel=1e-12)


def test_derivative_from_laplacian_eta():
    # closed-form oracle: eta'(1) = -2r/(1+r^2) | r=1 = -1
    lap_eta = lambda s: profiles.eta_jet_arrays(s)[2]
    assert derivative_from_laplacian(lap_eta, 1.0) == pytest.approx(-1.0, rel=1e-11)


def test_derivative_from_laplacian_range_check():
    g = RadialField.from_callable(FINE, lambda r: r)
    with pytest.raises(OutOfRangeError):
        derivative_from_laplacian(g, FINE.r_max * 2)
    with pytest.raises(OutOfRangeError):
        derivative_from_laplacian(g, 0.0)


# -- outward_integrate -------------------------------------------------------

def test_outward_integrate_r2_term_breakdown():
    # f = r^2: f(2) = 4 with terms 1 + 0.46875 + 2.53125 (exact for polynomials)
    val = outward_integrate(1.0, 2.0, lambda s: np.full_like(np.asarray(s, float), 12.0), 1.0, 2.0)
    assert val == pytest.approx(4.0, rel=1e-13)
    term1 = 1.0**5 * 2.0 * 0.25 * (1.0 - 2.0**-4)
    assert term1 == pytest.approx(0.46875, abs=0)


def test_outward_integrate_constant():
    val = outward_integrate(3.5, 0.0, lambda s: np.zeros_like(np.asarray(s, float)), 0.5, 4.0)
    assert val == pytest.approx(3.5, rel=1e-14)


def test_outward_integrate_eta():
    lap_eta = lambda s: profiles.eta_jet_arrays(s)[2]
    got = outward_integrate(profiles.eta(1.0), -1.0, lap_eta, 1.0, 4.0)
    assert got == pytest.approx(math.log(2.0 / 17.0), rel=1e-10)


def test_outward_integrate_rejects_zero_start():
    with pytest.raises(OutOfRangeError, match="series start"):
        outward_integrate(0.0, 0.0, lambda s: s, 0.0, 1.0)


# -- closed_form_defint ------------------------------------------------------

def test_defint_zero_and_infinity():
    assert closed_form_defint(0.0) == 0.0
    assert closed_form_defint(1e9) == pytest.approx(1.0 / 60.0, rel=1e-12)


def test_defint_at_two_frozen_value():
    # adaptive-quadrature oracle gave 2944/187500 = 0.015701333...
    assert closed_form_defint(2.0) == pytest.approx(2944.0 / 187500.0, rel=1e-14)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 5.0, 20.0, 100.0])
def test_defint_matches_quadrature(r):
    oracle, err = quad(lambda s: s**5 / (1 + s * s) ** 6, 0.0, r, epsabs=1e-14, epsrel=1e-13)
    assert abs(closed_form_defint(r) - oracle) <= 1e-10


def test_defint_printed_variant_disagrees_at_two():
    oracle, _ = quad(lambda s: s**5 / (1 + s * s) ** 6, 0.0, 2.0, epsabs=1e-14)
    assert abs(closed_form_defint_printed(2.0) - oracle) > 1e-4


# -- curvature_integral ------------------------------------------------------

def test_curvature_total_of_eta_is_lambda1():
    got = curvature_integral(VSpec("constant", c0=120.0), profiles.eta, math.inf)
    assert got == pytest.approx(LAMBDA1, rel=1e-11)
    assert LAMBDA1 == pytest.approx(3968.8034, abs=5e-4)


def test_curvature_of_dead_profile_is_zero():
    got = curvature_integral(VSpec("constant", c0=120.0), lambda r: np.full_like(np.asarray(r, float), -1e3), 1.0)
    assert got == pytest.approx(0.0, abs=1e-12)


def test_curvature_at_one_matches_closed_form():
    got = curvature_integral(VSpec("constant", c0=120.0), profiles.eta, 1.0)
    want = 120.0 * 64.0 * OMEGA5 * closed_form_defint(1.0)
    assert got == pytest.approx(want, rel=1e-11)
    # defint(1) = 1/120, so the mass over B_1 is 64 pi^3 * 64/... = Lambda1/2
    assert closed_form_defint(1.0) == pytest.approx(1.0 / 120.0, rel=1e-14)
    assert got == pytest.approx(LAMBDA1 / 2.0, rel=1e-11)


def test_curvature_overflow_guard():
    with pytest.raises(OverflowGaugeError, match="rescale first"):
        curvature_integral(VSpec(), lambda r: np.full_like(np.asarray(r, float), 200.0), 1.0)


# -- rescale ------------------------------------------------------------------

def test_rescale_identity():
    u = RadialField.from_callable(FINE, profiles.eta)
    same = rescale(u, 1.0)
    np.testing.assert_array_equal(same.values, u.values)
    np.testing.assert_array_equal(same.grid.nodes, u.grid.nodes)


def test_rescale_peak_value():
    u = RadialField.from_callable(FINE, profiles.eta)
    up = rescale(u, 2.0)
    assert up.values[0] == pytest.approx(math.log(4.0), rel=1e-15)


@pytest.mark.parametrize("lam", [0.1, 10.0])
def test_rescale_preserves_total_curvature(lam):
    u = RadialField.from_callable(RadialGrid.geometric(1e-6, 2000.0, 1.05), profiles.eta)
    v = VSpec("constant", c0=120.0)
    field_mass = curvature_integral(v, u, math.inf)
    got = curvature_integral(v, rescale(u, lam), math.inf)
    # exact change-of-variables invariance, limited only by quadrature
    assert got == pytest.approx(field_mass, rel=1e-9)
    # and both agree with the analytic total curvature of eta
    assert got == pytest.approx(LAMBDA1, rel=2e-6)


# -- gauge transform -----------------------------------------------------------

def test_gauge_identity():
    u = RadialField.from_callable(FINE, profiles.eta)
    v = VSpec("constant", c0=120.0)
    u2, v2 = gauge_transform(u, v, 0.0, 0.0)
    np.testing.assert_array_equal(u2.values, u.values)
    assert v2 is v


def test_gauge_pointwise_invariance():
    u = RadialField.from_callable(FINE, profiles.eta)
    v = VSpec("quadratic", q=3.0)
    u2, v2 = gauge_transform(u, v, 1.0, 0.5)
    r = u.grid.nodes[::37]
    lhs = v(r) * np.exp(6.0 * u(r))
    rhs = v2(r) * np.exp(6.0 * np.interp(r, u2.grid.nodes, u2.values))
    np.testing.assert_allclose(rhs, lhs, rtol=1e-12)


def test_gauge_removes_gaussian_growth():
    # V = 120 e^{r^2} satisfies the monotonicity hypothesis at (a, b) = (1, 0);
    # the transform at (1, 0) makes it exactly constant.
    V = VSpec("gaussian", a=-1.0, base=VSpec("constant", c0=120.0))
    np.testing.assert_allclose(V(np.array([0.0, 1.0])), [120.0, 120.0 * math.e], rtol=1e-15)
    V.validate_gaussian_monotone(1.0, 0.0)
    u = RadialField.from_callable(FINE, profiles.eta)
    _, V2 = gauge_transform(u, V, 1.0, 0.0)
    r = np.linspace(0.0, 4.0, 41)
    np.testing.assert_allclose(V2(r), 120.0, rtol=1e-14)
    V2.validate_gaussian_monotone(0.0, 0.0)


def test_triple_laplacian_residual_shrinks_with_grid():
    # Lap^3 via repeated spline differentiation: with order-7 interpolation
    # the residual against -120 e^{6 eta} decays under refinement while the
    # grid stays in the resolved (pre-roundoff) regime
    def residual(n):
        g = RadialGrid.uniform(2.6, n, r_min=0.05)
        f = RadialField.from_callable(g, profiles.eta, order=7)
        lap3 = radial_laplacian(radial_laplacian(radial_laplacian(f)))
        sel = (g.nodes > 0.15) & (g.nodes < 2.4)
        want = -120.0 * np.exp(6.0 * profiles.eta(g.nodes[sel]))
        scale = float(np.max(np.abs(want)))
        return float(np.max(np.abs(lap3.values[sel] - want))) / scale

    res = [residual(n) for n in (100, 141, 200)]
    assert res[0] > res[1] > res[2]
    assert res[2] < 1e-5


def test_curvature_monotone_in_radius():
    vals = [curvature_integral(VSpec("constant", c0=120.0), profiles.eta, r)
            for r in (0.25, 0.5, 1.0, 2.0, 5.0)]
    assert all(v >= 0.0 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))
