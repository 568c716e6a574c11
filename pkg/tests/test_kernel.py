"""Kernel means: closed form vs polar quadrature vs adaptive quadrature vs MC."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from qcurv6.kernel import (KernelTable, build_log_kernel, log_kernel,
                           log_kernel_mc, log_kernel_polar)


def oracle_adaptive(r, s):
    """Independent oracle: scipy adaptive quadrature of the polar integral."""
    val, err = quad(lambda t: math.log(r * r + s * s - 2 * r * s * math.cos(t)) * math.sin(t) ** 4,
                    0.0, math.pi, epsabs=1e-13, epsrel=1e-12, limit=400)
    return -0.5 * (8.0 / (3.0 * math.pi)) * val


def test_kernel_at_zero_argument():
    assert log_kernel(2.0, 0.0) == pytest.approx(-math.log(2.0), rel=1e-15)
    assert log_kernel(0.0, 3.0) == pytest.approx(-math.log(3.0), rel=1e-15)


def test_kernel_symmetry_function():
    assert log_kernel(1.0, 3.0) == log_kernel(3.0, 1.0)
    assert log_kernel_polar(1.0, 3.0) == pytest.approx(log_kernel_polar(3.0, 1.0), rel=1e-14)


@pytest.mark.parametrize("r,s", [(2.0, 1.0), (1.0, 1.0), (0.3, 0.29), (5.0, 0.01), (1.0, 0.999999)])
def test_closed_form_matches_adaptive_oracle(r, s):
    assert log_kernel(r, s) == pytest.approx(oracle_adaptive(r, s), abs=1e-10)


@pytest.mark.parametrize("r,s", [(2.0, 1.0), (1.0, 1.0), (0.3, 0.29), (5.0, 0.01)])
def test_polar_matches_closed(r, s):
    assert log_kernel_polar(r, s, order=32) == pytest.approx(log_kernel(r, s), abs=1e-12)


def test_polar_matches_monte_carlo():
    # statistical oracle: agreement within 5 standard errors
    r, s = 2.0, 1.0
    est, se = log_kernel_mc(r, s, n=400_000, seed=1234)
    assert abs(log_kernel_polar(r, s) - est) < 5.0 * se
    # and the MC run is precise enough to be meaningful
    assert se < 5e-4


def test_separated_scales_asymptote():
    # K -> -log(max) as the scales separate
    for r, s in [(10.0, 0.01), (0.02, 8.0)]:
        assert log_kernel(r, s) == pytest.approx(-math.log(max(r, s)), abs=1e-4)


def test_table_build_and_roundtrip(tmp_path):
    nodes = np.geomspace(0.01, 5.0, 40)
    tab = build_log_kernel(nodes, order=24, method="polar")
    assert tab.check_symmetry(1e-12) == 0.0
    closed = build_log_kernel(nodes, method="closed")
    np.testing.assert_allclose(tab.values, closed.values, atol=5e-8)
    p = tmp_path / "ker.npz"
    tab.save_npz(p)
    back = KernelTable.load_npz(p)
    np.testing.assert_array_equal(back.values, tab.values)
    assert back.quad_order == 24 and back.method == "polar"
    tab.save_csv(tmp_path / "ker.csv")
    assert (tmp_path / "ker.csv").exists()
