"""Grids, fields, Gauss cells, V descriptors, and file formats."""

import math

import numpy as np
import pytest

from qcurv6 import io
from qcurv6.grid import GaussCells, GridError, RadialField, RadialGrid
from qcurv6.vspec import VSpec, VSpecError


def test_grid_validation():
    with pytest.raises(GridError):
        RadialGrid(np.array([0.0, 1.0, 1.0, 2.0]))
    with pytest.raises(GridError):
        RadialGrid(np.array([1.0, 0.5]))
    with pytest.raises(GridError):
        RadialGrid(np.array([-1.0, 0.5]))
    g = RadialGrid(np.array([0.0, 0.5, 1.0]))
    assert g.r_min == 0.0 and g.r_max == 1.0


def test_field_reproduces_node_values():
    g = RadialGrid.default(r_max=3.0)
    f = RadialField.from_callable(g, lambda r: np.cos(r))
    # spline evaluation reproduces node values to the last bit
    np.testing.assert_allclose(f(g.nodes), f.values, rtol=0, atol=2e-16)


def test_field_value_count_must_match():
    g = RadialGrid(np.array([0.0, 1.0, 2.0]))
    with pytest.raises(GridError):
        RadialField(g, np.zeros(5))


def test_field_csv_roundtrip(tmp_path):
    g = RadialGrid.uniform(2.0, 40)
    f = RadialField.from_callable(g, lambda r: r**3 - r)
    p = tmp_path / "f.csv"
    f.to_csv(p)
    with open(p) as fh:
        assert fh.readline().strip() == "r,value"
    back = RadialField.from_csv(p)
    np.testing.assert_array_equal(back.values, f.values)
    np.testing.assert_array_equal(back.grid.nodes, g.nodes)


def test_gauss_cells_integrate_polynomial_exactly():
    cells = GaussCells.graded(0.01, 4.0, switch=1.0, ratio=1.1, step=0.25, order=6)
    vals = cells.nodes**7
    exact = (4.0**8 - 0.01**8) / 8.0
    assert cells.integrate(vals) == pytest.approx(exact, rel=1e-14)


def test_gauss_cells_cumulative_matches_antiderivative():
    cells = GaussCells.graded(0.01, 4.0, switch=1.0, ratio=1.1, step=0.25, order=6)
    vals = np.exp(-cells.nodes)
    got = cells.cumulative(vals)
    want = np.exp(-0.01) - np.exp(-cells.nodes)
    np.testing.assert_allclose(got, want, rtol=5e-12, atol=1e-15)


def test_gauss_cells_cumulative_at_arbitrary_points():
    cells = GaussCells.graded(0.01, 4.0, switch=1.0, ratio=1.1, step=0.25, order=6)
    vals = np.sin(cells.nodes)
    xs = np.array([0.02, 0.5, 1.3, 3.99])
    got = cells.cumulative_at(vals, xs)
    want = np.cos(0.01) - np.cos(xs)
    np.testing.assert_allclose(got, want, rtol=5e-11, atol=1e-13)


def test_vspec_variants_and_validation():
    v = VSpec("quadratic", q=2.0)
    assert v(2.0) == 128.0
    v.validate_near_origin()
    g = VSpec("gaussian", a=1.0, b=0.5, base=VSpec("constant", c0=120.0))
    assert g(1.0) == pytest.approx(120.0 * math.exp(-1.5))
    g.validate_gaussian_monotone(0.0, 0.0)
    with pytest.raises(VSpecError):
        VSpec("constant", c0=-1.0).validate_positive([0.5])
    with pytest.raises(VSpecError):
        VSpec("constant", c0=100.0).validate_near_origin()
    with pytest.raises(VSpecError):
        VSpec("nope")


def test_vspec_origin_expansion():
    assert VSpec("constant").origin_expansion() == (120.0, 0.0)
    assert VSpec("quadratic", q=3.0).origin_expansion() == (120.0, 3.0)
    v0, v2 = VSpec("gaussian", a=2.0, base=VSpec("constant", c0=120.0)).origin_expansion()
    assert (v0, v2) == (120.0, -240.0)


def test_atomic_csv_and_manifest(tmp_path):
    p = tmp_path / "x.csv"
    io.write_csv(p, "a,b", [[1.0, 2.0], [3.0, 4.0]])
    fields, data = io.read_csv(p, expected_header="a,b")
    assert fields == ["a", "b"]
    np.testing.assert_array_equal(data, [[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(ValueError, match="missing columns"):
        io.read_csv(p, expected_header="a,z")
    man = io.write_manifest(tmp_path, [p], command="test", config={},
                            checks=[{"id": "x", "passed": True}])
    blob = io.read_json(man)
    assert blob["artifacts"][0]["path"] == "x.csv"
    assert blob["artifacts"][0]["sha256"] == io.sha256_file(p)
