"""Radial grids, sampled radial fields, and composite Gauss-Legendre cells."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline


class GridError(ValueError):
    pass


def _as_nodes(nodes) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2:
        raise GridError("grid needs at least two nodes")
    if nodes[0] < 0.0:
        raise GridError("radii must be nonnegative")
    if np.any(np.diff(nodes) <= 0.0):
        raise GridError("nodes must be strictly increasing (no duplicates)")
    return nodes


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing radii on [0, R]; the first node may be 0."""

    nodes: np.ndarray
    grading: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "nodes", _as_nodes(self.nodes))

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    def __len__(self) -> int:
        return self.nodes.size

    @classmethod
    def uniform(cls, r_max: float, n: int, r_min: float = 0.0) -> "RadialGrid":
        return cls(np.linspace(r_min, r_max, n), grading="uniform")

    @classmethod
    def geometric(cls, r_inner: float, r_max: float, ratio: float = 1.05,
                  include_zero: bool = True) -> "RadialGrid":
        """Geometrically graded nodes r_inner, r_inner*ratio, ... up to r_max."""
        if not (ratio > 1.0 and 0.0 < r_inner < r_max):
            raise GridError("need ratio > 1 and 0 < r_inner < r_max")
        n = int(math.ceil(math.log(r_max / r_inner) / math.log(ratio)))
        nodes = r_inner * ratio ** np.arange(n + 1)
        nodes[-1] = r_max
        if include_zero:
            nodes = np.concatenate(([0.0], nodes))
        return cls(nodes, grading="geometric")

    @classmethod
    def default(cls, r_max: float = 10.0, r_inner: float = 1e-6,
                ratio: float = 1.05, step: float = 0.02,
                include_zero: bool = True) -> "RadialGrid":
        """Geometric refinement near 0 up to r = 1, uniform beyond."""
        switch = min(1.0, r_max)
        n = int(math.ceil(math.log(switch / r_inner) / math.log(ratio)))
        inner = r_inner * ratio ** np.arange(n + 1)
        inner = inner[inner < switch * (1 - 1e-12)]
        outer = np.arange(switch, r_max + 0.5 * step, step)
        nodes = np.concatenate(([0.0] if include_zero else [], inner, outer))
        return cls(nodes, grading="geometric-then-uniform")

    @classmethod
    def refined_near(cls, r_max: float, radii, n_base: int = 200,
                     n_local: int = 60, width: float = 0.1) -> "RadialGrid":
        """Uniform base grid with extra clustering near the listed radii."""
        base = np.linspace(0.0, r_max, n_base)
        extras = []
        for rho in radii:
            lo, hi = max(0.0, rho - width), min(r_max, rho + width)
            extras.append(np.linspace(lo, hi, n_local))
        nodes = np.unique(np.concatenate([base] + extras))
        return cls(nodes, grading=f"geometric-refined near {list(radii)}")


class RadialField:
    """One value per grid node with (at least) cubic interpolation.

    When the grid starts at 0 the cubic interpolant is clamped to f'(0) = 0,
    consistent with smooth radial functions.  Higher odd orders (5, 7) are
    available for diagnostics that differentiate deeply; they use not-a-knot
    style end conditions.
    """

    def __init__(self, grid: RadialGrid, values, even_at_zero: bool = True,
                 order: int = 3):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.nodes.shape:
            raise GridError("value count must equal node count")
        if order < 3:
            raise GridError("interpolation order must be at least cubic")
        self.grid = grid
        self.values = values
        self.order = order
        if order > 3 and grid.nodes.size > order + 2:
            from scipy.interpolate import make_interp_spline
            self._spline = make_interp_spline(grid.nodes, values, k=order)
        elif grid.nodes.size >= 4:
            if grid.r_min == 0.0 and even_at_zero:
                bc = ((1, 0.0), "not-a-knot")
            else:
                bc = "not-a-knot"
            self._spline = CubicSpline(grid.nodes, values, bc_type=bc)
        else:
            self._spline = None

    def __call__(self, r):
        if self._spline is None:
            return np.interp(r, self.grid.nodes, self.values)
        return self._spline(r)

    def derivative(self, r, k: int = 1):
        if self._spline is None:
            raise GridError("insufficient resolution")
        return self._spline(r, nu=k)

    @property
    def spline(self) -> CubicSpline:
        if self._spline is None:
            raise GridError("insufficient resolution")
        return self._spline

    def with_values(self, values) -> "RadialField":
        return RadialField(self.grid, values, order=self.order)

    @classmethod
    def from_callable(cls, grid: RadialGrid, f, order: int = 3) -> "RadialField":
        return cls(grid, np.asarray(f(grid.nodes), dtype=float), order=order)

    def to_csv(self, path) -> None:
        from .io import write_csv
        write_csv(path, "r,value", np.column_stack([self.grid.nodes, self.values]))

    @classmethod
    def from_csv(cls, path) -> "RadialField":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(RadialGrid(data[:, 0]), data[:, 1])


# ---------------------------------------------------------------------------
# Composite Gauss-Legendre cells (solver quadrature / collocation nodes).

def _partial_matrix(xi: np.ndarray) -> np.ndarray:
    """P[i, j] = integral_{-1}^{xi_i} of the j-th Lagrange basis on nodes xi."""
    n = xi.size
    V = np.vander(xi, n, increasing=True)          # V[k, m] = xi_k^m
    Vinv = np.linalg.inv(V)
    powers = np.arange(1, n + 1, dtype=float)
    M = (xi[:, None] ** powers[None, :] - (-1.0) ** powers[None, :]) / powers[None, :]
    return M @ Vinv


@dataclass
class GaussCells:
    """Composite Gauss-Legendre rule whose nodes double as collocation points."""

    boundaries: np.ndarray
    order: int = 6
    nodes: np.ndarray = field(init=False)
    weights: np.ndarray = field(init=False)

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.ndim != 1 or b.size < 2 or np.any(np.diff(b) <= 0):
            raise GridError("cell boundaries must be strictly increasing")
        self.boundaries = b
        xi, w = np.polynomial.legendre.leggauss(self.order)
        self._xi, self._w = xi, w
        self._P = _partial_matrix(xi)
        a, c = b[:-1], b[1:]
        half = 0.5 * (c - a)
        mid = 0.5 * (c + a)
        self._half = half
        self.nodes = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
        self.weights = (half[:, None] * w[None, :]).ravel()

    @property
    def n_cells(self) -> int:
        return self.boundaries.size - 1

    def integrate(self, fvals: np.ndarray) -> float:
        return float(np.dot(self.weights, fvals))

    def cumulative(self, fvals: np.ndarray) -> np.ndarray:
        """integral from boundaries[0] to each node; exact for the per-cell
        interpolating polynomial of the samples."""
        f = np.asarray(fvals, dtype=float).reshape(self.n_cells, self.order)
        cell_int = self._half * (f @ self._w)
        prefix = np.concatenate(([0.0], np.cumsum(cell_int)[:-1]))
        partial = self._half[:, None] * (f @ self._P.T)
        return (prefix[:, None] + partial).ravel()

    def cumulative_at(self, fvals: np.ndarray, x) -> np.ndarray:
        """integral from boundaries[0] to arbitrary points x (within range),
        by integrating each cell's interpolating polynomial exactly."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        f = np.asarray(fvals, dtype=float).reshape(self.n_cells, self.order)
        cell_int = self._half * (f @ self._w)
        prefix = np.concatenate(([0.0], np.cumsum(cell_int)))
        n = self.order
        V = np.vander(self._xi, n, increasing=True)
        coeff = f @ np.linalg.inv(V).T          # monomial coeffs per cell
        k = np.clip(np.searchsorted(self.boundaries, x, side="right") - 1,
                    0, self.n_cells - 1)
        a = self.boundaries[k]
        t = (x - a) / self._half[k] - 1.0       # reference coordinate in [-1, 1]
        powers = np.arange(1, n + 1, dtype=float)
        tt = t[:, None] ** powers[None, :]
        anti = (tt - (-1.0) ** powers[None, :]) / powers[None, :]
        part = self._half[k] * np.einsum("ij,ij->i", coeff[k], anti)
        out = prefix[k] + part
        return out if out.shape != (1,) else out

    def grid(self) -> RadialGrid:
        return RadialGrid(self.nodes, grading="gauss-cells")

    @classmethod
    def graded(cls, r_min: float, r_max: float, switch: float = 1.0,
               ratio: float = 1.05, step: float = 0.02, order: int = 6) -> "GaussCells":
        """Geometric cells [r_min, switch] (ratio-graded), uniform beyond."""
        switch = min(switch, r_max)
        n = int(math.ceil(math.log(switch / r_min) / math.log(ratio)))
        geo = r_min * (switch / r_min) ** (np.arange(n + 1) / n)
        if r_max > switch:
            n_out = int(math.ceil((r_max - switch) / step))
            out = np.linspace(switch, r_max, n_out + 1)[1:]
            b = np.concatenate((geo, out))
        else:
            b = geo
        return cls(b, order=order)
