"""Prescribed-curvature functions V(r) and their hypothesis validators."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .grid import RadialField


class VSpecError(ValueError):
    pass


@dataclass(frozen=True)
class VSpec:
    """Radial curvature function, one of four variants.

    constant     V(r) = c0
    quadratic    V(r) = 120 + q r^2
    gaussian     V(r) = base(r) * exp(-a r^2 - b r^4)
    tabulated    V(r) from a sampled RadialField
    """

    variant: str = "constant"
    c0: float = 120.0
    q: float = 0.0
    a: float = 0.0
    b: float = 0.0
    base: Optional["VSpec"] = None
    table: Optional[RadialField] = None

    def __post_init__(self):
        if self.variant not in ("constant", "quadratic", "gaussian", "tabulated"):
            raise VSpecError(f"unknown V variant {self.variant!r}")
        if self.variant == "gaussian" and self.base is None:
            object.__setattr__(self, "base", VSpec("constant", c0=self.c0))
        if self.variant == "tabulated" and self.table is None:
            raise VSpecError("tabulated variant needs a table")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.variant == "constant":
            return np.broadcast_to(np.float64(self.c0), r.shape).copy() if r.shape else np.float64(self.c0)
        if self.variant == "quadratic":
            return 120.0 + self.q * r * r
        if self.variant == "gaussian":
            return self.base(r) * np.exp(-self.a * r * r - self.b * r**4)
        return self.table(r)

    def dlog(self, r):
        """Logarithmic derivative V'(r)/V(r)."""
        r = np.asarray(r, dtype=float)
        if self.variant == "constant":
            return np.zeros_like(r)
        if self.variant == "quadratic":
            return 2.0 * self.q * r / (120.0 + self.q * r * r)
        if self.variant == "gaussian":
            return self.base.dlog(r) - 2.0 * self.a * r - 4.0 * self.b * r**3
        return self.table.derivative(r) / self.table(r)

    def origin_expansion(self) -> tuple[float, float]:
        """(V(0), v2) with V(r) = V(0) + v2 r^2 + O(r^4) near 0."""
        if self.variant == "constant":
            return self.c0, 0.0
        if self.variant == "quadratic":
            return 120.0, self.q
        if self.variant == "gaussian":
            v0, v2 = self.base.origin_expansion()
            return v0, v2 - self.a * v0
        h = max(1e-4, self.table.grid.nodes[1])
        v0 = float(self.table(0.0))
        v2 = float((self.table(h) - v0) / h**2)
        return v0, v2

    # -- hypothesis validators ----------------------------------------------

    def validate_positive(self, radii) -> None:
        """V > 0 on its domain (sampled)."""
        vals = np.asarray(self(np.asarray(radii, dtype=float)))
        if np.any(vals <= 0.0):
            raise VSpecError("V must be positive")

    def validate_near_origin(self, radii=None, tol: float = 1e-8) -> None:
        """V(r) = 120 + O(r^2) near 0: checks V(0) = 120 and a bounded
        quadratic ratio on shrinking radii."""
        v0, _ = self.origin_expansion()
        if abs(v0 - 120.0) > tol:
            raise VSpecError("V(0) must equal 120")
        radii = np.asarray(radii if radii is not None else [1e-1, 1e-2, 1e-3], dtype=float)
        ratio = (np.asarray(self(radii)) - 120.0) / radii**2
        if np.any(~np.isfinite(ratio)):
            raise VSpecError("V is not 120 + O(r^2) near 0")

    def validate_gaussian_monotone(self, a: float, b: float, radii=None,
                                   tol: float = 1e-10) -> None:
        """d/dr ( V(r) / exp(a r^2 + b r^4) ) <= 0, checked by sampling."""
        radii = np.asarray(radii if radii is not None else np.linspace(0.0, 5.0, 201), dtype=float)
        g = self.dlog(radii) - 2.0 * a * radii - 4.0 * b * radii**3
        if np.any(g > tol):
            worst = float(np.max(g))
            raise VSpecError(f"V / exp(a r^2 + b r^4) increases somewhere (max dlog {worst:.3e})")


def gauge_transform(u: RadialField, V: VSpec, a: float, b: float) -> tuple[RadialField, VSpec]:
    """Strip the Gaussian weight off V while keeping V e^{6u} invariant.

    Returns (u + (a r^2 + b r^4)/6, V * exp(-a r^2 - b r^4)); the second
    factor is represented exactly as a gaussian-variant VSpec.
    """
    r = u.grid.nodes
    u_new = u.with_values(u.values + (a * r * r + b * r**4) / 6.0)
    if a == 0.0 and b == 0.0:
        return u_new, V
    if V.variant == "gaussian":
        V_new = replace(V, a=V.a + a, b=V.b + b)
    else:
        V_new = VSpec("gaussian", a=a, b=b, base=V)
    return u_new, V_new
