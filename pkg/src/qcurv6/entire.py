"""Entire radial solutions with prescribed total curvature via the damped
fixed-point iteration

    v(x) = (1/gamma6) int log(1/|x-y|) V(y) e^{-6|y|^4} e^{6(v+c)} dy
           + lambda Lap v(0) (|x|^4 - 2|x|^2),      u = v + c - |x|^4,

with c recomputed each sweep from the volume constraint
Lambda = int V e^{6u} dy and Lap v(0) from the closed consistency relation
(1 + 24 lambda) Lap v(0) = -(4/gamma6) int V e^{6u} / |y|^2 dy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp

from .constants import GAMMA6, LAMBDA1, OMEGA5
from .grid import GaussCells, RadialField, RadialGrid
from .kernel import KernelTable, build_log_kernel, log_kernel
from .vspec import VSpec


class FixedPointDiverged(RuntimeError):
    pass


class RescaleFailure(FloatingPointError):
    pass


class ContinuationFailure(RuntimeError):
    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class FixedPointConfig:
    """Target curvature, polynomial coupling, damping and grid controls."""

    Lambda: float
    lam: float = 1.0 / 24.0
    theta: float = 0.5
    theta_floor: float = 1.0 / 64.0
    tol: float = 1e-11
    max_sweeps: int = 4000
    r_min: float = 1e-7
    r_max: float = 5.0
    switch: float = 0.6
    ratio: float = 1.045
    step: float = 0.02
    order: int = 6
    auto_refine: bool = True
    anderson_depth: int = 5        # 0 = plain damped sweeps
    variant: str = "standard"      # or "example3"
    k_example3: float = 1.0
    kernel_method: str = "closed"  # table construction; "polar" matches to 1e-14

    def __post_init__(self):
        if self.Lambda <= 0.0:
            raise ValueError("Lambda must be positive")
        if self.variant == "standard" and not (0.0 < self.lam <= 1.0 / 24.0):
            raise ValueError("lambda must lie in (0, 1/24]")
        if not (0.0 < self.theta <= 1.0):
            raise ValueError("damping must lie in (0, 1]")

    def cells(self) -> GaussCells:
        return GaussCells.graded(self.r_min, self.r_max, switch=self.switch,
                                 ratio=self.ratio, step=self.step, order=self.order)


@dataclass
class EntireSolution:
    """Converged fixed point with assembled u and origin jet data."""

    v: RadialField
    c: float
    lam: float
    lap_v0: float                  # = Lap u(0) < 0
    u0: float
    bilap_u0: float
    c_tilde: float
    Lambda_target: float
    Lambda_achieved: float
    sweeps: int
    residual: float
    history: list
    V: VSpec
    cells: GaussCells
    kernel: KernelTable
    F: np.ndarray                  # V e^{6u} on the nodes
    variant: str = "standard"
    beta_poly: Optional[float] = None   # example3 polynomial coefficient

    @property
    def lap_u0(self) -> float:
        return self.lap_v0

    @property
    def u_values(self) -> np.ndarray:
        s = self.cells.nodes
        if self.variant == "example3":
            return self.v.values
        return self.v.values + self.c - s**4

    def u_field(self) -> RadialField:
        """u on [0, r_max] including the exact origin value."""
        nodes = np.concatenate(([0.0], self.cells.nodes))
        vals = np.concatenate(([self.u0], self.u_values))
        return RadialField(RadialGrid(nodes, grading="gauss-cells+origin"), vals)

    # -- jet reconstruction -------------------------------------------------

    def jet_fields(self) -> dict:
        """All six jet components reconstructed from the curvature source by
        the radial representation identities (spectrally accurate on the
        cells; the [0, r_min] head uses the frozen-origin approximation)."""
        s = self.cells.nodes
        w5 = s**5
        F = self.F
        F0 = float(self.V(0.0)) * math.exp(6.0 * self.u0)
        r0 = self.cells.boundaries[0]
        D, B0 = self.lap_v0, self.bilap_u0

        head5 = F0 * r0**6 / 6.0
        dbilap = -(head5 + self.cells.cumulative(F * w5)) / w5
        head_db = -F0 * r0**2 / 12.0
        bilap = B0 + head_db + self.cells.cumulative(dbilap)
        head_b5 = B0 * r0**6 / 6.0
        dlap = (head_b5 + self.cells.cumulative(bilap * w5)) / w5
        head_dl = B0 * r0**2 / 12.0
        lap = D + head_dl + self.cells.cumulative(dlap)
        head_l5 = D * r0**6 / 6.0
        du = (head_l5 + self.cells.cumulative(lap * w5)) / w5
        head_du = D * r0**2 / 12.0
        u = self.u0 + head_du + self.cells.cumulative(du)

        grid = RadialGrid(np.concatenate(([0.0], s)), grading="gauss-cells+origin")
        pad = lambda v0, arr: RadialField(grid, np.concatenate(([v0], arr)))
        return {
            "u": pad(self.u0, u), "du": pad(0.0, du), "lap_u": pad(D, lap),
            "dlap_u": pad(0.0, dlap), "bilap_u": pad(B0, bilap),
            "dbilap_u": pad(0.0, dbilap),
        }

    def jet_fn(self) -> Callable:
        jf = self.jet_fields()
        order = ("u", "du", "lap_u", "dlap_u", "bilap_u", "dbilap_u")
        fields = [jf[k] for k in order]

        def fn(r):
            r = np.atleast_1d(np.asarray(r, dtype=float))
            return np.stack([f(r) for f in fields])

        return fn

    # -- residual of the integral equation -----------------------------------

    def exist_residual(self, radii=None) -> float:
        """Sup over probe radii of |u - RHS| for the integral equation with
        the (1-|x|^2)^2 polynomial form."""
        if radii is None:
            radii = np.geomspace(2.0 * self.cells.boundaries[0],
                                 0.9 * self.cells.boundaries[-1], 20)
        radii = np.asarray(radii, dtype=float)
        s = self.cells.nodes
        m6 = OMEGA5 * self.cells.weights * s**5
        K = log_kernel(radii[:, None], s[None, :])
        KI = (K @ (m6 * self.F)) / GAMMA6
        rhs = KI + self.lam * self.lap_v0 * (1.0 - radii**2) ** 2 - radii**4 + self.c_tilde
        uf = self.u_field()
        return float(np.max(np.abs(uf(radii) - rhs)))

    def metadata(self) -> dict:
        return {
            "lambda": self.lam, "c": self.c, "c_tilde": self.c_tilde,
            "lap_u0": self.lap_v0, "u0": self.u0, "bilap_u0": self.bilap_u0,
            "Lambda_target": self.Lambda_target,
            "Lambda_achieved": self.Lambda_achieved,
            "sweeps": self.sweeps, "residual": self.residual,
            "variant": self.variant,
        }


def _quad_measures(cells: GaussCells):
    s = cells.nodes
    w = cells.weights
    return s, OMEGA5 * w * s**5, OMEGA5 * w * s**3, OMEGA5 * w * s


def picard_solve(V: VSpec, cfg: FixedPointConfig,
                 cells: GaussCells | None = None,
                 kernel: KernelTable | None = None,
                 v_init: np.ndarray | None = None) -> EntireSolution:
    """Damped Picard iteration for the fixed-point form; the grid is
    deepened automatically when the concentration scale r_k = 2 e^{-u(0)}
    approaches the innermost cells."""
    V.validate_positive(np.geomspace(1e-6, cfg.r_max, 50))
    if float(V(0.0)) <= 0.0:
        raise ValueError("V(0) must be positive")

    cells = cells if cells is not None else cfg.cells()
    kernel = kernel if kernel is not None else build_log_kernel(cells.nodes, method=cfg.kernel_method)
    sol = _picard_on_grid(V, cfg, cells, kernel, v_init)
    depth = 0
    while cfg.auto_refine and depth < 4:
        rk = 2.0 * math.exp(-sol.u0)
        if cells.boundaries[0] <= 0.02 * rk:
            break
        new_rmin = 0.01 * rk
        cells_new = GaussCells.graded(new_rmin, cfg.r_max, switch=cfg.switch,
                                      ratio=cfg.ratio, step=cfg.step, order=cfg.order)
        kernel_new = build_log_kernel(cells_new.nodes, method=cfg.kernel_method)
        v0 = _interp_v(sol, cells_new)
        sol = _picard_on_grid(V, cfg, cells_new, kernel_new, v0)
        cells, kernel = cells_new, kernel_new
        depth += 1
    return sol


def _interp_v(sol: EntireSolution, cells_new: GaussCells) -> np.ndarray:
    s_old = sol.cells.nodes
    v_old = sol.v.values
    out = np.interp(cells_new.nodes, s_old, v_old, left=v_old[0], right=v_old[-1])
    return out


def _iterate(apply_map, v, cfg) -> tuple[np.ndarray, int, list]:
    """Damped sweeps v <- (1-theta) v + theta T(v), optionally Anderson-mixed
    over the last few residuals.  The damping is halved whenever a window of
    sweeps makes no progress; at the floor the iteration is declared
    divergent rather than left oscillating."""
    theta = cfg.theta
    depth = max(0, cfg.anderson_depth)
    history = []
    dV: list[np.ndarray] = []
    dF: list[np.ndarray] = []
    v_prev = None
    f_prev = None
    window = 60
    best_prev_window = np.inf
    stalled_at_floor = 0

    for sweep in range(1, cfg.max_sweeps + 1):
        Tv = apply_map(v)
        f = Tv - v
        delta = float(np.max(np.abs(f)))
        history.append(delta)
        if not math.isfinite(delta):
            raise FixedPointDiverged("fixed point diverged; reduce theta or Lambda")
        if delta < cfg.tol:
            return Tv, sweep, history
        if sweep % window == 0:
            best_now = min(history[-window:])
            if best_now > 0.9 * best_prev_window:
                if theta > cfg.theta_floor:
                    theta = max(cfg.theta_floor, 0.5 * theta)
                    dV.clear(); dF.clear(); v_prev = f_prev = None
                else:
                    stalled_at_floor += 1
                    if stalled_at_floor >= 3:
                        raise FixedPointDiverged("fixed point diverged; reduce theta or Lambda")
            else:
                stalled_at_floor = 0
            best_prev_window = min(best_prev_window, best_now)

        if v_prev is not None and depth > 0:
            dV.append(v - v_prev)
            dF.append(f - f_prev)
            if len(dV) > depth:
                dV.pop(0); dF.pop(0)
        v_prev, f_prev = v, f

        if dF:
            Fm = np.stack(dF, axis=1)
            Vm = np.stack(dV, axis=1)
            gamma, *_ = np.linalg.lstsq(Fm, f, rcond=1e-12)
            v_new = v + theta * f - (Vm + theta * Fm) @ gamma
        else:
            v_new = v + theta * f
        v = v_new
    raise FixedPointDiverged("fixed point diverged; reduce theta or Lambda")


def _picard_on_grid(V, cfg, cells, kernel, v_init) -> EntireSolution:
    s, m6, m3, m1 = _quad_measures(cells)
    logV = np.log(np.asarray(V(s), dtype=float))
    logm6 = np.log(m6)
    A = (kernel.values * m6[None, :]) / GAMMA6
    if cfg.variant == "example3":
        return _picard_example3(V, cfg, cells, kernel, v_init, s, m6, m3, m1, logV, logm6, A)
    poly = s**4 - 2.0 * s * s
    s4 = s**4
    lam = cfg.lam
    logLam = math.log(cfg.Lambda)

    def apply_map(v):
        z = 6.0 * (v - s4) + logV
        logI = logsumexp(z + logm6)
        c = (logLam - logI) / 6.0
        ez = z + 6.0 * c
        if np.max(ez) > 700.0:
            raise RescaleFailure("rescale failure")
        F = np.exp(ez)
        D = -(4.0 / GAMMA6) * float(m3 @ F) / (1.0 + 24.0 * lam)
        return A @ F + lam * D * poly

    v0 = np.zeros_like(s) if v_init is None else np.array(v_init, dtype=float)
    v, sweep, history = _iterate(apply_map, v0, cfg)

    # converged: assemble the solution from the final sweep's quantities
    z = 6.0 * (v - s4) + logV
    logI = logsumexp(z + logm6)
    c = (logLam - logI) / 6.0
    F = np.exp(z + 6.0 * c)
    D = -(4.0 / GAMMA6) * float(m3 @ F) / (1.0 + 24.0 * lam)
    Lam_ach = float(m6 @ F)
    v0 = float((-np.log(s) * m6) @ F) / GAMMA6
    u0 = v0 + c
    bilap_u0 = (16.0 / GAMMA6) * float(m1 @ F) + 384.0 * lam * D - 384.0
    c_tilde = c - lam * D
    sol = EntireSolution(
        v=RadialField(RadialGrid(s, grading="gauss-cells"), v),
        c=c, lam=lam, lap_v0=D, u0=u0, bilap_u0=bilap_u0, c_tilde=c_tilde,
        Lambda_target=cfg.Lambda, Lambda_achieved=Lam_ach,
        sweeps=sweep, residual=history[-1], history=history, V=V,
        cells=cells, kernel=kernel, F=F, variant="standard",
    )
    if D >= 0.0:
        raise FixedPointDiverged("converged state violates Lap u(0) < 0")
    return sol


def _picard_example3(V, cfg, cells, kernel, v_init, s, m6, m3, m1, logV, logm6, A):
    """Variant fixed point with coefficient (k + |Lap v(0)|/24) on the
    (1-r^2)^2 polynomial and no Gaussian weight; no convergence guarantee."""
    P = (1.0 - s * s) ** 2
    k3 = cfg.k_example3
    logLam = math.log(cfg.Lambda)

    def apply_map(v):
        z = 6.0 * v + logV
        if np.max(z) > 700.0:
            raise RescaleFailure("rescale failure")
        F = np.exp(z)
        rhs0 = -(4.0 / GAMMA6) * float(m3 @ F)
        if rhs0 + 24.0 * k3 >= 0.0:
            raise FixedPointDiverged("example3 consistency failed: Lap v(0) would be nonnegative")
        D = (rhs0 + 24.0 * k3) / 2.0
        beta = k3 + abs(D) / 24.0
        T0 = A @ F - beta * P
        logI = logsumexp(6.0 * T0 + logV + logm6)
        c = (logLam - logI) / 6.0
        return T0 + c

    v0 = np.zeros_like(s) if v_init is None else np.array(v_init, dtype=float)
    v, sweep, history = _iterate(apply_map, v0, cfg)

    F = np.exp(6.0 * v + logV)
    rhs0 = -(4.0 / GAMMA6) * float(m3 @ F)
    D = (rhs0 + 24.0 * k3) / 2.0
    beta = k3 + abs(D) / 24.0
    Lam_ach = float(m6 @ F)
    c = float(np.mean(v - (A @ F - beta * P)))
    v0 = float((-np.log(s) * m6) @ F) / GAMMA6 - beta + c
    bilap_u0 = (16.0 / GAMMA6) * float(m1 @ F) - 384.0 * beta
    return EntireSolution(
        v=RadialField(RadialGrid(s, grading="gauss-cells"), v),
        c=c, lam=cfg.lam, lap_v0=D, u0=v0, bilap_u0=bilap_u0,
        c_tilde=c, Lambda_target=cfg.Lambda, Lambda_achieved=Lam_ach,
        sweeps=sweep, residual=history[-1], history=history, V=V,
        cells=cells, kernel=kernel, F=F, variant="example3", beta_poly=beta,
    )


# ---------------------------------------------------------------------------
# Pohozaev identity.

def pohozaev_sides(alpha: float, rhs_integral: float) -> tuple[float, float]:
    """(LHS, RHS) of the identity (2 alpha / Lambda1)(alpha - Lambda1) =
    (1/3) int (y . grad K) e^{6w} dy."""
    return (2.0 * alpha / LAMBDA1) * (alpha - LAMBDA1), rhs_integral / 3.0


def pohozaev_residual(sol: EntireSolution, V: VSpec | None = None) -> float:
    """LHS - RHS of the identity applied to the converged solution.

    The kernel-potential decomposition uses K_eff = V e^{-6|y|^4 +
    6 lambda Lap u(0) (1-|y|^2)^2}, for which K_eff e^{6w} = V e^{6u}
    pointwise, so alpha is the achieved total curvature."""
    V = V if V is not None else sol.V
    s = sol.cells.nodes
    try:
        dlogV = np.asarray(V.dlog(s), dtype=float)
    except Exception as exc:
        raise ValueError("gradient unavailable") from exc
    if sol.variant == "example3":
        beta = sol.beta_poly if sol.beta_poly is not None else abs(sol.lap_v0) / 24.0
        dlogK = dlogV + 24.0 * beta * s * (1.0 - s * s)
    else:
        D = sol.lap_v0
        dlogK = dlogV - 24.0 * s**3 - 24.0 * sol.lam * D * s * (1.0 - s * s)
    m6 = OMEGA5 * sol.cells.weights * s**5
    rhs_int = float(m6 @ (s * dlogK * sol.F))
    lhs, rhs = pohozaev_sides(sol.Lambda_achieved, rhs_int)
    return lhs - rhs


# ---------------------------------------------------------------------------
# Continuation in lambda.

@dataclass
class ContinuationResult:
    solutions: list
    diagnostics: list
    failed_at: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.failed_at is None


def lambda_continuation(V: VSpec, Lambda: float, lambdas,
                        cfg: FixedPointConfig | None = None) -> ContinuationResult:
    """Solve along a decreasing lambda sequence with warm starts, sharing the
    kernel table whenever the grid is unchanged."""
    lambdas = list(lambdas)
    if any(b >= a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("lambda sequence must be strictly decreasing")
    if not all(0.0 < l <= 1.0 / 24.0 for l in lambdas):
        raise ValueError("lambda values must lie in (0, 1/24]")
    if Lambda < LAMBDA1:
        raise ValueError("hybrid continuation requires Lambda >= Lambda1")
    cfg = cfg if cfg is not None else FixedPointConfig(Lambda=Lambda)

    sols = []
    diags = []
    cells = None
    kernel = None
    v_init = None
    for i, lam in enumerate(lambdas):
        cfg_i = replace(cfg, Lambda=Lambda, lam=lam)
        try:
            sol = picard_solve(V, cfg_i, cells=cells, kernel=kernel, v_init=v_init)
        except (FixedPointDiverged, RescaleFailure) as exc:
            return ContinuationResult(sols, diags, failed_at=i)
        sols.append(sol)
        diags.append({
            "lambda": lam, "u0": sol.u0, "lap_u0": sol.lap_v0,
            "lambda_lap_u0": lam * sol.lap_v0, "c": sol.c,
            "c_tilde": sol.c_tilde, "sweeps": sol.sweeps,
            "residual": sol.residual, "Lambda_achieved": sol.Lambda_achieved,
        })
        cells, kernel, v_init = sol.cells, sol.kernel, sol.v.values
    return ContinuationResult(sols, diags)
