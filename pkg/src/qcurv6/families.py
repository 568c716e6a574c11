"""Analytic blow-up families built from the spherical profile, plus the
solver-backed generators."""

from __future__ import annotations

import math

import numpy as np

from .blowup import BlowupFamily, FamilyMember
from .entire import EntireSolution, FixedPointConfig, lambda_continuation, picard_solve
from .grid import RadialField, RadialGrid
from .profiles import eta, eta_jet_arrays
from .vspec import VSpec

V120 = VSpec("constant", c0=120.0)


def _scaled_eta_member(scale: float, r_max: float = 5.0, label: str = "") -> FamilyMember:
    """Member u(x) = eta(scale * x) + log(scale), sampled and with exact jets."""

    def jets(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        u, du, lap, dlap, bilap, dbilap = eta_jet_arrays(scale * r)
        return np.stack([u + math.log(scale), du * scale, lap * scale**2,
                         dlap * scale**3, bilap * scale**4, dbilap * scale**5])

    grid = RadialGrid.default(r_max=r_max, r_inner=min(1e-6, 0.01 / scale),
                              ratio=1.04, step=0.01)
    field = RadialField(grid, eta(scale * grid.nodes) + math.log(scale))
    return FamilyMember(field, V120, provenance="analytic-example",
                        jet_fn=jets, label=label)


def example1_family(kind: str, ks) -> BlowupFamily:
    """Scaling families of the spherical entire solution.

    kind "1a": u_k(x) = u(x/k) - log k (flattening, case i).
    kind "1b": u_k(x) = u(k x) + log k (concentrating, case ii).
    """
    members = []
    for k in ks:
        if kind == "1a":
            members.append(_scaled_eta_member(1.0 / k, label=f"1a k={k:g}"))
        elif kind == "1b":
            members.append(_scaled_eta_member(float(k), label=f"1b k={k:g}"))
        else:
            raise ValueError(f"unknown example kind {kind!r}")
    return BlowupFamily(members)


def example1_member_at_u0(u0: float) -> FamilyMember:
    """Concentrating member matched to a given center height u0 = log(2k)."""
    return _scaled_eta_member(math.exp(u0) / 2.0, label=f"1b u0={u0:g}")


def hybrid_family(V: VSpec, Lambda: float, lambdas, cfg: FixedPointConfig | None = None):
    """Theorem-1.5-style family via the lambda continuation; returns
    (BlowupFamily, ContinuationResult)."""
    res = lambda_continuation(V, Lambda, lambdas, cfg)
    members = [solution_member(sol, label=f"lambda={lam:g}")
               for lam, sol in zip(lambdas, res.solutions)]
    return BlowupFamily(members), res


def solution_member(sol: EntireSolution, label: str = "") -> FamilyMember:
    return FamilyMember(sol.u_field(), sol.V, provenance="entire-solver",
                        jet_fn=sol.jet_fn(), solution=sol, label=label)


def example2_family(V: VSpec, Lambda: float, lambdas, rho_ks,
                    cfg: FixedPointConfig | None = None):
    """v_k(x) = u_k(rho_k x) + log rho_k for hybrid u_k; the rate of
    rho_k -> infinity is the caller's choice."""
    fam, res = hybrid_family(V, Lambda, lambdas, cfg)
    members = []
    for m, rho in zip(fam.members, rho_ks):
        jets0 = m.jet_fn

        def jets(r, jets0=jets0, rho=float(rho)):
            r = np.atleast_1d(np.asarray(r, dtype=float))
            w = jets0(rho * r)
            scalings = rho ** np.arange(6, dtype=float)
            out = w * scalings[:, None]
            out[0] = w[0] + math.log(rho)
            return out

        grid = m.u_field.grid
        nodes = grid.nodes[grid.nodes <= grid.r_max / rho]
        if nodes.size < 16:
            nodes = np.linspace(0.0, grid.r_max / rho, 400)
        field = RadialField(RadialGrid(nodes + 0.0), m.u_field(nodes * rho) + math.log(rho))
        members.append(FamilyMember(field, m.V, provenance="analytic-example",
                                    jet_fn=jets, label=f"example2 rho={rho:g}"))
    return BlowupFamily(members), res


def example3_solution(Lambda: float, k: float, cfg: FixedPointConfig | None = None) -> EntireSolution:
    """Case-ii variant with the (k + |Lap v(0)|/24) polynomial coefficient;
    convergence is not guaranteed and failures surface as exceptions."""
    if cfg is None:
        cfg = FixedPointConfig(Lambda=Lambda, variant="example3", k_example3=k)
    return picard_solve(V120, cfg)
