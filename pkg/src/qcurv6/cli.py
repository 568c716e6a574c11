"""Command-line entry point: solver runs, family generation, diagnostics,
and report emission.

Subcommands: spherical | family | hybrid | linearize | analyze | report.
Configuration is line-oriented "key = value" text with sections (INI); every
command validates its inputs before computing, writes artifacts atomically,
and finishes with a manifest listing artifacts, checksums, the effective
tolerances, and per-check pass/fail records.  Exit code 0 means every
requested check passed; 1 flags failed checks; 2 flags usage errors.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import families, io, profiles
from .blowup import analyze_member, family_summary_rows, FAMILY_CSV_HEADER, FamilyMember
from .constants import LAMBDA1, constants_dict
from .entire import FixedPointConfig, pohozaev_residual
from .grid import RadialField, RadialGrid
from .linearized import (asymptotic_table_check, psi0_profile,
                         psi_operator_residual, psi_volume_integral,
                         solve_linearized)
from .shooting import IvpSpec, integrate_ivp, sign_pattern_check
from .vspec import VSpec
from .calculus import spherical_mass

USAGE_ERROR = 2
CHECK_FAILURE = 1


class UsageError(ValueError):
    pass


def _parse_number(text: str) -> float:
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def _parse_list(text: str) -> list:
    return [_parse_number(t) for t in text.replace(";", ",").split(",") if t.strip()]


DEFAULTS = {
    "run": {"out": "runs/out", "tol_scale": "1.0", "jobs": "1", "seed": "0"},
    "V": {"variant": "gaussian", "c0": "120", "q": "0", "a": "0.5", "b": "0"},
    "grid": {"r_min": "1e-7", "r_max": "5.0", "switch": "0.6", "ratio": "1.045",
             "step": "0.02", "order": "6"},
    "spherical": {"r_max": "10.0", "curvature_r": "50.0"},
    "family": {"example": "1b", "params": "5, 20, 80", "rho_ks": "2, 4, 8",
               "Lambda_factor": "1.5", "lambdas": "1/96, 1/384, 1/768",
               "k3": "1.0"},
    "hybrid": {"Lambda_factor": "1.5", "lambdas": "1/24, 1/96, 1/384, 1/768",
               "deltas": "0.3, 0.5"},
    "linearize": {"r_max": "200.0"},
    "tol": {"spherical_sup": "1e-6", "spherical_curv": "1e-6",
            "pohozaev": "2e-2", "alpha_identity": "1e-2",
            "psi_residual": "1e-6", "psi0_slope": "5e-2"},
}


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    if path:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise UsageError(f"config file not found: {path}")
        for sec in parser.sections():
            cfg.setdefault(sec, {}).update({k: v for k, v in parser[sec].items()})
    for (sec, key), val in overrides.items():
        if val is not None:
            cfg.setdefault(sec, {})[key] = str(val)
    return cfg


def vspec_from_config(cfg: dict) -> VSpec:
    sec = cfg["V"]
    variant = sec["variant"].strip()
    if variant == "constant":
        return VSpec("constant", c0=float(sec["c0"]))
    if variant == "quadratic":
        return VSpec("quadratic", q=float(sec["q"]))
    if variant == "gaussian":
        return VSpec("gaussian", a=float(sec["a"]), b=float(sec["b"]),
                     base=VSpec("constant", c0=float(sec["c0"])))
    raise UsageError(f"unsupported V variant in config: {variant!r}")


def fixedpoint_config(cfg: dict, Lambda: float, lam: float) -> FixedPointConfig:
    g = cfg["grid"]
    return FixedPointConfig(
        Lambda=Lambda, lam=lam, r_min=float(g["r_min"]), r_max=float(g["r_max"]),
        switch=float(g["switch"]), ratio=float(g["ratio"]), step=float(g["step"]),
        order=int(g["order"]),
    )


def _check(checks: list, cid: str, value: float, tol: float, passed=None) -> None:
    ok = bool(value <= tol) if passed is None else bool(passed)
    checks.append({"id": cid, "value": None if value is None else float(value),
                   "tol": float(tol) if tol is not None else None, "passed": ok})


def _finish(out: Path, command: str, cfg: dict, artifacts: list, checks: list) -> int:
    io.write_manifest(out, artifacts, command=command,
                      config={s: dict(v) for s, v in cfg.items()}, checks=checks)
    for ch in checks:
        status = "PASS" if ch["passed"] else "FAIL"
        print(f"[{status}] {ch['id']}: value={ch['value']!r} tol={ch['tol']!r}")
    failed = [ch["id"] for ch in checks if not ch["passed"]]
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return CHECK_FAILURE
    return 0


# ---------------------------------------------------------------------------

def cmd_spherical(cfg: dict) -> int:
    out = Path(cfg["run"]["out"])
    ts = float(cfg["run"]["tol_scale"])
    r_max = float(cfg["spherical"]["r_max"])
    r_curv = float(cfg["spherical"]["curvature_r"])
    if r_max <= 0:
        raise UsageError("r_max must be positive")
    V = VSpec("constant", c0=120.0)
    spec = IvpSpec(u0=math.log(2.0), lap_u0=-12.0, bilap_u0=192.0, V=V,
                   r_max=max(r_max, r_curv), rtol=1e-12, atol=1e-14)
    traj, events = integrate_ivp(spec)

    radii = np.geomspace(traj.r_grid[0], r_max, 1200)
    w = traj(radii)
    exact = np.asarray(profiles.eta_jet_arrays(radii))
    residuals = np.abs(w - exact)
    artifacts = []
    p = out / "trajectory.csv"
    traj.to_csv(p, radii=radii)
    artifacts.append(p)
    p = out / "residuals.csv"
    io.write_csv(p, "r,res_u,res_du,res_lap_u,res_dlap_u,res_bilap_u,res_dbilap_u",
                 np.column_stack([radii] + [residuals[i] for i in range(6)]))
    artifacts.append(p)

    ladder = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, r_curv]
    rows = []
    for r in ladder:
        quad = traj.curvature(V, r)
        closed = spherical_mass(r)
        rows.append([r, quad, closed, quad - closed])
    p = out / "curvature_table.csv"
    io.write_csv(p, "r,curvature_quad,curvature_closed,residual", rows)
    artifacts.append(p)
    p = out / "constants.json"
    io.write_json(p, constants_dict())
    artifacts.append(p)

    checks = []
    _check(checks, "spherical_sup_error", float(residuals[0].max()),
           float(cfg["tol"]["spherical_sup"]) * ts)
    _check(checks, "total_curvature_vs_quantum",
           abs(rows[-1][1] - LAMBDA1) / LAMBDA1,
           float(cfg["tol"]["spherical_curv"]) * ts)
    return _finish(out, "spherical", cfg, artifacts, checks)


def _write_member_artifacts(out: Path, idx: int, member, report) -> list:
    artifacts = []
    p = out / f"member_{idx}_trajectory.csv"
    fn = member.jets()
    grid = member.u_field.grid
    radii = grid.nodes[grid.nodes > 0]
    radii = radii[:: max(1, radii.size // 1500)]
    w = fn(radii)
    io.write_csv(p, "r,u,du,lap_u,dlap_u,bilap_u,dbilap_u",
                 np.column_stack([radii] + [w[i] for i in range(6)]))
    artifacts.append(p)
    p = out / f"member_{idx}_events.json"
    io.write_json(p, member.events().theta_json())
    artifacts.append(p)
    p = out / f"member_{idx}_report.json"
    io.write_json(p, report.to_dict())
    artifacts.append(p)
    try:
        from .blowup import rescaled_profile
        from .profiles import rk
        x_max = min(20.0, 0.9 * grid.r_max / rk(float(member.u_field(0.0))))
        prof = rescaled_profile(member.u_field, x_max=x_max)
        x = prof.grid.nodes
        p = out / f"member_{idx}_rescaled.csv"
        io.write_csv(p, "x,eta_k,eta",
                     np.column_stack([x, prof.values, profiles.eta(x)]))
        artifacts.append(p)
    except Exception:
        pass  # members without enough resolution near 0 skip the overlay
    return artifacts


def cmd_family(cfg: dict) -> int:
    out = Path(cfg["run"]["out"])
    sec = cfg["family"]
    example = sec["example"].strip()
    params = _parse_list(sec["params"])
    if example not in ("1a", "1b", "2", "3"):
        raise UsageError(f"unknown example id {example!r}")
    if not params:
        raise UsageError("empty parameter list")

    checks = []
    artifacts = []
    if example in ("1a", "1b"):
        fam = families.example1_family(example, params)
        expected = {"1a": "i", "1b": "ii"}[example]
    elif example == "2":
        V = vspec_from_config(cfg)
        Lam = float(sec["Lambda_factor"]) * LAMBDA1
        lambdas = _parse_list(sec["lambdas"])[: len(params)]
        fam, _ = families.example2_family(V, Lam, lambdas, params,
                                          fixedpoint_config(cfg, Lam, lambdas[0]))
        expected = "ii"
    else:
        Lam = float(sec["Lambda_factor"]) * LAMBDA1
        reports = []
        for k in params:
            try:
                sol = families.example3_solution(Lam, k, fixedpoint_config(cfg, Lam, 1 / 24.0))
                reports.append({"k": k, "converged": True, **sol.metadata()})
            except Exception as exc:  # no convergence guarantee for this variant
                reports.append({"k": k, "converged": False, "error": str(exc)})
        p = out / "example3_report.json"
        io.write_json(p, reports)
        artifacts.append(p)
        _check(checks, "example3_attempted", 0.0, 1.0, passed=True)
        return _finish(out, "family", cfg, artifacts, checks)

    reports = [analyze_member(m) for m in fam.members]
    for i, (m, rep) in enumerate(zip(fam.members, reports)):
        artifacts.extend(_write_member_artifacts(out, i, m, rep))
    p = out / "family_summary.csv"
    io.write_csv(p, FAMILY_CSV_HEADER, family_summary_rows(reports))
    artifacts.append(p)
    labels = [rep.case for rep in reports]
    _check(checks, f"labels_match_example_{example}", 0.0, 0.0,
           passed=all(lbl == expected for lbl in labels))
    return _finish(out, "family", cfg, artifacts, checks)


def cmd_hybrid(cfg: dict) -> int:
    out = Path(cfg["run"]["out"])
    ts = float(cfg["run"]["tol_scale"])
    sec = cfg["hybrid"]
    factor = float(sec["Lambda_factor"])
    Lam = factor * LAMBDA1
    if Lam < LAMBDA1:
        raise UsageError("hybrid construction requires Lambda >= Lambda1")
    lambdas = _parse_list(sec["lambdas"])
    if not lambdas or any(b >= a for a, b in zip(lambdas, lambdas[1:])):
        raise UsageError("lambdas must be a strictly decreasing list")
    deltas = _parse_list(sec["deltas"])
    V = vspec_from_config(cfg)
    V.validate_positive(np.geomspace(1e-6, float(cfg["grid"]["r_max"]), 64))
    V.validate_near_origin()

    fam, res = families.hybrid_family(V, Lam, lambdas, fixedpoint_config(cfg, Lam, lambdas[0]))
    artifacts = []
    checks = []
    rows = []
    reports = []
    for i, (m, d) in enumerate(zip(fam.members, res.diagnostics)):
        rep = analyze_member(m, deltas=tuple(deltas))
        reports.append(rep)
        poho = pohozaev_residual(m.solution)
        rows.append([d["lambda"], d["u0"], d["lap_u0"], d["lambda_lap_u0"], d["c"],
                     d["c_tilde"], d["sweeps"], d["residual"], d["Lambda_achieved"],
                     poho / LAMBDA1,
                     rep.annulus if rep.annulus is not None else math.nan])
        artifacts.extend(_write_member_artifacts(out, i, m, rep))
        sol_meta = out / f"member_{i}_solution.json"
        io.write_json(sol_meta, m.solution.metadata())
        artifacts.append(sol_meta)
        _check(checks, f"pohozaev_member_{i}", abs(poho) / LAMBDA1,
               float(cfg["tol"]["pohozaev"]) * ts)

    p = out / "continuation.csv"
    io.write_csv(p, "lambda,u0,lap_u0,lambda_lap_u0,c,c_tilde,sweeps,residual,"
                    "Lambda_achieved,pohozaev_over_L1,annulus_mass", rows)
    artifacts.append(p)
    p = out / "family_summary.csv"
    io.write_csv(p, FAMILY_CSV_HEADER, family_summary_rows(reports))
    artifacts.append(p)

    u0s = [d["u0"] for d in res.diagnostics]
    lamD = [d["lambda_lap_u0"] for d in res.diagnostics]
    _check(checks, "u0_strictly_increasing", 0.0, 0.0,
           passed=all(b > a for a, b in zip(u0s, u0s[1:])))
    _check(checks, "lambda_lap_u0_strictly_decreasing", 0.0, 0.0,
           passed=all(b < a for a, b in zip(lamD, lamD[1:])))
    _check(checks, "case_iv_at_smallest_lambda", 0.0, 0.0,
           passed=reports[-1].case == "iv")
    ann = [rep.annulus for rep in reports if rep.annulus is not None]
    if len(ann) >= 2:
        _check(checks, "annulus_mass_trend", abs(ann[-1] - (Lam - LAMBDA1)),
               abs(ann[-2] - (Lam - LAMBDA1)) + 1e-9)
    if not res.ok:
        _check(checks, "continuation_complete", float(res.failed_at), 0.0, passed=False)
    return _finish(out, "hybrid", cfg, artifacts, checks)


def cmd_linearize(cfg: dict) -> int:
    out = Path(cfg["run"]["out"])
    ts = float(cfg["run"]["tol_scale"])
    r_max = float(cfg["linearize"]["r_max"])
    if r_max < 50:
        raise UsageError("linearize r_max must be at least 50")
    artifacts = []
    checks = []
    basis = [solve_linearized((1.0, 0.0), r_max=r_max),
             solve_linearized((0.0, 1.0), r_max=r_max)]
    for i, sol in enumerate(basis, start=1):
        p = out / f"basis{i}.csv"
        sol.to_csv(p)
        artifacts.append(p)
    p0 = psi0_profile(r_max=r_max)
    p = out / "psi0.csv"
    p0.to_csv(p)
    artifacts.append(p)

    psi_res = psi_operator_residual(min(50.0, r_max))
    psi_vol = psi_volume_integral()
    from .constants import GAMMA6
    slope = GAMMA6 * p0.alpha_integral
    report = {
        "basis": [s.metadata() for s in basis],
        "psi0": p0.metadata(),
        "psi0_asymptotics": asymptotic_table_check(p0) if r_max >= 100 else None,
        "Psi_operator_residual": psi_res,
        "Psi_volume_integral": psi_vol,
        "excess_slope": slope,
        "excess_slope_target": 24.0 * LAMBDA1,
    }
    p = out / "linearized_report.json"
    io.write_json(p, report)
    artifacts.append(p)

    for i, sol in enumerate(basis, start=1):
        _check(checks, f"alpha_identity_basis{i}", sol.identity_residual(),
               float(cfg["tol"]["alpha_identity"]) * ts)
    _check(checks, "Psi_operator_residual", psi_res, float(cfg["tol"]["psi_residual"]) * ts)
    _check(checks, "Psi_volume_integral", abs(psi_vol), float(cfg["tol"]["psi_residual"]) * ts)
    _check(checks, "psi0_normalization", abs(p0.a - 8.0) + abs(p0.b), 1e-4 * ts)
    _check(checks, "psi0_slope_vs_24Lambda1", abs(slope / (24.0 * LAMBDA1) - 1.0),
           float(cfg["tol"]["psi0_slope"]) * ts)
    return _finish(out, "linearize", cfg, artifacts, checks)


def cmd_analyze(cfg: dict, path: str) -> int:
    out = Path(cfg["run"]["out"])
    fields, data = io.read_csv(path, expected_header="r,u,du,lap_u,dlap_u,bilap_u,dbilap_u")
    r = data[:, 0]
    if r[0] > 0:
        # extend to the origin with the local parabola u ~ u(r0) - lap/12 r0^2
        u_origin = data[0, 1] - data[0, 3] * r[0] ** 2 / 12.0
        grid = RadialGrid(np.concatenate(([0.0], r)))
        vals = np.concatenate(([u_origin], data[:, 1]))
    else:
        grid = RadialGrid(r)
        vals = data[:, 1]
    field = RadialField(grid, vals)
    cols = {name: data[:, i + 1] for i, name in enumerate(("u", "du", "lap_u", "dlap_u", "bilap_u", "dbilap_u"))}
    from scipy.interpolate import CubicSpline
    splines = {k: CubicSpline(r, v) for k, v in cols.items()}

    def jets(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.stack([splines[k](x) for k in ("u", "du", "lap_u", "dlap_u", "bilap_u", "dbilap_u")])

    member = FamilyMember(field, VSpec("constant", c0=120.0), provenance="external", jet_fn=jets)
    rep = analyze_member(member)
    artifacts = _write_member_artifacts(out, 0, member, rep)
    return _finish(out, "analyze", cfg, artifacts, [])


def cmd_report(cfg: dict, path: str) -> int:
    manifest = io.read_json(Path(path) / "manifest.json" if Path(path).is_dir() else path)
    checks = manifest.get("checks", [])
    for ch in checks:
        status = "PASS" if ch.get("passed") else "FAIL"
        print(f"[{status}] {ch['id']}: value={ch.get('value')!r} tol={ch.get('tol')!r}")
    bad = [ch for ch in checks if not ch.get("passed")]
    print(f"{len(checks) - len(bad)}/{len(checks)} checks passed "
          f"({manifest.get('command', '?')} run)")
    return CHECK_FAILURE if bad else 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcurv6", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("spherical", "family", "hybrid", "linearize", "analyze", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--tol-scale", type=float, default=None)
        p.add_argument("--jobs", type=int, default=None)
        if name == "spherical":
            p.add_argument("--r-max", type=float, default=None)
        if name == "family":
            p.add_argument("--example", default=None)
            p.add_argument("--params", default=None)
        if name == "hybrid":
            p.add_argument("--Lambda-factor", dest="lambda_factor", type=float, default=None)
            p.add_argument("--lambdas", default=None)
        if name == "linearize":
            p.add_argument("--r-max", type=float, default=None)
        if name in ("analyze", "report"):
            p.add_argument("--in", dest="input", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        ("run", "out"): getattr(args, "out", None),
        ("run", "tol_scale"): getattr(args, "tol_scale", None),
        ("run", "jobs"): getattr(args, "jobs", None),
        ("spherical", "r_max"): getattr(args, "r_max", None) if args.command == "spherical" else None,
        ("linearize", "r_max"): getattr(args, "r_max", None) if args.command == "linearize" else None,
        ("family", "example"): getattr(args, "example", None),
        ("family", "params"): getattr(args, "params", None),
        ("hybrid", "Lambda_factor"): getattr(args, "lambda_factor", None),
        ("hybrid", "lambdas"): getattr(args, "lambdas", None),
    }
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "spherical":
            return cmd_spherical(cfg)
        if args.command == "family":
            return cmd_family(cfg)
        if args.command == "hybrid":
            return cmd_hybrid(cfg)
        if args.command == "linearize":
            return cmd_linearize(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.input)
        if args.command == "report":
            return cmd_report(cfg, args.input)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except RuntimeError as exc:
        # solver-side failures (divergence, normalization) surface verbatim
        print(f"error: {exc}", file=sys.stderr)
        return CHECK_FAILURE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
