"""Render solver artifacts into figures.

Four figure kinds:

  jets        triple plot of u, Lap u, Lap^2 u from a trajectory CSV with
              the zero radii theta1..theta4 marked (EventLog JSON)
  excess      curvature deviation from the quantum versus u(0), with the
              reference slope line read off the summary data
  profiles    rescaled-profile overlays eta_k against the spherical profile
              (from the solver's precomputed rescaled CSVs)
  linearized  psi solutions with their far-field decompositions

Inputs are the documented schemas produced by the qcurv6 CLI; nothing is
recomputed here.  Rendering is deterministic for a fixed style seed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

KINDS = ("jets", "excess", "profiles", "linearized")

THETA_STYLE = {
    "theta1": ("tab:blue", "-"), "theta1_tilde": ("tab:blue", "--"),
    "theta2": ("tab:green", "-"), "theta2_tilde": ("tab:green", "--"),
    "theta3": ("tab:orange", "-"), "theta4": ("tab:red", "-"),
}

LAMBDA1 = 128.0 * math.pi**3  # the curvature quantum, part of the schema


class SchemaError(ValueError):
    pass


@dataclass
class PlotSpec:
    kind: str
    inputs: list
    output: str
    events: str | None = None
    style_seed: int = 0
    dpi: int = 120
    delta: str = "0.5"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("no input files given")


def _read_csv(path, required: tuple) -> dict:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: no such file")
    with open(path) as fh:
        header = fh.readline().strip()
    cols = header.split(",")
    missing = [c for c in required if c not in cols]
    if missing:
        raise SchemaError(f"{path}: missing column {missing[0]!r}")
    body = path.read_text().strip().splitlines()
    if len(body) < 2:
        raise SchemaError(f"{path}: empty data")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {c: data[:, i] for i, c in enumerate(cols)}


def _apply_style(spec: PlotSpec) -> None:
    plt.rcdefaults()
    plt.rcParams.update({
        "svg.hashsalt": str(spec.style_seed),
        "figure.figsize": (7.5, 5.0),
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 9,
    })


def _save(fig, spec: PlotSpec) -> Path:
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    meta = {"Date": None} if out.suffix == ".svg" else {"Software": None}
    fig.savefig(out, dpi=spec.dpi, metadata=meta)
    plt.close(fig)
    return out


def render_jets(spec: PlotSpec) -> Path:
    data = _read_csv(spec.inputs[0], ("r", "u", "lap_u", "bilap_u"))
    thetas = {}
    if spec.events:
        with open(spec.events) as fh:
            thetas = json.load(fh)
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7.5, 8.0))
    r = data["r"]
    for ax, col, label in zip(axes, ("u", "lap_u", "bilap_u"),
                              ("u", "Lap u", "Lap^2 u")):
        ax.plot(r, data[col], color="black", lw=1.2)
        ax.axhline(0.0, color="gray", lw=0.6)
        ax.set_ylabel(label)
        for name, radii in thetas.items():
            color, ls = THETA_STYLE.get(name, ("gray", ":"))
            for i, rv in enumerate(radii):
                ax.axvline(rv, color=color, ls=ls, lw=0.9,
                           label=name if (ax is axes[0] and i == 0) else None)
    axes[0].legend(loc="upper right", fontsize=7)
    axes[-1].set_xlabel("r")
    axes[-1].set_xlim(0.0, min(r.max(), 2.0))
    lo = r[r > 0].min() if np.any(r > 0) else 1e-6
    fig.suptitle("radial jets with zero radii")
    return _save(fig, spec)


def render_excess(spec: PlotSpec) -> Path:
    data = _read_csv(spec.inputs[0], ("u0", f"curv_delta_{spec.delta}"))
    u0 = data["u0"]
    dev = data[f"curv_delta_{spec.delta}"] - LAMBDA1
    eps = u0 * np.exp(-2.0 * u0)
    fig, ax = plt.subplots()
    ax.plot(eps, dev, "o-", color="tab:red", label=f"curvature(B_{spec.delta}) - Lambda1")
    ref = np.linspace(0.0, eps.max() * 1.05, 50)
    ax.plot(ref, 24.0 * LAMBDA1 * ref, "--", color="gray", label="reference slope 24 Lambda1")
    if eps.size >= 2 and np.dot(eps, eps) > 0:
        slope = float(np.dot(dev, eps) / np.dot(eps, eps))
        ax.annotate(f"fitted slope = {slope:.4g}\n24 Lambda1 = {24 * LAMBDA1:.4g}",
                    xy=(0.05, 0.78), xycoords="axes fraction")
    ax.set_xlabel("eps = u(0) exp(-2 u(0))")
    ax.set_ylabel("curvature deviation")
    ax.legend(loc="lower right", fontsize=8)
    fig.suptitle("curvature excess across the family")
    return _save(fig, spec)


def render_profiles(spec: PlotSpec) -> Path:
    fig, ax = plt.subplots()
    eta_drawn = False
    for path in spec.inputs:
        data = _read_csv(path, ("x", "eta_k", "eta"))
        if not eta_drawn:
            ax.plot(data["x"], data["eta"], color="black", lw=1.6,
                    label="spherical profile")
            eta_drawn = True
        ax.plot(data["x"], data["eta_k"], lw=0.9, alpha=0.85,
                label=Path(path).stem)
    ax.set_xlabel("x")
    ax.set_ylabel("eta_k(x)")
    ax.set_xscale("symlog", linthresh=1.0)
    ax.legend(fontsize=7)
    fig.suptitle("rescaled profiles against the spherical limit")
    return _save(fig, spec)


def render_linearized(spec: PlotSpec) -> Path:
    fig, axes = plt.subplots(2, 1, figsize=(7.5, 7.0))
    report = None
    for path in spec.inputs:
        if str(path).endswith(".json"):
            with open(path) as fh:
                report = json.load(fh)
            continue
        data = _read_csv(path, ("r", "psi", "lap_psi", "bilap_psi"))
        axes[0].plot(data["r"], data["psi"], lw=1.0, label=Path(path).stem)
        axes[1].plot(data["r"], np.abs(data["bilap_psi"]), lw=1.0,
                     label=Path(path).stem)
    axes[0].set_ylabel("psi")
    axes[0].set_xscale("log")
    axes[0].legend(fontsize=7)
    axes[1].set_ylabel("|Lap^2 psi|")
    axes[1].set_xscale("log")
    axes[1].set_yscale("log")
    axes[1].set_xlabel("r")
    if report is not None and "psi0" in report:
        p0 = report["psi0"]
        axes[0].annotate(
            f"psi0: a={p0['a']:.4g}, b={p0['b']:.2g}, alpha={p0['alpha']:.4g}",
            xy=(0.05, 0.85), xycoords="axes fraction")
    fig.suptitle("linearized solutions")
    return _save(fig, spec)


_RENDERERS = {
    "jets": render_jets,
    "excess": render_excess,
    "profiles": render_profiles,
    "linearized": render_linearized,
}


def render(spec: PlotSpec) -> Path:
    """Render the figure described by spec; returns the written path."""
    _apply_style(spec)
    return _RENDERERS[spec.kind](spec)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="qcurv6-plot", description=__doc__)
    ap.add_argument("--kind", required=True, choices=KINDS)
    ap.add_argument("--in", dest="inputs", action="append", required=True,
                    help="input CSV/JSON (repeatable)")
    ap.add_argument("--events", default=None, help="EventLog JSON (jets kind)")
    ap.add_argument("--out", required=True)
    ap.add_argument("--style-seed", type=int, default=0)
    ap.add_argument("--dpi", type=int, default=120)
    ap.add_argument("--delta", default="0.5", help="curvature column suffix (excess kind)")
    args = ap.parse_args(argv)
    try:
        spec = PlotSpec(kind=args.kind, inputs=args.inputs, output=args.out,
                        events=args.events, style_seed=args.style_seed,
                        dpi=args.dpi, delta=args.delta)
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
