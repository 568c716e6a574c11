"""Sixth-order radial IVP: first-order jet system, series start at the origin,
zero-crossing events, and shooting on initial data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, root

from .calculus import adaptive_quad
from .constants import OMEGA5
from .profiles import JetState, taylor_start
from .vspec import VSpec

QUANTITIES = ("u", "du", "lap_u", "dlap_u", "bilap_u", "dbilap_u")
EVENT_QUANTITIES = ("du", "lap_u", "dlap_u", "bilap_u")
_INDEX = {name: i for i, name in enumerate(QUANTITIES)}

# EventLog JSON schema: zeros of u' split into theta1 / theta1_tilde, zeros of
# Lap u into theta2 / theta2_tilde, all zeros of (Lap u)' under theta3 and of
# Lap^2 u under theta4.
_THETA_SPLIT = {"du": ("theta1", "theta1_tilde"), "lap_u": ("theta2", "theta2_tilde")}
_THETA_ALL = {"dlap_u": "theta3", "bilap_u": "theta4"}


class IntegrationError(RuntimeError):
    pass


class BracketError(RuntimeError):
    pass


class ShootingError(RuntimeError):
    pass


@dataclass(frozen=True)
class IvpSpec:
    """Initial data at the origin plus integration controls."""

    u0: float
    lap_u0: float
    bilap_u0: float
    V: VSpec | Callable = VSpec("constant", c0=120.0)
    r_max: float = 10.0
    rtol: float = 1e-12
    atol: float = 1e-13
    events: Sequence[str] = EVENT_QUANTITIES
    r_start: float = 1e-4
    gauge_threshold: float = 20.0
    blow_level: float = 80.0

    def __post_init__(self):
        if self.r_max <= 0.0:
            raise ValueError("r_max must be positive")
        if self.rtol <= 0.0 or self.atol <= 0.0:
            raise ValueError("tolerances must be positive")
        bad = [q for q in self.events if q not in QUANTITIES]
        if bad:
            raise ValueError(f"unknown event quantities {bad}")


@dataclass
class EventLog:
    """Ordered zero crossings per tracked quantity, with crossing directions."""

    zeros: dict = field(default_factory=dict)

    def add(self, name: str, radius: float, direction: int) -> None:
        self.zeros.setdefault(name, []).append((float(radius), int(direction)))

    def radii(self, name: str) -> list[float]:
        return [r for r, _ in self.zeros.get(name, [])]

    def first(self, name: str, k: int = 0) -> float | None:
        rs = self.radii(name)
        return rs[k] if len(rs) > k else None

    def validate(self) -> None:
        for name, pairs in self.zeros.items():
            rr = [p[0] for p in pairs]
            dd = [p[1] for p in pairs]
            if any(b <= a for a, b in zip(rr, rr[1:])):
                raise ValueError(f"{name}: zeros not increasing")
            if any(d1 == d2 for d1, d2 in zip(dd, dd[1:])):
                raise ValueError(f"{name}: directions do not alternate")

    def theta_json(self) -> dict:
        out = {"theta1": [], "theta1_tilde": [], "theta2": [],
               "theta2_tilde": [], "theta3": [], "theta4": []}
        for qty, (head, tail) in _THETA_SPLIT.items():
            rs = self.radii(qty)
            if rs:
                out[head] = [rs[0]]
                out[tail] = rs[1:]
        for qty, name in _THETA_ALL.items():
            out[name] = self.radii(qty)
        return out

    def thetas(self) -> dict:
        """Convenience scalars: theta1..theta4 and the tilde radii (or None)."""
        j = self.theta_json()
        pick = lambda xs: xs[0] if xs else None
        return {
            "theta1": pick(j["theta1"]), "theta1_tilde": pick(j["theta1_tilde"]),
            "theta2": pick(j["theta2"]), "theta2_tilde": pick(j["theta2_tilde"]),
            "theta3": pick(j["theta3"]), "theta4": pick(j["theta4"]),
        }


class Trajectory:
    """Dense solution of the jet system on [r_start, r_end], evaluated in the
    physical gauge even when integrated in rescaled variables."""

    def __init__(self, spec: IvpSpec, sol, scale: float = 1.0, flags=()):
        self.spec = spec
        self._sol = sol
        self.scale = scale              # physical r = scale * internal x
        self.flags = tuple(flags)
        self.r_grid = sol.t * scale
        self._jet_scale = scale ** -np.arange(6, dtype=float)

    @property
    def r_end(self) -> float:
        return float(self.r_grid[-1])

    def __call__(self, r):
        """Jet components at physical radii r, shape (6,) + r.shape."""
        r = np.asarray(r, dtype=float)
        x = r / self.scale
        w = self._sol.sol(x)
        out = w * self._jet_scale[:, None] if w.ndim == 2 else w * self._jet_scale
        if self.scale != 1.0:
            # u itself shifts by -log(scale) under the rescaling gauge
            if out.ndim == 2:
                out[0] += -math.log(self.scale)
            else:
                out = out.copy()
                out[0] += -math.log(self.scale)
        return out

    def component(self, name: str, r):
        return self(r)[_INDEX[name]]

    def states(self, radii=None) -> list[JetState]:
        radii = self.r_grid if radii is None else np.asarray(radii, dtype=float)
        w = self(radii)
        return [JetState.from_array(r, w[:, i]) for i, r in enumerate(radii)]

    def curvature(self, V, r: float, rtol: float = 1e-11) -> float:
        """omega5 * int_0^r V e^{6u} s^5 ds along the trajectory; the head
        segment [0, r_start] is integrated with u frozen at u0 (valid because
        r_start is far below the concentration scale)."""
        r0 = float(self.r_grid[0])
        Vf = V if callable(V) else (lambda s: np.full_like(np.asarray(s, float), V))

        def integrand(s):
            s = np.asarray(s, dtype=float)
            return np.asarray(Vf(s)) * np.exp(6.0 * self(s)[0]) * s**5

        head_val = float(np.asarray(Vf(np.array([0.0])))[0]) * math.exp(6.0 * self.spec.u0) * r0**6 / 6.0
        return OMEGA5 * (head_val + adaptive_quad(integrand, r0, r, rtol=rtol))

    def to_csv(self, path, radii=None) -> None:
        from .io import write_csv
        radii = self.r_grid if radii is None else np.asarray(radii, dtype=float)
        w = self(radii)
        write_csv(path, "r,u,du,lap_u,dlap_u,bilap_u,dbilap_u",
                  np.column_stack([radii] + [w[i] for i in range(6)]))


def _rhs_factory(Vf):
    def rhs(r, w):
        u, du, lap, dlap, bilap, dbilap = w
        inv = 5.0 / r
        ex = 6.0 * u
        f = Vf(r) * math.exp(ex if ex < 700.0 else 700.0)
        return (du, lap - inv * du, dlap, bilap - inv * dlap, dbilap, -f - inv * dbilap)
    return rhs


def _origin_expansion(V) -> tuple[float, float]:
    if isinstance(V, VSpec):
        return V.origin_expansion()
    h = 1e-4
    v0 = float(V(0.0))
    return v0, float((V(h) - v0) / h**2)


def integrate_ivp(spec: IvpSpec) -> tuple[Trajectory, EventLog]:
    """Integrate the jet system from a degree-8 series start.

    Initial data above the gauge threshold are integrated in the rescaled
    profile variables (r = r_k x, u -> u + log r_k) to keep e^{6u} in range.
    Returns the dense trajectory and the root-polished zero crossings of the
    tracked quantities.
    """
    scale = 1.0
    work = spec
    if spec.u0 > spec.gauge_threshold:
        rk = 2.0 * math.exp(-spec.u0)
        logrk = math.log(2.0) - spec.u0
        V = spec.V
        Vs = (lambda x: V(rk * x))
        work = replace(spec, u0=spec.u0 + logrk, lap_u0=spec.lap_u0 * rk**2,
                       bilap_u0=spec.bilap_u0 * rk**4, V=Vs,
                       r_max=spec.r_max / rk, r_start=min(spec.r_start, 1e-4))
        scale = rk
    elif spec.u0 > 2.0:
        # keep the series start well inside the concentration scale r_k
        rk = 2.0 * math.exp(-spec.u0)
        work = replace(spec, r_start=min(spec.r_start, 1e-2 * rk))

    Vf = work.V if callable(work.V) else (lambda r: float(work.V))
    v0, v2 = _origin_expansion(work.V)
    w_start = taylor_start(work.r_start, work.u0, work.lap_u0, work.bilap_u0, v0, v2)

    ev_fns = []
    for name in work.events:
        idx = _INDEX[name]
        fn = (lambda i: lambda r, w: w[i])(idx)
        fn.direction = 0
        fn.terminal = False
        ev_fns.append(fn)
    blow = lambda r, w: w[0] - work.blow_level
    blow.terminal = True
    blow.direction = 1
    ev_fns.append(blow)

    rhs = _rhs_factory(Vf)
    sol = solve_ivp(rhs, (work.r_start, work.r_max), w_start, method="DOP853",
                    rtol=work.rtol, atol=work.atol, dense_output=True,
                    events=ev_fns, max_step=work.r_max)
    flags = []
    if sol.status == -1:
        # step underflow at a vertical asymptote is how finite-radius blow-up
        # manifests (the pole is closer than one ulp once u is large)
        u_end, du_end = sol.y[0, -1], sol.y[1, -1]
        if u_end > work.u0 + 5.0 and du_end > 0.0:
            flags.append("finite-radius blow-up")
        else:
            raise IntegrationError("stiffness failure")
    if sol.status == 1 and sol.t_events[-1].size:
        flags.append("finite-radius blow-up")

    traj = Trajectory(spec, sol, scale=scale, flags=flags)
    log = EventLog()
    t_lo, t_hi = sol.t[0], sol.t[-1]
    for name, revents in zip(work.events, sol.t_events):
        idx = _INDEX[name]
        for x in np.sort(revents):
            # keep only genuine sign changes (identically-zero components
            # otherwise produce noise roots)
            h = max(1e-9 * max(abs(x), 1.0), 1e-12)
            xa, xb = max(t_lo, x - h), min(t_hi, x + h)
            va, vb = sol.sol(xa)[idx], sol.sol(xb)[idx]
            if not (va * vb < 0.0):
                continue
            log.add(name, x * scale, 1 if vb > va else -1)
    log.validate()
    return traj, log


def events_from_profile(jet_fn: Callable, r_lo: float, r_hi: float,
                        quantities: Sequence[str] = EVENT_QUANTITIES,
                        n_scan: int = 4000) -> EventLog:
    """Zero crossings of closed-form or reconstructed jets: geometric scan
    plus Brent polishing.  jet_fn(r) returns the 6 jet components."""
    r = np.geomspace(max(r_lo, 1e-300), r_hi, n_scan)
    W = np.asarray(jet_fn(r))
    log = EventLog()
    for name in quantities:
        vals = W[_INDEX[name]]
        s = np.sign(vals)
        idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
        comp = _INDEX[name]
        for i in idx:
            f = lambda x: float(np.asarray(jet_fn(np.array([x])))[comp, 0])
            z = brentq(f, r[i], r[i + 1], xtol=1e-14, rtol=1e-15)
            log.add(name, z, 1 if vals[i + 1] > vals[i] else -1)
    log.validate()
    return log


class CallableTrajectory:
    """Duck-typed trajectory backed by closed-form or reconstructed jets."""

    def __init__(self, jet_fn: Callable, r_lo: float, r_hi: float, u0: float | None = None):
        self._fn = jet_fn
        self.r_grid = np.array([r_lo, r_hi])
        self.scale = 1.0
        self.flags = ()
        self.u0 = u0

    @property
    def r_end(self) -> float:
        return float(self.r_grid[-1])

    def __call__(self, r):
        scalar = np.ndim(r) == 0
        out = np.asarray(self._fn(np.atleast_1d(np.asarray(r, dtype=float))))
        return out[:, 0] if scalar else out

    def component(self, name: str, r):
        return self(r)[_INDEX[name]]


# ---------------------------------------------------------------------------
# Sign-pattern verdicts (hybrid regime structure).

@dataclass
class SignPatternReport:
    d2u_ok: bool
    dlap_ok: bool
    du_ok: bool
    lap_ok: bool
    ordering_ok: bool
    source_positive: bool
    missing: list
    case_iv: bool = False

    def __post_init__(self):
        self.case_iv = (self.d2u_ok and self.dlap_ok and self.du_ok
                        and self.lap_ok and self.ordering_ok and self.source_positive)

    @property
    def verdict(self) -> str:
        return "pattern present" if self.case_iv else "pattern absent"

    def to_dict(self) -> dict:
        return {
            "d2u_ok": self.d2u_ok, "dlap_ok": self.dlap_ok, "du_ok": self.du_ok,
            "lap_ok": self.lap_ok, "ordering_ok": self.ordering_ok,
            "source_positive": self.source_positive,
            "missing": list(self.missing), "case_iv": self.case_iv,
            "verdict": self.verdict,
        }


def _signs_between(component_fn, cuts: list[float], r_lo: float, r_hi: float) -> list[int]:
    edges = [r_lo] + list(cuts) + [r_hi]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid = math.sqrt(a * b) if a > 0 else 0.5 * (a + b)
        out.append(1 if component_fn(mid) > 0 else -1)
    return out


def sign_pattern_check(trajectory, events: EventLog, V=None) -> SignPatternReport:
    """Check the hybrid-regime sign structure:

    Lap^2 u > 0 before theta4 and < 0 after; (Lap u)' > 0 before theta3 and
    < 0 after; u' < 0 / > 0 / < 0 across (theta1, theta1_tilde); Lap u < 0 /
    > 0 / < 0 across (theta2, theta2_tilde); plus the ordering
    theta2 < theta1 < theta1_tilde, theta2 < theta3 < theta2_tilde,
    theta4 < theta3, and positivity of the curvature source V e^{6u}.
    """
    r_lo = float(trajectory.r_grid[0])
    r_hi = trajectory.r_end
    comp = lambda name: (lambda r: float(trajectory.component(name, r)))
    missing = []

    def need(name, k):
        rs = events.radii(name)
        if len(rs) < k:
            missing.append(name)
            return None
        return rs

    z4 = need("bilap_u", 1)
    z3 = need("dlap_u", 1)
    z1 = need("du", 2)
    z2 = need("lap_u", 2)

    d2u_ok = bool(z4) and len(z4) == 1 and _signs_between(comp("bilap_u"), z4, r_lo, r_hi) == [1, -1]
    dlap_ok = bool(z3) and len(z3) == 1 and _signs_between(comp("dlap_u"), z3, r_lo, r_hi) == [1, -1]
    du_ok = bool(z1) and len(z1) == 2 and _signs_between(comp("du"), z1, r_lo, r_hi) == [-1, 1, -1]
    lap_ok = bool(z2) and len(z2) == 2 and _signs_between(comp("lap_u"), z2, r_lo, r_hi) == [-1, 1, -1]

    ordering_ok = bool(z1 and z2 and z3 and z4 and
                       z2[0] < z1[0] < z1[1] and z2[0] < z3[0] < z2[1] and z4[0] < z3[0])

    if V is None:
        source_positive = True
    else:
        Vf = V if callable(V) else (lambda s: np.full_like(np.asarray(s, float), V))
        rs = np.geomspace(max(r_lo, 1e-12), r_hi, 200)
        source_positive = bool(np.all(np.asarray(Vf(rs)) > 0.0))

    return SignPatternReport(d2u_ok, dlap_ok, du_ok, lap_ok, ordering_ok,
                             source_positive, missing)


# ---------------------------------------------------------------------------
# Shooting on initial data.

@dataclass(frozen=True)
class Target:
    """A scalar constraint on the trajectory: quantity at a radius equals
    value; quantity 'curvature' means total curvature over B_radius."""

    quantity: str
    radius: float
    value: float


@dataclass
class ShootResult:
    spec: IvpSpec
    residuals: list
    iterations: int
    converged: bool


_FREE = ("u0", "lap_u0", "bilap_u0")


def shoot(targets: Sequence[Target], free: Sequence[str], base: IvpSpec,
          bracket=None, tol: float = 1e-10, max_iter: int = 80) -> ShootResult:
    """Solve for initial data meeting the targets.

    One free variable uses bracketed Brent iteration (bracket required);
    several use a quasi-Newton root find started from the bracket midpoints.
    """
    free = tuple(free)
    for f in free:
        if f not in _FREE:
            raise ValueError(f"not a free initial value: {f}")
    if len(targets) != len(free):
        raise ValueError("number of constraints must equal number of free values")

    def residuals_for(spec: IvpSpec) -> list[float]:
        traj, _ = integrate_ivp(spec)
        out = []
        for t in targets:
            if t.quantity == "curvature":
                out.append(traj.curvature(spec.V, t.radius) - t.value)
            else:
                out.append(float(traj.component(t.quantity, t.radius)) - t.value)
        return out

    if not free:
        res = residuals_for(base) if targets else []
        if res and max(abs(x) for x in res) > tol:
            raise ShootingError("no convergence")
        return ShootResult(base, res, 0, True)

    calls = 0

    def make_spec(x) -> IvpSpec:
        vals = dict(zip(free, np.atleast_1d(x)))
        return replace(base, **{k: float(v) for k, v in vals.items()})

    if len(free) == 1:
        if bracket is None:
            raise BracketError("bracket failure")
        lo, hi = bracket if not isinstance(bracket, dict) else bracket[free[0]]

        def f(x):
            nonlocal calls
            calls += 1
            return residuals_for(make_spec(x))[0]

        flo, fhi = f(lo), f(hi)
        if flo * fhi <= 0:
            try:
                x = brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16, maxiter=max_iter)
            except RuntimeError as exc:
                raise ShootingError("no convergence") from exc
        else:
            # no sign change: the root may be a tangency (the target sits at
            # an extremum of the residual, e.g. borderline spherical data);
            # accept it only if |residual| actually reaches ~0 inside
            from scipy.optimize import minimize_scalar
            opt = minimize_scalar(lambda x: abs(f(x)), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-12})
            scale_ref = min(abs(flo), abs(fhi))
            if not opt.success or abs(opt.fun) > max(tol, 1e-6 * scale_ref):
                raise BracketError("bracket failure")
            x = float(opt.x)
        spec = make_spec(x)
        res = residuals_for(spec)
        scale_ref = min(abs(flo), abs(fhi)) if flo * fhi > 0 else abs(targets[0].value)
        ok = max(abs(v) for v in res) <= max(tol, 1e-6 * scale_ref + 1e-8 * abs(targets[0].value))
        return ShootResult(spec, res, calls, ok)

    x0 = np.array([0.5 * (bracket[k][0] + bracket[k][1]) for k in free])
    sol = root(lambda x: residuals_for(make_spec(x)), x0, method="hybr",
               options={"xtol": 1e-12, "maxfev": max_iter * len(free)})
    if not sol.success:
        raise ShootingError("no convergence")
    spec = make_spec(sol.x)
    res = residuals_for(spec)
    return ShootResult(spec, res, int(sol.nfev), True)
