"""Closed-form radial profiles and their jets.

All jets are 6-tuples (u, u', Lap u, (Lap u)', Lap^2 u, (Lap^2 u)') in the
R^6 radial calculus Lap f = f'' + (5/r) f'.  The spherical profile
eta(r) = log(2/(1+r^2)) solves (-Lap)^3 eta = 120 e^{6 eta}; the kernel
profile Psi(r) = (1-r^2)/(1+r^2) solves the linearization
(-Lap)^3 Psi = 720 Psi e^{6 eta}.  Both sets of formulas below are written
in terms of g = 1/(1+r^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class JetState:
    """ODE state at one radius: (u, u', Lap u, (Lap u)', Lap^2 u, (Lap^2 u)')."""

    r: float
    u: float
    du: float
    lap_u: float
    dlap_u: float
    bilap_u: float
    dbilap_u: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.du, self.lap_u, self.dlap_u,
                         self.bilap_u, self.dbilap_u])

    @classmethod
    def from_array(cls, r: float, w) -> "JetState":
        return cls(r, *map(float, w))


# -- spherical profile eta ---------------------------------------------------

def eta(r):
    r = np.asarray(r, dtype=float)
    return LOG2 - np.log1p(r * r)


def eta_jet_arrays(r):
    """All six jet components of eta, vectorized."""
    r = np.asarray(r, dtype=float)
    g = 1.0 / (1.0 + r * r)
    u = LOG2 + np.log(g)
    du = -2.0 * r * g
    lap = -8.0 * g - 4.0 * g * g
    dlap = 16.0 * r * g * g * (1.0 + g)
    bilap = g * g * (32.0 + 64.0 * g + 96.0 * g * g)
    dbilap = -2.0 * r * g**3 * (64.0 + 192.0 * g + 384.0 * g * g)
    return u, du, lap, dlap, bilap, dbilap


def trilap_eta(r):
    """Lap^3 eta = -7680 g^6, i.e. (-Lap)^3 eta = 120 e^{6 eta}."""
    g = 1.0 / (1.0 + np.asarray(r, dtype=float) ** 2)
    return -7680.0 * g**6


def spherical_profile(r: float) -> JetState:
    """Jet of the spherical profile at radius r >= 0."""
    return JetState(float(r), *(float(c) for c in eta_jet_arrays(float(r))))


# -- exact kernel solution Psi of the linearized equation --------------------

def psi_exact(r):
    r = np.asarray(r, dtype=float)
    return (1.0 - r * r) / (1.0 + r * r)


def psi_exact_jet_arrays(r):
    r = np.asarray(r, dtype=float)
    g = 1.0 / (1.0 + r * r)
    u = 2.0 * g - 1.0
    du = -4.0 * r * g * g
    lap = -8.0 * g * g - 16.0 * g**3
    dlap = 32.0 * r * g**3 + 96.0 * r * g**4
    bilap = 768.0 * g**5
    dbilap = -7680.0 * r * g**6
    return u, du, lap, dlap, bilap, dbilap


# -- polyharmonic limit profile phi = -(1 - r^2)^2 ---------------------------

def phi_jet_arrays(r):
    r = np.asarray(r, dtype=float)
    r2 = r * r
    u = -(1.0 - r2) ** 2
    du = 4.0 * r * (1.0 - r2)
    lap = 24.0 - 32.0 * r2
    dlap = -64.0 * r
    bilap = np.full_like(r, -384.0)
    dbilap = np.zeros_like(r)
    return u, du, lap, dlap, bilap, dbilap


# -- concentrated bubble eta_bar and the synthetic hybrid profile ------------

def log_rk(u0: float) -> float:
    """log of the concentration radius r_k = 2 e^{-u0}, computed cancellation-free."""
    return LOG2 - u0


def rk(u0: float) -> float:
    return 2.0 * math.exp(-u0)


def eta_bar_jet_arrays(r, u0: float):
    """Jets of eta_bar(r) = eta(r / r_k) - log r_k with r_k = 2 e^{-u0}."""
    r = np.asarray(r, dtype=float)
    rho = rk(u0)
    x = r / rho
    u, du, lap, dlap, bilap, dbilap = eta_jet_arrays(x)
    return (u - log_rk(u0), du / rho, lap / rho**2, dlap / rho**3,
            bilap / rho**4, dbilap / rho**5)


def synthetic_hybrid_jet_arrays(r, u0: float):
    """Jets of the model case-iv profile u = eta_bar + u0 (phi + 1)."""
    eb = eta_bar_jet_arrays(r, u0)
    ph = phi_jet_arrays(r)
    out = [eb[i] + u0 * ph[i] for i in range(6)]
    out[0] = out[0] + u0
    return tuple(out)


def taylor_start(r: float, u0: float, lap_u0: float, bilap_u0: float,
                 v0: float, v2: float) -> np.ndarray:
    """Degree-8 Taylor jet of the nonlinear equation at small r.

    Consistent with radial parity and Lap^3 u = -V e^{6u}; v0, v2 are the
    leading Taylor coefficients of V at the origin.
    """
    a2 = lap_u0 / 12.0
    a4 = bilap_u0 / 384.0
    e6 = math.exp(6.0 * u0)
    a6 = -v0 * e6 / 23040.0
    a8 = -e6 * (v2 + 6.0 * a2 * v0) / 184320.0
    return _poly_jet(r, u0, a2, a4, a6, a8)


def linear_taylor_start(r: float, psi0: float, lap0: float, bilap0: float) -> np.ndarray:
    """Degree-8 Taylor jet of the linearized equation Lap^3 psi = -720 psi e^{6 eta}."""
    a2 = lap0 / 12.0
    a4 = bilap0 / 384.0
    a6 = -2.0 * psi0
    a8 = -(a2 - 6.0 * psi0) / 4.0
    return _poly_jet(r, psi0, a2, a4, a6, a8)


def _poly_jet(r: float, a0: float, a2: float, a4: float, a6: float, a8: float) -> np.ndarray:
    r2 = r * r
    u = a0 + r2 * (a2 + r2 * (a4 + r2 * (a6 + r2 * a8)))
    du = r * (2 * a2 + r2 * (4 * a4 + r2 * (6 * a6 + r2 * 8 * a8)))
    lap = 12 * a2 + r2 * (32 * a4 + r2 * (60 * a6 + r2 * 96 * a8))
    dlap = r * (64 * a4 + r2 * (240 * a6 + r2 * 576 * a8))
    bilap = 384 * a4 + r2 * (1920 * a6 + r2 * 5760 * a8)
    dbilap = r * (3840 * a6 + r2 * 23040 * a8)
    return np.array([u, du, lap, dlap, bilap, dbilap])
