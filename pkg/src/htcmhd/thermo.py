"""Thermodynamics of ideal MHD written in terms of the entropy density.

All state arrays carry the 9 conserved components on axis 0, so a single
state has shape ``(9,)`` and a field of states has shape ``(9, *grid)``::

    q = (rho, rho*v1, rho*v2, rho*v3, rho*S, B1, B2, B3, phi)

The total energy density is split into internal, kinetic, magnetic and
cleaning parts,

    E1 = rho**gamma / (gamma - 1) * exp(S / c_v)
    E2 = |m|**2 / (2 rho)
    E3 = |B|**2 / 2
    E4 = rho * phi**2 / 2

and its gradient with respect to ``q`` is the vector of dual variables
``(r, v, T, beta, psi)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

NVAR = 9
RHO = 0
MOM = slice(1, 4)
SIG = 4
MAG = slice(5, 8)
PHI = 8

# primitive layout: (rho, v1, v2, v3, p, B1, B2, B3, phi)
VEL = slice(1, 4)
PRE = 4

# dual layout mirrors the conserved one: (r, v1, v2, v3, T, beta1..3, psi)
TEMP = 4

FIELD_NAMES = ("rho", "m1", "m2", "m3", "sigma", "B1", "B2", "B3", "phi")


class DomainError(ValueError):
    """Raised when a state leaves the admissible set (rho <= 0, T <= 0, non-finite)."""


@dataclass(frozen=True)
class GasParams:
    gamma: float = 5.0 / 3.0
    c_v: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.c_v > 0.0:
            raise ValueError(f"c_v must be positive, got {self.c_v}")


class EnergyParts(NamedTuple):
    E1: np.ndarray
    E2: np.ndarray
    E3: np.ndarray
    E4: np.ndarray

    @property
    def total(self):
        return self.E1 + self.E2 + self.E3 + self.E4


def _density(q) -> np.ndarray:
    rho = np.asarray(q[RHO], dtype=float)
    if not np.all(rho > 0.0):
        bad = np.argwhere(~(rho > 0.0))
        where = tuple(bad[0]) if bad.size else ()
        raise DomainError(f"non-positive or non-finite density at {where}")
    return rho


def _thermal(q, gas: GasParams):
    """Return (rho, v, S, K) with K = rho**(gamma-1) * exp(S/c_v), so p = rho*K."""
    rho = _density(q)
    v = q[MOM] / rho
    S = q[SIG] / rho
    with np.errstate(over="raise"):
        try:
            K = rho ** (gas.gamma - 1.0) * np.exp(S / gas.c_v)
        except FloatingPointError as exc:
            raise DomainError("entropy overflow in exp(S/c_v)") from exc
    return rho, v, S, K


def energy(q, gas: GasParams) -> EnergyParts:
    rho, v, S, K = _thermal(q, gas)
    B = q[MAG]
    phi = q[PHI]
    E1 = rho * K / (gas.gamma - 1.0)
    E2 = 0.5 * rho * np.sum(v * v, axis=0)
    E3 = 0.5 * np.sum(B * B, axis=0)
    E4 = 0.5 * rho * phi * phi
    return EnergyParts(E1, E2, E3, E4)


def pressure(q, gas: GasParams) -> np.ndarray:
    rho, _, _, K = _thermal(q, gas)
    return rho * K


def temperature(q, gas: GasParams) -> np.ndarray:
    _, _, _, K = _thermal(q, gas)
    return K / ((gas.gamma - 1.0) * gas.c_v)


def dual(q, gas: GasParams) -> np.ndarray:
    """Gradient of the total energy density with respect to ``q``.

    ``r`` is taken with momentum, entropy density, ``B`` and ``phi`` held
    fixed, so it collects -v.v/2 from the kinetic and +phi**2/2 from the
    cleaning energy; the magnetic energy does not depend on ``rho``.
    """
    q = np.asarray(q, dtype=float)
    rho, v, S, K = _thermal(q, gas)
    T = K / ((gas.gamma - 1.0) * gas.c_v)
    phi = q[PHI]
    p = np.empty_like(q)
    p[RHO] = T * (gas.gamma * gas.c_v - S) - 0.5 * np.sum(v * v, axis=0) + 0.5 * phi * phi
    p[MOM] = v
    p[SIG] = T
    p[MAG] = q[MAG]
    p[PHI] = rho * phi
    return p


def dual_euler(q, gas: GasParams) -> np.ndarray:
    """Dual variables ``(r, v1, v2, v3, T)`` of the Euler energy E1 + E2 only."""
    rho, v, S, K = _thermal(q, gas)
    T = K / ((gas.gamma - 1.0) * gas.c_v)
    out = np.empty((5,) + np.shape(rho))
    out[0] = T * (gas.gamma * gas.c_v - S) - 0.5 * np.sum(v * v, axis=0)
    out[1:4] = v
    out[4] = T
    return out


def dual_to_conserved_euler(d, gas: GasParams) -> np.ndarray:
    """Invert :func:`dual_euler`: map ``(r, v, T)`` back to ``(rho, m, sigma)``."""
    d = np.asarray(d, dtype=float)
    r, v, T = d[0], d[1:4], d[4]
    if not np.all(T > 0.0):
        raise DomainError("non-positive temperature in dual state")
    gm1 = gas.gamma - 1.0
    A = gm1 * gas.c_v * T
    S = gas.gamma * gas.c_v - (r + 0.5 * np.sum(v * v, axis=0)) / T
    with np.errstate(over="ignore", under="ignore"):
        rho = (A * np.exp(-S / gas.c_v)) ** (1.0 / gm1)
    if not np.all(np.isfinite(rho) & (rho > 0.0)):
        raise DomainError("dual state maps to a non-finite or vanishing density")
    out = np.empty((5,) + np.shape(rho))
    out[0] = rho
    out[1:4] = rho * v
    out[4] = rho * S
    return out


def generating_potential_euler(q, gas: GasParams) -> np.ndarray:
    """Legendre transform ``p.q - E`` of the Euler energy; equals the pressure."""
    q = np.asarray(q, dtype=float)
    d = dual_euler(q, gas)
    parts = energy(q, gas)
    return np.sum(d * q[:5], axis=0) - (parts.E1 + parts.E2)


def primitive_to_conserved(w, gas: GasParams) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    rho = _density(w)
    p = w[PRE]
    if not np.all(p > 0.0):
        raise DomainError("non-positive pressure")
    q = np.empty_like(w)
    q[RHO] = rho
    q[MOM] = rho * w[VEL]
    q[SIG] = rho * gas.c_v * np.log(p * rho ** (-gas.gamma))
    q[MAG] = w[MAG]
    q[PHI] = w[PHI]
    return q


def conserved_to_primitive(q, gas: GasParams) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    rho, v, _, K = _thermal(q, gas)
    w = np.empty_like(q)
    w[RHO] = rho
    w[VEL] = v
    w[PRE] = rho * K
    w[MAG] = q[MAG]
    w[PHI] = q[PHI]
    return w


def hessian(q, gas: GasParams) -> np.ndarray:
    """Analytic second derivatives of the total energy, shape ``(9, 9, *grid)``."""
    q = np.asarray(q, dtype=float)
    rho, v, S, K = _thermal(q, gas)
    g, cv = gas.gamma, gas.c_v
    T = K / ((g - 1.0) * cv)
    s = S / cv
    phi = q[PHI]
    H = np.zeros((NVAR, NVAR) + np.shape(rho))
    H[RHO, RHO] = T / rho * (((g - 1.0) - s) * (g * cv - S) + S) + np.sum(v * v, axis=0) / rho
    H[RHO, SIG] = H[SIG, RHO] = T / rho * ((g - 1.0) - s)
    H[SIG, SIG] = T / (rho * cv)
    for i in range(3):
        H[RHO, 1 + i] = H[1 + i, RHO] = -v[i] / rho
        H[1 + i, 1 + i] = 1.0 / rho
        H[5 + i, 5 + i] = 1.0
    H[RHO, PHI] = H[PHI, RHO] = phi
    H[PHI, PHI] = rho
    return H


def hessian_quadratic_form(q, dq, gas: GasParams) -> np.ndarray:
    """``dq . H(q) . dq`` evaluated without forming the matrix."""
    rho, v, S, K = _thermal(q, gas)
    g, cv = gas.gamma, gas.c_v
    T = K / ((g - 1.0) * cv)
    s = S / cv
    dr, ds, dphi = dq[RHO], dq[SIG], dq[PHI]
    a = (g - 1.0) - s
    thermal = T / rho * ((a * (g * cv - S) + S) * dr * dr + 2.0 * a * dr * ds + ds * ds / cv)
    dm = dq[MOM] - v * dr
    kinetic = np.sum(dm * dm, axis=0) / rho
    magnetic = np.sum(dq[MAG] * dq[MAG], axis=0)
    cleaning = 2.0 * q[PHI] * dr * dphi + rho * dphi * dphi
    return thermal + kinetic + magnetic + cleaning


def normal_component(vec, normal) -> np.ndarray:
    """``vec . n`` for a 3-vector field with components on axis 0."""
    n = np.asarray(normal, dtype=float)
    return n[0] * vec[0] + n[1] * vec[1] + n[2] * vec[2]


def fast_speed(q, normal, gas: GasParams) -> np.ndarray:
    """Fast magnetosonic speed in the direction of the unit vector ``normal``."""
    rho, _, _, K = _thermal(q, gas)
    a2 = gas.gamma * K
    B = q[MAG]
    b2 = np.sum(B * B, axis=0) / rho
    bn2 = normal_component(B, normal) ** 2 / rho
    tot = a2 + b2
    disc = np.sqrt(np.maximum(tot * tot - 4.0 * a2 * bn2, 0.0))
    return np.sqrt(0.5 * (tot + disc))
