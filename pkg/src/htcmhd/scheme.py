"""Semi-discrete right-hand side of the thermodynamically compatible MHD scheme.

Each face is visited once. Its shared values (:class:`FaceContribution`)
produce a one-sided fluctuation for each of the two neighbouring cells, so
that the energy fluctuations of both sides add up to a difference of cell
energy fluxes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from . import numflux
from .grid import Mesh
from .numflux import EPS_LIMITER, EpsMode, FaceContribution, QuadratureRule
from .thermo import (
    MAG,
    MOM,
    PHI,
    RHO,
    SIG,
    DomainError,
    GasParams,
    dual,
    dual_euler,
    energy,
    normal_component,
)


@dataclass(frozen=True)
class SchemeParams:
    gas: GasParams = GasParams()
    c_h: float = 2.0
    eps: EpsMode = EPS_LIMITER
    n_gp: int = 3
    glm_limit: Optional[float] = numflux.GLM_SPEED_LIMIT

    def __post_init__(self):
        if self.c_h < 0.0:
            raise ValueError("cleaning speed must be non-negative")
        if self.glm_limit is not None and not self.glm_limit >= 1.0:
            raise ValueError("cleaning speed limit must be >= 1 or None")
        if self.eps != EPS_LIMITER and float(self.eps) < 0.0:
            raise ValueError("viscosity must be non-negative")

    @cached_property
    def rule(self) -> QuadratureRule:
        return numflux.gauss_legendre(self.n_gp)


class RhsOutput(NamedTuple):
    """``production`` is the assembled entropy production per interior cell."""
    dqdt: np.ndarray
    pi_min: float = 0.0
    pi_ratio_min: float = 0.0
    production: Optional[np.ndarray] = None


def _dot_n(mat, n):
    """``sum_k mat[i, k] n_k`` for a (3, 3, ...) array."""
    return mat[:, 0] * n[0] + mat[:, 1] * n[1] + mat[:, 2] * n[2]


def _bcast(n, ndim):
    return np.asarray(n, dtype=float).reshape((3,) + (1,) * ndim)


def inviscid_fluctuations(q_l, q_r, normal, fc: FaceContribution, c_h: float, gas: GasParams,
                          f_l=None, f_r=None):
    """Non-dissipative parts of the updates of the left and right cell of a face."""
    n = np.asarray(normal, dtype=float)
    nb = _bcast(n, q_l.ndim - 1)
    if f_l is None:
        f_l = numflux.physical_flux_euler(q_l, n, gas)
    if f_r is None:
        f_r = numflux.physical_flux_euler(q_r, n, gas)
    f = fc.euler_flux
    left = -(f - f_l)
    right = -(f_r - f)

    B_l, B_r = q_l[MAG], q_r[MAG]
    v_l = q_l[MOM] / q_l[RHO]
    v_r = q_r[MOM] / q_r[RHO]
    mu_l = 0.5 * np.sum(B_l * B_l, axis=0)
    mu_r = 0.5 * np.sum(B_r * B_r, axis=0)
    Rn = _dot_n(fc.stress, n)
    Bn_l = normal_component(B_l, n)
    Bn_r = normal_component(B_r, n)
    # R^l . n = -B^l (B^l . n)
    left[MOM] -= (fc.mag_pressure - mu_l) * nb + (Rn + B_l * Bn_l)
    right[MOM] += (fc.mag_pressure - mu_r) * nb + (Rn + B_r * Bn_r)

    bvn = _dot_n(fc.bv, n)
    vbn = _dot_n(fc.vb, n)
    vn_l = normal_component(v_l, n)
    vn_r = normal_component(v_r, n)
    dBn = Bn_r - Bn_l
    nonc = 0.5 * fc.v_face * dBn
    left[MAG] -= (bvn - B_l * vn_l) - (vbn - v_l * Bn_l) + nonc
    right[MAG] += (bvn - B_r * vn_r) - (vbn - v_r * Bn_r) - nonc
    left[MAG] -= c_h * (fc.phi_face - q_l[PHI]) * nb
    right[MAG] += c_h * (fc.phi_face - q_r[PHI]) * nb

    phi_term = -0.5 * fc.u_glm * (q_r[PHI] - q_l[PHI]) - c_h / fc.rho_face * 0.5 * dBn
    left[PHI] += phi_term
    right[PHI] += phi_term
    return left, right


def face_assemble(q_l, q_r, normal, delta: float, params: SchemeParams, eps=0.0,
                  p_l=None, p_r=None, f_l=None, f_r=None):
    """Contributions of one face (or a batch of faces) to its two cells.

    Returns ``(left, right, fc)``; the contributions still have to be scaled
    by face area over cell volume.
    """
    q_l = np.asarray(q_l, dtype=float)
    q_r = np.asarray(q_r, dtype=float)
    fc = numflux.face_contribution(q_l, q_r, normal, eps, delta, params.rule, params.gas,
                                   p_l=p_l, p_r=p_r, glm_limit=params.glm_limit)
    left, right = inviscid_fluctuations(q_l, q_r, normal, fc, params.c_h, params.gas, f_l=f_l, f_r=f_r)
    left += fc.diss_flux
    right -= fc.diss_flux
    left[SIG] += fc.pi_left
    right[SIG] += fc.pi_right
    return left, right, fc


class EnergyFluctuation(NamedTuple):
    D_left: np.ndarray
    D_right: np.ndarray
    F_left: np.ndarray
    F_right: np.ndarray

    @property
    def residual(self):
        return self.D_left + self.D_right - (self.F_right - self.F_left)


def energy_flux(q, normal, c_h: float, gas: GasParams) -> np.ndarray:
    """Cell total energy flux in direction ``normal`` (Euler, magnetic and cleaning parts)."""
    q = np.asarray(q, dtype=float)
    n = np.asarray(normal, dtype=float)
    parts = energy(q, gas)
    rho = q[RHO]
    v = q[MOM] / rho
    B = q[MAG]
    p = (gas.gamma - 1.0) * parts.E1
    vn = normal_component(v, n)
    Bn = normal_component(B, n)
    mu = parts.E3
    vR_n = -normal_component(v, B) * Bn
    F_G = vn * (parts.E1 + parts.E2 + p)
    return F_G + vn * parts.E3 + vn * parts.E4 + vR_n + vn * mu + c_h * q[PHI] * Bn


def energy_fluctuation(q_l, q_r, normal, fc: FaceContribution, c_h: float, gas: GasParams) -> EnergyFluctuation:
    """Energy fluctuations of both sides (dual variables dotted with the inviscid updates)."""
    q_l = np.asarray(q_l, dtype=float)
    q_r = np.asarray(q_r, dtype=float)
    left, right = inviscid_fluctuations(q_l, q_r, normal, fc, c_h, gas)
    D_l = -np.sum(dual(q_l, gas) * left, axis=0)
    D_r = -np.sum(dual(q_r, gas) * right, axis=0)
    return EnergyFluctuation(D_l, D_r, energy_flux(q_l, normal, c_h, gas), energy_flux(q_r, normal, c_h, gas))


def _check_admissible(q: np.ndarray, mesh: Mesh):
    inner = q[(slice(None),) + mesh.interior]
    ok = np.all(np.isfinite(inner), axis=0) & (inner[RHO] > 0.0)
    if not np.all(ok):
        idx = tuple(int(i) for i in np.argwhere(~ok)[0])
        raise DomainError(f"inadmissible state in interior cell {idx}: rho={inner[(RHO,) + idx]:.6g}")


def _axis_slices(mesh: Mesh, axis: int, lo: int, hi: int):
    """Padded-array index selecting ``lo:hi`` along ``axis`` and the interior elsewhere."""
    sl = list(mesh.interior)
    sl[axis] = slice(lo, hi)
    return (slice(None),) + tuple(sl)


def rhs(q: np.ndarray, mesh: Mesh, params: SchemeParams, diagnostics: bool = False) -> RhsOutput:
    """Time derivative of the interior cell averages; ghosts of ``q`` must be filled."""
    _check_admissible(q, mesh)
    gas = params.gas
    g = mesh.ghost
    vol = mesh.cell_volume
    pe = dual_euler(q, gas)
    out = np.zeros((q.shape[0],) + tuple(mesh.cells))
    prod = np.zeros(tuple(mesh.cells))
    pi_min = np.inf
    ratio_min = np.inf

    for axis in range(mesh.ndim):
        n_cells = mesh.cells[axis]
        normal = mesh.normal(axis)
        delta = mesh.delta(axis)
        sl_l = _axis_slices(mesh, axis, g - 1, g + n_cells)
        sl_r = _axis_slices(mesh, axis, g, g + n_cells + 1)
        q_l, q_r = q[sl_l], q[sl_r]
        if params.eps == EPS_LIMITER:
            stencil = [q[_axis_slices(mesh, axis, g - 2 + k, g + n_cells - 1 + k)][RHO] for k in range(4)]
            s_max = numflux.max_signal_speed(q_l, q_r, normal, params.c_h, gas)
            eps = numflux.viscosity_coefficient(stencil, s_max, mesh.spacing[axis])
        else:
            eps = float(params.eps)
        left, right, fc = face_assemble(q_l, q_r, normal, delta, params, eps,
                                        p_l=pe[sl_l], p_r=pe[sl_r])
        scale = mesh.face_area(axis) / vol
        ax = axis + 1
        out += scale * (np.take(left, np.arange(1, n_cells + 1), axis=ax)
                        + np.take(right, np.arange(0, n_cells), axis=ax))
        if np.any(fc.eps):
            prod += scale * (np.take(fc.pi_left, np.arange(1, n_cells + 1), axis=axis)
                             + np.take(fc.pi_right, np.arange(0, n_cells), axis=axis))

        if diagnostics:
            pi_min = min(pi_min, float(np.min(fc.pi_left)), float(np.min(fc.pi_right)))
            dq = q_r - q_l
            norm2 = np.sum(dq * dq, axis=0)
            for pi, T in ((fc.pi_left, pe[sl_l][4]), (fc.pi_right, pe[sl_r][4])):
                floor = fc.eps * norm2 / (T * delta)
                mask = floor > 0.0
                if np.any(mask):
                    ratio_min = min(ratio_min, float(np.min(pi[mask] / floor[mask])))
    if not np.isfinite(pi_min):
        pi_min = 0.0
    if not np.isfinite(ratio_min):
        ratio_min = 0.0
    return RhsOutput(out, pi_min, ratio_min, prod)
