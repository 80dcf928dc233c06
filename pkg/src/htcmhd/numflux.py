"""Face-local numerical fluxes of the thermodynamically compatible scheme.

Every function is vectorised over faces: states have shape ``(9, *faces)``
and ``normal`` is a unit 3-vector shared by all faces of the batch.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .thermo import (
    MAG,
    MOM,
    NVAR,
    PHI,
    RHO,
    SIG,
    DomainError,
    GasParams,
    _density,
    dual_euler,
    dual_to_conserved_euler,
    fast_speed,
    generating_potential_euler,
    hessian,
    hessian_quadratic_form,
    normal_component,
)

EPS_LIMITER = "limiter"
EpsMode = Union[str, float]

_FLAT_TOL = 1e-14
_GLM_TOL = 1e-12
# compatible cleaning speed is kept only while |u~| <= limit * |f_rho| / min(rho_l, rho_r)
GLM_SPEED_LIMIT = 1.0


class QuadratureRule(NamedTuple):
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return len(self.nodes)


def gauss_legendre(n: int = 3) -> QuadratureRule:
    """Gauss-Legendre rule with ``n`` points mapped to [0, 1]."""
    if n not in (1, 2, 3, 4, 5):
        raise ValueError(f"unsupported number of quadrature points: {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w)


def physical_flux_euler(q, normal, gas: GasParams) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    rho = _density(q)
    vn = normal_component(q[MOM], normal) / rho
    p = rho ** gas.gamma * np.exp(q[SIG] / (rho * gas.c_v))
    n = np.asarray(normal, dtype=float).reshape((3,) + (1,) * (q.ndim - 1))
    f = np.zeros_like(q)
    f[RHO] = q[RHO] * vn
    f[MOM] = q[MOM] * vn + p * n
    f[SIG] = q[SIG] * vn
    return f


def _flux_from_euler_block(u, normal, gas: GasParams) -> np.ndarray:
    """Normal Euler flux from ``(rho, m, sigma)``; reuses p = rho K."""
    rho = u[0]
    vn = normal_component(u[1:4], normal) / rho
    p = rho ** gas.gamma * np.exp(u[4] / (rho * gas.c_v))
    n = np.asarray(normal, dtype=float).reshape((3,) + (1,) * (u.ndim - 1))
    out = np.empty_like(u)
    out[0] = u[0] * vn
    out[1:4] = u[1:4] * vn + p * n
    out[4] = u[4] * vn
    return out


def euler_ec_flux(q_l, q_r, normal, rule: QuadratureRule, gas: GasParams,
                  p_l=None, p_r=None) -> np.ndarray:
    """Entropy compatible Euler flux: quadrature of f along a segment in dual variables.

    ``p_l``/``p_r`` may pass precomputed Euler duals to skip their evaluation.
    """
    q_l = np.asarray(q_l, dtype=float)
    q_r = np.asarray(q_r, dtype=float)
    if p_l is None:
        p_l = dual_euler(q_l, gas)
    if p_r is None:
        p_r = dual_euler(q_r, gas)
    dp = p_r - p_l
    acc = np.zeros((5,) + q_l.shape[1:])
    for g, (s, w) in enumerate(zip(rule.nodes, rule.weights)):
        try:
            u = dual_to_conserved_euler(p_l + s * dp, gas)
        except DomainError as exc:
            raise DomainError(f"segment path inadmissible at quadrature node {g} (s={s:.6f}): {exc}") from exc
        acc += w * _flux_from_euler_block(u, normal, gas)
    f = np.zeros_like(q_l)
    f[:5] = acc
    return f


def roe_flux_residual(q_l, q_r, normal, flux, gas: GasParams) -> np.ndarray:
    """``f . (p_r - p_l) - ((v_n L)_r - (v_n L)_l)`` over the Euler block."""
    q_l = np.asarray(q_l, dtype=float)
    q_r = np.asarray(q_r, dtype=float)
    dp = dual_euler(q_r, gas) - dual_euler(q_l, gas)
    vnl = normal_component(q_l[MOM], normal) / q_l[RHO]
    vnr = normal_component(q_r[MOM], normal) / q_r[RHO]
    dvl = vnr * generating_potential_euler(q_r, gas) - vnl * generating_potential_euler(q_l, gas)
    return np.sum(np.asarray(flux)[:5] * dp, axis=0) - dvl


def roe_hessian(q_l, q_r, rule: QuadratureRule, gas: GasParams) -> np.ndarray:
    """Path average of the energy Hessian along the straight segment in ``q``."""
    q_l = np.asarray(q_l, dtype=float)
    dq = np.asarray(q_r, dtype=float) - q_l
    H = np.zeros((NVAR, NVAR) + q_l.shape[1:])
    for s, w in zip(rule.nodes, rule.weights):
        H += w * hessian(q_l + s * dq, gas)
    return H


def roe_hessian_form(q_l, q_r, rule: QuadratureRule, gas: GasParams) -> np.ndarray:
    """``dq . H~ . dq`` with ``dq = q_r - q_l``, without forming ``H~``."""
    q_l = np.asarray(q_l, dtype=float)
    dq = np.asarray(q_r, dtype=float) - q_l
    acc = np.zeros(q_l.shape[1:])
    for s, w in zip(rule.nodes, rule.weights):
        acc += w * hessian_quadratic_form(q_l + s * dq, dq, gas)
    return acc


def minbee(h):
    return np.maximum(0.0, np.minimum(1.0, h))


def limiter_value(rho_stencil) -> np.ndarray:
    """Minbee limiter from the densities of the four cells straddling a face."""
    rm, r0, r1, r2 = (np.asarray(r, dtype=float) for r in rho_stencil)
    den = r1 - r0
    scale = np.maximum(np.maximum(np.abs(rm), np.abs(r0)), np.maximum(np.abs(r1), np.abs(r2)))
    flat = np.abs(den) < _FLAT_TOL * scale
    safe = np.where(flat, 1.0, den)
    h_minus = np.where(flat, 1.0, (r0 - rm) / safe)
    h_plus = np.where(flat, 1.0, (r2 - r1) / safe)
    return np.minimum(minbee(h_minus), minbee(h_plus))


def viscosity_coefficient(rho_stencil, s_max, dx: float, mode: EpsMode = EPS_LIMITER):
    """Face viscosity: limiter-blended Rusanov value, or a configured constant."""
    if mode != EPS_LIMITER:
        eps = float(mode)
        if eps < 0.0:
            raise ValueError("constant viscosity must be non-negative")
        return np.full(np.shape(s_max), eps) if np.ndim(s_max) else eps
    phi_lim = limiter_value(rho_stencil)
    return 0.5 * (1.0 - phi_lim) * dx * np.asarray(s_max)


def max_signal_speed(q_l, q_r, normal, c_h: float, gas: GasParams) -> np.ndarray:
    """Largest |v_n| + c_f of the two states, floored by the cleaning speed."""
    def speed(q):
        q = np.asarray(q, dtype=float)
        return np.abs(normal_component(q[MOM], normal) / _density(q)) + fast_speed(q, normal, gas)

    return np.maximum(np.maximum(speed(q_l), speed(q_r)), c_h)


def dissipative_flux(q_l, q_r, eps, delta: float) -> np.ndarray:
    return eps * (np.asarray(q_r, dtype=float) - np.asarray(q_l, dtype=float)) / delta


def entropy_production(q_l, q_r, eps, delta: float, T_l, H) -> np.ndarray:
    dq = np.asarray(q_r, dtype=float) - np.asarray(q_l, dtype=float)
    form = np.einsum("i...,ij...,j...->...", dq, H, dq)
    return 0.5 * eps * form / (T_l * delta)


def magnetic_stress_flux(B_l, B_r) -> np.ndarray:
    Bm = 0.5 * (np.asarray(B_l, dtype=float) + np.asarray(B_r, dtype=float))
    return -Bm[:, None] * Bm[None, :]


def magnetic_pressure_flux(B_l, B_r) -> np.ndarray:
    B_l = np.asarray(B_l, dtype=float)
    B_r = np.asarray(B_r, dtype=float)
    return 0.5 * (0.5 * np.sum(B_r * B_r, axis=0) + 0.5 * np.sum(B_l * B_l, axis=0))


def b_face_products(q_l, q_r):
    """Return ``((B_i v_k)^lr, (v_i B_k)^lr, v~_i^lr)``; matrices are indexed [i, k]."""
    q_l = np.asarray(q_l, dtype=float)
    q_r = np.asarray(q_r, dtype=float)
    v_l = q_l[MOM] / _density(q_l)
    v_r = q_r[MOM] / _density(q_r)
    B_l, B_r = q_l[MAG], q_r[MAG]
    Bm = 0.5 * (B_l + B_r)
    vm = 0.5 * (v_l + v_r)
    bv = Bm[:, None] * vm[None, :]
    vb = 0.5 * (v_l[:, None] * B_l[None, :] + v_r[:, None] * B_r[None, :])
    return bv, vb, vm


def glm_advection_speed(q_l, q_r, f_rho_n, normal, limit: Optional[float] = GLM_SPEED_LIMIT) -> np.ndarray:
    """Advection speed of the cleaning scalar that keeps the E4 transport compatible.

    After cancelling the phi jump the speed is f_rho (phi_l + phi_r) / (rho_l phi_l + rho_r phi_r).
    For phi of one sign this is a mediant bounded by |f_rho| / min(rho); with
    opposite signs and unequal densities the denominator can vanish on its
    own. The average normal velocity replaces the formula when the denominator
    is negligible or, unless ``limit`` is None, when the speed leaves
    ``limit`` times the mediant bound.
    """
    q_l = np.asarray(q_l, dtype=float)
    q_r = np.asarray(q_r, dtype=float)
    rho_l, rho_r = q_l[RHO], q_r[RHO]
    phi_l, phi_r = q_l[PHI], q_r[PHI]
    num = f_rho_n * 0.5 * (phi_r * phi_r - phi_l * phi_l)
    den = 0.5 * (rho_l * phi_l + rho_r * phi_r) * (phi_r - phi_l)
    fallback = np.abs(den) < _GLM_TOL * np.maximum(1.0, np.abs(num))
    v_avg = 0.5 * (normal_component(q_l[MOM], normal) / rho_l + normal_component(q_r[MOM], normal) / rho_r)
    safe = np.where(fallback, 1.0, den)
    u = np.where(fallback, v_avg, num / safe)
    if limit is not None:
        bound = limit * np.abs(f_rho_n) / np.minimum(rho_l, rho_r)
        u = np.where(np.abs(u) > bound * (1.0 + 1e-12), v_avg, u)
    return u


def glm_phi_flux(q_l, q_r):
    """Density-weighted face value of phi and the arithmetic face density."""
    q_l = np.asarray(q_l, dtype=float)
    q_r = np.asarray(q_r, dtype=float)
    rho_l, rho_r = q_l[RHO], q_r[RHO]
    phi_face = (rho_l * q_l[PHI] + rho_r * q_r[PHI]) / (rho_l + rho_r)
    return phi_face, 0.5 * (rho_l + rho_r)


@dataclass
class FaceContribution:
    """Face values shared by the two cells adjacent to a face.

    ``hessian_form`` stores ``dq . H~ . dq`` rather than ``H~`` itself; that is
    all the entropy production needs. ``pi_left``/``pi_right`` are the
    one-sided productions using the temperature of each receiving cell.
    """

    euler_flux: np.ndarray
    stress: np.ndarray
    mag_pressure: np.ndarray
    bv: np.ndarray
    vb: np.ndarray
    v_face: np.ndarray
    u_glm: np.ndarray
    phi_face: np.ndarray
    rho_face: np.ndarray
    diss_flux: np.ndarray
    eps: np.ndarray
    hessian_form: np.ndarray
    pi_left: np.ndarray
    pi_right: np.ndarray


def face_contribution(q_l, q_r, normal, eps, delta: float, rule: QuadratureRule,
                      gas: GasParams, p_l=None, p_r=None, T_l=None, T_r=None,
                      glm_limit: Optional[float] = GLM_SPEED_LIMIT) -> FaceContribution:
    """Build every face value once; both neighbours consume the same bundle."""
    q_l = np.asarray(q_l, dtype=float)
    q_r = np.asarray(q_r, dtype=float)
    if p_l is None:
        p_l = dual_euler(q_l, gas)
    if p_r is None:
        p_r = dual_euler(q_r, gas)
    f = euler_ec_flux(q_l, q_r, normal, rule, gas, p_l=p_l, p_r=p_r)
    bv, vb, vm = b_face_products(q_l, q_r)
    f_rho_n = f[RHO]
    u = glm_advection_speed(q_l, q_r, f_rho_n, normal, glm_limit)
    phi_face, rho_face = glm_phi_flux(q_l, q_r)
    eps = np.broadcast_to(np.asarray(eps, dtype=float), q_l.shape[1:])
    g = dissipative_flux(q_l, q_r, eps, delta)
    if np.any(eps > 0.0):
        form = roe_hessian_form(q_l, q_r, rule, gas)
        pi_l = 0.5 * eps * form / ((p_l[4] if T_l is None else T_l) * delta)
        pi_r = 0.5 * eps * form / ((p_r[4] if T_r is None else T_r) * delta)
    else:
        form = np.zeros(q_l.shape[1:])
        pi_l = pi_r = form
    return FaceContribution(
        euler_flux=f,
        stress=magnetic_stress_flux(q_l[MAG], q_r[MAG]),
        mag_pressure=magnetic_pressure_flux(q_l[MAG], q_r[MAG]),
        bv=bv,
        vb=vb,
        v_face=vm,
        u_glm=u,
        phi_face=phi_face,
        rho_face=rho_face,
        diss_flux=g,
        eps=eps,
        hessian_form=form,
        pi_left=pi_l,
        pi_right=pi_r,
    )
