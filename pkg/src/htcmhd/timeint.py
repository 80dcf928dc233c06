"""Classical RK4 with a CFL-limited step and bounded retries."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import BoundaryCondition, FieldState, Mesh, fill_ghosts
from .scheme import SchemeParams, rhs
from .thermo import RHO, DomainError, fast_speed

log = logging.getLogger(__name__)

MAX_HALVINGS = 5
# largest entropy rise per unit mass (in units of c_v) the production may cause in one step
SOURCE_LIMIT = 0.5


class StepFailure(DomainError):
    def __init__(self, message: str, stage: int):
        super().__init__(message)
        self.stage = stage


class SolverError(RuntimeError):
    """Raised when a step keeps failing after all retries; carries the last valid time."""

    def __init__(self, message: str, t_last: float):
        super().__init__(message)
        self.t_last = t_last


@dataclass(frozen=True)
class TimeControls:
    t_end: float
    cfl: float = 0.5
    dt_fixed: Optional[float] = None
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"CFL must lie in (0, 1], got {self.cfl}")
        if self.t_end < 0.0:
            raise ValueError("t_end must be non-negative")
        if self.dt_fixed is not None and not self.dt_fixed > 0.0:
            raise ValueError("fixed time step must be positive")


def max_speeds(q: np.ndarray, mesh: Mesh, params: SchemeParams):
    """Largest |v_a| + c_f (floored by c_h) per mesh axis over the interior."""
    inner = q[(slice(None),) + mesh.interior]
    speeds = []
    for axis in range(mesh.ndim):
        n = mesh.normal(axis)
        s = np.abs(inner[1 + axis] / inner[RHO]) + fast_speed(inner, n, params.gas)
        speeds.append(max(float(np.max(s)), params.c_h))
    return speeds


def cfl_dt(q: np.ndarray, mesh: Mesh, params: SchemeParams, cfl: float,
           t: float = 0.0, t_end: Optional[float] = None) -> float:
    lam = max_speeds(q, mesh, params)
    rate = sum(l / h for l, h in zip(lam, mesh.spacing))
    if not np.isfinite(rate) or rate <= 0.0:
        raise DomainError(f"invalid signal speeds {lam}")
    dt = cfl / rate
    if t_end is not None:
        dt = min(dt, t_end - t)
    return dt


def source_dt(rho: np.ndarray, production: Optional[np.ndarray], params: SchemeParams) -> float:
    """Step bound from the entropy production: ``dt * Pi <= SOURCE_LIMIT * rho * c_v`` in every cell.

    Viscous heating of a cold cell next to a much hotter one is far stiffer
    than the hyperbolic CFL bound suggests; without ε this bound is inactive.
    """
    if production is None:
        return np.inf
    rate = float(np.max(production / rho)) if production.size else 0.0
    if not rate > 0.0:
        return np.inf
    return SOURCE_LIMIT * params.gas.c_v / rate


def _check_stage(u: np.ndarray, stage: int):
    if not (np.all(np.isfinite(u)) and np.all(u[RHO] > 0.0)):
        raise StepFailure(f"inadmissible state after RK stage {stage}", stage)


def rk4_step(u: np.ndarray, dt: float, f: Callable[[np.ndarray], np.ndarray],
             check: Callable[[np.ndarray, int], None] = None, k1: Optional[np.ndarray] = None) -> np.ndarray:
    """One classical RK4 step for ``du/dt = f(u)``.

    ``check(u, stage)`` is called on every intermediate and the final state;
    ``k1`` may pass an already evaluated ``f(u)``.
    """
    if k1 is None:
        k1 = f(u)
    u2 = u + 0.5 * dt * k1
    if check:
        check(u2, 1)
    k2 = f(u2)
    u3 = u + 0.5 * dt * k2
    if check:
        check(u3, 2)
    k3 = f(u3)
    u4 = u + dt * k3
    if check:
        check(u4, 3)
    k4 = f(u4)
    out = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if check:
        check(out, 4)
    return out


class Integrator:
    """Advance a :class:`FieldState` with RK4; ghosts are refilled before every stage."""

    def __init__(self, mesh: Mesh, bc: BoundaryCondition, params: SchemeParams,
                 diagnostics: bool = False):
        self.mesh = mesh
        self.bc = bc
        self.params = params
        self.diagnostics = diagnostics
        self.pi_min = 0.0
        self.pi_ratio_min = 0.0
        self._work = mesh.allocate()

    def _eval(self, inner: np.ndarray):
        q = self._work
        q[(slice(None),) + self.mesh.interior] = inner
        fill_ghosts(q, self.mesh, self.bc)
        res = rhs(q, self.mesh, self.params, diagnostics=self.diagnostics)
        if self.diagnostics:
            self.pi_min = min(self.pi_min, res.pi_min)
            self.pi_ratio_min = min(self.pi_ratio_min, res.pi_ratio_min)
        return res

    def _f(self, inner: np.ndarray) -> np.ndarray:
        return self._eval(inner).dqdt

    def step(self, state: FieldState, dt: float, k1: Optional[np.ndarray] = None) -> FieldState:
        try:
            inner = rk4_step(state.interior.copy(), dt, self._f, _check_stage, k1=k1)
        except StepFailure:
            raise
        except DomainError as exc:
            raise StepFailure(str(exc), -1) from exc
        q = state.q.copy()
        q[(slice(None),) + self.mesh.interior] = inner
        fill_ghosts(q, self.mesh, self.bc)
        return FieldState(q, self.mesh, state.t + dt, state.step + 1)

    def advance(self, state: FieldState, controls: TimeControls,
                callback: Callable[[FieldState, float], None] = None) -> FieldState:
        """Integrate to ``controls.t_end``; ``callback(state, dt)`` runs after each step."""
        fill_ghosts(state.q, self.mesh, self.bc)
        t_end = controls.t_end
        while state.t < t_end * (1.0 - 1e-14) and state.step < controls.max_steps:
            if controls.dt_fixed is not None:
                k1 = None
                dt = min(controls.dt_fixed, t_end - state.t)
            else:
                try:
                    res = self._eval(state.interior)
                except DomainError as exc:
                    raise SolverError(f"right-hand side failed at t={state.t:.6g}: {exc}", state.t) from exc
                k1 = res.dqdt
                dt = cfl_dt(state.q, self.mesh, self.params, controls.cfl, state.t, t_end)
                dt = min(dt, source_dt(state.interior[RHO], res.production, self.params))
            for attempt in range(MAX_HALVINGS + 1):
                try:
                    new = self.step(state, dt, k1=k1 if attempt == 0 else None)
                    break
                except StepFailure as exc:
                    if attempt == MAX_HALVINGS:
                        raise SolverError(f"step failed at t={state.t:.6g}: {exc}", state.t) from exc
                    log.warning("step at t=%.6g failed in stage %d, halving dt", state.t, exc.stage)
                    dt *= 0.5
            state = new
            if callback:
                callback(state, dt)
        return state
