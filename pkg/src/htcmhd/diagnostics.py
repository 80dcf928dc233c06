"""Conservation, entropy and divergence monitors; error norms and observed orders."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Sequence

import numpy as np

from .grid import BoundaryCondition, Mesh, fill_ghosts
from .scheme import SchemeParams, rhs
from .thermo import MAG, RHO, SIG, GasParams, dual, energy


class Integrals(NamedTuple):
    mass: float
    energy: float
    entropy: float


def integrals(q: np.ndarray, mesh: Mesh, gas: GasParams) -> Integrals:
    """Volume integrals of mass, total energy and entropy.

    Sums are exactly rounded (``math.fsum``) so that drifts near round-off
    are not masked by summation error.
    """
    inner = q[(slice(None),) + mesh.interior]
    vol = mesh.cell_volume
    return Integrals(
        math.fsum(inner[RHO].ravel()) * vol,
        math.fsum(energy(inner, gas).total.ravel()) * vol,
        math.fsum(inner[SIG].ravel()) * vol,
    )


def divB_error(q: np.ndarray, mesh: Mesh) -> float:
    """L-infinity norm of the central-difference divergence of B; ghosts must be filled."""
    g = mesh.ghost
    div = np.zeros(tuple(mesh.cells))
    for axis in range(mesh.ndim):
        n = mesh.cells[axis]
        B = np.moveaxis(q[5 + axis], axis, 0)
        d = (B[g + 1:g + n + 1] - B[g - 1:g + n - 1]) / (2.0 * mesh.spacing[axis])
        d = np.moveaxis(d, 0, axis)
        other = list(mesh.interior)
        other[axis] = slice(None)
        div += d[tuple(other)]
    return float(np.max(np.abs(div)))


def l2_error(q: np.ndarray, exact: np.ndarray, mesh: Mesh, component: int) -> float:
    """``sqrt(sum |cell| (q - q_exact)^2)`` for one conserved component.

    ``exact`` holds conserved values sampled at the interior cell centres.
    """
    inner = q[(slice(None),) + mesh.interior] if q.shape[1:] != exact.shape[1:] else q
    diff = inner[component] - exact[component]
    return float(np.sqrt(np.sum(diff * diff) * mesh.cell_volume))


def observed_order(errors: Sequence[float], factor: float = 2.0) -> List[float]:
    return [math.log(e0 / e1) / math.log(factor) for e0, e1 in zip(errors[:-1], errors[1:])]


def energy_rate(q: np.ndarray, mesh: Mesh, bc: BoundaryCondition, params: SchemeParams) -> float:
    """Semi-discrete ``sum |cell| p . dq/dt``; zero up to quadrature error on periodic grids."""
    fill_ghosts(q, mesh, bc)
    dqdt = rhs(q, mesh, params).dqdt
    inner = q[(slice(None),) + mesh.interior]
    return float(np.sum(dual(inner, params.gas) * dqdt) * mesh.cell_volume)


@dataclass
class TimeSeries:
    t: List[float] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)
    entropy: List[float] = field(default_factory=list)
    divB: List[float] = field(default_factory=list)
    dt: List[float] = field(default_factory=list)

    COLUMNS = ("t", "mass", "energy", "entropy", "divB_linf", "dt")

    def record(self, t: float, q: np.ndarray, mesh: Mesh, gas: GasParams, dt: float = 0.0):
        if self.t and not t > self.t[-1]:
            raise ValueError("time series samples must be strictly increasing in t")
        m, e, s = integrals(q, mesh, gas)
        self.t.append(t)
        self.mass.append(m)
        self.energy.append(e)
        self.entropy.append(s)
        self.divB.append(divB_error(q, mesh))
        self.dt.append(dt)
        return self.row(-1)

    def row(self, i: int):
        return (self.t[i], self.mass[i], self.energy[i], self.entropy[i], self.divB[i], self.dt[i])

    def __len__(self):
        return len(self.t)


def max_entropy_decrease_rate(series: TimeSeries) -> float:
    """Worst relative entropy decrease per unit time between consecutive samples (<= 0 is good)."""
    worst = 0.0
    S = np.asarray(series.entropy)
    t = np.asarray(series.t)
    ref = max(np.max(np.abs(S)), 1e-300) if len(S) else 1.0
    for i in range(1, len(S)):
        rate = (S[i - 1] - S[i]) / ref / (t[i] - t[i - 1])
        worst = max(worst, rate)
    return worst
