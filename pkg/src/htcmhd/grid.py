"""Uniform Cartesian meshes in one or two dimensions with ghost layers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .thermo import NVAR

PERIODIC = "periodic"
TRANSMISSIVE = "transmissive"
_KINDS = (PERIODIC, TRANSMISSIVE)


@dataclass(frozen=True)
class Mesh:
    """Axis-aligned uniform mesh; the ghost width covers the 4-cell limiter stencil."""

    cells: Tuple[int, ...]
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    ghost: int = 2

    def __post_init__(self):
        if len(self.cells) not in (1, 2):
            raise ValueError("only 1D and 2D meshes are supported")
        if not (len(self.cells) == len(self.lower) == len(self.upper)):
            raise ValueError("cells, lower and upper must have equal length")
        if any(int(n) < 1 for n in self.cells):
            raise ValueError(f"cell counts must be positive, got {self.cells}")
        if any(not hi > lo for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("upper bounds must exceed lower bounds")
        if self.ghost < 2:
            raise ValueError("ghost width must be at least 2")

    @property
    def ndim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple((hi - lo) / n for lo, hi, n in zip(self.lower, self.upper, self.cells))

    @property
    def padded_shape(self) -> Tuple[int, ...]:
        return tuple(n + 2 * self.ghost for n in self.cells)

    @property
    def interior(self) -> Tuple[slice, ...]:
        g = self.ghost
        return tuple(slice(g, g + n) for n in self.cells)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def face_area(self, axis: int) -> float:
        h = self.spacing
        return float(np.prod([h[a] for a in range(self.ndim) if a != axis])) if self.ndim > 1 else 1.0

    def delta(self, axis: int) -> float:
        """Distance between the centres of the two cells sharing an ``axis`` face."""
        return self.spacing[axis]

    def normal(self, axis: int) -> np.ndarray:
        n = np.zeros(3)
        n[axis] = 1.0
        return n

    def centers(self, axis: int) -> np.ndarray:
        lo, h, n = self.lower[axis], self.spacing[axis], self.cells[axis]
        return lo + (np.arange(n) + 0.5) * h

    def coordinates(self):
        """Cell-centre coordinate arrays of the interior, ``indexing='ij'``."""
        return np.meshgrid(*(self.centers(a) for a in range(self.ndim)), indexing="ij")

    def allocate(self) -> np.ndarray:
        return np.zeros((NVAR,) + self.padded_shape)


def build_mesh(cells: Sequence[int], lower: Sequence[float], upper: Sequence[float], ghost: int = 2) -> Mesh:
    return Mesh(tuple(int(n) for n in cells), tuple(float(x) for x in lower),
                tuple(float(x) for x in upper), ghost)


@dataclass(frozen=True)
class BoundaryCondition:
    """Kind per axis and side: ``kinds[axis] = (low, high)``."""

    kinds: Tuple[Tuple[str, str], ...]

    def __post_init__(self):
        for low, high in self.kinds:
            if low not in _KINDS or high not in _KINDS:
                raise ValueError(f"unknown boundary kind in {self.kinds}")
            if (low == PERIODIC) != (high == PERIODIC):
                raise ValueError("periodic boundaries must be paired on opposite sides")

    @classmethod
    def uniform(cls, kind: str, ndim: int) -> "BoundaryCondition":
        return cls(tuple((kind, kind) for _ in range(ndim)))


@dataclass
class FieldState:
    """Conserved variables on the padded grid plus the simulation time."""

    q: np.ndarray
    mesh: Mesh
    t: float = 0.0
    step: int = field(default=0)

    @property
    def interior(self) -> np.ndarray:
        return self.q[(slice(None),) + self.mesh.interior]

    def copy(self) -> "FieldState":
        return FieldState(self.q.copy(), self.mesh, self.t, self.step)


def fill_ghosts(q: np.ndarray, mesh: Mesh, bc: BoundaryCondition) -> np.ndarray:
    """Populate ghost layers in place, sweeping x then y so corners are filled too."""
    g = mesh.ghost
    for axis, (low, high) in enumerate(bc.kinds):
        n = mesh.cells[axis]
        ax = axis + 1
        view = np.moveaxis(q, ax, 0)
        if low == PERIODIC:
            view[:g] = view[n:n + g]
            view[n + g:] = view[g:2 * g]
        else:
            view[:g] = view[g]
            view[n + g:] = view[n + g - 1]
    return q
