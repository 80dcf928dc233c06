"""Benchmark initial data: MHD vortex, Riemann problems, Orszag-Tang, rotor, blast."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .grid import PERIODIC, TRANSMISSIVE
from .numflux import EPS_LIMITER, EpsMode
from .thermo import MAG, PHI, PRE, RHO, VEL

SQRT4PI = np.sqrt(4.0 * np.pi)


def _primitive(shape, rho, v, p, B, phi=0.0) -> np.ndarray:
    w = np.empty((9,) + shape)
    w[RHO] = rho
    for i in range(3):
        w[1 + i] = v[i]
        w[5 + i] = B[i]
    w[PRE] = p
    w[PHI] = phi
    return w


def vortex(x, y) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    r2 = (x - 5.0) ** 2 + (y - 5.0) ** 2
    amp = np.exp(0.5 * (1.0 - r2))
    vx, vy = amp * (5.0 - y), amp * (x - 5.0)
    p = 0.5 * np.e - 0.5 * r2 * np.exp(-(r2 - 1.0))
    return _primitive(x.shape, 1.0, (vx, vy, 0.0), p, (vx, vy, 0.0))


def vortex_exact(x, y, t=0.0) -> np.ndarray:
    """The vortex is a stationary solution."""
    return vortex(x, y)


# (rho, u, v, w, p, Bx, By, Bz) left/right, discontinuity position, final time
RIEMANN_TABLE = {
    1: ((1.0, 0.0, 0.0, 0.0, 1.0, 0.75, 1.0, 0.0),
        (0.125, 0.0, 0.0, 0.0, 0.1, 0.75, -1.0, 0.0), 0.0, 0.1),
    2: ((1.08, 1.2, 0.01, 0.5, 0.95, 2.0 / SQRT4PI, 3.6 / SQRT4PI, 2.0 / SQRT4PI),
        (0.9891, -0.0131, 0.0269, 0.010037, 0.97159, 2.0 / SQRT4PI, 4.0244 / SQRT4PI, 2.0026 / SQRT4PI),
        -0.1, 0.2),
    3: ((1.7, 0.0, 0.0, 0.0, 1.7, 1.1, 1.0, 0.0),
        (0.2, 0.0, 0.0, -1.49689, 0.2, 1.1, 2.7859 / SQRT4PI, 2.1921 / SQRT4PI), -0.1, 0.15),
    4: ((1.0, 0.0, 0.0, 0.0, 1.0, 1.3, 1.0, 0.0),
        (0.4, 0.0, 0.0, 0.0, 0.4, 1.3, -1.0, 0.0), 0.0, 0.16),
}


def riemann(case_id: int, x) -> np.ndarray:
    if case_id not in RIEMANN_TABLE:
        raise ValueError(f"unknown Riemann problem {case_id}")
    left, right, x_d, _ = RIEMANN_TABLE[case_id]
    x = np.asarray(x, dtype=float)
    is_left = x < x_d
    w = np.empty((9,) + x.shape)
    for k, (a, b) in enumerate(zip(left[:5], right[:5])):
        w[k] = np.where(is_left, a, b)
    for k, (a, b) in enumerate(zip(left[5:], right[5:])):
        w[5 + k] = np.where(is_left, a, b)
    w[PHI] = 0.0
    return w


def orszag_tang(x, y, gamma: float = 5.0 / 3.0) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return _primitive(x.shape, gamma ** 2, (-np.sin(y), np.sin(x), 0.0), gamma,
                      (-np.sin(y), np.sin(2.0 * x), 0.0))


def rotor(x, y) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    inside = np.hypot(x, y) <= 0.1
    omega = 10.0
    # v = omega e_z x (x, y, 0) = omega (-y, x, 0)
    vx = np.where(inside, -omega * y, 0.0)
    vy = np.where(inside, omega * x, 0.0)
    rho = np.where(inside, 10.0, 1.0)
    return _primitive(x.shape, rho, (vx, vy, 0.0), 1.0, (2.5 / SQRT4PI, 0.0, 0.0))


def blast(x, y) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    p = np.where(np.hypot(x, y) < 0.1, 1000.0, 0.1)
    return _primitive(x.shape, 1.0, (0.0, 0.0, 0.0), p, (100.0 / SQRT4PI, 0.0, 0.0))


@dataclass(frozen=True)
class CaseSpec:
    name: str
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    cells: Tuple[int, ...]
    gamma: float
    eps: EpsMode
    bc: str
    t_end: float
    initial: Callable[..., np.ndarray]
    c_h: float = 2.0
    exact: Optional[Callable[..., np.ndarray]] = None

    @property
    def ndim(self) -> int:
        return len(self.cells)


def _riemann_case(k: int) -> CaseSpec:
    return CaseSpec(f"rp{k}", (-0.5,), (0.5,), (1000,), 5.0 / 3.0, EPS_LIMITER, TRANSMISSIVE,
                    RIEMANN_TABLE[k][3], lambda x, _k=k: riemann(_k, x))


CASES: Dict[str, CaseSpec] = {
    "vortex": CaseSpec("vortex", (0.0, 0.0), (10.0, 10.0), (64, 64), 5.0 / 3.0, 0.0, PERIODIC, 0.25,
                       vortex, exact=vortex_exact),
    **{f"rp{k}": _riemann_case(k) for k in RIEMANN_TABLE},
    "orszag_tang": CaseSpec("orszag_tang", (0.0, 0.0), (2 * np.pi, 2 * np.pi), (128, 128), 5.0 / 3.0, 2e-3,
                            PERIODIC, 2.0, orszag_tang),
    "rotor": CaseSpec("rotor", (-0.5, -0.5), (0.5, 0.5), (200, 200), 1.4, 1e-4, TRANSMISSIVE, 0.25, rotor),
    "blast": CaseSpec("blast", (-0.5, -0.5), (0.5, 0.5), (200, 200), 1.4, 5e-3, TRANSMISSIVE, 0.01, blast),
}


def get_case(name: str) -> CaseSpec:
    try:
        return CASES[name]
    except KeyError:
        raise KeyError(f"unknown case {name!r}; choose from {sorted(CASES)}") from None
