"""Run driver: configuration, case runs, snapshot and time-series output, convergence studies."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cases import CaseSpec, get_case
from .diagnostics import TimeSeries, l2_error, observed_order
from .grid import BoundaryCondition, FieldState, Mesh, build_mesh
from .numflux import EPS_LIMITER, GLM_SPEED_LIMIT
from .scheme import SchemeParams
from .thermo import FIELD_NAMES, NVAR, RHO, GasParams, conserved_to_primitive, primitive_to_conserved
from .timeint import Integrator, SolverError, TimeControls

log = logging.getLogger(__name__)

DERIVED_NAMES = ("v1", "v2", "v3", "p")
SNAPSHOT_MAGIC = "# htcmhd snapshot v1"


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run; ``None`` fields take the case defaults."""
    case: str = "vortex"
    nx: Optional[int] = None
    ny: Optional[int] = None
    gamma: Optional[float] = None
    c_v: float = 1.0
    cfl: float = 0.5
    c_h: Optional[float] = None
    eps: Optional[str] = None
    n_gp: int = 3
    glm_limit: Optional[float] = GLM_SPEED_LIMIT
    t_end: Optional[float] = None
    dt: Optional[float] = None
    out: Optional[str] = None
    snapshot_every: int = 0
    series_every: int = 1
    seed: int = 0

    def __post_init__(self):
        get_case(self.case)
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if n is not None and n < 1:
                raise ValueError(f"{name} must be a positive cell count")
        if self.gamma is not None and not self.gamma > 1.0:
            raise ValueError("gamma must exceed 1")
        if not self.c_v > 0.0:
            raise ValueError("c_v must be positive")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("CFL must lie in (0, 1]")
        if self.c_h is not None and self.c_h < 0.0:
            raise ValueError("c_h must be non-negative")
        if self.eps is not None and self.eps != EPS_LIMITER:
            if float(self.eps) < 0.0:
                raise ValueError("eps must be 'limiter' or a non-negative number")
        if self.n_gp not in (1, 2, 3, 4, 5):
            raise ValueError("n_gp must be between 1 and 5")
        if self.t_end is not None and self.t_end < 0.0:
            raise ValueError("t_end must be non-negative")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.snapshot_every < 0 or self.series_every < 1:
            raise ValueError("snapshot cadence must be >= 0 and series cadence >= 1")

    def resolved(self) -> "RunConfig":
        """Copy with every case default filled in, so the manifest has no hidden values."""
        spec = get_case(self.case)
        cells = list(spec.cells)
        if self.nx is not None:
            cells[0] = self.nx
        if len(cells) > 1 and self.ny is not None:
            cells[1] = self.ny
        eps = self.eps if self.eps is not None else spec.eps
        return dataclasses.replace(
            self,
            nx=cells[0],
            ny=cells[1] if len(cells) > 1 else None,
            gamma=spec.gamma if self.gamma is None else self.gamma,
            c_h=spec.c_h if self.c_h is None else self.c_h,
            eps=eps if eps == EPS_LIMITER else repr(float(eps)),
            t_end=spec.t_end if self.t_end is None else self.t_end,
        )

    def cells(self) -> Tuple[int, ...]:
        r = self.resolved()
        return (r.nx,) if r.ny is None else (r.nx, r.ny)

    def scheme(self) -> SchemeParams:
        r = self.resolved()
        eps = EPS_LIMITER if r.eps == EPS_LIMITER else float(r.eps)
        return SchemeParams(GasParams(r.gamma, r.c_v), r.c_h, eps, r.n_gp, r.glm_limit)


def load_config(path) -> RunConfig:
    """Read a JSON key/value document mirroring :class:`RunConfig`."""
    data = json.loads(Path(path).read_text())
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "eps" in data and data["eps"] is not None:
        data["eps"] = str(data["eps"])
    return RunConfig(**data)


def initial_state(spec: CaseSpec, mesh: Mesh, gas: GasParams) -> FieldState:
    q = mesh.allocate()
    q[(slice(None),) + mesh.interior] = primitive_to_conserved(spec.initial(*mesh.coordinates()), gas)
    return FieldState(q, mesh)


# ---- snapshots -------------------------------------------------------------

def write_snapshot(path, state: FieldState, gas: GasParams):
    """Plain-text snapshot: ``#`` header lines, then one CSV row per cell with x varying fastest."""
    mesh = state.mesh
    inner = state.interior
    w = conserved_to_primitive(inner, gas)
    coords = mesh.coordinates()
    cols = [c.ravel(order="F") for c in coords]
    cols += [inner[k].ravel(order="F") for k in range(NVAR)]
    cols += [w[1 + k].ravel(order="F") for k in range(3)] + [w[4].ravel(order="F")]
    coord_names = ("x", "y")[:mesh.ndim]
    header = [
        SNAPSHOT_MAGIC,
        f"# time {state.t!r}",
        f"# step {state.step}",
        "# cells " + " ".join(str(n) for n in mesh.cells),
        "# lower " + " ".join(repr(float(v)) for v in mesh.lower),
        "# upper " + " ".join(repr(float(v)) for v in mesh.upper),
        "# columns " + ",".join(coord_names + FIELD_NAMES + DERIVED_NAMES),
    ]
    data = np.column_stack(cols)
    with open(path, "w") as fh:
        fh.write("\n".join(header) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def read_snapshot(path):
    """Return ``(q, meta)``; ``q`` has shape ``(9, *cells)``, bitwise equal to what was written."""
    meta: Dict[str, object] = {}
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if first != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: not a snapshot file")
        while True:
            pos = fh.tell()
            line = fh.readline()
            if not line.startswith("#"):
                fh.seek(pos)
                break
            key, _, value = line[1:].strip().partition(" ")
            meta[key] = value
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    cells = tuple(int(v) for v in str(meta["cells"]).split())
    meta["cells"] = cells
    meta["time"] = float(meta["time"])
    meta["step"] = int(meta["step"])
    meta["lower"] = tuple(float(v) for v in str(meta["lower"]).split())
    meta["upper"] = tuple(float(v) for v in str(meta["upper"]).split())
    meta["columns"] = str(meta["columns"]).split(",")
    ndim = len(cells)
    q = np.empty((NVAR,) + cells)
    for k in range(NVAR):
        q[k] = data[:, ndim + k].reshape(cells, order="F")
    return q, meta


# ---- runs ------------------------------------------------------------------

@dataclass
class RunResult:
    state: FieldState
    series: TimeSeries
    ok: bool
    message: str = ""


class _SeriesWriter:
    """Time-series CSV, flushed after every sample so aborted runs keep their history."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._csv = csv.writer(self._fh)
        self._csv.writerow(TimeSeries.COLUMNS)
        self._fh.flush()

    def write(self, row):
        self._csv.writerow([repr(float(v)) for v in row])
        self._fh.flush()

    def close(self):
        self._fh.close()


def run(config: RunConfig) -> RunResult:
    """Integrate one case; writes snapshots, series and manifest when ``config.out`` is set."""
    cfg = config.resolved()
    spec = get_case(cfg.case)
    params = cfg.scheme()
    gas = params.gas
    mesh = build_mesh(cfg.cells(), spec.lower, spec.upper)
    bc = BoundaryCondition.uniform(spec.bc, mesh.ndim)
    state = initial_state(spec, mesh, gas)
    series = TimeSeries()

    out = Path(cfg.out) if cfg.out else None
    writer = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        writer = _SeriesWriter(out / "series.csv")

    def sample(st: FieldState, dt: float):
        row = series.record(st.t, st.q, mesh, gas, dt)
        if writer is not None:
            writer.write(row)

    def snapshot(st: FieldState):
        if out is not None:
            write_snapshot(out / f"snapshot_{st.step:06d}.csv", st, gas)

    sample(state, 0.0)
    snapshot(state)

    def callback(st: FieldState, dt: float):
        if st.step % cfg.series_every == 0:
            sample(st, dt)
        if cfg.snapshot_every and st.step % cfg.snapshot_every == 0:
            snapshot(st)

    integrator = Integrator(mesh, bc, params)
    controls = TimeControls(cfg.t_end, cfg.cfl, cfg.dt)
    ok, message = True, ""
    final = state
    t_last = state.t
    try:
        final = integrator.advance(state, controls, callback)
        t_last = final.t
    except SolverError as exc:
        ok, message, t_last = False, str(exc), exc.t_last
        log.error("%s", exc)
    if ok:
        if final.t > series.t[-1]:
            sample(final, series.dt[-1])
        if final.step > 0 and (not cfg.snapshot_every or final.step % cfg.snapshot_every):
            snapshot(final)
    if writer is not None:
        writer.close()
    if out is not None:
        manifest = {
            "config": dataclasses.asdict(cfg),
            "case": {"lower": list(spec.lower), "upper": list(spec.upper), "bc": spec.bc},
            "status": "ok" if ok else "failed",
            "message": message,
            "t_final": t_last,
            "steps": final.step,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return RunResult(final, series, ok, message)


# ---- convergence -----------------------------------------------------------

ERROR_COMPONENTS = (("rho", RHO), ("m1", 1), ("sigma", 4), ("B1", 5))


@dataclass
class ConvergenceRow:
    n: int
    errors: Dict[str, float]
    orders: Optional[Dict[str, float]] = None


def convergence_study(config: RunConfig, resolutions: Sequence[int]) -> List[ConvergenceRow]:
    """L2 errors against the exact solution on square meshes; orders between successive levels."""
    spec = get_case(config.case)
    if spec.exact is None:
        raise ValueError(f"case {config.case!r} has no exact solution")
    rows: List[ConvergenceRow] = []
    for n in resolutions:
        cfg = dataclasses.replace(config, nx=n, ny=n if spec.ndim > 1 else None, out=None)
        res = run(cfg)
        if not res.ok:
            raise SolverError(f"run at N={n} failed: {res.message}", res.state.t)
        mesh = res.state.mesh
        gas = cfg.scheme().gas
        exact = primitive_to_conserved(spec.exact(*mesh.coordinates(), res.state.t), gas)
        errors = {name: l2_error(res.state.q, exact, mesh, k) for name, k in ERROR_COMPONENTS}
        rows.append(ConvergenceRow(n, errors))
    for prev, row in zip(rows[:-1], rows[1:]):
        factor = row.n / prev.n
        row.orders = {name: observed_order([prev.errors[name], row.errors[name]], factor)[0]
                      for name, _ in ERROR_COMPONENTS}
    return rows


def format_table(rows: Sequence[ConvergenceRow]) -> str:
    names = [name for name, _ in ERROR_COMPONENTS]
    head = ["N"] + [f"L2({n})" for n in names]
    if len(rows) > 1:
        head += [f"O({n})" for n in names]
    lines = ["  ".join(f"{h:>10}" for h in head)]
    for row in rows:
        cells = [f"{row.n:>10d}"] + [f"{row.errors[n]:>10.3e}" for n in names]
        if len(rows) > 1:
            cells += [f"{row.orders[n]:>10.2f}" if row.orders else f"{'':>10}" for n in names]
        lines.append("  ".join(cells))
    return "\n".join(lines)


# ---- command line ----------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--case")
    common.add_argument("--nx", type=int)
    common.add_argument("--ny", type=int)
    common.add_argument("--gamma", type=float)
    common.add_argument("--cfl", type=float)
    common.add_argument("--ch", dest="c_h", type=float)
    common.add_argument("--eps", help="'limiter' or a constant viscosity")
    common.add_argument("--ngp", dest="n_gp", type=int)
    common.add_argument("--tend", dest="t_end", type=float)
    common.add_argument("--dt", type=float, help="fixed time step instead of the CFL step")
    common.add_argument("--out")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="htcmhd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", parents=[common], help="integrate one case")
    p_run.add_argument("--snapshot-every", type=int)
    p_run.add_argument("--series-every", type=int)
    p_conv = sub.add_parser("converge", parents=[common], help="grid convergence study")
    p_conv.add_argument("--resolutions", type=int, nargs="+", default=[32, 64, 128])
    return parser


def _config_from_args(args) -> RunConfig:
    base = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    for name in ("case", "nx", "ny", "gamma", "cfl", "c_h", "eps", "n_gp", "t_end", "dt", "out"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    for flag, name in (("snapshot_every", "snapshot_every"), ("series_every", "series_every")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    return dataclasses.replace(base, **overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _config_from_args(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "run":
        result = run(config)
        if not result.ok:
            print(f"error: {result.message}", file=sys.stderr)
            return 1
        st = result.state
        print(f"{config.case}: reached t={st.t:.6g} in {st.step} steps")
        return 0
    try:
        rows = convergence_study(config, args.resolutions)
    except (SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    table = format_table(rows)
    print(table)
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "convergence.txt").write_text(table + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
