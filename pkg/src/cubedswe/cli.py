"""Command-line driver: shallow-water runs, convergence sweeps, grid dumps.

Subcommands
    run             integrate a named test case and write CSV diagnostics
    converge-space  spatial-order study against the unsteady analytic case
    converge-time   temporal-order study on the stiff 1-D benchmarks
    dump-grid       write node coordinates and metric data
    list-cases      print the available test cases

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
All CSV output uses 17 significant digits so downstream analysis is lossless.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import diagnostics
from .benchmarks_1d import (BENCHMARK_IDS, STEP_RANGES, build_benchmark,
                            convergence_sweep, fit_order, reference_solution)
from .geometry import Grid, GridSpec, RotationConfig
from .integrators import integrate
from .krylov import KrylovError
from .swe_cases import CASE_NAMES, DAY, build_case

logger = logging.getLogger("cubedswe")

DEFAULT_GRIDS = ((3, 40), (4, 30), (5, 24), (6, 20))


class ConfigError(ValueError):
    """Invalid run configuration; reported with exit code 1."""


class NumericalFailure(RuntimeError):
    """Mid-run NaN/Inf or Krylov breakdown; reported with exit code 2."""

    def __init__(self, message, last_good=None, t_last=None):
        super().__init__(message)
        self.last_good = last_good
        self.t_last = t_last


@dataclass
class RunConfig:
    """Complete description of one shallow-water integration."""

    case: str = "steady_geostrophic"
    ne: int = 30
    ns: int = 4
    dt: float = 3600.0
    days: float = 5.0
    order: int = 4
    tol: float = 1e-10
    eps: float = 1.5e-8
    lambda0: float = 0.0
    phi0: float = np.pi / 4.0
    alpha0: float = 0.0
    output_dir: str = "output"
    snapshot_hours: float = 6.0
    startup_substeps: int = 64
    m_max: int = 192
    plots: bool = False

    def validate(self):
        if self.case not in CASE_NAMES:
            raise ConfigError(
                f"unknown case {self.case!r}; choose from {CASE_NAMES}")
        if self.ne < 1 or self.ns < 2:
            raise ConfigError("need Ne >= 1 elements and Ns >= 2 points")
        if self.dt <= 0:
            raise ConfigError("time step must be positive (seconds)")
        if self.days <= 0:
            raise ConfigError("duration must be positive (days)")
        if self.order not in (2, 3, 4, 5, 6):
            raise ConfigError("integrator order must be in 2..6")
        if self.tol <= 0 or self.eps <= 0:
            raise ConfigError("tolerances must be positive")
        if self.snapshot_hours <= 0:
            raise ConfigError("snapshot interval must be positive (hours)")
        n_steps = self.days * DAY / self.dt
        if abs(n_steps - round(n_steps)) > 1e-9:
            raise ConfigError("duration must be a whole number of steps")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def load_config_file(path: str) -> dict:
    """Parse a flat `key = value` configuration file."""
    values = {}
    known = {f.name: f.type for f in dataclass_fields(RunConfig)}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def dump_config(cfg: RunConfig, path: Path):
    lines = [f"{f.name} = {_fmt(getattr(cfg, f.name))}"
             for f in dataclass_fields(cfg)]
    path.write_text("\n".join(lines) + "\n")


# ----------------------------------------------------------------------
# run subcommand

def _build(cfg: RunConfig):
    spec = GridSpec(ne=cfg.ne, ns=cfg.ns,
                    rotation=RotationConfig(cfg.lambda0, cfg.phi0, cfg.alpha0))
    grid = Grid(spec)
    return build_case(grid, cfg.case)


def snapshot_rows(model, q, zeta=None):
    """Per-node records (panel, lon, lat, H, u1, u2, zeta)."""
    grid = model.grid
    depth, u1, u2 = model.primitives(q)
    scale = 1.0 / model.velocity_scale   # reference -> cubed-sphere components
    if zeta is None:
        zeta = diagnostics.relative_vorticity(model, q)
    for p in range(6):
        lon, lat = grid.lon[p], grid.lat[p]
        for j in range(model.n):
            for i in range(model.n):
                yield (p, lon[j, i], lat[j, i], np.real(depth[p, j, i]),
                       np.real(u1[p, j, i]) * scale,
                       np.real(u2[p, j, i]) * scale, zeta[p, j, i])


def write_snapshot(model, q, path: Path):
    write_csv(path, ("panel", "lon", "lat", "H", "u1", "u2", "zeta"),
              snapshot_rows(model, q))


def cmd_run(cfg: RunConfig) -> int:
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(cfg, out / "config.txt")

    case = _build(cfg)
    model = case.model
    n_steps = int(round(cfg.days * DAY / cfg.dt))
    shape = case.q0.shape
    rhs = lambda v: model.rhs(v.reshape(shape)).reshape(-1)
    trace = diagnostics.ConservationTrace.start(model, case.q0)
    snap_interval = cfg.snapshot_hours * 3600.0

    norms_rows = []
    cons_rows = []
    state = {"next_snap": snap_interval, "last_good": case.q0, "t_last": 0.0}

    def record(t, q):
        drift = trace.drift(model, q)
        cons_rows.append((t, drift["mass"], drift["energy"],
                          drift["enstrophy"]))
        ref = (case.analytic_state(t) if case.analytic is not None
               else case.q0)
        err = diagnostics.error_norms(model, q, ref)
        norms_rows.append((t, err["l1"], err["l2"], err["linf"]))
        write_snapshot(model, q, out / f"fields_t{int(round(t)):09d}.csv")

    record(0.0, case.q0)
    t_cpu = time.perf_counter()

    def callback(step, t, q, stats):
        if q is None:   # startup sub-integration, no per-step state exposed
            logger.info("step %d/%d t=%.0fs (startup)", step, n_steps, t)
            return
        if not np.all(np.isfinite(q)):
            raise NumericalFailure(f"non-finite state at t={t:.0f}s",
                                   last_good=state["last_good"],
                                   t_last=state["t_last"])
        state["last_good"], state["t_last"] = q.copy(), t
        logger.info("step %d/%d t=%.0fs krylov m=%d substeps=%d matvecs=%d",
                    step, n_steps, t, stats.krylov_dim, stats.substeps,
                    stats.matvecs)
        if t >= state["next_snap"] - 1e-6 or step == n_steps:
            record(t, q.reshape(shape))
            state["next_snap"] = (np.floor(t / snap_interval) + 1) \
                * snap_interval

    try:
        integrate(rhs, case.q0.reshape(-1), cfg.dt, n_steps, order=cfg.order,
                  tol=cfg.tol, eps=cfg.eps,
                  startup_substeps=cfg.startup_substeps, m_max=cfg.m_max,
                  callback=callback)
    except (NumericalFailure, KrylovError) as exc:
        logger.error("numerical failure: %s", exc)
        last = getattr(exc, "last_good", None)
        if last is not None:
            write_snapshot(model, np.asarray(last).reshape(shape),
                           out / "fields_last_good.csv")
        write_csv(out / "norms.csv", ("time", "l1", "l2", "linf"), norms_rows)
        write_csv(out / "conservation.csv",
                  ("time", "mass", "energy", "enstrophy"), cons_rows)
        return 2
    t_cpu = time.perf_counter() - t_cpu

    write_csv(out / "norms.csv", ("time", "l1", "l2", "linf"), norms_rows)
    write_csv(out / "conservation.csv",
              ("time", "mass", "energy", "enstrophy"), cons_rows)
    logger.info("run complete: %d steps in %.1f s cpu", n_steps, t_cpu)
    if cfg.plots:
        _render_run_report(out)
    return 0


def _render_run_report(out: Path):
    """Quick-look figures for a finished run, next to its CSV output."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cons = np.genfromtxt(out / "conservation.csv", delimiter=",", names=True)
    cons = np.atleast_1d(cons)
    fig, ax = plt.subplots(figsize=(7, 4))
    days = cons["time"] / DAY
    for name in ("mass", "energy", "enstrophy"):
        ax.plot(days, cons[name], label=name)
    ax.set_xlabel("time (days)")
    ax.set_ylabel("normalized drift")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.savefig(out / "conservation.png", dpi=150, bbox_inches="tight")
    plt.close(fig)

    snaps = sorted(out.glob("fields_t*.csv"))
    if snaps:
        data = np.genfromtxt(snaps[-1], delimiter=",", names=True)
        fig, ax = plt.subplots(figsize=(8, 4))
        sc = ax.scatter(np.degrees(data["lon"]), np.degrees(data["lat"]),
                        c=data["H"], s=2, cmap="viridis", rasterized=True)
        fig.colorbar(sc, ax=ax, label="fluid depth (m)")
        ax.set_xlabel("longitude (deg)")
        ax.set_ylabel("latitude (deg)")
        fig.savefig(out / "depth_final.png", dpi=150, bbox_inches="tight")
        plt.close(fig)


# ----------------------------------------------------------------------
# convergence subcommands

def cmd_converge_space(args) -> int:
    """Day-5 error norms of the unsteady analytic case at two resolutions."""
    ns_list = [int(s) for s in args.ns.split(",")]
    ne_pair = [int(s) for s in args.ne.split(",")]
    if len(ne_pair) != 2:
        raise ConfigError("--ne must give exactly two element counts")
    days, dt = args.days, args.dt
    rows = []
    for ns in ns_list:
        errs = []
        for ne in ne_pair:
            spec = GridSpec(ne=ne, ns=ns,
                            rotation=RotationConfig(0.0, np.pi / 4.0, 0.0))
            case = build_case(Grid(spec), "lauter")
            model = case.model
            shape = case.q0.shape
            rhs = lambda v: model.rhs(v.reshape(shape)).reshape(-1)
            n_steps = int(round(days * DAY / dt))
            t0 = time.perf_counter()
            q = integrate(rhs, case.q0.reshape(-1), dt, n_steps,
                          order=args.order, tol=args.tol, m_max=args.m_max)
            cpu = time.perf_counter() - t0
            err = diagnostics.error_norms(model, q.reshape(shape),
                                          case.analytic_state(days * DAY))
            errs.append(err)
            logger.info("Ns=%d Ne=%d: L1=%.3e L2=%.3e Linf=%.3e (%.1fs)",
                        ns, ne, err["l1"], err["l2"], err["linf"], cpu)
            rows.append([ns, ne, err["l1"], err["l2"], err["linf"],
                         "", "", ""])
        ratio = np.log(ne_pair[1] / ne_pair[0])
        orders = [np.log(errs[0][k] / errs[1][k]) / ratio
                  for k in ("l1", "l2", "linf")]
        rows[-1][5:] = orders
        logger.info("Ns=%d observed orders: L1=%.3f L2=%.3f Linf=%.3f",
                    ns, *orders)
    write_csv(Path(args.output), ("ns", "ne", "l1", "l2", "linf",
                                  "order_l1", "order_l2", "order_linf"), rows)
    return 0


def cmd_converge_time(args) -> int:
    """Error-vs-step sweeps of the stiff 1-D benchmarks."""
    problems = args.problems.split(",") if args.problems else BENCHMARK_IDS
    orders = [int(s) for s in args.orders.split(",")]
    rows = []
    for pid in problems:
        prob = build_benchmark(pid)
        ref = reference_solution(prob)
        for order in orders:
            t0 = time.perf_counter()
            h, errs = convergence_sweep(prob, order, reference=ref)
            cpu = time.perf_counter() - t0
            slope = fit_order(h, errs)
            logger.info("%s order %d: slope %.3f (%.1fs)", pid, order, slope,
                        cpu)
            for hv, ev in zip(h, errs):
                rows.append((pid, order, hv, ev, cpu / len(h)))
    write_csv(Path(args.output),
              ("problem", "order", "h", "error", "cpu_seconds"), rows)
    return 0


# ----------------------------------------------------------------------
# grid dump

def cmd_dump_grid(args) -> int:
    spec = GridSpec(ne=args.ne, ns=args.ns,
                    rotation=RotationConfig(args.lambda0, args.phi0,
                                            args.alpha0))
    grid = Grid(spec)
    nm = grid.nodes
    rows = []
    for p in range(6):
        for j in range(grid.n_side):
            for i in range(grid.n_side):
                rows.append((p, i, j, grid.lon[p, j, i], grid.lat[p, j, i],
                             nm.x_gnom[p, j, i], nm.y_gnom[p, j, i],
                             nm.sqrt_g[p, j, i], nm.f[p, j, i]))
    write_csv(Path(args.output),
              ("panel", "i", "j", "lon", "lat", "x1", "x2", "sqrt_g", "f"),
              rows)
    return 0


# ----------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="cubedswe",
                     description="High-order shallow-water solver on the "
                                 "cubed sphere with exponential integrators.")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="per-substep debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate a test case")
    run.add_argument("--config", help="flat key = value configuration file")
    defaults = RunConfig()
    run.add_argument("--case", choices=CASE_NAMES)
    run.add_argument("--ne", type=int, help="elements per panel edge")
    run.add_argument("--ns", type=int, help="solution points per element")
    run.add_argument("--dt", type=float, help="time step (s)")
    run.add_argument("--days", type=float, help="duration (days)")
    run.add_argument("--order", type=int, help="integrator order 2..6")
    run.add_argument("--tol", type=float, help="Krylov tolerance")
    run.add_argument("--eps", type=float, help="complex-step size")
    run.add_argument("--lambda0", type=float, help="grid rotation (rad)")
    run.add_argument("--phi0", type=float, help="grid rotation (rad)")
    run.add_argument("--alpha0", type=float, help="grid rotation (rad)")
    run.add_argument("--output-dir", dest="output_dir")
    run.add_argument("--snapshot-hours", dest="snapshot_hours", type=float)
    run.add_argument("--startup-substeps", dest="startup_substeps", type=int)
    run.add_argument("--m-max", dest="m_max", type=int,
                     help="Krylov dimension cap")
    run.add_argument("--plots", action="store_true", default=None,
                     help="render quick-look figures next to the CSV output")
    run.set_defaults(func=_dispatch_run, defaults=defaults)

    conv_s = sub.add_parser("converge-space",
                            help="spatial order study (analytic case)")
    conv_s.add_argument("--ns", default="3,4,5,6",
                        help="comma-separated points-per-element values")
    conv_s.add_argument("--ne", default="10,20",
                        help="two comma-separated element counts")
    conv_s.add_argument("--days", type=float, default=5.0)
    conv_s.add_argument("--dt", type=float, default=3600.0)
    conv_s.add_argument("--order", type=int, default=6)
    conv_s.add_argument("--tol", type=float, default=1e-10)
    conv_s.add_argument("--m-max", dest="m_max", type=int, default=192)
    conv_s.add_argument("--output", default="converge_space.csv")
    conv_s.set_defaults(func=cmd_converge_space)

    conv_t = sub.add_parser("converge-time",
                            help="temporal order study (1-D benchmarks)")
    conv_t.add_argument("--problems",
                        help=f"comma-separated subset of {BENCHMARK_IDS}")
    conv_t.add_argument("--orders", default="2,3,4,5,6")
    conv_t.add_argument("--output", default="converge_time.csv")
    conv_t.set_defaults(func=cmd_converge_time)

    dump = sub.add_parser("dump-grid", help="write node/metric CSV")
    dump.add_argument("--ne", type=int, required=True)
    dump.add_argument("--ns", type=int, required=True)
    dump.add_argument("--lambda0", type=float, default=0.0)
    dump.add_argument("--phi0", type=float, default=np.pi / 4.0)
    dump.add_argument("--alpha0", type=float, default=0.0)
    dump.add_argument("--output", default="grid.csv")
    dump.set_defaults(func=cmd_dump_grid)

    lst = sub.add_parser("list-cases", help="print available test cases")
    lst.set_defaults(func=lambda args: print("\n".join(CASE_NAMES)) or 0)
    return parser


def _dispatch_run(args) -> int:
    values = {}
    if args.config:
        values.update(load_config_file(args.config))
    cfg = RunConfig()
    # config-file values are strings; coerce through the field types
    for f in dataclass_fields(RunConfig):
        if f.name in values:
            raw = values[f.name]
            kind = type(getattr(cfg, f.name))
            try:
                setattr(cfg, f.name,
                        raw.lower() in ("1", "true", "yes")
                        if kind is bool else kind(raw))
            except ValueError as exc:
                raise ConfigError(f"bad value for {f.name}: {raw!r}") from exc
        cli_val = getattr(args, f.name, None)
        if cli_val is not None:
            setattr(cfg, f.name, cli_val)
    return cmd_run(cfg)


def main(argv=None) -> int:
    args_list = sys.argv[1:] if argv is None else list(argv)
    try:
        parser = build_parser()
        args = parser.parse_args(args_list)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.INFO,
            format="%(asctime)s %(levelname)s %(message)s")
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (NumericalFailure, KrylovError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
