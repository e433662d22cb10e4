"""Command-line front end: run scenarios and write CSV/JSON output.

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import PRESETS, ScenarioConfig, apply_overrides, flatten, load_config
from .diagnostics import switching_count
from .errors import ConfigError, DomainError, SmaDampError
from .grid import build_grid
from .integrator import Trajectory, run
from .material import stationary_strains
from .rod import initial_state

__all__ = [
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_SOLVER",
    "EXIT_IO",
    "TIMESERIES_HEADER",
    "SNAPSHOT_HEADER",
    "simulate",
    "write_outputs",
    "run_scenario",
    "main",
]

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

TIMESERIES_HEADER = (
    "time_ms", "block_pos_cm", "block_vel_cm_per_ms", "avg_temp_K",
    "rod_kinetic", "block_kinetic", "potential", "thermal", "coupling", "total",
    "strain_at_L",
)
SNAPSHOT_HEADER = ("x_cm", "u_cm", "v_cm_per_ms", "strain", "theta_K")

TIMESERIES_FILE = "timeseries.csv"
SUMMARY_FILE = "summary.json"
SNAPSHOT_DIR = "snapshots"


def _f(x) -> str:
    # repr gives the shortest round-tripping decimal, independent of locale.
    return repr(float(x))


def simulate(cfg: ScenarioConfig, progress=None) -> Trajectory:
    """Build the grid and initial state for ``cfg`` and integrate it."""
    grid = build_grid(cfg.n_intervals, cfg.rod_length)
    state0 = initial_state(grid, cfg.strain0, cfg.theta0, cfg.block)
    return run(grid, cfg.material, cfg.block, cfg.solver, state0, cfg.t_end,
               output_every=cfg.output_every, progress=progress)


def _timeseries_rows(cfg: ScenarioConfig, traj: Trajectory):
    d1_last = traj.grid.d1[-1]
    for t, s, e in zip(traj.times, traj.states, traj.energies):
        yield (t, cfg.rod_length + s.u[-1], s.v[-1], e.avg_temperature,
               e.rod_kinetic, e.block_kinetic, e.potential, e.thermal, e.coupling,
               e.total, d1_last @ s.u)


def _summary(cfg: ScenarioConfig, traj: Trajectory) -> dict:
    iters = np.array(traj.newton_iterations[1:], dtype=float)
    mid = cfg.n_intervals // 2
    return {
        "config": flatten(cfg),
        "samples": len(traj),
        "final_time_ms": traj.times[-1],
        "newton": {
            "mean_iterations_per_sample": float(iters.mean()) if iters.size else 0.0,
            "max_iterations_per_sample": int(iters.max()) if iters.size else 0,
            "retries": traj.retries,
        },
        "final_energies": traj.energies[-1].as_dict(),
        "initial_energies": traj.energies[0].as_dict(),
        "switching_counts": {
            "midpoint_node": mid,
            "midpoint": switching_count(traj, mid),
            "block_end": switching_count(traj, cfg.n_intervals),
        },
    }


def write_outputs(cfg: ScenarioConfig, traj: Trajectory, out_dir: Path) -> None:
    """Write the time series, field snapshots and run summary into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / TIMESERIES_FILE, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMESERIES_HEADER)
        for row in _timeseries_rows(cfg, traj):
            w.writerow([_f(x) for x in row])

    if cfg.snapshot_every > 0:
        snap_dir = out_dir / SNAPSHOT_DIR
        snap_dir.mkdir(exist_ok=True)
        grid = traj.grid
        for k in range(0, len(traj), cfg.snapshot_every):
            s = traj.states[k]
            eps = grid.d1 @ s.u
            with open(snap_dir / f"snapshot_{k:06d}.csv", "w", newline="",
                      encoding="utf-8") as fh:
                fh.write(f"# time_ms = {_f(s.time)}\n")
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(SNAPSHOT_HEADER)
                for row in zip(grid.nodes, s.u, s.v, eps, s.theta):
                    w.writerow([_f(x) for x in row])

    with open(out_dir / SUMMARY_FILE, "w", encoding="utf-8") as fh:
        json.dump(_summary(cfg, traj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path | None = None) -> int:
    """Run ``cfg`` and write its outputs; returns the process exit status."""
    out = Path(cfg.output_path if out_dir is None else out_dir)
    try:
        traj = simulate(cfg, progress=lambda t: log.debug("t = %.4f ms", t))
    except (ConfigError, DomainError) as exc:
        log.error("invalid scenario: %s", exc)
        return EXIT_CONFIG
    except SmaDampError as exc:
        when = getattr(exc, "time", None)
        log.error("solver failed%s: %s", "" if when is None else f" at t = {when:.6g} ms", exc)
        return EXIT_SOLVER
    try:
        write_outputs(cfg, traj, out)
    except OSError as exc:
        log.error("cannot write output to %s: %s", out, exc)
        return EXIT_IO
    log.info("wrote %d samples to %s", len(traj), out)
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config if args.config else args.preset)
        if args.set:
            cfg = apply_overrides(cfg, args.set)
        changes = {}
        if args.dt is not None:
            changes["solver"] = dataclasses.replace(cfg.solver, dt=args.dt)
        if args.snapshots_every is not None:
            changes["snapshot_every"] = args.snapshots_every
        if changes:
            cfg = dataclasses.replace(cfg, **changes)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot read configuration: %s", exc)
        return EXIT_IO
    return run_scenario(cfg, args.out_dir)


def _cmd_presets(args) -> int:
    for name in PRESETS:
        cfg = load_config(name)
        print(f"{name}: m/beta={cfg.block.mass_per_area:g} g/cm^2, "
              f"v0={cfg.block.v0:g} cm/ms, nu={cfg.material.nu:g}, "
              f"t_end={cfg.t_end:g} ms")
    return EXIT_OK


def _cmd_wells(args) -> int:
    try:
        cfg = load_config(args.config if args.config else args.preset)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot read configuration: %s", exc)
        return EXIT_IO
    if args.t_step <= 0 or args.t_max < args.t_min or args.t_min <= 0:
        log.error("need 0 < t-min <= t-max and t-step > 0")
        return EXIT_CONFIG
    n = int(round((args.t_max - args.t_min) / args.t_step))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("theta_K", "strain", "kind"))
    for i in range(n + 1):
        theta = args.t_min + i * args.t_step
        for point in stationary_strains(cfg.material, theta):
            w.writerow((_f(theta), _f(point.strain), point.kind))
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smadamp", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0,
                    help="more log output (repeat for per-sample progress)")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario")
    src = r.add_mutually_exclusive_group()
    src.add_argument("--preset", default="exp1", choices=list(PRESETS))
    src.add_argument("--config", help="configuration file")
    r.add_argument("--out-dir", help="output directory (default: output_path of the config)")
    r.add_argument("--dt", type=float, help="time step, ms")
    r.add_argument("--snapshots-every", type=int, metavar="K",
                   help="write a field snapshot every K samples (0 disables)")
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")
    r.set_defaults(func=_cmd_run)

    p = sub.add_parser("presets", help="list the built-in scenarios")
    p.set_defaults(func=_cmd_presets)

    wl = sub.add_parser("wells", help="stationary strains over a temperature sweep, as CSV")
    src = wl.add_mutually_exclusive_group()
    src.add_argument("--preset", default="exp1", choices=list(PRESETS))
    src.add_argument("--config", help="configuration file (material section is used)")
    wl.add_argument("--t-min", type=float, default=200.0)
    wl.add_argument("--t-max", type=float, default=280.0)
    wl.add_argument("--t-step", type=float, default=5.0)
    wl.set_defaults(func=_cmd_wells)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
