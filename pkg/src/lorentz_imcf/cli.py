"""Command-line entry point.

Subcommands: run, run-rescaled, verify, oracle-compare, geometry-check.
Every configuration key is also a flag (``--t-end`` for ``t_end``), and flags
take precedence over ``--config FILE``.

Exit codes: 0 success, 2 monitor failure, 3 singularity guard, 4 bad
configuration.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import checks
from .config import KEYS, parse_config, write_resolved
from .errors import (EXIT_MONITOR_FAILURE, EXIT_OK, ConfigError, IMCFError, MonitorFailure,
                     SingularityGuard)
from .flow import evolve, resolve_c
from .monitors import make_record, check_rescaled_convergence, oracle_round, run_report
from .output import emit_csv, emit_snapshot, read_trajectory

log = logging.getLogger("lorentz_imcf")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(4, f"{self.prog}: error: {message}\n")


def _add_config_flags(p):
    p.add_argument("--config", metavar="FILE", help="flat key = value configuration file")
    for key in KEYS:
        p.add_argument("--" + key.replace("_", "-"), dest=key, metavar="VALUE", default=None)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = _Parser(prog="lorentz-imcf",
                     description="Inverse mean curvature flow of spacelike graphs in "
                                 "Lorentz-Minkowski space.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("run", help="raw flow; writes trajectory.csv and snapshots")
    _add_config_flags(p)
    p = sub.add_parser("run-rescaled", help="rescaled flow plus a convergence report")
    _add_config_flags(p)
    p = sub.add_parser("verify", help="monitor suite on a fresh run or a stored trajectory")
    _add_config_flags(p)
    p.add_argument("--trajectory", metavar="CSV", help="check this file instead of running")
    p.add_argument("--rescaled", action="store_true",
                   help="include the rescaled convergence check")
    p = sub.add_parser("oracle-compare", help="constant data against the round solution")
    _add_config_flags(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p = sub.add_parser("geometry-check", help="base and graph geometry property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _config(args):
    overrides = {k: getattr(args, k) for k in KEYS if getattr(args, k, None) is not None}
    return parse_config(args.config, overrides)


def _run(cfg, flow):
    """Evolve, writing outputs as they are produced; returns (records, state, grid)."""
    write_resolved(cfg)
    snap_dir = os.path.join(cfg.out_dir, "snapshots")
    traj = os.path.join(cfg.out_dir, "trajectory.csv")

    def on_snapshot(index, state, grid):
        emit_snapshot(state, grid, os.path.join(snap_dir, f"step_{index:08d}.csv"))

    try:
        records, state = evolve(cfg, flow, on_snapshot)
    except (SingularityGuard, MonitorFailure) as exc:
        if getattr(exc, "records", None):
            emit_csv(exc.records, traj)
        print(f"{type(exc).__name__} at t={exc.t}: {exc}", file=sys.stderr)
        raise
    emit_csv(records, traj)
    print(f"{flow} flow reached t={state.t:.17g}; {len(records)} rows in {traj}")
    return records, state, cfg.grid()


def cmd_run(args):
    _run(_config(args), "raw")
    return EXIT_OK


def cmd_run_rescaled(args):
    cfg = _config(args)
    records, state, grid = _run(cfg, "rescaled")
    final = make_record(state, grid, records[-1].dt_used)
    result = check_rescaled_convergence(records, cfg.n, state.c, grid.cap_area, final,
                                        cfg.tol_conv, cfg.tol_rescaled_area, cfg.tol_rinf)
    text = f"c = {state.c:.17g}\n{result.line()}\n"
    with open(os.path.join(cfg.out_dir, "report.txt"), "w") as fh:
        fh.write(text)
    print(text, end="")
    return EXIT_OK


def cmd_verify(args):
    cfg = _config(args)
    grid = cfg.grid()
    if args.trajectory:
        records = read_trajectory(args.trajectory)
        r0 = records[0]
        c = resolve_c(cfg.c_convention, np.array([r0.min_phi, r0.max_phi]))
        final = None
    else:
        flow = "rescaled" if args.rescaled else "raw"
        try:
            records, state = evolve(cfg, flow)
        except MonitorFailure as exc:
            print(f"monitor failure: {exc}")
            return EXIT_MONITOR_FAILURE
        c = state.c
        final = make_record(state, grid, records[-1].dt_used)
    report = run_report(records, cfg, c, grid.cap_area, rescaled=args.rescaled, final=final)
    print(report.format(), end="")
    return EXIT_OK if report.passed else EXIT_MONITOR_FAILURE


def cmd_oracle_compare(args):
    cfg = _config(args)
    if cfg.u0.kind != "constant":
        raise ConfigError("oracle-compare needs constant initial data (u0 = constant:R0)")
    records, state = evolve(cfg, "raw")
    rows = records + [make_record(state, cfg.grid(), records[-1].dt_used)]
    err = 0.0
    for r in rows:
        exact = float(oracle_round(cfg.u0.R0, cfg.n, r.t))
        err = max(err, abs(r.min_u - exact) / exact, abs(r.max_u - exact) / exact)
    ok = err < args.tol
    print(f"max relative error vs R0 exp(-t/n): {err:.6e} over {len(rows)} times "
          f"(tol {args.tol:g}): {'pass' if ok else 'fail'}")
    return EXIT_OK if ok else EXIT_MONITOR_FAILURE


def cmd_geometry_check(args):
    results = checks.geometry_check(seed=args.seed, count=args.samples)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"overall: {'pass' if ok else 'fail'}")
    return EXIT_OK if ok else EXIT_MONITOR_FAILURE


COMMANDS = {
    "run": cmd_run,
    "run-rescaled": cmd_run_rescaled,
    "verify": cmd_verify,
    "oracle-compare": cmd_oracle_compare,
    "geometry-check": cmd_geometry_check,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except IMCFError as exc:
        if not isinstance(exc, SingularityGuard):
            print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
