"""Command-line interface.

Exit codes: 0 success, 1 a verdict failed, 2 usage or configuration error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .checks import run_checks
from .errors import FracPMEError
from .experiments import decay_fit, weak_strong_experiment
from .io import load_config, read_csv, write_csv, write_snapshot
from .simulation import PorousMediumSolver
from .state import admissibility_report, make_initial

EXIT_OK, EXIT_VERDICT, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _initial_state(cfg):
    grid = cfg.grid()
    return make_initial(grid, cfg.u0.build(grid), cfg.p0.build(grid), mode=cfg.mode)


def cmd_run(args):
    cfg = load_config(args.config)
    state = _initial_state(cfg)
    rep = admissibility_report(state)
    if not rep.ok:
        print(str(rep), file=sys.stderr)
        return EXIT_VERDICT
    out = Path(args.output or cfg.output)
    snapdir = out / "snapshots"
    out.mkdir(parents=True, exist_ok=True)
    if cfg.snapshot_every:
        snapdir.mkdir(exist_ok=True)
        write_snapshot(state, snapdir / "snap_000000", cfg.s)

    def callback(st, k):
        if cfg.snapshot_every and k % cfg.snapshot_every == 0:
            write_snapshot(st, snapdir / f"snap_{k:06d}", cfg.s)

    solver = PorousMediumSolver(**cfg.solver_kwargs()).fit(state, callback=callback)
    traj = solver.trajectory_
    write_csv(out / "diagnostics.csv", traj.records)
    write_snapshot(solver.state_, out / "final", cfg.s)
    print(f"steps: {traj.n_steps}")
    print(f"t_end: {solver.state_.t!r}")
    print(f"H_final: {traj.records[-1].H!r}")
    print(f"min_u: {traj.min_u!r}")
    print(f"output: {out}")
    return EXIT_OK if traj.min_u >= 0 else EXIT_VERDICT


def cmd_decay_fit(args):
    cols = read_csv(args.csv)
    if "t" not in cols or "H" not in cols:
        raise FracPMEError(f"{args.csv}: needs columns 't' and 'H'")
    fit = decay_fit(cols["t"], cols["H"], args.s, window=(args.tmin, args.tmax))
    print(fit.report())
    return EXIT_OK if fit.verdict else EXIT_VERDICT


def cmd_compare(args):
    cfg = load_config(args.config)
    state = _initial_state(cfg)
    ser = weak_strong_experiment(state, args.eps, cfg.s, args.T, cfl_safety=cfg.cfl_safety,
                                 dt_max=cfg.dt_max, flux=cfg.flux)
    print(ser.report())
    return EXIT_OK if ser.verdict else EXIT_VERDICT


def cmd_check(args):
    results = run_checks()
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERDICT


def build_parser():
    p = _Parser(prog="fracpme", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate a configuration, write CSV and snapshots")
    r.add_argument("config")
    r.add_argument("--output", help="override the output directory of the config")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("decay-fit", help="fit the algebraic decay rate of H in a CSV")
    d.add_argument("csv")
    d.add_argument("--s", type=float, required=True)
    d.add_argument("--tmin", type=float, default=1.0)
    d.add_argument("--tmax", type=float, default=np.inf)
    d.set_defaults(func=cmd_decay_fit)

    c = sub.add_parser("compare", help="weak-strong relative-entropy experiment")
    c.add_argument("config")
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--T", type=float, required=True)
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("check", help="run the built-in oracle and invariant suite")
    k.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except FracPMEError as exc:
        print(f"fracpme: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
