"""Command-line entry point.

Exit status is 0 on success, 1 for usage, config and file errors, and 2 for
failures while running.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import radio, simulator
from .config import ConfigError, dump_config, load_config, parse_value
from .scheduler import FRAME_CSV_HEADER, write_frames
from .selector import SOLVERS, check_feasibility, load_instance

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="d2dsim", description="Single-cell LTE D2D mode selection simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one scenario")
    run.add_argument("--config", required=True, help="key=value configuration file")
    run.add_argument("--seed", type=int, help="override the configured seed")
    run.add_argument("--out", default="./out", help="output directory (default ./out)")
    run.add_argument("--verbose", action="store_true", help="also write frames.csv")

    solve = sub.add_parser("solve", help="solve a serialized selection instance")
    solve.add_argument("instance")
    solve.add_argument("--solver", choices=sorted(SOLVERS), default="exact")

    sweep = sub.add_parser("sweep", help="vary one config key across values and seeds")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--param", required=True, help="config key to vary, e.g. alpha")
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sweep.add_argument("--seeds", default="1", help="comma-separated seeds")
    sweep.add_argument("--seed", type=int, help="single seed (overrides --seeds)")
    sweep.add_argument("--out", default="./out")
    sweep.add_argument("--jobs", type=int, default=1)
    return parser


def _log_to(path: Path):
    handler = logging.FileHandler(path, mode="w")
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("d2dsim")
    root.setLevel(logging.INFO)
    root.addHandler(handler)
    return handler


def run_to_dir(cfg, out: Path, verbose: bool = False) -> list:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.echo").write_text(dump_config(cfg))
    handler = _log_to(out / "run.log")
    frames_fh = None
    try:
        logging.getLogger("d2dsim").info("CQI tables:\n%s", radio.describe_tables())
        hook = None
        if verbose:
            frames_fh = open(out / "frames.csv", "w", newline="")
            writer = csv.writer(frames_fh, lineterminator="\n")
            writer.writerow(FRAME_CSV_HEADER)

            def hook(j, frames, assignment, problem):
                write_frames(writer, j, frames, assignment)

        reports = simulator.run(cfg, hook)
        simulator.write_intervals_csv(reports, out / "intervals.csv")
        simulator.write_summary(reports, cfg, out / "summary.json")
        return reports
    finally:
        if frames_fh is not None:
            frames_fh.close()
        logging.getLogger("d2dsim").removeHandler(handler)
        handler.close()


def _sweep_cell(args):
    cfg, out = args
    run_to_dir(cfg, out)
    return str(out)


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    reports = run_to_dir(cfg, Path(args.out), args.verbose)
    total = sum(len(r.connections) for r in reports)
    print(f"{len(reports)} intervals, {total} connection records written to {args.out}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    try:
        problem = load_instance(args.instance)
    except OSError as exc:
        raise ConfigError(f"cannot read instance file {args.instance}: {exc.strerror}") from None
    except ValueError as exc:
        raise ConfigError(f"{args.instance}: {exc}") from None
    result = SOLVERS[args.solver](problem)
    assert check_feasibility(problem, result) is None
    print(f"solver {args.solver}")
    print(f"objective {result.objective!r}")
    print(f"active {len(result.chosen)}")
    for n, m, i in result.chosen:
        print(f"{n} {m} {i} {problem.utilities[(n, m, i)]!r}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = load_config(args.config)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    seeds = [args.seed] if args.seed is not None else [int(s) for s in args.seeds.split(",") if s.strip()]
    cells = []
    for value in values:
        parsed = parse_value(args.param, value)
        for seed in seeds:
            cfg = base.replace(**{args.param: parsed, "seed": seed})
            cfg.validate()
            cells.append((cfg, Path(args.out) / f"{args.param}={value}" / f"seed={seed}"))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            done = list(pool.map(_sweep_cell, cells))
    else:
        done = [_sweep_cell(c) for c in cells]
    for d in done:
        print(d)
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "solve": _cmd_solve, "sweep": _cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
