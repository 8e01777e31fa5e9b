"""Command-line entry point for the benchmark harness.

    streamplan run <scenario-file-or-builtin> [--arms ...] [--seeds ...]
                   [--budget-s N] [--iterations N] [--out DIR] [--workers N]
    streamplan summarize <DIR>
    streamplan gen-grid <analytic-name> <resolution> <out>

Exit code 0 on success, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import bench
from .errors import StreamplanError
from .flowfield import GridField, save_grid


def _cmd_run(args) -> int:
    if os.path.exists(args.scenario):
        sc = bench.load_scenario(args.scenario)
    else:
        sc = bench.builtin_scenario(args.scenario)
    if args.budget_s is not None:
        sc = replace(sc, budget_wall_s=args.budget_s)
    if args.iterations is not None:
        sc = replace(sc, budget_iterations=args.iterations)
    arms = tuple(args.arms) if args.arms else None
    seeds = tuple(args.seeds) if args.seeds else None
    records = bench.run_scenario(sc, out_dir=args.out, arms=arms, seeds=seeds, workers=args.workers)
    print(bench.format_summary(bench.summarize(records)), end="")
    if args.out:
        print(f"metrics and path traces written to {args.out}")
    return 0


def _cmd_summarize(args) -> int:
    path = os.path.join(args.dir, "metrics.csv") if os.path.isdir(args.dir) else args.dir
    records = bench.read_metrics_csv(path)
    print(bench.format_summary(bench.summarize(records)), end="")
    return 0


def _cmd_gen_grid(args) -> int:
    sc = bench.builtin_scenario(args.name)
    f = bench.build_field(sc)
    grid = GridField.from_field(f, args.resolution, args.resolution)
    save_grid(grid, args.out)
    print(f"wrote {args.resolution}x{args.resolution} grid for {args.name!r} to {args.out}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="streamplan", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario's arm x seed grid")
    run.add_argument("scenario", help="scenario file path or built-in name")
    run.add_argument("--arms", nargs="+", help="arm tokens like l2-lsb:arc euclidean:step")
    run.add_argument("--seeds", nargs="+", type=int)
    run.add_argument("--budget-s", type=float, default=None, help="wall budget per run [s]")
    run.add_argument("--iterations", type=int, default=None, help="iteration cap per run")
    run.add_argument("--out", default=None, help="output directory for metrics and paths")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(fn=_cmd_run)

    summ = sub.add_parser("summarize", help="summarise a metrics directory or CSV")
    summ.add_argument("dir")
    summ.set_defaults(fn=_cmd_summarize)

    gen = sub.add_parser("gen-grid", help="sample a built-in analytic flow onto a FLOWGRID file")
    gen.add_argument("name", help="built-in scenario name, e.g. quad-vortex")
    gen.add_argument("resolution", type=int)
    gen.add_argument("out")
    gen.set_defaults(fn=_cmd_gen_grid)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (StreamplanError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
