"""Command-line interface: solve, bench, convert-sokoban, density."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .scene import SceneError, dump_scene, from_sokoban
from .search import Exhausted, Timeout
from .subgoals import SubgoalError, SubgoalParams, build_density

EXIT_OK, EXIT_NO_SOLUTION, EXIT_USAGE = 0, 1, 2


def _load(ref: str):
    return harness.load_scene(harness.resolve_scene(ref))


def cmd_solve(args) -> int:
    scene, c0 = _load(args.scene)
    try:
        sol = harness.solve(scene, c0, args.variant, args.seed, args.budget)
    except (Timeout, Exhausted) as e:
        print(f"{scene.name}: no solution ({type(e).__name__}: {e})", file=sys.stderr)
        if args.svg:
            Path(args.svg).write_text(harness.render_svg(scene, c0))
        return EXIT_NO_SOLUTION
    st = sol.stats
    print(
        f"{scene.name}: solved with {len(sol.plans)} plan(s), {sol.total_pickplaces} pick-place(s), "
        f"{st.nodes_expanded} expansion(s), {st.subproblems_attempted} subproblem(s) in {st.elapsed:.2f} s"
    )
    if args.out:
        Path(args.out).write_text(harness.plans_to_json(scene, sol.plans))
    if args.svg:
        Path(args.svg).write_text(harness.render_svg(scene, c0, sol.plans))
    return EXIT_OK


def cmd_bench(args) -> int:
    root = Path(args.scene_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"not a directory: {root}")
    scenes = sorted([*root.glob("*.json"), *root.glob("*.txt")])
    if not scenes:
        raise FileNotFoundError(f"no .json or .txt scenes in {root}")
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    records = harness.run_matrix(scenes, variants, range(args.seeds), args.budget, args.workers)
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            harness.write_csv(records, f)
    print(harness.format_table(harness.aggregate(records)))
    return EXIT_OK


def cmd_convert(args) -> int:
    src = Path(args.input)
    scene, c0 = from_sokoban(src.read_text(), name=args.name or src.stem)
    Path(args.output).write_text(dump_scene(scene, c0) + "\n")
    return EXIT_OK


def cmd_density(args) -> int:
    scene, c0 = _load(args.scene)
    try:
        o = int(args.object)
    except ValueError:
        o = scene.object_index(args.object)
    if not 0 <= o < len(scene.objects):
        raise KeyError(args.object)
    grid = build_density(scene, c0, o, SubgoalParams(grid_resolution=args.resolution))
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["row", "col", "x", "y", "free", "density"])
        for (j, i), d in np.ndenumerate(grid.density):
            p = grid.center(j, i)
            w.writerow([j, i, repr(p.x), repr(p.y), int(grid.free[j, i]), repr(float(d))])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="subgoal-tamp", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one scene")
    p.add_argument("scene", help="scene file or bundled scene name")
    p.add_argument("--variant", default="rnd-fpr", choices=list(harness.VARIANTS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=300.0, help="wall-clock budget in seconds")
    p.add_argument("--out", help="write the plan as JSON")
    p.add_argument("--svg", help="write an SVG rendering")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a variant matrix over a scene directory")
    p.add_argument("scene_dir")
    p.add_argument("--variants", default="rnd-fpr,baseline", help="comma-separated variant names")
    p.add_argument("--seeds", type=int, default=10, help="seeds 0..N-1")
    p.add_argument("--budget", type=float, default=300.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", help="write run records as CSV")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("convert-sokoban", help="convert an ASCII level to a scene document")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--name")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("density", help="dump the bottleneck density grid of one object")
    p.add_argument("scene")
    p.add_argument("--object", required=True, help="object index or id")
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", type=float, default=0.25)
    p.set_defaults(func=cmd_density)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if getattr(args, "seeds", 1) < 1:
        ap.error("--seeds must be >= 1")
    try:
        return args.func(args)
    except (SceneError, SubgoalError, FileNotFoundError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
