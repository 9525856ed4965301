"""Benchmark variants, run records, plan files and SVG rendering."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .geometry import Rect, Vec2
from .motion import MotionParams, PathSegment, Pick, Place, Plan
from .scene import FREE, Carrying, Configuration, Scene, from_sokoban, parse_scene
from .search import Exhausted, SearchParams, Solution, Timeout, search
from .subgoals import SubgoalParams


@dataclass(frozen=True)
class VariantSpec:
    generator: str = "rnd"
    filter: bool = True
    prio: bool = True
    reject: bool = True
    baseline_only: bool = False

    def __post_init__(self):
        if self.baseline_only and (self.filter or self.prio or self.reject):
            raise ValueError("baseline_only excludes filter, prio and reject")


VARIANTS = {
    "rnd-fpr": VariantSpec("rnd", True, True, True),
    "rnd-fp": VariantSpec("rnd", True, True, False),
    "rnd-fr": VariantSpec("rnd", True, False, True),
    "rnd-r": VariantSpec("rnd", False, False, True),
    "btl-fpr": VariantSpec("btl", True, True, True),
    "hum-r": VariantSpec("hum", False, False, True),
    "baseline": VariantSpec("rnd", False, False, False, baseline_only=True),
}


def variant_params(variant: str, seed: int = 0, budget: float = 300.0, base: Optional[SearchParams] = None) -> SearchParams:
    try:
        v = VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}") from None
    base = base or SearchParams()
    return replace(
        base,
        wall_clock_budget=budget,
        subgoal_params=replace(base.subgoal_params, generator=v.generator, filter_enabled=v.filter),
        motion_params=replace(base.motion_params, rng_seed=seed),
        prio_enabled=v.prio,
        reject_enabled=v.reject,
        propose_enabled=not v.baseline_only,
    )


def solve(scene: Scene, c0: Configuration, variant: str, seed: int = 0, budget: float = 300.0) -> Solution:
    """One seeded search with the given variant; raises Timeout or Exhausted."""
    params = variant_params(variant, seed, budget)
    return search(scene, c0, params, rng=np.random.default_rng(seed))


# -- scenes ----------------------------------------------------------------------


def load_scene(path: str | Path) -> tuple[Scene, Configuration]:
    """Scene from a JSON document or, for ``.txt`` files, an ASCII level."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".txt":
        return from_sokoban(text, name=path.stem)
    return parse_scene(text)


def bundled_dir() -> Path:
    return Path(str(resources.files(__package__).joinpath("scenes")))


def bundled_scenes(kind: str = "all") -> list[Path]:
    """Bundled scene files: ``manual`` (JSON), ``sokoban`` (ASCII) or ``all``."""
    root = bundled_dir()
    pats = {"manual": ["*.json"], "sokoban": ["*.txt"], "all": ["*.json", "*.txt"]}[kind]
    return sorted(p for pat in pats for p in root.glob(pat))


def resolve_scene(ref: str) -> Path:
    """A path, or the name of a bundled scene (case-insensitive, suffix optional)."""
    p = Path(ref)
    if p.exists():
        return p
    for q in bundled_scenes():
        if q.stem.lower() == p.stem.lower() or q.name.lower() == p.name.lower():
            return q
    raise FileNotFoundError(f"no scene file or bundled scene named {ref!r}")


# -- run records -------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    scene: str
    variant: str
    seed: int
    solved: bool
    elapsed: float
    subgoal_gen_time: float
    nodes_expanded: int
    subproblems_attempted: int
    subproblems_solved: int
    pickplace_count: int


def run_one(path: Path, variant: str, seed: int, budget: float) -> tuple[RunRecord, Optional[Solution]]:
    scene, c0 = load_scene(path)
    try:
        sol = solve(scene, c0, variant, seed, budget)
    except (Timeout, Exhausted) as e:
        st, ok, n_pp = e.stats, False, 0
        sol = None
    else:
        st, ok, n_pp = sol.stats, True, sol.total_pickplaces
    rec = RunRecord(
        scene.name, variant, seed, ok, st.elapsed, st.subgoal_gen_time,
        st.nodes_expanded, st.subproblems_attempted, st.subproblems_solved, n_pp,
    )
    return rec, sol


def _record_only(args) -> RunRecord:
    return run_one(*args)[0]


def run_matrix(
    scenes: Sequence[str | Path],
    variants: Sequence[str],
    seeds: Iterable[int],
    budget: float = 300.0,
    workers: int = 1,
) -> list[RunRecord]:
    """One record per (scene, variant, seed), in that nesting order."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed required")
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}")
    jobs = [(Path(s), v, seed, budget) for s in scenes for v in variants for seed in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_record_only, jobs))
    return [_record_only(j) for j in jobs]


CSV_COLUMNS = [f.name for f in fields(RunRecord)]


def write_csv(records: Sequence[RunRecord], f) -> None:
    # CRLF rows (RFC 4180); with a bare "\n" terminator a "\r" inside a name would go unquoted
    w = csv.writer(f, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([repr(x) if isinstance(x, float) else x for x in astuple(r)])


def read_csv(f) -> list[RunRecord]:
    rows = csv.reader(f)
    header = next(rows, None)
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    out = []
    for row in rows:
        vals = []
        for fld, s in zip(fields(RunRecord), row):
            if fld.type == "bool":
                if s not in ("True", "False"):
                    raise ValueError(f"bad boolean {s!r}")
                vals.append(s == "True")
            elif fld.type == "int":
                vals.append(int(s))
            elif fld.type == "float":
                vals.append(float(s))
            else:
                vals.append(s)
        out.append(RunRecord(*vals))
    return out


def records_to_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


@dataclass(frozen=True)
class Aggregate:
    scene: str
    variant: str
    runs: int
    solved: int
    rate: float
    mean_time: float
    std_time: float
    # time spent outside subgoal generation
    mean_time_wo_gen: float
    median_attempted: float


def aggregate(records: Sequence[RunRecord]) -> list[Aggregate]:
    """Per (scene, variant): solve rate over all runs, time mean/std over solved runs."""
    groups: dict[tuple[str, str], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.scene, r.variant), []).append(r)
    out = []
    for (scene, variant), rs in groups.items():
        ok = [r for r in rs if r.solved]
        t = np.array([r.elapsed for r in ok])
        t_wo = np.array([r.elapsed - r.subgoal_gen_time for r in ok])
        out.append(Aggregate(
            scene, variant, len(rs), len(ok), len(ok) / len(rs),
            float(t.mean()) if len(ok) else math.nan,
            float(t.std()) if len(ok) else math.nan,
            float(t_wo.mean()) if len(ok) else math.nan,
            float(np.median([r.subproblems_attempted for r in rs])),
        ))
    return out


def format_table(aggs: Sequence[Aggregate]) -> str:
    lines = [f"{'scene':<16} {'variant':<9} {'rate':>5} {'time (s)':>16} {'w/o gen':>8} {'attempted':>9}"]
    for a in aggs:
        t = "-" if a.solved == 0 else f"{a.mean_time:.2f}+-{a.std_time:.2f}"
        wo = "-" if a.solved == 0 else f"{a.mean_time_wo_gen:.2f}"
        lines.append(
            f"{a.scene:<16} {a.variant:<9} {a.rate:>5.2f} {t:>16} {wo:>8} {a.median_attempted:>9.1f}"
        )
    return "\n".join(lines)


# -- plan files ------------------------------------------------------------------------


def _pt(v: Vec2) -> list[float]:
    return [v.x, v.y]


def _vec(p) -> Vec2:
    return Vec2(float(p[0]), float(p[1]))


def _config_doc(c: Configuration) -> dict:
    return {"agent": _pt(c.agent), "objects": [_pt(p) for p in c.objects]}


def _config(d: dict) -> Configuration:
    return Configuration(_vec(d["agent"]), tuple(_vec(p) for p in d["objects"]))


def segment_doc(seg: PathSegment) -> dict:
    carrying = isinstance(seg.mode, Carrying)
    ev = seg.event
    if isinstance(ev, Pick):
        event = {"type": "pick", "object": ev.object}
    elif isinstance(ev, Place):
        event = {"type": "place", "object": ev.object, "position": _pt(ev.position)}
    else:
        event = None
    return {
        "mode": "carrying" if carrying else "free",
        "object": seg.mode.object if carrying else None,
        "offset": _pt(seg.mode.offset) if carrying else None,
        "waypoints": [_pt(w) for w in seg.waypoints],
        "event": event,
    }


def _segment(d: dict) -> PathSegment:
    if d["mode"] == "carrying":
        mode = Carrying(int(d["object"]), _vec(d["offset"]))
    elif d["mode"] == "free":
        mode = FREE
    else:
        raise ValueError(f"unknown mode {d['mode']!r}")
    ev = d.get("event")
    if ev is None:
        event = None
    elif ev["type"] == "pick":
        event = Pick(int(ev["object"]))
    elif ev["type"] == "place":
        event = Place(int(ev["object"]), _vec(ev["position"]))
    else:
        raise ValueError(f"unknown event {ev['type']!r}")
    return PathSegment(mode, tuple(_vec(w) for w in d["waypoints"]), event)


def plans_to_json(scene: Scene, plans: Sequence[Plan]) -> str:
    doc = {
        "scene": scene.name,
        "objects": [o.name for o in scene.objects],
        "plans": [
            {"start": _config_doc(p.start), "end": _config_doc(p.end), "segments": [segment_doc(s) for s in p.segments]}
            for p in plans
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def plans_from_json(text: str) -> list[Plan]:
    doc = json.loads(text)
    return [
        Plan(tuple(_segment(s) for s in p["segments"]), _config(p["start"]), _config(p["end"]))
        for p in doc["plans"]
    ]


# -- SVG --------------------------------------------------------------------------------

WALL_COLOR = "#8b5a2b"
GOAL_COLOR = "#d62728"
GOAL_OBJECT_COLOR = "#1f77b4"
OBJECT_COLOR = "#7f7f7f"
AGENT_COLOR = "#f2c200"
SUBGOAL_COLOR = "#a0a0a0"


def render_svg(
    scene: Scene,
    c0: Configuration,
    plans: Optional[Sequence[Plan]] = None,
    subgoals: Sequence[Vec2] = (),
    px_per_unit: float = 40.0,
) -> str:
    """Deterministic SVG of the scene and, optionally, the agent and object trails of a solution."""
    b = scene.bounds
    x0, y1 = b.center.x - b.half_extents.x, b.center.y + b.half_extents.y
    k = px_per_unit
    w, h = 2 * b.half_extents.x * k, 2 * b.half_extents.y * k

    def X(x: float) -> str:
        return f"{(x - x0) * k:.3f}"

    def Y(y: float) -> str:
        return f"{(y1 - y) * k:.3f}"

    def rect(r: Rect, fill: str, extra: str = "") -> str:
        pts = " ".join(f"{X(p.x)},{Y(p.y)}" for p in r.corners())
        return f'<polygon points="{pts}" fill="{fill}"{extra}/>'

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" viewBox="0 0 {w:.3f} {h:.3f}">',
        f'<rect x="0" y="0" width="{w:.3f}" height="{h:.3f}" fill="white" stroke="black"/>',
        rect(scene.goal_region, GOAL_COLOR, ' fill-opacity="0.5"'),
    ]
    out += [rect(wall, WALL_COLOR) for wall in scene.walls]
    for z in subgoals:
        out.append(f'<circle cx="{X(z.x)}" cy="{Y(z.y)}" r="{0.06 * k:.3f}" fill="{SUBGOAL_COLOR}"/>')
    final = c0
    for plan in plans or ():
        for seg in plan.segments:
            pts = " ".join(f"{X(p.x)},{Y(p.y)}" for p in seg.waypoints)
            out.append(f'<polyline points="{pts}" fill="none" stroke="{AGENT_COLOR}" stroke-width="2"/>')
            if isinstance(seg.mode, Carrying):
                off = seg.mode.offset
                color = GOAL_OBJECT_COLOR if seg.mode.object == scene.goal_object else OBJECT_COLOR
                opts = " ".join(f"{X(p.x - off.x)},{Y(p.y - off.y)}" for p in seg.waypoints)
                out.append(f'<polyline points="{opts}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="4 3"/>')
            if isinstance(seg.event, Pick):
                q = seg.waypoints[-1]
                out.append(f'<circle class="pick" cx="{X(q.x)}" cy="{Y(q.y)}" r="{0.08 * k:.3f}" fill="none" stroke="black"/>')
            elif isinstance(seg.event, Place):
                q = seg.event.position
                s = 0.1 * k
                out.append(
                    f'<path class="place" d="M {float(X(q.x)) - s:.3f} {float(Y(q.y)) - s:.3f} l {2 * s:.3f} {2 * s:.3f} '
                    f'm 0 {-2 * s:.3f} l {-2 * s:.3f} {2 * s:.3f}" stroke="black" fill="none"/>'
                )
        final = plan.end
    for i, p in enumerate(c0.objects):
        color = GOAL_OBJECT_COLOR if i == scene.goal_object else OBJECT_COLOR
        out.append(rect(scene.object_rect(i, p), color, ' fill-opacity="0.9"'))
    if plans:
        for i, p in enumerate(final.objects):
            color = GOAL_OBJECT_COLOR if i == scene.goal_object else OBJECT_COLOR
            out.append(rect(scene.object_rect(i, p), "none", f' stroke="{color}" stroke-width="2"'))
    a = c0.agent
    out.append(f'<circle cx="{X(a.x)}" cy="{Y(a.y)}" r="{scene.agent_radius * k:.3f}" fill="{AGENT_COLOR}" stroke="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
