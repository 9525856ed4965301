"""World description, configurations and scene ingestion."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence, Union

from .geometry import Disc, Rect, RectSet, Vec2, rect_disc_collide, rect_rect_collide, segment_clear


class SceneError(ValueError):
    pass


class SceneFormatError(SceneError):
    pass


class MissingGoalObjectError(SceneError):
    pass


class InitialCollisionError(SceneError):
    pass


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    half_extents: Vec2


@dataclass(frozen=True)
class Scene:
    name: str
    bounds: Rect
    walls: tuple[Rect, ...]
    objects: tuple[ObjectSpec, ...]
    agent_radius: float
    goal_region: Rect
    goal_object: int
    # object index -> stored positions; loaded verbatim from the document
    human_subgoals: dict[int, tuple[Vec2, ...]] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if not 0 <= self.goal_object < len(self.objects):
            raise MissingGoalObjectError(f"goal object index {self.goal_object} not among {len(self.objects)} objects")

    @cached_property
    def wall_set(self) -> RectSet:
        return RectSet.from_rects(self.walls)

    @property
    def scale(self) -> float:
        """Side length of the square the bounds are normalized to."""
        h = self.bounds.half_extents
        return 2.0 * max(h.x, h.y)

    def object_index(self, name: str) -> int:
        for i, spec in enumerate(self.objects):
            if spec.name == name:
                return i
        raise KeyError(name)

    def object_rect(self, i: int, pos: Vec2) -> Rect:
        return Rect(pos, self.objects[i].half_extents)

    def agent_disc(self, pos: Vec2) -> Disc:
        return Disc(pos, self.agent_radius)


@dataclass(frozen=True)
class Configuration:
    agent: Vec2
    objects: tuple[Vec2, ...]

    def moved(self, i: int, pos: Vec2) -> Configuration:
        objs = list(self.objects)
        objs[i] = pos
        return replace(self, objects=tuple(objs))

    def with_agent(self, pos: Vec2) -> Configuration:
        return replace(self, agent=pos)


@dataclass(frozen=True)
class Free:
    def __repr__(self):
        return "FREE"


FREE = Free()


@dataclass(frozen=True)
class Carrying:
    object: int
    # agent center minus object center, fixed while carrying
    offset: Vec2


Mode = Union[Free, Carrying]


def carried_pose(c: Configuration, mode: Mode) -> Configuration:
    """Configuration with the carried object moved to its rigid-attachment pose."""
    if isinstance(mode, Carrying):
        return c.moved(mode.object, c.agent - mode.offset)
    return c


def _inside_bounds(scene: Scene, r: Rect) -> bool:
    return scene.bounds.contains_rect(r)


def validate(scene: Scene, c: Configuration, mode: Mode = FREE) -> bool:
    """Reference validity check built from the scalar geometry predicates."""
    if len(c.objects) != len(scene.objects):
        raise ValueError(f"configuration has {len(c.objects)} objects, scene has {len(scene.objects)}")
    c = carried_pose(c, mode)
    carried = mode.object if isinstance(mode, Carrying) else None
    b = scene.bounds
    r = scene.agent_radius
    a = c.agent
    bx0, bx1 = b.center.x - b.half_extents.x, b.center.x + b.half_extents.x
    by0, by1 = b.center.y - b.half_extents.y, b.center.y + b.half_extents.y
    if not (bx0 + r <= a.x <= bx1 - r and by0 + r <= a.y <= by1 - r):
        return False
    disc = scene.agent_disc(a)
    if any(rect_disc_collide(w, disc) for w in scene.walls):
        return False
    rects = [scene.object_rect(i, p) for i, p in enumerate(c.objects)]
    for i, rect in enumerate(rects):
        if not _inside_bounds(scene, rect):
            return False
        if i != carried and rect_disc_collide(rect, disc):
            return False
        if any(rect_rect_collide(rect, w) for w in scene.walls):
            return False
        for j in range(i + 1, len(rects)):
            if rect_rect_collide(rect, rects[j]):
                return False
    return True


SightAnchor = Union[str, int]  # "agent", "goal", or an object index


def anchor_point(scene: Scene, c: Configuration, anchor: SightAnchor) -> Vec2:
    if anchor == "agent":
        return c.agent
    if anchor == "goal":
        return scene.goal_region.center
    return c.objects[anchor]


def sight_blockers(scene: Scene, c: Configuration, anchors: Sequence[SightAnchor], movables_block: bool = True) -> list[Rect]:
    blockers = list(scene.walls)
    if movables_block:
        blockers += [scene.object_rect(i, p) for i, p in enumerate(c.objects) if i not in anchors]
    return blockers


def line_of_sight(
    scene: Scene, c: Configuration, a: SightAnchor, b: SightAnchor, movables_block: bool = True
) -> bool:
    """Straight segment between two anchor centers is clear of walls and other movables."""
    blockers = sight_blockers(scene, c, (a, b), movables_block)
    return segment_clear(anchor_point(scene, c, a), anchor_point(scene, c, b), blockers)


# -- native format -------------------------------------------------------------


def _rect_from(d: dict, angle: bool = False) -> Rect:
    return Rect(Vec2(float(d["cx"]), float(d["cy"])), Vec2(float(d["hw"]), float(d["hh"])), float(d.get("angle", 0.0)) if angle else 0.0)


def _rect_doc(r: Rect, angle: bool = False) -> dict:
    d = {"cx": r.center.x, "cy": r.center.y, "hw": r.half_extents.x, "hh": r.half_extents.y}
    if angle:
        d["angle"] = r.angle
    return d


def parse_scene(text: str) -> tuple[Scene, Configuration]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneFormatError(f"malformed scene document: {e}") from None
    if not isinstance(doc, dict):
        raise SceneFormatError("malformed scene document: top level must be an object")
    try:
        bounds = _rect_from(doc["bounds"])
        walls = tuple(_rect_from(w, angle=True) for w in doc.get("walls", []))
        agent = doc["agent"]
        objects = []
        poses = []
        for o in doc["objects"]:
            objects.append(ObjectSpec(str(o["id"]), Vec2(float(o["hw"]), float(o["hh"]))))
            poses.append(Vec2(float(o["cx"]), float(o["cy"])))
        goal = _rect_from(doc["goal"])
        goal_id = str(doc["goal_object"])
        name = str(doc.get("name", "unnamed"))
        radius = float(agent["radius"])
        start = Configuration(Vec2(float(agent["x"]), float(agent["y"])), tuple(poses))
    except (KeyError, TypeError, ValueError) as e:
        raise SceneFormatError(f"malformed scene document: {type(e).__name__}: {e}") from None
    names = [o.name for o in objects]
    if len(set(names)) != len(names):
        raise SceneFormatError("malformed scene document: duplicate object ids")
    if goal_id not in names:
        raise MissingGoalObjectError(f"goal object {goal_id!r} not among objects {names}")
    human = {}
    for key, pts in doc.get("human_subgoals", {}).items():
        if str(key) not in names:
            raise SceneFormatError(f"human_subgoals refers to unknown object {key!r}")
        try:
            human[names.index(str(key))] = tuple(Vec2(float(x), float(y)) for x, y in pts)
        except (TypeError, ValueError) as e:
            raise SceneFormatError(f"malformed human_subgoals: {e}") from None
    scene = Scene(name, bounds, walls, tuple(objects), radius, goal, names.index(goal_id), human)
    for w in (*walls, goal):
        if not bounds.contains_rect(w):
            raise SceneFormatError(f"rect at {w.center} lies outside the scene bounds")
    if not validate(scene, start, FREE):
        raise InitialCollisionError("initial configuration in collision")
    return scene, start


def scene_to_doc(scene: Scene, c: Configuration) -> dict:
    doc = {
        "name": scene.name,
        "bounds": _rect_doc(scene.bounds),
        "walls": [_rect_doc(w, angle=True) for w in scene.walls],
        "agent": {"x": c.agent.x, "y": c.agent.y, "radius": scene.agent_radius},
        "objects": [
            {"id": o.name, "cx": p.x, "cy": p.y, "hw": o.half_extents.x, "hh": o.half_extents.y}
            for o, p in zip(scene.objects, c.objects)
        ],
        "goal": _rect_doc(scene.goal_region),
        "goal_object": scene.objects[scene.goal_object].name,
    }
    if scene.human_subgoals:
        doc["human_subgoals"] = {
            scene.objects[i].name: [[p.x, p.y] for p in pts] for i, pts in sorted(scene.human_subgoals.items())
        }
    return doc


def dump_scene(scene: Scene, c: Configuration) -> str:
    return json.dumps(scene_to_doc(scene, c), indent=1)


# -- Sokoban conversion --------------------------------------------------------

SOKOBAN_CELL = 1.0
SOKOBAN_OBJECT_HALF = 0.4
SOKOBAN_AGENT_RADIUS = 0.3


class SokobanFormatError(SceneFormatError):
    pass


def from_sokoban(lines: str | Sequence[str], name: str = "sokoban") -> tuple[Scene, Configuration]:
    """Convert an ASCII level into a continuous scene.

    ``#`` wall, ``@`` agent, ``B`` goal object, ``$`` obstacle object,
    ``.`` goal cell, space floor.  Row 0 is the top of the level.
    """
    if isinstance(lines, str):
        lines = lines.split("\n")
    rows = [ln.rstrip("\n\r") for ln in lines]
    # blank lines around the level are ignored; rows of spaces are floor
    while rows and not rows[0]:
        rows.pop(0)
    while rows and not rows[-1]:
        rows.pop()
    if not rows:
        raise SokobanFormatError("empty level")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise SokobanFormatError("non-rectangular grid: all rows must have the same length")
    height = len(rows)
    s = SOKOBAN_CELL

    def center(col: int, row: int) -> Vec2:
        return Vec2((col + 0.5) * s, (height - 1 - row + 0.5) * s)

    walls, goals, agents, goal_objs, obstacles = [], [], [], [], []
    for row, line in enumerate(rows):
        for col, ch in enumerate(line):
            p = center(col, row)
            if ch == "#":
                walls.append(Rect(p, Vec2(s / 2, s / 2)))
            elif ch == "@":
                agents.append(p)
            elif ch == "B":
                goal_objs.append(p)
            elif ch == "$":
                obstacles.append(p)
            elif ch == ".":
                goals.append(p)
            elif ch != " ":
                raise SokobanFormatError(f"unknown character {ch!r} at row {row}, column {col}")
    if len(goal_objs) != 1:
        raise SokobanFormatError(f"exactly one 'B' (goal object) required, found {len(goal_objs)}")
    if len(agents) != 1:
        raise SokobanFormatError(f"exactly one '@' (agent) required, found {len(agents)}")
    if not goals:
        raise SokobanFormatError("at least one '.' (goal cell) required, found none")
    x0 = min(p.x for p in goals) - s / 2
    x1 = max(p.x for p in goals) + s / 2
    y0 = min(p.y for p in goals) - s / 2
    y1 = max(p.y for p in goals) + s / 2
    goal = Rect(Vec2((x0 + x1) / 2, (y0 + y1) / 2), Vec2((x1 - x0) / 2, (y1 - y0) / 2))
    half = Vec2(SOKOBAN_OBJECT_HALF * s, SOKOBAN_OBJECT_HALF * s)
    objects = [ObjectSpec("goal", half)] + [ObjectSpec(f"obstacle{i + 1}", half) for i in range(len(obstacles))]
    bounds = Rect(Vec2(width * s / 2, height * s / 2), Vec2(width * s / 2, height * s / 2))
    scene = Scene(name, bounds, tuple(walls), tuple(objects), SOKOBAN_AGENT_RADIUS * s, goal, 0)
    start = Configuration(agents[0], tuple([goal_objs[0], *obstacles]))
    if not validate(scene, start, FREE):
        raise InitialCollisionError("initial configuration in collision")
    return scene, start
