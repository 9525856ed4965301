"""Mode-constrained motion planning and the pick-and-place subproblem solver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import _kernels
from .geometry import Rect, RectSet, Vec2, contact_perimeter, contact_point
from .scene import FREE, Carrying, Configuration, Free, Mode, Scene

# Pick poses sit this far outside exact tangency so that closed-set collision
# checks do not flag the agent against the object it is about to grasp.
CONTACT_GAP = 1e-7


class PlanningError(Exception):
    pass


class BudgetExhausted(PlanningError):
    """Iteration cap hit.  Treat as unreachable, not as proof of infeasibility."""


class NoFeasiblePose(PlanningError):
    pass


@dataclass(frozen=True)
class MotionParams:
    rrt_step: float = 0.15
    rrt_max_iters: int = 3000
    reach_max_iters: int = 800
    pose_sample_tries: int = 200
    goal_tolerance: float = 0.05
    rng_seed: int = 0
    pose_targets: int = 16
    retry_rounds: int = 3
    goal_bias: float = 0.1

    def __post_init__(self):
        if self.rrt_step <= 0:
            raise ValueError("rrt_step must be positive")
        for name in ("rrt_max_iters", "reach_max_iters", "pose_sample_tries", "pose_targets", "retry_rounds"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class Pick:
    object: int


@dataclass(frozen=True)
class Place:
    object: int
    position: Vec2


Event = Union[Pick, Place, None]


@dataclass(frozen=True)
class PathSegment:
    mode: Mode
    waypoints: tuple[Vec2, ...]
    event: Event = None


@dataclass(frozen=True)
class Plan:
    segments: tuple[PathSegment, ...]
    start: Configuration
    end: Configuration

    @property
    def pickplaces(self) -> int:
        return sum(isinstance(s.event, Place) for s in self.segments)


@dataclass(frozen=True)
class Subgoal:
    object: int
    position: Vec2


@dataclass(frozen=True)
class PickPlacePose:
    offset: Vec2
    pick: Vec2
    place: Vec2


def replay(start: Configuration, segments: Sequence[PathSegment]) -> Configuration:
    """Configuration reached by executing ``segments`` from ``start``."""
    c = start
    for seg in segments:
        c = c.with_agent(seg.waypoints[-1])
        if isinstance(seg.mode, Carrying):
            c = c.moved(seg.mode.object, c.agent - seg.mode.offset)
    return c


class SweepChecker:
    """Exact swept-volume collision checks for one (scene, configuration, mode).

    Segments are checked continuously, so any discretization of an accepted
    segment is collision-free as well.
    """

    def __init__(self, scene: Scene, c: Configuration, mode: Mode = FREE, ignore: Sequence[int] = ()):
        carried = mode.object if isinstance(mode, Carrying) else None
        skip = set(ignore)
        if carried is not None:
            skip.add(carried)
        rects = list(scene.walls) + [scene.object_rect(i, p) for i, p in enumerate(c.objects) if i not in skip]
        self.obstacles = RectSet.from_rects(rects).columns()
        self.radius = scene.agent_radius
        b = scene.bounds
        lo = np.array([b.center.x - b.half_extents.x, b.center.y - b.half_extents.y])
        hi = np.array([b.center.x + b.half_extents.x, b.center.y + b.half_extents.y])
        self.lo, self.hi = lo + self.radius, hi - self.radius
        self.carry = carried is not None
        self.box_half = np.zeros(2)
        self.offset = np.zeros(2)
        if self.carry:
            h = scene.objects[carried].half_extents
            self.box_half = np.array([h.x, h.y])
            self.offset = np.array([mode.offset.x, mode.offset.y])
            # box center = agent - offset must stay inside the bounds
            self.lo = np.maximum(self.lo, lo + self.box_half + self.offset)
            self.hi = np.minimum(self.hi, hi - self.box_half + self.offset)

    def segments_ok(self, a, b) -> np.ndarray:
        a = np.ascontiguousarray(np.atleast_2d(np.asarray(a, dtype=float)))
        b = np.ascontiguousarray(np.atleast_2d(np.asarray(b, dtype=float)))
        return _kernels.segments_clear(
            self.obstacles, a, b, self.radius, self.carry, self.box_half, self.offset, self.lo, self.hi
        )

    def states_ok(self, p) -> np.ndarray:
        return self.segments_ok(p, p)

    def box_states_ok(self, centers, half: tuple[float, float]) -> np.ndarray:
        """Axis-aligned boxes at ``centers`` against the obstacle set (bounds not checked)."""
        centers = np.ascontiguousarray(np.atleast_2d(np.asarray(centers, dtype=float)))
        return _kernels.boxes_clear(self.obstacles, centers, np.asarray(half, dtype=float))


class _Tree:
    def __init__(self, roots: np.ndarray, capacity: int):
        self.pts = np.empty((capacity + len(roots), 2))
        self.parent = np.full(capacity + len(roots), -1, dtype=np.int64)
        self.pts[: len(roots)] = roots
        self.n = len(roots)

    def add(self, p: np.ndarray, parent: int) -> int:
        if self.n == len(self.pts):
            self.pts = np.concatenate([self.pts, np.empty_like(self.pts)])
            self.parent = np.concatenate([self.parent, np.full(len(self.parent), -1, dtype=np.int64)])
        self.pts[self.n] = p
        self.parent[self.n] = parent
        self.n += 1
        return self.n - 1

    def nearest(self, q: np.ndarray) -> int:
        return _kernels.nearest(self.pts, self.n, q[0], q[1])

    def branch(self, i: int) -> list[np.ndarray]:
        out = []
        while i >= 0:
            out.append(self.pts[i])
            i = int(self.parent[i])
        return out[::-1]

    def root_of(self, i: int) -> int:
        while self.parent[i] >= 0:
            i = int(self.parent[i])
        return i


def densify(points: Sequence[np.ndarray], step: float) -> list[Vec2]:
    out = [Vec2(float(points[0][0]), float(points[0][1]))]
    for p, q in zip(points[:-1], points[1:]):
        d = math.hypot(q[0] - p[0], q[1] - p[1])
        k = max(1, math.ceil(d / step))
        for i in range(1, k + 1):
            t = i / k
            out.append(Vec2(float(p[0] + t * (q[0] - p[0])), float(p[1] + t * (q[1] - p[1]))))
    return out


def plan_path(
    checker: SweepChecker,
    start: Vec2,
    targets: Sequence[Vec2],
    step: float,
    max_iters: int,
    rng: np.random.Generator,
    goal_bias: float = 0.1,
) -> tuple[list[Vec2], int]:
    """Bi-directional RRT-Connect from ``start`` to any of ``targets``.

    Returns the densified waypoint list and the index of the target reached.
    """
    s = np.array([start.x, start.y])
    tg = np.array([[t.x, t.y] for t in targets], dtype=float).reshape(-1, 2)
    if not checker.states_ok(s)[0]:
        raise PlanningError(f"start {start} is in collision")
    valid = np.flatnonzero(checker.states_ok(tg))
    if len(valid) == 0:
        raise BudgetExhausted("no collision-free target")
    tg_valid = tg[valid]

    direct = np.flatnonzero(checker.segments_ok(np.repeat(s[None], len(tg_valid), 0), tg_valid))
    if len(direct):
        k = int(direct[0])
        return densify([s, tg_valid[k]], step), int(valid[k])

    span = checker.hi - checker.lo
    tree_a = _Tree(s[None], max_iters)
    tree_b = _Tree(tg_valid, 2 * max_iters)
    a_is_start = True
    for _ in range(max_iters):
        if rng.random() < goal_bias:
            q = tg_valid[rng.integers(len(tg_valid))] if a_is_start else s
        else:
            q = checker.lo + rng.random(2) * span
        new = _extend(checker, tree_a, q, step)
        if new is not None:
            reached, b_idx = _connect(checker, tree_b, tree_a.pts[new], step)
            if reached:
                start_tree, i_s, goal_tree, i_g = (tree_a, new, tree_b, b_idx) if a_is_start else (tree_b, b_idx, tree_a, new)
                pts = start_tree.branch(i_s) + goal_tree.branch(i_g)[::-1][1:]
                root = goal_tree.root_of(i_g)
                return densify(pts, step), int(valid[root])
        tree_a, tree_b = tree_b, tree_a
        a_is_start = not a_is_start
    raise BudgetExhausted(f"no path within {max_iters} iterations")


def _extend(checker: SweepChecker, tree: _Tree, q: np.ndarray, step: float) -> Optional[int]:
    i = tree.nearest(q)
    near = tree.pts[i]
    d = math.hypot(q[0] - near[0], q[1] - near[1])
    if d == 0.0:
        return None
    new = q if d <= step else near + (q - near) * (step / d)
    if not checker.segments_ok(near, new)[0]:
        return None
    return tree.add(new, i)


def _connect(checker: SweepChecker, tree: _Tree, q: np.ndarray, step: float) -> tuple[bool, int]:
    i = tree.nearest(q)
    near = tree.pts[i]
    d = math.hypot(q[0] - near[0], q[1] - near[1])
    k = max(1, math.ceil(d / step))
    t = np.arange(k + 1)[:, None] / k
    pts = near + t * (q - near)
    ok = checker.segments_ok(pts[:-1], pts[1:])
    if ok.all():
        return True, tree.add(q, i)
    first_bad = int(np.argmin(ok))
    if first_bad == 0:
        return False, -1
    return False, tree.add(pts[first_bad], i)


def rrt_connect(
    scene: Scene,
    c: Configuration,
    mode: Mode,
    start: Vec2,
    targets: Sequence[Vec2],
    params: MotionParams,
    rng: np.random.Generator,
    max_iters: Optional[int] = None,
    ignore: Sequence[int] = (),
) -> list[Vec2]:
    checker = SweepChecker(scene, c, mode, ignore)
    path, _ = plan_path(
        checker, start, targets, params.rrt_step, max_iters or params.rrt_max_iters, rng, params.goal_bias
    )
    return path


# -- pick and place ------------------------------------------------------------

PositionSampler = Callable[[np.random.Generator, int], np.ndarray]


def _fixed_position(z: Vec2) -> PositionSampler:
    return lambda rng, n: np.tile([z.x, z.y], (n, 1))


def _pose_candidates(
    scene: Scene,
    c: Configuration,
    o: int,
    place_at: PositionSampler,
    params: MotionParams,
    rng: np.random.Generator,
    count: int,
) -> list[PickPlacePose]:
    """Rejection-sample contact offsets feasible at both the pick and the place pose."""
    n = params.pose_sample_tries
    pos = c.objects[o]
    half = scene.objects[o].half_extents
    unit = Rect(Vec2(0.0, 0.0), half)
    radius = scene.agent_radius + CONTACT_GAP
    per = contact_perimeter(unit, radius)
    s = rng.random(n) * per
    offsets = np.array([contact_point(unit, radius, si).as_tuple() for si in s])
    z = place_at(rng, n)
    picks = np.array([pos.x, pos.y]) + offsets
    places = z + offsets

    free = SweepChecker(scene, c, FREE)
    ok = free.states_ok(picks)
    # at the place pose the object has left its old spot; every other body stays
    away = SweepChecker(scene, c, FREE, ignore=(o,))
    ok &= away.states_ok(places)
    ok &= away.box_states_ok(z, (half.x, half.y))
    b = scene.bounds
    ok &= np.all(np.abs(z - (b.center.x, b.center.y)) <= (b.half_extents.x - half.x, b.half_extents.y - half.y), axis=1)

    out = []
    for i in np.flatnonzero(ok)[:count]:
        out.append(
            PickPlacePose(
                Vec2(float(offsets[i, 0]), float(offsets[i, 1])),
                Vec2(float(picks[i, 0]), float(picks[i, 1])),
                Vec2(float(places[i, 0]), float(places[i, 1])),
            )
        )
    return out


def sample_pick_place(
    scene: Scene, c: Configuration, g: Subgoal, params: MotionParams, rng: np.random.Generator
) -> PickPlacePose:
    poses = _pose_candidates(scene, c, g.object, _fixed_position(g.position), params, rng, 1)
    if not poses:
        raise NoFeasiblePose(f"no feasible grasp for object {g.object} to {g.position} in {params.pose_sample_tries} tries")
    return poses[0]


def pick_place(
    scene: Scene,
    c: Configuration,
    o: int,
    place_at: PositionSampler,
    params: MotionParams,
    rng: np.random.Generator,
) -> Plan:
    """Two-phase plan: free motion to a grasp, then carry ``o`` to a sampled placement."""
    err: PlanningError = NoFeasiblePose(f"no feasible grasp for object {o}")
    for _ in range(params.retry_rounds):
        poses = _pose_candidates(scene, c, o, place_at, params, rng, params.pose_targets)
        if not poses:
            err = NoFeasiblePose(f"no feasible grasp for object {o} in {params.pose_sample_tries} tries")
            continue
        free = SweepChecker(scene, c, FREE)
        try:
            approach, k = plan_path(
                free, c.agent, [p.pick for p in poses], params.rrt_step, params.rrt_max_iters, rng, params.goal_bias
            )
        except BudgetExhausted as e:
            err = e
            continue
        pose = poses[k]
        mode = Carrying(o, pose.offset)
        carrier = SweepChecker(scene, c, mode)
        try:
            transfer, _ = plan_path(
                carrier, pose.pick, [pose.place], params.rrt_step, params.rrt_max_iters, rng, params.goal_bias
            )
        except BudgetExhausted as e:
            err = e
            continue
        # the approach ends exactly on the grasp pose
        approach[-1] = pose.pick
        transfer[0] = pose.pick
        transfer[-1] = pose.place
        placed = pose.place - pose.offset
        segments = (
            PathSegment(FREE, tuple(approach), Pick(o)),
            PathSegment(mode, tuple(transfer), Place(o, placed)),
        )
        return Plan(segments, c, replay(c, segments))
    raise err


def solve_pick_place(
    scene: Scene, c: Configuration, g: Subgoal, params: MotionParams, rng: np.random.Generator
) -> Plan:
    """Auxiliary subproblem: move ``g.object`` to ``g.position`` in one pick and one place."""
    return pick_place(scene, c, g.object, _fixed_position(g.position), params, rng)


def reachable(scene: Scene, c: Configuration, o: int, params: MotionParams, rng: np.random.Generator) -> bool:
    """Budgeted RRT from the agent to any contact pose of ``o``; ``o`` itself is not an obstacle.

    A ``False`` answer is advisory: hard-to-reach objects may be misreported.
    """
    checker = SweepChecker(scene, c, FREE, ignore=(o,))
    obj = scene.object_rect(o, c.objects[o])
    radius = scene.agent_radius + CONTACT_GAP
    per = contact_perimeter(obj, radius)
    phase = rng.random()
    targets = [contact_point(obj, radius, per * (phase + i / 16)) for i in range(16)]
    try:
        plan_path(checker, c.agent, targets, params.rrt_step, params.reach_max_iters, rng, params.goal_bias)
    except BudgetExhausted:
        return False
    return True
