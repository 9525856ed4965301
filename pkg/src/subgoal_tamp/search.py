"""Forward search over pick-and-place subproblems."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .motion import MotionParams, Plan, PlanningError, NoFeasiblePose, pick_place, reachable, solve_pick_place
from .scene import Configuration, Scene
from .scoring import ScoreWeights, score
from .subgoals import SubgoalError, SubgoalParams, generate_candidates, select_subgoals

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchParams:
    similarity_resolution: float = 0.25
    max_similar: int = 2
    max_expansions_per_node: int = 2
    wall_clock_budget: float = 300.0
    subgoal_params: SubgoalParams = field(default_factory=SubgoalParams)
    motion_params: MotionParams = field(default_factory=MotionParams)
    prio_enabled: bool = True
    reject_enabled: bool = True
    # False reduces the search to a single goal attempt from the start
    propose_enabled: bool = True

    def __post_init__(self):
        if self.wall_clock_budget <= 0 or self.max_expansions_per_node < 1 or self.max_similar < 1:
            raise ValueError("budgets must be positive")
        if self.similarity_resolution <= 0:
            raise ValueError("similarity_resolution must be positive")


@dataclass(eq=False)
class SearchNode:
    config: Configuration
    parent: Optional[SearchNode] = None
    incoming_plan: Optional[Plan] = None
    expansions: int = 0
    score: float = 0.0


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    subproblems_attempted: int = 0
    subproblems_solved: int = 0
    goal_attempts: int = 0
    rejected: int = 0
    nodes_inserted: int = 0
    elapsed: float = 0.0
    subgoal_gen_time: float = 0.0


@dataclass(frozen=True)
class Solution:
    plans: tuple[Plan, ...]
    stats: SearchStats

    @property
    def total_pickplaces(self) -> int:
        return sum(p.pickplaces for p in self.plans)


class SearchFailure(Exception):
    def __init__(self, msg: str, stats: SearchStats):
        super().__init__(msg)
        self.stats = stats


class Timeout(SearchFailure):
    pass


class Exhausted(SearchFailure):
    pass


def select_node(nodes: Sequence[SearchNode], params: SearchParams) -> Optional[SearchNode]:
    """Least-expanded tier first; highest score within it (or FIFO without prioritization)."""
    for level in range(1, params.max_expansions_per_node + 1):
        best = None
        for n in nodes:
            if n.expansions < level:
                if not params.prio_enabled:
                    return n
                if best is None or n.score > best.score:
                    best = n
        if best is not None:
            return best
    return None


def _cells(c: Configuration, resolution: float) -> tuple[tuple[int, int], ...]:
    return tuple((math.floor(p.x / resolution), math.floor(p.y / resolution)) for p in c.objects)


def is_similar(a: Configuration, b: Configuration, resolution: float) -> bool:
    """Every movable object falls in the same grid cell in both (agent ignored)."""
    return _cells(a, resolution) == _cells(b, resolution)


def reject(nodes: Sequence[SearchNode], c_new: Configuration, params: SearchParams) -> bool:
    if not params.reject_enabled:
        return False
    key = _cells(c_new, params.similarity_resolution)
    similar = sum(_cells(n.config, params.similarity_resolution) == key for n in nodes)
    return similar >= params.max_similar


def try_goal(scene: Scene, c: Configuration, params: SearchParams, rng: np.random.Generator) -> Plan:
    """One pick-and-place of the goal object onto a placement fully inside the goal region."""
    o = scene.goal_object
    if scene.goal_region.contains_rect(scene.object_rect(o, c.objects[o])):
        return Plan((), c, c)
    g = scene.goal_region
    h = scene.objects[o].half_extents
    sx, sy = g.half_extents.x - h.x, g.half_extents.y - h.y
    if sx < 0 or sy < 0:
        raise NoFeasiblePose("goal object does not fit inside the goal region")
    lo = np.array([g.center.x - sx, g.center.y - sy])
    span = np.array([2 * sx, 2 * sy])

    def place_at(rng: np.random.Generator, n: int) -> np.ndarray:
        return lo + rng.random((n, 2)) * span

    return pick_place(scene, c, o, place_at, params.motion_params, rng)


def trace(node: SearchNode, goal_plan: Plan, stats: Optional[SearchStats] = None) -> Solution:
    plans = [goal_plan]
    while node.parent is not None:
        plans.append(node.incoming_plan)
        node = node.parent
    plans.reverse()
    for prev, nxt in zip(plans[:-1], plans[1:]):
        if prev.end != nxt.start:
            raise AssertionError("solution plans do not chain")
    return Solution(tuple(plans), stats or SearchStats())


def search(
    scene: Scene,
    c0: Configuration,
    params: SearchParams = SearchParams(),
    weights: ScoreWeights = ScoreWeights(),
    rng: Optional[np.random.Generator] = None,
) -> Solution:
    """Forward subproblem search from ``c0``.

    Raises :class:`Timeout` when the wall-clock budget runs out and
    :class:`Exhausted` when every node has been expanded the maximum number
    of times.
    """
    rng = rng if rng is not None else np.random.default_rng(params.motion_params.rng_seed)
    stats = SearchStats()
    t0 = time.perf_counter()
    mp = params.motion_params

    def check_time():
        stats.elapsed = time.perf_counter() - t0
        if stats.elapsed > params.wall_clock_budget:
            raise Timeout(f"no solution within {params.wall_clock_budget:g} s", stats)

    nodes = [SearchNode(c0, score=score(scene, c0, weights))]
    stats.nodes_inserted = 1
    while True:
        node = select_node(nodes, params)
        if node is None:
            stats.elapsed = time.perf_counter() - t0
            raise Exhausted("every configuration was expanded the maximum number of times", stats)
        check_time()
        node.expansions += 1
        stats.nodes_expanded += 1
        stats.goal_attempts += 1
        try:
            plan = try_goal(scene, node.config, params, rng)
        except PlanningError:
            pass
        else:
            stats.elapsed = time.perf_counter() - t0
            return trace(node, plan, stats)
        if not params.propose_enabled:
            stats.elapsed = time.perf_counter() - t0
            raise Exhausted("goal not reachable by a single pick-and-place", stats)

        for o in range(len(scene.objects)):
            check_time()
            if not reachable(scene, node.config, o, mp, rng):
                continue
            t = time.perf_counter()
            try:
                candidates = generate_candidates(scene, node.config, o, params.subgoal_params, rng)
            except SubgoalError as e:
                log.debug("no candidates for object %d: %s", o, e)
                candidates = []
            stats.subgoal_gen_time += time.perf_counter() - t
            subgoals = select_subgoals(scene, node.config, o, candidates, params.subgoal_params, weights, rng)
            for g in subgoals:
                check_time()
                stats.subproblems_attempted += 1
                try:
                    plan = solve_pick_place(scene, node.config, g, mp, rng)
                except PlanningError:
                    continue
                stats.subproblems_solved += 1
                if reject(nodes, plan.end, params):
                    stats.rejected += 1
                    continue
                nodes.append(SearchNode(plan.end, node, plan, score=score(scene, plan.end, weights)))
                stats.nodes_inserted += 1
