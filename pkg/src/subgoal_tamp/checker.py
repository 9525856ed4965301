"""Independent plan checker.

Replays plans state by state with the scalar reference predicates only; it
shares no collision code with the planner.
"""

from __future__ import annotations

import math
from typing import Sequence

from .geometry import Vec2, point_rect_distance
from .motion import Pick, Place, Plan
from .scene import FREE, Carrying, Configuration, Free, Scene, validate

TANGENCY_TOL = 1e-6
OFFSET_TOL = 1e-9


def _close(a: Vec2, b: Vec2, tol: float = OFFSET_TOL) -> bool:
    return abs(a.x - b.x) <= tol and abs(a.y - b.y) <= tol


def _interpolate(a: Vec2, b: Vec2, step: float) -> list[Vec2]:
    n = max(1, math.ceil(a.dist(b) / step))
    return [Vec2(a.x + (b.x - a.x) * k / n, a.y + (b.y - a.y) * k / n) for k in range(1, n + 1)]


def check_plan(scene: Scene, plan: Plan, step: float) -> list[str]:
    """Violations found while replaying one plan; empty when valid."""
    errors: list[str] = []
    c = plan.start
    if not validate(scene, c, FREE):
        errors.append("plan start is in collision")
    for k, seg in enumerate(plan.segments):
        where = f"segment {k}"
        if not seg.waypoints:
            errors.append(f"{where}: no waypoints")
            continue
        if not _close(seg.waypoints[0], c.agent):
            errors.append(f"{where}: first waypoint {seg.waypoints[0]} does not continue from {c.agent}")
        mode = seg.mode
        if isinstance(mode, Carrying):
            grip = c.agent - c.objects[mode.object]
            if not _close(grip, mode.offset):
                errors.append(f"{where}: carry offset {mode.offset} differs from grasp offset {grip}")
        elif not isinstance(mode, Free):
            errors.append(f"{where}: unknown mode {mode!r}")
            continue
        prev = seg.waypoints[0]
        for w in seg.waypoints[1:]:
            for p in _interpolate(prev, w, step):
                state = c.with_agent(p)
                if isinstance(mode, Carrying):
                    state = state.moved(mode.object, p - mode.offset)
                if not validate(scene, state, FREE if isinstance(mode, Free) else mode):
                    errors.append(f"{where}: collision at agent {p}")
                    break
            prev = w
        end = seg.waypoints[-1]
        moved = c.with_agent(end)
        if isinstance(mode, Carrying):
            moved = moved.moved(mode.object, end - mode.offset)
        for i, (a, b) in enumerate(zip(c.objects, moved.objects)):
            if a != b and not (isinstance(mode, Carrying) and i == mode.object):
                errors.append(f"{where}: object {i} moved outside a carrying segment")
        c = moved

        ev = seg.event
        if isinstance(ev, Pick):
            if not isinstance(mode, Free):
                errors.append(f"{where}: pick while already carrying")
            obj = scene.object_rect(ev.object, c.objects[ev.object])
            gap = point_rect_distance(obj, c.agent) - scene.agent_radius
            if abs(gap) > TANGENCY_TOL:
                errors.append(f"{where}: pick of object {ev.object} not tangent (gap {gap:.3g})")
            nxt = plan.segments[k + 1].mode if k + 1 < len(plan.segments) else None
            if not (isinstance(nxt, Carrying) and nxt.object == ev.object):
                errors.append(f"{where}: pick not followed by carrying object {ev.object}")
        elif isinstance(ev, Place):
            if not (isinstance(mode, Carrying) and mode.object == ev.object):
                errors.append(f"{where}: place of object {ev.object} while not carrying it")
            elif not _close(c.objects[ev.object], ev.position):
                errors.append(f"{where}: placed at {c.objects[ev.object]}, event says {ev.position}")
            if not validate(scene, c, FREE):
                errors.append(f"{where}: configuration after place is invalid")
        elif isinstance(mode, Carrying) and k == len(plan.segments) - 1:
            errors.append(f"{where}: plan ends while still carrying")
    if c != plan.end:
        errors.append("replayed end differs from the recorded plan end")
    return errors


def check_solution(scene: Scene, c0: Configuration, plans: Sequence[Plan], step: float) -> list[str]:
    """Chaining, per-plan validity and final goal containment."""
    errors: list[str] = []
    if not plans:
        return ["solution has no plans"]
    c = c0
    for i, plan in enumerate(plans):
        if plan.start != c:
            errors.append(f"plan {i}: start does not chain from the previous end")
        errors.extend(f"plan {i}: {e}" for e in check_plan(scene, plan, step))
        c = plan.end
    o = scene.goal_object
    if not scene.goal_region.contains_rect(scene.object_rect(o, c.objects[o])):
        errors.append("goal object is not inside the goal region at the end")
    return errors
