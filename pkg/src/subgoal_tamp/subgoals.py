"""Subgoal position generators (random, bottleneck, human), filtering and proposal."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _kernels
from .geometry import RectSet, Vec2
from .motion import Subgoal
from .scene import Configuration, Scene
from .scoring import ScoreWeights, score

Generator = Literal["rnd", "btl", "hum"]

# floor added to every free cell's density before Btl sampling
BTL_EPSILON = 1e-6


class SubgoalError(Exception):
    pass


class SamplingStarved(SubgoalError):
    pass


class NoFreeSourceCell(SubgoalError):
    pass


class MissingHumanSubgoals(SubgoalError):
    pass


@dataclass(frozen=True)
class SubgoalParams:
    n_candidates: int = 100
    k_selected: int = 4
    generator: Generator = "rnd"
    filter_enabled: bool = True
    grid_resolution: float = 0.25
    source_radius: float = 0.5

    def __post_init__(self):
        if self.k_selected > self.n_candidates:
            raise ValueError("k_selected must not exceed n_candidates")
        if self.grid_resolution <= 0:
            raise ValueError("grid_resolution must be positive")
        if self.generator not in ("rnd", "btl", "hum"):
            raise ValueError(f"unknown generator {self.generator!r}")


class _Placement:
    """Collision test for object ``o`` placed at arbitrary centers."""

    def __init__(self, scene: Scene, c: Configuration, o: int, movables: bool = True):
        rects = list(scene.walls)
        if movables:
            rects += [scene.object_rect(i, p) for i, p in enumerate(c.objects) if i != o]
        self.obstacles = RectSet.from_rects(rects).columns()
        h = scene.objects[o].half_extents
        self.half = np.array([h.x, h.y])
        b = scene.bounds
        self.lo = np.array([b.center.x - b.half_extents.x + h.x, b.center.y - b.half_extents.y + h.y])
        self.hi = np.array([b.center.x + b.half_extents.x - h.x, b.center.y + b.half_extents.y - h.y])

    def ok(self, pts: np.ndarray) -> np.ndarray:
        pts = np.ascontiguousarray(np.atleast_2d(pts), dtype=float)
        inside = np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        return inside & _kernels.boxes_clear(self.obstacles, pts, self.half)


def gen_random(scene: Scene, c: Configuration, o: int, n: int, rng: np.random.Generator) -> list[Vec2]:
    """``n`` uniform positions where ``o`` overlaps no wall and no other object."""
    place = _Placement(scene, c, o)
    found: list[np.ndarray] = []
    budget = 50 * n
    drawn = 0
    while len(found) < n and drawn < budget:
        m = min(max(2 * (n - len(found)), 16), budget - drawn)
        pts = place.lo + rng.random((m, 2)) * (place.hi - place.lo)
        drawn += m
        found.extend(pts[place.ok(pts)])
    if len(found) < n:
        raise SamplingStarved(f"only {len(found)} of {n} placements found in {budget} draws")
    return [Vec2(float(x), float(y)) for x, y in found[:n]]


@dataclass(frozen=True)
class DensityGrid:
    """Lattice over the scene bounds; cell (row j, col i) is centered at origin + (i, j) * resolution."""

    origin: Vec2
    resolution: float
    free: np.ndarray
    density: np.ndarray

    def center(self, j: int, i: int) -> Vec2:
        return Vec2(self.origin.x + i * self.resolution, self.origin.y + j * self.resolution)

    def cell_of(self, p: Vec2) -> tuple[int, int]:
        return (round((p.y - self.origin.y) / self.resolution), round((p.x - self.origin.x) / self.resolution))


# N, E, S, W with north = +y (row + 1)
NEIGHBOR_ORDER = ((1, 0), (0, 1), (-1, 0), (0, -1))


def path_counts(free: np.ndarray, sources: list[tuple[int, int]]) -> np.ndarray:
    """Number of canonical shortest paths passing through each cell.

    One BFS tree per source (neighbors expanded N, E, S, W; first discovery
    wins).  For every reachable target the tree path source -> target adds one
    to each strictly interior vertex.  That count equals the vertex's subtree
    size minus one, accumulated in reverse BFS order.
    """
    rows, cols = free.shape
    counts = np.zeros(free.shape, dtype=np.int64)
    flat_free = free.ravel()
    for sj, si in sources:
        src = sj * cols + si
        parent = np.full(rows * cols, -2, dtype=np.int64)
        parent[src] = -1
        order = [src]
        queue = deque([src])
        while queue:
            v = queue.popleft()
            vj, vi = divmod(v, cols)
            for dj, di in NEIGHBOR_ORDER:
                nj, ni = vj + dj, vi + di
                if 0 <= nj < rows and 0 <= ni < cols:
                    w = nj * cols + ni
                    if flat_free[w] and parent[w] == -2:
                        parent[w] = v
                        order.append(w)
                        queue.append(w)
        size = np.zeros(rows * cols, dtype=np.int64)
        for v in reversed(order):
            size[v] += 1
            if parent[v] >= 0:
                size[parent[v]] += size[v]
        flat = counts.ravel()
        for v in order[1:]:
            flat[v] += size[v] - 1
    return counts


def build_density(scene: Scene, c: Configuration, o: int, params: SubgoalParams) -> DensityGrid:
    """Paths density of the object-footprint grid graph (walls only, movables ignored)."""
    res = params.grid_resolution
    b = scene.bounds
    x0, y0 = b.center.x - b.half_extents.x, b.center.y - b.half_extents.y
    cols = int(math.floor(2 * b.half_extents.x / res + 1e-9)) + 1
    rows = int(math.floor(2 * b.half_extents.y / res + 1e-9)) + 1
    jj, ii = np.mgrid[0:rows, 0:cols]
    centers = np.column_stack([x0 + ii.ravel() * res, y0 + jj.ravel() * res])
    free = _Placement(scene, c, o, movables=False).ok(centers).reshape(rows, cols)

    pos = c.objects[o]
    d = np.hypot(centers[:, 0] - pos.x, centers[:, 1] - pos.y).reshape(rows, cols)
    src = np.argwhere(free & (d <= params.source_radius))
    if len(src) == 0:
        raise NoFreeSourceCell(f"no free grid cell within {params.source_radius} of object {o}")
    counts = path_counts(free, [tuple(s) for s in src])
    density = counts / max(int(free.sum()), 1)
    return DensityGrid(Vec2(x0, y0), res, free, density)


def gen_btl(
    scene: Scene, c: Configuration, o: int, n: int, params: SubgoalParams, rng: np.random.Generator
) -> list[Vec2]:
    """Positions drawn in proportion to paths density, jittered within their cell."""
    if n <= 0:
        return []
    grid = build_density(scene, c, o, params)
    return sample_density(grid, scene, c, o, n, rng)


def sample_density(
    grid: DensityGrid, scene: Scene, c: Configuration, o: int, n: int, rng: np.random.Generator
) -> list[Vec2]:
    cells = np.argwhere(grid.free)
    weights = grid.density[grid.free] + BTL_EPSILON
    weights = weights / weights.sum()
    place = _Placement(scene, c, o)
    res = grid.resolution
    found: list[np.ndarray] = []
    budget = 50 * n
    drawn = 0
    while len(found) < n and drawn < budget:
        m = min(max(2 * (n - len(found)), 16), budget - drawn)
        pick = cells[rng.choice(len(cells), size=m, p=weights)]
        pts = np.column_stack([grid.origin.x + pick[:, 1] * res, grid.origin.y + pick[:, 0] * res])
        pts = pts + (rng.random((m, 2)) - 0.5) * res
        drawn += m
        found.extend(pts[place.ok(pts)])
    if len(found) < n:
        raise SamplingStarved(f"only {len(found)} of {n} bottleneck placements found in {budget} draws")
    return [Vec2(float(x), float(y)) for x, y in found[:n]]


def load_human(scene: Scene, o: int) -> list[Vec2]:
    if o not in scene.human_subgoals:
        raise MissingHumanSubgoals(f"scene {scene.name!r} stores no human subgoals for object {scene.objects[o].name!r}")
    return list(scene.human_subgoals[o])


def filter_subgoals(
    scene: Scene,
    c: Configuration,
    o: int,
    candidates: list[Vec2],
    weights: ScoreWeights,
    k_selected: int = 4,
) -> list[Vec2]:
    """Keep the best score tier, adding lower tiers until ``k_selected`` are kept."""
    scores = [score(scene, c.moved(o, z), weights) for z in candidates]
    kept: set[float] = set()
    n = 0
    for tier in sorted(set(scores), reverse=True):
        kept.add(tier)
        n += scores.count(tier)
        if n >= k_selected:
            break
    return [z for z, s in zip(candidates, scores) if s in kept]


def generate_candidates(
    scene: Scene, c: Configuration, o: int, params: SubgoalParams, rng: np.random.Generator
) -> list[Vec2]:
    if params.generator == "rnd":
        return gen_random(scene, c, o, params.n_candidates, rng)
    if params.generator == "btl":
        return gen_btl(scene, c, o, params.n_candidates, params, rng)
    return load_human(scene, o)


def select_subgoals(
    scene: Scene,
    c: Configuration,
    o: int,
    candidates: list[Vec2],
    params: SubgoalParams,
    weights: ScoreWeights,
    rng: np.random.Generator,
) -> list[Subgoal]:
    """Filter (optionally), subsample ``k_selected`` and append the trivial subgoal."""
    here = c.objects[o]
    pool = [z for z in candidates if z != here]
    if params.filter_enabled and pool:
        pool = filter_subgoals(scene, c, o, pool, weights, params.k_selected)
    if len(pool) > params.k_selected:
        idx = np.sort(rng.choice(len(pool), size=params.k_selected, replace=False))
        pool = [pool[i] for i in idx]
    return [Subgoal(o, z) for z in pool] + [Subgoal(o, here)]


def propose_subgoals(
    scene: Scene,
    c: Configuration,
    o: int,
    params: SubgoalParams,
    weights: ScoreWeights,
    rng: np.random.Generator,
) -> list[Subgoal]:
    candidates = generate_candidates(scene, c, o, params, rng)
    return select_subgoals(scene, c, o, candidates, params, weights, rng)
