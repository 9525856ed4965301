"""Planar primitives and collision predicates.

All predicates use closed-set semantics: bodies that only touch are reported
as colliding.  Scalar functions operate on :class:`Rect` / :class:`Disc`
values; :func:`segment_hits` works on :class:`RectSet` column arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True, slots=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite Vec2 ({self.x}, {self.y})")

    def __add__(self, other: Vec2) -> Vec2:
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Vec2) -> Vec2:
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, k: float) -> Vec2:
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other: Vec2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class Rect:
    """Oriented rectangle given by center, half extents and rotation angle."""

    center: Vec2
    half_extents: Vec2
    angle: float = 0.0

    def __post_init__(self):
        if not (self.half_extents.x > 0 and self.half_extents.y > 0):
            raise ValueError(f"half extents must be positive, got {self.half_extents}")
        if not (-math.pi <= self.angle < math.pi):
            raise ValueError(f"angle {self.angle} outside [-pi, pi)")

    def axes(self) -> tuple[tuple[float, float], tuple[float, float]]:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return (c, s), (-s, c)

    def corners(self) -> list[Vec2]:
        (ux, uy), (vx, vy) = self.axes()
        hx, hy = self.half_extents.x, self.half_extents.y
        cx, cy = self.center.x, self.center.y
        return [
            Vec2(cx + sx * hx * ux + sy * hy * vx, cy + sx * hx * uy + sy * hy * vy)
            for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1))
        ]

    def to_local(self, p: Vec2) -> tuple[float, float]:
        (ux, uy), (vx, vy) = self.axes()
        dx, dy = p.x - self.center.x, p.y - self.center.y
        return dx * ux + dy * uy, dx * vx + dy * vy

    def to_world(self, lx: float, ly: float) -> Vec2:
        (ux, uy), (vx, vy) = self.axes()
        return Vec2(self.center.x + lx * ux + ly * vx, self.center.y + lx * uy + ly * vy)

    def contains_point(self, p: Vec2) -> bool:
        lx, ly = self.to_local(p)
        return abs(lx) <= self.half_extents.x and abs(ly) <= self.half_extents.y

    def contains_rect(self, other: Rect) -> bool:
        return all(self.contains_point(q) for q in other.corners())

    def inflated(self, margin: float) -> Rect:
        return Rect(self.center, Vec2(self.half_extents.x + margin, self.half_extents.y + margin), self.angle)


@dataclass(frozen=True, slots=True)
class Disc:
    center: Vec2
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")


def point_rect_distance(r: Rect, p: Vec2) -> float:
    """Euclidean distance from ``p`` to the (closed) rectangle; 0 inside."""
    lx, ly = r.to_local(p)
    ex = max(abs(lx) - r.half_extents.x, 0.0)
    ey = max(abs(ly) - r.half_extents.y, 0.0)
    return math.hypot(ex, ey)


def rect_disc_collide(r: Rect, d: Disc, margin: float = 0.0) -> bool:
    return point_rect_distance(r, d.center) <= d.radius + margin


def _project(corners: Sequence[Vec2], ax: tuple[float, float]) -> tuple[float, float]:
    dots = [q.x * ax[0] + q.y * ax[1] for q in corners]
    return min(dots), max(dots)


def _point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> float:
    dx, dy = b.x - a.x, b.y - a.y
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy)
    t = min(1.0, max(0.0, t))
    return math.hypot(p.x - a.x - t * dx, p.y - a.y - t * dy)


def rect_rect_distance(a: Rect, b: Rect) -> float:
    """Euclidean gap between two rectangles; 0 when they overlap or touch."""
    if rect_rect_collide(a, b):
        return 0.0
    best = math.inf
    for p, q in ((a, b), (b, a)):
        cq = q.corners()
        for v in p.corners():
            for i in range(4):
                best = min(best, _point_segment_distance(v, cq[i], cq[(i + 1) % 4]))
    return best


def rect_rect_collide(a: Rect, b: Rect, margin: float = 0.0) -> bool:
    """Separating-axis test over the four edge normals.

    With ``margin`` > 0 one rectangle is grown by a disc of that radius, i.e.
    the test asks whether the gap between them is at most ``margin``.  This
    keeps the predicate symmetric for rotated pairs.
    """
    if margin > 0:
        return rect_rect_distance(a, b) <= margin
    ca, cb = a.corners(), b.corners()
    for ax in (*a.axes(), *b.axes()):
        amin, amax = _project(ca, ax)
        bmin, bmax = _project(cb, ax)
        if amax < bmin or bmax < amin:
            return False
    return True


def segment_clear(p: Vec2, q: Vec2, blockers: Sequence[Rect]) -> bool:
    """True iff the open segment ``pq`` misses every blocker."""
    if p == q or not blockers:
        return True
    return not segment_hits(RectSet.from_rects(blockers), p.as_tuple(), q.as_tuple()).any()


# -- contact sampling --------------------------------------------------------


def contact_perimeter(obj: Rect, agent_radius: float) -> float:
    hx, hy = obj.half_extents.x, obj.half_extents.y
    return 4.0 * (hx + hy) + 2.0 * math.pi * agent_radius


def contact_point(obj: Rect, agent_radius: float, s: float) -> Vec2:
    """Agent center at arc length ``s`` along the rounded boundary of ``obj`` (+) a disc.

    Arc length starts at the midpoint of the local +x face and runs
    counter-clockwise.
    """
    hx, hy, r = obj.half_extents.x, obj.half_extents.y, agent_radius
    q = math.pi * r / 2.0
    pieces = (
        ("line", hy, (hx + r, 0.0), (0.0, 1.0)),
        ("arc", q, (hx, hy), 0.0),
        ("line", 2 * hx, (hx, hy + r), (-1.0, 0.0)),
        ("arc", q, (-hx, hy), math.pi / 2),
        ("line", 2 * hy, (-hx - r, hy), (0.0, -1.0)),
        ("arc", q, (-hx, -hy), math.pi),
        ("line", 2 * hx, (-hx, -hy - r), (1.0, 0.0)),
        ("arc", q, (hx, -hy), 1.5 * math.pi),
        ("line", hy, (hx + r, -hy), (0.0, 1.0)),
    )
    s = s % contact_perimeter(obj, agent_radius)
    for i, (kind, length, base, extra) in enumerate(pieces):
        if s <= length or i == len(pieces) - 1:
            s = min(s, length)
            if kind == "line":
                lx, ly = base[0] + extra[0] * s, base[1] + extra[1] * s
            else:
                th = extra + (s / r if r > 0 else 0.0)
                lx, ly = base[0] + r * math.cos(th), base[1] + r * math.sin(th)
            return obj.to_world(lx, ly)
        s -= length
    raise AssertionError("unreachable")


def contact_positions(obj: Rect, agent_radius: float, n: int, phase: float = 0.0) -> list[tuple[Vec2, Vec2]]:
    """``n`` agent centers evenly spaced (by arc length) at contact distance from ``obj``.

    ``phase`` is a fraction of the perimeter added to every position.  Each
    entry is ``(agent_center, agent_center - obj.center)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    per = contact_perimeter(obj, agent_radius)
    out = []
    for i in range(n):
        p = contact_point(obj, agent_radius, per * (phase + i / n))
        out.append((p, p - obj.center))
    return out


# -- array kernels -----------------------------------------------------------


class RectSet:
    """Column arrays for a batch of rectangles."""

    __slots__ = ("cx", "cy", "hx", "hy", "cos", "sin")

    def __init__(self, cx, cy, hx, hy, angle):
        self.cx = np.asarray(cx, dtype=float)
        self.cy = np.asarray(cy, dtype=float)
        self.hx = np.asarray(hx, dtype=float)
        self.hy = np.asarray(hy, dtype=float)
        angle = np.asarray(angle, dtype=float)
        self.cos = np.cos(angle)
        self.sin = np.sin(angle)

    @classmethod
    def from_rects(cls, rects: Sequence[Rect]) -> RectSet:
        if not rects:
            return cls([], [], [], [], [])
        arr = np.array(
            [(r.center.x, r.center.y, r.half_extents.x, r.half_extents.y, r.angle) for r in rects],
            dtype=float,
        )
        return cls(*arr.T)

    def __len__(self) -> int:
        return len(self.cx)

    def columns(self) -> np.ndarray:
        """(m, 6) array of cx, cy, hx, hy, cos, sin."""
        return np.column_stack([self.cx, self.cy, self.hx, self.hy, self.cos, self.sin]).reshape(-1, 6)

    def _local(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dx = pts[:, 0:1] - self.cx
        dy = pts[:, 1:2] - self.cy
        return dx * self.cos + dy * self.sin, -dx * self.sin + dy * self.cos


def _as_points(p) -> np.ndarray:
    return np.atleast_2d(np.asarray(p, dtype=float))


def _slab_interval(rs: RectSet, a: np.ndarray, b: np.ndarray):
    """Parameter interval [t0, t1] of the infinite line a + t(b-a) inside each box."""
    ax, ay = rs._local(a)
    bx, by = rs._local(b)
    dx, dy = bx - ax, by - ay
    t0 = np.full(ax.shape, -np.inf)
    t1 = np.full(ax.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        for p, d, h in ((ax, dx, rs.hx), (ay, dy, rs.hy)):
            flat = d == 0.0
            lo = (-h - p) / d
            hi = (h - p) / d
            lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
            outside = flat & (np.abs(p) > h)
            lo = np.where(flat, np.where(outside, np.inf, -np.inf), lo)
            hi = np.where(flat, np.where(outside, -np.inf, np.inf), hi)
            t0 = np.maximum(t0, lo)
            t1 = np.minimum(t1, hi)
    return t0, t1, (ax, ay, dx, dy)


def segment_hits(rs: RectSet, a, b) -> np.ndarray:
    """Open segments a->b against closed boxes; shape (k, m)."""
    a, b = _as_points(a), _as_points(b)
    t0, t1, _ = _slab_interval(rs, a, b)
    return (t0 <= t1) & (t0 < 1.0) & (t1 > 0.0)
