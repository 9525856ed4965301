"""Compiled swept-collision kernels used in the planner's inner loops.

Obstacles are passed as flat column arrays (cx, cy, hx, hy, cos, sin).
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _slab(p, d, h):
    if d == 0.0:
        if abs(p) > h:
            return math.inf, -math.inf
        return -math.inf, math.inf
    lo = (-h - p) / d
    hi = (h - p) / d
    if lo > hi:
        lo, hi = hi, lo
    return lo, hi


@njit(cache=True)
def _disc_hits(ax, ay, dx, dy, hx, hy, r):
    # segment a + t d (t in [0, 1]) in the box frame; closed sets
    lo1, hi1 = _slab(ax, dx, hx)
    lo2, hi2 = _slab(ay, dy, hy)
    t0 = max(0.0, lo1, lo2)
    t1 = min(1.0, hi1, hi2)
    if t0 <= t1:
        return True
    r2 = r * r
    for px, py in ((ax, ay), (ax + dx, ay + dy)):
        ex = max(abs(px) - hx, 0.0)
        ey = max(abs(py) - hy, 0.0)
        if ex * ex + ey * ey <= r2:
            return True
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        return False
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            qx = sx * hx - ax
            qy = sy * hy - ay
            t = (qx * dx + qy * dy) / len2
            t = min(max(t, 0.0), 1.0)
            ex = qx - t * dx
            ey = qy - t * dy
            if ex * ex + ey * ey <= r2:
                return True
    return False


@njit(cache=True)
def _box_hits(ax, ay, bx, by, bhx, bhy, cx, cy, hx, hy, c, s):
    # separating axes: x, y, rect u, rect v, segment normal
    for k in range(5):
        if k == 0:
            wx, wy = 1.0, 0.0
        elif k == 1:
            wx, wy = 0.0, 1.0
        elif k == 2:
            wx, wy = c, s
        elif k == 3:
            wx, wy = -s, c
        else:
            wx, wy = ay - by, bx - ax
            if wx == 0.0 and wy == 0.0:
                continue
        pa = ax * wx + ay * wy
        pb = bx * wx + by * wy
        ext = bhx * abs(wx) + bhy * abs(wy)
        smin = min(pa, pb) - ext
        smax = max(pa, pb) + ext
        rc = cx * wx + cy * wy
        rext = hx * abs(c * wx + s * wy) + hy * abs(-s * wx + c * wy)
        if smax < rc - rext or rc + rext < smin:
            return False
    return True


@njit(cache=True)
def segments_clear(obs, a, b, radius, carry, box_half, offset, lo, hi):
    """For each segment a[i] -> b[i]: agent disc (and carried box) sweep hits nothing.

    ``obs`` is an (m, 6) array of rect columns.  When ``carry`` is set the box
    center is ``agent - offset``.
    """
    k = a.shape[0]
    out = np.ones(k, dtype=np.bool_)
    m = obs.shape[0]
    for i in range(k):
        ax, ay, bx, by = a[i, 0], a[i, 1], b[i, 0], b[i, 1]
        if not (lo[0] <= ax <= hi[0] and lo[1] <= ay <= hi[1] and lo[0] <= bx <= hi[0] and lo[1] <= by <= hi[1]):
            out[i] = False
            continue
        minx, maxx = min(ax, bx), max(ax, bx)
        miny, maxy = min(ay, by), max(ay, by)
        if carry:
            bminx = min(minx - offset[0] - box_half[0], minx - radius)
            bmaxx = max(maxx - offset[0] + box_half[0], maxx + radius)
            bminy = min(miny - offset[1] - box_half[1], miny - radius)
            bmaxy = max(maxy - offset[1] + box_half[1], maxy + radius)
        else:
            bminx, bmaxx = minx - radius, maxx + radius
            bminy, bmaxy = miny - radius, maxy + radius
        for j in range(m):
            cx, cy, hx, hy, c, s = obs[j, 0], obs[j, 1], obs[j, 2], obs[j, 3], obs[j, 4], obs[j, 5]
            # conservative bounding-box rejection
            ex = abs(c) * hx + abs(s) * hy
            ey = abs(s) * hx + abs(c) * hy
            if cx + ex < bminx or cx - ex > bmaxx or cy + ey < bminy or cy - ey > bmaxy:
                continue
            px, py = ax - cx, ay - cy
            qx, qy = bx - cx, by - cy
            lax, lay = px * c + py * s, -px * s + py * c
            lbx, lby = qx * c + qy * s, -qx * s + qy * c
            if _disc_hits(lax, lay, lbx - lax, lby - lay, hx, hy, radius):
                out[i] = False
                break
            if carry and _box_hits(
                ax - offset[0], ay - offset[1], bx - offset[0], by - offset[1],
                box_half[0], box_half[1], cx, cy, hx, hy, c, s,
            ):
                out[i] = False
                break
    return out


@njit(cache=True)
def boxes_clear(obs, centers, box_half):
    k = centers.shape[0]
    out = np.ones(k, dtype=np.bool_)
    for i in range(k):
        x, y = centers[i, 0], centers[i, 1]
        for j in range(obs.shape[0]):
            if _box_hits(x, y, x, y, box_half[0], box_half[1], obs[j, 0], obs[j, 1], obs[j, 2], obs[j, 3], obs[j, 4], obs[j, 5]):
                out[i] = False
                break
    return out


@njit(cache=True)
def nearest(pts, n, q0, q1):
    best = 0
    bd = math.inf
    for i in range(n):
        dx = pts[i, 0] - q0
        dy = pts[i, 1] - q1
        d = dx * dx + dy * dy
        if d < bd:
            bd = d
            best = i
    return best
