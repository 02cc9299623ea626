"""2D polygon triangulation by ear clipping, with hole bridging.

Used for cap faces of plane clips and for extruded test fixtures.  Collinear
boundary vertices are preserved (they must match edges of the clipped
surface), so degenerate ears are clipped as a last resort.
"""

from __future__ import annotations

import numpy as np

from .errors import CapFailure

_EPS = 1e-12


def polygon_area(points: np.ndarray) -> float:
    """Signed area; positive for counter-clockwise winding."""
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def point_in_polygon(point: np.ndarray, poly: np.ndarray) -> bool:
    """Even-odd rule; boundary points unspecified (good enough for nesting)."""
    x, y = point
    inside = False
    n = len(poly)
    j = n - 1
    for i in range(n):
        xi, yi = poly[i]
        xj, yj = poly[j]
        if (yi > y) != (yj > y):
            t = (y - yi) / (yj - yi)
            if x < xi + t * (xj - xi):
                inside = not inside
        j = i
    return inside


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _point_in_tri(p, a, b, c, eps) -> bool:
    d1 = _cross(a, b, p)
    d2 = _cross(b, c, p)
    d3 = _cross(c, a, p)
    return d1 > eps and d2 > eps and d3 > eps


def triangulate_simple(points: np.ndarray, indices=None) -> list[tuple[int, int, int]]:
    """Ear-clip a simple CCW polygon; returns triangles as index triples.

    ``indices`` maps local polygon order to caller vertex ids.
    """
    import heapq

    n = len(points)
    if indices is None:
        indices = list(range(n))
    if n < 3:
        return []
    points = np.asarray(points, dtype=float)
    scale = float(np.abs(points).max()) or 1.0
    area_eps = _EPS * scale * scale

    # doubly linked vertex ring with per-vertex ear cross products
    nxt = list(range(1, n)) + [0]
    prv = [n - 1] + list(range(n - 1))
    alive = np.ones(n, dtype=bool)
    ring = np.arange(n)
    crosses = ((points[:, 0] - points[prv, 0])
               * (points[np.roll(ring, -1), 1] - points[prv, 1])
               - (points[:, 1] - points[prv, 1])
               * (points[np.roll(ring, -1), 0] - points[prv, 0]))
    cross = crosses.tolist()

    # axis-sorted vertex ids for pruning the blocking test to the ear's bbox
    sx = np.argsort(points[:, 0], kind="stable")
    xs = points[sx, 0]
    sy = np.argsort(points[:, 1], kind="stable")
    ys = points[sy, 1]

    # smallest-id-first candidate heaps with lazy invalidation; strictly
    # convex ears are always preferred, degenerate (collinear) ears are a
    # last resort
    convex_heap = [i for i in range(n) if cross[i] > area_eps]
    flat_heap = [i for i in range(n) if -area_eps < cross[i] <= area_eps]
    heapq.heapify(convex_heap)
    heapq.heapify(flat_heap)
    # blocked convex ears parked until their blocking vertex is clipped
    blocked_by: dict[int, list[int]] = {}

    pt_list = points.tolist()
    dup_eps = _EPS * scale

    def blocking_witness(ic):
        """Id of a polygon vertex inside (or on) the candidate ear, or -1."""
        ip, iq = prv[ic], nxt[ic]
        ax, ay = pt_list[ip]
        bx, by = pt_list[ic]
        cx, cy = pt_list[iq]
        # the -area_eps slack admits points outside the triangle by up to
        # area_eps / edge_length, so pad the bbox accordingly
        el2 = min((bx - ax) ** 2 + (by - ay) ** 2,
                  (cx - bx) ** 2 + (cy - by) ** 2,
                  (ax - cx) ** 2 + (ay - cy) ** 2)
        pad = min(area_eps / np.sqrt(el2), scale) if el2 > 0 else scale
        lo_x = np.searchsorted(xs, min(ax, bx, cx) - pad, "left")
        hi_x = np.searchsorted(xs, max(ax, bx, cx) + pad, "right")
        lo_y = np.searchsorted(ys, min(ay, by, cy) - pad, "left")
        hi_y = np.searchsorted(ys, max(ay, by, cy) + pad, "right")
        if hi_y - lo_y < hi_x - lo_x:
            lo, hi, src = lo_y, hi_y, sy
        else:
            lo, hi, src = lo_x, hi_x, sx
        if hi - lo <= 3:
            for j in src[lo:hi]:
                j = int(j)
                if alive[j] and j not in (ip, ic, iq):
                    break
            else:
                return -1
        cand = src[lo:hi]
        p = points[cand]
        px = p[:, 0]
        py = p[:, 1]
        sel = (alive[cand]
               & (px >= min(ax, bx, cx) - pad) & (px <= max(ax, bx, cx) + pad)
               & (py >= min(ay, by, cy) - pad) & (py <= max(ay, by, cy) + pad)
               & (cand != ip) & (cand != ic) & (cand != iq))
        # duplicated bridge vertices share coordinates with a corner and
        # never block
        near = (
            ((np.abs(px - ax) < dup_eps) & (np.abs(py - ay) < dup_eps))
            | ((np.abs(px - bx) < dup_eps) & (np.abs(py - by) < dup_eps))
            | ((np.abs(px - cx) < dup_eps) & (np.abs(py - cy) < dup_eps))
        )
        # boundary-inclusive: a reflex vertex exactly on an ear edge still
        # invalidates the ear
        d1 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        d2 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
        d3 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
        hits = np.nonzero(
            sel & ~near & (d1 >= -area_eps) & (d2 >= -area_eps)
            & (d3 >= -area_eps))[0]
        return int(cand[hits[0]]) if len(hits) else -1

    triangles: list[tuple[int, int, int]] = []
    count = n
    while count > 3:
        pick = -1
        while convex_heap:
            i = heapq.heappop(convex_heap)
            if not alive[i] or cross[i] <= area_eps:
                continue
            witness = blocking_witness(i)
            if witness >= 0:
                blocked_by.setdefault(witness, []).append(i)
                continue
            pick = i
            break
        if pick < 0:
            while flat_heap:
                i = heapq.heappop(flat_heap)
                if not alive[i] or not (-area_eps < cross[i] <= area_eps):
                    continue
                pick = i
                break
        if pick < 0:
            raise CapFailure("no ear found; section polygon may self-intersect")
        ip, iq = prv[pick], nxt[pick]
        triangles.append((indices[ip], indices[pick], indices[iq]))
        alive[pick] = False
        count -= 1
        nxt[ip] = iq
        prv[iq] = ip
        for u in (ip, iq):
            cross[u] = _cross(points[prv[u]], points[u], points[nxt[u]])
            if cross[u] > area_eps:
                heapq.heappush(convex_heap, u)
            elif cross[u] > -area_eps:
                heapq.heappush(flat_heap, u)
        # ears blocked by the clipped vertex become candidates again
        for e in blocked_by.pop(pick, ()):
            if alive[e]:
                heapq.heappush(convex_heap, e)
    i0 = int(np.nonzero(alive)[0][0])
    triangles.append((indices[i0], indices[nxt[i0]], indices[nxt[nxt[i0]]]))
    return triangles


def _bridge_hole(outer_pts: list, outer_idx: list, hole_pts: np.ndarray, hole_idx: list):
    """Splice a hole into the outer loop via a bridge at the hole's rightmost vertex."""
    k = int(np.argmax(hole_pts[:, 0]))
    hp = hole_pts[k]
    # find the outer edge first hit by a +x ray from hp
    best_t = np.inf
    best_edge = -1
    best_point = None
    n = len(outer_pts)
    for i in range(n):
        a = outer_pts[i]
        b = outer_pts[(i + 1) % n]
        if (a[1] > hp[1]) == (b[1] > hp[1]):
            continue
        t = (hp[1] - a[1]) / (b[1] - a[1])
        x = a[0] + t * (b[0] - a[0])
        if x >= hp[0] - _EPS and x - hp[0] < best_t:
            best_t = x - hp[0]
            best_edge = i
            best_point = np.array([x, hp[1]])
    if best_edge < 0:
        raise CapFailure("hole is not inside its outer loop")
    # candidate visible vertex: endpoint of the hit edge with larger x,
    # unless a reflex outer vertex lies inside the triangle (hp, isect, cand)
    a_i, b_i = best_edge, (best_edge + 1) % n
    cand = a_i if outer_pts[a_i][0] > outer_pts[b_i][0] else b_i
    tri = (hp, best_point, outer_pts[cand])
    best_metric = np.inf
    for j in range(n):
        if j in (a_i, b_i, cand):
            continue
        p = outer_pts[j]
        if _point_in_tri(p, *tri, _EPS) or _point_in_tri(p, tri[0], tri[2], tri[1], _EPS):
            dx, dy = p[0] - hp[0], p[1] - hp[1]
            metric = abs(np.arctan2(dy, dx))
            if metric < best_metric:
                best_metric = metric
                cand = j
    # splice: outer[..cand], hole[k..], hole[..k], outer[cand..]
    new_pts = (
        outer_pts[: cand + 1]
        + [hole_pts[(k + j) % len(hole_pts)] for j in range(len(hole_pts))]
        + [hole_pts[k], outer_pts[cand]]
        + outer_pts[cand + 1 :]
    )
    new_idx = (
        outer_idx[: cand + 1]
        + [hole_idx[(k + j) % len(hole_idx)] for j in range(len(hole_idx))]
        + [hole_idx[k], outer_idx[cand]]
        + outer_idx[cand + 1 :]
    )
    return new_pts, new_idx


def triangulate_with_holes(outer: np.ndarray, outer_indices,
                           holes: list[tuple[np.ndarray, list]]) -> list[tuple[int, int, int]]:
    """Triangulate a CCW outer loop with CW holes (caller vertex ids kept)."""
    pts = [np.asarray(p, dtype=float) for p in outer]
    idx = list(outer_indices)
    # splice holes right-to-left so earlier bridges stay valid
    for hole_pts, hole_idx in sorted(holes, key=lambda h: -float(np.max(h[0][:, 0]))):
        pts, idx = _bridge_hole(pts, idx, np.asarray(hole_pts, dtype=float), list(hole_idx))
    return triangulate_simple(np.array(pts), idx)
