"""Planar polygon primitives: areas, simplicity checks, ear clipping, clipping."""

from __future__ import annotations

import numpy as np


class TriangulationError(ValueError):
    """Raised when a polygon is not simple or resists ear clipping."""


def polygon_area(verts: np.ndarray) -> float:
    """Signed (shoelace) area of a polygon; positive for CCW orientation."""
    v = np.asarray(verts, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_centroid(verts: np.ndarray) -> np.ndarray:
    """Area centroid of a simple polygon."""
    v = np.asarray(verts, dtype=float)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    if abs(a) < 1e-300:
        return v.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def polygon_diameter(verts: np.ndarray) -> float:
    """Maximum vertex-pair distance."""
    v = np.asarray(verts, dtype=float)
    d2 = ((v[:, None, :] - v[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2.max()))


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(p, a, b, eps: float) -> bool:
    """True if p lies on segment [a, b] (within eps, scaled coords)."""
    if abs(_orient(a, b, p)) > eps:
        return False
    return (
        min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps
        and min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps
    )


def segments_intersect(p1, p2, q1, q2, eps: float = 1e-14) -> bool:
    """Closed-segment intersection test (includes endpoint/collinear touching)."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True
    for p, a, b in ((p1, q1, q2), (p2, q1, q2), (q1, p1, p2), (q2, p1, p2)):
        if _on_segment(p, a, b, eps):
            return True
    return False


def is_simple_polygon(verts: np.ndarray) -> bool:
    """Brute-force simplicity check over all edge pairs.

    Consecutive collinear vertices are allowed; repeated coordinates,
    self-intersections and vertices lying on non-adjacent edges are not.
    """
    v = np.asarray(verts, dtype=float)
    n = len(v)
    if n < 3:
        return False
    scale = max(polygon_diameter(v), 1e-300)
    eps = 1e-12 * scale
    # repeated vertices
    for i in range(n):
        for j in range(i + 1, n):
            if np.hypot(*(v[i] - v[j])) < eps:
                return False
    for i in range(n):
        a1, a2 = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            # skip the edge itself and the two adjacent edges
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                # adjacent: the far endpoint must not fall on the other edge
                continue
            b1, b2 = v[j], v[(j + 1) % n]
            if segments_intersect(a1, a2, b1, b2, eps):
                return False
    # spikes: consecutive collinear triple that folds back on itself
    for i in range(n):
        a, b, c = v[i], v[(i + 1) % n], v[(i + 2) % n]
        if abs(_orient(a, b, c)) <= eps * scale and np.dot(b - a, c - b) < 0.0:
            return False
    return True


def _point_in_triangle(p, a, b, c, eps: float) -> bool:
    """Strictly-interior-or-on-boundary containment for the blocking test."""
    d1 = _orient(a, b, p)
    d2 = _orient(b, c, p)
    d3 = _orient(c, a, p)
    return d1 >= -eps and d2 >= -eps and d3 >= -eps


def _tri_quality(a, b, c) -> float:
    """Radius-ratio-like shape quality: 1 for equilateral, 0 when degenerate."""
    area2 = _orient(a, b, c)
    per = (
        (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
        + (c[0] - b[0]) ** 2 + (c[1] - b[1]) ** 2
        + (a[0] - c[0]) ** 2 + (a[1] - c[1]) ** 2
    )
    if per <= 0.0:
        return 0.0
    return 2.0 * np.sqrt(3.0) * area2 / per


def triangulate(verts: np.ndarray) -> list[tuple[int, int, int]]:
    """Quality ear-clipping triangulation of a simple CCW polygon.

    Returns n_v - 2 index triples with strictly positive area; the
    best-shaped available ear is clipped first and Lawson edge flips
    bring the partition to (constrained) Delaunay quality. Handles
    concave polygons and collinear hanging vertices; raises
    TriangulationError for non-simple input.
    """
    v = np.asarray(verts, dtype=float)
    n = len(v)
    if n < 3:
        raise TriangulationError("polygon needs at least 3 vertices")
    if n == 3:
        if polygon_area(v) <= 0:
            raise TriangulationError("triangle is degenerate or CW")
        return [(0, 1, 2)]
    if polygon_area(v) <= 0:
        raise TriangulationError("polygon must be CCW with positive area")
    if not is_simple_polygon(v):
        raise TriangulationError("polygon is not simple")

    scale2 = polygon_diameter(v) ** 2
    area_eps = 1e-12 * scale2
    block_eps = 1e-12 * np.sqrt(scale2)

    active = list(range(n))
    tris: list[tuple[int, int, int]] = []
    while len(active) > 3:
        m = len(active)
        best = None
        best_q = 0.0
        for k in range(m):
            ip, ic, inx = active[k - 1], active[k], active[(k + 1) % m]
            a, b, c = v[ip], v[ic], v[inx]
            if _orient(a, b, c) <= 2.0 * area_eps:
                continue  # reflex or degenerate corner
            blocked = False
            for j in active:
                if j in (ip, ic, inx):
                    continue
                if _point_in_triangle(v[j], a, b, c, -block_eps):
                    blocked = True
                    break
            if blocked:
                continue
            q = _tri_quality(a, b, c)
            if q > best_q:
                best_q = q
                best = k
        if best is None:
            raise TriangulationError("no clippable ear found")
        k = best
        tris.append((active[k - 1], active[k], active[(k + 1) % m]))
        active.pop(k)
    ip, ic, inx = active
    if _orient(v[ip], v[ic], v[inx]) <= 0:
        raise TriangulationError("final triangle is degenerate")
    tris.append((ip, ic, inx))
    return _lawson_flips(v, tris)


def _lawson_flips(v: np.ndarray, tris: list[tuple[int, int, int]]) -> list[tuple[int, int, int]]:
    """Flip internal diagonals until locally Delaunay (within the polygon)."""
    tris = [tuple(t) for t in tris]
    for _ in range(4 * max(len(tris), 1)):
        edges: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for ti, (i0, i1, i2) in enumerate(tris):
            for a, b, opp in ((i0, i1, i2), (i1, i2, i0), (i2, i0, i1)):
                edges.setdefault((min(a, b), max(a, b)), []).append((ti, opp))
        flipped = False
        for (a, b), owners in edges.items():
            if len(owners) != 2:
                continue  # boundary edge of the polygon
            (t1, c), (t2, d) = owners
            if not _quad_convex(v[a], v[c], v[b], v[d]):
                continue
            if _in_circumcircle(v[a], v[b], v[c], v[d]):
                old_q = min(_tri_quality(*(v[i] for i in tris[t1])),
                            _tri_quality(*(v[i] for i in tris[t2])))
                cand1, cand2 = _oriented(v, (a, c, d)), _oriented(v, (b, d, c))
                new_q = min(_tri_quality(*(v[i] for i in cand1)),
                            _tri_quality(*(v[i] for i in cand2)))
                if new_q > old_q * (1.0 + 1e-12):
                    tris[t1], tris[t2] = cand1, cand2
                    flipped = True
                    break
        if not flipped:
            break
    return tris


def _oriented(v, t):
    return t if _orient(v[t[0]], v[t[1]], v[t[2]]) > 0 else (t[0], t[2], t[1])


def _quad_convex(a, c, b, d) -> bool:
    """Strict convexity of the quad a-c-b-d (flip keeps triangles inside)."""
    quad = (a, c, b, d)
    for k in range(4):
        if _orient(quad[k - 1], quad[k], quad[(k + 1) % 4]) <= 0.0:
            return False
    return True


def _in_circumcircle(a, b, c, p) -> bool:
    """p strictly inside the circumcircle of CCW triangle (a, b, c-ish).

    Uses the standard incircle determinant on the CCW-ordered triple."""
    tri = (a, b, c) if _orient(a, b, c) > 0 else (a, c, b)
    m = np.array(
        [
            [tri[0][0] - p[0], tri[0][1] - p[1], (tri[0][0] - p[0]) ** 2 + (tri[0][1] - p[1]) ** 2],
            [tri[1][0] - p[0], tri[1][1] - p[1], (tri[1][0] - p[0]) ** 2 + (tri[1][1] - p[1]) ** 2],
            [tri[2][0] - p[0], tri[2][1] - p[1], (tri[2][0] - p[0]) ** 2 + (tri[2][1] - p[1]) ** 2],
        ]
    )
    return float(np.linalg.det(m)) > 0.0


def sutherland_hodgman(subject: np.ndarray, clip: np.ndarray, eps: float = 0.0) -> np.ndarray:
    """Clip a polygon against a convex CCW clip polygon.

    Points within eps outside a clip line count as inside, which keeps
    vertices that already sit on the boundary from being cut and re-added.
    """
    out = [np.asarray(p, dtype=float) for p in subject]
    cv = np.asarray(clip, dtype=float)
    nc = len(cv)
    for i in range(nc):
        a, b = cv[i], cv[(i + 1) % nc]
        if not out:
            break
        inp = out
        out = []
        prev = inp[-1]
        prev_in = _orient(a, b, prev) >= -eps
        for cur in inp:
            cur_in = _orient(a, b, cur) >= -eps
            if cur_in != prev_in:
                out.append(_line_intersection(prev, cur, a, b))
            if cur_in:
                out.append(cur)
            prev, prev_in = cur, cur_in
    return np.array(out) if out else np.zeros((0, 2))


def _line_intersection(p1, p2, a, b) -> np.ndarray:
    """Intersection of segment p1-p2 with the infinite line a-b.

    Endpoints are ordered canonically so both traversal directions of the
    same segment produce bit-identical intersection points.
    """
    if (p2[0], p2[1]) < (p1[0], p1[1]):
        p1, p2 = p2, p1
    d = p2 - p1
    e = b - a
    denom = d[0] * e[1] - d[1] * e[0]
    t = ((a[0] - p1[0]) * e[1] - (a[1] - p1[1]) * e[0]) / denom
    return p1 + t * d
