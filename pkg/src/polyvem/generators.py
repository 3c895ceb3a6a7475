"""Generators for the five polygonal mesh families (SQ1, DQ2S, S&S, IS&S, VRN)."""

from __future__ import annotations

import numpy as np
from scipy.spatial import Voronoi

from .geometry import is_simple_polygon, polygon_area, polygon_centroid, sutherland_hodgman
from .mesh import Domain, MeshError, PolygonalMesh

__all__ = [
    "generate_sq1",
    "generate_dq2s",
    "generate_sun_star",
    "generate_voronoi",
    "build_mesh",
]

FAMILIES = ("sq1", "dq2s", "sns", "isns", "vrn")


class _Builder:
    """Accumulates element polygons, dedups vertices, tags boundary edges."""

    def __init__(self):
        self._key2idx: dict[tuple[float, float], int] = {}
        self.verts: list[tuple[float, float]] = []
        self.elements: list[list[int]] = []

    def point(self, p) -> int:
        key = (float(p[0]), float(p[1]))
        idx = self._key2idx.get(key)
        if idx is None:
            idx = len(self.verts)
            self._key2idx[key] = idx
            self.verts.append(key)
        return idx

    def element(self, pts) -> None:
        self.elements.append([self.point(p) for p in pts])

    def finish(self, domain: Domain, family: str, ref_coords: bool, meta: dict | None = None) -> PolygonalMesh:
        """Assemble the mesh; tag boundary edges; map reference coords if needed."""
        verts = np.array(self.verts, dtype=float)
        counts: dict[tuple[int, int], int] = {}
        for cyc in self.elements:
            n = len(cyc)
            for k in range(n):
                i, j = cyc[k], cyc[(k + 1) % n]
                key = (min(i, j), max(i, j))
                counts[key] = counts.get(key, 0) + 1
        if ref_coords:
            sides = Domain.unit_square().corners
        else:
            sides = domain.corners
        scale = float(np.abs(sides).max()) or 1.0
        boundary: dict[tuple[int, int], str] = {}
        for key, c in counts.items():
            if c != 1:
                continue
            mid = 0.5 * (verts[key[0]] + verts[key[1]])
            boundary[key] = _side_tag(mid, sides, 1e-9 * scale)
        coords = domain.map(verts) if ref_coords else verts
        return PolygonalMesh(coords, self.elements, boundary, domain, family, meta or {})


def _side_tag(p: np.ndarray, corners: np.ndarray, eps: float) -> str:
    for k, tag in enumerate(Domain.SIDE_TAGS):
        a, b = corners[k], corners[(k + 1) % 4]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if abs(cross) <= eps * max(np.hypot(*(b - a)), 1.0):
            return tag
    raise MeshError(f"boundary edge midpoint {p} is on no domain side")


def generate_sq1(N: int, domain: Domain | None = None) -> PolygonalMesh:
    """Structured 2^N x 2^N quadrilateral mesh mapped to the domain."""
    if N < 1:
        raise MeshError("refinement level N must be >= 1")
    domain = domain or Domain.unit_square()
    m = 2**N
    g = np.linspace(0.0, 1.0, m + 1)
    b = _Builder()
    for j in range(m):
        for i in range(m):
            b.element(
                [
                    (g[i], g[j]),
                    (g[i + 1], g[j]),
                    (g[i + 1], g[j + 1]),
                    (g[i], g[j + 1]),
                ]
            )
    return b.finish(domain, "sq1", ref_coords=True, meta={"N": N})


def generate_dq2s(
    N: int,
    domain: Domain | None = None,
    distortion: float = 0.25,
    rng_seed: int = 0,
    max_retries: int = 8,
) -> PolygonalMesh:
    """Distorted 8-noded quadrilateral mesh.

    Interior corner nodes are perturbed by up to distortion * cell size;
    midside nodes sit at perturbed-edge midpoints (collinear hanging
    vertices), so each element is an 8-vertex polygon.
    """
    if N < 1:
        raise MeshError("refinement level N must be >= 1")
    if not 0.0 <= distortion < 0.5:
        raise MeshError("distortion must be in [0, 0.5)")
    domain = domain or Domain.unit_square()
    m = 2**N
    h = 1.0 / m
    g = np.linspace(0.0, 1.0, m + 1)
    rng = np.random.default_rng(rng_seed)

    level = distortion
    for _ in range(max_retries + 1):
        corners = np.empty((m + 1, m + 1, 2))
        corners[..., 0], corners[..., 1] = np.meshgrid(g, g, indexing="ij")
        if level > 0:
            offs = rng.uniform(-level * h, level * h, size=(m + 1, m + 1, 2))
            corners[1:m, 1:m] += offs[1:m, 1:m]
        ok = True
        for j in range(m):
            for i in range(m):
                quad = np.array(
                    [corners[i, j], corners[i + 1, j], corners[i + 1, j + 1], corners[i, j + 1]]
                )
                if polygon_area(quad) < 0.1 * h * h or not is_simple_polygon(quad):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            break
        level *= 0.5
    else:
        raise MeshError("DQ2S perturbation kept inverting elements after retries")

    mid_h = 0.5 * (corners[:-1, :, :] + corners[1:, :, :])  # midpoints of x-direction edges
    mid_v = 0.5 * (corners[:, :-1, :] + corners[:, 1:, :])  # midpoints of y-direction edges
    b = _Builder()
    for j in range(m):
        for i in range(m):
            b.element(
                [
                    corners[i, j],
                    mid_h[i, j],
                    corners[i + 1, j],
                    mid_v[i + 1, j],
                    corners[i + 1, j + 1],
                    mid_h[i, j + 1],
                    corners[i, j + 1],
                    mid_v[i, j],
                ]
            )
    return b.finish(
        domain,
        "dq2s",
        ref_coords=True,
        meta={"N": N, "distortion": level, "seed": rng_seed},
    )


def generate_sun_star(
    N: int,
    domain: Domain | None = None,
    interlocking: bool = False,
    serration: float = 0.15,
) -> PolygonalMesh:
    """Sun-and-star mesh: 2^(2N) convex suns plus concave four-pointed stars.

    Every cell corner at an interior grid vertex is replaced by a
    two-segment serration (chamfer whose midpoint is pulled halfway toward
    the corner); the four cuts meeting at a grid corner form one star.
    With interlocking=True each sun is split by a centro-symmetric zig-zag
    into two non-convex halves.
    """
    if N < 1:
        raise MeshError("refinement level N must be >= 1")
    if not 0.0 < serration < 0.5:
        raise MeshError("serration must be in (0, 0.5)")
    domain = domain or Domain.unit_square()
    m = 2**N
    h = 1.0 / m
    a = serration * h
    g = np.linspace(0.0, 1.0, m + 1)

    def interior(i: int, j: int) -> bool:
        return 0 < i < m and 0 < j < m

    b = _Builder()
    for j in range(m):
        for i in range(m):
            # cell corners CCW with grid indices, and inward diagonal signs
            cs = [
                ((i, j), (1.0, 1.0)),
                ((i + 1, j), (-1.0, 1.0)),
                ((i + 1, j + 1), (-1.0, -1.0)),
                ((i, j + 1), (1.0, -1.0)),
            ]
            poly: list[tuple[float, float]] = []
            for k, ((ci, cj), (sx, sy)) in enumerate(cs):
                c = np.array([g[ci], g[cj]])
                if not interior(ci, cj):
                    poly.append((c[0], c[1]))
                    continue
                (pi, pj), _ = cs[k - 1]
                pc = np.array([g[pi], g[pj]])
                din = (c - pc) / np.hypot(*(c - pc))  # incoming edge direction
                apt = c - a * din
                bpt = c + a * np.array([-din[1], din[0]])  # CCW turn onto next edge
                mpt = (c[0] + sx * a / 4.0, c[1] + sy * a / 4.0)
                poly.extend([(apt[0], apt[1]), mpt, (bpt[0], bpt[1])])
            if not interlocking:
                b.element(poly)
            else:
                for half in _split_sun(poly, g[i], g[j], h):
                    b.element(half)
    # stars at interior grid vertices
    for j in range(1, m):
        for i in range(1, m):
            px, py = g[i], g[j]
            b.element(
                [
                    (px + a, py),
                    (px + a / 4.0, py + a / 4.0),
                    (px, py + a),
                    (px - a / 4.0, py + a / 4.0),
                    (px - a, py),
                    (px - a / 4.0, py - a / 4.0),
                    (px, py - a),
                    (px + a / 4.0, py - a / 4.0),
                ]
            )
    fam = "isns" if interlocking else "sns"
    return b.finish(domain, fam, ref_coords=True, meta={"N": N, "serration": serration})


def _split_sun(poly: list[tuple[float, float]], x0: float, y0: float, h: float):
    """Split a sun polygon by a zig-zag polyline through the cell centroid.

    The cut is invariant under a half-turn about the centroid (which lies
    at the midpoint of the middle segment), so interior suns split into
    two congruent, mutually hooked halves.
    """
    xm = x0 + 0.5 * h
    p_bot = (xm, y0)
    p_top = (xm, y0 + h)
    cut = [
        p_bot,
        (x0 + 0.70 * h, y0 + 0.35 * h),
        (x0 + 0.35 * h, y0 + 0.45 * h),
        (x0 + 0.65 * h, y0 + 0.55 * h),
        (x0 + 0.30 * h, y0 + 0.65 * h),
        p_top,
    ]
    ring = _insert_on_boundary(poly, [p_bot, p_top])
    ib = ring.index(p_bot)
    it = ring.index(p_top)
    ncyc = len(ring)
    right = [ring[(ib + k) % ncyc] for k in range(((it - ib) % ncyc) + 1)]
    left = [ring[(it + k) % ncyc] for k in range(((ib - it) % ncyc) + 1)]
    right_half = right + list(reversed(cut))[1:-1]
    left_half = left + cut[1:-1]
    return left_half, right_half


def _insert_on_boundary(poly, pts):
    """Insert points that lie on (straight) boundary runs as new vertices."""
    ring = list(poly)
    for p in pts:
        n = len(ring)
        best = None
        for k in range(n):
            a = np.array(ring[k])
            b2 = np.array(ring[(k + 1) % n])
            d = b2 - a
            L2 = float(d @ d)
            t = float((np.array(p) - a) @ d) / L2
            if -1e-12 <= t <= 1 + 1e-12:
                off = np.array(p) - (a + t * d)
                if float(off @ off) < 1e-20 * L2:
                    if 1e-9 < t < 1 - 1e-9:
                        best = k + 1
                    break
        if best is not None:
            ring.insert(best, p)
    return ring


def generate_voronoi(
    N: int,
    domain: Domain | None = None,
    lloyd_iters: int = 10,
    rng_seed: int = 0,
) -> PolygonalMesh:
    """Clipped Voronoi mesh of 2^(2N) seeds, optionally Lloyd-relaxed."""
    if N < 1:
        raise MeshError("refinement level N must be >= 1")
    if lloyd_iters < 0:
        raise MeshError("lloyd_iters must be >= 0")
    domain = domain or Domain.unit_square()
    n_seeds = 2 ** (2 * N)
    rng = np.random.default_rng(rng_seed)

    seeds = domain.map(rng.uniform(0.0, 1.0, size=(n_seeds, 2)))
    scale = float(np.abs(domain.corners).max())
    min_sep = 1e-9 * scale
    for _ in range(100):
        d2 = ((seeds[:, None, :] - seeds[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        dup = np.where(d2.min(axis=1) < min_sep**2)[0]
        if len(dup) == 0:
            break
        seeds[dup] = domain.map(rng.uniform(0.0, 1.0, size=(len(dup), 2)))
    else:
        raise MeshError("could not separate duplicate Voronoi seeds")

    cells = None
    for _ in range(lloyd_iters):
        cells = _clipped_voronoi(seeds, domain)
        seeds = np.array([polygon_centroid(c) for c in cells])
    cells = _clipped_voronoi(seeds, domain)

    b = _Builder()
    for c in cells:
        b.element([tuple(p) for p in c])
    mesh = b.finish(
        domain, "vrn", ref_coords=False, meta={"N": N, "lloyd_iters": lloyd_iters, "seed": rng_seed}
    )
    mesh.meta["seeds"] = seeds
    return mesh


def _clipped_voronoi(seeds: np.ndarray, domain: Domain) -> list[np.ndarray]:
    """Voronoi cells clipped to the convex domain via Sutherland-Hodgman."""
    lo = domain.corners.min(axis=0)
    hi = domain.corners.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1]))
    cx, cy = 0.5 * (lo + hi)
    r = 10.0 * span
    frame = np.array(
        [
            [cx - r, cy - r], [cx, cy - r], [cx + r, cy - r], [cx + r, cy],
            [cx + r, cy + r], [cx, cy + r], [cx - r, cy + r], [cx - r, cy],
        ]
    )
    vor = Voronoi(np.vstack([seeds, frame]))
    eps = 1e-12 * span
    cells = []
    for k in range(len(seeds)):
        region = vor.regions[vor.point_region[k]]
        if -1 in region or len(region) < 3:
            raise MeshError("unbounded Voronoi region despite frame points")
        poly = vor.vertices[region]
        if polygon_area(poly) < 0:
            poly = poly[::-1]
        clipped = sutherland_hodgman(poly, domain.corners, eps=eps)
        clipped = _dedup_ring(clipped, 1e-9 * span)
        if len(clipped) < 3 or polygon_area(clipped) <= 0:
            raise MeshError("Voronoi cell degenerated under clipping")
        cells.append(clipped)
    return cells


def _dedup_ring(poly: np.ndarray, tol: float) -> np.ndarray:
    """Drop near-duplicate neighbors, keeping the lexicographically smaller
    point so adjacent cells resolve shared near-duplicates identically."""
    n = len(poly)
    drop = set()
    for k in range(n):
        j = (k + 1) % n
        if np.hypot(*(poly[k] - poly[j])) <= tol:
            a, b = tuple(poly[k]), tuple(poly[j])
            drop.add(k if a > b else j)
    return np.array([poly[k] for k in range(n) if k not in drop])


def build_mesh(
    family: str,
    N: int,
    domain: Domain | None = None,
    seed: int = 0,
    distortion: float = 0.25,
    lloyd_iters: int = 10,
    serration: float = 0.15,
) -> PolygonalMesh:
    """Dispatch to the named mesh family generator."""
    family = family.lower()
    if family == "sq1":
        return generate_sq1(N, domain)
    if family == "dq2s":
        return generate_dq2s(N, domain, distortion=distortion, rng_seed=seed)
    if family == "sns":
        return generate_sun_star(N, domain, interlocking=False, serration=serration)
    if family == "isns":
        return generate_sun_star(N, domain, interlocking=True, serration=serration)
    if family == "vrn":
        return generate_voronoi(N, domain, lloyd_iters=lloyd_iters, rng_seed=seed)
    raise MeshError(f"unknown mesh family {family!r}; expected one of {FAMILIES}")
