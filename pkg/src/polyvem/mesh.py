"""Polygonal mesh container, validation, and the VPOLY text format."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .geometry import is_simple_polygon, polygon_area, polygon_diameter, triangulate

__all__ = [
    "Domain",
    "PolygonalMesh",
    "MeshError",
    "mean_diameter",
    "validate_mesh",
    "write_vpoly",
    "read_vpoly",
    "triangulate",
]


class MeshError(ValueError):
    """Invalid mesh construction or validation failure."""


@dataclass(frozen=True)
class Domain:
    """Reference quadrilateral, given by 4 corner points in CCW order.

    corners[0] is the bottom-left analogue; sides are tagged
    bottom (0-1), right (1-2), top (2-3), left (3-0).
    """

    corners: np.ndarray

    SIDE_TAGS = ("bottom", "right", "top", "left")

    def __post_init__(self):
        c = np.asarray(self.corners, dtype=float).reshape(4, 2)
        object.__setattr__(self, "corners", c)
        if polygon_area(c) <= 0:
            raise MeshError("domain corners must be positively oriented")
        # convexity of the quadrilateral
        for i in range(4):
            a, b, d = c[i], c[(i + 1) % 4], c[(i + 2) % 4]
            cross = (b[0] - a[0]) * (d[1] - b[1]) - (b[1] - a[1]) * (d[0] - b[0])
            if cross <= 0:
                raise MeshError("domain quadrilateral must be convex")

    @classmethod
    def unit_square(cls) -> "Domain":
        return cls(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))

    @classmethod
    def rectangle(cls, w: float, h: float) -> "Domain":
        return cls(np.array([[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]]))

    def map(self, pts: np.ndarray) -> np.ndarray:
        """Bilinear (transfinite) map of unit-square points to the domain."""
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        s, t = p[:, 0:1], p[:, 1:2]
        c = self.corners
        out = (
            (1 - s) * (1 - t) * c[0]
            + s * (1 - t) * c[1]
            + s * t * c[2]
            + (1 - s) * t * c[3]
        )
        return out if np.asarray(pts).ndim == 2 else out[0]

    def map_jacobian(self, pts: np.ndarray) -> np.ndarray:
        """Jacobian d(x)/d(s,t) of the bilinear map, shape (..., 2, 2)."""
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        s, t = p[:, 0:1], p[:, 1:2]
        c = self.corners
        dxds = (1 - t) * (c[1] - c[0]) + t * (c[2] - c[3])
        dxdt = (1 - s) * (c[3] - c[0]) + s * (c[2] - c[1])
        jac = np.stack([dxds, dxdt], axis=-1)
        return jac if np.asarray(pts).ndim == 2 else jac[0]

    def inverse_map(self, x: np.ndarray, tol: float = 1e-13, max_iter: int = 60) -> np.ndarray:
        """Newton inversion of the bilinear map; returns unit-square coords."""
        xq = np.atleast_2d(np.asarray(x, dtype=float))
        s = np.full_like(xq, 0.5)
        for _ in range(max_iter):
            r = self.map(s) - xq
            if np.abs(r).max() < tol * max(1.0, np.abs(self.corners).max()):
                break
            jac = self.map_jacobian(s)
            s = s - np.linalg.solve(jac, r[..., None])[..., 0]
        return s if np.asarray(x).ndim == 2 else s[0]

    @property
    def area(self) -> float:
        return polygon_area(self.corners)


@dataclass
class PolygonalMesh:
    """Straight-edged polygonal tiling of a quadrilateral domain.

    vertices: (n_v, 2) coordinates; elements: CCW vertex-index cycles;
    boundary_edges: undirected edge (i, j) with i < j -> boundary tag.
    """

    vertices: np.ndarray
    elements: list[list[int]]
    boundary_edges: dict[tuple[int, int], str]
    domain: Domain
    family: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def element_coords(self, e: int) -> np.ndarray:
        return self.vertices[self.elements[e]]

    def element_areas(self) -> np.ndarray:
        return np.array([polygon_area(self.element_coords(e)) for e in range(self.n_elements)])

    def boundary_nodes(self, tag: str | None = None) -> np.ndarray:
        nodes: set[int] = set()
        for (i, j), t in self.boundary_edges.items():
            if tag is None or t == tag:
                nodes.update((i, j))
        return np.array(sorted(nodes), dtype=int)

    def edges_with_tag(self, tag: str) -> list[tuple[int, int]]:
        return [e for e, t in self.boundary_edges.items() if t == tag]


def mean_diameter(mesh: PolygonalMesh) -> float:
    """Arithmetic mean over elements of the max vertex-pair distance."""
    return float(
        np.mean([polygon_diameter(mesh.element_coords(e)) for e in range(mesh.n_elements)])
    )


def validate_mesh(mesh: PolygonalMesh, rel_tol: float = 1e-10, check_domain_area: bool = True) -> None:
    """Check the tiling invariants; raises MeshError on the first violation."""
    areas = []
    for e in range(mesh.n_elements):
        cyc = mesh.elements[e]
        if len(cyc) < 3:
            raise MeshError(f"element {e} has fewer than 3 vertices")
        if len(set(cyc)) != len(cyc):
            raise MeshError(f"element {e} repeats a vertex index")
        coords = mesh.element_coords(e)
        a = polygon_area(coords)
        if a <= 0:
            raise MeshError(f"element {e} has non-positive area {a}")
        if not is_simple_polygon(coords):
            raise MeshError(f"element {e} is not a simple polygon")
        areas.append(a)
    total = float(np.sum(areas))
    if check_domain_area and abs(total - mesh.domain.area) > rel_tol * mesh.domain.area:
        raise MeshError(
            f"element areas sum to {total}, domain area is {mesh.domain.area}"
        )
    counts: dict[tuple[int, int], int] = {}
    for cyc in mesh.elements:
        n = len(cyc)
        for k in range(n):
            i, j = cyc[k], cyc[(k + 1) % n]
            key = (min(i, j), max(i, j))
            counts[key] = counts.get(key, 0) + 1
    for key, c in counts.items():
        if c == 2:
            if key in mesh.boundary_edges:
                raise MeshError(f"shared edge {key} carries a boundary tag")
        elif c == 1:
            if key not in mesh.boundary_edges:
                raise MeshError(f"edge {key} is neither shared nor tagged")
        else:
            raise MeshError(f"edge {key} belongs to {c} elements")
    for key in mesh.boundary_edges:
        if key not in counts:
            raise MeshError(f"tagged edge {key} is not part of any element")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_vpoly(mesh: PolygonalMesh, path) -> None:
    """Write the plain-text VPOLY 1 mesh format."""
    buf = io.StringIO()
    buf.write("VPOLY 1\n")
    buf.write(f"{mesh.n_vertices} {mesh.n_elements} {len(mesh.boundary_edges)}\n")
    for x, y in mesh.vertices:
        buf.write(f"{_fmt(x)} {_fmt(y)}\n")
    for cyc in mesh.elements:
        buf.write(" ".join([str(len(cyc))] + [str(i) for i in cyc]) + "\n")
    for (i, j), tag in sorted(mesh.boundary_edges.items()):
        buf.write(f"{i} {j} {tag}\n")
    with open(path, "w", encoding="utf-8") as f:
        f.write(buf.getvalue())


def read_vpoly(path, domain: Domain | None = None) -> PolygonalMesh:
    """Read a VPOLY 1 file. If no domain is given, the bounding box is used."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    if not lines or lines[0] != "VPOLY 1":
        raise MeshError(f"{path}: missing 'VPOLY 1' header")
    try:
        nv, ne, nb = (int(tok) for tok in lines[1].split())
    except ValueError as exc:
        raise MeshError(f"{path}: bad count line") from exc
    if len(lines) != 2 + nv + ne + nb:
        raise MeshError(f"{path}: expected {2 + nv + ne + nb} lines, got {len(lines)}")
    verts = np.array(
        [[float(tok) for tok in lines[2 + k].split()] for k in range(nv)]
    )
    elements = []
    for k in range(ne):
        toks = lines[2 + nv + k].split()
        cnt = int(toks[0])
        idx = [int(t) for t in toks[1:]]
        if len(idx) != cnt:
            raise MeshError(f"{path}: element {k} count mismatch")
        elements.append(idx)
    boundary: dict[tuple[int, int], str] = {}
    for k in range(nb):
        toks = lines[2 + nv + ne + k].split()
        i, j, tag = int(toks[0]), int(toks[1]), toks[2]
        boundary[(min(i, j), max(i, j))] = tag
    meta = {}
    if domain is None:
        lo = verts.min(axis=0)
        hi = verts.max(axis=0)
        domain = Domain(
            np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        )
        meta["domain_inferred"] = True
    return PolygonalMesh(verts, elements, boundary, domain, meta=meta)
