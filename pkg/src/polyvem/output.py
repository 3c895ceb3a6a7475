"""Run artifacts: legacy-VTK deformed configurations, solution CSV, metadata."""

from __future__ import annotations

import json

import numpy as np

from .mesh import PolygonalMesh

__all__ = ["write_vtk", "write_solution_csv", "write_run_json"]


def write_vtk(path, mesh: PolygonalMesh, u: np.ndarray, title: str = "deformed configuration") -> None:
    """Legacy ASCII POLYDATA with displaced points and one polygon per element."""
    u = np.asarray(u, dtype=float).reshape(-1, 2)
    pts = mesh.vertices + u
    with open(path, "w", encoding="utf-8") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(title + "\n")
        f.write("ASCII\nDATASET POLYDATA\n")
        f.write(f"POINTS {len(pts)} float\n")
        for x, y in pts:
            f.write(f"{x:.9g} {y:.9g} 0\n")
        size = sum(len(c) + 1 for c in mesh.elements)
        f.write(f"POLYGONS {mesh.n_elements} {size}\n")
        for cyc in mesh.elements:
            f.write(" ".join([str(len(cyc))] + [str(i) for i in cyc]) + "\n")
        f.write(f"POINT_DATA {len(pts)}\n")
        f.write("VECTORS displacement float\n")
        for ux, uy in u:
            f.write(f"{ux:.9g} {uy:.9g} 0\n")


def write_solution_csv(path, mesh: PolygonalMesh, u: np.ndarray) -> None:
    u = np.asarray(u, dtype=float).reshape(-1, 2)
    with open(path, "w", encoding="utf-8") as f:
        f.write("node,x,y,ux,uy\n")
        for k, ((x, y), (ux, uy)) in enumerate(zip(mesh.vertices, u)):
            f.write(f"{k},{x:.17g},{y:.17g},{ux:.17g},{uy:.17g}\n")


def write_run_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, default=_json_default)
        f.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")
