"""Benchmark boundary value problems: simple shear, Cook's membrane, punch."""

from __future__ import annotations

import numpy as np

from .materials import MaterialModel
from .mesh import Domain, PolygonalMesh
from .solver import ProblemSetup, StabConfig

__all__ = [
    "PROBLEMS",
    "DEFAULT_LOADS",
    "problem_domain",
    "problem_bc_spec",
    "probe_point",
    "build_problem",
    "dirichlet_from_tags",
    "dirichlet_from_function",
    "tractions_from_tag",
]

PROBLEMS = ("simple-shear", "cook", "punch")
DEFAULT_LOADS = {"simple-shear": 5.0, "cook": 10.0, "punch": 200.0}


def problem_domain(name: str) -> Domain:
    if name == "simple-shear":
        return Domain.unit_square()
    if name == "cook":
        return Domain(np.array([[0.0, 0.0], [48.0, 44.0], [48.0, 60.0], [0.0, 44.0]]))
    if name == "punch":
        return Domain.rectangle(2.0, 1.0)
    raise ValueError(f"unknown problem {name!r}; expected one of {PROBLEMS}")


def problem_bc_spec(name: str, load: float, domain: Domain):
    """Dirichlet tag spec and traction list for a benchmark.

    Returns (dirichlet: {tag: (ux | None, uy | None)},
             tractions: [(tag, (tx, ty), edge_midpoint_filter | None)]).
    """
    c = domain.corners
    if name == "simple-shear":
        return {"bottom": (0.0, 0.0)}, [("top", (load, 0.0), None)]
    if name == "cook":
        right_len = float(np.hypot(*(c[2] - c[1])))
        return {"left": (0.0, 0.0)}, [("right", (0.0, load / right_len), None)]
    if name == "punch":
        half = 0.5 * (c[0][0] + c[1][0])
        return (
            {"bottom": (None, 0.0), "left": (0.0, None), "top": (0.0, None)},
            [("top", (0.0, -load), lambda mid: mid[0] < half)],
        )
    raise ValueError(f"unknown problem {name!r}")


def probe_point(name: str, domain: Domain | None = None) -> np.ndarray:
    """Displacement probe location: the corner reported by each benchmark."""
    domain = domain or problem_domain(name)
    if name in ("simple-shear", "cook"):
        return domain.corners[2].copy()  # upper right
    if name == "punch":
        return domain.corners[3].copy()  # upper left
    raise ValueError(f"unknown problem {name!r}")


def dirichlet_from_tags(
    mesh: PolygonalMesh, spec: dict[str, tuple[float | None, float | None]]
) -> list[tuple[int, int, float]]:
    """Per-component nodal constraints from tagged boundary edges.

    Nodes shared by two tags (corners) take the union of constraints;
    conflicting prescribed values raise."""
    fixed: dict[tuple[int, int], float] = {}
    for tag, (ux, uy) in spec.items():
        for node in mesh.boundary_nodes(tag):
            for comp, val in ((0, ux), (1, uy)):
                if val is None:
                    continue
                key = (int(node), comp)
                if key in fixed and fixed[key] != val:
                    raise ValueError(f"conflicting Dirichlet values at node {node}")
                fixed[key] = float(val)
    return [(n, c, v) for (n, c), v in sorted(fixed.items())]


def dirichlet_from_function(mesh: PolygonalMesh, fn) -> list[tuple[int, int, float]]:
    """Prescribe fn(X) -> (ux, uy) on every boundary node (patch tests)."""
    out = []
    for node in mesh.boundary_nodes():
        ux, uy = fn(mesh.vertices[node])
        out.append((int(node), 0, float(ux)))
        out.append((int(node), 1, float(uy)))
    return out


def tractions_from_tag(
    mesh: PolygonalMesh, tag: str, t: tuple[float, float], edge_filter=None
) -> list[tuple[int, int, tuple[float, float]]]:
    out = []
    for i, j in mesh.edges_with_tag(tag):
        mid = 0.5 * (mesh.vertices[i] + mesh.vertices[j])
        if edge_filter is None or edge_filter(mid):
            out.append((i, j, (float(t[0]), float(t[1]))))
    return out


def build_problem(
    name: str,
    mesh: PolygonalMesh,
    model: MaterialModel,
    stab: StabConfig | None = None,
    load: float | None = None,
    steps: int = 5,
    adaptive: bool = True,
    **newton_kw,
) -> ProblemSetup:
    """Assemble a ProblemSetup for one of the named benchmarks."""
    if load is None:
        load = DEFAULT_LOADS[name]
    dspec, tspec = problem_bc_spec(name, load, mesh.domain)
    dirichlet = dirichlet_from_tags(mesh, dspec)
    tractions = []
    for tag, t, filt in tspec:
        tractions.extend(tractions_from_tag(mesh, tag, t, filt))
    return ProblemSetup(
        mesh=mesh,
        model=model,
        stab=stab or StabConfig(),
        dirichlet=dirichlet,
        tractions=tractions,
        steps=steps,
        adaptive=adaptive,
        **newton_kw,
    )
