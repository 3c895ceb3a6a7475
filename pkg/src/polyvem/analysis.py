"""H1-like error norm, point probes, and convergence-study orchestration."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .fem_ref import ReferenceSolution, reference_solution
from .generators import build_mesh
from .materials import MaterialModel
from .mesh import PolygonalMesh, mean_diameter
from .problems import DEFAULT_LOADS, build_problem, probe_point, problem_domain
from .solver import SolverFailure, StabConfig, VemSystem, solve_with_stepping

__all__ = [
    "ConvergenceRecord",
    "h1_error",
    "probe",
    "convergence_study",
    "fit_slope",
    "write_study_csv",
    "STUDY_CSV_HEADER",
]

STUDY_CSV_HEADER = (
    "family,N,hbar,nu,model,alpha_mode,probe_ux,probe_uy,h1_error,"
    "newton_iters_total,runtime_s"
)


def h1_error(system: VemSystem, u: np.ndarray, reference: ReferenceSolution) -> float:
    """Discrete H1-like distance between a VEM solution and the reference.

    Element-wise, each vertex contributes the squared displacement mismatch
    plus the squared Frobenius mismatch between the reference gradient and
    the element's projected gradient, weighted by |E| / n_v.
    """
    mesh = system.mesh
    u = np.asarray(u, dtype=float)
    u_nodes = u.reshape(-1, 2)
    u_ref, g_ref = reference.evaluate(mesh.vertices)
    total = 0.0
    for e, ops in enumerate(system.ops):
        nodes = np.asarray(mesh.elements[e], dtype=int)
        w = ops.area / len(nodes)
        pi = (ops.b_proj @ u[system.dof_idx[e]]).reshape(2, 2)
        du = u_ref[nodes] - u_nodes[nodes]
        dg = g_ref[nodes] - pi[None]
        total += w * (float((du**2).sum()) + float((dg**2).sum()))
    return float(np.sqrt(total))


def probe(mesh: PolygonalMesh, u: np.ndarray, point) -> np.ndarray:
    """Displacement at a mesh vertex coinciding with the given point."""
    p = np.asarray(point, dtype=float)
    d2 = ((mesh.vertices - p) ** 2).sum(axis=1)
    k = int(np.argmin(d2))
    scale = max(1.0, float(np.abs(mesh.domain.corners).max()))
    if d2[k] > (1e-9 * scale) ** 2:
        raise ValueError(f"probe point {p} does not coincide with a mesh vertex")
    return np.asarray(u, dtype=float).reshape(-1, 2)[k]


@dataclass
class ConvergenceRecord:
    """One (family, N, nu) run of a convergence study."""

    family: str
    N: int
    hbar: float
    nu: float
    model: str
    alpha_mode: str
    probe_ux: float = float("nan")
    probe_uy: float = float("nan")
    h1_error: float = float("nan")
    newton_iters_total: int = 0
    runtime_s: float = 0.0
    failed: bool = False
    failure: str = ""

    def csv_row(self) -> str:
        return (
            f"{self.family},{self.N},{self.hbar:.10g},{self.nu:.10g},{self.model},"
            f"{self.alpha_mode},{self.probe_ux:.10g},{self.probe_uy:.10g},"
            f"{self.h1_error:.10g},{self.newton_iters_total},{self.runtime_s:.4g}"
        )


def fit_slope(records: list[ConvergenceRecord]) -> float | None:
    """Least-squares slope of log(h1_error) vs log(hbar); None when degenerate."""
    pts = [(r.hbar, r.h1_error) for r in records if not r.failed and r.h1_error > 0]
    if len(pts) < 2:
        return None
    h = np.log([p[0] for p in pts])
    e = np.log([p[1] for p in pts])
    return float(np.polyfit(h, e, 1)[0])


def convergence_study(
    problem: str,
    family: str,
    N_values: list[int],
    nu_values: list[float],
    model_kind: str = "neo-hookean",
    E: float = 200.0,
    alpha_mode: str = "on",
    load: float | None = None,
    ref_level: int = 6,
    cache_dir: str | None = None,
    steps: int = 5,
    adaptive: bool = True,
    mesh_opts: dict | None = None,
    model_opts: dict | None = None,
    compute_error: bool = True,
) -> tuple[list[ConvergenceRecord], dict[float, float | None]]:
    """Run the solver over (N, nu) and fit per-nu convergence slopes."""
    domain = problem_domain(problem)
    if load is None:
        load = DEFAULT_LOADS[problem]
    mesh_opts = mesh_opts or {}
    model_opts = model_opts or {}
    records: list[ConvergenceRecord] = []
    for nu in nu_values:
        model = MaterialModel(model_kind, E, nu, **model_opts)
        ref = (
            reference_solution(problem, ref_level, model, load=load, cache_dir=cache_dir)
            if compute_error
            else None
        )
        for N in N_values:
            t0 = time.perf_counter()
            mesh = build_mesh(family, N, domain, **mesh_opts)
            rec = ConvergenceRecord(
                family=family,
                N=N,
                hbar=mean_diameter(mesh),
                nu=nu,
                model=model_kind,
                alpha_mode=alpha_mode,
            )
            try:
                setup = build_problem(
                    problem,
                    mesh,
                    model,
                    stab=StabConfig(alpha_mode=alpha_mode),
                    load=load,
                    steps=steps,
                    adaptive=adaptive,
                )
                system = setup.compile()
                state = solve_with_stepping(system)
                p = probe(mesh, state.u, probe_point(problem, domain))
                rec.probe_ux, rec.probe_uy = float(p[0]), float(p[1])
                rec.newton_iters_total = state.newton_iters_total
                if ref is not None:
                    rec.h1_error = h1_error(system, state.u, ref)
            except SolverFailure as exc:
                rec.failed = True
                rec.failure = str(exc)
            rec.runtime_s = time.perf_counter() - t0
            records.append(rec)
    slopes = {
        nu: fit_slope([r for r in records if r.nu == nu]) for nu in nu_values
    }
    return records, slopes


def write_study_csv(path, records: list[ConvergenceRecord], slopes: dict | None = None) -> None:
    """One CSV row per run; slope summaries as commented footer lines."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(STUDY_CSV_HEADER + "\n")
        for r in records:
            f.write(r.csv_row() + "\n")
        for nu, s in (slopes or {}).items():
            f.write(f"# slope nu={nu:.10g}: {'n/a' if s is None else f'{s:.6g}'}\n")
