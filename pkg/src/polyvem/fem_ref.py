"""Biquadratic (Q2) displacement reference formulation on structured grids.

Shares the material module with the VEM solver and produces the reference
displacement/gradient fields used by the H1-like error norm.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .materials import MaterialModel, material_eval
from .mesh import Domain
from .solver import SolutionState, solve_with_stepping

__all__ = [
    "Q2Mesh",
    "Q2System",
    "ReferenceSolution",
    "solve_q2",
    "reference_cache_name",
    "write_reference_cache",
    "read_reference_cache",
    "reference_solution",
]

# 3-point Gauss rule on [-1, 1]
_GP = np.array([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)])
_GW = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])

# local node -> (ix, iy) in the 3x3 tensor grid
_LOCAL = [(0, 0), (2, 0), (2, 2), (0, 2), (1, 0), (2, 1), (1, 2), (0, 1), (1, 1)]


def _shape_1d(x):
    x = np.asarray(x, dtype=float)
    return np.stack([0.5 * x * (x - 1.0), 1.0 - x**2, 0.5 * x * (x + 1.0)], axis=-1)


def _dshape_1d(x):
    x = np.asarray(x, dtype=float)
    return np.stack([x - 0.5, -2.0 * x, x + 0.5], axis=-1)


def q2_shape(xi, eta):
    """Shape values and local-coordinate gradients at (xi, eta); shapes
    (..., 9) and (..., 9, 2)."""
    lx, ly = _shape_1d(xi), _shape_1d(eta)
    dx, dy = _dshape_1d(xi), _dshape_1d(eta)
    N = np.empty(np.shape(np.asarray(xi)) + (9,))
    dN = np.empty(np.shape(np.asarray(xi)) + (9, 2))
    for a, (ix, iy) in enumerate(_LOCAL):
        N[..., a] = lx[..., ix] * ly[..., iy]
        dN[..., a, 0] = dx[..., ix] * ly[..., iy]
        dN[..., a, 1] = lx[..., ix] * dy[..., iy]
    return N, dN


class Q2Mesh:
    """Structured 2^level x 2^level grid of 9-node quadrilaterals."""

    def __init__(self, level: int, domain: Domain | None = None):
        if level < 1:
            raise ValueError("level must be >= 1")
        self.level = level
        self.domain = domain or Domain.unit_square()
        m = 2**level
        self.m = m
        g = np.linspace(0.0, 1.0, 2 * m + 1)
        ss, tt = np.meshgrid(g, g, indexing="xy")
        ref = np.column_stack([ss.ravel(), tt.ravel()])
        self.ref_nodes = ref
        self.nodes = self.domain.map(ref)
        self.n_nodes = len(self.nodes)

        def nid(i, j):
            return j * (2 * m + 1) + i

        cells = np.empty((m * m, 9), dtype=int)
        k = 0
        for cy in range(m):
            for cx in range(m):
                i, j = 2 * cx, 2 * cy
                cells[k] = [
                    nid(i, j), nid(i + 2, j), nid(i + 2, j + 2), nid(i, j + 2),
                    nid(i + 1, j), nid(i + 2, j + 1), nid(i + 1, j + 2), nid(i, j + 1),
                    nid(i + 1, j + 1),
                ]
                k += 1
        self.cells = cells

    def boundary_nodes(self, tag: str) -> np.ndarray:
        m2 = 2 * self.m
        i = np.arange(self.n_nodes) % (m2 + 1)
        j = np.arange(self.n_nodes) // (m2 + 1)
        sel = {"bottom": j == 0, "right": i == m2, "top": j == m2, "left": i == 0}[tag]
        return np.where(sel)[0]

    def boundary_edges(self, tag: str):
        """(n1, n_mid, n2) node triples of boundary cell edges for a tag."""
        m = self.m
        m2 = 2 * m

        def nid(i, j):
            return j * (m2 + 1) + i

        out = []
        for k in range(m):
            if tag == "bottom":
                out.append((nid(2 * k, 0), nid(2 * k + 1, 0), nid(2 * k + 2, 0)))
            elif tag == "top":
                out.append((nid(2 * k, m2), nid(2 * k + 1, m2), nid(2 * k + 2, m2)))
            elif tag == "left":
                out.append((nid(0, 2 * k), nid(0, 2 * k + 1), nid(0, 2 * k + 2)))
            elif tag == "right":
                out.append((nid(m2, 2 * k), nid(m2, 2 * k + 1), nid(m2, 2 * k + 2)))
        return out


class _SolverParams:
    def __init__(self, steps, adaptive):
        self.steps = steps
        self.adaptive = adaptive
        self.newton_tol_rel = 1e-10
        self.newton_tol_abs = 1e-12
        self.newton_max_iter = 25


class Q2System:
    """Assembled Q2 problem implementing the solver's system protocol."""

    def __init__(
        self,
        mesh: Q2Mesh,
        model: MaterialModel,
        dirichlet_spec: dict[str, tuple[float | None, float | None]],
        tractions: list[tuple[str, tuple[float, float], object]],
        steps: int = 5,
        adaptive: bool = True,
    ):
        self.mesh = mesh
        self.model = model
        self.ndof = 2 * mesh.n_nodes
        self.setup = _SolverParams(steps, adaptive)

        xi, eta = np.meshgrid(_GP, _GP, indexing="ij")
        wq = np.outer(_GW, _GW).ravel()
        N, dN = q2_shape(xi.ravel(), eta.ravel())  # (9q, 9), (9q, 9, 2)
        self._N = N
        coords = mesh.nodes[mesh.cells]  # (nc, 9, 2)
        jac = np.einsum("cak,qad->cqkd", coords, dN)  # (nc, 9q, 2, 2)
        detj = np.linalg.det(jac)
        if np.any(detj <= 0.0):
            raise ValueError("Q2 isoparametric map has non-positive Jacobian")
        jinv = np.linalg.inv(jac)
        # dN/dX[a, j] = dN/dxi[a, d] * jinv[d, j]  (jinv = d(xi)/dX)
        dNdX = np.einsum("qad,cqdj->cqaj", dN, jinv)
        nc = len(mesh.cells)
        nq = len(wq)
        B = np.zeros((nc, nq, 4, 18))
        for a in range(9):
            for i in range(2):
                for j in range(2):
                    B[:, :, 2 * i + j, 2 * a + i] = dNdX[:, :, a, j]
        self._B = B
        self._w = wq[None, :] * detj

        dofs = np.empty((nc, 18), dtype=int)
        dofs[:, 0::2] = 2 * mesh.cells
        dofs[:, 1::2] = 2 * mesh.cells + 1
        self._dofs = dofs
        self._rows = np.repeat(dofs, 18, axis=1).ravel()
        self._cols = np.tile(dofs, (1, 18)).ravel()

        self.fixed_mask = np.zeros(self.ndof, dtype=bool)
        self.fixed_values = np.zeros(self.ndof)
        for tag, (ux, uy) in dirichlet_spec.items():
            for node in mesh.boundary_nodes(tag):
                if ux is not None:
                    self.fixed_mask[2 * node] = True
                    self.fixed_values[2 * node] = ux
                if uy is not None:
                    self.fixed_mask[2 * node + 1] = True
                    self.fixed_values[2 * node + 1] = uy
        self.free = np.where(~self.fixed_mask)[0]

        self.f_ext = np.zeros(self.ndof)
        for tag, t, filt in tractions:
            for n1, nm, n2 in mesh.boundary_edges(tag):
                mid = mesh.nodes[nm]
                if filt is not None and not filt(mid):
                    continue
                L = float(np.hypot(*(mesh.nodes[n2] - mesh.nodes[n1])))
                # consistent quadratic-trace loads for a constant traction
                for node, wn in ((n1, 1.0 / 6.0), (nm, 4.0 / 6.0), (n2, 1.0 / 6.0)):
                    self.f_ext[2 * node] += wn * L * t[0]
                    self.f_ext[2 * node + 1] += wn * L * t[1]

    def internal(self, u: np.ndarray, order: int = 2):
        uc = u[self._dofs]  # (nc, 18)
        g = np.einsum("cqak,ck->cqa", self._B, uc)
        nc, nq = g.shape[0], g.shape[1]
        F = np.eye(2)[None] + g.reshape(-1, 2, 2)
        psi, P, A = material_eval(self.model, F, order)
        w = self._w
        energy = float((w * psi.reshape(nc, nq)).sum())
        if order == 0:
            return energy, None, None
        p = P.reshape(nc, nq, 4)
        r_cells = np.einsum("cq,cqa,cqak->ck", w, p, self._B)
        residual = np.zeros(self.ndof)
        np.add.at(residual, self._dofs.ravel(), r_cells.ravel())
        if order == 1:
            return energy, residual, None
        a = A.reshape(nc, nq, 4, 4)
        k_cells = np.einsum("cq,cqak,cqab,cqbl->ckl", w, self._B, a, self._B)
        K = sp.coo_matrix(
            (k_cells.ravel(), (self._rows, self._cols)), shape=(self.ndof, self.ndof)
        ).tocsr()
        return energy, residual, K

    def potential_energy(self, u: np.ndarray, load_factor: float) -> float:
        e, _, _ = self.internal(u, order=0)
        return e - load_factor * float(self.f_ext @ u)


@dataclass
class ReferenceSolution:
    """Q2 nodal solution with point evaluation of u and grad u."""

    mesh: Q2Mesh
    u: np.ndarray  # (n_nodes, 2)

    def evaluate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Displacement and displacement gradient at physical points.

        Points are located through the inverse bilinear domain map; points
        on internal cell boundaries resolve to the lowest cell index.
        """
        X = np.atleast_2d(np.asarray(points, dtype=float))
        s = self.mesh.domain.inverse_map(X)
        if np.any(s < -1e-9) or np.any(s > 1.0 + 1e-9):
            raise ValueError("evaluation point outside the reference domain")
        s = np.clip(s, 0.0, 1.0)
        m = self.mesh.m
        t = s * m
        idx = np.floor(t).astype(int)
        frac = t - idx
        # lowest-cell-index tie-break for points on internal boundaries
        for d in range(2):
            on_line = (frac[:, d] == 0.0) & (idx[:, d] > 0)
            idx[on_line, d] -= 1
            frac[on_line, d] = 1.0
        idx = np.minimum(idx, m - 1)
        cell = idx[:, 1] * m + idx[:, 0]
        xi = 2.0 * frac[:, 0] - 1.0
        eta = 2.0 * frac[:, 1] - 1.0
        N, dN = q2_shape(xi, eta)  # (n, 9), (n, 9, 2)
        coords = self.mesh.nodes[self.mesh.cells[cell]]  # (n, 9, 2)
        uc = self.u[self.mesh.cells[cell]]  # (n, 9, 2)
        jac = np.einsum("nak,nad->nkd", coords, dN)
        jinv = np.linalg.inv(jac)
        dNdX = np.einsum("nad,ndj->naj", dN, jinv)
        uval = np.einsum("na,nak->nk", N, uc)
        grad = np.einsum("nai,naj->nij", uc, dNdX)
        if np.asarray(points).ndim == 1:
            return uval[0], grad[0]
        return uval, grad

    def probe(self, point: np.ndarray) -> np.ndarray:
        """Nodal displacement at a mesh node (exact)."""
        d2 = ((self.mesh.nodes - np.asarray(point)) ** 2).sum(axis=1)
        k = int(np.argmin(d2))
        scale = max(1.0, float(np.abs(self.mesh.domain.corners).max()))
        if d2[k] > (1e-9 * scale) ** 2:
            raise ValueError(f"point {point} is not a Q2 mesh node")
        return self.u[k]


def solve_q2(
    name: str,
    level: int,
    model: MaterialModel,
    load: float | None = None,
    steps: int = 5,
    adaptive: bool = True,
) -> tuple[ReferenceSolution, SolutionState]:
    """Run a benchmark on the Q2 reference formulation."""
    from .problems import DEFAULT_LOADS, problem_bc_spec, problem_domain

    domain = problem_domain(name)
    if load is None:
        load = DEFAULT_LOADS[name]
    mesh = Q2Mesh(level, domain)
    dspec, tspec = problem_bc_spec(name, load, domain)
    system = Q2System(mesh, model, dspec, tspec, steps=steps, adaptive=adaptive)
    state = solve_with_stepping(system)
    return ReferenceSolution(mesh, state.u.reshape(-1, 2)), state


def reference_cache_name(problem: str, model: MaterialModel, level: int, load: float) -> str:
    return f"{problem}_{model.kind}_nu{model.nu:.6g}_q{load:.6g}_L{level}.qref"


def write_reference_cache(path, ref: ReferenceSolution) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(ref.u)}\n")
        for ux, uy in ref.u:
            f.write(f"{format(ux, '.17g')} {format(uy, '.17g')}\n")


def read_reference_cache(path, mesh: Q2Mesh) -> ReferenceSolution:
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().split("\n")
    n = int(lines[0])
    if n != mesh.n_nodes:
        raise ValueError(f"{path}: cached node count {n} != mesh nodes {mesh.n_nodes}")
    u = np.array([[float(t) for t in lines[1 + k].split()] for k in range(n)])
    return ReferenceSolution(mesh, u)


def reference_solution(
    name: str,
    level: int,
    model: MaterialModel,
    load: float | None = None,
    cache_dir: str | None = None,
    steps: int = 5,
) -> ReferenceSolution:
    """Compute or load the cached Q2 reference for a benchmark."""
    from .problems import DEFAULT_LOADS, problem_domain

    if load is None:
        load = DEFAULT_LOADS[name]
    if cache_dir is not None:
        path = os.path.join(cache_dir, reference_cache_name(name, model, level, load))
        if os.path.exists(path):
            return read_reference_cache(path, Q2Mesh(level, problem_domain(name)))
    ref, _ = solve_q2(name, level, model, load=load, steps=steps)
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        write_reference_cache(path, ref)
    return ref
