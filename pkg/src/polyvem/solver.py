"""Global assembly, boundary conditions, and Newton-Raphson continuation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .materials import MaterialModel, NonFiniteStateError, material_eval, stab_form_eval
from .mesh import PolygonalMesh
from .stabilization import stab_params
from .vem import build_projection

__all__ = [
    "StabConfig",
    "ProblemSetup",
    "VemSystem",
    "SolutionState",
    "SolverFailure",
    "NewtonResult",
    "assemble",
    "newton_solve",
    "solve_with_stepping",
    "reaction_forces",
]


@dataclass(frozen=True)
class StabConfig:
    """Stabilization switches exposed through the run config."""

    alpha_mode: str = "on"
    taylor_order: int = 5
    nu0: float = 0.0
    mvee_tol: float = 1e-8


@dataclass
class ProblemSetup:
    """Declarative boundary value problem on a polygonal mesh.

    dirichlet entries are (node, component, value at load factor 1);
    tractions are boundary edges (i, j) carrying a constant reference
    traction vector (dead load).
    """

    mesh: PolygonalMesh
    model: MaterialModel
    stab: StabConfig = field(default_factory=StabConfig)
    dirichlet: list[tuple[int, int, float]] = field(default_factory=list)
    tractions: list[tuple[int, int, tuple[float, float]]] = field(default_factory=list)
    body_force: tuple[float, float] = (0.0, 0.0)
    steps: int = 5
    adaptive: bool = True
    newton_tol_rel: float = 1e-10
    newton_tol_abs: float = 1e-12
    newton_max_iter: int = 25

    def __post_init__(self):
        if not self.dirichlet:
            raise ValueError("Dirichlet set must be non-empty")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        fixed = {(n, c) for n, c, _ in self.dirichlet}
        for i, j, t in self.tractions:
            for c in range(2):
                if abs(t[c]) > 0.0 and (i, c) in fixed and (j, c) in fixed:
                    raise ValueError(
                        f"edge ({i},{j}) carries traction component {c} on a "
                        "Dirichlet-fixed component"
                    )

    def compile(self) -> "VemSystem":
        return VemSystem(self)


class VemSystem:
    """Compiled element operators, stabilization parameters and DOF maps."""

    def __init__(self, setup: ProblemSetup):
        self.setup = setup
        mesh, model = setup.mesh, setup.model
        self.mesh = mesh
        self.model = model
        self.ndof = 2 * mesh.n_vertices

        self.ops = []
        self.stab = []
        for e in range(mesh.n_elements):
            coords = mesh.element_coords(e)
            self.ops.append(build_projection(coords))
            self.stab.append(
                stab_params(
                    coords,
                    model,
                    alpha_mode=setup.stab.alpha_mode,
                    taylor_order=setup.stab.taylor_order,
                    nu0=setup.stab.nu0,
                    mvee_tol=setup.stab.mvee_tol,
                )
            )
        self.mu_hat = np.array([s.mu_hat for s in self.stab])
        self.lam_hat = np.array([s.lam_hat for s in self.stab])
        self.areas = np.array([o.area for o in self.ops])

        self.dof_idx = []
        rows, cols = [], []
        tri_slices = []
        t0 = 0
        tri_areas, tri_elem = [], []
        for e, ops in enumerate(self.ops):
            idx = np.empty(2 * ops.n_v, dtype=int)
            nodes = np.asarray(mesh.elements[e], dtype=int)
            idx[0::2] = 2 * nodes
            idx[1::2] = 2 * nodes + 1
            self.dof_idx.append(idx)
            rows.append(np.repeat(idx, len(idx)))
            cols.append(np.tile(idx, len(idx)))
            nt = len(ops.tris)
            tri_slices.append((t0, t0 + nt))
            t0 += nt
            tri_areas.append(ops.tri_areas)
            tri_elem.append(np.full(nt, e, dtype=int))
        self._rows = np.concatenate(rows)
        self._cols = np.concatenate(cols)
        self._tri_slices = tri_slices
        self.tri_areas = np.concatenate(tri_areas)
        self.tri_elem = np.concatenate(tri_elem)
        self.n_tris = len(self.tri_areas)

        self.fixed_mask = np.zeros(self.ndof, dtype=bool)
        self.fixed_values = np.zeros(self.ndof)
        for node, comp, val in setup.dirichlet:
            self.fixed_mask[2 * node + comp] = True
            self.fixed_values[2 * node + comp] = val
        self.free = np.where(~self.fixed_mask)[0]

        self.f_ext = np.zeros(self.ndof)
        for i, j, t in setup.tractions:
            # 2-point Gauss on the linear trace of a straight edge with a
            # constant traction: each endpoint carries t * L / 2
            L = float(np.hypot(*(mesh.vertices[j] - mesh.vertices[i])))
            for node in (i, j):
                self.f_ext[2 * node] += 0.5 * L * t[0]
                self.f_ext[2 * node + 1] += 0.5 * L * t[1]
        f = np.asarray(setup.body_force, dtype=float)
        if np.any(f != 0.0):
            for e, ops in enumerate(self.ops):
                w = ops.area / ops.n_v
                idx = self.dof_idx[e]
                self.f_ext[idx[0::2]] += w * f[0]
                self.f_ext[idx[1::2]] += w * f[1]

    def gradients(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Projected gradients per element and constant subtriangle gradients."""
        g_proj = np.empty((len(self.ops), 4))
        g_tris = np.empty((self.n_tris, 4))
        for e, ops in enumerate(self.ops):
            d = u[self.dof_idx[e]]
            g_proj[e] = ops.b_proj @ d
            s0, s1 = self._tri_slices[e]
            g_tris[s0:s1] = ops.b_tris @ d
        return g_proj, g_tris

    def internal(self, u: np.ndarray, order: int = 2):
        """Internal energy, residual and tangent. Raises NonFiniteStateError
        if any projected or subtriangle state has J <= 0."""
        g_proj, g_tris = self.gradients(u)
        eye = np.eye(2)
        f_proj = eye[None] + g_proj.reshape(-1, 2, 2)
        f_tris = eye[None] + g_tris.reshape(-1, 2, 2)

        psi_c, p_c, a_c = material_eval(self.model, f_proj, order)
        psi_sp, p_sp, a_sp = stab_form_eval(self.mu_hat, self.lam_hat, f_proj, order)
        psi_st, p_st, a_st = stab_form_eval(
            self.mu_hat[self.tri_elem], self.lam_hat[self.tri_elem], f_tris, order
        )
        energy = float(
            self.areas @ (psi_c - psi_sp) + self.tri_areas @ psi_st
        )
        if order == 0:
            return energy, None, None

        residual = np.zeros(self.ndof)
        p_proj_w = (self.areas[:, None] * (p_c - p_sp).reshape(-1, 4))
        p_tri_w = (self.tri_areas[:, None] * p_st.reshape(-1, 4))
        vals = np.empty(len(self._rows)) if order >= 2 else None
        if order >= 2:
            m_proj = (a_c - a_sp).reshape(-1, 4, 4) * self.areas[:, None, None]
            m_tris = a_st.reshape(-1, 4, 4) * self.tri_areas[:, None, None]
        pos = 0
        for e, ops in enumerate(self.ops):
            idx = self.dof_idx[e]
            s0, s1 = self._tri_slices[e]
            r_e = ops.b_proj.T @ p_proj_w[e]
            r_e += np.einsum("tak,ta->k", ops.b_tris, p_tri_w[s0:s1])
            residual[idx] += r_e
            if order >= 2:
                k_e = ops.b_proj.T @ m_proj[e] @ ops.b_proj
                k_e += np.einsum("tak,tab,tbl->kl", ops.b_tris, m_tris[s0:s1], ops.b_tris)
                m = k_e.size
                vals[pos : pos + m] = k_e.ravel()
                pos += m
        if order == 1:
            return energy, residual, None
        K = sp.coo_matrix((vals, (self._rows, self._cols)), shape=(self.ndof, self.ndof)).tocsr()
        return energy, residual, K

    def potential_energy(self, u: np.ndarray, load_factor: float) -> float:
        e, _, _ = self.internal(u, order=0)
        return e - load_factor * float(self.f_ext @ u)

    def check_admissible(self, u: np.ndarray) -> bool:
        """True when J > 0 at every projection and subtriangle."""
        try:
            self.internal(u, order=0)
        except NonFiniteStateError:
            return False
        return True


def assemble(system: VemSystem, u: np.ndarray, load_factor: float = 1.0):
    """Global residual (internal minus external) and tangent."""
    _, r_int, K = system.internal(u, order=2)
    return r_int - load_factor * system.f_ext, K


@dataclass
class NewtonResult:
    u: np.ndarray
    iterations: int
    residual_norm: float
    converged: bool
    energy: float = float("nan")


@dataclass
class StepRecord:
    load_factor: float
    iterations: int
    residual_norm: float
    converged: bool
    energy_initial: float = float("nan")
    energy_final: float = float("nan")


@dataclass
class SolutionState:
    """Converged global DOF vector with load-step history."""

    u: np.ndarray
    load_factor: float
    steps: list[StepRecord] = field(default_factory=list)
    converged: bool = False

    @property
    def newton_iters_total(self) -> int:
        return sum(s.iterations for s in self.steps)

    def displacements(self) -> np.ndarray:
        return self.u.reshape(-1, 2)


class SolverFailure(RuntimeError):
    """Continuation could not reach full load; carries the step history."""

    def __init__(self, message: str, history: list[StepRecord]):
        super().__init__(message)
        self.history = history


def newton_solve(
    system,
    u0: np.ndarray,
    load_factor: float,
    tol_rel: float = 1e-10,
    tol_abs: float = 1e-12,
    max_iter: int = 25,
) -> NewtonResult:
    """Full Newton on the free DOFs at a fixed load factor.

    Dirichlet rows are eliminated by reduction to the free set; failure to
    converge or a non-finite state returns converged=False (cutback signal).
    """
    u = np.asarray(u0, dtype=float).copy()
    u[system.fixed_mask] = load_factor * system.fixed_values[system.fixed_mask]
    free = system.free
    f_ext = load_factor * system.f_ext
    ref = max(1.0, float(np.linalg.norm(f_ext[free])))
    rn0 = float("inf")
    du_norm = float("inf")
    for it in range(max_iter + 1):
        try:
            energy, r_int, K = system.internal(u, order=2)
        except NonFiniteStateError:
            return NewtonResult(u, it, float("inf"), False)
        r = r_int - f_ext
        rn = float(np.linalg.norm(r[free]))
        if it == 0:
            rn0 = rn
        converged = rn <= max(tol_rel * ref, tol_abs)
        if not converged and it >= 1:
            # assembly noise floor: the last increment was at rounding level
            # and the residual has collapsed relative to where the step began
            stagnant = du_norm <= 1e-11 * max(float(np.linalg.norm(u[free])), 1e-9)
            converged = stagnant and rn <= 1e-3 * max(ref, rn0)
        if converged:
            return NewtonResult(u, it, rn, True, energy - load_factor * float(system.f_ext @ u))
        if it == max_iter:
            return NewtonResult(u, it, rn, False)
        K_ff = K[free][:, free]
        du = spsolve(K_ff, -r[free])
        if not np.all(np.isfinite(du)):
            return NewtonResult(u, it, rn, False)
        u[free] += du
        du_norm = float(np.linalg.norm(du))
    return NewtonResult(u, max_iter, float("inf"), False)


def solve_with_stepping(
    system,
    n_steps: int | None = None,
    adaptive: bool | None = None,
    max_halvings: int = 10,
) -> SolutionState:
    """Incremental loading to load factor 1 with optional adaptive cutback.

    The increment halves on failure (at most max_halvings times) and
    regrows by doubling after success, capped at the nominal increment.
    """
    setup = getattr(system, "setup", None)
    if n_steps is None:
        n_steps = setup.steps if setup is not None else 5
    if adaptive is None:
        adaptive = setup.adaptive if setup is not None else True
    tol_rel = setup.newton_tol_rel if setup is not None else 1e-10
    tol_abs = setup.newton_tol_abs if setup is not None else 1e-12
    max_iter = setup.newton_max_iter if setup is not None else 25

    u = np.zeros(system.ndof)
    lf = 0.0
    dl_nominal = 1.0 / n_steps
    dl = dl_nominal
    dl_min = dl_nominal * 0.5**max_halvings
    history: list[StepRecord] = []
    while lf < 1.0 - 1e-12:
        target = min(lf + dl, 1.0)
        e_init = _try_energy(system, u, target)
        res = newton_solve(system, u, target, tol_rel, tol_abs, max_iter)
        rec = StepRecord(target, res.iterations, res.residual_norm, res.converged, e_init, res.energy)
        history.append(rec)
        if res.converged:
            u = res.u
            lf = target
            if adaptive:
                dl = min(2.0 * dl, dl_nominal)
        else:
            if not adaptive or 0.5 * dl < dl_min:
                raise SolverFailure(
                    f"load stepping failed at factor {target:.6g} with "
                    f"increment {dl:.3g} at the cutback floor",
                    history,
                )
            dl *= 0.5
    return SolutionState(u=u, load_factor=1.0, steps=history, converged=True)


def _try_energy(system, u: np.ndarray, load_factor: float) -> float:
    v = np.asarray(u, dtype=float).copy()
    v[system.fixed_mask] = load_factor * system.fixed_values[system.fixed_mask]
    try:
        return system.potential_energy(v, load_factor)
    except NonFiniteStateError:
        return float("nan")


def reaction_forces(system, u: np.ndarray, load_factor: float = 1.0) -> np.ndarray:
    """Residual restricted to the fixed DOFs (reactions at convergence)."""
    _, r_int, _ = system.internal(u, order=1)
    r = r_int - load_factor * system.f_ext
    return r[system.fixed_mask]
