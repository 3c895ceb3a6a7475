"""Virtual element operators: gradient projection, element energy,
residual and tangent for the low-order displacement space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import polygon_area, triangulate
from .materials import MaterialModel, material_eval, stab_form_eval
from .stabilization import StabilizationParams

__all__ = [
    "ElementOperators",
    "build_projection",
    "element_energy",
    "element_residual",
    "element_tangent",
]

_EYE2 = np.eye(2)


@dataclass(frozen=True)
class ElementOperators:
    """Immutable per-element maps built once from the reference geometry.

    b_proj maps the 2*n_v DOF vector to vec(Pi) = [Pi_00, Pi_01, Pi_10,
    Pi_11]; each b_tri maps DOFs to the constant gradient of the linear
    interpolant on one ear-clipped subtriangle.
    """

    verts: np.ndarray
    area: float
    b_proj: np.ndarray       # (4, 2 n_v)
    tris: np.ndarray         # (n_t, 3) vertex indices into the element cycle
    tri_areas: np.ndarray    # (n_t,)
    b_tris: np.ndarray       # (n_t, 4, 2 n_v)

    @property
    def n_v(self) -> int:
        return len(self.verts)

    def projection(self, d: np.ndarray) -> np.ndarray:
        """Projected (constant) displacement gradient Pi for DOF vector d."""
        return (self.b_proj @ np.asarray(d, float)).reshape(2, 2)


def build_projection(verts: np.ndarray) -> ElementOperators:
    """Build the projection map and subtriangle gradient maps for one element.

    The projection follows from the boundary integral of the linear edge
    traces: vertex v contributes with the rotated chord between its two
    neighbours, so Pi is exact for affine displacement fields.
    """
    v = np.asarray(verts, dtype=float)
    n = len(v)
    area = polygon_area(v)
    if area <= 0.0:
        raise ValueError("element must be a CCW polygon with positive area")

    # q_v = 0.5 * (edge-length-weighted outward normals of the two edges at v)
    nxt = np.roll(v, -1, axis=0)
    prv = np.roll(v, 1, axis=0)
    q = 0.5 * np.column_stack([nxt[:, 1] - prv[:, 1], -(nxt[:, 0] - prv[:, 0])])

    b_proj = np.zeros((4, 2 * n))
    for vi in range(n):
        for i in range(2):      # displacement component
            for j in range(2):  # gradient direction
                b_proj[2 * i + j, 2 * vi + i] = q[vi, j] / area

    tris = np.array(triangulate(v), dtype=int)
    tri_areas = np.empty(len(tris))
    b_tris = np.zeros((len(tris), 4, 2 * n))
    for t, (i0, i1, i2) in enumerate(tris):
        p0, p1, p2 = v[i0], v[i1], v[i2]
        at = polygon_area(np.array([p0, p1, p2]))
        tri_areas[t] = at
        # constant P1 gradients of the vertex hat functions
        grads = (
            np.array(
                [
                    [p1[1] - p2[1], p2[0] - p1[0]],
                    [p2[1] - p0[1], p0[0] - p2[0]],
                    [p0[1] - p1[1], p1[0] - p0[0]],
                ]
            )
            / (2.0 * at)
        )
        for local, vi in enumerate((i0, i1, i2)):
            for i in range(2):
                for j in range(2):
                    b_tris[t, 2 * i + j, 2 * vi + i] = grads[local, j]
    return ElementOperators(
        verts=v, area=float(area), b_proj=b_proj, tris=tris, tri_areas=tri_areas, b_tris=b_tris
    )


def _states(ops: ElementOperators, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deformation gradients at the projection and on every subtriangle."""
    d = np.asarray(d, dtype=float)
    g_proj = ops.b_proj @ d
    g_tris = ops.b_tris @ d
    f_proj = _EYE2 + g_proj.reshape(2, 2)
    f_tris = _EYE2[None] + g_tris.reshape(-1, 2, 2)
    return f_proj, f_tris


def element_energy(
    ops: ElementOperators,
    d: np.ndarray,
    model: MaterialModel,
    stab: StabilizationParams,
) -> float:
    """U_E = |E| Psi(Pi d) + sum_T |T| [Psi_hat(grad u|_T) - Psi_hat(Pi d)]."""
    f_proj, f_tris = _states(ops, d)
    psi_c = material_eval(model, f_proj[None], order=0)[0][0]
    psi_hat_proj = stab_form_eval(stab.mu_hat, stab.lam_hat, f_proj[None], order=0)[0][0]
    psi_hat_tris = stab_form_eval(stab.mu_hat, stab.lam_hat, f_tris, order=0)[0]
    return float(ops.area * (psi_c - psi_hat_proj) + ops.tri_areas @ psi_hat_tris)


def element_residual(
    ops: ElementOperators,
    d: np.ndarray,
    model: MaterialModel,
    stab: StabilizationParams,
) -> np.ndarray:
    """Exact gradient of element_energy with respect to the element DOFs."""
    f_proj, f_tris = _states(ops, d)
    _, p_c, _ = material_eval(model, f_proj[None], order=1)
    _, p_hat_proj, _ = stab_form_eval(stab.mu_hat, stab.lam_hat, f_proj[None], order=1)
    _, p_hat_tris, _ = stab_form_eval(stab.mu_hat, stab.lam_hat, f_tris, order=1)
    r = ops.b_proj.T @ (ops.area * (p_c[0] - p_hat_proj[0]).reshape(4))
    r += np.einsum("t,tak,ta->k", ops.tri_areas, ops.b_tris, p_hat_tris.reshape(-1, 4))
    return r


def element_tangent(
    ops: ElementOperators,
    d: np.ndarray,
    model: MaterialModel,
    stab: StabilizationParams,
) -> np.ndarray:
    """Symmetric element stiffness dR/dd (energy Hessian)."""
    f_proj, f_tris = _states(ops, d)
    _, _, a_c = material_eval(model, f_proj[None], order=2)
    _, _, a_hat_proj = stab_form_eval(stab.mu_hat, stab.lam_hat, f_proj[None], order=2)
    _, _, a_hat_tris = stab_form_eval(stab.mu_hat, stab.lam_hat, f_tris, order=2)
    m_proj = ops.area * (a_c[0] - a_hat_proj[0]).reshape(4, 4)
    k = ops.b_proj.T @ m_proj @ ops.b_proj
    a_t = a_hat_tris.reshape(-1, 4, 4) * ops.tri_areas[:, None, None]
    k += np.einsum("tak,tab,tbl->kl", ops.b_tris, a_t, ops.b_tris)
    return k
