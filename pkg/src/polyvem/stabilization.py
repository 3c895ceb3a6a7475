"""Stabilization parameters: truncated Taylor expansion of lambda, the
minimal-area enclosing ellipse, and the stabilization energy density."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .materials import Kinematics, MaterialModel, NonFiniteStateError, stab_form_eval

__all__ = [
    "Ellipse",
    "StabilizationParams",
    "taylor_lambda",
    "mvee",
    "stab_params",
    "stab_energy_density",
]


def taylor_lambda(E_y: float, nu, order: int = 5, nu0: float = 0.0):
    """Degree-n Taylor polynomial of lambda(nu) = E*nu/((1+nu)(1-2nu)) about nu0.

    Uses the partial-fraction form lambda/E = (1/3)[1/(1-2nu) - 1/(1+nu)],
    whose derivatives are available in closed form; bounded for all nu.
    """
    if not E_y > 0:
        raise ValueError("E_y must be positive")
    if order < 1:
        raise ValueError("Taylor order must be >= 1")
    if not -1.0 < nu0 < 0.5:
        raise ValueError("expansion point nu0 must lie in (-1, 0.5)")
    nu = np.asarray(nu, dtype=float)
    dn = nu - nu0
    total = np.zeros_like(dn)
    for i in range(order + 1):
        # lambda^(i)(nu0) / i!
        coef = (E_y / 3.0) * (
            2.0**i / (1.0 - 2.0 * nu0) ** (i + 1) - (-1.0) ** i / (1.0 + nu0) ** (i + 1)
        )
        total = total + coef * dn**i
    return float(total) if total.ndim == 0 else total


@dataclass(frozen=True)
class Ellipse:
    """Minimal-area enclosing ellipse {x : (x-c)^T A (x-c) <= 1}."""

    center: np.ndarray
    r_outer: float
    r_inner: float
    angle: float
    shape: np.ndarray  # the 2x2 matrix A

    @property
    def aspect_ratio(self) -> float:
        return self.r_outer / self.r_inner

    @property
    def area(self) -> float:
        return float(np.pi * self.r_outer * self.r_inner)

    def contains(self, points: np.ndarray, tol: float = 1e-8) -> bool:
        p = np.atleast_2d(points) - self.center
        q = np.einsum("ni,ij,nj->n", p, self.shape, p)
        return bool(np.all(q <= 1.0 + tol * (1.0 + tol)))


def mvee(points: np.ndarray, tol: float = 1e-8, max_iter: int = 10000) -> Ellipse:
    """Minimum-area enclosing ellipse via Khachiyan iteration with away steps.

    Requires >= 3 non-collinear points; the optimality gap is driven below
    tol, and the final ellipse is rescaled so every point is enclosed.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 2 or len(P) < 3:
        raise ValueError("mvee needs at least 3 planar points")
    n = len(P)
    # collinearity pre-check
    sv = np.linalg.svd(P - P.mean(axis=0), compute_uv=False)
    span = max(sv[0], 1e-300)
    if sv[-1] < 1e-12 * span:
        raise ValueError("mvee input points are (nearly) collinear")

    Q = np.column_stack([P, np.ones(n)])  # lifted points, d' = 3
    d = 3.0
    u = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        X = Q.T @ (u[:, None] * Q)
        try:
            M = np.einsum("ni,ni->n", Q @ np.linalg.inv(X), Q)
        except np.linalg.LinAlgError as exc:
            raise ValueError("mvee iteration hit a singular moment matrix") from exc
        j_plus = int(np.argmax(M))
        kappa_plus = M[j_plus]
        support = u > 0.0
        M_sup = np.where(support, M, np.inf)
        j_minus = int(np.argmin(M_sup))
        kappa_minus = M_sup[j_minus]
        eps_plus = kappa_plus / d - 1.0
        eps_minus = 1.0 - kappa_minus / d
        if max(eps_plus, eps_minus) < tol:
            break
        if eps_plus >= eps_minus:
            step = (kappa_plus - d) / (d * (kappa_plus - 1.0))
            u *= 1.0 - step
            u[j_plus] += step
        else:
            step = (kappa_minus - d) / (d * (kappa_minus - 1.0))  # negative
            step = max(step, -u[j_minus] / (1.0 - u[j_minus]))
            u *= 1.0 - step
            u[j_minus] += step
            u[u < 0.0] = 0.0
            u /= u.sum()

    c = P.T @ u
    sigma = P.T @ (u[:, None] * P) - np.outer(c, c)
    try:
        A = np.linalg.inv(sigma) / 2.0
    except np.linalg.LinAlgError as exc:
        raise ValueError("mvee produced a degenerate ellipse") from exc
    # guarantee enclosure: inflate to the farthest point
    rel = P - c
    m = float(np.einsum("ni,ij,nj->n", rel, A, rel).max())
    if m > 1.0:
        A = A / m
    w, V = np.linalg.eigh(A)
    if w[0] <= 0.0:
        raise ValueError("mvee produced a degenerate ellipse")
    r_outer = 1.0 / np.sqrt(w[0])
    r_inner = 1.0 / np.sqrt(w[1])
    angle = float(np.arctan2(V[1, 0], V[0, 0]))
    return Ellipse(center=c, r_outer=float(r_outer), r_inner=float(r_inner), angle=angle, shape=A)


@dataclass(frozen=True)
class StabilizationParams:
    """Per-element stabilization constants, fixed in the reference config."""

    beta: float
    alpha: float
    mu_hat: float
    lam_hat: float


def stab_params(
    element_verts: np.ndarray,
    model: MaterialModel,
    alpha_mode: str = "on",
    taylor_order: int = 5,
    nu0: float = 0.0,
    mvee_tol: float = 1e-8,
) -> StabilizationParams:
    """Stabilization parameters from element geometry and material constants.

    beta = sqrt(AR) of the minimal enclosing ellipse; alpha = |T_n(lambda)|/E
    (or 0 when switched off); mu_hat = beta (1 + alpha beta) mu and
    lam_hat = T_n(lambda).
    """
    if alpha_mode not in ("on", "off"):
        raise ValueError("alpha_mode must be 'on' or 'off'")
    ell = mvee(element_verts, tol=mvee_tol)
    beta = float(np.sqrt(ell.aspect_ratio))
    t_lam = taylor_lambda(model.E, model.nu, order=taylor_order, nu0=nu0)
    alpha = abs(t_lam) / model.E if alpha_mode == "on" else 0.0
    mu_hat = beta * (1.0 + alpha * beta) * model.mu
    return StabilizationParams(beta=beta, alpha=alpha, mu_hat=mu_hat, lam_hat=t_lam)


def stab_energy_density(params: StabilizationParams, kin: Kinematics) -> float:
    """Stabilization energy density at a material point (zero at F = I)."""
    if not kin.valid:
        raise NonFiniteStateError(f"J = {kin.J} <= 0")
    psi, _, _ = stab_form_eval(params.mu_hat, params.lam_hat, kin.F[None], order=0)
    return float(psi[0])
