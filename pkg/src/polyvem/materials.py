"""Plane-strain kinematics and isotropic hyperelastic material models.

All strain energies (neo-Hookean, Mooney-Rivlin, Ogden, and the
stabilization surrogate) are expressed as functions of the principal
stretches; stress and consistent tangent are assembled from the spectral
decomposition of C, with an analytic-limit branch at coincident stretches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NonFiniteStateError",
    "Kinematics",
    "MaterialModel",
    "lame_from_engineering",
    "kinematics_from_grad",
    "energy",
    "first_pk",
    "tangent",
    "energy_batch",
    "first_pk_batch",
    "tangent_batch",
    "material_eval",
    "stab_form_eval",
    "stretch_energy",
]

_EYE2 = np.eye(2)
_COINCIDENT_TOL = 1e-8


class NonFiniteStateError(RuntimeError):
    """Deformation state with J <= 0 or non-finite energy; triggers cutback."""


def lame_from_engineering(E_y: float, nu: float) -> tuple[float, float]:
    """Lame parameters (lambda, mu) from Young's modulus and Poisson's ratio."""
    if not E_y > 0:
        raise ValueError(f"Young's modulus must be positive, got {E_y}")
    if not -1.0 < nu < 0.5:
        raise ValueError(f"Poisson's ratio must lie in (-1, 0.5), got {nu}")
    lam = E_y * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E_y / (2.0 * (1.0 + nu))
    return lam, mu


@dataclass(frozen=True)
class MaterialModel:
    """Isotropic hyperelastic model parameterized by engineering constants."""

    kind: str
    E: float
    nu: float
    mr_ratio: float = 4.0
    ogden_alphas: tuple[float, ...] = (1.3, 5.0, -2.0)
    ogden_mu_fractions: tuple[float, ...] = (0.77, 0.1, -0.25)

    KINDS = ("neo-hookean", "mooney-rivlin", "ogden")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown material kind {self.kind!r}; expected {self.KINDS}")
        lame_from_engineering(self.E, self.nu)  # validates E, nu
        if self.kind == "ogden" and len(self.ogden_alphas) != len(self.ogden_mu_fractions):
            raise ValueError("ogden_alphas and ogden_mu_fractions must have equal length")

    @property
    def lam(self) -> float:
        return lame_from_engineering(self.E, self.nu)[0]

    @property
    def mu(self) -> float:
        return lame_from_engineering(self.E, self.nu)[1]

    @property
    def kappa(self) -> float:
        return self.E / (3.0 * (1.0 - 2.0 * self.nu))

    @property
    def c01(self) -> float:
        return self.mu / (2.0 * (1.0 + self.mr_ratio))

    @property
    def c10(self) -> float:
        return self.mr_ratio * self.c01

    @property
    def ogden_mus(self) -> np.ndarray:
        return self.mu * np.asarray(self.ogden_mu_fractions, dtype=float)


@dataclass(frozen=True)
class Kinematics:
    """Plane-strain point kinematics derived from a 2x2 displacement gradient."""

    grad_u: np.ndarray
    F: np.ndarray
    C: np.ndarray
    J: float
    I_C: float
    II_C: float
    III_C: float
    I_bar: float
    II_bar: float
    stretches: tuple[float, float, float]
    stretches_iso: tuple[float, float, float]

    @property
    def valid(self) -> bool:
        return self.J > 0.0


def kinematics_from_grad(grad_u: np.ndarray) -> Kinematics:
    """Populate all invariants from grad_u; J <= 0 is flagged, not fatal."""
    H = np.asarray(grad_u, dtype=float).reshape(2, 2)
    F = _EYE2 + H
    C = F.T @ F
    J = float(np.linalg.det(F))
    trC = float(np.trace(C))
    detC = float(np.linalg.det(C))
    # closed-form eigenvalues of symmetric 2x2 C
    dsc = np.sqrt(max((C[0, 0] - C[1, 1]) ** 2 + 4.0 * C[0, 1] ** 2, 0.0))
    cA = 0.5 * (trC + dsc)
    cB = 0.5 * (trC - dsc)
    l1 = np.sqrt(max(cA, 0.0))
    l2 = np.sqrt(max(cB, 0.0))
    I_C = trC + 1.0
    II_C = detC + trC
    III_C = detC
    if J > 0.0:
        Jm = J ** (-1.0 / 3.0)
        I_bar = J ** (-2.0 / 3.0) * I_C
        II_bar = J ** (-4.0 / 3.0) * II_C
        iso = (Jm * l1, Jm * l2, Jm)
    else:
        I_bar = II_bar = float("nan")
        iso = (float("nan"),) * 3
    return Kinematics(
        grad_u=H,
        F=F,
        C=C,
        J=J,
        I_C=I_C,
        II_C=II_C,
        III_C=III_C,
        I_bar=I_bar,
        II_bar=II_bar,
        stretches=(float(l1), float(l2), 1.0),
        stretches_iso=iso,
    )


# ---------------------------------------------------------------------------
# stretch-energy functions g(l1, l2, l3) and their first/second partials
# with respect to l1 and l2 (l3 is a fixed parameter, 1 under plane strain)
# ---------------------------------------------------------------------------


def _g_neo_hookean(par, l1, l2, l3, order):
    mu, lam = par["mu"], par["lam"]
    J = l1 * l2 * l3
    lnJ = np.log(J)
    g = 0.5 * mu * (l1**2 + l2**2 + l3**2 - 3.0 - 2.0 * lnJ) + 0.5 * lam * lnJ**2
    if order == 0:
        return g, None, None, None, None, None
    g1 = mu * (l1 - 1.0 / l1) + lam * lnJ / l1
    g2 = mu * (l2 - 1.0 / l2) + lam * lnJ / l2
    if order == 1:
        return g, g1, g2, None, None, None
    g11 = mu * (1.0 + 1.0 / l1**2) + lam * (1.0 - lnJ) / l1**2
    g22 = mu * (1.0 + 1.0 / l2**2) + lam * (1.0 - lnJ) / l2**2
    g12 = lam / (l1 * l2)
    return g, g1, g2, g11, g12, g22


def _g_mooney_rivlin(par, l1, l2, l3, order):
    c10, c01, kap = par["c10"], par["c01"], par["kappa"]
    J = l1 * l2 * l3
    lnJ = np.log(J)
    s = l1**2 + l2**2 + l3**2
    p = l1**2 * l2**2 + l2**2 * l3**2 + l3**2 * l1**2
    w2 = J ** (-2.0 / 3.0)
    w4 = J ** (-4.0 / 3.0)
    g = c10 * (w2 * s - 3.0) + c01 * (w4 * p - 3.0) + 0.5 * kap * lnJ**2
    if order == 0:
        return g, None, None, None, None, None

    def di(la, lb):
        # partials with respect to la, the other in-plane stretch being lb
        A = 2.0 * la - (2.0 / 3.0) * s / la
        B = 2.0 * la * (lb**2 + l3**2) - (4.0 / 3.0) * p / la
        return c10 * w2 * A + c01 * w4 * B + kap * lnJ / la

    g1 = di(l1, l2)
    g2 = di(l2, l1)
    if order == 1:
        return g, g1, g2, None, None, None

    def dii(la, lb):
        i1 = w2 * (-2.0 / 3.0 + (10.0 / 9.0) * s / la**2)
        i2 = w4 * (-(10.0 / 3.0) * (lb**2 + l3**2) + (28.0 / 9.0) * p / la**2)
        return c10 * i1 + c01 * i2 + kap * (1.0 - lnJ) / la**2

    g11 = dii(l1, l2)
    g22 = dii(l2, l1)
    i1_12 = w2 * (
        -(4.0 / 3.0) * l1 / l2 + (4.0 / 9.0) * s / (l1 * l2) - (4.0 / 3.0) * l2 / l1
    )
    i2_12 = w4 * (
        -(8.0 / 3.0) * l1 * (l2**2 + l3**2) / l2
        + (16.0 / 9.0) * p / (l1 * l2)
        + 4.0 * l1 * l2
        - (8.0 / 3.0) * l2 * (l1**2 + l3**2) / l1
    )
    g12 = c10 * i1_12 + c01 * i2_12 + kap / (l1 * l2)
    return g, g1, g2, g11, g12, g22


def _g_ogden(par, l1, l2, l3, order):
    alphas, mus, kap = par["alphas"], par["mus"], par["kappa"]
    J = l1 * l2 * l3
    g = 0.5 * kap * (J - 1.0) ** 2
    g1 = g2 = g11 = g12 = g22 = None
    if order >= 1:
        g1 = kap * (J - 1.0) * l2 * l3
        g2 = kap * (J - 1.0) * l1 * l3
    if order >= 2:
        g11 = kap * (l2 * l3) ** 2
        g22 = kap * (l1 * l3) ** 2
        g12 = kap * ((l1 * l3) * (l2 * l3) + (J - 1.0) * l3)
    for al, mu_i in zip(alphas, mus):
        t = J ** (-al / 3.0)
        sig = l1**al + l2**al + l3**al
        g = g + (mu_i / al) * (t * sig - 3.0)
        if order >= 1:
            g1 = g1 + mu_i * t * (l1 ** (al - 1.0) - sig / (3.0 * l1))
            g2 = g2 + mu_i * t * (l2 ** (al - 1.0) - sig / (3.0 * l2))
        if order >= 2:
            g11 = g11 + mu_i * t * (
                (al / 3.0 - 1.0) * l1 ** (al - 2.0) + (al + 3.0) * sig / (9.0 * l1**2)
            )
            g22 = g22 + mu_i * t * (
                (al / 3.0 - 1.0) * l2 ** (al - 2.0) + (al + 3.0) * sig / (9.0 * l2**2)
            )
            g12 = g12 + mu_i * t * (
                -(al / 3.0) * l1 ** (al - 1.0) / l2
                + (al / 9.0) * sig / (l1 * l2)
                - (al / 3.0) * l2 ** (al - 1.0) / l1
            )
    return g, g1, g2, g11, g12, g22


def _g_stab_form(par, l1, l2, l3, order):
    # neo-Hookean deviatoric form with a (J-1)^2 volumetric term
    mu, lam = par["mu_hat"], par["lam_hat"]
    J = l1 * l2 * l3
    lnJ = np.log(J)
    g = 0.5 * mu * (l1**2 + l2**2 + l3**2 - 3.0 - 2.0 * lnJ) + 0.5 * lam * (J - 1.0) ** 2
    if order == 0:
        return g, None, None, None, None, None
    g1 = mu * (l1 - 1.0 / l1) + lam * (J - 1.0) * l2 * l3
    g2 = mu * (l2 - 1.0 / l2) + lam * (J - 1.0) * l1 * l3
    if order == 1:
        return g, g1, g2, None, None, None
    g11 = mu * (1.0 + 1.0 / l1**2) + lam * (l2 * l3) ** 2
    g22 = mu * (1.0 + 1.0 / l2**2) + lam * (l1 * l3) ** 2
    g12 = lam * ((l1 * l3) * (l2 * l3) + (J - 1.0) * l3)
    return g, g1, g2, g11, g12, g22


_G_FUNCS = {
    "neo-hookean": _g_neo_hookean,
    "mooney-rivlin": _g_mooney_rivlin,
    "ogden": _g_ogden,
    "stab": _g_stab_form,
}


def stretch_energy(model: MaterialModel, l1, l2, l3=1.0):
    """Energy density as a function of the three principal stretches."""
    par = _model_params(model)
    return _G_FUNCS[model.kind](par, np.asarray(l1, float), np.asarray(l2, float), np.asarray(l3, float), 0)[0]


def _model_params(model: MaterialModel) -> dict:
    if model.kind == "neo-hookean":
        return {"mu": model.mu, "lam": model.lam}
    if model.kind == "mooney-rivlin":
        return {"c10": model.c10, "c01": model.c01, "kappa": model.kappa}
    return {"alphas": np.asarray(model.ogden_alphas, float), "mus": model.ogden_mus, "kappa": model.kappa}


# ---------------------------------------------------------------------------
# spectral evaluation: energy, first Piola-Kirchhoff stress, tangent
# ---------------------------------------------------------------------------


def _spectral_eval(gfun, par, F: np.ndarray, order: int):
    """Batched evaluation over F of shape (n, 2, 2); raises on J <= 0."""
    F = np.asarray(F, dtype=float)
    J = F[:, 0, 0] * F[:, 1, 1] - F[:, 0, 1] * F[:, 1, 0]
    if not np.all(np.isfinite(F)) or np.any(J <= 0.0):
        raise NonFiniteStateError("deformation state with J <= 0")
    C = np.einsum("nki,nkj->nij", F, F)
    c11, c22, c12 = C[:, 0, 0], C[:, 1, 1], C[:, 0, 1]
    tr = c11 + c22
    dsc = np.sqrt(np.maximum((c11 - c22) ** 2 + 4.0 * c12**2, 0.0))
    cA = 0.5 * (tr + dsc)
    cB = (J * J) / cA
    l1 = np.sqrt(cA)
    l2 = np.sqrt(cB)

    g, g1, g2, g11, g12, g22 = gfun(par, l1, l2, 1.0, order)
    if not np.all(np.isfinite(g)):
        raise NonFiniteStateError("non-finite strain energy")
    if order == 0:
        return g, None, None

    theta = 0.5 * np.arctan2(2.0 * c12, c11 - c22)
    v = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    MA = np.einsum("ni,nj->nij", v, v)
    MB = _EYE2[None, :, :] - MA

    bA = g1 / l1
    bB = g2 / l2
    S = bA[:, None, None] * MA + bB[:, None, None] * MB
    P = np.einsum("nik,nkj->nij", F, S)
    if order == 1:
        return g, P, None

    # dS/dC in the eigenbasis
    hAA = (g11 - bA) / l1 / (2.0 * l1)
    hAB = (g12 / l1) / (2.0 * l2)
    hBA = (g12 / l2) / (2.0 * l1)
    hBB = (g22 - bB) / l2 / (2.0 * l2)
    near = np.abs(l1 - l2) < _COINCIDENT_TOL * np.maximum(1.0, l1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (bA - bB) / (cA - cB)
    r_lim = (g11 - g12 - bA) / (2.0 * cA)
    r = np.where(near, r_lim, r)

    D = (
        hAA[:, None, None, None, None] * np.einsum("nij,nkl->nijkl", MA, MA)
        + hAB[:, None, None, None, None] * np.einsum("nij,nkl->nijkl", MA, MB)
        + hBA[:, None, None, None, None] * np.einsum("nij,nkl->nijkl", MB, MA)
        + hBB[:, None, None, None, None] * np.einsum("nij,nkl->nijkl", MB, MB)
    )
    mix = (
        np.einsum("nmp,nlj->nmjpl", MA, MB)
        + np.einsum("nml,npj->nmjpl", MA, MB)
        + np.einsum("nmp,nlj->nmjpl", MB, MA)
        + np.einsum("nml,npj->nmjpl", MB, MA)
    )
    D = D + 0.5 * r[:, None, None, None, None] * mix

    A = np.einsum("ik,njl->nijkl", _EYE2, S) + 2.0 * np.einsum(
        "nim,nkp,nmjpl->nijkl", F, F, D
    )
    return g, P, A


def material_eval(model: MaterialModel, F: np.ndarray, order: int = 2):
    """Batched (psi, P, A) for a material model; F has shape (n, 2, 2)."""
    return _spectral_eval(_G_FUNCS[model.kind], _model_params(model), F, order)


def stab_form_eval(mu_hat, lam_hat, F: np.ndarray, order: int = 2):
    """Batched (psi, P, A) of the stabilization energy with per-sample
    parameters broadcastable against the batch dimension."""
    par = {"mu_hat": np.asarray(mu_hat, float), "lam_hat": np.asarray(lam_hat, float)}
    return _spectral_eval(_g_stab_form, par, F, order)


def energy_batch(model: MaterialModel, F: np.ndarray) -> np.ndarray:
    return material_eval(model, F, order=0)[0]


def first_pk_batch(model: MaterialModel, F: np.ndarray) -> np.ndarray:
    return material_eval(model, F, order=1)[1]


def tangent_batch(model: MaterialModel, F: np.ndarray) -> np.ndarray:
    return material_eval(model, F, order=2)[2]


def _require_valid(kin: Kinematics) -> None:
    if not kin.valid:
        raise NonFiniteStateError(f"J = {kin.J} <= 0")


def energy(model: MaterialModel, kin: Kinematics) -> float:
    """Strain energy density at a material point."""
    _require_valid(kin)
    return float(energy_batch(model, kin.F[None])[0])


def first_pk(model: MaterialModel, kin: Kinematics) -> np.ndarray:
    """In-plane first Piola-Kirchhoff stress P = dPsi/dF."""
    _require_valid(kin)
    return first_pk_batch(model, kin.F[None])[0]


def tangent(model: MaterialModel, kin: Kinematics) -> np.ndarray:
    """Fourth-order material tangent A = dP/dF with major symmetry."""
    _require_valid(kin)
    return tangent_batch(model, kin.F[None])[0]
