"""Dirac matrices and the matrix representation of the Minkowski algebra.

Everything here is tied to n = 4 with the metric diag(-1, -1, -1, 1),
where the Grassmann and Clifford bases coincide and the gamma chain of a
blade's indices represents the blade faithfully.
"""

from __future__ import annotations

import numpy as np

from . import blades
from .expr import CExpr
from .metric import ArgumentError, Metric, new_metric
from .multivector import Multivector

MINKOWSKI_DIAG = (-1.0, -1.0, -1.0, 1.0)


def minkowski_metric() -> Metric:
    return new_metric(np.diag(MINKOWSKI_DIAG), convention="upper")


class GammaRep:
    """The four Dirac-representation gamma matrices."""

    __slots__ = ("gammas", "_blade_mats", "_basis_inv")

    def __init__(self, gammas):
        self.gammas = [np.asarray(g, dtype=complex) for g in gammas]
        self._blade_mats = None
        self._basis_inv = None

    def blade_matrix(self, mask: int) -> np.ndarray:
        if self._blade_mats is None:
            self._blade_mats = {}
        mat = self._blade_mats.get(mask)
        if mat is None:
            mat = np.eye(4, dtype=complex)
            for i in blades.blade_indices(mask):
                mat = mat @ self.gammas[i - 1]
            self._blade_mats[mask] = mat
        return mat

    def basis_inverse(self) -> np.ndarray:
        """Inverse of the 16x16 matrix whose columns are vectorized blade
        matrices; lets a matrix be decomposed back into a multivector."""
        if self._basis_inv is None:
            basis = np.column_stack([self.blade_matrix(mask).reshape(16)
                                     for mask in range(16)])
            self._basis_inv = np.linalg.inv(basis)
        return self._basis_inv


def gamma_matrices() -> GammaRep:
    g1 = [[0, 0, 0, -1],
          [0, 0, -1, 0],
          [0, 1, 0, 0],
          [1, 0, 0, 0]]
    g2 = [[0, 0, 0, 1j],
          [0, 0, -1j, 0],
          [0, -1j, 0, 0],
          [1j, 0, 0, 0]]
    g3 = [[0, 0, -1, 0],
          [0, 0, 0, 1],
          [1, 0, 0, 0],
          [0, -1, 0, 0]]
    g4 = [[1, 0, 0, 0],
          [0, 1, 0, 0],
          [0, 0, -1, 0],
          [0, 0, 0, -1]]
    return GammaRep([g1, g2, g3, g4])


def rep_map(u: Multivector, rep: GammaRep) -> np.ndarray:
    """Matrix of a Minkowski multivector: sum of coefficient times the
    gamma chain of each blade (the two bases coincide here)."""
    if u.dim != 4:
        raise ArgumentError("gamma representation needs dimension 4")
    out = np.zeros((4, 4), dtype=complex)
    for mask in np.nonzero(u.coeffs)[0]:
        out += u.coeffs[mask] * rep.blade_matrix(int(mask))
    return out


def multivector_from_matrix(mat: np.ndarray, rep: GammaRep) -> Multivector:
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (4, 4):
        raise ArgumentError("expected a 4x4 matrix")
    coeffs = rep.basis_inverse() @ mat.reshape(16)
    return Multivector(4, coeffs)


def column_embed(theta, rep: GammaRep) -> Multivector:
    """Multivector whose matrix carries the spinor column theta in the
    first column and zeros elsewhere."""
    theta = np.asarray(theta, dtype=complex)
    if theta.shape != (4,):
        raise ArgumentError("expected a 4-component column")
    mat = np.zeros((4, 4), dtype=complex)
    mat[:, 0] = theta
    return multivector_from_matrix(mat, rep)


def dirac_residual(theta_exprs, a_exprs, m: float, p, rep: GammaRep = None):
    """Residual column of (i gamma^k (d_k - a_k) - m) theta at a point.

    theta_exprs: four CExpr components; a_exprs: four CExpr potentials.
    """
    if rep is None:
        rep = gamma_matrices()
    memo = {}
    theta = np.array([CExpr.of(t).evaluate(p, memo) for t in theta_exprs])
    out = -m * theta
    for k in range(4):
        dtheta = np.array([CExpr.of(t).diff(k + 1).evaluate(p, memo)
                           for t in theta_exprs])
        ak = CExpr.of(a_exprs[k]).evaluate(p, memo)
        out = out + 1j * rep.gammas[k] @ (dtheta - ak * theta)
    return out


def plane_wave_spinor(k_vec, m: float, rep: GammaRep = None) -> np.ndarray:
    """Solve (gamma^k k_k - m) u = 0 for a momentum on the mass shell.

    k_vec holds the covariant components k_1..k_4; the shell condition
    g^{kl} k_k k_l = m^2 is required.
    """
    if rep is None:
        rep = gamma_matrices()
    k_vec = np.asarray(k_vec, dtype=float)
    shell = sum(d * kk * kk for d, kk in zip(MINKOWSKI_DIAG, k_vec))
    if abs(shell - m * m) > 1e-9 * max(1.0, m * m):
        raise ArgumentError(f"momentum off the mass shell: "
                            f"g^kl k_k k_l = {shell:.6g}, m^2 = {m * m:.6g}")
    slash = sum(kk * g for kk, g in zip(k_vec, rep.gammas))
    mat = slash - m * np.eye(4)
    _, s, vt = np.linalg.svd(mat)
    if s[-1] > 1e-9 * s[0]:
        raise ArgumentError("no nontrivial spinor for this momentum")
    return vt[-1].conj()


def plane_wave_field(k_vec, m: float, rep: GammaRep = None):
    """Spinor column and phase for theta(x) = u exp(-i k_j x^j)."""
    u = plane_wave_spinor(k_vec, m, rep)
    return u, np.asarray(k_vec, dtype=float)
