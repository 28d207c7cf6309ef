"""Metric potentials: the (Y, Z) parametrisation, Y updates and Z reconstruction.

A = 1 - 2M/r lies in (0, 1) for every real Y and B = exp(Z) is positive for
every real Z, so the bounds hold by construction and no limiter is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fluid import stress


def a_from_y(Y):
    return 1 / (1 + np.exp(8 * (Y - 0.5)))


def one_minus_a(Y):
    """1 - A(Y) computed without cancellation."""
    return 1 / (1 + np.exp(-8 * (Y - 0.5)))


def y_from_a(A):
    A = np.asarray(A)
    if np.any(A <= 0) or np.any(A >= 1):
        raise ValueError("A must lie in (0, 1)")
    return np.log(1 / A - 1) / 8 + 0.5


def mass_from_y(Y, r):
    return r * one_minus_a(Y) / 2


def y_from_mass(M, r):
    M = np.asarray(M)
    if np.any(M <= 0) or np.any(M >= np.asarray(r) / 2):
        raise ValueError("mass must lie in (0, r/2)")
    return -np.log(r / (2 * M) - 1) / 8 + 0.5


def b_from_z(Z):
    return np.exp(Z)


def z_from_b(B):
    B = np.asarray(B)
    if np.any(B <= 0):
        raise ValueError("B must be positive")
    return np.log(B)


def y_rhs(T01, A, B, r, kappa, omA=None):
    """Pointwise dY/dt = -(kappa r / 8) sqrt(B/A) T01 / (1 - A)."""
    if omA is None:
        omA = 1 - A
    if np.any(np.abs(omA) < 1e-300):
        raise FloatingPointError("1 - A underflow in the Y update (vacuum limit)")
    return -(kappa * r / 8) * np.sqrt(B / A) * T01 / omA


def hll_interface_state(T01_l, T01_r, gT11_l, gT11_r, A_l, A_r, alpha_l, alpha_r):
    """HLL interface momentum and A.

    ``gT11`` is sqrt(AB) T11 on each side.  Requires alpha_l <= 0 <= alpha_r.
    """
    den = alpha_r - alpha_l
    if np.any(den == 0):
        raise ZeroDivisionError("HLL interface state needs alpha_r > alpha_l")
    T01 = (alpha_r * T01_r - alpha_l * T01_l + gT11_l - gT11_r) / den
    A = (alpha_r * A_r - alpha_l * A_l) / den
    return T01, A


@dataclass
class MetricField:
    """Y and Z at the Gauss-Lobatto nodes of every cell, shape (N, n_gl)."""

    Y: np.ndarray
    Z: np.ndarray

    @property
    def A(self):
        return a_from_y(self.Y)

    @property
    def B(self):
        return b_from_z(self.Z)

    def mass(self, r_gl):
        return mass_from_y(self.Y, r_gl)

    def copy(self):
        return MetricField(self.Y.copy(), self.Z.copy())

    def interface_jump(self):
        """Max |Y^- - Y^+| and |Z^- - Z^+| over interior interfaces."""
        if self.Y.shape[0] < 2:
            return 0.0, 0.0
        dy = np.abs(self.Y[:-1, -1] - self.Y[1:, 0]).max()
        dz = np.abs(self.Z[:-1, -1] - self.Z[1:, 0]).max()
        return dy, dz


def z_integrand(A, T11, r, kappa):
    return (1 - A) / (A * r) + kappa * r * T11 / A


def reconstruct_z(disc, Y, U, anchor, eos, kappa):
    """Z at GL nodes from the line integral of dZ/dr, anchored at the left boundary.

    Every shared interface node receives a single value, so Z is continuous.
    """
    T00 = U[0] @ disc.phi_z.reshape(disc.k + 1, -1)
    T01 = U[1] @ disc.phi_z.reshape(disc.k + 1, -1)
    _, T11 = stress(T00, T01, eos)
    shape = (disc.n,) + disc.xi_z.shape
    T11 = T11.reshape(shape)
    Yz = np.einsum("jl,snl->jsn", Y, disc.gl_to_z)
    A = a_from_y(Yz)
    inc = np.sum(z_integrand(A, T11, disc.r_z, kappa) * disc.w_z, axis=-1)
    cum = np.cumsum(inc.ravel()).reshape(inc.shape)
    Z = np.empty_like(Y)
    Z[:, 1:] = anchor + cum
    Z[0, 0] = anchor
    Z[1:, 0] = Z[:-1, -1]
    return Z
