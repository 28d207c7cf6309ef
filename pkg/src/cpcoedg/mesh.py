"""Uniform radial mesh and the precomputed quadrature/basis tables of one DG space."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .quadrature import ModalBasis, gauss_lobatto_rule, gauss_rule, lagrange_matrix


@dataclass(frozen=True)
class Mesh:
    r_left: float
    r_right: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("mesh needs at least one cell")
        if not self.r_right > self.r_left:
            raise ValueError("empty domain")

    @property
    def h(self):
        return (self.r_right - self.r_left) / self.n_cells


class Discretization:
    """Degree-k modal DG space on a mesh, with every table the operators need.

    Fluid unknowns are modal coefficients of shape (2, N, k+1).  Metric
    unknowns Y, Z are nodal values at max(k+1, 2) Gauss-Lobatto points per
    cell, shape (N, n_gl).
    """

    def __init__(self, mesh, k, dtype=np.float64):
        if k < 0:
            raise ValueError("degree must be non-negative")
        self.mesh = mesh
        self.k = k
        self.dtype = dtype
        dt = dtype
        self.n = mesh.n_cells
        self.r_left = dt(mesh.r_left)
        self.r_right = dt(mesh.r_right)
        self.h = (self.r_right - self.r_left) / self.n
        self.faces = self.r_left + self.h * np.arange(self.n + 1, dtype=dt)
        self.faces[-1] = self.r_right

        self.basis = ModalBasis(k, dt)
        self.gauss = gauss_rule(k + 1, dt)
        self.gl = gauss_lobatto_rule(max(k + 1, 2), dt)
        self.n_gl = self.gl.n

        one = np.ones(1, dtype=dt)
        self.phi_left = self.basis.eval(-one)[:, 0]
        self.phi_right = self.basis.eval(one)[:, 0]
        self.phi_q = self.basis.eval(self.gauss.nodes)
        self.dphi_q = self.basis.eval(self.gauss.nodes, 1)
        self.phi_gl = self.basis.eval(self.gl.nodes)
        self.gl_to_q = lagrange_matrix(self.gl.nodes, self.gauss.nodes)
        self.r_q = self.map(self.gauss.nodes)
        self.r_gl = self.map(self.gl.nodes)
        self.r_gl[:, 0] = self.faces[:-1]
        self.r_gl[:, -1] = self.faces[1:]

        # Z line integral: N_Z Gauss points on every GL sub-interval
        self.n_z = (k + 2) // 2
        zr = gauss_rule(self.n_z, dt)
        lo, hi = self.gl.nodes[:-1], self.gl.nodes[1:]
        half = (hi - lo) / 2
        self.xi_z = lo[:, None] + half[:, None] * (zr.nodes[None, :] + 1)
        self.w_z = half[:, None] * zr.weights[None, :] * (self.h / 2)
        flat = self.xi_z.ravel()
        self.gl_to_z = lagrange_matrix(self.gl.nodes, flat).reshape(self.xi_z.shape + (self.n_gl,))
        self.phi_z = self.basis.eval(flat).reshape((k + 1,) + self.xi_z.shape)
        self.r_z = self.map(flat).reshape((self.n,) + self.xi_z.shape)

    def map(self, xi):
        """Physical radii of reference points xi in every cell, shape (N, len(xi))."""
        xi = np.asarray(xi, dtype=self.dtype)
        return self.faces[:-1, None] + (self.h / 2) * (xi[None, :] + 1)

    @cached_property
    def monomial(self):
        return self.basis.to_monomial()

    def sampler(self, n_points):
        """Tables to evaluate modal and GL-nodal data at an n-point Gauss rule."""
        rule = gauss_rule(n_points, self.dtype)
        return Sampler(
            rule=rule,
            phi=self.basis.eval(rule.nodes),
            from_gl=lagrange_matrix(self.gl.nodes, rule.nodes),
            r=self.map(rule.nodes),
            weights=rule.weights * (self.h / 2),
        )

    # evaluation helpers ------------------------------------------------
    @staticmethod
    def modal_at(U, table):
        """Evaluate coefficients (..., N, k+1) with a basis table (k+1, P)."""
        return U @ table

    @staticmethod
    def nodal_at(V, matrix):
        """Interpolate GL nodal data (N, n_gl) with a matrix (P, n_gl)."""
        return V @ matrix.T

    def averages(self, U):
        return U[..., 0] * self.phi_left[0]

    def traces(self, U):
        """Left and right traces U(r_{j-1/2}^+), U(r_{j+1/2}^-)."""
        return U @ self.phi_left, U @ self.phi_right


@dataclass(frozen=True)
class Sampler:
    rule: object
    phi: np.ndarray
    from_gl: np.ndarray
    r: np.ndarray
    weights: np.ndarray
