"""Legendre modal basis, Gauss and Gauss-Lobatto rules, L2 projection."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np


def legendre_derivatives(n_max, x, n_deriv=0, dtype=np.float64):
    """Values of d^j P_m / dx^j at ``x`` for m <= n_max, j <= n_deriv.

    Returns an array of shape (n_deriv + 1, n_max + 1) + x.shape.  Uses the
    three-term recurrence for P_m and the identity
    P'_{m+1} = P'_{m-1} + (2m + 1) P_m lifted to all derivative orders.
    """
    x = np.asarray(x, dtype=dtype)
    out = np.zeros((n_deriv + 1, n_max + 1) + x.shape, dtype=dtype)
    out[0, 0] = 1
    if n_max >= 1:
        out[0, 1] = x
    for m in range(1, n_max):
        out[0, m + 1] = ((2 * m + 1) * x * out[0, m] - m * out[0, m - 1]) / (m + 1)
    for j in range(1, n_deriv + 1):
        if n_max >= 1:
            out[j, 1] = 1 if j == 1 else 0
        for m in range(1, n_max):
            out[j, m + 1] = out[j, m - 1] + (2 * m + 1) * out[j - 1, m]
    return out


def _newton(f, x0, dtype, max_iter=100):
    x = np.array(x0, dtype=dtype)
    tol = 4 * np.finfo(dtype).eps
    for _ in range(max_iter):
        val, der = f(x)
        dx = val / der
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    return x


@dataclass(frozen=True)
class QuadRule:
    """Quadrature rule on the reference interval [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray
    exactness: int

    @property
    def n(self):
        return len(self.nodes)

    @property
    def unit_weights(self):
        """Weights normalised to sum to one over the cell."""
        return self.weights / 2

    def mapped(self, a, b):
        """Nodes and weights on the physical interval [a, b]."""
        half = (b - a) / 2
        return a + half * (self.nodes + 1), half * self.weights

    def integrate(self, f, a=-1.0, b=1.0):
        x, w = self.mapped(a, b)
        return np.sum(w * f(x))


def gauss_rule(n, dtype=np.float64):
    """n-point Gauss-Legendre rule, exact for degree 2n - 1."""
    if n < 1:
        raise ValueError(f"Gauss rule needs n >= 1, got {n}")
    i = np.arange(n)
    guess = -np.cos(np.pi * (i + 0.75) / (n + 0.5))

    def f(x):
        p = legendre_derivatives(n, x, 1, dtype)
        return p[0, n], p[1, n]

    x = _newton(f, guess, dtype)
    dp = legendre_derivatives(n, x, 1, dtype)[1, n]
    w = 2 / ((1 - x * x) * dp * dp)
    if n % 2 == 1:
        x[n // 2] = 0
    x = (x - x[::-1]) / 2
    w = (w + w[::-1]) / 2
    return QuadRule(x, w, 2 * n - 1)


def gauss_lobatto_rule(n, dtype=np.float64):
    """n-point Gauss-Lobatto rule including both endpoints, exact for degree 2n - 3."""
    if n < 2:
        raise ValueError(f"Gauss-Lobatto rule needs n >= 2, got {n}")
    deg = n - 1
    x = np.empty(n, dtype=dtype)
    x[0], x[-1] = -1, 1
    if n > 2:
        guess = -np.cos(np.pi * np.arange(1, deg) / deg)

        def f(t):
            p = legendre_derivatives(deg, t, 2, dtype)
            return p[1, deg], p[2, deg]

        x[1:-1] = _newton(f, guess, dtype)
    if n % 2 == 1:
        x[n // 2] = 0
    x = (x - x[::-1]) / 2
    p = legendre_derivatives(deg, x, 0, dtype)[0, deg]
    w = 2 / (deg * (deg + 1) * p * p)
    w = (w + w[::-1]) / 2
    return QuadRule(x, w, 2 * n - 3)


class ModalBasis:
    """Orthonormal Legendre basis Phi_m = sqrt((2m+1)/2) P_m on [-1, 1]."""

    def __init__(self, k, dtype=np.float64):
        if k < 0:
            raise ValueError("degree must be non-negative")
        self.k = k
        self.dtype = dtype
        self.scale = np.sqrt(np.arange(k + 1, dtype=dtype) * 2 + 1) / np.sqrt(dtype(2))

    @property
    def n_modes(self):
        return self.k + 1

    def eval(self, x, deriv=0):
        """Table of shape (k+1,) + x.shape holding d^deriv Phi_m / dxi^deriv."""
        p = legendre_derivatives(self.k, x, deriv, self.dtype)[deriv]
        return p * self.scale.reshape((-1,) + (1,) * np.ndim(x))

    def eval_all(self, x, n_deriv):
        """All derivative tables up to ``n_deriv``: shape (n_deriv+1, k+1) + x.shape."""
        p = legendre_derivatives(self.k, x, n_deriv, self.dtype)
        return p * self.scale.reshape((1, -1) + (1,) * np.ndim(x))

    def to_monomial(self):
        """Matrix M with monomial coefficients a = M @ c (a_i multiplies xi**i)."""
        k = self.k
        mono = np.zeros((k + 1, k + 1), dtype=self.dtype)
        # Taylor coefficients at 0 of each basis function
        d = self.eval_all(np.zeros(1, dtype=self.dtype), k)[:, :, 0]
        for i in range(k + 1):
            mono[i] = d[i] / factorial(i)
        return mono


def project_l2(f, cell=(-1.0, 1.0), k=1, n_points=None, dtype=np.float64):
    """Coefficients c_m = int_{-1}^{1} f(r(xi)) Phi_m(xi) dxi on ``cell``.

    The default rule has 2k + 16 points: exact for polynomial f of degree k and
    accurate to round-off for smooth non-polynomial f.
    """
    n = n_points if n_points is not None else 2 * k + 16
    rule = gauss_rule(n, dtype)
    basis = ModalBasis(k, dtype)
    a, b = cell
    r = a + (np.asarray(b, dtype=dtype) - a) * (rule.nodes + 1) / 2
    vals = np.asarray(f(r), dtype=dtype)
    return basis.eval(rule.nodes) @ (rule.weights * vals)


def lagrange_matrix(nodes, points):
    """Interpolation matrix L with L[q, l] = ell_l(points[q]) (barycentric form)."""
    nodes = np.asarray(nodes)
    points = np.asarray(points)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1)
    bary = 1 / np.prod(diff, axis=1)
    d = points[:, None] - nodes[None, :]
    exact = d == 0
    d = np.where(exact, 1, d)
    terms = bary[None, :] / d
    mat = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    mat[hit] = exact[hit].astype(mat.dtype)
    return mat
