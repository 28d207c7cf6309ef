"""Barotropic perfect fluid: EOS, admissible set, variable conversion, wave speeds."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class AdmissibilityError(ValueError):
    """A conserved state left the admissible set T00 - |T01| > 0."""


class LinearEos:
    """p = sigma^2 rho with constant sigma in (0, 1)."""

    linear = True

    def __init__(self, sigma=None, *, sigma2=None):
        if (sigma is None) == (sigma2 is None):
            raise ValueError("give exactly one of sigma, sigma2")
        if sigma2 is None:
            sigma2 = sigma * sigma
        if not 0 < sigma2 < 1:
            raise ValueError(f"sound speed must lie in (0, 1), got sigma^2={sigma2}")
        self.sigma2 = sigma2
        self.sigma = np.sqrt(sigma2) if sigma is None else sigma

    def pressure(self, rho):
        return self.sigma2 * rho

    def dpressure(self, rho):
        return self.sigma2 + 0 * rho

    def sound_speed(self, rho):
        return self.sigma + 0 * rho

    def __repr__(self):
        return f"LinearEos(sigma2={self.sigma2!r})"


class BarotropicEos:
    """General p = P(rho) given the law and its derivative as callables."""

    linear = False

    def __init__(self, pressure, dpressure):
        self._p = pressure
        self._dp = dpressure

    def pressure(self, rho):
        return self._p(rho)

    def dpressure(self, rho):
        return self._dp(rho)

    def sound_speed(self, rho):
        return np.sqrt(self._dp(rho))


class PrimitiveState(NamedTuple):
    rho: np.ndarray
    p: np.ndarray
    v: np.ndarray

    @property
    def lorentz(self):
        return 1 / np.sqrt(1 - self.v**2)


def prim_to_cons(rho, v, eos):
    """Return (T00, T01, T11) for primitive (rho, v)."""
    rho = np.asarray(rho)
    v = np.asarray(v)
    if np.any(rho <= 0) or np.any(np.abs(v) >= 1):
        raise ValueError("primitive state outside G_p (need rho > 0 and |v| < 1)")
    p = eos.pressure(rho)
    w2 = 1 / (1 - v * v)
    h = (rho + p) * w2
    return h - p, h * v, h * v * v + p


def velocity_from_ratio(u, q):
    """Velocity v(u) for u = T01/T00 and q = p/rho."""
    a = 1 + q
    return 2 * u / (a + np.sqrt(a * a - 4 * q * u * u))


def _check_admissible(T00, T01):
    bad = ~(T00 - np.abs(T01) > 0)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise AdmissibilityError(
            f"inadmissible conserved state at index {tuple(int(i) for i in idx)}: "
            f"T00={T00[tuple(idx)]!r}, T01={T01[tuple(idx)]!r}"
        )


def cons_to_prim(T00, T01, eos, check=True):
    """Recover (rho, p, v) from (T00, T01)."""
    T00 = np.asarray(T00)
    T01 = np.asarray(T01)
    if check:
        _check_admissible(np.atleast_1d(T00), np.atleast_1d(T01))
    u = T01 / T00
    if eos.linear:
        s2 = eos.sigma2
        v = velocity_from_ratio(u, s2)
        rho = T00 / ((1 + s2) / (1 - v * v) - s2)
        return PrimitiveState(rho, s2 * rho, v)
    rho = _solve_density(T00, u, eos)
    p = eos.pressure(rho)
    return PrimitiveState(rho, p, velocity_from_ratio(u, p / rho))


def _solve_density(T00, u, eos, iters=200):
    # T00 >= rho for any admissible state, so the root lies in (0, T00].
    def residual(rho):
        p = eos.pressure(rho)
        v = velocity_from_ratio(u, p / rho)
        return T00 - ((rho + p) / (1 - v * v) - p)

    lo = np.zeros_like(T00) + np.finfo(T00.dtype).tiny
    hi = np.array(T00, copy=True)
    for _ in range(iters):
        mid = (lo + hi) / 2
        pos = residual(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 1e-15 * hi):
            break
    return (lo + hi) / 2


def stress(T00, T01, eos, check=True):
    """Primitive state plus T11 = T01 v + p."""
    prim = cons_to_prim(T00, T01, eos, check)
    return prim, T01 * prim.v + prim.p


def physical_flux(T00, T01, eos):
    """Flux F = (T01, T11)."""
    _, T11 = stress(T00, T01, eos)
    return np.asarray(T01), T11


def speeds_from_prim(v, cs, sqrt_ab=1.0):
    """Eigenvalues sqrt(AB) (v -+ c)/(1 -+ c v)."""
    lam1 = sqrt_ab * (v - cs) / (1 - cs * v)
    lam2 = sqrt_ab * (v + cs) / (1 + cs * v)
    return lam1, lam2


def char_speeds(T00, T01, eos, A=1.0, B=1.0):
    """Characteristic speeds (lam1, lam2) of sqrt(AB) F."""
    A = np.asarray(A)
    B = np.asarray(B)
    if np.any(A <= 0) or np.any(A > 1) or np.any(B <= 0):
        raise ValueError("metric outside A in (0, 1], B > 0")
    prim = cons_to_prim(T00, T01, eos)
    return speeds_from_prim(prim.v, eos.sound_speed(prim.rho), np.sqrt(A * B))


def gql_bounds(T00, T01, eos):
    """Flat-space eigenvalues (s1, s2) of dF/dU."""
    prim = cons_to_prim(T00, T01, eos)
    return speeds_from_prim(prim.v, eos.sound_speed(prim.rho))


def admissibility(T00, T01):
    return np.asarray(T00) - np.abs(T01)
