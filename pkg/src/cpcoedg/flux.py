"""HLL numerical flux for sqrt(AB) F and the geometric/gravitational source term."""

from __future__ import annotations

import numpy as np

from .fluid import speeds_from_prim, stress


def signal_speeds(v_l, cs_l, sab_l, v_r, cs_r, sab_r):
    """alpha_L = min(lam1_L, lam1_R, 0), alpha_R = max(lam2_L, lam2_R, 0)."""
    l1l, l2l = speeds_from_prim(v_l, cs_l, sab_l)
    l1r, l2r = speeds_from_prim(v_r, cs_r, sab_r)
    alpha_l = np.minimum(np.minimum(l1l, l1r), 0)
    alpha_r = np.maximum(np.maximum(l2l, l2r), 0)
    return alpha_l, alpha_r


def hll_combine(U_l, U_r, G_l, G_r, alpha_l, alpha_r):
    """HLL flux from traces U and physical fluxes G = sqrt(AB) F.

    Component axis first.  Where both speeds vanish the left flux is returned.
    """
    den = alpha_r - alpha_l
    safe = np.where(den == 0, 1, den)
    flux = (alpha_r * G_l - alpha_l * G_r + alpha_l * alpha_r * (U_r - U_l)) / safe
    return np.where(den == 0, G_l, flux)


def hll_flux(U_l, U_r, A_l, A_r, B, eos):
    """HLL flux between conserved traces U_l, U_r (each shaped (2, ...)).

    Each side carries its own A; B is single valued at the interface.
    Returns (flux, alpha_l, alpha_r).
    """
    U_l = np.asarray(U_l)
    U_r = np.asarray(U_r)
    prim_l, T11_l = stress(U_l[0], U_l[1], eos)
    prim_r, T11_r = stress(U_r[0], U_r[1], eos)
    sab_l = np.sqrt(A_l * B)
    sab_r = np.sqrt(A_r * B)
    G_l = sab_l * np.stack([U_l[1], T11_l])
    G_r = sab_r * np.stack([U_r[1], T11_r])
    alpha_l, alpha_r = signal_speeds(
        prim_l.v, eos.sound_speed(prim_l.rho), sab_l,
        prim_r.v, eos.sound_speed(prim_r.rho), sab_r,
    )
    return hll_combine(U_l, U_r, G_l, G_r, alpha_l, alpha_r), alpha_l, alpha_r


def source_term(T00, T01, T11, p, A, B, r, kappa):
    """S = -sqrt(AB) (2 T01 / r, 2 T11 / r + (1-A)(T00-T11)/(2Ar) + kappa r (T00 T11 - T01^2)/A - 2p/r)."""
    if np.any(np.asarray(r) <= 0):
        raise ValueError("source term needs r > 0")
    sab = np.sqrt(A * B)
    s0 = 2 * T01 / r
    s1 = (
        2 * T11 / r
        + (1 - A) * (T00 - T11) / (2 * A * r)
        + kappa * r * (T00 * T11 - T01 * T01) / A
        - 2 * p / r
    )
    return -sab * s0, -sab * s1
