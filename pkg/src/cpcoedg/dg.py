"""Semi-discrete DG operators: the conventional L^DG and the cell-local L^loc."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fluid import AdmissibilityError, prim_to_cons, stress
from .flux import hll_combine, signal_speeds, source_term
from .metric import a_from_y, b_from_z, one_minus_a, y_rhs


@dataclass(frozen=True)
class Model:
    """Physics constants shared by every operator: the EOS and kappa = 8 pi G."""

    eos: object
    kappa: float


def _require_admissible(U, where):
    a = U[0] - np.abs(U[1])
    bad = ~(a > 0)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise AdmissibilityError(
            f"inadmissible state at cell {idx[0]}"
            + (f", {where} {idx[1]}" if len(idx) > 1 else f" ({where})")
            + f": T00 - |T01| = {a[idx]!r}"
        )


class StageFields:
    """Point values of one stage state (U, Y, Z) shared by all operators."""

    def __init__(self, disc, model, U, Y, Z, source=True):
        self.disc = disc
        self.model = model
        self.U = U
        self.Y = Y
        self.Z = Z
        self.source = source
        eos = model.eos

        Uq = U @ disc.phi_q
        _require_admissible(Uq, "quadrature point")
        self.Uq = Uq
        self.prim_q, self.T11_q = stress(Uq[0], Uq[1], eos, check=False)
        Yq = Y @ disc.gl_to_q.T
        self.A_q = a_from_y(Yq)
        self.B_q = b_from_z(Z @ disc.gl_to_q.T)

        UL, UR = disc.traces(U)
        _require_admissible(UL, "left trace")
        _require_admissible(UR, "right trace")
        self.UL, self.UR = UL, UR
        self.prim_L, self.T11_L = stress(UL[0], UL[1], eos, check=False)
        self.prim_R, self.T11_R = stress(UR[0], UR[1], eos, check=False)

        self.A_gl = a_from_y(Y)
        self.omA_gl = one_minus_a(Y)
        self.B_gl = b_from_z(Z)
        B_face = np.empty(disc.n + 1, dtype=Z.dtype)
        B_face[:-1] = self.B_gl[:, 0]
        B_face[-1] = self.B_gl[-1, -1]
        self.B_face = B_face

    # ------------------------------------------------------------------
    def _volume_and_source(self):
        d = self.disc
        sab = np.sqrt(self.A_q * self.B_q)
        G = sab * np.stack([self.Uq[1], self.T11_q])
        vol = (G * d.gauss.weights) @ d.dphi_q.T
        if not self.source:
            return vol, 0
        S = np.stack(
            source_term(
                self.Uq[0], self.Uq[1], self.T11_q, self.prim_q.p,
                self.A_q, self.B_q, d.r_q, self.model.kappa,
            )
        )
        return vol, (S * d.gauss.weights) @ d.phi_q.T

    def _assemble(self, vol, src, F_left, F_right):
        d = self.disc
        surf = F_right[..., None] * d.phi_right - F_left[..., None] * d.phi_left
        return (2 / d.h) * (vol - surf) + src

    def local_rhs(self):
        """L^loc: cell-interior traces with the cell's own endpoint metric values."""
        vol, src = self._volume_and_source()
        sab_l = np.sqrt(self.A_gl[:, 0] * self.B_face[:-1])
        sab_r = np.sqrt(self.A_gl[:, -1] * self.B_face[1:])
        F_left = sab_l * np.stack([self.UL[1], self.T11_L])
        F_right = sab_r * np.stack([self.UR[1], self.T11_R])
        return self._assemble(vol, src, F_left, F_right)

    def _ghost(self, ghost, side):
        """Ghost conserved state, its primitive state and T11 for one domain end."""
        eos = self.model.eos
        if ghost is None:  # outflow: copy the interior trace
            if side == "left":
                return self.UL[:, 0], self.prim_L.v[0], self.prim_L.rho[0], self.T11_L[0]
            return self.UR[:, -1], self.prim_R.v[-1], self.prim_R.rho[-1], self.T11_R[-1]
        g = np.asarray(ghost, dtype=self.U.dtype)
        _require_admissible(g[:, None], f"{side} ghost")
        prim, T11 = stress(g[0], g[1], eos, check=False)
        return g, prim.v, prim.rho, T11

    def interface_states(self, ghost_left=None, ghost_right=None):
        """Left/right data at all N+1 interfaces, ghost A equal to the interior A."""
        eos = self.model.eos
        gl, gv_l, grho_l, gT11_l = self._ghost(ghost_left, "left")
        gr, gv_r, grho_r, gT11_r = self._ghost(ghost_right, "right")
        U_l = np.concatenate([gl[:, None], self.UR], axis=1)
        U_r = np.concatenate([self.UL, gr[:, None]], axis=1)
        v_l = np.concatenate([[gv_l], self.prim_R.v])
        v_r = np.concatenate([self.prim_L.v, [gv_r]])
        rho_l = np.concatenate([[grho_l], self.prim_R.rho])
        rho_r = np.concatenate([self.prim_L.rho, [grho_r]])
        T11_l = np.concatenate([[gT11_l], self.T11_R])
        T11_r = np.concatenate([self.T11_L, [gT11_r]])
        A_l = np.concatenate([self.A_gl[:1, 0], self.A_gl[:, -1]])
        A_r = np.concatenate([self.A_gl[:, 0], self.A_gl[-1:, -1]])
        omA_l = np.concatenate([self.omA_gl[:1, 0], self.omA_gl[:, -1]])
        omA_r = np.concatenate([self.omA_gl[:, 0], self.omA_gl[-1:, -1]])
        sab_l = np.sqrt(A_l * self.B_face)
        sab_r = np.sqrt(A_r * self.B_face)
        alpha_l, alpha_r = signal_speeds(
            v_l, eos.sound_speed(rho_l), sab_l, v_r, eos.sound_speed(rho_r), sab_r
        )
        return dict(
            U_l=U_l, U_r=U_r, T11_l=T11_l, T11_r=T11_r, A_l=A_l, A_r=A_r,
            omA_l=omA_l, omA_r=omA_r, sab_l=sab_l, sab_r=sab_r,
            alpha_l=alpha_l, alpha_r=alpha_r,
        )

    def dg_rhs(self, ghost_left=None, ghost_right=None, with_y=True):
        """L^DG with HLL fluxes.  Also returns dY/dt at the N+1 interfaces from
        the HLL interface states (None when ``with_y`` is false)."""
        f = self.interface_states(ghost_left, ghost_right)
        G_l = f["sab_l"] * np.stack([f["U_l"][1], f["T11_l"]])
        G_r = f["sab_r"] * np.stack([f["U_r"][1], f["T11_r"]])
        flux = hll_combine(f["U_l"], f["U_r"], G_l, G_r, f["alpha_l"], f["alpha_r"])
        vol, src = self._volume_and_source()
        rhs = self._assemble(vol, src, flux[:, :-1], flux[:, 1:])
        if not with_y:
            return rhs, None, f
        return rhs, self._y_face_rhs(f), f

    def _y_face_rhs(self, f):
        kappa = self.model.kappa
        if kappa == 0:
            return np.zeros_like(self.B_face)
        al, ar = f["alpha_l"], f["alpha_r"]
        den = ar - al
        same = den == 0
        den = np.where(same, 1, den)
        T01 = (ar * f["U_r"][1] - al * f["U_l"][1] + f["sab_l"] * f["T11_l"] - f["sab_r"] * f["T11_r"]) / den
        A = (ar * f["A_r"] - al * f["A_l"]) / den
        omA = (ar * f["omA_r"] - al * f["omA_l"]) / den
        T01 = np.where(same, f["U_l"][1], T01)
        A = np.where(same, f["A_l"], A)
        omA = np.where(same, f["omA_l"], omA)
        return y_rhs(T01, A, self.B_face, self.disc.faces, kappa, omA)

    def y_nodal_rhs(self):
        """Pointwise dY/dt at every GL node using the cell's own fluid state."""
        kappa = self.model.kappa
        if kappa == 0:
            return np.zeros_like(self.Y)
        T01 = self.U[1] @ self.disc.phi_gl
        return y_rhs(T01, self.A_gl, self.B_gl, self.disc.r_gl, kappa, self.omA_gl)

    def max_signal_speed(self, ghost_left=None, ghost_right=None):
        f = self.interface_states(ghost_left, ghost_right)
        return float(np.max(np.maximum(-f["alpha_l"], f["alpha_r"])))


def apply_dg_operator(disc, model, U, Y, Z, ghost_left=None, ghost_right=None, source=True):
    """Conventional DG right-hand side dU/dt (modal, shape (2, N, k+1))."""
    return StageFields(disc, model, U, Y, Z, source).dg_rhs(ghost_left, ghost_right, with_y=False)[0]


def apply_local_operator(disc, model, U, Y, Z, source=True):
    """Compact local right-hand side, no neighbour coupling."""
    return StageFields(disc, model, U, Y, Z, source).local_rhs()


def ghost_from_prim(rho, v, eos):
    """Dirichlet ghost conserved state from primitive boundary data."""
    T00, T01, _ = prim_to_cons(rho, v, eos)
    return np.array([T00, T01])
