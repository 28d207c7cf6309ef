"""Constraint-preserving scaling limiter and the weak-CP time-step diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .fluid import AdmissibilityError
from .quadrature import gauss_lobatto_rule

EPS_FLOOR = 1e-13


# exact cell minimum ------------------------------------------------------
def _horner(a, x):
    out = np.zeros_like(x) + a[..., -1:]
    for i in range(a.shape[-1] - 2, -1, -1):
        out = out * x + a[..., i : i + 1]
    return out


def _critical_points(a):
    """Real roots of p' in (-1, 1) for monomial coefficients a (..., k+1); NaN padded."""
    k = a.shape[-1] - 1
    nan = np.full(a.shape[:-1] + (0,), np.nan, dtype=a.dtype)
    if k <= 1:
        return nan
    if k == 2:
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(a[..., 2] != 0, -a[..., 1] / (2 * a[..., 2]), np.nan)
        return x[..., None]
    if k == 3:
        qa, qb, qc = 3 * a[..., 3], 2 * a[..., 2], a[..., 1]
        disc = qb * qb - 4 * qa * qc
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -(qb + np.copysign(sq, qb)) / 2
        with np.errstate(divide="ignore", invalid="ignore"):
            x1 = np.where(qa != 0, q / qa, np.where(qb != 0, -qc / qb, np.nan))
            x2 = np.where((qa != 0) & (q != 0), qc / q, np.nan)
        return np.stack([x1, x2], axis=-1)
    # general degree: fall back on numpy's companion-matrix roots
    flat = a.reshape(-1, k + 1)
    out = np.full((flat.shape[0], k - 1), np.nan, dtype=a.dtype)
    powers = np.arange(1, k + 1)
    for i, row in enumerate(flat):
        d = (row[1:] * powers)[::-1]
        nz = np.flatnonzero(d)
        if len(nz) == 0:
            continue
        r = np.roots(d[nz[0] :])
        r = r[np.abs(r.imag) < 1e-12].real
        out[i, : len(r)] = r
    return out.reshape(a.shape[:-1] + (k - 1,))


def polynomial_minimum(c, monomial):
    """Exact minimum over [-1, 1] of sum_m c_m Phi_m for coefficient rows c (..., k+1)."""
    a = c @ monomial.T
    pts = _critical_points(a)
    pts = np.where((pts > -1) & (pts < 1), pts, np.nan)
    ends = np.broadcast_to(np.array([-1.0, 1.0], dtype=a.dtype), a.shape[:-1] + (2,))
    x = np.concatenate([ends, pts], axis=-1)
    vals = _horner(a, np.where(np.isnan(x), 0, x))
    vals = np.where(np.isnan(x), np.inf, vals)
    return vals.min(axis=-1)


def cell_min_admissibility(U, monomial):
    """m_j = min over each cell of T00 - |T01| (U has shape (2, N, k+1))."""
    lo = polynomial_minimum(U[0] - U[1], monomial)
    hi = polynomial_minimum(U[0] + U[1], monomial)
    return np.minimum(lo, hi)


@dataclass
class LimiterReport:
    theta: np.ndarray
    m_before: np.ndarray

    @property
    def activations(self):
        return int(np.count_nonzero(self.theta < 1))


def scaling_limiter(U, phi0, monomial, where=""):
    """Scale higher modes toward the cell average so T00 - |T01| >= eps pointwise.

    Returns (limited coefficients, LimiterReport).  Raises AdmissibilityError
    when a cell average itself is not admissible.
    """
    avg0 = U[0, :, 0] * phi0
    avg1 = U[1, :, 0] * phi0
    abar = avg0 - np.abs(avg1)
    bad = ~(abar > 0)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise AdmissibilityError(
            f"inadmissible cell average in cell {j}{' ' + where if where else ''}: "
            f"T00={avg0[j]!r}, T01={avg1[j]!r}; the time step violates the CP condition"
        )
    m = cell_min_admissibility(U, monomial)
    eps = np.minimum(EPS_FLOOR, abar)
    active = m < eps
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.where(active, (abar - eps) / (abar - m), 1)
    theta = np.clip(theta, 0, 1)
    out = U.copy()
    if np.any(active):
        out[:, active, 1:] = U[:, active, 1:] * theta[active, None]
    return out, LimiterReport(theta, m)


# lambda_S and the weak-CP bound -------------------------------------------
def lambda_s(Ubar, Sbar):
    """Smallest positive lambda with T00 - |T01| of Ubar + lambda Sbar equal to zero.

    +inf when the source never drives the state out of G_c.
    """
    U0, U1 = np.asarray(Ubar[0]), np.asarray(Ubar[1])
    S0, S1 = np.asarray(Sbar[0]), np.asarray(Sbar[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(S0 - S1 < 0, (U0 - U1) / (S1 - S0), np.inf)
        r2 = np.where(S0 + S1 < 0, -(U0 + U1) / (S0 + S1), np.inf)
    return np.minimum(r1, r2)


@dataclass(frozen=True)
class Bracket:
    """weight * [U^{base} + dt * sum(coef * op(stage))] with op in {loc, -loc, dg}."""

    weight: float
    base: int
    terms: tuple

    @property
    def mu(self):
        return sum(abs(c) for _, _, c in self.terms)


def splitting(order):
    """Convex forward-Euler decompositions of every stage cell average.

    Returns a list indexed by the produced stage (1 .. s, s meaning U^{n+1}).
    Each entry lists the brackets whose sum reproduces that stage average.
    """
    if order == 1:
        return [[Bracket(1.0, 0, (("dg", 0, 1.0),))]]
    if order == 2:
        C = sqrt(3) - 1
        return [
            [Bracket(1.0, 0, (("loc", 0, 0.5),))],
            [
                Bracket(1 - C, 0, (("-loc", 0, C / (2 * (1 - C))),)),
                Bracket(C, 1, (("dg", 1, 1 / C),)),
            ],
        ]
    if order == 3:
        C1, C2, C3 = 0.4764, 0.2442, 0.5242
        Ch = 4 * C2 / (3 + 4 * C2)
        R = 1 - C2 - C3
        return [
            [Bracket(1.0, 0, (("loc", 0, 1 / 3),))],
            [
                Bracket(1 - C1, 0, (("-loc", 0, C1 / (3 * (1 - C1))),)),
                Bracket(C1, 1, (("loc", 1, 2 / (3 * C1)),)),
            ],
            [
                Bracket(R * Ch, 0, (("-loc", 0, C2 / (3 * R * Ch)),)),
                Bracket(R * (1 - Ch), 0, (("dg", 0, 1 / (4 * R * (1 - Ch))),)),
                Bracket(C2, 1, (("-loc", 1, 2 * C3 / (3 * C2)),)),
                Bracket(C3, 2, (("dg", 2, 3 / (4 * C3)),)),
            ],
        ]
    if order == 4:
        C1, C2, C3, C4, C5, C6 = 0.5, 0.2346, 0.6850, 0.3334, 0.3066, 0.1142
        R3 = 1 - C2 - C3
        R4 = 1 - C4 - C5 - C6
        return [
            [Bracket(1.0, 0, (("loc", 0, 0.5),))],
            [
                Bracket(1 - C1, 0, (("-loc", 0, C1 / (2 * (1 - C1))),)),
                Bracket(C1, 1, (("loc", 1, 1 / (2 * C1)),)),
            ],
            [
                Bracket(R3, 0, (("-loc", 0, C2 / (2 * R3)),)),
                Bracket(C2, 1, (("-loc", 1, C3 / (2 * C2)),)),
                Bracket(C3, 2, (("loc", 2, 1 / C3),)),
            ],
            [
                Bracket(R4, 0, (("-loc", 0, C4 / (2 * R4)), ("dg", 0, 1 / (6 * R4)))),
                Bracket(C4, 1, (("-loc", 1, C5 / (2 * C4)), ("dg", 1, 1 / (3 * C4)))),
                Bracket(C5, 2, (("-loc", 2, C6 / C5), ("dg", 2, 1 / (3 * C5)))),
                Bracket(C6, 3, (("dg", 3, 1 / (6 * C6)),)),
            ],
        ]
    raise ValueError(f"no splitting for order {order}")


def evaluate_splitting(brackets, averages, dt, ops):
    """Recombine brackets; ``averages[i]`` is stage i's average, ``ops[(name, i)]`` the operator value."""
    total = 0
    for b in brackets:
        inner = averages[b.base]
        for name, stage, coef in b.terms:
            val = ops[("loc", stage)] if name != "dg" else ops[("dg", stage)]
            sign = -1 if name == "-loc" else 1
            inner = inner + dt * coef * sign * val
        total = total + b.weight * inner
    return total


def max_stage_multiplier(order):
    return max(b.mu for stage in splitting(order) for b in stage)


def gl_endpoint_weight(k):
    """Unit-normalised endpoint weight of the N-point GL rule, N = ceil((k+3)/2)."""
    n = (k + 4) // 2
    return float(gauss_lobatto_rule(n).unit_weights[0])


def forward_euler_bound(alpha, h, gamma, lam_s):
    """Largest dt with the flux part (weight delta) and source part (weight 1-delta)
    both admissible, maximised in closed form over delta."""
    a = gamma * h / np.asarray(alpha, dtype=float)
    b = np.asarray(lam_s, dtype=float)
    with np.errstate(divide="ignore"):
        return 1 / (1 / a + 1 / b)


def forward_euler_bound_scan(alpha, h, gamma, lam_s, tol=1e-3):
    """Same bound found by a bounded scalar search over delta (cross-check)."""
    from scipy.optimize import minimize_scalar

    a = gamma * h / alpha
    if np.isinf(lam_s):
        return a
    res = minimize_scalar(
        lambda d: -min(d * a, (1 - d) * lam_s), bounds=(0, 1), method="bounded",
        options={"xatol": tol},
    )
    return -res.fun


def cp_time_step_bound(fields, order, ghost_left=None, ghost_right=None):
    """Weak-CP diagnostic time step for the current stage state.

    Combines the HLL/local interface condition with the GL endpoint weight,
    the source root lambda_S of every cell and the largest forward-Euler
    multiplier of the order's convex splitting.
    """
    from .flux import source_term
    from .fluid import speeds_from_prim

    d = fields.disc
    f = fields.interface_states(ghost_left, ghost_right)
    alpha_face = np.maximum(-f["alpha_l"], f["alpha_r"])
    # interior-trace speeds cover the local operator
    cs_l = fields.model.eos.sound_speed(fields.prim_L.rho)
    cs_r = fields.model.eos.sound_speed(fields.prim_R.rho)
    l1, l2 = speeds_from_prim(fields.prim_L.v, cs_l, np.sqrt(fields.A_gl[:, 0] * fields.B_face[:-1]))
    r1, r2 = speeds_from_prim(fields.prim_R.v, cs_r, np.sqrt(fields.A_gl[:, -1] * fields.B_face[1:]))
    alpha = np.maximum.reduce([
        alpha_face[:-1], alpha_face[1:], np.abs(l1), np.abs(l2), np.abs(r1), np.abs(r2),
    ])
    S = np.stack(source_term(
        fields.Uq[0], fields.Uq[1], fields.T11_q, fields.prim_q.p,
        fields.A_q, fields.B_q, d.r_q, fields.model.kappa,
    ))
    Sbar = S @ d.gauss.unit_weights
    Ubar = d.averages(fields.U)
    lam = lambda_s(Ubar, Sbar)
    gamma = gl_endpoint_weight(d.k)
    dt_fe = forward_euler_bound(alpha, float(d.h), gamma, lam)
    return float(np.min(dt_fe) / max_stage_multiplier(order))
