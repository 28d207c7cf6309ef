"""Benchmark problems, exact solutions, error norms and convergence studies."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy as sp

from .dg import Model
from .fluid import LinearEos, cons_to_prim, prim_to_cons
from .integrator import BoundaryData, Dirichlet, Outflow, Solver, SolverConfig, State
from .mesh import Discretization, Mesh
from .metric import a_from_y, b_from_z, y_from_a

KAPPA = 8 * np.pi
_t, _r = sp.symbols("t r", real=True)


# exact solutions (numeric) -------------------------------------------------
def frw1_exact(t, r, kappa=KAPPA):
    """FRW-1 state in Schwarzschild form, sigma^2 = 1/3."""
    xi = np.asarray(r) / t
    if np.any(np.abs(xi) >= 1):
        raise ValueError("FRW-1 needs |r/t| < 1")
    v = (1 - np.sqrt(1 - xi * xi)) / xi
    rho = 3 * v * v / (kappa * r * r)
    return rho, v, 1 - v * v, 1 / (1 - v * v)


def frw2_exact(t, r, kappa=KAPPA):
    """FRW-2 state, Psi0 = 1, sigma^2 = 1/3.  B = 1 / (Psi^2 (1 - v^2))."""
    r = np.asarray(r)
    disc = t**4 - r * r
    if np.any(disc < 0):
        raise ValueError("FRW-2 needs t^4 >= r^2")
    tt = (t * t + np.sqrt(disc)) / 2
    v = r / (2 * tt)
    rho = 3 / (4 * kappa * tt * tt)
    psi2 = tt / (4 * tt * tt + r * r)
    return rho, v, 1 - v * v, 1 / (psi2 * (1 - v * v))


TOV_GAMMA = 3 / (56 * np.pi)


def tov_exact(t, r):
    """Static singular isothermal sphere with sigma^2 = 1/3, B0 = 1."""
    r = np.asarray(r)
    if np.any(r <= 0):
        raise ValueError("TOV needs r > 0")
    one = np.ones_like(r)
    return TOV_GAMMA / (r * r), 0 * r, (4 / 7) * one, r * one


def _accretion_f(w, a):
    return (1 - w) * w**a


def accretion_varpi(r, sigma=0.1, branch="supersonic", iters=200):
    """Root of (1 - w) w^a = (1 - 2/r)(2/r)^(4a), a = sigma^2 / (1 - sigma^2).

    ``supersonic`` picks w in (sigma^2, 1), ``subsonic`` w in (0, sigma^2).
    """
    r = np.asarray(r)
    if np.any(r <= 2):
        raise ValueError("accretion profile needs r > 2")
    s2 = sigma * sigma
    a = s2 / (1 - s2)
    rhs = (1 - 2 / r) * (2 / r) ** (4 * a)
    if np.any(rhs > _accretion_f(s2, a)):
        raise ValueError("no steady root: radius inside the forbidden band")
    if branch == "supersonic":
        lo, hi = np.full_like(rhs, s2), np.ones_like(rhs)
        decreasing = True
    elif branch == "subsonic":
        lo, hi = np.zeros_like(rhs), np.full_like(rhs, s2)
        decreasing = False
    else:
        raise ValueError(f"unknown branch {branch!r}")
    for _ in range(iters):
        mid = (lo + hi) / 2
        above = _accretion_f(mid, a) > rhs
        go_right = above if decreasing else ~above
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return (lo + hi) / 2


def accretion_steady(r, D0=0.016, sigma=0.1, branch="supersonic"):
    """Steady (rho, v) of the Schwarzschild accretion flow."""
    w = accretion_varpi(r, sigma, branch)
    v = -np.sqrt(w)
    rho = D0 * (1 - v * v) / (-v * r * (r - 2))
    return rho, v


# symbolic closures ----------------------------------------------------------
def _sym_frw1(kappa):
    xi = _r / _t
    v = (1 - sp.sqrt(1 - xi**2)) / xi
    rho = 3 * v**2 / (kappa * _r**2)
    return rho, v, sp.log(1 / (1 - v**2))


def _sym_frw2(kappa):
    tt = (_t**2 + sp.sqrt(_t**4 - _r**2)) / 2
    v = _r / (2 * tt)
    rho = 3 / (4 * kappa * tt**2)
    psi2 = tt / (4 * tt**2 + _r**2)
    return rho, v, -sp.log(psi2 * (1 - v**2))


def _sym_tov():
    return sp.Rational(3, 56) / sp.pi / _r**2, sp.Integer(0), sp.log(_r)


def _conserved_derivs(rho, v, sigma2, rb):
    """Lambdified t -> [d^j (T00, T01) / dt^j]_{j<=3} at r = rb."""
    p = sigma2 * rho
    w2 = 1 / (1 - v**2)
    T00 = ((rho + p) * w2 - p).subs(_r, rb)
    T01 = ((rho + p) * w2 * v).subs(_r, rb)
    rows = []
    for expr in (T00, T01):
        d = [expr]
        for _ in range(3):
            d.append(sp.diff(d[-1], _t))
        rows.append(d)
    funcs = [[sp.lambdify(_t, e, "numpy") for e in row] for row in rows]

    def derivs(t):
        out = np.empty((4, 2), dtype=np.result_type(t, np.float64))
        for c in range(2):
            for j in range(4):
                out[j, c] = funcs[c][j](t)
        return out

    return BoundaryData.analytic(derivs)


def _scalar_derivs(expr, rb):
    e = expr.subs(_r, rb)
    fs = [sp.lambdify(_t, sp.diff(e, _t, j) if j else e, "numpy") for j in range(4)]

    def derivs(t):
        return np.array([f(t) + 0 * t for f in fs])

    return BoundaryData.analytic(derivs)


# problem container -------------------------------------------------------------
@dataclass
class Problem:
    name: str
    r_left: float
    r_right: float
    t_start: float
    t_end: float
    sigma2: float
    kappa: float
    initial: object  # r -> (rho, v, A, B) at t_start
    left: object
    right: object
    z_anchor: BoundaryData
    exact: object = None  # (t, r) -> (rho, v, A, B)
    notes: dict = field(default_factory=dict)

    def model(self, dtype=np.float64):
        if self.sigma2 == 1 / 3:
            eos = LinearEos(sigma2=dtype(1) / 3)
        else:
            eos = LinearEos(sigma2=dtype(self.sigma2))
        return Model(eos, dtype(self.kappa))


def _smooth(name, sym, exact, sigma2=1 / 3, domain=(3.0, 7.0), times=(15.0, 16.0)):
    rho, v, lnB = sym
    rl, rr = domain
    s2 = sp.Rational(1, 3) if sigma2 == 1 / 3 else sp.Float(sigma2)
    return Problem(
        name=name, r_left=rl, r_right=rr, t_start=times[0], t_end=times[1],
        sigma2=sigma2, kappa=KAPPA,
        initial=lambda r, t0=times[0]: exact(t0, r),
        left=Dirichlet(_conserved_derivs(rho, v, s2, rl)),
        right=Dirichlet(_conserved_derivs(rho, v, s2, rr)),
        z_anchor=_scalar_derivs(lnB, rl),
        exact=exact,
    )


SHOCK_R0 = 5.0
SHOCK_V0 = float(np.sqrt(3 / 7))
SHOCK_T0 = SHOCK_R0 * (1 + SHOCK_V0**2) / (2 * SHOCK_V0)
SHOCK_B0 = SHOCK_R0 ** (-1.0) / (1 - SHOCK_V0**2)


def shock_initial(reversed_time=False):
    """Matched FRW-1 / TOV data at t0: returns (t0, sampler r -> (rho, v, A, B))."""
    t0 = -SHOCK_T0 if reversed_time else SHOCK_T0

    def sample(r):
        r = np.asarray(r)
        left = r < SHOCK_R0
        rl, vl, Al, Bl = frw1_exact(t0, np.where(left, r, 3.0))
        rho = np.where(left, rl, TOV_GAMMA / r**2)
        v = np.where(left, vl, 0 * r)
        A = np.where(left, Al, 4 / 7 + 0 * r)
        B = np.where(left, Bl, SHOCK_B0 * r)
        return rho, v, A, B

    return t0, sample


def _shock(reversed_time):
    t0, sample = shock_initial(reversed_time)
    rho, v, lnB = _sym_frw1(8 * sp.pi)
    gamma = TOV_GAMMA
    s2 = 1 / 3
    right = prim_to_cons(gamma / 49.0, 0.0, LinearEos(sigma2=s2))
    return Problem(
        name="reverse" if reversed_time else "shock",
        r_left=3.0, r_right=7.0, t_start=t0, t_end=t0 + 1.0,
        sigma2=s2, kappa=KAPPA, initial=sample,
        left=Dirichlet(_conserved_derivs(rho, v, sp.Rational(1, 3), 3)),
        right=Dirichlet(BoundaryData.constant(np.array(right[:2]))),
        z_anchor=_scalar_derivs(lnB, 3),
        notes=dict(t0=t0, r0=SHOCK_R0, v0=SHOCK_V0, B0=SHOCK_B0),
    )


def _accretion(initial="uniform"):
    sigma, D0 = 0.1, 0.016
    rl, rr = 2.2, 20.2

    def steady(r):
        rho, v = accretion_steady(r, D0, sigma)
        A = 1 - 2 / np.asarray(r)
        return rho, v, A, A

    def uniform(r):
        r = np.asarray(r)
        rho_b, v_b = accretion_steady(np.array([rr]), D0, sigma)
        A = 1 - 2 / r
        return rho_b[0] + 0 * r, v_b[0] + 0 * r, A, A

    rho_b, v_b = accretion_steady(np.array([rr]), D0, sigma)
    ghost = prim_to_cons(rho_b[0], v_b[0], LinearEos(sigma))
    return Problem(
        name="accretion", r_left=rl, r_right=rr, t_start=0.0, t_end=160.0,
        sigma2=sigma * sigma, kappa=0.0,
        initial=steady if initial == "steady" else uniform,
        left=Outflow(),
        right=Dirichlet(BoundaryData.constant(np.array(ghost[:2]))),
        z_anchor=BoundaryData.constant(np.log(1 - 2 / rl)),
        exact=lambda t, r: steady(r),
        notes=dict(D0=D0, sigma=sigma, initial=initial),
    )


@lru_cache(maxsize=None)
def get_problem(name, **kw):
    if name == "frw1":
        return _smooth("frw1", _sym_frw1(8 * sp.pi), frw1_exact)
    if name == "frw2":
        return _smooth("frw2", _sym_frw2(8 * sp.pi), frw2_exact)
    if name == "tov":
        return _smooth("tov", _sym_tov(), tov_exact)
    if name == "shock":
        return _shock(False)
    if name == "reverse":
        return _shock(True)
    if name == "accretion":
        return _accretion(**kw)
    raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}")


PROBLEMS = ("frw1", "frw2", "tov", "shock", "reverse", "accretion")


# setup and runs ------------------------------------------------------------------
def degree_for_order(order):
    return order - 1


def initial_state(problem, disc, model):
    """L2-projected conserved data, GL-nodal Y and the reconstructed Z."""
    k = disc.k
    from .quadrature import gauss_rule

    rule = gauss_rule(k + 2, disc.dtype)
    r = disc.map(rule.nodes)
    rho, v, _, _ = problem.initial(r)
    T00, T01, _ = prim_to_cons(np.asarray(rho, disc.dtype), np.asarray(v, disc.dtype), model.eos)
    phi = disc.basis.eval(rule.nodes)
    U = np.stack([(T00 * rule.weights) @ phi.T, (T01 * rule.weights) @ phi.T])
    _, _, A, _ = problem.initial(disc.r_gl)
    Y = y_from_a(np.asarray(A, disc.dtype))
    return U, Y


def build(problem, order, n_cells, config=None, dtype=np.float64):
    """Discretization, solver and initial state for one run."""
    if config is None:
        config = SolverConfig(order=order)
    disc = Discretization(Mesh(problem.r_left, problem.r_right, n_cells), degree_for_order(order), dtype)
    model = problem.model(dtype)
    solver = Solver(disc, model, problem.left, problem.right, problem.z_anchor, config)
    t0 = dtype(problem.t_start)
    U, Y = initial_state(problem, disc, model)
    Z = solver.reconstruct_z(U, Y, problem.z_anchor.derivatives(t0, 1e-3)[0])
    return solver, State(t0, U, Y, Z)


def run_problem(problem, order, n_cells, config=None, dtype=np.float64, t_end=None):
    solver, state = build(problem, order, n_cells, config, dtype)
    state = solver.run(state, problem.t_end if t_end is None else t_end)
    return solver, state


def sample_solution(disc, model, state, n_points):
    """Point values of (rho, v, A, B, T00, T01) at an n-point Gauss rule per cell."""
    s = disc.sampler(n_points)
    U = state.U @ s.phi
    prim = cons_to_prim(U[0], U[1], model.eos)
    A = a_from_y(state.Y @ s.from_gl.T)
    B = b_from_z(state.Z @ s.from_gl.T)
    return s, dict(rho=prim.rho, v=prim.v, A=A, B=B, T00=U[0], T01=U[1])


def error_norms(disc, model, state, exact, n_points=None):
    """Unnormalised L1, L2 and Linf errors of (rho, v, A, B) against ``exact``."""
    n = 2 * (disc.k + 1) if n_points is None else n_points
    s, num = sample_solution(disc, model, state, n)
    ex = exact(state.t, s.r)
    out = {}
    for name, ref in zip(("rho", "v", "A", "B"), ex):
        e = np.abs(num[name] - ref)
        out[name] = (
            float(np.sum(e * s.weights)),
            float(np.sqrt(np.sum(e * e * s.weights))),
            float(e.max()),
        )
    return out


def rate(e1, e2, n1, n2):
    return float(np.log(e1 / e2) / np.log(n2 / n1))


def convergence(problem, order, cells, config=None, dtype=np.float64):
    """Error table over a mesh ladder: list of (N, errors dict)."""
    rows = []
    for n in cells:
        solver, state = run_problem(problem, order, n, config, dtype)
        rows.append((n, error_norms(solver.disc, solver.model, state, problem.exact)))
    return rows


def rates(rows, var, norm):
    """Observed rates between consecutive rows for variable and norm index."""
    out = []
    for (n1, e1), (n2, e2) in zip(rows[:-1], rows[1:]):
        out.append(rate(e1[var][norm], e2[var][norm], n1, n2))
    return out


def reference_solver(problem, n_cells=4000, dtype=np.float64):
    """First-order HLL finite-volume reference (k = 0 path, forward Euler, CFL 0.4).

    Returns (cell centres, cell averages (2, N), final state).
    """
    cfg = SolverConfig(order=1, oe="off")
    solver, state = run_problem(problem, 1, n_cells, cfg, dtype)
    d = solver.disc
    centres = (d.faces[:-1] + d.faces[1:]) / 2
    return centres, d.averages(state.U), state


# comparison against a fine reference ----------------------------------------------
def detect_shocks(x, vals, n_shocks=2, separation=0.2):
    """Locations of the ``n_shocks`` steepest jumps of a fine profile.

    Jumps closer than ``separation`` to an already chosen one are skipped.
    """
    d = np.abs(np.diff(vals))
    mid = (x[1:] + x[:-1]) / 2
    found = []
    for i in np.argsort(d)[::-1]:
        if all(abs(mid[i] - s) > separation for s in found):
            found.append(float(mid[i]))
        if len(found) == n_shocks:
            break
    return np.array(sorted(found))


def envelope_excess(x, vals, x_ref, ref, window, n_shocks=2, amp_window=None):
    """Largest overshoot of ``vals`` outside the local min/max envelope of ``ref``.

    The envelope at x_j spans the reference values within ``window`` of x_j.
    Each overshoot is divided by the jump amplitude of the nearest shock,
    measured as the reference range within ``amp_window`` (default 2 windows)
    of that shock.  Returns (max relative excess, per-cell relative excess).
    """
    amp_window = 2 * window if amp_window is None else amp_window
    shocks = detect_shocks(x_ref, ref, n_shocks)
    amps = np.array([np.ptp(ref[np.abs(x_ref - s) <= amp_window]) for s in shocks])
    rel = np.zeros(len(x))
    for j, xj in enumerate(x):
        m = np.abs(x_ref - xj) <= window * (1 + 1e-9)
        lo, hi = ref[m].min(), ref[m].max()
        excess = max(lo - vals[j], vals[j] - hi, 0.0)
        rel[j] = excess / amps[np.argmin(np.abs(shocks - xj))]
    return float(rel.max()), rel


def aggregate(ref, factor):
    """Mean of consecutive groups of ``factor`` cells along the last axis."""
    ref = np.asarray(ref)
    n = ref.shape[-1] // factor
    return ref[..., : n * factor].reshape(ref.shape[:-1] + (n, factor)).mean(axis=-1)


def relative_l1(vals, ref):
    """sum |vals - ref| / sum |ref| on a uniform mesh."""
    return float(np.sum(np.abs(vals - ref)) / np.sum(np.abs(ref)))
