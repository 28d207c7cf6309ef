"""Compact Runge-Kutta DG time stepping with OE filtering and CP limiting."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .dg import StageFields
from .limiter import cell_min_admissibility, scaling_limiter
from .metric import reconstruct_z
from .oe import apply_oe_filter

log = logging.getLogger(__name__)

DEFAULT_CFL = {1: 0.4, 2: 0.317, 3: 0.169, 4: 0.05}


@dataclass(frozen=True)
class ButcherScheme:
    order: int
    a: tuple  # strictly lower triangular rows
    b: tuple
    c: tuple

    @property
    def stages(self):
        return len(self.b)

    def expansion(self, stage, n_terms=4):
        """Coefficients e_j with stage boundary value sum_j e_j tau^j g^(j).

        For a linear autonomous problem the i-th stage value equals
        sum_j tau^j (A^j 1)_i d^j g/dt^j, which gives the compatible data.
        """
        s = self.stages
        A = np.zeros((s, s))
        for i, row in enumerate(self.a):
            A[i, : len(row)] = row
        v = np.ones(s)
        out = []
        for _ in range(n_terms):
            out.append(v[stage])
            v = A @ v
        return np.array(out)


def butcher(order):
    if order == 1:
        return ButcherScheme(1, ((),), (1.0,), (0.0,))
    if order == 2:
        return ButcherScheme(2, ((), (0.5,)), (0.0, 1.0), (0.0, 0.5))
    if order == 3:
        return ButcherScheme(3, ((), (1 / 3,), (0.0, 2 / 3)), (0.25, 0.0, 0.75), (0.0, 1 / 3, 2 / 3))
    if order == 4:
        return ButcherScheme(
            4,
            ((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0)),
            (1 / 6, 1 / 3, 1 / 3, 1 / 6),
            (0.0, 0.5, 0.5, 1.0),
        )
    raise ValueError(f"unsupported order {order}; choose 1 (reference) to 4")


# boundary data -------------------------------------------------------------
class BoundaryData:
    """Time-dependent boundary vector g(t) with derivatives up to third order.

    ``derivs(t)`` returns an array whose leading axis holds g, g', g'', g'''.
    Build one with :meth:`analytic` or, for plain samples of g, with
    :meth:`from_function`, which differentiates by Richardson-extrapolated
    central differences with step dt/16.
    """

    def __init__(self, derivs, needs_dt=False):
        self._derivs = derivs
        self.needs_dt = needs_dt

    @classmethod
    def analytic(cls, derivs):
        return cls(lambda t, dt: derivs(t))

    @classmethod
    def constant(cls, value):
        value = np.asarray(value)

        def derivs(t, dt):
            out = np.zeros((4,) + value.shape, dtype=np.result_type(value, t))
            out[0] = value
            return out

        return cls(derivs)

    @classmethod
    def from_function(cls, g):
        def central(t, h):
            gm2, gm1, g0, gp1, gp2 = (np.asarray(g(t + i * h)) for i in (-2, -1, 0, 1, 2))
            d1 = (gp1 - gm1) / (2 * h)
            d2 = (gp1 - 2 * g0 + gm1) / h**2
            d3 = (gp2 - 2 * gp1 + 2 * gm1 - gm2) / (2 * h**3)
            return g0, d1, d2, d3

        def derivs(t, dt):
            h = dt / 16
            coarse = central(t, h)
            fine = central(t, h / 2)
            out = [coarse[0]] + [(4 * f - c) / 3 for c, f in zip(coarse[1:], fine[1:])]
            return np.array(out)

        return cls(derivs, needs_dt=True)

    def derivatives(self, t, dt=None):
        if self.needs_dt and not dt:
            raise ValueError("finite-difference boundary data need a step size")
        return self._derivs(t, dt)


def stage_boundary_values(bd, t, dt, scheme, stage):
    """Compatible stage boundary value of the data ``bd`` at step start ``t``."""
    e = scheme.expansion(stage)
    d = bd.derivatives(t, dt)
    out = d[0] * 1
    tau_j = 1
    for j in range(1, 4):
        tau_j = tau_j * dt
        if e[j] != 0:
            out = out + e[j] * tau_j * d[j]
    return out


@dataclass
class Dirichlet:
    """Ghost conserved state (T00, T01) from prescribed boundary data."""

    data: BoundaryData


@dataclass
class Outflow:
    """Ghost state copies the interior trace."""


# state and configuration ------------------------------------------------------
@dataclass
class State:
    t: float
    U: np.ndarray  # (2, N, k+1) modal coefficients
    Y: np.ndarray  # (N, n_gl)
    Z: np.ndarray  # (N, n_gl)


@dataclass
class SolverConfig:
    order: int = 4
    cfl: float | None = None
    oe: str = "compact"  # compact | conventional | off
    damping: str = "componentwise"  # componentwise | uniform
    deviation: str = "global"  # global | local
    limiter: bool = True
    audit: bool = False
    dt_cap: float = 1e-2

    def __post_init__(self):
        if self.order not in (1, 2, 3, 4):
            raise ValueError(f"order must be 1 (reference) or 2..4, got {self.order}")
        if self.oe not in ("compact", "conventional", "off"):
            raise ValueError(f"unknown OE placement {self.oe!r}")
        if self.damping not in ("componentwise", "uniform"):
            raise ValueError(f"unknown damping mode {self.damping!r}")
        if self.cfl is not None and not self.cfl > 0:
            raise ValueError("CFL number must be positive")

    @property
    def cfl_number(self):
        return DEFAULT_CFL[self.order] if self.cfl is None else self.cfl


@dataclass
class Audit:
    """Running CP statistics: one row per stage when enabled."""

    rows: list = field(default_factory=list)
    min_admissibility: float = np.inf
    activations: int = 0
    limiter_calls: int = 0
    metric_violations: int = 0
    min_A: float = np.inf
    max_A: float = -np.inf
    min_B: float = np.inf
    steps: int = 0


class Solver:
    """Advance (U, Y, Z) with the compact RK scheme of the configured order."""

    def __init__(self, disc, model, left, right, z_anchor, config):
        self.disc = disc
        self.model = model
        self.left = left
        self.right = right
        self.z_anchor = z_anchor
        self.config = config
        self.scheme = butcher(config.order)
        self.audit = Audit()
        self._phi0 = disc.phi_left[0]

    # helpers -------------------------------------------------------------
    def _ghost(self, side, t, dt, stage):
        bc = self.left if side == "left" else self.right
        if isinstance(bc, Outflow):
            return None
        return stage_boundary_values(bc.data, t, dt, self.scheme, stage)

    def _anchor(self, t, dt, stage):
        return stage_boundary_values(self.z_anchor, t, dt, self.scheme, stage)

    def _limit(self, U, where, record=True):
        if not self.config.limiter:
            return U
        out, rep = scaling_limiter(U, self._phi0, self.disc.monomial, where)
        if record:
            a = self.audit
            a.limiter_calls += 1
            a.activations += rep.activations
            m_after = float(cell_min_admissibility(out, self.disc.monomial).min())
            a.min_admissibility = min(a.min_admissibility, m_after)
            if self.config.audit:
                a.rows.append(dict(
                    where=where, min_admissibility=m_after,
                    activations=rep.activations, theta_min=float(rep.theta.min()),
                ))
        return out

    def _check_metric(self, F):
        a = self.audit
        A = np.concatenate([F.A_q.ravel(), F.A_gl.ravel()])
        B = np.concatenate([F.B_q.ravel(), F.B_gl.ravel()])
        a.min_A = min(a.min_A, float(A.min()))
        a.max_A = max(a.max_A, float(A.max()))
        a.min_B = min(a.min_B, float(B.min()))
        a.metric_violations += int(np.count_nonzero(~((A > 0) & (A < 1))) + np.count_nonzero(~(B > 0)))

    def reconstruct_z(self, U, Y, anchor):
        return reconstruct_z(self.disc, Y, U, anchor, self.model.eos, self.model.kappa)

    def _filter(self, U, Y, Z, tau):
        return apply_oe_filter(
            self.disc, self.model, U, Y, Z, tau,
            damping=self.config.damping, deviation=self.config.deviation,
        )

    # time step -------------------------------------------------------------
    def cfl_time_step(self, state):
        U = self._limit(state.U, "cfl", record=False)
        F = StageFields(self.disc, self.model, U, state.Y, state.Z)
        dt0 = 1e-8
        alpha = F.max_signal_speed(
            self._ghost("left", state.t, dt0, 0), self._ghost("right", state.t, dt0, 0)
        )
        if alpha <= 0:
            return self.config.dt_cap
        return self.config.cfl_number * float(self.disc.h) / alpha

    def step(self, state, dt):
        cfg = self.config
        sch = self.scheme
        s = sch.stages
        t = state.t
        dt = self.disc.dtype(dt)
        conventional = cfg.oe == "conventional"
        use_filter = cfg.oe != "off" and self.disc.k > 0

        U0 = state.U
        if use_filter:
            U0 = self._filter(U0, state.Y, state.Z, dt)
        U0 = self._limit(U0, f"t={t:.6g} start")

        loc, dg, ynod, yface = [], [], [], []
        for i in range(s):
            if i == 0:
                Ui, Yi = U0, state.Y
            else:
                Ui = U0
                Yi = state.Y
                for m, a in enumerate(sch.a[i]):
                    if a != 0:
                        Ui = Ui + (dt * a) * (dg[m] if conventional else loc[m])
                        Yi = Yi + (dt * a) * ynod[m]
                if conventional and use_filter:
                    Ui = self._filter(Ui, Yi, self.reconstruct_z(Ui, Yi, self._anchor(t, dt, i)), dt)
                Ui = self._limit(Ui, f"t={t:.6g} stage {i}")
            Zi = self.reconstruct_z(Ui, Yi, self._anchor(t, dt, i))
            F = StageFields(self.disc, self.model, Ui, Yi, Zi)
            self._check_metric(F)
            ynod.append(F.y_nodal_rhs())
            need_dg = conventional or sch.b[i] != 0
            if not conventional and i < s - 1:
                loc.append(F.local_rhs())
            else:
                loc.append(None)
            if need_dg:
                r, yf, _ = F.dg_rhs(self._ghost("left", t, dt, i), self._ghost("right", t, dt, i))
                dg.append(r)
                yface.append(yf)
            else:
                dg.append(None)
                yface.append(None)

        U1 = U0
        Y1 = state.Y
        face = np.concatenate([state.Y[:, 0], state.Y[-1:, -1]])
        for i in range(s):
            if sch.b[i] != 0:
                U1 = U1 + (dt * sch.b[i]) * dg[i]
                Y1 = Y1 + (dt * sch.b[i]) * ynod[i]
                face = face + (dt * sch.b[i]) * yface[i]
        Y1 = Y1.copy()
        Y1[:, 0] = face[:-1]
        Y1[:, -1] = face[1:]

        t1 = t + dt
        Zs = self._limit(U1, f"t={float(t1):.6g} end", record=False)
        Z1 = self.reconstruct_z(Zs, Y1, self.z_anchor.derivatives(t1, dt)[0])
        for name, arr in (("U", U1), ("Y", Y1), ("Z", Z1)):
            if not np.all(np.isfinite(arr)):
                raise FloatingPointError(f"non-finite {name} after step at t={t}")
        self.audit.steps += 1
        return State(t1, U1, Y1, Z1)

    def run(self, state, t_final, progress_every=0):
        t_final = self.disc.dtype(t_final)
        while state.t < t_final:
            dt = self.cfl_time_step(state)
            last = state.t + dt >= t_final
            if last:
                dt = t_final - state.t
            state = self.step(state, dt)
            if last:
                state = replace(state, t=t_final)
            if progress_every and self.audit.steps % progress_every == 0:
                log.info(
                    "step %d t=%.6f dt=%.3e min_adm=%.3e activations=%d",
                    self.audit.steps, float(state.t), float(dt),
                    self.audit.min_admissibility, self.audit.activations,
                )
        return state
