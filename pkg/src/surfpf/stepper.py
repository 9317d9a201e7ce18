"""Adaptive backward Euler integration of the semi-discrete system.

Each step solves the implicit backward Euler system with simplified Newton
iterations (finite-difference Jacobian, reused across steps), estimates the
local error by comparing one full step against two half steps, and picks
the next step size with the H211b digital filter.  Both the control error
and the step ratio pass through arctan limiters; steps are rejected on the
ratio, not on the raw error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .assembly import SemidiscreteSystem, SpectralState
from .basis import mass_diagonal
from .errors import BlowUp, NewtonDivergence


def limiter(x, kappa: float):
    """Smooth arctan limiter 1 + kappa arctan((x - 1) / kappa)."""
    return 1.0 + kappa * np.arctan((x - 1.0) / kappa)


CERR_KAPPA = 2.0
RHO_KAPPA = 1.0
H211B_EXPONENTS = (0.25, 0.25, -0.25)


def h211b(cerr: float, cerr_prev: float, rho_prev: float) -> float:
    e1, e2, e3 = H211B_EXPONENTS
    return cerr**e1 * cerr_prev**e2 * rho_prev**e3


def rejection_threshold(safety: float = 2.0) -> float:
    """Smallest acceptable step ratio.

    A step whose error is ``safety`` times the tolerance, fed through the
    controller with neutral history, yields exactly this ratio.
    """
    return float(limiter(h211b(limiter(safety**-0.5, CERR_KAPPA), 1.0, 1.0), RHO_KAPPA))


@dataclass
class Tolerances:
    """Per-component relative tolerance and scalar absolute tolerance."""

    rtol: np.ndarray
    atol: float = 1e-8

    def __post_init__(self):
        self.rtol = np.asarray(self.rtol, dtype=float)
        if np.any(self.rtol <= 0) or self.atol <= 0:
            raise ValueError("tolerances must be strictly positive")

    @classmethod
    def scaled(cls, order: int, eps: float = 1e-6, atol: float | None = None) -> "Tolerances":
        """``Rtol = eps * diag(M^-1/2)`` on both fields."""
        r = eps / np.sqrt(mass_diagonal(order))
        return cls(np.concatenate([r, r]), 1e-8 if atol is None else atol)

    def tol_vector(self, u) -> np.ndarray:
        return np.maximum(self.rtol * np.abs(u), self.atol)


def control_error(err, u_next, tol: Tolerances) -> float:
    """Limited control variable ``L(||err / TOL||_inf ** -1/2)``."""
    ratio = float(np.max(np.asarray(err) / tol.tol_vector(u_next)))
    x = math.inf if ratio == 0.0 else ratio**-0.5
    return float(limiter(x, CERR_KAPPA))


@dataclass
class ControllerState:
    dt: float = 1e-8
    dt_min: float = 1e-12
    dt_max: float = math.inf
    cerr_prev: float = 1.0
    rho_prev: float = 1.0
    safety: float = 2.0
    rho_min: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.dt_min <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_max")
        self.dt = min(max(self.dt, self.dt_min), self.dt_max)
        self.rho_min = rejection_threshold(self.safety)

    def propose_ratio(self, cerr: float) -> float:
        return float(limiter(h211b(cerr, self.cerr_prev, self.rho_prev), RHO_KAPPA))

    def accepts(self, rho: float) -> bool:
        return rho >= self.rho_min

    def clamp(self, dt: float) -> float:
        return min(max(dt, self.dt_min), self.dt_max)

    def accept(self, cerr: float, rho: float, dt_used: float):
        self.cerr_prev, self.rho_prev = cerr, rho
        self.dt = self.clamp(rho * dt_used)

    def reject(self, rho: float, dt_used: float):
        self.dt = self.clamp(rho * dt_used)


@dataclass
class NewtonConfig:
    max_iter: int = 10
    tol: float = 1e-10
    jac_increment: float = math.sqrt(np.finfo(float).eps)
    refresh_rate: float = 0.5
    max_reuse: int = 20


@dataclass
class NewtonStats:
    jacobians: int = 0
    factorizations: int = 0
    iterations: int = 0
    failures: int = 0


class ImplicitSolver:
    """Backward Euler solves with a cached finite-difference Jacobian."""

    def __init__(self, system: SemidiscreteSystem, config: NewtonConfig | None = None):
        self.system = system
        self.config = config or NewtonConfig()
        self.stats = NewtonStats()
        self._jac = None
        self._reuse = 0
        self._lu = {}

    def jacobian(self, u) -> np.ndarray:
        """Forward-difference Jacobian of the rate function at ``u``."""
        u = np.asarray(u, dtype=float)
        h = self.config.jac_increment * (1.0 + np.abs(u))
        perturbed = u[None, :] + np.diag(h)
        r0 = self.system.rates(u)
        cols = (self.system.rates(perturbed) - r0) / h[:, None]
        return cols.T

    def refresh(self, u):
        self._jac = self.jacobian(u)
        self._reuse = 0
        self._lu.clear()
        self.stats.jacobians += 1

    def _factor(self, dt: float):
        lu = self._lu.get(dt)
        if lu is None:
            A = np.eye(len(self._jac)) - dt * self._jac
            lu = sla.lu_factor(A, check_finite=False)
            if len(self._lu) > 8:
                self._lu.clear()
            self._lu[dt] = lu
            self.stats.factorizations += 1
        return lu

    def _iterate(self, u0, dt):
        cfg = self.config
        lu = self._factor(dt)
        u = u0.copy()
        prev = None
        worst = 0.0
        for k in range(cfg.max_iter):
            res = u - u0 - dt * self.system.rates(u)
            if not np.all(np.isfinite(res)):
                raise NewtonDivergence("non-finite residual")
            du = sla.lu_solve(lu, -res, check_finite=False)
            u = u + du
            self.stats.iterations += 1
            nrm = float(np.max(np.abs(du)))
            if nrm <= cfg.tol:
                return u, k + 1, worst
            if prev is not None and prev > 0:
                theta = nrm / prev
                worst = max(worst, theta)
                if theta >= 1.0:
                    raise NewtonDivergence(f"contraction estimate {theta:.3g} >= 1")
                if theta / (1 - theta) * nrm <= cfg.tol:
                    return u, k + 1, worst
                left = cfg.max_iter - 1 - k
                if theta**left / (1 - theta) * nrm > 1e3 * cfg.tol:
                    raise NewtonDivergence("predicted not to converge within the iteration cap")
            prev = nrm
        raise NewtonDivergence("iteration cap reached")

    def solve(self, u0, dt: float):
        """Return ``(u1, iterations)`` with u1 the backward Euler update."""
        u0 = np.asarray(u0, dtype=float)
        if not dt > 0:
            raise ValueError("dt must be positive")
        fresh = self._jac is None or self._reuse >= self.config.max_reuse
        if fresh:
            self.refresh(u0)
        try:
            u, its, worst = self._iterate(u0, dt)
        except NewtonDivergence:
            if fresh:
                self.stats.failures += 1
                raise
            self.refresh(u0)
            try:
                u, its, worst = self._iterate(u0, dt)
            except NewtonDivergence:
                self.stats.failures += 1
                raise
        self._reuse += 1
        if worst > self.config.refresh_rate:
            self._reuse = self.config.max_reuse
        return u, its


def backward_euler_solve(system: SemidiscreteSystem, state: SpectralState, dt: float,
                         solver: ImplicitSolver | None = None) -> SpectralState:
    solver = solver or ImplicitSolver(system)
    u, _ = solver.solve(state.vector, dt)
    return SpectralState.from_vector(u, state.t + dt)


def error_estimate(system: SemidiscreteSystem, state, dt: float, solver: ImplicitSolver | None = None):
    """One full step against two half steps.

    Returns ``(u1, u2, err, iterations)`` with ``err = |u1 - u2| / 3``.
    """
    solver = solver or ImplicitSolver(system)
    u0 = state.vector if isinstance(state, SpectralState) else np.asarray(state, float)
    u1, i1 = solver.solve(u0, dt)
    h, i2 = solver.solve(u0, dt / 2)
    u2, i3 = solver.solve(h, dt / 2)
    return u1, u2, np.abs(u1 - u2) / 3.0, i1 + i2 + i3


# ----------------------------------------------------------------------
@dataclass
class StepRecord:
    t: float
    dt: float
    accepted: bool
    energy: float
    mass_phi: float
    mass_psi: float
    psi0: float
    cerr: float
    newton_iters: int


@dataclass
class RunRecord:
    steps: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    reason: str = "completed"
    message: str = ""
    final_state: SpectralState | None = None
    initial_state: SpectralState | None = None
    stats: dict = field(default_factory=dict)

    @property
    def accepted(self) -> list:
        return [s for s in self.steps if s.accepted]

    @property
    def n_accepted(self) -> int:
        return sum(1 for s in self.steps if s.accepted)

    @property
    def n_rejected(self) -> int:
        return sum(1 for s in self.steps if not s.accepted)

    def series(self, name: str, accepted_only: bool = True) -> np.ndarray:
        rows = self.accepted if accepted_only else self.steps
        return np.array([getattr(s, name) for s in rows], dtype=float)


@dataclass
class BlowUpCheck:
    psi_lo: float = -0.1
    psi_hi: float = 1.1

    def __call__(self, system: SemidiscreteSystem, u) -> str | None:
        if not np.all(np.isfinite(u)):
            return "non-finite state"
        _, psi_hat = system.split(u)
        psi = psi_hat @ system.basis.P.T
        lo, hi = float(psi.min()), float(psi.max())
        if lo < self.psi_lo or hi > self.psi_hi:
            return f"surfactant fraction left [{self.psi_lo}, {self.psi_hi}]: min {lo:.3g}, max {hi:.3g}"
        return None


Observer = Callable[[SemidiscreteSystem, SpectralState, StepRecord], bool | None]


def advance(system: SemidiscreteSystem, state: SpectralState, ctrl: ControllerState, t_end: float,
            tol: Tolerances | None = None, observers: Sequence[Observer] = (),
            newton: NewtonConfig | None = None, snapshot_times: Sequence[float] = (),
            blowup: BlowUpCheck | None = None, max_steps: int = 1_000_000,
            raise_on_blowup: bool = False) -> RunRecord:
    """Integrate from ``state.t`` to ``t_end``.

    Observers are called after every accepted step; a truthy return value
    stops the run early (reason ``"stopped"``).  Blow-up and unrecoverable
    solver failure end the run with the corresponding reason unless
    ``raise_on_blowup`` is set.
    """
    if not t_end > state.t:
        raise ValueError("t_end must exceed the initial time")
    tol = tol or Tolerances.scaled(system.order)
    blowup = blowup or BlowUpCheck()
    solver = ImplicitSolver(system, newton)
    record = RunRecord(initial_state=state)
    snaps = sorted(t for t in snapshot_times if t >= state.t)
    u = state.vector
    t = state.t

    def row(u_, t_, dt_, accepted, cerr, its):
        st = SpectralState.from_vector(u_, t_)
        m_phi, m_psi = system.total_mass(st)
        energy = system.total_energy(st, strict=False)
        psi0 = float(system.evaluate(st.psi, 0.0)[0])
        return st, StepRecord(t_, dt_, accepted, energy, float(m_phi), float(m_psi), psi0, cerr, its)

    if snaps and snaps[0] == t:
        record.snapshots.append(SpectralState.from_vector(u, t))
        snaps.pop(0)

    while t < t_end:
        if len(record.steps) >= max_steps:
            record.reason, record.message = "solver failure", "step limit reached"
            break
        dt = min(ctrl.dt, t_end - t)
        if snaps and t + dt > snaps[0]:
            dt = snaps[0] - t
        try:
            u1, u2, err, its = error_estimate(system, u, dt, solver)
        except NewtonDivergence as exc:
            record.steps.append(StepRecord(t + dt, dt, False, math.nan, math.nan, math.nan,
                                           math.nan, math.nan, 0))
            ctrl.dt = dt / 2
            if dt / 2 < ctrl.dt_min:
                record.reason = "blow-up"
                record.message = f"step size driven below dt_min after Newton failure: {exc}"
                break
            continue
        cerr = control_error(err, u2, tol)
        rho = ctrl.propose_ratio(cerr)
        if not ctrl.accepts(rho):
            record.steps.append(StepRecord(t + dt, dt, False, math.nan, math.nan, math.nan,
                                           math.nan, cerr, its))
            if rho * dt < ctrl.dt_min:
                record.reason, record.message = "blow-up", "step size driven below dt_min"
                break
            ctrl.reject(rho, dt)
            continue
        bad = blowup(system, u2)
        t_new = t + dt if t + dt < t_end else t_end
        if snaps and abs(t_new - snaps[0]) <= 1e-14 * max(1.0, abs(t_new)):
            t_new = snaps[0]
        if bad is not None:
            record.final_state = SpectralState.from_vector(u2, t_new)
            record.reason, record.message = "blow-up", bad
            break
        u, t = u2, t_new
        st, rec = row(u, t, dt, True, cerr, its)
        record.steps.append(rec)
        ctrl.accept(cerr, rho, dt)
        if snaps and t >= snaps[0]:
            record.snapshots.append(st)
            snaps.pop(0)
        stop = False
        for obs in observers:
            stop = bool(obs(system, st, rec)) or stop
        if stop:
            record.reason = "stopped"
            break
    if record.final_state is None:
        record.final_state = SpectralState.from_vector(u, t)
    record.stats = {
        "jacobians": solver.stats.jacobians,
        "factorizations": solver.stats.factorizations,
        "newton_iterations": solver.stats.iterations,
        "newton_failures": solver.stats.failures,
    }
    if raise_on_blowup and record.reason == "blow-up":
        raise BlowUp(record.message)
    return record
