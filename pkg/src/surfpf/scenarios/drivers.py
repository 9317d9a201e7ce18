"""End-to-end experiment drivers built on the solver stack."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import analysis as an
from ..assembly import SemidiscreteSystem, SpectralState
from ..basis import SpectralFilter
from ..errors import ConfigError, InsufficientData, SurfpfError
from ..models import ModelVariant
from ..stepper import ControllerState, RunRecord, Tolerances, advance
from .config import ScenarioConfig, parse_field_spec


def build_system(cfg: ScenarioConfig) -> SemidiscreteSystem:
    filt = SpectralFilter(cfg.filter_cutoff, cfg.filter_order, cfg.filter_strength)
    return SemidiscreteSystem.build(cfg.params(), cfg.order, cfg.quadrature or None, filt, cfg.advection)


def _coeffs(vals, size):
    out = np.zeros(size)
    vals = np.asarray(vals, float)[:size]
    out[: vals.size] = vals
    return out


def initial_state(cfg: ScenarioConfig, system: SemidiscreteSystem, t: float = 0.0) -> SpectralState:
    """Initial data from the config; the phase field starts as tanh(x / Cn)."""
    p = system.params
    kind, val = parse_field_spec(cfg.phi, "phi")
    if kind == "tanh":
        phi = system.project(lambda x: np.tanh(x / p.Cn))
    else:
        phi = _coeffs(val, system.size)
    kind, val = parse_field_spec(cfg.psi, "psi")
    if kind == "uniform":
        psi = _coeffs([val], system.size)
    elif kind == "isotherm":
        # closed-form profile over a unit-amplitude interface; Model 1 borrows Model 0's
        flat = an.EquilibriumProfile(1.0, p.Cn)
        model = ModelVariant.MODEL0 if p.model == ModelVariant.MODEL1 else None
        psi = system.project(lambda x: an.steady_psi_profile(x, p, flat, val, model))
    else:
        psi = _coeffs(val, system.size)
    return SpectralState(phi, psi, t)


def controller(cfg: ScenarioConfig) -> ControllerState:
    return ControllerState(dt=cfg.dt_init, dt_min=cfg.dt_min, dt_max=cfg.effective_dt_max)


def tolerances(cfg: ScenarioConfig) -> Tolerances:
    return Tolerances.scaled(cfg.order, cfg.rtol, cfg.atol)


def simulate(cfg: ScenarioConfig, observers=(), state: SpectralState | None = None,
             t_start: float = 0.0) -> tuple[SemidiscreteSystem, RunRecord]:
    system = build_system(cfg)
    state = state or initial_state(cfg, system, t_start)
    rec = advance(system, state, controller(cfg), cfg.t_end, tolerances(cfg), observers,
                  snapshot_times=cfg.snapshots)
    return system, rec


def run_health(rec: RunRecord) -> tuple[float, float]:
    """Largest mass drift of either field and largest one-step energy rise."""
    if not rec.steps:
        return 0.0, 0.0
    drift = 0.0
    init = rec.initial_state
    for name, coeffs in (("mass_phi", init.phi), ("mass_psi", init.psi)):
        m = rec.series(name)
        drift = max(drift, float(np.max(np.abs(m - 2.0 * coeffs[0]))))
    e = rec.series("energy")
    rise = float(np.max(np.diff(e))) if e.size > 1 else 0.0
    return drift, rise


# ----------------------------------------------------------------------
# ill-posedness demonstration

STABILITY_BASE = ScenarioConfig(variant=0, cn=1 / 6, ex=1.0, pi=0.1227, order=128, t_end=20.0)


def run_stability_demo(cfg: ScenarioConfig | None = None, psi_values=(0.012, 0.006)) -> dict:
    """Flat surfactant over a tanh interface, one run per bulk value."""
    cfg = cfg or STABILITY_BASE
    return {psi_b: simulate(cfg.with_(psi=f"uniform:{psi_b!r}"))[1] for psi_b in psi_values}


def stability_bracket(cfg: ScenarioConfig | None = None, stable: float = 0.006,
                      unstable: float = 0.012, iterations: int = 4):
    """Geometric bisection between a stable and a blowing-up bulk loading.

    Returns ``(stable, unstable, history)``.
    """
    cfg = cfg or STABILITY_BASE
    history = []
    for _ in range(iterations):
        mid = math.sqrt(stable * unstable)
        rec = simulate(cfg.with_(psi=f"uniform:{mid!r}"))[1]
        blew = rec.reason == "blow-up"
        history.append((mid, rec.reason))
        if blew:
            unstable = mid
        else:
            stable = mid
    return stable, unstable, history


# ----------------------------------------------------------------------
# isotherm sweeps

ISOTHERM_BASE = ScenarioConfig(cn=1 / 6, ex=1.0, order=96, t_end=200.0)
ISOTHERM_PSI_C = (0.0020, 0.0056, 0.016, 0.035, 0.075)
STEADY_RATE = 1e-8
STEADY_STEPS = 10
DRIFT_GUARD = 1e-3


class SteadyStateMonitor:
    """Observer that stops a run once the rate norm stays small."""

    def __init__(self, threshold=STEADY_RATE, steps=STEADY_STEPS):
        self.threshold = threshold
        self.steps = steps
        self.count = 0
        self.last = math.inf

    def __call__(self, system, state, rec):
        self.last = float(np.max(np.abs(system.rates(state.vector))))
        self.count = self.count + 1 if self.last < self.threshold else 0
        return self.count >= self.steps


@dataclass
class IsothermPoint:
    model: ModelVariant
    psi_c: float
    psi_b: float
    psi0_measured: float = math.nan
    psi0_langmuir: float = math.nan
    status: str = "nonconverged"
    bulk: float = math.nan
    drift: float = math.nan
    rate: float = math.nan
    t_final: float = math.nan
    steps: int = 0
    rejected: int = 0
    phi_b: float = math.nan
    slope: float = math.nan
    mass_drift: float = math.nan
    energy_rise: float = math.nan
    message: str = ""

    @property
    def relative_error(self) -> float:
        return self.psi0_measured / self.psi0_langmuir - 1


def isotherm_config(model, psi_c: float, psi_b: float, base: ScenarioConfig | None = None) -> ScenarioConfig:
    base = base or ISOTHERM_BASE
    variant = ModelVariant.parse(model)
    return base.with_(variant=variant, pi=an.pi_from_adsorption_constant(psi_c, base.ex),
                      sigma=None, psi=f"isotherm:{psi_b!r}")


def run_isotherm_point(model, psi_c: float, psi_b: float, base: ScenarioConfig | None = None) -> IsothermPoint:
    """Relax one grid point to steady state and read off psi(0).

    The Langmuir prediction uses the bulk value measured at the domain
    ends, since the interface draws surfactant out of the closed domain.
    """
    point = IsothermPoint(ModelVariant.parse(model), psi_c, psi_b)
    try:
        cfg = isotherm_config(model, psi_c, psi_b, base)
        mon = SteadyStateMonitor()
        system, rec = simulate(cfg, observers=[mon])
    except (SurfpfError, ValueError, FloatingPointError) as exc:
        point.message = f"{type(exc).__name__}: {exc}"
        return point
    point.steps = rec.n_accepted
    point.rejected = rec.n_rejected
    point.mass_drift, point.energy_rise = run_health(rec)
    point.t_final = rec.final_state.t
    point.rate = mon.last
    point.message = rec.message
    if rec.reason == "blow-up":
        point.status = "blowup"
        return point
    fs = rec.final_state
    point.psi0_measured = float(system.evaluate(fs.psi, 0.0)[0])
    point.bulk = float(np.mean(system.evaluate(fs.psi, [-1.0, 1.0])))
    point.phi_b = float(np.mean(np.abs(system.evaluate(fs.phi, [-1.0, 1.0]))))
    point.slope = cfg.cn * float(system.evaluate_derivative(fs.phi, 0.0)[0])
    if point.model != ModelVariant.MODEL1:
        point.psi0_langmuir = an.langmuir_isotherm(point.bulk, psi_c)
    t, psi0 = rec.series("t"), rec.series("psi0")
    tail = t >= t[-1] / 10
    if tail.sum() >= 2:
        point.drift = float(np.polyfit(t[tail][-max(2, tail.sum() // 10):],
                                       psi0[tail][-max(2, tail.sum() // 10):], 1)[0])
    if rec.reason == "stopped":
        point.status = "ok"
    elif rec.reason == "completed":
        window = psi0[tail]
        spread = window.max() - window.min() if window.size else math.inf
        point.status = "ok" if spread <= DRIFT_GUARD * abs(point.psi0_measured) else "nonconverged"
    return point


def _point_job(args):
    return run_isotherm_point(*args)


def run_isotherm_sweep(model, psi_c_values=ISOTHERM_PSI_C, psi_b_values=None,
                       base: ScenarioConfig | None = None, jobs: int = 1) -> list[IsothermPoint]:
    """Every (psi_c, psi_b) pair as an independent run; sorted output."""
    if psi_b_values is None:
        psi_b_values = np.logspace(-3, -1, 8)
    tasks = [(model, float(c), float(b), base) for c in psi_c_values for b in psi_b_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_point_job, tasks))
    else:
        points = [_point_job(t) for t in tasks]
    return sorted(points, key=lambda p: (p.psi_c, p.psi_b))


# ----------------------------------------------------------------------
# adsorption dynamics

ADSORPTION_BASE = ScenarioConfig(variant=3, cn=1 / 20, ex=1.0, pi=an.pi_from_adsorption_constant(0.016, 1.0),
                                 order=192, t_end=200.0, psi="uniform:0.01")


@dataclass
class AdsorptionRun:
    record: RunRecord
    fit: an.AdsorptionFit | None
    error: str = ""


def run_adsorption(model=3, cfg: ScenarioConfig | None = None, psi_b: float | None = None,
                   psi0_eq: float | None = None) -> AdsorptionRun:
    """Adsorption onto a fresh interface from a uniform bulk."""
    cfg = cfg or ADSORPTION_BASE
    cfg = cfg.with_(variant=ModelVariant.parse(model))
    if psi_b is not None:
        cfg = cfg.with_(psi=f"uniform:{psi_b!r}")
    kind, val = parse_field_spec(cfg.psi, "psi")
    if kind != "uniform":
        raise ConfigError("adsorption runs start from a uniform surfactant field")
    _, rec = simulate(cfg)
    t, psi0 = rec.series("t"), rec.series("psi0")
    try:
        fit = an.fit_adsorption(t, psi0, psi0_eq=psi0_eq, psi_b=val)
    except InsufficientData as exc:
        return AdsorptionRun(rec, None, str(exc))
    return AdsorptionRun(rec, fit)


# ----------------------------------------------------------------------
# convergence study

def traveling_wave(x, t, u: float, Cn: float):
    return np.tanh((np.asarray(x) - u * t) / Cn)


@dataclass
class ConvergenceRow:
    eps: float
    order: int
    error: float
    steps: int
    rejected: int
    reason: str


CONVERGENCE_BASE = ScenarioConfig(variant=0, cn=0.1, pe_phi=1.0, advection=0.25, t_end=0.5, psi="uniform:0.0")


def _tolerance_config(cfg, eps):
    return cfg.with_(rtol=eps, atol=eps * 1e-2)


def run_traveling_wave(cfg: ScenarioConfig, t0: float = -0.5) -> ConvergenceRow:
    """Max-in-time relative L2 error against the exact traveling wave."""
    system = build_system(cfg)
    Cn, u = cfg.cn, cfg.advection
    w = system.basis.rule.weights
    x = system.nodes
    state = SpectralState(system.project(lambda s: traveling_wave(s, t0, u, Cn)), np.zeros(system.size), t0)
    worst = [0.0]

    def err(sys_, st, rec):
        exact = traveling_wave(x, st.t, u, Cn)
        e = sys_.basis.synthesize(st.phi) - exact
        worst[0] = max(worst[0], math.sqrt((e * e) @ w / ((exact * exact) @ w)))

    err(system, state, None)
    ctrl = ControllerState(dt=cfg.dt_init, dt_min=cfg.dt_min,
                           dt_max=cfg.dt_max if cfg.dt_max > 0 else (cfg.t_end - t0) / 10)
    rec = advance(system, state, ctrl, cfg.t_end, tolerances(cfg), [err])
    return ConvergenceRow(cfg.rtol, cfg.order, worst[0], rec.n_accepted, rec.n_rejected, rec.reason)


def run_convergence(orders=(24, 32, 48, 64, 96), eps_values=(1e-4, 1e-6, 1e-8),
                    cfg: ScenarioConfig | None = None, t0: float = -0.5) -> list[ConvergenceRow]:
    """Error table over (tolerance, order) for the advected interface."""
    cfg = cfg or CONVERGENCE_BASE
    rows = []
    for eps in eps_values:
        for N in orders:
            rows.append(run_traveling_wave(_tolerance_config(cfg, eps).with_(order=N), t0))
    return rows


def run_coupled_convergence(orders=(24, 32, 48, 64), eps_values=(1e-6,), reference=(400, 1e-10),
                            cfg: ScenarioConfig | None = None, t0: float = -0.5, samples: int = 11):
    """Coupled surfactant case measured against a high-resolution run.

    Errors are taken over ``samples`` common output times.  The default
    reference is expensive (minutes to hours); pass a cheaper one for
    quick checks.
    """
    cfg = cfg or CONVERGENCE_BASE.with_(variant=3, pi=0.1, ex=1.0, pe_psi=1.0, psi="uniform:0.001")
    times = tuple(np.linspace(t0, cfg.t_end, samples)[1:])

    def run(N, eps):
        c = _tolerance_config(cfg, eps).with_(order=N, snapshots=times)
        system = build_system(c)
        st = initial_state(c, system, t0)
        ctrl = ControllerState(dt=c.dt_init, dt_min=c.dt_min, dt_max=(c.t_end - t0) / 10)
        rec = advance(system, st, ctrl, c.t_end, tolerances(c), snapshot_times=times)
        return system, rec

    ref_sys, ref = run(*reference)
    xq, wq = ref_sys.nodes, ref_sys.basis.rule.weights
    ref_vals = [ref_sys.basis.synthesize(s.phi) for s in ref.snapshots]
    rows = []
    for eps in eps_values:
        for N in orders:
            system, rec = run(N, eps)
            worst = 0.0
            for s, r in zip(rec.snapshots, ref_vals):
                e = system.evaluate(s.phi, xq) - r
                worst = max(worst, math.sqrt((e * e) @ wq / ((r * r) @ wq)))
            rows.append(ConvergenceRow(eps, N, worst, rec.n_accepted, rec.n_rejected, rec.reason))
    return rows
