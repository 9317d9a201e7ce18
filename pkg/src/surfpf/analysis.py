"""Closed-form equilibrium, isotherm and stability results, and adsorption fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import InsufficientData, NoConvergence, SupersaturatedBulk, UnsupportedVariant
from .models import ModelParams, ModelVariant


# ----------------------------------------------------------------------
# planar equilibria at constant surfactant loading

@dataclass(frozen=True)
class EquilibriumProfile:
    """phi(x) = phi_b tanh(x / width)."""

    phi_b: float
    width: float

    def __call__(self, x):
        return self.phi_b * np.tanh(np.asarray(x, float) / self.width)

    def derivative(self, x):
        return self.phi_b / self.width / np.cosh(np.asarray(x, float) / self.width) ** 2

    def second_derivative(self, x):
        z = np.asarray(x, float) / self.width
        return -2 * self.phi_b / self.width**2 * np.tanh(z) / np.cosh(z) ** 2


def bulk_phase_squared(p: ModelParams, psi_b: float) -> float:
    m = p.model
    if m in (ModelVariant.MODEL0, ModelVariant.MODEL1):
        return 1 - psi_b / (2 * p.Ex)
    if m == ModelVariant.MODEL2:
        return 1 - (1 + 1 / p.Ex) * psi_b / 2
    return (1 - (1 + 1 / (2 * p.Ex)) * psi_b) / (1 - psi_b)


def equilibrium_profile(p: ModelParams, psi_b: float) -> EquilibriumProfile:
    """Planar phase-field equilibrium for surfactant held at ``psi_b``.

    Model 3 carries the loading on the cubic term rather than on the
    gradient term, so its width scales as ``1 / sqrt(1 - psi_b)``.
    """
    if not 0 <= psi_b < 1:
        raise ValueError("psi_b must lie in [0, 1)")
    phib2 = bulk_phase_squared(p, psi_b)
    if phib2 <= 0:
        raise SupersaturatedBulk(f"phi_b^2 = {phib2:.4g} <= 0 at psi_b = {psi_b}")
    phi_b = math.sqrt(phib2)
    m = p.model
    if m in (ModelVariant.MODEL0, ModelVariant.MODEL1):
        width = p.Cn * math.sqrt(1 - psi_b) / phi_b
    elif m == ModelVariant.MODEL2:
        width = p.Cn / phi_b
    else:
        width = p.Cn / (phi_b * math.sqrt(1 - psi_b))
    return EquilibriumProfile(phi_b, width)


def interface_slope(p: ModelParams, psi_b: float) -> float:
    """``Cn * phi'(0)`` of the planar equilibrium."""
    prof = equilibrium_profile(p, psi_b)
    return p.Cn * prof.phi_b / prof.width


# ----------------------------------------------------------------------
# isotherms

def adsorption_constant(Pi: float, Ex: float) -> float:
    """Langmuir adsorption constant psi_c = exp(-(1 + 1/Ex) / (4 Pi))."""
    if Pi <= 0 or Ex <= 0:
        raise ValueError("Pi and Ex must be positive")
    return math.exp(-(1 + 1 / Ex) / (4 * Pi))


def pi_from_adsorption_constant(psi_c: float, Ex: float) -> float:
    if not 0 < psi_c < 1:
        raise ValueError("psi_c must lie in (0, 1)")
    return (1 + 1 / Ex) / (-4 * math.log(psi_c))


def langmuir_isotherm(psi_b, psi_c):
    psi_b = np.asarray(psi_b, float)
    out = psi_b / (psi_b + psi_c)
    return out if out.ndim else float(out)


def frumkin_solve(psi_b: float, psi_c: float, alpha: float, tol: float = 1e-12) -> float:
    """Interface loading from psi0 = psi_b / (psi_b + psi_c exp(-alpha psi0)).

    When the lateral attraction is strong enough to allow several
    solutions, the lowest one is returned.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if psi_b <= 0:
        return 0.0

    def g(s):
        return s - psi_b / (psi_b + psi_c * math.exp(-alpha * s))

    grid = np.linspace(0.0, 1.0, 201)
    vals = np.array([g(s) for s in grid])
    idx = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if idx.size == 0:
        raise NoConvergence("no sign change of the Frumkin residual in [0, 1]")
    i = idx[0]
    root, info = optimize.brentq(g, grid[i], grid[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps,
                                 full_output=True)
    if not info.converged:
        raise NoConvergence(info.flag)
    return float(root)


def adsorption_energy_difference(p: ModelParams, phi, dphi, phi_b: float, model=None):
    """B - B_b for the steady surfactant profile (Model 1 has no closed form)."""
    m = p.model if model is None else ModelVariant.parse(model)
    phi = np.asarray(phi, float)
    if m == ModelVariant.MODEL0:
        return -(p.Cn**2) / 4 * np.asarray(dphi, float) ** 2
    if m == ModelVariant.MODEL2:
        return -(phi_b**2 - phi**2) / 4
    if m == ModelVariant.MODEL3:
        return -((phi_b**2 - phi**2) * (2 - phi_b**2 - phi**2)) / 4
    raise UnsupportedVariant("Model 1 has no closed-form steady surfactant profile")


def local_adsorption_constant(x, p: ModelParams, profile: EquilibriumProfile, model=None):
    phi = profile(x)
    dB = adsorption_energy_difference(p, phi, profile.derivative(x), profile.phi_b, model)
    return np.exp((dB - (profile.phi_b**2 - phi**2) / (4 * p.Ex)) / p.Pi)


def steady_psi_profile(x, p: ModelParams, profile: EquilibriumProfile, psi_b: float, model=None):
    """Steady surfactant profile over a fixed phase-field profile.

    ``model`` overrides which adsorption term is used (Model 1 runs borrow
    Model 0's to get a closed-form starting profile).
    """
    psi_c = local_adsorption_constant(x, p, profile, model)
    return psi_b / (psi_b + psi_c * (1 - psi_b))


# ----------------------------------------------------------------------
# frozen-coefficient stability

def lambda2_coefficient(psi_eq0, dphi_eq0, Cn: float, Pi: float, Pe_psi: float = 1.0):
    """Coefficient of omega^2 in the unstable eigenvalue branch."""
    return (Cn**2 / 2 * np.asarray(psi_eq0) * np.asarray(dphi_eq0) ** 2 - Pi) / Pe_psi


def instability_threshold(Pi: float, Ex: float):
    """Bulk loading above which the baseline model is expected ill-posed.

    Returns ``None`` when ``Pi >= 1/2`` (no threshold).
    """
    if Pi >= 0.5:
        return None
    return 2 * Pi / (1 - 2 * Pi) * adsorption_constant(Pi, Ex)


@dataclass
class StabilityReport:
    coefficient: float
    threshold: float | None
    ill_posed: bool
    inputs: dict = field(default_factory=dict)


def stability_report(p: ModelParams, psi_eq0: float, dphi_eq0: float | None = None) -> StabilityReport:
    if dphi_eq0 is None:
        dphi_eq0 = 1 / p.Cn
    c = float(lambda2_coefficient(psi_eq0, dphi_eq0, p.Cn, p.Pi, p.Pe_psi))
    return StabilityReport(
        coefficient=c,
        threshold=instability_threshold(p.Pi, p.Ex),
        ill_posed=c > 0,
        inputs=dict(Pi=p.Pi, Ex=p.Ex, Cn=p.Cn, Pe_psi=p.Pe_psi, psi_eq0=psi_eq0, dphi_eq0=dphi_eq0),
    )


# ----------------------------------------------------------------------
# adsorption dynamics fits

MIN_WINDOW = 5


@dataclass
class LinearFit:
    intercept: float
    slope: float
    r2: float
    residual: float


def _linfit(x, y) -> LinearFit:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if x.size < MIN_WINDOW:
        raise InsufficientData(f"need at least {MIN_WINDOW} samples, got {x.size}")
    slope, intercept = np.polyfit(x, y, 1)
    r = y - (intercept + slope * x)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(r @ r) / ss if ss > 0 else 1.0
    return LinearFit(float(intercept), float(slope), r2, float(np.sqrt(r @ r)))


def fit_power_law(t, y):
    """Fit ``y = c + k t^p`` with free exponent; returns ``(p, c, k, r2)``."""
    t, y = np.asarray(t, float), np.asarray(y, float)
    if t.size < MIN_WINDOW:
        raise InsufficientData(f"need at least {MIN_WINDOW} samples, got {t.size}")
    scale = t.max()

    def sse(p):
        f = _linfit((t / scale) ** p, y)
        return f.residual

    res = optimize.minimize_scalar(sse, bounds=(0.05, 2.0), method="bounded",
                                   options={"xatol": 1e-8})
    p = float(res.x)
    f = _linfit((t / scale) ** p, y)
    return p, f.intercept, f.slope / scale**p, f.r2


@dataclass
class AdsorptionFit:
    tau0: float
    tau1: float
    linear_slope: float
    mid_exponent: float
    psi0_eq: float
    eq_converged: bool
    windows: dict
    linear: LinearFit
    mid: LinearFit
    late: LinearFit
    mid_power_r2: float


def estimate_equilibrium(psi0, drift: float = 1e-3, t=None):
    """Final value of the series and whether its tail varies < ``drift``.

    With sample times the tail is the last decade in time (``t >= t_end/10``),
    otherwise the last tenth of the samples.
    """
    psi0 = np.asarray(psi0, float)
    if t is None:
        tail = psi0[-max(2, psi0.size // 10):]
    else:
        t = np.asarray(t, float)
        tail = psi0[t >= t[-1] / 10]
    final = float(psi0[-1])
    ok = final > 0 and (tail.max() - tail.min()) <= drift * abs(final)
    return final, bool(ok)


def fit_adsorption(t, psi0, psi0_eq: float | None = None, psi_b: float | None = None) -> AdsorptionFit:
    """Least-squares fits of the three adsorption regimes.

    Windows: the ultra-short window holds the samples before ``psi0`` first
    exceeds ``1.5 psi_b``; the mid window runs from twice the end time of
    the ultra-short window until ``psi0`` reaches half its equilibrium; the
    late window holds the samples above 80% of equilibrium.
    """
    t, psi0 = np.asarray(t, float), np.asarray(psi0, float)
    if t.size < 3 * MIN_WINDOW:
        raise InsufficientData("series too short")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    eq_ok = True
    if psi0_eq is None:
        psi0_eq, eq_ok = estimate_equilibrium(psi0, t=t)
    if not psi0_eq > 0:
        raise InsufficientData("equilibrium interface loading must be positive")
    if psi_b is None:
        psi_b = float(psi0[0])
    if not psi_b > 0:
        raise InsufficientData("bulk loading must be positive")

    above = np.flatnonzero(psi0 > 1.5 * psi_b)
    n_ultra = int(above[0]) if above.size else t.size
    ultra = np.arange(n_ultra)
    t_ultra_end = t[max(n_ultra - 1, 0)]
    mid = np.flatnonzero((t >= 2 * t_ultra_end) & (psi0 <= 0.5 * psi0_eq))
    late = np.flatnonzero(psi0 > 0.8 * psi0_eq)

    lin = _linfit(t[ultra], psi0[ultra] / psi_b)
    midfit = _linfit(np.sqrt(t[mid]), psi0[mid])
    p, _, _, pr2 = fit_power_law(t[mid], psi0[mid])
    latefit = _linfit(t[late] ** -0.5, psi0[late] / psi0_eq)
    tau1 = 1.0 / midfit.slope**2 if midfit.slope > 0 else math.inf
    return AdsorptionFit(
        tau0=latefit.slope**2,
        tau1=tau1,
        linear_slope=lin.slope,
        mid_exponent=p,
        psi0_eq=float(psi0_eq),
        eq_converged=eq_ok,
        windows={"ultra": (float(t[ultra[0]]), float(t[ultra[-1]])),
                 "mid": (float(t[mid[0]]), float(t[mid[-1]])),
                 "late": (float(t[late[0]]), float(t[late[-1]]))},
        linear=lin, mid=midfit, late=latefit, mid_power_r2=pr2,
    )
