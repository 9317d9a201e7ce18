"""Pointwise thermodynamics of the phase-field surfactant models.

Four free energies are supported.  ``MODEL0`` is the baseline with the
square-gradient adsorption term ``-Cn^2/4 psi |phi'|^2``.  ``MODEL1`` adds
the regular-solution and square-gradient terms to the surfactant energy.
``MODEL2`` and ``MODEL3`` replace the adsorption term by the
derivative-free ``-psi (1 - phi^2) / 4`` and ``-psi (1 - phi^2)^2 / 4``.

All functions broadcast over numpy arrays.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainViolation

PSI_CLAMP = 1e-14
# how far outside [0, 1] a surfactant value may stray before it is an error
PSI_VIOLATION = 1e-8


class ModelVariant(enum.IntEnum):
    MODEL0 = 0
    MODEL1 = 1
    MODEL2 = 2
    MODEL3 = 3

    @classmethod
    def parse(cls, value) -> "ModelVariant":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            v = value.strip().lower().removeprefix("model")
            return cls(int(v))
        return cls(int(value))


@dataclass(frozen=True)
class ModelParams:
    """Nondimensional parameters of one model variant.

    ``sigma`` only applies to Model 1, where it defaults to ``8 Pi``
    (the largest value keeping the bulk surfactant energy convex).
    """

    model: ModelVariant = ModelVariant.MODEL0
    Cn: float = 1.0 / 6.0
    Ex: float = 1.0
    Pi: float = 0.1227
    sigma: float | None = None
    Pe_phi: float = 1.0
    Pe_psi: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "model", ModelVariant.parse(self.model))
        for name in ("Cn", "Ex", "Pi", "Pe_phi", "Pe_psi"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if self.model == ModelVariant.MODEL1:
            if self.sigma is None:
                object.__setattr__(self, "sigma", 8.0 * self.Pi)
            if self.sigma < 0:
                raise ValueError("sigma must be nonnegative")
            if self.sigma > 8.0 * self.Pi * (1 + 1e-12):
                warnings.warn(
                    f"sigma = {self.sigma} exceeds 8 Pi = {8 * self.Pi}; the bulk "
                    "surfactant energy is no longer convex",
                    stacklevel=3,
                )
        else:
            if self.sigma not in (None, 0, 0.0):
                raise ValueError("sigma is only meaningful for Model 1")
            object.__setattr__(self, "sigma", 0.0)

    def with_(self, **changes) -> "ModelParams":
        if "model" in changes and ModelVariant.parse(changes["model"]) != ModelVariant.MODEL1:
            changes.setdefault("sigma", None)
        elif "Pi" in changes and self.model == ModelVariant.MODEL1 and "sigma" not in changes:
            changes["sigma"] = None
        return replace(self, **changes)


@dataclass
class FieldSample:
    """Pointwise phi, psi and their first and second derivatives."""

    phi: np.ndarray | float
    psi: np.ndarray | float
    dphi: np.ndarray | float = 0.0
    dpsi: np.ndarray | float = 0.0
    d2phi: np.ndarray | float = 0.0
    d2psi: np.ndarray | float = 0.0


def clamp_psi(psi, strict: bool = True):
    """Clamp psi into [1e-14, 1 - 1e-14] for logarithm evaluation.

    Returns ``(clamped, flagged)``.  With ``strict`` a value further than
    ``PSI_VIOLATION`` outside [0, 1] raises :class:`DomainViolation`.
    """
    psi = np.asarray(psi, dtype=float)
    if strict and np.any((psi < -PSI_VIOLATION) | (psi > 1 + PSI_VIOLATION)):
        raise DomainViolation(
            f"surfactant fraction outside [0, 1]: min {psi.min():.3e}, max {psi.max():.3e}"
        )
    clamped = np.clip(psi, PSI_CLAMP, 1 - PSI_CLAMP)
    return clamped, bool(np.any(clamped != psi))


def _mixing_entropy(psi):
    return psi * np.log(psi) + (1 - psi) * np.log1p(-psi)


def effective_ex(p: ModelParams) -> float:
    """Ex as seen by Model 2 once its adsorption term is folded into F_ex."""
    if p.model == ModelVariant.MODEL2:
        return 1.0 / (1.0 / p.Ex + 1.0)
    return p.Ex


def free_energy_density(p: ModelParams, s: FieldSample, strict: bool = True):
    phi, dphi = np.asarray(s.phi, float), np.asarray(s.dphi, float)
    psi_raw = np.asarray(s.psi, float)
    psi, _ = clamp_psi(psi_raw, strict)
    Cn2 = p.Cn**2
    f_phi = -(phi**2) / 2 + phi**4 / 4 + Cn2 / 4 * dphi**2
    f_psi = p.Pi * _mixing_entropy(psi)
    m = p.model
    if m == ModelVariant.MODEL1:
        f_psi = f_psi + p.sigma / 4 * psi_raw * (1 - psi_raw) + Cn2 / 4 * np.asarray(s.dpsi, float) ** 2
    if m in (ModelVariant.MODEL0, ModelVariant.MODEL1):
        f_1 = -Cn2 / 4 * psi_raw * dphi**2
    elif m == ModelVariant.MODEL2:
        f_1 = -psi_raw * (1 - phi**2) / 4
    else:
        f_1 = -psi_raw * (1 - phi**2) ** 2 / 4
    f_ex = psi_raw * phi**2 / (4 * p.Ex)
    return f_phi + f_psi + f_1 + f_ex


def mu_phi(p: ModelParams, s: FieldSample):
    phi, psi = np.asarray(s.phi, float), np.asarray(s.psi, float)
    Cn2 = p.Cn**2
    base = -phi + phi**3 - Cn2 / 2 * np.asarray(s.d2phi, float) + psi * phi / (2 * p.Ex)
    m = p.model
    if m in (ModelVariant.MODEL0, ModelVariant.MODEL1):
        return base + Cn2 / 2 * (psi * s.d2phi + np.asarray(s.dpsi, float) * s.dphi)
    if m == ModelVariant.MODEL2:
        return base + psi * phi / 2
    return base + (1 - phi**2) * psi * phi


def psi_drift_potential(p: ModelParams, s: FieldSample):
    """Non-logarithmic part of the surfactant chemical potential."""
    phi = np.asarray(s.phi, float)
    m = p.model
    if m == ModelVariant.MODEL2:
        return phi**2 / (4 * effective_ex(p))
    excess = phi**2 / (4 * p.Ex)
    if m == ModelVariant.MODEL3:
        return -((1 - phi**2) ** 2) / 4 + excess
    out = -(p.Cn**2) / 4 * np.asarray(s.dphi, float) ** 2 + excess
    if m == ModelVariant.MODEL1:
        out = out - p.Cn**2 / 2 * np.asarray(s.d2psi, float) - p.sigma / 2 * np.asarray(s.psi, float)
    return out


def mu_psi(p: ModelParams, s: FieldSample, strict: bool = True):
    psi, _ = clamp_psi(s.psi, strict)
    return p.Pi * np.log(psi / (1 - psi)) + psi_drift_potential(p, s)


def bulk_convexity(Pi: float, sigma: float, psi):
    """Second psi-derivative of the non-gradient Model 1 surfactant energy."""
    psi = np.asarray(psi, float)
    return Pi / (psi * (1 - psi)) - sigma / 2


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional coefficients of the original free energy and transport."""

    A: float
    B: float
    kappa: float
    epsilon: float
    W: float
    kT: float
    L: float
    u0: float
    M_phi: float
    m_psi: float

    @property
    def phi0(self) -> float:
        return math.sqrt(self.A / self.B)

    @property
    def zeta(self) -> float:
        return math.sqrt(2 * self.kappa / self.A)


def nondimensionalize(pp: PhysicalParams, model=ModelVariant.MODEL0, sigma=None) -> ModelParams:
    for name, v in vars(pp).items():
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v!r}")
    if abs(pp.epsilon - pp.kappa) > 1e-12 * max(abs(pp.kappa), abs(pp.epsilon)):
        raise ValueError("the scaling assumes epsilon == kappa")
    zeta, phi0 = pp.zeta, pp.phi0
    return ModelParams(
        model=model,
        Cn=zeta / pp.L,
        Ex=pp.epsilon / (pp.W * zeta**2),
        Pi=pp.kT / (pp.A * phi0**2),
        sigma=sigma,
        Pe_phi=pp.L * pp.u0 / (pp.M_phi * pp.A),
        Pe_psi=pp.L * pp.u0 / (pp.m_psi * pp.A * phi0**2),
    )
