"""Legendre-Galerkin solver for one-dimensional phase-field surfactant models."""
from .assembly import SemidiscreteSystem, SpectralState
from .basis import LegendreBasis, SpectralFilter
from .errors import (
    BlowUp,
    ConfigError,
    DomainViolation,
    InsufficientData,
    NewtonDivergence,
    NoConvergence,
    SupersaturatedBulk,
    SurfpfError,
    UnsupportedVariant,
)
from .models import ModelParams, ModelVariant
from .stepper import ControllerState, RunRecord, Tolerances, advance

__version__ = "0.1.0"
