"""Exception types raised by the solver and analysis routines."""


class SurfpfError(Exception):
    pass


class DomainViolation(SurfpfError, ValueError):
    """Surfactant fraction left (0, 1) by more than the clamp allows."""


class NewtonDivergence(SurfpfError):
    """Implicit solve failed: iteration cap hit or contraction estimate >= 1."""


class BlowUp(SurfpfError):
    """The simulated state became non-physical or non-finite."""


class SupersaturatedBulk(SurfpfError, ValueError):
    pass


class UnsupportedVariant(SurfpfError, ValueError):
    pass


class NoConvergence(SurfpfError):
    pass


class InsufficientData(SurfpfError, ValueError):
    pass


class ConfigError(SurfpfError, ValueError):
    pass
