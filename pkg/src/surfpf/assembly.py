"""Semi-discrete Legendre-Galerkin system for the phase-field surfactant model.

The state is a pair of modal vectors ``(phi_hat, psi_hat)``.  Rates are
computed from the weak forms

    (chi, Phi)   = (chi, f(phi, psi)) + (chi', g(psi) phi')
    (chi, phi_t) = -1/Pe_phi (chi', Phi') - (chi, u phi')
    (chi, psi_t) = -1/Pe_psi (chi', Pi psi' + psi (1 - psi) Psi')

with every inner product evaluated by Gauss-Legendre quadrature and every
solve done against the filtered (diagonal) mass matrix.  Routines that
take a state vector accept stacked vectors ``(..., 2 (N+1))`` as well,
which is what the numerical Jacobian uses.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import LegendreBasis, SpectralFilter, differentiate, legendre_table
from .models import FieldSample, ModelParams, ModelVariant, free_energy_density, psi_drift_potential


@dataclass
class SpectralState:
    phi: np.ndarray
    psi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float)
        if self.phi.shape != self.psi.shape:
            raise ValueError("phi and psi expansions must have equal length")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.phi, self.psi])

    @classmethod
    def from_vector(cls, u, t: float = 0.0) -> "SpectralState":
        u = np.asarray(u, dtype=float)
        k = u.shape[-1] // 2
        return cls(u[:k].copy(), u[k:].copy(), t)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.psi)))


@dataclass(frozen=True)
class SemidiscreteSystem:
    params: ModelParams
    basis: LegendreBasis
    filter: SpectralFilter = field(default_factory=SpectralFilter)
    u: float = 0.0

    def __post_init__(self):
        b = self.basis
        if b.rule.size < b.order + 1:
            raise ValueError("quadrature needs at least N+1 points")
        w = b.rule.weights
        theta = self.filter.factors(b.order)
        pre = {
            # quadrature-weighted test function tables
            "WP": w[:, None] * b.P,
            "WdP": w[:, None] * b.dP,
            "minv": theta / b.mass,
            "proj": w[:, None] * b.P / b.mass,
        }
        # nodal values -> derivative of their projection, at the nodes
        pre["proj_deriv"] = pre["proj"] @ b.dP.T
        D = differentiate(np.eye(b.size))
        pre["d2P"] = (D @ D) @ b.P.T
        object.__setattr__(self, "_pre", pre)

    @classmethod
    def build(cls, params: ModelParams, order: int, npoints: int | None = None,
              filter: SpectralFilter | None = None, u: float = 0.0) -> "SemidiscreteSystem":
        return cls(params, LegendreBasis.with_rule(order, npoints),
                   SpectralFilter() if filter is None else filter, u)

    @property
    def order(self) -> int:
        return self.basis.order

    @property
    def size(self) -> int:
        return self.basis.size

    @property
    def nodes(self) -> np.ndarray:
        return self.basis.rule.nodes

    @property
    def filtered_mass_inverse(self) -> np.ndarray:
        return self._pre["minv"]

    # ------------------------------------------------------------------
    def split(self, u):
        u = np.asarray(u, dtype=float)
        k = self.size
        return u[..., :k], u[..., k:]

    def _nodal(self, phi_hat, psi_hat):
        b = self.basis
        return phi_hat @ b.P.T, phi_hat @ b.dP.T, psi_hat @ b.P.T, psi_hat @ b.dP.T

    def sample(self, state_or_vector) -> FieldSample:
        """Field values and derivatives at the quadrature nodes."""
        phi_hat, psi_hat = self._coeffs(state_or_vector)
        phi, dphi, psi, dpsi = self._nodal(phi_hat, psi_hat)
        s = FieldSample(phi, psi, dphi, dpsi)
        if self.params.model == ModelVariant.MODEL1:
            s.d2psi = psi_hat @ self._pre["d2P"]
        return s

    def _coeffs(self, x):
        if isinstance(x, SpectralState):
            return x.phi, x.psi
        return self.split(x)

    # ------------------------------------------------------------------
    def potential_load(self, phi, dphi, psi):
        """Right-hand side ``a`` of the potential equation from nodal data."""
        p = self.params
        m = p.model
        f = -phi + phi**3 + psi * phi / (2 * p.Ex)
        if m == ModelVariant.MODEL2:
            f = f + psi * phi / 2
        elif m == ModelVariant.MODEL3:
            f = f + (1 - phi**2) * psi * phi
        if m in (ModelVariant.MODEL0, ModelVariant.MODEL1):
            g = p.Cn**2 / 2 * (1 - psi) * dphi
        else:
            g = p.Cn**2 / 2 * dphi
        return f @ self._pre["WP"] + g @ self._pre["WdP"]

    def potential_solve(self, state) -> np.ndarray:
        """Modal coefficients of the phase-field chemical potential."""
        phi_hat, psi_hat = self._coeffs(state)
        phi, dphi, psi, _ = self._nodal(phi_hat, psi_hat)
        return self._pre["minv"] * self.potential_load(phi, dphi, psi)

    def _rates(self, phi_hat, psi_hat):
        p = self.params
        b = self.basis
        pre = self._pre
        phi, dphi, psi, dpsi = self._nodal(phi_hat, psi_hat)

        Phi_hat = pre["minv"] * self.potential_load(phi, dphi, psi)
        dPhi = Phi_hat @ b.dP.T
        alpha = -(dPhi @ pre["WdP"]) / p.Pe_phi
        if self.u != 0.0:
            alpha = alpha - self.u * (dphi @ pre["WP"])

        # Model 1's -Cn^2/2 psi'' enters weakly so that psi' = 0 holds at the
        # walls; differentiating psi twice would leave that condition unset
        s = FieldSample(phi, psi, dphi, dpsi)
        Psi = psi_drift_potential(p, s)
        dPsi = Psi @ pre["proj_deriv"]
        if p.model == ModelVariant.MODEL1:
            lap = (p.Cn**2 / 2) * (dpsi @ pre["WdP"]) / b.mass
            dPsi = dPsi + lap @ b.dP.T
        flux = p.Pi * dpsi + psi * (1 - psi) * dPsi
        beta = -(flux @ pre["WdP"]) / p.Pe_psi
        return pre["minv"] * alpha, pre["minv"] * beta

    def phi_rate(self, state) -> np.ndarray:
        return self._rates(*self._coeffs(state))[0]

    def psi_rate(self, state) -> np.ndarray:
        return self._rates(*self._coeffs(state))[1]

    def rates(self, u) -> np.ndarray:
        """Concatenated ``(phi_hat', psi_hat')`` for state vector(s) ``u``."""
        a, b = self._rates(*self._coeffs(u))
        return np.concatenate([a, b], axis=-1)

    # ------------------------------------------------------------------
    def total_mass(self, state):
        phi_hat, psi_hat = self._coeffs(state)
        return 2.0 * phi_hat[..., 0], 2.0 * psi_hat[..., 0]

    def total_energy(self, state, strict: bool = True) -> float:
        s = self.sample(state)
        dens = free_energy_density(self.params, s, strict=strict)
        return float(dens @ self.basis.rule.weights)

    def evaluate(self, coeffs, x):
        """Evaluate an expansion at arbitrary points."""
        P, _ = legendre_table(self.order, np.atleast_1d(x))
        return np.asarray(coeffs) @ P.T

    def evaluate_derivative(self, coeffs, x):
        _, dP = legendre_table(self.order, np.atleast_1d(x))
        return np.asarray(coeffs) @ dP.T

    def project(self, func) -> np.ndarray:
        """Modal coefficients of a callable sampled at the quadrature nodes."""
        return self.basis.analyze(func(self.nodes))

    def state_from_functions(self, phi, psi, t: float = 0.0) -> SpectralState:
        return SpectralState(self.project(phi), self.project(psi), t)
