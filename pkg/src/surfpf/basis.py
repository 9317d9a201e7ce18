"""Legendre polynomial machinery on [-1, 1].

Modal coefficient vectors live on the last axis of an array, so every
routine here also accepts a stack of expansions (shape ``(..., N+1)``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, values):
        return values @ self.weights


def legendre_table(order: int, x):
    """Return ``(P, dP)`` with ``P[q, n] = P_n(x_q)`` for n = 0..order."""
    x = np.asarray(x, dtype=float)
    P = np.zeros((x.size, order + 1))
    dP = np.zeros_like(P)
    P[:, 0] = 1.0
    if order >= 1:
        P[:, 1] = x
        dP[:, 1] = 1.0
    for n in range(1, order):
        P[:, n + 1] = ((2 * n + 1) * x * P[:, n] - n * P[:, n - 1]) / (n + 1)
        # P'_{n+1} = P'_{n-1} + (2n+1) P_n
        dP[:, n + 1] = dP[:, n - 1] + (2 * n + 1) * P[:, n]
    return P, dP


def gauss_legendre_rule(n: int, tol: float = 1e-15, maxiter: int = 100) -> QuadratureRule:
    """n-point Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.

    Nodes are Newton-refined roots of P_n starting from the Chebyshev
    points; weights follow from ``2 / ((1 - x^2) P_n'(x)^2)``.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"quadrature size must be a positive integer, got {n!r}")
    n = int(n)
    k = np.arange(1, n + 1)
    x = -np.cos((2 * k - 1) * np.pi / (2 * n))
    for _ in range(maxiter):
        P, dP = legendre_table(n, x)
        dx = P[:, n] / dP[:, n]
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    P, dP = legendre_table(n, x)
    w = 2.0 / ((1.0 - x**2) * dP[:, n] ** 2)
    # enforce the exact symmetry of the rule
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(nodes=x, weights=w)


@dataclass(frozen=True)
class LegendreBasis:
    """Legendre polynomials P_0..P_N tabulated on a quadrature rule."""

    order: int
    rule: QuadratureRule
    P: np.ndarray = field(init=False, repr=False)
    dP: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be nonnegative")
        P, dP = legendre_table(self.order, self.rule.nodes)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "dP", dP)

    @classmethod
    def with_rule(cls, order: int, npoints: int | None = None) -> "LegendreBasis":
        if npoints is None:
            npoints = 2 * (order + 1)
        return cls(order, gauss_legendre_rule(npoints))

    @property
    def size(self) -> int:
        return self.order + 1

    @property
    def mass(self) -> np.ndarray:
        """Diagonal of the mass matrix, ||P_i||^2 = 2 / (2i + 1)."""
        return mass_diagonal(self.order)

    def synthesize(self, coeffs):
        return synthesize(coeffs, self)

    def analyze(self, values):
        return analyze(values, self)


def mass_diagonal(order: int) -> np.ndarray:
    return 2.0 / (2.0 * np.arange(order + 1) + 1.0)


def synthesize(coeffs, basis: LegendreBasis):
    """Nodal values sum_n c_n P_n(x_q) at every quadrature node."""
    return np.asarray(coeffs) @ basis.P.T


def synthesize_derivative(coeffs, basis: LegendreBasis):
    return np.asarray(coeffs) @ basis.dP.T


def analyze(values, basis: LegendreBasis):
    """Project nodal values onto P_0..P_N by quadrature."""
    w = basis.rule.weights
    return (np.asarray(values) * w) @ basis.P / basis.mass


def differentiate(coeffs):
    """Modal coefficients of the derivative of a Legendre expansion.

    Uses the backward recurrence
    ``b_{n-1} = (2n - 1) (a_n + b_{n+1} / (2n + 3))``; the last entry of
    the result is zero.
    """
    a = np.asarray(coeffs, dtype=float)
    N = a.shape[-1] - 1
    b = np.zeros_like(a)
    if N < 1:
        return b
    b[..., N - 1] = (2 * N - 1) * a[..., N]
    for n in range(N - 1, 0, -1):
        b[..., n - 1] = (2 * n - 1) * (a[..., n] + b[..., n + 1] / (2 * n + 3))
    return b


@dataclass(frozen=True)
class SpectralFilter:
    """Exponential modal filter exp(-alpha ((eta - eta_c) / (1 - eta_c))^p)."""

    cutoff: float = 0.25
    order: int = 12
    strength: float = 36.0

    def __post_init__(self):
        if not 0.0 <= self.cutoff < 1.0:
            raise ValueError("filter cutoff must lie in [0, 1)")
        if self.order <= 0 or self.order % 2:
            raise ValueError("filter order must be an even positive integer")
        if self.strength <= 0:
            raise ValueError("filter strength must be positive")

    @classmethod
    def none(cls) -> "SpectralFilter":
        # negligible strength: every factor rounds to exactly 1
        return cls(cutoff=0.0, order=2, strength=1e-300)

    def factors(self, order: int) -> np.ndarray:
        """Filter factors theta(i / N) for i = 0..N."""
        if order == 0:
            return np.ones(1)
        eta = np.arange(order + 1) / order
        return filter_factor(eta, self)


def filter_factor(eta, f: SpectralFilter):
    eta = np.asarray(eta, dtype=float)
    if np.any((eta < 0) | (eta > 1)):
        raise ValueError("eta must lie in [0, 1]")
    s = np.clip((eta - f.cutoff) / (1.0 - f.cutoff), 0.0, None)
    out = np.where(eta <= f.cutoff, 1.0, np.exp(-f.strength * s**f.order))
    return out if out.ndim else float(out)


def filtered_mass_matrix(basis_or_order, f: SpectralFilter) -> np.ndarray:
    """Diagonal of the filtered mass matrix, M_ii / theta(i / N)."""
    order = basis_or_order.order if isinstance(basis_or_order, LegendreBasis) else int(basis_or_order)
    return mass_diagonal(order) / f.factors(order)
