import math

import numpy as np
import pytest
from scipy.linalg import expm

from surfpf.assembly import SemidiscreteSystem, SpectralState
from surfpf.errors import BlowUp, NewtonDivergence
from surfpf.models import ModelParams
from surfpf.stepper import (
    BlowUpCheck, ControllerState, ImplicitSolver, NewtonConfig, Tolerances, advance,
    backward_euler_solve, control_error, error_estimate, h211b, limiter, rejection_threshold,
)


class LinearRates:
    """u' = A u, enough of a system for the implicit solver."""

    def __init__(self, A):
        self.A = np.asarray(A, float)

    def rates(self, u):
        return np.asarray(u) @ self.A.T


class QuadraticRates:
    def rates(self, u):
        return np.asarray(u) ** 2


def test_limiter_fixed_point_and_caps():
    assert limiter(1.0, 2.0) == 1.0
    assert limiter(1e300, 2.0) == pytest.approx(1 + math.pi)
    assert limiter(-1e300, 1.0) == pytest.approx(1 - math.pi / 2)


def test_control_error_examples():
    tol = Tolerances(np.array([1e-6]), 1e-8)
    u = np.array([1.0])
    assert control_error(np.array([1e-6]), u, tol) == pytest.approx(1.0, abs=1e-15)
    assert control_error(np.array([0.0]), u, tol) == pytest.approx(1 + math.pi)
    assert control_error(np.array([4e-6]), u, tol) == pytest.approx(0.5100, abs=1e-4)


def test_tolerance_floor():
    tol = Tolerances.scaled(3)
    assert tol.rtol.shape == (8,)
    assert tol.rtol[0] == pytest.approx(1e-6 / math.sqrt(2))
    v = tol.tol_vector(np.zeros(8))
    assert np.all(v == 1e-8)
    with pytest.raises(ValueError):
        Tolerances(np.array([0.0]))


def test_h211b_examples():
    ctrl = ControllerState()
    assert ctrl.propose_ratio(1.0) == 1.0
    assert h211b(16.0, 1.0, 1.0) == pytest.approx(2.0)
    assert ctrl.propose_ratio(16.0) == pytest.approx(1 + math.atan(1.0))


def test_rejection_threshold_value():
    rho_min = rejection_threshold(2.0)
    # four-decimal value of the threshold
    assert round(rho_min, 4) == 0.9179
    # the chain by hand
    inner = (1 + 2 * math.atan((2**-0.5 - 1) / 2)) ** 0.25
    assert rho_min == pytest.approx(1 + math.atan(inner - 1), rel=1e-15)


def test_accept_reject_decisions():
    ctrl = ControllerState()
    assert ctrl.accepts(1.0)
    assert not ctrl.accepts(0.90)
    assert ctrl.accepts(0.9180)


def test_controller_bookkeeping():
    ctrl = ControllerState(dt=1.0, dt_min=1e-3, dt_max=1.5)
    ctrl.accept(2.0, 1.2, 1.0)
    assert (ctrl.cerr_prev, ctrl.rho_prev, ctrl.dt) == (2.0, 1.2, 1.2)
    ctrl.accept(2.0, 1.9, 1.2)
    assert ctrl.dt == 1.5
    ctrl.reject(0.5, 1.0)
    assert ctrl.dt == 0.5 and ctrl.rho_prev == 1.9
    with pytest.raises(ValueError):
        ControllerState(dt_min=1.0, dt_max=0.5)


def test_backward_euler_linear_oracle():
    rng = np.random.default_rng(0)
    A = -np.diag([1.0, 10.0, 100.0, 1000.0]) + 0.3 * rng.normal(size=(4, 4))
    u0 = rng.normal(size=4)
    dt = 0.05
    solver = ImplicitSolver(LinearRates(A), NewtonConfig(tol=1e-13))
    u, its = solver.solve(u0, dt)
    exact = np.linalg.solve(np.eye(4) - dt * A, u0)
    assert np.allclose(u, exact, rtol=1e-12, atol=1e-12)
    assert its <= 2


def test_error_estimate_scalar():
    lam, y0, dt = -3.0, 2.0, 0.1
    u1, u2, err, _ = error_estimate(LinearRates([[lam]]), np.array([y0]), dt,
                                    ImplicitSolver(LinearRates([[lam]]), NewtonConfig(tol=1e-14)))
    a1 = y0 / (1 - lam * dt)
    a2 = y0 / (1 - lam * dt / 2) ** 2
    assert u1[0] == pytest.approx(a1, rel=1e-13)
    assert u2[0] == pytest.approx(a2, rel=1e-13)
    assert err[0] == pytest.approx(abs(a1 - a2) / 3, rel=1e-10)


def test_error_estimate_is_second_order():
    sys = LinearRates([[-1.0, 0.5], [0.0, -2.0]])
    y = np.array([1.0, 1.0])
    e = [error_estimate(sys, y, dt, ImplicitSolver(sys, NewtonConfig(tol=1e-15)))[2].max()
         for dt in (1e-2, 5e-3, 2.5e-3)]
    assert e[0] / e[1] == pytest.approx(4, rel=0.05)
    assert e[1] / e[2] == pytest.approx(4, rel=0.03)


def test_zero_rates_zero_error():
    sys = LinearRates(np.zeros((3, 3)))
    _, _, err, _ = error_estimate(sys, np.ones(3), 0.7)
    assert np.all(err == 0)


def test_backward_euler_first_order_globally():
    A = np.array([[-1.0, 1.0], [0.0, -0.5]])
    u0 = np.array([1.0, 2.0])
    exact = expm(A) @ u0
    errs = []
    for n in (20, 40, 80):
        solver = ImplicitSolver(LinearRates(A), NewtonConfig(tol=1e-14))
        u = u0
        for _ in range(n):
            u, _ = solver.solve(u, 1.0 / n)
        errs.append(np.max(np.abs(u - exact)))
    assert errs[0] / errs[1] == pytest.approx(2, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(2, rel=0.05)


def test_newton_divergence():
    # y = 1 + 2 y^2 has no real root
    with pytest.raises(NewtonDivergence):
        ImplicitSolver(QuadraticRates()).solve(np.array([1.0]), 2.0)


def test_pure_phase_is_fixed_point():
    S = SemidiscreteSystem.build(ModelParams(model=0), 16)
    phi = np.zeros(S.size)
    phi[0] = 1.0
    psi = np.zeros(S.size)
    psi[0] = 0.05
    st = SpectralState(phi, psi)
    out = backward_euler_solve(S, st, 10.0)
    assert np.allclose(out.vector, st.vector, atol=1e-12)
    assert out.t == 10.0


def test_advance_zero_rate_state_takes_giant_steps():
    S = SemidiscreteSystem.build(ModelParams(model=3), 16)
    e0 = np.zeros(S.size)
    e0[0] = 1.0
    st = SpectralState(e0, 0.01 * e0)
    rec = advance(S, st, ControllerState(dt=1e-8, dt_max=1.0), 10.0)
    assert rec.reason == "completed"
    assert rec.n_rejected == 0
    assert rec.final_state.t == 10.0
    dts = rec.series("dt")
    assert dts.max() == 1.0
    assert rec.n_accepted < 60


def _small_run(t_end=0.5):
    p = ModelParams(model=3, Cn=0.2, Pi=0.15)
    S = SemidiscreteSystem.build(p, 32)
    st = S.state_from_functions(lambda x: np.tanh(x / 0.2), lambda x: 0.01 + 0 * x)
    return S, advance(S, st, ControllerState(dt=1e-8, dt_max=t_end / 10), t_end)


def test_advance_conserves_and_dissipates():
    S, rec = _small_run()
    assert rec.reason == "completed"
    t = rec.series("t")
    assert np.all(np.diff(t) > 0) and t[-1] == 0.5
    m0 = S.total_mass(rec.initial_state)
    assert np.max(np.abs(rec.series("mass_phi") - m0[0])) <= 1e-8
    assert np.max(np.abs(rec.series("mass_psi") - m0[1])) <= 1e-8
    e = np.concatenate([[S.total_energy(rec.initial_state)], rec.series("energy")])
    assert np.max(np.diff(e)) <= 10 * 1e-8


def test_advance_is_deterministic():
    _, a = _small_run(0.1)
    _, b = _small_run(0.1)
    assert [(s.t, s.dt, s.accepted) for s in a.steps] == [(s.t, s.dt, s.accepted) for s in b.steps]
    assert np.array_equal(a.final_state.vector, b.final_state.vector)


def test_snapshots_and_observers():
    p = ModelParams(model=3, Cn=0.2, Pi=0.15)
    S = SemidiscreteSystem.build(p, 24)
    st = S.state_from_functions(lambda x: np.tanh(x / 0.2), lambda x: 0.01 + 0 * x)
    seen = []

    def obs(system, state, rec):
        seen.append(rec.t)
        return rec.t >= 0.05

    rec = advance(S, st, ControllerState(dt=1e-6, dt_max=0.01), 1.0,
                  snapshot_times=[0.0, 0.02], observers=[obs])
    assert rec.reason == "stopped"
    assert [s.t for s in rec.snapshots] == [0.0, 0.02]
    assert seen[-1] >= 0.05 and len(seen) == rec.n_accepted


def test_blowup_check():
    S = SemidiscreteSystem.build(ModelParams(), 8)
    check = BlowUpCheck()
    psi = np.zeros(S.size)
    psi[0] = -0.2
    assert "left" in check(S, np.concatenate([np.zeros(S.size), psi]))
    assert check(S, np.full(2 * S.size, np.nan)) == "non-finite state"
    psi[0] = 0.5
    assert check(S, np.concatenate([np.zeros(S.size), psi])) is None


def test_advance_reports_blowup():
    S = SemidiscreteSystem.build(ModelParams(model=0, Cn=1 / 6), 48)
    st = S.state_from_functions(lambda x: np.tanh(6 * x), lambda x: 0.05 + 0 * x)
    rec = advance(S, st, ControllerState(dt=1e-8, dt_max=0.5), 20.0)
    assert rec.reason == "blow-up"
    with pytest.raises(BlowUp):
        advance(S, st, ControllerState(dt=1e-8, dt_max=0.5), 20.0, raise_on_blowup=True)
