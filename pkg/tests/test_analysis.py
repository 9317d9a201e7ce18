import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surfpf import analysis as an
from surfpf.errors import InsufficientData, SupersaturatedBulk, UnsupportedVariant
from surfpf.models import ModelParams, ModelVariant


def test_adsorption_constant_examples():
    assert an.adsorption_constant(0.1227, 1.0) == pytest.approx(math.exp(-0.5 / 0.1227), rel=1e-15)
    assert an.adsorption_constant(0.1227, 1.0) == pytest.approx(0.0169926, abs=1e-7)
    assert an.adsorption_constant(0.2, 1e12) == pytest.approx(math.exp(-1 / 0.8), rel=1e-10)
    assert an.pi_from_adsorption_constant(0.016, 1.0) == pytest.approx(0.120914, abs=1e-6)
    Pi = an.pi_from_adsorption_constant(0.035, 2.0)
    assert an.adsorption_constant(Pi, 2.0) == pytest.approx(0.035, rel=1e-14)


def test_langmuir_examples():
    assert an.langmuir_isotherm(0.0, 0.016) == 0.0
    p = ModelParams(model=3, Pi=an.pi_from_adsorption_constant(0.016, 1.0))
    prof = an.equilibrium_profile(p, 0.01)
    # Model 3 gives exactly the leading-order constant at the centre when phi_b = 1
    flat = an.EquilibriumProfile(1.0, p.Cn)
    psi0 = an.steady_psi_profile(0.0, p, flat, 0.01)
    assert psi0 == pytest.approx(0.01 / (0.01 + 0.016 * 0.99), rel=1e-12)
    assert psi0 == pytest.approx(0.38700, abs=1e-5)
    for model in (0, 2, 3):
        q = p.with_(model=model)
        far = an.steady_psi_profile(np.array([50.0, -50.0]), q, an.equilibrium_profile(q, 0.01), 0.01)
        assert np.allclose(far, 0.01, rtol=1e-12)
    assert prof.phi_b < 1


def test_steady_profile_rejects_model1():
    p = ModelParams(model=1)
    with pytest.raises(UnsupportedVariant):
        an.steady_psi_profile(0.0, p, an.EquilibriumProfile(1.0, p.Cn), 0.01)
    # borrowing the baseline adsorption term is allowed
    an.steady_psi_profile(0.0, p, an.EquilibriumProfile(1.0, p.Cn), 0.01, model=0)


@settings(max_examples=50)
@given(st.floats(1e-4, 0.5), st.floats(1e-4, 0.5), st.floats(1.01, 3.0))
def test_isotherm_bracket(psi_b, psi_c, factor):
    v = an.langmuir_isotherm(psi_b, psi_c)
    assert 0 < v < 1
    assert an.langmuir_isotherm(psi_b * factor, psi_c) > v
    assert an.langmuir_isotherm(psi_b, psi_c * factor) < v


@settings(max_examples=50)
@given(st.floats(1e-4, 0.5), st.floats(1e-4, 0.5))
def test_frumkin_reduces_to_langmuir(psi_b, psi_c):
    assert an.frumkin_solve(psi_b, psi_c, 0.0) == pytest.approx(an.langmuir_isotherm(psi_b, psi_c), abs=1e-12)


def _bisect(g, lo, hi, tol=1e-14):
    glo = g(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (g(mid) > 0) == (glo > 0):
            lo, glo = mid, g(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_frumkin_example_against_bisection():
    Pi = an.pi_from_adsorption_constant(0.016, 1.0)
    alpha = 8 * Pi / (2 * Pi)
    assert alpha == 4.0
    ref = _bisect(lambda s: s - 0.01 / (0.01 + 0.016 * math.exp(-4 * s)), 0.0, 1.0)
    assert an.frumkin_solve(0.01, 0.016, alpha) == pytest.approx(ref, abs=1e-12)
    # lateral attraction raises the loading
    assert an.frumkin_solve(0.01, 0.016, 2.0) < an.frumkin_solve(0.01, 0.016, 4.0) < ref + 1e-12


def test_equilibrium_profile_examples():
    for model in ModelVariant:
        p = ModelParams(model=model, Cn=0.1)
        prof = an.equilibrium_profile(p, 0.0)
        assert prof.phi_b == 1.0 and prof.width == pytest.approx(0.1)
    assert an.equilibrium_profile(ModelParams(model=2), 0.01).phi_b == pytest.approx(0.994987, abs=1e-6)
    assert an.equilibrium_profile(ModelParams(model=3), 0.01).phi_b == pytest.approx(math.sqrt(0.985 / 0.99), rel=1e-14)
    assert an.equilibrium_profile(ModelParams(model=3), 0.01).phi_b == pytest.approx(0.997472, abs=1e-6)
    with pytest.raises(SupersaturatedBulk):
        an.equilibrium_profile(ModelParams(model=2, Ex=0.2), 0.4)
    prof = an.equilibrium_profile(ModelParams(model=0), 0.02)
    assert prof(0.0) == 0.0
    x = np.linspace(-1, 1, 11)
    assert np.allclose(prof(-x), -prof(x))


def _residual(p, psi_b, x):
    """Pointwise phase-field potential of the planar profile at constant psi_b."""
    prof = an.equilibrium_profile(p, psi_b)
    phi, d2 = prof(x), prof.second_derivative(x)
    Cn2 = p.Cn**2
    base = -phi + phi**3 + psi_b * phi / (2 * p.Ex)
    if p.model in (ModelVariant.MODEL0, ModelVariant.MODEL1):
        return base - Cn2 / 2 * (1 - psi_b) * d2
    if p.model == ModelVariant.MODEL2:
        return base + psi_b * phi / 2 - Cn2 / 2 * d2
    return base + (1 - phi**2) * psi_b * phi - Cn2 / 2 * d2


@pytest.mark.parametrize("model", list(ModelVariant))
def test_equilibrium_profile_solves_constant_loading_problem(model):
    p = ModelParams(model=model, Cn=1 / 6, Ex=0.7)
    x = np.linspace(-1, 1, 401)
    for psi_b in (0.001, 0.01, 0.05):
        assert np.max(np.abs(_residual(p, psi_b, x))) < 1e-13


def test_interface_slope_examples():
    assert an.interface_slope(ModelParams(model=0), 0.0) == pytest.approx(1.0)
    assert an.interface_slope(ModelParams(model=2), 0.01) == pytest.approx(0.99, rel=1e-14)
    s0 = an.interface_slope(ModelParams(model=0), 0.01)
    assert abs(s0 - 1) <= 1e-4
    # first-order expansion for the baseline model
    p = ModelParams(model=0, Ex=0.5)
    psi_b = 1e-3
    assert an.interface_slope(p, psi_b) == pytest.approx(1 - (1 / p.Ex - 1) * psi_b / 2, abs=1e-5)


def test_threshold_examples():
    assert an.instability_threshold(0.1227, 1.0) == pytest.approx(5.526e-3, abs=5e-7)
    assert an.instability_threshold(0.5, 1.0) is None
    assert an.instability_threshold(0.25, 1.0) == pytest.approx(math.exp(-2), rel=1e-14)


def test_lambda2_examples():
    assert an.lambda2_coefficient(0.0, 6.0, 1 / 6, 0.1227, 2.0) == pytest.approx(-0.1227 / 2)
    assert an.lambda2_coefficient(2 * 0.13, 1 / 0.2, 0.2, 0.13) == pytest.approx(0.0, abs=1e-15)
    rep = an.stability_report(ModelParams(Pi=0.1227), 0.3)
    assert rep.ill_posed == (rep.coefficient > 0)
    assert rep.ill_posed
    assert rep.inputs["dphi_eq0"] == 6.0


@settings(max_examples=60)
@given(st.floats(0.01, 0.49), st.floats(0.1, 10.0))
def test_threshold_consistency(Pi, Ex):
    psi_c = an.adsorption_constant(Pi, Ex)
    thr = an.instability_threshold(Pi, Ex)
    Cn = 0.17
    psi0 = an.langmuir_isotherm(thr, psi_c)
    assert an.lambda2_coefficient(psi0, 1 / Cn, Cn, Pi) == pytest.approx(0.0, abs=1e-12)


def test_fit_recovers_sqrt_law():
    t = np.linspace(1e-3, 1.0, 200)
    c, tau1 = 0.02, 0.37
    fit = an._linfit(np.sqrt(t), c + np.sqrt(t / tau1))
    assert 1 / fit.slope**2 == pytest.approx(tau1, rel=1e-10)
    p, c_, k, r2 = an.fit_power_law(t, c + np.sqrt(t / tau1))
    assert p == pytest.approx(0.5, abs=1e-6)
    assert r2 > 1 - 1e-12


def test_fit_recovers_late_law():
    t = np.linspace(5.0, 100.0, 200)
    eq, tau0 = 0.4, 0.09
    y = eq * (1 - np.sqrt(tau0 / t))
    fit = an._linfit(t**-0.5, y / eq)
    assert fit.slope**2 == pytest.approx(tau0, rel=1e-10)


def test_fit_adsorption_synthetic_three_regimes():
    # square-root rise from the bulk value, saturation with a t^-1/2 tail
    psi_b, eq, tau1 = 0.01, 0.4, 0.02
    t = np.logspace(-9, 3, 1200)
    rise = psi_b + np.sqrt(t / tau1)
    late = eq * (1 - np.sqrt(0.05 / t))
    y = np.minimum(rise, np.maximum(late, 0.3))
    fit = an.fit_adsorption(t, y, psi0_eq=eq, psi_b=psi_b)
    assert fit.linear_slope > 0
    assert fit.tau1 == pytest.approx(tau1, rel=1e-8)
    assert fit.mid_exponent == pytest.approx(0.5, abs=1e-5)
    assert fit.tau0 == pytest.approx(0.05, rel=1e-8)
    assert fit.late.r2 > 0.999
    lo, hi = fit.windows["mid"]
    assert hi < fit.windows["late"][0]


def test_fit_adsorption_needs_data():
    t = np.linspace(0, 1, 50)
    with pytest.raises(InsufficientData):
        an.fit_adsorption(t, np.zeros_like(t), psi_b=0.0)
    with pytest.raises(InsufficientData):
        an.fit_adsorption(t[:4], np.ones(4))


def test_estimate_equilibrium():
    y = np.concatenate([np.linspace(0, 1, 90), np.full(10, 1.0)])
    assert an.estimate_equilibrium(y) == (1.0, True)
    assert an.estimate_equilibrium(np.linspace(0, 1, 100))[1] is False


def test_estimate_equilibrium_uses_last_time_decade():
    # adaptive steps: most samples are early, so the last tenth by count
    # reaches far back while the last decade in time is flat
    t = np.concatenate([np.geomspace(1e-6, 1.0, 200), [5.0, 10.0, 20.0]])
    y = 1 - np.exp(-t / 0.05)
    assert an.estimate_equilibrium(y)[1] is False
    final, ok = an.estimate_equilibrium(y, t=t)
    assert ok and final == y[-1]
