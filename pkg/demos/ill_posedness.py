"""Flat surfactant over a tanh interface, baseline model.

Below the critical bulk loading the surfactant settles into a peak at the
interface and the free energy decays.  Above it the peak keeps sharpening
until the surfactant fraction leaves [0, 1].  The frozen-coefficient
growth coefficient is tracked along the way: it changes sign before the
solver gives up.

    python demos/ill_posedness.py
"""
import numpy as np

from surfpf import analysis as an
from surfpf.scenarios import drivers as dv

cfg = dv.STABILITY_BASE
params = cfg.params()
thr = an.instability_threshold(params.Pi, params.Ex)
print(f"Cn = {cfg.cn:.4g}, Pi = {params.Pi}, predicted critical bulk loading {thr:.4g}\n")


class GrowthTracker:
    """Record the growth coefficient at the interface after every step."""

    def __init__(self):
        self.t, self.coef = [], []

    def __call__(self, system, state, rec):
        psi0 = float(system.evaluate(state.psi, 0.0)[0])
        dphi0 = float(system.evaluate_derivative(state.phi, 0.0)[0])
        self.t.append(state.t)
        self.coef.append(an.lambda2_coefficient(psi0, dphi0, params.Cn, params.Pi))


for psi_b in (0.006, 0.012):
    track = GrowthTracker()
    _, rec = dv.simulate(cfg.with_(psi=f"uniform:{psi_b}"), observers=[track])
    e = rec.series("energy")
    print(f"psi_b = {psi_b}: {rec.reason} at t = {rec.final_state.t:.4g} after {rec.n_accepted} steps")
    print(f"  energy {e[0]:.6f} -> {e[-1]:.6f}, largest one-step rise {np.max(np.diff(e)):.2e}")
    coef = np.array(track.coef)
    flips = np.flatnonzero(np.diff(np.sign(coef)) != 0)
    if flips.size:
        print(f"  growth coefficient changes sign at t = {track.t[flips[0] + 1]:.4g}")
    else:
        print(f"  growth coefficient keeps its sign (final {coef[-1]:.3g})")
    if rec.message:
        print(f"  {rec.message}")
    print()

# narrow the critical loading down by bisection
stable, unstable, hist = dv.stability_bracket(cfg, 0.006, 0.012, iterations=4)
for v, reason in hist:
    print(f"  psi_b = {v:.5f}: {reason}")
print(f"critical loading lies in [{stable:.4g}, {unstable:.4g}]; prediction {thr:.4g}")
