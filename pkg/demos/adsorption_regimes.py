"""Adsorption onto a fresh interface from a uniform bulk.

Prints psi(0, t) on a log time grid together with the local power-law
exponent of psi0 - psi_b, then the three-regime fit.  In a closed domain
of this size the bulk is depleted by a factor of about two before the
interface saturates, which bends the middle of the curve away from the
square-root law of a semi-infinite bulk.

    python demos/adsorption_regimes.py [model]
"""
import sys

import numpy as np

from surfpf.scenarios import drivers as dv

model = int(sys.argv[1]) if len(sys.argv) > 1 else 3
run = dv.run_adsorption(model)
rec, fit = run.record, run.fit
t, psi0 = rec.series("t"), rec.series("psi0")
psi_b = psi0[0]
print(f"Model {model}: {rec.reason}, {rec.n_accepted} steps, {rec.n_rejected} rejected\n")

grid = np.logspace(-5, np.log10(t[-1]), 22)
y = np.interp(grid, t, psi0)
slope = np.gradient(np.log(np.maximum(y - psi_b, 1e-300)), np.log(grid))
print(f"{'t':>10} {'psi0':>9} {'d log(psi0 - psi_b) / d log t':>31}")
for ti, yi, si in zip(grid, y, slope):
    print(f"{ti:10.3e} {yi:9.5f} {si:31.3f}")

print()
if fit is None:
    print("no fit:", run.error)
else:
    for name, (a, b) in fit.windows.items():
        print(f"{name:>6} window: t in [{a:.3g}, {b:.3g}]")
    print(f"linear slope of psi0/psi_b: {fit.linear_slope:.4g} (R^2 {fit.linear.r2:.5f})")
    print(f"sqrt(t) scale tau1 = {fit.tau1:.4g}, free exponent {fit.mid_exponent:.3f}")
    print(f"late scale tau0 = {fit.tau0:.4g} (R^2 {fit.late.r2:.4f}), psi0_eq = {fit.psi0_eq:.5f}")
