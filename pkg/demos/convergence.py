"""Spectral convergence for an advected tanh interface.

The exact solution is a traveling wave, so the error at each order and
tolerance is known exactly.  With the tolerance fixed the error falls
geometrically in N until it hits the floor set by the time stepper; a
tighter tolerance lowers the floor.

    python demos/convergence.py
"""
from surfpf.scenarios import drivers as dv

orders = (24, 32, 48, 64, 96)
rows = dv.run_convergence(orders, (1e-4, 1e-6, 1e-8))
print("max-in-time relative L2 error")
print("   eps " + "".join(f"{'N=' + str(n):>11}" for n in orders))
for eps in (1e-4, 1e-6, 1e-8):
    errs = [r.error for r in rows if r.eps == eps]
    print(f"{eps:6.0e} " + "".join(f"{e:11.2e}" for e in errs))
print(f"\nrejected steps: {sum(r.rejected for r in rows)} of {sum(r.steps for r in rows)}")
