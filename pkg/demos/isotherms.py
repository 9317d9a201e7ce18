"""Steady interface loading against the Langmuir isotherm.

Each grid point starts from the closed-form steady surfactant profile and
relaxes until the rates die out.  The interface draws surfactant from the
closed domain, so the bulk value that matters is the one left at the
walls; both comparisons are printed.

    python demos/isotherms.py [model] [jobs]
"""
import sys

import numpy as np

from surfpf import analysis as an
from surfpf.scenarios import drivers as dv

model = int(sys.argv[1]) if len(sys.argv) > 1 else 3
jobs = int(sys.argv[2]) if len(sys.argv) > 2 else 1
psi_c = (0.0020, 0.016, 0.075)
psi_b = np.logspace(-3, -1, 5)

points = dv.run_isotherm_sweep(model, psi_c, psi_b, jobs=jobs)
print(f"Model {model}")
print(f"{'psi_c':>7} {'psi_b':>8} {'bulk':>8} {'psi0':>8} {'Langmuir':>9} {'err':>7} {'nominal':>8}  status")
for p in points:
    if p.status != "ok":
        print(f"{p.psi_c:7.4f} {p.psi_b:8.2e} {'':>8} {'':>8} {'':>9} {'':>7} {'':>8}  {p.status}")
        continue
    nominal = p.psi0_measured / an.langmuir_isotherm(p.psi_b, p.psi_c) - 1
    lang = p.psi0_langmuir
    err = p.relative_error
    print(f"{p.psi_c:7.4f} {p.psi_b:8.2e} {p.bulk:8.2e} {p.psi0_measured:8.5f} {lang:9.5f} "
          f"{err:+7.2%} {nominal:+8.2%}  {p.status}")
