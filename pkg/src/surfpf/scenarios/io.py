"""CSV emission and parsing for profiles, step series and isotherm tables."""
from __future__ import annotations

import csv
import math

import numpy as np

PROFILE_HEADER = ["x", "phi", "psi"]
SERIES_HEADER = ["t", "dt", "accepted", "energy", "mass_phi", "mass_psi", "psi0", "cerr", "newton_iters"]
ISOTHERM_HEADER = ["model", "psi_c", "psi_b", "psi0_measured", "psi0_langmuir", "status"]
ISOTHERM_STATUS = ("ok", "blowup", "nonconverged")


def fmt(v) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in r])


def _read(path, header):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != header:
        raise ValueError(f"{path}: expected header {','.join(header)}")
    return rows[1:]


def write_profile_csv(path, system, state):
    """Nodal phi and psi at the quadrature points."""
    b = system.basis
    rows = zip(system.nodes, b.synthesize(state.phi), b.synthesize(state.psi))
    _write(path, PROFILE_HEADER, rows)


def read_profile_csv(path):
    """Return ``(x, phi, psi)`` arrays."""
    data = np.array(_read(path, PROFILE_HEADER), dtype=float).reshape(-1, 3)
    return data[:, 0], data[:, 1], data[:, 2]


def series_rows(record, every: int = 1, accepted_only: bool = False):
    k = 0
    for s in record.steps:
        if not s.accepted:
            if accepted_only:
                continue
        else:
            k += 1
            if (k - 1) % every and s is not record.steps[-1]:
                continue
        yield [s.t, s.dt, bool(s.accepted), s.energy, s.mass_phi, s.mass_psi, s.psi0, s.cerr, int(s.newton_iters)]


def write_series_csv(path, record, every: int = 1):
    _write(path, SERIES_HEADER, series_rows(record, every))


def read_series_csv(path) -> dict:
    rows = _read(path, SERIES_HEADER)
    cols = list(zip(*rows)) if rows else [()] * len(SERIES_HEADER)
    out = {}
    for name, col in zip(SERIES_HEADER, cols):
        arr = np.array(col, dtype=float)
        out[name] = arr.astype(bool) if name == "accepted" else arr
    return out


def write_isotherm_csv(path, points):
    """Rows sorted by (model, psi_c, psi_b) so output order is independent of scheduling."""
    rows = []
    for p in sorted(points, key=lambda p: (int(p.model), p.psi_c, p.psi_b)):
        if p.status not in ISOTHERM_STATUS:
            raise ValueError(f"unknown status {p.status!r}")
        rows.append([int(p.model), p.psi_c, p.psi_b, p.psi0_measured, p.psi0_langmuir, p.status])
    _write(path, ISOTHERM_HEADER, rows)


def read_isotherm_csv(path) -> list[dict]:
    out = []
    for r in _read(path, ISOTHERM_HEADER):
        out.append({"model": int(r[0]), "psi_c": float(r[1]), "psi_b": float(r[2]),
                    "psi0_measured": float(r[3]), "psi0_langmuir": float(r[4]), "status": r[5]})
    return out
