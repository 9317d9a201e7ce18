"""Command line front end: ``surfpf <subcommand> [options]``.

Exit codes: 0 on success, 2 for a bad configuration or argument, 3 when
every run failed.  A blow-up is a result, not a failure.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from . import drivers as dv
from . import io
from .config import ScenarioConfig, parse_field_spec, read_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILED = 3

FAILED = ("solver failure", "error")


def parse_grid(spec: str) -> np.ndarray:
    """``lo:hi:count[:log|lin]`` -> array of grid values."""
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"grid {spec!r}: expected lo:hi:count[:log|lin]")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"grid {spec!r}: bad number") from None
    scale = parts[3].strip().lower() if len(parts) == 4 else "lin"
    if n < 1 or scale not in ("log", "lin"):
        raise ConfigError(f"grid {spec!r}: count must be >= 1 and scale log or lin")
    if n == 1:
        return np.array([lo])
    if scale == "log":
        if not (lo > 0 and hi > 0):
            raise ConfigError(f"grid {spec!r}: log spacing needs positive bounds")
        return np.logspace(math.log10(lo), math.log10(hi), n)
    return np.linspace(lo, hi, n)


def parse_list(spec: str, kind=float) -> list:
    try:
        return [kind(s) for s in spec.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad list {spec!r}") from None


def _base(args, default: ScenarioConfig) -> ScenarioConfig:
    return read_config(args.config) if args.config else default


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, str) else io.fmt(v) for v in r])


def _tag(v: float) -> str:
    return format(v, ".6g")


def _energy_monotone(rec, atol: float) -> bool:
    e = rec.series("energy")
    return bool(np.all(np.diff(e) <= 10 * atol))


# ----------------------------------------------------------------------

def cmd_simulate(args, out: Path) -> int:
    cfg = _base(args, ScenarioConfig())
    system, rec = dv.simulate(cfg)
    io.write_series_csv(out / "series.csv", rec, cfg.every)
    if rec.final_state is not None:
        io.write_profile_csv(out / "profile.csv", system, rec.final_state)
    for snap in rec.snapshots:
        io.write_profile_csv(out / f"profile_t{_tag(snap.t)}.csv", system, snap)
    print(f"{rec.reason}: t = {rec.final_state.t:.6g}, {rec.n_accepted} accepted, "
          f"{rec.n_rejected} rejected {rec.message}".rstrip())
    return EXIT_FAILED if rec.reason in FAILED else EXIT_OK


def cmd_stability(args, out: Path) -> int:
    cfg = _base(args, dv.STABILITY_BASE)
    values = parse_list(args.psib) if args.psib else [0.012, 0.006]
    runs = dv.run_stability_demo(cfg, values)
    rows = []
    for psi_b, rec in runs.items():
        io.write_series_csv(out / f"series_psib{_tag(psi_b)}.csv", rec, cfg.every)
        rows.append([psi_b, rec.reason, rec.final_state.t, _energy_monotone(rec, cfg.atol)])
        print(f"psi_b = {psi_b:.4g}: {rec.reason} at t = {rec.final_state.t:.4g}")
    _write_rows(out / "stability.csv", ["psi_b", "reason", "t_final", "energy_monotone"], rows)
    if args.bisect:
        lo, hi = (min(values), max(values)) if len(values) >= 2 else (0.006, 0.012)
        stable, unstable, hist = dv.stability_bracket(cfg, lo, hi, args.bisect)
        _write_rows(out / "bracket.csv", ["psi_b", "reason"], hist)
        print(f"threshold bracket: [{stable:.4g}, {unstable:.4g}]")
    failed = all(r.reason in FAILED for r in runs.values())
    return EXIT_FAILED if failed else EXIT_OK


def cmd_isotherm(args, out: Path) -> int:
    base = _base(args, dv.ISOTHERM_BASE)
    psi_c = parse_list(args.psic) if args.psic else list(dv.ISOTHERM_PSI_C)
    psi_b = parse_grid(args.psib) if args.psib else np.logspace(-3, -1, 8)
    models = parse_list(args.model, int)
    points = []
    for m in models:
        points += dv.run_isotherm_sweep(m, psi_c, psi_b, base, jobs=args.jobs)
    io.write_isotherm_csv(out / "isotherm.csv", points)
    counts = {s: sum(p.status == s for p in points) for s in io.ISOTHERM_STATUS}
    print(", ".join(f"{n} {s}" for s, n in counts.items()))
    # a point that raised never got a step in
    failed = all(p.status == "nonconverged" and p.steps == 0 for p in points)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_adsorption(args, out: Path) -> int:
    base = _base(args, dv.ADSORPTION_BASE)
    psi_b = parse_list(args.psib) if args.psib else [None]
    rows = []
    n_fail = 0
    for m in parse_list(args.model, int):
        for b in psi_b:
            run = dv.run_adsorption(m, base, psi_b=b)
            rec = run.record
            bulk = b if b is not None else parse_field_spec(base.psi, "psi")[1]
            io.write_series_csv(out / f"series_model{m}_psib{_tag(bulk)}.csv", rec, base.every)
            n_fail += rec.reason in FAILED
            f = run.fit
            if f is None:
                rows.append([m, bulk] + [math.nan] * 7 + [run.error])
                print(f"model {m}, psi_b = {bulk:.4g}: no fit ({run.error})")
                continue
            rows.append([m, bulk, f.linear_slope, f.tau1, f.mid_exponent, f.tau0, f.late.r2,
                         f.psi0_eq, f.eq_converged, ""])
            print(f"model {m}, psi_b = {bulk:.4g}: tau1 = {f.tau1:.4g}, exponent = {f.mid_exponent:.3f}, "
                  f"tau0 = {f.tau0:.4g}, psi0_eq = {f.psi0_eq:.4g}")
    header = ["model", "psi_b", "linear_slope", "tau1", "mid_exponent", "tau0", "late_r2",
              "psi0_eq", "eq_converged", "note"]
    _write_rows(out / "adsorption.csv", header, rows)
    return EXIT_FAILED if n_fail == len(rows) else EXIT_OK


def cmd_converge(args, out: Path) -> int:
    base = _base(args, dv.CONVERGENCE_BASE)
    orders = parse_list(args.orders, int)
    eps = parse_list(args.eps)
    rows = dv.run_convergence(orders, eps, base)
    _write_rows(out / "convergence.csv", ["eps", "order", "error", "steps", "rejected", "reason"],
                [[r.eps, r.order, r.error, r.steps, r.rejected, r.reason] for r in rows])
    for r in rows:
        print(f"eps = {r.eps:.0e}  N = {r.order:4d}  error = {r.error:.3e}")
    return EXIT_FAILED if all(r.reason in FAILED for r in rows) else EXIT_OK


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="surfpf", description="1D phase-field surfactant experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario config file (replaces the built-in defaults)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="parallel runs for sweeps")
        return p

    common(sub.add_parser("simulate", help="single run from a config file"))
    p = common(sub.add_parser("stability", help="flat surfactant over a tanh interface"))
    p.add_argument("--psib", help="comma separated bulk values (default 0.012,0.006)")
    p.add_argument("--bisect", type=int, default=0, metavar="N",
                   help="N bisection steps between the smallest and largest value")
    p = common(sub.add_parser("isotherm", help="steady interface loading over a grid"))
    p.add_argument("--model", default="3", help="comma separated model variants")
    p.add_argument("--psic", help="comma separated adsorption constants")
    p.add_argument("--psib", help="bulk grid lo:hi:count[:log|lin]")
    p = common(sub.add_parser("adsorption", help="adsorption onto a fresh interface"))
    p.add_argument("--model", default="3,2")
    p.add_argument("--psib", help="comma separated bulk values")
    p = common(sub.add_parser("converge", help="traveling-wave convergence table"))
    p.add_argument("--orders", default="24,32,48,64,96")
    p.add_argument("--eps", default="1e-4,1e-6,1e-8")
    return ap


COMMANDS = {
    "simulate": cmd_simulate,
    "stability": cmd_stability,
    "isotherm": cmd_isotherm,
    "adsorption": cmd_adsorption,
    "converge": cmd_converge,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"surfpf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
