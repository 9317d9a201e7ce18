"""Scenario configuration files.

A configuration is an INI-style text file with ``key = value`` lines
grouped in sections::

    [model]
    variant = 3
    cn = 0.05
    psi_c = 0.016          # or: pi = 0.12

    [discretization]
    order = 128
    quadrature = 0         # 0 selects 2 (order + 1) points
    filter_cutoff = 0.25
    filter_order = 12
    filter_strength = 36

    [time]
    t_end = 20
    dt_init = 1e-8
    dt_min = 1e-12
    dt_max = 0             # 0 selects t_end / 10
    rtol = 1e-6            # scaled by diag(M^-1/2) per mode
    atol = 1e-8

    [initial]
    phi = tanh             # or: coeffs: c0, c1, ...
    psi = uniform:0.012    # or: isotherm:<psi_b>, coeffs: c0, c1, ...

    [output]
    every = 1              # keep every k-th accepted step in the series
    snapshots =            # comma separated times
    advection = 0

Every key is optional; unknown sections or keys are errors.  Inline
comments start with ``#``.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, fields, replace

from ..errors import ConfigError
from ..models import ModelParams, ModelVariant
from ..analysis import pi_from_adsorption_constant

# key -> (attribute, parser)
_FLOAT = float
_INT = int


def _variant(v):
    try:
        return ModelVariant.parse(v)
    except (ValueError, KeyError):
        raise ValueError(f"unknown model variant {v!r}") from None


def _floats(v):
    v = v.strip()
    return tuple(float(s) for s in v.split(",") if s.strip()) if v else ()


SCHEMA = {
    "model": {
        "variant": _variant, "cn": _FLOAT, "ex": _FLOAT, "pi": _FLOAT, "psi_c": _FLOAT,
        "sigma": _FLOAT, "pe_phi": _FLOAT, "pe_psi": _FLOAT,
    },
    "discretization": {
        "order": _INT, "quadrature": _INT, "filter_cutoff": _FLOAT,
        "filter_order": _INT, "filter_strength": _FLOAT,
    },
    "time": {
        "t_end": _FLOAT, "dt_init": _FLOAT, "dt_min": _FLOAT, "dt_max": _FLOAT,
        "rtol": _FLOAT, "atol": _FLOAT,
    },
    "initial": {"phi": str, "psi": str},
    "output": {"every": _INT, "snapshots": _floats, "advection": _FLOAT},
}


@dataclass(frozen=True)
class ScenarioConfig:
    variant: ModelVariant = ModelVariant.MODEL0
    cn: float = 1.0 / 6.0
    ex: float = 1.0
    pi: float = 0.1227
    sigma: float | None = None
    pe_phi: float = 1.0
    pe_psi: float = 1.0
    order: int = 96
    quadrature: int = 0
    filter_cutoff: float = 0.25
    filter_order: int = 12
    filter_strength: float = 36.0
    t_end: float = 20.0
    dt_init: float = 1e-8
    dt_min: float = 1e-12
    dt_max: float = 0.0
    rtol: float = 1e-6
    atol: float = 1e-8
    phi: str = "tanh"
    psi: str = "uniform:0.0"
    every: int = 1
    snapshots: tuple = field(default_factory=tuple)
    advection: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variant", _variant(self.variant))
        object.__setattr__(self, "snapshots", tuple(float(s) for s in self.snapshots))
        if self.order < 1:
            raise ConfigError("order must be at least 1")
        if self.quadrature and self.quadrature < self.order + 1:
            raise ConfigError("quadrature needs at least order + 1 points")
        for name in ("t_end", "dt_init", "dt_min", "rtol", "atol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.dt_max < 0:
            raise ConfigError("dt_max must be nonnegative")
        if self.every < 1:
            raise ConfigError("every must be at least 1")
        parse_field_spec(self.phi, "phi")
        parse_field_spec(self.psi, "psi")
        try:
            self.params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def params(self) -> ModelParams:
        return ModelParams(model=self.variant, Cn=self.cn, Ex=self.ex, Pi=self.pi,
                           sigma=self.sigma,
                           Pe_phi=self.pe_phi, Pe_psi=self.pe_psi)

    @property
    def effective_dt_max(self) -> float:
        return self.dt_max if self.dt_max > 0 else self.t_end / 10

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


def parse_field_spec(spec: str, which: str):
    """Split an initial-data spec into ``(kind, payload)``."""
    s = spec.strip().lower()
    if which == "phi" and s == "tanh":
        return "tanh", None
    kind, _, rest = s.partition(":")
    kind = kind.strip()
    try:
        if kind == "coeffs":
            vals = _floats(rest)
            if not vals:
                raise ValueError
            return kind, vals
        if which == "psi" and kind in ("uniform", "isotherm"):
            v = float(rest)
            if not 0 <= v < 1:
                raise ConfigError(f"{which}: value {v} outside [0, 1)")
            return kind, v
    except ValueError:
        pass
    raise ConfigError(f"malformed initial {which} spec {spec!r}")


def _line_of(text: str, section: str | None, key: str | None) -> int | None:
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip().lower()
            if key is None and current == section:
                return i
            continue
        if key is not None and current == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.I):
            return i
    return None


def _where(text, section, key=None) -> str:
    line = _line_of(text, section, key)
    what = f"[{section}]" + (f" {key}" if key else "")
    return f"line {line}: {what}" if line else what


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None,
                                   empty_lines_in_values=False)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values = {}
    for section in cp.sections():
        sec = section.strip().lower()
        if sec not in SCHEMA:
            raise ConfigError(f"{source}: {_where(text, sec)}: unknown section")
        for key, raw in cp.items(section):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{source}: {_where(text, sec, key)}: unknown key")
            try:
                values[key] = SCHEMA[sec][key](raw)
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"{source}: {_where(text, sec, key)}: bad value {raw!r} ({exc})") from None
    if "psi_c" in values:
        if "pi" in values:
            raise ConfigError(f"{source}: give either pi or psi_c, not both")
        try:
            values["pi"] = pi_from_adsorption_constant(values.pop("psi_c"), values.get("ex", 1.0))
        except ValueError as exc:
            raise ConfigError(f"{source}: {_where(text, 'model', 'psi_c')}: {exc}") from None
    try:
        return ScenarioConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def read_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, str(path))


def _fmt(v) -> str:
    if isinstance(v, ModelVariant):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(repr(float(s)) for s in v)
    return str(v)


def format_config(cfg: ScenarioConfig) -> str:
    """Normalized text form; ``parse_config(format_config(c)) == c``."""
    owner = {key: sec for sec, keys in SCHEMA.items() for key in keys}
    out = []
    current = None
    for f in fields(cfg):
        sec = owner[f.name]
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if sec != current:
            out.append(("\n" if out else "") + f"[{sec}]")
            current = sec
        out.append(f"{f.name} = {_fmt(v)}")
    return "\n".join(out) + "\n"


def write_config(path, cfg: ScenarioConfig):
    with open(path, "w") as fh:
        fh.write(format_config(cfg))
