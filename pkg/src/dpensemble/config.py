"""Run configuration: a YAML file with one mapping per section.

Every key is checked against a schema; diagnostics carry the source line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import re

import yaml


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot or sign (``4.5e9``, ``1e8``)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+][0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where = f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


def _num(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError("expected a number")
    if not math.isfinite(v):
        raise TypeError("expected a finite number")
    return float(v)


def _pos(v):
    v = _num(v)
    if v <= 0:
        raise TypeError("expected a positive number")
    return v


def _nonneg(v):
    v = _num(v)
    if v < 0:
        raise TypeError("expected a non-negative number")
    return v


def _prob(v):
    v = _num(v)
    if not 0 <= v <= 1:
        raise TypeError("expected a probability in [0, 1]")
    return v


def _posint(v):
    if isinstance(v, bool):
        raise TypeError("expected a positive integer")
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    if not isinstance(v, int) or v < 1:
        raise TypeError("expected a positive integer")
    return v


def _bool(v):
    if not isinstance(v, bool):
        raise TypeError("expected true/false")
    return v


def _str(v):
    if not isinstance(v, str):
        raise TypeError("expected a string")
    return v


def _choice(*opts):
    def f(v):
        if v not in opts:
            raise TypeError(f"expected one of {', '.join(map(str, opts))}")
        return v

    return f


def _list(item, min_len=1):
    def f(v):
        if not isinstance(v, list) or len(v) < min_len:
            raise TypeError(f"expected a list of at least {min_len} item(s)")
        return [item(x) for x in v]

    return f


def _band(v):
    lo, hi = _list(_pos, 2)(v)[:2]
    if len(v) != 2 or hi <= lo:
        raise TypeError("expected [low, high] with high > low")
    return [lo, hi]


def _cos_theta(v):
    if v == "isotropic":
        return math.sqrt(1.0 / 3.0)
    v = _num(v)
    if not 0 < abs(v) <= 1:
        raise TypeError("expected 'isotropic' or a number with 0 < |cos| <= 1")
    return v


def _seed(v):
    if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < 2**64:
        raise TypeError("expected an unsigned 64-bit integer")
    return v


Validator = Callable[[Any], Any]

SCHEMA: dict[str, dict[str, Validator]] = {
    "detector": {
        "mode": _choice("y", "z"),
        "bias_field": _nonneg,
        "electrode_depth": _pos,
        "mass": _pos,
        "ensemble_size": _posint,
        "temperature": _pos,
        "coherence_time": _pos,
        "linewidth_hz": _pos,
    },
    "cavity": {
        "frequency_hz": _pos,
        "coupling_hz": _pos,
        "transition_hz": _pos,
        "kappa_hz": _pos,
        "quality_factor": _pos,
        "drive_amplitude": _pos,
        "temperature": _nonneg,
        "dispersive_ratio": _pos,
    },
    "readout": {
        "ensemble_size": _posint,
        "probability": _prob,
        "interpretation": _choice("mixture", "expectation"),
        "grid_points": _posint,
        "grid_half_span": _pos,
        "include_offset": _bool,
        "ode_points": _posint,
        "ode_t_end_kappa": _pos,
        "ode_tolerance": _pos,
        "roundtrip": _list(_prob),
        "roundtrip_tolerance": _pos,
    },
    "hypothesis": {
        "rho_gev_cm3": _pos,
        "cos_theta": _cos_theta,
        "v_dm": _pos,
    },
    "scan": {
        "band_hz": _band,
        "bandwidth_hz": _pos,
        "quality_factor": _pos,
        "dwell_s": _pos,
        "shots": _posint,
        "tau_s": _pos,
        "points": _posint,
        "p_targets": _list(_prob),
        "dwells_s": _list(_pos),
        "ensemble_sizes": _list(_posint),
        "quoted_days": _pos,
        "reconstruct_dwell_s": _pos,
        "assert_log10_below": _num,
    },
    "montecarlo": {
        "shots": _posint,
        "p_signal": _prob,
        "p_background": _prob,
        "trials": _posint,
        "p_signal_grid": _list(_prob),
        "workers": _posint,
        "seed": _seed,
    },
    "output": {
        "directory": _str,
        "formats": _list(_choice("csv", "json")),
    },
}
TOP_LEVEL = {"command": _choice("spectrum", "thermal", "exclusion", "plan", "montecarlo"), "strict": _bool}


@dataclass
class RunConfig:
    command: str | None
    sections: dict[str, dict[str, Any]]
    lines: dict[tuple, int] = field(default_factory=dict)
    source: str | None = None
    warnings: list[str] = field(default_factory=list)

    def section(self, name: str) -> dict[str, Any]:
        return self.sections.get(name, {})

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str):
        sec = self.sections.get(section)
        if sec is None or key not in sec:
            line = self.lines.get((section,)) if sec is not None else None
            raise ConfigError(f"missing required key '{section}.{key}'", line, self.source)
        return sec[key]

    def error(self, message: str, section: str, key: str | None = None) -> ConfigError:
        path = (section, key) if key else (section,)
        return ConfigError(message, self.lines.get(path, self.lines.get((section,))), self.source)


def _record_lines(node, path, lines):
    if isinstance(node, yaml.MappingNode):
        seen = set()
        for k, v in node.value:
            key = k.value
            if key in seen:
                raise ConfigError(f"duplicate key '{'.'.join(path + (key,))}'", k.start_mark.line + 1)
            seen.add(key)
            lines[path + (key,)] = k.start_mark.line + 1
            _record_lines(v, path + (key,), lines)


def parse_config(text: str, source: str | None = None, strict: bool = False) -> RunConfig:
    try:
        root = yaml.compose(text, Loader=_Loader)
        raw = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None, source) from None
    if root is None:
        raise ConfigError("configuration is empty", None, source)
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("top level must be a mapping", root.start_mark.line + 1, source)
    lines: dict[tuple, int] = {}
    try:
        _record_lines(root, (), lines)
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1].strip(), exc.line, source) from None

    strict = strict or raw.get("strict") is True
    problems = []
    sections: dict[str, dict] = {}
    command = None
    for key, val in raw.items():
        line = lines[(key,)]
        if key in TOP_LEVEL:
            try:
                v = TOP_LEVEL[key](val)
            except TypeError as exc:
                raise ConfigError(f"'{key}': {exc}", line, source) from None
            if key == "command":
                command = v
            continue
        if key not in SCHEMA:
            problems.append((f"unknown section '{key}'", line))
            continue
        if not isinstance(val, dict):
            raise ConfigError(f"section '{key}' must be a mapping", line, source)
        sec = {}
        for k, v in val.items():
            kline = lines[(key, k)]
            if k not in SCHEMA[key]:
                problems.append((f"unknown key '{key}.{k}'", kline))
                continue
            try:
                sec[k] = SCHEMA[key][k](v)
            except TypeError as exc:
                raise ConfigError(f"'{key}.{k}': {exc}", kline, source) from None
        sections[key] = sec
    warn = []
    for msg, line in problems:
        if strict:
            raise ConfigError(msg, line, source)
        warn.append(f"{source + ':' if source else ''}{line}: {msg} (ignored)")
    return RunConfig(command, sections, lines, source, warn)


def load_config(path: str | Path, strict: bool = False) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(p)) from None
    return parse_config(text, str(p), strict)
