"""Sectioned key-value config files (INI syntax) and deterministic writers.

Schema::

    [background]
    kind = S1xS3                  ; S1xS3 | RoundS4 | ProductSurfaces | ConstantsOnly
    circumference = 6.283185307179586
    sphere_radius = 1.0
    radius = 1.0                  ; RoundS4
    kappa1 = -1.0                 ; ProductSurfaces
    kappa2 = -1.0
    area1 = 12.566370614359172
    area2 = 12.566370614359172
    name = CP2                    ; ConstantsOnly
    chi = 3
    weyl_l2 = 118.4352528130723
    yamabe = 53.31459679080913
    q_total = 59.21762640653615
    perturbation_amplitude = 0.0  ; background factor w = a cos(m 2 pi theta / L)
    perturbation_mode = 1

    [solver]
    delta = -1.0
    t_target = 0.0
    grid_n = 128
    t_step_init = 0.25
    t_step_min = 1e-6
    newton_tol = 1e-11
    newton_max_iter = 30
    cone_margin_min = 0.0
    yamabe = 61.562             ; supplied Y for the lower-bound monitor

    [spectrum]
    source = product              ; product | reduced
    kappa1 = -1.0
    kappa2 = -1.0
    eigs1 = 0, 0.1, 1
    eigs2 = 0, 0.1, 1
    modes = 16                    ; reduced: Fourier modes 0..modes
"""

from __future__ import annotations

import configparser
import csv
import json
import math
from pathlib import Path

import numpy as np

from .continuity_solver import SolveConfig
from .errors import ConfigurationError
from .model_geometry import ConstantsOnly, ProductSurfaces, ReducedField, RoundS4, S1xS3

FLOAT_FORMAT = "%.17g"


def read_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is None:
        return parser
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {p}")
    try:
        parser.read(p, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse {p}: {exc}") from exc
    return parser


def _section(parser, name):
    return parser[name] if parser.has_section(name) else {}


def _float(section, key, default):
    raw = section.get(key, None)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{key} = {raw!r} is not a number") from exc


def _int(section, key, default):
    raw = section.get(key, None)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{key} = {raw!r} is not an integer") from exc


def _float_list(section, key):
    raw = section.get(key, "")
    items = [s.strip() for s in raw.replace(";", ",").split(",") if s.strip()]
    try:
        return [float(x) for x in items]
    except ValueError as exc:
        raise ConfigurationError(f"{key} contains a non-number") from exc


def background_from_config(parser):
    sec = _section(parser, "background")
    kind = sec.get("kind", "S1xS3")
    if kind == "S1xS3":
        return S1xS3(_float(sec, "circumference", 2.0 * math.pi), _float(sec, "sphere_radius", 1.0))
    if kind == "RoundS4":
        return RoundS4(_float(sec, "radius", 1.0))
    if kind == "ProductSurfaces":
        return ProductSurfaces(
            _float(sec, "kappa1", 1.0), _float(sec, "kappa2", 1.0),
            _float(sec, "area1", 4.0 * math.pi), _float(sec, "area2", 4.0 * math.pi),
        )
    if kind == "ConstantsOnly":
        return ConstantsOnly(
            sec.get("name", "unnamed"), _int(sec, "chi", 0), _float(sec, "weyl_l2", 0.0),
            _float(sec, "yamabe", 0.0), _float(sec, "q_total", 0.0),
        )
    raise ConfigurationError(f"unknown background kind {kind!r}")


def background_factor_from_config(parser, bg, n):
    sec = _section(parser, "background")
    amp = _float(sec, "perturbation_amplitude", 0.0)
    if amp == 0.0:
        return None
    mode = _int(sec, "perturbation_mode", 1)
    w = 2.0 * math.pi / bg.circumference
    return ReducedField.from_function(lambda th: amp * np.cos(mode * w * th), n, bg.circumference)


def solve_config_from(parser, overrides=None) -> SolveConfig:
    sec = _section(parser, "solver")
    defaults = SolveConfig.__dataclass_fields__
    values = {}
    for name, fld in defaults.items():
        caster = _int if fld.type in ("int", int) else _float
        values[name] = caster(sec, name, fld.default)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return SolveConfig(**values)


# -- deterministic output ----------------------------------------------------------


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            values = [row[c] for c in columns] if isinstance(row, dict) else row
            writer.writerow([fmt(v) for v in values])


def _json(value, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return FLOAT_FORMAT % v if math.isfinite(v) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{_json(str(k), indent, level + 1)}: {_json(v, indent, level + 1)}"
                 for k, v in sorted(value.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        if len(value) == 0:
            return "[]"
        items = [pad + _json(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(value).__name__}")


def dumps_json(value, indent: int = 2) -> str:
    """JSON text with sorted keys and every float printed to 17 significant digits."""
    return _json(value, indent, 0) + "\n"


def write_json(path, value) -> None:
    Path(path).write_text(dumps_json(value), encoding="utf-8")
