"""Experiment configuration: a TOML file validated against a per-command schema.

Layout::

    command = "moment-scan"     # optional; must match the CLI command if given
    seed = 7                    # optional; --seed overrides
    output_dir = "runs/moment"  # optional; --out or LOEWNER_LAB_OUT override

    [params]
    kappa = 2.0
    lambda = 1.0
    t_list = [1, 2, 4, 8, 16, 32, 64]
    N = 100000

Every value is checked against its operation's preconditions before any
work starts; errors name the offending field, e.g. ``params.kappa``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigInvalid

COMMANDS = ("trace", "extract", "compare", "perturb-scan", "eta-tip", "lerw", "sle-sample",
            "moment-scan", "tail-scan", "grid-map", "lerw-vs-sle", "exponents")


@dataclass(frozen=True)
class Field:
    kind: str  # int, float, str, bool, floats, ints, path
    default: object = None
    check: object = None  # callable(value) -> bool
    rule: str = ""
    choices: tuple = ()
    required: bool = False


def _pos(v):
    return v > 0


def _unit(v):
    return 0 < v < 1


F = Field
GEOMETRY = F("str", "chordal", choices=("chordal", "radial"))
DRIVING = F("str", "zero", choices=("zero", "constant", "sle", "file"))

SCHEMA: dict = {
    "trace": {
        "geometry": GEOMETRY, "driving": DRIVING,
        "T": F("float", 1.0, _pos, "> 0"), "dt": F("float", 1e-3, _pos, "> 0"),
        "kappa": F("float", 2.0, lambda v: 0 < v < 8, "in (0, 8)"),
        "value": F("float", 0.0), "driving_file": F("path"),
        "d_cut": F("float", 1e-3, lambda v: 0 < v <= 0.1, "in (0, 0.1]"),
    },
    "extract": {
        "curve_file": F("path", required=True),
        "elementary": F("str", "linear", choices=("linear", "slit")),
    },
    "compare": {
        "geometry": GEOMETRY, "T": F("float", 1.0, _pos, "> 0"), "dt": F("float", 1e-3, _pos, "> 0"),
        "kappa": F("float", 2.0, lambda v: 0 < v < 8, "in (0, 8)"),
        "eps": F("float", 1e-3, _pos, "> 0"),
        "mode": F("str", "shift", choices=("shift", "noise")),
        "beta": F("float", 0.5, lambda v: v < 1, "< 1"),
        "r": F("float", 0.05, _unit, "in (0, 1)"), "p": F("float", 0.5, _unit, "in (0, 1)"),
        "rho": F("float", 1.5, lambda v: v > 1, "> 1"),
        "d_cut": F("float", 1e-3, lambda v: 0 < v <= 0.1, "in (0, 0.1]"),
    },
    "perturb-scan": {
        "geometry": GEOMETRY, "T": F("float", 1.0, _pos, "> 0"), "dt": F("float", 1e-3, _pos, "> 0"),
        "kappa": F("float", 2.0, lambda v: 0 < v < 8, "in (0, 8)"),
        "driving": F("str", "sle", choices=("zero", "sle")),
        "eps_list": F("floats", [1e-2, 5e-3, 2e-3, 1e-3], lambda v: len(v) >= 3 and min(v) > 0,
                      "at least three positive values"),
        "rho": F("float", 1.5, lambda v: v > 1, "> 1"), "p": F("float", 0.5, _unit, "in (0, 1)"),
        "mode": F("str", "shift", choices=("shift", "noise")),
    },
    "eta-tip": {
        "curve_file": F("path"), "geometry": GEOMETRY,
        "T": F("float", 1.0, _pos, "> 0"), "dt": F("float", 1e-3, _pos, "> 0"),
        "kappa": F("float", 2.0, lambda v: 0 < v < 8, "in (0, 8)"),
        "d_cut": F("float", 1e-3, lambda v: 0 < v <= 0.1, "in (0, 0.1]"),
        "delta_list": F("floats", [0.02, 0.05, 0.1], lambda v: len(v) >= 1 and min(v) > 0,
                        "nonempty, positive"),
    },
    "lerw": {
        "domain": F("str", "disk", choices=("disk", "square")),
        "n": F("int", 50, lambda v: v >= 2, ">= 2"), "half": F("int", 3, lambda v: v >= 1, ">= 1"),
        "N": F("int", 10, lambda v: v >= 1, ">= 1"),
        "modulus": F("bool", False), "n_list": F("ints", [50, 100, 200], lambda v: min(v) >= 4, ">= 4"),
        "r": F("float", 0.05, lambda v: 0 < v < 1 / 11, "in (0, 1/11)"),
    },
    "sle-sample": {
        "geometry": GEOMETRY, "T": F("float", 1.0, _pos, "> 0"), "dt": F("float", 1e-3, _pos, "> 0"),
        "kappa": F("float", 2.0, lambda v: 0 < v < 8, "in (0, 8)"),
        "N": F("int", 1, lambda v: v >= 1, ">= 1"), "rotate": F("bool", False),
        "d_cut": F("float", 1e-3, lambda v: 0 < v <= 0.1, "in (0, 0.1]"),
    },
    "moment-scan": {
        "kappa": F("float", 2.0, lambda v: 0 < v < 8, "in (0, 8)"),
        "lambda": F("float", 1.0),
        "t_list": F("floats", [1, 2, 4, 8, 16, 32, 64],
                    lambda v: len(v) >= 3 and min(v) >= 1 and max(v) <= 100,
                    "at least three times in [1, 100]"),
        "N": F("int", 10000, lambda v: v >= 2, ">= 2"),
        "dt": F("float", 1 / 64, _pos, "> 0"),
    },
    "tail-scan": {
        "kappa": F("float", 2.0, lambda v: 0 < v < 8, "in (0, 8)"),
        "beta": F("float", 0.8), "T": F("float", 1.0, _pos, "> 0"),
        "d_star_list": F("floats", [0.25, 0.125, 0.0625, 0.03125],
                         lambda v: len(v) >= 2 and all(0 < x < 1 for x in v),
                         "at least two values in (0, 1)"),
        "N": F("int", 200, lambda v: v >= 1, ">= 1"),
    },
    "grid-map": {
        "domain": F("str", "disk", choices=("disk",)),
        "n_list": F("ints", [16, 32, 64, 128], lambda v: len(v) >= 3 and min(v) >= 4,
                    "at least three scales >= 4"),
        "samples": F("int", 500, _pos, "> 0"), "band": F("int", 200, lambda v: v >= 0, ">= 0"),
    },
    "lerw-vs-sle": {
        "n_list": F("ints", [50, 100, 200], lambda v: len(v) >= 1 and min(v) >= 4, ">= 4"),
        "N": F("int", 50, lambda v: v >= 1, ">= 1"), "T": F("float", 1.0, _pos, "> 0"),
        "eps_sigma": F("float", 0.1, lambda v: 0 < v < 2, "in (0, 2)"),
        "dt": F("float", 2e-3, _pos, "> 0"),
        "d_cut": F("float", 5e-3, lambda v: 0 < v <= 0.1, "in (0, 0.1]"),
    },
    "exponents": {},
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    params: dict
    seed: int
    output_dir: Path
    source: Path | None = None
    raw: dict = field(default_factory=dict, compare=False)


def _coerce(path: str, spec: Field, value, base: Path | None):
    k = spec.kind
    try:
        if k == "int":
            if isinstance(value, bool) or not float(value).is_integer():
                raise TypeError
            v = int(value)
        elif k == "float":
            if isinstance(value, bool):
                raise TypeError
            v = float(value)
            if not math.isfinite(v):
                raise ConfigInvalid(path, "must be finite")
        elif k == "bool":
            if not isinstance(value, bool):
                raise TypeError
            v = value
        elif k == "str":
            if not isinstance(value, str):
                raise TypeError
            v = value
        elif k in ("floats", "ints"):
            if not isinstance(value, (list, tuple)):
                raise TypeError
            v = [float(x) for x in value]
            if k == "ints":
                if any(not x.is_integer() for x in v):
                    raise TypeError
                v = [int(x) for x in v]
        elif k == "path":
            if not isinstance(value, str):
                raise TypeError
            p = Path(value)
            v = p if p.is_absolute() or base is None else base / p
        else:  # pragma: no cover
            raise TypeError
    except (TypeError, ValueError):
        raise ConfigInvalid(path, f"expected {k}, got {value!r}") from None
    if spec.choices and v not in spec.choices:
        raise ConfigInvalid(path, f"must be one of {', '.join(spec.choices)}")
    if spec.check is not None and not spec.check(v):
        raise ConfigInvalid(path, f"must be {spec.rule}, got {value!r}")
    return v


def validate(command: str, params: dict, base: Path | None = None) -> dict:
    if command not in SCHEMA:
        raise ConfigInvalid("command", f"unknown command {command!r}")
    schema = SCHEMA[command]
    unknown = sorted(set(params) - set(schema))
    if unknown:
        raise ConfigInvalid(f"params.{unknown[0]}", f"not a parameter of {command}")
    out = {}
    for name, spec in schema.items():
        if name in params:
            out[name] = _coerce(f"params.{name}", spec, params[name], base)
        elif spec.required:
            raise ConfigInvalid(f"params.{name}", "missing")
        else:
            out[name] = spec.default
    _cross_checks(command, out)
    return out


def _cross_checks(command: str, p: dict) -> None:
    # preconditions that involve more than one field
    from . import sle_stats

    if "dt" in p and "T" in p and p["dt"] > p["T"]:
        raise ConfigInvalid("params.dt", "must not exceed params.T")
    if command == "compare" and not p["p"] < 1 / p["rho"]:
        raise ConfigInvalid("params.p", "must be below 1/rho")
    if command == "perturb-scan" and not p["p"] < 1 / p["rho"]:
        raise ConfigInvalid("params.p", "must be below 1/rho")
    if command == "moment-scan":
        lc = sle_stats.lambda_c(p["kappa"])
        if not p["lambda"] < lc:
            raise ConfigInvalid("params.lambda", f"must be below lambda_c = {lc:.6g}")
    if command == "tail-scan":
        bp = sle_stats.beta_plus(p["kappa"])
        if not bp < p["beta"] < 1:
            raise ConfigInvalid("params.beta", f"must lie in ({bp:.6g}, 1)")
    if command in ("trace",) and p["driving"] == "file" and p["driving_file"] is None:
        raise ConfigInvalid("params.driving_file", "required when driving = 'file'")


def load_config(path, command: str, seed: int | None = None, out: str | None = None,
                env: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigInvalid("config", f"{path} not found") from None
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigInvalid("config", f"cannot parse {path}: {exc}") from None
    return from_dict(raw, command, seed, out, base=path.parent, source=path, env=env)


def from_dict(raw: dict, command: str, seed: int | None = None, out: str | None = None,
              base: Path | None = None, source: Path | None = None,
              env: dict | None = None) -> ExperimentConfig:
    allowed = {"command", "seed", "output_dir", "params"}
    extra = sorted(set(raw) - allowed)
    if extra:
        raise ConfigInvalid(extra[0], "unknown top-level key")
    if "command" in raw and raw["command"] != command:
        raise ConfigInvalid("command", f"config is for {raw['command']!r}, not {command!r}")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigInvalid("params", "must be a table")
    s = raw.get("seed", 0) if seed is None else seed
    if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s < 2 ** 64:
        raise ConfigInvalid("seed", "must be an integer in [0, 2^64)")
    env = {} if env is None else env
    od = out or env.get("LOEWNER_LAB_OUT") or raw.get("output_dir") or f"runs/{command}"
    if not isinstance(od, str):
        raise ConfigInvalid("output_dir", "must be a string")
    odp = Path(od)
    if not odp.is_absolute() and base is not None and out is None and "LOEWNER_LAB_OUT" not in env:
        odp = base / odp
    return ExperimentConfig(command, validate(command, params, base), int(s), odp, source, raw)
