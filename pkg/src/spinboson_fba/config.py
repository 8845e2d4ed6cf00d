"""Run configuration: strict TOML/JSON loading, validation and defaults.

Complex numbers may be written as plain numbers or as ``[re, im]`` pairs.
Unknown keys are rejected.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import tomli

from .errors import ConfigurationError
from .twisted import TwistConfig, random_twisted_setup
from .ybe import BoundarySide, ModelParams, ReflectionParams

TASKS = ("verify-ybe", "spectrum", "bethe", "tq-check", "qc", "scan")
FORMATS = ("json", "csv", "both")

MODEL_DEFAULTS = {"eta": 0.7, "z0": 0.31, "z1": 0.23, "beta_c": 1.1, "gamma_c": 0.8}
NUMERICS_DEFAULTS = {
    "nt": 24,
    "margin": 4,
    "seed": 0,
    "rel_tol": 1e-7,
    "leak_tol": 1e-8,
    "m_max": 4,
    "pairs": 5,
}
QC_DEFAULTS = {
    "z1": 0.23,
    "beta_c": 1.1,
    "gamma_c": 0.8,
    "xi_plus": 0.9,
    "xi_minus": 0.65,
    "k_max": 6,
    "mu1": 0.3,
    "nu1": 0.7,
    "xi1m": 0.45,
    "xi0p": 0.2,
    "xi1p": 0.35,
    "z0": 0.4,
    "lam": 0.6,
    "U": 2.0,
    "V": 3.0,
    "X": 0.7,
    "gaudin_m_max": 3,
    "chi": 1.0,
}
SCAN_DEFAULTS = {"variant": "minus2", "p_inf": None, "zeta": None, "chi": [1.0], "m_max": 2, "limit_k": [2, 4, 6, 8, 10, 12]}
_BOUNDARY_KEYS = {"xi", "kappa", "theta"}
_TWIST_KEYS = {"K", "gauge_right", "random", "scale"}
_TOP_KEYS = {"task", "model", "twist", "open", "numerics", "qc", "scan", "output"}


@dataclass
class RunConfig:
    task: str
    model: ModelParams
    twist: TwistConfig | None
    open: ReflectionParams | None
    numerics: dict
    qc: dict
    scan: dict
    output: dict
    raw: dict = field(default_factory=dict)

    @property
    def boundary(self) -> str | None:
        return "twist" if self.twist is not None else ("open" if self.open is not None else None)

    def echo(self) -> dict:
        """Fully materialized, JSON-ready view of the configuration."""
        out = {
            "task": self.task,
            "model": {k: to_json(v) for k, v in asdict(self.model).items()},
            "numerics": to_json(self.numerics),
            "output": to_json(self.output),
        }
        if self.twist is not None:
            out["twist"] = {"K": to_json(self.twist.K), "gauge_right": to_json(self.twist.gauge_right)}
        if self.open is not None:
            out["open"] = {
                side: {k: to_json(getattr(getattr(self.open, side), k)) for k in ("xi", "kappa", "theta")}
                for side in ("plus", "minus")
            }
        if self.task == "qc":
            out["qc"] = to_json(self.qc)
        if self.task == "scan":
            out["scan"] = to_json(self.scan)
        return out


def to_json(v):
    """Recursively convert numpy/complex values; complex numbers become ``[re, im]``."""
    if isinstance(v, dict):
        return {str(k): to_json(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [to_json(x) for x in v]
    if isinstance(v, np.ndarray):
        return [to_json(x) for x in v.tolist()]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def parse_complex(v, name: str) -> complex:
    if isinstance(v, bool):
        raise ConfigurationError(f"{name}: expected a number, got a boolean")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise ConfigurationError(f"{name}: expected a number or an [re, im] pair, got {v!r}")


def _real_or_complex(v, name):
    z = parse_complex(v, name)
    return z.real if z.imag == 0 else z


def _check_keys(table: dict, allowed, where: str):
    if not isinstance(table, dict):
        raise ConfigurationError(f"{where}: expected a table")
    for k in table:
        if k not in allowed:
            raise ConfigurationError(f"unknown key '{where}.{k}'" if where else f"unknown key '{k}'")


def _merge(defaults: dict, given: dict, where: str) -> dict:
    _check_keys(given, defaults.keys(), where)
    out = dict(defaults)
    out.update(given)
    return out


def _matrix(v, name) -> np.ndarray:
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(r, list) and len(r) == 2 for r in v)):
        raise ConfigurationError(f"{name}: expected a 2x2 nested list")
    return np.array([[parse_complex(x, f"{name}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(v)])


def _side(v, name) -> BoundarySide:
    _check_keys(v, _BOUNDARY_KEYS, name)
    if "xi" not in v:
        raise ConfigurationError(f"{name}.xi is required")
    return BoundarySide(*(parse_complex(v.get(k, 0.0), f"{name}.{k}") for k in ("xi", "kappa", "theta")))


def _int(v, name, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigurationError(f"{name}: expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigurationError(f"{name}: must be >= {lo}")
    return v


def parse_config(data: dict, overrides: dict | None = None) -> RunConfig:
    """Validate a parsed key-value tree.  ``overrides`` (from the command line)
    replace ``task`` and ``numerics``/``output`` entries."""
    data = json.loads(json.dumps(data))  # detach, and normalize TOML types
    overrides = overrides or {}
    _check_keys(data, _TOP_KEYS, "")
    if "task" in overrides:
        data["task"] = overrides["task"]
    task = data.get("task")
    if task not in TASKS:
        raise ConfigurationError(f"task: expected one of {', '.join(TASKS)}, got {task!r}")

    num = _merge(NUMERICS_DEFAULTS, data.get("numerics", {}), "numerics")
    for k in ("nt", "margin", "seed"):
        if overrides.get(k) is not None:
            num[k] = overrides[k]
    for k in ("nt", "margin", "seed", "m_max", "pairs"):
        num[k] = _int(num[k], f"numerics.{k}", 0)
    if num["margin"] >= num["nt"]:
        raise ConfigurationError("numerics.margin must be smaller than numerics.nt")
    for k in ("rel_tol", "leak_tol"):
        if not isinstance(num[k], (int, float)) or num[k] <= 0:
            raise ConfigurationError(f"numerics.{k}: expected a positive number")

    out = _merge({"path": "out", "format": "json"}, data.get("output", {}), "output")
    if overrides.get("out") is not None:
        out["path"] = overrides["out"]
    if overrides.get("format") is not None:
        out["format"] = overrides["format"]
    if out["format"] not in FORMATS:
        raise ConfigurationError(f"output.format: expected one of {', '.join(FORMATS)}")

    has_twist, has_open = "twist" in data, "open" in data
    if has_twist and has_open:
        raise ConfigurationError("exactly one boundary is allowed: got both 'twist' and 'open'")
    if task in ("verify-ybe", "spectrum", "bethe", "tq-check") and not (has_twist or has_open):
        raise ConfigurationError(f"task {task} needs a boundary: give a 'twist' or an 'open' table")
    if task == "scan" and not has_open:
        raise ConfigurationError("task scan needs an 'open' table")

    twist = None
    model_given = data.get("model", {})
    if has_twist and data["twist"].get("random", False):
        _check_keys(data["twist"], _TWIST_KEYS, "twist")
        if model_given:
            raise ConfigurationError("twist.random draws the model; remove the 'model' table")
        if "K" in data["twist"]:
            raise ConfigurationError("twist.random and twist.K are mutually exclusive")
        scale = float(data["twist"].get("scale", 1.0))
        model, twist = random_twisted_setup(num["seed"], num["nt"], num["margin"], scale)
    else:
        m = _merge(MODEL_DEFAULTS, model_given, "model")
        model = ModelParams(
            *(_real_or_complex(m[k], f"model.{k}") for k in ("eta", "z0", "z1", "beta_c", "gamma_c")),
            dim_boson=num["nt"],
            margin=num["margin"],
        )
        if has_twist:
            tw = data["twist"]
            _check_keys(tw, _TWIST_KEYS - {"random", "scale"}, "twist")
            if "K" not in tw:
                raise ConfigurationError("twist.K is required (or set twist.random = true)")
            gr = _matrix(tw["gauge_right"], "twist.gauge_right") if "gauge_right" in tw else np.eye(2, dtype=complex)
            twist = TwistConfig(_matrix(tw["K"], "twist.K"), gr)

    refl = None
    if has_open:
        op = data["open"]
        _check_keys(op, {"plus", "minus"}, "open")
        if "plus" not in op or "minus" not in op:
            raise ConfigurationError("open needs both 'plus' and 'minus' tables")
        refl = ReflectionParams(_side(op["plus"], "open.plus"), _side(op["minus"], "open.minus"))

    qc = _merge(QC_DEFAULTS, data.get("qc", {}), "qc")
    for k, v in qc.items():
        if k in ("k_max", "gaudin_m_max"):
            qc[k] = _int(v, f"qc.{k}", 0)
        else:
            qc[k] = _real_or_complex(v, f"qc.{k}")

    scan = _merge(SCAN_DEFAULTS, data.get("scan", {}), "scan")
    if scan["variant"] not in ("minus2", "plus2"):
        raise ConfigurationError("scan.variant: expected 'minus2' or 'plus2'")
    for k in ("p_inf", "zeta", "chi"):
        if scan[k] is not None:
            if not isinstance(scan[k], list) or not scan[k]:
                raise ConfigurationError(f"scan.{k}: expected a non-empty list")
            scan[k] = [parse_complex(x, f"scan.{k}") for x in scan[k]]
    scan["m_max"] = _int(scan["m_max"], "scan.m_max", 0)
    scan["limit_k"] = [_int(k, "scan.limit_k", 1) for k in scan["limit_k"]]

    return RunConfig(task, model, twist, refl, num, qc, scan, out, raw=data)


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Read a ``.toml`` or ``.json`` file; parse errors carry the line number."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    text = path.read_text()
    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            data = tomli.loads(text)
        elif suffix == ".json":
            data = json.loads(text)
        else:
            raise ConfigurationError(f"unsupported config extension {suffix!r} (use .toml or .json)")
    except tomli.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: TOML parse error: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(data, overrides)
