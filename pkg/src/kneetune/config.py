"""Run configuration: strict JSON loading and serialization.

Every section is optional and falls back to the package defaults, but any
key that is not a known field is an error. Errors carry the dotted path of
the offending field, e.g. ``pso.bounds.kappa``.
"""

import json
import math
from dataclasses import asdict, dataclass, field, fields
from importlib import resources

from .controller import GAIN_NAMES, ControllerGains
from .errors import ConfigError
from .evaluation import ConstraintParams, ReferenceSpec
from .plant import PlantParams
from .pso import TABLE_BOUNDS, PsoConfig
from .simulation import SimConfig, SimState

SECTIONS = ("plant", "sim", "reference", "constraints", "pso", "gains")


@dataclass(frozen=True)
class RunConfig:
    plant: PlantParams = field(default_factory=PlantParams)
    sim: SimConfig = field(default_factory=SimConfig)
    reference: ReferenceSpec = field(default_factory=ReferenceSpec)
    constraints: ConstraintParams = field(default_factory=ConstraintParams)
    pso: PsoConfig = field(default_factory=PsoConfig)
    gains: ControllerGains = None

    def __post_init__(self):
        if self.constraints.final_time > self.sim.t_final + 1e-9 * self.sim.t_final:
            raise ConfigError("constraints.final_time",
                              "constraint window extends past the simulation horizon")


def _join(path, key):
    return f"{path}.{key}" if path else key


def _number(value, path, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _mapping(data, path):
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    return data


def _build(cls, data, path, special=None, required=False):
    """Instantiate dataclass ``cls`` from ``data``, rejecting unknown keys."""
    data = _mapping(data, path)
    special = special or {}
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(_join(path, key), "unknown field")
        sub = _join(path, key)
        if key in special:
            kwargs[key] = special[key](value, sub)
        elif known[key].type is str or isinstance(known[key].default, str):
            if not isinstance(value, str):
                raise ConfigError(sub, f"expected a string, got {value!r}")
            kwargs[key] = value
        else:
            kwargs[key] = _number(value, sub, integer=isinstance(known[key].default, int)
                                  and not isinstance(known[key].default, bool))
    if required:
        for name in known:
            if name not in kwargs:
                raise ConfigError(_join(path, name), "missing required field")
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(_join(path, exc.path), exc.reason) from None


def _bounds(data, path):
    data = _mapping(data, path)
    out = dict(zip(GAIN_NAMES, TABLE_BOUNDS))
    for name, pair in data.items():
        sub = _join(path, name)
        if name not in out:
            raise ConfigError(sub, "unknown field")
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(sub, "expected [min, max]")
        lo, hi = (_number(v, sub) for v in pair)
        if not lo < hi:
            raise ConfigError(sub, f"need min < max, got [{lo}, {hi}]")
        out[name] = (lo, hi)
    return tuple(out[name] for name in GAIN_NAMES)


def _pso(data, path):
    data = _mapping(data, path)
    if "names" in data:
        raise ConfigError(_join(path, "names"), "unknown field")
    return _build(PsoConfig, data, path, special={"bounds": _bounds})


def _sim(data, path):
    return _build(SimConfig, data, path, special={
        "initial_state": lambda d, p: _build(SimState, d, p)})


def run_config_from_dict(data):
    data = _mapping(data, "")
    for key in data:
        if key not in SECTIONS:
            raise ConfigError(key, "unknown field")
    builders = {
        "plant": lambda d, p: _build(PlantParams, d, p),
        "sim": _sim,
        "reference": lambda d, p: _build(ReferenceSpec, d, p),
        "constraints": lambda d, p: _build(ConstraintParams, d, p),
        "pso": _pso,
        "gains": lambda d, p: _build(ControllerGains, d, p, required=True),
    }
    kwargs = {key: builders[key](value, key) for key, value in data.items()
              if not (key == "gains" and value is None)}
    return RunConfig(**kwargs)


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def load_run_config(path):
    return run_config_from_dict(load_json(path))


def constraint_params_from_dict(data, path="constraints"):
    return _build(ConstraintParams, data, path)


def run_config_to_dict(cfg):
    pso = asdict(cfg.pso)
    pso.pop("names")
    pso["bounds"] = {name: list(b) for name, b in zip(cfg.pso.names, cfg.pso.bounds)}
    out = {
        "plant": asdict(cfg.plant),
        "sim": asdict(cfg.sim),
        "reference": asdict(cfg.reference),
        "constraints": asdict(cfg.constraints),
        "pso": pso,
    }
    if cfg.gains is not None:
        out["gains"] = cfg.gains.to_dict()
    return out


def default_config_path():
    return resources.files("kneetune") / "data" / "default_config.json"


def finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None
