"""Run configuration: strict TOML parsing, defaults and loss-free echo."""

import dataclasses
from dataclasses import dataclass, field, fields

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .errors import ConfigurationError

__all__ = ["RunConfig", "parse_config", "write_config", "load_config", "default_config",
           "ConfigError", "EXPERIMENTS"]

EXPERIMENTS = ("relax", "sod", "shock")


class ConfigError(ConfigurationError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


@dataclass
class CollisionBlock:
    family: str = "hs"
    kn: float = None
    mu_ref: float = None
    omega: float = 0.81
    T0: float = 273.0

    def check(self, key):
        if self.family not in ("hs", "vhs", "lj"):
            raise ConfigError(f"{key}.family", f"must be hs, vhs or lj, got {self.family!r}")
        if not 0.5 <= self.omega <= 1.0:
            raise ConfigError(f"{key}.omega", f"must lie in [0.5, 1], got {self.omega}")
        for name in ("kn", "mu_ref"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{key}.{name}", "must be positive")
        if self.kn is not None and self.mu_ref is not None:
            raise ConfigError(f"{key}.kn", "give kn or mu_ref, not both")
        if not self.T0 > 0:
            raise ConfigError(f"{key}.T0", "must be positive")


@dataclass
class VelocityBlock:
    half_width: float = 8.0
    points: int = 24

    def check(self, key):
        if not self.half_width > 0:
            raise ConfigError(f"{key}.half_width", "must be positive")
        if self.points < 4:
            raise ConfigError(f"{key}.points", "must be at least 4")


@dataclass
class SpectralBlock:
    modes: int = 0          # 0 means one mode per lattice point
    sphere_theta: int = 8
    sphere_phi: int = 8

    def check(self, key):
        if self.modes < 0:
            raise ConfigError(f"{key}.modes", "must be non-negative")
        for name in ("sphere_theta", "sphere_phi"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{key}.{name}", "must be at least 1")


@dataclass
class MeshBlock:
    kind: str = "uniform"
    x0: float = 0.0
    x1: float = 1.0
    cells: int = 100
    fine_lo: float = -10.0
    fine_hi: float = 5.0
    left_cells: int = 8
    fine_cells: int = 36
    right_cells: int = 16

    def check(self, key):
        if self.kind not in ("uniform", "stretched"):
            raise ConfigError(f"{key}.kind", "must be uniform or stretched")
        if not self.x1 > self.x0:
            raise ConfigError(f"{key}.x1", "must exceed x0")
        if self.cells < 3:
            raise ConfigError(f"{key}.cells", "must be at least 3")
        if self.kind == "stretched":
            if not self.x0 < self.fine_lo < self.fine_hi < self.x1:
                raise ConfigError(f"{key}.fine_lo", "need x0 < fine_lo < fine_hi < x1")
            if min(self.left_cells, self.right_cells) < 1 or self.fine_cells < 1:
                raise ConfigError(f"{key}.fine_cells", "cell counts must be positive")

    @property
    def total_cells(self):
        if self.kind == "stretched":
            return self.left_cells + self.fine_cells + self.right_cells
        return self.cells


@dataclass
class TimeBlock:
    cfl: float = 0.5
    mode: str = "global"
    final_time: float = 0.15
    residual: float = 1e-8
    max_steps: int = 200000
    max_wall_time: float = 0.0      # seconds, 0 for no limit
    dt_tau: float = 0.01

    def check(self, key):
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"{key}.cfl", f"must lie in (0, 1], got {self.cfl}")
        if self.mode not in ("global", "local"):
            raise ConfigError(f"{key}.mode", "must be global or local")
        for name in ("final_time", "residual", "dt_tau"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{key}.{name}", "must be positive")
        if self.max_steps < 1:
            raise ConfigError(f"{key}.max_steps", "must be positive")
        if not self.max_wall_time >= 0:
            raise ConfigError(f"{key}.max_wall_time", "must be non-negative")


@dataclass
class HybridBlock:
    operator: str = "hybrid"
    tc: str = "adaptive"
    tc_multiple: float = 0.4
    Pr: float = 2.0 / 3.0

    def check(self, key):
        if self.operator not in ("hybrid", "shakhov", "boltzmann"):
            raise ConfigError(f"{key}.operator", "must be hybrid, shakhov or boltzmann")
        if self.tc not in ("adaptive", "fixed"):
            raise ConfigError(f"{key}.tc", "must be adaptive or fixed")
        if not self.tc_multiple > 0:
            raise ConfigError(f"{key}.tc_multiple", "must be positive")
        if not 0 < self.Pr <= 2:
            raise ConfigError(f"{key}.Pr", "must lie in (0, 2]")


@dataclass
class OutputBlock:
    dir: str = "out"
    cadence: int = 0
    dump_f: bool = False

    def check(self, key):
        if self.cadence < 0:
            raise ConfigError(f"{key}.cadence", "must be non-negative")


@dataclass
class RelaxBlock:
    family: str = "anisotropic"
    temps: list = field(default_factory=lambda: [273.0, 373.0, 273.0])
    T0: float = 0.0          # 0 selects the reference temperature automatically
    output_times: list = field(default_factory=lambda: [0.0, 0.2, 0.5, 1.0, 2.0, 4.0])

    def check(self, key):
        if self.family not in ("anisotropic", "double_half_normal", "tailored_half_maxwellian"):
            raise ConfigError(f"{key}.family", f"unknown family {self.family!r}")
        if len(self.temps) != 3 or any(not t > 0 for t in self.temps):
            raise ConfigError(f"{key}.temps", "need three positive temperatures")
        if self.T0 < 0:
            raise ConfigError(f"{key}.T0", "must be non-negative")
        if any(t < 0 for t in self.output_times):
            raise ConfigError(f"{key}.output_times", "must be non-negative")


@dataclass
class SodBlock:
    left: list = field(default_factory=lambda: [1.0, 0.0, 1.0])
    right: list = field(default_factory=lambda: [0.125, 0.0, 1.25])
    diaphragm: float = 0.5

    def check(self, key):
        for side in ("left", "right"):
            v = getattr(self, side)
            if len(v) != 3 or not (v[0] > 0 and v[2] > 0):
                raise ConfigError(f"{key}.{side}", "need [rho, U, T] with rho, T > 0")


@dataclass
class ShockBlock:
    mach: float = 3.0
    precondition_residual: float = 1e-6
    precondition_steps: int = 4000

    def check(self, key):
        if not self.mach > 1:
            raise ConfigError(f"{key}.mach", "must exceed 1")
        if not self.precondition_residual > 0:
            raise ConfigError(f"{key}.precondition_residual", "must be positive")
        if self.precondition_steps < 0:
            raise ConfigError(f"{key}.precondition_steps", "must be non-negative")


_BLOCKS = {
    "collision": CollisionBlock, "velocity": VelocityBlock, "spectral": SpectralBlock,
    "mesh": MeshBlock, "time": TimeBlock, "hybrid": HybridBlock, "output": OutputBlock,
}
_EXP_BLOCKS = {"relax": RelaxBlock, "sod": SodBlock, "shock": ShockBlock}


@dataclass
class RunConfig:
    experiment: str
    collision: CollisionBlock
    velocity: VelocityBlock
    spectral: SpectralBlock
    mesh: MeshBlock
    time: TimeBlock
    hybrid: HybridBlock
    output: OutputBlock
    case: object          # RelaxBlock | SodBlock | ShockBlock

    def check(self):
        for name in _BLOCKS:
            getattr(self, name).check(name)
        self.case.check(self.experiment)
        if self.spectral.modes > self.velocity.points:
            raise ConfigError("spectral.modes", "cannot exceed velocity.points")
        return self

    def with_operator(self, operator):
        new = dataclasses.replace(self, hybrid=dataclasses.replace(self.hybrid, operator=operator))
        return new.check()


def _experiment_defaults(experiment):
    """Block defaults that differ between experiments."""
    if experiment == "relax":
        return {"collision": {"family": "vhs"}, "velocity": {"half_width": 8.0, "points": 32},
                "time": {"final_time": 4.0}}
    if experiment == "sod":
        return {"collision": {"kn": 1e-3}, "velocity": {"half_width": 6.0, "points": 24}}
    return {"collision": {"kn": 1.0}, "velocity": {"half_width": 8.0, "points": 24},
            "mesh": {"kind": "stretched", "x0": -25.0, "x1": 25.0, "cells": 60},
            "time": {"mode": "local"}, "hybrid": {"tc": "fixed", "tc_multiple": 0.4}}


def _coerce(cls, key, value, default):
    hints = {f.name: f for f in fields(cls)}
    f = hints[key]
    d = default
    if isinstance(d, bool):
        if not isinstance(value, bool):
            raise TypeError("expected a boolean")
        return value
    if isinstance(d, int) and f.type in (int, "int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError("expected an integer")
        return value
    if f.type in (float, "float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeError("expected a number")
        return float(value)
    if f.type in (str, "str"):
        if not isinstance(value, str):
            raise TypeError("expected a string")
        return value
    if f.type in (list, "list"):
        if not isinstance(value, list) or any(isinstance(x, bool) or not isinstance(x, (int, float))
                                              for x in value):
            raise TypeError("expected a list of numbers")
        return [float(x) for x in value]
    return value


def _build(cls, name, table, overrides):
    if not isinstance(table, dict):
        raise ConfigError(name, "must be a table")
    obj = cls()
    for k, v in overrides.items():
        setattr(obj, k, v)
    known = {f.name for f in fields(cls)}
    for k, v in table.items():
        if k not in known:
            raise ConfigError(f"{name}.{k}", "unknown key")
        try:
            setattr(obj, k, _coerce(cls, k, v, getattr(cls(), k)))
        except TypeError as exc:
            raise ConfigError(f"{name}.{k}", str(exc)) from None
    return obj


def parse_config(text):
    """Parse and validate a TOML document into a RunConfig."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<document>", f"malformed TOML: {exc}") from None
    return config_from_dict(doc)


def config_from_dict(doc):
    doc = dict(doc)
    exp = doc.pop("experiment", None)
    if exp is None:
        raise ConfigError("experiment", "missing (relax, sod or shock)")
    if exp not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {EXPERIMENTS}, got {exp!r}")
    defaults = _experiment_defaults(exp)
    blocks = {}
    for name, cls in _BLOCKS.items():
        blocks[name] = _build(cls, name, doc.pop(name, {}), defaults.get(name, {}))
    case = _build(_EXP_BLOCKS[exp], exp, doc.pop(exp, {}), {})
    for k in doc:
        raise ConfigError(k, "unknown key")
    return RunConfig(exp, case=case, **blocks).check()


def default_config(experiment):
    return config_from_dict({"experiment": experiment})


def _todict(obj):
    return {k: v for k, v in dataclasses.asdict(obj).items() if v is not None}


def write_config(cfg):
    """Serialise every resolved value; parse_config(write_config(c)) == c."""
    doc = {"experiment": cfg.experiment}
    for name in _BLOCKS:
        doc[name] = _todict(getattr(cfg, name))
    doc[cfg.experiment] = _todict(cfg.case)
    return tomli_w.dumps(doc)


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
