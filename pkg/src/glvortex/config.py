"""TOML experiment configuration: parsing, validation and serialisation.

Minimal file::

    model = "gradient_flow"      # gradient_flow | maxwell_higgs | effective_gf | effective_mh
    lambda = 2.0

    [[vortices]]
    x = -4.0
    y = 0.0
    n = 1

Every other key has a default (see ``DEFAULTS`` below and the README).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from .errors import ConfigError
from .lattice import BOUNDARY_MARGIN, LatticeSpec

MODELS = ("gradient_flow", "maxwell_higgs", "effective_gf", "effective_mh")
GLUE_METHODS = ("continuum", "lattice_core")


@dataclass(frozen=True)
class VortexSpec:
    x: float
    y: float
    n: int
    px: float = 0.0
    py: float = 0.0


@dataclass(frozen=True)
class LatticeConfig:
    spacing: float = 0.125
    extent: float | None = None   # minimum half-width; default max|z_j| + 8
    points: int | None = None     # if given, extent is used exactly with this many points


@dataclass(frozen=True)
class RunConfig:
    t_end: float = 10.0
    cfl_factor: float = 0.1
    courant_factor: float = 0.25
    snapshot_every: int = 100
    effective_dt: float = 0.01
    write_snapshots: bool = False


@dataclass(frozen=True)
class ProfileConfig:
    r_max: float = 25.0
    num_points: int = 2048


@dataclass(frozen=True)
class InitialConfig:
    glue: str = "continuum"
    perturbation: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class CompareConfig:
    law_residual: float = 0.3        # relative velocity-law residual bound
    deviation_in_h: float = 1.5      # sup trajectory deviation bound in units of h
    velocity_fraction: float = 0.3   # |z' - p| bound as a fraction of the initial |p|


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    lam: float
    vortices: tuple[VortexSpec, ...]
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    run: RunConfig = field(default_factory=RunConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    output_dir: str = "glvx_out"

    @property
    def is_pde(self) -> bool:
        return self.model in ("gradient_flow", "maxwell_higgs")

    @property
    def is_hamiltonian(self) -> bool:
        return self.model in ("maxwell_higgs", "effective_mh")

    def positions(self) -> list[tuple[float, float]]:
        return [(v.x, v.y) for v in self.vortices]

    def degrees(self) -> tuple[int, ...]:
        return tuple(v.n for v in self.vortices)

    def momenta(self) -> list[tuple[float, float]]:
        return [(v.px, v.py) for v in self.vortices]

    def lattice_spec(self) -> LatticeSpec:
        lc = self.lattice
        extent = lc.extent
        if extent is None:
            reach = max((math.hypot(v.x, v.y) for v in self.vortices), default=0.0)
            extent = reach + BOUNDARY_MARGIN
        try:
            if lc.points is not None:
                return LatticeSpec(extent, lc.points)
            return LatticeSpec.from_spacing(lc.spacing, extent)
        except Exception as exc:
            raise ConfigError(str(exc), "lattice") from exc


_SECTIONS = {"lattice": LatticeConfig, "run": RunConfig, "profile": ProfileConfig,
             "initial": InitialConfig, "compare": CompareConfig}
_TOP_KEYS = {"model", "lambda", "vortices", "output_dir", *_SECTIONS}


def _number(value, path: str, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"expected an integer, got {value!r}", path)
        return int(value)
    if not math.isfinite(value):
        raise ConfigError("must be finite", path)
    return float(value)


def _section(cls, raw: Any, name: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError("expected a table", name)
    known = {f.name: f for f in fields(cls)}
    values = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError("unknown key", f"{name}.{key}")
        default = getattr(cls(), key)
        path = f"{name}.{key}"
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError("expected true or false", path)
            values[key] = value
        elif isinstance(default, str):
            if not isinstance(value, str):
                raise ConfigError("expected a string", path)
            values[key] = value
        elif isinstance(default, int) or key == "points":
            values[key] = _number(value, path, int)
        else:
            values[key] = _number(value, path)
    return cls(**values)


def _vortex(raw: Any, idx: int) -> VortexSpec:
    path = f"vortices[{idx}]"
    if not isinstance(raw, dict):
        raise ConfigError("expected a table", path)
    for key in raw:
        if key not in ("x", "y", "n", "px", "py"):
            raise ConfigError("unknown key", f"{path}.{key}")
    for key in ("x", "y", "n"):
        if key not in raw:
            raise ConfigError("missing required key", f"{path}.{key}")
    n = _number(raw["n"], f"{path}.n", int)
    if n == 0:
        raise ConfigError("vortex degree must be nonzero", f"{path}.n")
    return VortexSpec(_number(raw["x"], f"{path}.x"), _number(raw["y"], f"{path}.y"), n,
                      _number(raw.get("px", 0.0), f"{path}.px"), _number(raw.get("py", 0.0), f"{path}.py"))


def from_dict(raw: dict) -> ExperimentConfig:
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError("unknown key", key)
    if "model" not in raw:
        raise ConfigError("missing required key", "model")
    model = raw["model"]
    if model not in MODELS:
        raise ConfigError(f"must be one of {', '.join(MODELS)}", "model")
    if "lambda" not in raw:
        raise ConfigError("missing required key", "lambda")
    lam = _number(raw["lambda"], "lambda")
    if lam <= 0:
        raise ConfigError("must be positive", "lambda")
    vort_raw = raw.get("vortices", [])
    if not isinstance(vort_raw, list):
        raise ConfigError("expected an array of tables", "vortices")
    vortices = tuple(_vortex(v, i) for i, v in enumerate(vort_raw))
    output_dir = raw.get("output_dir", "glvx_out")
    if not isinstance(output_dir, str):
        raise ConfigError("expected a string", "output_dir")
    sections = {name: _section(cls, raw.get(name), name) for name, cls in _SECTIONS.items()}
    config = ExperimentConfig(model, lam, vortices, output_dir=output_dir, **sections)
    validate(config)
    return config


def validate(config: ExperimentConfig) -> None:
    run = config.run
    if run.t_end < 0:
        raise ConfigError("must be nonnegative", "run.t_end")
    if not 0 < run.cfl_factor <= 0.2:
        raise ConfigError("must lie in (0, 0.2]", "run.cfl_factor")
    if not 0 < run.courant_factor <= 0.4:
        raise ConfigError("must lie in (0, 0.4]", "run.courant_factor")
    if run.snapshot_every < 1:
        raise ConfigError("must be >= 1", "run.snapshot_every")
    if run.effective_dt <= 0:
        raise ConfigError("must be positive", "run.effective_dt")
    if config.profile.num_points < 256:
        raise ConfigError("must be >= 256", "profile.num_points")
    if config.initial.glue not in GLUE_METHODS:
        raise ConfigError(f"must be one of {', '.join(GLUE_METHODS)}", "initial.glue")
    if config.initial.perturbation < 0:
        raise ConfigError("must be nonnegative", "initial.perturbation")
    if config.lattice.spacing <= 0:
        raise ConfigError("must be positive", "lattice.spacing")
    if config.model in ("effective_gf", "effective_mh") and config.lam <= 0.5:
        raise ConfigError("effective models need lambda > 1/2 (no Type-I asymptotic law)", "lambda")
    pos = config.positions()
    for j in range(len(pos)):
        for k in range(j):
            if math.dist(pos[j], pos[k]) <= 2.0:
                raise ConfigError(f"vortices {k} and {j} are closer than 2", f"vortices[{j}]")
    if config.is_pde:
        lat = config.lattice_spec()
        limit = lat.extent - BOUNDARY_MARGIN
        for idx, (x, y) in enumerate(pos):
            if math.hypot(x, y) > limit + 1e-9:
                raise ConfigError(
                    f"placement: vortex {idx} at |z| = {math.hypot(x, y):.4g} exceeds L - 8 = {limit:.4g}",
                    f"vortices[{idx}]")


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomli.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}", str(path)) from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}", str(path)) from exc
    return from_dict(raw)


def to_dict(config: ExperimentConfig) -> dict:
    out: dict[str, Any] = {"model": config.model, "lambda": config.lam, "output_dir": config.output_dir}
    out["vortices"] = [asdict(v) for v in config.vortices]
    for name in _SECTIONS:
        section = {k: v for k, v in asdict(getattr(config, name)).items() if v is not None}
        out[name] = section
    return out


def serialize(config: ExperimentConfig) -> str:
    return tomli_w.dumps(to_dict(config))
