"""Experiment configuration files (TOML).

A config names a problem and its parameters, optionally overrides the
default basis, profiles and maps, and sets optimizer and output options::

    [problem]
    name = "transport"
    params = { mu = 4.0 }

    [optimizer]
    n_p = 121
    K = 200
    tolerance = 1e-12
    mandatory = true
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigurationError
from .expansion import LinearBasis
from .maps import ParticleMap
from .particle_grid import ParticleGridConfig
from .problems import ProblemSpec, make_problem
from .profiles import Profile, get_profile

__all__ = ["ExperimentConfig", "load_config", "parse_config", "parameter_list"]

MODES = ("fit", "train", "online", "scan")


def parameter_list(value) -> list[float]:
    """A list of numbers, or ``{start, stop, num}`` for equispaced values (endpoints included)."""
    if isinstance(value, dict):
        try:
            return np.linspace(float(value["start"]), float(value["stop"]), int(value["num"])).tolist()
        except KeyError as exc:
            raise ConfigurationError(f"parameter range is missing {exc}") from None
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    raise ConfigurationError(f"expected a list or a {{start, stop, num}} table, got {value!r}")


def _profile(entry) -> Profile:
    if isinstance(entry, str):
        return get_profile(entry)
    if isinstance(entry, dict) and "name" in entry:
        return get_profile(entry["name"], float(entry.get("scale", 1.0)), float(entry.get("shift", 0.0)))
    raise ConfigurationError(f"cannot read profile {entry!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to run one experiment; built by `parse_config`."""

    problem: str
    params: dict = field(default_factory=dict)
    mode: str = "fit"
    points: Any = None
    basis: str = "default"
    profiles: tuple | None = None
    maps: tuple | None = None
    n_p: int | None = None
    K: int | None = None
    lam: float = 1.0 / 3.0
    tolerance: float | None = None
    mandatory: bool = False
    out: str = "out"
    training: dict = field(default_factory=dict)
    online: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 < self.lam < 0.5:
            raise ConfigurationError(f"lambda must lie in (0, 1/2), got {self.lam}")
        if self.basis not in ("default", "none"):
            raise ConfigurationError(f"basis must be 'default' or 'none', got {self.basis!r}")

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def problem_spec(self, **extra) -> ProblemSpec:
        """The configured problem with basis/profile/map overrides applied."""
        spec = make_problem(self.problem, **{**self.params, **extra})
        profiles = spec.profiles
        maps = spec.maps
        if self.profiles is not None:
            profiles = tuple(_profile(p) for p in self.profiles)
            if self.maps is None and len(maps) != len(profiles):
                maps = tuple(maps[0] for _ in profiles) if maps else ()
        if self.maps is not None:
            maps = tuple(ParticleMap(m) for m in self.maps)
            if len(maps) == 1 and len(profiles) > 1:
                maps = maps * len(profiles)
        if len(maps) != len(profiles):
            raise ConfigurationError(f"{len(maps)} maps for {len(profiles)} profiles")
        basis = LinearBasis() if self.basis == "none" else spec.basis
        return replace(spec, basis=basis, profiles=profiles, maps=maps,
                       exact=spec.exact if profiles is spec.profiles and maps is spec.maps else None)

    def grid_config(self, spec: ProblemSpec) -> ParticleGridConfig:
        return ParticleGridConfig(
            n_p=self.n_p if self.n_p is not None else spec.n_p,
            P=spec.P,
            lam=self.lam,
            K=self.K if self.K is not None else spec.K,
            tolerance=self.tolerance if self.tolerance is not None else spec.tolerance,
        )

    def echo(self) -> dict:
        """The config as plain data, for embedding in results."""
        return self.source


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a parsed TOML document."""
    data = dict(data)
    prob = data.get("problem")
    if not isinstance(prob, dict) or "name" not in prob:
        raise ConfigurationError("config needs a [problem] table with a name")
    opt = data.get("optimizer", {})
    exp = data.get("expansion", {})
    known = {"problem", "optimizer", "expansion", "grid", "mode", "out", "training", "online",
             "scan", "sweep"}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown config sections {sorted(unknown)}")
    extra = set(opt) - {"n_p", "K", "lambda", "tolerance", "mandatory"}
    if extra:
        raise ConfigurationError(f"unknown optimizer keys {sorted(extra)}")
    try:
        return ExperimentConfig(
            problem=str(prob["name"]),
            params=dict(prob.get("params", {})),
            mode=str(data.get("mode", "fit")),
            points=data.get("grid", {}).get("points"),
            basis=str(exp.get("basis", "default")),
            profiles=tuple(exp["profiles"]) if "profiles" in exp else None,
            maps=tuple(tuple(m) for m in exp["maps"]) if "maps" in exp else None,
            n_p=int(opt["n_p"]) if "n_p" in opt else None,
            K=int(opt["K"]) if "K" in opt else None,
            lam=float(opt.get("lambda", 1.0 / 3.0)),
            tolerance=float(opt["tolerance"]) if "tolerance" in opt else None,
            mandatory=bool(opt.get("mandatory", False)),
            out=str(data.get("out", "out")),
            training=dict(data.get("training", {})),
            online=dict(data.get("online", {})),
            scan=dict(data.get("scan", {})),
            sweep=dict(data.get("sweep", {})),
            source=data,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid config value: {exc}") from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from None
    return parse_config(data)
