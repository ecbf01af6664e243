"""Declarative run configuration: strict JSON-compatible schema.

Every section is a dataclass parsed with unknown-key rejection, so a typo in
a config file fails loudly instead of silently running defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ModelSpec
from .errors import ConfigInvalid
from .spectral import SpectralGrid
from .weights import WeightParams


def _parse_section(cls, data: dict, section: str):
    if not isinstance(data, dict):
        raise ConfigInvalid(f"section {section!r} must be an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigInvalid(f"unknown keys in {section!r}: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad section {section!r}: {exc}") from exc


@dataclass(frozen=True)
class ModelConfig:
    name: str = "ns"
    nu: float = 1e-3
    kappa: float = 1e-3
    beta: float = 1.0
    alpha: tuple = (1.0, 0.0)
    linearized: bool = False

    def to_spec(self) -> ModelSpec:
        return ModelSpec(
            model=self.name,
            nu=self.nu,
            kappa=self.kappa,
            beta=self.beta,
            alpha=tuple(self.alpha),
            linearized=self.linearized,
        )


@dataclass(frozen=True)
class GridConfig:
    nx: int = 32
    ny: int = 128
    ly: float = 4.0 * np.pi
    dealias_fraction: float = 2.0 / 3.0

    def to_grid(self) -> SpectralGrid:
        return SpectralGrid(
            nx=self.nx, ny=self.ny, ly=self.ly, dealias_fraction=self.dealias_fraction
        )


@dataclass(frozen=True)
class WeightsConfig:
    c: float = 0.1
    r: float = 1.0
    N: int = 12
    n_max: int = 64
    bracket_mode: str = "quadratic"
    tail_tol: float = 1e-3
    c1: float | None = None
    c2: float | None = None

    def to_params(self, model: ModelSpec) -> WeightParams | None:
        mu = model.mu
        if mu == 0.0:
            return None
        return WeightParams(
            gamma=1.0,
            gamma_tilde=0.0,
            r=self.r,
            c=self.c,
            mu=mu,
            N=self.N,
            bracket_mode=self.bracket_mode,
            n_max=self.n_max,
            tail_tol=self.tail_tol,
            beta=model.beta,
            alpha=model.alpha,
            c1=self.c1,
            c2=self.c2,
            nu=model.nu,
            kappa=model.kappa,
        )


@dataclass(frozen=True)
class StepperSection:
    dt: float = 0.05
    t_end: float | None = None
    t_end_mult: float = 5.0
    scheme: str = "IFRK4"
    cfl_safety: float = 0.4
    adapt: bool = True

    def resolve_t_end(self, mu: float) -> float:
        if self.t_end is not None:
            return self.t_end
        if mu <= 0:
            raise ConfigInvalid("t_end must be given explicitly for mu = 0 runs")
        return self.t_end_mult * mu ** (-1.0 / 3.0)


@dataclass(frozen=True)
class InitialConfig:
    profile: str = "random_band"
    epsilon: float = 1e-2
    seed: int = 0
    k_band: int = 2
    m_band: int = 4
    mode: tuple = (1, 1)
    secondary_mode: tuple = (2, 2)
    secondary_ratio: float = 1.0

    def __post_init__(self):
        if self.profile not in ("random_band", "single_mode", "paired_mode"):
            raise ValueError(f"unknown initial profile {self.profile!r}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


@dataclass(frozen=True)
class DiagnosticsConfig:
    cadence: float = 1.0
    transfer: bool = False
    pair_budget: int = 1 << 22
    transient_fraction: float = 0.4  # decay fits start at this * mu^(-1/3)


@dataclass(frozen=True)
class ClassifyConfig:
    g_stable: float = 4.0
    g_unstable: float = 100.0


@dataclass(frozen=True)
class OutputConfig:
    dir: str | None = None
    tag: str | None = None


@dataclass(frozen=True)
class SimConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    weights: WeightsConfig = field(default_factory=WeightsConfig)
    stepper: StepperSection = field(default_factory=StepperSection)
    initial: InitialConfig = field(default_factory=InitialConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    _SECTIONS = {
        "model": ModelConfig,
        "grid": GridConfig,
        "weights": WeightsConfig,
        "stepper": StepperSection,
        "initial": InitialConfig,
        "diagnostics": DiagnosticsConfig,
        "classify": ClassifyConfig,
        "output": OutputConfig,
    }

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        if not isinstance(data, dict):
            raise ConfigInvalid("configuration root must be an object")
        unknown = set(data) - set(cls._SECTIONS)
        if unknown:
            raise ConfigInvalid(f"unknown top-level sections: {sorted(unknown)}")
        parsed = {
            name: _parse_section(section_cls, data.get(name, {}), name)
            for name, section_cls in cls._SECTIONS.items()
        }
        return cls(**parsed)

    @classmethod
    def from_json(cls, path) -> "SimConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = {}
        for name in self._SECTIONS:
            section = dataclasses.asdict(getattr(self, name))
            for key, val in section.items():
                if isinstance(val, tuple):
                    section[key] = list(val)
            out[name] = section
        return out

    def replace(self, **section_updates) -> "SimConfig":
        """New config with dataclasses.replace applied per section."""
        updates = {}
        for name, changes in section_updates.items():
            if name not in self._SECTIONS:
                raise ConfigInvalid(f"unknown section {name!r}")
            updates[name] = dataclasses.replace(getattr(self, name), **changes)
        return dataclasses.replace(self, **updates)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]
