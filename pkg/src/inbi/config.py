"""Run configuration.

Every tolerance and default used by the toolkit lives here so a single YAML
file can override any of them.  Unknown keys are rejected so typos in a config
file surface immediately.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml


@dataclass
class SolverConfig:
    """Pattern-search and exterior-penalty settings for scalar subproblems."""

    mesh_init: float = 0.25
    mesh_tol: float = 1e-6
    max_evals: int = 5000
    n_starts: int = 3
    n_random_dirs: int = 8
    penalty_init: float = 1e2
    penalty_growth: float = 100.0
    penalty_max: float = 1e10
    eps_con: float = 1e-6
    chunk_size: int = 4096


@dataclass
class NBIConfig:
    divisions: int = 10


@dataclass
class AWSConfig:
    weight_step: float = 0.01
    dup_tol: float = 1e-9
    # Refinement passes per segment; later passes only fill gaps still wider than delta_q.
    rounds: int = 3


@dataclass
class AUAMConfig:
    axis: tuple[float, float, float] = (1.0, 1.0, 1.0)
    points_factor: float = 2.0
    max_points: int = 300


@dataclass
class CompromiseSettings:
    reg: float = 1e-8
    cond_max: float = 1e8


@dataclass
class TrrConfig:
    rho_b: float = 1.0
    gamma_l: float = 0.1
    epsilon_gen: float = 1e-6
    weight: float = 1.0
    # None means all-ones off-diagonal of the right size.
    k_alpha: list[list[float]] | None = None
    k_beta: list[list[float]] | None = None


@dataclass
class ModelConfig:
    eps_bal: float = 1e-6
    month_days: int = 31
    ac_sensitivity: float = 0.1
    take_floor: float = 0.5
    w1: float = 2070.0
    w2: float = 0.096
    l: float = 5000.0


@dataclass
class SynthesisSpec:
    seed: int = 0
    n_buildings: int = 20
    n_special: int = 10
    symmetric: bool = False
    low_light_factor: float = 0.4
    low_wind_factor: float = 0.4
    load_base: float = 0.3
    pv_capacity: float = 0.25
    wind_capacity: float = 0.6


def _building_solver() -> SolverConfig:
    return SolverConfig(mesh_tol=1e-3, max_evals=60000, n_starts=1, n_random_dirs=4, chunk_size=128)


@dataclass
class BuildingRunConfig:
    """Settings used for the building benchmark in place of ``solver``, ``nbi`` and the AWS step.

    The building problem has ``2n + 3`` variables, so the toy defaults would
    cost far too many evaluations.
    """

    divisions: int = 4
    aws_weight_step: float = 0.25
    aws_rounds: int = 1
    solver: SolverConfig = field(default_factory=_building_solver)


@dataclass
class Config:
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    nbi: NBIConfig = field(default_factory=NBIConfig)
    aws: AWSConfig = field(default_factory=AWSConfig)
    auam: AUAMConfig = field(default_factory=AUAMConfig)
    compromise: CompromiseSettings = field(default_factory=CompromiseSettings)
    trr: TrrConfig = field(default_factory=TrrConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    synthesis: SynthesisSpec = field(default_factory=SynthesisSpec)
    building: BuildingRunConfig = field(default_factory=BuildingRunConfig)
    # Consider TRR in every case, not only the combined-effect ones.
    trr_all_cases: bool = False


def _build(cls: type, data: dict[str, Any]) -> Any:
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = getattr(cls(), name)
        if dataclasses.is_dataclass(default) and isinstance(value, dict):
            kwargs[name] = _build(type(default), value)
        elif isinstance(default, tuple) and isinstance(value, list):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    return cls(**kwargs)


def config_from_dict(data: dict[str, Any] | None) -> Config:
    return _build(Config, data or {})


def load_config(path: str | Path | None) -> Config:
    if path is None:
        return Config()
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return config_from_dict(data)


def config_to_dict(config: Config) -> dict[str, Any]:
    data = dataclasses.asdict(config)
    data["auam"]["axis"] = list(data["auam"]["axis"])
    return data


def dump_config(config: Config, path: str | Path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(config), fh, sort_keys=False)
