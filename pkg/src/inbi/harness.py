"""Synthetic scenarios, the built-in case matrix and the comparison experiments."""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import Config, NBIConfig, SynthesisSpec
from .model import SLOT_HOURS, SLOTS_PER_DAY, BuildingProblem, BuildingScenario
from .pipeline import Algorithm, RunResult, compute_frontier, run
from .problem import nondominated_mask
from .trr import TrrParams, make_penalty

log = logging.getLogger(__name__)

HOURS = np.arange(SLOTS_PER_DAY) * SLOT_HOURS
PV_RISE, PV_SET = 6.0, 19.0
PV_NOISE = 0.02


class Consideration(str, enum.Enum):
    NONE = "none"
    LOW_LIGHT = "low_light"
    LOW_WIND = "low_wind"
    COMBINED_EFFECT = "combined_effect"
    LOW_LIGHT_AND_WIND = "low_light_and_wind"


@dataclass(frozen=True)
class CaseConfig:
    case_id: str  # "standard" or "1".."12"
    consideration: Consideration
    weights: tuple[float, float, float]


_C = Consideration
CASES = (
    CaseConfig("standard", _C.NONE, (1.0, 1.0, 1.0)),
    CaseConfig("1", _C.LOW_LIGHT, (1.0, 1.0, 1.0)),
    CaseConfig("2", _C.LOW_WIND, (1.0, 1.0, 1.0)),
    CaseConfig("3", _C.COMBINED_EFFECT, (1.0, 1.0, 1.0)),
    CaseConfig("4", _C.LOW_LIGHT, (0.4, 0.3, 0.3)),
    CaseConfig("5", _C.LOW_WIND, (0.3, 0.4, 0.3)),
    CaseConfig("6", _C.COMBINED_EFFECT, (0.3, 0.3, 0.4)),
    CaseConfig("7", _C.LOW_LIGHT, (0.5, 0.25, 0.25)),
    CaseConfig("8", _C.LOW_WIND, (0.25, 0.5, 0.25)),
    CaseConfig("9", _C.COMBINED_EFFECT, (0.25, 0.25, 0.5)),
    CaseConfig("10", _C.LOW_LIGHT_AND_WIND, (1.0, 1.0, 1.0)),
    CaseConfig("11", _C.LOW_LIGHT_AND_WIND, (0.4, 0.3, 0.3)),
    CaseConfig("12", _C.LOW_LIGHT_AND_WIND, (0.5, 0.25, 0.25)),
)


def get_case(case_id) -> CaseConfig:
    key = str(case_id).lower()
    if key in ("0", "std"):
        key = "standard"
    for case in CASES:
        if case.case_id == key:
            return case
    raise KeyError(f"unknown case {case_id!r}; expected standard or 1..12")


# Scenario synthesis ---------------------------------------------------------

def pv_envelope(hours: np.ndarray, capacity: float) -> np.ndarray:
    """Half-sine bell between sunrise and sunset, zero at night."""
    h = np.asarray(hours, dtype=float)
    phase = (h - PV_RISE) / (PV_SET - PV_RISE)
    return np.where((phase > 0) & (phase < 1), capacity * np.sin(np.pi * np.clip(phase, 0, 1)), 0.0)


def pv_envelope_integral(capacity: float) -> float:
    """Closed-form daily energy of ``pv_envelope`` in MWh."""
    return capacity * 2.0 * (PV_SET - PV_RISE) / math.pi


def _bump(hours, centre, width):
    return np.exp(-0.5 * ((hours - centre) / width) ** 2)


def synthesize_scenario(spec: SynthesisSpec | None = None) -> BuildingScenario:
    """Seeded daily profiles for ``spec.n_buildings`` buildings.

    Load is double-peaked (morning and evening), PV is a noisy bell over
    daylight and wind a noisy profile that is strongest at night.  Ordinary buildings
    come first and carry no generation.  With ``symmetric`` set every building
    of a class gets the same profiles.

    Raises:
        ValueError: invalid building counts.
    """
    spec = spec or SynthesisSpec()
    n, m = spec.n_buildings, spec.n_special
    if n < 2 or not 0 < m < n:
        raise ValueError(f"need n_buildings >= 2 and 0 < n_special < n_buildings (got {n}, {m})")
    rng = np.random.default_rng([spec.seed, 2021])
    rows = 1 if spec.symmetric else n

    shape = 0.55 + 0.6 * _bump(HOURS, 9.0, 1.5) + 0.8 * _bump(HOURS, 19.5, 2.0)
    scale = spec.load_base * rng.uniform(0.85, 1.15, size=(rows, 1))
    jitter = 1.0 + 0.03 * rng.standard_normal((rows, SLOTS_PER_DAY))
    load = np.broadcast_to(scale * shape * jitter, (n, SLOTS_PER_DAY))
    critical, sched, switch = 0.5 * load, 0.3 * load, 0.2 * load

    gen_rows = 1 if spec.symmetric else m
    noise = 1.0 + PV_NOISE * rng.standard_normal((gen_rows, SLOTS_PER_DAY))
    pv = np.maximum(pv_envelope(HOURS, spec.pv_capacity) * noise, 0.0)

    # Wind peaks in the small hours, so the valley has a renewable surplus.
    walk = np.cumsum(rng.standard_normal((gen_rows, SLOTS_PER_DAY)), axis=1) * 0.02
    night = 0.5 * (1.0 + np.cos(2 * np.pi * (HOURS - 3.0) / 24.0))
    wind = spec.wind_capacity * np.clip(0.3 + 0.7 * night + walk
                                        + 0.05 * rng.standard_normal((gen_rows, SLOTS_PER_DAY)), 0.0, None)

    zeros = np.zeros((n - m, SLOTS_PER_DAY))
    pv_all = np.vstack([zeros, np.broadcast_to(pv, (m, SLOTS_PER_DAY))])
    wind_all = np.vstack([zeros, np.broadcast_to(wind, (m, SLOTS_PER_DAY))])
    temperature = 27.0 + 5.0 * np.sin(2 * np.pi * (HOURS - 9.0) / 24.0)

    mean_load = load.mean(axis=1)
    return BuildingScenario(
        n_ordinary=n - m, n_special=m,
        load_critical=critical, load_sched=sched, load_switch=switch,
        pv=pv_all, wind=wind_all, temperature=temperature,
        p1_total=float(mean_load[n - m:].sum()), p2_total=float(mean_load[: n - m].sum()),
        name=f"synthetic-{spec.seed}",
    )


def apply_consideration(scenario: BuildingScenario, consideration: Consideration,
                        spec: SynthesisSpec | None = None) -> BuildingScenario:
    """Weather scaling for a consideration; the others leave generation as is."""
    spec = spec or SynthesisSpec()
    c = Consideration(consideration)
    pv = spec.low_light_factor if c in (_C.LOW_LIGHT, _C.LOW_LIGHT_AND_WIND) else 1.0
    wind = spec.low_wind_factor if c in (_C.LOW_WIND, _C.LOW_LIGHT_AND_WIND) else 1.0
    if pv == 1.0 and wind == 1.0:
        return scenario
    return dataclasses.replace(scenario.scaled(pv, wind), name=f"{scenario.name}-{c.value}")


def trr_enabled(consideration: Consideration, config: Config) -> bool:
    return config.trr_all_cases or Consideration(consideration) is _C.COMBINED_EFFECT


def build_problem(scenario: BuildingScenario, config: Config, trr: bool) -> BuildingProblem:
    penalty = None
    if trr:
        penalty = make_penalty(scenario, TrrParams.from_config(config.trr), config.trr.weight)
    return BuildingProblem(scenario, config.model, penalty)


def building_config(config: Config) -> Config:
    """``config`` with the building solver profile swapped in for the generic one."""
    b = config.building
    return dataclasses.replace(config, solver=b.solver, nbi=NBIConfig(b.divisions),
                               aws=dataclasses.replace(config.aws, weight_step=b.aws_weight_step,
                                                       rounds=b.aws_rounds))


def case_problem(case: CaseConfig, config: Config, scenario: BuildingScenario | None = None) -> BuildingProblem:
    """The building problem for a case; ``scenario`` replaces the synthetic one when given."""
    spec = dataclasses.replace(config.synthesis, seed=config.seed)
    base = scenario if scenario is not None else synthesize_scenario(spec)
    scenario = apply_consideration(base, case.consideration, spec)
    return build_problem(scenario, config, trr_enabled(case.consideration, config))


# Case runs ------------------------------------------------------------------

@dataclass(frozen=True)
class CaseRow:
    case_id: str
    algorithm: str
    equipment_cost: float
    supply_cost: float
    comfort_pct: float
    n_frontier: int
    n_selected: int

    @property
    def metrics(self) -> tuple[float, float, float]:
        return self.equipment_cost, self.supply_cost, self.comfort_pct


def report_row(case: CaseConfig, result: RunResult) -> CaseRow:
    """Table row for a run's compromise; checks it is non-dominated in its frontier."""
    F = result.frontier.F
    i = result.compromise_index
    if not nondominated_mask(F)[i]:
        raise RuntimeError(f"case {case.case_id}: compromise is dominated within its frontier")
    f = F[i]
    return CaseRow(case.case_id, result.algorithm.value, float(f[0]), float(f[1]),
                   100.0 * (1.0 - float(f[2])), len(result.frontier), len(result.selected))


def run_case(case: CaseConfig, algorithm: Algorithm | str, config: Config | None = None,
             scenario: BuildingScenario | None = None) -> CaseRow:
    return report_row(case, run_case_full(case, algorithm, config, scenario))


def run_case_full(case: CaseConfig, algorithm: Algorithm | str, config: Config | None = None,
                  scenario: BuildingScenario | None = None) -> RunResult:
    cfg = building_config(config or Config())
    return run(case_problem(case, cfg, scenario), algorithm, cfg, case.weights)


def compare_all(config: Config | None = None, cases=CASES,
                scenario: BuildingScenario | None = None) -> list[CaseRow]:
    """Every case under every algorithm, in case order.

    Cases sharing a consideration share one problem, one NBI frontier and one
    AWS pass; only the compromise weights differ between them.
    """
    cfg = building_config(config or Config())
    rows = []
    shared: dict[Consideration, tuple] = {}
    for case in cases:
        if case.consideration not in shared:
            problem = case_problem(case, cfg, scenario)
            base = compute_frontier(problem, cfg)
            shared[case.consideration] = (problem, base, None)
        problem, base, aws = shared[case.consideration]
        for alg in Algorithm:
            result = run(problem, alg, cfg, case.weights, nbi=base, aws=aws)
            if alg is Algorithm.INBI and aws is None:
                aws = result.aws
                shared[case.consideration] = (problem, base, aws)
            rows.append(report_row(case, result))
            log.info("case %s %s done", case.case_id, alg.value)
    return rows


# TRR deviation experiment ---------------------------------------------------

def allocation_shares(problem: BuildingProblem, x: np.ndarray) -> np.ndarray:
    """Each building's share of the renewable energy actually supplied over the day."""
    _, _, _, d = problem._flows(np.asarray(x, dtype=float)[None, :])
    per_building = (d.pv_used + d.wind_used)[0].sum(axis=-1)
    total = per_building.sum()
    if total <= 0:
        return np.full(len(per_building), 1.0 / len(per_building))
    return per_building / total


def allocation_deviation(shares) -> np.ndarray:
    """Percent deviation of each building's share from the equal share ``1/n``."""
    s = np.asarray(shares, dtype=float)
    return 100.0 * np.abs(s - 1.0 / len(s))


@dataclass
class DeviationReport:
    seed: int
    deviation_off: np.ndarray
    deviation_on: np.ndarray

    @property
    def mean_off(self) -> float:
        return float(self.deviation_off.mean())

    @property
    def mean_on(self) -> float:
        return float(self.deviation_on.mean())

    @property
    def reduction_pct(self) -> float:
        return 100.0 * (1.0 - self.mean_on / self.mean_off) if self.mean_off > 0 else 0.0


def trr_deviation_experiment(config: Config | None = None, weights=(1.0, 1.0, 1.0)) -> DeviationReport:
    """INBI with and without the TRR penalty on a symmetric scenario of the configured size."""
    cfg = building_config(config or Config())
    spec = dataclasses.replace(cfg.synthesis, seed=cfg.seed, symmetric=True)
    scenario = synthesize_scenario(spec)
    out = {}
    for on in (False, True):
        problem = build_problem(scenario, cfg, trr=on)
        res = run(problem, Algorithm.INBI, cfg, weights)
        out[on] = allocation_deviation(allocation_shares(problem, res.compromise.x))
    return DeviationReport(cfg.seed, out[False], out[True])


# Smoothing experiment -------------------------------------------------------

@dataclass(frozen=True)
class SmoothingRow:
    n_buildings: int
    algorithm: str
    equipment_cost: float
    baseline_cost: float

    @property
    def degree(self) -> float:
        """Percent reduction of the compromise equipment cost against the ALG2 baseline."""
        return 100.0 * (self.baseline_cost - self.equipment_cost) / self.baseline_cost


def smoothing_experiment(counts, config: Config | None = None, case_id="standard") -> list[SmoothingRow]:
    """Optimization degree of INBI and ALG1 as the roster grows (half special buildings)."""
    cfg = building_config(config or Config())
    case = get_case(case_id)
    rows = []
    for n in counts:
        n = int(n)
        spec = dataclasses.replace(cfg.synthesis, seed=cfg.seed, n_buildings=n, n_special=n // 2)
        run_cfg = dataclasses.replace(cfg, synthesis=spec)
        problem = case_problem(case, run_cfg)
        base = compute_frontier(problem, run_cfg)
        baseline = run(problem, Algorithm.ALG2, run_cfg, case.weights, nbi=base).compromise.f[0]
        for alg in (Algorithm.INBI, Algorithm.ALG1):
            res = run(problem, alg, run_cfg, case.weights, nbi=base)
            rows.append(SmoothingRow(n, alg.value, float(res.compromise.f[0]), float(baseline)))
    return rows
