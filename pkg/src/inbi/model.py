"""Smart-building benchmark: tariff, comfort, cost objectives and power balance.

A day is 96 fifteen-minute slots.  Renewable output (PV and wind) is pooled
across the roster and shared out to buildings by allocation fractions; each
building takes what it can use and draws the rest of its demand from the grid.
All costs are monthly: daily quantities are scaled by ``month_days``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .config import ModelConfig
from .problem import Evaluation, MooProblem

SLOTS_PER_DAY = 96
SLOT_HOURS = 0.25
SLOT_MINUTES = 15

VALLEY_RATE = 0.3  # yuan per kWh
PEAK_RATE = 0.7
VALLEY_START = 23 * 60  # minutes since midnight
VALLEY_END = 6 * 60

COMFORT_REF = 26.0
COMFORT_SLOPE = 0.25
SETPOINT_MIN = 22.0
SETPOINT_MAX = 30.0


class InfeasibleDecisionError(ValueError):
    """A decision breaks the power balance or the renewable-usage bounds."""


@dataclass(frozen=True)
class TimeSlot:
    index: int

    def __post_init__(self):
        if not 0 <= int(self.index) < SLOTS_PER_DAY:
            raise ValueError(f"slot index {self.index} outside [0, {SLOTS_PER_DAY - 1}]")

    @property
    def clock(self) -> int:
        """Minutes since midnight at the start of the slot."""
        return int(self.index) * SLOT_MINUTES

    @classmethod
    def from_clock(cls, minutes: int) -> TimeSlot:
        if minutes % SLOT_MINUTES:
            raise ValueError("clock must be a multiple of 15 minutes")
        return cls(minutes // SLOT_MINUTES)


def tariff_rate(slot: TimeSlot | int) -> float:
    """Grid price in yuan/kWh: valley on [23:00, 06:00), peak otherwise."""
    slot = slot if isinstance(slot, TimeSlot) else TimeSlot(int(slot))
    clock = slot.clock
    return VALLEY_RATE if clock >= VALLEY_START or clock < VALLEY_END else PEAK_RATE


TARIFF = np.array([tariff_rate(t) for t in range(SLOTS_PER_DAY)])
VALLEY = TARIFF == VALLEY_RATE
PEAK = ~VALLEY


def comfort(t_in):
    """Occupant comfort in [0, 1]: full at 26 C, losing a quarter per degree.

    Raises:
        ValueError: a setpoint outside [22, 30].
    """
    t = np.asarray(t_in, dtype=float)
    if np.any(t < SETPOINT_MIN) or np.any(t > SETPOINT_MAX) or np.any(np.isnan(t)):
        raise ValueError(f"indoor temperature outside [{SETPOINT_MIN}, {SETPOINT_MAX}]")
    s = 1.0 - np.abs(t - COMFORT_REF) * COMFORT_SLOPE
    return float(s) if s.ndim == 0 else s


def equipment_cost_from_powers(p0, p_wm: float, p_c: float, w1: float = 2070.0,
                               w2: float = 0.096, l: float = 5000.0) -> float:
    """Equipment cost ``w1*sum(P_0) + w2*P_wm + l*P_c`` in yuan.

    ``w2`` is quoted per kW; it is converted to per MW because all powers
    here are in MW.
    """
    p0 = np.asarray(p0, dtype=float)
    if np.any(p0 < 0) or p_wm < 0 or p_c < 0:
        raise ValueError("powers must be non-negative")
    return float(w1 * np.sum(p0) + w2 * 1000.0 * p_wm + l * p_c)


def integrate_power(series) -> float:
    """Trapezoidal energy (MWh) of a 96-slot MW series at 0.25 h spacing.

    The day is cyclic: the last slot joins back to the first, so a constant
    series integrates to exactly ``24 h * value``.
    """
    y = np.asarray(series, dtype=float)
    if y.shape[-1:] != (SLOTS_PER_DAY,):
        raise ValueError(f"expected {SLOTS_PER_DAY} samples, got {y.shape[-1:]}")
    out = SLOT_HOURS * np.sum(y, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BuildingScenario:
    """Daily profiles for a roster of ordinary buildings followed by special ones.

    Per-building arrays have shape (n_buildings, 96) and are in MW.  Only
    special buildings carry PV and wind generation.
    """

    n_ordinary: int
    n_special: int
    load_critical: np.ndarray
    load_sched: np.ndarray
    load_switch: np.ndarray
    pv: np.ndarray
    wind: np.ndarray
    temperature: np.ndarray
    w1: float = 2070.0
    w2: float = 0.096
    l: float = 5000.0
    # Carried as metadata only.
    p1_total: float = 0.0
    p2_total: float = 0.0
    name: str = "scenario"

    def __post_init__(self):
        n = self.n_ordinary + self.n_special
        if self.n_ordinary < 0 or self.n_special < 0 or n < 2:
            raise ValueError("roster needs at least two buildings")
        for name in ("load_critical", "load_sched", "load_switch", "pv", "wind"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (n, SLOTS_PER_DAY):
                raise ValueError(f"{name} must have shape ({n}, {SLOTS_PER_DAY}), got {arr.shape}")
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite and non-negative")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        temp = np.array(self.temperature, dtype=float)
        if temp.shape != (SLOTS_PER_DAY,):
            raise ValueError("temperature must have 96 entries")
        temp.setflags(write=False)
        object.__setattr__(self, "temperature", temp)

    @property
    def n_buildings(self) -> int:
        return self.n_ordinary + self.n_special

    @property
    def pv_total(self) -> np.ndarray:
        return self.pv.sum(axis=0)

    @property
    def wind_total(self) -> np.ndarray:
        return self.wind.sum(axis=0)

    @property
    def special(self) -> np.ndarray:
        return np.arange(self.n_buildings) >= self.n_ordinary

    def scaled(self, pv_factor: float = 1.0, wind_factor: float = 1.0) -> BuildingScenario:
        """Copy with generation scaled, e.g. for low-light or low-wind weather."""
        return replace(self, pv=self.pv * pv_factor, wind=self.wind * wind_factor)


@dataclass(frozen=True)
class DispatchDecision:
    """Allocation fractions per building, class setpoints and a load-shift fraction.

    ``setpoint`` holds the ordinary-class then special-class indoor temperature.
    """

    pv_alloc: np.ndarray
    wind_alloc: np.ndarray
    setpoint: tuple[float, float] = (COMFORT_REF, COMFORT_REF)
    shift_fraction: float = 0.0

    def __post_init__(self):
        for name in ("pv_alloc", "wind_alloc"):
            a = np.asarray(getattr(self, name), dtype=float)
            if np.any(a < 0) or abs(a.sum() - 1.0) > 1e-9:
                raise ValueError(f"{name} must be non-negative and sum to 1")
            object.__setattr__(self, name, a)
        sp = tuple(float(t) for t in self.setpoint)
        if len(sp) != 2 or any(not SETPOINT_MIN <= t <= SETPOINT_MAX for t in sp):
            raise ValueError("setpoints must be two values in [22, 30]")
        object.__setattr__(self, "setpoint", sp)
        if not 0.0 <= self.shift_fraction <= 1.0:
            raise ValueError("shift_fraction must lie in [0, 1]")

    @classmethod
    def uniform(cls, n_buildings: int, setpoint=(COMFORT_REF, COMFORT_REF), shift_fraction=0.0):
        a = np.full(n_buildings, 1.0 / n_buildings)
        return cls(a, a.copy(), setpoint, shift_fraction)

    @classmethod
    def from_vector(cls, v, n_buildings: int) -> DispatchDecision:
        parts = split_vector(np.asarray(v, dtype=float), n_buildings)
        return cls(parts[0], parts[1], tuple(parts[2]), float(parts[3]))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.pv_alloc, self.wind_alloc, self.setpoint, [self.shift_fraction]])


class ObjectiveVector(NamedTuple):
    f1: float  # equipment cost, yuan
    f2: float  # supply cost, yuan
    f3: float  # comfort loss

    @property
    def comfort(self) -> float:
        return 1.0 - self.f3


def fractions(raw: np.ndarray) -> np.ndarray:
    """Normalise raw non-negative weights along the last axis; all-zero rows become uniform."""
    total = raw.sum(axis=-1, keepdims=True)
    n = raw.shape[-1]
    safe = np.where(total > 0, total, 1.0)
    return np.where(total > 0, raw / safe, 1.0 / n)


def split_vector(X: np.ndarray, n_buildings: int):
    """Split decision vectors (..., 2n+3) into PV fractions, wind fractions, setpoints, shift."""
    n = n_buildings
    return (
        fractions(X[..., :n]),
        fractions(X[..., n : 2 * n]),
        X[..., 2 * n : 2 * n + 2],
        X[..., 2 * n + 2],
    )


def decision_bounds(n_buildings: int) -> tuple[np.ndarray, np.ndarray]:
    lower = np.concatenate([np.zeros(2 * n_buildings), [SETPOINT_MIN, SETPOINT_MIN, 0.0]])
    upper = np.concatenate([np.ones(2 * n_buildings), [SETPOINT_MAX, SETPOINT_MAX, 1.0]])
    return lower, upper


class Dispatch(NamedTuple):
    demand: np.ndarray  # (..., B, 96)
    pv_used: np.ndarray
    wind_used: np.ndarray
    grid: np.ndarray


def building_setpoints(scenario: BuildingScenario, setpoints: np.ndarray) -> np.ndarray:
    """Per-building setpoint (..., B) from the two class setpoints (..., 2)."""
    return np.where(scenario.special, setpoints[..., 1:2], setpoints[..., 0:1])


def dispatch(scenario: BuildingScenario, pv_frac, wind_frac, setpoints, shift,
             config: ModelConfig | None = None) -> Dispatch:
    """Batched power flows for allocation fractions (..., B), setpoints (..., 2), shift (...).

    Schedulable load is moved from peak slots to valley slots (spread evenly)
    by ``shift``; switchable (air-conditioning) load grows as the setpoint
    drops below 26 C.  PV is taken first, then wind, then the grid.
    """
    cfg = config or ModelConfig()
    pv_frac = np.asarray(pv_frac, dtype=float)
    wind_frac = np.asarray(wind_frac, dtype=float)
    shift = np.asarray(shift, dtype=float)[..., None, None]
    sched = scenario.load_sched
    moved = (sched * PEAK).sum(axis=-1, keepdims=True) / VALLEY.sum()
    sched_now = sched * (1.0 - shift * PEAK) + shift * moved * VALLEY
    t_set = building_setpoints(scenario, np.asarray(setpoints, dtype=float))
    ac = np.maximum(0.0, 1.0 + cfg.ac_sensitivity * (COMFORT_REF - t_set))[..., None]
    demand = scenario.load_critical + sched_now + scenario.load_switch * ac
    pv_used = np.minimum(pv_frac[..., None] * scenario.pv_total, demand)
    wind_used = np.minimum(wind_frac[..., None] * scenario.wind_total, demand - pv_used)
    grid = demand - pv_used - wind_used
    return Dispatch(demand, pv_used, wind_used, grid)


def dispatch_decision(scenario, decision: DispatchDecision, config=None) -> Dispatch:
    return dispatch(scenario, decision.pv_alloc, decision.wind_alloc,
                    np.asarray(decision.setpoint), decision.shift_fraction, config)


def _equipment(scenario, d: Dispatch, cfg: ModelConfig) -> np.ndarray:
    wind_tot = d.wind_used.sum(axis=-2)
    pv_tot = d.pv_used.sum(axis=-2)
    p0_sum = cfg.month_days * wind_tot.sum(axis=-1)
    return scenario.w1 * p0_sum + scenario.w2 * 1000.0 * wind_tot.mean(axis=-1) + scenario.l * pv_tot.max(axis=-1)


def _supply(d: Dispatch, cfg: ModelConfig) -> np.ndarray:
    draw = np.maximum(d.grid, 0.0).sum(axis=-2)
    return cfg.month_days * 1000.0 * SLOT_HOURS * np.sum(draw * TARIFF, axis=-1)


def _comfort_loss(scenario, setpoints: np.ndarray) -> np.ndarray:
    t_set = np.clip(building_setpoints(scenario, setpoints), SETPOINT_MIN, SETPOINT_MAX)
    return 1.0 - np.mean(1.0 - np.abs(t_set - COMFORT_REF) * COMFORT_SLOPE, axis=-1)


def usage_floor_margin(scenario, d: Dispatch, cfg: ModelConfig) -> np.ndarray:
    """Daily renewable energy used minus the required share, wind then PV (MWh): (..., 2).

    Feasible when both entries are >= 0.
    """
    wind = integrate_power(d.wind_used.sum(axis=-2)) - cfg.take_floor * integrate_power(scenario.wind_total)
    pv = integrate_power(d.pv_used.sum(axis=-2)) - cfg.take_floor * integrate_power(scenario.pv_total)
    return np.stack([wind, pv], axis=-1)


def equipment_cost(scenario, decision: DispatchDecision, config: ModelConfig | None = None) -> float:
    """Monthly equipment cost: wind energy charge, mean-wind charge and peak-PV charge."""
    cfg = config or ModelConfig()
    return float(_equipment(scenario, dispatch_decision(scenario, decision, cfg), cfg))


def supply_cost(scenario, decision: DispatchDecision, config: ModelConfig | None = None) -> float:
    """Monthly cost of grid energy at the time-of-use tariff."""
    cfg = config or ModelConfig()
    d = dispatch_decision(scenario, decision, cfg)
    _check_balance(scenario, d, cfg)
    return float(_supply(d, cfg))


def balance_residual(scenario, decision: DispatchDecision, slot: TimeSlot | int,
                     config: ModelConfig | None = None) -> float:
    """Grid + wind + PV supplied minus total load at one slot (MW)."""
    cfg = config or ModelConfig()
    t = slot.index if isinstance(slot, TimeSlot) else TimeSlot(int(slot)).index
    d = dispatch_decision(scenario, decision, cfg)
    supplied = d.grid[:, t].sum() + d.wind_used[:, t].sum() + d.pv_used[:, t].sum()
    return float(supplied - d.demand[:, t].sum())


def _check_balance(scenario, d: Dispatch, cfg: ModelConfig) -> None:
    residual = d.grid + d.wind_used + d.pv_used - d.demand
    if np.max(np.abs(residual.sum(axis=-2))) > cfg.eps_bal:
        raise InfeasibleDecisionError("power balance violated")
    over_pv = d.pv_used.sum(axis=-2) - scenario.pv_total
    over_wind = d.wind_used.sum(axis=-2) - scenario.wind_total
    if max(over_pv.max(), over_wind.max()) > cfg.eps_bal:
        raise InfeasibleDecisionError("renewable usage exceeds availability")
    if usage_floor_margin(scenario, d, cfg).min() < -cfg.eps_bal:
        raise InfeasibleDecisionError("renewable usage below the take floor")


def evaluate_objectives(scenario, decision: DispatchDecision, config: ModelConfig | None = None) -> ObjectiveVector:
    """Equipment cost, supply cost and comfort loss of one decision.

    Raises:
        InfeasibleDecisionError: balance or usage bounds violated beyond ``eps_bal``.
    """
    cfg = config or ModelConfig()
    d = dispatch_decision(scenario, decision, cfg)
    _check_balance(scenario, d, cfg)
    sp = np.asarray(decision.setpoint)
    return ObjectiveVector(float(_equipment(scenario, d, cfg)), float(_supply(d, cfg)),
                           float(_comfort_loss(scenario, sp)))


@dataclass
class BuildingProblem(MooProblem):
    """The benchmark as a batched three-objective problem over raw decision vectors.

    The vector is ``[pv weights (n), wind weights (n), setpoint_ordinary,
    setpoint_special, shift]``; weights are normalised to fractions.  The
    inequality constraints are the per-slot renewable take floors.  An
    optional ``penalty`` callable (e.g. the TRR dispersion) receives the
    dispatch and fractions and is added to scalarised subproblems.
    """

    scenario: BuildingScenario
    config: ModelConfig = field(default_factory=ModelConfig)
    penalty_fn: object = None

    def __post_init__(self):
        n = self.scenario.n_buildings
        lower, upper = decision_bounds(n)
        start = np.concatenate([np.full(2 * n, 0.5), [COMFORT_REF, COMFORT_REF, 0.5]])
        g_lower = np.zeros(2)
        super().__init__(lower, upper, start, g_lower, None, name=self.scenario.name)

    def _flows(self, X):
        pv, wind, sp, shift = split_vector(np.asarray(X, dtype=float), self.scenario.n_buildings)
        return pv, wind, sp, dispatch(self.scenario, pv, wind, sp, shift, self.config)

    def objectives(self, X):
        return self.evaluate(X).objectives

    def inequality(self, X):
        return usage_floor_margin(self.scenario, self._flows(X)[3], self.config)

    def penalty(self, X):
        return self.evaluate(X).penalty

    def evaluate(self, X) -> Evaluation:
        pv, wind, sp, d = self._flows(X)
        F = np.stack(
            [_equipment(self.scenario, d, self.config), _supply(d, self.config), _comfort_loss(self.scenario, sp)],
            axis=-1,
        )
        margin = usage_floor_margin(self.scenario, d, self.config)
        viol = np.maximum(-margin, 0.0)
        pen = None if self.penalty_fn is None else self.penalty_fn(d, pv, wind)
        return Evaluation(F, viol, pen)

    def decision(self, x) -> DispatchDecision:
        return DispatchDecision.from_vector(x, self.scenario.n_buildings)
