"""Transfer-retention ratio (TRR) indices and their dispersion penalty.

For a building using ``u_g`` of the pooled PV output ``P_g`` and ``u_f`` of the
pooled wind output ``P_f`` at one slot::

    alpha = rho * (u_g + gamma * (P_f - u_f)) / P_g * -ln(P_g * u_g / sum_t P_g(t)^2)
    beta  = rho * (u_f + gamma * (P_g - u_g)) / P_f * -ln(P_f * u_f / sum_t P_f(t)^2)

The sum of squares runs over the 96 slot totals of the day.  Slots whose
generation is below ``epsilon_gen`` have no index (stored as NaN).  Spread of
the indices across buildings is penalised so renewable output is shared evenly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TrrConfig


class GenerationFloorError(ValueError):
    """Generation total below the configured floor."""


class TrrDomainError(ValueError):
    """Usage or log argument outside the valid domain."""


class UndefinedDispersionError(ValueError):
    """Fewer than two observations present."""


@dataclass(frozen=True)
class TrrParams:
    rho_b: float = 1.0
    gamma_l: float = 0.1
    epsilon_gen: float = 1e-6
    k_alpha: np.ndarray | None = None
    k_beta: np.ndarray | None = None

    def __post_init__(self):
        if not self.rho_b > 0:
            raise ValueError("rho_b must be positive")
        if self.gamma_l < 0:
            raise ValueError("gamma_l must be non-negative")
        if not self.epsilon_gen > 0:
            raise ValueError("epsilon_gen must be positive")
        for name in ("k_alpha", "k_beta"):
            K = getattr(self, name)
            if K is None:
                continue
            K = np.array(K, dtype=float)
            _check_k(K)
            object.__setattr__(self, name, K)

    @classmethod
    def from_config(cls, cfg: TrrConfig) -> TrrParams:
        return cls(cfg.rho_b, cfg.gamma_l, cfg.epsilon_gen, cfg.k_alpha, cfg.k_beta)


def _check_k(K: np.ndarray) -> None:
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("coefficient matrix must be square")
    if np.any(K < 0) or not np.allclose(K, K.T) or np.any(np.diag(K) != 0):
        raise ValueError("coefficient matrix must be non-negative, symmetric, zero-diagonal")


def default_k(n: int) -> np.ndarray:
    return np.ones((n, n)) - np.eye(n)


def trr_ratio(kind: str, usage: float, own_other_usage: float, totals: tuple[float, float],
              day_totals: float, params: TrrParams | None = None) -> float:
    """One alpha (``kind='pv'``) or beta (``kind='wind'``) value.

    Args:
        kind: ``'pv'`` or ``'wind'``.
        usage: the building's use of that kind (MW).
        own_other_usage: the building's use of the other kind (MW).
        totals: pooled ``(P_pv, P_wind)`` at the slot (MW).
        day_totals: sum over the day of the squared pooled totals of ``kind``.
        params: coefficients; defaults when omitted.

    Raises:
        GenerationFloorError: the relevant total is below ``epsilon_gen``.
        TrrDomainError: ``usage <= 0`` or the log argument leaves (0, 1].
    """
    p = params or TrrParams()
    if kind == "pv":
        own_total, other_total = totals
    elif kind == "wind":
        other_total, own_total = totals
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if own_total < p.epsilon_gen:
        raise GenerationFloorError(f"{kind} total {own_total} below floor {p.epsilon_gen}")
    if not usage > 0:
        raise TrrDomainError("usage must be positive")
    arg = own_total * usage / day_totals
    if not 0 < arg <= 1:
        raise TrrDomainError(f"log argument {arg} outside (0, 1]")
    return float(p.rho_b * (usage + p.gamma_l * (other_total - own_other_usage)) / own_total * -np.log(arg))


def trr_series(pv_used: np.ndarray, wind_used: np.ndarray, pv_total: np.ndarray,
               wind_total: np.ndarray, params: TrrParams | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Alpha and beta for every building and slot: arrays shaped like ``pv_used`` (..., B, 96).

    Usage is floored at ``epsilon_gen`` so a building that receives nothing
    gets a large finite index instead of an infinite one.  Slots without
    generation are NaN.
    """
    p = params or TrrParams()
    pv_total = np.asarray(pv_total, dtype=float)
    wind_total = np.asarray(wind_total, dtype=float)

    def one(use, other_use, own_tot, other_tot):
        present = own_tot >= p.epsilon_gen
        val = np.full(np.broadcast_shapes(use.shape, own_tot.shape), np.nan)
        val[..., present] = _index(use[..., present], other_use[..., present], own_tot[present],
                                   other_tot[present], _sum_sq(own_tot, p), p)
        return val

    alpha = one(pv_used, wind_used, pv_total, wind_total)
    beta = one(wind_used, pv_used, wind_total, pv_total)
    return alpha, beta


def _sum_sq(total: np.ndarray, p: TrrParams) -> float:
    present = total >= p.epsilon_gen
    return max(float(np.sum(total[present] ** 2)), p.epsilon_gen**2)


def _index(use, other_use, own_tot, other_tot, ssq: float, p: TrrParams) -> np.ndarray:
    """The TRR formula on present slots only (no masking)."""
    u = np.maximum(use, p.epsilon_gen)
    arg = np.minimum(own_tot * u / ssq, 1.0)
    return p.rho_b * (u + p.gamma_l * (other_tot - other_use)) / own_tot * -np.log(arg)


def trr_dispersion(values, K=None) -> float:
    """Sum over observation pairs i < j of ``K[i, j] * |v_i - v_j|``, skipping NaN entries.

    Raises:
        UndefinedDispersionError: fewer than two present observations.
    """
    v = np.asarray(values, dtype=float)
    present = ~np.isnan(v)
    if present.sum() < 2:
        raise UndefinedDispersionError("need at least two present observations")
    K = default_k(len(v)) if K is None else np.asarray(K, dtype=float)
    _check_k(K)
    idx = np.flatnonzero(present)
    vp = v[idx]
    Kp = K[np.ix_(idx, idx)]
    return float(0.5 * np.sum(Kp * np.abs(vp[:, None] - vp[None, :])))


def _pairwise_spread(v: np.ndarray, K: np.ndarray | None) -> np.ndarray:
    """Batched dispersion over the building axis (-2) of (..., B, T) values without NaN."""
    if K is None:
        # All-ones weights: sum_{i<j} |v_i - v_j| = sum_k (2k - B + 1) v_(k) on sorted values.
        B = v.shape[-2]
        coef = (2.0 * np.arange(B) - B + 1.0)[:, None]
        return np.sum(coef * np.sort(v, axis=-2), axis=-2)
    diff = np.abs(v[..., :, None, :] - v[..., None, :, :])
    return 0.5 * np.einsum("ij,...ijt->...t", K, diff)


def trr_penalty_flows(pv_used: np.ndarray, wind_used: np.ndarray, pv_total: np.ndarray,
                      wind_total: np.ndarray, params: TrrParams | None = None,
                      weight: float = 1.0) -> np.ndarray:
    """``weight`` times the alpha plus beta building dispersion, averaged over slots and pairs.

    Dividing by the pair count keeps the penalty on the same order as the
    normalised objectives whatever the roster size.
    """
    p = params or TrrParams()
    pv_total = np.asarray(pv_total, dtype=float)
    wind_total = np.asarray(wind_total, dtype=float)
    B = pv_used.shape[-2]
    pairs = B * (B - 1) / 2.0
    total = 0.0
    for use, other_use, tot, other_tot, K in ((pv_used, wind_used, pv_total, wind_total, p.k_alpha),
                                              (wind_used, pv_used, wind_total, pv_total, p.k_beta)):
        present = tot >= p.epsilon_gen
        if present.any():
            vals = _index(use[..., present], other_use[..., present], tot[present], other_tot[present],
                          _sum_sq(tot, p), p)
            total = total + np.mean(_pairwise_spread(vals, K), axis=-1) / pairs
    return weight * np.asarray(total, dtype=float) * np.ones(pv_used.shape[:-2])


def trr_penalty(scenario, decision, params: TrrParams | None = None, weight: float = 1.0,
                config=None) -> float:
    """Penalty for one decision; zero weight short-circuits to 0."""
    from .model import dispatch_decision

    if weight == 0:
        return 0.0
    d = dispatch_decision(scenario, decision, config)
    return float(trr_penalty_flows(d.pv_used, d.wind_used, scenario.pv_total, scenario.wind_total, params, weight))


def make_penalty(scenario, params: TrrParams | None, weight: float):
    """Penalty hook for ``BuildingProblem`` or ``None`` when the weight is zero."""
    if weight == 0:
        return None
    pv_total, wind_total = scenario.pv_total, scenario.wind_total

    def penalty(d, _pv, _wind):
        return trr_penalty_flows(d.pv_used, d.wind_used, pv_total, wind_total, params, weight)

    return penalty
