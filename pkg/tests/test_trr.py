import math

import numpy as np
import pytest

from inbi.model import SLOTS_PER_DAY, BuildingScenario, DispatchDecision, dispatch_decision
from inbi.trr import (
    GenerationFloorError,
    TrrDomainError,
    TrrParams,
    UndefinedDispersionError,
    trr_dispersion,
    trr_penalty,
    trr_penalty_flows,
    trr_ratio,
    trr_series,
)


def _alpha_oracle(u_g, u_f, P_g, P_f, ssq_g, rho=1.0, gamma=0.1):
    return rho * (u_g + gamma * (P_f - u_f)) / P_g * -math.log(P_g * u_g / ssq_g)


def _beta_oracle(u_f, u_g, P_g, P_f, ssq_f, rho=1.0, gamma=0.1):
    return rho * (u_f + gamma * (P_g - u_g)) / P_f * -math.log(P_f * u_f / ssq_f)


def test_two_building_oracle():
    p = TrrParams(rho_b=1.0, gamma_l=0.1)
    P_g, P_f = 1.3, 0.9
    ssq_g, ssq_f = 14.2, 7.7
    uses = [(0.4, 0.5), (0.9, 0.4)]  # (pv, wind) per building
    for u_g, u_f in uses:
        a = trr_ratio("pv", u_g, u_f, (P_g, P_f), ssq_g, p)
        b = trr_ratio("wind", u_f, u_g, (P_g, P_f), ssq_f, p)
        assert abs(a - _alpha_oracle(u_g, u_f, P_g, P_f, ssq_g)) <= 1e-12
        assert abs(b - _beta_oracle(u_f, u_g, P_g, P_f, ssq_f)) <= 1e-12


def test_ratio_scale_invariant():
    base = trr_ratio("pv", 0.4, 0.2, (1.3, 0.9), 14.2)
    for k in (1e-3, 0.5, 7.0, 1e4):
        scaled = trr_ratio("pv", 0.4 * k, 0.2 * k, (1.3 * k, 0.9 * k), 14.2 * k * k)
        assert abs(scaled - base) <= 1e-9 * max(1.0, abs(base))


def test_equal_shares_equal_alpha():
    p = TrrParams(gamma_l=0.0)
    vals = [trr_ratio("pv", 0.25, 0.1 * b, (1.0, 2.0), 30.0, p) for b in range(4)]
    assert len(set(vals)) == 1


def test_ratio_errors():
    with pytest.raises(GenerationFloorError):
        trr_ratio("pv", 0.1, 0.1, (0.0, 1.0), 1.0)
    with pytest.raises(TrrDomainError):
        trr_ratio("wind", 0.0, 0.1, (1.0, 1.0), 1.0)
    with pytest.raises(TrrDomainError):
        trr_ratio("pv", 2.0, 0.1, (2.0, 1.0), 1.0)  # log argument 4 > 1
    with pytest.raises(ValueError):
        trr_ratio("hydro", 0.1, 0.1, (1.0, 1.0), 1.0)


def test_series_matches_pointwise():
    rng = np.random.default_rng(4)
    B, T = 3, SLOTS_PER_DAY
    pv_tot = rng.uniform(0.5, 1.0, T)
    pv_tot[:10] = 0.0  # night: no index
    wind_tot = rng.uniform(0.5, 1.0, T)
    share = rng.dirichlet(np.ones(B), size=T).T
    pv_used = share * pv_tot
    wind_used = share[::-1] * wind_tot
    alpha, beta = trr_series(pv_used, wind_used, pv_tot, wind_tot)
    assert np.all(np.isnan(alpha[:, :10]))
    assert not np.any(np.isnan(beta))
    ssq_g = np.sum(pv_tot**2)
    ssq_f = np.sum(wind_tot**2)
    for b in range(B):
        for t in (12, 50, 95):
            oa = trr_ratio("pv", pv_used[b, t], wind_used[b, t], (pv_tot[t], wind_tot[t]), ssq_g)
            ob = trr_ratio("wind", wind_used[b, t], pv_used[b, t], (pv_tot[t], wind_tot[t]), ssq_f)
            assert alpha[b, t] == pytest.approx(oa, rel=1e-12)
            assert beta[b, t] == pytest.approx(ob, rel=1e-12)


def test_dispersion_trivial():
    assert trr_dispersion([0.3, 0.3, 0.3]) == 0.0
    assert trr_dispersion([1.0, 2.0, 5.0], np.zeros((3, 3))) == 0.0
    with pytest.raises(UndefinedDispersionError):
        trr_dispersion([1.0, np.nan])


def test_dispersion_brute_force():
    rng = np.random.default_rng(9)
    v = rng.normal(size=4)
    K = rng.uniform(size=(4, 4))
    K = K + K.T
    np.fill_diagonal(K, 0.0)
    oracle = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            oracle += K[i, j] * abs(v[i] - v[j])
    assert trr_dispersion(v, K) == pytest.approx(oracle, rel=1e-14)
    v[2] = np.nan
    oracle = sum(K[i, j] * abs(v[i] - v[j]) for i, j in [(0, 1), (0, 3), (1, 3)])
    assert trr_dispersion(v, K) == pytest.approx(oracle, rel=1e-14)


def test_dispersion_rejects_bad_k():
    with pytest.raises(ValueError):
        trr_dispersion([1.0, 2.0], np.array([[0.0, 1.0], [2.0, 0.0]]))


def _symmetric_scenario(n=4):
    rng = np.random.default_rng(2)
    load = np.broadcast_to(rng.uniform(0.2, 0.4, SLOTS_PER_DAY), (n, SLOTS_PER_DAY))
    gen = np.broadcast_to(rng.uniform(0.02, 0.1, SLOTS_PER_DAY), (n, SLOTS_PER_DAY))
    return BuildingScenario(0, n, load, 0 * load, 0 * load, gen, gen, np.full(SLOTS_PER_DAY, 26.0))


def test_penalty_uniform_vs_skewed():
    sc = _symmetric_scenario()
    uniform = trr_penalty(sc, DispatchDecision.uniform(4), weight=1.0)
    skew = np.array([0.4, 0.3, 0.2, 0.1])
    skewed = trr_penalty(sc, DispatchDecision(skew, skew), weight=1.0)
    assert uniform == pytest.approx(0.0, abs=1e-12)
    assert skewed > uniform

    # Oracle: slot mean of pairwise alpha/beta spreads from the scalar formula, over the pair count.
    d = dispatch_decision(sc, DispatchDecision(skew, skew))
    pv_tot, wind_tot = sc.pv_total, sc.wind_total
    ssq_g, ssq_f = np.sum(pv_tot**2), np.sum(wind_tot**2)
    total = 0.0
    for kind, ssq in (("pv", ssq_g), ("wind", ssq_f)):
        per_slot = []
        for t in range(SLOTS_PER_DAY):
            vals = []
            for b in range(4):
                own = d.pv_used[b, t] if kind == "pv" else d.wind_used[b, t]
                other = d.wind_used[b, t] if kind == "pv" else d.pv_used[b, t]
                vals.append(trr_ratio(kind, own, other, (pv_tot[t], wind_tot[t]), ssq))
            per_slot.append(trr_dispersion(vals))
        total += np.mean(per_slot) / 6.0
    assert skewed == pytest.approx(total, rel=1e-10)


def test_zero_weight_is_zero():
    sc = _symmetric_scenario()
    skew = np.array([0.7, 0.1, 0.1, 0.1])
    assert trr_penalty(sc, DispatchDecision(skew, skew), weight=0.0) == 0.0


def test_penalty_flows_batched():
    sc = _symmetric_scenario()
    rng = np.random.default_rng(1)
    fr = rng.dirichlet(np.ones(4), size=3)
    out = []
    for f in fr:
        out.append(trr_penalty(sc, DispatchDecision(f, f), weight=0.5))
    from inbi.model import dispatch
    d = dispatch(sc, fr, fr, np.full((3, 2), 26.0), np.zeros(3))
    batched = trr_penalty_flows(d.pv_used, d.wind_used, sc.pv_total, sc.wind_total, weight=0.5)
    np.testing.assert_allclose(batched, out, rtol=1e-12)
