import numpy as np
import pytest

from inbi.compromise import (
    CompromiseConfig,
    DegenerateSetError,
    closeness,
    estimate_covariance,
    evaluation_matrix,
    ideal_points,
    mahalanobis_compromise,
    pick_compromise,
)
from inbi.nbi import euclidean_compromise


def test_ideal_points_small():
    lo, hi = ideal_points(np.array([[0.0, 0, 0], [1, 1, 1]]))
    assert lo.tolist() == [0, 0, 0] and hi.tolist() == [1, 1, 1]
    lo, hi = ideal_points(np.array([[0.0], [0.4], [1.0]]))
    assert lo[0] == 0.0 and hi[0] == 1.0
    with pytest.raises(ValueError):
        ideal_points(np.zeros((1, 3)))


def test_ideal_points_scan():
    U = np.random.default_rng(5).uniform(size=(6, 3))
    lo, hi = ideal_points(U)
    for j in range(3):
        col = [U[i, j] for i in range(6)]
        assert lo[j] == min(col) and hi[j] == max(col)


def test_evaluation_matrix_constant_column():
    U = evaluation_matrix(np.array([[1.0, 5.0], [3.0, 5.0], [2.0, 5.0]]))
    assert U[:, 0].tolist() == [0.0, 1.0, 0.5]
    assert U[:, 1].tolist() == [0.0, 0.0, 0.0]


def test_closeness_matrix_oracle():
    rng = np.random.default_rng(6)
    U = rng.uniform(size=(5, 3))
    L = np.array([[1.0, 0, 0], [0.3, 0.8, 0], [-0.2, 0.1, 0.6]])
    sigma = L @ L.T
    w = (0.5, 0.3, 0.2)
    cfg = CompromiseConfig(weights=w, reg=0.0)
    th = closeness(U, cfg, sigma)
    W = np.diag(w)
    M = W @ np.linalg.inv(sigma) @ W
    up, un = U.min(axis=0), U.max(axis=0)
    for i in range(5):
        dp = np.sqrt((U[i] - up) @ M @ (U[i] - up))
        dn = np.sqrt((U[i] - un) @ M @ (U[i] - un))
        assert abs(th[i] - dp / (dp + dn)) <= 1e-10


def test_closeness_identity_is_euclidean():
    U = np.random.default_rng(7).uniform(size=(6, 3))
    th = closeness(U, CompromiseConfig(reg=0.0), np.eye(3))
    up, un = U.min(axis=0), U.max(axis=0)
    dp = np.linalg.norm(U - up, axis=1)
    dn = np.linalg.norm(U - un, axis=1)
    np.testing.assert_array_equal(th, dp / (dp + dn))


def test_closeness_extremes():
    U = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.3, 0.6, 0.2]])
    th = closeness(U, CompromiseConfig(reg=0.0), np.eye(3))
    assert th[0] == 0.0 and th[1] == 1.0


def test_closeness_degenerate():
    with pytest.raises(DegenerateSetError):
        closeness(np.zeros((3, 3)), CompromiseConfig(reg=0.0), np.eye(3))


def test_pick_compromise():
    assert pick_compromise([0.4, 0.1, 0.9]) == 1
    assert pick_compromise([0.2, 0.2, 0.2]) == 0
    rng = np.random.default_rng(8)
    for _ in range(20):
        th = rng.uniform(size=10)
        best = 0
        for i in range(10):
            if th[i] < th[best]:
                best = i
        assert pick_compromise(th) == best
    with pytest.raises(ValueError):
        pick_compromise([])


def test_pick_invariant_to_weight_scaling():
    F = np.random.default_rng(10).uniform(size=(12, 3))
    base, _, sigma = mahalanobis_compromise(F, CompromiseConfig(weights=(0.5, 0.3, 0.2)))
    for k in (1e-3, 2.0, 1e3):
        idx, _, _ = mahalanobis_compromise(F, CompromiseConfig(weights=(0.5 * k, 0.3 * k, 0.2 * k)), sigma)
        assert idx == base


def test_euclidean_compromise_oracle_and_ties():
    F = np.array([[0.0, 1.0, 0.5], [1.0, 0.0, 0.5], [0.4, 0.4, 0.0], [0.9, 0.8, 1.0], [0.2, 0.7, 0.3]])
    idx, th = euclidean_compromise(F, (1.0, 1.0, 1.0))
    U = (F - F.min(axis=0)) / (F.max(axis=0) - F.min(axis=0))
    dp = np.linalg.norm(U - U.min(axis=0), axis=1)
    dn = np.linalg.norm(U - U.max(axis=0), axis=1)
    np.testing.assert_allclose(th, dp / (dp + dn), rtol=0, atol=1e-15)
    assert idx == int(np.argmin(dp / (dp + dn)))
    # Symmetric pair: lower index wins.
    idx, _ = euclidean_compromise(np.array([[0.0, 1.0], [1.0, 0.0]]), (1.0, 1.0))
    assert idx == 0
    # A point at the positive ideal gets Th = 0.
    idx, th = euclidean_compromise(np.array([[0.0, 0.0], [1.0, 0.5], [0.5, 1.0]]), (1.0, 1.0))
    assert idx == 0 and th[0] == 0.0


def test_covariance_shrinks_when_ill_conditioned():
    U = np.column_stack([np.linspace(0, 1, 10), np.linspace(0, 1, 10), np.zeros(10)])
    sigma = estimate_covariance(U, reg=1e-8, cond_max=1e8)
    eig = np.linalg.eigvalsh(sigma + 1e-8 * np.eye(3))
    assert eig[-1] / eig[0] <= 1e8 * (1 + 1e-6)


def test_config_validation():
    with pytest.raises(ValueError):
        CompromiseConfig(weights=(0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        CompromiseConfig(weights=(-1.0, 1.0, 1.0))
