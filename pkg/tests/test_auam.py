import numpy as np
import pytest

from inbi.auam import (
    AxisFamily,
    EmptySelectionError,
    SurfaceError,
    auam_select,
    axis_select,
    fit_surface,
    lattice_size,
    project,
    tolerance_box,
    uniform_points,
)
from inbi.config import AUAMConfig

E = np.eye(3)


def test_fit_unit_simplex():
    np.testing.assert_allclose(fit_surface(E).coef, [1.0, 1.0, 1.0])


def test_fit_recovers_coefficients():
    # Intercepts of x + 2y + 3z = 1 plus a check that solve is exact on them.
    A = np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 1.0 / 3.0]])
    np.testing.assert_allclose(fit_surface(A).coef, [1.0, 2.0, 3.0], rtol=1e-12)
    B = np.array([[0.2, 0.1, 0.2], [0.5, 0.1, 0.1], [0.1, 0.3, 0.1]])
    B[:, 2] = (1.0 - B[:, 0] - 2 * B[:, 1]) / 3.0
    np.testing.assert_allclose(fit_surface(B).coef, [1.0, 2.0, 3.0], rtol=1e-10)


def test_fit_rejects_degenerate():
    with pytest.raises(SurfaceError):
        fit_surface(np.array([[0.0, 0, 0], [0.5, 0.5, 0.5], [1, 1, 1]]))
    with pytest.raises(SurfaceError):
        # Plane x + y = 1 has C = 0.
        fit_surface(np.array([[1.0, 0, 0], [0, 1.0, 0], [0.5, 0.5, 1.0]]))


def test_grid_two_gives_six_points():
    P = uniform_points(fit_surface(E, 0.0), 2)
    assert len(P) == 6
    expected = {(1, 0, 0), (0, 1, 0), (0, 0, 1), (0.5, 0.5, 0), (0.5, 0, 0.5), (0, 0.5, 0.5)}
    assert {tuple(np.round(p, 12) + 0.0) for p in P} == expected


@pytest.mark.parametrize("g", [2, 3, 5, 8, 13])
def test_lattice_count_closed_form(g):
    surf = fit_surface(E, 0.0)
    P = uniform_points(surf, g)
    assert len(P) == (g + 1) * (g + 2) // 2
    assert np.max(np.abs(surf.residual(P))) <= 1e-9


def test_expanded_lattice_on_plane_and_in_box():
    A = np.array([[0.0, 0.9, 1.0], [1.0, 0.0, 0.7], [0.8, 1.0, 0.0]])
    surf = fit_surface(A, 0.25)
    P = uniform_points(surf, 4)
    assert np.max(np.abs(surf.residual(P))) <= 1e-9
    assert P.min() >= -0.25 - 1e-12 and P.max() <= 1.25 + 1e-12
    assert len(P) > 15  # the box admits points past the anchor triangle


def test_tolerance_box():
    d = tolerance_box(np.array([1.0, 2.0, 0.5]), 0.1, 4.0)
    side = 1.2 / 4.0
    np.testing.assert_allclose(d, [side, side, side * 4.0])


def test_lattice_size_closest_and_capped():
    g = lattice_size(E, 20)
    counts = {k: len(uniform_points(fit_surface(E, 1 / k), k)) for k in range(2, 12)}
    best = min((abs(c - 40), k) for k, c in counts.items() if c <= 300)[1]
    assert g == best
    assert len(uniform_points(fit_surface(E, 1 / lattice_size(E, 10_000)), lattice_size(E, 10_000))) <= 300


def _family(points, delta):
    return AxisFamily(np.ones(3) / np.sqrt(3), np.asarray(points, float), np.asarray(delta, float), 1.0)


def test_candidate_on_lattice_point_selected():
    surf = fit_surface(E)
    fam = _family([[1 / 3, 1 / 3, 1 / 3]], [0.1, 0.1, 0.1])
    sel, *_ = axis_select(np.array([[1 / 3, 1 / 3, 1 / 3]]), surf, fam)
    assert sel == [0]


def test_candidate_outside_boxes_excluded():
    surf = fit_surface(E)
    fam = _family([[1 / 3, 1 / 3, 1 / 3], [1.0, 0.0, 0.0]], [0.05, 0.05, 0.05])
    S = np.array([[0.3, 0.3, 0.3], [0.1, 0.5, 0.2]])
    sel, proj, u, matched, dist = axis_select(S, surf, fam)
    assert sel == [0]
    assert matched.tolist() == [0, -1]
    with pytest.raises(EmptySelectionError):
        axis_select(S[1:], surf, fam)


def test_projection_along_axis():
    surf = fit_surface(E)
    axis = np.ones(3) / np.sqrt(3)
    P, u = project(np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]]), surf, axis)
    np.testing.assert_allclose(P, [[1 / 3] * 3, [1 / 3] * 3], atol=1e-15)
    np.testing.assert_allclose(u, [np.sqrt(3) / 3, -np.sqrt(3) / 6], atol=1e-15)


def test_cloud_matches_brute_force_scan():
    rng = np.random.default_rng(12)
    anchors = np.array([[0.0, 0.8, 1.0], [1.0, 0.0, 0.9], [0.7, 1.0, 0.0]])
    S = rng.uniform(0, 1, size=(20, 3))
    res = auam_select(S, anchors, AUAMConfig())
    surf, fam = res.surface, res.family
    c = surf.coef
    a = fam.axis
    expected = []
    for p in fam.points:
        best, best_d, best_u = -1, np.inf, -np.inf
        for i, s in enumerate(S):
            u = (1 - s @ c) / (a @ c)
            q = s + u * a
            if any(abs(q[k] - p[k]) > fam.delta[k] for k in range(3)):
                continue
            d = float(np.sqrt(((q - p) ** 2).sum()))
            if d < best_d - 1e-9 or (abs(d - best_d) <= 1e-9 and u > best_u):
                best, best_d, best_u = i, d, u
        expected.append(best)
    assert res.matched.tolist() == expected
    assert res.selected == sorted({i for i in expected if i >= 0})


def test_selected_within_boxes_exactly():
    rng = np.random.default_rng(13)
    S = rng.dirichlet(np.ones(3), size=60)
    res = auam_select(S, E)
    for t, i in enumerate(res.matched):
        if i >= 0:
            assert np.all(np.abs(res.projections[i] - res.family.points[t]) <= res.family.delta)


def test_axis_must_be_positive():
    with pytest.raises(ValueError):
        auam_select(np.eye(3), E, AUAMConfig(axis=(1.0, 0.0, 1.0)))
