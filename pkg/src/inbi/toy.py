"""Small analytic problems with known Pareto sets, used for checking frontier methods."""

from __future__ import annotations

import numpy as np

from .problem import FunctionProblem


def biobjective_parabolas() -> FunctionProblem:
    """min (x^2, (x - 1)^2) on [0, 1]; every x in [0, 1] is Pareto optimal."""

    def objectives(X):
        x = X[..., 0]
        return np.stack([x**2, (x - 1.0) ** 2], axis=-1)

    return FunctionProblem(objectives, [0.0], [1.0], n_obj=2, start=[0.5], name="parabolas")


def simplex_distances() -> FunctionProblem:
    """min ||x - e_j||^2 for the three unit vectors, x on the unit simplex.

    The simplex is imposed as an equality constraint; the Pareto set is the
    whole simplex and the anchors are the unit vectors.
    """
    E = np.eye(3)

    def objectives(X):
        return np.sum((X[..., None, :] - E) ** 2, axis=-1)

    def equality(X):
        return (np.sum(X, axis=-1) - 1.0)[..., None]

    return FunctionProblem(
        objectives, np.zeros(3), np.ones(3), n_obj=3, equality=equality,
        start=np.full(3, 1.0 / 3.0), name="simplex-distances",
    )


def planar_centers(centers=None, scales=None) -> FunctionProblem:
    """min sum_k a_jk (x_k - c_jk)^2 for three centres c_j in the unit square.

    With unit scales the Pareto set is the triangle spanned by the centres.
    Unequal scales bend the front and make NBI spacing uneven.
    """
    C = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]) if centers is None else np.asarray(centers, float)
    A = np.ones_like(C) if scales is None else np.asarray(scales, float)

    def objectives(X):
        return np.sum(A * (X[..., None, :] - C) ** 2, axis=-1)

    return FunctionProblem(
        objectives, np.zeros(2), np.ones(2), n_obj=3, start=C.mean(axis=0), name="planar-centers",
    )


def seeded_planar(seed: int) -> FunctionProblem:
    """A ``planar_centers`` instance with seeded centres and anisotropic scales."""
    rng = np.random.default_rng([seed, 7])
    while True:
        C = rng.uniform(0.05, 0.95, size=(3, 2))
        u, v = C[1] - C[0], C[2] - C[0]
        area = 0.5 * abs(u[0] * v[1] - u[1] * v[0])
        if area > 0.08:
            break
    A = rng.uniform(0.5, 2.0, size=(3, 2))
    return planar_centers(C, A)


def simplex_map(X: np.ndarray) -> np.ndarray:
    """Map the unit square onto barycentric coordinates of a triangle (collapsed-edge map)."""
    u, v = X[..., 0:1], X[..., 1:2]
    return np.concatenate([1.0 - u, u * (1.0 - v), u * v], axis=-1)


def bent_simplex(kappa: float = 0.3) -> FunctionProblem:
    """min h(b_j), h(b) = 1 - b + kappa*b*(1 - b), over barycentric points b.

    ``h`` is strictly decreasing for ``|kappa| < 1`` and the coordinates sum
    to one, so every decision in the unit square is Pareto optimal.  The front
    is curved but its normal stays within a bounded angle of (1, 1, 1), so the
    whole front is reachable by NBI.
    """
    if not abs(kappa) < 1:
        raise ValueError("kappa must lie in (-1, 1)")

    def objectives(X):
        b = simplex_map(X)
        return 1.0 - b + kappa * b * (1.0 - b)

    return FunctionProblem(
        objectives, np.zeros(2), np.ones(2), n_obj=3, start=[2.0 / 3.0, 0.5], name="bent-simplex",
    )
