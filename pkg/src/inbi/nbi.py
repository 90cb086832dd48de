"""Normal-boundary intersection frontier generation and the Euclidean baseline compromise."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .config import SolverConfig
from .compromise import CompromiseConfig, closeness, evaluation_matrix, pick_compromise
from .problem import (
    AnchorResult,
    MooProblem,
    NormalizationBounds,
    ParetoPoint,
    anchor_solutions,
    nondominated_mask,
    normalize_objectives,
)
from .solver import solve_many

log = logging.getLogger(__name__)

DUP_TOL = 1e-9


class FrontierError(RuntimeError):
    """Too few frontier points survived."""


@dataclass
class FrontierSet:
    points: list[ParetoPoint]
    bounds: NormalizationBounds
    covariance: np.ndarray = field(default=None)
    d_set: float = float("nan")
    n_candidates: int = 0
    n_skipped: int = 0
    # Normalised anchors, one row per objective.
    anchors: np.ndarray | None = None

    def __post_init__(self):
        if self.covariance is None:
            self.covariance = objective_covariance(self.S)

    @property
    def F(self) -> np.ndarray:
        return np.array([p.f for p in self.points])

    @property
    def S(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    @property
    def X(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    def __len__(self) -> int:
        return len(self.points)


def objective_covariance(S: np.ndarray) -> np.ndarray:
    S = np.atleast_2d(S)
    if len(S) < 2:
        return np.zeros((S.shape[1], S.shape[1]))
    return np.cov(S, rowvar=False)


def weight_grid(n_obj: int, divisions: int) -> np.ndarray:
    """All weight vectors with entries k/divisions summing to one, in lexicographic order."""
    rows = [
        c for c in itertools.product(range(divisions + 1), repeat=n_obj - 1) if sum(c) <= divisions
    ]
    W = np.array([list(c) + [divisions - sum(c)] for c in rows], dtype=float)
    return W / divisions


def min_spacing(S: np.ndarray) -> float:
    """Smallest pairwise Euclidean distance between rows."""
    return float(nearest_neighbor_distances(S).min()) if len(S) >= 2 else float("nan")


def nearest_neighbor_distances(S: np.ndarray) -> np.ndarray:
    """Distance from every row to its closest other row."""
    S = np.asarray(S, dtype=float)
    out = np.empty(len(S))
    for start in range(0, len(S), 512):
        blk = S[start : start + 512]
        dist = np.sqrt(np.sum((blk[:, None, :] - S[None, :, :]) ** 2, axis=-1))
        dist[np.arange(len(blk)), np.arange(start, start + len(blk))] = np.inf
        out[start : start + 512] = dist.min(axis=1)
    return out


def duplicate_mask(S: np.ndarray, tol: float = DUP_TOL) -> np.ndarray:
    """True for rows lying within ``tol`` of an earlier row."""
    S = np.asarray(S, dtype=float)
    dup = np.zeros(len(S), dtype=bool)
    for start in range(0, len(S), 512):
        blk = S[start : start + 512]
        dist = np.sqrt(np.sum((blk[:, None, :] - S[None, :, :]) ** 2, axis=-1))
        earlier = np.arange(len(S))[None, :] < np.arange(start, start + len(blk))[:, None]
        dup[start : start + 512] = np.any((dist <= tol) & earlier, axis=1)
    return dup


def filter_points(points: list[ParetoPoint], tol: float = DUP_TOL) -> list[ParetoPoint]:
    """Drop near-duplicates (first occurrence wins) and dominated points."""
    if not points:
        return []
    dup = duplicate_mask(np.array([p.s for p in points]), tol)
    kept = [p for p, d in zip(points, dup) if not d]
    mask = nondominated_mask(np.array([p.s for p in kept]), tol)
    return [p for p, k in zip(kept, mask) if k]


def quasi_normal(anchor_s: np.ndarray) -> np.ndarray:
    """Unit direction of the anchor-simplex centroid seen from the utopia point.

    Travel along the negative of this direction moves from the convex hull of
    individual minima toward the origin of normalised objective space.
    """
    phi = np.asarray(anchor_s, dtype=float).T
    n = phi @ np.ones(phi.shape[1])
    return n / np.linalg.norm(n)


def nbi_frontier(
    problem: MooProblem,
    divisions: int = 10,
    config: SolverConfig | None = None,
    anchors: AnchorResult | None = None,
    seed: int = 0,
) -> FrontierSet:
    """Frontier from one NBI subproblem per simplex weight.

    For weight w the hull point is ``p = Phi w`` (columns of Phi are the
    normalised anchors).  The subproblem pushes as far as possible from ``p``
    along ``-n``; written with the travel eliminated it is
    ``min_x max_j (s_j(x) - p_j) / n_j`` under the problem constraints, i.e.
    the inequality form of the NBI line constraint.
    """
    if divisions < 2:
        raise ValueError("divisions must be at least 2")
    cfg = config or SolverConfig()
    anchors = anchors or anchor_solutions(problem, cfg, seed)
    bounds = anchors.bounds
    A_s = np.array([a.s for a in anchors.points])
    A_x = np.array([a.x for a in anchors.points])
    n = quasi_normal(A_s)
    W = weight_grid(problem.n_obj, divisions)
    P = W @ A_s

    vertex = np.isclose(W.max(axis=1), 1.0)
    solve_idx = np.flatnonzero(~vertex)
    hull = P[solve_idx]

    def fun(X, p):
        ev = problem.evaluate_chunked(X, cfg.chunk_size)
        s = normalize_objectives(ev.objectives, bounds)
        val = np.max((s - hull[p][:, None, :]) / n, axis=-1)
        if ev.penalty is not None:
            val = val + ev.penalty
        return val, ev.violation

    starts = W[solve_idx] @ A_x
    reports = solve_many(fun, starts, problem.lower, problem.upper, cfg, seed, tag=201) if len(solve_idx) else []

    candidates: list[ParetoPoint] = []
    skipped = 0
    rep_iter = iter(reports)
    for k, w in enumerate(W):
        if vertex[k]:
            a = anchors.points[int(np.argmax(w))]
            candidates.append(ParetoPoint(a.x.copy(), a.f.copy(), a.s.copy(), "NBI"))
            continue
        rep = next(rep_iter)
        if not rep.converged:
            skipped += 1
            log.info("NBI subproblem %d skipped (not converged, viol=%.3g)", k, rep.violation)
            continue
        f = problem.evaluate(rep.solution[None, :]).objectives[0]
        candidates.append(ParetoPoint(rep.solution, f, normalize_objectives(f, bounds), "NBI"))

    points = filter_points(candidates)
    if len(points) < 3:
        raise FrontierError(f"only {len(points)} frontier points survived")
    return FrontierSet(
        points=points,
        bounds=bounds,
        d_set=min_spacing(np.array([p.s for p in points])),
        n_candidates=len(W),
        n_skipped=skipped,
        anchors=A_s,
    )


def euclidean_compromise(frontier: FrontierSet | np.ndarray, weights) -> tuple[int, np.ndarray]:
    """Double-base-point choice with identity covariance.

    Returns the chosen index and the relative-closeness vector.
    """
    F = frontier.F if isinstance(frontier, FrontierSet) else np.asarray(frontier, dtype=float)
    if len(F) == 0:
        raise ValueError("empty frontier")
    U = evaluation_matrix(F)
    config = CompromiseConfig(weights=tuple(np.asarray(weights, dtype=float)), reg=0.0)
    th = closeness(U, config, np.eye(U.shape[1]))
    return pick_compromise(th), th
