"""Adaptive weighted-sum densification of sparse frontier regions.

The frontier is projected onto each objective plane (xoy, yoz, zox).  Where
neighbouring points of the projected 2-D front lie more than ``delta_q = 2 *
d_set`` apart, a family of weighted-sum subproblems restricted to the gap is
solved.  Every point produced is then checked against the full three-objective
problem and merged into the frontier if it survives.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .config import AWSConfig, SolverConfig
from .nbi import DUP_TOL, FrontierSet, min_spacing
from .problem import MooProblem, ParetoPoint, nondominated_mask, normalize_objectives
from .solver import solve_many

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlaneSpec:
    name: str
    a: int  # objective on the first plane axis
    b: int


PLANES = (PlaneSpec("xoy", 0, 1), PlaneSpec("yoz", 1, 2), PlaneSpec("zox", 2, 0))


@dataclass
class SparseSegment:
    """A gap between consecutive points of one plane's projected front.

    ``p`` is the endpoint with the smaller first coordinate (so the larger
    second coordinate); ``q`` the other one.
    """

    plane: PlaneSpec
    index: int
    p: np.ndarray
    q: np.ndarray
    x_p: np.ndarray
    x_q: np.ndarray
    length: float
    omega: int


@dataclass
class AwsRecord:
    plane: str
    segment: int
    lam: float
    accepted: bool
    reason: str
    f: np.ndarray


@dataclass
class AwsResult:
    frontier: FrontierSet
    segments: list[SparseSegment]
    records: list[AwsRecord] = field(default_factory=list)
    delta_q: float = float("nan")

    @property
    def n_added(self) -> int:
        return sum(r.accepted for r in self.records)

    @property
    def n_rejected(self) -> int:
        return sum(not r.accepted for r in self.records)


def offsets(delta_q: float) -> tuple[float, float]:
    """Isotropic split of ``delta_q`` into the two axis offsets."""
    d = delta_q / math.sqrt(2.0)
    return d, d


def refinement_count(length: float, delta_q: float, max_count: int = 100) -> int:
    return min(math.ceil(length / delta_q) - 1, max_count)


def plane_front(S: np.ndarray, plane: PlaneSpec) -> np.ndarray:
    """Indices of the 2-D non-dominated projection onto ``plane``, sorted by the first axis."""
    P = S[:, [plane.a, plane.b]]
    idx = np.flatnonzero(nondominated_mask(P))
    order = np.lexsort((P[idx, 1], P[idx, 0]))
    return idx[order]


def sparse_segments(frontier: FrontierSet, plane: PlaneSpec, d_set: float,
                    max_count: int = 100) -> list[SparseSegment]:
    """Consecutive projected points farther apart than ``2 * d_set``.

    Raises:
        ValueError: fewer than two projected points.
    """
    S = frontier.S
    X = frontier.X
    idx = plane_front(S, plane)
    if len(idx) < 2:
        raise ValueError(f"plane {plane.name}: fewer than two projected points")
    delta_q = 2.0 * d_set
    P = S[idx][:, [plane.a, plane.b]]
    gaps = np.linalg.norm(np.diff(P, axis=0), axis=1)
    out = []
    for k in np.flatnonzero(gaps > delta_q):
        out.append(SparseSegment(
            plane=plane, index=len(out), p=P[k], q=P[k + 1], x_p=X[idx[k]], x_q=X[idx[k + 1]],
            length=float(gaps[k]), omega=refinement_count(float(gaps[k]), delta_q, max_count),
        ))
    return out


@dataclass
class RefinedPoint:
    segment: SparseSegment
    lam: float
    x: np.ndarray
    converged: bool
    violation: float


def _solve_round(problem: MooProblem, segments: list[SparseSegment], bounds, delta_q: float,
                 cfg: SolverConfig, seed: int, tag: int) -> list[RefinedPoint]:
    d_m, d_n = offsets(delta_q)
    rows = []
    for seg in segments:
        for k in range(seg.omega + 1):
            rows.append((seg, k / seg.omega))
    if not rows:
        return []
    a = np.array([r[0].plane.a for r in rows])
    b = np.array([r[0].plane.b for r in rows])
    lam = np.array([r[1] for r in rows])
    cap_a = np.array([r[0].q[0] for r in rows]) - d_m
    cap_b = np.array([r[0].p[1] for r in rows]) - d_n
    starts = np.array([r[1] * r[0].x_p + (1.0 - r[1]) * r[0].x_q for r in rows])

    def fun(X, p):
        ev = problem.evaluate_chunked(X, cfg.chunk_size)
        s = normalize_objectives(ev.objectives, bounds)
        sa = np.take_along_axis(s, a[p][:, None, None], axis=-1)[..., 0]
        sb = np.take_along_axis(s, b[p][:, None, None], axis=-1)[..., 0]
        val = lam[p][:, None] * sa + (1.0 - lam[p][:, None]) * sb
        if ev.penalty is not None:
            val = val + ev.penalty
        extra = np.stack([np.maximum(sa - cap_a[p][:, None], 0.0), np.maximum(sb - cap_b[p][:, None], 0.0)], axis=-1)
        return val, np.concatenate([ev.violation, extra], axis=-1)

    reports = solve_many(fun, starts, problem.lower, problem.upper, cfg, seed, tag=tag)
    return [RefinedPoint(seg, lm, rep.solution, rep.converged, rep.violation) for (seg, lm), rep in zip(rows, reports)]


def residual_segments(problem: MooProblem, segment: SparseSegment, refined: list[RefinedPoint], bounds,
                      delta_q: float, eps_con: float, max_count: int = 100) -> list[SparseSegment]:
    """Sub-gaps of ``segment`` still wider than ``delta_q`` after its refined points are inserted.

    The chain is the two endpoints plus every feasible refined point, reduced
    to its 2-D non-dominated set.
    """
    pl = segment.plane
    P = [segment.p, segment.q]
    X = [segment.x_p, segment.x_q]
    for r in refined:
        if r.converged and r.violation <= eps_con:
            s = normalize_objectives(problem.evaluate(r.x[None, :]).objectives[0], bounds)
            P.append(s[[pl.a, pl.b]])
            X.append(r.x)
    P = np.array(P)
    keep = np.flatnonzero(nondominated_mask(P))
    keep = keep[np.lexsort((P[keep, 1], P[keep, 0]))]
    out = []
    for i, j in zip(keep[:-1], keep[1:]):
        gap = float(np.linalg.norm(P[j] - P[i]))
        if gap > delta_q:
            out.append(SparseSegment(pl, segment.index, P[i], P[j], X[i], X[j], gap,
                                     refinement_count(gap, delta_q, max_count)))
    return out


def aws_refine(problem: MooProblem, segments: list[SparseSegment], frontier: FrontierSet,
               delta_q: float, config: SolverConfig | None = None, seed: int = 0,
               rounds: int = 1, max_count: int = 100) -> list[RefinedPoint]:
    """Solve the weighted-sum subproblems of every segment, batched per round.

    For weight ``lam`` in {0, 1/omega, ..., 1}: minimise ``lam*s_a + (1-lam)*s_b``
    under the problem constraints plus ``s_a <= q_a - delta_m`` and
    ``s_b <= p_b - delta_n``, which keep the search strictly inside the gap.
    Uniform weights space points evenly only on a straight front, so each
    further round re-solves the sub-gaps still wider than ``delta_q`` between
    the points found so far.  Points from every round are returned.
    """
    cfg = config or SolverConfig()
    bounds = frontier.bounds
    out: list[RefinedPoint] = []
    todo = list(segments)
    for rnd in range(rounds):
        if not todo:
            break
        refined = _solve_round(problem, todo, bounds, delta_q, cfg, seed, tag=301 + rnd)
        out.extend(refined)
        if rnd + 1 == rounds:
            break
        nxt = []
        for seg in todo:
            mine = [r for r in refined if r.segment is seg]
            nxt.extend(residual_segments(problem, seg, mine, bounds, delta_q, cfg.eps_con, max_count))
        todo = nxt
    return out


def lift_to_three(problem: MooProblem, x: np.ndarray, S_existing: np.ndarray, bounds,
                  eps_con: float = 1e-6, dup_tol: float = DUP_TOL) -> tuple[ParetoPoint | None, str]:
    """Evaluate a plane solution on all objectives and decide whether it joins the frontier.

    Returns the new point (or ``None``) and a reason: ``accepted``,
    ``constraint``, ``duplicate`` or ``dominated``.
    """
    ev = problem.evaluate(np.asarray(x, dtype=float)[None, :])
    if float(np.max(ev.violation[0], initial=0.0)) > eps_con:
        return None, "constraint"
    f = ev.objectives[0]
    s = normalize_objectives(f, bounds)
    if len(S_existing):
        if np.min(np.linalg.norm(S_existing - s, axis=1)) <= dup_tol:
            return None, "duplicate"
        if np.any(np.all(S_existing <= s, axis=1) & np.any(S_existing < s, axis=1)):
            return None, "dominated"
    return ParetoPoint(np.array(x, dtype=float), f, s, "AWS"), "accepted"


def aws_correct(problem: MooProblem, frontier: FrontierSet, config: AWSConfig | None = None,
                solver: SolverConfig | None = None, seed: int = 0) -> AwsResult:
    """Densify ``frontier`` on all three planes and merge the surviving lifted points.

    Lifts are merged in (plane, segment, weight) order.  An accepted lift
    that dominates existing points replaces them so the result stays
    mutually non-dominated.
    """
    cfg = config or AWSConfig()
    scfg = solver or SolverConfig()
    d_set = frontier.d_set if np.isfinite(frontier.d_set) else min_spacing(frontier.S)
    delta_q = 2.0 * d_set
    max_count = int(round(1.0 / cfg.weight_step))
    segments = []
    for plane in PLANES:
        # A plane whose projected front collapses to one point has no gaps to fill.
        if len(plane_front(frontier.S, plane)) < 2:
            log.info("AWS: plane %s has a single projected optimum, skipped", plane.name)
            continue
        segments.extend(sparse_segments(frontier, plane, d_set, max_count))
    refined = aws_refine(problem, segments, frontier, delta_q, scfg, seed, cfg.rounds, max_count)

    points = list(frontier.points)
    records = []
    for r in refined:
        ev_f = problem.evaluate(r.x[None, :]).objectives[0]
        if not r.converged or r.violation > scfg.eps_con:
            records.append(AwsRecord(r.segment.plane.name, r.segment.index, r.lam, False, "not-converged", ev_f))
            continue
        S = np.array([p.s for p in points])
        new, reason = lift_to_three(problem, r.x, S, frontier.bounds, scfg.eps_con, cfg.dup_tol)
        if new is not None:
            beaten = np.all(new.s <= S, axis=1) & np.any(new.s < S, axis=1)
            points = [p for p, gone in zip(points, beaten) if not gone]
            points.append(new)
        records.append(AwsRecord(r.segment.plane.name, r.segment.index, r.lam, new is not None, reason, ev_f))

    log.info("AWS: %d segments, %d subproblems, %d lifts accepted",
             len(segments), len(refined), sum(r.accepted for r in records))
    merged = FrontierSet(
        points=points, bounds=frontier.bounds, d_set=frontier.d_set,
        n_candidates=frontier.n_candidates, n_skipped=frontier.n_skipped, anchors=frontier.anchors,
    )
    return AwsResult(merged, segments, records, delta_q)
