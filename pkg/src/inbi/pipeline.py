"""End-to-end runs of INBI and the two baseline algorithms.

* INBI: NBI frontier, AWS densification, AUAM selection, Mahalanobis compromise.
* ALG1: NBI frontier, AUAM selection, Mahalanobis compromise.
* ALG2: NBI frontier, Euclidean compromise over the whole frontier.

The NBI stage is identical for all three, so it can be computed once and
passed in.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .auam import AuamResult, auam_select
from .aws import AwsResult, aws_correct
from .compromise import CompromiseConfig, mahalanobis_compromise
from .config import Config
from .nbi import FrontierSet, euclidean_compromise, nbi_frontier, nearest_neighbor_distances
from .problem import MooProblem, ParetoPoint


class Algorithm(str, enum.Enum):
    INBI = "inbi"
    ALG1 = "alg1"
    ALG2 = "alg2"


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage} stage failed: {cause}")
        self.stage = stage
        self.cause = cause


def uniformity_cv(S: np.ndarray) -> float:
    """Coefficient of variation of nearest-neighbour distances (nan below 3 points)."""
    S = np.asarray(S, dtype=float)
    if len(S) < 3:
        return float("nan")
    d = nearest_neighbor_distances(S)
    mean = d.mean()
    return float(d.std() / mean) if mean > 0 else float("nan")


@dataclass
class RunResult:
    algorithm: Algorithm
    frontier: FrontierSet
    selected: list[int]  # indices into frontier.points
    compromise_index: int  # index into frontier.points
    closeness: np.ndarray  # over the selected set
    aws: AwsResult | None = None
    auam: AuamResult | None = None
    metrics: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def compromise(self) -> ParetoPoint:
        return self.frontier.points[self.compromise_index]

    @property
    def selected_points(self) -> list[ParetoPoint]:
        return [self.frontier.points[i] for i in self.selected]

    def __eq__(self, other):
        # Runtime is deliberately ignored.
        if not isinstance(other, RunResult):
            return NotImplemented
        return (
            self.algorithm == other.algorithm
            and self.selected == other.selected
            and self.compromise_index == other.compromise_index
            and np.array_equal(self.closeness, other.closeness)
            and len(self.frontier) == len(other.frontier)
            and all(a == b for a, b in zip(self.frontier.points, other.frontier.points))
        )


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (ValueError, RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise StageError(name, exc) from exc


def compute_frontier(problem: MooProblem, config: Config | None = None) -> FrontierSet:
    cfg = config or Config()
    return _stage("nbi", nbi_frontier, problem, cfg.nbi.divisions, cfg.solver, seed=cfg.seed)


def run(problem: MooProblem, algorithm: Algorithm | str, config: Config | None = None,
        weights=(1.0, 1.0, 1.0), nbi: FrontierSet | None = None,
        aws: AwsResult | None = None) -> RunResult:
    """Run one algorithm on ``problem``.

    Args:
        problem: the three-objective problem.
        algorithm: ``inbi``, ``alg1`` or ``alg2``.
        config: run configuration (seed, solver, stage settings).
        weights: decision-maker weights for the compromise.
        nbi: a precomputed NBI frontier for the same problem and config.
        aws: a precomputed AWS pass over ``nbi`` (INBI only).

    Raises:
        StageError: wrapping the failure of the named stage.
    """
    cfg = config or Config()
    alg = Algorithm(algorithm)
    t0 = time.perf_counter()
    base = nbi if nbi is not None else compute_frontier(problem, cfg)
    cc = CompromiseConfig(weights=tuple(float(w) for w in weights), reg=cfg.compromise.reg,
                          cond_max=cfg.compromise.cond_max)
    aws_res = auam_res = None
    frontier = base
    if alg is Algorithm.ALG2:
        selected = list(range(len(base)))
        idx, th = _stage("compromise", euclidean_compromise, base, cc.weights)
    else:
        if alg is Algorithm.INBI:
            aws_res = aws if aws is not None else _stage(
                "aws", aws_correct, problem, base, cfg.aws, cfg.solver, cfg.seed)
            frontier = aws_res.frontier
        auam_res = _stage("auam", auam_select, frontier.S, base.anchors, cfg.auam)
        selected = auam_res.selected
        F_sel = frontier.F[selected]
        idx, th, _ = _stage("compromise", mahalanobis_compromise, F_sel, cc)
    chosen = selected[idx]
    metrics = {
        "n_nbi": len(base),
        "n_frontier": len(frontier),
        "n_selected": len(selected),
        "cv_nbi": uniformity_cv(base.S),
        "cv_selected": uniformity_cv(frontier.S[selected]),
        "n_lift_accepted": aws_res.n_added if aws_res else 0,
        "n_lift_rejected": aws_res.n_rejected if aws_res else 0,
    }
    return RunResult(alg, frontier, selected, chosen, np.asarray(th), aws_res, auam_res, metrics,
                     runtime=time.perf_counter() - t0)


def run_all(problem: MooProblem, config: Config | None = None, weights=(1.0, 1.0, 1.0)) -> dict[Algorithm, RunResult]:
    """All three algorithms on one shared NBI frontier."""
    cfg = config or Config()
    base = compute_frontier(problem, cfg)
    return {alg: run(problem, alg, cfg, weights, nbi=base) for alg in Algorithm}
