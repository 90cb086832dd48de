"""Multi-objective problem abstraction, normalisation and anchor solutions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .config import SolverConfig
from .solver import solve_many


class DegenerateBoundsError(ValueError):
    """An objective has zero range over the anchors."""


class AnchorError(RuntimeError):
    """An individual-minimum solve failed to converge."""


class Evaluation(NamedTuple):
    objectives: np.ndarray  # (..., m)
    violation: np.ndarray  # (..., c), non-negative
    penalty: np.ndarray | None  # (...,) extra term for scalarised subproblems


class MooProblem:
    """Box-bounded multi-objective minimisation problem.

    Subclasses implement ``objectives`` and optionally ``inequality`` (checked
    against ``g_lower``/``g_upper``), ``equality`` and ``penalty``.  Every
    method takes arrays of shape (..., d) so whole polls are evaluated at once.
    ``evaluate`` may be overridden when objectives and constraints share work.
    """

    n_obj: int = 3

    def __init__(self, lower, upper, start=None, g_lower=None, g_upper=None, name="problem"):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape or np.any(self.lower > self.upper):
            raise ValueError("invalid box bounds")
        self.start = 0.5 * (self.lower + self.upper) if start is None else np.asarray(start, dtype=float)
        self.g_lower = None if g_lower is None else np.asarray(g_lower, dtype=float)
        self.g_upper = None if g_upper is None else np.asarray(g_upper, dtype=float)
        self.name = name

    @property
    def dimension(self) -> int:
        return self.lower.size

    def objectives(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inequality(self, X: np.ndarray) -> np.ndarray | None:
        return None

    def equality(self, X: np.ndarray) -> np.ndarray | None:
        return None

    def penalty(self, X: np.ndarray) -> np.ndarray | None:
        return None

    def violation(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        parts = [np.zeros(X.shape[:-1] + (0,))]
        G = self.inequality(X)
        if G is not None:
            lo = -np.inf if self.g_lower is None else self.g_lower
            hi = np.inf if self.g_upper is None else self.g_upper
            parts.append(np.maximum(lo - G, 0.0))
            parts.append(np.maximum(G - hi, 0.0))
        H = self.equality(X)
        if H is not None:
            parts.append(np.abs(H))
        return np.concatenate(parts, axis=-1)

    def evaluate(self, X: np.ndarray) -> Evaluation:
        return Evaluation(self.objectives(X), self.violation(X), self.penalty(X))

    def evaluate_chunked(self, X: np.ndarray, chunk: int) -> Evaluation:
        """``evaluate`` on (..., d) input, splitting into row chunks to bound memory."""
        X = np.asarray(X, dtype=float)
        lead = X.shape[:-1]
        flat = X.reshape(-1, X.shape[-1])
        if len(flat) <= chunk:
            ev = self.evaluate(flat)
        else:
            parts = [self.evaluate(flat[i : i + chunk]) for i in range(0, len(flat), chunk)]
            pen = None if parts[0].penalty is None else np.concatenate([p.penalty for p in parts])
            ev = Evaluation(
                np.concatenate([p.objectives for p in parts]),
                np.concatenate([p.violation for p in parts]),
                pen,
            )
        pen = None if ev.penalty is None else ev.penalty.reshape(lead)
        return Evaluation(
            ev.objectives.reshape(lead + (-1,)), ev.violation.reshape(lead + (-1,)), pen
        )

    def max_violation(self, x: np.ndarray) -> float:
        return float(np.max(self.violation(np.asarray(x, dtype=float)), initial=0.0))


class FunctionProblem(MooProblem):
    """A ``MooProblem`` assembled from plain callables."""

    def __init__(self, objectives, lower, upper, n_obj=3, inequality=None, g_lower=None,
                 g_upper=None, equality=None, penalty=None, start=None, name="problem"):
        super().__init__(lower, upper, start, g_lower, g_upper, name)
        self._objectives = objectives
        self._inequality = inequality
        self._equality = equality
        self._penalty = penalty
        self.n_obj = n_obj

    def objectives(self, X):
        return self._objectives(X)

    def inequality(self, X):
        return None if self._inequality is None else self._inequality(X)

    def equality(self, X):
        return None if self._equality is None else self._equality(X)

    def penalty(self, X):
        return None if self._penalty is None else self._penalty(X)


@dataclass(frozen=True)
class NormalizationBounds:
    f_min: np.ndarray
    f_max: np.ndarray

    def __post_init__(self):
        f_min = np.asarray(self.f_min, dtype=float)
        f_max = np.asarray(self.f_max, dtype=float)
        if f_min.shape != f_max.shape:
            raise ValueError("bound shapes differ")
        if np.any(~(f_max > f_min)):
            raise DegenerateBoundsError(f"degenerate objective range: min={f_min}, max={f_max}")
        object.__setattr__(self, "f_min", f_min)
        object.__setattr__(self, "f_max", f_max)

    @property
    def span(self) -> np.ndarray:
        return self.f_max - self.f_min


def normalize_objectives(values, bounds: NormalizationBounds) -> np.ndarray:
    """Affine map of raw objectives to [0, 1] per objective; not clamped."""
    return (np.asarray(values, dtype=float) - bounds.f_min) / bounds.span


def denormalize(s, bounds: NormalizationBounds) -> np.ndarray:
    return bounds.f_min + np.asarray(s, dtype=float) * bounds.span


@dataclass
class ParetoPoint:
    x: np.ndarray
    f: np.ndarray
    s: np.ndarray
    source: str = "NBI"

    def __eq__(self, other):
        if not isinstance(other, ParetoPoint):
            return NotImplemented
        return (
            self.source == other.source
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.f, other.f)
            and np.array_equal(self.s, other.s)
        )


@dataclass
class AnchorResult:
    points: list[ParetoPoint]
    bounds: NormalizationBounds
    reports: list = field(default_factory=list)


def _scales(problem: MooProblem) -> np.ndarray:
    f0 = problem.evaluate(problem.start[None, :]).objectives[0]
    return np.abs(f0) + 1.0


def anchor_solutions(problem: MooProblem, config: SolverConfig | None = None, seed: int = 0) -> AnchorResult:
    """Individual minima of every objective and the normalisation they define.

    Each objective is minimised alone; a second solve then minimises the sum
    of the other (scaled) objectives while holding the first at its minimum,
    so every anchor is Pareto optimal rather than only weakly so.  The lower
    bound of objective j is its value at anchor j, the upper bound the largest
    value of objective j over all anchors.
    """
    cfg = config or SolverConfig()
    m = problem.n_obj
    scale = _scales(problem)

    def stage1(X, p):
        ev = problem.evaluate_chunked(X, cfg.chunk_size)
        j = np.asarray(p)[:, None]
        val = np.take_along_axis(ev.objectives, j[..., None], axis=-1)[..., 0] / scale[j]
        if ev.penalty is not None:
            val = val + ev.penalty
        return val, ev.violation

    starts = np.repeat(problem.start[None, :], m, axis=0)
    first = solve_many(stage1, starts, problem.lower, problem.upper, cfg, seed, tag=101)
    for j, rep in enumerate(first):
        if not rep.converged:
            raise AnchorError(f"individual minimum of objective {j} did not converge")
    best = np.array(
        [problem.evaluate(rep.solution[None, :]).objectives[0, j] for j, rep in enumerate(first)]
    )

    others = 1.0 - np.eye(m)

    def stage2(X, p):
        ev = problem.evaluate_chunked(X, cfg.chunk_size)
        p = np.asarray(p)
        F = ev.objectives / scale
        val = np.sum(F * others[p][:, None, :], axis=-1)
        if ev.penalty is not None:
            val = val + ev.penalty
        fj = np.take_along_axis(ev.objectives, p[:, None, None], axis=-1)[..., 0]
        # Scaled up so the solver's feasibility tolerance pins objective j tightly.
        excess = 1e3 * np.maximum((fj - best[p][:, None]) / scale[p][:, None], 0.0)
        return val, np.concatenate([ev.violation, excess[..., None]], axis=-1)

    x1 = np.array([rep.solution for rep in first])
    second = solve_many(stage2, x1, problem.lower, problem.upper, cfg, seed, tag=102)
    points = []
    reports = []
    for j in range(m):
        rep = second[j] if second[j].converged else first[j]
        x = rep.solution
        f = problem.evaluate(x[None, :]).objectives[0]
        # Keep the stage-1 point when polishing lost ground on objective j.
        if f[j] > best[j] + cfg.eps_con * scale[j]:
            x = first[j].solution
            f = problem.evaluate(x[None, :]).objectives[0]
        points.append(ParetoPoint(x=x.copy(), f=f, s=np.zeros(m)))
        reports.append(rep)

    F = np.array([p.f for p in points])
    bounds = NormalizationBounds(F.min(axis=0), F.max(axis=0))
    for p in points:
        p.s = normalize_objectives(p.f, bounds)
    return AnchorResult(points, bounds, reports)


def dominates(a: np.ndarray, b: np.ndarray, tol: float = 0.0) -> bool:
    return bool(np.all(a <= b + tol) and np.any(a < b - tol))


def nondominated_mask(F: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """True for rows of ``F`` not dominated by any other row (minimisation)."""
    F = np.asarray(F, dtype=float)
    n = len(F)
    keep = np.ones(n, dtype=bool)
    for start in range(0, n, 512):
        blk = F[start : start + 512]
        le = np.all(F[None, :, :] <= blk[:, None, :] + tol, axis=-1)
        lt = np.any(F[None, :, :] < blk[:, None, :] - tol, axis=-1)
        keep[start : start + 512] = ~np.any(le & lt, axis=1)
    return keep
