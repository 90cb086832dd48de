"""Derivative-free scalar solver.

Compass pattern search with a shrinking mesh, a Hooke-Jeeves style pattern
move, a few seeded random poll directions (so the search does not stall on
the kinks of max/abs terms) and a quadratic exterior penalty whose weight is
raised until the constraints hold.

Many independent subproblems are solved in lock-step: every row of the start
matrix is its own search with its own mesh, penalty weight and random stream,
but each poll of all active rows is evaluated with one vectorised call.  A
row's trajectory depends only on its own start and seed, so results do not
change with batch composition.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .config import SolverConfig

log = logging.getLogger(__name__)

# fun(X) with X of shape (R, P, d) returns (value (R, P), violation (R, P, c)).
# It also receives the row indices so per-row parameters can be gathered.
BatchFunction = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass
class ScalarSolveReport:
    solution: np.ndarray
    value: float
    converged: bool
    iterations: int
    evaluations: int = 0
    violation: float = 0.0


@dataclass
class BatchResult:
    x: np.ndarray
    value: np.ndarray
    violation: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    evaluations: np.ndarray


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _splitmix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def _row_keys(seeds: list) -> np.ndarray:
    return np.array(
        [np.random.SeedSequence(s).generate_state(1, np.uint64)[0] for s in seeds], dtype=np.uint64
    )


def _random_directions(keys: np.ndarray, iteration: np.ndarray, k: int, d: int) -> np.ndarray:
    """Unit directions that depend only on (row key, iteration): shape (len(keys), k, d).

    Counter-based so every row draws from its own stream without a Python
    loop over rows.
    """
    with np.errstate(over="ignore"):
        base = _splitmix64(keys ^ (iteration.astype(np.uint64) * _GOLDEN))
        ctr = np.arange(2 * k * d, dtype=np.uint64)
        bits = _splitmix64(base[:, None] + ctr * _GOLDEN)
    u = ((bits >> np.uint64(11)).astype(np.float64) + 0.5) / float(1 << 53)
    u1, u2 = u[:, : k * d], u[:, k * d :]
    g = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    g = g.reshape(len(keys), k, d)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def _poll_directions(d: int) -> np.ndarray:
    eye = np.eye(d)
    return np.concatenate([eye, -eye])


def pattern_search_batch(
    fun: BatchFunction,
    starts: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    seeds: list,
    config: SolverConfig | None = None,
) -> BatchResult:
    """Minimise ``value + mu * sum(violation**2)`` independently for every row.

    Args:
        fun: batched objective/violation function (see ``BatchFunction``).
        starts: (R, d) start points, clipped into the box.
        lower, upper: (d,) box bounds.
        seeds: one entropy source per row for the random poll directions.
        config: solver tolerances.

    Returns:
        Per-row best point, raw objective value, max violation, convergence
        flag, iteration and evaluation counts.
    """
    cfg = config or SolverConfig()
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    span = upper - lower
    X = np.clip(np.array(starts, dtype=float, ndmin=2), lower, upper)
    R, d = X.shape
    rows = np.arange(R)
    keys = _row_keys(seeds)

    val, viol = fun(X[:, None, :], rows)
    val, viol = val[:, 0], viol[:, 0]
    mu = np.full(R, cfg.penalty_init)
    vmax = viol.max(axis=-1, initial=0.0)
    pen = val + mu * np.sum(viol**2, axis=-1)

    mesh = np.full(R, cfg.mesh_init)
    evals = np.ones(R, dtype=int)
    iters = np.zeros(R, dtype=int)
    step = np.zeros((R, d))
    converged = np.zeros(R, dtype=bool)
    active = np.ones(R, dtype=bool)
    base = _poll_directions(d)

    while active.any():
        idx = np.flatnonzero(active)
        dirs = np.broadcast_to(base, (len(idx),) + base.shape)
        if cfg.n_random_dirs:
            g = _random_directions(keys[idx], iters[idx], cfg.n_random_dirs, d)
            dirs = np.concatenate([dirs, g, -g], axis=1)
        trial = X[idx, None, :] + mesh[idx, None, None] * span * dirs
        trial = np.concatenate([trial, (X[idx] + step[idx])[:, None, :]], axis=1)
        trial = np.clip(trial, lower, upper)

        tval, tviol = fun(trial, idx)
        tpen = tval + mu[idx, None] * np.sum(tviol**2, axis=-1)
        same = np.all(trial == X[idx, None, :], axis=-1)
        tpen = np.where(same, np.inf, tpen)
        j = np.argmin(tpen, axis=1)
        best = tpen[np.arange(len(idx)), j]
        evals[idx] += trial.shape[1]
        iters[idx] += 1

        win = best < pen[idx]
        wi, wj = idx[win], j[win]
        new_x = trial[win, wj]
        step[wi] = new_x - X[wi]
        X[wi] = new_x
        pen[wi] = best[win]
        val[wi] = tval[win, wj]
        viol[wi] = tviol[win, wj]
        vmax[wi] = viol[wi].max(axis=-1, initial=0.0)
        mesh[wi] = np.minimum(mesh[wi] * 2.0, cfg.mesh_init)
        li = idx[~win]
        step[li] = 0.0
        mesh[li] *= 0.5

        done_mesh = mesh[idx] <= cfg.mesh_tol
        out = evals[idx] >= cfg.max_evals
        infeasible = vmax[idx] > cfg.eps_con
        # Raise the penalty weight on rows that settled while infeasible.
        bump = done_mesh & infeasible & (mu[idx] < cfg.penalty_max) & ~out
        bi = idx[bump]
        mu[bi] = mu[bi] * cfg.penalty_growth
        mesh[bi] = cfg.mesh_init * 0.1
        pen[bi] = val[bi] + mu[bi] * np.sum(viol[bi] ** 2, axis=-1)
        finished = (done_mesh & ~bump) | out
        converged[idx[finished]] = done_mesh[finished] & ~infeasible[finished]
        active[idx[finished]] = False

    return BatchResult(X, val, vmax, converged, iters, evals)


def reduce_starts(result: BatchResult, n_problems: int, n_starts: int, eps_con: float) -> list[ScalarSolveReport]:
    """Pick one answer per problem from its block of multistart rows.

    Rows are laid out problem-major.  Feasible rows beat infeasible ones and
    converged rows beat stalled ones; then the smallest objective wins, then the lexicographically smallest point.
    """
    reports = []
    for p in range(n_problems):
        block = range(p * n_starts, (p + 1) * n_starts)

        def key(r):
            return (
                result.violation[r] > eps_con,
                not result.converged[r],
                result.value[r],
                tuple(result.x[r]),
            )

        r = min(block, key=key)
        reports.append(
            ScalarSolveReport(
                solution=result.x[r].copy(),
                value=float(result.value[r]),
                converged=bool(result.converged[r]),
                iterations=int(result.iterations[r]),
                evaluations=int(sum(result.evaluations[b] for b in block)),
                violation=float(result.violation[r]),
            )
        )
    return reports


def multistart_points(start: np.ndarray, lower: np.ndarray, upper: np.ndarray, n_starts: int, seed) -> np.ndarray:
    """The given start followed by ``n_starts - 1`` seeded uniform draws in the box."""
    rng = np.random.default_rng(seed)
    extra = rng.uniform(lower, upper, size=(n_starts - 1, len(lower)))
    return np.vstack([np.clip(start, lower, upper)[None, :], extra])


def solve_many(
    fun: BatchFunction,
    starts: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    config: SolverConfig | None = None,
    seed: int = 0,
    tag: int = 0,
) -> list[ScalarSolveReport]:
    """Solve ``len(starts)`` subproblems, each with seeded multistarts.

    ``fun`` is called with problem indices (not row indices) so it can look
    up per-subproblem parameters.  ``tag`` separates random streams of
    different stages that share a seed.
    """
    cfg = config or SolverConfig()
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    n = len(starts)
    k = cfg.n_starts
    rows = np.vstack(
        [multistart_points(starts[p], lower, upper, k, [seed, tag, p, 0]) for p in range(n)]
    )
    seeds = [[seed, tag, p, s, 1] for p in range(n) for s in range(k)]

    def row_fun(X, row_idx):
        return fun(X, row_idx // k)

    result = pattern_search_batch(row_fun, rows, lower, upper, seeds, cfg)
    reports = reduce_starts(result, n, k, cfg.eps_con)
    for p, rep in enumerate(reports):
        if not rep.converged:
            log.debug("subproblem %d (tag %d) did not converge: viol=%.3g", p, tag, rep.violation)
    return reports


def solve_scalar(
    objective: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    constraints: Callable[[np.ndarray], np.ndarray] | None = None,
    config: SolverConfig | None = None,
    seed: int = 0,
) -> ScalarSolveReport:
    """Minimise a scalar function over a box with penalised constraints.

    ``objective`` maps an (..., d) array to (...) values; ``constraints``
    maps it to (..., c) non-negative violation amounts (zero when satisfied).
    Both must broadcast over leading axes.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    start = np.asarray(start, dtype=float)
    if np.any(start < lower) or np.any(start > upper):
        raise ValueError("start point lies outside the box")

    def fun(X, _):
        v = np.asarray(objective(X), dtype=float)
        if constraints is None:
            c = np.zeros(v.shape + (0,))
        else:
            c = np.asarray(constraints(X), dtype=float)
        return v, c

    return solve_many(fun, start[None, :], lower, upper, config, seed)[0]
