"""Double-base-point compromise selection with a Mahalanobis metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SingularCovarianceError(np.linalg.LinAlgError):
    pass


class DegenerateSetError(ValueError):
    """All points coincide, so relative closeness is undefined."""


@dataclass(frozen=True)
class CompromiseConfig:
    weights: tuple[float, ...] = (1.0, 1.0, 1.0)
    reg: float = 1e-8
    cond_max: float = 1e8

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or not np.any(w > 0):
            raise ValueError("weights must be non-negative and not all zero")
        if self.reg < 0:
            raise ValueError("reg must be non-negative")


def evaluation_matrix(F: np.ndarray) -> np.ndarray:
    """Min-max normalise each objective column over the set itself.

    A constant column carries no information and is mapped to zeros.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    lo = F.min(axis=0)
    span = F.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (F - lo) / safe, 0.0)


def ideal_points(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Positive ideal = column minima, negative ideal = column maxima (all objectives minimised)."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if len(U) < 2:
        raise ValueError("need at least two solutions")
    return U.min(axis=0), U.max(axis=0)


def estimate_covariance(U: np.ndarray, reg: float = 1e-8, cond_max: float = 1e8) -> np.ndarray:
    """Sample covariance of the columns of U, shrunk toward a scaled identity when ill-conditioned."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    m = U.shape[1]
    if len(U) < 2:
        return np.eye(m)
    sigma = np.cov(U, rowvar=False)
    eig = np.linalg.eigvalsh(sigma + reg * np.eye(m))
    lo, hi = eig[0], eig[-1]
    if lo > 0 and hi / lo <= cond_max:
        return sigma
    tau = np.trace(sigma) / m
    if tau <= 0:
        return np.eye(m)
    alpha = (hi - cond_max * lo) / (hi - cond_max * lo + tau * (cond_max - 1.0))
    alpha = min(1.0, alpha * (1.0 + 1e-6))
    return (1.0 - alpha) * sigma + alpha * tau * np.eye(m)


def _distance(D: np.ndarray, M: np.ndarray) -> np.ndarray:
    q = np.einsum("ij,jk,ik->i", D, M, D)
    return np.sqrt(np.maximum(q, 0.0))


def closeness(U: np.ndarray, config: CompromiseConfig, sigma: np.ndarray) -> np.ndarray:
    """Relative closeness ``d+ / (d+ + d-)`` of every row of U.

    Distances are ``sqrt((u - u*)^T W Sigma^-1 W (u - u*))`` with W the
    diagonal weight matrix and Sigma regularised by ``config.reg``.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    m = U.shape[1]
    sigma = np.asarray(sigma, dtype=float) + config.reg * np.eye(m)
    try:
        inv = np.linalg.inv(sigma)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError("regularised covariance is singular") from exc
    if not np.all(np.isfinite(inv)):
        raise SingularCovarianceError("regularised covariance is singular")
    W = np.diag(np.asarray(config.weights, dtype=float))
    M = W.T @ inv @ W
    u_pos, u_neg = ideal_points(U)
    d_pos = _distance(U - u_pos, M)
    d_neg = _distance(U - u_neg, M)
    total = d_pos + d_neg
    if np.any(total == 0):
        raise DegenerateSetError("a solution is at zero distance from both ideal points")
    return d_pos / total


def pick_compromise(th) -> int:
    """Index of the smallest closeness; the lowest index wins ties."""
    th = np.asarray(th, dtype=float)
    if th.size == 0:
        raise ValueError("empty closeness vector")
    return int(np.argmin(th))


def mahalanobis_compromise(F: np.ndarray, config: CompromiseConfig, sigma: np.ndarray | None = None):
    """Choose the compromise among raw objective rows F.

    Returns ``(index, closeness, covariance)``; the covariance is estimated
    from the set's evaluation matrix unless supplied.
    """
    U = evaluation_matrix(F)
    if sigma is None:
        sigma = estimate_covariance(U, config.reg, config.cond_max)
    th = closeness(U, config, sigma)
    return pick_compromise(th), th, sigma
