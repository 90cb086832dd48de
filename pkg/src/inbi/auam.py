"""Adjust-uniform-axes (AUAM) selection of an evenly spread subset of the frontier.

A plane through the three normalised anchors carries a regular lattice of
target points.  Every frontier point is slid along a fixed positive axis
``e`` until it meets the plane; each lattice point then claims the nearest
projection that falls inside its tolerance box.  The claimed frontier points
form the selected set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import AUAMConfig

TIE_TOL = 1e-9


class SurfaceError(ValueError):
    """Anchors do not define a usable plane."""


class EmptySelectionError(RuntimeError):
    """No frontier point fell inside any tolerance box."""


@dataclass
class InsinuationSurface:
    """Plane ``A x + B y + C z = 1`` through the anchors, with the expanded bounding box."""

    coef: np.ndarray
    anchors: np.ndarray
    omega_min: float

    @property
    def box(self) -> tuple[float, float]:
        return -self.omega_min, 1.0 + self.omega_min

    def residual(self, P: np.ndarray) -> np.ndarray:
        return np.asarray(P, dtype=float) @ self.coef - 1.0


@dataclass
class AxisFamily:
    axis: np.ndarray  # unit, strictly positive
    points: np.ndarray  # lattice points on the surface
    delta: np.ndarray  # per-coordinate tolerance box half-widths
    omega_bar: float


@dataclass
class AuamResult:
    selected: list[int]
    surface: InsinuationSurface
    family: AxisFamily
    projections: np.ndarray
    travel: np.ndarray
    matched: np.ndarray  # per lattice point: candidate index or -1
    distance: np.ndarray  # per lattice point: distance or nan
    omega_planes: list[int] = field(default_factory=list)

    def trace_rows(self):
        for t, (p, m, d) in enumerate(zip(self.family.points, self.matched, self.distance)):
            yield t, p, int(m), float(d)


def fit_surface(anchors: np.ndarray, omega_min: float = 0.0) -> InsinuationSurface:
    """Solve for the plane coefficients through three normalised anchors.

    Raises:
        SurfaceError: anchors are affinely dependent, the plane passes
            through the origin, or ``C`` is zero.
    """
    A = np.asarray(anchors, dtype=float)
    if A.shape != (3, 3):
        raise SurfaceError("need three 3-D anchors")
    if np.linalg.matrix_rank(A, tol=1e-12) < 3:
        raise SurfaceError("anchors are degenerate: no plane of the form Ax+By+Cz=1")
    coef = np.linalg.solve(A, np.ones(3))
    if abs(coef[2]) < 1e-12:
        raise SurfaceError("plane coefficient C is zero")
    return InsinuationSurface(coef, A, float(omega_min))


def lattice_size(anchors: np.ndarray, n_candidates: int, factor: float = 2.0, max_points: int = 300) -> int:
    """Division count ``g`` whose in-box lattice size is closest to ``factor * n_candidates``.

    The box expansion is ``1/g``, so the count is measured on the actual
    lattice for each ``g``.  Counts above ``max_points`` are never chosen
    (``g = 2`` is the floor).
    """
    target = factor * n_candidates
    best, best_err = 2, float("inf")
    g = 2
    while True:
        count = len(uniform_points(fit_surface(anchors, 1.0 / g), g))
        if count > max_points and g > 2:
            break
        err = abs(count - target)
        if err < best_err:
            best, best_err = g, err
        if count >= target:
            break
        g += 1
    return best


def uniform_points(surface: InsinuationSurface, grid: int) -> np.ndarray:
    """Barycentric lattice with step ``1/grid`` over the anchors, kept inside the expanded box.

    Coefficients may go negative so the lattice extends past the anchor
    triangle as far as the box allows.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    lo, hi = surface.box
    rows = [(i, j, grid - i - j) for i in range(-grid, 2 * grid + 1) for j in range(-grid, 2 * grid + 1)
            if -grid <= grid - i - j <= 2 * grid]
    K = np.array(rows, dtype=float) / grid
    P = K @ surface.anchors
    keep = np.all((P >= lo) & (P <= hi), axis=1)
    return P[keep]


def tolerance_box(coef: np.ndarray, omega_min: float, omega_bar: float) -> np.ndarray:
    """Half-widths ``(dd1, dd2, dd3)`` of the matching box around each lattice point."""
    A, B, C = np.abs(coef)
    side = (1.0 + 2.0 * omega_min) / omega_bar
    return np.array([side, side, max(side * A / C, side * B / C)])


def project(S: np.ndarray, surface: InsinuationSurface, axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Slide each row along ``axis`` onto the plane; returns projections and travel ``u``."""
    u = (1.0 - S @ surface.coef) / (axis @ surface.coef)
    return S + u[:, None] * axis, u


def axis_select(S: np.ndarray, surface: InsinuationSurface, family: AxisFamily):
    """Match every lattice point to its nearest in-box projection.

    Ties in distance (within 1e-9) go to the larger travel ``u`` (the point
    deepest along the axis), then the lower index.

    Returns:
        (selected indices, projections, travel, matched per lattice point,
        distance per lattice point).

    Raises:
        EmptySelectionError: no lattice point matched anything.
    """
    S = np.asarray(S, dtype=float)
    if len(S) == 0:
        raise EmptySelectionError("no candidates")
    proj, u = project(S, surface, family.axis)
    n_pts = len(family.points)
    matched = np.full(n_pts, -1)
    dist = np.full(n_pts, np.nan)
    for t, p in enumerate(family.points):
        diff = proj - p
        inside = np.flatnonzero(np.all(np.abs(diff) <= family.delta, axis=1))
        if not len(inside):
            continue
        d = np.linalg.norm(diff[inside], axis=1)
        near = inside[d <= d.min() + TIE_TOL]
        best = near[np.lexsort((near, -u[near]))[0]]
        matched[t] = best
        dist[t] = float(np.linalg.norm(diff[best]))
    selected = sorted(set(int(m) for m in matched if m >= 0))
    if not selected:
        raise EmptySelectionError(
            f"no projection within any box: {n_pts} lattice points, box {family.delta}, "
            f"projection range {proj.min(axis=0)}..{proj.max(axis=0)}"
        )
    return selected, proj, u, matched, dist


def auam_select(S: np.ndarray, anchors_s: np.ndarray, config: AUAMConfig | None = None) -> AuamResult:
    """Full selection step on normalised candidates ``S`` given the three normalised anchors.

    The lattice has ``g`` divisions between anchors.  Each plane's weight
    interval is taken to be that same division count, so ``omega_bar = g``,
    ``omega_min = 1/g`` and every tolerance box spans one lattice step.
    """
    cfg = config or AUAMConfig()
    axis = np.asarray(cfg.axis, dtype=float)
    if np.any(axis <= 0):
        raise ValueError("axis must be strictly positive")
    axis = axis / np.linalg.norm(axis)
    grid = lattice_size(anchors_s, len(S), cfg.points_factor, cfg.max_points)
    counts = [grid, grid, grid]
    omega_min = min(1.0 / w for w in counts)
    omega_bar = sum(counts) / 3.0
    surface = fit_surface(anchors_s, omega_min)
    family = AxisFamily(axis, uniform_points(surface, grid),
                        tolerance_box(surface.coef, omega_min, omega_bar), omega_bar)
    selected, proj, u, matched, dist = axis_select(S, surface, family)
    return AuamResult(selected, surface, family, proj, u, matched, dist, counts)
