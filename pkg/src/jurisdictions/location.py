"""Efficient project placement: minimize a coalition's aggregate transport cost.

The objective ``D(S, p) = sum_i ||p - p_i|| ** alpha`` is convex for
``alpha >= 1``, so a minimizer always lies in the convex hull of the
coalition's peaks. Solvers by case:

* ``alpha == 1`` in one dimension: lower endpoint of the median interval.
* ``alpha == 2``: the centroid.
* ``alpha == 1`` in two or more dimensions: Weiszfeld iteration with the
  Vardi-Zhang modification at peaks.
* anything else: projected gradient descent with Armijo backtracking.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import Coalition, DimensionMismatch, Instance, NonConvergence

STEP_TOL = 1e-9
MAX_ITER = 10_000
ANCHOR_TOL = 1e-12


@dataclass(frozen=True)
class LocationResult:
    location: tuple[float, ...]
    transport_total: float
    iterations: int
    converged: bool


def transport_costs(points: np.ndarray, location: np.ndarray, alpha: float) -> np.ndarray:
    """Per-agent transport cost d(||p - p_i||)."""
    diff = points - location
    if alpha == 2:
        return np.einsum("ij,ij->i", diff, diff)
    r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return r if alpha == 1 else r**alpha


def aggregate_cost(coalition: Coalition, location, instance: Instance) -> float:
    loc = np.asarray(location, dtype=float).reshape(-1)
    if loc.shape[0] != instance.dimension:
        raise DimensionMismatch(f"location has {loc.shape[0]} coordinates, expected {instance.dimension}")
    pts = instance.coalition_points(coalition)
    return float(transport_costs(pts, loc, instance.alpha).sum())


def optimal_location(coalition: Coalition, instance: Instance) -> LocationResult:
    pts = instance.coalition_points(coalition)
    alpha = instance.alpha
    if len(pts) == 1:
        loc, it, ok = pts[0].copy(), 0, True
    elif alpha == 1 and instance.dimension == 1:
        loc, it, ok = _median_1d(pts), 0, True
    elif alpha == 2:
        loc, it, ok = pts.mean(axis=0), 0, True
    elif alpha == 1:
        loc, it, ok = weiszfeld(pts)
    else:
        loc, it, ok = gradient_descent(pts, alpha)
    if not ok:
        warnings.warn(
            NonConvergence(f"location solver hit {MAX_ITER} iterations for coalition {coalition}"),
            stacklevel=2,
        )
    total = float(transport_costs(pts, loc, alpha).sum())
    return LocationResult(tuple(float(x) for x in loc), total, it, ok)


def min_transport_cost(coalition: Coalition, instance: Instance) -> float:
    return optimal_location(coalition, instance).transport_total


def _median_1d(pts: np.ndarray) -> np.ndarray:
    xs = np.sort(pts[:, 0])
    return np.array([xs[(len(xs) - 1) // 2]])


def weiszfeld(pts: np.ndarray, tol: float = STEP_TOL, max_iter: int | None = None):
    """Geometric median of ``pts``; returns ``(location, iterations, converged)``.

    Starts from the centroid. When an iterate sits on a peak of multiplicity
    ``eta`` the peak is optimal iff the pull of the other peaks has norm at
    most ``eta``; otherwise the step leaves the peak along that pull.

    Away from peaks each Weiszfeld step is also tried stretched by a factor
    that doubles while stretching keeps paying off; this matters in the flat
    valleys of nearly collinear peaks. Convergence is judged on the plain
    Weiszfeld step.
    """
    max_iter = MAX_ITER if max_iter is None else max_iter
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    f = lambda q: float(np.linalg.norm(pts - q, axis=1).sum())  # noqa: E731
    y = pts.mean(axis=0)
    stretch = 2.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        diff = pts - y
        r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        at = r < ANCHOR_TOL
        far = ~at
        if not far.any():
            converged = True
            break
        inv = 1.0 / r[far]
        t = (pts[far] * inv[:, None]).sum(axis=0) / inv.sum()
        eta = int(at.sum())
        if eta == 0:
            y_new = t
        else:
            pull = np.linalg.norm((diff[far] * inv[:, None]).sum(axis=0))
            if pull <= eta:
                converged = True
                break
            w = eta / pull
            y_new = (1 - w) * t + w * y
        step = np.linalg.norm(y_new - y)
        if step < tol:
            y = y_new
            converged = True
            break
        if eta == 0:
            cand = np.clip(y + stretch * (y_new - y), lo, hi)
            if f(cand) < f(y_new):
                y_new = cand
                stretch = min(2 * stretch, 2.0**20)
            else:
                stretch = 2.0
        y = y_new
    return _snap_to_peak(pts, y), it, converged


def _snap_to_peak(pts: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Weiszfeld crawls sublinearly toward an optimum that sits on a peak;
    # if the best peak passes the optimality test it is the exact answer.
    cost = lambda q: np.linalg.norm(pts - q, axis=1).sum()  # noqa: E731
    fy = cost(y)
    for j in np.argsort(np.linalg.norm(pts - y, axis=1))[:3]:
        q = pts[j]
        diff = pts - q
        r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        far = r >= ANCHOR_TOL
        eta = len(pts) - int(far.sum())
        pull = np.linalg.norm((diff[far] / r[far, None]).sum(axis=0))
        if pull <= eta and cost(q) <= fy:
            return q.copy()
    return y


def gradient_descent(pts: np.ndarray, alpha: float, tol: float = STEP_TOL, max_iter: int | None = None):
    """Minimize ``sum ||p - p_i|| ** alpha`` for general ``alpha >= 1``.

    The trial step length comes from the curvature bound of the weights
    ``r ** (alpha - 2)`` and is halved until the Armijo condition holds;
    iterates are clipped to the peaks' bounding box, which can only lower
    every distance.
    """
    max_iter = MAX_ITER if max_iter is None else max_iter
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    f = lambda q: float((np.linalg.norm(pts - q, axis=1) ** alpha).sum())  # noqa: E731
    y = pts.mean(axis=0)
    fy = f(y)
    it = 0
    for it in range(1, max_iter + 1):
        diff = y - pts
        r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        far = r >= ANCHOR_TOL
        if not far.any():
            return y, it, True
        w = r[far] ** (alpha - 2)
        grad = alpha * (w[:, None] * diff[far]).sum(axis=0)
        gnorm2 = float(grad @ grad)
        if gnorm2 == 0.0:
            return y, it, True
        # 1/L step: the Hessian of r**alpha is bounded by alpha*max(1, alpha-1)*r**(alpha-2)
        t = 1.0 / (alpha * max(1.0, alpha - 1) * w.sum())
        while True:
            cand = np.clip(y - t * grad, lo, hi)
            fc = f(cand)
            if fc <= fy - 1e-4 * float(grad @ (y - cand)) or t < 1e-18:
                break
            t *= 0.5
        step = np.linalg.norm(cand - y)
        if fc <= fy:
            y, fy = cand, fc
        if step < tol:
            return y, it, True
    return y, it, False
