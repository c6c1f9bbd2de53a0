"""Brute-force convex hull vertices and corner matching against ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .geom import PointCloud, as_cloud

# Minimum separation margin, in units of the normalised cloud, for a vertex.
VERTEX_MARGIN = 1e-9


def _separation_margin(p: np.ndarray, others: np.ndarray) -> float:
    """Largest ``t`` with ``w . (q - p) <= -t`` for all others, ``|w_i| <= 1``.

    Positive exactly when ``p`` lies outside the hull of ``others``.
    """
    if len(others) == 0:
        return np.inf
    d = p.shape[0]
    diffs = others - p
    # variables: w (d), t; maximise t
    c = np.zeros(d + 1)
    c[-1] = -1.0
    a_ub = np.hstack([diffs, np.ones((len(diffs), 1))])
    b_ub = np.zeros(len(diffs))
    bounds = [(-1.0, 1.0)] * d + [(None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"hull LP failed: {res.message}")
    return -res.fun


def hull_vertex_indices(cloud) -> np.ndarray:
    """Indices of the points that are vertices of the cloud's convex hull.

    Duplicated points are reported once, at their first occurrence. Qhull
    narrows the field for full-dimensional clouds; every survivor is then
    confirmed by a separating-hyperplane LP against the other survivors, so
    points on edges or faces are never reported.
    """
    cloud = as_cloud(cloud)
    if cloud.n == 0:
        return np.empty(0, dtype=np.intp)
    uniq, first = np.unique(cloud.points, axis=0, return_index=True)
    if len(uniq) == 1:
        return np.sort(first)
    scale = float(np.abs(uniq - uniq.mean(axis=0)).max())
    x = (uniq - uniq.mean(axis=0)) / scale
    candidates = np.arange(len(x))
    if len(x) > cloud.dim:
        try:
            candidates = np.sort(ConvexHull(x).vertices)
        except QhullError:
            pass
    xc = x[candidates]
    keep = [
        candidates[k]
        for k in range(len(xc))
        if _separation_margin(xc[k], np.delete(xc, k, axis=0)) > VERTEX_MARGIN
    ]
    return np.sort(first[np.asarray(keep, dtype=np.intp)])


def hull_vertices(cloud) -> PointCloud:
    cloud = as_cloud(cloud)
    return PointCloud(cloud.points[hull_vertex_indices(cloud)], dim=cloud.dim)


@dataclass(frozen=True)
class MatchResult:
    matched: list[tuple[int, int]]
    missed: list[int]
    spurious: list[int]
    max_error: float
    errors: list[float]

    @property
    def perfect(self) -> bool:
        return not self.missed and not self.spurious

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.errors)) if self.errors else 0.0


def match_corners(found, truth, tol: float) -> MatchResult:
    """Greedy one-to-one nearest matching of found corners to true vertices.

    ``found`` may be a CornerSet, a PointCloud or an array of centroids.
    Pairs are taken in order of increasing distance while both ends are free
    and the distance is within ``tol``. ``matched`` holds ``(found, truth)``
    index pairs.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if hasattr(found, "centroids"):
        f = found.centroids
    else:
        f = as_cloud(found).points if not isinstance(found, np.ndarray) else found
    t = as_cloud(truth).points
    f = np.asarray(f, dtype=float).reshape(-1, t.shape[1])
    if len(f) and len(t):
        d = np.linalg.norm(f[:, None, :] - t[None, :, :], axis=2)
        order = np.argsort(d, axis=None, kind="stable")
    else:
        d = np.empty((len(f), len(t)))
        order = np.empty(0, dtype=np.intp)
    used_f, used_t = set(), set()
    matched, errors = [], []
    for flat in order:
        i, j = divmod(int(flat), len(t))
        if d[i, j] > tol:
            break
        if i in used_f or j in used_t:
            continue
        used_f.add(i)
        used_t.add(j)
        matched.append((i, j))
        errors.append(float(d[i, j]))
    return MatchResult(
        matched=matched,
        missed=[j for j in range(len(t)) if j not in used_t],
        spurious=[i for i in range(len(f)) if i not in used_f],
        max_error=max(errors, default=0.0),
        errors=errors,
    )
