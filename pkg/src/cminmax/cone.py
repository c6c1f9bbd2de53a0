"""Minimum bounding cone of a polytope vertex.

The cone apexed at a vertex that contains every incident edge is found as the
smallest spherical cap holding the unit edge directions. For directions that
fit in an open hemisphere this is the cap cut out by the minimum enclosing
ball of the direction tips, so the axis is that ball's centre, normalised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import NotConvexVertexError

# Directions closer than this (radians) are treated as one edge.
DUPLICATE_ANGLE = 1e-9
# A half-angle this close to pi/2 means the fan spans a half-space.
FLAT_MARGIN = 1e-9


@dataclass(frozen=True)
class VertexFan:
    """A vertex and the unit directions of its incident edges."""

    apex: np.ndarray
    edge_dirs: np.ndarray

    def __post_init__(self):
        apex = np.asarray(self.apex, dtype=float).reshape(-1)
        dirs = np.atleast_2d(np.asarray(self.edge_dirs, dtype=float))
        if dirs.shape[0] < 1:
            raise ValueError("a fan needs at least one edge direction")
        if dirs.shape[1] != apex.shape[0]:
            raise ValueError("edge directions and apex differ in dimension")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero-length edge direction")
        dirs = dirs / norms[:, None]
        object.__setattr__(self, "apex", apex)
        object.__setattr__(self, "edge_dirs", dirs)

    @classmethod
    def from_neighbors(cls, apex, neighbors) -> VertexFan:
        apex = np.asarray(apex, dtype=float)
        return cls(apex, np.asarray(neighbors, dtype=float) - apex)


@dataclass(frozen=True)
class BoundingCone:
    axis: np.ndarray
    half_angle: float

    @property
    def angle(self) -> float:
        """Full opening angle, twice the half-angle."""
        return 2.0 * self.half_angle

    @property
    def half_angle_deg(self) -> float:
        return math.degrees(self.half_angle)

    @property
    def angle_deg(self) -> float:
        return math.degrees(self.angle)


def _circumball(pts: np.ndarray) -> tuple[np.ndarray, float]:
    """Smallest ball with every row of ``pts`` on its boundary."""
    p0 = pts[0]
    if len(pts) == 1:
        return p0.copy(), 0.0
    u = pts[1:] - p0
    rhs = 0.5 * np.einsum("ij,ij->i", u, u)
    gram = u @ u.T
    lam, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    center = p0 + lam @ u
    return center, float(np.max(np.linalg.norm(pts - center, axis=1)))


def min_enclosing_ball(points, rng: np.random.Generator | None = None) -> tuple[np.ndarray, float]:
    """Welzl's randomised minimum enclosing ball; returns ``(center, radius)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("need a non-empty (m, d) array")
    rng = np.random.default_rng(0) if rng is None else rng
    pts = pts[rng.permutation(len(pts))]
    dim = pts.shape[1]
    scale = max(1.0, float(np.abs(pts).max()))
    eps = 1e-12 * scale

    def contains(ball, p):
        if ball is None:
            return False
        c, r = ball
        return float(np.linalg.norm(p - c)) <= r + eps

    def welzl(n: int, boundary: list[int]):
        if len(boundary) == dim + 1:
            return _circumball(pts[boundary])
        ball = _circumball(pts[boundary]) if boundary else None
        for i in range(n):
            if not contains(ball, pts[i]):
                ball = welzl(i, boundary + [i])
        return ball

    center, radius = welzl(len(pts), [])
    return center, radius


def angles_to(dirs: np.ndarray, axis: np.ndarray) -> np.ndarray:
    """Angles between unit rows of ``dirs`` and a unit ``axis``, stable near 0."""
    cos = dirs @ axis
    sin = np.linalg.norm(dirs - cos[:, None] * axis, axis=1)
    return np.arctan2(sin, cos)


def _dedupe_directions(dirs: np.ndarray) -> np.ndarray:
    keep: list[np.ndarray] = []
    for d in dirs:
        if all(angles_to(d[None], k)[0] > DUPLICATE_ANGLE for k in keep):
            keep.append(d)
    return np.array(keep)


def min_bounding_cone(fan: VertexFan) -> BoundingCone:
    """Smallest cone apexed at the vertex containing every incident edge."""
    dirs = _dedupe_directions(fan.edge_dirs)
    if len(dirs) == 1:
        return BoundingCone(dirs[0].copy(), 0.0)
    center, _ = min_enclosing_ball(dirs)
    norm = float(np.linalg.norm(center))
    if norm < 1e-12:
        raise NotConvexVertexError("edge directions surround the apex")
    axis = center / norm
    omega = float(np.max(angles_to(dirs, axis)))
    if omega >= math.pi / 2 - FLAT_MARGIN:
        raise NotConvexVertexError(
            f"edge directions span a half-space (half-angle {math.degrees(omega):.6f} deg)"
        )
    return BoundingCone(axis, omega)


def polytope_phi_max(fans: Iterable[VertexFan]) -> float:
    """Largest full cone angle over all vertices of a polytope, in radians."""
    return 2.0 * max(min_bounding_cone(f).half_angle for f in fans)


def edges_by_min_distance(vertices, rel_tol: float = 1e-6) -> list[tuple[int, int]]:
    """Vertex pairs at the minimal pairwise distance.

    This recovers the edge graph of a regular polytope; it is not meant for
    irregular shapes.
    """
    v = np.asarray(vertices, dtype=float)
    pairs = list(combinations(range(len(v)), 2))
    dist = np.array([np.linalg.norm(v[i] - v[j]) for i, j in pairs])
    shortest = dist.min()
    return [p for p, d in zip(pairs, dist) if d <= shortest * (1 + rel_tol)]


def fans_from_edges(vertices, edges: Iterable[tuple[int, int]]) -> list[VertexFan]:
    v = np.asarray(vertices, dtype=float)
    nbrs: dict[int, list[int]] = {i: [] for i in range(len(v))}
    for i, j in edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    return [VertexFan.from_neighbors(v[i], v[nbrs[i]]) for i in range(len(v)) if nbrs[i]]


def polygon_fans(vertices: Sequence) -> list[VertexFan]:
    """Fans of a polygon whose vertices are listed in boundary order."""
    n = len(vertices)
    return fans_from_edges(vertices, [(i, (i + 1) % n) for i in range(n)])


def regular_polytope_fans(vertices) -> list[VertexFan]:
    return fans_from_edges(vertices, edges_by_min_distance(vertices))
