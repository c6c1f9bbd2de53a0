"""Synthetic convex shapes with known vertices, and point sampling on them."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, Delaunay

from .errors import ConfigError
from .geom import PointCloud
from .oracle import hull_vertices

GOLDEN = (1 + math.sqrt(5)) / 2


class ShapeKind(enum.Enum):
    REGULAR_POLYGON = "polygon"
    TETRA = "tetrahedron"
    OCTA = "octahedron"
    CUBE = "cube"
    ICOSA = "icosahedron"
    DODECA = "dodecahedron"
    SIMPLEX_4D = "5-cell"
    CROSS_4D = "16-cell"
    TESSERACT_4D = "tesseract"
    RANDOM_CONVEX_POLYGON = "random-polygon"
    FROM_FILE = "file"


PLATONIC = {ShapeKind.TETRA, ShapeKind.OCTA, ShapeKind.CUBE, ShapeKind.ICOSA, ShapeKind.DODECA}
POLYTOPES_4D = {ShapeKind.SIMPLEX_4D, ShapeKind.CROSS_4D, ShapeKind.TESSERACT_4D}


class Sampling(enum.Enum):
    VERTICES = "vertices"
    BOUNDARY = "boundary"
    SOLID = "solid"


@dataclass(frozen=True)
class ShapeSpec:
    """What to generate and how to sample it.

    ``points`` is the total cloud size for BOUNDARY/SOLID sampling, exact
    vertices included. ``edge`` applies to Platonic solids and 4D polytopes,
    ``n``/``radius`` to polygons, ``path`` to FROM_FILE.
    """

    kind: ShapeKind
    n: int | None = None
    radius: float = 1.0
    edge: float = 1.0
    seed: int = 0
    path: str | None = None
    sampling: Sampling = Sampling.VERTICES
    points: int = 0
    sampling_seed: int = 0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.kind in (ShapeKind.REGULAR_POLYGON, ShapeKind.RANDOM_CONVEX_POLYGON):
            if self.n is None or self.n < 3:
                raise ConfigError("polygons need n >= 3")
            if not self.radius > 0:
                raise ConfigError("radius must be positive")
        if not self.edge > 0:
            raise ConfigError("edge must be positive")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if self.kind is ShapeKind.FROM_FILE and not self.path:
            raise ConfigError("FROM_FILE needs a path")


def regular_polygon(n: int, radius: float = 1.0) -> np.ndarray:
    """Vertices counter-clockwise, the first at ``(radius, 0)``."""
    t = 2 * math.pi * np.arange(n) / n
    return radius * np.column_stack([np.cos(t), np.sin(t)])


def _signed_perms(base, even_only=False):
    out = set()
    perms = [(0, 1, 2), (1, 2, 0), (2, 0, 1)] if even_only else list(itertools.permutations(range(len(base))))
    for perm in perms:
        v = [base[i] for i in perm]
        for signs in itertools.product((1, -1), repeat=len(v)):
            out.add(tuple(s * x for s, x in zip(signs, v)))
    return sorted(out)


def _raw_vertices(kind: ShapeKind) -> np.ndarray:
    g = GOLDEN
    if kind is ShapeKind.TETRA:
        return np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float)
    if kind is ShapeKind.OCTA:
        return np.array(_signed_perms((1, 0, 0)), dtype=float)
    if kind is ShapeKind.CUBE:
        return np.array(list(itertools.product((-1, 1), repeat=3)), dtype=float)
    if kind is ShapeKind.ICOSA:
        return np.array(_signed_perms((0, 1, g), even_only=True), dtype=float)
    if kind is ShapeKind.DODECA:
        cube = list(itertools.product((-1, 1), repeat=3))
        return np.array(cube + _signed_perms((0, 1 / g, g), even_only=True), dtype=float)
    if kind is ShapeKind.SIMPLEX_4D:
        # Standard basis of R^5 expressed in an orthonormal basis of the plane sum(x) = 1.
        e = np.eye(5) - 0.2
        basis = np.linalg.svd(e)[2][:4]
        return e @ basis.T
    if kind is ShapeKind.CROSS_4D:
        return np.vstack([np.eye(4), -np.eye(4)])
    if kind is ShapeKind.TESSERACT_4D:
        return np.array(list(itertools.product((-1, 1), repeat=4)), dtype=float)
    raise ConfigError(f"{kind} has no fixed vertex set")


def polytope_vertices(kind: ShapeKind, edge: float = 1.0) -> np.ndarray:
    """Regular polytope centred at the origin with the given edge length."""
    v = _raw_vertices(kind)
    v = v - v.mean(axis=0)
    d = np.linalg.norm(v[:, None] - v[None], axis=2)
    shortest = d[d > 1e-12].min()
    return v * (edge / shortest)


def random_convex_polygon(n: int, seed: int = 0, radius: float = 1.0,
                          jitter: float = 0.15, min_gap_fraction: float = 0.25) -> np.ndarray:
    """Strictly convex polygon with exactly ``n`` vertices, counter-clockwise.

    Angles are random with every gap at least ``min_gap_fraction * 2pi/n``;
    radii are jittered by up to ``jitter`` and redrawn until the polygon is
    strictly convex.
    """
    rng = np.random.default_rng(seed)
    min_gap = min_gap_fraction * 2 * math.pi / n
    for _ in range(10_000):
        gaps = min_gap + (2 * math.pi - n * min_gap) * rng.dirichlet(np.ones(n))
        angles = rng.uniform(0, 2 * math.pi) + np.concatenate([[0.0], np.cumsum(gaps)[:-1]])
        radii = radius * (1 + rng.uniform(-jitter, jitter, n))
        v = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
        if _strictly_convex(v):
            return v
    raise RuntimeError("could not draw a convex polygon")


def _strictly_convex(v: np.ndarray, margin: float = 1e-6) -> bool:
    a = np.roll(v, 1, axis=0) - v
    b = np.roll(v, -1, axis=0) - v
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    # Counter-clockwise turn at every vertex: (prev - v) x (next - v) < 0.
    return bool(np.all(cross < -margin * np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)))


def polygon_interior_angles(v: np.ndarray) -> np.ndarray:
    a = np.roll(v, 1, axis=0) - v
    b = np.roll(v, -1, axis=0) - v
    cosang = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
    return np.arccos(np.clip(cosang, -1.0, 1.0))


def _simplex_volumes(simplices: np.ndarray) -> np.ndarray:
    """k-volumes of simplices given as ``(m, k+1, d)`` corner arrays."""
    e = simplices[:, 1:, :] - simplices[:, :1, :]
    gram = e @ np.transpose(e, (0, 2, 1))
    k = e.shape[1]
    return np.sqrt(np.clip(np.linalg.det(gram), 0, None)) / math.factorial(k)


def _sample_simplices(simplices: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    if count == 0:
        return np.empty((0, simplices.shape[2]))
    vol = _simplex_volumes(simplices)
    pick = rng.choice(len(simplices), size=count, p=vol / vol.sum())
    bary = rng.dirichlet(np.ones(simplices.shape[1]), size=count)
    return np.einsum("mk,mkd->md", bary, simplices[pick])


def boundary_simplices(vertices: np.ndarray) -> np.ndarray:
    hull = ConvexHull(vertices)
    return vertices[hull.simplices]


def solid_simplices(vertices: np.ndarray) -> np.ndarray:
    return vertices[Delaunay(vertices).simplices]


def sample(vertices: np.ndarray, sampling: Sampling, points: int, seed: int = 0) -> np.ndarray:
    """Vertices followed by uniform samples of the boundary or the solid."""
    if sampling is Sampling.VERTICES:
        return vertices.copy()
    extra = points - len(vertices)
    if extra < 0:
        raise ConfigError(f"need at least {len(vertices)} points to include every vertex")
    rng = np.random.default_rng(seed)
    if sampling is Sampling.BOUNDARY:
        simplices = boundary_simplices(vertices)
    else:
        simplices = solid_simplices(vertices)
    return np.vstack([vertices, _sample_simplices(simplices, extra, rng)])


def shape_vertices(spec: ShapeSpec) -> np.ndarray:
    kind = spec.kind
    if kind is ShapeKind.REGULAR_POLYGON:
        return regular_polygon(spec.n, spec.radius)
    if kind is ShapeKind.RANDOM_CONVEX_POLYGON:
        return random_convex_polygon(spec.n, spec.seed, spec.radius)
    if kind is ShapeKind.FROM_FILE:
        from .io import read_cloud

        return hull_vertices(read_cloud(spec.path)).points
    return polytope_vertices(kind, spec.edge)


def generate(spec: ShapeSpec) -> tuple[PointCloud, PointCloud]:
    """Return ``(cloud, true_vertices)`` for a shape spec.

    For FROM_FILE with VERTICES sampling the file's points are returned as
    they are; the truth is their hull.
    """
    vertices = shape_vertices(spec)
    if spec.kind is ShapeKind.FROM_FILE and spec.sampling is Sampling.VERTICES:
        from .io import read_cloud

        pts = read_cloud(spec.path).points.copy()
    else:
        pts = sample(vertices, spec.sampling, spec.points, spec.sampling_seed)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng([spec.sampling_seed, 1])
        pts = pts + rng.normal(0.0, spec.noise_sigma, pts.shape)
    return PointCloud(pts), PointCloud(vertices)


def rasterize_polygon(vertices: np.ndarray, width: int, height: int) -> np.ndarray:
    """Binary ``(height, width)`` uint8 mask of a convex polygon.

    ``vertices`` are in image coordinates ``(column, row)``; a pixel is set
    when its centre lies inside or on the polygon.
    """
    v = np.asarray(vertices, dtype=float)
    cols = np.arange(width, dtype=float)[None, :]
    rows = np.arange(height, dtype=float)[:, None]
    n = len(v)
    area = 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
    sign = 1.0 if area > 0 else -1.0
    inside = np.ones((height, width), dtype=bool)
    for i in range(n):
        (x0, y0), (x1, y1) = v[i], v[(i + 1) % n]
        cross = (x1 - x0) * (rows - y0) - (y1 - y0) * (cols - x0)
        inside &= sign * cross >= 0
    return np.where(inside, 255, 0).astype(np.uint8)


def polygon_from_angles(interior_center: tuple[float, float], radius: float, arcs_deg) -> np.ndarray:
    """Polygon inscribed in a circle, consecutive central angles ``arcs_deg``."""
    arcs = np.radians(np.asarray(arcs_deg, dtype=float))
    if not math.isclose(arcs.sum(), 2 * math.pi, rel_tol=1e-9):
        raise ConfigError("central angles must sum to 360 degrees")
    t = np.concatenate([[0.0], np.cumsum(arcs)[:-1]])
    cx, cy = interior_center
    return np.column_stack([cx + radius * np.cos(t), cy + radius * np.sin(t)])


def spec_from_name(name: str, **kwargs) -> ShapeSpec:
    """Build a ``ShapeSpec`` from a CLI-style shape name such as ``hexagon`` or ``cube``."""
    named_polygons = {"triangle": 3, "square": 4, "pentagon": 5, "hexagon": 6,
                      "heptagon": 7, "octagon": 8}
    key = name.strip().lower()
    if key in named_polygons:
        kwargs.setdefault("n", named_polygons[key])
        return ShapeSpec(ShapeKind.REGULAR_POLYGON, **kwargs)
    try:
        kind = ShapeKind(key)
    except ValueError:
        raise ConfigError(f"unknown shape {name!r}") from None
    return ShapeSpec(kind, **kwargs)

