"""Points, rotations built from planar factors, and axis extremes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, EmptyCloudError

# Default tie tolerance, as a fraction of the bounding-box diagonal.
TIE_TOL_FRACTION = 1e-7


class PointCloud:
    """An immutable ``(n, dim)`` array of finite points.

    Construction accepts anything ``np.asarray`` understands. An empty cloud
    is representable (``n == 0``) so that e.g. an all-black image can be
    loaded; operations that need points raise :class:`EmptyCloudError`.
    """

    __slots__ = ("points", "dim")

    def __init__(self, points, dim: int | None = None):
        arr = np.array(points, dtype=float, copy=True)
        if arr.ndim == 1 and arr.size == 0:
            if dim is None:
                raise DimensionError("empty cloud needs an explicit dim")
            arr = arr.reshape(0, dim)
        if arr.ndim != 2:
            raise DimensionError(f"points must be a 2-d array, got shape {arr.shape}")
        if dim is not None and arr.shape[1] != dim:
            raise DimensionError(f"expected dim {dim}, points have {arr.shape[1]} columns")
        if arr.shape[1] < 1:
            raise DimensionError("dim must be at least 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("point coordinates must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)
        object.__setattr__(self, "dim", arr.shape[1])

    def __setattr__(self, name, value):
        raise AttributeError("PointCloud is immutable")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.points, other.points)

    def __repr__(self) -> str:
        return f"PointCloud(n={self.n}, dim={self.dim})"

    def allclose(self, other: PointCloud, atol: float = 1e-9) -> bool:
        return (
            self.dim == other.dim
            and self.n == other.n
            and bool(np.allclose(self.points, other.points, rtol=0.0, atol=atol))
        )

    def bbox_diagonal(self) -> float:
        _require_points(self)
        # Column-wise reductions are much faster than axis=0 on a tall array.
        span = [col.max() - col.min() for col in self.points.T]
        return float(np.linalg.norm(span))


def as_cloud(data) -> PointCloud:
    return data if isinstance(data, PointCloud) else PointCloud(data)


def _require_points(cloud: PointCloud) -> None:
    if cloud.n == 0:
        raise EmptyCloudError("cloud has no points")


def default_tie_tol(cloud: PointCloud) -> float:
    return TIE_TOL_FRACTION * cloud.bbox_diagonal()


def centroid(cloud) -> np.ndarray:
    cloud = as_cloud(cloud)
    _require_points(cloud)
    return np.array([col.mean() for col in cloud.points.T])


@dataclass(frozen=True)
class PlanarRotation:
    """Rotation by ``angle`` in the plane spanned by two coordinate axes.

    Positive angles turn ``axis_a`` towards ``axis_b``. The angle is wrapped
    into ``(-pi, pi]``.
    """

    axis_a: int
    axis_b: int
    angle: float

    def __post_init__(self):
        if self.axis_a == self.axis_b:
            raise DimensionError("planar rotation needs two distinct axes")
        if min(self.axis_a, self.axis_b) < 0:
            raise DimensionError("axis indices must be non-negative")
        object.__setattr__(self, "angle", _wrap_angle(float(self.angle)))

    def inverse(self) -> PlanarRotation:
        return PlanarRotation(self.axis_a, self.axis_b, -self.angle)

    def matrix(self, dim: int) -> np.ndarray:
        if max(self.axis_a, self.axis_b) >= dim:
            raise DimensionError(f"plane ({self.axis_a},{self.axis_b}) outside dim {dim}")
        m = np.eye(dim)
        c, s = math.cos(self.angle), math.sin(self.angle)
        a, b = self.axis_a, self.axis_b
        m[a, a] = c
        m[a, b] = -s
        m[b, a] = s
        m[b, b] = c
        return m


def _wrap_angle(angle: float) -> float:
    if not math.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    if -math.pi < angle <= math.pi:
        return angle
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


@dataclass(frozen=True)
class Rotation:
    """Ordered composition of planar rotations; ``factors[0]`` acts first."""

    dim: int
    factors: tuple[PlanarRotation, ...] = ()

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError("dim must be positive")
        factors = tuple(self.factors)
        for f in factors:
            if max(f.axis_a, f.axis_b) >= self.dim:
                raise DimensionError(f"plane ({f.axis_a},{f.axis_b}) outside dim {self.dim}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def planar(cls, dim: int, axis_a: int, axis_b: int, angle: float) -> Rotation:
        return cls(dim, (PlanarRotation(axis_a, axis_b, angle),))

    @classmethod
    def identity(cls, dim: int) -> Rotation:
        return cls(dim, ())

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.eye(self.dim)
        for f in self.factors:
            m = f.matrix(self.dim) @ m
        m.setflags(write=False)
        return m

    def then(self, other: Rotation) -> Rotation:
        """Rotation that applies ``self`` and afterwards ``other``."""
        if other.dim != self.dim:
            raise DimensionError("cannot compose rotations of different dimension")
        return Rotation(self.dim, self.factors + other.factors)


def invert(r: Rotation) -> Rotation:
    return Rotation(r.dim, tuple(f.inverse() for f in reversed(r.factors)))


def apply_rotation(cloud, r: Rotation, center: Sequence[float] | None = None) -> PointCloud:
    """Rotate every point about ``center`` (the centroid when omitted)."""
    cloud = as_cloud(cloud)
    if r.dim != cloud.dim:
        raise DimensionError(f"rotation dim {r.dim} != cloud dim {cloud.dim}")
    if center is None:
        center = centroid(cloud) if cloud.n else np.zeros(cloud.dim)
    c = np.asarray(center, dtype=float)
    if c.shape != (cloud.dim,):
        raise DimensionError(f"center must have {cloud.dim} coordinates")
    if not np.all(np.isfinite(c)):
        raise ValueError("center must be finite")
    if not r.factors:
        return cloud
    return PointCloud((cloud.points - c) @ r.matrix.T + c)


class Extreme(enum.Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class ExtremeHit:
    point_index: int
    axis: int
    kind: Extreme
    rotated_value: float


@dataclass(frozen=True)
class AmbiguousTie:
    """More than one point sits within the tie tolerance of an extreme."""

    axis: int
    kind: Extreme
    count: int


def axis_extremes(cloud, axis: int, tie_tol: float) -> tuple[ExtremeHit | AmbiguousTie, ExtremeHit | AmbiguousTie]:
    """Return the ``(min, max)`` ends of ``axis``, each a hit or a tie."""
    cloud = as_cloud(cloud)
    _require_points(cloud)
    if not 0 <= axis < cloud.dim:
        raise DimensionError(f"axis {axis} outside dim {cloud.dim}")
    if tie_tol < 0:
        raise ValueError("tie_tol must be non-negative")
    col = cloud.points[:, axis]

    def end(kind: Extreme):
        i = int(np.argmin(col) if kind is Extreme.MIN else np.argmax(col))
        v = col[i]
        count = int(np.count_nonzero(np.abs(col - v) <= tie_tol))
        if count > 1:
            return AmbiguousTie(axis, kind, count)
        return ExtremeHit(i, axis, kind, float(v))

    return end(Extreme.MIN), end(Extreme.MAX)


def rotation_matrices(rotations: Iterable[Rotation]) -> np.ndarray:
    mats = [r.matrix for r in rotations]
    if not mats:
        return np.empty((0, 0, 0))
    return np.stack(mats)
