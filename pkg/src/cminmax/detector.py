"""Rotate, harvest axis extremes, cluster them into corners."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import islice
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import BudgetExceededError, ConfigError, DimensionError, NoCornersError
from .geom import (
    TIE_TOL_FRACTION,
    AmbiguousTie,
    Extreme,
    ExtremeHit,
    PointCloud,
    Rotation,
    apply_rotation,
    as_cloud,
    axis_extremes,
    centroid,
)
from .schedule import Harvest, Mode, ScheduleConfig, adaptive_steps

# Default cluster radius, as a fraction of the bounding-box diagonal.
CLUSTER_RADIUS_FRACTION = 0.02
# Upper bound on the floats held by one projection batch.
_BATCH_ELEMENTS = 1 << 21
_RANDOM_PULL = 64


@dataclass(frozen=True)
class CandidateCorner:
    position: np.ndarray
    rotation_index: int
    axis: int
    kind: Extreme


@dataclass(frozen=True)
class Corner:
    centroid: np.ndarray
    support: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class Diagnostics:
    rotations_executed: int
    candidates_harvested: int
    ties_rejected: int
    # Random mode: rotations needed until the last reported corner first appeared.
    rotations_to_complete: int | None = None
    rounds: int = 1
    # Adaptive mode counts every round here; otherwise equals rotations_executed.
    rotations_total: int | None = None


@dataclass(frozen=True, eq=False)
class CornerSet:
    """Clustered corners plus the candidates they were built from.

    Candidates are stored column-wise and sorted (position, then provenance);
    ``Corner.members`` index into that order.
    """

    corners: tuple[Corner, ...]
    diagnostics: Diagnostics
    positions: np.ndarray = field(repr=False)
    rotation_index: np.ndarray = field(repr=False)
    axis: np.ndarray = field(repr=False)
    is_max: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.corners)

    def __iter__(self):
        return iter(self.corners)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def centroids(self) -> np.ndarray:
        if not self.corners:
            return np.empty((0, self.dim))
        return np.array([c.centroid for c in self.corners])

    @property
    def supports(self) -> list[int]:
        return [c.support for c in self.corners]

    @cached_property
    def candidates(self) -> tuple[CandidateCorner, ...]:
        return tuple(
            CandidateCorner(p, int(r), int(a), Extreme.MAX if m else Extreme.MIN)
            for p, r, a, m in zip(self.positions, self.rotation_index, self.axis, self.is_max)
        )

    def same_as(self, other: CornerSet) -> bool:
        """Bit-identical corners (centroids, supports and members)."""
        return len(self) == len(other) and all(
            a.support == b.support and a.members == b.members and np.array_equal(a.centroid, b.centroid)
            for a, b in zip(self.corners, other.corners)
        )


@dataclass(frozen=True)
class DetectorConfig:
    schedule: ScheduleConfig
    tie_tol: float | None = None
    cluster_radius: float | None = None
    min_support: int = 1
    random_stop_patience: int | None = None
    harvest: Harvest = Harvest.ALL
    workers: int = 1
    max_rotations: int = 10**6
    max_rounds: int = 12
    center: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.tie_tol is not None and self.tie_tol < 0:
            raise ConfigError("tie_tol must be >= 0")
        if self.cluster_radius is not None and not self.cluster_radius > 0:
            raise ConfigError("cluster_radius must be > 0")
        if self.min_support < 1:
            raise ConfigError("min_support must be >= 1")
        if self.random_stop_patience is not None and self.random_stop_patience < 1:
            raise ConfigError("random_stop_patience must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.max_rotations < 1 or self.max_rounds < 1:
            raise ConfigError("budgets must be >= 1")


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if self.rank[ri] < self.rank[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        if self.rank[ri] == self.rank[rj]:
            self.rank[ri] += 1


def _group(positions: np.ndarray, radius: float) -> list[list[int]]:
    """Single-linkage groups of row indices; rows within ``radius`` are linked."""
    if len(positions) == 0:
        return []
    uniq, inverse = np.unique(positions, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    uf = UnionFind(len(uniq))
    for i, j in sorted(cKDTree(uniq).query_pairs(radius)):
        uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for row, u in enumerate(inverse):
        groups.setdefault(uf.find(int(u)), []).append(row)
    return list(groups.values())


@dataclass
class _Harvested:
    """Unambiguous extremes of a run, column-wise and in rotation order."""

    dim: int
    point_index: list = field(default_factory=list)
    rotation_index: list = field(default_factory=list)
    axis: list = field(default_factory=list)
    is_max: list = field(default_factory=list)
    ties: int = 0
    rotations: int = 0

    def extend(self, other: _Harvested) -> None:
        self.point_index.extend(other.point_index)
        self.rotation_index.extend(other.rotation_index)
        self.axis.extend(other.axis)
        self.is_max.extend(other.is_max)
        self.ties += other.ties
        self.rotations += other.rotations

    def __len__(self) -> int:
        return len(self.point_index)


def _build_corner_set(points: np.ndarray, h: _Harvested, radius: float, min_support: int,
                      **diag) -> CornerSet:
    pidx = np.asarray(h.point_index, dtype=np.intp)
    pos = points[pidx] if len(pidx) else np.empty((0, h.dim))
    rot = np.asarray(h.rotation_index, dtype=np.int64)
    axis = np.asarray(h.axis, dtype=np.int64)
    is_max = np.asarray(h.is_max, dtype=bool)
    corners, order = _cluster_arrays(pos, rot, axis, is_max, radius, min_support)
    diagnostics = Diagnostics(
        rotations_executed=h.rotations,
        candidates_harvested=len(pidx),
        ties_rejected=h.ties,
        **diag,
    )
    if diagnostics.rotations_total is None:
        diagnostics = Diagnostics(**{**diagnostics.__dict__, "rotations_total": h.rotations})
    return CornerSet(corners, diagnostics, pos[order], rot[order], axis[order], is_max[order])


def _cluster_arrays(pos, rot, axis, is_max, radius, min_support=1):
    if len(pos) == 0:
        return (), np.arange(0)
    # Sorting first makes the result independent of harvest order.
    keys = [is_max, axis, rot] + [pos[:, k] for k in reversed(range(pos.shape[1]))]
    order = np.lexsort(keys)
    spos = pos[order]
    corners = []
    for members in _group(spos, radius):
        members = sorted(members)
        if len(members) < min_support:
            continue
        corners.append(Corner(spos[members].mean(axis=0), len(members), tuple(members)))
    corners.sort(key=lambda c: tuple(c.centroid))
    return tuple(corners), order


def cluster(candidates: Sequence[CandidateCorner], radius: float) -> CornerSet:
    """Single-linkage clustering of candidates; centroids are member means."""
    if not radius > 0:
        raise ConfigError("radius must be > 0")
    cands = list(candidates)
    dim = len(cands[0].position) if cands else 0
    pos = np.array([c.position for c in cands], dtype=float).reshape(len(cands), dim)
    rot = np.array([c.rotation_index for c in cands], dtype=np.int64)
    axis = np.array([c.axis for c in cands], dtype=np.int64)
    is_max = np.array([c.kind is Extreme.MAX for c in cands], dtype=bool)
    corners, order = _cluster_arrays(pos, rot, axis, is_max, radius)
    diag = Diagnostics(len(set(rot.tolist())), len(cands), 0, rotations_total=len(set(rot.tolist())))
    return CornerSet(corners, diag, pos[order], rot[order], axis[order], is_max[order])


class _Projector:
    """Projects a centred cloud onto harvested directions of many rotations."""

    def __init__(self, cloud: PointCloud, center: np.ndarray, tie_tol: float, harvest: Harvest):
        self.points = cloud.points
        # Stored as (dim, n) so each projected direction is one contiguous row.
        self.centered_t = np.ascontiguousarray((cloud.points - center).T)
        self.tie_tol = tie_tol
        self.ends = harvest.ends(cloud.dim)
        self.axes = np.array([a for a, _ in self.ends])
        self.signs = np.array([1.0 if m else -1.0 for _, m in self.ends])
        per_rotation = max(1, len(self.points) * len(self.ends))
        self.batch = max(1, _BATCH_ELEMENTS // per_rotation)

    def run(self, matrices: np.ndarray, first_index: int) -> _Harvested:
        """Harvest a block of rotation matrices numbered from ``first_index``."""
        out = _Harvested(self.centered_t.shape[0])
        n_ends = len(self.ends)
        # Row ``axis`` of R gives that rotated coordinate; min ends are negated maxima.
        dirs = matrices[:, self.axes, :] * self.signs[None, :, None]
        proj = dirs.reshape(-1, dirs.shape[-1]) @ self.centered_t
        best = np.argmax(proj, axis=1)
        top = proj[np.arange(proj.shape[0]), best]
        near = np.count_nonzero(proj >= (top - self.tie_tol)[:, None], axis=1)
        unique = near == 1
        out.ties = int(np.count_nonzero(~unique))
        out.rotations = len(matrices)
        for col in np.flatnonzero(unique):
            r, e = divmod(int(col), n_ends)
            out.point_index.append(int(best[col]))
            out.rotation_index.append(first_index + r)
            out.axis.append(self.ends[e][0])
            out.is_max.append(self.ends[e][1])
        return out

    def run_all(self, rotations: Sequence[Rotation], workers: int = 1) -> _Harvested:
        mats = np.stack([r.matrix for r in rotations])
        starts = range(0, len(mats), self.batch)
        jobs = [(mats[s:s + self.batch], s) for s in starts]
        total = _Harvested(self.centered_t.shape[0])
        if workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda job: self.run(*job), jobs))
        else:
            parts = [self.run(*job) for job in jobs]
        for part in parts:
            total.extend(part)
        return total


def harvest_rotation(cloud, rotation: Rotation, tie_tol: float, harvest: Harvest = Harvest.ALL,
                     center=None) -> list[ExtremeHit | AmbiguousTie]:
    """Reference (unvectorised) harvest of one rotation, in ``harvest.ends`` order."""
    cloud = as_cloud(cloud)
    rotated = apply_rotation(cloud, rotation, center)
    out = []
    for axis, want_max in harvest.ends(cloud.dim):
        lo, hi = axis_extremes(rotated, axis, tie_tol)
        out.append(hi if want_max else lo)
    return out


@dataclass(frozen=True)
class _Resolved:
    cloud: PointCloud
    center: np.ndarray
    tie_tol: float
    radius: float


def _resolve(cloud, cfg: DetectorConfig) -> _Resolved:
    cloud = as_cloud(cloud)
    if cloud.dim != cfg.schedule.dim:
        raise DimensionError(f"cloud dim {cloud.dim} != schedule dim {cfg.schedule.dim}")
    center = np.asarray(cfg.center, dtype=float) if cfg.center is not None else centroid(cloud)
    if center.shape != (cloud.dim,):
        raise DimensionError("center has the wrong dimension")
    diag = cloud.bbox_diagonal()
    tie_tol = cfg.tie_tol if cfg.tie_tol is not None else TIE_TOL_FRACTION * diag
    radius = cfg.cluster_radius
    if radius is None:
        radius = CLUSTER_RADIUS_FRACTION * diag if diag > 0 else 1.0
    return _Resolved(cloud, center, tie_tol, radius)


def _detect_fixed(res: _Resolved, cfg: DetectorConfig, config: ScheduleConfig) -> CornerSet:
    rotations = list(config.build(cfg.harvest))
    proj = _Projector(res.cloud, res.center, res.tie_tol, cfg.harvest)
    h = proj.run_all(rotations, cfg.workers)
    if len(h) == 0:
        raise NoCornersError(
            f"no unambiguous extremes in {h.rotations} rotations ({h.ties} ties rejected)"
        )
    return _build_corner_set(res.cloud.points, h, res.radius, cfg.min_support)


def detect(cloud, cfg: DetectorConfig) -> CornerSet:
    """Run the detector in the mode selected by ``cfg.schedule.mode``."""
    if cfg.schedule.mode is Mode.RANDOM:
        return detect_random(cloud, cfg)
    if cfg.schedule.mode is Mode.ADAPTIVE:
        return detect_adaptive(cloud, cfg)
    return _detect_fixed(_resolve(cloud, cfg), cfg, cfg.schedule)


class _RunningClusters:
    """Cheap incremental clustering used only to decide when to stop."""

    def __init__(self, dim: int, radius: float):
        self.radius = radius
        self.sums = np.empty((0, dim))
        self.counts = np.empty(0)

    def __len__(self) -> int:
        return len(self.counts)

    def add(self, p: np.ndarray) -> bool:
        """Absorb one candidate; True if it opened a cluster or moved a centroid."""
        if len(self.counts):
            cents = self.sums / self.counts[:, None]
            d = np.linalg.norm(cents - p, axis=1)
            k = int(np.argmin(d))
            if d[k] <= self.radius:
                old = cents[k]
                self.sums[k] += p
                self.counts[k] += 1
                shift = np.linalg.norm(self.sums[k] / self.counts[k] - old)
                return bool(shift > self.radius / 10)
        self.sums = np.vstack([self.sums, p])
        self.counts = np.append(self.counts, 1.0)
        return True


def detect_random(cloud, cfg: DetectorConfig) -> CornerSet:
    """Consume random rotations until the running corner set stops changing.

    Stops after ``patience`` consecutive rotations that open no cluster and
    move no centroid by more than a tenth of the cluster radius.
    """
    res = _resolve(cloud, cfg)
    points = res.cloud.points
    proj = _Projector(res.cloud, res.center, res.tie_tol, cfg.harvest)
    running = _RunningClusters(res.cloud.dim, res.radius)
    kept = _Harvested(res.cloud.dim)
    stream = iter(cfg.schedule.build(cfg.harvest))
    quiet = 0
    executed = 0
    while True:
        block = list(islice(stream, min(_RANDOM_PULL, cfg.max_rotations - executed)))
        if not block:
            raise BudgetExceededError(f"no stable corner set after {executed} random rotations")
        part = proj.run(np.stack([r.matrix for r in block]), executed)
        per_rotation: dict[int, list[int]] = {}
        for j, r in enumerate(part.rotation_index):
            per_rotation.setdefault(r, []).append(j)
        stopped = False
        for r in range(executed, executed + len(block)):
            changed = False
            for j in per_rotation.get(r, ()):
                changed |= running.add(points[part.point_index[j]])
                kept.point_index.append(part.point_index[j])
                kept.rotation_index.append(r)
                kept.axis.append(part.axis[j])
                kept.is_max.append(part.is_max[j])
            kept.rotations = r + 1
            quiet = 0 if changed else quiet + 1
            patience = cfg.random_stop_patience or max(10, 2 * len(running))
            if len(running) and quiet >= patience:
                stopped = True
                break
        # Ties past the stopping rotation are not counted.
        kept.ties += _ties_until(part, proj, block, executed, kept.rotations)
        executed = kept.rotations
        if stopped:
            break
    if len(kept) == 0:
        raise NoCornersError("random rotations produced no unambiguous extremes")
    cs = _build_corner_set(points, kept, res.radius, cfg.min_support)
    first_seen = [int(min(cs.rotation_index[list(c.members)])) for c in cs.corners]
    complete = max(first_seen) + 1 if first_seen else None
    return CornerSet(
        cs.corners,
        Diagnostics(**{**cs.diagnostics.__dict__, "rotations_to_complete": complete}),
        cs.positions, cs.rotation_index, cs.axis, cs.is_max,
    )


def _ties_until(part: _Harvested, proj: _Projector, block, first: int, stop: int) -> int:
    used = stop - first
    if used >= len(block):
        return part.ties
    return used * len(proj.ends) - sum(1 for r in part.rotation_index if r < stop)


def _matched(a: CornerSet, b: CornerSet, radius: float) -> bool:
    if len(a) != len(b):
        return False
    ca, cb = a.centroids, b.centroids
    if len(ca) == 0:
        return True
    d = np.linalg.norm(ca[:, None, :] - cb[None, :, :], axis=2)
    taken = set()
    for i in np.argsort(d.min(axis=1)):
        for j in np.argsort(d[i]):
            if d[i, j] > radius:
                return False
            if j not in taken:
                taken.add(int(j))
                break
        else:
            return False
    return True


def detect_adaptive(cloud, cfg: DetectorConfig) -> CornerSet:
    """Refine the deterministic step until two rounds agree.

    Rounds follow :func:`adaptive_steps`; the first round whose corners match
    the previous round's (same count, centroids paired within the cluster
    radius) is returned.
    """
    res = _resolve(cloud, cfg)
    sc = cfg.schedule
    previous: CornerSet | None = None
    total = 0
    rounds = adaptive_steps(sc.phi_max, sc.shrink, dim=sc.dim, safety_factor=sc.safety_factor)
    for k, round_cfg in enumerate(islice(rounds, cfg.max_rounds), start=1):
        try:
            current = _detect_fixed(res, cfg, round_cfg)
        except NoCornersError:
            previous = None
            continue
        total += current.diagnostics.rotations_executed
        if previous is not None and _matched(previous, current, res.radius):
            return CornerSet(
                current.corners,
                Diagnostics(**{**current.diagnostics.__dict__, "rounds": k, "rotations_total": total}),
                current.positions, current.rotation_index, current.axis, current.is_max,
            )
        previous = current
    raise BudgetExceededError(f"corner set did not stabilise within {cfg.max_rounds} rounds")

