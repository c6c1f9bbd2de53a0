"""Timing harness for the detector against the hull-oracle baseline.

Every timing is the median of ``repeats`` runs measured with
``time.perf_counter_ns``, after one discarded warm-up run. The baseline is
:func:`cminmax.oracle.hull_vertex_indices` on the same cloud; it stands in
for the image corner detectors that are out of scope here.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import astuple, dataclass, fields
from typing import Callable, Iterable, Sequence

import numpy as np

from .cone import polygon_fans, polytope_phi_max
from .detector import CornerSet, DetectorConfig, detect
from .geom import PointCloud
from .oracle import hull_vertex_indices
from .schedule import Harvest, Mode, ScheduleConfig
from .shapes import Sampling, generate, regular_polygon

BENCH_COLUMNS = (
    "shape", "dim", "n", "corners", "mode", "rotations",
    "wall_time_ns", "candidates", "ties_rejected", "baseline_time_ns",
)


@dataclass(frozen=True)
class BenchRow:
    shape: str
    dim: int
    n: int
    corners: int
    mode: str
    rotations: int
    wall_time_ns: int
    candidates: int
    ties_rejected: int
    baseline_time_ns: int | None

    def __post_init__(self):
        if self.wall_time_ns <= 0:
            raise ValueError("wall_time_ns must be positive")
        if self.rotations < 1:
            raise ValueError("rotations must be >= 1")


assert tuple(f.name for f in fields(BenchRow)) == BENCH_COLUMNS


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in rows:
        w.writerow(["" if v is None else v for v in astuple(r)])
    return buf.getvalue()


def write_rows(rows: Iterable[BenchRow], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def time_ns(fn: Callable[[], object], repeats: int = 5, warmup: bool = True) -> tuple[int, list[int], object]:
    """Median wall time of ``fn`` in ns, all samples, and the last result."""
    if warmup:
        fn()
    samples = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        result = fn()
        samples.append(max(1, time.perf_counter_ns() - t0))
    return int(statistics.median(samples)), samples, result


def polygon_cloud(n_corners: int, n_points: int) -> PointCloud:
    """Regular polygon vertices plus evenly spaced points strictly inside each edge.

    Even spacing keeps every edge point at least one spacing away from the
    vertices, so a minimal schedule never sees an accidental near-tie.
    """
    v = regular_polygon(n_corners)
    if n_points < n_corners:
        raise ValueError("n_points must cover the vertices")
    per_edge = np.full(n_corners, (n_points - n_corners) // n_corners)
    per_edge[: (n_points - n_corners) % n_corners] += 1
    parts = [v]
    for i, m in enumerate(per_edge):
        t = (np.arange(1, m + 1) / (m + 1))[:, None]
        parts.append(v[i] + t * (v[(i + 1) % n_corners] - v[i]))
    return PointCloud(np.vstack(parts))


def regular_polygon_phi_max(n_corners: int) -> float:
    return polytope_phi_max(polygon_fans(regular_polygon(n_corners)))


def polygon_config(n_corners: int, *, step: float | None = None, count: int | None = None,
                   workers: int = 1, harvest: Harvest = Harvest.ALL) -> DetectorConfig:
    phi = None if step is not None else regular_polygon_phi_max(n_corners)
    return DetectorConfig(
        ScheduleConfig(2, Mode.DETERMINISTIC, phi, step=step, count=count),
        harvest=harvest, workers=workers,
    )


def _row(shape: str, cloud: PointCloud, mode: str, wall: int, cs: CornerSet, baseline: int | None) -> BenchRow:
    d = cs.diagnostics
    return BenchRow(shape, cloud.dim, cloud.n, len(cs), mode, d.rotations_total or d.rotations_executed,
                    wall, d.candidates_harvested, d.ties_rejected, baseline)


# Fixed schedule length for the size and thread sweeps. With only a handful
# of rotations the per-call clustering cost hides the per-point work at 1e4.
SWEEP_ROTATIONS = 400


def sweep_config(n_corners: int, rotations: int = SWEEP_ROTATIONS, workers: int = 1) -> DetectorConfig:
    return polygon_config(n_corners, step=(math.pi / 2) / rotations, count=rotations, workers=workers)


def bench_scaling(shape: str = "hexagon", sizes: Sequence[int] = (10_000, 20_000, 40_000),
                  repeats: int = 5, workers: int = 1, baseline: bool = True,
                  config: DetectorConfig | None = None) -> list[BenchRow]:
    """Median detect time per cloud size with a fixed schedule (``SWEEP_ROTATIONS`` by default)."""
    if repeats < 3:
        raise ValueError("repeats must be >= 3")
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    n_corners = _polygon_corners(shape)
    cfg = config or sweep_config(n_corners, workers=workers)
    rows = []
    for n in sizes:
        cloud = polygon_cloud(n_corners, n)
        wall, _, cs = time_ns(lambda: detect(cloud, cfg), repeats)
        base = time_ns(lambda: hull_vertex_indices(cloud), repeats)[0] if baseline else None
        rows.append(_row(shape, cloud, "det", wall, cs, base))
    return rows


def bench_rotations(n: int = 100_000, counts: Sequence[int] = (200, 400), repeats: int = 5,
                    n_corners: int = 6) -> list[BenchRow]:
    """Median detect time for schedules of different length on one cloud."""
    cloud = polygon_cloud(n_corners, n)
    rows = []
    for m in counts:
        cfg = sweep_config(n_corners, m)
        wall, _, cs = time_ns(lambda: detect(cloud, cfg), repeats)
        rows.append(_row(_polygon_name(n_corners), cloud, "det", wall, cs, None))
    return rows


def bench_threads(n: int = 100_000, rotations: int = SWEEP_ROTATIONS, workers: Sequence[int] = (1, 4),
                  repeats: int = 3, n_corners: int = 6) -> tuple[list[BenchRow], list[CornerSet]]:
    """Same cloud and schedule under different worker counts."""
    cloud = polygon_cloud(n_corners, n)
    rows, sets = [], []
    for w in workers:
        cfg = sweep_config(n_corners, rotations, w)
        wall, _, cs = time_ns(lambda: detect(cloud, cfg), repeats)
        rows.append(_row(_polygon_name(n_corners), cloud, f"det-threads{w}", wall, cs, None))
        sets.append(cs)
    return rows, sets


def bench_corners(corner_counts: Iterable[int] = range(3, 26), repeats: int = 3,
                  n: int = 100_000) -> list[BenchRow]:
    """Detector vs hull baseline on regular polygons; one row per repeat."""
    rows = []
    for k in corner_counts:
        if not 3 <= k <= 25:
            raise ValueError("corner counts must lie in 3..25")
        cloud = polygon_cloud(k, n)
        cfg = polygon_config(k)
        detect(cloud, cfg)
        hull_vertex_indices(cloud)
        for _ in range(repeats):
            wall, _, cs = time_ns(lambda: detect(cloud, cfg), 1, warmup=False)
            base, _, _ = time_ns(lambda: hull_vertex_indices(cloud), 1, warmup=False)
            rows.append(_row(_polygon_name(k), cloud, "det", wall, cs, base))
    return rows


def bench_modes(shapes: Sequence[str] = ("square", "hexagon", "heptagon", "cube", "dodecahedron"),
                repeats: int = 3, n: int = 20_000, seed: int = 0) -> list[BenchRow]:
    """Deterministic, random and adaptive runs on the same clouds."""
    from .cone import regular_polytope_fans
    from .shapes import spec_from_name

    rows = []
    for name in shapes:
        spec = spec_from_name(name, sampling=Sampling.BOUNDARY, points=n, edge=1.0)
        cloud, truth = generate(spec)
        fans = polygon_fans(truth.points) if cloud.dim == 2 else regular_polytope_fans(truth.points)
        phi = polytope_phi_max(fans)
        modes = {
            "det": ScheduleConfig(cloud.dim, Mode.DETERMINISTIC, phi),
            "rand": ScheduleConfig(cloud.dim, Mode.RANDOM, seed=seed),
            "adapt": ScheduleConfig(cloud.dim, Mode.ADAPTIVE, math.radians(90)),
        }
        base = time_ns(lambda: hull_vertex_indices(cloud), repeats)[0]
        for label, sc in modes.items():
            cfg = DetectorConfig(sc)
            wall, _, cs = time_ns(lambda: detect(cloud, cfg), repeats)
            rows.append(_row(name, cloud, label, wall, cs, base))
    return rows


_NAMES = {3: "triangle", 4: "square", 5: "pentagon", 6: "hexagon", 7: "heptagon", 8: "octagon"}


def _polygon_name(k: int) -> str:
    return _NAMES.get(k, f"polygon{k}")


def _polygon_corners(shape: str) -> int:
    for k, name in _NAMES.items():
        if name == shape:
            return k
    if shape.startswith("polygon") and shape[7:].isdigit():
        return int(shape[7:])
    raise ValueError(f"bench shapes are regular polygons, got {shape!r}")


SUITES = {
    "scaling": lambda repeats: bench_scaling(repeats=max(3, repeats)),
    "corners": lambda repeats: bench_corners(repeats=repeats),
    "modes": lambda repeats: bench_modes(repeats=repeats),
}
