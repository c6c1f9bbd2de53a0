import csv
import io

import numpy as np
import pytest

from cminmax import bench
from cminmax.detector import detect
from cminmax.oracle import hull_vertices, match_corners
from cminmax.shapes import regular_polygon


class TestRows:
    def test_schema(self):
        row = bench.BenchRow("square", 2, 10, 4, "det", 2, 5, 8, 0, None)
        text = bench.rows_to_csv([row])
        header, line = text.splitlines()
        assert header == "shape,dim,n,corners,mode,rotations,wall_time_ns,candidates,ties_rejected,baseline_time_ns"
        assert line == "square,2,10,4,det,2,5,8,0,"

    @pytest.mark.parametrize("wall,rot", [(0, 1), (5, 0)])
    def test_row_invariants(self, wall, rot):
        with pytest.raises(ValueError):
            bench.BenchRow("square", 2, 10, 4, "det", rot, wall, 8, 0, None)

    def test_time_ns(self):
        calls = []
        med, samples, res = bench.time_ns(lambda: calls.append(1) or len(calls), repeats=4)
        assert len(calls) == 5 and len(samples) == 4 and res == 5
        assert med > 0 and min(samples) <= med <= max(samples)


class TestPolygonCloud:
    @pytest.mark.parametrize("k", [3, 4, 7, 25])
    def test_layout(self, k):
        c = bench.polygon_cloud(k, 1001)
        assert c.n == 1001
        assert np.array_equal(c.points[:k], regular_polygon(k))
        assert hull_vertices(c).n == k

    def test_edge_points_stay_clear_of_vertices(self):
        c = bench.polygon_cloud(6, 6000)
        d = np.linalg.norm(c.points[6:, None] - c.points[None, :6], axis=2)
        assert d.min() > 0.5 * (1.0 / 1000)

    @pytest.mark.parametrize("k", range(3, 26))
    def test_default_schedule_finds_every_corner(self, k):
        c = bench.polygon_cloud(k, 5000)
        cs = detect(c, bench.polygon_config(k))
        assert match_corners(cs, regular_polygon(k), 1e-9).perfect


class TestSuites:
    def test_square_uses_two_rotations(self):
        rows = bench.bench_corners([4], repeats=1, n=2000)
        assert rows[0].rotations == 2 and rows[0].corners == 4

    def test_one_row_per_corner_count_and_repeat(self):
        rows = bench.bench_corners([3, 5, 12], repeats=2, n=2000)
        keys = [(r.shape, r.mode) for r in rows]
        assert keys == [("triangle", "det")] * 2 + [("pentagon", "det")] * 2 + [("polygon12", "det")] * 2
        assert all(r.baseline_time_ns > 0 for r in rows)
        assert [r.corners for r in rows] == [3, 3, 5, 5, 12, 12]

    def test_corner_range(self):
        with pytest.raises(ValueError):
            bench.bench_corners([2], repeats=1, n=100)
        with pytest.raises(ValueError):
            bench.bench_corners([26], repeats=1, n=100)

    def test_scaling_preconditions(self):
        with pytest.raises(ValueError):
            bench.bench_scaling(sizes=(100, 200), repeats=2)
        with pytest.raises(ValueError):
            bench.bench_scaling(sizes=(200, 100), repeats=3)

    def test_scaling_rows(self):
        rows = bench.bench_scaling("square", sizes=(500, 1000), repeats=3)
        assert [r.n for r in rows] == [500, 1000]
        assert all(r.corners == 4 and r.rotations == bench.SWEEP_ROTATIONS for r in rows)

    def test_rotation_counts(self):
        rows = bench.bench_rotations(n=1000, counts=(4, 8), repeats=3)
        assert [r.rotations for r in rows] == [4, 8]

    def test_threads_same_corners(self):
        rows, sets = bench.bench_threads(n=2000, rotations=40, workers=(1, 3), repeats=1)
        assert [r.mode for r in rows] == ["det-threads1", "det-threads3"]
        assert np.array_equal(sets[0].centroids, sets[1].centroids)

    def test_modes(self):
        rows = bench.bench_modes(("square", "cube"), repeats=1, n=600)
        assert [(r.shape, r.mode) for r in rows] == [
            (s, m) for s in ("square", "cube") for m in ("det", "rand", "adapt")]
        assert [r.corners for r in rows] == [4, 4, 4, 8, 8, 8]

    def test_unknown_shape(self):
        with pytest.raises(ValueError):
            bench.bench_scaling("cube", repeats=3)

    def test_write_rows_parses(self, tmp_path):
        rows = bench.bench_corners([6], repeats=2, n=1000)
        p = tmp_path / "b.csv"
        bench.write_rows(rows, p)
        parsed = list(csv.DictReader(io.StringIO(p.read_text())))
        assert len(parsed) == 2 and parsed[0]["corners"] == "6" and int(parsed[0]["wall_time_ns"]) > 0
