import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cminmax.detector import DetectorConfig, detect
from cminmax.errors import EmptyCloudError, FormatError, IoError, ParseError
from cminmax.geom import PointCloud
from cminmax.io import (
    corners_to_csv,
    image_to_cloud,
    read_cloud,
    read_csv_cloud,
    read_pgm,
    write_cloud,
    write_corners,
    write_pgm,
    write_ply,
)
from cminmax.schedule import Mode, ScheduleConfig
from cminmax.shapes import Sampling, ShapeKind, ShapeSpec, generate, regular_polygon


def square_corners():
    c, s = math.cos(0.2), math.sin(0.2)
    v = regular_polygon(4) @ np.array([[c, s], [-s, c]])
    return detect(PointCloud(v), DetectorConfig(ScheduleConfig(2, Mode.DETERMINISTIC, math.pi / 2)))


class TestReadCloud:
    def test_simple_csv(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("0,0\n1,0\n0,1")
        c = read_cloud(p)
        assert c.dim == 2 and c.n == 3
        assert np.array_equal(c.points, [[0, 0], [1, 0], [0, 1]])

    def test_header_comments_and_blank_lines(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("# exported\nx,y,z\n\n1,2,3\n 4 , 5 , 6 \n")
        assert read_cloud(p).points.tolist() == [[1, 2, 3], [4, 5, 6]]

    def test_ragged_csv_names_line(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("0,0\n1,0\n1,2,3\n")
        with pytest.raises(ParseError, match="line 3") as exc:
            read_cloud(p)
        assert exc.value.line == 3

    def test_non_numeric(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("0,0\n1,abc\n")
        with pytest.raises(ParseError, match="line 2"):
            read_cloud(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("")
        with pytest.raises(EmptyCloudError):
            read_cloud(p)

    def test_missing_and_unknown_format(self, tmp_path):
        with pytest.raises(IoError):
            read_cloud(tmp_path / "none.csv")
        p = tmp_path / "c.xyz"
        p.write_text("1 2 3\n")
        with pytest.raises(FormatError):
            read_cloud(p)
        p.write_text("1,2,3\n")
        assert read_cloud(p, format="csv").points.tolist() == [[1, 2, 3]]

    def test_corner_file_reads_back_as_centroids(self, tmp_path):
        cs = square_corners()
        p = tmp_path / "corners.csv"
        write_corners(cs, p)
        assert np.array_equal(read_csv_cloud(p).points, cs.centroids)


class TestPly:
    def test_round_trip(self, tmp_path):
        cloud, _ = generate(ShapeSpec(ShapeKind.DODECA, edge=3.2361, sampling=Sampling.BOUNDARY, points=14535))
        p = tmp_path / "d.ply"
        write_ply(cloud, p)
        back = read_cloud(p)
        assert back.n == 14535 and back == cloud

    def test_extra_properties(self, tmp_path):
        p = tmp_path / "x.ply"
        p.write_text(
            "ply\nformat ascii 1.0\ncomment hi\nelement vertex 2\nproperty float nx\nproperty float x\n"
            "property float y\nproperty float z\nelement face 0\nproperty list uchar int vertex_indices\n"
            "end_header\n9 1 2 3\n9 4 5 6\n"
        )
        assert read_cloud(p).points.tolist() == [[1, 2, 3], [4, 5, 6]]

    def test_count_mismatch(self, tmp_path):
        p = tmp_path / "x.ply"
        p.write_text("ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
                     "property float z\nend_header\n1 2 3\n")
        with pytest.raises(ParseError):
            read_cloud(p)

    def test_binary_rejected(self, tmp_path):
        p = tmp_path / "x.ply"
        p.write_text("ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n")
        with pytest.raises(FormatError):
            read_cloud(p)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "x.ply"
        p.write_text("plx\n")
        with pytest.raises(ParseError):
            read_cloud(p)

    def test_write_needs_3d(self, tmp_path):
        with pytest.raises(FormatError):
            write_ply(PointCloud([[0, 0]]), tmp_path / "x.ply")


class TestWriteCorners:
    def test_square(self, tmp_path):
        p = tmp_path / "sq.csv"
        write_corners(square_corners(), p)
        lines = p.read_text().splitlines()
        assert lines[0] == "axis0,axis1,support"
        assert len(lines) == 5
        rows = [tuple(map(float, line.split(",")[:2])) for line in lines[1:]]
        assert rows == sorted(rows)

    def test_empty(self):
        cs = detect(PointCloud(regular_polygon(4)), DetectorConfig(
            ScheduleConfig(2, Mode.DETERMINISTIC, math.pi / 2), min_support=5))
        assert corners_to_csv(cs) == "axis0,axis1,support\n"

    def test_dodecahedron_rows(self, tmp_path):
        cloud, _ = generate(ShapeSpec(ShapeKind.DODECA, edge=3.2361, sampling=Sampling.BOUNDARY, points=3000))
        cs = detect(cloud, DetectorConfig(ScheduleConfig(3, Mode.DETERMINISTIC, step=math.pi / 20)))
        text = corners_to_csv(cs)
        assert text.splitlines()[0] == "axis0,axis1,axis2,support"
        assert len(text.splitlines()) == 21

    def test_unwritable(self, tmp_path):
        with pytest.raises(IoError):
            write_corners(square_corners(), tmp_path / "no" / "such" / "dir.csv")


class TestPgm:
    def test_center_pixel(self, tmp_path):
        img = np.zeros((3, 3), np.uint8)
        img[1, 1] = 255
        p = tmp_path / "a.pgm"
        write_pgm(img, p)
        c = image_to_cloud(p, 128)
        assert c.points.tolist() == [[1, 1]]

    def test_y_axis_flipped(self, tmp_path):
        img = np.zeros((4, 5), np.uint8)
        img[0, 3] = 255  # top row
        p = tmp_path / "a.pgm"
        write_pgm(img, p, binary=False)
        assert image_to_cloud(p).points.tolist() == [[3, 3]]

    def test_all_black(self, tmp_path):
        p = tmp_path / "a.pgm"
        write_pgm(np.zeros((4, 4), np.uint8), p)
        c = image_to_cloud(p)
        assert c.n == 0 and c.dim == 2
        with pytest.raises(EmptyCloudError):
            detect(c, DetectorConfig(ScheduleConfig(2, Mode.DETERMINISTIC, 1.0)))

    @pytest.mark.parametrize("binary", [True, False])
    def test_round_trip_and_count(self, tmp_path, binary):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(7, 11)).astype(np.uint8)
        p = tmp_path / "a.pgm"
        write_pgm(img, p, binary=binary)
        back, maxval = read_pgm(p)
        assert maxval == 255 and np.array_equal(back, img)
        assert image_to_cloud(p, 100).n == int(np.count_nonzero(img >= 100))

    def test_comments_and_16_bit(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(b"P2\n# made by hand\n2 1\n# depth\n1000\n0 1000\n")
        img, maxval = read_pgm(p)
        assert maxval == 1000 and img.tolist() == [[0, 1000]]
        assert image_to_cloud(p, 128).points.tolist() == [[1, 0]]

    def test_not_pgm(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
        with pytest.raises(FormatError):
            read_pgm(p)

    def test_truncated(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(b"P5\n4 4\n255\n\x00\x00")
        with pytest.raises(FormatError):
            read_pgm(p)

    def test_threshold_range(self, tmp_path):
        p = tmp_path / "a.pgm"
        write_pgm(np.zeros((2, 2), np.uint8), p)
        with pytest.raises(ValueError):
            image_to_cloud(p, 300)


@given(arrays(float, st.tuples(st.integers(1, 20), st.integers(1, 4)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_csv_round_trip_is_exact(tmp_path_factory, pts):
    p = tmp_path_factory.mktemp("rt") / "c.csv"
    cloud = PointCloud(pts)
    write_cloud(cloud, p)
    assert read_cloud(p) == cloud
