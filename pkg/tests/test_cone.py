import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cminmax.cone import (
    VertexFan,
    min_bounding_cone,
    min_enclosing_ball,
    polygon_fans,
    polytope_phi_max,
    regular_polytope_fans,
)
from cminmax.errors import NotConvexVertexError
from cminmax.shapes import ShapeKind, polygon_interior_angles, polytope_vertices, regular_polygon
from oracles import brute_force_cone

# Full cone angles 2*omega in degrees for the regular polytopes.
PLATONIC_TABLE = {
    ShapeKind.TETRA: 70.53,
    ShapeKind.OCTA: 90.00,
    ShapeKind.CUBE: 109.47,
    ShapeKind.ICOSA: 116.57,
    ShapeKind.DODECA: 138.19,
}


def phi_max_deg(kind):
    return math.degrees(polytope_phi_max(regular_polytope_fans(polytope_vertices(kind))))


class TestExamples:
    def test_cube_vertex(self):
        fan = VertexFan.from_neighbors([1, 1, 1], [[-1, 1, 1], [1, -1, 1], [1, 1, -1]])
        cone = min_bounding_cone(fan)
        assert cone.angle_deg == pytest.approx(109.47, abs=0.01)
        assert np.allclose(cone.axis, -np.ones(3) / math.sqrt(3), atol=1e-9)

    def test_tetrahedron_vertex(self):
        v = polytope_vertices(ShapeKind.TETRA)
        fan = VertexFan.from_neighbors(v[0], v[1:])
        assert min_bounding_cone(fan).angle_deg == pytest.approx(70.53, abs=0.01)

    def test_single_direction(self):
        cone = min_bounding_cone(VertexFan([0, 0, 0], [[0, 2, 0]]))
        assert cone.half_angle == 0.0
        assert np.allclose(cone.axis, [0, 1, 0])

    def test_duplicate_directions_collapse(self):
        cone = min_bounding_cone(VertexFan([0, 0], [[1, 0], [2, 0], [0, 1]]))
        assert math.degrees(cone.half_angle) == pytest.approx(45.0)

    @pytest.mark.parametrize("kind,expected", PLATONIC_TABLE.items())
    def test_platonic_table(self, kind, expected):
        assert phi_max_deg(kind) == pytest.approx(expected, abs=0.01)

    def test_dodecahedron_omega_max(self):
        assert phi_max_deg(ShapeKind.DODECA) / 2 == pytest.approx(69.095, abs=0.01)

    def test_five_cell(self):
        assert phi_max_deg(ShapeKind.SIMPLEX_4D) == pytest.approx(75.52, abs=0.05)

    def test_four_d_cross_polytope_and_tesseract(self):
        assert phi_max_deg(ShapeKind.CROSS_4D) == pytest.approx(90.0, abs=1e-6)
        assert phi_max_deg(ShapeKind.TESSERACT_4D) == pytest.approx(120.0, abs=0.05)

    @pytest.mark.parametrize("n", [3, 4, 6, 7, 12])
    def test_polygon_phi_is_interior_angle(self, n):
        expected = 180.0 * (n - 2) / n
        assert math.degrees(polytope_phi_max(polygon_fans(regular_polygon(n)))) == pytest.approx(expected)


class TestErrors:
    def test_flat_vertex(self):
        with pytest.raises(NotConvexVertexError):
            min_bounding_cone(VertexFan([0, 0], [[1, 0], [-1, 0]]))

    def test_surrounding_directions(self):
        with pytest.raises(NotConvexVertexError):
            min_bounding_cone(VertexFan([0, 0, 0], np.vstack([np.eye(3), -np.eye(3)])))

    def test_reflex_2d(self):
        with pytest.raises(NotConvexVertexError):
            min_bounding_cone(VertexFan([0, 0], [[1, 0.1], [-1, 0.1], [0, -1]]))

    def test_propagates_through_phi_max(self):
        bad = VertexFan([0, 0], [[1, 0], [-1, 0]])
        with pytest.raises(NotConvexVertexError):
            polytope_phi_max([bad])

    def test_bad_fans(self):
        with pytest.raises(ValueError):
            VertexFan([0, 0], [[0, 0]])
        with pytest.raises(ValueError):
            VertexFan([0, 0], [[1, 0, 0]])


def test_min_enclosing_ball_against_known():
    c, r = min_enclosing_ball(np.array([[0, 0], [2, 0], [1, 0.1]]))
    assert np.allclose(c, [1, 0]) and r == pytest.approx(1.0)
    c, r = min_enclosing_ball(np.array([[1, 0], [-0.5, math.sqrt(3) / 2], [-0.5, -math.sqrt(3) / 2], [0, 0]]))
    assert np.allclose(c, 0, atol=1e-12) and r == pytest.approx(1.0)


@pytest.mark.parametrize("kind", list(PLATONIC_TABLE))
def test_regular_axis_points_to_center(kind):
    v = polytope_vertices(kind)
    center = v.mean(axis=0)
    for fan in regular_polytope_fans(v):
        axis = min_bounding_cone(fan).axis
        to_center = (center - fan.apex) / np.linalg.norm(center - fan.apex)
        assert np.allclose(axis, to_center, atol=1e-6)


@st.composite
def convex_fans(draw):
    dim = draw(st.sampled_from([2, 3]))
    k = draw(st.integers(1, 6))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    axis = rng.normal(size=dim)
    axis /= np.linalg.norm(axis)
    spread = draw(st.floats(0.05, 1.3))
    dirs = axis + spread * rng.normal(size=(k, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    # keep the fan strictly inside the hemisphere around ``axis``
    dirs = dirs[dirs @ axis > 0.05]
    if len(dirs) == 0:
        dirs = axis[None]
    return VertexFan(np.zeros(dim), dirs)


@given(convex_fans())
def test_containment_and_touching(fan):
    cone = min_bounding_cone(fan)
    cos = fan.edge_dirs @ cone.axis
    ang = np.arctan2(np.linalg.norm(fan.edge_dirs - cos[:, None] * cone.axis, axis=1), cos)
    assert np.all(ang <= cone.half_angle + 1e-9)
    distinct = {tuple(np.round(d, 9)) for d in fan.edge_dirs}
    if len(distinct) >= 2:
        assert np.sum(ang >= cone.half_angle - 1e-9) >= 2
    assert 0 <= cone.half_angle < math.pi / 2


@given(convex_fans())
def test_minimality_against_grid_search(fan):
    cone = min_bounding_cone(fan)
    brute = brute_force_cone(fan.edge_dirs)
    assert brute >= cone.half_angle - 1e-4


def test_random_polygon_phi_matches_interior_angles():
    from cminmax.shapes import random_convex_polygon

    for seed in range(20):
        v = random_convex_polygon(9, seed)
        assert polytope_phi_max(polygon_fans(v)) == pytest.approx(polygon_interior_angles(v).max(), abs=1e-9)
