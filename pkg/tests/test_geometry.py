import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize

from convexj.cheeger import cheeger_constant
from convexj.errors import DegenerateInputError, InvalidShapeError
from convexj.geometry import (
    Arc,
    ArcBoundaryShape,
    ConvexPolygon,
    Segment,
    SymmetrizationAxis,
    _shoelace,
    area,
    convex_hull,
    diameter,
    hausdorff_distance,
    inradius,
    inward_offset,
    minkowski_sum_disc,
    perimeter,
    steiner_symmetrize,
    transform,
)
from convexj.shapes import rectangle, regular_polygon

from strategies import polygons

SQUARE = rectangle(1.0, 1.0)
RIGHT = ConvexPolygon([[0, 0], [1, 0], [0, 1]])


class TestConstruction:
    def test_clockwise_input_is_reoriented(self):
        p = ConvexPolygon([[0, 0], [0, 1], [1, 1], [1, 0]])
        assert p.area == pytest.approx(1.0)
        assert _shoelace(p.vertices) > 0

    def test_collinear_and_repeated_vertices_are_pruned(self):
        p = ConvexPolygon([[0, 0], [0.5, 0], [1, 0], [1, 0], [1, 1], [0, 1], [0, 0]])
        assert p.n == 4

    @pytest.mark.parametrize(
        "verts",
        [
            [[0, 0], [1, 0]],
            [[0, 0], [1, 0], [2, 0]],
            [[0, 0], [2, 0], [1, 0.2], [2, 2], [0, 2]],
            [[0, 0], [1, 0], [math.nan, 1]],
            [[0, 0], [1, 0], [math.inf, 1]],
        ],
    )
    def test_invalid_polygons(self, verts):
        with pytest.raises(InvalidShapeError):
            ConvexPolygon(verts)

    def test_vertices_are_read_only(self):
        with pytest.raises(ValueError):
            SQUARE.vertices[0, 0] = 5.0

    def test_normals_point_outward(self):
        for i in range(SQUARE.n):
            mid = SQUARE.vertices[i] + 0.5 * SQUARE.edges[i]
            assert not SQUARE.contains(mid + 1e-3 * SQUARE.normals[i])


class TestMeasures:
    def test_square(self):
        assert area(SQUARE) == 1.0
        assert perimeter(SQUARE) == 4.0

    def test_equilateral_area(self):
        assert area(regular_polygon(3)) == pytest.approx(math.sqrt(3) / 4, rel=1e-12)

    def test_cheeger_set_of_square(self):
        sol = cheeger_constant(SQUARE)
        r = 1 / (2 + math.sqrt(math.pi))
        assert sol.r == pytest.approx(r, rel=1e-10)
        oracle_area = 1 - 4 * r**2 + math.pi * r**2
        assert area(sol.cheeger_set) == pytest.approx(oracle_area, rel=1e-12)
        assert area(sol.cheeger_set) == pytest.approx(0.9396822, abs=1e-7)
        # dense polygonal sampling converges to the exact area from below
        dense = _shoelace(sol.cheeger_set.sample(per_arc=4000))
        assert dense == pytest.approx(area(sol.cheeger_set), rel=1e-6)
        assert dense < area(sol.cheeger_set)
        assert perimeter(sol.cheeger_set) == pytest.approx(4 * (1 - 2 * r) + 2 * math.pi * r, rel=1e-12)
        assert perimeter(sol.cheeger_set) == pytest.approx(3.544907, abs=1e-6)
        pts = sol.cheeger_set.sample(per_arc=4000)
        fine = float(np.sum(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)))
        assert fine == pytest.approx(perimeter(sol.cheeger_set), rel=1e-6)

    def test_disc_as_arc_shape(self):
        R = 2.5
        shape = ArcBoundaryShape([Arc(np.zeros(2), R, 0.0, 2 * math.pi)])
        assert perimeter(shape) == pytest.approx(2 * math.pi * R)
        assert area(shape) == pytest.approx(math.pi * R**2)

    def test_arc_shape_rejects_mixed_radii_and_gaps(self):
        a = Arc(np.zeros(2), 1.0, 0.0, math.pi)
        b = Arc(np.zeros(2), 2.0, math.pi, 2 * math.pi)
        with pytest.raises(InvalidShapeError):
            ArcBoundaryShape([a, b])
        with pytest.raises(InvalidShapeError):
            ArcBoundaryShape([a, Segment(np.array([-1.0, 0.0]), np.array([0.5, 0.0]))])


class TestDiameter:
    def test_examples(self):
        assert diameter(SQUARE) == pytest.approx(math.sqrt(2))
        assert diameter(rectangle(100, 1)) == pytest.approx(math.sqrt(10001))

    def test_random_20gon_matches_brute_force(self, rng):
        th = np.sort(rng.uniform(0, 2 * math.pi, 20))
        p = ConvexPolygon(np.column_stack([3 * np.cos(th), np.sin(th)]))
        v = p.vertices
        brute = max(np.linalg.norm(a - b) for a in v for b in v)
        assert diameter(p) == pytest.approx(brute, rel=1e-14)

    @given(polygons())
    def test_property_brute_force(self, p):
        v = p.vertices
        d = np.linalg.norm(v[:, None] - v[None], axis=2).max()
        assert diameter(p) == pytest.approx(d, rel=1e-12)


class TestInradius:
    def test_square(self):
        r, c = inradius(SQUARE)
        assert r == pytest.approx(0.5, abs=1e-12)
        assert (c.x, c.y) == pytest.approx((0.5, 0.5), abs=1e-9)

    def test_hexagon_apothem(self):
        r, _ = inradius(regular_polygon(6))
        assert r == pytest.approx(math.sqrt(3) / 2, abs=1e-12)

    def test_random_12gon_matches_grid_search(self, rng):
        pts = rng.normal(size=(60, 2)) * [2.0, 1.0]
        p = convex_hull(pts)
        r, c = inradius(p)

        def score(x):
            return -float(p.boundary_distance(x)[0])

        lo, hi = p.vertices.min(axis=0), p.vertices.max(axis=0)
        g = np.stack(np.meshgrid(np.linspace(lo[0], hi[0], 200), np.linspace(lo[1], hi[1], 200)), -1).reshape(-1, 2)
        start = g[np.argmax(p.boundary_distance(g))]
        best = minimize(score, start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14})
        assert r == pytest.approx(-best.fun, abs=1e-6)

    @given(polygons())
    def test_center_clears_every_edge(self, p):
        r, c = inradius(p)
        d = p.offsets - p.normals @ np.array(c)
        assert np.all(d >= r - 1e-10 * max(1.0, diameter(p)))

    def test_area_perimeter_sandwich(self, corpus):
        for p in corpus:
            r, _ = inradius(p)
            assert p.area / p.perimeter <= r * (1 + 1e-9)
            assert r <= 2 * p.area / p.perimeter * (1 + 1e-9)


class TestInwardOffset:
    def test_square_side_two(self):
        q = inward_offset(rectangle(2, 2), 0.5)
        assert q.area == pytest.approx(1.0)
        assert sorted(map(tuple, np.round(q.vertices, 12))) == [(0.5, 0.5), (0.5, 1.5), (1.5, 0.5), (1.5, 1.5)]

    def test_equilateral_at_inradius_is_empty(self):
        assert inward_offset(regular_polygon(3), math.sqrt(3) / 6) is None

    def test_rectangle(self):
        q = inward_offset(rectangle(3, 1), 0.25)
        assert q.area == pytest.approx(1.25)
        assert diameter(q) == pytest.approx(math.hypot(2.5, 0.5))

    def test_zero_and_negative(self):
        assert inward_offset(SQUARE, 0.0) == SQUARE
        with pytest.raises(ValueError):
            inward_offset(SQUARE, -0.1)

    def test_area_strictly_decreasing(self, small_corpus):
        for p in small_corpus:
            rin, _ = inradius(p)
            areas = []
            for r in np.linspace(0, 0.98 * rin, 40):
                q = inward_offset(p, r)
                areas.append(q.area if q is not None else 0.0)
            assert all(b < a for a, b in zip(areas, areas[1:]))

    @given(polygons(), st.floats(0.01, 0.95))
    def test_offset_lies_at_distance(self, p, frac):
        rin, _ = inradius(p)
        q = inward_offset(p, frac * rin)
        if q is None:
            return
        assert np.all(p.boundary_distance(q.vertices) >= frac * rin - 1e-8 * diameter(p))


class TestMinkowski:
    def test_r_zero_is_identity(self):
        s = minkowski_sum_disc(RIGHT, 0.0)
        assert area(s) == pytest.approx(RIGHT.area)
        assert perimeter(s) == pytest.approx(RIGHT.perimeter)

    def test_unit_square_r1(self):
        assert area(minkowski_sum_disc(SQUARE, 1.0)) == pytest.approx(5 + math.pi, rel=1e-12)

    def test_triangle(self):
        s = minkowski_sum_disc(RIGHT, 0.1)
        assert area(s) == pytest.approx(0.5 + 0.1 * (2 + math.sqrt(2)) + 0.01 * math.pi, rel=1e-12)

    @given(polygons(), st.floats(0.0, 5.0))
    def test_steiner_formulas(self, p, r):
        s = minkowski_sum_disc(p, r)
        assert area(s) == pytest.approx(p.area + r * p.perimeter + math.pi * r**2, rel=1e-9)
        assert perimeter(s) == pytest.approx(p.perimeter + 2 * math.pi * r, rel=1e-9)


class TestHausdorff:
    def test_examples(self):
        assert hausdorff_distance(SQUARE, SQUARE) == 0.0
        assert hausdorff_distance(SQUARE, transform(SQUARE, translation=(0.3, 0))) == pytest.approx(0.3)
        big = transform(rectangle(3, 3), translation=(-1, -1))
        # the corners are sqrt(2) apart
        assert hausdorff_distance(SQUARE, big) == pytest.approx(math.sqrt(2))
        inner = transform(rectangle(0.5, 0.5), translation=(0.25, 0.25))
        assert hausdorff_distance(SQUARE, inner) == pytest.approx(math.sqrt(2) / 4)

    def test_metric_on_corpus(self, small_corpus):
        ps = small_corpus
        for a in ps[:8]:
            for b in ps[:8]:
                assert hausdorff_distance(a, b) == hausdorff_distance(b, a)
                assert hausdorff_distance(a, b) >= 0
                for c in ps[:4]:
                    assert hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-12

    @given(polygons(), polygons())
    def test_symmetric(self, a, b):
        assert hausdorff_distance(a, b) == hausdorff_distance(b, a)


class TestSteiner:
    def test_axis_symmetric_polygon_is_fixed(self):
        p = transform(regular_polygon(6), translation=(0, 0))
        s = steiner_symmetrize(p, SymmetrizationAxis.x_axis())
        assert s.n == p.n
        assert hausdorff_distance(s, p) < 1e-12

    def test_right_triangle(self):
        s = steiner_symmetrize(RIGHT, SymmetrizationAxis.x_axis())
        assert s.area == pytest.approx(0.5, rel=1e-12)
        expected = {(0.0, 0.5), (0.0, -0.5), (1.0, 0.0)}
        assert {tuple(np.round(v, 12) + 0.0) for v in s.vertices} == expected

    def test_rectangle_about_midline(self):
        r = transform(rectangle(3, 1), translation=(0, -0.5))
        s = steiner_symmetrize(r, SymmetrizationAxis.x_axis())
        assert hausdorff_distance(s, r) < 1e-12

    def test_corpus_area_and_perimeter(self, corpus, rng):
        for p in corpus[:100]:
            ax = SymmetrizationAxis.through(p.centroid, rng.normal(size=2))
            s = steiner_symmetrize(p, ax)
            assert s.area == pytest.approx(p.area, rel=1e-9)
            assert s.perimeter <= p.perimeter * (1 + 1e-12)

    def test_slices_only_refine(self):
        p = convex_hull(np.random.default_rng(3).normal(size=(30, 2)))
        a = steiner_symmetrize(p, SymmetrizationAxis.x_axis(), slices=2)
        b = steiner_symmetrize(p, SymmetrizationAxis.x_axis(), slices=300)
        assert hausdorff_distance(a, b) < 1e-10

    def test_axis_validation(self):
        with pytest.raises(ValueError):
            SymmetrizationAxis((0.0, 0.0), (1.0, 1.0))
        with pytest.raises(ValueError):
            steiner_symmetrize(SQUARE, SymmetrizationAxis.x_axis(), slices=1)


class TestHull:
    def test_square_corners_and_interior_point(self):
        h = convex_hull([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.4]])
        assert h.n == 4 and h.area == pytest.approx(1.0)

    def test_collinear(self):
        with pytest.raises(DegenerateInputError):
            convex_hull([[0, 0], [1, 1], [2, 2], [3, 3]])

    def test_contains_random_disc_points(self, rng):
        th = rng.uniform(0, 2 * math.pi, 100)
        rad = np.sqrt(rng.uniform(0, 1, 100))
        pts = np.column_stack([rad * np.cos(th), rad * np.sin(th)])
        h = convex_hull(pts)
        assert h.contains(pts).all()


class TestTransform:
    def test_identity_and_scaling(self):
        assert transform(SQUARE, 1.0) == SQUARE
        assert transform(SQUARE, 3.0).area == pytest.approx(9.0)

    def test_rotation_keeps_measures(self):
        p = regular_polygon(5)
        q = transform(p, rotation=math.pi / 2)
        assert q.area == pytest.approx(p.area)
        assert q.perimeter == pytest.approx(p.perimeter)

    def test_nonpositive_scale(self):
        for t in (0.0, -1.0):
            with pytest.raises(ValueError):
                transform(SQUARE, t)

    @given(polygons(), st.floats(0.1, 10.0))
    def test_scaling_laws(self, p, t):
        q = transform(p, t)
        assert q.area == pytest.approx(t**2 * p.area, rel=1e-12)
        assert diameter(q) == pytest.approx(t * diameter(p), rel=1e-12)
