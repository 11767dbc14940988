import numpy as np
import pytest

from conftest import regular_ngon
from oracles import arc_diameter, shoelace
from plbounds.curves import (
    ahlfors_constant,
    ahlfors_constant_naive,
    bounded_turning_constant,
    bounded_turning_constant_naive,
    curve_metrics,
    polygon_area,
    polygon_diameter,
)
from plbounds.domains import (
    PolygonalCurve,
    SnowflakeParams,
    boundary_polyline,
    generate_rohde_snowflake,
    unit_square,
)


@pytest.fixture(scope="module")
def snowflake_d2():
    return generate_rohde_snowflake(SnowflakeParams(0.3, 2, "all_tent"))


@pytest.fixture(scope="module")
def star_polygon():
    # simple nonconvex polygon with unequal spikes
    rng = np.random.default_rng(5)
    n = 40
    th = 2 * np.pi * np.arange(n) / n
    r = 1.0 + 0.45 * np.sin(4 * th) + 0.05 * rng.standard_normal(n)
    return PolygonalCurve.from_vertices(np.column_stack([r * np.cos(th), r * np.sin(th)]))


class TestAgainstCubicReference:
    def test_square_matches_exactly(self, square_curve):
        assert bounded_turning_constant(square_curve) == bounded_turning_constant_naive(square_curve)
        assert ahlfors_constant(square_curve) == ahlfors_constant_naive(square_curve)

    def test_regular_64gon_matches_exactly(self):
        c = PolygonalCurve.from_vertices(regular_ngon(64))
        assert bounded_turning_constant(c) == bounded_turning_constant_naive(c)
        assert ahlfors_constant(c) == ahlfors_constant_naive(c)

    def test_snowflake_matches_exactly(self, snowflake_d2):
        assert bounded_turning_constant(snowflake_d2) == bounded_turning_constant_naive(snowflake_d2)
        assert ahlfors_constant(snowflake_d2) == ahlfors_constant_naive(snowflake_d2)

    def test_irregular_polygon_matches_exactly(self, star_polygon):
        assert bounded_turning_constant(star_polygon) == bounded_turning_constant_naive(star_polygon)
        assert ahlfors_constant(star_polygon) == ahlfors_constant_naive(star_polygon)


class TestGeometricInvariants:
    def test_round_convex_curves_have_unit_constants(self, square_curve):
        circle = PolygonalCurve.from_vertices(regular_ngon(1024))
        for c in (square_curve, circle):
            assert abs(bounded_turning_constant(c) - 1.0) < 1e-6
            assert abs(ahlfors_constant(c) - 1.0) < 1e-6

    def test_constants_are_at_least_one(self, snowflake_d2, star_polygon):
        for c in (snowflake_d2, star_polygon):
            assert bounded_turning_constant(c) >= 1.0
            assert ahlfors_constant(c) >= 1.0

    def test_reversal_leaves_constants_unchanged(self, snowflake_d2, star_polygon):
        for c in (snowflake_d2, star_polygon):
            rev = PolygonalCurve.from_vertices(c.vertices[::-1])
            assert bounded_turning_constant(rev) == bounded_turning_constant(c)
            assert ahlfors_constant(rev) == ahlfors_constant(c)

    def test_rotation_and_scaling_leave_constants_unchanged(self, snowflake_d2):
        th = 0.7
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        moved = PolygonalCurve.from_vertices(3.0 * snowflake_d2.vertices @ rot.T + [5.0, -2.0])
        assert bounded_turning_constant(moved) == pytest.approx(
            bounded_turning_constant(snowflake_d2), rel=1e-12)
        assert ahlfors_constant(moved) == pytest.approx(
            ahlfors_constant(snowflake_d2), rel=1e-12)

    def test_midpoint_subdivision_is_stable_on_dense_curves(self, epi3):
        c = boundary_polyline(epi3, 512)
        v = c.vertices
        mid = 0.5 * (v + np.roll(v, -1, axis=0))
        doubled = np.empty((2 * len(v), 2))
        doubled[0::2] = v
        doubled[1::2] = mid
        c2 = PolygonalCurve.from_vertices(doubled)
        a, b = bounded_turning_constant(c), bounded_turning_constant(c2)
        assert abs(a - b) <= 1e-6 * a


class TestWitnessAndMetrics:
    def test_witness_pair_attains_the_constant(self, snowflake_d2):
        value, (i, j) = bounded_turning_constant(snowflake_d2, with_witness=True)
        v = snowflake_d2.vertices
        dist = float(np.hypot(*(v[i] - v[j])))
        ratio = min(arc_diameter(v, i, j), arc_diameter(v, j, i)) / dist
        assert ratio == pytest.approx(value, rel=1e-12)

    def test_polygon_area_and_diameter(self, square_curve, star_polygon):
        assert polygon_area(square_curve) == pytest.approx(1.0)
        assert polygon_area(star_polygon) == pytest.approx(shoelace(star_polygon.vertices))
        v = star_polygon.vertices
        brute = max(
            float(np.hypot(v[i, 0] - v[j, 0], v[i, 1] - v[j, 1]))
            for i in range(len(v)) for j in range(i)
        )
        assert polygon_diameter(star_polygon) == brute

    def test_curve_metrics_is_consistent(self, snowflake_d2):
        m = curve_metrics(snowflake_d2)
        assert m.bounded_turning == bounded_turning_constant(snowflake_d2)
        assert m.ahlfors == ahlfors_constant(snowflake_d2)
        assert m.area == polygon_area(snowflake_d2)
        assert m.diameter == polygon_diameter(snowflake_d2)
        assert m.n_vertices == len(snowflake_d2.vertices)
        d = m.to_dict()
        assert set(d) == {"bounded_turning", "ahlfors", "area", "diameter",
                          "n_vertices", "witness_pair"}
