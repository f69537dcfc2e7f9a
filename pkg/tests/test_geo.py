"""Spherical geometry, projection and graticule tests."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odflow.errors import InvalidSpacingError, OutOfBoundsError
from odflow.geo import (
    GeoPoint,
    ProjectedPoint,
    Rotation3,
    centering_rotation,
    graticule,
    great_circle_distance,
    hammer_forward,
    hammer_inverse,
    rotate,
    split_at_antimeridian,
)

HAMMER_WIDTH = 4.0 * math.sqrt(2.0)


# Oracle 1: haversine, from the half-angle formula.
def haversine_deg(a: GeoPoint, b: GeoPoint) -> float:
    la1, la2 = math.radians(a.lat), math.radians(b.lat)
    dla = la2 - la1
    dlo = math.radians(b.lon - a.lon)
    s = math.sin(dla / 2) ** 2 + math.cos(la1) * math.cos(la2) * math.sin(dlo / 2) ** 2
    return math.degrees(2 * math.asin(min(1.0, math.sqrt(s))))


# Oracle 2: spherical Vincenty (atan2 form), numerically stable everywhere.
def vincenty_deg(a: GeoPoint, b: GeoPoint) -> float:
    f1, f2 = math.radians(a.lat), math.radians(b.lat)
    dl = math.radians(b.lon - a.lon)
    y = math.hypot(
        math.cos(f2) * math.sin(dl),
        math.cos(f1) * math.sin(f2) - math.sin(f1) * math.cos(f2) * math.cos(dl),
    )
    x = math.sin(f1) * math.sin(f2) + math.cos(f1) * math.cos(f2) * math.cos(dl)
    return math.degrees(math.atan2(y, x))


geo_points = st.builds(
    GeoPoint,
    st.floats(min_value=-180.0, max_value=180.0),
    st.floats(min_value=-89.9, max_value=89.9),
)


class TestGreatCircleDistance:
    def test_identity(self):
        assert great_circle_distance(GeoPoint(0, 0), GeoPoint(0, 0)) == 0.0

    def test_quarter_circle(self):
        assert great_circle_distance(GeoPoint(0, 0), GeoPoint(90, 0)) == pytest.approx(90.0, abs=1e-12)

    def test_against_haversine_oracle(self):
        a, b = GeoPoint(10, 20), GeoPoint(-40, 55)
        expect = haversine_deg(a, b)
        assert abs(expect - vincenty_deg(a, b)) < 1e-9  # oracle cross-check
        assert great_circle_distance(a, b) == pytest.approx(expect, abs=1e-9)

    @given(geo_points, geo_points)
    @settings(max_examples=200, deadline=None)
    def test_matches_oracles_and_symmetry(self, a, b):
        d = great_circle_distance(a, b)
        assert 0.0 <= d <= 180.0
        assert d == pytest.approx(great_circle_distance(b, a), abs=1e-12)
        assert d == pytest.approx(vincenty_deg(a, b), abs=1e-9)


class TestRotate:
    def test_identity_rotation(self):
        p = GeoPoint(33.0, -14.0)
        q = rotate(p, Rotation3())
        assert abs(q.lon - p.lon) < 1e-12 and abs(q.lat - p.lat) < 1e-12

    def test_centering_definition(self):
        target = GeoPoint(144.96, -37.81)
        r = centering_rotation(target)
        q = rotate(target, r)
        assert abs(q.lon) < 1e-9 and abs(q.lat) < 1e-9

    @given(geo_points, geo_points, st.floats(-180, 180), st.floats(-89, 89), st.floats(-180, 180))
    @settings(max_examples=100, deadline=None)
    def test_isometry(self, p, q, yaw, pitch, roll):
        r = Rotation3(yaw, pitch, roll)
        before = great_circle_distance(p, q)
        after = great_circle_distance(rotate(p, r), rotate(q, r))
        assert after == pytest.approx(before, abs=1e-9)

    @given(geo_points, st.floats(-180, 180), st.floats(-89, 89), st.floats(-180, 180))
    @settings(max_examples=100, deadline=None)
    def test_inverse_roundtrip(self, p, yaw, pitch, roll):
        r = Rotation3(yaw, pitch, roll)
        q = rotate(rotate(p, r), r.inverse())
        assert great_circle_distance(p, q) < 1e-9


class TestCenteringRotation:
    def test_origin_is_identity(self):
        r = centering_rotation(GeoPoint(0, 0))
        assert (r.yaw, r.pitch, r.roll) == (0.0, 0.0, 0.0)

    def test_equatorial_pure_yaw(self):
        r = centering_rotation(GeoPoint(90, 0))
        assert r.yaw == -90.0 and r.pitch == 0.0 and r.roll == 0.0

    def test_postcondition_only(self):
        target = GeoPoint(135, 45)
        q = rotate(target, centering_rotation(target))
        assert abs(q.lon) < 1e-9 and abs(q.lat) < 1e-9

    def test_north_stays_up(self):
        r = centering_rotation(GeoPoint(135, 45))
        pole = rotate(GeoPoint(0, 90), r)
        assert abs(pole.lon) < 1e-6  # pole lands on the central meridian


class TestHammer:
    def test_center(self):
        q = hammer_forward(GeoPoint(0, 0))
        assert q.x == 0.0 and q.y == 0.0

    def test_mirror_symmetry(self):
        for lam, phi in [(30, 10), (120, -40), (179, 60)]:
            a = hammer_forward(GeoPoint(lam, phi))
            b = hammer_forward(GeoPoint(-lam, phi))
            assert a.x == pytest.approx(-b.x, abs=1e-12)
            assert a.y == pytest.approx(b.y, abs=1e-12)

    def test_edge_point_formula_oracle(self):
        # x = 2*sqrt(2)*cos(phi)*sin(lam/2)/sqrt(1+cos(phi)*cos(lam/2)) by hand
        q = hammer_forward(GeoPoint(180, 0))
        assert q.x == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-12)
        assert q.y == pytest.approx(0.0, abs=1e-12)

    def test_inverse_center(self):
        p = hammer_inverse(ProjectedPoint(0, 0))
        assert p.lon == 0.0 and p.lat == 0.0

    def test_out_of_bounds(self):
        with pytest.raises(OutOfBoundsError):
            hammer_inverse(ProjectedPoint(3.0, 0.0))

    def test_roundtrip_1000_points(self):
        rng = random.Random(42)
        for _ in range(1000):
            p = GeoPoint(rng.uniform(-179.9, 179.9), rng.uniform(-89.9, 89.9))
            q = hammer_forward(p)
            assert q.inside_boundary()
            back = hammer_inverse(q)
            assert abs(back.lon - p.lon) < 1e-7
            assert abs(back.lat - p.lat) < 1e-7

    def test_equal_area_property(self):
        # Ratio projected/spherical area constant within 0.5% for small quads.
        rng = random.Random(7)
        ratios = []
        for _ in range(1000):
            lam = rng.uniform(-175.0, 175.0)
            phi = rng.uniform(-85.0, 85.0)
            d = 0.1
            corners = [
                hammer_forward(GeoPoint(lam + dx, phi + dy))
                for dx, dy in [(0, 0), (d, 0), (d, d), (0, d)]
            ]
            area = 0.0
            for (a, b) in zip(corners, corners[1:] + corners[:1]):
                area += a.x * b.y - b.x * a.y
            area = abs(area) / 2.0
            spherical = math.radians(d) * (
                math.sin(math.radians(phi + d)) - math.sin(math.radians(phi))
            )
            ratios.append(area / spherical)
        mean = sum(ratios) / len(ratios)
        worst = max(abs(r - mean) / mean for r in ratios)
        assert worst < 0.005


class TestGraticule:
    def test_spacing_10_counts(self):
        # Enumeration oracle: lines at multiples of 10, poles excluded.
        expect_parallels = len([lat for lat in range(-90, 91, 10) if -90 < lat < 90])
        expect_meridians = len(list(range(-180, 180, 10)))
        g = graticule(10)
        assert len(g.parallels) == expect_parallels == 17
        assert len(g.meridians) == expect_meridians == 36

    def test_spacing_90(self):
        g = graticule(90)
        assert [p.value for p in g.parallels] == [0.0]  # poles degenerate, excluded
        assert len(g.meridians) == 4
        assert g.parallels[0].emphasized  # equator flagged

    def test_invalid_spacing(self):
        with pytest.raises(InvalidSpacingError):
            graticule(7)

    def test_equator_emphasis_flag(self):
        g = graticule(30)
        emphasized = [l for l in g.lines if l.emphasized]
        assert len(emphasized) == 1 and emphasized[0].value == 0.0

    def test_projected_chord_error(self):
        g = graticule(10)
        limit = 0.005 * HAMMER_WIDTH
        for line in g.lines:
            pts = line.points
            for a, b in zip(pts, pts[1:]):
                mid_geo = GeoPoint((a.lon + b.lon) / 2.0, (a.lat + b.lat) / 2.0)
                if abs(a.lon - b.lon) > 180:
                    continue  # antimeridian-adjacent sample
                pa, pb = hammer_forward(a), hammer_forward(b)
                pm = hammer_forward(mid_geo)
                chord_mid = ((pa.x + pb.x) / 2.0, (pa.y + pb.y) / 2.0)
                err = math.hypot(pm.x - chord_mid[0], pm.y - chord_mid[1])
                assert err < limit


class TestAntimeridian:
    def test_crossing_split(self):
        line = [GeoPoint(170, 10), GeoPoint(-170, 12)]
        parts = split_at_antimeridian(line)
        assert len(parts) == 2
        assert parts[0][-1].lon == 180.0
        assert parts[1][0].lon == -180.0
        assert parts[0][-1].lat == pytest.approx(11.0, abs=1e-9)

    def test_no_crossing_untouched(self):
        line = [GeoPoint(10, 0), GeoPoint(20, 5), GeoPoint(15, -3)]
        parts = split_at_antimeridian(line)
        assert len(parts) == 1 and len(parts[0]) == 3


class TestValidation:
    def test_lat_bounds(self):
        with pytest.raises(ValueError):
            GeoPoint(0, 91)

    def test_lon_normalized(self):
        assert GeoPoint(190, 0).lon == pytest.approx(-170.0)
        assert GeoPoint(-200, 0).lon == pytest.approx(160.0)

    def test_projected_point_boundary(self):
        q = hammer_forward(GeoPoint(179.9, 89.0))
        assert q.inside_boundary(tol=1e-9)
