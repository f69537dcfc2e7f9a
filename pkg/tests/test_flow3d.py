"""3D flow geometry: Bezier tubes, globe tubes, MapsLink, surface, morph."""

from __future__ import annotations

import math
import random

import pytest

from odflow.errors import AntipodalAmbiguityError, CorrespondenceMismatchError
from odflow.flow3d import (
    CONSTANT_HEIGHT,
    HEIGHT_RANGE,
    Point3,
    bezier_flow_on_map,
    curved_map_surface,
    curves_to_json,
    curves_to_obj,
    globe_tube,
    height_for_encoding,
    maps_link_tube,
    morph,
)
from odflow.geo import GeoPoint
from odflow.scene3d import dataset_curves


def slerp_oracle(a: GeoPoint, b: GeoPoint, t: float):
    """Independent spherical interpolation via rotation about the pair's axis."""
    import numpy as np

    def unit(p):
        lam, phi = math.radians(p.lon), math.radians(p.lat)
        return np.array(
            [math.cos(phi) * math.cos(lam), math.cos(phi) * math.sin(lam), math.sin(phi)]
        )

    va, vb = unit(a), unit(b)
    omega = math.acos(max(-1.0, min(1.0, float(va @ vb))))
    axis = np.cross(va, vb)
    axis = axis / np.linalg.norm(axis)
    ang = t * omega
    # Rodrigues rotation of va about axis by ang
    return (
        va * math.cos(ang)
        + np.cross(axis, va) * math.sin(ang)
        + axis * float(axis @ va) * (1 - math.cos(ang))
    )


class TestBezierFlow:
    def test_endpoints(self):
        c = bezier_flow_on_map((0.1, 0.2), (0.7, -0.1), h=0.12)
        assert c.samples[0] == pytest.approx((0.1, 0.2, 0.0), abs=1e-15)
        assert c.samples[-1] == pytest.approx((0.7, -0.1, 0.0), abs=1e-15)

    def test_zero_height_planar(self):
        c = bezier_flow_on_map((0.0, 0.0), (1.0, 0.0), h=0.0)
        assert all(abs(p[2]) < 1e-15 for p in c.samples)

    def test_apex_height_and_control_factor(self):
        # h = 0.15 gives control height hc = 0.2 and apex exactly 0.15.
        h = 0.15
        c = bezier_flow_on_map((0.0, 0.0), (1.0, 0.0), h=h, samples=65)
        apex = c.samples[32]
        assert apex[2] == pytest.approx(h, abs=1e-12)
        # Recover hc from the curve: z(t) = 3t(1-t)*hc, so hc = z(0.25)/(3*0.25*0.75)
        z_quarter = c.samples[16][2]
        hc = z_quarter / (3 * 0.25 * 0.75)
        assert hc == pytest.approx(4.0 * h / 3.0, abs=1e-12)

    def test_ground_projection_straight(self):
        rng = random.Random(8)
        for _ in range(50):
            a = (rng.uniform(-1, 1), rng.uniform(-0.5, 0.5))
            b = (rng.uniform(-1, 1), rng.uniform(-0.5, 0.5))
            c = bezier_flow_on_map(a, b, h=rng.uniform(0, 0.3))
            dx, dy = b[0] - a[0], b[1] - a[1]
            norm = math.hypot(dx, dy)
            if norm < 1e-12:
                continue
            for p in c.samples:
                cross = (p[0] - a[0]) * dy - (p[1] - a[1]) * dx
                assert abs(cross) / norm < 1e-9

    def test_minimum_samples_enforced(self):
        with pytest.raises(ValueError):
            bezier_flow_on_map((0, 0), (1, 0), h=0.1, samples=10)


class TestHeightEncoding:
    def test_constant(self):
        assert height_for_encoding(123.0, "constant", (0, 1000)) == CONSTANT_HEIGHT == 0.15

    def test_quantity_range_endpoints(self):
        lo, hi = HEIGHT_RANGE
        assert height_for_encoding(5.0, "quantity", (5.0, 50.0)) == pytest.approx(lo)
        assert height_for_encoding(50.0, "quantity", (5.0, 50.0)) == pytest.approx(hi)
        assert (lo, hi) == (0.05, 0.25)

    def test_distance_linear_endpoints(self):
        d = 7.0
        assert height_for_encoding(d, "distance", (d, 2 * d)) == pytest.approx(0.05)
        assert height_for_encoding(2 * d, "distance", (d, 2 * d)) == pytest.approx(0.25)

    def test_unknown_encoding(self):
        with pytest.raises(ValueError):
            height_for_encoding(1.0, "spiral", (0, 1))


class TestGlobeTube:
    def test_radial_profile(self):
        g = globe_tube(GeoPoint(0, 0), GeoPoint(90, 0), radius=0.4, h=0.1, samples=65)
        r0 = math.dist((0, 0, 0), g.samples[0])
        r_mid = math.dist((0, 0, 0), g.samples[32])
        r1 = math.dist((0, 0, 0), g.samples[-1])
        assert r0 == pytest.approx(0.4, abs=1e-9)
        assert r1 == pytest.approx(0.4, abs=1e-9)
        assert r_mid == pytest.approx(0.5, abs=1e-9)

    def test_midpoint_over_great_circle_midpoint(self):
        g = globe_tube(GeoPoint(0, 0), GeoPoint(90, 0), radius=0.4, h=0.1, samples=65)
        mid = g.samples[32]
        r = math.dist((0, 0, 0), mid)
        unit = tuple(v / r for v in mid)
        oracle = slerp_oracle(GeoPoint(0, 0), GeoPoint(90, 0), 0.5)
        for got, want in zip(unit, oracle):
            assert got == pytest.approx(float(want), abs=1e-9)

    def test_bearing_matches_slerp_oracle(self):
        rng = random.Random(19)
        for _ in range(25):
            a = GeoPoint(rng.uniform(-170, 170), rng.uniform(-80, 80))
            b = GeoPoint(rng.uniform(-170, 170), rng.uniform(-80, 80))
            from odflow.geo import great_circle_distance

            if great_circle_distance(a, b) > 179 or great_circle_distance(a, b) < 1:
                continue
            g = globe_tube(a, b, radius=0.4, h=0.08, samples=65)
            for i in (8, 16, 32, 48):
                t = i / 64
                p = g.samples[i]
                r = math.dist((0, 0, 0), p)
                unit = tuple(v / r for v in p)
                oracle = slerp_oracle(a, b, t)
                for got, want in zip(unit, oracle):
                    assert got == pytest.approx(float(want), abs=1e-7)

    def test_antipodal_raises(self):
        with pytest.raises(AntipodalAmbiguityError):
            globe_tube(GeoPoint(0, 0), GeoPoint(180, 0), radius=0.4, h=0.1)


class TestMapsLink:
    def test_coincident_points_degenerate(self):
        c = maps_link_tube(Point3(0.2, 0.1, 0.0), (0, 0, 1), Point3(0.2, 0.1, 0.0), (0, 0, 1))
        assert all(p == (0.2, 0.1, 0.0) for p in c.samples)

    def test_height_proportional_to_distance(self):
        # 1 m apart on facing parallel planes: control raise = 0.05 + 0.45/2.
        c = maps_link_tube(Point3(-0.5, 0, 0), (0, 0, 1), Point3(0.5, 0, 0), (0, 0, 1), samples=65)
        apex_z = c.samples[32][2]
        h = apex_z / 0.75  # z(0.5) = (3/4) * control height
        assert h == pytest.approx(0.275, abs=1e-12)

    def test_endpoints_on_their_maps(self):
        a = Point3(-0.4, 0.1, 0.05)
        b = Point3(0.45, -0.07, 0.2)
        c = maps_link_tube(a, (0, 0.6, 0.8), b, (0.6, 0, 0.8))
        assert c.samples[0] == pytest.approx(a.as_tuple(), abs=1e-15)
        assert c.samples[-1] == pytest.approx(b.as_tuple(), abs=1e-15)


class TestCurvedMapSurface:
    def test_centre_vertex(self):
        rows = curved_map_surface(radius=1.0, grid=(8, 4))
        centre = rows[2][4]
        assert centre.as_tuple() == pytest.approx((0.0, 0.0, 1.0), abs=1e-12)

    def test_corner_angles_default(self):
        rows = curved_map_surface(radius=1.0, grid=(8, 4))
        corner = rows[0][0].as_tuple()
        elev = math.degrees(math.asin(corner[1]))
        az = math.degrees(math.atan2(corner[0], corner[2]))
        assert elev == pytest.approx(-27.0, abs=1e-9)
        assert az == pytest.approx(-54.0, abs=1e-9)

    def test_all_vertices_on_sphere(self):
        rows = curved_map_surface(radius=0.7, grid=(16, 8))
        for row in rows:
            for p in row:
                assert math.dist((0, 0, 0), p.as_tuple()) == pytest.approx(0.7, abs=1e-9)


class TestMorph:
    def test_endpoints_exact(self):
        flat = [(0.0, 0.0, 0.0), (1.0, 2.0, 3.0)]
        globe = [(5.0, 5.0, 5.0), (-1.0, 0.0, 1.0)]
        assert morph(0.0, flat, globe).positions == flat
        assert morph(1.0, flat, globe).positions == globe

    def test_midpoint(self):
        m = morph(0.5, [(0.0, 0.0, 0.0)], [(2.0, 4.0, -2.0)])
        assert m.positions == [(1.0, 2.0, -1.0)]

    def test_mismatch_raises(self):
        with pytest.raises(CorrespondenceMismatchError):
            morph(0.5, [(0, 0, 0)], [(0, 0, 0), (1, 1, 1)])


class TestExports:
    def test_json_and_obj_share_samples(self, au):
        import json

        curves = dataset_curves(au, "map", "constant", samples=33)
        doc = json.loads(curves_to_json(curves))
        obj_text = curves_to_obj(curves[:1], sides=4)
        first = doc["curves"][0]
        assert first["encoding"] == "constant"
        assert len(first["samples"]) == 33
        assert len(first["u"]) == 33 and first["u"][0] == 0.0 and first["u"][-1] == 1.0
        # OBJ ring centroids reproduce the JSON polyline samples.
        verts = []
        for line in obj_text.splitlines():
            if line.startswith("v "):
                verts.append(tuple(float(x) for x in line.split()[1:]))
        ring0 = verts[0:4]
        centroid = tuple(sum(v[i] for v in ring0) / 4 for i in range(3))
        assert centroid == pytest.approx(tuple(first["samples"][0]), abs=1e-6)

    def test_obj_line_endings_and_structure(self, au):
        curves = dataset_curves(au, "globe", "distance", samples=33)
        text = curves_to_obj(curves[:2])
        assert "\r" not in text
        assert text.count("o flow_") == 2
        assert text.endswith("\n")

    def test_constant_encoding_all_apexes_equal(self, au):
        curves = dataset_curves(au, "map", "constant", samples=65)
        for c in curves:
            apex = max(p[2] for p in c.samples)
            assert apex == pytest.approx(0.15, abs=1e-9)

    def test_distance_encoding_monotone_heights(self, au):
        curves = dataset_curves(au, "map", "distance", samples=65)
        items = []
        for c in curves:
            ground = math.dist(
                (c.samples[0][0], c.samples[0][1]), (c.samples[-1][0], c.samples[-1][1])
            )
            apex = max(p[2] for p in c.samples)
            items.append((ground, apex))
        items.sort()
        for (d1, h1), (d2, h2) in zip(items, items[1:]):
            assert h1 <= h2 + 1e-9

    def test_globe_endpoint_radii(self, au):
        curves = dataset_curves(au, "globe", "distance", samples=33)
        for c in curves:
            assert math.dist((0, 0, 0), c.samples[0]) == pytest.approx(0.4, abs=1e-9)
            assert math.dist((0, 0, 0), c.samples[-1]) == pytest.approx(0.4, abs=1e-9)

    def test_radius_range_defaults(self, au):
        flat = dataset_curves(au, "map", "quantity", samples=33)
        for c in flat:
            assert all(0.002 - 1e-12 <= r <= 0.016 + 1e-12 for r in c.radii)
        globe = dataset_curves(au, "globe", "quantity", samples=33)
        for c in globe:
            assert all(0.001 - 1e-12 <= r <= 0.008 + 1e-12 for r in c.radii)
