"""Assemble 3D flow-curve batches for a dataset.

Three representations: tubes over a 1 x 0.5 m flat map, tubes over a 0.4 m
globe, and MapsLink tubes between an origin map and a destination map
(0.75 x 0.375 m each, offset +-0.4 m, tilted 30 deg about y and 45 deg
about x).  Scene units are metres.
"""

from __future__ import annotations

import math

from .errors import AntipodalAmbiguityError, LayoutError
from .flow3d import (
    DEFAULT_SAMPLES,
    FlowCurve3D,
    RADIUS_RANGE_FLAT,
    RADIUS_RANGE_GLOBE,
    Point3,
    bezier_flow_on_map,
    globe_tube,
    height_for_encoding,
    maps_link_tube,
)
from .geo import great_circle_distance
from .layouts import _project_regions
from .oddata import FlowDataset

FLAT_MAP_SIZE = (1.0, 0.5)
GLOBE_RADIUS = 0.4
MAPSLINK_MAP_SIZE = (0.75, 0.375)
MAPSLINK_OFFSET = 0.4
MAPSLINK_TILT_Y = math.radians(30.0)
MAPSLINK_TILT_X = math.radians(45.0)

REPRESENTATIONS = ("map", "globe", "mapslink")
ENCODINGS = ("constant", "quantity", "distance")


def _fit_to_quad(proj: dict, size: tuple[float, float]) -> dict[str, tuple[float, float]]:
    x0, y0, x1, y1 = proj["bbox"]
    sx = size[0] / max(x1 - x0, 1e-9)
    sy = size[1] / max(y1 - y0, 1e-9)
    s = min(sx, sy)
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    return {
        rid: ((p[0] - cx) * s, (p[1] - cy) * s) for rid, p in proj["anchors"].items()
    }


def _linear(value: float, domain: tuple[float, float], out_range: tuple[float, float]) -> float:
    lo, hi = domain
    if hi <= lo:
        return out_range[1]
    f = max(0.0, min(1.0, (value - lo) / (hi - lo)))
    return out_range[0] + (out_range[1] - out_range[0]) * f


def _mapslink_plane(side: str):
    """Origin/destination map plane: returns (to_world, normal)."""
    sign = -1.0 if side == "origin" else 1.0
    ty = -sign * MAPSLINK_TILT_Y  # yawed toward the viewer
    cy_, sy_ = math.cos(ty), math.sin(ty)
    cx_, sx_ = math.cos(-MAPSLINK_TILT_X), math.sin(-MAPSLINK_TILT_X)

    def rot(v):
        # Rx then Ry applied to the map-local basis (map initially in the xy plane).
        x, y, z = v
        y, z = y * cx_ - z * sx_, y * sx_ + z * cx_
        x, z = x * cy_ + z * sy_, -x * sy_ + z * cy_
        return (x, y, z)

    centre = (sign * MAPSLINK_OFFSET, 0.0, 0.0)
    ex = rot((1.0, 0.0, 0.0))
    ey = rot((0.0, 1.0, 0.0))
    normal = rot((0.0, 0.0, 1.0))

    def to_world(p: tuple[float, float]):
        return Point3(
            centre[0] + ex[0] * p[0] + ey[0] * p[1],
            centre[1] + ex[1] * p[0] + ey[1] * p[1],
            centre[2] + ex[2] * p[0] + ey[2] * p[1],
        )

    return to_world, normal


def dataset_curves(
    d: FlowDataset,
    representation: str,
    encoding: str = "distance",
    samples: int = DEFAULT_SAMPLES,
) -> list[FlowCurve3D]:
    """One curve per active flow for the requested representation."""
    if representation not in REPRESENTATIONS:
        raise LayoutError(f"unknown representation {representation!r}")
    if encoding not in ENCODINGS:
        raise LayoutError(f"unknown encoding {encoding!r}")
    if not d.flows:
        raise LayoutError("dataset has no flows")
    proj = _project_regions(d)
    mags = [f.magnitude for f in d.flows]
    mag_domain = (min(mags), max(mags))
    flows = sorted(d.flows, key=lambda f: (f.origin, f.dest))

    curves: list[FlowCurve3D] = []
    if representation == "map":
        anchors = _fit_to_quad(proj, FLAT_MAP_SIZE)
        dists = [math.dist(anchors[f.origin], anchors[f.dest]) for f in flows]
        dist_domain = (min(dists), max(dists))
        for f, dist in zip(flows, dists):
            value = {"constant": 0.0, "quantity": f.magnitude, "distance": dist}[encoding]
            domain = mag_domain if encoding == "quantity" else dist_domain
            h = height_for_encoding(value, encoding, domain)
            radius = _linear(f.magnitude, mag_domain, RADIUS_RANGE_FLAT)
            curves.append(
                bezier_flow_on_map(
                    anchors[f.origin],
                    anchors[f.dest],
                    h,
                    flow_id=f"{f.origin}:{f.dest}",
                    encoding=encoding,
                    radius=radius,
                    samples=samples,
                )
            )
    elif representation == "globe":
        region = {r.id: r for r in d.regions}
        arcs = [
            great_circle_distance(region[f.origin].anchor, region[f.dest].anchor)
            for f in flows
        ]
        bad = [
            f"{f.origin}:{f.dest}" for f, arc in zip(flows, arcs) if arc > 179.9
        ]
        if bad:
            raise AntipodalAmbiguityError(
                "antipodal flows cannot be routed on the globe", flows=bad
            )
        arc_domain = (min(arcs), max(arcs))
        for f, arc in zip(flows, arcs):
            value = {"constant": 0.0, "quantity": f.magnitude, "distance": arc}[encoding]
            domain = mag_domain if encoding == "quantity" else arc_domain
            h = height_for_encoding(value, encoding, domain)
            radius = _linear(f.magnitude, mag_domain, RADIUS_RANGE_GLOBE)
            curves.append(
                globe_tube(
                    region[f.origin].anchor,
                    region[f.dest].anchor,
                    GLOBE_RADIUS,
                    h,
                    flow_id=f"{f.origin}:{f.dest}",
                    encoding=encoding,
                    tube_radius=radius,
                    samples=samples,
                )
            )
    else:  # mapslink
        anchors = _fit_to_quad(proj, MAPSLINK_MAP_SIZE)
        to_origin, n_origin = _mapslink_plane("origin")
        to_dest, n_dest = _mapslink_plane("dest")
        for f in flows:
            radius = _linear(f.magnitude, mag_domain, RADIUS_RANGE_GLOBE)
            curves.append(
                maps_link_tube(
                    to_origin(anchors[f.origin]),
                    n_origin,
                    to_dest(anchors[f.dest]),
                    n_dest,
                    flow_id=f"{f.origin}:{f.dest}",
                    encoding=encoding,
                    tube_radius=radius,
                    samples=samples,
                )
            )
    return curves
