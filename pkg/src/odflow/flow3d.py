"""3D flow-curve geometry for immersive flow representations.

Flat-map tubes are cubic Bezier curves whose two inner control points sit
directly above the endpoints at h_c = 4/3 * h, which makes the mid-point
height exactly h and the ground projection a straight segment:

    B(t) = (1-t)^3 P0 + 3(1-t)^2 t P1 + 3(1-t) t^2 P2 + t^3 P3

Globe tubes follow the great-circle trajectory with a cubic radial profile

    h_t = ((-|t-0.5| / 0.5)^3 + 1) * h + radius

so the endpoints sit on the surface and the apex at radius + h.  Scene units
are metres.  Export formats: OBJ (octagon cross-section swept along the
curve) and a JSON polyline+radius document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import AntipodalAmbiguityError, CorrespondenceMismatchError, LayoutError
from .geo import GeoPoint, great_circle_distance, _unit_vector
from .jsonutil import canonical_json

DEFAULT_SAMPLES = 65

# Default encoding ranges (metres).
CONSTANT_HEIGHT = 0.15
HEIGHT_RANGE = (0.05, 0.25)
RADIUS_RANGE_FLAT = (0.002, 0.016)  # flat-map tubes: 2mm..16mm
RADIUS_RANGE_GLOBE = (0.001, 0.008)  # globe / MapsLink tubes: 0.1cm..0.8cm
MAPSLINK_HEIGHT_RANGE = (0.05, 0.50)
MAPSLINK_DISTANCE_DOMAIN = (0.0, 2.0)

Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError("non-finite Point3")

    def as_tuple(self) -> Vec3:
        return (self.x, self.y, self.z)


@dataclass
class FlowCurve3D:
    flow_id: str
    encoding: str
    samples: list[Vec3]
    radii: list[float]
    u: list[float] = field(default_factory=list)

    def __post_init__(self):
        if len(self.samples) < 33:
            raise ValueError("FlowCurve3D needs at least 33 samples")
        if not self.u:
            n = len(self.samples)
            self.u = [i / (n - 1) for i in range(n)]

    def to_doc(self) -> dict:
        return {
            "flowId": self.flow_id,
            "encoding": self.encoding,
            "samples": [[p[0], p[1], p[2]] for p in self.samples],
            "radii": list(self.radii),
            "u": list(self.u),
        }


@dataclass
class MorphFrame:
    progress: float
    positions: list[Vec3]


def _bezier3(p0: Vec3, p1: Vec3, p2: Vec3, p3: Vec3, t: float) -> Vec3:
    mt = 1.0 - t
    w0 = mt * mt * mt
    w1 = 3.0 * mt * mt * t
    w2 = 3.0 * mt * t * t
    w3 = t * t * t
    return tuple(
        w0 * p0[c] + w1 * p1[c] + w2 * p2[c] + w3 * p3[c] for c in range(3)
    )


def bezier_flow_on_map(
    origin2d: tuple[float, float],
    dest2d: tuple[float, float],
    h: float,
    flow_id: str = "",
    encoding: str = "constant",
    radius: float = RADIUS_RANGE_FLAT[0],
    samples: int = DEFAULT_SAMPLES,
) -> FlowCurve3D:
    """Flat-map tube: apex height exactly h, ground projection straight."""
    if h < 0:
        raise ValueError("apex height must be >= 0")
    hc = 4.0 * h / 3.0
    p0 = (origin2d[0], origin2d[1], 0.0)
    p3 = (dest2d[0], dest2d[1], 0.0)
    p1 = (origin2d[0], origin2d[1], hc)
    p2 = (dest2d[0], dest2d[1], hc)
    pts = [_bezier3(p0, p1, p2, p3, i / (samples - 1)) for i in range(samples)]
    return FlowCurve3D(flow_id, encoding, pts, [radius] * samples)


def _linear(value: float, domain: tuple[float, float], out_range: tuple[float, float]) -> float:
    lo, hi = domain
    if hi <= lo:
        return out_range[1]  # degenerate domain maps to the range maximum
    f = (value - lo) / (hi - lo)
    return out_range[0] + (out_range[1] - out_range[0]) * max(0.0, min(1.0, f))


def height_for_encoding(
    value: float,
    encoding: str,
    domain: tuple[float, float],
    height_range: tuple[float, float] = HEIGHT_RANGE,
) -> float:
    """Apex height for a flow: constant, or linear in quantity/distance."""
    if encoding == "constant":
        return CONSTANT_HEIGHT
    if encoding in ("quantity", "distance"):
        return _linear(value, domain, height_range)
    raise ValueError(f"unknown height encoding {encoding!r}")


def _slerp(va: Vec3, vb: Vec3, t: float) -> Vec3:
    dot = max(-1.0, min(1.0, sum(a * b for a, b in zip(va, vb))))
    omega = math.acos(dot)
    if omega < 1e-12:
        return va
    s = math.sin(omega)
    fa = math.sin((1.0 - t) * omega) / s
    fb = math.sin(t * omega) / s
    return tuple(fa * a + fb * b for a, b in zip(va, vb))


def globe_tube(
    a: GeoPoint,
    b: GeoPoint,
    radius: float,
    h: float,
    flow_id: str = "",
    encoding: str = "distance",
    tube_radius: float = RADIUS_RANGE_GLOBE[0],
    samples: int = DEFAULT_SAMPLES,
) -> FlowCurve3D:
    """Great-circle tube with cubic height profile above the globe surface."""
    arc = great_circle_distance(a, b)
    if arc > 179.9:
        raise AntipodalAmbiguityError(
            f"arc {arc:.3f} deg is antipodal-ambiguous", flows=[flow_id]
        )
    va = _unit_vector(a)
    vb = _unit_vector(b)
    pts = []
    for i in range(samples):
        t = i / (samples - 1)
        unit = _slerp(va, vb, t)
        profile = (-((abs(t - 0.5) / 0.5) ** 3)) + 1.0
        ht = profile * h + radius
        pts.append((unit[0] * ht, unit[1] * ht, unit[2] * ht))
    return FlowCurve3D(flow_id, encoding, pts, [tube_radius] * samples)


def maps_link_tube(
    origin: Point3,
    origin_normal: Vec3,
    dest: Point3,
    dest_normal: Vec3,
    flow_id: str = "",
    encoding: str = "distance",
    tube_radius: float = RADIUS_RANGE_GLOBE[0],
    samples: int = DEFAULT_SAMPLES,
) -> FlowCurve3D:
    """Tube linking a point on the origin map with one on the destination map.

    Both control points are raised along their map normals to the same
    height, linear in the 3D endpoint distance (0..2 m -> 5..50 cm).
    """
    p0 = origin.as_tuple()
    p3 = dest.as_tuple()
    dist = math.dist(p0, p3)
    h = _linear(dist, MAPSLINK_DISTANCE_DOMAIN, MAPSLINK_HEIGHT_RANGE)
    if dist < 1e-12:
        pts = [p0] * DEFAULT_SAMPLES
        return FlowCurve3D(flow_id, encoding, pts, [tube_radius] * DEFAULT_SAMPLES)
    p1 = tuple(p0[c] + origin_normal[c] * h for c in range(3))
    p2 = tuple(p3[c] + dest_normal[c] * h for c in range(3))
    pts = [_bezier3(p0, p1, p2, p3, i / (samples - 1)) for i in range(samples)]
    return FlowCurve3D(flow_id, encoding, pts, [tube_radius] * samples)


def curved_map_surface(
    radius: float = 1.0,
    h_angle: float = 108.0,
    v_angle: float = 54.0,
    grid: tuple[int, int] = (64, 32),
) -> list[list[Point3]]:
    """Spherical-section mesh the Hammer map is linearly mapped onto.

    Viewer at the origin facing +z; u maps linearly to azimuth in
    [-h_angle/2, h_angle/2], v to elevation in [-v_angle/2, v_angle/2].
    """
    if not (0 < h_angle < 180 and 0 < v_angle < 180):
        raise LayoutError("section angles must be in (0, 180)")
    nu, nv = grid
    rows = []
    for iv in range(nv + 1):
        elev = math.radians(-v_angle / 2.0 + v_angle * iv / nv)
        row = []
        for iu in range(nu + 1):
            az = math.radians(-h_angle / 2.0 + h_angle * iu / nu)
            row.append(
                Point3(
                    radius * math.cos(elev) * math.sin(az),
                    radius * math.sin(elev),
                    radius * math.cos(elev) * math.cos(az),
                )
            )
        rows.append(row)
    return rows


def morph(u: float, flat_scene: list[Vec3], globe_scene: list[Vec3]) -> MorphFrame:
    """Per-vertex linear interpolation between two corresponding scenes."""
    if len(flat_scene) != len(globe_scene):
        raise CorrespondenceMismatchError(
            f"{len(flat_scene)} vs {len(globe_scene)} vertices"
        )
    if not 0.0 <= u <= 1.0:
        raise ValueError("morph progress must be in [0, 1]")
    positions = [
        tuple(a[c] + u * (b[c] - a[c]) for c in range(3))
        for a, b in zip(flat_scene, globe_scene)
    ]
    return MorphFrame(u, positions)


# ---------------------------------------------------------------------------
# export


def curves_to_json(curves: list[FlowCurve3D]) -> str:
    return canonical_json({"curves": [c.to_doc() for c in curves]})


def _tube_frame(tangent: Vec3) -> tuple[Vec3, Vec3]:
    """Two unit vectors spanning the plane orthogonal to the tangent."""
    tx, ty, tz = tangent
    n = math.sqrt(tx * tx + ty * ty + tz * tz)
    if n < 1e-12:
        return (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)
    t = (tx / n, ty / n, tz / n)
    up = (0.0, 0.0, 1.0) if abs(t[2]) < 0.9 else (0.0, 1.0, 0.0)
    bx = t[1] * up[2] - t[2] * up[1]
    by = t[2] * up[0] - t[0] * up[2]
    bz = t[0] * up[1] - t[1] * up[0]
    bn = math.sqrt(bx * bx + by * by + bz * bz)
    b = (bx / bn, by / bn, bz / bn)
    nx = b[1] * t[2] - b[2] * t[1]
    ny = b[2] * t[0] - b[0] * t[2]
    nz = b[0] * t[1] - b[1] * t[0]
    return b, (nx, ny, nz)


def curves_to_obj(curves: list[FlowCurve3D], sides: int = 8) -> str:
    """Wavefront OBJ export: octagon cross-section swept along each curve."""
    lines: list[str] = ["# odflow tube export"]
    v_count = 0
    for curve in curves:
        lines.append(f"o flow_{curve.flow_id or 'curve'}")
        pts = curve.samples
        ring_starts = []
        for i, p in enumerate(pts):
            prev_p = pts[max(0, i - 1)]
            next_p = pts[min(len(pts) - 1, i + 1)]
            tangent = tuple(next_p[c] - prev_p[c] for c in range(3))
            e1, e2 = _tube_frame(tangent)
            r = curve.radii[i] if i < len(curve.radii) else curve.radii[-1]
            ring_starts.append(v_count + 1)
            for s in range(sides):
                ang = 2.0 * math.pi * s / sides
                ca, sa = math.cos(ang), math.sin(ang)
                nx = e1[0] * ca + e2[0] * sa
                ny = e1[1] * ca + e2[1] * sa
                nz = e1[2] * ca + e2[2] * sa
                lines.append(
                    "v %.6f %.6f %.6f" % (p[0] + r * nx, p[1] + r * ny, p[2] + r * nz)
                )
                lines.append("vn %.6f %.6f %.6f" % (nx, ny, nz))
                v_count += 1
        for i in range(len(pts) - 1):
            a0 = ring_starts[i]
            b0 = ring_starts[i + 1]
            for s in range(sides):
                s2 = (s + 1) % sides
                q = (a0 + s, a0 + s2, b0 + s2, b0 + s)
                lines.append(
                    "f " + " ".join(f"{idx}//{idx}" for idx in q)
                )
    return "\n".join(lines) + "\n"
