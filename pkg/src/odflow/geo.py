"""Spherical geometry, Hammer projection, geo-rotation and graticules.

All angles at the API are degrees.  Rotations are held internally as unit
quaternions to avoid gimbal problems; the public representation is three
Euler angles (roll about x, pitch about y, yaw about z, applied to a
geocentric unit vector as Rx(roll) @ Ry(pitch) @ Rz(yaw) @ v).

Hammer projection, standard forward formulas:

    gamma = sqrt(1 + cos(lat) * cos(lon/2))
    x = 2*sqrt(2) * cos(lat) * sin(lon/2) / gamma      in [-2*sqrt(2), 2*sqrt(2)]
    y = sqrt(2) * sin(lat) / gamma                     in [-sqrt(2), sqrt(2)]

closed-form inverse:

    z = sqrt(1 - (x/4)^2 - (y/2)^2)
    lon = 2 * atan2(z*x, 2*(2*z^2 - 1))
    lat = asin(z*y)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidSpacingError, OutOfBoundsError

# Tolerances: exact-geometry assertions vs projection round-trips.
EXACT_TOL_DEG = 1e-9
ROUNDTRIP_TOL = 1e-7

HAMMER_X_MAX = 2.0 * math.sqrt(2.0)
HAMMER_Y_MAX = math.sqrt(2.0)


def normalize_lon(lon: float) -> float:
    """Wrap a longitude into [-180, 180]."""
    if -180.0 <= lon <= 180.0:
        return lon
    wrapped = math.fmod(lon + 180.0, 360.0)
    if wrapped < 0:
        wrapped += 360.0
    return wrapped - 180.0


@dataclass(frozen=True)
class GeoPoint:
    lon: float
    lat: float

    def __post_init__(self):
        if not (math.isfinite(self.lon) and math.isfinite(self.lat)):
            raise ValueError(f"non-finite coordinates ({self.lon}, {self.lat})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        object.__setattr__(self, "lon", normalize_lon(self.lon))


@dataclass(frozen=True)
class ProjectedPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("non-finite projected point")

    def inside_boundary(self, tol: float = 1e-9) -> bool:
        return self.x * self.x / 8.0 + self.y * self.y / 2.0 <= 1.0 + tol


def _unit_vector(p: GeoPoint) -> tuple[float, float, float]:
    lam = math.radians(p.lon)
    phi = math.radians(p.lat)
    return (math.cos(phi) * math.cos(lam), math.cos(phi) * math.sin(lam), math.sin(phi))


def _from_unit_vector(v: tuple[float, float, float]) -> GeoPoint:
    x, y, z = v
    n = math.sqrt(x * x + y * y + z * z)
    z = min(1.0, max(-1.0, z / n))
    lat = math.degrees(math.asin(z))
    lon = math.degrees(math.atan2(y / n, x / n))
    return GeoPoint(lon, lat)


def _quat_mul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def _axis_quat(axis: int, degrees: float):
    half = math.radians(degrees) / 2.0
    q = [math.cos(half), 0.0, 0.0, 0.0]
    q[1 + axis] = math.sin(half)
    return tuple(q)


def _quat_rotate(q, v):
    w, x, y, z = q
    vx, vy, vz = v
    # v' = v + 2*q_vec x (q_vec x v + w*v)
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    return (
        vx + w * tx + (y * tz - z * ty),
        vy + w * ty + (z * tx - x * tz),
        vz + w * tz + (x * ty - y * tx),
    )


@dataclass(frozen=True)
class Rotation3:
    """Euler angles in degrees; applied as Rx(roll) @ Ry(pitch) @ Rz(yaw)."""

    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def quaternion(self):
        return _quat_mul(
            _axis_quat(0, self.roll),
            _quat_mul(_axis_quat(1, self.pitch), _axis_quat(2, self.yaw)),
        )

    def inverse(self) -> "Rotation3":
        w, x, y, z = self.quaternion()
        return _rotation_from_quat((w, -x, -y, -z))

    def compose(self, first: "Rotation3") -> "Rotation3":
        """Rotation equivalent to applying `first`, then `self`."""
        return _rotation_from_quat(_quat_mul(self.quaternion(), first.quaternion()))


def _rotation_from_quat(q) -> Rotation3:
    w, x, y, z = q
    n = math.sqrt(w * w + x * x + y * y + z * z)
    w, x, y, z = w / n, x / n, y / n, z / n
    # Rotation matrix entries needed for the Rx*Ry*Rz factorization:
    # m02 = sin(pitch); m01 = -cos(pitch) sin(yaw); m00 = cos(pitch) cos(yaw)
    # m12 = -sin(roll) cos(pitch); m22 = cos(roll) cos(pitch)
    m00 = 1.0 - 2.0 * (y * y + z * z)
    m01 = 2.0 * (x * y - w * z)
    m02 = 2.0 * (x * z + w * y)
    m12 = 2.0 * (y * z - w * x)
    m22 = 1.0 - 2.0 * (x * x + y * y)
    m10 = 2.0 * (x * y + w * z)
    m11 = 1.0 - 2.0 * (x * x + z * z)
    sp = min(1.0, max(-1.0, m02))
    pitch = math.asin(sp)
    if abs(sp) < 1.0 - 1e-12:
        yaw = math.atan2(-m01, m00)
        roll = math.atan2(-m12, m22)
    else:
        # Gimbal lock: pitch = +-90, yaw and roll share an axis; pick roll = 0.
        yaw = math.atan2(m10, m11)
        roll = 0.0
    return Rotation3(math.degrees(yaw), math.degrees(pitch), math.degrees(roll))


IDENTITY_ROTATION = Rotation3(0.0, 0.0, 0.0)


def great_circle_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Central angle between two points, in degrees of arc, in [0, 180]."""
    va = _unit_vector(a)
    vb = _unit_vector(b)
    cx = va[1] * vb[2] - va[2] * vb[1]
    cy = va[2] * vb[0] - va[0] * vb[2]
    cz = va[0] * vb[1] - va[1] * vb[0]
    cross = math.sqrt(cx * cx + cy * cy + cz * cz)
    dot = va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2]
    return math.degrees(math.atan2(cross, dot))


def rotate(p: GeoPoint, r: Rotation3) -> GeoPoint:
    return _from_unit_vector(_quat_rotate(r.quaternion(), _unit_vector(p)))


def centering_rotation(target: GeoPoint) -> Rotation3:
    """Rotation taking `target` to (0, 0), north kept up for non-polar targets.

    Roll is fixed to 0; for |lat| > 89.9 the roll is 0 by convention (any
    meridian may serve as "up" at the poles).
    """
    return Rotation3(yaw=-target.lon, pitch=target.lat, roll=0.0)


def hammer_forward(p: GeoPoint) -> ProjectedPoint:
    lam = math.radians(p.lon)
    phi = math.radians(p.lat)
    gamma = math.sqrt(1.0 + math.cos(phi) * math.cos(lam / 2.0))
    x = HAMMER_X_MAX * math.cos(phi) * math.sin(lam / 2.0) / gamma
    y = HAMMER_Y_MAX * math.sin(phi) / gamma
    return ProjectedPoint(x, y)


def hammer_inverse(q: ProjectedPoint) -> GeoPoint:
    if not q.inside_boundary():
        raise OutOfBoundsError(f"point ({q.x}, {q.y}) outside the Hammer ellipse")
    z2 = 1.0 - (q.x / 4.0) ** 2 - (q.y / 2.0) ** 2
    z = math.sqrt(max(0.0, z2))
    lon = 2.0 * math.atan2(z * q.x, 2.0 * (2.0 * z2 - 1.0))
    lat = math.asin(min(1.0, max(-1.0, z * q.y)))
    return GeoPoint(math.degrees(lon), math.degrees(lat))


@dataclass(frozen=True)
class GraticuleLine:
    kind: str  # "meridian" | "parallel"
    value: float  # the fixed lon (meridian) or lat (parallel)
    points: tuple[GeoPoint, ...]
    emphasized: bool = False


@dataclass(frozen=True)
class Graticule:
    spacing: float
    lines: tuple[GraticuleLine, ...]

    @property
    def meridians(self) -> list[GraticuleLine]:
        return [l for l in self.lines if l.kind == "meridian"]

    @property
    def parallels(self) -> list[GraticuleLine]:
        return [l for l in self.lines if l.kind == "parallel"]


# Sampling step keeps the projected chord error far below 0.5% of map width.
_GRATICULE_STEP = 2.0


def graticule(spacing: float, equator_emphasis: bool = True) -> Graticule:
    """Meridians/parallels every `spacing` degrees; poles excluded.

    `spacing` must exactly divide 90.
    """
    if spacing <= 0 or abs(90.0 / spacing - round(90.0 / spacing)) > 1e-12:
        raise InvalidSpacingError(f"spacing {spacing} does not divide 90")
    step = min(_GRATICULE_STEP, spacing)
    lines: list[GraticuleLine] = []
    nlat = int(round(90.0 / spacing))
    for i in range(-nlat + 1, nlat):  # parallels strictly between the poles
        lat = i * spacing
        pts = []
        t = -180.0
        while t < 180.0 - 1e-9:
            pts.append(GeoPoint(t, lat))
            t += step
        pts.append(GeoPoint(180.0, lat))
        lines.append(
            GraticuleLine("parallel", lat, tuple(pts), emphasized=equator_emphasis and lat == 0.0)
        )
    nlon = int(round(360.0 / spacing))
    for j in range(nlon):
        lon = -180.0 + j * spacing
        pts = []
        t = -90.0
        while t < 90.0 - 1e-9:
            pts.append(GeoPoint(lon, t))
            t += step
        pts.append(GeoPoint(lon, 90.0))
        lines.append(GraticuleLine("meridian", lon, tuple(pts)))
    return Graticule(spacing, tuple(lines))


def split_at_antimeridian(points: list[GeoPoint]) -> list[list[GeoPoint]]:
    """Split a polyline where consecutive points jump across +-180 longitude.

    Prevents horizontal streaks when projecting paths that wrap the flat map
    edge; the split inserts interpolated points on both sides of the cut.
    """
    if not points:
        return []
    parts: list[list[GeoPoint]] = [[points[0]]]
    for prev, cur in zip(points, points[1:]):
        dlon = cur.lon - prev.lon
        if abs(dlon) > 180.0:
            # Crossing: interpolate latitude at the cut.
            if prev.lon > 0:
                span = (180.0 - prev.lon) + (cur.lon + 180.0)
                f = (180.0 - prev.lon) / span if span else 0.0
                edge_prev, edge_cur = 180.0, -180.0
            else:
                span = (prev.lon + 180.0) + (180.0 - cur.lon)
                f = (prev.lon + 180.0) / span if span else 0.0
                edge_prev, edge_cur = -180.0, 180.0
            lat_cut = prev.lat + f * (cur.lat - prev.lat)
            parts[-1].append(GeoPoint(edge_prev, lat_cut))
            parts.append([GeoPoint(edge_cur, lat_cut), cur])
        else:
            parts[-1].append(cur)
    return parts
