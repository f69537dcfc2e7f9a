"""One-sided boundary labeling: crossing-free leader placement.

Leaders connect map anchor sites to matrix-edge ports.  Each leader is one
diagonal segment of uniform gradient +-k followed by one horizontal segment
ending at its port.  Coordinates are map-plane (y up).

Ordering construction: sites sorted by y (ties by x, then id) are matched to
ports in y order.  With that matching, leaders of opposite orientation can
never cross and the vertical strips of orientation bands are pairwise
disjoint, so any remaining crossing is a same-orientation pair inside one
band.  Swapping the ports of such a pair keeps both orientations, leaves the
band strips untouched and strictly reduces the number of support-line
inversions inside the band, so the repair loop below terminates with zero
crossings.  Routing re-checks the result with a segment-intersection test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleGeometryError

Point = tuple[float, float]

_EPS = 1e-12


@dataclass(frozen=True)
class MatrixEdge:
    """Ports along the matrix edge, ordered with strictly decreasing y."""

    ports: tuple[Point, ...]

    def __post_init__(self):
        ys = [p[1] for p in self.ports]
        if any(b >= a - _EPS for a, b in zip(ys, ys[1:])):
            raise InfeasibleGeometryError(
                "matrix edge ports must have strictly decreasing y (edge too short "
                "for the required port pitch)"
            )


@dataclass(frozen=True)
class Leader:
    region_id: str
    index: int  # position in the ordering / port index
    site: Point
    bend: Point
    port: Point
    orientation: str  # "up" | "down"
    band: int

    @property
    def points(self) -> tuple[Point, Point, Point]:
        return (self.site, self.bend, self.port)


@dataclass(frozen=True)
class Band:
    id: int
    orientation: str
    start: int  # first ordering index in the band
    end: int  # last ordering index (inclusive)
    strip_top: float
    strip_bottom: float
    # Separating lines shared with the neighbouring bands (None at the outside).
    line_above: float | None = None
    line_below: float | None = None


@dataclass(frozen=True)
class FreeRect:
    """Axis-aligned rectangle a connection site may move in.

    (bu_x, bu_y) is the upper-left corner, (bb_x, bb_y) the bottom-right
    (y up, so bu_y >= bb_y).  `pruned` marks the degenerate fallback where
    the rectangle collapsed to the site point.
    """

    bu_x: float
    bu_y: float
    bb_x: float
    bb_y: float
    pruned: bool = False

    @property
    def collapsed(self) -> bool:
        return self.bu_x >= self.bb_x - _EPS and self.bu_y <= self.bb_y + _EPS

    def contains(self, p: Point, tol: float = 1e-9) -> bool:
        return (
            self.bu_x - tol <= p[0] <= self.bb_x + tol
            and self.bb_y - tol <= p[1] <= self.bu_y + tol
        )


@dataclass
class LeaderPlan:
    ordering: tuple[str, ...]
    leaders: tuple[Leader, ...]
    bands: tuple[Band, ...]
    k: float
    edge: MatrixEdge
    free_rects: dict[str, FreeRect] = field(default_factory=dict)

    def leader_for(self, region_id: str) -> Leader:
        for l in self.leaders:
            if l.region_id == region_id:
                return l
        raise KeyError(region_id)


# ---------------------------------------------------------------------------
# segment intersection


def _orient(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """True when the closed segments share any point (degenerate-safe)."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True

    def on_segment(a: Point, b: Point, c: Point) -> bool:
        return (
            min(a[0], b[0]) - _EPS <= c[0] <= max(a[0], b[0]) + _EPS
            and min(a[1], b[1]) - _EPS <= c[1] <= max(a[1], b[1]) + _EPS
        )

    if d1 == 0 and on_segment(q1, q2, p1):
        return True
    if d2 == 0 and on_segment(q1, q2, p2):
        return True
    if d3 == 0 and on_segment(p1, p2, q1):
        return True
    if d4 == 0 and on_segment(p1, p2, q2):
        return True
    return False


def leaders_cross(a: tuple[Point, ...], b: tuple[Point, ...]) -> bool:
    for s1, s2 in zip(a, a[1:]):
        if abs(s1[0] - s2[0]) < _EPS and abs(s1[1] - s2[1]) < _EPS:
            continue
        for t1, t2 in zip(b, b[1:]):
            if abs(t1[0] - t2[0]) < _EPS and abs(t1[1] - t2[1]) < _EPS:
                continue
            if segments_intersect(s1, s2, t1, t2):
                return True
    return False


def crossing_pairs(polylines: list[tuple[Point, ...]]) -> list[tuple[int, int]]:
    out = []
    for i in range(len(polylines)):
        for j in range(i + 1, len(polylines)):
            if leaders_cross(polylines[i], polylines[j]):
                out.append((i, j))
    return out


# ---------------------------------------------------------------------------
# ordering and routing


def _route_one(site: Point, port: Point, k: float) -> tuple[Point, str]:
    dy = port[1] - site[1]
    orientation = "up" if dy >= 0 else "down"
    bend = (site[0] + abs(dy) / k, port[1])
    return bend, orientation


def _route_points(
    anchors: dict[str, Point], ordering: list[str], ports: tuple[Point, ...], k: float
) -> list[tuple[Point, Point, Point]]:
    pts = []
    for i, rid in enumerate(ordering):
        site = anchors[rid]
        bend, _ = _route_one(site, ports[i], k)
        pts.append((site, bend, ports[i]))
    return pts


def _conflict_pairs(
    b: np.ndarray, u: np.ndarray, dd: np.ndarray, Y: np.ndarray
) -> np.ndarray:
    """Index pairs (i, j), i < j in port order, whose leaders (may) cross.

    Conservative, port-x-free conditions; i is the upper-port leader.
    Both up:   site(i) below port(j)'s height and up-support inversion.
    Both down: site(j) above port(i)'s height and down-support inversion.
    Mixed pairs cannot cross under a y-sorted matching (band strips are
    disjoint) and swaps below preserve that invariant.
    """
    up = b <= Y
    upi = up[:, None]
    upj = up[None, :]
    uu = upi & upj & (b[:, None] < Y[None, :]) & (u[:, None] < u[None, :] - 1e-12)
    ddn = ~upi & ~upj & (b[None, :] > Y[:, None]) & (dd[None, :] > dd[:, None] + 1e-12)
    conflict = np.triu(uu | ddn, k=1)
    return np.argwhere(conflict)


def compute_ordering(
    anchors: list[tuple[str, Point]], edge: MatrixEdge, k: float = 1.0
) -> list[str]:
    """Permutation of region ids giving crossing-free leaders for `edge`."""
    if not anchors:
        return []
    if len(anchors) != len(edge.ports):
        raise InfeasibleGeometryError(
            f"{len(anchors)} anchors but {len(edge.ports)} ports"
        )
    ids = [a[0] for a in anchors]
    if len(set(ids)) != len(ids):
        raise ValueError("anchor ids must be distinct")
    by_id = dict(anchors)
    ordering = sorted(ids, key=lambda r: (-by_id[r][1], by_id[r][0], r))
    n = len(ordering)
    Y = np.asarray([p[1] for p in edge.ports])
    ax = np.asarray([by_id[r][0] for r in ordering])
    ay = np.asarray([by_id[r][1] for r in ordering])
    u = ay - k * ax
    dd = ay + k * ax
    order = np.arange(n)
    cap = 4 * n * n + 16
    for _ in range(cap):
        pairs = _conflict_pairs(ay[order], u[order], dd[order], Y)
        if pairs.size == 0:
            return [ordering[idx] for idx in order]
        # Swap a maximal set of disjoint conflicting pairs per pass.
        used: set[int] = set()
        for i, j in pairs:
            if i in used or j in used:
                continue
            order[i], order[j] = order[j], order[i]
            used.add(int(i))
            used.add(int(j))
    # Analytic repair stalled (ties in support values); fall back to swaps
    # driven by the exact segment-intersection test.
    ordering = [ordering[idx] for idx in order]
    for _ in range(cap):
        pts = _route_points(by_id, ordering, edge.ports, k)
        pairs_geo = crossing_pairs(pts)
        if not pairs_geo:
            return ordering
        i, j = pairs_geo[0]
        ordering[i], ordering[j] = ordering[j], ordering[i]
    raise InfeasibleGeometryError("crossing repair did not converge")


def route_leaders(
    anchors: list[tuple[str, Point]],
    ordering: list[str],
    edge: MatrixEdge,
    k: float = 1.0,
) -> LeaderPlan:
    """Route diagonal+horizontal leaders for a given ordering."""
    if k <= 0:
        raise ValueError("diagonal gradient k must be positive")
    by_id = dict(anchors)
    if sorted(by_id) != sorted(ordering):
        raise ValueError("ordering must be a permutation of anchor ids")
    n = len(ordering)
    if n != len(edge.ports):
        raise InfeasibleGeometryError(f"{n} anchors but {len(edge.ports)} ports")

    routed = []
    for i, rid in enumerate(ordering):
        site = by_id[rid]
        port = edge.ports[i]
        bend, orientation = _route_one(site, port, k)
        if bend[0] > port[0] + 1e-9:
            raise InfeasibleGeometryError(
                f"leader {rid}: diagonal overshoots its port "
                f"(needs {bend[0]:.4f} <= {port[0]:.4f}); widen the map-matrix gap"
            )
        routed.append((rid, i, site, bend, port, orientation))

    # Bands: maximal runs of equal orientation in port order.
    band_of: list[int] = []
    band_runs: list[tuple[str, int, int]] = []
    for i, item in enumerate(routed):
        if i == 0 or item[5] != routed[i - 1][5]:
            band_runs.append((item[5], i, i))
        else:
            orientation, start, _ = band_runs[-1]
            band_runs[-1] = (orientation, start, i)
        band_of.append(len(band_runs) - 1)

    strips: list[tuple[float, float]] = []  # (top, bottom) per band
    for orientation, start, end in band_runs:
        members = routed[start : end + 1]
        site_ys = [m[2][1] for m in members]
        port_ys = [m[4][1] for m in members]
        if orientation == "up":
            strips.append((max(port_ys), min(site_ys)))
        else:
            strips.append((max(site_ys), min(port_ys)))

    lines: list[float | None] = [None] * (len(band_runs) + 1)
    for b in range(len(band_runs) - 1):
        upper_bottom = strips[b][1]
        lower_top = strips[b + 1][0]
        lines[b + 1] = (upper_bottom + lower_top) / 2.0

    bands = tuple(
        Band(
            id=b,
            orientation=band_runs[b][0],
            start=band_runs[b][1],
            end=band_runs[b][2],
            strip_top=strips[b][0],
            strip_bottom=strips[b][1],
            line_above=lines[b],
            line_below=lines[b + 1],
        )
        for b in range(len(band_runs))
    )
    leaders = tuple(
        Leader(rid, i, site, bend, port, orientation, band_of[i])
        for (rid, i, site, bend, port, orientation) in routed
    )
    plan = LeaderPlan(tuple(ordering), leaders, bands, k, edge)
    if crossing_pairs([l.points for l in leaders]):
        raise InfeasibleGeometryError("routing produced crossing leaders")
    return plan


# ---------------------------------------------------------------------------
# free rectangles


class _PolygonTester:
    """Vectorized even-odd containment and edge-crossing tests."""

    def __init__(self, rings: list[list[Point]]):
        segs_a = []
        segs_b = []
        for ring in rings:
            pts = list(ring)
            if pts[0] != pts[-1]:
                pts.append(pts[0])
            for a, b in zip(pts, pts[1:]):
                segs_a.append(a)
                segs_b.append(b)
        self.a = np.asarray(segs_a, dtype=float)
        self.b = np.asarray(segs_b, dtype=float)

    def contains(self, x: float, y: float) -> bool:
        ay, by = self.a[:, 1], self.b[:, 1]
        ax, bx = self.a[:, 0], self.b[:, 0]
        mask = (ay > y) != (by > y)
        if not mask.any():
            return False
        t = (y - ay[mask]) / (by[mask] - ay[mask])
        xs = ax[mask] + t * (bx[mask] - ax[mask])
        return bool(np.count_nonzero(xs > x) % 2 == 1)

    def _segments_cross(self, p: np.ndarray, q: np.ndarray) -> bool:
        a, b = self.a, self.b

        def orient(u, v, w):
            return (v[..., 0] - u[..., 0]) * (w[..., 1] - u[..., 1]) - (
                v[..., 1] - u[..., 1]
            ) * (w[..., 0] - u[..., 0])

        d1 = orient(a, b, p)
        d2 = orient(a, b, q)
        d3 = orient(p, q, a)
        d4 = orient(p, q, b)
        proper = ((d1 > 0) != (d2 > 0)) & (d1 != 0) & (d2 != 0)
        proper &= ((d3 > 0) != (d4 > 0)) & (d3 != 0) & (d4 != 0)
        return bool(proper.any())

    def rect_inside(self, x0: float, y0: float, x1: float, y1: float) -> bool:
        """True when the rectangle [x0,x1] x [y0,y1] lies inside the polygon."""
        for cx, cy in ((x0, y0), (x0, y1), (x1, y0), (x1, y1)):
            if not self.contains(cx, cy):
                return False
        corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]
        for p, q in zip(corners, corners[1:]):
            if self._segments_cross(np.asarray(p, float), np.asarray(q, float)):
                return False
        return True


def _segment_point_distance(p: Point, a: Point, b: Point) -> float:
    ax, ay = a
    bx, by = b
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    if L2 < _EPS:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = max(0.0, min(1.0, ((p[0] - ax) * vx + (p[1] - ay) * vy) / L2))
    return math.hypot(p[0] - (ax + t * vx), p[1] - (ay + t * vy))


def _segment_rect_distance(a: Point, b: Point, x0, y0, x1, y1) -> float:
    # 0 when the segment touches/enters the rect; else min corner/edge distance.
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    edges = list(zip(corners, corners[1:] + corners[:1]))
    if x0 <= a[0] <= x1 and y0 <= a[1] <= y1:
        return 0.0
    if x0 <= b[0] <= x1 and y0 <= b[1] <= y1:
        return 0.0
    for p, q in edges:
        if segments_intersect(a, b, p, q):
            return 0.0
    best = min(_segment_point_distance(c, a, b) for c in corners)
    for p in (a, b):
        for e0, e1 in edges:
            best = min(best, _segment_point_distance(p, e0, e1))
    return best


def grow_raw_rect(
    boundary: list[list[Point]], site: Point, iterations: int = 20
) -> FreeRect:
    """Maximal axis-aligned rectangle centred on `site` inside the polygon.

    Alternating binary search between the width and height axes; `boundary`
    is a list of rings (outer ring first).  A site outside the polygon yields
    the collapsed fallback.
    """
    tester = _PolygonTester(boundary)
    sx, sy = site
    if not tester.contains(sx, sy):
        return FreeRect(sx, sy, sx, sy, pruned=True)

    pts = np.asarray([p for ring in boundary for p in ring], dtype=float)
    max_hw = float(max(pts[:, 0].max() - sx, sx - pts[:, 0].min()))
    max_hh = float(max(pts[:, 1].max() - sy, sy - pts[:, 1].min()))

    hw, hh = 0.0, 0.0
    per_round = max(1, iterations // 2)
    for axis in ("x", "y", "x", "y"):
        lo = hw if axis == "x" else hh
        hi = max_hw if axis == "x" else max_hh
        for _ in range(per_round):
            mid = (lo + hi) / 2.0
            if axis == "x":
                ok = tester.rect_inside(sx - mid, sy - hh, sx + mid, sy + hh)
            else:
                ok = tester.rect_inside(sx - hw, sy - mid, sx + hw, sy + mid)
            if ok:
                lo = mid
            else:
                hi = mid
        if axis == "x":
            hw = lo
        else:
            hh = lo

    return FreeRect(sx - hw, sy + hh, sx + hw, sy - hh, pruned=False)


def prune_free_rect(
    rect: FreeRect,
    site: Point,
    other_leaders: list[tuple[Point, ...]],
    d_b: float,
) -> FreeRect:
    """Shrink a rect so every interior point keeps >= d_b from other leaders.

    Clipping against the offset of each near segment's support line is
    conservative (distance to the line bounds distance to the segment); the
    collapsed fallback applies when the site itself is too close.
    """
    sx, sy = site
    if rect.collapsed:
        return rect
    x0, x1 = rect.bu_x, rect.bb_x
    y0, y1 = rect.bb_y, rect.bu_y

    segments: list[tuple[Point, Point]] = []
    for poly in other_leaders:
        for a, b in zip(poly, poly[1:]):
            if abs(a[0] - b[0]) > _EPS or abs(a[1] - b[1]) > _EPS:
                segments.append((a, b))

    if segments:
        # Bounding-box prefilter: only segments whose inflated bbox meets the
        # rect can come within d_b of it.
        arr = np.asarray(segments)  # (m, 2, 2)
        sminx = arr[:, :, 0].min(axis=1) - d_b
        smaxx = arr[:, :, 0].max(axis=1) + d_b
        sminy = arr[:, :, 1].min(axis=1) - d_b
        smaxy = arr[:, :, 1].max(axis=1) + d_b
        near = (sminx <= x1) & (smaxx >= x0) & (sminy <= y1) & (smaxy >= y0)
        segments = [segments[i] for i in np.flatnonzero(near)]

    for a, b in segments:
        if x0 >= x1 - _EPS and y0 >= y1 - _EPS:
            break
        if _segment_rect_distance(a, b, x0, y0, x1, y1) >= d_b:
            continue
        if _segment_point_distance(site, a, b) < d_b:
            return FreeRect(sx, sy, sx, sy, pruned=True)
        # Support line n.(x,y) = c with |n| = 1, oriented toward the site side.
        vx, vy = b[0] - a[0], b[1] - a[1]
        L = math.hypot(vx, vy)
        nx, ny = -vy / L, vx / L
        c = nx * a[0] + ny * a[1]
        if nx * sx + ny * sy - c < 0:
            nx, ny, c = -nx, -ny, -c
        for _ in range(2):
            corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
            worst = min(nx * cx + ny * cy - c for cx, cy in corners)
            if worst >= d_b - 1e-12:
                break
            options = []
            if nx > _EPS:  # raise x0
                need = max((d_b + c - ny * yy) / nx for yy in (y0, y1))
                if need <= sx and need <= x1:
                    options.append(("x0", need, (x1 - need) * (y1 - y0)))
            if nx < -_EPS:  # lower x1
                need = min((d_b + c - ny * yy) / nx for yy in (y0, y1))
                if need >= sx and need >= x0:
                    options.append(("x1", need, (need - x0) * (y1 - y0)))
            if ny > _EPS:  # raise y0
                need = max((d_b + c - nx * xx) / ny for xx in (x0, x1))
                if need <= sy and need <= y1:
                    options.append(("y0", need, (x1 - x0) * (y1 - need)))
            if ny < -_EPS:  # lower y1
                need = min((d_b + c - nx * xx) / ny for xx in (x0, x1))
                if need >= sy and need >= y0:
                    options.append(("y1", need, (x1 - x0) * (need - y0)))
            if not options:
                return FreeRect(sx, sy, sx, sy, pruned=True)
            which, value, _ = max(options, key=lambda o: (o[2], o[0]))
            if which == "x0":
                x0 = value
            elif which == "x1":
                x1 = value
            elif which == "y0":
                y0 = value
            else:
                y1 = value

    return FreeRect(x0, y1, x1, y0, pruned=False)


def grow_free_rect(
    boundary: list[list[Point]],
    site: Point,
    other_leaders: list[tuple[Point, ...]],
    d_b: float,
    iterations: int = 20,
) -> FreeRect:
    """Grow the maximal centred rectangle, then prune it for leader clearance."""
    return prune_free_rect(grow_raw_rect(boundary, site, iterations), site, other_leaders, d_b)
