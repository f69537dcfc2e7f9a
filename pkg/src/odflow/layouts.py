"""2D scene documents: MapTrix, OD Maps and the straight-line flow map.

Layout documents are resolution-independent geometric scenes made of typed
primitives (path, circle, cell, leader, label, segment) whose ids link back
to region and flow ids.  Document coordinates are SVG-like (y down); the
internal leader mathematics runs y-up and is flipped when the document is
assembled.  Serialization goes through the canonical JSON utilities so two
layouts of the same dataset are byte-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import geo
from .errors import (
    BadGridAssignmentError,
    InfeasibleGeometryError,
    LayoutError,
    UnknownSelectionError,
)
from .jsonutil import canonical_json_bytes
from .leaderlayout import (
    MatrixEdge,
    compute_ordering,
    grow_raw_rect,
    prune_free_rect,
    route_leaders,
)
from .oddata import FlowDataset, Region, aggregate_regions, filter_by_magnitude
from .qprefine import QpParams, refine_plan

SCHEMA_VERSION = "1.0"

# colorbrewer YlOrRd, 9 classes, light to dark (monotone decreasing lightness)
_YLORRD = [
    (255, 255, 204), (255, 237, 160), (254, 217, 118), (254, 178, 76),
    (253, 141, 60), (252, 78, 42), (227, 26, 28), (189, 0, 38), (128, 0, 38),
]
# colorbrewer Blues endpoints used for the flow-direction gradient
_BLUE_DARK = "#08306b"
_BLUE_LIGHT = "#c6dbef"


def _hex(rgb: tuple[float, float, float]) -> str:
    return "#%02x%02x%02x" % tuple(int(round(max(0, min(255, v)))) for v in rgb)


@dataclass(frozen=True)
class ColourScale:
    """Continuous sequential scale over the magnitude domain."""

    domain: tuple[float, float]
    name: str = "YlOrRd"

    def t(self, value: float) -> float:
        lo, hi = self.domain
        if hi <= lo:
            return 1.0  # degenerate domain maps to the range maximum
        return max(0.0, min(1.0, (value - lo) / (hi - lo)))

    def sample(self, value: float) -> str:
        t = self.t(value)
        pos = t * (len(_YLORRD) - 1)
        i = min(len(_YLORRD) - 2, int(pos))
        f = pos - i
        a, b = _YLORRD[i], _YLORRD[i + 1]
        return _hex(tuple(a[c] + f * (b[c] - a[c]) for c in range(3)))

    def to_dict(self) -> dict:
        return {"name": self.name, "domain": [self.domain[0], self.domain[1]]}


@dataclass
class LayoutParams:
    maps_fraction: float = 0.4  # width share of the two maps
    k: float = 1.0
    w: float = 1.0
    d_b: float | None = None  # defaults to 3 x leader stroke width
    d_lc: float | None = None
    leader_stroke: float = 1.0
    separator_every: int = 5
    flow_width_range: tuple[float, float] = (1.5, 12.0)
    legend_pos: tuple[float, float] | None = None  # document coords (y down)


@dataclass
class BaseLayout:
    kind: str
    width: float
    height: float
    scenes: dict[str, list[dict]]
    colour_scale: ColourScale | None = None
    extras: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)  # not serialized

    def to_doc(self) -> dict:
        doc = {
            "schemaVersion": SCHEMA_VERSION,
            "kind": self.kind,
            "canvas": {"width": self.width, "height": self.height},
            "scenes": [
                {"id": name, "primitives": prims}
                for name, prims in self.scenes.items()
            ],
        }
        if self.colour_scale is not None:
            doc["colourScale"] = self.colour_scale.to_dict()
        doc.update(self.extras)
        return doc

    def to_bytes(self) -> bytes:
        return canonical_json_bytes(self.to_doc())

    def element_ids(self) -> list[str]:
        return [
            p["id"]
            for prims in self.scenes.values()
            for p in prims
            if "id" in p
        ]


@dataclass
class MapTrixLayout(BaseLayout):
    ordering: tuple[str, ...] = ()

    def to_doc(self) -> dict:
        doc = super().to_doc()
        doc["ordering"] = list(self.ordering)
        return doc


ODMapsLayout = BaseLayout
FlowMapLayout = BaseLayout


# ---------------------------------------------------------------------------
# shared projection helpers


def _rotation_for(d: FlowDataset) -> geo.Rotation3:
    lons = [r.anchor.lon for r in d.regions]
    lats = [r.anchor.lat for r in d.regions]
    centre = geo.GeoPoint(sum(lons) / len(lons), sum(lats) / len(lats))
    return geo.centering_rotation(centre)


def _project_regions(d: FlowDataset) -> dict:
    """Project anchors and boundaries (centered Hammer), y-up plane units."""
    rot = _rotation_for(d)

    def proj(p: geo.GeoPoint) -> tuple[float, float]:
        q = geo.hammer_forward(geo.rotate(p, rot))
        return (q.x, q.y)

    anchors = {r.id: proj(r.anchor) for r in d.regions}
    outlines: dict[str, list[list[tuple[float, float]]]] = {}
    largest: dict[str, list[list[tuple[float, float]]]] = {}
    for r in d.regions:
        polys = []
        for poly in r.boundary:
            rings = []
            for ring in poly:
                parts = geo.split_at_antimeridian(list(ring))
                flat = [proj(p) for part in parts for p in part]
                rings.append(flat)
            polys.append(rings)
        outlines[r.id] = [ring for poly in polys for ring in poly]
        big = max(
            polys,
            key=lambda rings: _poly_area(rings[0]),
        )
        largest[r.id] = big
    xs = [p[0] for rings in outlines.values() for ring in rings for p in ring]
    ys = [p[1] for rings in outlines.values() for ring in rings for p in ring]
    return {
        "anchors": anchors,
        "outlines": outlines,
        "largest": largest,
        "bbox": (min(xs), min(ys), max(xs), max(ys)),
    }


def _poly_area(ring: list[tuple[float, float]]) -> float:
    s = 0.0
    for (x0, y0), (x1, y1) in zip(ring, ring[1:] + ring[:1]):
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


class _MapTransform:
    """Similarity transform from projection units into scene coordinates."""

    def __init__(self, bbox, scale: float, cx: float, cy: float):
        x0, y0, x1, y1 = bbox
        self.scale = scale
        self.ox = cx - scale * (x0 + x1) / 2.0
        self.oy = cy - scale * (y0 + y1) / 2.0

    def apply(self, p: tuple[float, float]) -> tuple[float, float]:
        return (self.ox + self.scale * p[0], self.oy + self.scale * p[1])

    def shifted(self, dx: float, dy: float) -> "_MapTransform":
        t = _MapTransform.__new__(_MapTransform)
        t.scale = self.scale
        t.ox = self.ox + dx
        t.oy = self.oy + dy
        return t


def _flip(prims: list[dict], height: float) -> list[dict]:
    """Convert y-up scene primitives to document (y down) coordinates."""
    out = []
    for p in prims:
        q = dict(p)
        if "points" in q:
            q["points"] = [[x, height - y] for x, y in q["points"]]
        if "cy" in q:
            q["cy"] = height - q["cy"]
        if "y" in q:
            q["y"] = height - q["y"]
        out.append(q)
    return out


def _round_pts(pts) -> list[list[float]]:
    return [[float(x), float(y)] for x, y in pts]


# ---------------------------------------------------------------------------
# MapTrix


def _label_style(rank: float) -> tuple[float, str]:
    """Font size and grey level linear in total-flow rank (0 smallest .. 1 largest)."""
    size = 8.0 + 6.0 * rank
    g = int(round(0xB0 - rank * (0xB0 - 0x10)))
    return size, _hex((g, g, g))


def layout_maptrix(
    d: FlowDataset,
    canvas: tuple[float, float] = (1200.0, 800.0),
    params: LayoutParams | None = None,
) -> MapTrixLayout:
    params = params or LayoutParams()
    W, H = float(canvas[0]), float(canvas[1])
    active = d.active_regions
    n = len(active)
    if n < 2:
        raise LayoutError("MapTrix needs at least 2 active regions")
    margin = 0.02 * min(W, H)
    d_b = params.d_b if params.d_b is not None else 3.0 * params.leader_stroke
    d_lc = params.d_lc if params.d_lc is not None else d_b

    # Matrix diamond on the right (y-up coordinates).
    h_d = min((W * (1.0 - params.maps_fraction) - 2 * margin) / 2.0, (H - 2 * margin) / 2.0)
    cx = W - margin - h_d
    cy = H / 2.0
    cell = h_d * math.sqrt(2.0) / n
    top = (cx, cy + h_d)
    left = (cx - h_d, cy)
    rowdir = (-math.sqrt(0.5), -math.sqrt(0.5))
    coldir = (math.sqrt(0.5), -math.sqrt(0.5))

    row_ports = tuple(
        (top[0] + rowdir[0] * cell * (i + 0.5), top[1] + rowdir[1] * cell * (i + 0.5))
        for i in range(n)
    )
    col_ports = tuple(
        (left[0] + coldir[0] * cell * (j + 0.5), left[1] + coldir[1] * cell * (j + 0.5))
        for j in range(n)
    )

    proj = _project_regions(d)
    bx0, by0, bx1, by1 = proj["bbox"]
    geo_w = max(bx1 - bx0, 1e-9)
    geo_h = max(by1 - by0, 1e-9)

    # Port y-span the origin map should roughly cover.
    port_top = row_ports[0][1]
    port_bot = row_ports[-1][1]
    map_box_w = (cx - h_d) - 2 * margin - 0.04 * W
    map_box_h = min(port_top - port_bot + cell, H - 2 * margin - h_d)
    scale = min(map_box_w / geo_w, map_box_h / geo_h)

    active_ids = [r.id for r in active]
    layout_result = None
    for _attempt in range(8):
        origin_t = _MapTransform(proj["bbox"], scale, margin + scale * geo_w / 2.0, (port_top + port_bot) / 2.0)
        dest_t = origin_t.shifted(0.0, -h_d)
        anchors_o = [(rid, origin_t.apply(proj["anchors"][rid])) for rid in active_ids]
        anchors_dd = [(rid, dest_t.apply(proj["anchors"][rid])) for rid in active_ids]
        try:
            ordering = compute_ordering(anchors_o, MatrixEdge(row_ports), params.k)
            plan_o = route_leaders(anchors_o, ordering, MatrixEdge(row_ports), params.k)
            plan_d = route_leaders(anchors_dd, ordering, MatrixEdge(col_ports), params.k)
            layout_result = (origin_t, dest_t, ordering, plan_o, plan_d)
            break
        except InfeasibleGeometryError:
            scale *= 0.85  # shrink the maps until no diagonal overshoots
    if layout_result is None:
        raise LayoutError("could not place maps without leader overshoot")
    origin_t, dest_t, ordering, plan_o, plan_d = layout_result

    qp_params = QpParams(k=params.k, w=params.w, d_b=d_b, d_lc=d_lc, map_width=W)
    solutions = {}
    for side, plan, transform in (("origin", plan_o, origin_t), ("dest", plan_d, dest_t)):
        sites = {l.region_id: l.site for l in plan.leaders}
        raw = {}
        for rid in active_ids:
            boundary = [[transform.apply(p) for p in ring] for ring in proj["largest"][rid]]
            raw[rid] = grow_raw_rect(boundary, sites[rid])
        for leader in plan.leaders:
            others = [l.points for l in plan.leaders if l.region_id != leader.region_id]
            plan.free_rects[leader.region_id] = prune_free_rect(
                raw[leader.region_id], leader.site, others, d_b
            )
        refined, sol = refine_plan(plan, qp_params)
        refined.free_rects = plan.free_rects
        solutions[side] = (refined, sol)
    plan_o, sol_o = solutions["origin"]
    plan_d, sol_d = solutions["dest"]

    scale_domain = d.magnitude_domain()
    colours = ColourScale(scale_domain)
    totals_all = {r.id: d.total_in[r.id] + d.total_out[r.id] for r in active}
    rank_order = sorted(active_ids, key=lambda rid: (totals_all[rid], rid))
    rank = {rid: (i / (n - 1) if n > 1 else 1.0) for i, rid in enumerate(rank_order)}
    max_total_out = max((d.total_out[r] for r in active_ids), default=0.0)
    max_total_in = max((d.total_in[r] for r in active_ids), default=0.0)
    max_total = max(max_total_out, max_total_in, 1e-12)
    r_max = cell * 0.8

    def circle_r(total: float) -> float:
        return r_max * math.sqrt(total / max_total) if total > 0 else 0.0

    scenes: dict[str, list[dict]] = {}

    for side, plan, transform, which in (
        ("originMap", plan_o, origin_t, "out"),
        ("destMap", plan_d, dest_t, "in"),
    ):
        prims: list[dict] = []
        tag = "origin" if side == "originMap" else "dest"
        for rid in active_ids:
            for ring in proj["outlines"][rid]:
                pts = [transform.apply(p) for p in ring]
                prims.append(
                    {
                        "type": "path",
                        "id": f"region:{tag}:{rid}",
                        "points": _round_pts(pts),
                        "closed": True,
                        "stroke": "#888888",
                        "fill": "#f4f2ee",
                        "strokeWidth": 0.6,
                    }
                )
        sites = {l.region_id: l.site for l in plan.leaders}
        for rid in active_ids:
            total = d.total_out[rid] if which == "out" else d.total_in[rid]
            sx, sy = sites[rid]
            prims.append(
                {
                    "type": "circle",
                    "id": f"total:{tag}:{rid}",
                    "cx": sx,
                    "cy": sy,
                    "r": circle_r(total),
                    "fill": "#31a354" if which == "out" else "#3182bd",
                    "opacity": 0.55,
                    "total": total,
                }
            )
            size, grey = _label_style(rank[rid])
            prims.append(
                {
                    "type": "label",
                    "id": f"maplabel:{tag}:{rid}",
                    "x": sx,
                    "y": sy + circle_r(total) + 3.0,
                    "text": d.region(rid).abbr,
                    "fontSize": size,
                    "fill": grey,
                    "anchor": "middle",
                }
            )
        title_y = max(p["y"] for p in prims if "y" in p) + 14 if prims else 0.0
        title_x = min(
            (p["points"][0][0] for p in prims if p["type"] == "path"), default=margin
        )
        prims.append(
            {
                "type": "label",
                "id": f"maptitle:{tag}",
                "x": title_x,
                "y": title_y,
                "text": "Origins" if tag == "origin" else "Destinations",
                "fontSize": 13.0,
                "fill": "#333333",
                "anchor": "start",
            }
        )
        if tag == "dest":
            # Destination icon next to the map label (replaces per-leader arrows).
            prims.append(
                {
                    "type": "path",
                    "id": "desticon",
                    "points": _round_pts(
                        [
                            (title_x - 12, title_y - 4),
                            (title_x - 4, title_y),
                            (title_x - 12, title_y + 4),
                        ]
                    ),
                    "closed": True,
                    "stroke": None,
                    "fill": "#d62728",
                    "strokeWidth": 0.0,
                }
            )
        scenes[side] = prims

    leader_prims: list[dict] = []
    for tag, plan in (("origin", plan_o), ("dest", plan_d)):
        for l in plan.leaders:
            _, grey = _label_style(rank[l.region_id])
            leader_prims.append(
                {
                    "type": "leader",
                    "id": f"leader:{tag}:{l.region_id}",
                    "points": _round_pts(l.points),
                    "side": tag,
                    "band": l.band,
                    "orientation": l.orientation,
                    "stroke": grey,
                    "strokeWidth": params.leader_stroke * (0.8 + 1.2 * rank[l.region_id]),
                }
            )
    scenes["leaders"] = leader_prims

    matrix_prims: list[dict] = []
    matrix_prims.append(
        {
            "type": "path",
            "id": "matrix:outline",
            "points": _round_pts(
                [top, (cx + h_d, cy), (cx, cy - h_d), left]
            ),
            "closed": True,
            "stroke": "#444444",
            "fill": None,
            "strokeWidth": 1.0,
        }
    )
    index_of = {rid: i for i, rid in enumerate(ordering)}

    def cell_corners(i: int, j: int) -> list[tuple[float, float]]:
        ccx = top[0] + rowdir[0] * cell * (i + 0.5) + coldir[0] * cell * (j + 0.5)
        ccy = top[1] + rowdir[1] * cell * (i + 0.5) + coldir[1] * cell * (j + 0.5)
        h = cell / 2.0
        return [
            (ccx - rowdir[0] * h - coldir[0] * h, ccy - rowdir[1] * h - coldir[1] * h),
            (ccx - rowdir[0] * h + coldir[0] * h, ccy - rowdir[1] * h + coldir[1] * h),
            (ccx + rowdir[0] * h + coldir[0] * h, ccy + rowdir[1] * h + coldir[1] * h),
            (ccx + rowdir[0] * h - coldir[0] * h, ccy + rowdir[1] * h - coldir[1] * h),
        ]

    for f in sorted(d.flows, key=lambda f: (f.origin, f.dest)):
        if f.origin not in index_of or f.dest not in index_of:
            continue
        i, j = index_of[f.origin], index_of[f.dest]
        matrix_prims.append(
            {
                "type": "cell",
                "id": f"cell:{f.origin}:{f.dest}",
                "points": _round_pts(cell_corners(i, j)),
                "fill": colours.sample(f.magnitude),
                "value": f.magnitude,
                "t": colours.t(f.magnitude),
                "row": i,
                "col": j,
            }
        )
    sep = params.separator_every
    if sep > 0:
        for m in range(sep, n, sep):
            a = (top[0] + rowdir[0] * cell * m, top[1] + rowdir[1] * cell * m)
            b = (a[0] + coldir[0] * cell * n, a[1] + coldir[1] * cell * n)
            matrix_prims.append(
                {
                    "type": "path",
                    "id": f"separator:row:{m}",
                    "points": _round_pts([a, b]),
                    "closed": False,
                    "stroke": "#555555",
                    "fill": None,
                    "strokeWidth": 1.2,
                }
            )
            a2 = (top[0] + coldir[0] * cell * m, top[1] + coldir[1] * cell * m)
            b2 = (a2[0] + rowdir[0] * cell * n, a2[1] + rowdir[1] * cell * n)
            matrix_prims.append(
                {
                    "type": "path",
                    "id": f"separator:col:{m}",
                    "points": _round_pts([a2, b2]),
                    "closed": False,
                    "stroke": "#555555",
                    "fill": None,
                    "strokeWidth": 1.2,
                }
            )
    row_normal = (-math.sqrt(0.5), math.sqrt(0.5))
    col_normal = (-math.sqrt(0.5), -math.sqrt(0.5))
    for i, rid in enumerate(ordering):
        size, grey = _label_style(rank[rid])
        size = min(size, max(6.0, cell * 0.8))
        px, py = row_ports[i]
        matrix_prims.append(
            {
                "type": "label",
                "id": f"rowlabel:{rid}",
                "x": px + row_normal[0] * cell * 0.45,
                "y": py + row_normal[1] * cell * 0.45,
                "text": d.region(rid).abbr,
                "fontSize": size,
                "fill": grey,
                "anchor": "middle",
            }
        )
        qx, qy = col_ports[i]
        matrix_prims.append(
            {
                "type": "label",
                "id": f"collabel:{rid}",
                "x": qx + col_normal[0] * cell * 0.45,
                "y": qy + col_normal[1] * cell * 0.45,
                "text": d.region(rid).abbr,
                "fontSize": size,
                "fill": grey,
                "anchor": "middle",
            }
        )
    scenes["matrix"] = matrix_prims

    if params.legend_pos is not None:
        lx, ly = params.legend_pos
        scenes["legend"] = _legend_prims(colours, x=lx, y=H - ly)
    else:
        scenes["legend"] = _legend_prims(colours, x=W - margin - 180.0, y=margin + 10.0)

    flipped = {name: _flip(prims, H) for name, prims in scenes.items()}
    layout = MapTrixLayout(
        kind="maptrix",
        width=W,
        height=H,
        scenes=flipped,
        colour_scale=colours,
        ordering=tuple(ordering),
        extras={"cellSize": cell, "regionCount": n},
    )
    layout.stats = {
        "solveMsOrigin": sol_o.solve_ms,
        "solveMsDest": sol_d.solve_ms,
        "qpIterations": sol_o.iterations + sol_d.iterations,
        "converged": sol_o.converged and sol_d.converged,
    }
    layout.extras["separators"] = [m for m in range(sep, n, sep)] if sep > 0 else []
    return layout


def _legend_prims(colours: ColourScale, x: float, y: float) -> list[dict]:
    prims: list[dict] = []
    steps = 24
    bar_w, bar_h = 160.0, 10.0
    lo, hi = colours.domain
    for s in range(steps):
        v = lo + (hi - lo) * (s + 0.5) / steps if hi > lo else hi
        prims.append(
            {
                "type": "cell",
                "id": f"legend:swatch:{s}",
                "points": _round_pts(
                    [
                        (x + bar_w * s / steps, y),
                        (x + bar_w * (s + 1) / steps, y),
                        (x + bar_w * (s + 1) / steps, y - bar_h),
                        (x + bar_w * s / steps, y - bar_h),
                    ]
                ),
                "fill": colours.sample(v),
                "value": v,
                "t": colours.t(v),
            }
        )
    prims.append(
        {
            "type": "label",
            "id": "legend:min",
            "x": x,
            "y": y - bar_h - 4.0,
            "text": _fmt_value(lo),
            "fontSize": 9.0,
            "fill": "#333333",
            "anchor": "start",
        }
    )
    prims.append(
        {
            "type": "label",
            "id": "legend:max",
            "x": x + bar_w,
            "y": y - bar_h - 4.0,
            "text": _fmt_value(hi),
            "fontSize": 9.0,
            "fill": "#333333",
            "anchor": "end",
        }
    )
    return prims


def _fmt_value(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return f"{v:.2f}"


# ---------------------------------------------------------------------------
# OD Maps


def layout_odmaps(
    d: FlowDataset,
    grid: dict,
    canvas: tuple[float, float] = (1200.0, 800.0),
    params: LayoutParams | None = None,
) -> ODMapsLayout:
    """Nested small-multiple OD map and its mirrored DO map."""
    W, H = float(canvas[0]), float(canvas[1])
    margin = 0.02 * min(W, H)
    try:
        gw, gh = int(grid["gridSize"][0]), int(grid["gridSize"][1])
        # Documented form is flat {regionId: [col,row], gridSize: [W,H]};
        # a nested {"cells": {...}} variant is accepted too.
        raw = grid["cells"] if isinstance(grid.get("cells"), dict) else {
            k: v for k, v in grid.items() if k != "gridSize"
        }
        cells: dict[str, tuple[int, int]] = {
            str(rid): (int(c[0]), int(c[1])) for rid, c in raw.items()
        }
    except (KeyError, TypeError, ValueError, IndexError):
        raise BadGridAssignmentError(
            "grid must carry gridSize [W,H] and {regionId: [col,row]} entries"
        ) from None
    occupied = set()
    for rid, (cx_, cy_) in cells.items():
        if not (0 <= cx_ < gw and 0 <= cy_ < gh):
            raise BadGridAssignmentError(f"cell for {rid!r} outside the {gw}x{gh} grid")
        if (cx_, cy_) in occupied:
            raise BadGridAssignmentError(f"duplicate grid cell {cx_},{cy_}")
        occupied.add((cx_, cy_))
    region_ids = sorted(r.id for r in d.regions)
    missing = [rid for rid in region_ids if rid not in cells]
    if missing:
        raise BadGridAssignmentError(f"grid assignment missing regions: {missing}")

    colours = ColourScale(d.magnitude_domain())
    flows = d.flow_map()
    totals_all = {rid: d.total_in[rid] + d.total_out[rid] for rid in region_ids}
    rank_order = sorted(region_ids, key=lambda rid: (totals_all[rid], rid))
    rank = {rid: (i / (len(region_ids) - 1) if len(region_ids) > 1 else 1.0) for i, rid in enumerate(rank_order)}
    max_total = max(max(d.total_in.values(), default=0.0), max(d.total_out.values(), default=0.0), 1e-12)

    legend_h = 50.0
    panel_w = (W - 3 * margin) / 2.0
    panel_h = H - 2 * margin - legend_h
    outer = min(panel_w / gw, panel_h / gh)
    inset = outer * 0.08
    inner_w = (outer - 2 * inset) / gw
    inner_h = (outer - 2 * inset) / gh

    scenes: dict[str, list[dict]] = {}
    for panel, prefix, direction in (("odMap", "odcell", "out"), ("doMap", "docell", "in")):
        px0 = margin if panel == "odMap" else 2 * margin + panel_w
        py0 = margin + legend_h
        prims: list[dict] = []
        prims.append(
            {
                "type": "label",
                "id": f"paneltitle:{prefix}",
                "x": px0,
                "y": py0 - 6.0,
                "text": "OD map (outflows)" if panel == "odMap" else "DO map (inflows)",
                "fontSize": 12.0,
                "fill": "#333333",
                "anchor": "start",
            }
        )
        for rid in region_ids:
            col, row = cells[rid]
            ox = px0 + col * outer
            oy = py0 + row * outer
            prims.append(
                {
                    "type": "path",
                    "id": f"outer:{prefix}:{rid}",
                    "points": _round_pts(
                        [(ox, oy), (ox + outer, oy), (ox + outer, oy + outer), (ox, oy + outer)]
                    ),
                    "closed": True,
                    "stroke": "#999999",
                    "fill": "#ffffff",
                    "strokeWidth": 0.7,
                }
            )
            for other in region_ids:
                icol, irow = cells[other]
                mag = flows.get((rid, other) if direction == "out" else (other, rid))
                if mag is None:
                    continue
                ix = ox + inset + icol * inner_w
                iy = oy + inset + irow * inner_h
                prims.append(
                    {
                        "type": "cell",
                        "id": f"{prefix}:{rid}:{other}",
                        "points": _round_pts(
                            [(ix, iy), (ix + inner_w, iy), (ix + inner_w, iy + inner_h), (ix, iy + inner_h)]
                        ),
                        "fill": colours.sample(mag),
                        "value": mag,
                        "t": colours.t(mag),
                    }
                )
            # Proportional circle at the home cell of the mini-grid.
            total = d.total_out[rid] if direction == "out" else d.total_in[rid]
            hx = ox + inset + cells[rid][0] * inner_w + inner_w / 2.0
            hy = oy + inset + cells[rid][1] * inner_h + inner_h / 2.0
            r = (min(inner_w, inner_h) * 0.75) * math.sqrt(total / max_total)
            prims.append(
                {
                    "type": "circle",
                    "id": f"home:{prefix}:{rid}",
                    "cx": hx,
                    "cy": hy,
                    "r": r,
                    "fill": "#31a354" if direction == "out" else "#3182bd",
                    "opacity": 0.8,
                    "total": total,
                }
            )
            size, grey = _label_style(rank[rid])
            prims.append(
                {
                    "type": "label",
                    "id": f"gridlabel:{prefix}:{rid}",
                    "x": ox + outer / 2.0,
                    "y": oy + outer - 2.0,
                    "text": d.region(rid).abbr,
                    "fontSize": min(size, outer * 0.28),
                    "fill": grey,
                    "anchor": "middle",
                }
            )
        scenes[panel] = prims

    # Legend on top (moved and enlarged relative to the panels).
    if params is not None and params.legend_pos is not None:
        lx, ly = params.legend_pos
        scenes["legend"] = _legend_prims(colours, x=lx, y=ly)
    else:
        scenes["legend"] = _legend_prims(colours, x=margin, y=margin + 24.0)
    return ODMapsLayout(
        kind="odmaps",
        width=W,
        height=H,
        scenes=scenes,
        colour_scale=colours,
        extras={"gridSize": [gw, gh]},
    )


# ---------------------------------------------------------------------------
# flow map


def layout_flowmap(
    d: FlowDataset,
    canvas: tuple[float, float] = (1200.0, 800.0),
    params: LayoutParams | None = None,
) -> FlowMapLayout:
    params = params or LayoutParams()
    W, H = float(canvas[0]), float(canvas[1])
    if not d.flows:
        raise LayoutError("flow map needs at least one flow")
    margin = 0.04 * min(W, H)
    proj = _project_regions(d)
    bx0, by0, bx1, by1 = proj["bbox"]
    scale = min((W - 2 * margin) / max(bx1 - bx0, 1e-9), (H - 2 * margin) / max(by1 - by0, 1e-9))
    t = _MapTransform(proj["bbox"], scale, W / 2.0, H / 2.0)

    region_ids = sorted(r.id for r in d.regions)
    colours = ColourScale(d.magnitude_domain())
    lo, hi = colours.domain
    w_min, w_max = params.flow_width_range

    def width_for(mag: float) -> float:
        if hi <= lo:
            return w_max
        return w_min + (w_max - w_min) * (mag - lo) / (hi - lo)

    prims_regions: list[dict] = []
    for rid in region_ids:
        for ring in proj["outlines"][rid]:
            prims_regions.append(
                {
                    "type": "path",
                    "id": f"region:{rid}",
                    "points": _round_pts([t.apply(p) for p in ring]),
                    "closed": True,
                    "stroke": "#888888",
                    "fill": "#f4f2ee",
                    "strokeWidth": 0.6,
                }
            )

    prims_flows: list[dict] = []
    anchors = {rid: t.apply(proj["anchors"][rid]) for rid in region_ids}
    for f in sorted(d.flows, key=lambda f: (f.origin, f.dest)):
        a = anchors[f.origin]
        b = anchors[f.dest]
        prims_flows.append(
            {
                "type": "segment",
                "id": f"flow:{f.origin}:{f.dest}",
                "points": _round_pts([a, b]),
                "width": width_for(f.magnitude),
                "value": f.magnitude,
                "gradient": {"from": _BLUE_DARK, "to": _BLUE_LIGHT},
            }
        )

    prims_totals: list[dict] = []
    max_total = max(max(d.total_in.values(), default=0.0), max(d.total_out.values(), default=0.0), 1e-12)
    r_max = 0.035 * min(W, H)
    for rid in region_ids:
        ax, ay = anchors[rid]
        for side, total, colour in (
            ("left", d.total_in[rid], "#111111"),
            ("right", d.total_out[rid], "#9e9e9e"),
        ):
            prims_totals.append(
                {
                    "type": "halfcircle",
                    "id": f"half:{side}:{rid}",
                    "cx": ax,
                    "cy": ay,
                    "r": r_max * math.sqrt(total / max_total) if total > 0 else 0.0,
                    "side": side,
                    "fill": colour,
                    "total": total,
                }
            )

    if params.legend_pos is not None:
        lx, ly = params.legend_pos
        legend = _legend_prims(colours, x=lx, y=H - ly)
    else:
        legend = _legend_prims(colours, x=W - margin - 180.0, y=margin + 16.0)
    scenes = {
        "regions": _flip(prims_regions, H),
        "flows": _flip(prims_flows, H),
        "totals": _flip(prims_totals, H),
        "legend": _flip(legend, H),
    }
    return FlowMapLayout(
        kind="flowmap",
        width=W,
        height=H,
        scenes=scenes,
        colour_scale=colours,
    )


# ---------------------------------------------------------------------------
# highlight and relayout


def highlight(layout: MapTrixLayout, selection: dict) -> dict:
    """Overlay document for a selection of regions and/or cells."""
    known = set(layout.element_ids())
    elements: list[str] = []
    regions = list(selection.get("regions", []))
    cells = [tuple(c) for c in selection.get("cells", [])]
    for rid in regions:
        wanted = [
            f"leader:origin:{rid}",
            f"leader:dest:{rid}",
            f"region:origin:{rid}",
            f"region:dest:{rid}",
        ]
        if not any(w in known for w in wanted):
            raise UnknownSelectionError(f"region {rid!r} not in layout")
        elements.extend(w for w in wanted if w in known)
        row_cells = sorted(e for e in known if e.startswith(f"cell:{rid}:"))
        col_cells = sorted(
            e for e in known if e.startswith("cell:") and e.endswith(f":{rid}")
        )
        elements.extend(row_cells)
        elements.extend(col_cells)
    for o, dd in cells:
        cid = f"cell:{o}:{dd}"
        if cid not in known:
            raise UnknownSelectionError(f"cell ({o}, {dd}) not in layout")
        elements.append(cid)
        for w in (f"leader:origin:{o}", f"leader:dest:{dd}"):
            if w in known:
                elements.append(w)

    stripes: list[dict] = []
    ordering = list(layout.ordering)
    idx = {rid: i for i, rid in enumerate(ordering)}
    n = len(ordering)
    cell_size = layout.extras.get("cellSize", 0.0)
    for rid in regions:
        if rid in idx and n:
            stripes.append({"type": "stripe", "id": f"rowstripe:{rid}", "row": idx[rid]})
            stripes.append({"type": "stripe", "id": f"colstripe:{rid}", "col": idx[rid]})
    seen = set()
    unique_elements = [e for e in elements if not (e in seen or seen.add(e))]
    return {
        "schemaVersion": SCHEMA_VERSION,
        "kind": "highlight",
        "elements": unique_elements,
        "stripes": stripes,
        "cellSize": cell_size,
    }


def apply_ops(d: FlowDataset, op: dict) -> FlowDataset:
    """Apply a filter and/or aggregation request to a dataset."""
    out = d
    if op.get("filter") is not None:
        lo, hi = op["filter"]
        out = filter_by_magnitude(out, float(lo), float(hi))
    if op.get("groups"):
        from .oddata import RegionGroup

        groups = [
            RegionGroup(str(g["label"]), frozenset(str(m) for m in g["members"]))
            for g in op["groups"]
        ]
        out = aggregate_regions(out, groups)
    return out


def relayout(
    d: FlowDataset,
    op: dict,
    canvas: tuple[float, float] = (1200.0, 800.0),
    params: LayoutParams | None = None,
) -> MapTrixLayout:
    """Definitionally layout_maptrix(apply_ops(d, op)); deterministic."""
    return layout_maptrix(apply_ops(d, op), canvas, params)
