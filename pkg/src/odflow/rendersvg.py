"""Deterministic SVG serialization of layout documents.

Input is the layout JSON document (y-down coordinates); output is SVG 1.1
text, UTF-8, LF line endings.  Byte-identical output for identical input:
attributes are written in a fixed order and all coordinates use exactly
three decimals.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

FONT_FAMILY = "sans-serif"


def _n(v: float) -> str:
    s = f"{float(v):.3f}"
    return "0.000" if s == "-0.000" else s


def _pts(points) -> str:
    return " ".join(f"{_n(x)},{_n(y)}" for x, y in points)


class _Writer:
    def __init__(self):
        self.lines: list[str] = []

    def tag(self, name: str, attrs: list[tuple[str, str]], text: str | None = None, close: bool = True):
        parts = [f"<{name}"]
        for k, v in attrs:
            if v is None:
                continue
            parts.append(f" {k}={quoteattr(str(v))}")
        if text is not None:
            parts.append(f">{escape(text)}</{name}>")
        elif close:
            parts.append("/>")
        else:
            parts.append(">")
        self.lines.append("".join(parts))

    def open(self, name: str, attrs: list[tuple[str, str]]):
        self.tag(name, attrs, close=False)

    def close(self, name: str):
        self.lines.append(f"</{name}>")

    def result(self) -> str:
        return "\n".join(self.lines) + "\n"


def _path_d(points, closed: bool) -> str:
    cmds = [f"M {_n(points[0][0])} {_n(points[0][1])}"]
    cmds.extend(f"L {_n(x)} {_n(y)}" for x, y in points[1:])
    if closed:
        cmds.append("Z")
    return " ".join(cmds)


def _half_circle_d(cx: float, cy: float, r: float, side: str) -> str:
    # Vertical diameter; "left" bulges to -x, "right" to +x.
    sweep = "0" if side == "left" else "1"
    return (
        f"M {_n(cx)} {_n(cy - r)} "
        f"A {_n(r)} {_n(r)} 0 0 {sweep} {_n(cx)} {_n(cy + r)} Z"
    )


def _emit_primitive(w: _Writer, p: dict, emphasis: bool = False):
    ptype = p.get("type")
    pid = p.get("id")
    extra_style: list[tuple[str, str]] = []
    if emphasis:
        extra_style = [("class", "highlight")]
    if ptype == "path":
        attrs = [("id", pid), ("d", _path_d(p["points"], p.get("closed", False)))]
        attrs.append(("fill", p.get("fill") if p.get("fill") else "none"))
        if p.get("stroke"):
            attrs.append(("stroke", p["stroke"]))
            attrs.append(("stroke-width", _n(p.get("strokeWidth", 1.0))))
        w.tag("path", attrs + extra_style)
    elif ptype == "cell":
        attrs = [
            ("id", pid),
            ("d", _path_d(p["points"], True)),
            ("fill", p.get("fill", "#ffffff")),
        ]
        w.tag("path", attrs + extra_style)
    elif ptype == "stripe":
        attrs = [
            ("id", pid),
            ("d", _path_d(p["points"], True)),
            ("fill", "#ffd24d"),
            ("fill-opacity", "0.35"),
        ]
        w.tag("path", attrs + extra_style)
    elif ptype == "leader":
        attrs = [
            ("id", pid),
            ("d", _path_d(p["points"], False)),
            ("fill", "none"),
            ("stroke", p.get("stroke", "#333333")),
            ("stroke-width", _n(p.get("strokeWidth", 1.0))),
        ]
        w.tag("path", attrs + extra_style)
    elif ptype == "segment":
        attrs = [
            ("id", pid),
            ("d", _path_d(p["points"], False)),
            ("fill", "none"),
            ("stroke", f"url(#grad_{_safe(pid)})"),
            ("stroke-width", _n(p.get("width", 1.0))),
            ("stroke-linecap", "round"),
        ]
        w.tag("path", attrs + extra_style)
    elif ptype == "circle":
        attrs = [
            ("id", pid),
            ("cx", _n(p["cx"])),
            ("cy", _n(p["cy"])),
            ("r", _n(p["r"])),
            ("fill", p.get("fill", "#000000")),
        ]
        if "opacity" in p:
            attrs.append(("fill-opacity", _n(p["opacity"])))
        w.tag("circle", attrs + extra_style)
    elif ptype == "halfcircle":
        attrs = [
            ("id", pid),
            ("d", _half_circle_d(p["cx"], p["cy"], p["r"], p.get("side", "left"))),
            ("fill", p.get("fill", "#000000")),
        ]
        w.tag("path", attrs + extra_style)
    elif ptype == "label":
        attrs = [
            ("id", pid),
            ("x", _n(p["x"])),
            ("y", _n(p["y"])),
            ("font-family", FONT_FAMILY),
            ("font-size", _n(p.get("fontSize", 10.0))),
            ("fill", p.get("fill", "#000000")),
            ("text-anchor", p.get("anchor", "start")),
        ]
        w.tag("text", attrs + extra_style, text=str(p.get("text", "")))
    # Unknown primitive types are skipped deliberately (forward compatibility).


def _safe(pid: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in (pid or ""))


def _gradient_defs(w: _Writer, doc: dict):
    grads = []
    for scene in doc.get("scenes", []):
        for p in scene.get("primitives", []):
            if p.get("type") == "segment" and "gradient" in p:
                grads.append(p)
    if not grads:
        return
    w.open("defs", [])
    for p in grads:
        (x1, y1), (x2, y2) = p["points"][0], p["points"][-1]
        w.open(
            "linearGradient",
            [
                ("id", f"grad_{_safe(p.get('id'))}"),
                ("gradientUnits", "userSpaceOnUse"),
                ("x1", _n(x1)),
                ("y1", _n(y1)),
                ("x2", _n(x2)),
                ("y2", _n(y2)),
            ],
        )
        w.tag("stop", [("offset", "0"), ("stop-color", p["gradient"]["from"])])
        w.tag("stop", [("offset", "1"), ("stop-color", p["gradient"]["to"])])
        w.close("linearGradient")
    w.close("defs")


def _stripe_geometry(doc: dict, stripe: dict) -> dict | None:
    """Build the stripe polygon covering a matrix row or column."""
    cells = []
    for scene in doc.get("scenes", []):
        if scene.get("id") != "matrix":
            continue
        for p in scene.get("primitives", []):
            if p.get("type") != "cell":
                continue
            if "row" in stripe and p.get("row") == stripe["row"]:
                cells.append(p)
            if "col" in stripe and p.get("col") == stripe["col"]:
                cells.append(p)
    if not cells:
        return None
    xs = [pt[0] for c in cells for pt in c["points"]]
    ys = [pt[1] for c in cells for pt in c["points"]]
    # Convex hull is overkill: the row/column strip is the bounding diamond of
    # its cells; a rotated bounding box along the two diagonal directions.
    u = [(x + y) / math.sqrt(2) for x, y in zip(xs, ys)]
    v = [(x - y) / math.sqrt(2) for x, y in zip(xs, ys)]
    corners_uv = [
        (min(u), min(v)), (min(u), max(v)), (max(u), max(v)), (max(u), min(v))
    ]
    pts = [((uu + vv) / math.sqrt(2), (uu - vv) / math.sqrt(2)) for uu, vv in corners_uv]
    return {"type": "stripe", "id": stripe["id"], "points": pts}


def render_layout(doc: dict, overlay: dict | None = None) -> str:
    """Serialize any layout document; overlay ids are re-drawn emphasized."""
    W = doc["canvas"]["width"]
    H = doc["canvas"]["height"]
    w = _Writer()
    w.lines.append('<?xml version="1.0" encoding="UTF-8"?>')
    w.open(
        "svg",
        [
            ("xmlns", "http://www.w3.org/2000/svg"),
            ("version", "1.1"),
            ("width", _n(W)),
            ("height", _n(H)),
            ("viewBox", f"0 0 {_n(W)} {_n(H)}"),
        ],
    )
    w.tag(
        "rect",
        [("id", "background"), ("x", "0"), ("y", "0"), ("width", _n(W)), ("height", _n(H)), ("fill", "#ffffff")],
    )
    _gradient_defs(w, doc)
    by_id: dict[str, dict] = {}
    for scene in doc.get("scenes", []):
        w.open("g", [("id", scene["id"])])
        for p in scene.get("primitives", []):
            _emit_primitive(w, p)
            if "id" in p:
                by_id[p["id"]] = p
        w.close("g")
    if overlay and (overlay.get("elements") or overlay.get("stripes")):
        w.open("g", [("id", "highlight")])
        for stripe in overlay.get("stripes", []):
            geom = _stripe_geometry(doc, stripe)
            if geom is not None:
                _emit_primitive(w, geom, emphasis=True)
        for eid in overlay.get("elements", []):
            p = by_id.get(eid)
            if p is None:
                continue
            q = dict(p)
            q["id"] = f"hl:{eid}"
            if q.get("type") in ("leader", "path", "segment"):
                q["stroke"] = "#ff6600"
                q["strokeWidth"] = float(q.get("strokeWidth", q.get("width", 1.0))) + 1.5
            elif q.get("type") == "cell":
                q = {
                    "type": "path",
                    "id": q["id"],
                    "points": q["points"],
                    "closed": True,
                    "stroke": "#ff6600",
                    "fill": None,
                    "strokeWidth": 1.8,
                }
            elif q.get("type") in ("circle", "halfcircle", "label"):
                q["fill"] = "#ff6600"
            _emit_primitive(w, q, emphasis=True)
        w.close("g")
    w.close("svg")
    return w.result()


def render_maptrix(layout, overlay: dict | None = None) -> str:
    doc = layout.to_doc() if hasattr(layout, "to_doc") else layout
    return render_layout(doc, overlay)


def render_odmaps(layout, overlay: dict | None = None) -> str:
    doc = layout.to_doc() if hasattr(layout, "to_doc") else layout
    return render_layout(doc, overlay)


def render_flowmap(layout, overlay: dict | None = None) -> str:
    doc = layout.to_doc() if hasattr(layout, "to_doc") else layout
    return render_layout(doc, overlay)
