"""OD flow dataset ingestion, validation, filtering and aggregation.

Datasets are immutable after load; filtering and aggregation return new
values.  Totals are computed with math.fsum so the conservation identity
(sum of per-region inflow == sum of per-region outflow == sum of magnitudes)
holds exactly for float magnitudes too.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace

from .errors import (
    DuplicateFlowError,
    InvalidRangeError,
    NegativeMagnitudeError,
    OverlappingGroupsError,
    ParseError,
    UnknownRegionError,
)
from .geo import GeoPoint

Ring = tuple[GeoPoint, ...]
Polygon = tuple[Ring, ...]  # first ring is the outer boundary


@dataclass(frozen=True)
class Region:
    id: str
    name: str
    abbr: str
    boundary: tuple[Polygon, ...]
    anchor: GeoPoint
    active: bool = True


@dataclass(frozen=True)
class Flow:
    origin: str
    dest: str
    magnitude: float


@dataclass(frozen=True)
class RegionGroup:
    label: str
    member_ids: frozenset[str]


def _ring_area(ring: Ring) -> float:
    """Shoelace area in lon/lat plane units; magnitude only used to rank rings."""
    s = 0.0
    for a, b in zip(ring, ring[1:]):
        s += a.lon * b.lat - b.lon * a.lat
    return abs(s) / 2.0


def _point_in_ring(lon: float, lat: float, ring: Ring) -> bool:
    inside = False
    for a, b in zip(ring, ring[1:]):
        if (a.lat > lat) != (b.lat > lat):
            t = (lat - a.lat) / (b.lat - a.lat)
            x = a.lon + t * (b.lon - a.lon)
            if x > lon:
                inside = not inside
    return inside


def largest_polygon(region: Region) -> Polygon:
    return max(region.boundary, key=lambda poly: _ring_area(poly[0]))


def point_in_polygon(p: GeoPoint, poly: Polygon) -> bool:
    # Even-odd over all rings (holes flip containment).
    count = sum(1 for ring in poly if _point_in_ring(p.lon, p.lat, ring))
    return count % 2 == 1


def _representative_point(poly: Polygon) -> GeoPoint:
    ring = poly[0]
    cx = sum(p.lon for p in ring[:-1]) / max(1, len(ring) - 1)
    cy = sum(p.lat for p in ring[:-1]) / max(1, len(ring) - 1)
    cand = GeoPoint(cx, cy)
    if point_in_polygon(cand, poly):
        return cand
    # Fall back to the midpoint of the widest interior span on the lat = cy line.
    xs: list[float] = []
    for a, b in zip(ring, ring[1:]):
        if (a.lat > cy) != (b.lat > cy):
            t = (cy - a.lat) / (b.lat - a.lat)
            xs.append(a.lon + t * (b.lon - a.lon))
    xs.sort()
    best, width = cand.lon, -1.0
    for lo, hi in zip(xs[0::2], xs[1::2]):
        if hi - lo > width:
            width, best = hi - lo, (lo + hi) / 2.0
    return GeoPoint(best, cy)


class FlowDataset:
    """Validated set of regions and directed flows with derived totals."""

    def __init__(self, regions: list[Region], flows: list[Flow], allow_self_flows: bool = False):
        self.regions: tuple[Region, ...] = tuple(regions)
        self.flows: tuple[Flow, ...] = tuple(flows)
        self.allow_self_flows = allow_self_flows
        self._by_id = {r.id: r for r in self.regions}
        if len(self._by_id) != len(self.regions):
            seen = set()
            for r in self.regions:
                if r.id in seen:
                    raise ParseError(f"duplicate region id {r.id!r}")
                seen.add(r.id)
        pairs = set()
        for f in self.flows:
            if f.origin not in self._by_id:
                raise UnknownRegionError(f.origin)
            if f.dest not in self._by_id:
                raise UnknownRegionError(f.dest)
            if f.origin == f.dest and not allow_self_flows:
                raise DuplicateFlowError(f"self-flow {f.origin}->{f.dest} not enabled")
            if f.magnitude < 0 or not math.isfinite(f.magnitude):
                raise NegativeMagnitudeError(f"flow {f.origin}->{f.dest}: {f.magnitude}")
            if (f.origin, f.dest) in pairs:
                raise DuplicateFlowError(f"{f.origin}->{f.dest}")
            pairs.add((f.origin, f.dest))
        self.total_in = {r.id: math.fsum(f.magnitude for f in self.flows if f.dest == r.id) for r in self.regions}
        self.total_out = {r.id: math.fsum(f.magnitude for f in self.flows if f.origin == r.id) for r in self.regions}

    def region(self, rid: str) -> Region:
        try:
            return self._by_id[rid]
        except KeyError:
            raise UnknownRegionError(rid) from None

    @property
    def active_regions(self) -> list[Region]:
        return [r for r in self.regions if r.active]

    def flow_map(self) -> dict[tuple[str, str], float]:
        return {(f.origin, f.dest): f.magnitude for f in self.flows}

    def magnitude_domain(self) -> tuple[float, float]:
        if not self.flows:
            return (0.0, 0.0)
        mags = [f.magnitude for f in self.flows]
        return (min(mags), max(mags))


def totals(d: FlowDataset) -> dict[str, dict[str, float]]:
    """Per-region in/out totals, ordered by region id."""
    return {
        rid: {"in": d.total_in[rid], "out": d.total_out[rid]}
        for rid in sorted(d.total_in)
    }


def _decode(stream) -> str:
    if isinstance(stream, bytes):
        data = stream
    elif isinstance(stream, str):
        return stream
    else:
        data = stream.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"input is not valid UTF-8: {e}") from None


def _parse_regions_geojson(text: str) -> list[Region]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid GeoJSON: {e.msg}", line=e.lineno) from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError("regions file must be a GeoJSON FeatureCollection")
    regions: list[Region] = []
    for idx, feat in enumerate(doc.get("features", [])):
        props = feat.get("properties") or {}
        rid = props.get("id")
        if rid is None:
            raise ParseError("feature missing required property 'id'", feature=idx)
        rid = str(rid)
        name = str(props.get("name", rid))
        abbr = str(props.get("abbr", rid[:4]))[:4]
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        if gtype == "Polygon":
            poly_list = [coords]
        elif gtype == "MultiPolygon":
            poly_list = coords
        else:
            raise ParseError(f"unsupported geometry type {gtype!r}", feature=idx)
        polygons: list[Polygon] = []
        try:
            for poly in poly_list:
                rings: list[Ring] = []
                for ring in poly:
                    pts = tuple(GeoPoint(float(x), float(y)) for x, y in ring)
                    if len(pts) < 4 or pts[0] != pts[-1]:
                        raise ParseError(
                            f"ring of region {rid!r} is not closed", feature=idx
                        )
                    rings.append(pts)
                polygons.append(tuple(rings))
        except (TypeError, ValueError) as e:
            raise ParseError(f"bad coordinates in region {rid!r}: {e}", feature=idx) from None
        boundary = tuple(polygons)
        if "anchorLon" in props and "anchorLat" in props:
            anchor = GeoPoint(float(props["anchorLon"]), float(props["anchorLat"]))
        else:
            anchor = _representative_point(max(boundary, key=lambda p: _ring_area(p[0])))
        regions.append(Region(rid, name, abbr, boundary, anchor))
    return regions


def _parse_flows_csv(text: str, region_ids: set[str], allow_self_flows: bool) -> list[Flow]:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty flows file", line=1) from None
    if [h.strip().lower() for h in header] != ["origin", "dest", "magnitude"]:
        raise ParseError("flows header must be 'origin,dest,magnitude'", line=1)
    flows: list[Flow] = []
    seen: set[tuple[str, str]] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", line=lineno)
        origin, dest, mag_text = (c.strip() for c in row)
        if origin not in region_ids:
            raise UnknownRegionError(origin)
        if dest not in region_ids:
            raise UnknownRegionError(dest)
        if origin == dest and not allow_self_flows:
            raise DuplicateFlowError(f"self-flow {origin}->{dest} at line {lineno}")
        try:
            mag = float(mag_text)
        except ValueError:
            raise ParseError(f"bad magnitude {mag_text!r}", line=lineno) from None
        if mag < 0 or not math.isfinite(mag):
            raise NegativeMagnitudeError(f"{origin}->{dest}: {mag_text} (line {lineno})")
        if (origin, dest) in seen:
            raise DuplicateFlowError(f"{origin}->{dest} (line {lineno})")
        seen.add((origin, dest))
        flows.append(Flow(origin, dest, mag))
    return flows


def load_dataset(flows_csv, regions_geojson, allow_self_flows: bool = False) -> FlowDataset:
    """Build a dataset from a flows CSV stream and a regions GeoJSON stream."""
    regions = _parse_regions_geojson(_decode(regions_geojson))
    flows = _parse_flows_csv(_decode(flows_csv), {r.id for r in regions}, allow_self_flows)
    return FlowDataset(regions, flows, allow_self_flows=allow_self_flows)


def filter_by_magnitude(d: FlowDataset, lo: float, hi: float) -> FlowDataset:
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise InvalidRangeError(f"invalid range [{lo}, {hi}]")
    kept = [f for f in d.flows if lo <= f.magnitude <= hi]
    incident = {f.origin for f in kept} | {f.dest for f in kept}
    regions = [replace(r, active=r.id in incident) for r in d.regions]
    return FlowDataset(regions, kept, allow_self_flows=d.allow_self_flows)


def aggregate_regions(d: FlowDataset, groups: list[RegionGroup]) -> FlowDataset:
    claimed: dict[str, str] = {}
    for g in groups:
        if not g.member_ids:
            raise OverlappingGroupsError(f"group {g.label!r} is empty")
        for m in g.member_ids:
            d.region(m)  # raises UnknownRegion
            if m in claimed:
                raise OverlappingGroupsError(
                    f"region {m!r} in groups {claimed[m]!r} and {g.label!r}"
                )
            claimed[m] = g.label
    member_of = dict(claimed)
    remaining = [r for r in d.regions if r.id not in member_of]
    for g in groups:
        if any(r.id == g.label for r in remaining):
            raise OverlappingGroupsError(
                f"group label {g.label!r} collides with an ungrouped region id"
            )

    synthetic: list[Region] = []
    for g in groups:
        members = [d.region(m) for m in sorted(g.member_ids)]
        boundary = tuple(poly for r in members for poly in r.boundary)  # union placeholder
        anchor = GeoPoint(
            sum(r.anchor.lon for r in members) / len(members),
            sum(r.anchor.lat for r in members) / len(members),
        )
        synthetic.append(Region(g.label, g.label, g.label[:4], boundary, anchor))

    def node(rid: str) -> str:
        return member_of.get(rid, rid)

    sums: dict[tuple[str, str], float] = {}
    for f in d.flows:
        key = (node(f.origin), node(f.dest))
        sums[key] = sums.get(key, 0.0) + f.magnitude
    has_self = any(o == t for o, t in sums)
    flows = [Flow(o, t, m) for (o, t), m in sorted(sums.items())]
    new_regions = sorted(remaining + synthetic, key=lambda r: r.id)
    return FlowDataset(new_regions, flows, allow_self_flows=d.allow_self_flows or has_self)
