"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately reimplement geometry from scratch (different
formulas and code paths than the package) so they can arbitrate.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from odflow.oddata import FlowDataset, load_dataset

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "odflow" / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"
COUNTRIES = ["au", "nz", "de", "cn", "us"]


def fixture_paths(country: str) -> tuple[Path, Path, Path]:
    base = FIXTURES / country
    return base / "flows.csv", base / "regions.geojson", base / "grid.json"


def load_fixture(country: str) -> FlowDataset:
    flows, regions, _ = fixture_paths(country)
    return load_dataset(flows.read_bytes(), regions.read_bytes())


def load_grid(country: str) -> dict:
    return json.loads(fixture_paths(country)[2].read_text())


@pytest.fixture(scope="session")
def au():
    return load_fixture("au")


@pytest.fixture(scope="session")
def nz():
    return load_fixture("nz")


@pytest.fixture(scope="session")
def us():
    return load_fixture("us")


# ---------------------------------------------------------------------------
# segment-intersection oracle (parametric form, unlike the package's
# orientation-sign implementation)


def oracle_segments_intersect(p, q, r, s, eps: float = 1e-12) -> bool:
    """Closed-segment intersection via the parametric solve."""
    dx1, dy1 = q[0] - p[0], q[1] - p[1]
    dx2, dy2 = s[0] - r[0], s[1] - r[1]
    denom = dx1 * dy2 - dy1 * dx2
    rx, ry = r[0] - p[0], r[1] - p[1]
    if abs(denom) > eps:
        t = (rx * dy2 - ry * dx2) / denom
        w = (rx * dy1 - ry * dx1) / denom
        return -eps <= t <= 1 + eps and -eps <= w <= 1 + eps
    # Parallel: intersect only if collinear and overlapping in projection.
    if abs(rx * dy1 - ry * dx1) > 1e-9 * (1 + abs(dx1) + abs(dy1)):
        return False
    if abs(dx1) >= abs(dy1):
        lo1, hi1 = sorted((p[0], q[0]))
        lo2, hi2 = sorted((r[0], s[0]))
    else:
        lo1, hi1 = sorted((p[1], q[1]))
        lo2, hi2 = sorted((r[1], s[1]))
    return hi1 >= lo2 - eps and hi2 >= lo1 - eps


def count_crossings(polylines: list) -> int:
    """O(n^2) pairwise crossing count over leader polylines."""
    count = 0
    cleaned = []
    for poly in polylines:
        segs = []
        for a, b in zip(poly, poly[1:]):
            if abs(a[0] - b[0]) > 1e-12 or abs(a[1] - b[1]) > 1e-12:
                segs.append((a, b))
        cleaned.append(segs)
    for i in range(len(cleaned)):
        for j in range(i + 1, len(cleaned)):
            hit = False
            for a, b in cleaned[i]:
                for r, s in cleaned[j]:
                    if oracle_segments_intersect(a, b, r, s):
                        hit = True
                        break
                if hit:
                    break
            if hit:
                count += 1
    return count


def leaders_of(layout_doc: dict, side: str) -> list:
    out = []
    for scene in layout_doc["scenes"]:
        for p in scene["primitives"]:
            if p.get("type") == "leader" and p.get("side") == side:
                out.append([tuple(pt) for pt in p["points"]])
    return out


# oracle: point to the slope-k line through a site
def point_to_line_distance(point, through, k: float) -> float:
    # line: k*x - y + (through_y - k*through_x) = 0
    c = through[1] - k * through[0]
    return abs(k * point[0] - point[1] + c) / math.sqrt(k * k + 1.0)
