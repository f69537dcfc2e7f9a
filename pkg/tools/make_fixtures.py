"""Generate the shipped country fixtures (regions, flows, OD-Maps grids).

Run from the repo root:  python tools/make_fixtures.py

Anchors are approximate administrative centroids; boundaries are synthetic
organic polygons around the anchors (real cartographic outlines are not
needed by any consumer of these fixtures).  Flow magnitudes come from a
seeded gravity model so every fixture is deterministic.  Grid assignments
are hand-made tile maps; they ship as data, the engine never derives them.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "odflow" / "fixtures"

# country -> list of (id, name, lon, lat, radius_deg, weight)
REGIONS = {
    "au": [
        ("NSW", "New South Wales", 147.0, -32.5, 4.0, 7.5),
        ("VIC", "Victoria", 144.5, -36.8, 2.6, 6.0),
        ("QLD", "Queensland", 145.0, -22.5, 6.0, 4.8),
        ("SA", "South Australia", 135.5, -30.0, 5.0, 1.7),
        ("WA", "Western Australia", 122.0, -25.5, 7.5, 2.6),
        ("TAS", "Tasmania", 146.5, -42.0, 1.5, 0.5),
        ("NT", "Northern Territory", 133.5, -19.5, 5.5, 0.25),
        ("ACT", "Australian Capital Territory", 149.6, -35.3, 0.55, 0.4),
    ],
    "nz": [
        ("NTL", "Northland", 173.8, -35.5, 0.75, 0.18),
        ("AUK", "Auckland", 174.76, -36.85, 0.42, 1.6),
        ("WKO", "Waikato", 175.3, -37.9, 0.85, 0.46),
        ("BOP", "Bay of Plenty", 176.8, -38.05, 0.65, 0.31),
        ("GIS", "Gisborne", 177.98, -38.6, 0.52, 0.05),
        ("HKB", "Hawke's Bay", 176.7, -39.4, 0.62, 0.16),
        ("TKI", "Taranaki", 174.3, -39.3, 0.5, 0.12),
        ("MWT", "Manawatu-Whanganui", 175.5, -39.95, 0.78, 0.24),
        ("WGN", "Wellington", 175.25, -41.2, 0.45, 0.52),
        ("TSM", "Tasman", 172.7, -41.45, 0.58, 0.055),
        ("NSN", "Nelson", 173.28, -41.27, 0.22, 0.052),
        ("MBH", "Marlborough", 173.75, -41.85, 0.55, 0.049),
        ("WTC", "West Coast", 171.5, -42.8, 0.85, 0.033),
        ("CAN", "Canterbury", 171.8, -43.7, 1.05, 0.62),
        ("OTA", "Otago", 169.8, -45.15, 0.9, 0.24),
        ("STL", "Southland", 168.1, -45.9, 0.85, 0.1),
    ],
    "de": [
        ("SH", "Schleswig-Holstein", 9.8, 54.2, 0.85, 2.9),
        ("HH", "Hamburg", 10.0, 53.55, 0.24, 1.8),
        ("NI", "Niedersachsen", 9.2, 52.8, 1.35, 8.0),
        ("HB", "Bremen", 8.8, 53.08, 0.14, 0.68),
        ("NW", "Nordrhein-Westfalen", 7.6, 51.5, 1.15, 17.9),
        ("HE", "Hessen", 9.0, 50.6, 0.95, 6.3),
        ("RP", "Rheinland-Pfalz", 7.4, 49.9, 0.85, 4.1),
        ("BW", "Baden-Wuerttemberg", 9.0, 48.5, 1.15, 11.1),
        ("BY", "Bayern", 11.5, 48.9, 1.65, 13.1),
        ("SL", "Saarland", 6.95, 49.38, 0.28, 0.99),
        ("BE", "Berlin", 13.41, 52.52, 0.2, 3.6),
        ("BB", "Brandenburg", 13.1, 52.0, 1.05, 2.5),
        ("MV", "Mecklenburg-Vorpommern", 12.5, 53.6, 0.95, 1.6),
        ("SN", "Sachsen", 13.3, 51.0, 0.85, 4.1),
        ("ST", "Sachsen-Anhalt", 11.7, 52.0, 0.8, 2.2),
        ("TH", "Thueringen", 11.0, 50.9, 0.72, 2.1),
    ],
    "cn": [
        ("BJ", "Beijing", 116.4, 40.2, 0.75, 21.5),
        ("TJ", "Tianjin", 117.35, 39.3, 0.5, 13.9),
        ("HE", "Hebei", 115.7, 38.5, 1.6, 74.6),
        ("SX", "Shanxi", 112.4, 37.7, 1.3, 34.9),
        ("NM", "Inner Mongolia", 111.7, 44.0, 3.8, 24.0),
        ("LN", "Liaoning", 122.6, 41.3, 1.4, 42.6),
        ("JL", "Jilin", 126.2, 43.7, 1.5, 24.1),
        ("HL", "Heilongjiang", 128.0, 47.9, 2.4, 31.9),
        ("SH", "Shanghai", 121.44, 31.17, 0.3, 24.9),
        ("JS", "Jiangsu", 119.5, 33.0, 1.2, 84.8),
        ("ZJ", "Zhejiang", 120.1, 29.2, 1.05, 64.6),
        ("AH", "Anhui", 117.2, 31.8, 1.2, 61.0),
        ("FJ", "Fujian", 118.0, 26.1, 1.1, 41.5),
        ("JX", "Jiangxi", 115.7, 27.6, 1.2, 45.2),
        ("SD", "Shandong", 118.1, 36.3, 1.3, 101.5),
        ("HA", "Henan", 113.6, 33.9, 1.25, 99.4),
        ("HB", "Hubei", 112.3, 31.2, 1.3, 57.8),
        ("HN", "Hunan", 111.7, 27.6, 1.3, 66.4),
        ("GD", "Guangdong", 113.4, 23.3, 1.3, 126.0),
        ("GX", "Guangxi", 108.8, 23.8, 1.3, 50.1),
        ("HI", "Hainan", 109.75, 19.2, 0.65, 10.1),
        ("CQ", "Chongqing", 107.9, 30.1, 0.9, 32.1),
        ("SC", "Sichuan", 102.7, 30.6, 2.3, 83.7),
        ("GZ", "Guizhou", 106.9, 26.8, 1.1, 38.6),
        ("YN", "Yunnan", 101.5, 25.0, 1.8, 47.2),
        ("XZ", "Tibet", 88.4, 31.7, 3.4, 3.6),
        ("SN", "Shaanxi", 108.9, 35.2, 1.5, 39.5),
        ("GS", "Gansu", 100.7, 38.0, 2.1, 25.0),
        ("QH", "Qinghai", 96.0, 35.7, 2.3, 5.9),
        ("NX", "Ningxia", 106.2, 37.3, 0.68, 7.2),
        ("XJ", "Xinjiang", 85.3, 41.1, 4.4, 25.9),
        ("TW", "Taiwan", 120.96, 23.7, 0.75, 23.6),
        ("HK", "Hong Kong", 114.17, 22.32, 0.14, 7.5),
        ("MO", "Macao", 113.55, 22.16, 0.07, 0.68),
    ],
    "us": [
        ("AL", "Alabama", -86.8, 32.8, 1.4, 5.0), ("AK", "Alaska", -152.0, 64.0, 5.0, 0.73),
        ("AZ", "Arizona", -111.9, 34.3, 1.9, 7.3), ("AR", "Arkansas", -92.4, 34.9, 1.4, 3.0),
        ("CA", "California", -119.6, 37.2, 2.9, 39.0), ("CO", "Colorado", -105.5, 39.0, 1.8, 5.8),
        ("CT", "Connecticut", -72.7, 41.6, 0.42, 3.6), ("DE", "Delaware", -75.5, 39.0, 0.3, 1.0),
        ("DC", "District of Columbia", -77.02, 38.9, 0.09, 0.7),
        ("FL", "Florida", -81.7, 28.1, 1.9, 22.2), ("GA", "Georgia", -83.4, 32.7, 1.5, 11.0),
        ("HI", "Hawaii", -157.5, 20.3, 1.0, 1.4), ("ID", "Idaho", -114.6, 44.4, 1.7, 1.9),
        ("IL", "Illinois", -89.2, 40.0, 1.5, 12.6), ("IN", "Indiana", -86.3, 39.9, 1.2, 6.8),
        ("IA", "Iowa", -93.5, 42.1, 1.3, 3.2), ("KS", "Kansas", -98.4, 38.5, 1.5, 2.9),
        ("KY", "Kentucky", -85.3, 37.5, 1.3, 4.5), ("LA", "Louisiana", -92.0, 31.1, 1.3, 4.6),
        ("ME", "Maine", -69.2, 45.4, 1.1, 1.4), ("MD", "Maryland", -76.8, 39.0, 0.7, 6.2),
        ("MA", "Massachusetts", -71.8, 42.3, 0.55, 7.0), ("MI", "Michigan", -84.7, 43.5, 1.6, 10.0),
        ("MN", "Minnesota", -94.3, 46.3, 1.6, 5.7), ("MS", "Mississippi", -89.7, 32.7, 1.3, 2.9),
        ("MO", "Missouri", -92.5, 38.4, 1.5, 6.2), ("MT", "Montana", -109.6, 47.0, 2.2, 1.1),
        ("NE", "Nebraska", -99.8, 41.5, 1.5, 2.0), ("NV", "Nevada", -116.6, 39.3, 1.8, 3.2),
        ("NH", "New Hampshire", -71.6, 43.7, 0.55, 1.4), ("NJ", "New Jersey", -74.7, 40.2, 0.55, 9.3),
        ("NM", "New Mexico", -106.1, 34.4, 1.8, 2.1), ("NY", "New York", -75.5, 43.0, 1.5, 19.6),
        ("NC", "North Carolina", -79.4, 35.5, 1.4, 10.7), ("ND", "North Dakota", -100.5, 47.4, 1.4, 0.78),
        ("OH", "Ohio", -82.8, 40.2, 1.3, 11.8), ("OK", "Oklahoma", -97.5, 35.6, 1.4, 4.0),
        ("OR", "Oregon", -120.6, 43.9, 1.7, 4.2), ("PA", "Pennsylvania", -77.8, 40.9, 1.3, 13.0),
        ("RI", "Rhode Island", -71.5, 41.7, 0.2, 1.1), ("SC", "South Carolina", -80.9, 33.9, 1.0, 5.3),
        ("SD", "South Dakota", -100.2, 44.4, 1.4, 0.9), ("TN", "Tennessee", -86.3, 35.8, 1.4, 7.1),
        ("TX", "Texas", -99.3, 31.5, 3.3, 30.0), ("UT", "Utah", -111.7, 39.3, 1.5, 3.4),
        ("VT", "Vermont", -72.7, 44.1, 0.5, 0.65), ("VA", "Virginia", -78.8, 37.5, 1.3, 8.7),
        ("WA", "Washington", -120.4, 47.4, 1.5, 7.8), ("WV", "West Virginia", -80.6, 38.6, 1.0, 1.8),
        ("WI", "Wisconsin", -89.8, 44.6, 1.4, 5.9), ("WY", "Wyoming", -107.6, 43.0, 1.7, 0.58),
    ],
}

GRIDS = {
    "au": {
        "gridSize": [4, 4],
        "cells": {
            "NT": [1, 0], "QLD": [2, 0],
            "WA": [0, 1], "SA": [1, 1], "NSW": [2, 1], "ACT": [3, 1],
            "VIC": [2, 2],
            "TAS": [2, 3],
        },
    },
    "nz": {
        "gridSize": [4, 9],
        "cells": {
            "NTL": [1, 0], "AUK": [1, 1], "WKO": [1, 2], "BOP": [2, 2],
            "TKI": [0, 3], "MWT": [1, 3], "HKB": [2, 3], "GIS": [3, 3],
            "WGN": [1, 4],
            "TSM": [0, 5], "NSN": [1, 5], "MBH": [2, 5],
            "WTC": [0, 6], "CAN": [1, 6],
            "OTA": [1, 7], "STL": [0, 8],
        },
    },
    "de": {
        "gridSize": [4, 5],
        "cells": {
            "SH": [1, 0], "MV": [2, 0],
            "HB": [0, 1], "HH": [1, 1], "BE": [2, 1], "BB": [3, 1],
            "NW": [0, 2], "NI": [1, 2], "ST": [2, 2], "SN": [3, 2],
            "RP": [0, 3], "HE": [1, 3], "TH": [2, 3],
            "SL": [0, 4], "BW": [1, 4], "BY": [2, 4],
        },
    },
    "cn": {
        "gridSize": [7, 7],
        "cells": {
            "XJ": [0, 0], "NM": [4, 0], "HL": [6, 0],
            "QH": [1, 1], "GS": [2, 1], "NX": [3, 1], "BJ": [4, 1], "TJ": [5, 1], "JL": [6, 1],
            "XZ": [0, 2], "SN": [2, 2], "SX": [3, 2], "HE": [4, 2], "SD": [5, 2], "LN": [6, 2],
            "SC": [1, 3], "CQ": [2, 3], "HA": [3, 3], "AH": [4, 3], "JS": [5, 3], "SH": [6, 3],
            "YN": [1, 4], "GZ": [2, 4], "HB": [3, 4], "JX": [4, 4], "ZJ": [5, 4],
            "GX": [2, 5], "HN": [3, 5], "GD": [4, 5], "FJ": [5, 5], "TW": [6, 5],
            "HI": [3, 6], "MO": [4, 6], "HK": [5, 6],
        },
    },
    "us": {
        "gridSize": [11, 8],
        "cells": {
            "AK": [0, 0], "ME": [10, 0],
            "WA": [0, 1], "ID": [1, 1], "MT": [2, 1], "ND": [3, 1], "MN": [4, 1],
            "WI": [5, 1], "MI": [6, 1], "NY": [8, 1], "VT": [9, 1], "NH": [10, 1],
            "OR": [0, 2], "NV": [1, 2], "WY": [2, 2], "SD": [3, 2], "IA": [4, 2],
            "IL": [5, 2], "IN": [6, 2], "OH": [7, 2], "PA": [8, 2], "NJ": [9, 2], "MA": [10, 2],
            "CA": [0, 3], "UT": [1, 3], "CO": [2, 3], "NE": [3, 3], "MO": [4, 3],
            "KY": [5, 3], "WV": [6, 3], "VA": [7, 3], "MD": [8, 3], "CT": [9, 3], "RI": [10, 3],
            "AZ": [1, 4], "NM": [2, 4], "KS": [3, 4], "AR": [4, 4], "TN": [5, 4],
            "NC": [6, 4], "SC": [7, 4], "DC": [8, 4], "DE": [9, 4],
            "OK": [3, 5], "LA": [4, 5], "MS": [5, 5], "AL": [6, 5], "GA": [7, 5],
            "TX": [3, 6], "FL": [7, 6],
            "HI": [0, 7],
        },
    },
}


def organic_polygon(lon: float, lat: float, radius: float, seed: str) -> list[list[float]]:
    """Closed ring around (lon, lat): a wobbled circle, deterministic per seed."""
    rng = random.Random(seed)
    phase1 = rng.uniform(0, 2 * math.pi)
    phase2 = rng.uniform(0, 2 * math.pi)
    a1 = rng.uniform(0.08, 0.2)
    a2 = rng.uniform(0.04, 0.12)
    pts = []
    n = 12
    for i in range(n):
        th = 2 * math.pi * i / n
        r = radius * (1.0 + a1 * math.sin(3 * th + phase1) + a2 * math.sin(5 * th + phase2))
        pts.append([round(lon + r * math.cos(th), 4), round(lat + r * math.sin(th), 4)])
    pts.append(list(pts[0]))
    return pts


def gravity_flows(country: str, rows) -> list[tuple[str, str, int]]:
    rng = random.Random(f"flows:{country}")
    flows = []
    for oid, _, olon, olat, _, ow in rows:
        for did, _, dlon, dlat, _, dw in rows:
            if oid == did:
                continue
            dist2 = (olon - dlon) ** 2 + (olat - dlat) ** 2
            base = 2500.0 * ow * dw / (10.0 + dist2)
            mag = max(1, int(round(base * rng.uniform(0.6, 1.5))))
            flows.append((oid, did, mag))
    return flows


def main() -> None:
    for country, rows in REGIONS.items():
        d = OUT / country
        d.mkdir(parents=True, exist_ok=True)
        features = []
        for rid, name, lon, lat, radius, _ in rows:
            features.append(
                {
                    "type": "Feature",
                    "properties": {
                        "id": rid,
                        "name": name,
                        "abbr": rid,
                        "anchorLon": lon,
                        "anchorLat": lat,
                    },
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [organic_polygon(lon, lat, radius, f"{country}:{rid}")],
                    },
                }
            )
        geojson = {"type": "FeatureCollection", "features": features}
        (d / "regions.geojson").write_text(
            json.dumps(geojson, indent=1, sort_keys=True) + "\n", encoding="utf-8"
        )

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["origin", "dest", "magnitude"])
        for o, t, m in gravity_flows(country, rows):
            w.writerow([o, t, m])
        (d / "flows.csv").write_text(buf.getvalue(), encoding="utf-8")

        grid = GRIDS[country]
        assert set(grid["cells"]) == {r[0] for r in rows}, country
        seen = set()
        for cell in grid["cells"].values():
            key = tuple(cell)
            assert key not in seen, (country, cell)
            assert 0 <= cell[0] < grid["gridSize"][0] and 0 <= cell[1] < grid["gridSize"][1]
            seen.add(key)
        # Flat file form: {regionId: [col, row], ..., gridSize: [W, H]}
        (d / "grid.json").write_text(
            json.dumps(
                {**grid["cells"], "gridSize": grid["gridSize"]},
                indent=1,
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )
        print(f"{country}: {len(rows)} regions, {len(rows) * (len(rows) - 1)} flows")


if __name__ == "__main__":
    main()
