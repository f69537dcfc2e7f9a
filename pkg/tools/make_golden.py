"""Regenerate the golden SVGs under tests/golden/.

Run after any intentional rendering change, then review the diffs:
    python tools/make_golden.py
"""

from __future__ import annotations

import json
from pathlib import Path

from odflow.layouts import layout_flowmap, layout_maptrix, layout_odmaps
from odflow.oddata import load_dataset
from odflow.rendersvg import render_layout

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "src" / "odflow" / "fixtures"
GOLDEN = ROOT / "tests" / "golden"


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for country in ["au", "nz", "de", "cn", "us"]:
        base = FIXTURES / country
        d = load_dataset((base / "flows.csv").read_bytes(), (base / "regions.geojson").read_bytes())
        grid = json.loads((base / "grid.json").read_text())
        for kind, layout in (
            ("maptrix", layout_maptrix(d)),
            ("odmaps", layout_odmaps(d, grid)),
            ("flowmap", layout_flowmap(d)),
        ):
            svg = render_layout(layout.to_doc())
            out = GOLDEN / f"{country}_{kind}.svg"
            out.write_bytes(svg.encode("utf-8"))
            print(f"{out.name}: {len(svg)} bytes")


if __name__ == "__main__":
    main()
