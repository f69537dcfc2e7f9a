"""Command line front door.

    odflow render   --kind maptrix|odmaps|flowmap --flows f.csv --regions r.geojson
                    [--grid g.json] [--filter lo:hi] [--groups spec] -o out.svg
    odflow export3d --repr map|globe|mapslink --encoding constant|quantity|distance
                    --flows f.csv --regions r.geojson -o out.json|out.obj
    odflow serve    [--port N] [--fixtures-dir D]
    odflow bench-qp --regions r.geojson [--n 51] [--trials 20]

Exit codes: 0 ok, 2 validation error, 3 internal error.  --json-errors makes
stderr machine-readable.  Defaults may come from a flat key=value config
file (odflow.toml in the working directory, or --config PATH); environment
variables PORT and FIXTURES_DIR override the built-in defaults, an explicit
flag wins over both.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import statistics
import sys
import time
from pathlib import Path

from .errors import InvalidRangeError, LayoutError, OdflowError, ParseError
from .jsonutil import canonical_json_bytes
from .layouts import apply_ops, layout_flowmap, layout_maptrix, layout_odmaps
from .leaderlayout import MatrixEdge, compute_ordering, grow_raw_rect, prune_free_rect, route_leaders
from .oddata import load_dataset
from .qprefine import QpParams, build_qp, solve_qp
from .rendersvg import render_layout
from .scene3d import dataset_curves
from .flow3d import curves_to_obj


def _read_config(path: str | None) -> dict[str, str]:
    p = Path(path) if path else Path("odflow.toml")
    if not p.exists():
        return {}
    out: dict[str, str] = {}
    for raw in p.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip().strip('"').strip("'")
    return out


def _fail(args, err: OdflowError | Exception, code: int) -> int:
    if getattr(args, "json_errors", False):
        payload = err.to_dict() if isinstance(err, OdflowError) else {
            "type": type(err).__name__,
            "message": str(err),
        }
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"error: {err}\n")
    return code


def _parse_filter(spec: str) -> tuple[float, float]:
    try:
        lo_s, _, hi_s = spec.partition(":")
        lo, hi = float(lo_s), float(hi_s)
    except ValueError:
        raise InvalidRangeError(f"bad --filter {spec!r}; expected lo:hi") from None
    if math.isnan(lo) or math.isnan(hi) or lo > hi:
        raise InvalidRangeError(f"bad --filter {spec!r}: lo must be <= hi")
    return lo, hi


def _parse_groups(spec: str) -> list[dict]:
    # "A:r1,r2;B:r3,r4"
    groups = []
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        label, _, members = part.partition(":")
        if not label or not members:
            raise ParseError(f"bad --groups {spec!r}; expected LABEL:id,id;LABEL:id")
        groups.append({"label": label.strip(), "members": [m.strip() for m in members.split(",") if m.strip()]})
    if not groups:
        raise ParseError("empty --groups spec")
    return groups


def _build_op(args) -> dict:
    op: dict = {}
    if getattr(args, "filter", None):
        op["filter"] = list(_parse_filter(args.filter))
    if getattr(args, "groups", None):
        op["groups"] = _parse_groups(args.groups)
    return op


def cmd_render(args) -> int:
    d = load_dataset(Path(args.flows).read_bytes(), Path(args.regions).read_bytes())
    op = _build_op(args)
    if op:
        d = apply_ops(d, op)
    canvas = (args.width, args.height)
    if args.kind == "maptrix":
        layout = layout_maptrix(d, canvas)
    elif args.kind == "odmaps":
        from .errors import BadGridAssignmentError

        if not args.grid:
            raise BadGridAssignmentError("--kind odmaps requires --grid")
        layout = layout_odmaps(d, json.loads(Path(args.grid).read_text()), canvas)
    else:
        layout = layout_flowmap(d, canvas)
    svg = render_layout(layout.to_doc())
    Path(args.output).write_bytes(svg.encode("utf-8"))
    return 0


def cmd_export3d(args) -> int:
    d = load_dataset(Path(args.flows).read_bytes(), Path(args.regions).read_bytes())
    op = _build_op(args)
    if op:
        d = apply_ops(d, op)
    curves = dataset_curves(d, args.repr, args.encoding, samples=args.samples)
    out = Path(args.output)
    if out.suffix.lower() == ".obj":
        out.write_bytes(curves_to_obj(curves).encode("utf-8"))
    else:
        body = {
            "schemaVersion": "1.0",
            "repr": args.repr,
            "encoding": args.encoding,
            "curves": [c.to_doc() for c in curves],
        }
        out.write_bytes(canonical_json_bytes(body))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(fixtures_dir=args.fixtures_dir)
    uvicorn.run(app, host=args.host, port=int(args.port), log_level="warning")
    return 0


def bench_once(regions, n: int, rng: random.Random) -> dict[str, float]:
    """One re-layout trial: ordering + routing + pruning + QP, timed stages.

    Raw rectangle growth is static map geometry (independent of the
    interaction that triggers a re-layout) and is prepared outside the
    timed region.
    """
    ids = [r.id for r in regions][:n]
    # Scene coordinates mirror the MapTrix arrangement at a 1200x800 canvas.
    from .layouts import _project_regions, _MapTransform
    from .oddata import FlowDataset

    d = FlowDataset([r for r in regions][:n], [])
    proj = _project_regions(d)
    h_d = 344.0
    cell = h_d * math.sqrt(2.0) / n
    top = (840.0, 400.0 + h_d)
    rowdir = (-math.sqrt(0.5), -math.sqrt(0.5))
    ports = tuple(
        (top[0] + rowdir[0] * cell * (i + 0.5), top[1] + rowdir[1] * cell * (i + 0.5))
        for i in range(n)
    )
    bx0, by0, bx1, by1 = proj["bbox"]
    scale = min(380.0 / max(bx1 - bx0, 1e-9), (h_d - cell) / max(by1 - by0, 1e-9))
    t = _MapTransform(proj["bbox"], scale, 30.0 + scale * (bx1 - bx0) / 2.0, 400.0 + h_d / 2.0)
    anchors = [(rid, t.apply(proj["anchors"][rid])) for rid in ids]
    boundaries = {
        rid: [[t.apply(p) for p in ring] for ring in proj["largest"][rid]] for rid in ids
    }
    jitter = [(rid, (p[0] + rng.uniform(-2, 2), p[1] + rng.uniform(-2, 2))) for rid, p in anchors]
    raw = {rid: grow_raw_rect(boundaries[rid], p) for rid, p in jitter}

    t0 = time.perf_counter()
    edge = MatrixEdge(ports)
    ordering = compute_ordering(jitter, edge)
    t1 = time.perf_counter()
    plan = route_leaders(jitter, ordering, edge)
    t2 = time.perf_counter()
    for leader in plan.leaders:
        others = [l.points for l in plan.leaders if l.region_id != leader.region_id]
        plan.free_rects[leader.region_id] = prune_free_rect(
            raw[leader.region_id], leader.site, others, 3.0
        )
    t3 = time.perf_counter()
    problem = build_qp(plan, plan.free_rects, QpParams(map_width=1200.0))
    sol = solve_qp(problem)
    t4 = time.perf_counter()
    return {
        "ordering_ms": (t1 - t0) * 1000.0,
        "routing_ms": (t2 - t1) * 1000.0,
        "pruning_ms": (t3 - t2) * 1000.0,
        "qp_ms": (t4 - t3) * 1000.0,
        "total_ms": (t4 - t0) * 1000.0,
        "qp_iterations": sol.iterations,
    }


def cmd_bench_qp(args) -> int:
    regions_doc = Path(args.regions).read_bytes()
    d = load_dataset(b"origin,dest,magnitude\n", regions_doc)
    if len(d.regions) < args.n:
        raise LayoutError(f"fixture has {len(d.regions)} regions, need {args.n}")
    rng = random.Random(args.seed)
    trials = [bench_once(list(d.regions), args.n, rng) for _ in range(args.trials)]
    med = statistics.median(t["total_ms"] for t in trials)
    parts = {
        key: statistics.median(t[key] for t in trials)
        for key in ("ordering_ms", "routing_ms", "pruning_ms", "qp_ms")
    }
    print(
        f"bench-qp n={args.n} trials={args.trials} median_ms={med:.3f} "
        + " ".join(f"{k}={v:.3f}" for k, v in parts.items())
    )
    return 0


def build_parser(config: dict[str, str]) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odflow")
    parser.add_argument("--config", default=None, help="key=value defaults file")
    parser.add_argument("--json-errors", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser("render", help="render a layout to SVG")
    p_render.add_argument("--kind", choices=["maptrix", "odmaps", "flowmap"], required=True)
    p_render.add_argument("--flows", required=True)
    p_render.add_argument("--regions", required=True)
    p_render.add_argument("--grid", default=None)
    p_render.add_argument("--filter", default=None, metavar="LO:HI")
    p_render.add_argument("--groups", default=None, metavar="A:r1,r2;B:r3")
    p_render.add_argument("--width", type=float, default=float(config.get("width", 1200)))
    p_render.add_argument("--height", type=float, default=float(config.get("height", 800)))
    p_render.add_argument("-o", "--output", required=True)
    p_render.set_defaults(func=cmd_render)

    p_exp = sub.add_parser("export3d", help="export 3D flow curves")
    p_exp.add_argument("--repr", choices=["map", "globe", "mapslink"], required=True)
    p_exp.add_argument("--encoding", choices=["constant", "quantity", "distance"], default="distance")
    p_exp.add_argument("--flows", required=True)
    p_exp.add_argument("--regions", required=True)
    p_exp.add_argument("--filter", default=None, metavar="LO:HI")
    p_exp.add_argument("--samples", type=int, default=65)
    p_exp.add_argument("-o", "--output", required=True)
    p_exp.set_defaults(func=cmd_export3d)

    env_port = os.environ.get("PORT", config.get("port", "8077"))
    env_fixtures = os.environ.get("FIXTURES_DIR", config.get("fixtures_dir"))
    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--port", default=env_port)
    p_serve.add_argument("--host", default=config.get("host", "127.0.0.1"))
    p_serve.add_argument("--fixtures-dir", default=env_fixtures)
    p_serve.set_defaults(func=cmd_serve)

    p_bench = sub.add_parser("bench-qp", help="time boundary labeling + QP")
    p_bench.add_argument("--regions", required=True)
    p_bench.add_argument("--n", type=int, default=51)
    p_bench.add_argument("--trials", type=int, default=20)
    p_bench.add_argument("--seed", type=int, default=13)
    p_bench.set_defaults(func=cmd_bench_qp)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    config_path = None
    if "--config" in argv:
        config_path = argv[argv.index("--config") + 1]
    parser = build_parser(_read_config(config_path))
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OdflowError as err:
        return _fail(args, err, 2)
    except FileNotFoundError as err:
        return _fail(args, ParseError(str(err)), 2)
    except json.JSONDecodeError as err:
        return _fail(args, ParseError(f"invalid JSON: {err}"), 2)
    except Exception as err:  # internal
        return _fail(args, err, 3)


if __name__ == "__main__":
    sys.exit(main())
