"""HTTP JSON facade: datasets, layouts, re-layout and 3D curve export.

Layout bodies are canonical JSON (sorted keys, fixed precision) so that
POST /datasets/{id}/relayout with some operation byte-equals a plain GET
layout of the transformed dataset.  Engine version, layout timing and the
session state version travel in response headers (X-Engine-Version,
X-Layout-Ms, X-State-Version), never in the compared body.

Datasets live in memory, keyed by content hash; fixture datasets loaded at
startup get their country code as an alias.  Sessions do not survive a
restart.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import __version__
from .errors import OdflowError, ParseError
from .jsonutil import canonical_json_bytes
from .layouts import apply_ops, layout_flowmap, layout_maptrix, layout_odmaps
from .oddata import FlowDataset, load_dataset
from .scene3d import ENCODINGS, REPRESENTATIONS, dataset_curves

SCHEMA_VERSION = "1.0"


@dataclass
class SessionState:
    filter: list[float] | None = None
    groups: list[dict] | None = None
    selections: list[str] = field(default_factory=list)
    version: int = 0

    def to_dict(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "filter": self.filter,
            "groups": self.groups,
            "selections": list(self.selections),
            "version": self.version,
        }


@dataclass
class _Entry:
    dataset: FlowDataset
    grid: dict | None
    session: SessionState


class DatasetStore:
    """Datasets dedup by content hash; every upload gets an independent id.

    The parsed FlowDataset is stored once per distinct payload (content-hash
    keyed); ids returned to clients are `<hash>-<n>` so a duplicate upload
    yields a new id with its own session over the shared dataset.
    """

    def __init__(self):
        self._datasets: dict[str, FlowDataset] = {}
        self._entries: dict[str, _Entry] = {}
        self._aliases: dict[str, str] = {}
        self._counter = 0

    @staticmethod
    def content_hash(*payloads: bytes) -> str:
        h = hashlib.sha256()
        for p in payloads:
            h.update(len(p).to_bytes(8, "big"))
            h.update(p)
        return h.hexdigest()[:16]

    def put(self, dataset: FlowDataset, payloads: tuple[bytes, ...], grid: dict | None, alias: str | None = None) -> str:
        key = self.content_hash(*payloads)
        shared = self._datasets.setdefault(key, dataset)
        self._counter += 1
        did = f"{key}-{self._counter}"
        self._entries[did] = _Entry(shared, grid, SessionState())
        if alias:
            self._aliases[alias] = did
        return did

    def get(self, did: str) -> _Entry | None:
        did = self._aliases.get(did, did)
        return self._entries.get(did)


def _error_response(status: int, err: OdflowError) -> Response:
    body = {"schemaVersion": SCHEMA_VERSION, "error": err.to_dict()}
    return Response(
        content=canonical_json_bytes(body),
        status_code=status,
        media_type="application/json",
    )


def _json_response(payload_bytes: bytes, status: int = 200, headers: dict | None = None) -> Response:
    return Response(
        content=payload_bytes,
        status_code=status,
        media_type="application/json",
        headers=headers or {},
    )


def _status_for(err: OdflowError) -> int:
    if isinstance(err, ParseError):
        return 400
    if err.kind in ("UnknownRegion", "DuplicateFlow", "NegativeMagnitude"):
        return 400
    return 422


def _layout_bytes(entry: _Entry, kind: str, w: float, h: float, op: dict | None = None) -> tuple[bytes, dict]:
    dataset = entry.dataset if op is None else apply_ops(entry.dataset, op)
    t0 = time.perf_counter()
    if kind == "maptrix":
        layout = layout_maptrix(dataset, (w, h))
    elif kind == "odmaps":
        from .errors import BadGridAssignmentError

        if entry.grid is None:
            raise BadGridAssignmentError("dataset has no grid assignment")
        layout = layout_odmaps(dataset, entry.grid, (w, h))
    elif kind == "flowmap":
        layout = layout_flowmap(dataset, (w, h))
    else:
        raise ParseError(f"unknown layout kind {kind!r}")
    ms = (time.perf_counter() - t0) * 1000.0
    headers = {
        "X-Engine-Version": __version__,
        "X-Layout-Ms": f"{ms:.3f}",
    }
    return layout.to_bytes(), headers


def create_app(fixtures_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="odflow", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["X-Engine-Version", "X-Layout-Ms", "X-State-Version"],
    )
    store = DatasetStore()
    app.state.store = store

    if fixtures_dir is not None:
        base = Path(fixtures_dir)
        for sub in sorted(p for p in base.iterdir() if p.is_dir()):
            flows_p = sub / "flows.csv"
            regions_p = sub / "regions.geojson"
            if not (flows_p.exists() and regions_p.exists()):
                continue
            flows_b = flows_p.read_bytes()
            regions_b = regions_p.read_bytes()
            grid_p = sub / "grid.json"
            grid = json.loads(grid_p.read_text()) if grid_p.exists() else None
            dataset = load_dataset(flows_b, regions_b)
            store.put(dataset, (flows_b, regions_b), grid, alias=sub.name)

    @app.exception_handler(OdflowError)
    async def _odflow_error(_request: Request, err: OdflowError):
        return _error_response(_status_for(err), err)

    @app.post("/datasets")
    async def post_dataset(request: Request):
        form = await request.form()
        flows_file = form.get("flows.csv") or form.get("flows")
        regions_file = form.get("regions.geojson") or form.get("regions")
        if flows_file is None or regions_file is None:
            return _error_response(
                400, ParseError("multipart parts 'flows.csv' and 'regions.geojson' required")
            )
        flows_b = await flows_file.read() if hasattr(flows_file, "read") else str(flows_file).encode()
        regions_b = await regions_file.read() if hasattr(regions_file, "read") else str(regions_file).encode()
        grid = None
        grid_file = form.get("grid.json") or form.get("grid")
        if grid_file is not None:
            grid_b = await grid_file.read() if hasattr(grid_file, "read") else str(grid_file).encode()
            try:
                grid = json.loads(grid_b)
            except json.JSONDecodeError as e:
                return _error_response(400, ParseError(f"grid.json: {e.msg}", line=e.lineno))
        dataset = load_dataset(flows_b, regions_b)
        did = store.put(dataset, (flows_b, regions_b), grid)
        body = {"schemaVersion": SCHEMA_VERSION, "datasetId": did}
        return _json_response(canonical_json_bytes(body), status=201)

    @app.get("/datasets/{did}/layout")
    async def get_layout(did: str, kind: str = "maptrix", w: float = 1200.0, h: float = 800.0):
        entry = store.get(did)
        if entry is None:
            return _error_response(404, ParseError(f"unknown dataset {did!r}"))
        body, headers = _layout_bytes(entry, kind, w, h)
        return _json_response(body, headers=headers)

    @app.post("/datasets/{did}/relayout")
    async def post_relayout(did: str, request: Request, kind: str = "maptrix", w: float = 1200.0, h: float = 800.0):
        entry = store.get(did)
        if entry is None:
            return _error_response(404, ParseError(f"unknown dataset {did!r}"))
        try:
            op = await request.json()
        except json.JSONDecodeError:
            return _error_response(400, ParseError("request body must be JSON"))
        if not isinstance(op, dict):
            return _error_response(400, ParseError("request body must be a JSON object"))
        body, headers = _layout_bytes(entry, kind, w, h, op=op)
        sess = entry.session
        sess.filter = op.get("filter")
        sess.groups = op.get("groups")
        if "selections" in op:
            sess.selections = [str(s) for s in op["selections"]]
        sess.version += 1
        headers["X-State-Version"] = str(sess.version)
        return _json_response(body, headers=headers)

    @app.get("/datasets/{did}/state")
    async def get_state(did: str):
        entry = store.get(did)
        if entry is None:
            return _error_response(404, ParseError(f"unknown dataset {did!r}"))
        return _json_response(canonical_json_bytes(entry.session.to_dict()))

    @app.get("/datasets/{did}/flows3d")
    async def get_flows3d(did: str, repr: str = "map", encoding: str = "distance"):
        entry = store.get(did)
        if entry is None:
            return _error_response(404, ParseError(f"unknown dataset {did!r}"))
        if repr not in REPRESENTATIONS:
            return _error_response(400, ParseError(f"unknown repr {repr!r}"))
        if encoding not in ENCODINGS:
            return _error_response(400, ParseError(f"unknown encoding {encoding!r}"))
        curves = dataset_curves(entry.dataset, repr, encoding)
        body = {
            "schemaVersion": SCHEMA_VERSION,
            "repr": repr,
            "encoding": encoding,
            "curves": [c.to_doc() for c in curves],
        }
        return _json_response(
            canonical_json_bytes(body), headers={"X-Engine-Version": __version__}
        )

    return app
