"""Session-backed HTTP surface: upload a dataset, explore blocks and scenes,
classify points, shift axes, and undo. State-changing commands append to a
replayable log; undo replays the remainder against the original dataset."""
from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, Response

from .blocks import matrix_from_normalized
from .classifier import HyperModel, ModelConfig, classify
from .dataset import Dataset, SplitSpec, canonical_json, normalize, parse_table
from .evaluation import cross_validate
from .linguistic import describe, profile
from .mhyper import HBSet, MergeConfig, merge_dominant, merge_pure
from .scene import (
    apply_axis_shift, compile_polylines, frequency_widths, heat_scene,
    render_svg, side_by_side, straighten_case,
)


@dataclass
class Session:
    id: str
    dataset: Dataset
    revision: int = 0
    commands: list[dict] = field(default_factory=list)
    # derived state, rebuilt by replay
    nd: object = None
    tm: object = None
    hbs: Optional[HBSet] = None
    model: Optional[HyperModel] = None
    shifts: dict = field(default_factory=dict)
    hidden_cases: set = field(default_factory=set)
    scene_cache: object = None

    def reset_derived(self):
        self.nd = normalize(self.dataset)
        self.tm = matrix_from_normalized(self.nd)
        self.hbs = None
        self.model = None
        self.shifts = {}
        self.hidden_cases = set()
        self.scene_cache = None


def _apply_command(s: Session, cmd: dict):
    op = cmd["op"]
    if op == "hyperblocks":
        half = float(cmd.get("half_length", 0.0))
        impurity = float(cmd.get("impurity_threshold", 0.0))
        cfg = MergeConfig(impurity_threshold=impurity,
                          order_seed=cmd.get("order_seed"))
        s.hbs = merge_pure(s.tm, cfg, half_length=half)
        if impurity > 0:
            s.hbs = merge_dominant(s.hbs, s.tm, cfg)
        s.model = None
    elif op == "merge":
        if s.hbs is None:
            s.hbs = merge_pure(s.tm, MergeConfig())
        cfg = MergeConfig(impurity_threshold=float(cmd.get("impurity_threshold", 0.10)))
        s.hbs = merge_dominant(s.hbs, s.tm, cfg)
        s.model = None
    elif op == "axis-shift":
        coord = s.dataset.coordinate_index(cmd["coordinate"])
        s.shifts[coord] = s.shifts.get(coord, 0.0) + float(cmd["delta"])
        if s.scene_cache is not None:
            apply_axis_shift(s.scene_cache, coord, float(cmd["delta"]))
    elif op == "straighten":
        scene = _polyline_scene(s)
        straighten_case(scene, str(cmd["case_id"]))
        s.shifts = {j: a.shift for j, a in enumerate(scene.axes) if a.shift}
    elif op == "subsets":
        ids = set(str(c) for c in cmd["case_ids"])
        if cmd["visible"]:
            s.hidden_cases -= ids
        else:
            s.hidden_cases |= ids
    else:
        raise ValueError(f"unknown command {op!r}")


def _replay(s: Session):
    s.reset_derived()
    for cmd in s.commands:
        _apply_command(s, cmd)


def _polyline_scene(s: Session):
    if s.scene_cache is None:
        s.scene_cache = compile_polylines(s.nd)
        for coord, delta in s.shifts.items():
            apply_axis_shift(s.scene_cache, coord, delta)
        _apply_visibility(s)
    return s.scene_cache


def _apply_visibility(s: Session):
    if s.scene_cache is None:
        return
    vis = np.array([c.id not in s.hidden_cases for c in s.dataset.cases])
    s.scene_cache.visible = vis


def _ensure_blocks(s: Session) -> HBSet:
    if s.hbs is None:
        s.hbs = merge_pure(s.tm, MergeConfig())
    return s.hbs


def _ensure_model(s: Session) -> HyperModel:
    if s.model is None:
        s.model = HyperModel(blocks=_ensure_blocks(s), tm=s.tm, k=3,
                             distance_variant="N2")
    return s.model


def state_hash(s: Session) -> str:
    """Hash of the derived state only, so replaying the same command log
    always lands on the same hash regardless of undo detours."""
    import hashlib
    parts = [str(sorted(s.shifts.items())),
             str(sorted(s.hidden_cases))]
    if s.hbs is not None:
        for b in s.hbs.blocks:
            parts.append(b.lo.tobytes().hex())
            parts.append(b.hi.tobytes().hex())
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


def create_app(store: Optional[dict] = None) -> FastAPI:
    app = FastAPI(title="hyperview")
    sessions: dict[str, Session] = store if store is not None else {}

    def get_session(sid: str) -> Session:
        if sid not in sessions:
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")
        return sessions[sid]

    async def body_of(request: Request) -> dict:
        try:
            doc = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body: invalid JSON")
        if not isinstance(doc, dict):
            raise HTTPException(status_code=400, detail="body: expected object")
        return doc

    def require(doc: dict, name: str, kind=None):
        if name not in doc:
            raise HTTPException(status_code=400, detail=f"{name}: required")
        if kind is not None and not isinstance(doc[name], kind):
            raise HTTPException(status_code=400,
                                detail=f"{name}: expected {kind.__name__}")
        return doc[name]

    def check_revision(s: Session, doc: dict):
        if "revision" in doc and int(doc["revision"]) != s.revision:
            raise HTTPException(status_code=409,
                                detail=f"revision: stale ({doc['revision']} != {s.revision})")

    def mutate(s: Session, cmd: dict, doc: dict) -> dict:
        check_revision(s, doc)
        try:
            _apply_command(s, cmd)
        except HTTPException:
            raise
        except (ValueError, KeyError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        s.commands.append(cmd)
        s.revision += 1
        return {"revision": s.revision, "state": state_hash(s)}

    @app.post("/sessions")
    async def create_session(request: Request):
        doc = await body_of(request)
        text = require(doc, "table", str)
        try:
            ds = parse_table(
                text,
                class_column=doc.get("class_column", -1),
                id_column=doc.get("id_column"),
                delimiter=doc.get("delimiter"),
            )
        except ValueError as e:
            raise HTTPException(status_code=400, detail=f"table: {e}")
        sid = secrets.token_hex(8)
        s = Session(id=sid, dataset=ds)
        s.reset_derived()
        sessions[sid] = s
        return {"id": sid, "revision": 0, "cases": len(ds.cases),
                "coordinates": ds.coordinate_names, "classes": ds.class_labels}

    @app.get("/sessions/{sid}/scene")
    def scene_endpoint(sid: str, view: str = "polylines", svg: bool = False):
        s = get_session(sid)
        if view == "polylines":
            scene = _polyline_scene(s)
        elif view == "sidebyside":
            scene = side_by_side(s.nd, _ensure_blocks(s).blocks, s.tm)
        elif view == "heat":
            scene = heat_scene(s.nd, _ensure_blocks(s).pure_blocks())
        elif view == "frequency":
            scene = _polyline_scene(s)
            segs = frequency_widths(s.nd)
            scene = compile_polylines(s.nd)
            scene.segments = segs
            scene.visible[:] = False
        else:
            raise HTTPException(status_code=400, detail=f"view: unknown {view!r}")
        if svg:
            return Response(content=render_svg(scene), media_type="image/svg+xml")
        return JSONResponse(content=scene.to_json_dict(),
                            headers={"X-Revision": str(s.revision)})

    @app.post("/sessions/{sid}/hyperblocks")
    async def hyperblocks(sid: str, request: Request):
        s = get_session(sid)
        doc = await body_of(request)
        cmd = {"op": "hyperblocks",
               "half_length": doc.get("half_length", 0.0),
               "impurity_threshold": doc.get("impurity_threshold", 0.0)}
        out = mutate(s, cmd, doc)
        hbs = s.hbs
        out.update({
            "blocks": len(hbs.blocks),
            "pure": len(hbs.pure_blocks()),
            "mixed": len(hbs.mixed_blocks()),
            "sizes": sorted((b.size for b in hbs.blocks), reverse=True),
        })
        return out

    @app.post("/sessions/{sid}/hyperblocks/merge")
    async def hyperblocks_merge(sid: str, request: Request):
        s = get_session(sid)
        doc = await body_of(request)
        cmd = {"op": "merge",
               "impurity_threshold": doc.get("impurity_threshold", 0.10)}
        out = mutate(s, cmd, doc)
        out.update({"blocks": len(s.hbs.blocks),
                    "impurities": [round(b.impurity(), 6) for b in s.hbs.blocks]})
        return out

    @app.post("/sessions/{sid}/classify")
    async def classify_endpoint(sid: str, request: Request):
        s = get_session(sid)
        doc = await body_of(request)
        point = require(doc, "point", dict)
        model = _ensure_model(s)
        x = np.full(s.dataset.n_coordinates, np.nan)
        for name, raw in point.items():
            try:
                j = s.dataset.coordinate_index(name)
            except ValueError as e:
                raise HTTPException(status_code=400, detail=f"point.{name}: {e}")
            x[j] = s.nd.normalize_value(j, float(raw))
        if np.isnan(x).any():
            missing = [s.dataset.coordinate_names[j]
                       for j in np.nonzero(np.isnan(x))[0]]
            raise HTTPException(status_code=400,
                                detail=f"point.{missing[0]}: required")
        p = classify(model, x)
        return {"class": p.label, "rule_used": p.rule_used, "votes": p.votes,
                "containing_blocks": list(p.containing_blocks)}

    @app.post("/sessions/{sid}/axis-shift")
    async def axis_shift(sid: str, request: Request):
        s = get_session(sid)
        doc = await body_of(request)
        cmd = {"op": "axis-shift",
               "coordinate": require(doc, "coordinate"),
               "delta": require(doc, "delta", (int, float))}
        return mutate(s, cmd, doc)

    @app.post("/sessions/{sid}/straighten")
    async def straighten(sid: str, request: Request):
        s = get_session(sid)
        doc = await body_of(request)
        cmd = {"op": "straighten", "case_id": str(require(doc, "case_id"))}
        return mutate(s, cmd, doc)

    @app.post("/sessions/{sid}/subsets")
    async def subsets(sid: str, request: Request):
        s = get_session(sid)
        doc = await body_of(request)
        cmd = {"op": "subsets",
               "case_ids": require(doc, "case_ids", list),
               "visible": require(doc, "visible", bool)}
        out = mutate(s, cmd, doc)
        out["hidden"] = len(s.hidden_cases)
        return out

    @app.get("/sessions/{sid}/linguistic")
    def linguistic(sid: str, cutoff: float = 0.5):
        s = get_session(sid)
        vals, codes, _ = s.nd.complete_matrix()
        profiles = {cls: profile(vals[codes == ci], cutoff=cutoff)
                    for ci, cls in enumerate(s.dataset.class_labels)}
        return {
            "text": describe(profiles, s.dataset.coordinate_names),
            "profiles": {cls: p.to_json_dict(s.dataset.coordinate_names)
                         for cls, p in profiles.items()},
        }

    @app.get("/sessions/{sid}/report")
    def report(sid: str, folds: int = 10, seed: int = 7, k: int = 3,
               variant: str = "N2", impurity: float = 0.0):
        s = get_session(sid)
        rep = cross_validate(s.dataset, SplitSpec(fold_count=folds, seed=seed),
                             MergeConfig(impurity_threshold=impurity),
                             ModelConfig(k=k, distance_variant=variant))
        return rep.to_json_dict()

    @app.post("/sessions/{sid}/undo")
    async def undo(sid: str, request: Request):
        s = get_session(sid)
        doc = await body_of(request)
        check_revision(s, doc)
        if not s.commands:
            raise HTTPException(status_code=400, detail="undo: nothing to undo")
        s.commands.pop()
        _replay(s)
        s.revision += 1
        return {"revision": s.revision, "state": state_hash(s),
                "commands": len(s.commands)}

    @app.get("/sessions/{sid}/blocks")
    def blocks_endpoint(sid: str):
        s = get_session(sid)
        from .blocks import hb_to_json_dict
        hbs = _ensure_blocks(s)
        return {"revision": s.revision,
                "blocks": [hb_to_json_dict(b, s.dataset.coordinate_names,
                                           s.tm.class_names, s.tm.case_ids)
                           for b in hbs.blocks]}

    return app


def serve(port: int, store: Optional[dict] = None):
    import uvicorn
    uvicorn.run(create_app(store), host="127.0.0.1", port=port, log_level="warning")
