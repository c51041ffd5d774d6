"""JSON-over-HTTP prediction service.

Endpoints (all under /api/v1):

* ``POST /singlestep``           one-shot ranked mechanism prediction.
* ``POST /pathway``              create a search session; level 1 expanded
                                 synchronously.
* ``POST /pathway/{id}/expand``  expand one node (or the next level) of a
                                 live session.
* ``GET  /health``               model/load status.

Every 4xx carries ``{"code", "message", "field"}``.  Sessions expire after
an idle timeout; expansion requests against the same session are serialized
by a per-session lock.  Models are loaded once at startup.
"""

from __future__ import annotations

import logging
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..chemgraph.model import MoleculeSet
from ..chemgraph.canon import molecule_smiles, write_smiles
from ..chemgraph.masses import molecular_mass
from ..chemgraph.parse import SmilesError, parse_smiles
from ..neural import load_model
from ..orbchain import describe_orbital
from ..pathway import (
    ContextSpec,
    PathwayError,
    PathwaySearch,
    SearchConfig,
    Target,
    match_targets,
    replay_path,
)
from ..predictor import ContrastivePipeline, TwoStepPipeline

log = logging.getLogger(__name__)

DEFAULT_SESSION_TIMEOUT_S = 3600.0


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str,
                 fieldname: Optional[str] = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.field = fieldname

    def body(self) -> dict:
        return {"code": self.code, "message": self.message, "field": self.field}


@dataclass
class ModelBundle:
    site: object = None
    ranker: object = None
    contrastive: object = None

    def pipelines_ready(self) -> bool:
        return all(x is not None for x in (self.site, self.ranker, self.contrastive))


def load_bundle(models_dir: str) -> ModelBundle:
    paths = {name: os.path.join(models_dir, f"{name}.npz")
             for name in ("site", "ranker", "contrastive")}
    missing = [p for p in paths.values() if not os.path.exists(p)]
    if missing:
        raise FileNotFoundError(f"missing model files: {missing}")
    return ModelBundle(
        site=load_model(paths["site"]),
        ranker=load_model(paths["ranker"]),
        contrastive=load_model(paths["contrastive"]),
    )


@dataclass
class Session:
    session_id: str
    search: PathwaySearch
    targets: tuple
    created: float
    last_access: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, timeout_s: float = DEFAULT_SESSION_TIMEOUT_S):
        self.timeout_s = timeout_s
        self._sessions: dict = {}
        self._expired: set = set()
        self._lock = threading.Lock()

    def create(self, search: PathwaySearch, targets: tuple) -> Session:
        session = Session(uuid.uuid4().hex, search, targets,
                          time.monotonic(), time.monotonic())
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                if session_id in self._expired:
                    raise ApiError(410, "session_expired",
                                   f"session {session_id} has expired")
                raise ApiError(404, "unknown_session",
                               f"no session {session_id}")
            if time.monotonic() - session.last_access > self.timeout_s:
                del self._sessions[session_id]
                self._expired.add(session_id)
                raise ApiError(410, "session_expired",
                               f"session {session_id} has expired")
            session.last_access = time.monotonic()
            return session


def _parse_reactants(text, fieldname: str = "reactants") -> MoleculeSet:
    if not isinstance(text, str) or not text.strip():
        raise ApiError(400, "validation", "reactants must be a nonempty SMILES string",
                       fieldname)
    try:
        return parse_smiles(text)
    except SmilesError as exc:
        raise ApiError(400, "parse_error",
                       f"{exc} ", fieldname) from exc


def _positive_int(body: dict, key: str, default: int, minimum: int = 1) -> int:
    value = body.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ApiError(400, "validation",
                       f"{key} must be an integer >= {minimum}", key)
    return value


def molecule_graph_payload(mol) -> dict:
    """Graph form of one molecule for client-side depiction."""
    return {
        "atoms": [
            {
                "element": a.element,
                "charge": a.formal_charge,
                "radicals": a.radical_electrons,
                "hydrogens": a.implicit_hydrogens,
                "map": a.map_number,
            }
            for a in mol.atoms
        ],
        "bonds": [[b.i, b.j, b.order] for b in mol.bonds],
    }


def serialize_prediction(pred, mapped: MoleculeSet) -> dict:
    step = pred.step
    products = write_smiles(step.products, canonical=True, keep_maps=True)
    reactants = write_smiles(step.reactants, canonical=True, keep_maps=True)
    return {
        "rank": pred.rank,
        "score": pred.score,
        "products": products,
        "reaction": f"{reactants}>>{products}",
        "arrows": step.arrows.format(),
        "family": step.family,
        "orbitals": [
            describe_orbital(mapped, step.pair.m1),
            describe_orbital(mapped, step.pair.m2),
        ],
        "product_masses": [
            round(molecular_mass(m, "monoisotopic"), 4)
            for m in step.products.molecules
        ],
        "product_graphs": [
            molecule_graph_payload(m) for m in step.products.molecules
        ],
    }


def serialize_node(node, hits_by_node: dict) -> dict:
    out = {
        "id": node.node_id,
        "depth": node.depth,
        "parent": node.parent_id,
        "children": list(node.children),
        "expanded": node.expanded,
        "molecules": [
            molecule_smiles(m, canonical=True, keep_maps=False)
            for m in node.state.molecules
        ],
        "molecule_graphs": [
            molecule_graph_payload(m) for m in node.state.molecules
        ],
        "cumulative_score": node.cumulative_score,
        "score": node.incoming_score,
        "hits": hits_by_node.get(node.node_id, []),
    }
    if node.incoming is not None:
        out["step"] = {
            "reaction": node.incoming.to_line(),
            "arrows": node.incoming.arrows.format(),
            "family": node.incoming.family,
        }
    return out


def _tree_snapshot(session: Session) -> dict:
    hits = match_targets(session.search, session.targets)
    hits_by_node: dict = {}
    payload_hits = []
    for hit in hits:
        entry = {
            "target": hit.target.label,
            "kind": hit.target.kind,
            "node": hit.node_id,
            "molecule": hit.molecule,
            "path_nodes": list(hit.path_node_ids),
            "steps": replay_path(session.search, hit),
        }
        hits_by_node.setdefault(hit.node_id, []).append(hit.target.label)
        payload_hits.append(entry)
    nodes = [
        serialize_node(n, hits_by_node)
        for n in sorted(session.search.result.nodes.values(),
                        key=lambda n: n.node_id)
    ]
    return {
        "session_id": session.session_id,
        "root": session.search.result.root_id,
        "truncated": session.search.result.truncated,
        "node_count": len(nodes),
        "nodes": nodes,
        "hits": payload_hits,
        "config": {
            "depth": session.search.cfg.depth,
            "breadth": session.search.cfg.breadth,
            "score_threshold": session.search.cfg.score_threshold,
            "apply_rules": session.search.cfg.apply_rules,
        },
    }


def create_app(models_dir: Optional[str] = None,
               bundle: Optional[ModelBundle] = None,
               session_timeout_s: float = DEFAULT_SESSION_TIMEOUT_S,
               ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="radmech", version="0.1.0")
    if bundle is None:
        bundle = ModelBundle()
        if models_dir:
            bundle = load_bundle(models_dir)
    sessions = SessionStore(session_timeout_s)
    app.state.bundle = bundle
    app.state.sessions = sessions
    ui_dir = ui_dir or os.environ.get("RADMECH_UI_DIR")
    if ui_dir and os.path.isdir(ui_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    def pipelines():
        if not bundle.pipelines_ready():
            raise ApiError(503, "models_not_loaded",
                           "prediction models are not loaded")
        two = TwoStepPipeline(bundle.site, bundle.ranker)
        con = ContrastivePipeline(bundle.contrastive)
        return {"two_step": two, "contrastive": con}

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.get("/api/v1/health")
    async def health():
        return {"status": "ok", "models_loaded": bundle.pipelines_ready()}

    @app.post("/api/v1/singlestep")
    async def singlestep(body: dict):
        ms = _parse_reactants(body.get("reactants"))
        top_n = _positive_int(body, "top_n", 10)
        k_atoms = _positive_int(body, "k_atoms", 10, minimum=2)
        pipeline_name = body.get("pipeline", "two_step")
        if pipeline_name not in ("two_step", "contrastive"):
            raise ApiError(400, "validation",
                           f"unknown pipeline {pipeline_name!r}", "pipeline")
        apply_rules = bool(body.get("apply_rules", True))
        if not bundle.pipelines_ready():
            raise ApiError(503, "models_not_loaded",
                           "prediction models are not loaded")
        from ..orbchain import RuleSet
        rules = RuleSet() if apply_rules else None
        if pipeline_name == "two_step":
            pipe = TwoStepPipeline(bundle.site, bundle.ranker,
                                   k_atoms=k_atoms, rules=rules)
        else:
            pipe = ContrastivePipeline(bundle.contrastive, rules=rules)
        mapped = ms.with_maps()
        predictions = pipe.predict(mapped, top_n=top_n)
        if not predictions:
            raise ApiError(422, "no_candidates",
                           "no candidate mechanisms for these reactants")
        return {
            "reactants": write_smiles(mapped, canonical=True, keep_maps=True),
            "pipeline": pipeline_name,
            "predictions": [serialize_prediction(p, mapped) for p in predictions],
        }

    def _parse_targets(body: dict) -> tuple:
        targets = []
        raw = body.get("targets", [])
        if not isinstance(raw, list):
            raise ApiError(400, "validation", "targets must be a list", "targets")
        for idx, t in enumerate(raw):
            kind = t.get("kind") if isinstance(t, dict) else None
            try:
                if kind == "structure":
                    targets.append(Target.structure(t["smiles"]))
                elif kind == "mass":
                    targets.append(Target.by_mass(
                        float(t["mass"]), float(t.get("tolerance", 0.01))
                    ))
                else:
                    raise ApiError(400, "validation",
                                   f"target {idx} has unknown kind",
                                   f"targets[{idx}].kind")
            except (KeyError, ValueError, SmilesError, PathwayError) as exc:
                if isinstance(exc, ApiError):
                    raise
                raise ApiError(400, "validation",
                               f"bad target {idx}: {exc}",
                               f"targets[{idx}]") from exc
        return tuple(targets)

    @app.post("/api/v1/pathway")
    async def pathway_create(body: dict):
        ms = _parse_reactants(body.get("reactants"))
        depth = _positive_int(body, "depth", 3)
        breadth = _positive_int(body, "breadth", 10)
        threshold = body.get("score_threshold", 0.0)
        if not isinstance(threshold, (int, float)) or isinstance(threshold, bool):
            raise ApiError(400, "validation",
                           "score_threshold must be a number", "score_threshold")
        apply_rules = bool(body.get("apply_rules", True))
        pipeline_name = body.get("pipeline", "contrastive")
        pipes = pipelines()
        if pipeline_name not in pipes:
            raise ApiError(400, "validation",
                           f"unknown pipeline {pipeline_name!r}", "pipeline")
        targets = _parse_targets(body)
        context = []
        for idx, c in enumerate(body.get("context", [])):
            try:
                context.append(ContextSpec(c["smiles"], int(c.get("frequency", 1))))
            except (KeyError, ValueError, SmilesError, PathwayError) as exc:
                raise ApiError(400, "validation",
                               f"bad context {idx}: {exc}",
                               f"context[{idx}]") from exc
        cfg = SearchConfig(depth=depth, breadth=breadth,
                           score_threshold=float(threshold),
                           apply_rules=apply_rules)
        est = 1 + breadth  # level-1 footprint; deeper levels are on demand
        if est > cfg.node_budget:
            raise ApiError(429, "node_budget",
                           "requested breadth exceeds the node budget")
        search = PathwaySearch(ms, cfg, context, pipes[pipeline_name])
        search.expand_level()
        session = sessions.create(search, targets)
        return _tree_snapshot(session)

    @app.post("/api/v1/pathway/{session_id}/expand")
    async def pathway_expand(session_id: str, body: dict):
        session = sessions.get(session_id)
        with session.lock:
            search = session.search
            node_id = body.get("node_id")
            if search.result.size >= search.cfg.node_budget:
                raise ApiError(429, "node_budget", "node budget exhausted")
            if node_id is None:
                search.expand_level()
            else:
                if not isinstance(node_id, int) or node_id not in search.result.nodes:
                    raise ApiError(404, "unknown_node",
                                   f"no node {node_id} in this session", "node_id")
                node = search.result.nodes[node_id]
                if node.depth >= search.cfg.depth:
                    raise ApiError(400, "depth_limit",
                                   f"node {node_id} is at the configured depth",
                                   "node_id")
                search.expand_node(node_id)
            return _tree_snapshot(session)

    return app
