"""Stateful HTTP session API for the visual query builder.

Each live session owns a partial query graph, the signed record of every
suggestion decision, and its own ranker stream. Session ids and ranker seeds
are derived deterministically from the service seed and a creation counter, so
replaying a recorded API transcript against a fresh service reproduces the
same suggestion batches and the same persisted log line.

Endpoints (JSON bodies; field names below are the stable wire format):
    POST /sessions                          -> {"session_id"}
    GET  /sessions/{id}                     -> full session state
    GET  /sessions/{id}/suggestions?mode=active
                                            -> {"version", "suggestions": [...]}
    POST /sessions/{id}/respond             {"version", "accepted": [indices]}
    POST /sessions/{id}/nodes               {"kind": "name"|"type", "label"}
    POST /sessions/{id}/edges/suggest       {"src", "dst"}
    POST /sessions/{id}/edges               {"src", "dst", "etype"}
    GET  /catalog/domains|types|names       ?domain= &type= &filter=
    POST /sessions/{id}/submit              -> {"persisted_line"}
"""
from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from .graph import DIR_OUT, CandidateEdge, DataGraph, GraphError, QueryNodeLabel
from .log import QueryLog, load_log
from .query import QueryGraph, QueryModelError, QuerySession, neg, pos
from .rankers import RdpConfig, make_ranker


@dataclass(frozen=True)
class ServiceConfig:
    k: int = 3
    ranker_id: str = "rdp"
    rdp: RdpConfig = RdpConfig()
    log_path: str = "sessions.log"
    host: str = "127.0.0.1"
    port: int = 8000

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass
class LiveSession:
    session_id: str
    ranker: object
    graph: QueryGraph = dc_field(default_factory=QueryGraph)
    session: QuerySession = dc_field(default_factory=QuerySession)
    version: int = 0
    batch: list[CandidateEdge] | None = None
    batch_scores: list[float] | None = None
    batch_version: int = -1
    closed: bool = False
    created_at: float = dc_field(default_factory=time.time)
    updated_at: float = dc_field(default_factory=time.time)
    lock: threading.Lock = dc_field(default_factory=threading.Lock)

    def touch(self):
        self.updated_at = time.time()


class RespondBody(BaseModel):
    version: int
    accepted: list[int]


class AddNodeBody(BaseModel):
    kind: str
    label: str


class EdgeSuggestBody(BaseModel):
    src: int
    dst: int


class AddEdgeBody(BaseModel):
    src: int
    dst: int
    etype: str


def create_app(
    graph: DataGraph,
    config: ServiceConfig,
    training_log: QueryLog | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="edgesuggest session service")
    log_path = Path(config.log_path)
    if training_log is None:
        training_log = load_log(str(log_path)) if log_path.exists() else QueryLog([])

    sessions: dict[str, LiveSession] = {}
    counter = {"next": 0}
    create_lock = threading.Lock()
    append_lock = threading.Lock()

    def _get(session_id: str) -> LiveSession:
        live = sessions.get(session_id)
        if live is None:
            raise HTTPException(status_code=404, detail=f"unknown session: {session_id}")
        return live

    def _open(session_id: str) -> LiveSession:
        live = _get(session_id)
        if live.closed:
            raise HTTPException(status_code=409, detail="session is closed")
        return live

    def _graph_state(live: LiveSession) -> dict:
        return {
            "nodes": [
                {
                    "id": lid,
                    "kind": label.kind,
                    "label": graph.display_label(label),
                    "value": label.value,
                }
                for lid, label in live.graph.nodes
            ],
            "edges": [
                {"src": s, "dst": d, "etype": e} for s, d, e in live.graph.edges
            ],
        }

    def _state(live: LiveSession) -> dict:
        return {
            "session_id": live.session_id,
            "graph": _graph_state(live),
            "session": list(live.session.tokens()),
            "pending_connection": live.graph.pending_connection,
            "closed": live.closed,
            "k": config.k,
        }

    def _suggestion_dto(cand: CandidateEdge, score: float) -> dict:
        return {
            "etype": cand.etype,
            "score": score,
            "anchor": cand.anchor,
            "direction": cand.direction,
            "other": cand.other,
            "other_type": cand.other_type,
        }

    @app.post("/sessions", status_code=201)
    def create_session() -> dict:
        with create_lock:
            ordinal = counter["next"]
            counter["next"] += 1
        session_id = f"s{ordinal}"
        seed = config.rdp.rng_seed * 1_000_003 + ordinal
        rdp = RdpConfig(
            config.rdp.n_paths, config.rdp.tau, seed, config.rdp.include_negatives
        )
        ranker = make_ranker(config.ranker_id, training_log, rdp)
        sessions[session_id] = LiveSession(session_id=session_id, ranker=ranker)
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _state(_get(session_id))

    @app.get("/sessions/{session_id}/suggestions")
    def active_suggestions(session_id: str, mode: str = Query("active")) -> dict:
        if mode != "active":
            raise HTTPException(status_code=422, detail=f"unsupported mode: {mode}")
        live = _open(session_id)
        with live.lock:
            if not live.graph.nodes:
                raise HTTPException(status_code=409, detail="query graph is empty")
            if live.graph.pending_connection:
                raise HTTPException(
                    status_code=409, detail="graph is pending connection"
                )
            if live.batch is None or live.batch_version != live.version:
                candidates = graph.active_candidates(live.graph, live.session)
                if not candidates:
                    live.batch, live.batch_scores = [], []
                else:
                    ranked = live.ranker.rank(candidates, live.session)
                    # one suggestion per edge type: accepted and ignored types
                    # are recorded per type, so a batch never repeats one
                    batch, scores, seen = [], [], set()
                    for item in ranked:
                        if item.candidate.etype in seen:
                            continue
                        seen.add(item.candidate.etype)
                        batch.append(item.candidate)
                        scores.append(item.score)
                        if len(batch) >= config.k:
                            break
                    live.batch, live.batch_scores = batch, scores
                live.batch_version = live.version
            return {
                "version": live.version,
                "suggestions": [
                    _suggestion_dto(c, s)
                    for c, s in zip(live.batch, live.batch_scores)
                ],
            }

    @app.post("/sessions/{session_id}/respond")
    def respond(session_id: str, body: RespondBody) -> dict:
        live = _open(session_id)
        with live.lock:
            if live.batch is None or live.batch_version != live.version:
                raise HTTPException(status_code=409, detail="no outstanding suggestions")
            if body.version != live.version:
                raise HTTPException(status_code=409, detail="stale suggestion batch")
            if any(i < 0 or i >= len(live.batch) for i in body.accepted):
                raise HTTPException(status_code=422, detail="accepted index out of range")
            accepted = set(body.accepted)
            qg = live.graph
            for i, cand in enumerate(live.batch):
                if i in accepted:
                    qg = _apply_candidate(qg, cand, graph)
                    live.session = live.session.append(pos(cand.etype))
                else:
                    live.session = live.session.append(neg(cand.etype))
            live.graph = qg
            live.version += 1
            live.batch = None
            live.batch_scores = None
            live.touch()
            return _state(live)

    @app.post("/sessions/{session_id}/nodes")
    def add_node(session_id: str, body: AddNodeBody) -> dict:
        live = _open(session_id)
        with live.lock:
            try:
                if body.kind == "name":
                    label = QueryNodeLabel.entity(graph.resolve_name(body.label))
                elif body.kind == "type":
                    label = QueryNodeLabel.node_type(body.label)
                else:
                    raise HTTPException(
                        status_code=422, detail=f"unknown label kind: {body.kind}"
                    )
                live.graph = live.graph.add_node(label, graph)
            except QueryModelError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except GraphError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            live.version += 1
            live.touch()
            return _state(live)

    @app.post("/sessions/{session_id}/edges/suggest")
    def suggest_edge(session_id: str, body: EdgeSuggestBody) -> dict:
        live = _open(session_id)
        with live.lock:
            try:
                src_label = live.graph.label_of(body.src)
                dst_label = live.graph.label_of(body.dst)
            except QueryModelError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            permitted = graph.passive_candidates(src_label, dst_label)
            if not permitted:
                raise HTTPException(
                    status_code=422, detail="no possible relationship between these nodes"
                )
            ranked = live.ranker.rank_types(list(permitted), live.session)
            return {
                "options": [
                    {
                        "etype": etype,
                        "score": score,
                        "directions": sorted(permitted[etype]),
                    }
                    for etype, score in ranked
                ]
            }

    @app.post("/sessions/{session_id}/edges")
    def add_edge(session_id: str, body: AddEdgeBody) -> dict:
        live = _open(session_id)
        with live.lock:
            try:
                live.graph = live.graph.add_edge(body.src, body.dst, body.etype, graph)
            except QueryModelError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            live.session = live.session.append(pos(body.etype))
            live.version += 1
            live.touch()
            return _state(live)

    @app.get("/catalog/domains")
    def catalog_domains(filter: str = Query("")) -> dict:
        entries = sorted(d for d in graph.domains if filter.lower() in d.lower())
        return {"entries": entries}

    @app.get("/catalog/types")
    def catalog_types(domain: str = Query(...), filter: str = Query("")) -> dict:
        if domain not in graph.domains:
            raise HTTPException(status_code=404, detail=f"unknown domain: {domain}")
        entries = sorted(
            t for t in graph.domains[domain] if filter.lower() in t.lower()
        )
        return {"entries": entries}

    @app.get("/catalog/names")
    def catalog_names(type: str = Query(...), filter: str = Query("")) -> dict:
        try:
            ids = graph.instances_of(type)
        except GraphError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        entries = sorted(
            graph.nodes[i].name
            for i in ids
            if filter.lower() in graph.nodes[i].name.lower()
        )
        return {"entries": entries}

    @app.post("/sessions/{session_id}/submit")
    def submit(session_id: str) -> dict:
        live = _get(session_id)
        with live.lock:
            if live.closed:
                raise HTTPException(status_code=409, detail="session already submitted")
            if live.graph.pending_connection:
                raise HTTPException(
                    status_code=409, detail="graph is pending connection"
                )
            positives = sorted(live.session.positives())
            negatives = sorted(live.session.negatives())
            line = " ".join(positives + ["~" + e for e in negatives])
            with append_lock:
                with open(log_path, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
            live.closed = True
            live.touch()
            return {"session_id": session_id, "persisted_line": line}

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _apply_candidate(
    qg: QueryGraph, cand: CandidateEdge, graph: DataGraph
) -> QueryGraph:
    """Materialize an accepted suggestion: add the fresh node if any, then the edge."""
    if cand.other is None:
        new_id = qg.next_local_id()
        qg = QueryGraph(
            qg.nodes + ((new_id, QueryNodeLabel.node_type(cand.other_type)),),
            qg.edges,
        )
        other = new_id
    else:
        other = cand.other
    if cand.direction == DIR_OUT:
        src, dst = cand.anchor, other
    else:
        src, dst = other, cand.anchor
    return QueryGraph(qg.nodes, qg.edges + ((src, dst, cand.etype),))
