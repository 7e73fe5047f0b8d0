"""Typed multigraph storage, derived schema index, and candidate-edge computation.

The data graph is a directed multigraph of named entities. Every node carries
one or more node types, every edge exactly one edge type. The schema index is
derived from the instances: a (source type, edge type, target type) triple is
part of the schema iff at least one edge witnesses it. Everything is immutable
after loading, so readers never need locks.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

if TYPE_CHECKING:
    from .query import QueryGraph, QuerySession


class GraphError(Exception):
    """Lookup or validation failure against the data graph."""


class GraphLoadError(GraphError):
    """Malformed input file; carries the offending path and line number."""

    def __init__(self, path: str, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


LABEL_NAME = "name"
LABEL_TYPE = "type"

DIR_FORWARD = "forward"
DIR_BACKWARD = "backward"
DIR_OUT = "out"
DIR_IN = "in"


@dataclass(frozen=True)
class QueryNodeLabel:
    """Label of a query-graph node: either a concrete entity or a node type."""

    kind: str  # LABEL_NAME (value is a node id) or LABEL_TYPE (value is a type id)
    value: str

    @classmethod
    def entity(cls, node_id: str) -> "QueryNodeLabel":
        return cls(LABEL_NAME, node_id)

    @classmethod
    def node_type(cls, type_id: str) -> "QueryNodeLabel":
        return cls(LABEL_TYPE, type_id)

    @property
    def is_entity(self) -> bool:
        return self.kind == LABEL_NAME


@dataclass(frozen=True)
class NodeRecord:
    id: str
    name: str
    vtypes: frozenset[str]


@dataclass(frozen=True)
class EdgeRecord:
    src: str
    dst: str
    etype: str


@dataclass(frozen=True)
class CandidateEdge:
    """One concrete edge that could be added to a query graph.

    ``anchor`` is the local id of the query-graph node the edge hangs off.
    ``other`` is the local id of an existing query-graph node, or None when the
    candidate brings a fresh node along; the fresh node's label is the
    schema-implied ``other_type``. ``direction`` is relative to the anchor.
    """

    etype: str
    anchor: int
    direction: str  # DIR_OUT or DIR_IN
    other: int | None = None
    other_type: str | None = None

    def sort_key(self) -> tuple:
        return (
            self.etype,
            self.anchor,
            self.direction,
            self.other if self.other is not None else -1,
            self.other_type or "",
        )


class SchemaIndex:
    """Instance-witnessed schema: type constraints per edge type and per node type."""

    def __init__(
        self,
        nodes: Mapping[str, NodeRecord],
        edges: Sequence[EdgeRecord],
    ):
        src_types: dict[str, set[str]] = defaultdict(set)
        dst_types: dict[str, set[str]] = defaultdict(set)
        outgoing: dict[str, set[str]] = defaultdict(set)
        incoming: dict[str, set[str]] = defaultdict(set)
        triples: dict[str, set[tuple[str, str]]] = defaultdict(set)
        for e in edges:
            su = nodes[e.src].vtypes
            tv = nodes[e.dst].vtypes
            src_types[e.etype].update(su)
            dst_types[e.etype].update(tv)
            for s in su:
                outgoing[s].add(e.etype)
                for t in tv:
                    triples[e.etype].add((s, t))
            for t in tv:
                incoming[t].add(e.etype)
        self.source_types = {k: frozenset(v) for k, v in src_types.items()}
        self.target_types = {k: frozenset(v) for k, v in dst_types.items()}
        self.outgoing = {k: frozenset(v) for k, v in outgoing.items()}
        self.incoming = {k: frozenset(v) for k, v in incoming.items()}
        self.type_pairs = {k: frozenset(v) for k, v in triples.items()}

    def pairs(self, etype: str) -> frozenset[tuple[str, str]]:
        """Witnessed (source type, target type) pairs for an edge type."""
        return self.type_pairs.get(etype, frozenset())

    def incident(self, vtype: str) -> frozenset[str]:
        """Edge types witnessed on a node type in either direction."""
        return self.outgoing.get(vtype, frozenset()) | self.incoming.get(vtype, frozenset())


class DataGraph:
    """Immutable directed multigraph with typed nodes/edges and a schema index."""

    def __init__(
        self,
        nodes: Iterable[NodeRecord],
        edges: Iterable[EdgeRecord],
        domains: Mapping[str, Iterable[str]] | None = None,
    ):
        self.nodes: dict[str, NodeRecord] = {}
        for rec in nodes:
            if rec.id in self.nodes:
                raise GraphError(f"duplicate node id: {rec.id}")
            if not rec.vtypes:
                raise GraphError(
                    f"node {rec.id} has no node types; atomic values are not supported"
                )
            self.nodes[rec.id] = rec
        self.edges: tuple[EdgeRecord, ...] = tuple(edges)
        for e in self.edges:
            for endpoint in (e.src, e.dst):
                if endpoint not in self.nodes:
                    raise GraphError(f"edge references unknown node id: {endpoint}")

        self.node_types: frozenset[str] = frozenset(
            t for rec in self.nodes.values() for t in rec.vtypes
        )
        self.edge_types: frozenset[str] = frozenset(e.etype for e in self.edges)
        self.domains: dict[str, frozenset[str]] = {
            d: frozenset(ts) for d, ts in (domains or {}).items()
        }

        incident: dict[str, set[str]] = defaultdict(set)
        instances: dict[str, list[str]] = defaultdict(list)
        pair_edges: dict[tuple[str, str], set[str]] = defaultdict(set)
        names: dict[str, list[str]] = defaultdict(list)
        for e in self.edges:
            incident[e.src].add(e.etype)
            incident[e.dst].add(e.etype)
            pair_edges[(e.src, e.dst)].add(e.etype)
        for rec in self.nodes.values():
            for t in rec.vtypes:
                instances[t].append(rec.id)
            names[rec.name].append(rec.id)
        self._incident = {v: frozenset(ts) for v, ts in incident.items()}
        self._instances = {t: tuple(sorted(ids)) for t, ids in instances.items()}
        self._pair_edges = {p: frozenset(ts) for p, ts in pair_edges.items()}
        self._names = dict(names)
        self.schema = SchemaIndex(self.nodes, self.edges)
        self._ne_cache: dict[QueryNodeLabel, frozenset[str]] = {}

    # -- basic lookups ------------------------------------------------------

    def node(self, node_id: str) -> NodeRecord:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise GraphError(f"unknown node id: {node_id}") from None

    def resolve_name(self, name: str) -> str:
        """Node id for a display name (names double as identifiers in the file formats)."""
        ids = self._names.get(name)
        if not ids:
            raise GraphError(f"unknown node name: {name}")
        if len(ids) > 1:
            raise GraphError(f"ambiguous node name: {name} ({', '.join(sorted(ids))})")
        return ids[0]

    def instances_of(self, type_id: str) -> tuple[str, ...]:
        if type_id not in self.node_types:
            raise GraphError(f"unknown node type: {type_id}")
        return self._instances.get(type_id, ())

    def edge_types_between(self, u: str, v: str) -> frozenset[str]:
        """Edge types of data edges between two nodes, in either orientation."""
        return self._pair_edges.get((u, v), frozenset()) | self._pair_edges.get(
            (v, u), frozenset()
        )

    def label_types(self, label: QueryNodeLabel) -> frozenset[str]:
        """Node types a label stands for: vtypes of the entity, or the type itself."""
        if label.is_entity:
            return self.node(label.value).vtypes
        if label.value not in self.node_types:
            raise GraphError(f"unknown node type: {label.value}")
        return frozenset((label.value,))

    def display_label(self, label: QueryNodeLabel) -> str:
        return self.node(label.value).name if label.is_entity else label.value

    # -- candidate computation ----------------------------------------------

    def incident_edge_types(self, node_id: str) -> frozenset[str]:
        """Types of edges touching a node in either direction."""
        self.node(node_id)
        return self._incident.get(node_id, frozenset())

    def neighboring_candidate_edges(self, label: QueryNodeLabel) -> frozenset[str]:
        """Edge types that can attach to a node carrying the given label.

        An entity label yields exactly its incident edge types; a type label
        yields the union over all instances of that type.
        """
        cached = self._ne_cache.get(label)
        if cached is not None:
            return cached
        if label.is_entity:
            result = self.incident_edge_types(label.value)
        else:
            result = frozenset().union(
                *(self._incident.get(v, frozenset()) for v in self.instances_of(label.value))
            )
        self._ne_cache[label] = result
        return result

    def passive_candidates(
        self, a: QueryNodeLabel, b: QueryNodeLabel
    ) -> dict[str, frozenset[str]]:
        """Edge types that may connect two labelled nodes, with permitted directions.

        Keys are the edge types in the intersection of both neighborhoods that
        the schema witnesses between the two labels; values are the permitted
        directions (DIR_FORWARD = a to b, DIR_BACKWARD = b to a).
        """
        shared = self.neighboring_candidate_edges(a) & self.neighboring_candidate_edges(b)
        types_a = self.label_types(a)
        types_b = self.label_types(b)
        result: dict[str, frozenset[str]] = {}
        for etype in shared:
            dirs = set()
            for s, t in self.schema.pairs(etype):
                if s in types_a and t in types_b:
                    dirs.add(DIR_FORWARD)
                if s in types_b and t in types_a:
                    dirs.add(DIR_BACKWARD)
            if dirs:
                result[etype] = frozenset(dirs)
        return result

    def active_candidates(
        self, qg: "QueryGraph", session: "QuerySession | None" = None
    ) -> set[CandidateEdge]:
        """All edges that could extend a partial query graph right now.

        Candidates anchor on every query-graph node and cover every
        schema-witnessed variant: between two existing nodes (emitted once, from
        the source side) and between an anchor and a fresh schema-typed node
        (both orientations, when witnessed). Edge types already recorded in the
        session, with either sign, are suppressed.
        """
        if not qg.nodes:
            raise GraphError("active candidates need a non-empty query graph")
        suppressed: set[str] = set()
        if session is not None:
            suppressed = {se.etype for se in session}
        local_types = {lid: self.label_types(label) for lid, label in qg.nodes}
        out: set[CandidateEdge] = set()
        for lid, label in qg.nodes:
            anchor_types = local_types[lid]
            for etype in self.neighboring_candidate_edges(label):
                if etype in suppressed:
                    continue
                for s, t in self.schema.pairs(etype):
                    # Existing-pair candidates are canonicalized to the form
                    # anchored at the source side, so both anchors emit the
                    # same object and the set deduplicates it.
                    if s in anchor_types:
                        out.add(CandidateEdge(etype, lid, DIR_OUT, None, t))
                        for oid, _ in qg.nodes:
                            if oid != lid and t in local_types[oid]:
                                out.add(CandidateEdge(etype, lid, DIR_OUT, oid, None))
                    if t in anchor_types:
                        out.add(CandidateEdge(etype, lid, DIR_IN, None, s))
                        for oid, _ in qg.nodes:
                            if oid != lid and s in local_types[oid]:
                                out.add(CandidateEdge(etype, oid, DIR_OUT, lid, None))
        return out


def _read_records(path: str) -> Iterable[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield line_no, line.split("\t")


def load_data_graph(nodes_path: str, edges_path: str) -> DataGraph:
    """Build a DataGraph from tab-separated node and edge files.

    Node lines: ``id<TAB>name<TAB>domain<TAB>type1,type2,...``
    Edge lines: ``src_id<TAB>dst_id<TAB>edge_type``
    Lines starting with ``#`` are ignored. Errors report the file line number.
    """
    nodes: dict[str, NodeRecord] = {}
    domains: dict[str, set[str]] = defaultdict(set)
    for line_no, fields in _read_records(nodes_path):
        if len(fields) != 4:
            raise GraphLoadError(nodes_path, line_no, f"expected 4 fields, got {len(fields)}")
        node_id, name, domain, types_csv = (f.strip() for f in fields)
        if not node_id or not name or not domain:
            raise GraphLoadError(nodes_path, line_no, "empty id, name or domain")
        vtypes = frozenset(t.strip() for t in types_csv.split(",") if t.strip())
        if not vtypes:
            raise GraphLoadError(
                nodes_path, line_no,
                f"node {node_id} has no types; atomic values are not supported",
            )
        if node_id in nodes:
            raise GraphLoadError(nodes_path, line_no, f"duplicate node id: {node_id}")
        nodes[node_id] = NodeRecord(node_id, name, vtypes)
        domains[domain].update(vtypes)

    edges: list[EdgeRecord] = []
    for line_no, fields in _read_records(edges_path):
        if len(fields) != 3:
            raise GraphLoadError(edges_path, line_no, f"expected 3 fields, got {len(fields)}")
        src, dst, etype = (f.strip() for f in fields)
        if not src or not dst or not etype:
            raise GraphLoadError(edges_path, line_no, "empty field")
        for endpoint in (src, dst):
            if endpoint not in nodes:
                raise GraphLoadError(
                    edges_path, line_no, f"edge references unknown node id: {endpoint}"
                )
        edges.append(EdgeRecord(src, dst, etype))

    return DataGraph(nodes.values(), edges, domains)
