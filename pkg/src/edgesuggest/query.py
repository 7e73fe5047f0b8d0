"""Query graphs, signed query sessions, and the graph-similarity success metric.

All values here are immutable; the mutation-style operations return new
instances, which keeps session replay and concurrent use trivially safe.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph import (
    DIR_FORWARD,
    DataGraph,
    GraphLoadError,
    LABEL_NAME,
    LABEL_TYPE,
    QueryNodeLabel,
)


class QueryModelError(Exception):
    """Invalid query-graph or session operation."""


@dataclass(frozen=True)
class SignedEdge:
    """An edge type with an accepted (+) or ignored (-) mark."""

    etype: str
    positive: bool

    def token(self) -> str:
        return self.etype if self.positive else "~" + self.etype

    @classmethod
    def from_token(cls, token: str) -> "SignedEdge":
        if token.startswith("~"):
            etype = token[1:]
            if not etype:
                raise ValueError("bare '~' is not a valid signed-edge token")
            return cls(etype, False)
        return cls(token, True)


def pos(etype: str) -> SignedEdge:
    return SignedEdge(etype, True)


def neg(etype: str) -> SignedEdge:
    return SignedEdge(etype, False)


@dataclass(frozen=True)
class QuerySession:
    """Ordered record of accepted and ignored edge types for one construction run.

    The order is the suggestion order. A given (edge type, sign) pair appears at
    most once; appending a duplicate is a no-op.
    """

    edges: tuple[SignedEdge, ...] = ()

    @classmethod
    def from_edges(cls, edges: Iterable[SignedEdge]) -> "QuerySession":
        session = cls()
        for se in edges:
            session = session.append(se)
        return session

    def append(self, signed: SignedEdge) -> "QuerySession":
        if signed in self.edges:
            return self
        return QuerySession(self.edges + (signed,))

    def contains_etype(self, etype: str) -> bool:
        return any(se.etype == etype for se in self.edges)

    def positives(self) -> tuple[str, ...]:
        return tuple(se.etype for se in self.edges if se.positive)

    def negatives(self) -> tuple[str, ...]:
        return tuple(se.etype for se in self.edges if not se.positive)

    def as_set(self) -> frozenset[SignedEdge]:
        return frozenset(self.edges)

    def tokens(self) -> tuple[str, ...]:
        return tuple(se.token() for se in self.edges)

    def __iter__(self):
        return iter(self.edges)

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class QueryGraph:
    """A small connected directed multigraph of labelled nodes.

    Connectivity may be violated only transiently: right after a node is added
    and before the edge connecting it arrives. In that window the graph is
    "pending connection" and the only permitted operation is add_edge.
    """

    nodes: tuple[tuple[int, QueryNodeLabel], ...] = ()
    edges: tuple[tuple[int, int, str], ...] = ()

    def label_of(self, local_id: int) -> QueryNodeLabel:
        for lid, label in self.nodes:
            if lid == local_id:
                return label
        raise QueryModelError(f"unknown local node id: {local_id}")

    def node_ids(self) -> tuple[int, ...]:
        return tuple(lid for lid, _ in self.nodes)

    def next_local_id(self) -> int:
        return max((lid for lid, _ in self.nodes), default=-1) + 1

    def component_count(self) -> int:
        if not self.nodes:
            return 0
        parent = {lid: lid for lid, _ in self.nodes}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for s, d, _ in self.edges:
            parent[find(s)] = find(d)
        return len({find(lid) for lid, _ in self.nodes})

    @property
    def pending_connection(self) -> bool:
        return self.component_count() >= 2

    def add_node(self, label: QueryNodeLabel, graph: DataGraph) -> "QueryGraph":
        """Append a labelled node. Only one unconnected node may exist at a time."""
        if self.pending_connection:
            raise QueryModelError(
                "graph is pending connection; add an edge to the new node first"
            )
        graph.label_types(label)  # validates resolvability
        return QueryGraph(self.nodes + ((self.next_local_id(), label),), self.edges)

    def add_edge(self, src: int, dst: int, etype: str, graph: DataGraph) -> "QueryGraph":
        """Append a directed edge after checking it against the schema.

        The edge type must be permitted between the two node labels in the
        src-to-dst direction. Parallel edges are allowed. If the graph was
        pending connection, the new edge must actually reconnect it.
        """
        src_label = self.label_of(src)
        dst_label = self.label_of(dst)
        permitted = graph.passive_candidates(src_label, dst_label)
        if etype not in permitted or DIR_FORWARD not in permitted[etype]:
            raise QueryModelError(
                f"edge type {etype} is not permitted from "
                f"{graph.display_label(src_label)} to {graph.display_label(dst_label)}"
            )
        was_pending = self.pending_connection
        result = QueryGraph(self.nodes, self.edges + ((src, dst, etype),))
        if was_pending and result.pending_connection:
            raise QueryModelError("edge must connect the pending node to the graph")
        return result


def _edge_counter(
    edges: Sequence[tuple[int, int, str]],
    mapping: dict[int, int],
    labels_ok: dict[int, bool],
) -> Counter:
    counted: Counter = Counter()
    for s, d, etype in edges:
        if labels_ok.get(s) and labels_ok.get(d):
            counted[(mapping[s], mapping[d], etype)] += 1
    return counted


def similarity(gu: QueryGraph, gt: QueryGraph) -> float:
    """Fraction of the target's edges preserved by the best node mapping.

    Maximizes, over injective mappings between the node sets (from the smaller
    side into the larger), the number of user-graph edges whose endpoint labels
    and edge type agree with a target edge under the mapping, normalized by the
    target's edge count. Labels must match exactly, including their kind.
    Parallel edges are matched up to the multiplicity present on both sides.
    """
    if not gt.edges:
        raise QueryModelError("target graph has no edges")
    u_ids = [lid for lid, _ in gu.nodes]
    t_ids = [lid for lid, _ in gt.nodes]
    u_labels = {lid: label for lid, label in gu.nodes}
    t_labels = {lid: label for lid, label in gt.nodes}
    target_counter: Counter = Counter((s, d, e) for s, d, e in gt.edges)
    total = len(gt.edges)

    if not u_ids or not gu.edges:
        return 0.0

    best = 0
    if len(u_ids) <= len(t_ids):
        choices = itertools.permutations(t_ids, len(u_ids))
        for assigned in choices:
            mapping = dict(zip(u_ids, assigned))
            ok = {lid: u_labels[lid] == t_labels[mapping[lid]] for lid in u_ids}
            matched = _edge_counter(gu.edges, mapping, ok)
            best = max(best, sum((matched & target_counter).values()))
    else:
        for assigned in itertools.permutations(u_ids, len(t_ids)):
            mapping = dict(zip(assigned, t_ids))
            ok = {lid: u_labels[lid] == t_labels[mapping[lid]] for lid in assigned}
            matched = _edge_counter(
                [e for e in gu.edges if e[0] in mapping and e[1] in mapping], mapping, ok
            )
            best = max(best, sum((matched & target_counter).values()))
    return best / total


def conversion_rate(results: Sequence[tuple[QueryGraph, QueryGraph]]) -> float:
    """Mean similarity between built and target graphs over a set of tasks."""
    if not results:
        raise QueryModelError("conversion rate needs at least one result")
    return sum(similarity(gu, gt) for gu, gt in results) / len(results)


# -- query-graph files ------------------------------------------------------


def load_query_graph(path: str, graph: DataGraph) -> QueryGraph:
    """Read a query graph from its two-section tab-separated file.

    The ``#nodes`` section lists ``local_id<TAB>kind<TAB>label`` where kind is
    ``name`` (entity, referenced by display name) or ``type``; the ``#edges``
    section lists ``src<TAB>dst<TAB>etype``. The loaded graph must be connected.
    """
    nodes: list[tuple[int, QueryNodeLabel]] = []
    edges: list[tuple[int, int, str]] = []
    section = None
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                marker = line.lstrip("#").strip().lower()
                if marker in ("nodes", "edges"):
                    section = marker
                continue
            fields = line.split("\t")
            if section == "nodes":
                if len(fields) != 3:
                    raise GraphLoadError(path, line_no, "node lines need 3 fields")
                lid, kind, label_text = fields[0].strip(), fields[1].strip(), fields[2].strip()
                if kind == LABEL_NAME:
                    label = QueryNodeLabel.entity(graph.resolve_name(label_text))
                elif kind == LABEL_TYPE:
                    if label_text not in graph.node_types:
                        raise GraphLoadError(path, line_no, f"unknown node type: {label_text}")
                    label = QueryNodeLabel.node_type(label_text)
                else:
                    raise GraphLoadError(path, line_no, f"unknown label kind: {kind}")
                nodes.append((int(lid), label))
            elif section == "edges":
                if len(fields) != 3:
                    raise GraphLoadError(path, line_no, "edge lines need 3 fields")
                src, dst, etype = int(fields[0]), int(fields[1]), fields[2].strip()
                if etype not in graph.edge_types:
                    raise GraphLoadError(path, line_no, f"unknown edge type: {etype}")
                edges.append((src, dst, etype))
            else:
                raise GraphLoadError(path, line_no, "content before #nodes header")
    qg = QueryGraph(tuple(nodes), tuple(edges))
    known = set(qg.node_ids())
    for s, d, _ in edges:
        if s not in known or d not in known:
            raise GraphLoadError(path, 0, f"edge references unknown local id: {s}->{d}")
    if qg.nodes and qg.component_count() != 1:
        raise GraphLoadError(path, 0, "query graph must be connected")
    return qg


def save_query_graph(qg: QueryGraph, path: str, graph: DataGraph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("#nodes\n")
        for lid, label in qg.nodes:
            fh.write(f"{lid}\t{label.kind}\t{graph.display_label(label)}\n")
        fh.write("#edges\n")
        for s, d, etype in qg.edges:
            fh.write(f"{s}\t{d}\t{etype}\n")
