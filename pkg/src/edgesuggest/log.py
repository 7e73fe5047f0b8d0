"""Query-log storage, support counting, frequent-itemset mining and log simulation.

A log is a multiset of sessions, each an unordered set of signed edge types.
An inverted index from signed edge to session ids makes subset-support counting
a postings intersection. Three pipelines bootstrap positive-only logs (from the
data graph, from entity co-occurrence windows, or imported verbatim) and a
schema-driven pass injects negative edges afterwards.
"""
from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .graph import DataGraph
from .query import QuerySession, SignedEdge, neg, pos

logger = logging.getLogger(__name__)

SessionSet = frozenset[SignedEdge]


class LogError(Exception):
    """Invalid query-log input or operation."""


class LogLoadError(LogError):
    def __init__(self, path: str, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


def _as_session_set(session: Iterable[SignedEdge]) -> SessionSet:
    if isinstance(session, QuerySession):
        return session.as_set()
    return frozenset(session)


class QueryLog:
    """Multiset of query sessions with an inverted index for support counting."""

    def __init__(self, sessions: Iterable[Iterable[SignedEdge]]):
        self.sessions: tuple[SessionSet, ...] = tuple(
            _as_session_set(s) for s in sessions
        )
        postings: dict[SignedEdge, list[int]] = defaultdict(list)
        for sid, sess in enumerate(self.sessions):
            for se in sess:
                postings[se].append(sid)
        self._postings: dict[SignedEdge, frozenset[int]] = {
            se: frozenset(ids) for se, ids in postings.items()
        }
        self._all_ids: frozenset[int] = frozenset(range(len(self.sessions)))
        counts: Counter = Counter()
        for sess in self.sessions:
            for se in sess:
                if se.positive:
                    counts[se.etype] += 1
        self._positive_counts = counts
        # positive items per session, precomputed for rankers
        self.session_positives: tuple[tuple[str, ...], ...] = tuple(
            tuple(sorted(se.etype for se in sess if se.positive)) for sess in self.sessions
        )

    def __len__(self) -> int:
        return len(self.sessions)

    def postings(self, signed: SignedEdge) -> frozenset[int]:
        return self._postings.get(signed, frozenset())

    def all_session_ids(self) -> frozenset[int]:
        return self._all_ids

    def matching_ids(self, edges: Iterable[SignedEdge]) -> frozenset[int]:
        """Ids of sessions containing every given signed edge."""
        result = self._all_ids
        for se in sorted(edges, key=lambda s: len(self.postings(s))):
            result = result & self.postings(se)
            if not result:
                break
        return result

    def count(self, edges: Iterable[SignedEdge]) -> int:
        """Number of sessions containing all the given signed edges.

        The empty set is contained in every session, so count(()) == len(log).
        """
        return len(self.matching_ids(edges))

    def supp(self, etype: str, subset: Iterable[SignedEdge]) -> float:
        """Among sessions containing ``subset``, the fraction also containing +etype."""
        base = frozenset(subset)
        denom = self.count(base)
        if denom == 0:
            raise LogError("no supporting sessions for the given subset")
        return self.count(base | {pos(etype)}) / denom

    def positive_count(self, etype: str) -> int:
        return self._positive_counts.get(etype, 0)

    def positive_types(self) -> tuple[str, ...]:
        return tuple(sorted(self._positive_counts))

    def is_positive_only(self) -> bool:
        return all(se.positive for sess in self.sessions for se in sess)

    def extended(self, session: Iterable[SignedEdge]) -> "QueryLog":
        return QueryLog(self.sessions + (_as_session_set(session),))


@dataclass(frozen=True)
class SimulationConfig:
    """Thresholds for the log-simulation pipelines.

    The support thresholds are absolute session/node counts. There is no
    default for them: each pipeline demands the one it uses.
    """

    rho_w: int | None = None
    rho_d: int | None = None
    max_itemset_size: int = 5

    def __post_init__(self):
        for name in ("rho_w", "rho_d"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.max_itemset_size < 1:
            raise ValueError("max_itemset_size must be >= 1")


def apriori_frequent_itemsets(
    itemsets: Sequence[Iterable[str]],
    min_support: int,
    max_size: int,
) -> list[tuple[frozenset[str], int]]:
    """All itemsets of size 1..max_size supported by at least min_support inputs.

    Level-wise generation: k-candidates are joined from frequent (k-1)-sets and
    pruned unless every (k-1)-subset is frequent. Output is ordered by size,
    then lexicographically, for determinism.
    """
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    transactions = [frozenset(t) for t in itemsets]
    counts: Counter = Counter()
    for t in transactions:
        for item in t:
            counts[frozenset((item,))] += 1
    frequent: dict[frozenset[str], int] = {
        s: c for s, c in counts.items() if c >= min_support
    }
    result = dict(frequent)
    level = set(frequent)
    k = 2
    while level and k <= max_size:
        candidates = set()
        for a, b in combinations(sorted(level, key=sorted), 2):
            union = a | b
            if len(union) == k and all(
                frozenset(sub) in level for sub in combinations(union, k - 1)
            ):
                candidates.add(union)
        level_counts: Counter = Counter()
        for t in transactions:
            for c in candidates:
                if c <= t:
                    level_counts[c] += 1
        level = {c for c, n in level_counts.items() if n >= min_support}
        for c in level:
            result[c] = level_counts[c]
        k += 1
    return sorted(result.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))


def datapos_simulate(graph: DataGraph, cfg: SimulationConfig) -> QueryLog:
    """Positive-only log mined from per-node incident edge-type itemsets."""
    if cfg.rho_d is None:
        raise ValueError("datapos_simulate requires rho_d")
    itemsets = [
        graph.incident_edge_types(node_id) for node_id in sorted(graph.nodes)
    ]
    frequent = apriori_frequent_itemsets(itemsets, cfg.rho_d, cfg.max_itemset_size)
    sessions = [
        frozenset(pos(e) for e in items) for items, _ in frequent if len(items) >= 2
    ]
    return QueryLog(sessions)


def load_entity_windows(path: str) -> list[list[str]]:
    """Entity windows: one window per line, space-separated node ids, >= 2 each."""
    windows: list[list[str]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            ids = line.split()
            if len(ids) < 2:
                raise LogLoadError(path, line_no, "a window needs at least 2 entities")
            windows.append(ids)
    return windows


def cooccurrence_ingest(
    windows: Sequence[Sequence[str]],
    graph: DataGraph,
    cfg: SimulationConfig,
) -> QueryLog:
    """Positive-only log mined from edge types linking co-mentioned entities.

    Each window contributes one itemset: every edge type found in the data
    graph between any pair of its entities, in either direction. Ids that do
    not resolve are skipped (counted in a warning), then the itemsets are mined
    like any other transaction set.
    """
    if cfg.rho_w is None:
        raise ValueError("cooccurrence_ingest requires rho_w")
    skipped = 0
    itemsets: list[set[str]] = []
    for window in windows:
        resolved = []
        for node_id in window:
            if node_id in graph.nodes:
                resolved.append(node_id)
            else:
                skipped += 1
        items: set[str] = set()
        for u, v in combinations(resolved, 2):
            items |= graph.edge_types_between(u, v)
        itemsets.append(items)
    if skipped:
        logger.warning("cooccurrence ingest skipped %d unresolvable entity ids", skipped)
    frequent = apriori_frequent_itemsets(itemsets, cfg.rho_w, cfg.max_itemset_size)
    sessions = [
        frozenset(pos(e) for e in items) for items, _ in frequent if len(items) >= 2
    ]
    return QueryLog(sessions)


def import_positive_sets(path: str, graph: DataGraph) -> QueryLog:
    """One positive-only session per non-empty line, used verbatim (no mining)."""
    sessions: list[frozenset[SignedEdge]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            for token in tokens:
                if token not in graph.edge_types:
                    raise LogLoadError(path, line_no, f"unknown edge type: {token}")
            sessions.append(frozenset(pos(t) for t in tokens))
    return QueryLog(sessions)


def inject_negatives(
    log: QueryLog,
    graph: DataGraph,
    max_negatives: int | None = None,
) -> QueryLog:
    """Add schema-adjacent unused edge types to each session as negatives.

    For a session, collect the node types touched by any edge instance whose
    type appears in the session; every edge type incident on those node types
    and absent from the session joins as a negative. Positives are untouched.
    ``max_negatives`` optionally caps the injected set (smallest names first).
    """
    if not log.is_positive_only():
        raise LogError("inject_negatives expects a positive-only log")
    schema = graph.schema
    sessions: list[frozenset[SignedEdge]] = []
    for sess in log.sessions:
        etypes = {se.etype for se in sess}
        touched: set[str] = set()
        for etype in etypes:
            if etype not in graph.edge_types:
                raise LogError(f"edge type unknown to the data graph: {etype}")
            touched |= schema.source_types[etype]
            touched |= schema.target_types[etype]
        adjacent: set[str] = set()
        for vtype in touched:
            adjacent |= schema.incident(vtype)
        negatives = sorted(adjacent - etypes)
        if max_negatives is not None:
            negatives = negatives[:max_negatives]
        sessions.append(sess | frozenset(neg(e) for e in negatives))
    return QueryLog(sessions)


def save_log(log: QueryLog, path: str) -> None:
    """One session per line; positive tokens first, negatives prefixed with ~."""
    with open(path, "w", encoding="utf-8") as fh:
        for sess in log.sessions:
            positives = sorted(se.etype for se in sess if se.positive)
            negatives = sorted(se.etype for se in sess if not se.positive)
            tokens = positives + ["~" + e for e in negatives]
            fh.write(" ".join(tokens) + "\n")


def load_log(path: str) -> QueryLog:
    sessions: list[frozenset[SignedEdge]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                sessions.append(frozenset(SignedEdge.from_token(t) for t in line.split()))
            except ValueError as exc:
                raise LogLoadError(path, line_no, str(exc)) from None
    return QueryLog(sessions)
