"""Completion-experiment harness: grow a one-edge partial graph to its target.

Each target graph expands into one instance per edge; the instance starts from
that edge and is completed by repeatedly taking the ranker's top suggestion.
A suggestion whose edge type fits a remaining target edge (anchor and
endpoints compatible) is accepted and recorded positive; otherwise it is
recorded negative. A run stops on completion, on an empty candidate set, or at
the suggestion cap.

Conventions, also stated in the report header: the initial edge is given, so
it enters the session as a positive but does not count as a suggestion; capped
runs are counted at the cap and flagged.
"""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .graph import DIR_OUT, CandidateEdge, DataGraph
from .query import QueryGraph, QuerySession, neg, pos, similarity
from .rankers import Ranker

DEFAULT_CAP = 200


class HarnessError(Exception):
    pass


@dataclass(frozen=True)
class CompletionInstance:
    """A one-edge starting graph plus the target it must grow into.

    The partial graph reuses the target's local node ids, so node
    correspondence never needs separate bookkeeping.
    """

    instance_id: str
    initial: QueryGraph
    target: QueryGraph
    initial_edge_index: int


@dataclass(frozen=True)
class CompletionResult:
    instance_id: str
    suggestions_used: int
    completed: bool
    wall_time: float
    similarity: float
    transcript: tuple[str, ...]  # signed tokens for every ranker-issued suggestion
    cap: int

    @property
    def capped(self) -> bool:
        return not self.completed and self.suggestions_used >= self.cap

    def replay_fields(self) -> tuple:
        """Everything except wall time, which is not reproducible."""
        return (
            self.instance_id,
            self.suggestions_used,
            self.completed,
            self.similarity,
            self.transcript,
            self.cap,
        )


def expand_target_to_instances(
    target: QueryGraph, target_id: str = "target"
) -> list[CompletionInstance]:
    """One instance per target edge, each starting from that single edge."""
    if not target.edges:
        raise HarnessError(f"{target_id}: target graph has no edges")
    instances = []
    for k, (src, dst, etype) in enumerate(target.edges):
        keep = {src, dst}
        nodes = tuple((lid, label) for lid, label in target.nodes if lid in keep)
        initial = QueryGraph(nodes, ((src, dst, etype),))
        instances.append(
            CompletionInstance(f"{target_id}#{k}", initial, target, k)
        )
    return instances


def _candidate_matches_target_edge(
    cand: CandidateEdge,
    tedge: tuple[int, int, str],
    partial: QueryGraph,
    graph: DataGraph,
    target: QueryGraph,
) -> bool:
    src, dst, etype = tedge
    if cand.etype != etype:
        return False
    if cand.direction == DIR_OUT:
        anchor_is, other_is = src, dst
    else:
        anchor_is, other_is = dst, src
    if cand.anchor != anchor_is:
        return False
    present = set(partial.node_ids())
    if cand.other is not None:
        return cand.other == other_is
    # fresh-node candidate: the target endpoint must not be materialized yet
    # and the proposed node type must fit the target node's label
    if other_is in present:
        return False
    return cand.other_type in graph.label_types(target.label_of(other_is))


def run_completion(
    instance: CompletionInstance,
    ranker: Ranker,
    graph: DataGraph,
    cap: int = DEFAULT_CAP,
) -> CompletionResult:
    """Drive one instance to completion (or the cap) with top-1 suggestions.

    Wall time covers the rank calls only.
    """
    if cap < 1:
        raise HarnessError("cap must be >= 1")
    partial = instance.initial
    target = instance.target
    initial_etype = partial.edges[0][2]
    session = QuerySession().append(pos(initial_etype))
    remaining = list(target.edges)
    remaining.pop(instance.initial_edge_index)

    transcript: list[str] = []
    suggestions_used = 0
    rank_seconds = 0.0
    while remaining and suggestions_used < cap:
        candidates = graph.active_candidates(partial, session)
        if not candidates:
            break
        t0 = time.perf_counter()
        ranked = ranker.rank(candidates, session)
        rank_seconds += time.perf_counter() - t0
        top_etype = ranked[0].candidate.etype
        variants = [s.candidate for s in ranked if s.candidate.etype == top_etype]
        accepted_index = None
        accepted_cand = None
        for i, tedge in enumerate(remaining):
            for cand in variants:
                if _candidate_matches_target_edge(cand, tedge, partial, graph, target):
                    accepted_index, accepted_cand = i, cand
                    break
            if accepted_index is not None:
                break
        suggestions_used += 1
        if accepted_index is None:
            session = session.append(neg(top_etype))
            transcript.append("~" + top_etype)
            continue
        src, dst, etype = remaining.pop(accepted_index)
        present = set(partial.node_ids())
        new_nodes = partial.nodes
        for endpoint in (src, dst):
            if endpoint not in present:
                new_nodes = new_nodes + ((endpoint, target.label_of(endpoint)),)
        partial = QueryGraph(new_nodes, partial.edges + ((src, dst, etype),))
        session = session.append(pos(etype))
        transcript.append(etype)

    completed = not remaining
    return CompletionResult(
        instance_id=instance.instance_id,
        suggestions_used=suggestions_used,
        completed=completed,
        wall_time=rank_seconds,
        similarity=similarity(partial, target),
        transcript=tuple(transcript),
        cap=cap,
    )


@dataclass(frozen=True)
class ExperimentSpec:
    targets: tuple[tuple[str, QueryGraph], ...]
    ranker_id: str
    cap: int = DEFAULT_CAP
    seeds: tuple[int, ...] = (0,)


def derive_instance_seed(base_seed: int, ordinal: int) -> int:
    """Deterministic per-instance seed, independent of execution order."""
    return base_seed * 1_000_003 + ordinal


def run_experiment(
    graph: DataGraph,
    targets: Sequence[tuple[str, QueryGraph]],
    ranker_factory: Callable[[int], Ranker],
    cap: int = DEFAULT_CAP,
    seed: int = 0,
) -> list[CompletionResult]:
    """Expand every target and run each instance with a per-instance ranker.

    ``ranker_factory`` receives the derived instance seed; deterministic
    rankers may ignore it. Instances are independent, so results do not depend
    on execution order.
    """
    instances = []
    for target_id, target in targets:
        instances.extend(expand_target_to_instances(target, target_id))
    results = []
    for ordinal, instance in enumerate(instances):
        ranker = ranker_factory(derive_instance_seed(seed, ordinal))
        results.append(run_completion(instance, ranker, graph, cap))
    return results


@dataclass
class RankerSummary:
    ranker: str
    instances: int
    mean_suggestions: float
    median_suggestions: float
    completion_fraction: float
    mean_wall_time: float
    capped_runs: int


REPORT_HEADER = (
    "# completion report; initial edge given (not counted); "
    "capped runs counted at cap and flagged"
)


def summarize(ranker: str, results: Sequence[CompletionResult]) -> RankerSummary:
    if not results:
        raise HarnessError("no results to summarize")
    used = [r.suggestions_used for r in results]
    return RankerSummary(
        ranker=ranker,
        instances=len(results),
        mean_suggestions=statistics.fmean(used),
        median_suggestions=statistics.median(used),
        completion_fraction=sum(r.completed for r in results) / len(results),
        mean_wall_time=statistics.fmean(r.wall_time for r in results),
        capped_runs=sum(r.capped for r in results),
    )


def report(results_by_ranker: dict[str, Sequence[CompletionResult]]) -> str:
    """Human-readable table; one row per ranker. TSV records via result_records."""
    if not results_by_ranker:
        raise HarnessError("no results to report")
    lines = [REPORT_HEADER]
    lines.append(
        "ranker\tinstances\tmean_sugg\tmedian_sugg\tcompleted\tmean_rank_s\tcapped"
    )
    for ranker in sorted(results_by_ranker):
        s = summarize(ranker, results_by_ranker[ranker])
        lines.append(
            f"{s.ranker}\t{s.instances}\t{s.mean_suggestions:.2f}\t"
            f"{s.median_suggestions:.1f}\t{s.completion_fraction:.3f}\t"
            f"{s.mean_wall_time:.4f}\t{s.capped_runs}"
        )
    return "\n".join(lines)


def result_records(ranker: str, results: Sequence[CompletionResult]) -> list[str]:
    """Machine-readable TSV lines, one per instance."""
    records = []
    for r in results:
        records.append(
            f"{ranker}\t{r.instance_id}\t{r.suggestions_used}\t"
            f"{int(r.completed)}\t{int(r.capped)}\t{r.similarity:.4f}\t"
            f"{r.wall_time:.4f}\t{' '.join(r.transcript)}"
        )
    return records
