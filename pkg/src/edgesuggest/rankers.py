"""Candidate-edge rankers: the random-path log-subset method plus baselines.

The main ranker scores a candidate by averaging, over randomly ordered subsets
of the ongoing session, the fraction of matching log sessions that also contain
the candidate. Each random path grows by sampling session edges without
replacement until the set of log sessions containing the whole path shrinks to
the configured threshold (or the session is exhausted); the surviving log
subset then votes on every candidate. Baselines: a naive Bayes classifier over
converted sessions, class association rules, global frequency, alphabetical.

All rankers share one interface: deterministic output given (inputs, seed).
The stochastic ranker derives one RNG stream per rank call from its seed and a
call ordinal, so replaying a call sequence reproduces results bit for bit.
"""
from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import CandidateEdge
from .log import LogError, QueryLog
from .query import QuerySession, SignedEdge, pos


@dataclass(frozen=True)
class RdpConfig:
    n_paths: int = 10
    tau: int = 10
    rng_seed: int = 0
    include_negatives: bool = True  # False gives the positives-only variant

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")


@dataclass(frozen=True)
class RankedSuggestion:
    candidate: CandidateEdge
    score: float


class Ranker(ABC):
    """Scores candidate edge types against the ongoing session."""

    name = "ranker"

    @abstractmethod
    def score_types(
        self, etypes: Sequence[str], session: QuerySession
    ) -> dict[str, float]:
        """Score each distinct edge type; higher is more relevant."""

    def rank(
        self, candidates: Iterable[CandidateEdge], session: QuerySession
    ) -> list[RankedSuggestion]:
        """Candidates ordered by score descending, then edge-type name, then
        a canonical candidate key, so ties are deterministic."""
        cands = sorted(candidates, key=CandidateEdge.sort_key)
        if not cands:
            raise ValueError("empty candidate set")
        etypes = sorted({c.etype for c in cands})
        scores = self.score_types(etypes, session)
        ordered = sorted(cands, key=lambda c: (-scores[c.etype],) + c.sort_key())
        return [RankedSuggestion(c, scores[c.etype]) for c in ordered]

    def rank_types(
        self, etypes: Iterable[str], session: QuerySession
    ) -> list[tuple[str, float]]:
        ets = sorted(set(etypes))
        if not ets:
            raise ValueError("empty candidate set")
        scores = self.score_types(ets, session)
        return sorted(((e, scores[e]) for e in ets), key=lambda p: (-p[1], p[0]))


# -- sampled session-subset ranker ---------------------------------------------


class RdpRanker(Ranker):
    """Monte-Carlo session-subset ranker over a query log.

    Path construction and the per-path log subsets depend only on the log, so
    both are memoized across calls. Scores are aggregated per distinct path to
    keep the |session| == 1 case exact (a single possible path yields its
    support value with no floating-point averaging error).
    """

    def __init__(self, log: QueryLog, config: RdpConfig = RdpConfig()):
        self.log = log
        self.config = config
        self.name = "rdp" if config.include_negatives else "rdp-noneg"
        self._wpath_cache: dict[frozenset[SignedEdge], frozenset[int]] = {
            frozenset(): log.all_session_ids()
        }
        self._numer_cache: dict[frozenset[SignedEdge], tuple[int, Counter]] = {}
        self._ordinal = 0

    def _session_edges(self, session: QuerySession) -> list[SignedEdge]:
        if self.config.include_negatives:
            return list(session)
        return [se for se in session if se.positive]

    def _draw_path(
        self, q: list[SignedEdge], rng: np.random.Generator
    ) -> frozenset[SignedEdge]:
        pool = list(range(len(q)))
        path: frozenset[SignedEdge] = frozenset()
        wpath = self.log.all_session_ids()
        while pool:
            j = int(rng.integers(0, len(pool)))
            idx = pool[j]
            pool[j] = pool[-1]
            pool.pop()
            path = path | {q[idx]}
            cached = self._wpath_cache.get(path)
            if cached is None:
                cached = wpath & self.log.postings(q[idx])
                self._wpath_cache[path] = cached
            wpath = cached
            if len(wpath) <= self.config.tau:
                break
        return path

    def _path_stats(self, path: frozenset[SignedEdge]) -> tuple[int, Counter]:
        cached = self._numer_cache.get(path)
        if cached is None:
            wpath = self._wpath_cache.get(path)
            if wpath is None:
                wpath = self.log.matching_ids(path)
                self._wpath_cache[path] = wpath
            numer: Counter = Counter()
            for sid in wpath:
                for etype in self.log.session_positives[sid]:
                    numer[etype] += 1
            cached = (len(wpath), numer)
            self._numer_cache[path] = cached
        return cached

    def score_types(
        self, etypes: Sequence[str], session: QuerySession
    ) -> dict[str, float]:
        if len(self.log) == 0:
            raise LogError("cannot rank against an empty log")
        rng = np.random.default_rng((self.config.rng_seed, self._ordinal))
        self._ordinal += 1
        q = self._session_edges(session)
        path_counts: dict[frozenset[SignedEdge], int] = {}
        if not q:
            # degenerate case: every path is empty and the whole log votes
            path_counts[frozenset()] = self.config.n_paths
        else:
            for _ in range(self.config.n_paths):
                path = self._draw_path(q, rng)
                path_counts[path] = path_counts.get(path, 0) + 1
        if len(path_counts) == 1:
            (path,) = path_counts
            size, numer = self._path_stats(path)
            if size == 0:
                return {e: 0.0 for e in etypes}
            return {e: numer.get(e, 0) / size for e in etypes}
        totals = {e: 0.0 for e in etypes}
        for path, count in path_counts.items():
            size, numer = self._path_stats(path)
            if size == 0:
                continue
            for e in etypes:
                hits = numer.get(e, 0)
                if hits:
                    totals[e] += count * (hits / size)
        n = self.config.n_paths
        return {e: totals[e] / n for e in totals}


def rdp_rank(
    candidates: Iterable[CandidateEdge],
    session: QuerySession,
    log: QueryLog,
    config: RdpConfig = RdpConfig(),
) -> list[RankedSuggestion]:
    """One-shot ranking call; uses the stream derived from (seed, ordinal 0)."""
    return RdpRanker(log, config).rank(candidates, session)


def rdp_expected_score(
    etypes: Iterable[str],
    session: QuerySession,
    log: QueryLog,
    tau: int,
    include_negatives: bool = True,
) -> dict[str, float]:
    """Exact expected per-type score under uniform without-replacement sampling.

    Enumerates every permutation of the session's edges, applies the stopping
    rule to each, and averages the resulting supports. Intended as a test
    oracle; sessions beyond 6 edges are refused.
    """
    if len(log) == 0:
        raise LogError("cannot rank against an empty log")
    q = [se for se in session if include_negatives or se.positive]
    if len(q) > 6:
        raise ValueError("session too large for exact enumeration")
    ets = sorted(set(etypes))
    if not q:
        n = len(log)
        return {e: log.count((pos(e),)) / n for e in ets}
    totals = {e: 0.0 for e in ets}
    n_perms = 0
    for perm in itertools.permutations(range(len(q))):
        ids = log.all_session_ids()
        for idx in perm:
            ids = ids & log.postings(q[idx])
            if len(ids) <= tau:
                break
        n_perms += 1
        size = len(ids)
        if size == 0:
            continue
        for e in ets:
            hits = len(ids & log.postings(pos(e)))
            totals[e] += hits / size
    return {e: totals[e] / n_perms for e in ets}


# -- naive Bayes baseline -----------------------------------------------------


class NbModel:
    """Smoothed per-class signed-edge presence counts.

    Each log session with positives P and negatives N becomes |P| training
    instances: one per positive edge c, with attributes (P - {c}) as positives
    plus N as negatives and class c. Add-one smoothing throughout.
    """

    def __init__(self, log: QueryLog):
        instances: list[tuple[str, frozenset[SignedEdge]]] = []
        for sess in log.sessions:
            positives = sorted(se.etype for se in sess if se.positive)
            rest = frozenset(se for se in sess if not se.positive)
            for c in positives:
                attrs = rest | frozenset(
                    pos(p) for p in positives if p != c
                )
                instances.append((c, attrs))
        if not instances:
            raise LogError("log has no positive edges to train on")
        self.classes = tuple(sorted({c for c, _ in instances}))
        self._class_index = {c: i for i, c in enumerate(self.classes)}
        attrs_seen = sorted(
            {a for _, attr_set in instances for a in attr_set},
            key=lambda se: (se.etype, se.positive),
        )
        self._attr_index = {a: i for i, a in enumerate(attrs_seen)}
        counts = np.zeros((len(self.classes), len(attrs_seen)), dtype=np.int64)
        class_counts = np.zeros(len(self.classes), dtype=np.int64)
        for c, attr_set in instances:
            ci = self._class_index[c]
            class_counts[ci] += 1
            for a in attr_set:
                counts[ci, self._attr_index[a]] += 1
        self.class_counts = class_counts
        self._counts = counts
        self._log_prior = np.log(class_counts + 1.0)
        self._log_cond = np.log(counts + 1.0) - np.log(class_counts + 2.0)[:, None]
        self._log_absent = -np.log(class_counts + 2.0)
        self.training_instances = len(instances)

    def log_scores(self, session: QuerySession) -> tuple[np.ndarray, float]:
        """Per-known-class log scores plus the floor for never-seen classes."""
        evidence = list(session)
        known = [self._attr_index[se] for se in evidence if se in self._attr_index]
        unknown = len(evidence) - len(known)
        scores = self._log_prior.copy()
        if known:
            scores += self._log_cond[:, known].sum(axis=1)
        if unknown:
            scores += unknown * self._log_absent
        floor = len(evidence) * math.log(0.5)
        return scores, floor

    def class_of(self, etype: str) -> int | None:
        return self._class_index.get(etype)

    def class_instances(self, etype: str) -> int:
        ci = self.class_of(etype)
        return int(self.class_counts[ci]) if ci is not None else 0

    def attr_count(self, class_etype: str, attr: SignedEdge) -> int:
        """Training instances of the class whose attribute set contains attr."""
        ci = self.class_of(class_etype)
        ai = self._attr_index.get(attr)
        if ci is None or ai is None:
            return 0
        return int(self._counts[ci, ai])


class NaiveBayesRanker(Ranker):
    name = "nb"

    def __init__(self, model: NbModel):
        self.model = model

    def score_types(
        self, etypes: Sequence[str], session: QuerySession
    ) -> dict[str, float]:
        scores, floor = self.model.log_scores(session)
        raw = {}
        for e in etypes:
            ci = self.model.class_of(e)
            raw[e] = float(scores[ci]) if ci is not None else floor
        # normalize to posteriors over the candidate set (keeps scores >= 0)
        top = max(raw.values())
        expd = {e: math.exp(v - top) for e, v in raw.items()}
        z = sum(expd.values())
        return {e: v / z for e, v in expd.items()}


def nb_train(log: QueryLog) -> NbModel:
    return NbModel(log)


def nb_rank(
    candidates: Iterable[CandidateEdge], session: QuerySession, model: NbModel
) -> list[RankedSuggestion]:
    return NaiveBayesRanker(model).rank(candidates, session)


# -- class association rules baseline -----------------------------------------


@dataclass(frozen=True)
class CarRule:
    antecedent: frozenset[SignedEdge]
    consequent: str
    support: int
    confidence: float


class CarRuleSet:
    def __init__(self, rules: Iterable[CarRule]):
        self.rules = tuple(rules)
        self.max_support = max((r.support for r in self.rules), default=1)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)


def car_train(
    log: QueryLog, min_support: int = 1, min_confidence: float = 0.0
) -> CarRuleSet:
    """One rule per (session, positive edge): the rest of the session implies it.

    Identical rules from duplicate sessions aggregate their support counts.
    Confidence is measured against the whole log.
    """
    if min_support < 0 or min_confidence < 0:
        raise ValueError("thresholds must be >= 0")
    raw: Counter = Counter()
    for sess in log.sessions:
        positives = sorted(se.etype for se in sess if se.positive)
        for c in positives:
            antecedent = frozenset(se for se in sess if se != pos(c))
            raw[(antecedent, c)] += 1
    rules = []
    for (antecedent, consequent), support in raw.items():
        if support < min_support:
            continue
        confidence = log.count(antecedent | {pos(consequent)}) / log.count(antecedent)
        if confidence < min_confidence:
            continue
        rules.append(CarRule(antecedent, consequent, support, confidence))
    rules.sort(key=lambda r: (r.consequent, sorted(se.token() for se in r.antecedent)))
    return CarRuleSet(rules)


class CarRanker(Ranker):
    """Scores a candidate by summing, over rules concluding it, the session's
    overlap fraction with the rule body times confidence times normalized
    support. Decomposed per signed edge into dense consequent vectors so a
    rank call is |session| vector additions."""

    name = "car"

    def __init__(self, ruleset: CarRuleSet):
        self.ruleset = ruleset
        consequents = sorted({r.consequent for r in ruleset})
        self._cons_index = {c: i for i, c in enumerate(consequents)}
        weights: dict[SignedEdge, np.ndarray] = {}
        max_support = ruleset.max_support
        for rule in ruleset:
            if not rule.antecedent:
                continue  # an empty body never overlaps a session
            w = rule.confidence * (rule.support / max_support) / len(rule.antecedent)
            ci = self._cons_index[rule.consequent]
            for se in rule.antecedent:
                vec = weights.get(se)
                if vec is None:
                    vec = np.zeros(len(consequents))
                    weights[se] = vec
                vec[ci] += w
        self._weights = weights

    def score_types(
        self, etypes: Sequence[str], session: QuerySession
    ) -> dict[str, float]:
        total: np.ndarray | None = None
        for se in session:
            vec = self._weights.get(se)
            if vec is not None:
                total = vec.copy() if total is None else total + vec
        if total is None:
            return {e: 0.0 for e in etypes}
        return {
            e: float(total[self._cons_index[e]]) if e in self._cons_index else 0.0
            for e in etypes
        }


def car_rank(
    candidates: Iterable[CandidateEdge], session: QuerySession, rules: CarRuleSet
) -> list[RankedSuggestion]:
    return CarRanker(rules).rank(candidates, session)


# -- trivial baselines ---------------------------------------------------------


class FrequencyRanker(Ranker):
    name = "freq"

    def __init__(self, log: QueryLog):
        self.log = log

    def score_types(
        self, etypes: Sequence[str], session: QuerySession
    ) -> dict[str, float]:
        return {e: float(self.log.positive_count(e)) for e in etypes}


class AlphabeticalRanker(Ranker):
    name = "alpha"

    def score_types(
        self, etypes: Sequence[str], session: QuerySession
    ) -> dict[str, float]:
        # constant scores; the shared tie-break yields lexicographic order
        return {e: 0.0 for e in etypes}


def frequency_rank(
    candidates: Iterable[CandidateEdge], log: QueryLog
) -> list[RankedSuggestion]:
    return FrequencyRanker(log).rank(candidates, QuerySession())


def alphabetical_rank(candidates: Iterable[CandidateEdge]) -> list[RankedSuggestion]:
    return AlphabeticalRanker().rank(candidates, QuerySession())


RANKER_IDS = ("rdp", "rdp-noneg", "nb", "car", "freq", "alpha")


def make_ranker(
    ranker_id: str, log: QueryLog, rdp_config: RdpConfig = RdpConfig()
) -> Ranker:
    if ranker_id == "rdp":
        cfg = RdpConfig(rdp_config.n_paths, rdp_config.tau, rdp_config.rng_seed, True)
        return RdpRanker(log, cfg)
    if ranker_id == "rdp-noneg":
        cfg = RdpConfig(rdp_config.n_paths, rdp_config.tau, rdp_config.rng_seed, False)
        return RdpRanker(log, cfg)
    if ranker_id == "nb":
        return NaiveBayesRanker(nb_train(log))
    if ranker_id == "car":
        return CarRanker(car_train(log))
    if ranker_id == "freq":
        return FrequencyRanker(log)
    if ranker_id == "alpha":
        return AlphabeticalRanker()
    raise ValueError(f"unknown ranker id: {ranker_id} (expected one of {RANKER_IDS})")
