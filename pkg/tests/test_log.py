from __future__ import annotations

import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgesuggest.graph import DataGraph, EdgeRecord, NodeRecord
from edgesuggest.log import (
    LogError,
    LogLoadError,
    QueryLog,
    SimulationConfig,
    apriori_frequent_itemsets,
    cooccurrence_ingest,
    datapos_simulate,
    import_positive_sets,
    inject_negatives,
    load_entity_windows,
    load_log,
    save_log,
)
from edgesuggest.query import neg, pos


def make_graph(node_specs, edge_specs):
    nodes = [NodeRecord(i, i, frozenset(ts)) for i, ts in node_specs.items()]
    edges = [EdgeRecord(s, d, e) for s, d, e in edge_specs]
    return DataGraph(nodes, edges)


class TestCount:
    def test_education_founder(self, worked_log):
        assert worked_log.count({pos("education"), pos("founder")}) == 2

    def test_director(self, worked_log):
        assert worked_log.count({pos("director")}) == 3

    def test_empty_set_counts_all(self, worked_log):
        assert worked_log.count(()) == 8

    def test_negative_edge(self, worked_log):
        assert worked_log.count({neg("director")}) == 1

    def test_index_matches_linear_scan(self):
        rng = random.Random(3)
        alphabet = [f"t{i}" for i in range(8)]
        sessions = []
        for _ in range(200):
            size = rng.randint(1, 6)
            chosen = rng.sample(alphabet, size)
            sessions.append(
                frozenset(
                    pos(e) if rng.random() < 0.7 else neg(e) for e in chosen
                )
            )
        log = QueryLog(sessions)
        for _ in range(300):
            probe = frozenset(
                pos(e) if rng.random() < 0.7 else neg(e)
                for e in rng.sample(alphabet, rng.randint(0, 4))
            )
            scan = sum(1 for s in sessions if probe <= s)
            assert log.count(probe) == scan


class TestSupp:
    def test_founder_given_education(self, worked_log):
        assert worked_log.supp("founder", {pos("education")}) == 1.0

    def test_writer_given_director(self, worked_log):
        assert worked_log.supp("writer", {pos("director")}) == pytest.approx(1 / 3)

    def test_producer_given_negative_director(self, worked_log):
        assert worked_log.supp("producer", {neg("director")}) == 1.0

    def test_zero_denominator(self, worked_log):
        with pytest.raises(LogError, match="no supporting sessions"):
            worked_log.supp("writer", {pos("nosuch")})

    def test_ratio_identity(self, worked_log):
        subset = frozenset({pos("director")})
        supp = worked_log.supp("writer", subset)
        assert supp == worked_log.count(subset | {pos("writer")}) / worked_log.count(subset)
        assert 0.0 <= supp <= 1.0


from oracles import brute_force_frequent


class TestApriori:
    def test_basic(self):
        out = dict(apriori_frequent_itemsets([{"a", "b"}, {"a", "b"}, {"a", "c"}], 2, 5))
        assert out[frozenset({"a"})] == 3
        assert out[frozenset({"b"})] == 2
        assert out[frozenset({"a", "b"})] == 2
        assert frozenset({"c"}) not in out

    def test_single_itemset(self):
        assert apriori_frequent_itemsets([{"a"}], 1, 5) == [(frozenset({"a"}), 1)]

    def test_unreachable_support(self):
        assert apriori_frequent_itemsets([{"a"}, {"b"}, {"a", "b"}], 4, 5) == []

    def test_max_size_cap(self):
        out = apriori_frequent_itemsets([{"a", "b", "c"}] * 3, 2, 2)
        assert max(len(s) for s, _ in out) == 2

    def test_matches_power_set_oracle(self):
        rng = random.Random(17)
        for _ in range(25):
            alphabet = [chr(ord("a") + i) for i in range(rng.randint(3, 9))]
            itemsets = [
                set(rng.sample(alphabet, rng.randint(1, len(alphabet))))
                for _ in range(rng.randint(1, 12))
            ]
            for min_support in (1, 2, 3):
                size = len(alphabet)
                assert apriori_frequent_itemsets(itemsets, min_support, size) == (
                    brute_force_frequent(itemsets, min_support, size)
                )

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.sets(st.sampled_from("abcdef"), min_size=1, max_size=6),
            min_size=1,
            max_size=10,
        ),
        st.integers(min_value=1, max_value=3),
    )
    def test_monotonicity(self, itemsets, min_support):
        out = dict(apriori_frequent_itemsets(itemsets, min_support, 6))
        for s, support in out.items():
            for k in range(1, len(s)):
                for sub in itertools.combinations(s, k):
                    assert frozenset(sub) in out
                    assert out[frozenset(sub)] >= support


class TestDataPos:
    def test_star_graph(self):
        nodes = {f"a{i}": ["A"] for i in range(3)}
        nodes.update({f"b{i}": ["B"] for i in range(3)})
        nodes.update({f"c{i}": ["C"] for i in range(3)})
        edges = [(f"a{i}", f"b{i}", "e1") for i in range(3)]
        edges += [(f"a{i}", f"c{i}", "e2") for i in range(3)]
        g = make_graph(nodes, edges)
        log = datapos_simulate(g, SimulationConfig(rho_d=2))
        assert frozenset({pos("e1"), pos("e2")}) in log.sessions
        assert log.is_positive_only()

    def test_threshold_above_node_count(self):
        g = make_graph({"a": ["A"], "b": ["B"]}, [("a", "b", "e1")])
        assert len(datapos_simulate(g, SimulationConfig(rho_d=99))) == 0

    def test_single_type_nodes_contribute_nothing(self):
        g = make_graph({"a": ["A"], "b": ["B"]}, [("a", "b", "e1")])
        assert len(datapos_simulate(g, SimulationConfig(rho_d=1))) == 0

    def test_requires_rho_d(self):
        g = make_graph({"a": ["A"]}, [])
        with pytest.raises(ValueError, match="rho_d"):
            datapos_simulate(g, SimulationConfig(rho_w=1))


class TestCooccurrence:
    def test_single_window_single_type(self, film_graph):
        log = cooccurrence_ingest(
            [["tom_cruise", "top_gun"]], film_graph, SimulationConfig(rho_w=1)
        )
        assert len(log) == 0  # size-1 itemsets never become sessions

    def test_repeated_pairs_mined(self, film_graph):
        windows = [["tom_cruise", "top_gun", "harvard"]] * 3
        log = cooccurrence_ingest(windows, film_graph, SimulationConfig(rho_w=2))
        assert frozenset({pos("starring"), pos("education"), pos("featured_in")}) in log.sessions

    def test_unlinked_entities_contribute_nothing(self, film_graph):
        log = cooccurrence_ingest(
            [["tom_cruise", "oscar"]], film_graph, SimulationConfig(rho_w=1)
        )
        assert len(log) == 0

    def test_unresolvable_id_skipped_with_warning(self, film_graph, caplog):
        windows = [["tom_cruise", "ghost", "top_gun"]] * 2
        with caplog.at_level("WARNING"):
            log = cooccurrence_ingest(windows, film_graph, SimulationConfig(rho_w=2))
        assert "2 unresolvable" in caplog.text
        assert frozenset({pos("starring")}) not in log.sessions  # size-1 filtered
        assert len(log) == 0


class TestImport:
    def test_direct_parse(self, film_graph, tmp_path):
        path = tmp_path / "sets.txt"
        path.write_text("starring director\n\neducation featured_in starring\n")
        log = import_positive_sets(str(path), film_graph)
        assert log.sessions[0] == frozenset({pos("starring"), pos("director")})
        assert len(log) == 2

    def test_unknown_type_named(self, film_graph, tmp_path):
        path = tmp_path / "sets.txt"
        path.write_text("starring flying\n")
        with pytest.raises(LogLoadError, match="flying"):
            import_positive_sets(str(path), film_graph)


@pytest.fixture()
def chain_graph():
    # A -t_ab-> B, A -t_ac-> C schema from the smallest possible instance set
    return make_graph(
        {"a": ["A"], "b": ["B"], "c": ["C"]},
        [("a", "b", "t_ab"), ("a", "c", "t_ac")],
    )


class TestInjectNegatives:
    def test_two_edge_schema(self, chain_graph):
        log = QueryLog([{pos("t_ab")}])
        out = inject_negatives(log, chain_graph)
        assert out.sessions[0] == frozenset({pos("t_ab"), neg("t_ac")})

    def test_fully_covered_session_unchanged(self, chain_graph):
        log = QueryLog([{pos("t_ab"), pos("t_ac")}])
        out = inject_negatives(log, chain_graph)
        assert out.sessions[0] == frozenset({pos("t_ab"), pos("t_ac")})

    def test_disjoint_schema_components(self):
        g = make_graph(
            {"a": ["A"], "b": ["B"], "x": ["X"], "y": ["Y"]},
            [("a", "b", "t_ab"), ("x", "y", "t_xy")],
        )
        out = inject_negatives(QueryLog([{pos("t_ab")}]), g)
        assert neg("t_xy") not in out.sessions[0]

    def test_positives_preserved_superset(self, chain_graph):
        log = QueryLog([{pos("t_ab")}, {pos("t_ac")}])
        out = inject_negatives(log, chain_graph)
        for before, after in zip(log.sessions, out.sessions):
            assert before <= after
            assert {se for se in after if se.positive} == before

    def test_rejects_log_with_negatives(self, chain_graph):
        with pytest.raises(LogError, match="positive-only"):
            inject_negatives(QueryLog([{pos("t_ab"), neg("t_ac")}]), chain_graph)

    def test_unknown_edge_type(self, chain_graph):
        with pytest.raises(LogError, match="unknown"):
            inject_negatives(QueryLog([{pos("warp")}]), chain_graph)

    def test_max_negatives_cap(self):
        g = make_graph(
            {"a": ["A"], "b": ["B"], "c": ["C"], "d": ["D"]},
            [("a", "b", "t1"), ("a", "c", "t2"), ("a", "d", "t3")],
        )
        out = inject_negatives(QueryLog([{pos("t1")}]), g, max_negatives=1)
        negs = [se for se in out.sessions[0] if not se.positive]
        assert negs == [neg("t2")]  # smallest name first


class TestRoundTrip:
    def test_worked_log_round_trip(self, worked_log, tmp_path):
        path = tmp_path / "out.log"
        save_log(worked_log, str(path))
        reloaded = load_log(str(path))
        assert Counter(reloaded.sessions) == Counter(worked_log.sessions)

    def test_negative_tokens(self, tmp_path):
        path = tmp_path / "x.log"
        path.write_text("education founder ~nationality\n")
        log = load_log(str(path))
        assert neg("nationality") in log.sessions[0]

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.log"
        path.write_text("")
        assert len(load_log(str(path))) == 0

    def test_bad_token_reports_line(self, tmp_path):
        path = tmp_path / "bad.log"
        path.write_text("education\n~ founder\n")
        with pytest.raises(LogLoadError, match=":2:"):
            load_log(str(path))

    @settings(max_examples=30, deadline=None)
    @given(
        raw_sessions=st.lists(
            st.sets(
                st.tuples(st.sampled_from("abcd"), st.booleans()), min_size=1, max_size=5
            ),
            min_size=0,
            max_size=8,
        )
    )
    def test_round_trip_property(self, raw_sessions, tmp_path_factory):
        sessions = [
            frozenset(pos(e) if p else neg(e) for e, p in raw) for raw in raw_sessions
        ]
        log = QueryLog(sessions)
        path = tmp_path_factory.mktemp("rt") / "log.txt"
        save_log(log, str(path))
        assert Counter(load_log(str(path)).sessions) == Counter(log.sessions)


def test_load_entity_windows(tmp_path):
    path = tmp_path / "w.txt"
    path.write_text("# comment\na b c\nx y\n")
    assert load_entity_windows(str(path)) == [["a", "b", "c"], ["x", "y"]]
    bad = tmp_path / "bad.txt"
    bad.write_text("only_one\n")
    with pytest.raises(LogLoadError, match="2 entities"):
        load_entity_windows(str(bad))


def test_simulation_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(rho_w=0)
    with pytest.raises(ValueError):
        SimulationConfig(max_itemset_size=0)
