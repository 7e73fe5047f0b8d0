from __future__ import annotations

import random

import pytest

from edgesuggest.graph import QueryNodeLabel
from edgesuggest.query import (
    QueryGraph,
    QueryModelError,
    QuerySession,
    SignedEdge,
    conversion_rate,
    load_query_graph,
    neg,
    pos,
    save_query_graph,
    similarity,
)

ACTOR = QueryNodeLabel.node_type("FilmActor")
FILM = QueryNodeLabel.node_type("Film")
UNI = QueryNodeLabel.node_type("University")


class TestSession:
    def test_append_preserves_order(self):
        s = QuerySession().append(pos("a")).append(neg("b")).append(pos("c"))
        assert s.tokens() == ("a", "~b", "c")

    def test_duplicate_append_is_noop(self):
        s = QuerySession().append(pos("a"))
        assert s.append(pos("a")) is s
        assert len(s.append(pos("a"))) == 1

    def test_same_type_both_signs_allowed(self):
        s = QuerySession().append(pos("a")).append(neg("a"))
        assert len(s) == 2
        assert s.contains_etype("a")

    def test_token_round_trip(self):
        for token in ("starring", "~starring"):
            assert SignedEdge.from_token(token).token() == token
        with pytest.raises(ValueError):
            SignedEdge.from_token("~")


class TestBuildOps:
    def test_add_first_node(self, film_graph):
        qg = QueryGraph().add_node(ACTOR, film_graph)
        assert len(qg.nodes) == 1
        assert not qg.pending_connection

    def test_second_node_pends(self, film_graph):
        qg = QueryGraph().add_node(ACTOR, film_graph).add_node(FILM, film_graph)
        assert qg.pending_connection

    def test_add_node_while_pending_rejected(self, film_graph):
        qg = QueryGraph().add_node(ACTOR, film_graph).add_node(FILM, film_graph)
        with pytest.raises(QueryModelError, match="pending"):
            qg.add_node(UNI, film_graph)

    def test_unresolvable_label(self, film_graph):
        from edgesuggest.graph import GraphError

        with pytest.raises(GraphError):
            QueryGraph().add_node(QueryNodeLabel.node_type("Starship"), film_graph)

    def test_add_edge_clears_pending(self, film_graph):
        qg = QueryGraph().add_node(ACTOR, film_graph).add_node(FILM, film_graph)
        qg = qg.add_edge(0, 1, "starring", film_graph)
        assert not qg.pending_connection
        assert qg.edges == ((0, 1, "starring"),)

    def test_parallel_edge_accepted(self, film_graph):
        qg = (
            QueryGraph()
            .add_node(ACTOR, film_graph)
            .add_node(FILM, film_graph)
            .add_edge(0, 1, "starring", film_graph)
            .add_edge(0, 1, "starring", film_graph)
        )
        assert len(qg.edges) == 2

    def test_schema_incompatible_edge_rejected(self, film_graph):
        qg = QueryGraph().add_node(ACTOR, film_graph).add_node(FILM, film_graph)
        with pytest.raises(QueryModelError, match="not permitted"):
            qg.add_edge(0, 1, "education", film_graph)

    def test_wrong_direction_rejected(self, film_graph):
        qg = QueryGraph().add_node(FILM, film_graph).add_node(ACTOR, film_graph)
        with pytest.raises(QueryModelError, match="not permitted"):
            qg.add_edge(0, 1, "starring", film_graph)
        assert qg.add_edge(1, 0, "starring", film_graph).edges == ((1, 0, "starring"),)

    def test_edge_must_connect_pending_node(self, film_graph):
        qg = (
            QueryGraph()
            .add_node(ACTOR, film_graph)
            .add_node(FILM, film_graph)
            .add_edge(0, 1, "starring", film_graph)
            .add_node(UNI, film_graph)
        )
        # a parallel edge between 0 and 1 leaves node 2 disconnected
        with pytest.raises(QueryModelError, match="connect"):
            qg.add_edge(0, 1, "starring", film_graph)
        joined = qg.add_edge(2, 1, "featured_in", film_graph)
        assert not joined.pending_connection


from oracles import brute_similarity, random_query_graph


def qg_of(labels, edges):
    return QueryGraph(
        tuple(enumerate(labels)),
        tuple(edges),
    )


class TestSimilarity:
    def test_identity_is_one(self):
        g = qg_of([ACTOR, FILM], [(0, 1, "starring"), (0, 1, "e2")])
        assert similarity(g, g) == 1.0

    def test_half_match(self):
        gt = qg_of([ACTOR, FILM, UNI], [(0, 1, "starring"), (0, 2, "education")])
        gu = qg_of([ACTOR, FILM], [(0, 1, "starring")])
        assert similarity(gu, gt) == 0.5
        assert brute_similarity(gu, gt) == 0.5

    def test_disjoint_labels_zero(self):
        gt = qg_of([ACTOR, FILM], [(0, 1, "starring")])
        gu = qg_of([UNI, QueryNodeLabel.node_type("Location")], [(0, 1, "starring")])
        assert similarity(gu, gt) == 0.0

    def test_edgeless_target_rejected(self):
        gt = qg_of([ACTOR], [])
        gu = qg_of([ACTOR], [])
        with pytest.raises(QueryModelError):
            similarity(gu, gt)

    def test_duplicate_edges_capped_at_target_multiplicity(self):
        gt = qg_of([ACTOR, FILM], [(0, 1, "starring")])
        gu = qg_of([ACTOR, FILM], [(0, 1, "starring"), (0, 1, "starring")])
        assert similarity(gu, gt) == 1.0

    def test_matches_brute_force(self):
        rng = random.Random(7)
        for _ in range(60):
            gu = random_query_graph(rng)
            gt = random_query_graph(rng)
            assert similarity(gu, gt) == pytest.approx(brute_similarity(gu, gt))

    def test_adding_correct_edge_never_decreases(self):
        rng = random.Random(11)
        for _ in range(40):
            gt = random_query_graph(rng)
            if not gt.edges:
                continue
            k = rng.randint(0, len(gt.edges) - 1)
            partial = QueryGraph(gt.nodes, gt.edges[:k])
            extended = QueryGraph(gt.nodes, gt.edges[: k + 1])
            if not partial.edges:
                continue
            assert similarity(extended, gt) >= similarity(partial, gt)


class TestConversionRate:
    def test_all_identical(self):
        g = qg_of([ACTOR, FILM], [(0, 1, "starring")])
        assert conversion_rate([(g, g)] * 4) == 1.0

    def test_mixed_magnitude(self):
        g = qg_of([ACTOR, FILM], [(0, 1, "starring")])
        zero = qg_of([UNI], [(0, 0, "e9")])
        results = [(g, g)] * 74 + [(zero, g)] * 31
        assert conversion_rate(results) == pytest.approx(74 / 105)

    def test_single_half(self):
        gt = qg_of([ACTOR, FILM, UNI], [(0, 1, "starring"), (0, 2, "education")])
        gu = qg_of([ACTOR, FILM], [(0, 1, "starring")])
        assert conversion_rate([(gu, gt)]) == 0.5

    def test_empty_rejected(self):
        with pytest.raises(QueryModelError):
            conversion_rate([])


class TestFiles:
    def test_round_trip(self, film_graph, tmp_path):
        qg = (
            QueryGraph()
            .add_node(ACTOR, film_graph)
            .add_node(QueryNodeLabel.entity("harvard"), film_graph)
            .add_edge(0, 1, "education", film_graph)
        )
        path = tmp_path / "g.qg"
        save_query_graph(qg, str(path), film_graph)
        loaded = load_query_graph(str(path), film_graph)
        assert loaded == qg

    def test_loads_target_fixture(self, film_graph, data_dir):
        qg = load_query_graph(str(data_dir / "targets" / "fig1.qg"), film_graph)
        assert len(qg.edges) == 3
        assert qg.label_of(1) == QueryNodeLabel.entity("harvard")

    def test_disconnected_file_rejected(self, film_graph, tmp_path):
        path = tmp_path / "bad.qg"
        path.write_text(
            "#nodes\n0\ttype\tFilmActor\n1\ttype\tFilm\n#edges\n"
        )
        from edgesuggest.graph import GraphLoadError

        with pytest.raises(GraphLoadError, match="connected"):
            load_query_graph(str(path), film_graph)
