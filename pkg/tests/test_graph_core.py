import pytest
from hypothesis import given

import oracles
from grafrepair.fixtures import (
    C,
    CF,
    CFDISC,
    CFF,
    CFL,
    EMPTY,
    F,
    FDEP3,
    FF,
    FFLOOP,
    G0,
    G1,
    G2,
    TG_TOY,
    graph,
)
from grafrepair.graph import Graph, Morphism, TypeGraph, restrict_morphism, validate_graph
from grafrepair.matching import enumerate_monomorphisms, graph_isomorphic
from grafrepair.overlaps import enumerate_overlaps, extended_overlaps, intermediate_graphs
from strategies import graphs

SMALL = [EMPTY, C, F, CF, CFDISC, CFF, FF, FFLOOP, CFL, FDEP3, G2]


class TestValidate:
    def test_fixture_is_ok(self):
        assert validate_graph(G1) == []

    def test_owns_between_classes(self):
        bad = graph({0: "Class", 1: "Class"}, {0: (0, 1, "owns")})
        assert any("type mismatch" in p for p in validate_graph(bad))

    def test_dangling_endpoint(self):
        bad = graph({0: "Class"}, {0: (0, 7, "owns")})
        assert any("dangling" in p for p in validate_graph(bad))

    def test_raw_duplicates(self):
        raw = {"nodes": [{"id": 0, "type": "Class"}, {"id": 0, "type": "Feature"}], "edges": []}
        assert any("duplicate node" in p for p in validate_graph(raw, TG_TOY))

    def test_type_graph_problems(self):
        assert TypeGraph({"A"}, {"e": ("A", "B")}).problems()


class TestMonomorphisms:
    def test_unique_class(self):
        assert len(enumerate_monomorphisms(C, G0)) == 1

    def test_feature_into_cff(self):
        assert len(enumerate_monomorphisms(F, CFF)) == oracles.count_monos(F, CFF) == 2

    def test_no_feature_in_host(self):
        assert enumerate_monomorphisms(CF, G0) == []

    def test_type_graph_mismatch(self):
        other = Graph(TypeGraph({"X"}, {}), {0: "X"}, {})
        with pytest.raises(ValueError):
            enumerate_monomorphisms(other, G0)

    @pytest.mark.parametrize("p", SMALL, ids=repr)
    @pytest.mark.parametrize("h", [CFF, FDEP3, CFL, G2, FF], ids=repr)
    def test_count_matches_oracle(self, p, h):
        assert len(enumerate_monomorphisms(p, h)) == oracles.count_monos(p, h)

    @given(graphs(3, 3), graphs(4, 5))
    def test_count_matches_oracle_random(self, p, h):
        ms = enumerate_monomorphisms(p, h)
        assert len(ms) == oracles.count_monos(p, h)
        assert all(m.is_total and m.is_injective and m.is_valid() for m in ms)

    def test_canonical_order(self):
        ms = enumerate_monomorphisms(F, CFF)
        keys = [sorted(m.nodes.items()) for m in ms]
        assert keys == sorted(keys)


class TestIntermediateGraphs:
    def test_class_to_cf(self):
        got = intermediate_graphs(C, CF)
        assert sorted(got, key=len) == [CFDISC, CF]
        assert {(frozenset(g.nodes), frozenset(g.edges)) for g in got} == oracles.subgraphs_between(C, CF)

    def test_no_proper_extension(self):
        assert intermediate_graphs(C, C) == []

    def test_from_empty(self):
        assert intermediate_graphs(EMPTY, C) == [C]

    def test_not_an_inclusion(self):
        with pytest.raises(ValueError):
            intermediate_graphs(CF, C)

    @pytest.mark.parametrize("lo,hi", [(EMPTY, CFF), (C, CFF), (EMPTY, FDEP3), (F, FFLOOP), (C, CFL)])
    def test_matches_oracle(self, lo, hi):
        got = intermediate_graphs(lo, hi)
        assert all(validate_graph(g) == [] for g in got)
        assert {(frozenset(g.nodes), frozenset(g.edges)) for g in got} == oracles.subgraphs_between(lo, hi)
        assert len(got) == len(oracles.subgraphs_between(lo, hi))


class TestOverlaps:
    def test_class_class(self):
        assert len(enumerate_overlaps(C, C)) == 1

    def test_class_feature(self):
        assert enumerate_overlaps(C, F) == []

    def test_class_cf(self):
        (o,) = enumerate_overlaps(C, CF)
        assert graph_isomorphic(o.graph, CF)

    @pytest.mark.parametrize("g1", SMALL[1:], ids=repr)
    @pytest.mark.parametrize("g2", [C, CF, FF, CFF, FFLOOP], ids=repr)
    def test_matches_oracle(self, g1, g2):
        got = enumerate_overlaps(g1, g2)
        sizes = sorted((len(o.graph.nodes), len(o.graph.edges)) for o in got)
        assert sizes == oracles.overlap_sizes(g1, g2)
        for o in got:
            assert o.problems() == []
            assert o.is_proper()
            # jointly surjective, checked by counting
            assert len(o.graph.nodes) == len(g1.nodes) + len(g2.nodes) - len(o.shared_nodes)

    @given(graphs(3, 2), graphs(3, 2))
    def test_random_matches_oracle(self, g1, g2):
        got = enumerate_overlaps(g1, g2)
        assert sorted((len(o.graph.nodes), len(o.graph.edges)) for o in got) == oracles.overlap_sizes(g1, g2)


class TestExtendedOverlaps:
    def test_anchored_class(self):
        anchor = Morphism.inclusion(C, C)
        e = Morphism.inclusion(C, CF)
        got = extended_overlaps(C, anchor, e)
        assert len(got) == 1
        assert got[0].right.nodes[0] == got[0].left.nodes[0]

    def test_subset_of_overlaps(self):
        anchor = Morphism.inclusion(C, CFF)
        e = Morphism.inclusion(C, CF)
        got = extended_overlaps(CFF, anchor, e)
        all_sizes = [(len(o.graph.nodes), len(o.graph.edges)) for o in enumerate_overlaps(CFF, CF)]
        for o in got:
            assert (len(o.graph.nodes), len(o.graph.edges)) in all_sizes
            assert o.left @ anchor == o.right @ e

    def test_no_completion(self):
        # the Feature of F must land on the anchored Feature, whose only match is in FF
        anchor = Morphism.inclusion(F, F)
        e = Morphism(F, CF, {0: 1}, {})
        assert all(o.right.nodes[1] == o.left.nodes[0] for o in extended_overlaps(F, anchor, e))

    def test_domain_mismatch(self):
        with pytest.raises(ValueError):
            extended_overlaps(CF, Morphism.inclusion(C, CF), Morphism.inclusion(F, CF))


class TestRestriction:
    def test_identity_to_inclusion(self):
        r = restrict_morphism(Morphism.identity(CF), C, CF)
        assert r == Morphism.inclusion(C, CF)

    def test_anchor_to_identity(self):
        assert restrict_morphism(Morphism.inclusion(C, CF), C, C) == Morphism.identity(C)

    def test_image_escapes(self):
        (m,) = enumerate_monomorphisms(CF, G1)
        assert restrict_morphism(m, CF, C) is None

    def test_not_subgraphs(self):
        with pytest.raises(ValueError):
            restrict_morphism(Morphism.identity(C), CF, C)

    def test_unique(self):
        m = Morphism.identity(CFF)
        assert restrict_morphism(m, CF, CFF) == restrict_morphism(m, CF, CFF)


class TestIsomorphism:
    def test_renamed(self):
        renamed = graph({5: "Class", 9: "Feature"}, {3: (5, 9, "owns")})
        assert graph_isomorphic(CF, renamed)

    def test_edge_count(self):
        assert not graph_isomorphic(CF, CFDISC)

    def test_self(self):
        assert graph_isomorphic(CFF, CFF)

    @given(graphs(3, 3))
    def test_relabelling(self, g):
        shift = {n: n + 10 for n in g.nodes}
        h = graph({shift[n]: t for n, t in g.nodes.items()}, {e + 4: (shift[s], shift[t], lab) for e, (s, t, lab) in g.edges.items()})
        assert graph_isomorphic(g, h)
