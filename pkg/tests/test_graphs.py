import itertools
import random

import pytest

from msostorage.errors import (
    DanglingEdge,
    EmptyGraph,
    LoopEdge,
    NotPairGraph,
    NotStringLike,
    UnknownNode,
)
from msostorage.graphs import (
    NU,
    STAR,
    Graph,
    as_pair_view,
    as_string_like,
    delta_components,
    ed_gr,
    graph_union,
    induced_subgraph,
    iso_equal,
    new_graph,
    nd_gr,
    relabel_edges,
    shift_nodes,
    string_graph,
)

from oracle import naive_iso


def fig3_pair_graph():
    """Pair graph whose pair is (ed-gr(ggg), ed-gr(ggg)), with g-labeled
    positionwise intermediate edges."""
    labels = {i: STAR for i in range(8)}
    edges = []
    for i in range(3):
        edges.append((i, "g", i + 1))
        edges.append((4 + i, "g", 4 + i + 1))
    for i in range(4):
        edges.append((i, "g", 4 + i))
    for i in range(4):
        for j in range(4):
            edges.append((i, NU, 4 + j))
    return Graph(labels, edges)


class TestNewGraph:
    def test_single_star_node(self):
        g = new_graph([(1, STAR)])
        assert g.nodes == (1,)
        assert g.edges == frozenset()

    def test_loop_rejected(self):
        with pytest.raises(LoopEdge):
            new_graph([(1, STAR)], [(1, STAR, 1)])

    def test_empty_rejected(self):
        with pytest.raises(EmptyGraph):
            new_graph([])

    def test_dangling_rejected(self):
        with pytest.raises(DanglingEdge):
            new_graph([(1, STAR)], [(1, "a", 2)])

    def test_duplicate_edges_collapse(self):
        g = new_graph([(1, STAR), (2, STAR)], [(1, "a", 2), (1, "a", 2)])
        assert len(g.edges) == 1


class TestInducedSubgraph:
    def test_identity(self):
        g = ed_gr("ab")
        assert induced_subgraph(g, g.nodes) == g

    def test_fig3_first_component(self):
        h = fig3_pair_graph()
        first = induced_subgraph(h, {0, 1, 2, 3})
        assert iso_equal(first, ed_gr("ggg"))

    def test_two_node_graph_drops_edge(self):
        g = new_graph([(0, "x"), (1, "y")], [(0, "a", 1)])
        sub = induced_subgraph(g, {0})
        assert sub.nodes == (0,) and not sub.edges

    def test_empty_subset(self):
        with pytest.raises(EmptyGraph):
            induced_subgraph(ed_gr("a"), set())

    def test_unknown_node(self):
        with pytest.raises(UnknownNode):
            induced_subgraph(ed_gr("a"), {99})


class TestRelabelEdges:
    def test_empty_delta_is_identity(self):
        g = ed_gr("ab")
        assert relabel_edges(g, set(), "c") == g

    def test_parallel_edges_collapse(self):
        g = new_graph([(0, STAR), (1, STAR)], [(0, "a", 1), (0, "b", 1)])
        out = relabel_edges(g, {"a", "b"}, "c")
        assert out.edges == frozenset({(0, "c", 1)})

    def test_relabel_to_nu_makes_pair_graph(self):
        g = new_graph([(0, "x"), (1, "y")], [(0, "a", 1)])
        out = relabel_edges(g, {"a"}, NU)
        view = as_pair_view(out)
        assert view.first == {0} and view.second == {1}


class TestDeltaComponents:
    def test_no_delta_edges_single_class(self):
        g = ed_gr("ab")
        classes = delta_components(g, {"z"})
        assert classes == [frozenset(g.nodes)]

    def test_string_graph_singletons(self):
        g = ed_gr("ab")
        classes = delta_components(g, {"a", "b"})
        assert classes == [frozenset({0}), frozenset({1}), frozenset({2})]

    def test_partition_properties(self):
        rng = random.Random(7)
        for _ in range(25):
            n = rng.randint(1, 6)
            labels = {i: STAR for i in range(n)}
            edges = set()
            for u in range(n):
                for v in range(n):
                    if u != v and rng.random() < 0.3:
                        edges.add((u, rng.choice("ab"), v))
            g = Graph(labels, edges)
            classes = delta_components(g, {"a"})
            flat = [u for cls in classes for u in cls]
            assert sorted(flat) == list(g.nodes)
            assert all(cls for cls in classes)


class TestPairView:
    def test_fig3(self):
        view = as_pair_view(fig3_pair_graph())
        assert len(view.first) == 4 and len(view.second) == 4
        g1, g2 = view.pair()
        assert iso_equal(g1, ed_gr("ggg")) and iso_equal(g2, ed_gr("ggg"))

    def test_no_nu_edges(self):
        with pytest.raises(NotPairGraph):
            as_pair_view(ed_gr("a"))

    def test_incomplete_biclique(self):
        labels = {0: STAR, 1: STAR, 2: STAR}
        edges = [(0, NU, 2)]  # node 1 untouched
        with pytest.raises(NotPairGraph):
            as_pair_view(Graph(labels, edges))

    def test_partition_recomputation_roundtrip(self):
        h = fig3_pair_graph()
        view = as_pair_view(h)
        nu_sources = {u for (u, lab, v) in h.edges if lab == NU}
        nu_targets = {v for (u, lab, v) in h.edges if lab == NU}
        assert view.first == nu_sources and view.second == nu_targets


class FakeStorage:
    def __init__(self, g_in, gamma):
        self.g_in = g_in
        self.gamma = gamma


class TestStringLike:
    def triv_like(self):
        return FakeStorage(new_graph([(0, STAR)]), frozenset())

    def test_single_component(self):
        st = self.triv_like()
        view = as_string_like(new_graph([(5, STAR)]), st, {"0", "1"})
        assert view.trace == ()
        assert len(view.components) == 1

    def test_edge_string_graph_is_string_like(self):
        st = self.triv_like()
        g = ed_gr("01")
        view = as_string_like(g, st, {"0", "1"})
        assert view.trace == ("0", "1")
        assert [min(c) for c in view.components] == [0, 1, 2]

    def test_trace_length_invariant(self):
        st = self.triv_like()
        for word in ["", "0", "01", "0e1"]:
            view = as_string_like(ed_gr(word), st, {"0", "1"})
            assert len(view.trace) == len(view.components) - 1

    def test_wrong_first_component(self):
        st = FakeStorage(nd_gr("ab"), frozenset({STAR}))
        with pytest.raises(NotStringLike) as err:
            as_string_like(ed_gr("0"), st, {"0"})
        assert err.value.reason == "wrong_first_component"

    def test_pair_at_matches_pair_view(self):
        st = self.triv_like()
        view = as_string_like(ed_gr("01"), st, {"0", "1"})
        pair = as_pair_view(view.pair_at(0))
        assert pair.first == view.components[0]
        assert pair.second == view.components[1]

    def test_fat_component_accepted(self):
        # later components need not satisfy the configuration formula;
        # string-like-ness only pins the first one to g_in
        labels = {0: STAR, 1: STAR, 2: STAR}
        edges = [(0, "0", 1), (0, "0", 2)]
        view = as_string_like(Graph(labels, edges), self.triv_like(), {"0"})
        assert view.trace == ("0",)
        assert view.components == (frozenset({0}), frozenset({1, 2}))

    def test_branching_rejected(self):
        labels = {0: STAR, 1: STAR, 2: STAR}
        edges = [(0, "0", 1), (0, "0", 2), (2, "0", 1)]
        with pytest.raises(NotStringLike) as err:
            as_string_like(Graph(labels, edges), self.triv_like(), {"0"})
        assert err.value.reason == "bad_link_structure"

    def test_two_labels_between_components_rejected(self):
        labels = {0: STAR, 1: STAR, 2: STAR}
        edges = [(0, "0", 1), (0, "1", 2)]
        with pytest.raises(NotStringLike) as err:
            as_string_like(Graph(labels, edges), self.triv_like(), {"0", "1"})
        assert err.value.reason == "bad_link_structure"


class TestStringGraph:
    def test_ed_gr_empty(self):
        g = ed_gr("")
        assert len(g.nodes) == 1 and not g.edges
        assert g.labels[0] == STAR

    def test_nd_gr_chain(self):
        g = nd_gr("gabb")
        assert [g.labels[i] for i in range(4)] == list("gabb")
        assert g.edges == frozenset({(0, STAR, 1), (1, STAR, 2), (2, STAR, 3)})

    def test_ed_gr_ggg(self):
        g = ed_gr("ggg")
        assert len(g.nodes) == 4
        assert sum(1 for (_, lab, _) in g.edges if lab == "g") == 3

    def test_nd_gr_empty_rejected(self):
        with pytest.raises(EmptyGraph):
            string_graph("", "node")


class TestIsoEqual:
    def test_reflexive(self):
        g = fig3_pair_graph()
        assert iso_equal(g, g)

    def test_size_mismatch(self):
        assert not iso_equal(ed_gr("gg"), ed_gr("g"))

    def test_label_order_matters(self):
        assert not iso_equal(nd_gr("ab"), nd_gr("ba"))

    def test_shifted_graphs_isomorphic(self):
        g = nd_gr("abg")
        assert iso_equal(g, shift_nodes(g, 10))

    def test_against_permutation_oracle(self):
        rng = random.Random(99)
        for _ in range(60):
            n = rng.randint(1, 4)
            labelings = [rng.choice("xy") for _ in range(n)]
            g1 = Graph(
                dict(enumerate(labelings)),
                {
                    (u, rng.choice("ab"), v)
                    for u in range(n)
                    for v in range(n)
                    if u != v and rng.random() < 0.4
                },
            )
            m = rng.randint(1, 4)
            g2 = Graph(
                dict(enumerate(rng.choice("xy") for _ in range(m))),
                {
                    (u, rng.choice("ab"), v)
                    for u in range(m)
                    for v in range(m)
                    if u != v and rng.random() < 0.4
                },
            )
            assert iso_equal(g1, g2) == naive_iso(g1, g2)
            assert iso_equal(g1, g1)
            perm = list(range(n))
            rng.shuffle(perm)
            relabeled = Graph(
                {perm[u]: g1.labels[u] for u in range(n)},
                {(perm[u], lab, perm[v]) for (u, lab, v) in g1.edges},
            )
            assert iso_equal(g1, relabeled)


def test_graph_union_disjointness_enforced():
    g = ed_gr("a")
    with pytest.raises(ValueError):
        graph_union(g, g)
    shifted = shift_nodes(g, 10)
    merged = graph_union(g, shifted, extra_edges=[(0, "z", 10)])
    assert len(merged.nodes) == 4
    assert (0, "z", 10) in merged.edges
