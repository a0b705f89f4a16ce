import random

import pytest
from hypothesis import given, settings, strategies as st

from msostorage import logic as L
from msostorage.errors import UnboundVariable, UnknownMacro, VariableClash
from msostorage.graphs import STAR, Graph, ed_gr, induced_subgraph, nd_gr
from msostorage.semantics import evaluate, satisfies

from oracle import naive_eval, naive_is_string_graph, all_graphs


class TestFreeVars:
    def test_lab_atom(self):
        assert L.free_vars(L.lab("a", "x")) == {"x"}

    def test_exists_binds(self):
        phi = L.exists("x", L.edge("g", "x", "y"))
        assert L.free_vars(phi) == {"y"}

    def test_string_formula_closed(self):
        assert L.free_vars(L.string_formula({"a", "b"})) == frozenset()

    def test_member_kinds_enforced(self):
        with pytest.raises(VariableClash):
            L.member("X", "x")


class TestEval:
    def test_string_formula_on_string_graph(self):
        assert satisfies(ed_gr("gg"), L.string_formula({"g"}))

    def test_string_formula_rejects_branch(self):
        g = Graph({0: STAR, 1: STAR, 2: STAR}, {(0, "g", 1), (0, "g", 2)})
        assert not satisfies(g, L.string_formula({"g"}))

    def test_false_constant(self):
        assert not satisfies(ed_gr("g"), L.false_())
        assert satisfies(ed_gr("g"), L.true_())

    def test_unbound_variable(self):
        with pytest.raises(UnboundVariable):
            evaluate(ed_gr("g"), {}, L.lab(STAR, "x"))

    def test_superfluous_valuation_ignored(self):
        phi = L.string_formula({"g"})
        assert evaluate(ed_gr("g"), {"q": 0, "Q": frozenset({0})}, phi)

    def test_unknown_labels_evaluate_false(self):
        g = ed_gr("g")
        assert not evaluate(g, {"x": 0}, L.lab("zz", "x"))
        assert not evaluate(g, {"x": 0, "y": 1}, L.edge("zz", "x", "y"))


class TestMacros:
    def test_path_on_chain(self):
        g = ed_gr("gg")
        assert evaluate(g, {"x": 0, "y": 2}, L.path({"g"}, "x", "y"))
        assert not evaluate(g, {"x": 2, "y": 0}, L.path({"g"}, "x", "y"))
        assert evaluate(g, {"x": 1, "y": 1}, L.path({"g"}, "x", "y"))

    def test_exclusive_on_single_edge(self):
        g = Graph({0: STAR, 1: STAR}, {(0, "a", 1)})
        assert evaluate(g, {"x": 0, "y": 1}, L.exclusive({"a", "b"}, "x", "y"))
        gg = Graph({0: STAR, 1: STAR}, {(0, "a", 1), (0, "b", 1)})
        assert not evaluate(gg, {"x": 0, "y": 1}, L.exclusive({"a", "b"}, "x", "y"))

    def test_eq_class_on_biclique(self):
        labels = {0: STAR, 1: STAR, 2: STAR, 3: STAR}
        edges = {(0, "0", 2), (0, "0", 3), (1, "0", 2), (1, "0", 3)}
        g = Graph(labels, edges)
        assert evaluate(g, {"x": 2, "y": 3}, L.eq_class({"0"}, "x", "y"))
        assert evaluate(g, {"x": 0, "y": 1}, L.eq_class({"0"}, "x", "y"))
        assert not evaluate(g, {"x": 0, "y": 2}, L.eq_class({"0"}, "x", "y"))

    def test_eq_nodes(self):
        g = ed_gr("ab")
        assert evaluate(g, {"x": 1, "y": 1}, L.eq_nodes("x", "y"))
        assert not evaluate(g, {"x": 0, "y": 1}, L.eq_nodes("x", "y"))

    def test_unknown_macro(self):
        with pytest.raises(UnknownMacro):
            L.build_macro("frobnicate")

    def test_describe_graph_pins_up_to_iso(self):
        g = nd_gr("ab")
        phi = L.describe_graph(g, {STAR})
        assert satisfies(g, phi)
        from msostorage.graphs import shift_nodes

        assert satisfies(shift_nodes(g, 5), phi)
        assert not satisfies(nd_gr("ba"), phi)
        assert not satisfies(nd_gr("a"), phi)
        assert not satisfies(Graph({0: "a", 1: "b"}, set()), phi)


class TestStringFormulaAgainstChecker:
    def test_exhaustive_small(self):
        # all graphs with <= 3 nodes over one node label and two edge labels
        phi = L.string_formula({"a", "b"})
        for n in (1, 2, 3):
            for g in all_graphs(n, [STAR], ["a", "b"]):
                assert satisfies(g, phi) == naive_is_string_graph(g), g.edges

    def test_words(self):
        phi = L.string_formula({"a", "b"})
        for w in ["", "a", "ab", "abba"]:
            assert satisfies(ed_gr(w), phi)


class TestRelativize:
    def test_atomic_unchanged(self):
        atom = L.edge("g", "x", "y")
        assert L.relativize(atom, "Y") == atom

    def test_exists_gets_guard(self):
        phi = L.exists("x", L.lab("a", "x"))
        rel = L.relativize(phi, "Y")
        assert rel == L.Exists("x", L.And((L.In("x", "Y"), L.lab("a", "x"))))

    def test_clash_rejected(self):
        phi = L.exists("X", L.member("x", "X"))
        with pytest.raises(VariableClash):
            L.relativize(phi, "X")

    def test_relativization_lemma_randomized(self):
        rng = random.Random(5)
        phi = L.string_formula({"a"})
        for _ in range(20):
            n = rng.randint(2, 5)
            labels = {i: STAR for i in range(n)}
            edges = {
                (u, "a", v)
                for u in range(n)
                for v in range(n)
                if u != v and rng.random() < 0.35
            }
            g = Graph(labels, edges)
            sub = frozenset(rng.sample(range(n), rng.randint(1, n)))
            rel = L.relativize(phi, "Ysub")
            assert evaluate(g, {"Ysub": sub}, rel) == satisfies(induced_subgraph(g, sub), phi)


class TestAlphaEqual:
    def test_renamed_bound_vars(self):
        a = L.exists("x", L.lab("a", "x"))
        b = L.exists("z", L.lab("a", "z"))
        assert L.alpha_equal(a, b)
        assert not L.alpha_equal(a, L.exists("x", L.lab("b", "x")))

    def test_free_vars_not_identified(self):
        assert not L.alpha_equal(L.lab("a", "x"), L.lab("a", "y"))


class TestSubstituteEdgeLabels:
    def test_single_and_disjunction(self):
        phi = L.edge("nu", "x", "y")
        assert L.substitute_edge_labels(phi, {"nu": "z"}) == L.Edge("z", "x", "y")
        out = L.substitute_edge_labels(phi, {"nu": ("0", "1")})
        assert out == L.Or((L.Edge("0", "x", "y"), L.Edge("1", "x", "y")))


# ---------------------------------------------------------------------------
# The main validation: the BDD-backed evaluator agrees with an independently
# coded brute-force evaluator on random formulas over random small graphs.

_NODE_VARS = ("x", "y")
_SET_VARS = ("X", "Y")


def _formula_strategy():
    atoms = st.one_of(
        st.builds(L.lab, st.sampled_from(["p", "q"]), st.sampled_from(_NODE_VARS)),
        st.builds(
            L.edge,
            st.sampled_from(["a", "b"]),
            st.sampled_from(_NODE_VARS),
            st.sampled_from(_NODE_VARS),
        ),
        st.builds(L.member, st.sampled_from(_NODE_VARS), st.sampled_from(_SET_VARS)),
    )

    def extend(children):
        return st.one_of(
            st.builds(L.Not, children),
            st.builds(lambda a, b: L.Or((a, b)), children, children),
            st.builds(lambda a, b: L.And((a, b)), children, children),
            st.builds(L.Exists, st.sampled_from(_NODE_VARS + _SET_VARS), children),
            st.builds(L.Forall, st.sampled_from(_NODE_VARS + _SET_VARS), children),
        )

    return st.recursive(atoms, extend, max_leaves=8)


def _graph_strategy():
    @st.composite
    def build(draw):
        n = draw(st.integers(min_value=1, max_value=4))
        labels = {i: draw(st.sampled_from(["p", "q"])) for i in range(n)}
        edges = set()
        for u in range(n):
            for v in range(n):
                if u != v:
                    for lab in ("a", "b"):
                        if draw(st.booleans()):
                            edges.add((u, lab, v))
        return Graph(labels, edges)

    return build()


@settings(max_examples=150, deadline=None)
@given(_formula_strategy(), _graph_strategy(), st.randoms(use_true_random=False))
def test_evaluator_matches_bruteforce(phi, g, rng):
    rho = {}
    for v in L.free_vars(phi):
        if L.is_node_var(v):
            rho[v] = rng.choice(g.nodes)
        else:
            rho[v] = frozenset(u for u in g.nodes if rng.random() < 0.5)
    assert evaluate(g, rho, phi) == naive_eval(g, rho, phi)


def test_negation_and_disjunction_laws():
    rng = random.Random(31)
    g = nd_gr("pq")
    phi = L.exists("x", L.lab("p", "x"))
    psi = L.forall("x", L.lab("q", "x"))
    assert evaluate(g, {}, L.Not(phi)) == (not evaluate(g, {}, phi))
    assert evaluate(g, {}, L.Or((phi, psi))) == (
        evaluate(g, {}, phi) or evaluate(g, {}, psi)
    )
    del rng
