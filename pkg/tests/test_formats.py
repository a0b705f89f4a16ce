import pytest

from msostorage import formats, logic as L
from msostorage.automata import NFA, SAutomaton
from msostorage.errors import FormatError
from msostorage.graphs import ed_gr, nd_gr
from msostorage.stack import stack_mso, wwrw_automaton
from msostorage.storage import triv_mso
from msostorage.transducers import copy_transducer


class TestFormulaSexp:
    def test_parse_atoms(self):
        assert formats.parse_formula("(lab * x)") == L.Lab("*", "x")
        assert formats.parse_formula("(edge g x y)") == L.Edge("g", "x", "y")
        assert formats.parse_formula("(in x X)") == L.In("x", "X")

    def test_tuple_symbol(self):
        phi = formats.parse_formula("(edge (0 push_a) x y)")
        assert phi == L.Edge(("0", "push_a"), "x", "y")

    def test_roundtrip_structural(self):
        phi = L.exists_many(
            ["x", "Y"],
            L.And((L.Or((L.Not(L.Lab("*", "x")), L.In("x", "Y"))), L.true_())),
        )
        text = formats.formula_to_sexp(phi)
        assert formats.parse_formula(text) == phi

    def test_roundtrip_canonical(self):
        text = "(or (lab * x)   (lab * x))"
        once = formats.formula_to_sexp(formats.parse_formula(text))
        twice = formats.formula_to_sexp(formats.parse_formula(once))
        assert once == twice

    def test_macros_expand(self):
        assert formats.parse_formula("(path (a b) x y)") == L.path(["a", "b"], "x", "y")
        assert formats.parse_formula("(string (g))") == L.string_formula(["g"])

    def test_two_level_atoms(self):
        phi = formats.parse_formula("(next push_a x y)", two_level=True)
        assert phi == L.Next("push_a", "x", "y")
        assert formats.parse_formula("(member-eq x X)", two_level=True) == L.MemberEq("x", "X")
        with pytest.raises(FormatError):
            formats.parse_formula("(next push_a x y)")

    def test_sa_formula_roundtrip(self):
        phi = L.Forall("x", L.Or((L.Not(L.MemberEq("x", "X")), L.Next("stay", "x", "x"))))
        text = formats.formula_to_sexp(phi)
        assert formats.parse_formula(text, two_level=True) == phi

    def test_empty_input_rejected(self):
        with pytest.raises(FormatError):
            formats.parse_formula("")

    def test_unbalanced_rejected(self):
        with pytest.raises(FormatError):
            formats.parse_formula("(and (lab * x)")


class TestGraphFormat:
    def test_roundtrip(self):
        g = nd_gr("gaB")
        text = formats.serialize_graph(g)
        assert formats.parse_graph(text) == g

    def test_comments_and_blank_lines(self):
        text = "# a graph\nnode 0 label=*\n\nedge 0 -> 1 label=a  # the only edge\nnode 1 label=*\n"
        g = formats.parse_graph(text)
        assert g == ed_gr("a")

    def test_tuple_labels(self):
        g = ed_gr((("0", "stay"),))
        text = formats.serialize_graph(g)
        assert "label=0,stay" in text
        assert formats.parse_graph(text) == g

    def test_empty_rejected(self):
        with pytest.raises(FormatError):
            formats.parse_graph("# nothing\n")

    def test_bad_line_diagnostics(self):
        with pytest.raises(FormatError) as err:
            formats.parse_graph("node 0 label=*\nedge 0 1 label=a\n")
        assert "line 2" in str(err.value)


class TestNfaFormat:
    def test_roundtrip(self):
        n = NFA({"a", "b"}, {"q0", "q1"}, {"q0"}, {"q1"}, {("q0", "a", "q1"), ("q1", "b", "q1")})
        text = formats.serialize_nfa(n)
        back = formats.parse_nfa(text)
        assert back.alphabet == n.alphabet
        assert back.transitions == n.transitions
        assert back.initial == n.initial and back.final == n.final
        assert formats.serialize_nfa(back) == text

    def test_tuple_symbols(self):
        n = NFA({("0", "stay")}, {"q"}, {"q"}, {"q"}, {("q", ("0", "stay"), "q")})
        back = formats.parse_nfa(formats.serialize_nfa(n))
        assert back.transitions == n.transitions


class TestAutomatonFormat:
    def test_roundtrip_wwrw(self):
        m = wwrw_automaton()
        text = formats.serialize_automaton(m)
        back = formats.parse_automaton(text)
        assert back.transitions == m.transitions
        assert back.alphabet == m.alphabet
        assert formats.serialize_automaton(back) == text


class TestStorageFormat:
    def test_triv_roundtrip(self):
        s = triv_mso()
        text = formats.serialize_storage(s)
        back = formats.parse_storage(text)
        assert back.sigma == s.sigma and back.gamma == s.gamma
        assert back.g_in == s.g_in
        assert back.phi_c == s.phi_c
        assert back.instructions == s.instructions
        assert formats.serialize_storage(back) == text

    def test_stack_instruction_inventory(self):
        s = stack_mso()
        back = formats.parse_storage(formats.serialize_storage(s))
        assert len(back.instructions) == 12
        assert back.instruction_names == s.instruction_names
        assert back.formula_of("push_a") == s.formula_of("push_a")

    def test_native_reference(self):
        parsed = formats.parse_storage("native-storage stack\n")
        assert parsed == ("native", "stack")


class TestTransducerFormat:
    def test_roundtrip(self):
        t = copy_transducer({"*"}, {"g"})
        text = formats.serialize_transducer(t)
        back = formats.parse_transducer(text)
        assert back.sigma == t.sigma and back.gamma == t.gamma
        assert back.duplicates == t.duplicates
        assert back.node_formulas == t.node_formulas
        assert back.edge_formulas == t.edge_formulas
        assert formats.serialize_transducer(back) == text


class TestDot:
    def test_biclique_collapses(self):
        m = wwrw_automaton()
        from msostorage import automata as A
        from msostorage.stack import stack_native

        run = A.find_accepting_runs(m, stack_native(), "011001", max_runs=1)[0]
        g8 = A.build_witness_graph(m, stack_native(), run)
        dot = formats.to_dot(g8)
        # the 0-link between two 3-node components collapses to one bold edge
        assert dot.count("label=\"0\" style=bold") >= 1
        plain = formats.to_dot(g8, collapse=False)
        assert plain.count('label="0"') > dot.count('label="0"')

    def test_deterministic(self):
        g = nd_gr("ab")
        assert formats.to_dot(g) == formats.to_dot(g)
