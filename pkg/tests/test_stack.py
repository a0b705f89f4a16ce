import pytest

from msostorage.errors import NotASuccessor
from msostorage.graphs import STAR, as_pair_view, iso_equal, nd_gr
from msostorage.semantics import satisfies
from msostorage.stack import (
    SIGMA,
    all_stack_configs,
    is_stack_config,
    stack_mso,
    stack_native,
    stack_witness_pair,
)
from msostorage.storage import chain_side, instruction_relation, mso_member


@pytest.fixture(scope="module")
def native():
    return stack_native()


@pytest.fixture(scope="module")
def STACK():
    return stack_mso()


class TestNativeStep:
    def test_movedown_example(self, native):
        # the stack g a B b with the pointer on B, moved down
        assert native.step("gaBb", "movedown_b") == {"gAbb"}

    def test_pop_on_initial_is_empty(self, native):
        assert native.step("G", "pop_a") == set()

    def test_push_on_initial(self, native):
        assert native.step("G", "push_a") == {"gA"}
        assert native.step("G", "push_g") == {"gG"}

    def test_push_needs_pointer_at_top(self, native):
        assert native.step("Gab", "push_a") == set()

    def test_pop_inverts_push(self, native):
        for c in all_stack_configs(3):
            for w in "abg":
                for c2 in native.step(c, f"push_{w}"):
                    assert native.step(c2, f"pop_{w}") == {c}

    def test_moveup_movedown_inverse(self, native):
        for c in all_stack_configs(3):
            for w in "abg":
                for c2 in native.step(c, f"movedown_{w}"):
                    up = c2[c2.index(next(ch for ch in c2 if ch.isupper()))]
                    assert c in native.step(c2, f"moveup_{up.lower()}")

    def test_config_shape(self):
        assert is_stack_config("gaB")
        assert not is_stack_config("gab")
        assert not is_stack_config("GA")
        assert not is_stack_config("")

    def test_render_is_chain(self, native):
        g = native.render("gaB")
        assert iso_equal(g, nd_gr("gaB"))


class TestWitnessPairs:
    def test_fig5_push(self, STACK):
        # (g B, push_a, g b A): the push pair graph
        w = stack_witness_pair("gB", "push_a", "gbA")
        view = as_pair_view(w)
        assert len(view.first) == 2 and len(view.second) == 3
        g1, g2 = view.pair()
        assert iso_equal(g1, nd_gr("gB")) and iso_equal(g2, nd_gr("gbA"))
        assert satisfies(w, STACK.formula_of("push_a"))

    def test_fig6_pop(self, STACK):
        w = stack_witness_pair("gbA", "pop_a", "gB")
        assert satisfies(w, STACK.formula_of("pop_a"))
        assert not satisfies(w, STACK.formula_of("push_a"))

    def test_fig7_moveup(self, STACK):
        w = stack_witness_pair("gBb", "moveup_b", "gbB")
        assert satisfies(w, STACK.formula_of("moveup_b"))
        assert not satisfies(w, STACK.formula_of("movedown_b"))

    def test_push_from_initial_one_d_edge(self, STACK):
        w = stack_witness_pair("G", "push_g", "gG")
        assert len(w) == 3
        assert sum(1 for _, lab, _ in w.edges if lab == "d") == 1
        assert satisfies(w, STACK.formula_of("push_g"))

    def test_invalid_step_rejected(self):
        with pytest.raises(NotASuccessor):
            stack_witness_pair("G", "pop_a", "G")

    def test_all_witnesses_satisfy_their_formula(self, native, STACK):
        # every native step of configurations up to length 2
        for c in all_stack_configs(2):
            for name in native.instructions:
                for c2 in native.step(c, name):
                    w = native.witness_pair(c, name, c2)
                    assert satisfies(w, STACK.formula_of(name)), (c, name, c2)


class TestMsoNativeAgreement:
    def test_member_mirrors_native_for_short_configs(self, native, STACK):
        for c in all_stack_configs(2):
            g1 = native.render(c)
            for name in native.instructions:
                succs = native.step(c, name)
                for c2 in succs:
                    assert mso_member(STACK, name, g1, native.render(c2)), (c, name, c2)
            # spot-check a non-successor
            assert not mso_member(STACK, "push_a", g1, g1)

    def test_member_examples(self, STACK):
        assert mso_member(STACK, "pop_a", nd_gr("gbA"), nd_gr("gB"))
        assert not mso_member(STACK, "push_a", nd_gr("G"), nd_gr("G"))

    def test_relation_matches_native_at_sizes_2_3(self, native, STACK):
        def side_str(g):
            return "".join(g.labels[u] for u in sorted(g.nodes))

        s1 = chain_side(2, SIGMA, STAR)
        s2 = chain_side(3, SIGMA, STAR)
        grounders = {}
        for name in ("push_b", "moveup_a"):
            mso_pairs = {
                (side_str(a), side_str(b))
                for a, b in instruction_relation(STACK, name, s1, s2, grounders=grounders)
            }
            native_pairs = {
                (c, c2)
                for c in all_stack_configs(2)
                if len(c) == 2
                for c2 in native.step(c, name)
                if len(c2) == 3
            }
            assert mso_pairs == native_pairs, name
