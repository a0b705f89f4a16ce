"""The stack storage, natively and as formulas.

A stack configuration is a string over {a, b, g} in which exactly one
symbol is marked (uppercase): the last symbol is the top of the stack and
the marked one carries the stack pointer.  Instructions are push_w, pop_w,
moveup_w and movedown_w for w in {a, b, g}; push/pop act at the top,
moveup/movedown slide the pointer.

The formula-defined twin renders a configuration as its node-labeled
string graph (chain of star-edges) and gives one pair-graph formula per
instruction: components are configuration chains, intermediate d-edges
match up the copied cells, and the node labels encode the instruction's
effect.  Pop templates are the push templates with all nu- and d-edges
inverted.
"""

from __future__ import annotations

from . import logic as L
from .errors import NotASuccessor
from .graphs import NU, STAR, Graph, graph_union, nd_gr, shift_nodes
from .storage import (
    MsoStorage,
    NativeStorage,
    _pair_partition,
    same_label_formula,
)

OMEGA = ("a", "b", "g")
BAR = {"a": "A", "b": "B", "g": "G"}
UNBAR = {v: k for k, v in BAR.items()}
SIGMA = frozenset(OMEGA) | frozenset(BAR.values())
D = "d"
GAMMA = frozenset({STAR, D})

INITIAL = "G"


def is_stack_config(s) -> bool:
    return len(s) >= 1 and sum(1 for ch in s if ch in UNBAR) == 1 and all(
        ch in UNBAR or ch in BAR for ch in s
    )


def all_stack_configs(max_len):
    """Every element of the configuration set with length <= max_len."""
    import itertools

    out = []
    for n in range(1, max_len + 1):
        for letters in itertools.product(OMEGA, repeat=n):
            for bar_at in range(n):
                cfg = "".join(
                    BAR[ch] if i == bar_at else ch for i, ch in enumerate(letters)
                )
                out.append(cfg)
    return out


def _bar_index(config):
    for i, ch in enumerate(config):
        if ch in UNBAR:
            return i
    raise ValueError(f"not a stack configuration: {config!r}")


def _step(config, instruction):
    op, omega = instruction.rsplit("_", 1)
    i = _bar_index(config)
    if op == "push":
        if i == len(config) - 1:
            return {config[:-1] + UNBAR[config[-1]] + BAR[omega]}
        return set()
    if op == "pop":
        # inverse of push: config = w omega' BAR(omega)
        if len(config) >= 2 and config[-1] == BAR[omega] and config[-2] in BAR:
            return {config[:-2] + BAR[config[-2]]}
        return set()
    if op == "moveup":
        if config[i] == BAR[omega] and i < len(config) - 1:
            return {config[:i] + omega + BAR[config[i + 1]] + config[i + 2:]}
        return set()
    if op == "movedown":
        if config[i] == BAR[omega] and i >= 1:
            return {config[: i - 1] + BAR[config[i - 1]] + omega + config[i + 1:]}
        return set()
    raise KeyError(instruction)


def _render(config):
    return nd_gr(config)


def _witness(config, instruction, successor):
    op, _ = instruction.rsplit("_", 1)
    g1 = _render(config)
    g2 = shift_nodes(_render(successor), len(config))
    n1, n2 = len(config), len(successor)
    extra = [(u, NU, v) for u in range(n1) for v in range(n1, n1 + n2)]
    if op == "push":
        matched = n1  # all of the first component
    elif op == "pop":
        matched = n2  # all of the second component
    else:
        matched = n1
    extra += [(i, D, n1 + i) for i in range(matched)]
    return graph_union(g1, g2, extra_edges=extra)


STACK_INSTRUCTIONS = tuple(
    f"{op}_{w}" for op in ("push", "pop", "moveup", "movedown") for w in OMEGA
)


def stack_native() -> NativeStorage:
    return NativeStorage(
        "stack", INITIAL, STACK_INSTRUCTIONS, _step, _render, _witness
    )


# ------------------------------------------------------------- formulas

def _phi_c():
    no_d = L.forall_many(["xn", "yn"], L.Not(L.Edge(D, "xn", "yn")))
    barred = lambda v: L.Or(tuple(L.Lab(BAR[w], v) for w in OMEGA))  # noqa: E731
    unique = L.And(
        (
            L.Exists("xu", barred("xu")),
            L.forall_many(
                ["xu", "yu"],
                L.Or(
                    (
                        L.Not(L.And((barred("xu"), barred("yu")))),
                        L.eq_nodes("xu", "yu"),
                    )
                ),
            ),
        )
    )
    return L.And((L.string_formula(GAMMA), no_d, unique))


PHI_C = _phi_c()
_PHI1 = L.relativize(PHI_C, "X1")
_PHI2 = L.relativize(PHI_C, "X2")
_PAIR = _pair_partition("X1", "X2")


def _top_of(v, X):
    """v is the top of the chain X (no outgoing star-edge within X)."""
    return L.And(
        (
            L.In(v, X),
            L.Not(L.Exists("zt", L.And((L.In("zt", X), L.Edge(STAR, v, "zt"))))),
        )
    )


def _no_cross(star_backward_d=True):
    """No star-edges between the components; no d-edges backwards."""
    x, y = "xc", "yc"
    forward = L.forall_many(
        [x, y],
        L.Or(
            (
                L.Not(L.And((L.In(x, "X1"), L.In(y, "X2")))),
                L.Not(L.Edge(STAR, x, y)),
            )
        ),
    )
    backward = L.forall_many(
        [x, y],
        L.Or(
            (
                L.Not(L.And((L.In(x, "X2"), L.In(y, "X1")))),
                L.And((L.Not(L.Edge(STAR, x, y)), L.Not(L.Edge(D, x, y)))),
            )
        ),
    )
    return L.And((forward, backward))


def _d_guard(x, y, inner):
    return L.forall_many([x, y], L.Or((L.Not(L.Edge(D, x, y)), inner)))


def _d_functional():
    return _d_guard(
        "xf",
        "yf",
        L.forall_many(
            ["yf2"], L.Or((L.Not(L.Edge(D, "xf", "yf2")), L.eq_nodes("yf", "yf2")))
        ),
    )


def _d_injective():
    return _d_guard(
        "xf",
        "yf",
        L.forall_many(
            ["xf2"], L.Or((L.Not(L.Edge(D, "xf2", "yf")), L.eq_nodes("xf", "xf2")))
        ),
    )


def _d_iso():
    return _d_guard(
        "xi",
        "yi",
        L.forall_many(
            ["xi2", "yi2"],
            L.Or(
                (
                    L.Not(L.Edge(D, "xi2", "yi2")),
                    L.iff(L.Edge(STAR, "xi", "xi2"), L.Edge(STAR, "yi", "yi2")),
                )
            ),
        ),
    )


def _d_total_on(X, cond=None):
    """Every X-node satisfying `cond` has a d-edge, and no other X-node."""
    x = "xd"
    has = L.Exists("yd", L.Edge(D, x, "yd"))
    want = cond(x) if cond else L.true_()
    return L.forall_many(
        [x], L.Or((L.Not(L.In(x, X)), L.iff(has, want)))
    )


def _d_onto(X, cond=None):
    y = "yo"
    hit = L.Exists("xo", L.Edge(D, "xo", y))
    want = cond(y) if cond else L.true_()
    return L.forall_many(
        [y], L.Or((L.Not(L.In(y, X)), L.iff(hit, want)))
    )


def _same_unbarred(x, y):
    return L.Or(tuple(L.And((L.Lab(w, x), L.Lab(w, y))) for w in OMEGA))


def _bar_of_second(x, y):
    """x carries the barred version of y's (unbarred) label."""
    return L.Or(tuple(L.And((L.Lab(BAR[w], x), L.Lab(w, y))) for w in OMEGA))


def _bar_of_first(x, y):
    """y carries the barred version of x's (unbarred) label."""
    return L.Or(tuple(L.And((L.Lab(w, x), L.Lab(BAR[w], y))) for w in OMEGA))


def _common():
    return (_PAIR, _PHI1, _PHI2, _no_cross(), _d_functional(), _d_injective(), _d_iso())


def _psi_push(omega):
    labels = _d_guard(
        "xl",
        "yl",
        L.And(
            (
                L.Or((_top_of("xl", "X1"), _same_unbarred("xl", "yl"))),
                L.Or((L.Not(_top_of("xl", "X1")), _bar_of_second("xl", "yl"))),
            )
        ),
    )
    new_top = L.forall_many(
        ["xt"], L.Or((L.Not(_top_of("xt", "X2")), L.Lab(BAR[omega], "xt")))
    )
    body = _common() + (
        _d_total_on("X1"),
        _d_onto("X2", cond=lambda y: L.Not(_top_of(y, "X2"))),
        labels,
        new_top,
    )
    return L.exists_many(["X1", "X2"], L.And(body))


def _psi_pop(omega):
    labels = _d_guard(
        "xl",
        "yl",
        L.And(
            (
                L.Or((_top_of("yl", "X2"), _same_unbarred("xl", "yl"))),
                L.Or((L.Not(_top_of("yl", "X2")), _bar_of_first("xl", "yl"))),
            )
        ),
    )
    old_top = L.forall_many(
        ["xt"], L.Or((L.Not(_top_of("xt", "X1")), L.Lab(BAR[omega], "xt")))
    )
    body = _common() + (
        _d_total_on("X1", cond=lambda x: L.Not(_top_of(x, "X1"))),
        _d_onto("X2"),
        labels,
        old_top,
    )
    return L.exists_many(["X1", "X2"], L.And(body))


def _psi_move(omega, up):
    """moveup: the barred cell's label moves one star-step towards the
    top; movedown: towards the bottom."""
    p1, p1n, p2, p2n = "p1", "p1n", "p2", "p2n"
    step_edge = L.Edge(STAR, p1, p1n) if up else L.Edge(STAR, p1n, p1)
    pointer = L.exists_many(
        [p1, p1n, p2, p2n],
        L.And(
            (
                L.In(p1, "X1"),
                L.In(p1n, "X1"),
                L.Lab(BAR[omega], p1),
                step_edge,
                L.Edge(D, p1, p2),
                L.Edge(D, p1n, p2n),
                L.Lab(omega, p2),
                _bar_of_first(p1n, p2n),
                # every other matched pair keeps its label
                _d_guard(
                    "xm",
                    "ym",
                    L.Or(
                        (
                            L.eq_nodes("xm", p1),
                            L.eq_nodes("xm", p1n),
                            same_label_formula(SIGMA, "xm", "ym"),
                        )
                    ),
                ),
            )
        ),
    )
    body = _common() + (_d_total_on("X1"), _d_onto("X2"), pointer)
    return L.exists_many(["X1", "X2"], L.And(body))


def stack_mso() -> MsoStorage:
    instructions = []
    for w in OMEGA:
        instructions.append((f"push_{w}", _psi_push(w)))
    for w in OMEGA:
        instructions.append((f"pop_{w}", _psi_pop(w)))
    for w in OMEGA:
        instructions.append((f"moveup_{w}", _psi_move(w, up=True)))
    for w in OMEGA:
        instructions.append((f"movedown_{w}", _psi_move(w, up=False)))
    return MsoStorage(
        name="STACK",
        sigma=SIGMA,
        gamma=GAMMA,
        phi_c=PHI_C,
        g_in=_render(INITIAL),
        instructions=tuple(instructions),
    )


def stack_witness_pair(config, instruction, successor) -> Graph:
    """Pair graph realizing a stack step (validates the step)."""
    if successor not in _step(config, instruction):
        raise NotASuccessor(f"{instruction}: {config!r} -> {successor!r}")
    return _witness(config, instruction, successor)


def wwrw_automaton():
    """The stack automaton for { w w^R w : w nonempty over {0,1} }:
    push w, slide down along w^R, slide back up along w, pop the last
    symbol."""
    from .automata import SAutomaton
    from .graphs import EMPTY

    sigma_map = {"0": "a", "1": "b"}
    transitions = set()
    for inp, w in sigma_map.items():
        transitions.add(("q1", inp, f"push_{w}", "q1"))
        transitions.add(("q1", inp, f"movedown_{w}", "q2"))
        transitions.add(("q2", inp, f"movedown_{w}", "q2"))
        transitions.add(("q3", inp, f"moveup_{w}", "q3"))
        transitions.add(("q3", inp, f"pop_{w}", "q4"))
    transitions.add(("q2", EMPTY, "moveup_g", "q3"))
    return SAutomaton(
        {"0", "1"}, {"q1", "q2", "q3", "q4"}, {"q1"}, {"q4"}, transitions
    )
