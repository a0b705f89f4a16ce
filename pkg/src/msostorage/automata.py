"""Finite-state automata and storage automata.

NFAs carry an explicit alphabet (symbols may be tuples) and support the
algebra needed by the logic-automaton translations: union, intersection,
complement via determinization, projection of tuple positions, and symbol
renaming.

A storage automaton reads input symbols (or the reserved empty symbol)
while firing storage instructions.  It accepts strings through a bounded
search over instantaneous descriptions against an executable storage, and
accepts string-like graphs by model-checking consecutive components
against the instruction formulas and running the finite-state control on
the resulting word.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import logic as L
from .errors import (
    AlphabetMismatch,
    BudgetExhausted,
    InvalidRun,
    StateBlowup,
    StorageMismatch,
    UnknownSymbol,
)
from .graphs import EMPTY, NU, Graph, as_string_like, graph_union, label_key, shift_nodes
from .semantics import DEFAULT_BUDGET, evaluate


def h_e(word):
    """Erase the reserved empty symbol from a word over Ae."""
    return tuple(sym for sym in word if sym != EMPTY)


class NFA:
    def __init__(self, alphabet, states, initial, final, transitions):
        self.alphabet = frozenset(alphabet)
        self.states = frozenset(states)
        self.initial = frozenset(initial)
        self.final = frozenset(final)
        self.transitions = frozenset(transitions)
        for q, sym, q2 in self.transitions:
            if q not in self.states or q2 not in self.states:
                raise ValueError(f"transition ({q},{sym},{q2}) uses an undeclared state")
            if sym not in self.alphabet:
                raise UnknownSymbol(f"transition symbol {sym!r} not in the alphabet")
        if not self.initial <= self.states or not self.final <= self.states:
            raise ValueError("initial/final states must be declared states")

    def __repr__(self):
        return f"NFA({len(self.states)} states, {len(self.transitions)} transitions)"

    def step_map(self):
        out = {}
        for q, sym, q2 in self.transitions:
            out.setdefault((q, sym), set()).add(q2)
        return out


def nfa_accepts(nfa: NFA, word) -> bool:
    word = tuple(word)
    for sym in word:
        if sym not in nfa.alphabet:
            raise UnknownSymbol(repr(sym))
    current = set(nfa.initial)
    steps = nfa.step_map()
    for sym in word:
        current = set().union(*(steps.get((q, sym), set()) for q in current)) if current else set()
        if not current:
            return False
    return bool(current & nfa.final)


def accepted_words(nfa: NFA, max_len):
    """All accepted words of length <= max_len (tests and oracles only)."""
    out = set()
    alphabet = sorted(nfa.alphabet, key=label_key)
    for n in range(max_len + 1):
        for word in itertools.product(alphabet, repeat=n):
            if nfa_accepts(nfa, word):
                out.add(word)
    return out


def renumber(nfa: NFA) -> NFA:
    """Replace states by 0..n-1 in a deterministic order."""
    order = sorted(nfa.states, key=repr)
    names = {q: i for i, q in enumerate(order)}
    return NFA(
        nfa.alphabet,
        range(len(order)),
        (names[q] for q in nfa.initial),
        (names[q] for q in nfa.final),
        ((names[q], sym, names[q2]) for q, sym, q2 in nfa.transitions),
    )


def determinize(nfa: NFA, budget=1 << 14) -> NFA:
    """Subset construction over reachable subsets; the result is complete
    (a sink subset is the empty set)."""
    steps = nfa.step_map()
    start = frozenset(nfa.initial)
    seen = {start}
    queue = [start]
    transitions = []
    while queue:
        cur = queue.pop()
        for sym in nfa.alphabet:
            nxt = frozenset().union(*(steps.get((q, sym), set()) for q in cur)) if cur else frozenset()
            transitions.append((cur, sym, nxt))
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > budget:
                    raise StateBlowup(f"determinization exceeded {budget} states")
                queue.append(nxt)
    final = {s for s in seen if s & nfa.final}
    return renumber(NFA(nfa.alphabet, seen, {start}, final, transitions))


def minimize(nfa: NFA, budget=1 << 14) -> NFA:
    """Determinize and merge equivalent states (Moore refinement)."""
    det = determinize(nfa, budget)
    alphabet = sorted(det.alphabet, key=label_key)
    step = {}
    for q, sym, q2 in det.transitions:
        step[(q, sym)] = q2
    block = {q: (q in det.final) for q in det.states}
    while True:
        signature = {
            q: (block[q], tuple(block[step[(q, sym)]] for sym in alphabet))
            for q in det.states
        }
        classes = {}
        for q in sorted(det.states, key=repr):
            classes.setdefault(signature[q], len(classes))
        new_block = {q: classes[signature[q]] for q in det.states}
        if len(set(new_block.values())) == len(set(block.values())):
            block = new_block
            break
        block = new_block
    transitions = {(block[q], sym, block[q2]) for q, sym, q2 in det.transitions}
    return NFA(
        det.alphabet,
        set(block.values()),
        {block[q] for q in det.initial},
        {block[q] for q in det.final},
        transitions,
    )


def nfa_union(a: NFA, b: NFA) -> NFA:
    if a.alphabet != b.alphabet:
        raise AlphabetMismatch("union requires equal alphabets")
    ta = {(("a", q), sym, ("a", q2)) for q, sym, q2 in a.transitions}
    tb = {(("b", q), sym, ("b", q2)) for q, sym, q2 in b.transitions}
    return renumber(
        NFA(
            a.alphabet,
            {("a", q) for q in a.states} | {("b", q) for q in b.states},
            {("a", q) for q in a.initial} | {("b", q) for q in b.initial},
            {("a", q) for q in a.final} | {("b", q) for q in b.final},
            ta | tb,
        )
    )


def nfa_intersect(a: NFA, b: NFA) -> NFA:
    if a.alphabet != b.alphabet:
        raise AlphabetMismatch("intersection requires equal alphabets")
    transitions = set()
    for q, sym, q2 in a.transitions:
        for p, sym2, p2 in b.transitions:
            if sym == sym2:
                transitions.add(((q, p), sym, (q2, p2)))
    return renumber(
        NFA(
            a.alphabet,
            set(itertools.product(a.states, b.states)),
            set(itertools.product(a.initial, b.initial)),
            set(itertools.product(a.final, b.final)),
            transitions,
        )
    )


def nfa_complement(a: NFA, budget=1 << 14) -> NFA:
    det = determinize(a, budget)
    return NFA(det.alphabet, det.states, det.initial, det.states - det.final, det.transitions)


def nfa_project(a: NFA, index) -> NFA:
    """Drop position `index` of every tuple symbol (1-tuples unwrap)."""

    def drop(sym):
        if not isinstance(sym, tuple):
            raise AlphabetMismatch("projection needs tuple symbols")
        rest = sym[:index] + sym[index + 1:]
        return rest[0] if len(rest) == 1 else rest

    return NFA(
        {drop(sym) for sym in a.alphabet},
        a.states,
        a.initial,
        a.final,
        {(q, drop(sym), q2) for q, sym, q2 in a.transitions},
    )


def nfa_rename(a: NFA, mapping) -> NFA:
    fn = mapping if callable(mapping) else mapping.__getitem__
    return NFA(
        {fn(sym) for sym in a.alphabet},
        a.states,
        a.initial,
        a.final,
        {(q, fn(sym), q2) for q, sym, q2 in a.transitions},
    )


def nfa_combine(op, *nfas, index=None, mapping=None, budget=1 << 14) -> NFA:
    """Dispatcher over the NFA algebra (CLI and generic callers)."""
    if op == "union":
        return nfa_union(*nfas)
    if op == "intersect":
        return nfa_intersect(*nfas)
    if op == "complement":
        return nfa_complement(nfas[0], budget)
    if op == "project":
        return nfa_project(nfas[0], index)
    if op == "rename":
        return nfa_rename(nfas[0], mapping)
    raise ValueError(f"unknown NFA operation {op!r}")


# ------------------------------------------------------- storage automata

class SAutomaton:
    """Finite-state control whose transitions fire storage instructions."""

    def __init__(self, alphabet, states, initial, final, transitions):
        self.alphabet = frozenset(alphabet)
        if EMPTY in self.alphabet:
            raise AlphabetMismatch(f"{EMPTY!r} is reserved and cannot be an input symbol")
        self.states = frozenset(states)
        self.initial = frozenset(initial)
        self.final = frozenset(final)
        self.transitions = frozenset(transitions)
        for q, alpha, theta, q2 in self.transitions:
            if q not in self.states or q2 not in self.states:
                raise ValueError(f"transition uses undeclared state: {(q, alpha, theta, q2)}")
            if alpha != EMPTY and alpha not in self.alphabet:
                raise UnknownSymbol(repr(alpha))

    def __repr__(self):
        return f"SAutomaton({len(self.states)} states, {len(self.transitions)} transitions)"

    def instruction_names(self):
        return {theta for _, _, theta, _ in self.transitions}


def to_word_nfa(m: SAutomaton, instruction_names=None) -> NFA:
    """The control automaton over Ae x instruction-names (transitionwise
    relabeling; a bijection).  Passing the storage's instruction names
    widens the alphabet to the full product, which matters for
    complement-like uses (symbols without transitions are then rejected
    rather than undeclared)."""
    alphabet = {(alpha, theta) for _, alpha, theta, _ in m.transitions}
    if instruction_names is not None:
        ae = sorted(m.alphabet, key=label_key) + [EMPTY]
        alphabet |= {(alpha, theta) for alpha in ae for theta in instruction_names}
    return NFA(
        alphabet,
        m.states,
        m.initial,
        m.final,
        {(q, (alpha, theta), q2) for q, alpha, theta, q2 in m.transitions},
    )


def from_word_nfa(nfa: NFA, alphabet) -> SAutomaton:
    """Inverse of the transition relabeling: symbols must be pairs of an
    Ae-symbol and an instruction name."""
    transitions = set()
    for q, sym, q2 in nfa.transitions:
        if not (isinstance(sym, tuple) and len(sym) == 2):
            raise AlphabetMismatch(f"word symbol {sym!r} is not an (input, instruction) pair")
        alpha, theta = sym
        transitions.add((q, alpha, theta, q2))
    return SAutomaton(alphabet, nfa.states, nfa.initial, nfa.final, transitions)


@dataclass(frozen=True)
class Run:
    """An accepting computation: n transitions with their configurations."""

    states: tuple  # n+1 states
    word: tuple  # n symbols over Ae
    instructions: tuple  # n instruction names
    configs: tuple  # n+1 storage configurations

    def __len__(self):
        return len(self.word)


def validate_run(m: SAutomaton, backend, run: Run):
    n = len(run)
    if not (len(run.states) == len(run.configs) == n + 1 and len(run.instructions) == n):
        raise InvalidRun("component lengths do not line up")
    if run.states[0] not in m.initial:
        raise InvalidRun("run does not start in an initial state")
    if run.states[-1] not in m.final:
        raise InvalidRun("run does not end in a final state")
    if run.configs[0] != backend.initial:
        raise InvalidRun("run does not start in the initial configuration")
    for i in range(n):
        t = (run.states[i], run.word[i], run.instructions[i], run.states[i + 1])
        if t not in m.transitions:
            raise InvalidRun(f"step {i}: {t} is not a transition")
        if run.configs[i + 1] not in backend.step(run.configs[i], run.instructions[i]):
            raise InvalidRun(f"step {i}: configuration change not allowed by {run.instructions[i]}")


def _default_budget(m: SAutomaton, word):
    return 4 * (len(word) + 1) * max(1, len(m.states)) + 256


def s_accepts_string(m: SAutomaton, backend, word, budget=None) -> bool:
    """Bounded existential search over instantaneous descriptions.

    Returns True on an accepting run, False when the search space is
    exhausted, and raises BudgetExhausted when the step budget is hit
    while the frontier is still nonempty (distinct from rejection)."""
    word = tuple(word)
    for sym in word:
        if sym not in m.alphabet:
            raise UnknownSymbol(repr(sym))
    missing = m.instruction_names() - set(backend.instructions)
    if missing:
        raise StorageMismatch(f"backend lacks instructions {sorted(missing)}")
    if budget is None:
        budget = _default_budget(m, word)
    by_state = {}
    for t in sorted(m.transitions, key=repr):
        by_state.setdefault(t[0], []).append(t)
    start_ids = {(q, 0, backend.initial) for q in m.initial}
    seen = set(start_ids)
    frontier = list(start_ids)
    steps = 0
    while frontier:
        nxt = []
        for q, pos, config in frontier:
            if pos == len(word) and q in m.final:
                return True
            for q1, alpha, theta, q2 in by_state.get(q, ()):
                if alpha == EMPTY:
                    pos2 = pos
                elif pos < len(word) and word[pos] == alpha:
                    pos2 = pos + 1
                else:
                    continue
                steps += 1
                if steps > budget:
                    raise BudgetExhausted(f"search cut after {budget} expansions")
                for config2 in backend.step(config, theta):
                    ident = (q2, pos2, config2)
                    if ident not in seen:
                        seen.add(ident)
                        nxt.append(ident)
        frontier = nxt
    return False


def find_accepting_runs(m: SAutomaton, backend, word, budget=None, max_runs=16):
    """Accepting runs on `word`, up to `max_runs`, found by bounded DFS."""
    word = tuple(word)
    if budget is None:
        budget = 4 * _default_budget(m, word)
    runs = []
    steps = 0
    transitions = sorted(m.transitions, key=repr)

    def dfs(q, pos, config, states, syms, thetas, configs, seen):
        nonlocal steps
        if len(runs) >= max_runs:
            return
        if pos == len(word) and q in m.final:
            runs.append(Run(tuple(states), tuple(syms), tuple(thetas), tuple(configs)))
        for q1, alpha, theta, q2 in transitions:
            if q1 != q:
                continue
            if alpha == EMPTY:
                pos2 = pos
            elif pos < len(word) and word[pos] == alpha:
                pos2 = pos + 1
            else:
                continue
            steps += 1
            if steps > budget:
                return
            for config2 in sorted(backend.step(config, theta), key=repr):
                ident = (q2, pos2, config2)
                if ident in seen:
                    continue
                dfs(
                    q2,
                    pos2,
                    config2,
                    states + [q2],
                    syms + [alpha],
                    thetas + [theta],
                    configs + [config2],
                    seen | {ident},
                )

    for q in sorted(m.initial, key=repr):
        dfs(q, 0, backend.initial, [q], [], [], [backend.initial], {(q, 0, backend.initial)})
    return runs


def graph_behaviour(storage, view, budget=DEFAULT_BUDGET):
    """The unique behaviour carried by a string-like graph, or None.

    Model-checks every consecutive pair against every instruction formula;
    exclusiveness is asserted along the way (at most one instruction may
    match a pair)."""
    from .semantics import EvalContext

    thetas = []
    for i in range(len(view.components) - 1):
        ctx = EvalContext(view.pair_at(i), budget)
        matches = [name for name, phi in storage.instructions if ctx.satisfies(phi)]
        assert len(matches) <= 1, f"exclusiveness violated at pair {i}: {matches}"
        if not matches:
            return None
        thetas.append(matches[0])
    return tuple(thetas)


def s_accepts_graph(m: SAutomaton, storage, g: Graph, budget=DEFAULT_BUDGET):
    """Graph acceptance: (accepted, behaviour).

    The behaviour is the instruction word determined by the graph alone
    (automaton-independent); acceptance additionally runs the finite-state
    control over the (trace, behaviour) word."""
    view = as_string_like(g, storage, m.alphabet)
    thetas = graph_behaviour(storage, view, budget)
    if thetas is None:
        return (False, None)
    word = tuple(zip(view.trace, thetas))
    word_nfa = to_word_nfa(m)
    try:
        accepted = nfa_accepts(word_nfa, word)
    except UnknownSymbol:
        accepted = False  # the automaton has no transition with that pair
    return (accepted, thetas)


def stringlike_formula(storage, alphabet, gin_formula=None) -> L.Formula:
    """Closed formula satisfied exactly by the string-like graphs over the
    storage and alphabet (bounded instances).

    The link-structure part is the string formula over Ae at the level of
    link-equivalence classes; the initial-component part relativizes a
    formula pinning g_in (auto-generated by exact structure description
    unless supplied)."""
    return stringlike_formula_links(
        storage, sorted(set(alphabet) | {EMPTY}, key=label_key), gin_formula
    )


def stringlike_formula_links(storage, links, gin_formula=None) -> L.Formula:
    """As stringlike_formula, but over an explicit link alphabet (no
    implicit empty symbol; the pushdown encoding links by its own symbols)."""
    ae = sorted(links, key=label_key)
    same = lambda x, y: L.eq_class(ae, x, y)  # noqa: E731
    link_part = L.string_formula(ae, same=same)
    # configuration edges stay inside a component or follow the link
    # biclique to the next one (the completeness of link bicliques makes
    # "next component" expressible by a single link edge)
    gamma = sorted(storage.gamma, key=label_key)
    if gamma:
        placement = L.forall_many(
            ["xq", "yq"],
            L.Or(
                (
                    L.Not(L.edge_any(gamma, "xq", "yq")),
                    same("xq", "yq"),
                    L.edge_any(ae, "xq", "yq"),
                )
            ),
        )
        link_part = L.And((link_part, placement))
    if gin_formula is None:
        gin_formula = L.describe_graph(storage.g_in, storage.gamma)
    X = "Xfirst"
    first_comp = L.Forall(
        "xg",
        L.iff(
            L.In("xg", X),
            L.Not(L.Exists("yg", L.edge_any(ae, "yg", "xg"))),
        ),
    )
    in_s = L.Forall(X, L.Or((L.Not(first_comp), L.relativize(gin_formula, X))))
    return L.And((link_part, in_s))


def assemble_witness(backend, configs, instructions, word) -> Graph:
    """String-like graph for a configuration sequence: components are the
    rendered configurations, intermediate edges come from the backend's
    witness pair graphs, and the link bicliques carry the given input
    symbols."""
    renders = [backend.render(c) for c in configs]
    offsets = []
    total = 0
    for r in renders:
        offsets.append(total)
        total += len(r)
    shifted = [shift_nodes(r, off) for r, off in zip(renders, offsets)]
    extra = []
    for i in range(len(instructions)):
        pair = backend.witness_pair(configs[i], instructions[i], configs[i + 1])
        n1 = len(renders[i])
        for u, lab, v in pair.edges:
            if u < n1 <= v:
                if lab == NU:
                    continue
                extra.append((u + offsets[i], lab, v - n1 + offsets[i + 1]))
            elif v < n1 <= u:
                extra.append((u - n1 + offsets[i + 1], lab, v + offsets[i]))
        for u in shifted[i].nodes:
            for v in shifted[i + 1].nodes:
                extra.append((u, word[i], v))
    return graph_union(*shifted, extra_edges=extra)


def build_witness_graph(m: SAutomaton, backend, run: Run) -> Graph:
    """String-like graph witnessing an accepting run; guarantees the
    result is in the graph language of the automaton."""
    validate_run(m, backend, run)
    return assemble_witness(backend, run.configs, run.instructions, run.word)


def reset_combine(op, m1: SAutomaton, m2: SAutomaton = None, chi="__reset") -> SAutomaton:
    """Concatenation / Kleene star of storage automata through a reset
    instruction: gluing e-transitions fire the reset between the phases."""
    if op == "concat":
        if m2 is None:
            raise ValueError("concat needs two automata")
        if m1.alphabet != m2.alphabet:
            raise StorageMismatch("concatenation across different input alphabets")
        states = {("a", q) for q in m1.states} | {("b", q) for q in m2.states}
        transitions = {(("a", q), al, th, ("a", q2)) for q, al, th, q2 in m1.transitions}
        transitions |= {(("b", q), al, th, ("b", q2)) for q, al, th, q2 in m2.transitions}
        for f in m1.final:
            for i in m2.initial:
                transitions.add((("a", f), EMPTY, chi, ("b", i)))
        return SAutomaton(
            m1.alphabet,
            states,
            {("a", q) for q in m1.initial},
            {("b", q) for q in m2.final},
            transitions,
        )
    if op == "star":
        fresh = ("star", 0)
        states = set(m1.states) | {fresh}
        transitions = set(m1.transitions)
        for f in m1.final:
            for i in m1.initial:
                transitions.add((f, EMPTY, chi, i))
        return SAutomaton(
            m1.alphabet,
            states,
            set(m1.initial) | {fresh},
            set(m1.final) | {fresh},
            transitions,
        )
    raise ValueError(f"unknown combination {op!r}")
