"""The classical logic/automaton translations on string graphs.

Closed formulas over ({*}, A) compile to NFAs over A and back.  The
compiler works over an encoded alphabet whose letters are flat tuples
(base, bit, ..., bit): one letter per node position of the string graph,
the base carrying the label of the edge leaving the position (a reserved
end marker at the last position), and one bit track per free variable in
scope.  First-order tracks carry exactly one 1; the consistency automaton
enforcing this (and the base structure) is intersected back in after
complements and projections.
"""

from __future__ import annotations

import itertools

from . import logic as L
from .automata import (
    NFA,
    determinize,
    minimize,
    nfa_accepts,
    nfa_intersect,
    nfa_union,
    renumber,
)
from .errors import StateBlowup
from .graphs import STAR, label_key

END = "__end__"

DET_BUDGET = 1 << 14


def _letters(alphabet, k):
    bases = sorted(alphabet, key=label_key) + [END]
    for base in bases:
        for bits in itertools.product((0, 1), repeat=k):
            yield (base,) + bits


def _consistency(alphabet, variables):
    """Valid encodings: at least one letter, END exactly at the last
    position, and each first-order track set exactly once."""
    k = len(variables)
    fo_positions = [i for i, v in enumerate(variables) if L.is_node_var(v)]
    letters = list(_letters(alphabet, k))
    states = set()
    transitions = set()
    full = frozenset(fo_positions)

    def mark(state, letter):
        seen = set(state)
        for i in fo_positions:
            if letter[1 + i]:
                if i in seen:
                    return None
                seen.add(i)
        return frozenset(seen)

    for seen in (frozenset(s) for r in range(len(fo_positions) + 1) for s in itertools.combinations(fo_positions, r)):
        states.add(("run", seen))
        states.add(("done", seen))
        for letter in letters:
            nxt = mark(seen, letter)
            if nxt is None:
                continue
            if letter[0] == END:
                transitions.add((("run", seen), letter, ("done", nxt)))
            else:
                transitions.add((("run", seen), letter, ("run", nxt)))
    return renumber(
        NFA(
            set(letters),
            states,
            {("run", frozenset())},
            {("done", full)},
            transitions,
        )
    )


def _restrict(nfa, alphabet, variables):
    return nfa_intersect(nfa, _consistency(alphabet, variables))


def _extend(nfa, old_vars, new_vars, alphabet):
    """Cylindrify: insert fresh bit tracks for the variables in new_vars
    that are missing from old_vars (all bit combinations), then restore
    consistency."""
    positions = {v: i for i, v in enumerate(new_vars)}
    old_positions = {v: i for i, v in enumerate(old_vars)}
    added = [v for v in new_vars if v not in old_positions]
    if not added:
        return nfa
    transitions = set()
    alphabet_out = set(_letters(alphabet, len(new_vars)))
    for q, sym, q2 in nfa.transitions:
        for extra in itertools.product((0, 1), repeat=len(added)):
            bits = [0] * len(new_vars)
            for v, i in old_positions.items():
                bits[positions[v]] = sym[1 + i]
            for v, b in zip(added, extra):
                bits[positions[v]] = b
            transitions.add((q, (sym[0],) + tuple(bits), q2))
    out = NFA(alphabet_out, nfa.states, nfa.initial, nfa.final, transitions)
    return _restrict(out, alphabet, new_vars)


def _empty(alphabet, variables):
    letters = set(_letters(alphabet, len(variables)))
    return NFA(letters, {0}, {0}, set(), set())


def _atom_edge(gamma, x, y, alphabet, variables):
    if x == y or gamma not in alphabet:
        return _empty(alphabet, variables)
    ix = variables.index(x)
    iy = variables.index(y)
    transitions = set()
    for letter in _letters(alphabet, len(variables)):
        bx, by = letter[1 + ix], letter[1 + iy]
        if not bx and not by:
            transitions.add((0, letter, 0))
            transitions.add((2, letter, 2))
        if bx and not by and letter[0] == gamma:
            transitions.add((0, letter, 1))
        if by and not bx:
            transitions.add((1, letter, 2))
    nfa = NFA(set(_letters(alphabet, len(variables))), {0, 1, 2}, {0}, {2}, transitions)
    return _restrict(nfa, alphabet, variables)


def _atom_in(x, X, alphabet, variables):
    ix = variables.index(x)
    iX = variables.index(X)
    transitions = set()
    for letter in _letters(alphabet, len(variables)):
        if not letter[1 + ix]:
            transitions.add((0, letter, 0))
            transitions.add((1, letter, 1))
        elif letter[1 + iX]:
            transitions.add((0, letter, 1))
    nfa = NFA(set(_letters(alphabet, len(variables))), {0, 1}, {0}, {1}, transitions)
    return _restrict(nfa, alphabet, variables)


def _universal(alphabet, variables):
    letters = set(_letters(alphabet, len(variables)))
    nfa = NFA(letters, {0}, {0}, {0}, {(0, letter, 0) for letter in letters})
    return _restrict(nfa, alphabet, variables)


def _project_var(nfa, variables, var, alphabet):
    """Drop one bit track (keeping flat-tuple symbols)."""
    i = 1 + variables.index(var)

    def drop(sym):
        return sym[:i] + sym[i + 1:]

    remaining = tuple(v for v in variables if v != var)
    out = NFA(
        {drop(sym) for sym in nfa.alphabet} | set(_letters(alphabet, len(remaining))),
        nfa.states,
        nfa.initial,
        nfa.final,
        {(q, drop(sym), q2) for q, sym, q2 in nfa.transitions},
    )
    return _restrict(out, alphabet, remaining)


def _complement(nfa, alphabet, variables, budget):
    det = minimize(nfa, budget)
    det = determinize(det, budget)
    flipped = NFA(det.alphabet, det.states, det.initial, det.states - det.final, det.transitions)
    return minimize(_restrict(flipped, alphabet, variables), budget)


def _compile(phi, alphabet, budget):
    variables = tuple(sorted(L.free_vars(phi)))
    if isinstance(phi, L.Lab):
        if phi.sigma == STAR:
            return _universal(alphabet, variables)
        return _empty(alphabet, variables)
    if isinstance(phi, L.Edge):
        return _atom_edge(phi.gamma, phi.x, phi.y, alphabet, variables)
    if isinstance(phi, L.In):
        return _atom_in(phi.x, phi.X, alphabet, variables)
    if isinstance(phi, L.Not):
        sub = _compile(phi.sub, alphabet, budget)
        sub = _extend(sub, tuple(sorted(L.free_vars(phi.sub))), variables, alphabet)
        return _complement(sub, alphabet, variables, budget)
    if isinstance(phi, (L.Or, L.And)):
        if not phi.items:
            if isinstance(phi, L.And):
                return _universal(alphabet, variables)
            return _empty(alphabet, variables)
        parts = []
        for p in phi.items:
            sub = _compile(p, alphabet, budget)
            parts.append(_extend(sub, tuple(sorted(L.free_vars(p))), variables, alphabet))
        out = parts[0]
        for p in parts[1:]:
            out = nfa_union(out, p) if isinstance(phi, L.Or) else nfa_intersect(out, p)
            if len(out.states) > 64:
                out = minimize(out, budget)
        return out
    if isinstance(phi, L.Exists):
        body_vars = tuple(sorted(L.free_vars(phi.body)))
        sub = _compile(phi.body, alphabet, budget)
        if phi.var not in body_vars:
            return sub  # string graphs are nonempty, the quantifier is idle
        return _project_var(sub, body_vars, phi.var, alphabet)
    if isinstance(phi, L.Forall):
        return _compile(L.Not(L.Exists(phi.var, L.Not(phi.body))), alphabet, budget)
    raise TypeError(f"cannot compile {type(phi).__name__} over string graphs")


def mso_to_nfa(phi, alphabet, budget=DET_BUDGET) -> NFA:
    """Compile a closed formula over ({*}, alphabet) into an NFA over the
    alphabet with nfa_accepts(N, w) = (ed-gr(w) |= phi) for every w."""
    if L.free_vars(phi):
        raise ValueError("mso_to_nfa expects a closed formula")
    alphabet = frozenset(alphabet)
    encoded = _compile(phi, alphabet, budget)
    # strip the mandatory trailing end-marker letter
    final = {q for q, sym, q2 in encoded.transitions if sym[0] == END and q2 in encoded.final}
    transitions = {
        (q, sym[0], q2) for q, sym, q2 in encoded.transitions if sym[0] != END
    }
    return renumber(NFA(alphabet, encoded.states, encoded.initial, final, transitions))


def nfa_to_mso(nfa: NFA) -> L.Formula:
    """The existential state-partition formula of the automaton: guessing
    one state set per state, anchored at the first and last position, and
    locally consistent with the transitions."""
    states = sorted(nfa.states, key=repr)
    var_of = {q: f"Xst{i}" for i, q in enumerate(states)}
    names = [var_of[q] for q in states]
    x, y = "xr", "yr"
    alphabet = sorted(nfa.alphabet, key=label_key)

    def in_any(v, qs):
        return L.Or(tuple(L.In(v, var_of[q]) for q in sorted(qs, key=repr)))

    partition = L.Forall(
        x,
        L.Or(
            tuple(
                L.And(
                    (
                        L.In(x, var_of[q]),
                        L.Not(L.Or(tuple(L.In(x, var_of[p]) for p in states if p != q))),
                    )
                )
                for q in states
            )
        ),
    )
    first = L.Not(L.Exists(y, L.edge_any(alphabet, y, x)))
    last_x = L.Not(L.Exists(y, L.edge_any(alphabet, x, y)))
    initial_clause = L.Forall(x, L.Or((L.Not(first), in_any(x, nfa.initial))))
    final_clause = L.Forall(x, L.Or((L.Not(last_x), in_any(x, nfa.final))))
    per_symbol = []
    for a in alphabet:
        matches = [
            L.And((L.In(x, var_of[q]), L.In(y, var_of[q2])))
            for q, sym, q2 in sorted(nfa.transitions, key=repr)
            if sym == a
        ]
        per_symbol.append(
            L.forall_many(
                [x, y],
                L.Or((L.Not(L.Edge(a, x, y)), L.Or(tuple(matches)))),
            )
        )
    body = L.And((partition, initial_clause, final_clause) + tuple(per_symbol))
    return L.exists_many(names, body)
