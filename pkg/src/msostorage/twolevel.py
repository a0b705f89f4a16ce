"""The two-level logic over a storage type and an input alphabet.

Formulas reuse the shared connective AST with three atom forms: link
edges edge_alpha(x,y), component-blind membership x-euro-X (`MemberEq`),
and next(theta,x,y) demanding that x and y sit in consecutive components
whose pair graph satisfies the named instruction.

Evaluation reduces to plain MSO model checking on the component quotient
of the string-like graph: every atom of this logic depends only on the
components of its first-order values and the component profiles of its
set values, so collapsing each component to a single node (tagging the
link edges with the instructions their pair graph satisfies) is exact.

The translations: `embed` into plain MSO on the graph itself, `lift` /
`lower` from and to formulas over the word alphabet of (input, instruction)
pairs, and the automaton pipelines built from them.
"""

from __future__ import annotations

from . import logic as L
from .automata import SAutomaton, from_word_nfa, graph_behaviour, to_word_nfa
from .bet import mso_to_nfa, nfa_to_mso
from .errors import UnboundVariable
from .graphs import EMPTY, NU, STAR, Graph, StringLikeView, label_key
from .semantics import DEFAULT_BUDGET, evaluate

NEXT_TAG = "__next__"


def member_eq(x, X) -> L.MemberEq:
    return L.MemberEq(x, X)


def next_atom(theta, x, y) -> L.Next:
    return L.Next(theta, x, y)


def beh_formula(storage, alphabet) -> L.Formula:
    """Every link edge is covered by some instruction: the graph carries
    a storage behaviour iff this holds."""
    ae = L.ae_of(alphabet)
    x, y = "xh", "yh"
    parts = []
    for alpha in ae:
        parts.append(
            L.Or(
                (
                    L.Not(L.Edge(alpha, x, y)),
                    L.Or(tuple(L.Next(name, x, y) for name in storage.instruction_names)),
                )
            )
        )
    return L.forall_many([x, y], L.And(tuple(parts)))


_PAIR_MATCH_CACHE = {}


def pair_instruction_matches(storage, view: StringLikeView, budget=DEFAULT_BUDGET):
    """For each consecutive pair, the instructions its pair graph
    satisfies.  Exclusiveness is asserted: at most one per pair.

    Results are cached per pair graph: the same configuration pairs recur
    across graphs and across evaluation calls."""
    from .semantics import EvalContext

    matches = []
    for i in range(len(view.components) - 1):
        pair = view.pair_at(i)
        key = (id(storage), pair)
        hit = _PAIR_MATCH_CACHE.get(key)
        if hit is not None and hit[0] is storage:
            names = hit[1]
        else:
            ctx = EvalContext(pair, budget)
            names = tuple(
                name for name, phi in storage.instructions if ctx.satisfies(phi)
            )
            if len(_PAIR_MATCH_CACHE) > 8192:
                _PAIR_MATCH_CACHE.clear()
            _PAIR_MATCH_CACHE[key] = (storage, names)
        assert len(names) <= 1, f"instructions {names} overlap on pair {i}"
        matches.append(names)
    return matches


_QUOTIENT_CACHE = {}


def _quotient(storage, view: StringLikeView, budget):
    key = (id(storage), view)
    hit = _QUOTIENT_CACHE.get(key)
    if hit is not None and hit[0] is storage:
        return hit[1]
    matches = pair_instruction_matches(storage, view, budget)
    n = len(view.components)
    labels = {i: STAR for i in range(n)}
    edges = set()
    for i in range(n - 1):
        edges.add((i, view.trace[i], i + 1))
        for name in matches[i]:
            edges.add((i, (NEXT_TAG, name), i + 1))
    quotient = Graph(labels, edges)
    if len(_QUOTIENT_CACHE) > 4096:
        _QUOTIENT_CACHE.clear()
    _QUOTIENT_CACHE[key] = (storage, quotient)
    return quotient


def _to_quotient_formula(phi):
    def on_atom(atom):
        if isinstance(atom, L.Next):
            return L.Edge((NEXT_TAG, atom.theta), atom.x, atom.y)
        if isinstance(atom, L.MemberEq):
            return L.In(atom.x, atom.X)
        if isinstance(atom, L.Lab):
            raise TypeError("label atoms do not belong to the two-level logic")
        return atom

    return L.map_formula(phi, on_atom)


def eval_sa(storage, view: StringLikeView, rho, phi, budget=DEFAULT_BUDGET) -> bool:
    """Decide (g, rho) |= phi for a two-level formula on a string-like
    view; rho maps node variables to nodes of g and set variables to node
    sets."""
    rho = rho or {}
    missing = L.free_vars(phi) - set(rho)
    if missing:
        raise UnboundVariable(", ".join(sorted(missing)))
    quotient = _quotient(storage, view, budget)
    rho2 = {}
    for var in L.free_vars(phi):
        if L.is_node_var(var):
            rho2[var] = view.component_of(rho[var])
        else:
            rho2[var] = frozenset(view.component_of(u) for u in rho[var])
    return evaluate(quotient, rho2, _to_quotient_formula(phi), budget)


def sa_behaviour_nonempty(storage, view, budget=DEFAULT_BUDGET) -> bool:
    """B(S, g) is nonempty (the direct, formula-free check)."""
    return graph_behaviour(storage, view, budget) is not None


# ------------------------------------------------------------ embedding

def embed(storage, alphabet, phi) -> L.Formula:
    """The two-level formula as a plain MSO formula over the string-like
    graph itself (membership goes through component equivalence, next
    through the relativized instruction formula on the union of the two
    components)."""
    ae = L.ae_of(alphabet)

    def on_atom(atom):
        if isinstance(atom, L.MemberEq):
            y = L.fresh("ym", {atom.x, atom.X})
            return L.Exists(
                y, L.And((L.In(y, atom.X), L.eq_class(ae, atom.x, y)))
            )
        if isinstance(atom, L.Next):
            theta = storage.formula_of(atom.theta)
            tilde = L.substitute_edge_labels(theta, {NU: tuple(ae)})
            used = L.all_vars(tilde) | {atom.x, atom.y}
            X = L.fresh("Xm", used)
            Y = L.fresh("Ym", used | {X})
            Z = L.fresh("Zm", used | {X, Y})
            hypothesis = L.And(
                (
                    L.ec_formula(ae, atom.x, X),
                    L.ec_formula(ae, atom.y, Y),
                    L.union_of(X, Y, Z),
                )
            )
            return L.And(
                (
                    L.edge_any(ae, atom.x, atom.y),
                    L.forall_many(
                        [X, Y, Z],
                        L.Or((L.Not(hypothesis), L.relativize(tilde, Z))),
                    ),
                )
            )
        return atom

    return L.map_formula(phi, on_atom)


# ------------------------------------------------------- lift and lower

def word_alphabet(storage, alphabet):
    """Ae x instruction names, the word alphabet of control runs."""
    ae = L.ae_of(alphabet)
    return tuple(
        (alpha, name)
        for alpha in ae
        for name in storage.instruction_names
    )


def lift(storage, alphabet, phi) -> L.Formula:
    """From a formula over ({*}, Ae x instructions) to the two-level
    logic; label atoms are eliminated first (they are always true on
    string graphs)."""

    def on_atom(atom):
        if isinstance(atom, L.Lab):
            return L.true_() if atom.sigma == STAR else L.false_()
        if isinstance(atom, L.Edge):
            alpha, theta = atom.gamma
            return L.And((L.Edge(alpha, atom.x, atom.y), L.Next(theta, atom.x, atom.y)))
        if isinstance(atom, L.In):
            return L.MemberEq(atom.x, atom.X)
        raise TypeError(f"unexpected atom {atom!r} in a word formula")

    return L.map_formula(phi, on_atom)


def lower(storage, alphabet, phi) -> L.Formula:
    """From the two-level logic to formulas over ({*}, Ae x instructions)."""
    ae = L.ae_of(alphabet)
    names = storage.instruction_names

    def on_atom(atom):
        if isinstance(atom, L.Edge):
            return L.Or(tuple(L.Edge((atom.gamma, name), atom.x, atom.y) for name in names))
        if isinstance(atom, L.Next):
            return L.Or(tuple(L.Edge((alpha, atom.theta), atom.x, atom.y) for alpha in ae))
        if isinstance(atom, L.MemberEq):
            return L.In(atom.x, atom.X)
        raise TypeError(f"unexpected atom {atom!r} in a two-level formula")

    return L.map_formula(phi, on_atom)


# ------------------------------------------------- automaton pipelines

def automaton_to_saformula(m: SAutomaton, storage) -> L.Formula:
    """Two-level formula whose models (under beh) are the graphs the
    automaton accepts.  The word automaton is taken over the full
    product alphabet so that unused (input, instruction) pairs are
    forbidden by the formula."""
    word_nfa = to_word_nfa(m, instruction_names=storage.instruction_names)
    return lift(storage, m.alphabet, nfa_to_mso(word_nfa))


def saformula_to_automaton(phi, storage, alphabet, budget=1 << 14) -> SAutomaton:
    """Automaton whose graph language matches beh-and-phi, built by
    compiling the lowered formula and re-splitting the word transitions."""
    nfa = mso_to_nfa(lower(storage, alphabet, phi), word_alphabet(storage, alphabet), budget)
    return from_word_nfa(nfa, alphabet)
