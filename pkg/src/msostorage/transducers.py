"""Parameterized duplicate-and-filter graph transformations.

A transducer carries a domain formula over set parameters, a finite set of
duplicate names, node formulas deciding which duplicates of an input node
survive (and with which label), and edge formulas wiring the surviving
duplicates.  Its transduction is made pair-graph-expressible by the
origin construction: input and output side by side, nu-biclique in
between, and one origin edge per output node labeled by its duplicate
name.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import logic as L
from .errors import AlphabetClash, EmptyOutput, NotInDomain, UnboundVariable, VariableClash
from .graphs import NU, Graph, graph_union, label_key, shift_nodes
from .semantics import DEFAULT_BUDGET, evaluate
from .storage import _pair_partition


@dataclass(frozen=True)
class MsoTransducer:
    sigma: frozenset
    gamma: frozenset
    params: tuple  # set-variable names
    chi: L.Formula
    duplicates: tuple  # duplicate names double as origin edge labels
    node_formulas: tuple  # ((sigma, d), formula with free vars in params+{x})
    edge_formulas: tuple  # ((gamma, d, d2), formula with free vars in params+{x, x2})

    def __post_init__(self):
        if not self.duplicates:
            raise ValueError("a transducer needs at least one duplicate name")
        overlap = set(self.duplicates) & (self.gamma | {NU})
        if overlap:
            raise AlphabetClash(f"duplicate names collide with edge labels: {sorted(overlap)}")
        # the conventional free variables may not be shadowed inside the
        # component formulas (the expressibility construction renames them)
        for _, phi in self.node_formulas:
            if L.bound_vars(phi) & {"x"}:
                raise VariableClash("node formulas must not rebind x")
        for _, phi in self.edge_formulas:
            if L.bound_vars(phi) & {"x", "x2"}:
                raise VariableClash("edge formulas must not rebind x or x2")

    def node_formula(self, sigma, d):
        for key, phi in self.node_formulas:
            if key == (sigma, d):
                return phi
        return L.false_()

    def edge_formula(self, gamma, d, d2):
        for key, phi in self.edge_formulas:
            if key == (gamma, d, d2):
                return phi
        return L.false_()


def apply_transducer(t: MsoTransducer, g: Graph, rho=None, budget=DEFAULT_BUDGET) -> Graph:
    """T(g, rho): raises NotInDomain when the domain formula fails and
    EmptyOutput when no duplicate survives (graphs are nonempty)."""
    rho = dict(rho or {})
    missing = set(t.params) - set(rho)
    if missing:
        raise UnboundVariable(", ".join(sorted(missing)))
    if not evaluate(g, rho, t.chi, budget):
        raise NotInDomain("the domain formula rejects the input")

    survivors = {}
    for d in t.duplicates:
        for u in g.nodes:
            labels = [
                sigma
                for sigma in sorted(t.sigma, key=label_key)
                if evaluate(g, {**rho, "x": u}, t.node_formula(sigma, d), budget)
            ]
            if len(labels) == 1:
                survivors[(d, u)] = labels[0]
    if not survivors:
        raise EmptyOutput("the transduction produced no output nodes")

    order = sorted(survivors, key=lambda du: (t.duplicates.index(du[0]), du[1]))
    ids = {du: i for i, du in enumerate(order)}
    labels = {ids[du]: survivors[du] for du in order}
    edges = []
    for d, u in order:
        for d2, u2 in order:
            for gamma in sorted(t.gamma, key=label_key):
                phi = t.edge_formula(gamma, d, d2)
                if evaluate(g, {**rho, "x": u, "x2": u2}, phi, budget):
                    edges.append((ids[(d, u)], gamma, ids[(d2, u2)]))
    return Graph(labels, edges)


def origin_pair(t: MsoTransducer, g: Graph, rho=None, budget=DEFAULT_BUDGET) -> Graph:
    """The canonical pair graph of an application: input and output joined
    by the nu-biclique and one origin edge per output node."""
    out = apply_transducer(t, g, rho, budget)
    rho = dict(rho or {})
    g1_ids = {u: i for i, u in enumerate(sorted(g.nodes))}
    g1 = Graph({g1_ids[u]: g.labels[u] for u in g.nodes},
               [(g1_ids[u], lab, g1_ids[v]) for u, lab, v in g.edges])
    offset = len(g1)
    g2 = shift_nodes(out, offset)
    extra = [(u, NU, v) for u in g1.nodes for v in g2.nodes]
    # recompute the survivor order used by apply_transducer for origins
    survivors = {}
    for d in t.duplicates:
        for u in g.nodes:
            labels = [
                sigma
                for sigma in sorted(t.sigma, key=label_key)
                if evaluate(g, {**rho, "x": u}, t.node_formula(sigma, d), budget)
            ]
            if len(labels) == 1:
                survivors[(d, u)] = labels[0]
    order = sorted(survivors, key=lambda du: (t.duplicates.index(du[0]), du[1]))
    for i, (d, u) in enumerate(order):
        extra.append((g1_ids[u], d, offset + i))
    return graph_union(g1, g2, extra_edges=extra)


def _exactly_one_label(t: MsoTransducer, d, x, X1):
    """Exactly one node formula of duplicate d holds at x (relativized)."""
    sigmas = sorted(t.sigma, key=label_key)

    def variant(sigma):
        phi = L.relativize(t.node_formula(sigma, d), X1)
        return L.map_formula(phi, lambda a: _rename_atom_vars(a, {"x": x}))

    cases = []
    for sigma in sigmas:
        others = [L.Not(variant(s2)) for s2 in sigmas if s2 != sigma]
        cases.append(L.And((variant(sigma),) + tuple(others)))
    return L.Or(tuple(cases))


def expressibility_formula(t: MsoTransducer) -> L.Formula:
    """Closed formula over (Sigma, Gamma + duplicates + nu) whose models
    are exactly the origin pair graphs of the transducer."""
    X1, X2 = "X1", "X2"
    x, y, x2, y2 = "xe", "ye", "xe2", "ye2"
    gammas = sorted(t.gamma, key=label_key)
    dups = sorted(t.duplicates, key=label_key)

    def relativized(phi):
        return L.relativize(phi, X1)

    in1 = lambda v: L.In(v, X1)  # noqa: E731
    in2 = lambda v: L.In(v, X2)  # noqa: E731

    parts = [_pair_partition(X1, X2)]
    for p in t.params:
        parts.append(L.subset(p, X1))

    # no duplicate-labeled edges inside a component, no backward ones, and
    # no configuration edges across the partition
    no_d_within = L.forall_many(
        [x, y],
        L.Or(
            (
                L.Not(L.Or((L.And((in1(x), in1(y))), L.And((in2(x), in2(y))), L.And((in2(x), in1(y)))))),
                L.And(tuple(L.Not(L.Edge(d, x, y)) for d in dups)),
            )
        ),
    )
    no_gamma_cross = L.forall_many(
        [x, y],
        L.Or(
            (
                L.Not(L.Or((L.And((in1(x), in2(y))), L.And((in2(x), in1(y)))))),
                L.And(tuple(L.Not(L.Edge(g, x, y)) for g in gammas)),
            )
        ),
    )
    parts += [no_d_within, no_gamma_cross, relativized(t.chi)]

    # every output node has exactly one origin edge (unique label and source)
    unique_origin = L.forall_many(
        [y],
        L.Or(
            (
                L.Not(in2(y)),
                L.And(
                    (
                        L.Exists(x, L.edge_any(dups, x, y)),
                        L.forall_many(
                            [x, x2],
                            L.And(
                                tuple(
                                    L.Or(
                                        (
                                            L.Not(L.And((L.Edge(d, x, y), L.Edge(d2, x2, y)))),
                                            L.And((L.eq_nodes(x, x2),))
                                            if d == d2
                                            else L.false_(),
                                        )
                                    )
                                    for d in dups
                                    for d2 in dups
                                )
                            ),
                        ),
                    )
                ),
            )
        ),
    )
    # at most one output node per (origin, duplicate)
    functional = L.forall_many(
        [x, y],
        L.And(
            tuple(
                L.Or(
                    (
                        L.Not(L.Edge(d, x, y)),
                        L.forall_many(
                            [y2], L.Or((L.Not(L.Edge(d, x, y2)), L.eq_nodes(y, y2)))
                        ),
                    )
                )
                for d in dups
            )
        ),
    )
    parts += [unique_origin, functional]

    # witness condition: an origin d-edge leaves x iff exactly one node
    # formula of d holds at x
    for d in dups:
        has_edge = L.Exists(y, L.Edge(d, x, y))
        parts.append(
            L.forall_many(
                [x],
                L.Or((L.Not(in1(x)), L.iff(has_edge, _exactly_one_label(t, d, x, X1)))),
            )
        )

    # edge condition between matched output nodes
    edge_conds = []
    for d in dups:
        for d2 in dups:
            inner = []
            for gamma in gammas:
                phi = L.relativize(t.edge_formula(gamma, d, d2), X1)
                phi = L.map_formula(
                    phi,
                    lambda a: _rename_atom_vars(a, {"x": x, "x2": x2}),
                )
                inner.append(L.iff(L.Edge(gamma, y, y2), phi))
            edge_conds.append(
                L.forall_many(
                    [x, y],
                    L.Or(
                        (
                            L.Not(L.Edge(d, x, y)),
                            L.forall_many(
                                [x2, y2],
                                L.Or((L.Not(L.Edge(d2, x2, y2)), L.And(tuple(inner)))),
                            ),
                        )
                    ),
                )
            )
    parts += edge_conds

    # label condition on output nodes
    label_conds = []
    for d in dups:
        inner = []
        for sigma in sorted(t.sigma, key=label_key):
            phi = L.relativize(t.node_formula(sigma, d), X1)
            phi = L.map_formula(phi, lambda a: _rename_atom_vars(a, {"x": x}))
            inner.append(L.iff(L.Lab(sigma, y), phi))
        label_conds.append(
            L.forall_many(
                [x, y], L.Or((L.Not(L.Edge(d, x, y)), L.And(tuple(inner))))
            )
        )
    parts += label_conds

    body = L.exists_many([X1, X2], L.And(tuple(parts)))
    return L.exists_many(list(t.params), body)


def _rename_atom_vars(atom, mapping):
    if isinstance(atom, L.Lab):
        return L.Lab(atom.sigma, mapping.get(atom.x, atom.x))
    if isinstance(atom, L.Edge):
        return L.Edge(atom.gamma, mapping.get(atom.x, atom.x), mapping.get(atom.y, atom.y))
    if isinstance(atom, L.In):
        return L.In(mapping.get(atom.x, atom.x), atom.X)
    return atom


def reverse_pair_formula(phi) -> L.Formula:
    """Swap the argument order of every nu-atom: the models' pair order
    flips, expressing the inverse relation."""

    def on_atom(atom):
        if isinstance(atom, L.Edge) and atom.gamma == NU:
            return L.Edge(NU, atom.y, atom.x)
        return atom

    return L.map_formula(phi, on_atom)


def copy_transducer(sigma, gamma) -> MsoTransducer:
    """The identity transduction: one duplicate keeping labels and edges."""
    sigma = frozenset(sigma)
    gamma = frozenset(gamma)
    nodes = tuple(
        ((s, "dup"), L.Lab(s, "x")) for s in sorted(sigma, key=label_key)
    )
    edges = tuple(
        ((g, "dup", "dup"), L.Edge(g, "x", "x2")) for g in sorted(gamma, key=label_key)
    )
    return MsoTransducer(
        sigma=sigma,
        gamma=gamma,
        params=(),
        chi=L.true_(),
        duplicates=("dup",),
        node_formulas=nodes,
        edge_formulas=edges,
    )


def collapse_transducer(sigma, gamma) -> MsoTransducer:
    """Collapse every input string graph to the single-node graph: only
    the first node survives, no edges."""
    sigma = frozenset(sigma)
    gamma = frozenset(gamma)
    first = L.first_node(sorted(gamma, key=label_key), "x")
    nodes = tuple(((s, "dup"), L.And((L.Lab(s, "x"), first))) for s in sorted(sigma, key=label_key))
    return MsoTransducer(
        sigma=sigma,
        gamma=gamma,
        params=(),
        chi=L.true_(),
        duplicates=("dup",),
        node_formulas=nodes,
        edge_formulas=(),
    )
