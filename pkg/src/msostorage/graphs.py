"""Finite labeled directed graphs and their structural views.

Nodes are opaque integers.  Edges are (source, label, target) triples with
set semantics; parallel edges need distinct labels, loops are rejected.
Edge labels are either plain strings or tuples of strings (product
alphabets).  All values are immutable after construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    AlphabetClash,
    AlphabetMismatch,
    DanglingEdge,
    EmptyGraph,
    LoopEdge,
    NotPairGraph,
    NotStringLike,
    SizeLimit,
    UnknownNode,
)

# Reserved symbols.  `NU` is the pair-graph edge label, `EMPTY` stands for
# the empty input string inside extended alphabets, `STAR` is the anonymous
# node label of edge-labeled string graphs.
NU = "nu"
EMPTY = "e"
STAR = "*"


def label_key(label):
    """Sort key that works for str labels and tuple labels alike."""
    if isinstance(label, tuple):
        return (1, tuple(label_key(p) for p in label))
    return (0, str(label))


def edge_key(edge):
    u, lab, v = edge
    return (u, label_key(lab), v)


class Graph:
    """Immutable nonempty loop-free graph with labeled nodes and edges."""

    __slots__ = ("nodes", "labels", "edges", "_hash")

    def __init__(self, labels, edges):
        """`labels`: mapping node id -> node label; `edges`: iterable of
        (source, label, target) triples."""
        labels = dict(labels)
        if not labels:
            raise EmptyGraph("a graph needs at least one node")
        edges = frozenset(tuple(e) for e in edges)
        for u, lab, v in edges:
            if u == v:
                raise LoopEdge(f"loop at node {u}")
            if u not in labels or v not in labels:
                raise DanglingEdge(f"edge ({u},{lab!r},{v}) mentions an undeclared node")
        object.__setattr__(self, "nodes", tuple(sorted(labels)))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    # Equality is concrete (same ids); use iso_equal for abstract graphs.
    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.labels == other.labels and self.edges == other.edges

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((tuple(sorted(self.labels.items())), self.edges))
            object.__setattr__(self, "_hash", h)
        return h

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"Graph({len(self.nodes)} nodes, {len(self.edges)} edges)"

    def node_alphabet(self):
        return frozenset(self.labels.values())

    def edge_alphabet(self):
        return frozenset(lab for _, lab, _ in self.edges)

    def sorted_edges(self):
        return sorted(self.edges, key=edge_key)

    def has_edge(self, u, label, v):
        return (u, label, v) in self.edges

    def out_neighbours(self, u, labels):
        return frozenset(v for (s, lab, v) in self.edges if s == u and lab in labels)

    def in_neighbours(self, u, labels):
        return frozenset(s for (s, lab, v) in self.edges if v == u and lab in labels)


def new_graph(nodes, edges=()):
    """Build a validated graph from [(node, label), ...] and edge triples."""
    labels = {}
    for node, lab in nodes:
        labels[node] = lab
    return Graph(labels, edges)


def induced_subgraph(g: Graph, subset) -> Graph:
    """The subgraph of `g` induced by the node set `subset`."""
    subset = frozenset(subset)
    if not subset:
        raise EmptyGraph("induced subgraph over an empty node set")
    stray = subset - set(g.nodes)
    if stray:
        raise UnknownNode(f"nodes {sorted(stray)} are not in the graph")
    labels = {u: g.labels[u] for u in subset}
    edges = [(u, lab, v) for (u, lab, v) in g.edges if u in subset and v in subset]
    return Graph(labels, edges)


def relabel_edges(g: Graph, delta, gamma) -> Graph:
    """Change every edge label in `delta` into `gamma` (colliding edges
    collapse by set semantics)."""
    delta = frozenset(delta)
    edges = [(u, gamma if lab in delta else lab, v) for (u, lab, v) in g.edges]
    return Graph(dict(g.labels), edges)


def delta_components(g: Graph, delta):
    """Equivalence classes of having equal in/out neighbour sets w.r.t.
    `delta`-edges, as a list of frozensets ordered by smallest node."""
    delta = frozenset(delta)
    sig = {}
    for u in g.nodes:
        sig.setdefault((g.in_neighbours(u, delta), g.out_neighbours(u, delta)), []).append(u)
    classes = [frozenset(members) for members in sig.values()]
    classes.sort(key=min)
    return classes


@dataclass(frozen=True)
class PairView:
    """A pair graph together with its (unique) ordered 2-partition."""

    underlying: Graph
    first: frozenset
    second: frozenset

    def pair(self):
        """The ordered pair of component graphs represented by the view."""
        return (
            induced_subgraph(self.underlying, self.first),
            induced_subgraph(self.underlying, self.second),
        )


def as_pair_view(g: Graph) -> PairView:
    """Decompose `g` as a pair graph, or raise NotPairGraph.

    The partition is recomputed from the nu-edges: sources form the first
    component, targets the second, and the nu-edges must be exactly their
    biclique.
    """
    nu_edges = [(u, v) for (u, lab, v) in g.edges if lab == NU]
    if not nu_edges:
        raise NotPairGraph("no nu-edges")
    first = frozenset(u for u, _ in nu_edges)
    second = frozenset(v for _, v in nu_edges)
    if first & second:
        raise NotPairGraph("a node is both nu-source and nu-target")
    if first | second != set(g.nodes):
        raise NotPairGraph("some node is touched by no nu-edge")
    if len(nu_edges) != len(first) * len(second):
        raise NotPairGraph("nu-edges do not form the full biclique")
    return PairView(g, first, second)


@dataclass(frozen=True)
class StringLikeView:
    """A string-like graph: ordered components linked by Ae-bicliques."""

    underlying: Graph
    components: tuple  # tuple of frozensets, in order
    trace: tuple  # tuple of Ae symbols, len(components) - 1

    def component_graph(self, i) -> Graph:
        return induced_subgraph(self.underlying, self.components[i])

    def pair_at(self, i) -> Graph:
        """The pair graph of components i and i+1 (link edges become nu)."""
        sub = induced_subgraph(
            self.underlying, self.components[i] | self.components[i + 1]
        )
        return relabel_edges(sub, {self.trace[i]}, NU)

    def component_of(self, node):
        for i, comp in enumerate(self.components):
            if node in comp:
                return i
        raise UnknownNode(str(node))


def as_string_like(g: Graph, storage, alphabet) -> StringLikeView:
    """Decompose `g` as a string-like graph over `storage` and `alphabet`.

    `storage` must expose `g_in` (initial configuration graph) and `gamma`
    (configuration edge alphabet).  Raises NotStringLike with a reason code,
    or AlphabetMismatch when g's edge labels fall outside gamma + Ae.
    """
    gamma = frozenset(storage.gamma)
    alphabet = frozenset(alphabet)
    if EMPTY in alphabet or EMPTY in gamma:
        raise AlphabetClash(f"the reserved symbol {EMPTY!r} may not be declared")
    ae = alphabet | {EMPTY}
    if gamma & ae:
        raise AlphabetMismatch(f"gamma and Ae overlap: {sorted(gamma & ae)}")
    stray = g.edge_alphabet() - gamma - ae
    if stray:
        raise AlphabetMismatch(f"edge labels outside gamma and Ae: {sorted(stray, key=label_key)}")

    classes = delta_components(g, ae)
    index = {u: i for i, cls in enumerate(classes) for u in cls}

    # Class-level link structure: between two classes there must be at most
    # one Ae-label, and its edges must form the complete biclique.
    links = {}
    for u, lab, v in g.edges:
        if lab in ae:
            key = (index[u], index[v])
            links.setdefault(key, set()).add(lab)
    succ = {}
    pred = {}
    for (i, j), labs in links.items():
        if len(labs) != 1:
            raise NotStringLike("bad_link_structure", "two link labels between the same components")
        (lab,) = labs
        for u, v in itertools.product(classes[i], classes[j]):
            if (u, lab, v) not in g.edges:
                raise NotStringLike("bad_link_structure", "incomplete link biclique")
        if i in succ or j in pred:
            raise NotStringLike("bad_link_structure", "component with two link neighbours")
        succ[i] = (j, lab)
        pred[j] = i

    if len(links) != len(classes) - 1:
        raise NotStringLike("bad_link_structure", "components are not linearly linked")
    starts = [i for i in range(len(classes)) if i not in pred]
    if len(classes) > 1 and len(starts) != 1:
        raise NotStringLike("bad_link_structure", "no unique first component")
    order = [starts[0]] if classes else []
    trace = []
    while order[-1] in succ:
        j, lab = succ[order[-1]]
        order.append(j)
        trace.append(lab)
    if len(order) != len(classes):
        raise NotStringLike("bad_link_structure", "link structure is not a single chain")

    position = {ci: pos for pos, ci in enumerate(order)}
    for u, lab, v in g.edges:
        if lab in gamma:
            pi, pj = position[index[u]], position[index[v]]
            if not (pi == pj or pj == pi + 1):
                raise NotStringLike("stray_gamma_edge", f"gamma edge from component {pi} to {pj}")

    first_component = induced_subgraph(g, classes[order[0]])
    if not iso_equal(first_component, storage.g_in):
        raise NotStringLike("wrong_first_component", "first component differs from g_in")

    return StringLikeView(
        underlying=g,
        components=tuple(classes[ci] for ci in order),
        trace=tuple(trace),
    )


def string_graph(word, mode="edge") -> Graph:
    """Unique graph representation of a string.

    mode='edge': n+1 star-labeled nodes, edges carry the symbols (ed-gr).
    mode='node': n nodes labeled by the symbols, star-labeled edges (nd-gr);
    rejects the empty word.
    """
    word = tuple(word)
    if mode == "edge":
        labels = {i: STAR for i in range(len(word) + 1)}
        edges = [(i, word[i], i + 1) for i in range(len(word))]
        return Graph(labels, edges)
    if mode == "node":
        if not word:
            raise EmptyGraph("nd-gr of the empty string")
        labels = {i: word[i] for i in range(len(word))}
        edges = [(i, STAR, i + 1) for i in range(len(word) - 1)]
        return Graph(labels, edges)
    raise ValueError(f"unknown string graph mode {mode!r}")


def ed_gr(word) -> Graph:
    return string_graph(word, "edge")


def nd_gr(word) -> Graph:
    return string_graph(word, "node")


def _degree_signature(g: Graph, u):
    out = {}
    inn = {}
    for s, lab, v in g.edges:
        if s == u:
            out[lab] = out.get(lab, 0) + 1
        if v == u:
            inn[lab] = inn.get(lab, 0) + 1
    return (
        g.labels[u],
        tuple(sorted(out.items(), key=lambda kv: label_key(kv[0]))),
        tuple(sorted(inn.items(), key=lambda kv: label_key(kv[0]))),
    )


def iso_equal(g1: Graph, g2: Graph, node_limit=24) -> bool:
    """Label-respecting graph isomorphism via backtracking.

    Meant for the small graphs of this library; raises SizeLimit beyond
    `node_limit` nodes.
    """
    if max(len(g1), len(g2)) > node_limit:
        raise SizeLimit(f"isomorphism check beyond {node_limit} nodes")
    if len(g1) != len(g2) or len(g1.edges) != len(g2.edges):
        return False
    sig1 = {u: _degree_signature(g1, u) for u in g1.nodes}
    sig2 = {u: _degree_signature(g2, u) for u in g2.nodes}
    if sorted(sig1.values()) != sorted(sig2.values()):
        return False

    candidates = {u: [v for v in g2.nodes if sig2[v] == sig1[u]] for u in g1.nodes}
    order = sorted(g1.nodes, key=lambda u: len(candidates[u]))
    mapping = {}
    used = set()

    adj1 = {}
    for s, lab, v in g1.edges:
        adj1.setdefault(s, []).append((lab, v, True))
        adj1.setdefault(v, []).append((lab, s, False))

    def consistent(u, w):
        for lab, other, outgoing in adj1.get(u, ()):
            if other in mapping:
                if outgoing and (w, lab, mapping[other]) not in g2.edges:
                    return False
                if not outgoing and (mapping[other], lab, w) not in g2.edges:
                    return False
        return True

    def backtrack(k):
        if k == len(order):
            return True
        u = order[k]
        for w in candidates[u]:
            if w in used or not consistent(u, w):
                continue
            mapping[u] = w
            used.add(w)
            if backtrack(k + 1):
                return True
            del mapping[u]
            used.discard(w)
        return False

    return backtrack(0)


def shift_nodes(g: Graph, offset) -> Graph:
    """Same graph with every node id shifted by `offset`."""
    labels = {u + offset: lab for u, lab in g.labels.items()}
    edges = [(u + offset, lab, v + offset) for (u, lab, v) in g.edges]
    return Graph(labels, edges)


def graph_union(*graphs, extra_edges=()) -> Graph:
    """Union of graphs with disjoint node id sets, plus extra edges."""
    labels = {}
    for g in graphs:
        for u, lab in g.labels.items():
            if u in labels:
                raise ValueError(f"node id {u} occurs in two graphs")
            labels[u] = lab
    edges = [e for g in graphs for e in g.edges]
    edges.extend(extra_edges)
    return Graph(labels, edges)


def dedupe_up_to_iso(graphs, node_limit=24):
    """Keep one representative per isomorphism class (order-preserving)."""
    buckets = {}
    out = []
    for g in graphs:
        key = (
            len(g),
            len(g.edges),
            tuple(sorted((str(_degree_signature(g, u)) for u in g.nodes))),
        )
        reps = buckets.setdefault(key, [])
        if not any(iso_equal(g, r, node_limit) for r in reps):
            reps.append(g)
            out.append(g)
    return out
