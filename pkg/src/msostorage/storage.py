"""Storage types: executable (native) and formula-defined (MSO).

A native storage supplies an initial configuration, a step relation per
instruction, a graph rendering of configurations, and witness pair graphs
realizing its steps.  An MSO storage is a triple (configuration formula,
initial graph, named instruction formulas); each instruction formula
defines a set of pair graphs, and the induced relation is membership of
the assembled pair graph in that set for some choice of intermediate
edges.

Pair-relation membership, successor images, and exclusiveness are decided
exactly by grounding the instruction formulas over structures whose
intermediate edges (and, where needed, whole components) are symbolic
choice bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import logic as L
from .bdd import FALSE, Bdd
from .errors import AlphabetClash, NotASuccessor, SizeLimit
from .graphs import (
    EMPTY,
    NU,
    STAR,
    Graph,
    dedupe_up_to_iso,
    graph_union,
    induced_subgraph,
    iso_equal,
    label_key,
    new_graph,
    shift_nodes,
)
from .semantics import DEFAULT_BUDGET, Grounder, StructureBuilder, evaluate

RESET_LABEL = "__reset"
IDENTITY_LABEL = "__id"

TRIV_INSTRUCTION = "stay"
TRIV_CONFIG = "c"


class NativeStorage:
    """Executable storage type with graph renderings of configurations."""

    def __init__(self, name, initial, instructions, step, render, witness_pair):
        self.name = name
        self.initial = initial
        self.instructions = tuple(instructions)
        self._step = step
        self._render = render
        self._witness = witness_pair

    def step(self, config, instruction):
        if instruction not in self.instructions:
            raise KeyError(f"{self.name} has no instruction {instruction!r}")
        return frozenset(self._step(config, instruction))

    def render(self, config) -> Graph:
        """Graph encoding of a configuration; nodes are 0..n-1 in the
        configuration's canonical order."""
        return self._render(config)

    def witness_pair(self, config, instruction, successor) -> Graph:
        """A pair graph realizing the step, intermediate edges included.
        First-component nodes are 0..n1-1 (matching render(config)), the
        second component follows shifted by n1."""
        if successor not in self.step(config, instruction):
            raise NotASuccessor(f"{instruction}: {successor!r} not reachable from {config!r}")
        return self._witness(config, instruction, successor)

    def reachable(self, max_steps, config_budget=100_000):
        """All configurations reachable from the initial one in <= max_steps."""
        seen = {self.initial}
        frontier = [self.initial]
        for _ in range(max_steps):
            nxt = []
            for c in frontier:
                for theta in self.instructions:
                    for c2 in sorted(self.step(c, theta), key=repr):
                        if c2 not in seen:
                            seen.add(c2)
                            nxt.append(c2)
                            if len(seen) > config_budget:
                                raise SizeLimit("reachable configuration budget exceeded")
            frontier = nxt
        return seen


@dataclass(frozen=True)
class MsoStorage:
    """Storage type given by formulas: configurations are the models of
    `phi_c`, instructions are named closed pair-graph formulas."""

    name: str
    sigma: frozenset
    gamma: frozenset
    phi_c: L.Formula
    g_in: Graph
    instructions: tuple  # ordered tuple of (name, closed Formula)

    def __post_init__(self):
        if NU in self.gamma:
            raise AlphabetClash(f"{NU!r} is reserved for pair graphs")
        if EMPTY in self.gamma or EMPTY in self.sigma:
            raise AlphabetClash(f"{EMPTY!r} is reserved for empty input")
        if not evaluate(self.g_in, {}, self.phi_c):
            raise ValueError(f"{self.name}: g_in does not satisfy phi_c")

    @property
    def instruction_names(self):
        return tuple(name for name, _ in self.instructions)

    def formula_of(self, name) -> L.Formula:
        for n, phi in self.instructions:
            if n == name:
                return phi
        raise KeyError(f"{self.name} has no instruction {name!r}")


# ------------------------------------------------------------------ TRIV

def _triv_pair_graph():
    return new_graph([(0, STAR), (1, STAR)], [(0, NU, 1)])


def triv_native() -> NativeStorage:
    g_in = new_graph([(0, STAR)])

    def step(config, instruction):
        return {TRIV_CONFIG}

    def render(config):
        return g_in

    def witness(config, instruction, successor):
        return _triv_pair_graph()

    return NativeStorage("triv", TRIV_CONFIG, (TRIV_INSTRUCTION,), step, render, witness)


def triv_mso() -> MsoStorage:
    g_in = new_graph([(0, STAR)])
    theta = L.describe_graph(_triv_pair_graph(), {NU})
    return MsoStorage(
        name="TRIV",
        sigma=frozenset({STAR}),
        gamma=frozenset(),
        phi_c=L.describe_graph(g_in, set()),
        g_in=g_in,
        instructions=((TRIV_INSTRUCTION, theta),),
    )


# ------------------------------------------------------------- behaviours

def behaviours(storage: NativeStorage, n, config_budget=50_000):
    """B(S) restricted to instruction strings of length <= n."""
    seen_configs = set()
    out = set()

    def visit(prefix, configs):
        out.add(prefix)
        if len(prefix) == n:
            return
        for theta in storage.instructions:
            nxt = set()
            for c in configs:
                nxt |= storage.step(c, theta)
            seen_configs.update(nxt)
            if len(seen_configs) > config_budget:
                raise SizeLimit("behaviour search exceeded the configuration budget")
            if nxt:
                visit(prefix + (theta,), frozenset(nxt))

    visit((), frozenset({storage.initial}))
    return out


# ----------------------------------------------- symbolic pair structures

@dataclass(frozen=True)
class SkeletonSide:
    """A component with fixed internal edges but symbolic node labels.

    Complete for searches whose target formulas pin the component shape
    anyway (satisfaction is isomorphism-invariant, so fixing a node order
    along the skeleton loses no models up to isomorphism)."""

    n: int
    sigma: tuple
    edges: tuple  # (i, label, j) over local indices 0..n-1


def chain_side(n, sigma, chain_label) -> SkeletonSide:
    return SkeletonSide(
        n, tuple(sorted(sigma, key=label_key)), tuple((i, chain_label, i + 1) for i in range(n - 1))
    )


def _build_side(sb, spec, sigma, gamma):
    """Add one pair-graph component: a concrete Graph, a SkeletonSide, or
    an int node count with fully symbolic labels and internal edges."""
    if isinstance(spec, Graph):
        index = sb.add_graph(spec)
        return [index[u] for u in sorted(spec.nodes)]
    if isinstance(spec, SkeletonSide):
        ids = [sb.add_node(choices=spec.sigma) for _ in range(spec.n)]
        for i, lab, j in spec.edges:
            sb.add_edge(ids[i], lab, ids[j])
        return ids
    count = int(spec)
    sigma = sorted(sigma, key=label_key)
    ids = [sb.add_node(choices=sigma) for _ in range(count)]
    for u in ids:
        for v in ids:
            if u != v:
                for lab in sorted(gamma, key=label_key):
                    sb.add_edge_var(u, lab, v)
    return ids


def pair_structure(bdd, first, second, sigma, gamma, delta, backward=False):
    """Structure holding a would-be pair graph: two components (concrete
    graphs or symbolic node counts), the nu-biclique, and symbolic forward
    intermediate `delta`-edges (plus backward ones when requested)."""
    sb = StructureBuilder(bdd)
    ids1 = _build_side(sb, first, sigma, gamma)
    ids2 = _build_side(sb, second, sigma, gamma)
    for u in ids1:
        for v in ids2:
            sb.add_edge(u, NU, v)
    for u in ids1:
        for lab in sorted(delta, key=label_key):
            for v in ids2:
                sb.add_edge_var(u, lab, v)
    if backward:
        for u in ids2:
            for lab in sorted(delta, key=label_key):
                for v in ids1:
                    sb.add_edge_var(u, lab, v)
    return sb.finish(), ids1, ids2


def _decoded_components(structure, model, ids1, ids2):
    g = structure.decode_model(model)
    return (
        induced_subgraph(g, ids1),
        induced_subgraph(g, ids2),
    )


def mso_member(storage: MsoStorage, name, g1: Graph, g2: Graph, delta=None, budget=DEFAULT_BUDGET):
    """Decide (g1, g2) in rel(L(theta)): is there a choice of forward
    intermediate `delta`-edges making the assembled pair graph satisfy the
    instruction formula?"""
    return mso_member_many(storage, g1, g2, names=(name,), delta=delta, budget=budget)[name]


def mso_member_many(storage: MsoStorage, g1: Graph, g2: Graph, names=None, delta=None, budget=DEFAULT_BUDGET):
    """mso_member for several instructions on one pair of graphs, sharing
    the structure and the grounding of common subformulas."""
    delta = storage.gamma if delta is None else frozenset(delta)
    names = storage.instruction_names if names is None else tuple(names)
    bdd = Bdd(budget)
    structure, _, _ = pair_structure(bdd, g1, g2, storage.sigma, storage.gamma, delta)
    grounder = Grounder(structure, bdd)
    return {
        name: grounder.ground(storage.formula_of(name), {}) != FALSE for name in names
    }


def mso_witness(storage: MsoStorage, name, g1: Graph, g2: Graph, delta=None, budget=DEFAULT_BUDGET):
    """Like mso_member but returns a satisfying pair graph (or None)."""
    phi = storage.formula_of(name)
    delta = storage.gamma if delta is None else frozenset(delta)
    bdd = Bdd(budget)
    structure, _, _ = pair_structure(bdd, g1, g2, storage.sigma, storage.gamma, delta)
    result = Grounder(structure, bdd).ground(phi, {})
    if result == FALSE:
        return None
    model = next(bdd.iter_models(result, structure.choice_bits))
    return structure.decode_model(model)


def mso_successors(storage: MsoStorage, g1: Graph, k, delta=None, budget=DEFAULT_BUDGET):
    """All (instruction name, successor graph) with successors of <= k
    nodes satisfying phi_c, up to isomorphism.  The successor side is
    solved symbolically over all labeled graphs of each node count."""
    delta = storage.gamma if delta is None else frozenset(delta)
    found = {name: [] for name in storage.instruction_names}
    phi_c_rel = L.relativize(storage.phi_c, "Xsucc")
    for n2 in range(1, k + 1):
        bdd = Bdd(budget)
        structure, ids1, ids2 = pair_structure(
            bdd, g1, n2, storage.sigma, storage.gamma, delta
        )
        grounder = Grounder(structure, bdd)
        env_succ = {"Xsucc": frozenset(ids2)}
        for name, phi in storage.instructions:
            # the instruction template pins most of the successor side;
            # the configuration filter is threaded afterwards
            result = grounder.ground_with(phi, {}, structure.background)
            result = grounder.ground_with(phi_c_rel, env_succ, result)
            for model in bdd.iter_models(result, structure.choice_bits):
                found[name].append(_decoded_components(structure, model, ids1, ids2)[1])
    out = []
    for name in storage.instruction_names:
        for g2 in dedupe_up_to_iso(found[name]):
            out.append((name, g2))
    return out


def instruction_relation(storage: MsoStorage, name, side1, side2, delta=None, budget=DEFAULT_BUDGET, grounders=None):
    """rel(L(theta)) restricted to the given component spaces: the exact
    set of labeled pairs.  Sides are concrete graphs, SkeletonSides, or
    int node counts (fully symbolic).  Pass a shared `grounders` dict to
    reuse the structure across instructions."""
    delta = storage.gamma if delta is None else frozenset(delta)
    if grounders is None:
        grounders = {}
    key = (side1, side2)
    if key not in grounders:
        bdd = Bdd(budget)
        structure, ids1, ids2 = pair_structure(bdd, side1, side2, storage.sigma, storage.gamma, delta)
        grounders[key] = (Grounder(structure, bdd), structure, ids1, ids2)
    grounder, structure, ids1, ids2 = grounders[key]
    bdd = grounder.bdd
    result = grounder.ground_with(storage.formula_of(name), {}, structure.background)
    pairs = []
    for model in bdd.iter_models(result, structure.choice_bits):
        pairs.append(_decoded_components(structure, model, ids1, ids2))
    return pairs


# ------------------------------------------------------------ enrichment

def _no_edges_with(label):
    return L.forall_many(
        ["xn", "yn"], L.Not(L.Edge(label, "xn", "yn"))
    )


def _pair_partition(X1, X2):
    x, y = "xp", "yp"
    one_side = L.forall_many(
        [x],
        L.Or(
            (
                L.And((L.In(x, X1), L.Not(L.In(x, X2)))),
                L.And((L.In(x, X2), L.Not(L.In(x, X1)))),
            )
        ),
    )
    biclique = L.forall_many(
        [x, y],
        L.iff(L.Edge(NU, x, y), L.And((L.In(x, X1), L.In(y, X2)))),
    )
    return L.And(
        (
            one_side,
            L.Exists(x, L.In(x, X1)),
            L.Exists(x, L.In(x, X2)),
            biclique,
        )
    )


def pair_graph_formula():
    """Closed formula satisfied exactly by pair graphs."""
    return L.exists_many(["X1", "X2"], _pair_partition("X1", "X2"))


def _cross_clause(X1, X2, forward_required=(), forward_forbidden=(), backward_forbidden=()):
    """Constrain edges between the two components of a pair graph."""
    x, y = "xc", "yc"
    fwd = [L.Edge(lab, x, y) for lab in forward_required]
    fwd += [L.Not(L.Edge(lab, x, y)) for lab in forward_forbidden]
    bwd = [L.Not(L.Edge(lab, x, y)) for lab in backward_forbidden]
    parts = []
    if fwd:
        parts.append(
            L.forall_many(
                [x, y],
                L.Or((L.Not(L.And((L.In(x, X1), L.In(y, X2)))), L.And(tuple(fwd)))),
            )
        )
    if bwd:
        parts.append(
            L.forall_many(
                [x, y],
                L.Or((L.Not(L.And((L.In(x, X2), L.In(y, X1)))), L.And(tuple(bwd)))),
            )
        )
    return L.And(tuple(parts))


def same_label_formula(sigma, x, y):
    return L.And(
        tuple(L.iff(L.Lab(s, x), L.Lab(s, y)) for s in sorted(sigma, key=label_key))
    )


def bijection_iso_formula(d_label, X1, X2, edge_labels, sigma=None, domain_cond=None, range_cond=None):
    """d-edges from X1 to X2 form a bijection between the `domain_cond`
    nodes of X1 and the `range_cond` nodes of X2, and that bijection is an
    isomorphism w.r.t. `edge_labels` (and node labels when `sigma` is
    given)."""
    x, y, x2, y2 = "xb", "yb", "xb2", "yb2"
    dom = domain_cond or (lambda v: L.true_())
    rng = range_cond or (lambda v: L.true_())
    has_d = lambda u: L.Exists("zb", L.And((L.In("zb", X2), L.Edge(d_label, u, "zb"))))  # noqa: E731
    is_hit = lambda v: L.Exists("zb", L.And((L.In("zb", X1), L.Edge(d_label, "zb", v))))  # noqa: E731
    parts = [
        # X1-nodes carry a d-edge iff they satisfy the domain condition
        L.forall_many(
            [x], L.Or((L.Not(L.In(x, X1)), L.iff(has_d(x), dom(x))))
        ),
        # X2-nodes are hit iff they satisfy the range condition
        L.forall_many(
            [y], L.Or((L.Not(L.In(y, X2)), L.iff(is_hit(y), rng(y))))
        ),
        # functional
        L.forall_many(
            [x, y],
            L.Or(
                (
                    L.Not(L.Edge(d_label, x, y)),
                    L.forall_many(
                        [y2],
                        L.Or((L.Not(L.Edge(d_label, x, y2)), L.eq_nodes(y, y2))),
                    ),
                )
            ),
        ),
        # injective
        L.forall_many(
            [x, y],
            L.Or(
                (
                    L.Not(L.Edge(d_label, x, y)),
                    L.forall_many(
                        [x2],
                        L.Or((L.Not(L.Edge(d_label, x2, y)), L.eq_nodes(x, x2))),
                    ),
                )
            ),
        ),
    ]
    iso_parts = tuple(
        L.iff(L.Edge(lab, x, x2), L.Edge(lab, y, y2))
        for lab in sorted(edge_labels, key=label_key)
    )
    parts.append(
        L.forall_many(
            [x, y],
            L.Or(
                (
                    L.Not(L.Edge(d_label, x, y)),
                    L.forall_many(
                        [x2, y2],
                        L.Or((L.Not(L.Edge(d_label, x2, y2)), L.And(iso_parts))),
                    ),
                )
            ),
        )
    )
    if sigma is not None:
        parts.append(
            L.forall_many(
                [x, y],
                L.Or((L.Not(L.Edge(d_label, x, y)), same_label_formula(sigma, x, y))),
            )
        )
    return L.And(tuple(parts))


def enrich(storage: MsoStorage, which) -> MsoStorage:
    """Add a reset or identity instruction, with a fresh dummy edge label
    guaranteeing exclusiveness.  Existing formulas are adapted to forbid
    the new label, which keeps their relations unchanged."""
    if which == "reset":
        label, name = RESET_LABEL, "__reset"
    elif which == "identity":
        label, name = IDENTITY_LABEL, "__id"
    else:
        raise ValueError(f"enrich expects 'reset' or 'identity', got {which!r}")
    if label in storage.gamma:
        raise AlphabetClash(f"{label!r} already present")

    no_new = _no_edges_with(label)
    phi_c = L.And((storage.phi_c, no_new))
    old = tuple((n, L.And((phi, no_new))) for n, phi in storage.instructions)

    X1, X2 = "X1", "X2"
    common = [
        _pair_partition(X1, X2),
        L.relativize(phi_c, X1),
    ]
    if which == "reset":
        common.append(L.relativize(L.And((L.describe_graph(storage.g_in, storage.gamma), no_new)), X2))
        cross = _cross_clause(
            X1,
            X2,
            forward_required=(label,),
            forward_forbidden=tuple(sorted(storage.gamma, key=label_key)),
            backward_forbidden=tuple(sorted(storage.gamma | {label}, key=label_key)),
        )
        common.append(cross)
    else:
        common.append(L.relativize(phi_c, X2))
        cross = _cross_clause(
            X1,
            X2,
            forward_forbidden=tuple(sorted(storage.gamma, key=label_key)),
            backward_forbidden=tuple(sorted(storage.gamma | {label}, key=label_key)),
        )
        common.append(cross)
        common.append(
            bijection_iso_formula(label, X1, X2, storage.gamma, sigma=storage.sigma)
        )
    theta = L.exists_many([X1, X2], L.And(tuple(common)))

    return MsoStorage(
        name=f"{storage.name}+{which}",
        sigma=storage.sigma,
        gamma=storage.gamma | {label},
        phi_c=phi_c,
        g_in=storage.g_in,
        instructions=old + ((name, theta),),
    )


def enrich_native(storage: NativeStorage, which) -> NativeStorage:
    """Native twin of `enrich`: executable reset/identity instruction."""
    if which == "reset":
        label, name = RESET_LABEL, "__reset"
    elif which == "identity":
        label, name = IDENTITY_LABEL, "__id"
    else:
        raise ValueError(f"enrich_native expects 'reset' or 'identity', got {which!r}")

    def step(config, instruction):
        if instruction == name:
            if which == "reset":
                return {storage.initial}
            return {config}
        return storage.step(config, instruction)

    def witness(config, instruction, successor):
        if instruction != name:
            return storage.witness_pair(config, instruction, successor)
        g1 = storage.render(config)
        g2 = shift_nodes(storage.render(successor), len(g1))
        extra = [(u, NU, v) for u in g1.nodes for v in g2.nodes]
        if which == "reset":
            extra += [(u, label, v) for u in g1.nodes for v in g2.nodes]
        else:
            extra += [(u, label, u + len(g1)) for u in g1.nodes]
        return graph_union(g1, g2, extra_edges=extra)

    return NativeStorage(
        f"{storage.name}+{which}",
        storage.initial,
        storage.instructions + (name,),
        step,
        storage.render,
        witness,
    )


# --------------------------------------------------------- exclusiveness

@dataclass(frozen=True)
class ExclusiveReport:
    ok: bool
    clash: tuple = None  # (name1, name2)
    witness: Graph = None


def check_exclusive(storage: MsoStorage, k, budget=DEFAULT_BUDGET) -> ExclusiveReport:
    """Search pair graphs with <= k nodes satisfying two distinct
    instruction formulas; exact over all (labeled) pair graphs within the
    bound, via symbolic components and intermediate edges."""
    names = storage.instruction_names
    for n1 in range(1, k):
        for n2 in range(1, k - n1 + 1):
            bdd = Bdd(budget)
            structure, ids1, ids2 = pair_structure(
                bdd, n1, n2, storage.sigma, storage.gamma, storage.gamma, backward=True
            )
            grounder = Grounder(structure, bdd)
            grounded = {}
            for name in names:
                node = grounder.ground(storage.formula_of(name), {})
                node = bdd.apply_and(node, structure.background)
                if node != FALSE:
                    grounded[name] = node
            items = sorted(grounded)
            for i, a in enumerate(items):
                for b in items[i + 1:]:
                    both = bdd.apply_and(grounded[a], grounded[b])
                    if both != FALSE:
                        model = next(bdd.iter_models(both, structure.choice_bits))
                        return ExclusiveReport(False, (a, b), structure.decode_model(model))
    return ExclusiveReport(True)


def check_instructions_are_pair_graphs(storage: MsoStorage, k, budget=DEFAULT_BUDGET):
    """Bounded check that every model of every instruction formula is a
    pair graph (searches fully symbolic graphs over Sigma and
    Gamma + nu with <= k nodes for a violation)."""
    pairness = pair_graph_formula()
    labels = sorted(storage.gamma | {NU}, key=label_key)
    sigma = sorted(storage.sigma, key=label_key)
    for n in range(2, k + 1):
        bdd = Bdd(budget)
        sb = StructureBuilder(bdd)
        ids = [sb.add_node(choices=sigma) for _ in range(n)]
        for u in ids:
            for v in ids:
                if u != v:
                    for lab in labels:
                        sb.add_edge_var(u, lab, v)
        structure = sb.finish()
        grounder = Grounder(structure, bdd)
        not_pair = bdd.apply_not(grounder.ground(pairness, {}))
        for name, phi in storage.instructions:
            bad = bdd.apply_and(grounder.ground(phi, {}), not_pair)
            bad = bdd.apply_and(bad, structure.background)
            if bad != FALSE:
                model = next(bdd.iter_models(bad, structure.choice_bits))
                return (name, structure.decode_model(model))
    return None
