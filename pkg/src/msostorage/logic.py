"""MSO formula ASTs, macro builders, free variables, relativization.

Variables are interned names whose case carries the kind: names starting
with a lowercase letter are first-order (node) variables, names starting
with an uppercase letter are second-order (node-set) variables.

The connective core is negation, disjunction, conjunction and the two
existential/universal quantifier pairs; `And(())` and `Or(())` double as
the `true` and `false` constants.  No simplification is ever applied: the
translations in other modules rely on syntactic shape only.  Structural
identity is equality up to consistent renaming of bound variables
(`alpha_equal`).

Two extra atoms (`MemberEq`, `Next`) belong to the two-level logic over a
storage type; the plain graph evaluator rejects them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnknownMacro, VariableClash
from .graphs import EMPTY, label_key


def is_set_var(name: str) -> bool:
    return name[:1].isupper()


def is_node_var(name: str) -> bool:
    return name[:1].islower()


def _check_node_var(name):
    if not is_node_var(name):
        raise VariableClash(f"{name!r} is not a first-order variable name")
    return name


def _check_set_var(name):
    if not is_set_var(name):
        raise VariableClash(f"{name!r} is not a second-order variable name")
    return name


@dataclass(frozen=True)
class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Lab(Formula):
    sigma: object
    x: str


@dataclass(frozen=True)
class Edge(Formula):
    gamma: object
    x: str
    y: str


@dataclass(frozen=True)
class In(Formula):
    x: str
    X: str


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class Or(Formula):
    items: tuple


@dataclass(frozen=True)
class And(Formula):
    items: tuple


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class MemberEq(Formula):
    """Two-level-logic membership: x is in X or shares a component with
    some member of X."""

    x: str
    X: str


@dataclass(frozen=True)
class Next(Formula):
    """Two-level-logic atom: x and y lie in consecutive components whose
    pair graph satisfies the named storage instruction."""

    theta: str
    x: str
    y: str


# ---------------------------------------------------------------- builders

def lab(sigma, x) -> Lab:
    return Lab(sigma, _check_node_var(x))


def edge(gamma, x, y) -> Edge:
    return Edge(gamma, _check_node_var(x), _check_node_var(y))


def member(x, X) -> In:
    return In(_check_node_var(x), _check_set_var(X))


def not_(phi) -> Not:
    return Not(phi)


def or_(*items) -> Or:
    return Or(tuple(items))


def and_(*items) -> And:
    return And(tuple(items))


def true_() -> And:
    return And(())


def false_() -> Or:
    return Or(())


def implies(a, b) -> Or:
    return Or((Not(a), b))


def iff(a, b) -> And:
    return And((Or((Not(a), b)), Or((Not(b), a))))


def exists(var, body) -> Exists:
    if not (is_node_var(var) or is_set_var(var)):
        raise VariableClash(f"bad variable name {var!r}")
    return Exists(var, body)


def forall(var, body) -> Forall:
    if not (is_node_var(var) or is_set_var(var)):
        raise VariableClash(f"bad variable name {var!r}")
    return Forall(var, body)


def exists_many(names, body):
    for name in reversed(list(names)):
        body = exists(name, body)
    return body


def forall_many(names, body):
    for name in reversed(list(names)):
        body = forall(name, body)
    return body


def fresh(prefix, avoid):
    """Deterministic fresh variable name based on `prefix`."""
    if prefix not in avoid:
        return prefix
    k = 0
    while f"{prefix}{k}" in avoid:
        k += 1
    return f"{prefix}{k}"


# ------------------------------------------------------------- inspection

_FREE_CACHE: dict = {}


def free_vars(phi) -> frozenset:
    """The set of free variable names of `phi` (cached per AST object)."""
    cached = _FREE_CACHE.get(id(phi))
    if cached is not None and cached[0] is phi:
        return cached[1]
    if isinstance(phi, Lab):
        fv = frozenset((phi.x,))
    elif isinstance(phi, Edge):
        fv = frozenset((phi.x, phi.y))
    elif isinstance(phi, (In, MemberEq)):
        fv = frozenset((phi.x, phi.X))
    elif isinstance(phi, Next):
        fv = frozenset((phi.x, phi.y))
    elif isinstance(phi, Not):
        fv = free_vars(phi.sub)
    elif isinstance(phi, (Or, And)):
        fv = frozenset().union(*(free_vars(p) for p in phi.items)) if phi.items else frozenset()
    elif isinstance(phi, (Exists, Forall)):
        fv = free_vars(phi.body) - {phi.var}
    else:
        raise TypeError(f"not a formula: {phi!r}")
    _FREE_CACHE[id(phi)] = (phi, fv)
    return fv


def all_vars(phi) -> frozenset:
    """Free and bound variable names occurring anywhere in `phi`."""
    if isinstance(phi, (Lab, Edge, In, MemberEq, Next)):
        return free_vars(phi)
    if isinstance(phi, Not):
        return all_vars(phi.sub)
    if isinstance(phi, (Or, And)):
        return frozenset().union(*(all_vars(p) for p in phi.items)) if phi.items else frozenset()
    if isinstance(phi, (Exists, Forall)):
        return all_vars(phi.body) | {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def bound_vars(phi) -> frozenset:
    """Variable names bound by a quantifier somewhere in `phi`."""
    if isinstance(phi, (Lab, Edge, In, MemberEq, Next)):
        return frozenset()
    if isinstance(phi, Not):
        return bound_vars(phi.sub)
    if isinstance(phi, (Or, And)):
        return frozenset().union(*(bound_vars(p) for p in phi.items)) if phi.items else frozenset()
    if isinstance(phi, (Exists, Forall)):
        return bound_vars(phi.body) | {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def is_closed(phi) -> bool:
    return not free_vars(phi)


def map_formula(phi, atom_fn):
    """Rebuild `phi` with every atom replaced by `atom_fn(atom)`."""
    if isinstance(phi, (Lab, Edge, In, MemberEq, Next)):
        return atom_fn(phi)
    if isinstance(phi, Not):
        return Not(map_formula(phi.sub, atom_fn))
    if isinstance(phi, Or):
        return Or(tuple(map_formula(p, atom_fn) for p in phi.items))
    if isinstance(phi, And):
        return And(tuple(map_formula(p, atom_fn) for p in phi.items))
    if isinstance(phi, Exists):
        return Exists(phi.var, map_formula(phi.body, atom_fn))
    if isinstance(phi, Forall):
        return Forall(phi.var, map_formula(phi.body, atom_fn))
    raise TypeError(f"not a formula: {phi!r}")


def substitute_edge_labels(phi, mapping):
    """Replace edge atoms by label: `mapping[gamma]` is a single label or a
    tuple of labels (the atom becomes the disjunction over them)."""

    def on_atom(atom):
        if isinstance(atom, Edge) and atom.gamma in mapping:
            target = mapping[atom.gamma]
            if isinstance(target, tuple):
                return Or(tuple(Edge(t, atom.x, atom.y) for t in target))
            return Edge(target, atom.x, atom.y)
        return atom

    return map_formula(phi, on_atom)


def alpha_equal(phi, psi) -> bool:
    """Structural equality up to consistent bound-variable renaming."""

    def walk(a, b, env_a, env_b, depth):
        if type(a) is not type(b):
            return False
        if isinstance(a, Lab):
            return a.sigma == b.sigma and env_a.get(a.x, a.x) == env_b.get(b.x, b.x)
        if isinstance(a, Edge):
            return (
                a.gamma == b.gamma
                and env_a.get(a.x, a.x) == env_b.get(b.x, b.x)
                and env_a.get(a.y, a.y) == env_b.get(b.y, b.y)
            )
        if isinstance(a, (In, MemberEq)):
            return env_a.get(a.x, a.x) == env_b.get(b.x, b.x) and env_a.get(
                a.X, a.X
            ) == env_b.get(b.X, b.X)
        if isinstance(a, Next):
            return (
                a.theta == b.theta
                and env_a.get(a.x, a.x) == env_b.get(b.x, b.x)
                and env_a.get(a.y, a.y) == env_b.get(b.y, b.y)
            )
        if isinstance(a, Not):
            return walk(a.sub, b.sub, env_a, env_b, depth)
        if isinstance(a, (Or, And)):
            return len(a.items) == len(b.items) and all(
                walk(p, q, env_a, env_b, depth) for p, q in zip(a.items, b.items)
            )
        if isinstance(a, (Exists, Forall)):
            tag = ("#", depth)
            ea = dict(env_a)
            eb = dict(env_b)
            ea[a.var] = tag
            eb[b.var] = tag
            return walk(a.body, b.body, ea, eb, depth + 1)
        raise TypeError(f"not a formula: {a!r}")

    return walk(phi, psi, {}, {}, 0)


# ----------------------------------------------------------- relativization

def relativize(phi, Y):
    """Restrict all quantifications of `phi` to the set variable `Y`."""
    _check_set_var(Y)
    if Y in all_vars(phi):
        raise VariableClash(f"{Y} already occurs in the formula")

    def walk(p):
        if isinstance(p, (Lab, Edge, In, MemberEq, Next)):
            return p
        if isinstance(p, Not):
            return Not(walk(p.sub))
        if isinstance(p, Or):
            return Or(tuple(walk(q) for q in p.items))
        if isinstance(p, And):
            return And(tuple(walk(q) for q in p.items))
        if isinstance(p, Exists):
            guard = In(p.var, Y) if is_node_var(p.var) else subset(p.var, Y)
            return Exists(p.var, And((guard, walk(p.body))))
        if isinstance(p, Forall):
            guard = In(p.var, Y) if is_node_var(p.var) else subset(p.var, Y)
            return Forall(p.var, Or((Not(guard), walk(p.body))))
        raise TypeError(f"not a formula: {p!r}")

    return walk(phi)


# ----------------------------------------------------------------- macros

def eq_nodes(x, y):
    """Node equality x = y (every set containing x contains y)."""
    Z = fresh("Ze", {x, y})
    return Forall(Z, Or((Not(In(x, Z)), In(y, Z))))


def subset(X, Y):
    z = fresh("zs", {X, Y})
    return Forall(z, Or((Not(In(z, X)), In(z, Y))))


def edge_any(labels, x, y):
    """edge over a label set: disjunction of the per-label atoms."""
    return Or(tuple(Edge(g, x, y) for g in sorted(labels, key=label_key)))


def closed_set(labels, X):
    """X is closed under outgoing edges with a label in `labels`."""
    u = fresh("uc", {X})
    v = fresh("vc", {X})
    return Forall(
        u, Forall(v, Or((Not(And((edge_any(labels, u, v), In(u, X)))), In(v, X))))
    )


def path(labels, x, y):
    """There is a (possibly empty) directed path of `labels`-edges x -> y."""
    X = fresh("Xp", {x, y})
    return Forall(X, Or((Not(And((closed_set(labels, X), In(x, X)))), In(y, X))))


def eq_class(labels, x, y):
    """x and y have equal in- and out-neighbourhoods w.r.t. the labels."""
    z = fresh("zq", {x, y})
    return Forall(
        z,
        And(
            (
                iff(edge_any(labels, z, x), edge_any(labels, z, y)),
                iff(edge_any(labels, x, z), edge_any(labels, y, z)),
            )
        ),
    )


def first_node(labels, x, same=None):
    """x has no incoming `labels`-edge, and every such node equals x
    (`same` customizes the equality, e.g. to component equivalence)."""
    same = same or eq_nodes
    y = fresh("yf", {x})
    z = fresh("zf", {x})
    no_in = lambda w: Not(Exists(y, edge_any(labels, y, w)))  # noqa: E731
    return And((no_in(x), Forall(z, Or((Not(no_in(z)), same(z, x))))))


def last_node(labels, x, same=None):
    same = same or eq_nodes
    y = fresh("yl", {x})
    z = fresh("zl", {x})
    no_out = lambda w: Not(Exists(y, edge_any(labels, w, y)))  # noqa: E731
    return And((no_out(x), Forall(z, Or((Not(no_out(z)), same(z, x))))))


def exclusive(labels, x, y):
    """At most one edge label between x and y."""
    labels = sorted(labels, key=label_key)
    parts = []
    for g in labels:
        rest = [d for d in labels if d != g]
        parts.append(Or((Not(Edge(g, x, y)), Not(Or(tuple(Edge(d, x, y) for d in rest))))))
    return And(tuple(parts))


def union_of(X, Y, Z):
    u = fresh("uu", {X, Y, Z})
    return Forall(u, iff(In(u, Z), Or((In(u, X), In(u, Y)))))


def string_formula(labels, same=None):
    """The set of string graphs over the edge label set `labels`.

    With `same` left as plain node equality this is the literal textbook
    formula (unique first/last node, in/out degree at most one, exclusive
    labels, connectivity).  Passing a component equivalence for `same`
    yields the class-level variant used for link structures; connectivity
    then also accepts nodes of the same class, since a directed path cannot
    move inside a class.
    """
    classwise = same is not None
    same = same or eq_nodes
    x, y, z = "xs", "ys", "zs0"
    succ_le1 = Forall(
        x,
        Forall(
            y,
            Forall(
                z,
                Or((Not(And((edge_any(labels, x, y), edge_any(labels, x, z)))), same(y, z))),
            ),
        ),
    )
    pred_le1 = Forall(
        x,
        Forall(
            y,
            Forall(
                z,
                Or((Not(And((edge_any(labels, y, x), edge_any(labels, z, x)))), same(y, z))),
            ),
        ),
    )
    if classwise:
        reach = lambda a, b: Or((path(labels, a, b), same(a, b)))  # noqa: E731
    else:
        reach = lambda a, b: path(labels, a, b)  # noqa: E731
    connected = Forall(
        x,
        Forall(
            y,
            Forall(
                z,
                Or(
                    (
                        Not(And((first_node(labels, x, same), last_node(labels, z, same)))),
                        And((reach(x, y), reach(y, z))),
                    )
                ),
            ),
        ),
    )
    parts = [
        Exists(x, first_node(labels, x, same)),
        Exists(x, last_node(labels, x, same)),
        succ_le1,
        pred_le1,
        Forall(x, Forall(y, exclusive(labels, x, y))),
        connected,
    ]
    if classwise:
        # every edge is part of a complete single-label biclique between
        # its endpoints' classes; node-level edges then coincide with
        # class-level ones and the clauses above quotient correctly
        x2, y2 = "xs2", "ys2"
        congruence = []
        for g in sorted(labels, key=label_key):
            congruence.append(
                Forall(
                    x,
                    Forall(
                        y,
                        Or(
                            (
                                Not(Edge(g, x, y)),
                                forall_many(
                                    [x2, y2],
                                    Or(
                                        (
                                            Not(And((same(x, x2), same(y, y2)))),
                                            Edge(g, x2, y2),
                                        )
                                    ),
                                ),
                            )
                        ),
                    ),
                )
            )
        parts.append(And(tuple(congruence)))
    return And(tuple(parts))


def describe_graph(g, edge_alphabet):
    """A closed formula whose models (within the given edge alphabet) are
    exactly the graphs isomorphic to `g`."""
    nodes = list(g.nodes)
    names = [f"w{i}" for i in range(len(nodes))]
    of = {u: names[i] for i, u in enumerate(nodes)}
    parts = []
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            parts.append(Not(eq_nodes(names[i], names[j])))
    for u in nodes:
        parts.append(Lab(g.labels[u], of[u]))
    labels = sorted(set(edge_alphabet) | g.edge_alphabet(), key=label_key)
    for u in nodes:
        for v in nodes:
            if u == v:
                continue
            for gamma in labels:
                atom = Edge(gamma, of[u], of[v])
                parts.append(atom if (u, gamma, v) in g.edges else Not(atom))
    z = "zd"
    parts.append(Forall(z, Or(tuple(eq_nodes(z, nm) for nm in names))))
    return exists_many(names, And(tuple(parts)))


def build_macro(name, *args):
    """Macro dispatcher used by the s-expression formats and the CLI."""
    table = {
        "edge-any": lambda labels, x, y: edge_any(labels, x, y),
        "closed": lambda labels, X: closed_set(labels, X),
        "path": lambda labels, x, y: path(labels, x, y),
        "string": lambda labels: string_formula(labels),
        "eq": lambda labels, x, y: eq_class(labels, x, y),
        "ec": lambda labels, x, X: ec_formula(labels, x, X),
        "first": lambda labels, x: first_node(labels, x),
        "last": lambda labels, x: last_node(labels, x),
        "union": lambda X, Y, Z: union_of(X, Y, Z),
        "exclusive": lambda labels, x, y: exclusive(labels, x, y),
        "subset": lambda X, Y: subset(X, Y),
        "eq-nodes": lambda x, y: eq_nodes(x, y),
    }
    if name not in table:
        raise UnknownMacro(name)
    return table[name](*args)


def ec_formula(labels, x, X):
    """X is exactly the equivalence class of x w.r.t. `labels`-edges."""
    y = fresh("ye", {x, X})
    return Forall(y, iff(In(y, X), eq_class(labels, x, y)))


def ae_of(alphabet):
    """The extended input alphabet A + the reserved empty symbol."""
    out = sorted(set(alphabet) | {EMPTY}, key=label_key)
    return tuple(out)
