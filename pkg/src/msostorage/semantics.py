"""Exact MSO model checking by grounding formulas to BDDs.

A `Structure` is a fixed universe of node indices whose labels and edges
are either concrete booleans or fresh BDD variables ("choice bits").  The
`Grounder` compiles a formula over such a structure into a BDD:

* first-order quantifiers enumerate the universe (restricted to a concrete
  guard set when the body starts with the membership guard emitted by
  relativization);
* second-order quantifiers become blocks of BDD bits; a prefix of guard
  conjuncts whose support stays within the bound block is solved by model
  enumeration when it pins the bound sets down to a few candidates (this
  covers the pair-partition, equivalence-class, union and first-component
  patterns of the library's formula templates), and falls back to symbolic
  block elimination otherwise.

With a fully concrete structure the result is a truth value; with choice
bits it is the exact model set over those bits, which the storage layer
uses for pair-relation membership, successor images, model enumeration,
and exclusiveness checking.
"""

from __future__ import annotations

from .bdd import FALSE, TRUE, Bdd
from .errors import UnboundVariable, UnknownNode
from .graphs import Graph
from . import logic as L

DEFAULT_BUDGET = 2_000_000
SUBST_LIMIT = 128


class SetBlock:
    """A second-order variable grounded as one BDD bit per node."""

    __slots__ = ("sid", "bits")

    def __init__(self, sid, bits):
        self.sid = sid
        self.bits = tuple(bits)

    def __repr__(self):
        return f"SetBlock({self.sid})"


class Structure:
    """Universe of n node indices with concrete-or-symbolic labels/edges."""

    def __init__(self, n, lab_lits, edge_lits, label_choices, edge_choices, background, node_ids=None):
        self.n = n
        self._lab = lab_lits              # (u, sigma) -> True | varidx  (absent -> False)
        self._edge = edge_lits            # (u, gamma, v) -> True | varidx (absent -> False)
        self.label_choices = label_choices  # u -> tuple of (sigma, varidx)
        self.edge_choices = edge_choices    # tuple of ((u, gamma, v), varidx)
        self.background = background        # BDD node (one-hot label constraints)
        self.node_ids = node_ids or tuple(range(n))

    def lab_lit(self, u, sigma):
        return self._lab.get((u, sigma), False)

    def edge_lit(self, u, gamma, v):
        return self._edge.get((u, gamma, v), False)

    @property
    def choice_bits(self):
        bits = [var for _, var in self.edge_choices]
        for u, pairs in self.label_choices.items():
            bits.extend(var for _, var in pairs)
        return bits

    def decode_model(self, model) -> Graph:
        """Turn an assignment of the choice bits into a concrete graph."""
        labels = {}
        for (u, sigma), lit in self._lab.items():
            if lit is True:
                labels[u] = sigma
        for u, pairs in self.label_choices.items():
            chosen = [sigma for sigma, var in pairs if model[var]]
            labels[u] = chosen[0]
        edges = []
        for (u, gamma, v), lit in self._edge.items():
            if lit is True:
                edges.append((u, gamma, v))
            elif model.get(lit):
                edges.append((u, gamma, v))
        return Graph(labels, edges)


class StructureBuilder:
    def __init__(self, bdd: Bdd):
        self.bdd = bdd
        self._labels = {}
        self._edges = {}
        self._label_choices = {}
        self._edge_choices = []
        self._n = 0

    def add_node(self, label=None, choices=None):
        u = self._n
        self._n += 1
        if label is not None:
            self._labels[(u, label)] = True
        else:
            pairs = tuple((sigma, self.bdd.new_var()) for sigma in choices)
            self._label_choices[u] = pairs
            for sigma, var in pairs:
                self._labels[(u, sigma)] = var
        return u

    def add_graph(self, g: Graph):
        """Embed a concrete graph; returns the index map node id -> index."""
        index = {}
        for node in g.nodes:
            index[node] = self.add_node(label=g.labels[node])
        for u, gamma, v in g.edges:
            self.add_edge(index[u], gamma, index[v])
        return index

    def add_edge(self, u, gamma, v):
        self._edges[(u, gamma, v)] = True

    def add_edge_var(self, u, gamma, v):
        var = self.bdd.new_var()
        self._edges[(u, gamma, v)] = var
        self._edge_choices.append(((u, gamma, v), var))
        return var

    def finish(self, node_ids=None) -> Structure:
        background = TRUE
        for u, pairs in self._label_choices.items():
            at_least = self.bdd.or_all([self.bdd.var_node(var) for _, var in pairs])
            background = self.bdd.apply_and(background, at_least)
            for i in range(len(pairs)):
                for j in range(i + 1, len(pairs)):
                    no_both = self.bdd.apply_not(
                        self.bdd.apply_and(
                            self.bdd.var_node(pairs[i][1]), self.bdd.var_node(pairs[j][1])
                        )
                    )
                    background = self.bdd.apply_and(background, no_both)
        return Structure(
            self._n,
            self._labels,
            self._edges,
            self._label_choices,
            tuple(self._edge_choices),
            background,
            node_ids,
        )


def _flatten_and(phi):
    if isinstance(phi, L.And):
        out = []
        for p in phi.items:
            out.extend(_flatten_and(p))
        return out
    return [phi]


def _flatten_or(phi):
    if isinstance(phi, L.Or):
        out = []
        for p in phi.items:
            out.extend(_flatten_or(p))
        return out
    return [phi]


def _env_key(phi, env):
    keys = []
    for v in sorted(L.free_vars(phi)):
        val = env[v]
        if isinstance(val, SetBlock):
            keys.append((v, ("blk", val.sid)))
        else:
            keys.append((v, val))
    return tuple(keys)


class Grounder:
    def __init__(self, structure: Structure, bdd: Bdd, subst_limit=SUBST_LIMIT):
        self.st = structure
        self.bdd = bdd
        self.subst_limit = subst_limit
        self.memo = {}
        self._keep = {}
        self._block_pool = {}
        self._block_depth = {}

    # -------------------------------------------------------- block pool

    def _acquire_block(self, name):
        depth = self._block_depth.get(name, 0)
        pool = self._block_pool.setdefault(name, [])
        if depth == len(pool):
            pool.append(SetBlock((name, depth), self.bdd.new_vars(self.st.n)))
        self._block_depth[name] = depth + 1
        return pool[depth]

    def _release_block(self, name):
        self._block_depth[name] -= 1

    # ----------------------------------------------------------- ground

    def ground(self, phi, env):
        key = (id(phi), _env_key(phi, env))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self._keep[id(phi)] = phi
        result = self._ground(phi, env)
        self.memo[key] = result
        return result

    def _ground(self, phi, env):
        bdd = self.bdd
        if isinstance(phi, L.Lab):
            return bdd.lit(_as_node(bdd, self.st.lab_lit(env[phi.x], phi.sigma)))
        if isinstance(phi, L.Edge):
            return bdd.lit(_as_node(bdd, self.st.edge_lit(env[phi.x], phi.gamma, env[phi.y])))
        if isinstance(phi, L.In):
            u = env[phi.x]
            val = env[phi.X]
            if isinstance(val, SetBlock):
                return bdd.var_node(val.bits[u])
            return TRUE if u in val else FALSE
        if isinstance(phi, L.Not):
            return bdd.apply_not(self.ground(phi.sub, env))
        if isinstance(phi, L.And):
            r = TRUE
            for p in phi.items:
                r = bdd.apply_and(r, self.ground(p, env))
                if r == FALSE:
                    return FALSE
            return r
        if isinstance(phi, L.Or):
            r = FALSE
            for p in phi.items:
                r = bdd.apply_or(r, self.ground(p, env))
                if r == TRUE:
                    return TRUE
            return r
        if isinstance(phi, L.Exists):
            if L.is_node_var(phi.var):
                return self._fo_quantifier(phi, env, exists=True)
            return self._so_exists(phi, env)
        if isinstance(phi, L.Forall):
            if L.is_node_var(phi.var):
                return self._fo_quantifier(phi, env, exists=False)
            return self._so_forall(phi, env)
        raise TypeError(f"cannot evaluate {type(phi).__name__} in plain MSO semantics")

    # -------------------------------------------------- first-order case

    def _fo_domain(self, var, body, env, exists):
        """Node range for a first-order quantifier, shrunk to a concrete
        set when the body leads with the relativization membership guard."""
        parts = _flatten_and(body) if exists else _flatten_or(body)
        head = parts[0] if parts else None
        if exists:
            guard = head if isinstance(head, L.In) else None
        else:
            guard = head.sub if isinstance(head, L.Not) and isinstance(head.sub, L.In) else None
        if guard is not None and guard.x == var:
            val = env.get(guard.X)
            if isinstance(val, frozenset):
                return sorted(val)
        return range(self.st.n)

    def _fo_quantifier(self, phi, env, exists):
        bdd = self.bdd
        var, body = phi.var, phi.body
        domain = self._fo_domain(var, body, env, exists)
        env2 = dict(env)
        acc = FALSE if exists else TRUE
        for u in domain:
            env2[var] = u
            r = self.ground(body, env2)
            if exists:
                acc = bdd.apply_or(acc, r)
                if acc == TRUE:
                    return TRUE
            else:
                acc = bdd.apply_and(acc, r)
                if acc == FALSE:
                    return FALSE
        return acc

    # ------------------------------------------------- second-order case

    def _so_prefix(self, phi, kind):
        names = []
        body = phi
        while isinstance(body, kind) and L.is_set_var(body.var) and body.var not in names:
            names.append(body.var)
            body = body.body
        return names, body

    # ------------------------------------------------ constrained ground

    def ground_with(self, phi, env, ctx):
        """Compute ctx AND [[phi]](env), keeping intermediate BDDs small by
        threading ctx through conjunctions and universal node quantifiers.
        Heavily coupled clauses (e.g. edge-isomorphism conditions) stay
        tractable this way because earlier conjuncts have already pinned
        most structure bits."""
        bdd = self.bdd
        if ctx == FALSE:
            return FALSE
        if isinstance(phi, L.And):
            return self.ground_seq(_flatten_and(phi), env, ctx)
        if isinstance(phi, L.Or):
            acc = FALSE
            for p in phi.items:
                acc = bdd.apply_or(acc, self.ground_with(p, env, ctx))
                if acc == ctx:
                    break
            return acc
        if isinstance(phi, L.Exists) and L.is_set_var(phi.var):
            return self._so_exists(phi, env, ctx=ctx)
        if isinstance(phi, L.Forall) and L.is_set_var(phi.var):
            return self._so_forall(phi, env, ctx=ctx)
        if isinstance(phi, L.Exists) and L.is_node_var(phi.var):
            var, body = phi.var, phi.body
            domain = self._fo_domain(var, body, env, exists=True)
            env2 = dict(env)
            acc = FALSE
            for u in domain:
                env2[var] = u
                acc = bdd.apply_or(acc, self.ground_with(body, env2, ctx))
                if acc == ctx:
                    break
            return acc
        if isinstance(phi, L.Forall) and L.is_node_var(phi.var):
            var, body = phi.var, phi.body
            domain = self._fo_domain(var, body, env, exists=False)
            env2 = dict(env)
            acc = ctx
            for u in domain:
                env2[var] = u
                acc = self.ground_with(body, env2, acc)
                if acc == FALSE:
                    return FALSE
            return acc
        return bdd.apply_and(ctx, self.ground(phi, env))

    def ground_seq(self, conjuncts, env, ctx=TRUE):
        for c in conjuncts:
            ctx = self.ground_with(c, env, ctx)
            if ctx == FALSE:
                return FALSE
        return ctx

    @staticmethod
    def _guardable(phi):
        """Conjuncts allowed into a quantifier guard: no second-order
        quantifier at the head (those are solved after substitution)."""
        return not (isinstance(phi, (L.Exists, L.Forall)) and L.is_set_var(phi.var))

    def _guard_split(self, candidates, names, env2, bound_bits):
        """Conjoin a prefix of guard candidates whose BDD support stays
        inside the bound blocks; returns (guard BDD, consumed count).

        Each candidate's conjuncts are grounded incrementally with the
        accumulated guard threaded through, so functional constraints
        (equivalence classes, unions, partitions) pin the blocks one after
        the other without ever materializing an unconstrained relation."""
        bdd = self.bdd
        bound = set(names)
        guard = TRUE
        consumed = 0
        for c in candidates:
            pieces = _flatten_and(c)
            attempt = guard
            ok = True
            for p in pieces:
                if not self._guardable(p):
                    ok = False
                    break
                outer = L.free_vars(p) - bound
                if any(isinstance(env2.get(v), SetBlock) for v in outer):
                    ok = False
                    break
                attempt = self.ground_with(p, env2, attempt)
                if attempt == FALSE:
                    break
                if not bdd.support(attempt) <= bound_bits:
                    ok = False
                    break
            if not ok:
                break
            guard = attempt
            consumed += 1
            if guard == FALSE:
                break
            if bdd.count(guard, bound_bits) <= 2:
                break
        return guard, consumed

    def _model_envs(self, guard, names, blocks, bound_bits, env):
        for model in self.bdd.iter_models(guard, bound_bits):
            env3 = dict(env)
            for name in names:
                block = blocks[name]
                env3[name] = frozenset(u for u in range(self.st.n) if model[block.bits[u]])
            yield env3

    def _so_exists(self, phi, env, ctx=TRUE):
        bdd = self.bdd
        names, body = self._so_prefix(phi, L.Exists)
        conjuncts = _flatten_and(body)
        blocks = {name: self._acquire_block(name) for name in names}
        try:
            env2 = dict(env)
            env2.update(blocks)
            bound_bits = frozenset(b for blk in blocks.values() for b in blk.bits)
            guard, consumed = self._guard_split(conjuncts, names, env2, bound_bits)
            if guard == FALSE or ctx == FALSE:
                return FALSE
            rest = conjuncts[consumed:]
            if bdd.count(guard, bound_bits) <= self.subst_limit:
                acc = FALSE
                for env3 in self._model_envs(guard, names, blocks, bound_bits, env):
                    r = self.ground_seq(rest, env3, ctx=ctx)
                    acc = bdd.apply_or(acc, r)
                    if acc == TRUE:
                        return TRUE
                return acc
            full = self.ground_seq(rest, env2, ctx=bdd.apply_and(guard, ctx))
            return bdd.exists(full, bound_bits)
        finally:
            for name in names:
                self._release_block(name)

    def _so_forall(self, phi, env, ctx=TRUE):
        bdd = self.bdd
        names, body = self._so_prefix(phi, L.Forall)
        disjuncts = _flatten_or(body)
        blocks = {name: self._acquire_block(name) for name in names}
        try:
            env2 = dict(env)
            env2.update(blocks)
            bound_bits = frozenset(b for blk in blocks.values() for b in blk.bits)
            negated = []
            for d in disjuncts:
                if isinstance(d, L.Not) and self._guardable(d.sub):
                    negated.append(d.sub)
                else:
                    break
            guard, consumed = self._guard_split(negated, names, env2, bound_bits)
            if guard == FALSE:
                return ctx  # hypothesis unsatisfiable
            rest = disjuncts[consumed:]
            if bdd.count(guard, bound_bits) <= self.subst_limit:
                acc = ctx
                for env3 in self._model_envs(guard, names, blocks, bound_bits, env):
                    r = FALSE
                    for d in rest:
                        r = bdd.apply_or(r, self.ground(d, env3))
                        if r == TRUE:
                            break
                    acc = bdd.apply_and(acc, r)
                    if acc == FALSE:
                        return FALSE
                return acc
            full = bdd.apply_not(guard)
            for d in rest:
                full = bdd.apply_or(full, self.ground(d, env2))
                if full == TRUE:
                    return ctx
            return bdd.apply_and(ctx, bdd.forall(full, bound_bits))
        finally:
            for name in names:
                self._release_block(name)


def _as_node(bdd, lit):
    if lit is True:
        return TRUE
    if lit is False:
        return FALSE
    return bdd.var_node(lit)


def structure_of(g: Graph):
    bdd = Bdd()
    sb = StructureBuilder(bdd)
    index = sb.add_graph(g)
    return sb.finish(node_ids=tuple(sorted(g.nodes))), bdd, index


class EvalContext:
    """Reusable grounding context for many evaluations on one graph.

    Sharing the context lets structurally shared subformulas (the big
    configuration formulas inside instruction templates) ground once."""

    def __init__(self, g: Graph, budget=DEFAULT_BUDGET):
        self.graph = g
        bdd = Bdd(budget)
        sb = StructureBuilder(bdd)
        self.index = sb.add_graph(g)
        self.structure = sb.finish(node_ids=tuple(sorted(g.nodes)))
        self.grounder = Grounder(self.structure, bdd)

    def evaluate(self, rho, phi) -> bool:
        rho = rho or {}
        missing = L.free_vars(phi) - set(rho)
        if missing:
            raise UnboundVariable(", ".join(sorted(missing)))
        env = {}
        for var in L.free_vars(phi):
            val = rho[var]
            if L.is_node_var(var):
                if val not in self.index:
                    raise UnknownNode(f"{val!r} assigned to {var}")
                env[var] = self.index[val]
            else:
                vals = frozenset(val)
                stray = vals - set(self.index)
                if stray:
                    raise UnknownNode(f"{sorted(stray)!r} assigned to {var}")
                env[var] = frozenset(self.index[u] for u in vals)
        result = self.grounder.ground(phi, env)
        if result not in (FALSE, TRUE):
            raise AssertionError("non-constant result on a concrete structure")
        return result == TRUE

    def satisfies(self, phi) -> bool:
        return self.evaluate({}, phi)


def evaluate(g: Graph, rho, phi, budget=DEFAULT_BUDGET) -> bool:
    """Decide (g, rho) |= phi exactly.

    `rho` maps first-order variables to node ids and second-order variables
    to sets of node ids; superfluous entries are ignored.  Raises
    UnboundVariable for missing free variables, UnknownNode for values
    outside the graph, SizeLimit when the BDD budget is exhausted.
    """
    return EvalContext(g, budget).evaluate(rho, phi)


def satisfies(g: Graph, phi, budget=DEFAULT_BUDGET) -> bool:
    """Decide g |= phi for closed phi."""
    return evaluate(g, {}, phi, budget)
