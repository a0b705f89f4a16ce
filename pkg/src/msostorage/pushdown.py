"""The pushdown operator on storage types.

A pushdown over an inner storage is a nonempty sequence of cells, each a
pushdown symbol from {a, b, g} paired with an inner configuration; the
bottom cell is pinned to (g, initial).  top_w tests the top symbol, pop
drops the top cell, push_w_t pushes (w, c') where c' is a t-successor of
the current top's inner configuration.

The formula-defined twin renders a pushdown as the string-like graph of
its inner configuration renderings linked by pushdown-symbol bicliques
(no empty links, no configuration edges between cells).  Instruction
formulas assert a d-labeled isomorphism between the unchanged cells and,
for pushes, embed the inner instruction's pair condition between the two
top cells, whose nu-biclique the outer pair graph already provides.
"""

from __future__ import annotations

import itertools

from . import logic as L
from .automata import SAutomaton, stringlike_formula_links
from .errors import AlphabetClash, DepthLimit
from .graphs import EMPTY, NU, Graph, graph_union, label_key, shift_nodes
from .storage import (
    MsoStorage,
    NativeStorage,
    _pair_partition,
    bijection_iso_formula,
    triv_mso,
    triv_native,
)

OMEGA = ("a", "b", "g")
INITIAL_SYMBOL = "g"


def pushdown_instructions(inner_names):
    out = [f"top_{w}" for w in OMEGA]
    out.append("pop")
    for w in OMEGA:
        for name in inner_names:
            out.append(f"push_{w}_{name}")
    return tuple(out)


def split_instruction(name):
    if name.startswith("top_"):
        return ("top", name[4:], None)
    if name == "pop":
        return ("pop", None, None)
    if name.startswith("push_"):
        _, omega, theta = name.split("_", 2)
        return ("push", omega, theta)
    raise KeyError(name)


# ---------------------------------------------------------------- native

def pushdown_native(inner: NativeStorage, d_label="d1") -> NativeStorage:
    initial = ((INITIAL_SYMBOL, inner.initial),)

    def step(config, instruction):
        kind, omega, theta = split_instruction(instruction)
        if kind == "top":
            return {config} if config[-1][0] == omega else set()
        if kind == "pop":
            return {config[:-1]} if len(config) >= 2 else set()
        top_inner = config[-1][1]
        return {config + ((omega, c2),) for c2 in inner.step(top_inner, theta)}

    def render(config):
        blocks = [inner.render(cell[1]) for cell in config]
        offsets = []
        total = 0
        for b in blocks:
            offsets.append(total)
            total += len(b)
        shifted = [shift_nodes(b, off) for b, off in zip(blocks, offsets)]
        extra = []
        for i in range(len(blocks) - 1):
            omega = config[i + 1][0]
            for u in shifted[i].nodes:
                for v in shifted[i + 1].nodes:
                    extra.append((u, omega, v))
        return graph_union(*shifted, extra_edges=extra)

    def witness(config, instruction, successor):
        kind, _, theta = split_instruction(instruction)
        g1 = render(config)
        g2 = shift_nodes(render(successor), len(g1))
        n1 = len(g1)
        extra = [(u, NU, v) for u in g1.nodes for v in g2.nodes]
        if kind == "top":
            matched = n1
        elif kind == "pop":
            matched = len(g2)
        else:
            matched = n1
        extra += [(k, d_label, n1 + k) for k in range(matched)]
        if kind == "push":
            # inner instruction witness between the two top cells
            t1_len = len(inner.render(config[-1][1]))
            t2_len = len(inner.render(successor[-1][1]))
            pair = inner.witness_pair(config[-1][1], theta, successor[-1][1])
            t1_start = n1 - t1_len
            t2_start = n1 + len(g2) - n1 - t2_len  # offset within g2 block
            for u, lab, v in pair.edges:
                if lab == NU:
                    continue
                if u < t1_len <= v:
                    extra.append((t1_start + u, lab, n1 + t2_start + (v - t1_len)))
                elif v < t1_len <= u:
                    extra.append((n1 + t2_start + (u - t1_len), lab, t1_start + v))
        return graph_union(g1, g2, extra_edges=extra)

    return NativeStorage(
        f"pd({inner.name})",
        initial,
        pushdown_instructions(inner.instructions),
        step,
        render,
        witness,
    )


# ------------------------------------------------------------------- MSO

def _fresh_d(taken):
    k = 1
    while f"d{k}" in taken:
        k += 1
    return f"d{k}"


def _last_in(v, X):
    """v has no outgoing pushdown-symbol edge within X (top cell)."""
    return L.Not(
        L.Exists("zp", L.And((L.In("zp", X), L.edge_any(OMEGA, v, "zp"))))
    )


def _first_in(v, X):
    return L.Not(
        L.Exists("zp", L.And((L.In("zp", X), L.edge_any(OMEGA, "zp", v))))
    )


def _top_symbol_formula(omega):
    """phi'_w: the last cell is entered by w-edges (with the one-cell
    disjunct for the initial symbol)."""
    x = "xw"
    last = L.Not(L.Exists("yw", L.edge_any(OMEGA, x, "yw")))
    phi = L.Forall(x, L.Or((L.Not(last), L.Exists("yw", L.Edge(omega, "yw", x)))))
    if omega == INITIAL_SYMBOL:
        single = L.Forall(
            x,
            L.And((L.Not(L.Exists("yw", L.edge_any(OMEGA, "yw", x))), last)),
        )
        return L.Or((phi, single))
    return phi


def pushdown_mso(inner: MsoStorage, d_label=None) -> MsoStorage:
    if inner.gamma & set(OMEGA):
        raise AlphabetClash(
            f"inner edge labels collide with pushdown symbols: {sorted(inner.gamma & set(OMEGA))}"
        )
    if d_label is None:
        d_label = _fresh_d(inner.gamma | set(OMEGA))
    if d_label in inner.gamma or d_label in OMEGA:
        raise AlphabetClash(f"{d_label!r} is taken")

    gamma_inner = tuple(sorted(inner.gamma, key=label_key))
    new_gamma = inner.gamma | set(OMEGA) | {d_label}

    config_formula = stringlike_formula_links(inner, OMEGA)
    if gamma_inner:
        within_only = L.forall_many(
            ["xz", "yz"],
            L.Or(
                (
                    L.Not(L.edge_any(gamma_inner, "xz", "yz")),
                    L.eq_class(OMEGA, "xz", "yz"),
                )
            ),
        )
        config_formula = L.And((config_formula, within_only))
    no_d_inside = L.forall_many(["xz", "yz"], L.Not(L.Edge(d_label, "xz", "yz")))
    config_formula = L.And((config_formula, no_d_inside))

    X1, X2 = "X1", "X2"
    phi1 = L.relativize(config_formula, X1)
    phi2 = L.relativize(config_formula, X2)
    pairpart = _pair_partition(X1, X2)

    def cross_restrictions(allow_gamma_tops=False):
        x, y = "xc", "yc"
        forbidden_fwd = list(OMEGA)
        backward = list(OMEGA) + [d_label] + list(gamma_inner)
        parts = [
            L.forall_many(
                [x, y],
                L.Or(
                    (
                        L.Not(L.And((L.In(x, X1), L.In(y, X2)))),
                        L.And(tuple(L.Not(L.Edge(lab, x, y)) for lab in forbidden_fwd)),
                    )
                ),
            ),
            L.forall_many(
                [x, y],
                L.Or(
                    (
                        L.Not(L.And((L.In(x, X2), L.In(y, X1)))),
                        L.And(tuple(L.Not(L.Edge(lab, x, y)) for lab in backward)),
                    )
                ),
            ),
        ]
        if gamma_inner:
            if allow_gamma_tops:
                # inner-configuration edges only between the two top cells
                cond = L.forall_many(
                    [x, y],
                    L.Or(
                        (
                            L.Not(
                                L.And(
                                    (
                                        L.In(x, X1),
                                        L.In(y, X2),
                                        L.edge_any(gamma_inner, x, y),
                                    )
                                )
                            ),
                            L.And((_last_in(x, X1), _last_in(y, X2))),
                        )
                    ),
                )
            else:
                cond = L.forall_many(
                    [x, y],
                    L.Or(
                        (
                            L.Not(L.And((L.In(x, X1), L.In(y, X2)))),
                            L.And(tuple(L.Not(L.Edge(lab, x, y)) for lab in gamma_inner)),
                        )
                    ),
                )
            parts.append(cond)
        return tuple(parts)

    iso_labels = inner.gamma | set(OMEGA)

    def relativized_top(omega, X):
        return L.relativize(_top_symbol_formula(omega), X)

    instructions = []
    for omega in OMEGA:
        body = (
            (pairpart, phi1, phi2)
            + cross_restrictions()
            + (
                bijection_iso_formula(d_label, X1, X2, iso_labels, sigma=inner.sigma),
                relativized_top(omega, X1),
            )
        )
        instructions.append((f"top_{omega}", L.exists_many([X1, X2], L.And(body))))

    pop_bij = bijection_iso_formula(
        d_label,
        X1,
        X2,
        iso_labels,
        sigma=inner.sigma,
        domain_cond=lambda v: L.Not(_last_in(v, X1)),
    )
    body = (pairpart, phi1, phi2) + cross_restrictions() + (pop_bij,)
    instructions.append(("pop", L.exists_many([X1, X2], L.And(body))))

    for omega in OMEGA:
        for name, theta in inner.instructions:
            push_bij = bijection_iso_formula(
                d_label,
                X1,
                X2,
                iso_labels,
                sigma=inner.sigma,
                range_cond=lambda v: L.Not(_last_in(v, X2)),
            )
            avoid = L.all_vars(theta) | {X1, X2}
            T1 = L.fresh("T1", avoid)
            T2 = L.fresh("T2", avoid | {T1})
            U = L.fresh("Upd", avoid | {T1, T2})
            t1_def = L.Forall(
                "xt", L.iff(L.In("xt", T1), L.And((L.In("xt", X1), _last_in("xt", X1))))
            )
            t2_def = L.Forall(
                "xt", L.iff(L.In("xt", T2), L.And((L.In("xt", X2), _last_in("xt", X2))))
            )
            inner_step = L.exists_many(
                [T1, T2, U],
                L.And(
                    (
                        t1_def,
                        t2_def,
                        L.union_of(T1, T2, U),
                        L.relativize(theta, U),
                    )
                ),
            )
            body = (
                (pairpart, phi1, phi2)
                + cross_restrictions(allow_gamma_tops=True)
                + (push_bij, relativized_top(omega, X2), inner_step)
            )
            instructions.append(
                (f"push_{omega}_{name}", L.exists_many([X1, X2], L.And(body)))
            )

    return MsoStorage(
        name=f"PD({inner.name})",
        sigma=inner.sigma,
        gamma=new_gamma,
        phi_c=config_formula,
        g_in=inner.g_in,
        instructions=tuple(instructions),
    )


# ------------------------------------------------------------- iteration

def relabel_native(storage: NativeStorage, edge_map) -> NativeStorage:
    """Same storage with rendered edge labels renamed."""

    def remap(g: Graph) -> Graph:
        return Graph(
            dict(g.labels),
            {(u, edge_map.get(lab, lab), v) for (u, lab, v) in g.edges},
        )

    return NativeStorage(
        storage.name,
        storage.initial,
        storage.instructions,
        storage._step,
        lambda c: remap(storage.render(c)),
        lambda c, t, c2: remap(storage._witness(c, t, c2)),
    )


def relabel_mso(storage: MsoStorage, edge_map) -> MsoStorage:
    """Same storage with edge labels renamed in alphabets, formulas, and
    the initial graph (nu is never renamed)."""
    assert NU not in edge_map

    def remap_graph(g: Graph) -> Graph:
        return Graph(
            dict(g.labels),
            {(u, edge_map.get(lab, lab), v) for (u, lab, v) in g.edges},
        )

    return MsoStorage(
        name=storage.name,
        sigma=storage.sigma,
        gamma=frozenset(edge_map.get(lab, lab) for lab in storage.gamma),
        phi_c=L.substitute_edge_labels(storage.phi_c, edge_map),
        g_in=remap_graph(storage.g_in),
        instructions=tuple(
            (name, L.substitute_edge_labels(phi, edge_map))
            for name, phi in storage.instructions
        ),
    )


def iterate(n, depth_limit=3):
    """The n-fold pushdown over the trivial storage, natively and as
    formulas.  Earlier levels' pushdown symbols are renamed apart so each
    application sees disjoint alphabets."""
    if n > depth_limit:
        raise DepthLimit(f"iteration depth {n} exceeds the limit {depth_limit}")
    native, mso = triv_native(), triv_mso()
    for level in range(1, n + 1):
        clash = mso.gamma & set(OMEGA)
        if clash:
            suffix = {w: f"{w}{level - 1}" for w in OMEGA}
            native = relabel_native(native, suffix)
            mso = relabel_mso(mso, suffix)
        d_label = _fresh_d(mso.gamma | set(OMEGA))
        native = pushdown_native(native, d_label)
        mso = pushdown_mso(mso, d_label)
    return native, mso


def anbn_automaton() -> SAutomaton:
    """Two-phase pushdown counter for { a^n b^n : n >= 0 } over P(triv):
    push on a, pop on b, and accept only after testing the bottom symbol."""
    transitions = {
        ("q0", "a", "push_a_stay", "q0"),
        ("q0", "b", "pop", "q1"),
        ("q1", "b", "pop", "q1"),
        ("q0", EMPTY, "top_g", "q2"),
        ("q1", EMPTY, "top_g", "q2"),
    }
    return SAutomaton({"a", "b"}, {"q0", "q1", "q2"}, {"q0"}, {"q2"}, transitions)
