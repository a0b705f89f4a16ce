"""Command-line front end.

Exit codes: 0 for true/success, 1 for false/reject, 2 for errors, and 3
when a budget was exhausted (the answer is unknown, not negative).
"""

from __future__ import annotations

import json
import sys

import click

from . import bet, formats, logic as L, pushdown, stack, storage, twolevel
from .automata import s_accepts_graph, s_accepts_string
from .errors import BudgetExhausted, FormatError, MsoStorageError, SizeLimit
from .graphs import EMPTY, as_string_like, label_key
from .semantics import DEFAULT_BUDGET, satisfies

NATIVE_BUILTINS = {
    "triv": storage.triv_native,
    "stack": stack.stack_native,
    "pd-triv": lambda: pushdown.iterate(1)[0],
    "pd2-triv": lambda: pushdown.iterate(2)[0],
    "pd-stack": lambda: pushdown.pushdown_native(stack.stack_native()),
}

MSO_BUILTINS = {
    "triv": storage.triv_mso,
    "stack": stack.stack_mso,
    "pd-triv": lambda: pushdown.iterate(1)[1],
    "pd2-triv": lambda: pushdown.iterate(2)[1],
    "pd-stack": lambda: pushdown.pushdown_mso(stack.stack_mso()),
}


def _read(path):
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def resolve_mso_storage(ref):
    if ref in MSO_BUILTINS:
        return MSO_BUILTINS[ref]()
    parsed = formats.parse_storage(_read(ref))
    if isinstance(parsed, tuple):
        raise FormatError(f"{ref} names a native backend, not an MSO storage")
    return parsed


def resolve_native_backend(ref):
    if ref in NATIVE_BUILTINS:
        return NATIVE_BUILTINS[ref]()
    parsed = formats.parse_storage(_read(ref))
    if isinstance(parsed, tuple) and parsed[0] == "native":
        name = parsed[1]
        if name in NATIVE_BUILTINS:
            return NATIVE_BUILTINS[name]()
        raise FormatError(f"unknown native backend {name!r}")
    raise FormatError(
        f"{ref} is a formula-defined storage; string acceptance needs an executable backend"
    )


def _emit(text, output):
    if output == "json":
        click.echo(json.dumps({"text": text}, indent=None))
    else:
        click.echo(text, nl=not text.endswith("\n"))


@click.group()
def cli():
    """Graph storage types in monadic second-order logic."""


@cli.command()
@click.argument("graph_file")
@click.argument("formula_file")
@click.option("--budget", default=DEFAULT_BUDGET, show_default=True, help="BDD node budget")
@click.pass_context
def check(ctx, graph_file, formula_file, budget):
    """Model-check a closed formula on a graph (exit 0 true, 1 false)."""
    g = formats.parse_graph(_read(graph_file))
    phi = formats.parse_formula(_read(formula_file))
    ctx.exit(0 if satisfies(g, phi, budget) else 1)


@cli.command(name="accept-string")
@click.argument("automaton_file")
@click.argument("storage_ref")
@click.argument("word")
@click.option("--budget", default=None, type=int, help="search step budget")
@click.pass_context
def accept_string(ctx, automaton_file, storage_ref, word, budget):
    """Run a storage automaton on an input word (exit 0/1; 3 on budget)."""
    m = formats.parse_automaton(_read(automaton_file))
    backend = resolve_native_backend(storage_ref)
    accepted = s_accepts_string(m, backend, tuple(word), budget)
    ctx.exit(0 if accepted else 1)


@cli.command(name="accept-graph")
@click.argument("automaton_file")
@click.argument("storage_ref")
@click.argument("graph_file")
@click.pass_context
def accept_graph(ctx, automaton_file, storage_ref, graph_file):
    """Run a storage automaton on a string-like graph; prints the carried
    behaviour when there is one."""
    m = formats.parse_automaton(_read(automaton_file))
    mso = resolve_mso_storage(storage_ref)
    g = formats.parse_graph(_read(graph_file))
    accepted, behaviour = s_accepts_graph(m, mso, g)
    if behaviour is not None:
        click.echo("behaviour " + ";".join(behaviour))
    ctx.exit(0 if accepted else 1)


@cli.command()
@click.argument("storage_ref")
@click.argument("graph_file")
@click.option("--alphabet", multiple=True, help="input symbols (inferred when omitted)")
@click.pass_context
def behaviour(ctx, storage_ref, graph_file, alphabet):
    """The unique behaviour a string-like graph carries, if any."""
    mso = resolve_mso_storage(storage_ref)
    g = formats.parse_graph(_read(graph_file))
    if alphabet:
        symbols = frozenset(alphabet)
    else:
        symbols = g.edge_alphabet() - mso.gamma - {EMPTY}
    view = as_string_like(g, mso, symbols)
    from .automata import graph_behaviour

    found = graph_behaviour(mso, view)
    if found is None:
        click.echo("no behaviour")
        ctx.exit(1)
    click.echo("behaviour " + ";".join(found))
    ctx.exit(0)


@cli.command()
@click.argument("kind", type=click.Choice(["lift", "lower", "embed"]))
@click.argument("formula_file")
@click.option("--storage", "storage_ref", required=True)
@click.option("--alphabet", multiple=True, required=True)
@click.option("--output", type=click.Choice(["text", "json"]), default="text")
def translate(kind, formula_file, storage_ref, alphabet, output):
    """Translate between the two-level logic and plain formulas."""
    mso = resolve_mso_storage(storage_ref)
    symbols = frozenset(alphabet)
    text = _read(formula_file)
    if kind == "lift":
        phi = formats.parse_formula(text)
        out = twolevel.lift(mso, symbols, phi)
    elif kind == "lower":
        phi = formats.parse_formula(text, two_level=True)
        out = twolevel.lower(mso, symbols, phi)
    else:
        phi = formats.parse_formula(text, two_level=True)
        out = twolevel.embed(mso, symbols, phi)
    _emit(formats.formula_to_sexp(out), output)


@cli.command(name="compile")
@click.argument("kind", type=click.Choice(["mso-to-nfa", "nfa-to-mso"]))
@click.argument("input_file")
@click.option("--alphabet", multiple=True, help="alphabet for mso-to-nfa")
@click.option("--budget", default=1 << 14, show_default=True, help="determinization budget")
@click.option("--output", type=click.Choice(["text", "json"]), default="text")
def compile_cmd(kind, input_file, alphabet, budget, output):
    """The translations between closed formulas and automata on strings."""
    text = _read(input_file)
    if kind == "mso-to-nfa":
        phi = formats.parse_formula(text)
        symbols = frozenset(alphabet) if alphabet else _formula_alphabet(phi)
        nfa = bet.mso_to_nfa(phi, symbols, budget)
        _emit(formats.serialize_nfa(nfa), output)
    else:
        nfa = formats.parse_nfa(text)
        phi = bet.nfa_to_mso(nfa)
        _emit(formats.formula_to_sexp(phi), output)


def _formula_alphabet(phi):
    labels = set()

    def walk(p):
        if isinstance(p, L.Edge):
            labels.add(p.gamma)
        elif isinstance(p, L.Not):
            walk(p.sub)
        elif isinstance(p, (L.Or, L.And)):
            for q in p.items:
                walk(q)
        elif isinstance(p, (L.Exists, L.Forall)):
            walk(p.body)

    walk(phi)
    if not labels:
        raise FormatError("cannot infer an alphabet; pass --alphabet")
    return frozenset(labels)


@cli.command()
@click.argument(
    "what",
    type=click.Choice(["triv", "triv-native", "stack-mso", "stack-native", "pushdown"]),
)
@click.option("--inner", default="triv", help="inner storage for `pushdown`")
@click.option("--iterate", "iterate_n", default=1, show_default=True)
@click.option("--output", type=click.Choice(["text", "json"]), default="text")
def build(what, inner, iterate_n, output):
    """Emit a storage description."""
    if what == "triv":
        _emit(formats.serialize_storage(storage.triv_mso()), output)
    elif what == "triv-native":
        _emit(formats.serialize_native_reference("triv"), output)
    elif what == "stack-mso":
        _emit(formats.serialize_storage(stack.stack_mso()), output)
    elif what == "stack-native":
        _emit(formats.serialize_native_reference("stack"), output)
    else:
        if inner == "triv":
            _, mso = pushdown.iterate(iterate_n)
        else:
            mso = resolve_mso_storage(inner)
            for _ in range(iterate_n):
                mso = pushdown.pushdown_mso(mso)
        _emit(formats.serialize_storage(mso), output)


@cli.command(name="emit-dot")
@click.argument("graph_file")
@click.option("--collapse/--no-collapse", default=True, show_default=True)
def emit_dot(graph_file, collapse):
    """Render a graph as DOT (bicliques collapse to one bold edge)."""
    g = formats.parse_graph(_read(graph_file))
    click.echo(formats.to_dot(g, collapse), nl=False)


def main(argv=None) -> int:
    try:
        result = cli.main(args=argv, standalone_mode=False)
        return int(result) if isinstance(result, int) else 0
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 2
    except (BudgetExhausted, SizeLimit) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 3
    except (MsoStorageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
