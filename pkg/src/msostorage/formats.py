"""Text formats: s-expression formulas and line-oriented structures.

Symbols are whitespace-free tokens; an (a, b) tuple symbol is written
a,b in line formats and (a b) inside s-expressions.  Serializers emit a
canonical form (sorted nodes, edges, states, and transitions), and
parsing a serialized value reproduces it structurally.
"""

from __future__ import annotations

from . import logic as L
from .automata import NFA, SAutomaton
from .errors import FormatError
from .graphs import Graph, label_key
from .storage import MsoStorage
from .transducers import MsoTransducer

# ------------------------------------------------------------ s-expressions

def _tokenize(text):
    out = []
    line = 1
    token = ""
    for ch in text:
        if ch == "\n":
            line += 1
        if ch == ";":
            # comment to end of line
            if token:
                out.append((token, line))
                token = ""
            out.append((";", line))
            continue
        if out and out[-1][0] == ";":
            if ch == "\n":
                out.pop()
            continue
        if ch in "()":
            if token:
                out.append((token, line))
                token = ""
            out.append((ch, line))
        elif ch.isspace():
            if token:
                out.append((token, line))
                token = ""
        else:
            token += ch
    if token:
        out.append((token, line))
    return [(t, ln) for t, ln in out if t != ";"]


def _parse_sexp(tokens, pos):
    if pos >= len(tokens):
        raise FormatError("unexpected end of input")
    tok, line = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while True:
            if pos >= len(tokens):
                raise FormatError("missing closing parenthesis", line)
            if tokens[pos][0] == ")":
                return items, pos + 1
            item, pos = _parse_sexp(tokens, pos)
            items.append(item)
    if tok == ")":
        raise FormatError("unexpected closing parenthesis", line)
    return tok, pos + 1


def read_sexp(text):
    tokens = _tokenize(text)
    if not tokens:
        raise FormatError("empty formula")
    sexp, pos = _parse_sexp(tokens, 0)
    if pos != len(tokens):
        raise FormatError("trailing input after the formula")
    return sexp


def _symbol(sexp):
    if isinstance(sexp, list):
        return tuple(_symbol(p) for p in sexp)
    return sexp


def _labelset(sexp):
    if not isinstance(sexp, list):
        return [_symbol(sexp)]
    return [_symbol(p) for p in sexp]


def formula_from_sexp(sexp, two_level=False):
    if isinstance(sexp, str):
        raise FormatError(f"bare symbol {sexp!r} is not a formula")
    if not sexp:
        raise FormatError("empty list is not a formula")
    head, *args = sexp
    if head == "lab":
        return L.Lab(_symbol(args[0]), args[1])
    if head == "edge":
        return L.Edge(_symbol(args[0]), args[1], args[2])
    if head == "in":
        return L.In(args[0], args[1])
    if head == "member-eq":
        if not two_level:
            raise FormatError("member-eq belongs to the two-level logic")
        return L.MemberEq(args[0], args[1])
    if head == "next":
        if not two_level:
            raise FormatError("next belongs to the two-level logic")
        return L.Next(args[0], args[1], args[2])
    if head == "not":
        return L.Not(formula_from_sexp(args[0], two_level))
    if head == "or":
        return L.Or(tuple(formula_from_sexp(a, two_level) for a in args))
    if head == "and":
        return L.And(tuple(formula_from_sexp(a, two_level) for a in args))
    if head == "true":
        return L.true_()
    if head == "false":
        return L.false_()
    if head == "->":
        return L.implies(
            formula_from_sexp(args[0], two_level), formula_from_sexp(args[1], two_level)
        )
    if head == "<->":
        return L.iff(
            formula_from_sexp(args[0], two_level), formula_from_sexp(args[1], two_level)
        )
    if head in ("exists1", "exists2", "forall1", "forall2"):
        var = args[0]
        want_set = head.endswith("2")
        if L.is_set_var(var) != want_set:
            raise FormatError(f"{head} expects a {'set' if want_set else 'node'} variable, got {var!r}")
        body = formula_from_sexp(args[1], two_level)
        return L.Exists(var, body) if head.startswith("exists") else L.Forall(var, body)
    # macro heads expand at parse time
    if head in ("edge-any", "path", "eq", "exclusive"):
        return L.build_macro(head, _labelset(args[0]), *args[1:])
    if head in ("closed", "first", "last"):
        return L.build_macro(head, _labelset(args[0]), *args[1:])
    if head == "string":
        return L.build_macro("string", _labelset(args[0]))
    if head == "ec":
        return L.build_macro("ec", _labelset(args[0]), args[1], args[2])
    if head in ("union", "subset", "eq-nodes"):
        return L.build_macro(head, *args)
    raise FormatError(f"unknown formula head {head!r}")


def parse_formula(text, two_level=False) -> L.Formula:
    return formula_from_sexp(read_sexp(text), two_level)


def _sym_str(symbol):
    if isinstance(symbol, tuple):
        return "(" + " ".join(_sym_str(p) for p in symbol) + ")"
    return str(symbol)


def formula_to_sexp(phi) -> str:
    if isinstance(phi, L.Lab):
        return f"(lab {_sym_str(phi.sigma)} {phi.x})"
    if isinstance(phi, L.Edge):
        return f"(edge {_sym_str(phi.gamma)} {phi.x} {phi.y})"
    if isinstance(phi, L.In):
        return f"(in {phi.x} {phi.X})"
    if isinstance(phi, L.MemberEq):
        return f"(member-eq {phi.x} {phi.X})"
    if isinstance(phi, L.Next):
        return f"(next {phi.theta} {phi.x} {phi.y})"
    if isinstance(phi, L.Not):
        return f"(not {formula_to_sexp(phi.sub)})"
    if isinstance(phi, L.Or):
        return "(or" + "".join(" " + formula_to_sexp(p) for p in phi.items) + ")"
    if isinstance(phi, L.And):
        return "(and" + "".join(" " + formula_to_sexp(p) for p in phi.items) + ")"
    if isinstance(phi, L.Exists):
        head = "exists2" if L.is_set_var(phi.var) else "exists1"
        return f"({head} {phi.var} {formula_to_sexp(phi.body)})"
    if isinstance(phi, L.Forall):
        head = "forall2" if L.is_set_var(phi.var) else "forall1"
        return f"({head} {phi.var} {formula_to_sexp(phi.body)})"
    raise TypeError(f"not a formula: {phi!r}")


# ----------------------------------------------------------- line formats

def _line_symbol(text):
    if "," in text:
        return tuple(text.split(","))
    return text


def _line_sym_str(symbol):
    if isinstance(symbol, tuple):
        return ",".join(_line_sym_str(p) for p in symbol)
    return str(symbol)


def _content_lines(text):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line


def parse_graph(text) -> Graph:
    labels = {}
    edges = []
    for i, line in _content_lines(text):
        parts = line.split()
        if parts[0] == "node" and len(parts) == 3 and parts[2].startswith("label="):
            try:
                node = int(parts[1])
            except ValueError:
                raise FormatError(f"node id must be an integer, got {parts[1]!r}", i)
            labels[node] = _line_symbol(parts[2][6:])
        elif (
            parts[0] == "edge"
            and len(parts) == 5
            and parts[2] == "->"
            and parts[4].startswith("label=")
        ):
            try:
                u, v = int(parts[1]), int(parts[3])
            except ValueError:
                raise FormatError("edge endpoints must be integers", i)
            edges.append((u, _line_symbol(parts[4][6:]), v))
        else:
            raise FormatError(f"bad graph line: {line!r}", i)
    if not labels:
        raise FormatError("a graph needs at least one node line")
    return Graph(labels, edges)


def serialize_graph(g: Graph) -> str:
    lines = [f"node {u} label={_line_sym_str(g.labels[u])}" for u in g.nodes]
    lines += [
        f"edge {u} -> {v} label={_line_sym_str(lab)}" for u, lab, v in g.sorted_edges()
    ]
    return "\n".join(lines) + "\n"


def parse_nfa(text) -> NFA:
    alphabet = []
    states = []
    initial = set()
    final = set()
    transitions = []
    for i, line in _content_lines(text):
        parts = line.split()
        if parts[0] == "alphabet":
            alphabet.extend(_line_symbol(p) for p in parts[1:])
        elif parts[0] == "state":
            states.append(parts[1])
            for flag in parts[2:]:
                if flag == "initial":
                    initial.add(parts[1])
                elif flag == "final":
                    final.add(parts[1])
                else:
                    raise FormatError(f"unknown state flag {flag!r}", i)
        elif parts[0] == "trans" and len(parts) == 4:
            transitions.append((parts[1], _line_symbol(parts[2]), parts[3]))
        else:
            raise FormatError(f"bad nfa line: {line!r}", i)
    if not alphabet:
        raise FormatError("nfa needs an alphabet line")
    return NFA(alphabet, states, initial, final, transitions)


def serialize_nfa(n: NFA) -> str:
    lines = ["alphabet " + " ".join(_line_sym_str(s) for s in sorted(n.alphabet, key=label_key))]
    for q in sorted(n.states, key=repr):
        flags = ""
        if q in n.initial:
            flags += " initial"
        if q in n.final:
            flags += " final"
        lines.append(f"state {q}{flags}")
    for q, sym, q2 in sorted(n.transitions, key=repr):
        lines.append(f"trans {q} {_line_sym_str(sym)} {q2}")
    return "\n".join(lines) + "\n"


def parse_automaton(text) -> SAutomaton:
    alphabet = []
    states = []
    initial = set()
    final = set()
    transitions = []
    for i, line in _content_lines(text):
        parts = line.split()
        if parts[0] == "alphabet":
            alphabet.extend(parts[1:])
        elif parts[0] == "state":
            states.append(parts[1])
            for flag in parts[2:]:
                if flag == "initial":
                    initial.add(parts[1])
                elif flag == "final":
                    final.add(parts[1])
                else:
                    raise FormatError(f"unknown state flag {flag!r}", i)
        elif parts[0] == "trans" and len(parts) == 5:
            transitions.append((parts[1], parts[2], parts[3], parts[4]))
        else:
            raise FormatError(f"bad automaton line: {line!r}", i)
    if not alphabet:
        raise FormatError("automaton needs an alphabet line")
    return SAutomaton(alphabet, states, initial, final, transitions)


def serialize_automaton(m: SAutomaton) -> str:
    lines = ["alphabet " + " ".join(str(s) for s in sorted(m.alphabet, key=label_key))]
    for q in sorted(m.states, key=repr):
        flags = ""
        if q in m.initial:
            flags += " initial"
        if q in m.final:
            flags += " final"
        lines.append(f"state {q}{flags}")
    for q, alpha, theta, q2 in sorted(m.transitions, key=repr):
        lines.append(f"trans {q} {alpha} {theta} {q2}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------- block formats

def _blocks(text):
    """Split into (header-lines, named blocks); blocks run from a
    `begin <kind> <args...>` line to the matching `end`."""
    headers = []
    blocks = []
    current = None
    for i, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip() if current is None else raw.rstrip()
        if current is None:
            line = stripped.strip()
            if not line:
                continue
            if line.startswith("begin "):
                current = (line.split()[1:], [])
            else:
                headers.append((i, line))
        else:
            if stripped.strip() == "end":
                blocks.append((current[0], "\n".join(current[1])))
                current = None
            else:
                current[1].append(raw)
    if current is not None:
        raise FormatError("unterminated block")
    return headers, blocks


def parse_storage(text):
    """An MSO storage description, or a native-backend reference of the
    form `native-storage <builtin-name>` (returned as ('native', name))."""
    headers, blocks = _blocks(text)
    fields = {}
    for i, line in headers:
        parts = line.split()
        if parts[0] == "native-storage":
            return ("native", parts[1])
        fields.setdefault(parts[0], []).extend(parts[1:])
    if "storage" not in fields:
        raise FormatError("missing `storage <name>` line")
    name = fields["storage"][0]
    sigma = frozenset(_line_symbol(s) for s in fields.get("sigma", []))
    gamma = frozenset(_line_symbol(s) for s in fields.get("gamma", []))
    g_in = None
    phi_c = None
    instructions = []
    for args, body in blocks:
        if args[0] == "graph":
            g_in = parse_graph(body)
        elif args[0] == "formula" and args[1] == "config":
            phi_c = parse_formula(body)
        elif args[0] == "instruction":
            instructions.append((args[1], parse_formula(body)))
        else:
            raise FormatError(f"unknown block {' '.join(args)!r}")
    if g_in is None or phi_c is None:
        raise FormatError("storage needs a graph block and a config formula block")
    return MsoStorage(
        name=name,
        sigma=sigma,
        gamma=gamma,
        phi_c=phi_c,
        g_in=g_in,
        instructions=tuple(instructions),
    )


def serialize_storage(s: MsoStorage) -> str:
    lines = [f"storage {s.name}"]
    lines.append("sigma " + " ".join(_line_sym_str(x) for x in sorted(s.sigma, key=label_key)))
    lines.append("gamma " + " ".join(_line_sym_str(x) for x in sorted(s.gamma, key=label_key)))
    lines.append("begin graph initial")
    lines.append(serialize_graph(s.g_in).rstrip("\n"))
    lines.append("end")
    lines.append("begin formula config")
    lines.append(formula_to_sexp(s.phi_c))
    lines.append("end")
    for name, phi in s.instructions:
        lines.append(f"begin instruction {name}")
        lines.append(formula_to_sexp(phi))
        lines.append("end")
    return "\n".join(lines) + "\n"


def serialize_native_reference(name) -> str:
    return f"native-storage {name}\n"


def parse_transducer(text) -> MsoTransducer:
    headers, blocks = _blocks(text)
    fields = {}
    for i, line in headers:
        parts = line.split()
        fields.setdefault(parts[0], []).extend(parts[1:])
    if "transducer" not in fields:
        raise FormatError("missing `transducer <name>` line")
    sigma = frozenset(_line_symbol(s) for s in fields.get("sigma", []))
    gamma = frozenset(_line_symbol(s) for s in fields.get("gamma", []))
    params = tuple(fields.get("params", []))
    duplicates = tuple(fields.get("duplicates", []))
    chi = L.true_()
    nodes = []
    edges = []
    for args, body in blocks:
        if args[0] == "chi":
            chi = parse_formula(body)
        elif args[0] == "node" and len(args) == 3:
            nodes.append(((_line_symbol(args[1]), args[2]), parse_formula(body)))
        elif args[0] == "edge" and len(args) == 4:
            edges.append(((_line_symbol(args[1]), args[2], args[3]), parse_formula(body)))
        else:
            raise FormatError(f"unknown block {' '.join(args)!r}")
    return MsoTransducer(
        sigma=sigma,
        gamma=gamma,
        params=params,
        chi=chi,
        duplicates=duplicates,
        node_formulas=tuple(nodes),
        edge_formulas=tuple(edges),
    )


def serialize_transducer(t: MsoTransducer) -> str:
    lines = ["transducer t"]
    lines.append("sigma " + " ".join(_line_sym_str(x) for x in sorted(t.sigma, key=label_key)))
    lines.append("gamma " + " ".join(_line_sym_str(x) for x in sorted(t.gamma, key=label_key)))
    if t.params:
        lines.append("params " + " ".join(t.params))
    lines.append("duplicates " + " ".join(t.duplicates))
    lines.append("begin chi")
    lines.append(formula_to_sexp(t.chi))
    lines.append("end")
    for (sigma, d), phi in t.node_formulas:
        lines.append(f"begin node {_line_sym_str(sigma)} {d}")
        lines.append(formula_to_sexp(phi))
        lines.append("end")
    for (gamma, d, d2), phi in t.edge_formulas:
        lines.append(f"begin edge {_line_sym_str(gamma)} {d} {d2}")
        lines.append(formula_to_sexp(phi))
        lines.append("end")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------- DOT

def _biclique_groups(g: Graph, label):
    """Class pairs whose `label`-edges form complete bicliques (for the
    collapsed rendering); returns (classes, collapsed edge list) or None."""
    from .graphs import delta_components

    classes = delta_components(g, {label})
    index = {u: i for i, cls in enumerate(classes) for u in cls}
    pairs = {}
    for u, lab, v in g.edges:
        if lab == label:
            pairs.setdefault((index[u], index[v]), set()).add((u, v))
    collapsed = []
    for (i, j), present in pairs.items():
        if len(present) != len(classes[i]) * len(classes[j]):
            return None
        collapsed.append((i, j))
    return classes, collapsed


def to_dot(g: Graph, collapse=True) -> str:
    """DOT rendering; complete bicliques of one label between equivalence
    classes collapse into a single bold representative edge (the data is
    never lossy, only this rendering is)."""
    lines = ["digraph g {"]
    for u in g.nodes:
        lines.append(f'  n{u} [label="{_line_sym_str(g.labels[u])}"];')
    for label in sorted(g.edge_alphabet(), key=label_key):
        group = _biclique_groups(g, label) if collapse else None
        if group is None:
            for u, lab, v in g.sorted_edges():
                if lab == label:
                    lines.append(f'  n{u} -> n{v} [label="{_line_sym_str(label)}"];')
            continue
        classes, collapsed = group
        for i, j in sorted(collapsed):
            size = len(classes[i]) * len(classes[j])
            style = " style=bold" if size > 1 else ""
            lines.append(
                f"  n{min(classes[i])} -> n{min(classes[j])} "
                f'[label="{_line_sym_str(label)}"{style}];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
