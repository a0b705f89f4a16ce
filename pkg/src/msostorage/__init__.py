"""Graph storage types in monadic second-order logic.

Graphs double as storage configurations; instructions are closed formulas
over pair graphs; automata with such storage accept strings and
string-like graphs; and the classical logic/automaton translations lift
to a two-level logic over the storage.  Everything is checked exactly at
desk scale.
"""

from .graphs import (
    EMPTY,
    NU,
    STAR,
    Graph,
    PairView,
    StringLikeView,
    as_pair_view,
    as_string_like,
    delta_components,
    ed_gr,
    induced_subgraph,
    iso_equal,
    nd_gr,
    new_graph,
    relabel_edges,
    string_graph,
)
from .semantics import EvalContext, evaluate, satisfies
from .storage import (
    MsoStorage,
    NativeStorage,
    behaviours,
    check_exclusive,
    enrich,
    enrich_native,
    mso_member,
    mso_successors,
    triv_mso,
    triv_native,
)
from .automata import (
    NFA,
    Run,
    SAutomaton,
    build_witness_graph,
    find_accepting_runs,
    nfa_accepts,
    nfa_combine,
    reset_combine,
    s_accepts_graph,
    s_accepts_string,
    stringlike_formula,
    to_word_nfa,
)
from .bet import mso_to_nfa, nfa_to_mso
from .twolevel import (
    automaton_to_saformula,
    beh_formula,
    embed,
    eval_sa,
    lift,
    lower,
    saformula_to_automaton,
)
from .transducers import (
    MsoTransducer,
    apply_transducer,
    collapse_transducer,
    copy_transducer,
    expressibility_formula,
    origin_pair,
)
from .pushdown import anbn_automaton, iterate, pushdown_mso, pushdown_native
from .stack import stack_mso, stack_native, stack_witness_pair, wwrw_automaton

__all__ = [name for name in dir() if not name.startswith("_")]
