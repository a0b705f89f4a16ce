"""Exception types shared across the library."""


class MsoStorageError(Exception):
    """Base class for all library errors."""


class EmptyGraph(MsoStorageError):
    """Graphs must have at least one node."""


class LoopEdge(MsoStorageError):
    """Edges with equal source and target are not allowed."""


class DanglingEdge(MsoStorageError):
    """An edge endpoint was not declared as a node."""


class UnknownNode(MsoStorageError):
    """A node id is not part of the graph."""


class NotPairGraph(MsoStorageError):
    """The nu-edges do not form the biclique of an ordered 2-partition."""


class NotStringLike(MsoStorageError):
    """The graph is not string-like; `reason` is one of
    'bad_link_structure', 'stray_gamma_edge', 'wrong_first_component'."""

    def __init__(self, reason, detail=""):
        super().__init__(f"{reason}{': ' + detail if detail else ''}")
        self.reason = reason


class SizeLimit(MsoStorageError):
    """A bounded exhaustive computation exceeded its configured budget."""


class UnboundVariable(MsoStorageError):
    """A free variable of the formula has no value in the valuation."""


class VariableClash(MsoStorageError):
    """A variable name collides with one already used in the formula."""


class UnknownMacro(MsoStorageError):
    """No macro builder under that name."""


class UnknownSymbol(MsoStorageError):
    """An input symbol is not part of the automaton's alphabet."""


class AlphabetMismatch(MsoStorageError):
    """Symbol sets of the combined objects are incompatible."""


class AlphabetClash(AlphabetMismatch):
    """A reserved symbol collides with a user alphabet."""


class StateBlowup(SizeLimit):
    """Determinization exceeded the configured state budget."""


class BudgetExhausted(MsoStorageError):
    """A search was cut off while its frontier was still nonempty.

    Distinct from rejection: the searched property may still hold.
    """


class NotASuccessor(MsoStorageError):
    """The claimed configuration is not reachable by the instruction."""


class InvalidRun(MsoStorageError):
    """The transition/configuration sequence is not a run of the automaton."""


class StorageMismatch(MsoStorageError):
    """The automata do not share a compatible storage."""


class DepthLimit(MsoStorageError):
    """Pushdown iteration deeper than the configured bound."""


class NotInDomain(MsoStorageError):
    """The transducer's domain formula rejected the input."""


class EmptyOutput(MsoStorageError):
    """The transduction produced no output nodes (graphs must be nonempty)."""


class FormatError(MsoStorageError):
    """Syntax error in one of the text formats."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
