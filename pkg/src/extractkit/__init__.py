"""Information extraction as formal languages over signed markers.

Regular extractors are automata and context-free extractors are grammars over
markers ``X_b``; the package evaluates them on documents, builds them from
algebraic expressions and decides table problems on a fixed document.
"""

from .algebra import JoinKind, Merge, Project, Rename, SetOp, UnaryOp
from .automata import ExtractorAutomaton, atomic, parse_automaton, format_automaton
from .errors import ContractError, ExtractError, ParseError, ResourceLimitError
from .grammar import ChomskyNormalGrammar, ExtractorGrammar, parse_grammar, format_grammar
from .markers import Alphabets, GammaTable, GammaTuple, Marker, decode, encode_tuple
from .problems import (
    ProblemAnswer,
    evaluate,
    table_contains,
    table_disjoint,
    table_empty,
    table_equiv,
    tuple_member,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabets",
    "ChomskyNormalGrammar",
    "ContractError",
    "ExtractError",
    "ExtractorAutomaton",
    "ExtractorGrammar",
    "GammaTable",
    "GammaTuple",
    "JoinKind",
    "Marker",
    "Merge",
    "ParseError",
    "ProblemAnswer",
    "Project",
    "Rename",
    "ResourceLimitError",
    "SetOp",
    "UnaryOp",
    "atomic",
    "decode",
    "encode_tuple",
    "evaluate",
    "format_automaton",
    "format_grammar",
    "parse_automaton",
    "parse_grammar",
    "table_contains",
    "table_disjoint",
    "table_empty",
    "table_equiv",
    "tuple_member",
]
