"""Brute-force reference semantics.

Everything here works straight from the definitions: a table is computed by
testing every tuple of the universe for membership, and the operators are
applied at table level.  Grammar membership uses a length-bounded derivation
fixpoint rather than CYK so that the oracle shares no code with the engine's
parser.  Deliberately slow; guarded so it cannot run away.
"""

from __future__ import annotations

from itertools import combinations, product
from typing import Callable, Iterator, Sequence

from .algebra import JoinKind, SetOp, UnaryOp, apply_unary, concat_tables, join_tables, set_op_tables
from .automata import ExtractorAutomaton
from .errors import ContractError, ResourceLimitError
from .grammar import ExtractorGrammar
from .problems import evaluate
from .markers import Alphabets, GammaTable, GammaTuple, Marker, MarkerString, empty_tuple, encode_tuple

__all__ = [
    "UNIVERSE_GUARD",
    "OracleExtractor",
    "universe",
    "oracle_eval",
    "expected_table",
    "oracle_op_check",
    "bounded_language",
]

UNIVERSE_GUARD = 24  # |w| * |gamma| at most, i.e. 2**24 tuples


def bounded_language(G: ExtractorGrammar, n: int) -> set[MarkerString]:
    """All strings of ``L(G)`` of length at most ``n``, by saturating derivations."""
    lang: dict = {a: set() for a in G.nonterminals}
    changed = True
    while changed:
        changed = False
        for head, body in G.rules:
            combos: set[MarkerString] = {()}
            for s in body:
                part = {(s,)} if isinstance(s, Marker) else lang[s]
                combos = {x + y for x in combos for y in part if len(x) + len(y) <= n}
                if not combos:
                    break
            new = combos - lang[head]
            if new:
                lang[head] |= new
                changed = True
    return lang[G.start]


class OracleExtractor:
    """A membership predicate over marker strings plus its context."""

    def __init__(self, source, context: Alphabets | None = None):
        if isinstance(source, ExtractorAutomaton):
            self.context = source.context
            self._member = self._nfa_member(source)
        elif isinstance(source, ExtractorGrammar):
            self.context = source.context
            self._member = self._cfg_member(source)
        elif callable(source):
            if context is None:
                raise ContractError("a predicate needs an explicit context")
            self.context = context
            self._member = source
        else:
            raise ContractError(f"cannot build an oracle from {type(source).__name__}")

    @staticmethod
    def _nfa_member(M: ExtractorAutomaton) -> Callable[[MarkerString], bool]:
        def member(W):
            current = {M.initial}
            for m in W:
                current = {q for p in current for q in M.delta[p].get(m, ())}
            return any(p in M.finals for p in current)

        return member

    @staticmethod
    def _cfg_member(G: ExtractorGrammar) -> Callable[[MarkerString], bool]:
        cache: dict[int, set[MarkerString]] = {}

        def member(W):
            n = len(W)
            if n not in cache:
                cache[n] = bounded_language(G, n)
            return tuple(W) in cache[n]

        return member

    def __call__(self, W: Sequence[Marker]) -> bool:
        return self._member(tuple(W))


def universe(w: str, gamma) -> Iterator[GammaTuple]:
    """Every tuple over ``gamma`` for documents of length ``|w|``, in a fixed order."""
    attrs = sorted(gamma)
    n = len(w)
    if n * len(attrs) > UNIVERSE_GUARD:
        raise ResourceLimitError(
            f"tuple universe 2^{n * len(attrs)} exceeds the oracle guard 2^{UNIVERSE_GUARD}",
            used=n * len(attrs),
            limit=UNIVERSE_GUARD,
        )
    positions = range(1, n + 1)
    subsets = [frozenset(c) for r in range(n + 1) for c in combinations(positions, r)]
    for choice in product(subsets, repeat=len(attrs)):
        yield GammaTuple(n, tuple(zip(attrs, choice)))


def oracle_eval(E, w: str) -> GammaTable:
    """``E(w)`` by testing every tuple of the universe."""
    oracle = E if isinstance(E, OracleExtractor) else OracleExtractor(E)
    gamma = oracle.context.gamma
    rows = [t for t in universe(w, gamma) if oracle(encode_tuple(w, t))]
    return GammaTable(gamma, len(w), rows)


def _star_table(E, w: str, gamma, table_of) -> GammaTable:
    memo: dict[int, GammaTable] = {len(w): GammaTable(gamma, 0, [empty_tuple(gamma)])}
    for i in range(len(w) - 1, -1, -1):
        rows = set()
        for j in range(i + 1, len(w) + 1):
            rows |= concat_tables(table_of(E, w[i:j]), memo[j]).rows
        memo[i] = GammaTable(gamma, len(w) - i, rows)
    return memo[0]


def expected_table(op: str, operands: Sequence, w: str, param=None, table_of=None) -> GammaTable:
    """The table-level definition of ``op`` applied to the oracle tables of ``operands``.

    ``op`` is one of ``union``, ``intersect``, ``difference``, ``complement``,
    ``concat``, ``star``, ``join`` (``param`` a :class:`JoinKind`) and
    ``unary`` (``param`` a :class:`UnaryOp`).  ``table_of(E, w)`` supplies the
    operand tables and defaults to :func:`oracle_eval`; callers may pass a cache.
    """
    if table_of is None:
        table_of = oracle_eval
    if op in ("union", "intersect", "difference"):
        E1, E2 = operands
        return set_op_tables(table_of(E1, w), table_of(E2, w), SetOp[op.upper()])
    if op == "join":
        E1, E2 = operands
        kind = param if isinstance(param, JoinKind) else JoinKind(param)
        return join_tables(table_of(E1, w), table_of(E2, w), kind)
    if op == "complement":
        (E,) = operands
        T = table_of(E, w)
        return GammaTable(T.gamma, len(w), set(universe(w, T.gamma)) - T.rows)
    if op == "concat":
        E1, E2 = operands
        gamma = E1.context.gamma | E2.context.gamma
        rows = set()
        for k in range(len(w) + 1):
            rows |= concat_tables(table_of(E1, w[:k]), table_of(E2, w[k:])).rows
        return GammaTable(gamma, len(w), rows)
    if op == "star":
        (E,) = operands
        return _star_table(E, w, E.context.gamma, table_of)
    if op == "unary":
        (E,) = operands
        if not isinstance(param, UnaryOp):
            raise ContractError("unary check needs a UnaryOp parameter")
        return apply_unary(table_of(E, w), param)
    raise ContractError(f"unknown operator {op!r}")


def oracle_op_check(op: str, operands: Sequence, w: str, result, param=None) -> bool:
    """Whether the engine's table for ``result`` equals the definition of ``op`` on ``w``."""
    return evaluate(result, w) == expected_table(op, operands, w, param)
