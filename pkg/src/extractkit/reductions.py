"""Instance generators for the two hardness reductions, plus brute-force solvers.

* 3-CNF satisfiability to table containment of two automata on ``a^n``.
* Bounded PCP to table disjointness of two grammars on ``a^k # a^(k*p)``.

The brute-force solvers exist to validate the reductions in tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .automata import ExtractorAutomaton
from .errors import ContractError, ParseError
from .grammar import ExtractorGrammar
from .markers import Alphabets, Marker

__all__ = [
    "CnfFormula",
    "PcpInstance",
    "sat_to_containment",
    "pcp_to_disjointness",
    "brute_force_sat",
    "brute_force_pcp",
    "random_3cnf",
    "random_pcp",
    "parse_dimacs",
    "format_dimacs",
    "parse_pcp",
    "format_pcp",
    "pcp_index_attr",
]

TRUE, FALSE = Marker("a", ["t"]), Marker("a", ["f"])


@dataclass(frozen=True)
class CnfFormula:
    """Clauses of exactly three literals; literal ``k`` is ``v_k``, ``-k`` its negation."""

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ContractError("a formula needs at least one variable")
        clauses = tuple(tuple(c) for c in self.clauses)
        for c in clauses:
            if len(c) != 3:
                raise ContractError(f"clause {c} does not have exactly 3 literals")
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ContractError(f"literal {lit} out of range 1..{self.num_vars}")
        object.__setattr__(self, "clauses", clauses)

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        return all(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)


def sat_to_containment(F: CnfFormula) -> tuple[ExtractorAutomaton, ExtractorAutomaton, str]:
    """``M1(w)`` is contained in ``M2(w)`` iff ``F`` is unsatisfiable.

    ``M1`` is a DFA for all assignment encodings (``{t}:a`` or ``{f}:a`` per
    variable); ``M2`` has one branch per clause accepting exactly the
    assignments that falsify it.
    """
    n = F.num_vars
    ctx = Alphabets("a", ["t", "f"])
    chain = [(i, m, i + 1) for i in range(n) for m in (TRUE, FALSE)]
    M1 = ExtractorAutomaton(ctx, n + 1, 0, [n], chain)

    trans = []
    finals = []
    num_states = 1
    for clause in F.clauses:
        pos = {l for l in clause if l > 0}
        neg = {-l for l in clause if l < 0}
        if pos & neg:
            continue  # tautological clause: nothing falsifies it
        prev = 0
        for i in range(1, n + 1):
            if i in pos:
                allowed = (FALSE,)
            elif i in neg:
                allowed = (TRUE,)
            else:
                allowed = (TRUE, FALSE)
            state = num_states
            num_states += 1
            trans.extend((prev, m, state) for m in allowed)
            prev = state
        finals.append(prev)
    M2 = ExtractorAutomaton(ctx, num_states, 0, finals, trans)
    return M1, M2, "a" * n


def brute_force_sat(F: CnfFormula) -> tuple[bool, ...] | None:
    """A satisfying assignment, or ``None``."""
    for bits in product((True, False), repeat=F.num_vars):
        if F.satisfied_by(bits):
            return bits
    return None


def random_3cnf(num_vars: int, num_clauses: int, rng: random.Random) -> CnfFormula:
    clauses = []
    for _ in range(num_clauses):
        clause = tuple(rng.choice((1, -1)) * rng.randint(1, num_vars) for _ in range(3))
        clauses.append(clause)
    return CnfFormula(num_vars, tuple(clauses))


def parse_dimacs(text: str) -> CnfFormula:
    num_vars = None
    literals: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("expected 'p cnf <vars> <clauses>'", lineno, 1)
            try:
                num_vars = int(parts[2])
            except ValueError:
                raise ParseError("variable count must be an integer", lineno) from None
            continue
        for tok in line.split():
            try:
                literals.append(int(tok))
            except ValueError:
                raise ParseError(f"not a literal: {tok!r}", lineno) from None
    if num_vars is None:
        raise ParseError("missing 'p cnf' header")
    clauses, current = [], []
    for lit in literals:
        if lit == 0:
            clauses.append(tuple(current))
            current = []
        else:
            current.append(lit)
    if current:
        clauses.append(tuple(current))
    try:
        return CnfFormula(num_vars, tuple(clauses))
    except ContractError as exc:
        raise ParseError(str(exc)) from None


def format_dimacs(F: CnfFormula) -> str:
    lines = [f"p cnf {F.num_vars} {len(F.clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in F.clauses]
    return "\n".join(lines) + "\n"


# -- bounded PCP ---------------------------------------------------------------------


@dataclass(frozen=True)
class PcpInstance:
    pairs: tuple[tuple[str, str], ...]
    bound: int

    def __post_init__(self):
        pairs = tuple((u, v) for u, v in self.pairs)
        if not pairs:
            raise ContractError("a PCP instance needs at least one pair")
        if self.bound < 1:
            raise ContractError("the bound must be at least 1")
        object.__setattr__(self, "pairs", pairs)

    @property
    def letters(self) -> frozenset[str]:
        return frozenset("".join(u + v for u, v in self.pairs))

    @property
    def p_max(self) -> int:
        return max(max(len(u), len(v)) for u, v in self.pairs)

    @property
    def document(self) -> str:
        return "a" * self.bound + "#" + "a" * (self.bound * self.p_max)


def pcp_index_attr(i: int) -> str:
    """Attribute name for pair index ``i`` (1-based); kept apart from the letters."""
    return f"i{i}"


def _pcp_grammar(P: PcpInstance, side: int, ctx: Alphabets) -> ExtractorGrammar:
    k, pm = P.bound, P.p_max
    empty_a, hash_ = Marker("a"), Marker("#")

    def word(u: str) -> list[Marker]:
        return [Marker("a", [c]) for c in u]

    def name(q: int, r: int) -> str:
        return f"B_{q}_{r}"

    rules = []
    todo = []
    for i, pair in enumerate(P.pairs, start=1):
        u = pair[side]
        rules.append(("S", [Marker("a", [pcp_index_attr(i)]), name(1, len(u)), *word(u)]))
        todo.append((1, len(u)))
    seen = set(todo)
    while todo:
        q, r = todo.pop()
        rules.append((name(q, r), [empty_a] * (k - q) + [hash_] + [empty_a] * (k * pm - r)))
        if q + 1 > k:
            continue
        for i, pair in enumerate(P.pairs, start=1):
            u = pair[side]
            nxt = (q + 1, r + len(u))
            rules.append((name(q, r), [Marker("a", [pcp_index_attr(i)]), name(*nxt), *word(u)]))
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return ExtractorGrammar(ctx, "S", rules)


def pcp_to_disjointness(P: PcpInstance) -> tuple[ExtractorGrammar, ExtractorGrammar, str]:
    """``G1(w)`` and ``G2(w)`` intersect iff ``P`` has a solution of length at most the bound.

    A derivation choosing ``i_1 .. i_q`` emits the index markers in order and
    the ``u`` (resp. ``v``) blocks in reverse order.  A common string therefore
    witnesses a solution read backwards, which is again a solution.
    """
    for u, v in P.pairs:
        if not u or not v:
            raise ContractError("all PCP strings must be non-empty")
    gamma = {pcp_index_attr(i) for i in range(1, len(P.pairs) + 1)} | P.letters
    ctx = Alphabets("a#", gamma)
    return _pcp_grammar(P, 0, ctx), _pcp_grammar(P, 1, ctx), P.document


def brute_force_pcp(P: PcpInstance) -> tuple[int, ...] | None:
    """A shortest solution (1-based indices) of length at most the bound, or ``None``."""
    n = len(P.pairs)
    for q in range(1, P.bound + 1):
        for seq in product(range(n), repeat=q):
            top = "".join(P.pairs[i][0] for i in seq)
            bottom = "".join(P.pairs[i][1] for i in seq)
            if top == bottom:
                return tuple(i + 1 for i in seq)
    return None


def random_pcp(
    rng: random.Random, max_pairs: int = 3, max_bound: int = 3, max_len: int = 2, letters: str = "xy"
) -> PcpInstance:
    def word():
        return "".join(rng.choice(letters) for _ in range(rng.randint(1, max_len)))

    pairs = tuple((word(), word()) for _ in range(rng.randint(1, max_pairs)))
    return PcpInstance(pairs, rng.randint(1, max_bound))


def parse_pcp(text: str) -> PcpInstance:
    """``bound: k`` followed by one ``u v`` pair per line."""
    bound = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower().startswith("bound:"):
            try:
                bound = int(line.split(":", 1)[1])
            except ValueError:
                raise ParseError("bound must be an integer", lineno) from None
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected two strings 'u v'", lineno, 1)
        pairs.append((parts[0], parts[1]))
    if bound is None:
        raise ParseError("missing 'bound:' line")
    try:
        return PcpInstance(tuple(pairs), bound)
    except ContractError as exc:
        raise ParseError(str(exc)) from None


def format_pcp(P: PcpInstance) -> str:
    return f"bound: {P.bound}\n" + "".join(f"{u} {v}\n" for u, v in P.pairs)
