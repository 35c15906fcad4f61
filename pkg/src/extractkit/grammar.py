"""Context-free extractors: grammars whose terminals are signed markers.

Nonterminals may be any hashable value other than a :class:`Marker`; the
constructions below build tuples so that fresh names never collide with
user-written string names.  The text format renames them on output.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Hashable, Iterable, Sequence

from .algebra import UnaryOp
from .automata import ExtractorAutomaton
from .errors import ContractError, ParseError, ResourceLimitError
from .markers import (
    Alphabets,
    GammaTable,
    Marker,
    MarkerString,
    decode,
    format_marker,
    parse_marker,
)

__all__ = [
    "ExtractorGrammar",
    "ChomskyNormalGrammar",
    "DEFAULT_ROW_BUDGET",
    "Cost",
    "cfg_union",
    "cfg_concat",
    "cfg_star",
    "cfg_closure",
    "cfg_unary",
    "to_cnf",
    "cyk_member",
    "cyk",
    "erase_to_sign",
    "intersect_with_automaton",
    "cfg_emptiness",
    "cfg_sample",
    "line_automaton",
    "enumerate_slice_cfg",
    "evaluate_cfg",
    "parse_grammar",
    "format_grammar",
]

DEFAULT_ROW_BUDGET = 10**5

Symbol = Hashable  # a Marker or a nonterminal
Rule = tuple[Hashable, tuple[Symbol, ...]]


@dataclass
class Cost:
    """Work counters reported by the decision procedures."""

    nodes: int = 0
    arcs: int = 0
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"nodes": self.nodes, "arcs": self.arcs, "seconds": round(self.seconds, 6)}


class ExtractorGrammar:
    """A context-free grammar over markers of ``context``."""

    def __init__(self, context: Alphabets, start: Hashable, rules: Iterable[tuple[Hashable, Sequence[Symbol]]]):
        seen = set()
        ordered: list[Rule] = []
        for head, body in rules:
            if isinstance(head, Marker):
                raise ContractError("rule head must be a nonterminal")
            body = tuple(body)
            for s in body:
                if isinstance(s, Marker):
                    context.check_marker(s)
            if (head, body) not in seen:
                seen.add((head, body))
                ordered.append((head, body))
        self.context = context
        self.start = start
        self.rules: tuple[Rule, ...] = tuple(ordered)
        self._cnf: ChomskyNormalGrammar | None = None

    @property
    def nonterminals(self) -> frozenset:
        nts = {self.start}
        for head, body in self.rules:
            nts.add(head)
            nts.update(s for s in body if not isinstance(s, Marker))
        return frozenset(nts)

    def markers(self) -> frozenset[Marker]:
        return frozenset(s for _, body in self.rules for s in body if isinstance(s, Marker))

    @property
    def size(self) -> int:
        return sum(1 + len(body) for _, body in self.rules)

    def rules_for(self, head: Hashable) -> list[tuple[Symbol, ...]]:
        return [body for h, body in self.rules if h == head]

    @property
    def cnf(self) -> ChomskyNormalGrammar:
        if self._cnf is None:
            self._cnf = to_cnf(self)
        return self._cnf

    def accepts(self, W: Sequence[Marker]) -> bool:
        return cyk_member(self, W)

    def with_context(self, context: Alphabets) -> ExtractorGrammar:
        if not (self.context.sigma <= context.sigma and self.context.gamma <= context.gamma):
            raise ContractError("new context must contain the old one")
        return ExtractorGrammar(context, self.start, self.rules)

    def __repr__(self) -> str:
        return f"<CFG rules={len(self.rules)} nonterminals={len(self.nonterminals)} {self.context!r}>"


class ChomskyNormalGrammar(ExtractorGrammar):
    """Rules are ``A -> B C``, ``A -> marker`` or ``start -> eps``; the start
    symbol never occurs on a right-hand side."""

    def __init__(self, context, start, rules):
        super().__init__(context, start, rules)
        self.terminal_rules: dict[Marker, list] = defaultdict(list)
        self.binary_rules: list[tuple[Hashable, Hashable, Hashable]] = []
        self.nullable = False
        for head, body in self.rules:
            if not body:
                if head != start:
                    raise ContractError("only the start symbol may derive eps in normal form")
                self.nullable = True
            elif len(body) == 1 and isinstance(body[0], Marker):
                self.terminal_rules[body[0]].append(head)
            elif len(body) == 2 and not any(isinstance(s, Marker) for s in body):
                if start in body:
                    raise ContractError("start symbol on a right-hand side")
                self.binary_rules.append((head, body[0], body[1]))
            else:
                raise ContractError(f"rule {head!r} -> {body!r} is not in normal form")
        self.terminal_rules = dict(self.terminal_rules)
        self.by_left: dict[Hashable, list[tuple[Hashable, Hashable]]] = defaultdict(list)
        for a, b, c in self.binary_rules:
            self.by_left[b].append((a, c))
        self.by_left = dict(self.by_left)
        self._cnf = self


# -- closure constructions -------------------------------------------------------


def _tag(G: ExtractorGrammar, tag) -> list[Rule]:
    def t(s):
        return s if isinstance(s, Marker) else (tag, s)

    return [((tag, h), tuple(t(s) for s in body)) for h, body in G.rules]


def _unified(G1: ExtractorGrammar, G2: ExtractorGrammar) -> Alphabets:
    if G1.context.sigma != G2.context.sigma:
        raise ContractError("operands must share the terminal alphabet")
    return G1.context.union(G2.context)


_START = "S"


def cfg_union(G1: ExtractorGrammar, G2: ExtractorGrammar) -> ExtractorGrammar:
    rules = [(_START, ((1, G1.start),)), (_START, ((2, G2.start),))]
    return ExtractorGrammar(_unified(G1, G2), _START, rules + _tag(G1, 1) + _tag(G2, 2))


def cfg_concat(G1: ExtractorGrammar, G2: ExtractorGrammar) -> ExtractorGrammar:
    rules = [(_START, ((1, G1.start), (2, G2.start)))]
    return ExtractorGrammar(_unified(G1, G2), _START, rules + _tag(G1, 1) + _tag(G2, 2))


def cfg_star(G: ExtractorGrammar) -> ExtractorGrammar:
    rules = [(_START, (_START, (1, G.start))), (_START, ())]
    return ExtractorGrammar(G.context, _START, rules + _tag(G, 1))


def cfg_closure(G1: ExtractorGrammar, G2: ExtractorGrammar, op: str) -> ExtractorGrammar:
    """``op`` is ``"union"`` or ``"concat"``; the other operations are not context-free."""
    if op in ("union", "|", "∪"):
        return cfg_union(G1, G2)
    if op in ("concat", "·", "."):
        return cfg_concat(G1, G2)
    raise ContractError(f"context-free extractors are not closed under {op!r}")


def cfg_unary(G: ExtractorGrammar, f: UnaryOp) -> ExtractorGrammar:
    f.check(G.context.gamma)
    ctx = G.context.with_gamma(f.target(G.context.gamma))
    rules = [
        (h, tuple(f.on_marker(s) if isinstance(s, Marker) else s for s in body))
        for h, body in G.rules
    ]
    return ExtractorGrammar(ctx, G.start, rules)


def erase_to_sign(G: ExtractorGrammar) -> ExtractorGrammar:
    """Replace every marker ``X_b`` by ``{}_b``."""
    rules = [
        (h, tuple(s.erased() if isinstance(s, Marker) else s for s in body))
        for h, body in G.rules
    ]
    return ExtractorGrammar(G.context, G.start, rules)


# -- normal form ------------------------------------------------------------------------


def _productive(rules: Sequence[Rule]) -> set:
    productive: set = set()
    changed = True
    while changed:
        changed = False
        for h, body in rules:
            if h not in productive and all(isinstance(s, Marker) or s in productive for s in body):
                productive.add(h)
                changed = True
    return productive


def _reachable_from(start, rules: Sequence[Rule]) -> set:
    by_head = defaultdict(list)
    for h, body in rules:
        by_head[h].append(body)
    seen = {start}
    stack = [start]
    while stack:
        a = stack.pop()
        for body in by_head[a]:
            for s in body:
                if not isinstance(s, Marker) and s not in seen:
                    seen.add(s)
                    stack.append(s)
    return seen


def _clean(start, rules: Sequence[Rule]) -> list[Rule]:
    """Remove rules that mention unproductive or unreachable nonterminals."""
    productive = _productive(rules)
    rules = [
        (h, body)
        for h, body in rules
        if h in productive and all(isinstance(s, Marker) or s in productive for s in body)
    ]
    reach = _reachable_from(start, rules)
    return [(h, body) for h, body in rules if h in reach]


def to_cnf(G: ExtractorGrammar) -> ChomskyNormalGrammar:
    start = ("cnf", "start")
    rules: list[Rule] = [(start, (G.start,))] + list(G.rules)

    # terminals inside long bodies get their own nonterminal
    step: list[Rule] = []
    for h, body in rules:
        if len(body) >= 2:
            body = tuple(("cnf", "t", s) if isinstance(s, Marker) else s for s in body)
        step.append((h, body))
    for m in G.markers():
        step.append((("cnf", "t", m), (m,)))

    # binarize
    rules = []
    for k, (h, body) in enumerate(step):
        if len(body) <= 2:
            rules.append((h, body))
            continue
        head = h
        for j in range(len(body) - 2):
            nxt = ("cnf", "b", k, j)
            rules.append((head, (body[j], nxt)))
            head = nxt
        rules.append((head, body[-2:]))

    # eliminate eps rules
    nullable: set = set()
    changed = True
    while changed:
        changed = False
        for h, body in rules:
            if h not in nullable and all(s in nullable for s in body):
                nullable.add(h)
                changed = True
    no_eps: set[Rule] = set()
    for h, body in rules:
        options = [((s,), ()) if s in nullable else ((s,),) for s in body]
        for choice in product(*options):
            new = tuple(s for part in choice for s in part)
            if new:
                no_eps.add((h, new))

    # eliminate unit rules A -> B
    def is_unit(body):
        return len(body) == 1 and not isinstance(body[0], Marker)

    unit_succ = defaultdict(set)
    for h, body in no_eps:
        if is_unit(body):
            unit_succ[h].add(body[0])
    heads = {h for h, _ in no_eps} | {start}
    proper = defaultdict(list)
    for h, body in no_eps:
        if not is_unit(body):
            proper[h].append(body)
    final: set[Rule] = set()
    for a in heads:
        closure = {a}
        stack = [a]
        while stack:
            b = stack.pop()
            for c in unit_succ[b]:
                if c not in closure:
                    closure.add(c)
                    stack.append(c)
        for b in closure:
            for body in proper[b]:
                final.add((a, body))
    ordered = sorted(final, key=repr)
    cleaned = _clean(start, ordered)
    if G.start in nullable:
        cleaned.append((start, ()))
    return ChomskyNormalGrammar(G.context, start, cleaned)


# -- membership ------------------------------------------------------------------------------


def cyk(G: ExtractorGrammar, W: Sequence[Marker], cost: Cost | None = None) -> bool:
    """CYK membership on the normal form of ``G``; ``cost`` counts cells and split checks."""
    C = G.cnf
    n = len(W)
    if n == 0:
        return C.nullable
    table: list[list[set]] = [[set() for _ in range(n + 1)] for _ in range(n)]
    for i, m in enumerate(W):
        table[i][i + 1] = set(C.terminal_rules.get(m, ()))
    nodes = n
    arcs = 0
    by_left = C.by_left
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            cell = table[i][j]
            nodes += 1
            for k in range(i + 1, j):
                arcs += 1
                left = table[i][k]
                if not left:
                    continue
                right = table[k][j]
                if not right:
                    continue
                for b in left:
                    for a, c in by_left.get(b, ()):
                        if c in right:
                            cell.add(a)
    if cost is not None:
        cost.nodes += nodes
        cost.arcs += arcs
    return C.start in table[0][n]


def cyk_member(G: ExtractorGrammar, W: Sequence[Marker]) -> bool:
    return cyk(G, W)


# -- intersection with an automaton ----------------------------------------------------------


def intersect_with_automaton(G: ExtractorGrammar, M: ExtractorAutomaton) -> ExtractorGrammar:
    """Grammar for ``L(G) & L(M)`` over triples ``(p, A, q)``.

    Only productive triples are generated (bottom-up), and the result is
    trimmed to those reachable from the new start symbol.
    """
    C = G.cnf
    start = ("x", "start")
    by_right: dict[Hashable, list[tuple[Hashable, Hashable]]] = defaultdict(list)
    for a, b, c in C.binary_rules:
        by_right[c].append((a, b))
    present: set = set()
    starts_at: dict[tuple[int, Hashable], set[int]] = defaultdict(set)  # (p, A) -> {q}
    ends_at: dict[tuple[int, Hashable], set[int]] = defaultdict(set)  # (q, A) -> {p}
    rules: list[Rule] = []
    work: list[tuple[int, Hashable, int]] = []

    def add(triple):
        if triple not in present:
            present.add(triple)
            p, a, q = triple
            starts_at[(p, a)].add(q)
            ends_at[(q, a)].add(p)
            work.append(triple)

    for p in range(M.num_states):
        for m, qs in M.delta[p].items():
            for a in C.terminal_rules.get(m, ()):
                for q in qs:
                    rules.append(((p, a, q), (m,)))
                    add((p, a, q))
    while work:
        p, b, r = work.pop()
        # b as the left child: A -> b C with C spanning r..q
        for a, c in C.by_left.get(b, ()):
            for q in list(starts_at.get((r, c), ())):
                rules.append(((p, a, q), ((p, b, r), (r, c, q))))
                add((p, a, q))
        # b as the right child: A -> X b with X spanning p'..p
        for a, x in by_right.get(b, ()):
            for p0 in list(ends_at.get((p, x), ())):
                rules.append(((p0, a, r), ((p0, x, p), (p, b, r))))
                add((p0, a, r))
    for f in M.finals:
        if (M.initial, C.start, f) in present:
            rules.append((start, ((M.initial, C.start, f),)))
    if C.nullable and M.initial in M.finals:
        rules.append((start, ()))
    reach = _reachable_from(start, rules)
    rules = [(h, body) for h, body in rules if h in reach]
    ctx = G.context.union(M.context) if G.context.sigma == M.context.sigma else G.context
    return ExtractorGrammar(ctx, start, rules)


def cfg_emptiness(G: ExtractorGrammar) -> bool:
    """``True`` iff ``L(G)`` is empty."""
    return G.start not in _productive(G.rules)


def cfg_sample(G: ExtractorGrammar) -> MarkerString | None:
    """Some string of ``L(G)`` (from shallowest derivations), or ``None`` if empty."""
    best: dict = {}
    changed = True
    while changed:
        changed = False
        for h, body in G.rules:
            if all(isinstance(s, Marker) or s in best for s in body):
                height = 1 + max((best[s][0] for s in body if not isinstance(s, Marker)), default=0)
                if h not in best or height < best[h][0]:
                    best[h] = (height, body)
                    changed = True
    if G.start not in best:
        return None
    out: list[Marker] = []
    stack: list = [G.start]
    while stack:
        s = stack.pop()
        if isinstance(s, Marker):
            out.append(s)
        else:
            stack.extend(reversed(best[s][1]))
    return tuple(out)


# -- slices ----------------------------------------------------------------------------------


def line_automaton(w: str, markers: Iterable[Marker], context: Alphabets) -> ExtractorAutomaton:
    """Automaton with states ``0..|w|`` accepting every string of sign ``w`` over ``markers``."""
    by_sign = defaultdict(list)
    for m in markers:
        by_sign[m.sign].append(m)
    trans = [(i, m, i + 1) for i, b in enumerate(w) for m in by_sign.get(b, ())]
    return ExtractorAutomaton(context, len(w) + 1, 0, [len(w)], trans)


def _enumerate_acyclic(G: ExtractorGrammar, budget: int) -> set[MarkerString]:
    """Finite language of a grammar whose derivations cannot loop."""
    by_head = defaultdict(list)
    for h, body in G.rules:
        by_head[h].append(body)
    memo: dict = {}

    def lang(a) -> set[MarkerString]:
        if a in memo:
            return memo[a]
        memo[a] = set()  # guards against cycles, which the slice grammar never has
        out: set[MarkerString] = set()
        for body in by_head[a]:
            parts = [{(s,)} if isinstance(s, Marker) else lang(s) for s in body]
            combos: set[MarkerString] = {()}
            for part in parts:
                combos = {x + y for x in combos for y in part}
                if len(combos) > budget:
                    raise ResourceLimitError(
                        f"row budget of {budget} exceeded", used=len(combos), limit=budget
                    )
            out |= combos
            if len(out) > budget:
                raise ResourceLimitError(f"row budget of {budget} exceeded", used=len(out), limit=budget)
        memo[a] = out
        return out

    return lang(G.start)


def enumerate_slice_cfg(G: ExtractorGrammar, w: str, budget: int = DEFAULT_ROW_BUDGET) -> list[MarkerString]:
    """All marker strings of ``L(G)`` with sign ``w``, sorted, at most ``budget`` of them."""
    L = line_automaton(w, G.markers(), G.context)
    sliced = intersect_with_automaton(G, L)
    return sorted(_enumerate_acyclic(sliced, budget))


def evaluate_cfg(G: ExtractorGrammar, w: str, budget: int = DEFAULT_ROW_BUDGET) -> GammaTable:
    gamma = G.context.gamma
    rows = [decode(W, gamma)[1] for W in enumerate_slice_cfg(G, w, budget)]
    return GammaTable(gamma, len(w), rows)


# -- text format -------------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\{[^{}]*\}:\S)|(<eps>)|(\|)|([A-Za-z_][\w'.\-]*))")


def parse_grammar(text: str) -> ExtractorGrammar:
    sigma = gamma = None
    start = None
    rules: list[tuple[str, list]] = []
    where: list[tuple[Marker, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "->" not in line:
            key, sep, value = line.partition(":")
            key = key.strip().lower()
            if not sep or key not in ("sigma", "gamma", "start"):
                raise ParseError(f"expected a header or a rule, got {line!r}", lineno, 1)
            items = value.replace(",", " ").split()
            if key == "sigma":
                sigma = items
            elif key == "gamma":
                gamma = items
            else:
                if len(items) != 1:
                    raise ParseError("exactly one start symbol expected", lineno)
                start = items[0]
            continue
        lhs, _, rhs = line.partition("->")
        head = lhs.strip()
        if not re.fullmatch(r"[A-Za-z_][\w'.\-]*", head):
            raise ParseError(f"invalid nonterminal {head!r}", lineno, 1)
        offset = raw.index("->") + 2
        pos = 0
        body: list = []
        alternatives = [body]
        while pos < len(rhs):
            if rhs[pos:].strip() == "":
                break
            m = _TOKEN_RE.match(rhs, pos)
            if not m:
                raise ParseError(f"unexpected input {rhs[pos:].strip()[:12]!r}", lineno, offset + pos + 1)
            marker, eps, bar, name = m.groups()
            if marker:
                try:
                    body.append(parse_marker(marker))
                    where.append((body[-1], lineno, offset + m.start(1) + 1))
                except ParseError as exc:
                    raise ParseError(str(exc), lineno, offset + m.start(1) + 1) from None
            elif bar:
                body = []
                alternatives.append(body)
            elif name:
                body.append(name)
            pos = m.end()
        for alt in alternatives:
            rules.append((head, alt))
    if sigma is None:
        raise ParseError("missing 'sigma:' header")
    if not rules:
        raise ParseError("grammar has no rules")
    try:
        ctx = Alphabets(sigma, gamma or [])
    except ContractError as exc:
        raise ParseError(str(exc)) from None
    for mk, lineno, col in where:
        try:
            ctx.check_marker(mk)
        except ContractError as exc:
            raise ParseError(str(exc), lineno, col) from None
    try:
        return ExtractorGrammar(ctx, start or rules[0][0], rules)
    except ContractError as exc:
        raise ParseError(str(exc)) from None


def format_grammar(G: ExtractorGrammar) -> str:
    names: dict = {}
    used = {nt for nt in G.nonterminals if isinstance(nt, str)}

    def name(nt) -> str:
        if isinstance(nt, str) and re.fullmatch(r"[A-Za-z_][\w'.\-]*", nt):
            return nt
        if nt not in names:
            k = len(names)
            while f"N{k}" in used:
                k += 1
            names[nt] = f"N{k}"
            used.add(names[nt])
        return names[nt]

    def sym(s) -> str:
        return format_marker(s) if isinstance(s, Marker) else name(s)

    grouped: dict = {}
    for h, body in G.rules:
        grouped.setdefault(h, []).append(body)
    order = [G.start] + [h for h in grouped if h != G.start]
    lines = [
        "sigma: " + " ".join(sorted(G.context.sigma)),
        "gamma: " + " ".join(sorted(G.context.gamma)),
        f"start: {name(G.start)}",
    ]
    for h in order:
        bodies = grouped.get(h, [])
        if not bodies:
            continue
        alts = [" ".join(sym(s) for s in body) if body else "<eps>" for body in bodies]
        lines.append(f"{name(h)} -> " + " | ".join(alts))
    return "\n".join(lines) + "\n"
