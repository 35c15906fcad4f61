"""Regular extractors as finite automata over signed markers.

States are the integers ``0 .. num_states-1``.  Epsilon transitions are
accepted by the constructor and eliminated immediately, so every automaton
object is epsilon-free.  Transition maps are sparse: the full marker
alphabet (``|sigma| * 2**|gamma|`` symbols) is only enumerated when a
complete deterministic automaton is requested.
"""

from __future__ import annotations

import re
from collections import deque
from typing import Iterable, Iterator, Sequence

from .algebra import JoinKind, SetOp, UnaryOp, join_markers
from .errors import ContractError, ParseError, ResourceLimitError
from .markers import (
    Alphabets,
    GammaTable,
    Marker,
    MarkerString,
    decode,
    format_marker,
    markers_for,
    parse_marker,
)

__all__ = [
    "ExtractorAutomaton",
    "DEFAULT_STATE_BUDGET",
    "atomic",
    "epsilon_automaton",
    "empty_automaton",
    "sign_universal",
    "union",
    "intersect",
    "difference",
    "complement",
    "boolean_op",
    "concat",
    "star",
    "join_product",
    "apply_unary_lang",
    "determinize",
    "language_empty",
    "language_contains",
    "language_equivalent",
    "enumerate_slice",
    "evaluate",
    "parse_automaton",
    "format_automaton",
]

DEFAULT_STATE_BUDGET = 10**6


class ExtractorAutomaton:
    """An epsilon-free NFA whose input symbols are markers over ``context``."""

    __slots__ = ("context", "num_states", "initial", "finals", "delta", "_by_sign")

    def __init__(
        self,
        context: Alphabets,
        num_states: int,
        initial: int,
        finals: Iterable[int],
        transitions: Iterable[tuple[int, Marker, int]] = (),
        epsilon: Iterable[tuple[int, int]] = (),
    ):
        if not 0 <= initial < num_states:
            raise ContractError(f"initial state {initial} out of range")
        finals = frozenset(finals)
        if any(not 0 <= f < num_states for f in finals):
            raise ContractError("final state out of range")
        delta: list[dict[Marker, set[int]]] = [{} for _ in range(num_states)]
        for p, m, q in transitions:
            if not (0 <= p < num_states and 0 <= q < num_states):
                raise ContractError(f"transition {p} -> {q} uses an unknown state")
            context.check_marker(m)
            delta[p].setdefault(m, set()).add(q)
        eps = [set() for _ in range(num_states)]
        for p, q in epsilon:
            if not (0 <= p < num_states and 0 <= q < num_states):
                raise ContractError(f"epsilon transition {p} -> {q} uses an unknown state")
            if p != q:
                eps[p].add(q)
        if any(eps):
            delta, finals = _eliminate_epsilon(delta, finals, eps)
        self.context = context
        self.num_states = num_states
        self.initial = initial
        self.finals = finals
        self.delta: tuple[dict[Marker, frozenset[int]], ...] = tuple(
            {m: frozenset(qs) for m, qs in row.items()} for row in delta
        )
        self._by_sign = None

    # -- inspection -------------------------------------------------------

    def transitions(self) -> Iterator[tuple[int, Marker, int]]:
        for p, row in enumerate(self.delta):
            for m in sorted(row):
                for q in sorted(row[m]):
                    yield p, m, q

    @property
    def num_transitions(self) -> int:
        return sum(len(qs) for row in self.delta for qs in row.values())

    @property
    def size(self) -> int:
        return self.num_states + self.num_transitions

    @property
    def is_deterministic(self) -> bool:
        return all(len(qs) <= 1 for row in self.delta for qs in row.values())

    def is_complete(self) -> bool:
        alphabet = [m for b in self.context.sigma for m in markers_for(b, self.context.gamma)]
        return all(all(m in row for m in alphabet) for row in self.delta)

    def markers(self) -> frozenset[Marker]:
        return frozenset(m for row in self.delta for m in row)

    def by_sign(self, p: int, b: str) -> list[tuple[Marker, frozenset[int]]]:
        """Outgoing transitions of ``p`` whose marker has sign ``b``, in marker order."""
        if self._by_sign is None:
            index = []
            for row in self.delta:
                per: dict[str, list[tuple[Marker, frozenset[int]]]] = {}
                for m in sorted(row):
                    per.setdefault(m.sign, []).append((m, row[m]))
                index.append(per)
            self._by_sign = index
        return self._by_sign[p].get(b, [])

    def step(self, states: Iterable[int], m: Marker) -> frozenset[int]:
        out: set[int] = set()
        for p in states:
            out |= self.delta[p].get(m, frozenset())
        return frozenset(out)

    def accepts(self, W: Sequence[Marker]) -> bool:
        current = frozenset([self.initial])
        for m in W:
            current = self.step(current, m)
            if not current:
                return False
        return bool(current & self.finals)

    def with_context(self, context: Alphabets) -> ExtractorAutomaton:
        """Reinterpret over a larger context; markers are unchanged."""
        if not (self.context.sigma <= context.sigma and self.context.gamma <= context.gamma):
            raise ContractError("new context must contain the old one")
        return ExtractorAutomaton(
            context, self.num_states, self.initial, self.finals, self.transitions()
        )

    def trim(self) -> ExtractorAutomaton:
        """Drop states that are unreachable or cannot reach a final state.

        The initial state is always kept.
        """
        forward = _reachable([self.initial], lambda p: (q for qs in self.delta[p].values() for q in qs))
        reverse: list[set[int]] = [set() for _ in range(self.num_states)]
        for p, row in enumerate(self.delta):
            for qs in row.values():
                for q in qs:
                    reverse[q].add(p)
        backward = _reachable(self.finals, lambda q: reverse[q])
        useful = (forward & backward) | {self.initial}
        order = sorted(useful, key=lambda s: (s != self.initial, s))
        index = {s: i for i, s in enumerate(order)}
        trans = [
            (index[p], m, index[q])
            for p, m, q in self.transitions()
            if p in useful and q in useful
        ]
        return ExtractorAutomaton(
            self.context, len(order), 0, [index[f] for f in self.finals if f in useful], trans
        )

    def __repr__(self) -> str:
        kind = "DFA" if self.is_deterministic else "NFA"
        return (
            f"<{kind} states={self.num_states} transitions={self.num_transitions} "
            f"{self.context!r}>"
        )


def _reachable(start: Iterable[int], successors) -> set[int]:
    seen = set(start)
    stack = list(seen)
    while stack:
        p = stack.pop()
        for q in successors(p):
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def _eliminate_epsilon(delta, finals, eps):
    closures = [_reachable([p], lambda s: eps[s]) for p in range(len(delta))]
    new_delta: list[dict[Marker, set[int]]] = []
    for p, closure in enumerate(closures):
        row: dict[Marker, set[int]] = {}
        for s in closure:
            for m, qs in delta[s].items():
                row.setdefault(m, set()).update(qs)
        new_delta.append(row)
    new_finals = frozenset(p for p, closure in enumerate(closures) if closure & finals)
    return new_delta, new_finals


# -- basic automata ------------------------------------------------------------


def atomic(attrs: Iterable[str], b: str, context: Alphabets) -> ExtractorAutomaton:
    """Automaton for the single marker string ``X_b``."""
    m = Marker(b, attrs)
    context.check_marker(m)
    return ExtractorAutomaton(context, 2, 0, [1], [(0, m, 1)])


def epsilon_automaton(context: Alphabets) -> ExtractorAutomaton:
    """Language ``{eps}``: the extractor that only maps the empty document to the empty tuple."""
    return ExtractorAutomaton(context, 1, 0, [0])


def empty_automaton(context: Alphabets) -> ExtractorAutomaton:
    """The empty language: every document gets the empty table."""
    return ExtractorAutomaton(context, 1, 0, [])


def sign_universal(context: Alphabets, attrs: Iterable[str] | None = ()) -> ExtractorAutomaton:
    """One-state automaton accepting every marker string with the given attribute set.

    ``attrs=None`` accepts every marker of the context instead.
    """
    if attrs is None:
        ms = [m for b in sorted(context.sigma) for m in markers_for(b, context.gamma)]
    else:
        ms = [Marker(b, attrs) for b in sorted(context.sigma)]
    return ExtractorAutomaton(context, 1, 0, [0], [(0, m, 0) for m in ms])


# -- closure constructions ------------------------------------------------------


def _unified(M1: ExtractorAutomaton, M2: ExtractorAutomaton) -> Alphabets:
    if M1.context.sigma != M2.context.sigma:
        raise ContractError("operands must share the terminal alphabet")
    return M1.context.union(M2.context)


def _disjoint_copy(M1: ExtractorAutomaton, M2: ExtractorAutomaton, offset2: int):
    trans = list(M1.transitions())
    trans += [(p + offset2, m, q + offset2) for p, m, q in M2.transitions()]
    return trans


def union(M1: ExtractorAutomaton, M2: ExtractorAutomaton) -> ExtractorAutomaton:
    ctx = _unified(M1, M2)
    n1, n2 = M1.num_states, M2.num_states
    fresh = n1 + n2
    trans = _disjoint_copy(M1, M2, n1)
    finals = set(M1.finals) | {f + n1 for f in M2.finals}
    eps = [(fresh, M1.initial), (fresh, M2.initial + n1)]
    return ExtractorAutomaton(ctx, fresh + 1, fresh, finals, trans, eps).trim()


def concat(M1: ExtractorAutomaton, M2: ExtractorAutomaton) -> ExtractorAutomaton:
    ctx = _unified(M1, M2)
    n1 = M1.num_states
    trans = _disjoint_copy(M1, M2, n1)
    eps = [(f, M2.initial + n1) for f in M1.finals]
    finals = {f + n1 for f in M2.finals}
    return ExtractorAutomaton(ctx, n1 + M2.num_states, M1.initial, finals, trans, eps).trim()


def star(M: ExtractorAutomaton) -> ExtractorAutomaton:
    fresh = M.num_states
    eps = [(fresh, M.initial)] + [(f, fresh) for f in M.finals]
    return ExtractorAutomaton(
        M.context, fresh + 1, fresh, [fresh], M.transitions(), eps
    ).trim()


def _explore(start, expand, budget: int):
    """Breadth-first construction of a product automaton.

    ``expand(state)`` yields ``(marker, successor)`` pairs.  Returns the state
    list (index = new state number) and the numbered transitions.
    """
    index = {start: 0}
    order = [start]
    trans = []
    queue = deque([start])
    while queue:
        s = queue.popleft()
        i = index[s]
        for m, t in expand(s):
            j = index.get(t)
            if j is None:
                if len(order) >= budget:
                    raise ResourceLimitError(
                        f"state budget of {budget} exceeded", used=len(order), limit=budget
                    )
                j = index[t] = len(order)
                order.append(t)
                queue.append(t)
            trans.append((i, m, j))
    return order, trans


def intersect(M1: ExtractorAutomaton, M2: ExtractorAutomaton, budget: int = DEFAULT_STATE_BUDGET) -> ExtractorAutomaton:
    ctx = _unified(M1, M2)

    def expand(s):
        p1, p2 = s
        row2 = M2.delta[p2]
        for m, qs1 in M1.delta[p1].items():
            qs2 = row2.get(m)
            if qs2:
                for q1 in qs1:
                    for q2 in qs2:
                        yield m, (q1, q2)

    order, trans = _explore((M1.initial, M2.initial), expand, budget)
    finals = [i for i, (p1, p2) in enumerate(order) if p1 in M1.finals and p2 in M2.finals]
    return ExtractorAutomaton(ctx, len(order), 0, finals, trans).trim()


def difference(M1: ExtractorAutomaton, M2: ExtractorAutomaton, budget: int = DEFAULT_STATE_BUDGET) -> ExtractorAutomaton:
    """``L(M1) \\ L(M2)`` by pairing ``M1`` with an on-the-fly subset construction of ``M2``."""
    ctx = _unified(M1, M2)

    def expand(s):
        p1, S2 = s
        for m, qs1 in M1.delta[p1].items():
            T2 = M2.step(S2, m)
            for q1 in qs1:
                yield m, (q1, T2)

    order, trans = _explore((M1.initial, frozenset([M2.initial])), expand, budget)
    finals = [i for i, (p1, S2) in enumerate(order) if p1 in M1.finals and not S2 & M2.finals]
    return ExtractorAutomaton(ctx, len(order), 0, finals, trans).trim()


def determinize(
    M: ExtractorAutomaton, budget: int = DEFAULT_STATE_BUDGET, complete: bool = True
) -> ExtractorAutomaton:
    """Subset construction.  With ``complete`` every state has a successor on every
    marker of the context (the empty subset acts as the rejecting sink)."""
    if complete:
        alphabet = [m for b in sorted(M.context.sigma) for m in markers_for(b, M.context.gamma)]
    else:
        alphabet = sorted(M.markers())

    def expand(S):
        for m in alphabet:
            T = M.step(S, m)
            if T or complete:
                yield m, T

    order, trans = _explore(frozenset([M.initial]), expand, budget)
    finals = [i for i, S in enumerate(order) if S & M.finals]
    return ExtractorAutomaton(M.context, len(order), 0, finals, trans)


def complement(M: ExtractorAutomaton, budget: int = DEFAULT_STATE_BUDGET) -> ExtractorAutomaton:
    """All marker strings over ``M.context`` that ``M`` rejects."""
    D = M if M.is_deterministic and M.is_complete() else determinize(M, budget)
    flipped = set(range(D.num_states)) - D.finals
    return ExtractorAutomaton(D.context, D.num_states, D.initial, flipped, D.transitions())


def boolean_op(M1: ExtractorAutomaton, M2: ExtractorAutomaton, op: SetOp, budget: int = DEFAULT_STATE_BUDGET) -> ExtractorAutomaton:
    if op is SetOp.UNION:
        return union(M1, M2)
    if op is SetOp.INTERSECT:
        return intersect(M1, M2, budget)
    return difference(M1, M2, budget)


def join_product(
    M1: ExtractorAutomaton, M2: ExtractorAutomaton, kind: JoinKind, budget: int = DEFAULT_STATE_BUDGET
) -> ExtractorAutomaton:
    """Product automaton whose labels combine the two operands' markers by ``kind``."""
    ctx = _unified(M1, M2)
    g1, g2 = M1.context.gamma, M2.context.gamma
    label_cache: dict[tuple[Marker, Marker], Marker | None] = {}

    def label(m1, m2):
        key = (m1, m2)
        if key not in label_cache:
            label_cache[key] = join_markers(m1, m2, g1, g2, kind)
        return label_cache[key]

    def expand(s):
        p1, p2 = s
        for m1, qs1 in M1.delta[p1].items():
            for m2, qs2 in M2.by_sign(p2, m1.sign):
                m = label(m1, m2)
                if m is None:
                    continue
                for q1 in qs1:
                    for q2 in qs2:
                        yield m, (q1, q2)

    order, trans = _explore((M1.initial, M2.initial), expand, budget)
    finals = [i for i, (p1, p2) in enumerate(order) if p1 in M1.finals and p2 in M2.finals]
    return ExtractorAutomaton(ctx, len(order), 0, finals, trans).trim()


def apply_unary_lang(M: ExtractorAutomaton, f: UnaryOp) -> ExtractorAutomaton:
    f.check(M.context.gamma)
    ctx = M.context.with_gamma(f.target(M.context.gamma))
    trans = [(p, f.on_marker(m), q) for p, m, q in M.transitions()]
    return ExtractorAutomaton(ctx, M.num_states, M.initial, M.finals, trans)


# -- language-level decisions ------------------------------------------------------


def language_witness(M: ExtractorAutomaton) -> MarkerString | None:
    """A shortest accepted marker string, or ``None`` if the language is empty."""
    parent: dict[int, tuple[int, Marker] | None] = {M.initial: None}
    queue = deque([M.initial])
    while queue:
        p = queue.popleft()
        if p in M.finals:
            out = []
            while parent[p] is not None:
                p, m = parent[p]
                out.append(m)
            return tuple(reversed(out))
        for m, qs in sorted(M.delta[p].items()):
            for q in qs:
                if q not in parent:
                    parent[q] = (p, m)
                    queue.append(q)
    return None


def language_empty(M: ExtractorAutomaton) -> bool:
    return language_witness(M) is None


def language_contains(M1: ExtractorAutomaton, M2: ExtractorAutomaton, budget: int = DEFAULT_STATE_BUDGET) -> bool:
    """Whether ``L(M1)`` is a subset of ``L(M2)``; equivalently ``[[L(M1)]]`` within ``[[L(M2)]]``."""
    return language_empty(difference(M1, M2, budget))


def language_equivalent(M1: ExtractorAutomaton, M2: ExtractorAutomaton, budget: int = DEFAULT_STATE_BUDGET) -> bool:
    return language_contains(M1, M2, budget) and language_contains(M2, M1, budget)


# -- slice enumeration ---------------------------------------------------------------


def _alive_layers(M: ExtractorAutomaton, w: str) -> list[frozenset[int]]:
    """``alive[i]``: states from which some marker string of sign ``w[i:]`` is accepted."""
    n = len(w)
    alive = [frozenset()] * (n + 1)
    alive[n] = M.finals
    for i in range(n - 1, -1, -1):
        nxt = alive[i + 1]
        alive[i] = frozenset(
            p
            for p in range(M.num_states)
            if any(qs & nxt for _, qs in M.by_sign(p, w[i]))
        )
    return alive


def enumerate_slice(M: ExtractorAutomaton, w: str, limit: int | None = None) -> Iterator[MarkerString]:
    """Yield each accepted marker string of sign ``w`` exactly once.

    The search runs a subset construction along the document, pruned to states
    that can still reach acceptance, so ambiguous NFAs produce no duplicates and
    every branch explored yields at least one result.  Strings come out in
    lexicographic (position-major) marker order.
    """
    alive = _alive_layers(M, w)
    if M.initial not in alive[0]:
        return
    n = len(w)
    emitted = 0
    prefix: list[Marker] = []
    stack = [(0, frozenset([M.initial]), None)]

    def branches(i, S):
        per: dict[Marker, set[int]] = {}
        for p in S:
            for m, qs in M.by_sign(p, w[i]):
                live = qs & alive[i + 1]
                if live:
                    per.setdefault(m, set()).update(live)
        return [(m, frozenset(per[m])) for m in sorted(per, reverse=True)]

    while stack:
        i, S, m = stack.pop()
        del prefix[i:]
        if m is not None:
            prefix.append(m)
            i += 1
        if i == n:
            yield tuple(prefix)
            emitted += 1
            if limit is not None and emitted >= limit:
                return
            continue
        for m2, T in branches(i, S):
            stack.append((i, T, m2))


def evaluate(
    M: ExtractorAutomaton, w: str, limit: int | None = None, budget: int | None = None
) -> GammaTable:
    """The table ``[[L(M)]](w)``.

    ``limit`` truncates silently; ``budget`` raises :class:`ResourceLimitError`
    when the table has more rows than allowed.
    """
    gamma = M.context.gamma
    rows = []
    cap = limit if budget is None else (budget + 1 if limit is None else min(limit, budget + 1))
    for W in enumerate_slice(M, w, cap):
        rows.append(decode(W, gamma)[1])
    if budget is not None and len(rows) > budget:
        raise ResourceLimitError(f"row budget of {budget} exceeded", used=len(rows), limit=budget)
    return GammaTable(gamma, len(w), rows)


# -- text format -------------------------------------------------------------------

_TRANSITION_RE = re.compile(r"(\S+)\s+(\{[^{}]*\}:\S|<eps>)\s+(\S+)")


def _header_symbols(value: str) -> list[str]:
    return value.replace(",", " ").split()


def parse_automaton(text: str) -> ExtractorAutomaton:
    """Read the line-oriented automaton format (see the README for the grammar)."""
    sigma = gamma = None
    initial = None
    finals: list[str] = []
    declared: list[str] = []
    trans: list[tuple[str, Marker, str]] = []
    where: list[tuple[int, int]] = []
    eps: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        key = key.strip().lower()
        if sep and key in ("sigma", "gamma", "initial", "final", "finals", "states"):
            items = _header_symbols(value)
            if key == "sigma":
                sigma = items
            elif key == "gamma":
                gamma = items
            elif key == "initial":
                if len(items) != 1:
                    raise ParseError("exactly one initial state expected", lineno)
                initial = items[0]
            elif key == "states":
                declared.extend(items)
            else:
                finals.extend(items)
            continue
        m = _TRANSITION_RE.fullmatch(line)
        if not m:
            raise ParseError(f"cannot parse transition {line!r}", lineno, 1)
        src, label, dst = m.groups()
        if label == "<eps>":
            eps.append((src, dst))
        else:
            try:
                trans.append((src, parse_marker(label), dst))
                where.append((lineno, m.start(2) + 1))
            except ParseError as exc:
                raise ParseError(str(exc), lineno, m.start(2) + 1) from None
    if sigma is None:
        raise ParseError("missing 'sigma:' header")
    if initial is None:
        raise ParseError("missing 'initial:' header")
    names: dict[str, int] = {}
    for s in [initial, *declared, *finals, *(x for t in trans for x in (t[0], t[2])),
              *(x for e in eps for x in e)]:
        names.setdefault(s, len(names))
    try:
        ctx = Alphabets(sigma, gamma or [])
    except ContractError as exc:
        raise ParseError(str(exc)) from None
    for (_, mk, _), (lineno, col) in zip(trans, where):
        try:
            ctx.check_marker(mk)
        except ContractError as exc:
            raise ParseError(str(exc), lineno, col) from None
    try:
        return ExtractorAutomaton(
            ctx,
            len(names),
            names[initial],
            [names[f] for f in finals],
            [(names[p], mk, names[q]) for p, mk, q in trans],
            [(names[p], names[q]) for p, q in eps],
        )
    except ContractError as exc:
        raise ParseError(str(exc)) from None


def format_automaton(M: ExtractorAutomaton) -> str:
    lines = [
        "sigma: " + " ".join(sorted(M.context.sigma)),
        "gamma: " + " ".join(sorted(M.context.gamma)),
        f"states: {' '.join(str(s) for s in range(M.num_states))}",
        f"initial: {M.initial}",
        "final: " + " ".join(str(f) for f in sorted(M.finals)),
    ]
    lines += [f"{p} {format_marker(m)} {q}" for p, m, q in M.transitions()]
    return "\n".join(lines) + "\n"
