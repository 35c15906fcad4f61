"""Decision problems about the table an extractor produces on one fixed document.

Every procedure returns a :class:`ProblemAnswer`.  A verdict of ``None`` means
"unknown": a row or state budget ran out on one of the provably hard cases.
Witnesses are single marker strings, never whole tables.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Hashable, Sequence, Union

from .automata import DEFAULT_STATE_BUDGET, ExtractorAutomaton, enumerate_slice
from .automata import evaluate as evaluate_automaton
from .errors import ContractError, ResourceLimitError
from .grammar import (
    DEFAULT_ROW_BUDGET,
    Cost,
    ExtractorGrammar,
    cfg_emptiness,
    cfg_sample,
    cyk,
    enumerate_slice_cfg,
    erase_to_sign,
    evaluate_cfg,
    intersect_with_automaton,
)
from .markers import GammaTable, GammaTuple, Marker, MarkerString, decode, encode_tuple, format_marker_string

__all__ = [
    "Extractor",
    "Cost",
    "ProblemAnswer",
    "SliceDag",
    "tuple_member",
    "build_slice_dag",
    "build_product_dag",
    "table_empty",
    "table_disjoint",
    "table_contains",
    "table_equiv",
    "evaluate",
    "slice_members",
]

Extractor = Union[ExtractorAutomaton, ExtractorGrammar]


@dataclass
class ProblemAnswer:
    problem: str
    verdict: bool | None
    witness: MarkerString | None = None
    cost: Cost = field(default_factory=Cost)
    reason: str = ""

    @property
    def unknown(self) -> bool:
        return self.verdict is None

    def to_json(self) -> dict:
        out: dict = {
            "problem": self.problem,
            "verdict": "unknown" if self.verdict is None else self.verdict,
        }
        if self.witness is not None:
            w, t = decode(self.witness)
            out["witness"] = {
                "markers": format_marker_string(self.witness) or "<eps>",
                "document": w,
                "tuple": t.to_json(),
            }
        out["cost"] = self.cost.to_json()
        if self.reason:
            out["reason"] = self.reason
        return out


def _check_document(E: Extractor, w: str) -> None:
    if not isinstance(E, (ExtractorAutomaton, ExtractorGrammar)):
        raise ContractError(f"expected an automaton or a grammar, got {type(E).__name__}")
    E.context.check_document(w)


def _check_pair(E1: Extractor, E2: Extractor, w: str) -> None:
    _check_document(E1, w)
    _check_document(E2, w)
    if E1.context.sigma != E2.context.sigma:
        raise ContractError("extractors must share the terminal alphabet")


# -- membership and evaluation ---------------------------------------------------------------


def tuple_member(E: Extractor, w: str, t: GammaTuple) -> bool:
    """Whether ``t`` is a row of ``E(w)``; ``t`` must be over the extractor's attributes."""
    _check_document(E, w)
    if t.length != len(w):
        raise ContractError(f"tuple is for length {t.length}, document has length {len(w)}")
    if t.gamma != E.context.gamma:
        raise ContractError(
            f"tuple attributes {sorted(t.gamma)} differ from extractor attributes {sorted(E.context.gamma)}"
        )
    return E.accepts(encode_tuple(w, t))


def slice_members(
    E: Extractor, w: str, budget: int = DEFAULT_ROW_BUDGET
) -> list[MarkerString]:
    """All marker strings of sign ``w`` in ``L(E)``; raises when more than ``budget`` exist."""
    if isinstance(E, ExtractorAutomaton):
        out = list(enumerate_slice(E, w, budget + 1))
        if len(out) > budget:
            raise ResourceLimitError(f"row budget of {budget} exceeded", used=len(out), limit=budget)
        return out
    return enumerate_slice_cfg(E, w, budget)


def evaluate(E: Extractor, w: str, limit: int | None = None, budget: int = DEFAULT_ROW_BUDGET) -> GammaTable:
    """``E(w)`` for either kind of extractor.  ``limit`` truncates the (sorted) rows."""
    _check_document(E, w)
    if isinstance(E, ExtractorAutomaton):
        return evaluate_automaton(E, w, limit=limit, budget=None if limit is not None else budget)
    T = evaluate_cfg(E, w, budget)
    if limit is not None and len(T) > limit:
        T = GammaTable(T.gamma, T.length, list(T)[:limit])
    return T


# -- slice DAGs ------------------------------------------------------------------------------


@dataclass
class SliceDag:
    """Layered graph: layer ``i`` holds the nodes reachable after reading ``w[:i]``.

    ``parents[i]`` maps each node of layer ``i`` to one ``(node, marker)``
    predecessor in layer ``i-1``, which is enough to read off a witness path.
    ``arcs`` is only filled when the DAG is built with ``keep_arcs``.
    """

    w: str
    layers: list[frozenset]
    sinks: frozenset
    parents: list[dict]
    num_arcs: int
    arcs: list[list[tuple[Hashable, Marker, Hashable]]] | None = None

    @property
    def sources(self) -> frozenset:
        return self.layers[0]

    @property
    def num_nodes(self) -> int:
        return sum(len(layer) for layer in self.layers)

    @property
    def cost(self) -> Cost:
        return Cost(nodes=self.num_nodes, arcs=self.num_arcs)

    def witness(self) -> MarkerString | None:
        """Labels of one source-to-sink path, or ``None`` if there is none."""
        if not self.sinks:
            return None
        node = min(self.sinks, key=repr)
        out: list[Marker] = []
        for i in range(len(self.w), 0, -1):
            node, m = self.parents[i][node]
            out.append(m)
        return tuple(reversed(out))


def _layered(w: str, start, successors, is_sink, keep_arcs: bool, node_budget: int | None = None) -> SliceDag:
    layer = frozenset([start])
    layers = [layer]
    parents: list[dict] = [{}]
    arcs: list | None = [] if keep_arcs else None
    count = 0
    for b in w:
        nxt: dict = {}
        here = [] if keep_arcs else None
        for u in layer:
            for m, v in successors(u, b):
                count += 1
                if v not in nxt:
                    nxt[v] = (u, m)
                if here is not None:
                    here.append((u, m, v))
        if node_budget is not None and len(nxt) > node_budget:
            raise ResourceLimitError(
                f"state budget of {node_budget} exceeded in one layer", used=len(nxt), limit=node_budget
            )
        layer = frozenset(nxt)
        layers.append(layer)
        parents.append(nxt)
        if arcs is not None:
            arcs.append(here)
    sinks = frozenset(u for u in layer if is_sink(u))
    return SliceDag(w, layers, sinks, parents, count, arcs)


def build_slice_dag(M: ExtractorAutomaton, w: str, keep_arcs: bool = True) -> SliceDag:
    """Nodes are states of ``M`` per position; arcs use every marker with the right sign."""

    def successors(p, b):
        for m, qs in M.by_sign(p, b):
            for q in qs:
                yield m, q

    return _layered(w, M.initial, successors, lambda p: p in M.finals, keep_arcs)


def build_product_dag(M1: ExtractorAutomaton, M2: ExtractorAutomaton, w: str, keep_arcs: bool = True) -> SliceDag:
    """Nodes are state pairs; an arc needs both automata to read the same marker."""

    def successors(s, b):
        p1, p2 = s
        row2 = M2.delta[p2]
        for m, qs1 in M1.by_sign(p1, b):
            qs2 = row2.get(m)
            if qs2:
                for q1 in qs1:
                    for q2 in qs2:
                        yield m, (q1, q2)

    return _layered(
        w,
        (M1.initial, M2.initial),
        successors,
        lambda s: s[0] in M1.finals and s[1] in M2.finals,
        keep_arcs,
    )


def _complement_dag(M1: ExtractorAutomaton, M2: ExtractorAutomaton, w: str, budget: int) -> SliceDag:
    """Strings of ``M1``'s ``w``-slice rejected by ``M2``.

    ``M2`` is determinized lazily along ``w`` only; a missing transition
    leads to the empty subset, the accepting sink of the complement.
    """

    def successors(s, b):
        p1, S2 = s
        for m, qs1 in M1.by_sign(p1, b):
            T2 = M2.step(S2, m)
            for q1 in qs1:
                yield m, (q1, T2)

    return _layered(
        w,
        (M1.initial, frozenset([M2.initial])),
        successors,
        lambda s: s[0] in M1.finals and not s[1] & M2.finals,
        False,
        node_budget=budget,
    )


def _dag_automaton(dag: SliceDag, M: ExtractorAutomaton, finals_of) -> ExtractorAutomaton:
    """Turn a DAG with kept arcs into an automaton whose states are ``(layer, node)``."""
    index: dict = {}
    for i, layer in enumerate(dag.layers):
        for u in sorted(layer, key=repr):
            index[(i, u)] = len(index)
    trans = [
        (index[(i, u)], m, index[(i + 1, v)])
        for i, arcs in enumerate(dag.arcs or [])
        for u, m, v in arcs
    ]
    n = len(dag.w)
    finals = [index[(n, u)] for u in dag.layers[n] if finals_of(u)]
    start = index[(0, next(iter(dag.layers[0])))]
    return ExtractorAutomaton(M.context, len(index), start, finals, trans)


def _slice_automaton(M: ExtractorAutomaton, w: str) -> ExtractorAutomaton:
    """Accepts exactly the ``w``-slice of ``L(M)``, with ``|M|(|w|+1)`` states at most."""
    dag = build_slice_dag(M, w, keep_arcs=True)
    return _dag_automaton(dag, M, lambda p: p in M.finals)


def _complement_slice_automaton(
    M: ExtractorAutomaton, w: str, markers, context, budget: int
) -> ExtractorAutomaton:
    """Strings of sign ``w`` over ``markers`` that ``M`` rejects."""
    by_sign: dict[str, list[Marker]] = {}
    for m in markers:
        by_sign.setdefault(m.sign, []).append(m)

    def successors(S, b):
        for m in by_sign.get(b, ()):
            yield m, M.step(S, m)

    index: dict = {}
    layer = [frozenset([M.initial])]
    index[(0, layer[0])] = 0
    trans = []
    for i, b in enumerate(w):
        nxt: dict = {}
        for S in layer:
            for m, T in successors(S, b):
                key = (i + 1, T)
                if key not in index:
                    index[key] = len(index)
                    nxt[T] = True
                    if len(nxt) > budget:
                        raise ResourceLimitError(
                            f"state budget of {budget} exceeded in one layer", used=len(nxt), limit=budget
                        )
                trans.append((index[(i, S)], m, index[key]))
        layer = list(nxt)
    n = len(w)
    finals = [index[(n, S)] for S in layer if not S & M.finals]
    return ExtractorAutomaton(context, len(index), 0, finals, trans)


# -- problems ----------------------------------------------------------------------------------------


def _timed(answer: ProblemAnswer, started: float) -> ProblemAnswer:
    answer.cost.seconds = time.perf_counter() - started
    return answer


def _erased_document(w: str) -> MarkerString:
    return tuple(Marker(b) for b in w)


def table_empty(E: Extractor, w: str) -> ProblemAnswer:
    """Verdict ``True`` iff ``E(w)`` has no rows; otherwise a regular extractor yields a witness."""
    _check_document(E, w)
    started = time.perf_counter()
    if isinstance(E, ExtractorAutomaton):
        dag = build_slice_dag(E, w, keep_arcs=False)
        witness = dag.witness()
        return _timed(ProblemAnswer("empty", witness is None, witness, dag.cost), started)
    cost = Cost()
    member = cyk(erase_to_sign(E), _erased_document(w), cost)
    return _timed(ProblemAnswer("empty", not member, None, cost), started)


def _cfg_reg_intersection(G: ExtractorGrammar, S: ExtractorAutomaton) -> tuple[bool, MarkerString | None, Cost]:
    I = intersect_with_automaton(G, S)
    cost = Cost(nodes=S.num_states + len(I.nonterminals), arcs=S.num_transitions + len(I.rules))
    if cfg_emptiness(I):
        return False, None, cost
    return True, cfg_sample(I), cost


def _probe(
    members: Sequence[MarkerString], other: Extractor, want: bool, cost: Cost
) -> MarkerString | None:
    """First member whose membership in ``other`` equals ``want``."""
    for W in members:
        cost.nodes += 1
        if isinstance(other, ExtractorGrammar):
            hit = cyk(other, W, cost)
        else:
            hit = other.accepts(W)
        if hit == want:
            return W
    return None


def table_disjoint(
    E1: Extractor, E2: Extractor, w: str, budget: int = DEFAULT_ROW_BUDGET
) -> ProblemAnswer:
    """Verdict ``True`` iff ``E1(w)`` and ``E2(w)`` share no row (after padding).

    A shared row is returned as witness.  Two grammars are handled by
    enumerating one slice under ``budget``; running out yields ``unknown``.
    """
    _check_pair(E1, E2, w)
    started = time.perf_counter()
    reg1 = isinstance(E1, ExtractorAutomaton)
    reg2 = isinstance(E2, ExtractorAutomaton)
    if reg1 and reg2:
        dag = build_product_dag(E1, E2, w, keep_arcs=False)
        witness = dag.witness()
        return _timed(ProblemAnswer("disjoint", witness is None, witness, dag.cost), started)
    if reg1 or reg2:
        G, M = (E2, E1) if reg1 else (E1, E2)
        hit, witness, cost = _cfg_reg_intersection(G, _slice_automaton(M, w))
        return _timed(ProblemAnswer("disjoint", not hit, witness, cost), started)
    cost = Cost()
    order = sorted([E1, E2], key=lambda G: G.size)
    for first, second in (order, order[::-1]):
        try:
            members = enumerate_slice_cfg(first, w, budget)
        except ResourceLimitError:
            continue
        witness = _probe(members, second, True, cost)
        return _timed(ProblemAnswer("disjoint", witness is None, witness, cost), started)
    return _timed(
        ProblemAnswer("disjoint", None, None, cost, f"both slices exceed the row budget of {budget}"),
        started,
    )


def table_contains(
    E1: Extractor,
    E2: Extractor,
    w: str,
    budget: int = DEFAULT_ROW_BUDGET,
    state_budget: int = DEFAULT_STATE_BUDGET,
) -> ProblemAnswer:
    """Verdict ``True`` iff every row of ``E1(w)`` is a row of ``E2(w)`` (after padding).

    When ``E2`` is an automaton it is complemented lazily along ``w``; for a
    DFA this costs ``O(|E1||E2||w|)``.  A grammar ``E2`` forces enumeration of
    ``E1(w)`` under ``budget``.  A counterexample row is returned as witness.
    """
    _check_pair(E1, E2, w)
    started = time.perf_counter()
    try:
        if isinstance(E2, ExtractorAutomaton):
            if isinstance(E1, ExtractorAutomaton):
                dag = _complement_dag(E1, E2, w, state_budget)
                witness = dag.witness()
                return _timed(ProblemAnswer("contains", witness is None, witness, dag.cost), started)
            S = _complement_slice_automaton(E2, w, E1.markers(), E1.context.union(E2.context), state_budget)
            hit, witness, cost = _cfg_reg_intersection(E1, S)
            return _timed(ProblemAnswer("contains", not hit, witness, cost), started)
        cost = Cost()
        members = slice_members(E1, w, budget)
        witness = _probe(members, E2, False, cost)
        return _timed(ProblemAnswer("contains", witness is None, witness, cost), started)
    except ResourceLimitError as exc:
        return _timed(ProblemAnswer("contains", None, None, Cost(), str(exc)), started)


def table_equiv(
    E1: Extractor,
    E2: Extractor,
    w: str,
    budget: int = DEFAULT_ROW_BUDGET,
    state_budget: int = DEFAULT_STATE_BUDGET,
) -> ProblemAnswer:
    """Two containment checks; the witness is a row in exactly one of the tables."""
    started = time.perf_counter()
    first = table_contains(E1, E2, w, budget, state_budget)
    cost = Cost(first.cost.nodes, first.cost.arcs)
    if first.verdict is False:
        return _timed(ProblemAnswer("equiv", False, first.witness, cost), started)
    second = table_contains(E2, E1, w, budget, state_budget)
    cost.nodes += second.cost.nodes
    cost.arcs += second.cost.arcs
    if second.verdict is False:
        return _timed(ProblemAnswer("equiv", False, second.witness, cost), started)
    if first.unknown or second.unknown:
        return _timed(ProblemAnswer("equiv", None, None, cost, first.reason or second.reason), started)
    return _timed(ProblemAnswer("equiv", True, None, cost), started)
