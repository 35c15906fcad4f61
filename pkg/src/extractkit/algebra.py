"""Relational operators on tuples and tables, and their marker-level counterparts.

Binary operators accept operands over different attribute sets; the result
lives over the union.  Set operations pad missing attributes with the empty
set first.  The marker-level functions (``join_markers`` and the
``on_marker`` methods of the unary operators) are what the automaton and
grammar constructions use to relabel transitions and rules.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .errors import ContractError
from .markers import GammaTable, GammaTuple, Marker, pad_tuple

__all__ = [
    "SetOp",
    "JoinKind",
    "UnaryOp",
    "Project",
    "Merge",
    "Rename",
    "join_tuples",
    "join_tables",
    "join_markers",
    "set_op_tables",
    "concat_tuples",
    "concat_tables",
    "apply_unary",
]


class SetOp(enum.Enum):
    UNION = "u"
    INTERSECT = "i"
    DIFFERENCE = "d"

    def apply(self, a: frozenset, b: frozenset) -> frozenset:
        if self is SetOp.UNION:
            return a | b
        if self is SetOp.INTERSECT:
            return a & b
        return a - b

    @classmethod
    def parse(cls, text: str) -> SetOp:
        key = text.strip().lower()
        aliases = {
            "u": cls.UNION, "union": cls.UNION, "∪": cls.UNION, "|": cls.UNION,
            "i": cls.INTERSECT, "intersect": cls.INTERSECT, "∩": cls.INTERSECT, "&": cls.INTERSECT,
            "d": cls.DIFFERENCE, "difference": cls.DIFFERENCE, "∖": cls.DIFFERENCE, "\\": cls.DIFFERENCE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ContractError(f"unknown set operation {text!r}") from None


class JoinKind(enum.Enum):
    NATURAL = "n"
    UNION = "u"
    INTERSECT = "i"
    DIFFERENCE = "d"

    @property
    def set_op(self) -> SetOp:
        # natural join combines agreeing entries, for which union is the identity
        return SetOp.UNION if self is JoinKind.NATURAL else SetOp(self.value)


def _check_lengths(a: int, b: int) -> None:
    if a != b:
        raise ContractError(f"operands are for different lengths ({a} vs {b})")


def join_tuples(t1: GammaTuple, t2: GammaTuple, kind: JoinKind) -> GammaTuple | None:
    """Join two tuples for the same document; ``None`` when a natural join is undefined."""
    _check_lengths(t1.length, t2.length)
    e1, e2 = t1.as_dict(), t2.as_dict()
    shared = e1.keys() & e2.keys()
    if kind is JoinKind.NATURAL and any(e1[x] != e2[x] for x in shared):
        return None
    op = kind.set_op
    out = dict(e1)
    out.update(e2)
    for x in shared:
        out[x] = op.apply(e1[x], e2[x])
    return GammaTuple.make(out, t1.length)


def join_tables(T1: GammaTable, T2: GammaTable, kind: JoinKind) -> GammaTable:
    _check_lengths(T1.length, T2.length)
    rows = set()
    for t1 in T1.rows:
        for t2 in T2.rows:
            t = join_tuples(t1, t2, kind)
            if t is not None:
                rows.add(t)
    return GammaTable(T1.gamma | T2.gamma, T1.length, rows)


def join_markers(
    m1: Marker, m2: Marker, gamma1: frozenset[str], gamma2: frozenset[str], kind: JoinKind
) -> Marker | None:
    """Combine two equally signed markers over ``gamma1`` and ``gamma2``."""
    if m1.sign != m2.sign:
        return None
    shared = gamma1 & gamma2
    a1, a2 = m1.attrs & shared, m2.attrs & shared
    if kind is JoinKind.NATURAL and a1 != a2:
        return None
    attrs = (m1.attrs - shared) | (m2.attrs - shared) | kind.set_op.apply(a1, a2)
    return Marker(m1.sign, attrs)


def set_op_tables(T1: GammaTable, T2: GammaTable, op: SetOp) -> GammaTable:
    _check_lengths(T1.length, T2.length)
    gamma = T1.gamma | T2.gamma
    r1 = {pad_tuple(t, gamma) for t in T1.rows}
    r2 = {pad_tuple(t, gamma) for t in T2.rows}
    return GammaTable(gamma, T1.length, op.apply(frozenset(r1), frozenset(r2)))


def concat_tuples(t1: GammaTuple, t2: GammaTuple) -> GammaTuple:
    """Concatenate tuples for ``w1`` and ``w2`` into a tuple for ``w1 w2``."""
    shift = t1.length
    out = t1.as_dict()
    for x, ps in t2.entries:
        moved = frozenset(p + shift for p in ps)
        out[x] = out.get(x, frozenset()) | moved
    return GammaTuple.make(out, t1.length + t2.length)


def concat_tables(T1: GammaTable, T2: GammaTable) -> GammaTable:
    rows = {concat_tuples(t1, t2) for t1 in T1.rows for t2 in T2.rows}
    return GammaTable(T1.gamma | T2.gamma, T1.length + T2.length, rows)


# -- unary operators -----------------------------------------------------------


class UnaryOp:
    """Common interface of projection, merge and renaming."""

    def check(self, gamma: frozenset[str]) -> None:
        raise NotImplementedError

    def target(self, gamma: frozenset[str]) -> frozenset[str]:
        raise NotImplementedError

    def on_tuple(self, t: GammaTuple) -> GammaTuple:
        raise NotImplementedError

    def on_attrs(self, attrs: frozenset[str]) -> frozenset[str]:
        raise NotImplementedError

    def on_marker(self, m: Marker) -> Marker:
        return Marker(m.sign, self.on_attrs(m.attrs))


@dataclass(frozen=True)
class Project(UnaryOp):
    keep: frozenset[str]

    def __init__(self, keep: Iterable[str]):
        object.__setattr__(self, "keep", frozenset(keep))

    def check(self, gamma):
        if not self.keep <= gamma:
            raise ContractError(f"projection onto {sorted(self.keep)} not within {sorted(gamma)}")

    def target(self, gamma):
        return self.keep

    def on_tuple(self, t):
        self.check(t.gamma)
        return GammaTuple.make({x: t[x] for x in self.keep}, t.length)

    def on_attrs(self, attrs):
        return attrs & self.keep

    def __str__(self) -> str:
        return "pi{" + ",".join(sorted(self.keep)) + "}"


@dataclass(frozen=True)
class Merge(UnaryOp):
    """Fold column ``drop`` into column ``keep`` with a set operation, then drop it."""

    keep: str
    drop: str
    op: SetOp

    def check(self, gamma):
        if self.keep == self.drop:
            raise ContractError("merge needs two distinct attributes")
        if self.keep not in gamma or self.drop not in gamma:
            raise ContractError(f"merge attributes {self.keep}, {self.drop} not in {sorted(gamma)}")

    def target(self, gamma):
        return gamma - {self.drop}

    def on_tuple(self, t):
        self.check(t.gamma)
        out = t.as_dict()
        out[self.keep] = self.op.apply(out[self.keep], out.pop(self.drop))
        return GammaTuple.make(out, t.length)

    def on_attrs(self, attrs):
        has_keep = self.keep in attrs
        has_drop = self.drop in attrs
        if self.op is SetOp.UNION:
            keep = has_keep or has_drop
        elif self.op is SetOp.INTERSECT:
            keep = has_keep and has_drop
        else:
            keep = has_keep and not has_drop
        rest = attrs - {self.keep, self.drop}
        return rest | {self.keep} if keep else rest

    def __str__(self) -> str:
        return f"merge({self.keep},{self.drop},{self.op.value})"


@dataclass(frozen=True)
class Rename(UnaryOp):
    old: str
    new: str

    def check(self, gamma):
        if self.old not in gamma:
            raise ContractError(f"cannot rename {self.old!r}: not an attribute")
        if self.new in gamma:
            raise ContractError(f"cannot rename to {self.new!r}: already an attribute")

    def target(self, gamma):
        return (gamma - {self.old}) | {self.new}

    def on_tuple(self, t):
        self.check(t.gamma)
        out = t.as_dict()
        out[self.new] = out.pop(self.old)
        return GammaTuple.make(out, t.length)

    def on_attrs(self, attrs):
        if self.old in attrs:
            return (attrs - {self.old}) | {self.new}
        return attrs

    def __str__(self) -> str:
        return f"rho({self.old}->{self.new})"


def apply_unary(T: GammaTable, f: UnaryOp) -> GammaTable:
    f.check(T.gamma)
    return GammaTable(f.target(T.gamma), T.length, {f.on_tuple(t) for t in T.rows})
