"""Algebraic extractor expressions and their compilation into automata.

Infix syntax, loosest binding first::

    E | E          union
    E \\ E          difference
    E & E          intersection
    E join[k] E    join, k one of n (natural), u, i, d
    E E            concatenation (juxtaposition; '.' may be written explicitly)
    !E             complement
    E*             star

Primaries are markers such as ``{x,y}:a``, ``<eps>``, ``<empty>``, a
parenthesized expression, or a unary operator applied to one:
``pi{x,y}(E)``, ``merge(x,y,u)(E)``, ``rho(x->y)(E)`` and ``pad{x,y}(E)``.

The attribute set of a subexpression is the set of attributes its atoms
mention (``pad`` widens it).  Complement is taken relative to it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union as _Union

from .algebra import JoinKind, Merge, Project, Rename, SetOp, UnaryOp
from .automata import (
    DEFAULT_STATE_BUDGET,
    ExtractorAutomaton,
    apply_unary_lang,
    atomic,
    complement,
    concat,
    difference,
    empty_automaton,
    epsilon_automaton,
    intersect,
    join_product,
    star,
    union,
)
from .errors import ContractError, ParseError
from .markers import Alphabets, Marker, format_marker, parse_marker

__all__ = [
    "Expr",
    "Atom",
    "Eps",
    "Empty",
    "Union",
    "Concat",
    "Star",
    "Intersect",
    "Difference",
    "Complement",
    "Join",
    "Unary",
    "Pad",
    "parse_expr",
    "parse_expr_file",
    "format_expr",
    "expr_gamma",
    "compile_expr",
]


@dataclass(frozen=True)
class Atom:
    marker: Marker


@dataclass(frozen=True)
class Eps:
    pass


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Union:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Concat:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Star:
    inner: "Expr"


@dataclass(frozen=True)
class Intersect:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Difference:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Complement:
    inner: "Expr"


@dataclass(frozen=True)
class Join:
    kind: JoinKind
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Unary:
    op: UnaryOp
    inner: "Expr"


@dataclass(frozen=True)
class Pad:
    attrs: frozenset[str]
    inner: "Expr"


Expr = _Union[Atom, Eps, Empty, Union, Concat, Star, Intersect, Difference, Complement, Join, Unary, Pad]


# -- attribute inference and compilation ------------------------------------------------


def expr_gamma(e: Expr) -> frozenset[str]:
    """Attribute set of ``e`` as described in the module docstring."""
    if isinstance(e, Atom):
        return e.marker.attrs
    if isinstance(e, (Eps, Empty)):
        return frozenset()
    if isinstance(e, (Star, Complement)):
        return expr_gamma(e.inner)
    if isinstance(e, Unary):
        g = expr_gamma(e.inner)
        e.op.check(g)
        return e.op.target(g)
    if isinstance(e, Pad):
        return expr_gamma(e.inner) | e.attrs
    return expr_gamma(e.left) | expr_gamma(e.right)


def compile_expr(e: Expr, sigma: Iterable[str], budget: int = DEFAULT_STATE_BUDGET) -> ExtractorAutomaton:
    """Bottom-up application of the automaton constructions."""
    sigma = frozenset(sigma)

    def go(e: Expr) -> ExtractorAutomaton:
        if isinstance(e, Atom):
            return atomic(e.marker.attrs, e.marker.sign, Alphabets(sigma, e.marker.attrs))
        if isinstance(e, Eps):
            return epsilon_automaton(Alphabets(sigma))
        if isinstance(e, Empty):
            return empty_automaton(Alphabets(sigma))
        if isinstance(e, Union):
            return union(go(e.left), go(e.right))
        if isinstance(e, Concat):
            return concat(go(e.left), go(e.right))
        if isinstance(e, Star):
            return star(go(e.inner))
        if isinstance(e, Intersect):
            return intersect(go(e.left), go(e.right), budget)
        if isinstance(e, Difference):
            return difference(go(e.left), go(e.right), budget)
        if isinstance(e, Complement):
            return complement(go(e.inner), budget)
        if isinstance(e, Join):
            return join_product(go(e.left), go(e.right), e.kind, budget)
        if isinstance(e, Unary):
            return apply_unary_lang(go(e.inner), e.op)
        if isinstance(e, Pad):
            M = go(e.inner)
            return M.with_context(M.context.with_gamma(M.context.gamma | e.attrs))
        raise ContractError(f"not an expression: {e!r}")

    return go(e)


# -- formatting ------------------------------------------------------------------------


_PREC = {Union: 1, Difference: 2, Intersect: 3, Join: 4, Concat: 5, Complement: 8}


def format_expr(e: Expr) -> str:
    """Render ``e`` so that :func:`parse_expr` gives back an equal tree."""

    def prec(e) -> int:
        return _PREC.get(type(e), 9)

    def wrap(e, need: int) -> str:
        s = go(e)
        return f"({s})" if prec(e) < need else s

    def go(e) -> str:
        if isinstance(e, Atom):
            return format_marker(e.marker)
        if isinstance(e, Eps):
            return "<eps>"
        if isinstance(e, Empty):
            return "<empty>"
        if isinstance(e, Star):
            return wrap(e.inner, 9) + "*"
        if isinstance(e, Complement):
            return "!" + wrap(e.inner, 8)
        if isinstance(e, Unary):
            return f"{e.op}({go(e.inner)})"
        if isinstance(e, Pad):
            return "pad{" + ",".join(sorted(e.attrs)) + "}(" + go(e.inner) + ")"
        p = prec(e)
        op = {Union: " | ", Difference: " \\ ", Intersect: " & ", Concat: " "}.get(type(e))
        if isinstance(e, Join):
            op = f" join[{e.kind.value}] "
        # left-associative: the right operand needs strictly tighter binding
        return wrap(e.left, p) + op + wrap(e.right, p + 1)

    return go(e)


# -- parsing ---------------------------------------------------------------------------------

_TOKENS = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<marker>\{[^{}]*\}:\S)
  | (?P<eps><eps>)
  | (?P<empty><empty>)
  | (?P<join>join\[\s*[nuid]\s*\])
  | (?P<pi>pi\{[^{}]*\})
  | (?P<pad>pad\{[^{}]*\})
  | (?P<merge>merge\(\s*[^,()]+,\s*[^,()]+,\s*[^,()]+\))
  | (?P<rho>rho\(\s*[^()]+?\s*->\s*[^()]+?\s*\))
  | (?P<sym>[|\\&!*().·])
    """,
    re.VERBOSE,
)


def _attr_list(text: str) -> list[str]:
    inner = text[text.index("{") + 1 : -1]
    return [a.strip() for a in inner.split(",") if a.strip()]


class _Parser:
    def __init__(self, text: str, origin: tuple[int, int] = (1, 0)):
        self.text = text
        self.origin = origin
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKENS.match(text, pos)
            if not m:
                raise self.error(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            if kind != "ws":
                value = m.group()
                self.tokens.append((kind if kind != "sym" else value, value, pos))
            pos = m.end()
        self.i = 0

    def error(self, message: str, offset: int) -> ParseError:
        line0, col0 = self.origin
        before = self.text[:offset]
        line = line0 + before.count("\n")
        col = (offset - before.rfind("\n")) if "\n" in before else col0 + offset + 1
        return ParseError(message, line, col)

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def offset(self) -> int:
        return self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)

    def take(self, kind: str | None = None):
        if self.i >= len(self.tokens):
            raise self.error("unexpected end of expression", len(self.text))
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise self.error(f"expected {kind!r}, got {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> Expr:
        if not self.tokens:
            raise self.error("empty expression", 0)
        e = self.union()
        if self.peek() is not None:
            raise self.error(f"unexpected {self.tokens[self.i][1]!r}", self.offset())
        return e

    def union(self):
        e = self.difference()
        while self.peek() == "|":
            self.take()
            e = Union(e, self.difference())
        return e

    def difference(self):
        e = self.intersection()
        while self.peek() == "\\":
            self.take()
            e = Difference(e, self.intersection())
        return e

    def intersection(self):
        e = self.join()
        while self.peek() == "&":
            self.take()
            e = Intersect(e, self.join())
        return e

    def join(self):
        e = self.concat()
        while self.peek() == "join":
            _, value, _ = self.take()
            kind = JoinKind(value[value.index("[") + 1 : -1].strip())
            e = Join(kind, e, self.concat())
        return e

    _STARTS = {"marker", "eps", "empty", "pi", "pad", "merge", "rho", "!", "("}

    def concat(self):
        e = self.prefix()
        while self.peek() in self._STARTS or self.peek() in (".", "·"):
            if self.peek() in (".", "·"):
                self.take()
            e = Concat(e, self.prefix())
        return e

    def prefix(self):
        if self.peek() == "!":
            self.take()
            return Complement(self.prefix())
        e = self.primary()
        while self.peek() == "*":
            self.take()
            e = Star(e)
        return e

    def primary(self):
        kind, value, pos = self.take()
        try:
            if kind == "marker":
                return Atom(parse_marker(value))
            if kind == "eps":
                return Eps()
            if kind == "empty":
                return Empty()
            if kind == "(":
                e = self.union()
                self.take(")")
                return e
            if kind == "pi":
                return Unary(Project(_attr_list(value)), self.argument())
            if kind == "pad":
                return Pad(frozenset(_attr_list(value)), self.argument())
            if kind == "merge":
                keep, drop, op = (s.strip() for s in value[6:-1].split(","))
                return Unary(Merge(keep, drop, SetOp.parse(op)), self.argument())
            if kind == "rho":
                old, new = (s.strip() for s in value[4:-1].split("->"))
                return Unary(Rename(old, new), self.argument())
        except ContractError as exc:
            raise self.error(str(exc), pos) from None
        raise self.error(f"unexpected {value!r}", pos)

    def argument(self):
        self.take("(")
        e = self.union()
        self.take(")")
        return e


def parse_expr(text: str) -> Expr:
    return _Parser(text).parse()


def parse_expr_file(text: str) -> tuple[Expr, Alphabets]:
    """Headers ``sigma:`` (required), ``gamma:`` (optional) and ``expr:``.

    The expression may continue over the following lines.  ``gamma``, when
    given, must contain every attribute the expression uses and becomes the
    context of the compiled automaton.
    """
    sigma = gamma = None
    expr_lines: list[str] = []
    origin = None
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if origin is not None:
            expr_lines.append(raw)
            continue
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in ("sigma", "gamma", "expr"):
            raise ParseError(f"expected 'sigma:', 'gamma:' or 'expr:', got {line!r}", lineno, 1)
        if key == "sigma":
            sigma = value.replace(",", " ").split()
        elif key == "gamma":
            gamma = value.replace(",", " ").split()
        else:
            start = raw.index(":") + 1
            origin = (lineno, start)
            expr_lines.append(raw[start:])
    if sigma is None:
        raise ParseError("missing 'sigma:' header")
    if origin is None:
        raise ParseError("missing 'expr:' line")
    body = "\n".join(l for l in expr_lines)
    # drop trailing comment lines
    body = "\n".join(l if not l.strip().startswith("#") else "" for l in body.split("\n"))
    e = _Parser(body, origin).parse()
    try:
        ctx = Alphabets(sigma, gamma if gamma is not None else expr_gamma(e))
        used = expr_gamma(e)
    except ContractError as exc:
        raise ParseError(str(exc)) from None
    if not used <= ctx.gamma:
        raise ParseError(f"expression uses attributes {sorted(used - ctx.gamma)} missing from 'gamma:'")
    return e, ctx
