"""Markers, marker strings, tuples and tables.

A marker ``X_b`` pairs a terminal symbol ``b`` (its sign) with a set ``X`` of
attributes.  A string ``w`` together with a tuple ``t`` for ``w`` is encoded as
the marker string whose ``i``-th marker has sign ``w[i]`` and carries exactly
the attributes ``x`` with ``i in t(x)``.  Positions are 1-based throughout.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ContractError, ParseError

__all__ = [
    "Alphabets",
    "Marker",
    "MarkerString",
    "GammaTuple",
    "GammaTable",
    "sign",
    "encode_tuple",
    "decode",
    "pad_tuple",
    "empty_tuple",
    "parse_marker",
    "parse_marker_string",
    "format_marker",
    "format_marker_string",
    "markers_for",
]


@dataclass(frozen=True)
class Alphabets:
    """Terminal alphabet ``sigma`` and attribute alphabet ``gamma``."""

    sigma: frozenset[str]
    gamma: frozenset[str]

    def __init__(self, sigma: Iterable[str], gamma: Iterable[str] = ()):
        sigma = frozenset(sigma)
        gamma = frozenset(gamma)
        for b in sigma:
            if not isinstance(b, str) or len(b) != 1:
                raise ContractError(f"terminal symbols are single characters, got {b!r}")
        for x in gamma:
            if not isinstance(x, str) or not _ATTR_RE.fullmatch(x):
                raise ContractError(f"invalid attribute name {x!r}")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "gamma", gamma)

    def with_gamma(self, gamma: Iterable[str]) -> Alphabets:
        return Alphabets(self.sigma, gamma)

    def union(self, other: Alphabets) -> Alphabets:
        return Alphabets(self.sigma | other.sigma, self.gamma | other.gamma)

    def check_marker(self, m: Marker) -> None:
        if m.sign not in self.sigma:
            raise ContractError(f"marker {format_marker(m)} has sign outside sigma")
        if not m.attrs <= self.gamma:
            raise ContractError(f"marker {format_marker(m)} has attributes outside gamma")

    def check_document(self, w: str) -> None:
        bad = set(w) - self.sigma
        if bad:
            raise ContractError(f"document uses symbols outside sigma: {sorted(bad)}")

    def __repr__(self) -> str:
        return f"Alphabets(sigma={sorted(self.sigma)}, gamma={sorted(self.gamma)})"


@dataclass(frozen=True, order=False)
class Marker:
    """A signed marker: terminal ``sign`` decorated with attribute set ``attrs``."""

    sign: str
    attrs: frozenset[str] = frozenset()

    def __init__(self, sign: str, attrs: Iterable[str] = ()):
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "attrs", frozenset(attrs))

    def sort_key(self) -> tuple[str, tuple[str, ...]]:
        return (self.sign, tuple(sorted(self.attrs)))

    def __lt__(self, other: Marker) -> bool:
        return self.sort_key() < other.sort_key()

    def erased(self) -> Marker:
        return Marker(self.sign)

    def __repr__(self) -> str:
        return f"Marker({format_marker(self)})"


MarkerString = tuple[Marker, ...]


def sign(W: Sequence[Marker]) -> str:
    return "".join(m.sign for m in W)


@dataclass(frozen=True)
class GammaTuple:
    """A total map from attributes to sets of positions of a length-``length`` string.

    ``entries`` is kept sorted by attribute name so equal tuples compare and hash
    equal regardless of construction order.
    """

    length: int
    entries: tuple[tuple[str, frozenset[int]], ...]

    def __post_init__(self):
        if self.length < 0:
            raise ContractError("tuple length must be non-negative")
        names = [x for x, _ in self.entries]
        if names != sorted(set(names)):
            raise ContractError("tuple entries must be sorted and unique")
        for x, ps in self.entries:
            for p in ps:
                if not 1 <= p <= self.length:
                    raise ContractError(
                        f"position {p} of attribute {x} outside 1..{self.length}"
                    )

    @classmethod
    def make(cls, mapping: Mapping[str, Iterable[int]], length: int) -> GammaTuple:
        return cls(length, tuple(sorted((x, frozenset(ps)) for x, ps in mapping.items())))

    @property
    def gamma(self) -> frozenset[str]:
        return frozenset(x for x, _ in self.entries)

    def __getitem__(self, attr: str) -> frozenset[int]:
        for x, ps in self.entries:
            if x == attr:
                return ps
        raise KeyError(attr)

    def as_dict(self) -> dict[str, frozenset[int]]:
        return dict(self.entries)

    def sort_key(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(sorted(ps)) for _, ps in self.entries)

    def to_json(self) -> dict[str, list[int]]:
        return {x: sorted(ps) for x, ps in self.entries}

    def __repr__(self) -> str:
        body = ", ".join(f"{x}={set(sorted(ps)) if ps else '∅'}" for x, ps in self.entries)
        return f"GammaTuple(n={self.length}; {body})"


def empty_tuple(gamma: Iterable[str], length: int = 0) -> GammaTuple:
    """The tuple mapping every attribute of ``gamma`` to the empty set."""
    return GammaTuple.make({x: () for x in gamma}, length)


@dataclass(frozen=True)
class GammaTable:
    """A set of tuples over the same attributes, all for documents of one length.

    Iteration follows the canonical row order (attribute-major, then
    lexicographic on the sorted position lists).
    """

    gamma: frozenset[str]
    length: int
    rows: frozenset[GammaTuple] = frozenset()

    def __init__(self, gamma: Iterable[str], length: int, rows: Iterable[GammaTuple] = ()):
        gamma = frozenset(gamma)
        rows = frozenset(rows)
        for t in rows:
            if t.gamma != gamma:
                raise ContractError(
                    f"row over {sorted(t.gamma)} does not match table attributes {sorted(gamma)}"
                )
            if t.length != length:
                raise ContractError(f"row for length {t.length} in table for length {length}")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_dicts(
        cls, gamma: Iterable[str], length: int, rows: Iterable[Mapping[str, Iterable[int]]]
    ) -> GammaTable:
        gamma = frozenset(gamma)
        tuples = []
        for r in rows:
            full = {x: () for x in gamma}
            full.update(r)
            tuples.append(GammaTuple.make(full, length))
        return cls(gamma, length, tuples)

    def __iter__(self) -> Iterator[GammaTuple]:
        return iter(sorted(self.rows, key=GammaTuple.sort_key))

    def __len__(self) -> int:
        return len(self.rows)

    def __contains__(self, t: object) -> bool:
        return t in self.rows

    def __bool__(self) -> bool:
        return bool(self.rows)

    def to_json(self) -> list[dict[str, list[int]]]:
        return [t.to_json() for t in self]

    def to_csv(self) -> str:
        attrs = sorted(self.gamma)
        lines = [",".join(attrs)]
        for t in self:
            cells = ['"{' + ",".join(map(str, sorted(t[x]))) + '}"' for x in attrs]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"GammaTable(gamma={sorted(self.gamma)}, n={self.length}, {len(self.rows)} rows)"


def encode_tuple(w: str, t: GammaTuple) -> MarkerString:
    """The marker string representing the pair ``(w, t)``."""
    if t.length != len(w):
        raise ContractError(f"tuple is for length {t.length}, document has length {len(w)}")
    attrs_at: list[set[str]] = [set() for _ in w]
    for x, ps in t.entries:
        for p in ps:
            attrs_at[p - 1].add(x)
    return tuple(Marker(b, a) for b, a in zip(w, attrs_at))


def decode(W: Sequence[Marker], gamma: Iterable[str] | None = None) -> tuple[str, GammaTuple]:
    """Inverse of :func:`encode_tuple`.

    ``gamma`` fixes the attribute set of the resulting tuple; it defaults to the
    attributes that occur in ``W``.
    """
    if gamma is None:
        gamma = set().union(*(m.attrs for m in W)) if W else set()
    gamma = frozenset(gamma)
    entries: dict[str, set[int]] = {x: set() for x in gamma}
    for i, m in enumerate(W, start=1):
        for x in m.attrs:
            if x not in entries:
                raise ContractError(f"marker attribute {x!r} not in tuple attributes")
            entries[x].add(i)
    return sign(W), GammaTuple.make(entries, len(W))


def pad_tuple(t: GammaTuple, target: Iterable[str]) -> GammaTuple:
    """Extend ``t`` with empty entries for the attributes of ``target`` it lacks."""
    target = frozenset(target)
    if not t.gamma <= target:
        raise ContractError(
            f"cannot pad {sorted(t.gamma)} to {sorted(target)}: not a superset"
        )
    full = {x: frozenset() for x in target}
    full.update(t.entries)
    return GammaTuple.make(full, t.length)


def markers_for(b: str, gamma: Iterable[str]) -> Iterator[Marker]:
    """All ``2**|gamma|`` markers with sign ``b`` over ``gamma``, in canonical order."""
    attrs = sorted(gamma)
    for r in range(len(attrs) + 1):
        for combo in itertools.combinations(attrs, r):
            yield Marker(b, combo)


# -- text syntax -------------------------------------------------------------

_ATTR_RE = re.compile(r"[A-Za-z0-9_.\-]+")
_MARKER_RE = re.compile(r"\{([^{}]*)\}:(\S)")


def format_marker(m: Marker) -> str:
    return "{" + ",".join(sorted(m.attrs)) + "}:" + m.sign


def format_marker_string(W: Sequence[Marker]) -> str:
    return " ".join(format_marker(m) for m in W)


def parse_marker(text: str) -> Marker:
    m = _MARKER_RE.fullmatch(text.strip())
    if not m:
        raise ParseError(f"expected a marker like '{{x,y}}:a', got {text!r}")
    return _marker_from_match(m)


def _marker_from_match(m: re.Match) -> Marker:
    inner = m.group(1).strip()
    attrs = [a.strip() for a in inner.split(",")] if inner else []
    for a in attrs:
        if not _ATTR_RE.fullmatch(a):
            raise ParseError(f"invalid attribute name {a!r} in marker {m.group(0)!r}")
    return Marker(m.group(2), attrs)


def parse_marker_string(text: str) -> MarkerString:
    """Parse whitespace-separated markers; ``<eps>`` or blank text is the empty string."""
    text = text.strip()
    if not text or text == "<eps>":
        return ()
    out = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _MARKER_RE.match(text, pos)
        if not m:
            raise ParseError(f"expected a marker at offset {pos}: {text[pos:pos + 12]!r}", 1, pos + 1)
        out.append(_marker_from_match(m))
        pos = m.end()
    return tuple(out)
