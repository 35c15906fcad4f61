"""Random small extractors and a caching oracle for the property tests."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from extractkit.automata import ExtractorAutomaton, parse_automaton
from extractkit.grammar import ExtractorGrammar
from extractkit.markers import Alphabets, Marker, markers_for
from extractkit.oracle import oracle_eval

DATA = Path(__file__).parent / "data"
SIGMA = "ab"
EXAMPLE_DOC = "baaabacadcb"


def load_automaton(name: str) -> ExtractorAutomaton:
    return parse_automaton((DATA / name).read_text())


def documents(max_len: int, sigma: str = SIGMA) -> list[str]:
    return ["".join(p) for n in range(max_len + 1) for p in itertools.product(sigma, repeat=n)]


def random_gamma(rng: random.Random, pool=("x", "y", "z"), max_size: int = 2) -> frozenset[str]:
    return frozenset(rng.sample(pool, rng.randint(0, max_size)))


def all_markers(ctx: Alphabets) -> list[Marker]:
    return [m for b in sorted(ctx.sigma) for m in markers_for(b, ctx.gamma)]


def random_automaton(
    rng: random.Random, gamma=None, max_states: int = 4, density: float = 0.3, sigma: str = SIGMA
) -> ExtractorAutomaton:
    gamma = random_gamma(rng) if gamma is None else frozenset(gamma)
    ctx = Alphabets(sigma, gamma)
    n = rng.randint(1, max_states)
    markers = all_markers(ctx)
    trans = [
        (p, m, q)
        for p in range(n)
        for m in markers
        for q in range(n)
        if rng.random() < density / max(1, len(markers) // 4)
    ]
    finals = [q for q in range(n) if rng.random() < 0.5]
    return ExtractorAutomaton(ctx, n, 0, finals, trans)


def random_grammar(
    rng: random.Random, gamma=None, max_rules: int = 6, sigma: str = SIGMA
) -> ExtractorGrammar:
    gamma = random_gamma(rng) if gamma is None else frozenset(gamma)
    ctx = Alphabets(sigma, gamma)
    markers = all_markers(ctx)
    names = ["S", "A", "B"]
    rules = []
    for k in range(rng.randint(1, max_rules)):
        head = "S" if k == 0 else rng.choice(names)
        body = []
        for _ in range(rng.choice([0, 1, 1, 2, 2, 3])):
            body.append(rng.choice(names) if rng.random() < 0.35 else rng.choice(markers))
        rules.append((head, body))
    return ExtractorGrammar(ctx, "S", rules)


class OracleCache:
    """Memoizes oracle tables by extractor identity and document."""

    def __init__(self):
        self._tables = {}

    def __call__(self, E, w: str):
        key = (id(E), w)
        if key not in self._tables:
            self._tables[key] = (E, oracle_eval(E, w))
        return self._tables[key][1]
