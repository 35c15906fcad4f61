import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from extractkit.algebra import Merge, Project, Rename, SetOp
from extractkit.automata import atomic, concat, empty_automaton, epsilon_automaton, sign_universal, star, union
from extractkit.errors import ContractError, ParseError, ResourceLimitError
from extractkit.grammar import (
    ChomskyNormalGrammar,
    Cost,
    ExtractorGrammar,
    cfg_concat,
    cfg_emptiness,
    cfg_sample,
    cfg_star,
    cfg_unary,
    cfg_union,
    cyk,
    cyk_member,
    enumerate_slice_cfg,
    erase_to_sign,
    evaluate_cfg,
    format_grammar,
    intersect_with_automaton,
    parse_grammar,
    to_cnf,
)
from extractkit.markers import Alphabets, Marker, parse_marker_string
from extractkit.oracle import bounded_language, expected_table, oracle_eval

from helpers import all_markers, documents, random_grammar

CTX = Alphabets("ab", ["x", "y"])


def M(text):
    return parse_marker_string(text)


def strings_up_to(ctx, n):
    ms = all_markers(ctx)
    for k in range(n + 1):
        yield from itertools.product(ms, repeat=k)


BALANCED = parse_grammar(
    """
    sigma: a b
    gamma: x y
    S -> {x}:a S {y}:b | <eps>
    """
)


def test_balanced_grammar_tables():
    assert evaluate_cfg(BALANCED, "aabb").to_json() == [{"x": [1, 2], "y": [3, 4]}]
    assert len(evaluate_cfg(BALANCED, "abab")) == 0
    assert evaluate_cfg(BALANCED, "").to_json() == [{"x": [], "y": []}]


def test_cnf_of_epsilon_only_language():
    G = ExtractorGrammar(CTX, "S", [("S", [])])
    C = to_cnf(G)
    assert isinstance(C, ChomskyNormalGrammar)
    assert C.nullable and not C.binary_rules and not C.terminal_rules
    assert cyk_member(G, ())
    assert not cyk_member(G, M("{}:a"))


def test_cnf_of_empty_language():
    G = ExtractorGrammar(CTX, "S", [("S", ["S"])])
    assert cfg_emptiness(G)
    assert not to_cnf(G).rules
    assert cfg_sample(G) is None


def test_cnf_shape():
    C = BALANCED.cnf
    for head, body in C.rules:
        if not body:
            assert head == C.start
        elif len(body) == 1:
            assert isinstance(body[0], Marker)
        else:
            assert len(body) == 2 and C.start not in body


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_cnf_preserves_membership(seed):
    G = random_grammar(random.Random(seed), gamma="x" if seed % 2 else ())
    lang = bounded_language(G, 3)
    for W in strings_up_to(G.context, 3):
        assert cyk_member(G, W) == (W in lang)


def test_cyk_counts_cells_and_splits():
    cost = Cost()
    W = M("{x}:a {x}:a {y}:b {y}:b")
    assert cyk(BALANCED, W, cost)
    n = len(W)
    assert cost.nodes == n * (n + 1) // 2
    assert cost.arcs == sum((n - span + 1) * (span - 1) for span in range(2, n + 1))


def test_closures_against_bounded_language():
    G1 = BALANCED
    G2 = parse_grammar("sigma: a b\ngamma: x\nS -> {}:a | {x}:b S")
    L1, L2 = bounded_language(G1, 4), bounded_language(G2, 4)
    concat_lang = {u + v for u in L1 for v in L2 if len(u) + len(v) <= 4}
    assert bounded_language(cfg_union(G1, G2), 4) == L1 | L2
    assert bounded_language(cfg_concat(G1, G2), 4) == concat_lang


def test_star_contains_epsilon_and_powers():
    G = cfg_star(parse_grammar("sigma: a\ngamma: x\nS -> {x}:a"))
    assert cyk_member(G, ())
    assert cyk_member(G, M("{x}:a {x}:a {x}:a"))
    assert not cyk_member(G, M("{}:a"))


@pytest.mark.parametrize("f", [Project(["x"]), Merge("x", "y", SetOp.UNION), Rename("y", "z")])
def test_unary_on_grammars(f):
    G = cfg_unary(BALANCED, f)
    for w in ("ab", "aabb", "ba"):
        assert evaluate_cfg(G, w) == expected_table("unary", [BALANCED], w, f)


def test_erase_to_sign():
    E = erase_to_sign(BALANCED)
    assert cyk_member(E, M("{}:a {}:b"))
    assert not cyk_member(E, M("{x}:a {y}:b"))


def test_intersection_with_universal_and_empty_automata():
    U = sign_universal(CTX, None)
    G = intersect_with_automaton(BALANCED, U)
    assert bounded_language(G, 4) == bounded_language(BALANCED, 4)
    assert cfg_emptiness(intersect_with_automaton(BALANCED, empty_automaton(CTX)))


def test_intersection_with_regular_language():
    # x-marked a's followed by y-marked b's, at most two a's
    ctx = BALANCED.context
    a, b = atomic(["x"], "a", ctx), atomic(["y"], "b", ctx)
    up_to_two = union(epsilon_automaton(ctx), union(a, concat(a, a)))
    R = concat(up_to_two, star(b))
    G = intersect_with_automaton(BALANCED, R)
    assert bounded_language(G, 8) == {(), M("{x}:a {y}:b"), M("{x}:a {x}:a {y}:b {y}:b")}


def test_cfl_not_closed_under_intersection_example():
    # both factors are context free, their intersection is a^n b^n c^n
    ctx = Alphabets("abc")
    G1 = parse_grammar("sigma: a b c\nS -> A C\nA -> {}:a A {}:b | <eps>\nC -> {}:c C | <eps>")
    G2 = parse_grammar("sigma: a b c\nS -> A B\nA -> {}:a A | <eps>\nB -> {}:b B {}:c | <eps>")
    L1, L2 = bounded_language(G1, 9), bounded_language(G2, 9)
    signs = {"".join(m.sign for m in W) for W in L1 & L2}
    assert signs == {"", "abc", "aabbcc", "aaabbbccc"}
    assert G1.context == ctx


def test_sample_is_in_language():
    for seed in range(50):
        G = random_grammar(random.Random(seed))
        W = cfg_sample(G)
        assert (W is None) == cfg_emptiness(G)
        if W is not None:
            assert cyk_member(G, W)


def test_slice_matches_oracle():
    for seed in range(30):
        G = random_grammar(random.Random(seed))
        for w in documents(3):
            assert evaluate_cfg(G, w) == oracle_eval(G, w)


def test_slice_budget():
    G = parse_grammar("sigma: a\ngamma: x y\nS -> T S | <eps>\nT -> {}:a | {x}:a | {y}:a | {x,y}:a")
    assert len(enumerate_slice_cfg(G, "aaa")) == 64
    with pytest.raises(ResourceLimitError):
        enumerate_slice_cfg(G, "aaaa", budget=100)


def test_parse_format_roundtrip():
    for seed in range(30):
        G = random_grammar(random.Random(seed))
        H = parse_grammar(format_grammar(G))
        assert H.context == G.context
        assert bounded_language(H, 3) == bounded_language(G, 3)
    I = intersect_with_automaton(BALANCED, sign_universal(CTX, None))
    assert bounded_language(parse_grammar(format_grammar(I)), 4) == bounded_language(BALANCED, 4)


def test_parse_errors():
    with pytest.raises(ParseError) as info:
        parse_grammar("sigma: a\ngamma: x\nS -> {q}:a")
    assert "line 3" in str(info.value)
    with pytest.raises(ParseError):
        parse_grammar("sigma: a\nS {}:a")
    with pytest.raises(ParseError):
        parse_grammar("S -> {}:a")


def test_markers_must_fit_context():
    with pytest.raises(ContractError):
        ExtractorGrammar(CTX, "S", [("S", [Marker("c")])])
