import random

import pytest
from hypothesis import given, settings, strategies as st

from extractkit.algebra import JoinKind, Merge, Project, SetOp
from extractkit.automata import (
    ExtractorAutomaton,
    apply_unary_lang,
    atomic,
    complement,
    concat,
    determinize,
    difference,
    empty_automaton,
    enumerate_slice,
    epsilon_automaton,
    evaluate,
    format_automaton,
    intersect,
    join_product,
    language_contains,
    language_empty,
    language_equivalent,
    language_witness,
    parse_automaton,
    sign_universal,
    star,
    union,
)
from extractkit.errors import ContractError, ParseError, ResourceLimitError
from extractkit.markers import Alphabets, Marker, parse_marker_string
from extractkit.oracle import expected_table, oracle_eval

from helpers import EXAMPLE_DOC, documents, load_automaton, random_automaton

CTX = Alphabets("ab", ["x", "y"])


def M(text):
    return parse_marker_string(text)


def test_atomic_language_and_tables():
    A = atomic(["x"], "a", CTX)
    assert A.accepts(M("{x}:a"))
    assert not A.accepts(M("{}:a"))
    assert evaluate(A, "a").to_json() == [{"x": [1], "y": []}]
    assert len(evaluate(A, "b")) == 0
    assert len(evaluate(A, "aa")) == 0
    with pytest.raises(ContractError):
        atomic(["q"], "a", CTX)


def test_epsilon_and_empty():
    E = epsilon_automaton(CTX)
    assert evaluate(E, "").to_json() == [{"x": [], "y": []}]
    assert len(evaluate(E, "a")) == 0
    assert all(len(evaluate(empty_automaton(CTX), w)) == 0 for w in documents(2))


def test_concat_of_atomics():
    ctx = Alphabets("a", ["x", "y"])
    C = concat(atomic(["x"], "a", ctx), atomic(["y"], "a", ctx))
    assert evaluate(C, "aa").to_json() == [{"x": [1], "y": [2]}]


def test_star_contains_empty_string():
    S = star(atomic(["x"], "a", CTX))
    assert S.accepts(())
    assert evaluate(S, "aaa").to_json() == [{"x": [1, 2, 3], "y": []}]
    assert len(evaluate(S, "ab")) == 0


def test_sign_universal_tables_are_universes():
    U = sign_universal(CTX, None)
    for w in documents(3):
        assert len(evaluate(U, w)) == 4 ** len(w)
    assert len(evaluate(sign_universal(CTX), "abab")) == 1


def test_epsilon_transitions_are_eliminated():
    text = """
    sigma: a b
    gamma: x
    states: 0 1 2
    initial: 0
    final: 2
    0 <eps> 1
    1 {x}:a 2
    2 <eps> 0
    """
    A = parse_automaton(text)
    assert A.accepts(M("{x}:a {x}:a"))
    assert not A.accepts(())


def test_parse_errors_carry_location():
    with pytest.raises(ParseError) as info:
        parse_automaton("sigma: a\ngamma: x\nstates: 0\ninitial: 0\nfinal: 0\n0 {q}:a 0\n")
    assert "line 6" in str(info.value)
    with pytest.raises(ParseError):
        parse_automaton("states: 0\ninitial: 0\n")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_format_parse_roundtrip(seed):
    A = random_automaton(random.Random(seed))
    B = parse_automaton(format_automaton(A))
    assert B.context == A.context
    assert language_equivalent(A, B)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_complement_is_an_involution(seed):
    A = random_automaton(random.Random(seed))
    D = determinize(A)
    assert D.is_deterministic and D.is_complete()
    assert language_equivalent(A, D)
    assert language_equivalent(complement(complement(A)), A)
    assert language_empty(intersect(A, complement(A)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_boolean_ops_against_oracle(seed):
    rng = random.Random(seed)
    g = frozenset(rng.sample("xy", rng.randint(0, 2)))
    A, B = random_automaton(rng, g), random_automaton(rng, g)
    for w in documents(2):
        assert evaluate(union(A, B), w) == expected_table("union", [A, B], w)
        assert evaluate(intersect(A, B), w) == expected_table("intersect", [A, B], w)
        assert evaluate(difference(A, B), w) == expected_table("difference", [A, B], w)


def test_witness_is_shortest():
    A = concat(atomic(["x"], "a", CTX), star(atomic([], "b", CTX)))
    assert language_witness(A) == M("{x}:a")
    assert language_witness(empty_automaton(CTX)) is None


def test_containment_and_equivalence():
    a = atomic(["x"], "a", CTX)
    assert language_contains(a, star(a))
    assert not language_contains(star(a), a)
    assert language_equivalent(star(star(a)), star(a))


def test_enumerate_slice_no_duplicates_on_ambiguous_nfa():
    # two parallel paths accept the same strings
    ctx = Alphabets("a", ["x"])
    trans = [(0, Marker("a"), 1), (0, Marker("a"), 2), (1, Marker("a", ["x"]), 3), (2, Marker("a", ["x"]), 3)]
    A = ExtractorAutomaton(ctx, 4, 0, [3], trans)
    assert list(enumerate_slice(A, "aa")) == [M("{}:a {x}:a")]


def test_evaluate_matches_oracle_on_example_extractors():
    for name in ("example_e1.aut", "example_e2.aut"):
        A = load_automaton(name)
        for w in ("", "a", "bacab", "cad"):
            assert evaluate(A, w) == oracle_eval(A, w)


def test_example_row_counts():
    assert len(evaluate(load_automaton("example_e1.aut"), EXAMPLE_DOC)) == 8
    assert len(evaluate(load_automaton("example_e2.aut"), EXAMPLE_DOC)) == 16


def test_limit_and_budget():
    U = sign_universal(CTX, None)
    assert len(evaluate(U, "aaa", limit=5)) == 5
    with pytest.raises(ResourceLimitError):
        evaluate(U, "aaa", budget=10)
    assert len(evaluate(U, "a", budget=4)) == 4


def test_state_budget_on_subset_construction():
    A = random_automaton(random.Random(3), "xy", max_states=4, density=0.9)
    with pytest.raises(ResourceLimitError):
        determinize(A, budget=1)


def test_join_product_natural():
    ctx1, ctx2 = Alphabets("a", ["x"]), Alphabets("a", ["x", "y"])
    A = star(atomic(["x"], "a", ctx1))
    B = concat(atomic(["x", "y"], "a", ctx2), star(atomic(["x"], "a", ctx2)))
    J = join_product(A, B, JoinKind.NATURAL)
    assert evaluate(J, "aa").to_json() == [{"x": [1, 2], "y": [1]}]


def test_operands_must_share_sigma():
    with pytest.raises(ContractError):
        union(atomic([], "a", Alphabets("a")), atomic([], "a", Alphabets("ab")))


def test_unary_operators_via_oracle():
    A = load_automaton("example_e1.aut")
    for f in (Project(["x"]), Merge("x", "y", SetOp.UNION), Merge("y", "z", SetOp.DIFFERENCE)):
        B = apply_unary_lang(A, f)
        for w in ("bacab", "aab"):
            assert evaluate(B, w) == expected_table("unary", [A], w, f)
