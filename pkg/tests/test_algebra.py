import pytest
from hypothesis import given, strategies as st

from extractkit.algebra import (
    JoinKind,
    Merge,
    Project,
    Rename,
    SetOp,
    apply_unary,
    concat_tables,
    concat_tuples,
    join_markers,
    join_tables,
    join_tuples,
    set_op_tables,
)
from extractkit.errors import ContractError
from extractkit.markers import GammaTable, GammaTuple, Marker, decode, empty_tuple, encode_tuple


def tup(length, **entries):
    return GammaTuple.make(entries, length)


@st.composite
def tuples(draw, gamma, length=3):
    ps = st.frozensets(st.integers(1, length), max_size=length) if length else st.just(frozenset())
    return GammaTuple.make({x: draw(ps) for x in gamma}, length)


def test_natural_join_undefined_on_mismatch():
    assert join_tuples(tup(3, x=[1]), tup(3, x=[2], y=[3]), JoinKind.NATURAL) is None
    assert join_tuples(tup(3, x=[1]), tup(3, x=[1], y=[3]), JoinKind.NATURAL) == tup(3, x=[1], y=[3])


def test_join_with_disjoint_attributes_is_product():
    T1 = GammaTable.from_dicts("x", 2, [{"x": [1]}, {"x": [2]}])
    T2 = GammaTable.from_dicts("y", 2, [{"y": []}, {"y": [1, 2]}, {"y": [2]}])
    for kind in JoinKind:
        assert len(join_tables(T1, T2, kind)) == 6


def test_operands_for_different_lengths_rejected():
    with pytest.raises(ContractError):
        join_tuples(tup(2, x=[]), tup(3, x=[]), JoinKind.UNION)
    with pytest.raises(ContractError):
        set_op_tables(GammaTable("x", 1), GammaTable("x", 2), SetOp.UNION)


@given(tuples("xy"), tuples("yz"), st.sampled_from(list(JoinKind)))
def test_marker_join_matches_tuple_join(t1, t2, kind):
    # joining position-wise markers is the same as joining the tuples
    w = "aaa"
    W1, W2 = encode_tuple(w, t1), encode_tuple(w, t2)
    labels = [join_markers(a, b, t1.gamma, t2.gamma, kind) for a, b in zip(W1, W2)]
    expected = join_tuples(t1, t2, kind)
    if expected is None:
        assert None in labels
    else:
        assert None not in labels
        assert decode(labels, t1.gamma | t2.gamma)[1] == expected


def test_join_markers_needs_equal_signs():
    assert join_markers(Marker("a"), Marker("b"), frozenset(), frozenset(), JoinKind.UNION) is None


def test_merge_intersection_marker_rewrite():
    f = Merge("x", "y", SetOp.INTERSECT)
    assert f.on_marker(Marker("a", ["x", "y"])) == Marker("a", ["x"])
    assert f.on_marker(Marker("a", ["x"])) == Marker("a")
    assert f.on_marker(Marker("a", ["y", "z"])) == Marker("a", ["z"])


@given(tuples("xyz"), st.sampled_from(list(SetOp)))
def test_merge_marker_rewrite_matches_tuple_definition(t, op):
    f = Merge("x", "y", op)
    W = encode_tuple("aaa", t)
    rewritten = decode([f.on_marker(m) for m in W], f.target(t.gamma))[1]
    assert rewritten == f.on_tuple(t)
    assert rewritten["x"] == op.apply(t["x"], t["y"])


@given(tuples("xyz"))
def test_projection_and_rename(t):
    p = Project(["x", "z"])
    assert p.on_tuple(t).as_dict() == {"x": t["x"], "z": t["z"]}
    r = Rename("y", "w")
    back = Rename("w", "y")
    assert back.on_tuple(r.on_tuple(t)) == t
    assert r.on_tuple(t)["w"] == t["y"]


def test_unary_contract_violations():
    with pytest.raises(ContractError):
        Project(["q"]).check(frozenset("xy"))
    with pytest.raises(ContractError):
        Merge("x", "x", SetOp.UNION).check(frozenset("xy"))
    with pytest.raises(ContractError):
        Rename("x", "y").check(frozenset("xy"))
    with pytest.raises(ContractError):
        apply_unary(GammaTable("x", 1), Rename("q", "r"))


def test_concat_with_empty_tuple_is_identity():
    t = tup(4, u=[1, 3], v=[2])
    assert concat_tuples(empty_tuple("uv"), t) == t
    assert concat_tuples(t, empty_tuple("uv")) == t


@given(tuples("x", 2), tuples("xy", 1), tuples("y", 2))
def test_concat_associative(t1, t2, t3):
    assert concat_tuples(concat_tuples(t1, t2), t3) == concat_tuples(t1, concat_tuples(t2, t3))


def test_set_ops_pad_first():
    T1 = GammaTable.from_dicts("x", 1, [{"x": []}, {"x": [1]}])
    T2 = GammaTable.from_dicts("y", 1, [{"y": []}])
    assert set_op_tables(T1, T2, SetOp.INTERSECT).to_json() == [{"x": [], "y": []}]
    assert set_op_tables(T1, T2, SetOp.DIFFERENCE).to_json() == [{"x": [1], "y": []}]


def test_setop_parse_aliases():
    assert SetOp.parse("∩") is SetOp.INTERSECT
    assert SetOp.parse("union") is SetOp.UNION
    with pytest.raises(ContractError):
        SetOp.parse("xor")


def test_concat_tables_size_bound():
    T1 = GammaTable.from_dicts("x", 1, [{"x": []}, {"x": [1]}])
    T2 = GammaTable.from_dicts("x", 2, [{"x": [1]}, {"x": [2]}])
    T = concat_tables(T1, T2)
    assert T.length == 3 and len(T) == 4
    assert {frozenset(t["x"]) for t in T} == {frozenset(s) for s in ([2], [3], [1, 2], [1, 3])}
