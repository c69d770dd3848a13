from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import scripts
from jsieve.canon import canonical_key
from jsieve.tree import (BlowupScript, CurveTree, NotContractible, ScriptError, TreeError, Vertex,
                         accelerated_finals, adjunction_self_int, blowup_edge, blowup_point,
                         check_invariants, contract, contractible, final_curves, final_curves_oracle,
                         initial_tree, realizable, replay, tree_from_json, tree_to_json)


def labels(t):
    return {v.id: (v.kbar, v.self_int) for v in t.vertices}


def chain(*specs, edges=None):
    """Hand-built tree; specs are (kbar, self_int), first one is the origin."""
    verts = tuple(Vertex(i, k, s, i == 0) for i, (k, s) in enumerate(specs))
    if edges is None:
        edges = [(i, i + 1) for i in range(len(specs) - 1)]
    return CurveTree(verts, frozenset(edges))


def test_initial_tree():
    t = initial_tree()
    assert labels(t) == {0: (-2, 1)}
    assert t.vertex(0).is_origin
    assert not t.edges
    assert realizable(t)
    assert final_curves(t) == set()


def test_point_blowup_on_origin():
    t = blowup_point(initial_tree(), 0)
    assert labels(t) == {0: (-2, 0), 1: (-1, -1)}
    assert t.edges == {(0, 1)}


def test_point_blowup_on_zero_curve_gives_one_leaf(worked):
    zero = next(v.id for v in worked.vertices if v.kbar == 0)
    t = blowup_point(worked, zero)
    new = max(t.ids())
    assert t.kbar(new) == 1 and t.neighbors(new) == (zero,)


def test_two_point_blowups_lower_self_int_by_two():
    t = replay(BlowupScript.parse("P 0\nP 1\n"))  # kbar-0 curve 2 with E^2 = -1
    assert labels(t)[2] == (0, -1)
    t = blowup_point(blowup_point(t, 2), 2)
    assert t.self_int(2) == -3


def test_edge_blowup_labels():
    t = replay(BlowupScript.parse("P 0\nP 1\n"))
    t = blowup_edge(t, 1, 2)
    assert t.kbar(3) == -1 and t.self_int(3) == -1
    assert t.edges == {(0, 1), (1, 3), (2, 3)}
    assert (t.self_int(1), t.self_int(2)) == (-3, -2)
    # between two -1 curves the new curve is -2
    t = blowup_edge(t, 1, 3)
    assert t.kbar(4) == -2


def test_edge_blowup_needs_an_edge():
    t = replay(BlowupScript.parse("P 0\nP 0\n"))
    with pytest.raises(TreeError):
        blowup_edge(t, 1, 2)


def test_unknown_vertex():
    with pytest.raises(TreeError):
        blowup_point(initial_tree(), 3)


def test_worked_example_replay(worked):
    t = worked
    assert len(t) == 11
    # walk the long chain from one kbar-0 end to the other
    ends = [v.id for v in t.vertices if v.kbar == 0]
    path = [ends[0]]
    while path[-1] != ends[1]:
        nxt = [u for u in t.neighbors(path[-1]) if t.kbar(u) != 1 and u not in path]
        path.append(nxt[0])
    assert [t.kbar(v) for v in path] == [0, -1, -2, -1, -2, -1, 0]
    ones = [v.id for v in t.vertices if v.kbar == 1]
    assert len(ones) == 4
    for z in ends:
        assert sum(1 for u in t.neighbors(z) if t.kbar(u) == 1) == 2
    # left is the end on the origin's first blowup
    assert t.self_int(6) == -3 and t.self_int(3) == -4


def test_empty_script_is_initial():
    assert replay(BlowupScript()) == initial_tree()


@pytest.mark.parametrize("text", ["X 0", "P", "P a", "E 0", "P 0 1"])
def test_malformed_scripts(text):
    with pytest.raises(ScriptError):
        BlowupScript.parse(text)


def test_replay_rejects_future_ids():
    with pytest.raises(ScriptError, match="step 0"):
        replay(BlowupScript.parse("P 1\n"))
    with pytest.raises(ScriptError, match="step 1"):
        replay(BlowupScript.parse("# comment\nP 0\nE 0 2\n"))


def test_script_text_roundtrip(worked_script):
    assert BlowupScript.parse(worked_script.to_text()) == worked_script


def test_check_invariants_clean(worked):
    assert check_invariants(worked) == []


def test_gcd_violation():
    bad = check_invariants(chain((-2, 1), (-2, -1)))
    assert [v.rule for v in bad] == ["gcd"]


def test_zero_adjacency_violation():
    bad = check_invariants(chain((-1, 1), (0, -1), (-2, -1)))
    assert "zero-adjacency" in {v.rule for v in bad}


def test_negative_part_disconnected():
    bad = check_invariants(chain((-1, 1), (1, -1), (-1, -1)))
    assert "negative-connected" in {v.rule for v in bad}


def test_adjunction(worked):
    assert adjunction_self_int(worked, 5) == -1
    assert adjunction_self_int(worked, 3) is None
    assert adjunction_self_int(worked, 6) is None
    assert adjunction_self_int(initial_tree(), 0) == 1


def test_contract_worked_example(worked):
    assert contractible(worked) == [5, 7, 8, 9, 10]
    t = contract(worked, 5)
    assert t.has_edge(2, 4) and (t.self_int(2), t.self_int(4)) == (-3, -1)
    with pytest.raises(NotContractible):
        contract(worked, 2)  # kbar -1, E^2 = -4
    with pytest.raises(NotContractible):
        contract(worked, 0)


def test_realizable_examples(worked):
    assert realizable(chain((-2, 0), (-1, -1)))
    # the origin must drop from +1 to 0 when the first point is blown up
    assert not realizable(chain((-2, 1), (-1, -1)))
    flipped = CurveTree(tuple(Vertex(v.id, 2 if v.id == 7 else v.kbar, v.self_int, v.is_origin)
                              for v in worked.vertices), worked.edges)
    assert not realizable(flipped)
    assert not realizable(chain((-2, 0)))


def test_final_curves_worked_example(worked):
    assert final_curves(worked) == {5, 7, 8, 9, 10}
    assert final_curves_oracle(worked) == {5, 7, 8, 9, 10}


def test_final_curves_needs_realizable():
    with pytest.raises(TreeError):
        final_curves(chain((-2, 0)))


def test_two_vertex_final():
    # the only non-origin curve of a 2-vertex tree is final
    assert final_curves(chain((-2, 0), (-1, -1))) == {1}


def test_json_roundtrip(worked):
    assert tree_from_json(tree_to_json(worked)) == worked


@pytest.mark.parametrize("obj", [
    {"vertices": [], "edges": []},
    {"vertices": [{"id": 0, "kbar": -2, "self_int": 1}], "edges": []},
    {"vertices": [{"id": 0, "kbar": -2, "self_int": 1, "origin": True},
                  {"id": 1, "kbar": -1, "self_int": -1, "origin": False}], "edges": []},
    {"vertices": [{"id": 0, "kbar": -2, "self_int": 1, "origin": True}], "edges": [[0, 0]]},
    {"vertices": "nope"},
])
def test_json_rejects_malformed(obj):
    with pytest.raises(TreeError):
        tree_from_json(obj)


# -- properties over legal trees ------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(scripts(max_len=14))
def test_legal_trees_keep_invariants(script):
    t = replay(script)
    assert check_invariants(t) == []
    assert len(t.edges) == len(t) - 1
    for v in t.vertices:
        s = adjunction_self_int(t, v.id)
        if v.kbar != 0:
            assert s == Fraction(v.self_int)
    # adjacent vertices never share a label >= 2
    for i, j in t.edges:
        assert not (t.kbar(i) == t.kbar(j) >= 2)


@settings(max_examples=200, deadline=None)
@given(scripts(max_len=12))
def test_contract_inverts_both_moves(script):
    t = replay(script)
    for v in t.ids():
        t1 = blowup_point(t, v)
        assert canonical_key(contract(t1, max(t1.ids()))) == canonical_key(t)
    for i, j in t.edges:
        t1 = blowup_edge(t, i, j)
        assert canonical_key(contract(t1, max(t1.ids()))) == canonical_key(t)


@settings(max_examples=150, deadline=None)
@given(scripts(max_len=10))
def test_finals_agree_with_local_rules(script):
    t = replay(script)
    assert realizable(t)
    oracle = final_curves_oracle(t)
    assert final_curves(t) == oracle
    yes, no = accelerated_finals(t, creation_ordered=True)
    assert yes <= oracle
    assert not (no & oracle)
    # label-1 vertices are fully decided by the local rule
    for v in t.vertices:
        if v.kbar == 1:
            assert (v.id in yes) == (v.id in oracle)
