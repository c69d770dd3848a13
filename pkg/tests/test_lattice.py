import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import scripts
from jsieve.lattice import (DivisorClass, bareiss_det, canonical_class, determinant_label,
                            determinant_labels, divisor_from_json, divisor_to_json, kbar_class,
                            pair, rr_lower_bound)
from jsieve.tree import TreeError, apply_step, blowup_point, initial_tree, replay
from oracles import random_script, random_step

E = DivisorClass.curve


def test_adjacent_curves_meet_once(worked):
    for i, j in worked.edges:
        assert pair(worked, E(i), E(j)) == 1


def test_self_pairing_of_zero_curves(worked):
    assert pair(worked, E(6), E(6)) == -3
    assert pair(worked, E(3), E(3)) == -4


def test_initial_classes():
    t = initial_tree()
    assert kbar_class(t) == DivisorClass({0: -2})
    assert canonical_class(t) == DivisorClass({0: -3})


def test_canonical_coefficient_on_label_one_leaf(worked):
    assert canonical_class(worked)[7] == 0


def test_unknown_support():
    with pytest.raises(TreeError):
        pair(initial_tree(), E(5), E(0))


def test_determinant_labels_small():
    t = blowup_point(initial_tree(), 0)
    assert determinant_label(t, 1) == 0
    assert determinant_label(t, 0) == 1
    t2 = blowup_point(t, 0)
    assert determinant_label(t2, 1) == 0
    assert determinant_label(t2, 0) == 1
    assert determinant_label(initial_tree(), 0) == 1


def test_determinant_labels_worked_example(worked):
    # the interior final curve has a negative label, the kbar-1 leaves too
    d = determinant_labels(worked)
    assert d[5] < 0
    assert all(d[v] < 0 for v in (7, 8, 9, 10))


def cofactor_det(m):
    if not m:
        return 1
    return sum((-1) ** j * m[0][j] * cofactor_det([row[:j] + row[j + 1:] for row in m[1:]])
               for j in range(len(m)) if m[0][j])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_bareiss_matches_cofactor_expansion(m):
    assert bareiss_det(m) == cofactor_det(m)


def test_bareiss_matches_sympy_on_larger(rng):
    for _ in range(20):
        n = rng.randint(7, 12)
        m = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)]
        assert bareiss_det(m) == sympy.Matrix(m).det()


@settings(max_examples=150, deadline=None)
@given(scripts(max_len=12))
def test_pairing_properties(script):
    t = replay(script)
    K = kbar_class(t)
    for v in t.vertices:
        assert pair(t, E(v.id), E(v.id)) == v.self_int
        assert pair(t, K, E(v.id)) == -2 + t.degree(v.id)
    r = random.Random(len(t))
    a = DivisorClass({v: r.randint(-3, 3) for v in t.ids()})
    b = DivisorClass({v: r.randint(-3, 3) for v in t.ids()})
    c = DivisorClass({v: Fraction(r.randint(-3, 3), 2) for v in t.ids()})
    assert pair(t, a, b) == pair(t, b, a)
    assert pair(t, a + c, b) == pair(t, a, b) + pair(t, c, b)
    assert pair(t, a.scale(3), b) == 3 * pair(t, a, b)


@settings(max_examples=150, deadline=None)
@given(scripts(max_len=12), st.randoms(use_true_random=False))
def test_rr_bound_is_integral(script, r):
    t = replay(script)
    L = DivisorClass({v: r.randint(-6, 6) for v in t.ids()})
    assert rr_lower_bound(t, L).denominator == 1


def test_rr_bound_zero_divisor(worked):
    assert rr_lower_bound(worked, DivisorClass()) == 1


def test_rr_bound_needs_integral(worked):
    with pytest.raises(ValueError):
        rr_lower_bound(worked, DivisorClass({0: Fraction(1, 2)}))


def test_determinant_label_invariance(rng):
    cases = 0
    for _ in range(300):
        t = replay(random_script(rng, rng.randint(0, 10)))
        v = rng.choice(t.ids())
        before = determinant_label(t, v)
        for _ in range(rng.randint(1, 5)):
            t = apply_step(t, random_step(rng, t))
        assert determinant_label(t, v) == before
        cases += 1
    assert cases == 300


def test_divisor_json_roundtrip():
    d = DivisorClass({0: 3, 4: Fraction(-1, 2)})
    obj = divisor_to_json(d)
    assert obj == {"coeffs": {"0": "3/1", "4": "-1/2"}}
    assert divisor_from_json(obj) == d
    assert divisor_from_json({"coeffs": {"2": "5"}}) == DivisorClass({2: 5})
    with pytest.raises(ValueError):
        divisor_from_json({"coeffs": {"x": "1/0"}})
