from __future__ import annotations

import warnings

import pytest
from hypothesis import given, strategies as st

from ultrawalk.errors import DomainError
from ultrawalk.ultrametric import (
    TreeParams,
    class_members,
    digit_reverse,
    level_class_of,
    padic_valuation,
    separation_level,
    tree_distance,
)

TP32 = TreeParams(3, 2)


@st.composite
def tree_and_sites(draw, n=2):
    p = draw(st.sampled_from([2, 3, 5]))
    M = draw(st.integers(1, 5))
    tp = TreeParams(p, M)
    sites = [draw(st.integers(0, tp.n_sites - 1)) for _ in range(n)]
    return tp, sites


def test_tree_params_validation():
    with pytest.raises(DomainError):
        TreeParams(1, 2)
    with pytest.raises(DomainError):
        TreeParams(3, 0)
    with pytest.warns(UserWarning):
        TreeParams(4, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        TreeParams(7, 3)


def test_class_sizes_partition_the_tree():
    for p, M in [(2, 1), (3, 2), (5, 4)]:
        tp = TreeParams(p, M)
        assert tp.class_sizes()[0] == 1
        assert sum(tp.class_sizes()) == p**M


@pytest.mark.parametrize("n, n2, k", [(5, 5, 0), (0, 1, 1), (0, 3, 2), (4, 7, 2), (6, 8, 1)])
def test_separation_level_examples(n, n2, k):
    assert separation_level(n, n2, TP32) == k


def test_separation_level_out_of_range():
    with pytest.raises(DomainError):
        separation_level(0, 9, TP32)
    with pytest.raises(DomainError):
        separation_level(-1, 0, TP32)


def test_tree_distance_examples():
    assert tree_distance(0, 0, TP32) == 0.0
    assert tree_distance(0, 1, TP32) == pytest.approx(1 / 3)
    assert tree_distance(0, 3, TP32) == 1.0


def test_classes_examples():
    assert level_class_of(0, TP32) == 0
    assert level_class_of(2, TP32) == 1
    assert level_class_of(8, TP32) == 2
    assert list(class_members(0, TP32)) == [0]
    assert list(class_members(1, TP32)) == [1, 2]
    assert list(class_members(2, TP32)) == [3, 4, 5, 6, 7, 8]
    with pytest.raises(DomainError):
        class_members(3, TP32)


def test_digit_reverse_examples():
    assert digit_reverse(0, TP32) == 0
    assert digit_reverse(1, TP32) == 3
    assert digit_reverse(5, TP32) == 7


def test_padic_valuation_examples():
    assert padic_valuation(3, 3) == 1
    assert padic_valuation(18, 3) == 2
    assert padic_valuation(5, 3) == 0
    with pytest.raises(DomainError):
        padic_valuation(0, 3)


@given(st.integers(1, 10**12), st.sampled_from([2, 3, 5, 7]))
def test_padic_valuation_matches_trial_division(n, p):
    v = 0
    while n % p**(v + 1) == 0:
        v += 1
    assert padic_valuation(n, p) == v
    assert padic_valuation(-n, p) == v


@given(tree_and_sites(3))
def test_strong_triangle_inequality(args):
    tp, (x, y, z) = args
    assert tree_distance(x, z, tp) <= max(tree_distance(x, y, tp), tree_distance(y, z, tp))


@given(tree_and_sites(2))
def test_separation_is_symmetric_and_matches_classes(args):
    tp, (a, b) = args
    k = separation_level(a, b, tp)
    assert k == separation_level(b, a, tp)
    assert level_class_of(b, tp) == separation_level(0, b, tp)
    assert (k == 0) == (a == b)
    # brute force: smallest level whose block contains both sites
    assert k == next(j for j in range(tp.M + 1) if a // tp.p**j == b // tp.p**j)


@given(tree_and_sites(1))
def test_digit_reverse_is_an_involution_preserving_classes_at_zero(args):
    tp, (n,) = args
    r = digit_reverse(n, tp)
    assert digit_reverse(r, tp) == n
    assert 0 <= r < tp.n_sites
    # the reversal maps a class to the sites with that many trailing zero digits
    if n:
        assert padic_valuation(r, tp.p) == tp.M - level_class_of(n, tp)
