from fractions import Fraction
from itertools import combinations, permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from misp.acceptance import axiom_matroids, dual_rank_violations, matroid_axiom_violations
from misp.matroids import (
    DirectSumMatroid,
    DualMatroid,
    GraphicMatroid,
    LaminarMatroid,
    LinearMatroid,
    PartitionMatroid,
    RestrictionMatroid,
    TransversalMatroid,
    UniformMatroid,
    dual_of,
    in_span,
    is_independent,
    matroid_from_dict,
    rank,
    rational_rank,
    tie_break_order,
)

TRIANGLE = GraphicMatroid(3, [(0, 1), (1, 2), (0, 2)])


def all_subsets(n):
    return [frozenset(c) for r in range(n + 1) for c in combinations(range(n), r)]


def test_graphic_triangle():
    assert is_independent(TRIANGLE, {0, 1})
    assert not is_independent(TRIANGLE, {0, 1, 2})
    assert in_span(TRIANGLE, {0, 1}, 2)


def test_transversal_star():
    star = TransversalMatroid([["A"], ["A"], ["A"]])
    assert not star.is_independent({0, 1})
    assert star.is_independent({2})


def test_rank_examples():
    assert rank(UniformMatroid(4, 2), {0, 1, 2}) == 2
    for _, m in axiom_matroids():
        assert m.rank(set()) == 0


def test_dual_triangle():
    d = dual_of(TRIANGLE)
    assert d.rank({0}) == 1
    assert d.full_rank() == 1


def test_span_empty_set_means_loop():
    m = GraphicMatroid(2, [(0, 1), (1, 1)])
    assert in_span(m, set(), 1)
    assert not in_span(m, set(), 0)
    assert m.is_loop(1)


def test_partition_span():
    m = PartitionMatroid([[0, 1], [2]], [1, 1])
    assert not in_span(m, {0}, 2)
    assert in_span(m, {0}, 1)


def test_tie_break_order():
    assert tie_break_order([3, 5, 3, 0]) == [1, 0, 2, 3]


@pytest.mark.parametrize("name,m", axiom_matroids(), ids=lambda x: x if isinstance(x, str) else "")
def test_axioms(name, m):
    assert matroid_axiom_violations(m) == []


@pytest.mark.parametrize("name,m", [x for x in axiom_matroids() if not isinstance(x[1], DualMatroid)],
                         ids=lambda x: x if isinstance(x, str) else "")
def test_dual_rank_identity(name, m):
    assert dual_rank_violations(m) == []


@pytest.mark.parametrize("n", range(0, 7))
def test_dual_of_uniform_is_uniform(n):
    for r in range(n + 1):
        d = dual_of(UniformMatroid(n, r))
        u = UniformMatroid(n, n - r)
        for s in all_subsets(n):
            assert d.is_independent(s) == u.is_independent(s)


@pytest.mark.parametrize("name,m", [x for x in axiom_matroids() if x[1].n <= 6],
                         ids=lambda x: x if isinstance(x, str) else "")
def test_dual_involution(name, m):
    dd = dual_of(dual_of(m))
    for s in all_subsets(m.n):
        assert dd.is_independent(s) == m.is_independent(s)


@pytest.mark.parametrize("name,m", axiom_matroids(), ids=lambda x: x if isinstance(x, str) else "")
def test_rank_monotone_submodular(name, m):
    subsets = all_subsets(m.n)
    r = {s: m.rank(s) for s in subsets}
    for a in subsets:
        for e in range(m.n):
            assert r[a] <= r[a | {e}] <= r[a] + 1
    for a in subsets[:: max(1, len(subsets) // 40)]:
        for b in subsets:
            assert r[a] + r[b] >= r[a | b] + r[a & b]


def test_linear_is_exact():
    # 1e-17 would vanish in floating point; exact arithmetic keeps the columns independent
    m = LinearMatroid([[1, 1], [0, Fraction(1, 10 ** 17)]])
    assert m.is_independent({0, 1})
    assert rational_rank([[1, 2], [2, 4]]) == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=5, max_size=5), min_size=1, max_size=4))
def test_linear_rank_is_pivot_order_independent(rows):
    m = LinearMatroid(rows)
    for s in [frozenset(range(5)), frozenset({0, 2, 4}), frozenset({1, 3})]:
        cols = [[row[c] for row in rows] for c in sorted(s)]
        for perm in list(permutations(cols))[:6]:
            assert rational_rank(list(perm)) == m.rank(s)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=7))
def test_random_graphs_satisfy_axioms(edges):
    assert matroid_axiom_violations(GraphicMatroid(5, edges)) == []


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sets(st.integers(0, 3), max_size=3), min_size=1, max_size=7))
def test_random_transversal_satisfy_axioms(adj):
    assert matroid_axiom_violations(TransversalMatroid(adj)) == []


def test_restriction_and_direct_sum_ids():
    base = UniformMatroid(5, 2)
    r = RestrictionMatroid(base, [4, 2, 0])
    assert r.n == 3 and r.is_independent({0, 1}) and not r.is_independent({0, 1, 2})
    ds = DirectSumMatroid([UniformMatroid(2, 1), UniformMatroid(3, 3)])
    assert ds.n == 5
    assert not ds.is_independent({0, 1})
    assert ds.is_independent({0, 2, 3, 4})


def test_invalid_inputs():
    with pytest.raises(ValueError):
        PartitionMatroid([[0, 1], [1, 2]])
    with pytest.raises(ValueError):
        LaminarMatroid(4, [[0, 1, 2], [2, 3]], [1, 1])
    with pytest.raises(ValueError):
        GraphicMatroid(2, [(0, 5)])
    with pytest.raises(ValueError):
        UniformMatroid(3, 1).is_independent({7})


@pytest.mark.parametrize("name,m", axiom_matroids(), ids=lambda x: x if isinstance(x, str) else "")
def test_dict_round_trip(name, m):
    back = matroid_from_dict(m.to_dict())
    for s in all_subsets(m.n):
        assert back.is_independent(s) == m.is_independent(s)


@pytest.mark.parametrize("bad", [{}, {"type": "nope"}, {"type": "uniform", "n": 3}, {"type": "graphic"}])
def test_malformed_dicts(bad):
    with pytest.raises(ValueError):
        matroid_from_dict(bad)
