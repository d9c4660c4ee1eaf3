from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare

from misp.framework import (
    combine_opt_competitive,
    combine_reduce_and_solve,
    combined_p,
    draw_sample_counts,
    generalized_greedy,
    generalized_overlap_set,
    generalized_overlapping_opt,
    merge_samples,
    opt_competitive_bound,
    reduce_and_solve_bound,
)
from misp.harness import generate_instance
from misp.matroids import GraphicMatroid, PartitionMatroid, TransversalMatroid, UniformMatroid
from misp.offline import greedy_intersection
from misp.overlap import draw_bernoulli_sample, overlap_set, overlapping_opt
from misp.secretary import (
    graphic_reduce_and_solve,
    partition_reduce_and_solve,
    simple_partition_secretary,
    transversal_reduce_and_solve,
    trivial_reduce_and_solve,
)

HALF = Fraction(1, 2)


def bipartite():
    left = PartitionMatroid([[0, 1], [2, 3]])
    right = PartitionMatroid([[0, 2], [1, 3]])
    return [left, right], [4, 3, 2, 1]


def trivial(ms):
    return [trivial_reduce_and_solve(m, simple_partition_secretary(HALF), Fraction(1, 4)) for m in ms]


def test_bounds():
    assert opt_competitive_bound([Fraction(1, 4)] * 2) == Fraction(1, 256)
    assert opt_competitive_bound([Fraction(1, 4)]) == Fraction(1, 16)
    g = graphic_reduce_and_solve(GraphicMatroid(3, [(0, 1), (1, 2), (0, 2)]))
    assert reduce_and_solve_bound([g]) == Fraction(1, 108)
    p = partition_reduce_and_solve(PartitionMatroid([[0, 1], [2]]))
    t = transversal_reduce_and_solve(TransversalMatroid([[0], [0, 1], [1]]))
    assert reduce_and_solve_bound([p, t]) == Fraction(1, 768)
    assert combined_p(2) == Fraction(3, 4)


def test_merge_without_inner_samples():
    plan = merge_samples(10, HALF, [], np.random.default_rng(0))
    assert plan.pooled == plan.S and len(plan.S) == plan.m
    assert plan.parts == []


def test_merge_sizes_and_containment():
    rng = np.random.default_rng(1)
    for _ in range(200):
        plan = merge_samples(12, Fraction(3, 4), [3, lambda n, r: int(r.integers(0, n + 1))], rng)
        assert len(plan.pooled) == plan.m + sum(m - q for m, q in zip(plan.sizes, plan.overlaps))
        assert len(plan.S) == plan.m
        union = set(plan.S)
        for part, mj, qj in zip(plan.parts, plan.sizes, plan.overlaps):
            assert len(part) == mj and len(part & union) == qj
            assert part <= plan.pooled
            union |= part
        assert union == plan.pooled


def test_merge_rejects_oversized():
    with pytest.raises(ValueError):
        merge_samples(3, HALF, [4], np.random.default_rng(0))
    with pytest.raises(ValueError):
        merge_samples(3, 1, [1], np.random.default_rng(0))


def test_merged_S_marginals():
    rng = np.random.default_rng(2)
    n, p, draws = 5, 0.75, 20_000
    counts = np.zeros(n)
    for _ in range(draws):
        for e in merge_samples(n, p, [2], rng).S:
            counts[e] += 1
    se = np.sqrt(p * (1 - p) / draws)
    # five elements checked at once, so four standard errors each
    assert (np.abs(counts / draws - p) <= 4 * se).all()


def test_merged_law_matches_independent_draws():
    # n=2, one inner sample of size 1: joint law of (S, S_1) is uniform over S x {0},{1}
    rng = np.random.default_rng(3)
    draws = 8000
    cells = {}
    for _ in range(draws):
        plan = merge_samples(2, HALF, [1], rng)
        key = (tuple(sorted(plan.S)), tuple(sorted(plan.parts[0])))
        cells[key] = cells.get(key, 0) + 1
    keys = [(s, t) for s in [(), (0,), (1,), (0, 1)] for t in [(0,), (1,)]]
    observed = [cells.get(k, 0) for k in keys]
    assert sum(observed) == draws
    assert chisquare(observed, [draws / 8] * 8).pvalue > 0.001


def test_sample_counts_validate():
    with pytest.raises(ValueError):
        draw_sample_counts(2, HALF, [-1], np.random.default_rng(0))


def test_generalized_greedy_trivial_matches_greedy():
    ms, w = bipartite()
    rng = np.random.default_rng(4)
    rs = trivial(ms)
    for _ in range(30):
        sample = draw_bernoulli_sample(4, 0.5, rng)
        sets = generalized_greedy(rs, w, sample)
        g = greedy_intersection(ms, w, ground=sample).as_set
        assert all(s == g for s in sets)
    assert generalized_greedy(rs, w, set()) == [set(), set()]


def test_generalized_overlap_trivial_matches_plain():
    rng = np.random.default_rng(5)
    for seed in range(3):
        inst = generate_instance("bipartite-matching-intersection", 8, seed)
        rs = trivial(inst.matroids)
        for _ in range(30):
            sample = draw_bernoulli_sample(inst.n, 0.75, rng)
            reduced, assignment = generalized_overlapping_opt(rs, inst.weights, sample)
            plain = overlapping_opt(inst.constraint, inst.weights, sample)
            assert reduced.weights == plain.weights
            assert generalized_overlap_set(rs, reduced.weights, assignment) == overlap_set(
                inst.constraint, plain.weights)


def test_generalized_overlap_full_sample():
    ms, w = bipartite()
    reduced, _ = generalized_overlapping_opt(trivial(ms), w, set(range(4)))
    assert reduced.weights == [0, 0, 0, 0]


def test_graphic_triangle_overlap():
    tri = GraphicMatroid(3, [(0, 1), (1, 2), (0, 2)])
    rs = [graphic_reduce_and_solve(tri)]
    w = [3, 2, 1]
    rng = np.random.default_rng(6)
    trials = 4000
    vals = np.zeros(trials)
    for t in range(trials):
        sample = draw_bernoulli_sample(3, 0.5, rng)
        reduced, assignment = generalized_overlapping_opt(rs, w, sample)
        chosen = generalized_overlap_set(rs, reduced.weights, assignment)
        assert tri.is_independent(chosen) and not chosen & sample
        vals[t] = sum(reduced.weights[e] for e in chosen)
    se = vals.std(ddof=1) / np.sqrt(trials)
    # OPT = {0, 1} has weight 5
    assert vals.mean() >= 5 / 8 - 3 * se


def test_combiners_agree_on_trivial_refinements():
    ms, w = bipartite()
    factories = [simple_partition_secretary(HALF)] * 2
    for seed in range(40):
        a = combine_opt_competitive(ms, factories, w, np.random.default_rng(seed))
        b = combine_reduce_and_solve(trivial(ms), w, np.random.default_rng(seed))
        assert a.selected == b.selected


def test_combined_output_feasible():
    inst = generate_instance("partition×transversal", 10, 1)
    p, t = inst.matroids
    procs = [partition_reduce_and_solve(p), transversal_reduce_and_solve(t)]
    for seed in range(100):
        run = combine_reduce_and_solve(procs, inst.weights, np.random.default_rng(seed))
        assert inst.constraint.is_feasible(run.selected)


def test_mismatched_ground_sets():
    with pytest.raises(ValueError):
        combine_opt_competitive([UniformMatroid(3, 1), UniformMatroid(4, 1)],
                                [simple_partition_secretary(HALF)] * 2, [1, 2, 3], np.random.default_rng(0))
