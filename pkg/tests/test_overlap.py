from fractions import Fraction

import numpy as np
import pytest

from misp.harness import generate_instance
from misp.matroids import GraphicMatroid, PartitionMatroid, UniformMatroid
from misp.offline import brute_force_opt, greedy_intersection, greedy_single, set_weight
from misp.overlap import (
    RELEVANT,
    SAMPLED,
    ZEROED,
    InvariantViolation,
    draw_bernoulli_sample,
    estimate_overlap,
    exact_coupled_distribution,
    exact_overlap,
    exact_sampled_distribution,
    overlap_set,
    overlapping_opt,
    simulate_greedy,
)


def test_overlapping_opt_example():
    r = overlapping_opt([UniformMatroid(3, 1)], [5, 3, 2], {1})
    assert r.weights == [5, 0, 0]
    assert r.flags == [RELEVANT, SAMPLED, ZEROED]


def test_overlapping_opt_extremes():
    m = GraphicMatroid(3, [(0, 1), (1, 1), (1, 2)])
    w = [2, 7, 0]
    assert overlapping_opt([m], w, {0, 1, 2}).weights == [0, 0, 0]
    # loops and zero weights are dropped even with an empty sample
    assert overlapping_opt([m], w, set()).weights == [2, 0, 0]


def test_reduced_weights_bounded_by_weights():
    rng = np.random.default_rng(0)
    inst = generate_instance("partition×transversal", 10, 3)
    for _ in range(50):
        sample = draw_bernoulli_sample(inst.n, 0.5, rng)
        r = overlapping_opt(inst.constraint, inst.weights, sample)
        assert all(0 <= a <= b for a, b in zip(r.weights, inst.weights))
        assert all(r.weights[e] == 0 for e in sample)


def test_simulate_p_one():
    inst = generate_instance("bipartite-matching-intersection", 8, 1)
    run = simulate_greedy(inst.constraint, inst.weights, 1.0, np.random.default_rng(0), check=True)
    assert run.G == set(greedy_intersection(inst.constraint, inst.weights).selected)
    assert run.W == set() and run.W_prime == set()


def test_simulate_p_zero_k1():
    m = GraphicMatroid(4, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 3)])
    w = [5, 4, 3, 2, 9]
    run = simulate_greedy([m], w, 0.0, np.random.default_rng(0), check=True)
    assert run.G == set()
    assert run.W == greedy_single(m, w)


def test_simulate_rejects_bad_p():
    with pytest.raises(ValueError):
        simulate_greedy([UniformMatroid(2, 1)], [1, 1], 1.5, np.random.default_rng(0))


def test_coupled_invariants_every_step():
    rng = np.random.default_rng(5)
    for seed in range(4):
        inst = generate_instance("partition×transversal", 9, seed)
        for _ in range(150):
            run = simulate_greedy(inst.constraint, inst.weights, 0.75, rng, check=True)
            assert run.W_prime <= run.W
            assert inst.constraint.is_feasible(run.G)


def test_invariant_violation_is_assertion():
    assert issubclass(InvariantViolation, AssertionError)


def test_coupling_lemma_factor():
    inst = generate_instance("bipartite-matching-intersection", 10, 4)
    rng = np.random.default_rng(6)
    trials = 4000
    diffs = np.zeros((trials, inst.n))
    for t in range(trials):
        run = simulate_greedy(inst.constraint, inst.weights, 0.75, rng)
        diffs[t] = np.array(run.prefix_counts(run.W)) - np.array(run.prefix_counts(run.G)) / 6
    mean = diffs.mean(axis=0)
    se = diffs.std(axis=0, ddof=1) / np.sqrt(trials)
    assert (mean + 3 * se >= 0).all()


@pytest.mark.parametrize("p", [Fraction(1, 2), Fraction(3, 4), Fraction(1, 3)])
def test_distribution_equivalence(p):
    cases = [
        ([UniformMatroid(3, 1)], [3, 2, 1]),
        ([PartitionMatroid([[0, 1], [2, 3]]), PartitionMatroid([[0, 2], [1, 3]])], [4, 3, 2, 1]),
        ([GraphicMatroid(3, [(0, 1), (1, 2), (0, 2), (1, 1)]), UniformMatroid(4, 2)], [2, 2, 5, 3]),
    ]
    for ms, w in cases:
        coupled = exact_coupled_distribution(ms, w, p)
        assert sum(coupled.values()) == 1
        assert coupled == exact_sampled_distribution(ms, w, p)


def test_single_element_overlap_is_one_minus_p():
    for p in (Fraction(1, 2), Fraction(3, 4)):
        assert exact_overlap([UniformMatroid(1, 1)], [7], p) == 7 * (1 - p)
    st = estimate_overlap([UniformMatroid(1, 1)], [1], 0.25, 20000, np.random.default_rng(1))
    assert abs(st.ratio - 0.75) < 3 * st.stderr + 1e-9


def test_overlap_k1_bound():
    inst = generate_instance("random-graph", 8, 2)
    st = estimate_overlap(inst.constraint, inst.weights, 0.5, 4000, np.random.default_rng(2))
    assert st.bound == 0.25 and st.holds()


def test_overlap_k2_exact_bound():
    # exact expectation on a small instance, against 1/(4k^2)
    inst = generate_instance("bipartite-matching-intersection", 8, 9)
    opt = set_weight(inst.weights, brute_force_opt(inst.constraint, inst.weights))
    assert exact_overlap(inst.constraint, inst.weights, Fraction(3, 4)) >= Fraction(opt, 16)


def test_overlap_set_is_feasible():
    inst = generate_instance("partition×transversal", 10, 8)
    rng = np.random.default_rng(8)
    for _ in range(50):
        r = overlapping_opt(inst.constraint, inst.weights, draw_bernoulli_sample(inst.n, 0.75, rng))
        assert inst.constraint.is_feasible(overlap_set(inst.constraint, r.weights))


def test_estimate_overlap_rejects_zero_trials():
    with pytest.raises(ValueError):
        estimate_overlap([UniformMatroid(2, 1)], [1, 2], 0.5, 0, np.random.default_rng(0))


def test_bernoulli_sample_marginals():
    rng = np.random.default_rng(9)
    n, draws, p = 4, 100_000, 0.3
    counts = np.zeros(n)
    for _ in range(draws):
        for e in draw_bernoulli_sample(n, p, rng):
            counts[e] += 1
    freq = counts / draws
    se = np.sqrt(p * (1 - p) / draws)
    # four elements checked jointly, so allow four standard errors each
    assert (np.abs(freq - p) <= 4 * se).all()
