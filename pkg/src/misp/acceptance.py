"""Executable acceptance checks.

Every check returns ``(passed, detail)``. A statistical check passes when the
estimate is at least the claimed bound minus three standard errors, so a bound
that is tight is not rejected by sampling noise.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from itertools import combinations, product
from typing import Callable

import numpy as np

from .framework import (
    OptCompetitiveCombiner,
    combined_p,
    merge_samples,
)
from .harness import ORDERS, ArrivalOrder, SecretaryInstance, build_algorithm, exact_selection_probabilities, generate_instance, monte_carlo
from .matroids import (
    DirectSumMatroid,
    DualMatroid,
    GraphicMatroid,
    LaminarMatroid,
    LinearMatroid,
    Matroid,
    PartitionMatroid,
    RestrictionMatroid,
    TransversalMatroid,
    UniformMatroid,
)
from .offline import brute_force_opt, greedy_intersection, greedy_single, set_weight
from .overlap import (
    estimate_overlap,
    exact_coupled_distribution,
    exact_sampled_distribution,
    simulate_greedy,
    subset_probability,
)
from .secretary import (
    GeneralizedPartitionSecretary,
    RestrictedInner,
    SimplePartitionSecretary,
    direct_partition_threshold,
    graphic_reduce_and_solve,
    rooted_refinement,
    simple_partition_secretary,
    sparse_linear_reduce_and_solve,
    transversal_reduce_and_solve,
)
from .submodular import (
    CoverageFunction,
    CutFunction,
    MatroidRankFunction,
    ModularFunction,
    brute_force_submodular,
    feasible_sets,
    submodular_greedy,
)

SEED = 20240601
Z = 3.0


# -- shared oracles ---------------------------------------------------------

def matroid_axiom_violations(m: Matroid) -> list[str]:
    """Exhaustive check of the independence axioms and of rank/independence agreement."""
    n = m.n
    subsets = [frozenset(c) for r in range(n + 1) for c in combinations(range(n), r)]
    indep = {s for s in subsets if m.is_independent(s)}
    out = []
    if frozenset() not in indep:
        out.append("empty set dependent")
    for s in indep:
        for e in s:
            if s - {e} not in indep:
                out.append(f"not downward closed at {sorted(s)}")
                break
    by_size: dict = {}
    for s in indep:
        by_size.setdefault(len(s), []).append(s)
    for a in indep:
        for size in range(len(a) + 1, n + 1):
            for b in by_size.get(size, []):
                if not any(a | {e} in indep for e in b - a):
                    out.append(f"exchange fails for {sorted(a)}, {sorted(b)}")
                    return out
    for s in subsets:
        true_rank = max(len(t) for t in indep if t <= s)
        if m.rank(s) != true_rank:
            out.append(f"rank({sorted(s)}) = {m.rank(s)}, expected {true_rank}")
            break
    return out


def dual_rank_violations(m: Matroid) -> list[str]:
    dual = DualMatroid(m)
    ground = frozenset(range(m.n))
    full = m.rank(ground)
    out = []
    for r in range(m.n + 1):
        for c in combinations(range(m.n), r):
            s = frozenset(c)
            by_indep = max(len(t) for t in _subsets(s) if dual.is_independent(t))
            if by_indep != len(s) + m.rank(ground - s) - full:
                out.append(f"dual rank identity fails at {sorted(s)}")
    return out


def _subsets(s):
    s = sorted(s)
    return [frozenset(c) for r in range(len(s) + 1) for c in combinations(s, r)]


def _mean_se(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return mean, se


def frequency_margin(report, elements, bound) -> tuple[float, int | None]:
    """Smallest freq - (bound - 3 SE) over ``elements`` and the element attaining it."""
    worst, arg = math.inf, None
    for e in elements:
        m = report.frequency_margin(e, bound)
        if m < worst:
            worst, arg = m, e
    return worst, arg


# -- fixed instance families ------------------------------------------------

def axiom_matroids() -> list[tuple[str, Matroid]]:
    graph = GraphicMatroid(4, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 0), (1, 3)])
    multigraph = GraphicMatroid(3, [(0, 1), (0, 1), (1, 2), (2, 2), (0, 2)])
    part = PartitionMatroid([[0, 1, 2], [3, 4], [5]], [2, 1, 1])
    lam = LaminarMatroid(7, [[0, 1, 2, 3, 4, 5, 6], [0, 1, 2], [3, 4], [0, 1]], [4, 2, 1, 1])
    trans = TransversalMatroid([[0], [0, 1], [1, 2], [2], [0, 2], []])
    lin = LinearMatroid([[1, 0, 0, 1, 1, 0, 1], [0, 1, 0, 1, 0, 1, 1], [0, 0, 1, 0, 1, 1, 2]])
    ms = [
        ("uniform(6,3)", UniformMatroid(6, 3)),
        ("uniform(4,0)", UniformMatroid(4, 0)),
        ("partition", part),
        ("laminar", lam),
        ("graphic K4", graph),
        ("graphic multigraph", multigraph),
        ("transversal", trans),
        ("linear", lin),
        ("dual graphic K4", DualMatroid(graph)),
        ("dual transversal", DualMatroid(trans)),
        ("dual linear", DualMatroid(lin)),
        ("restriction laminar", RestrictionMatroid(lam, [0, 1, 3, 4, 6])),
        ("direct sum", DirectSumMatroid([UniformMatroid(3, 1), GraphicMatroid(3, [(0, 1), (1, 2), (0, 2)]),
                                          TransversalMatroid([[0], [0]])])),
        ("dual of direct sum", DualMatroid(DirectSumMatroid([UniformMatroid(3, 2), part]))),
    ]
    return ms


def random_single_matroid(rng, n: int) -> Matroid:
    kind = int(rng.integers(0, 8))
    if kind == 0:
        return UniformMatroid(n, int(rng.integers(0, n + 1)))
    if kind == 1:
        labels = rng.integers(0, max(1, n // 2), size=n)
        groups: dict = {}
        for e, b in enumerate(labels):
            groups.setdefault(int(b), []).append(e)
        blocks = [groups[b] for b in sorted(groups)]
        return PartitionMatroid(blocks, [int(rng.integers(1, len(b) + 1)) for b in blocks])
    if kind == 2:
        return generate_instance("random-laminar", n, int(rng.integers(1 << 30))).matroids[0]
    if kind == 3:
        return generate_instance("random-graph", n, int(rng.integers(1 << 30))).matroids[0]
    if kind == 4:
        return generate_instance("random-bipartite", n, int(rng.integers(1 << 30))).matroids[0]
    if kind == 5:
        rows = int(rng.integers(2, 5))
        return LinearMatroid(rng.integers(-2, 3, size=(rows, n)).tolist())
    if kind == 6:
        return DualMatroid(generate_instance("random-graph", n, int(rng.integers(1 << 30))).matroids[0])
    return generate_instance("random-sparse-matrix", n, int(rng.integers(1 << 30))).matroids[0]


def random_weights(rng, n: int, ties: bool) -> list:
    if ties:
        return [int(x) for x in rng.integers(0, 6, size=n)]
    return [int(x) + 1 for x in rng.choice(100, size=n, replace=False)]


def overlap_instances() -> list[SecretaryInstance]:
    return [
        generate_instance("bipartite-matching-intersection", 8, 1),
        generate_instance("bipartite-matching-intersection", 10, 2),
        generate_instance("bipartite-matching-intersection", 12, 3),
        generate_instance("partition×transversal", 10, 4),
        generate_instance("partition×transversal", 12, 5),
    ]


def six_element_partition() -> SecretaryInstance:
    return SecretaryInstance([PartitionMatroid([[0, 1], [2, 3], [4, 5]])], [6, 1, 5, 2, 4, 3], name="partition-6")


# -- criteria ---------------------------------------------------------------

def ac01_matroid_axioms():
    failures = []
    for name, m in axiom_matroids():
        bad = matroid_axiom_violations(m)
        if name.startswith("dual") or name in ("graphic K4", "transversal", "linear", "laminar"):
            base = m.base if isinstance(m, DualMatroid) else m
            bad += dual_rank_violations(base)
        if bad:
            failures.append(f"{name}: {bad[0]}")
    count = len(axiom_matroids())
    return not failures, f"{count} matroids checked" + (f"; {failures}" if failures else "")


def ac02_greedy_exact(count: int = 200):
    rng = np.random.default_rng([SEED, 2])
    bad = []
    for i in range(count):
        n = int(rng.integers(1, 13))
        m = random_single_matroid(rng, n)
        w = random_weights(rng, m.n, ties=bool(i % 2))
        g = greedy_single(m, w)
        o = brute_force_opt([m], w)
        if g != o:
            bad.append((i, type(m).__name__, sorted(g), sorted(o)))
    return not bad, f"{count} instances, mismatches: {bad[:3]}"


def random_two_matroid_instance(rng):
    n = int(rng.integers(2, 13))
    fam = int(rng.integers(0, 4))
    seed = int(rng.integers(1 << 30))
    if fam == 0:
        ms = generate_instance("bipartite-matching-intersection", n, seed).matroids
    elif fam == 1:
        ms = generate_instance("partition×transversal", n, seed).matroids
    else:
        ms = [random_single_matroid(rng, n), random_single_matroid(rng, n)]
        n = ms[0].n
        if ms[1].n != n:
            ms[1] = UniformMatroid(n, max(1, n // 2))
    return ms


def ac03_k_approximation(count: int = 200):
    rng = np.random.default_rng([SEED, 3])
    worst = math.inf
    bad = []
    for i in range(count):
        ms = random_two_matroid_instance(rng)
        w = random_weights(rng, ms[0].n, ties=bool(i % 2))
        g = set_weight(w, greedy_intersection(ms, w).as_set)
        o = set_weight(w, brute_force_opt(ms, w))
        if 2 * g < o:
            bad.append(i)
        if o:
            worst = min(worst, Fraction(g, o) if isinstance(g, int) else g / o)
    return not bad, f"{count} instances, min greedy/OPT = {float(worst):.4f} (need >= 0.5)"


def ac04_overlap(trials: int = 10_000):
    rng = np.random.default_rng([SEED, 4])
    parts, ok = [], True
    for inst in overlap_instances():
        st = estimate_overlap(inst.constraint, inst.weights, 0.75, trials, rng)
        ok &= st.holds()
        parts.append(f"{inst.name}: {st.ratio:.4f} (threshold {st.threshold / st.opt_weight:.4f})")
    return ok, f"bound 1/16 = 0.0625; " + "; ".join(parts)


def ac05_coupling(trials: int = 10_000):
    rng = np.random.default_rng([SEED, 5])
    factor = Fraction(1, 6)
    worst = math.inf
    for inst in overlap_instances()[:2]:
        n = inst.n
        diffs = np.zeros((trials, n))
        for t in range(trials):
            run = simulate_greedy(inst.constraint, inst.weights, 0.75, rng, check=True)
            w = np.array(run.prefix_counts(run.W), dtype=float)
            g = np.array(run.prefix_counts(run.G), dtype=float)
            diffs[t] = w - float(factor) * g
        mean = diffs.mean(axis=0)
        se = diffs.std(axis=0, ddof=1) / math.sqrt(trials)
        worst = min(worst, float((mean + Z * se).min()))
    return worst >= 0, f"min over l of E|W_l| - E|G_l|/6 + 3SE = {worst:.4f}; invariants held on every run"


def ac06_distribution():
    cases = [
        ([UniformMatroid(3, 1)], [3, 2, 1], Fraction(1, 2)),
        ([UniformMatroid(4, 2)], [4, 4, 2, 0], Fraction(3, 4)),
        ([PartitionMatroid([[0, 1], [2, 3]]), PartitionMatroid([[0, 2], [1, 3]])], [4, 3, 2, 1], Fraction(3, 4)),
        ([GraphicMatroid(3, [(0, 1), (1, 2), (0, 2), (0, 1)]), UniformMatroid(4, 2)], [5, 3, 3, 1], Fraction(3, 4)),
        ([TransversalMatroid([[0], [0, 1], [1], [1]]), PartitionMatroid([[0, 3], [1, 2]])], [2, 7, 5, 3],
         Fraction(2, 3)),
    ]
    bad = []
    for i, (ms, w, p) in enumerate(cases):
        if exact_coupled_distribution(ms, w, p) != exact_sampled_distribution(ms, w, p):
            bad.append(i)
    return not bad, f"{len(cases)} instances with n <= 4 enumerated; mismatches: {bad}"


def _simple_micro_cases():
    out = []
    one = PartitionMatroid([[0]])
    out.append(("n=1", one, [5], None, {0: Fraction(1, 2)}))
    two = PartitionMatroid([[0, 1]])
    out.append(("n=2 heavy first", two, [5, 3], lambda r, s: sorted(r), {0: Fraction(1, 2)}))
    out.append(("n=2 heavy last", two, [5, 3], lambda r, s: sorted(r, reverse=True), {0: Fraction(1, 4)}))
    split = PartitionMatroid([[0], [1]])
    out.append(("n=2 two blocks", split, [5, 3], None, {0: Fraction(1, 2), 1: Fraction(1, 2)}))
    return out


DETERMINISTIC_ORDERS = tuple(o for o in ORDERS if o != "uniform")


def exact_opt_minimum(inst, make_alg: Callable, p, opt=None) -> Fraction:
    """Smallest exact selection probability of an OPT element over the deterministic orders."""
    opt = inst.optimum() if opt is None else opt
    worst = Fraction(1)
    for kind in DETERMINISTIC_ORDERS:
        order = ArrivalOrder(kind)
        arrange = partial(_realize, order=order, weights=inst.weights, opt=opt)
        probs = exact_selection_probabilities(range(inst.n), inst.weights, make_alg, p, arrange)
        worst = min([worst] + [probs[e] for e in opt])
    return worst


def _realize(remaining, sample, order, weights, opt):
    return order.realize(remaining, weights, opt)


def ac07_simple_partition(trials: int = 10_000):
    details, ok = [], True
    for name, m, w, arrange, expect in _simple_micro_cases():
        probs = exact_selection_probabilities(range(m.n), w, partial(SimplePartitionSecretary.for_matroid, m),
                                              Fraction(1, 2), arrange)
        ok &= all(probs[e] == v and v >= Fraction(1, 4) for e, v in expect.items())
    details.append("micro-cases exact")
    for inst in (six_element_partition(), generate_instance("random-partition", 10, 7)):
        ch = build_algorithm("simple-partition", inst, Fraction(1, 2))
        worst = math.inf
        for order in ORDERS:
            rep = monte_carlo(inst, ch.factory, order, trials, SEED)
            margin, _ = frequency_margin(rep, rep.opt, Fraction(1, 4))
            worst = min(worst, margin)
        exact = exact_opt_minimum(inst, partial(SimplePartitionSecretary.for_matroid, inst.matroids[0]),
                                  Fraction(1, 2))
        ok &= worst >= 0 and exact >= Fraction(1, 4)
        details.append(f"{inst.name}: min frequency margin {worst:.4f}, exact minimum {exact}")
    return ok, "; ".join(details)


def capped_partitions() -> list[PartitionMatroid]:
    return [
        PartitionMatroid([[0, 1, 2], [3, 4, 5]], [2, 1]),
        PartitionMatroid([[0, 1, 2, 3], [4, 5]], [2, 2]),
        PartitionMatroid([[0, 1, 2, 3, 4, 5]], [3]),
        PartitionMatroid([[0, 2, 4], [1], [3, 5]], [1, 1, 2]),
    ]


def ac08_generalized_partition(trials: int = 10_000):
    rng = np.random.default_rng([SEED, 8])
    mismatches = 0
    for m in capped_partitions():
        for ties in (False, True):
            w = random_weights(rng, m.n, ties)
            for bits in product((False, True), repeat=m.n):
                sample = {e: w[e] for e in range(m.n) if bits[e]}
                alg = GeneralizedPartitionSecretary(m)
                alg.observe(sample)
                for e in range(m.n):
                    if e not in sample and alg.threshold(e) != direct_partition_threshold(m, sample, e):
                        mismatches += 1
    worst, exact = math.inf, Fraction(1)
    insts = [SecretaryInstance([m], random_weights(rng, m.n, False), name=f"capped-{i}")
             for i, m in enumerate(capped_partitions()[:2])]
    insts.append(SecretaryInstance([PartitionMatroid([[0, 1, 2, 3], [4, 5, 6], [7, 8, 9]], [2, 1, 2])],
                                   random_weights(rng, 10, False), name="capped-10"))
    for inst in insts:
        ch = build_algorithm("generalized-partition", inst)
        for order in ORDERS:
            rep = monte_carlo(inst, ch.factory, order, trials, SEED)
            worst = min(worst, frequency_margin(rep, rep.opt, Fraction(1, 4))[0])
        exact = min(exact, exact_opt_minimum(inst, partial(GeneralizedPartitionSecretary, inst.matroids[0]),
                                             Fraction(1, 2)))
    ok = mismatches == 0 and worst >= 0 and exact >= Fraction(1, 4)
    return ok, f"threshold mismatches {mismatches}; min frequency margin {worst:.4f}; exact minimum {exact}"


def refinement_choices(rs, rng) -> list[tuple[str, list]]:
    """The first refinement of every element, and a seeded random choice."""
    first = [refs[0] for refs in rs.refinements]
    rand = [refs[int(rng.integers(len(refs)))] for refs in rs.refinements]
    return [("first", first), ("random", rand)]


def _restricted_frequency(inst, rs, d, bound, trials, p):
    """(Monte Carlo margin, exact minimum) of OPT-element selection on the restriction d(N)."""
    restricted = RestrictedInner(rs, d).restricted_matroid()
    opt = brute_force_opt([restricted], inst.weights)
    factory = partial(_restricted_factory, rs=rs, d=tuple(d))
    worst = math.inf
    for order in ORDERS:
        rep = monte_carlo(inst, factory, order, trials, SEED, opt=opt)
        worst = min(worst, frequency_margin(rep, opt, bound)[0])
    exact = exact_opt_minimum(inst, partial(RestrictedInner, rs, tuple(d)), p, opt)
    return worst, exact


def _restricted_factory(inst, rs, d):
    return RestrictedInner(rs, d)


def graphic_instances() -> list[SecretaryInstance]:
    k4 = GraphicMatroid(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    return [
        SecretaryInstance([k4], [6, 2, 5, 3, 4, 1], name="K4"),
        generate_instance("random-graph", 8, 11),
        generate_instance("random-graph", 8, 12),
    ]


def ac09_graphic(trials: int = 10_000):
    rng = np.random.default_rng([SEED, 9])
    bound, p = Fraction(4, 27), Fraction(2, 3)
    worst, exact = math.inf, Fraction(1)
    for inst in graphic_instances():
        rs = graphic_reduce_and_solve(inst.matroids[0], p)
        forest = brute_force_opt(inst.constraint, inst.weights)
        rooted = set(rooted_refinement(rs, forest))
        from_forest = [next((x for x in refs if x in rooted), refs[0]) for refs in rs.refinements]
        for _, d in refinement_choices(rs, rng) + [("rooted", from_forest)]:
            mc, ex = _restricted_frequency(inst, rs, d, bound, trials, p)
            worst, exact = min(worst, mc), min(exact, ex)
    ok = worst >= 0 and exact >= bound
    return ok, (f"bound 4/27 = {float(bound):.4f}; min frequency margin {worst:.4f}; exact minimum {exact}; "
                "g(output) a forest on every run")


def tu_instances() -> list[SecretaryInstance]:
    return [generate_instance("random-sparse-matrix", 8, 21), generate_instance("random-sparse-matrix", 10, 22)]


def ac10_sparse_and_transversal(trials: int = 10_000):
    rng = np.random.default_rng([SEED, 10])
    half = Fraction(1, 2)
    sparse, trans = [math.inf, Fraction(1)], [math.inf, Fraction(1)]
    for inst in tu_instances():
        rs = sparse_linear_reduce_and_solve(inst.matroids[0], k=2, p=half)
        for _, d in refinement_choices(rs, rng):
            mc, ex = _restricted_frequency(inst, rs, d, Fraction(1, 8), trials, half)
            sparse = [min(sparse[0], mc), min(sparse[1], ex)]
    for seed in (31, 32):
        inst = generate_instance("random-bipartite", 8, seed)
        rs = transversal_reduce_and_solve(inst.matroids[0], half)
        for _, d in refinement_choices(rs, rng):
            mc, ex = _restricted_frequency(inst, rs, d, Fraction(1, 4), trials, half)
            trans = [min(trans[0], mc), min(trans[1], ex)]
    ok = sparse[0] >= 0 and sparse[1] >= Fraction(1, 8) and trans[0] >= 0 and trans[1] >= Fraction(1, 4)
    return ok, (f"sparse-linear (bound 1/8): min margin {sparse[0]:.4f}, exact minimum {sparse[1]}; "
                f"transversal (bound 1/4): min margin {trans[0]:.4f}, exact minimum {trans[1]}")


def _single_combiner(inst, p):
    return OptCompetitiveCombiner(inst.constraint, [simple_partition_secretary(p)])


def ac11_opt_combiner(trials: int = 10_000):
    details, ok = [], True
    inst = generate_instance("bipartite-matching-intersection", 8, 41)
    ch = build_algorithm("combine-opt", inst)
    for order in ("uniform", "opt-last"):
        rep = monte_carlo(inst, ch.factory, order, trials, SEED, bound=ch.bound)
        ok &= rep.margin >= 0
        details.append(f"k=2 {order}: {rep.mean_ratio:.4f} >= {ch.bound}")
    single = six_element_partition()
    for order in ("uniform", "opt-last"):
        rep = monte_carlo(single, partial(_single_combiner, p=Fraction(1, 2)), order, trials, SEED,
                          bound=Fraction(1, 16))
        ok &= rep.margin >= 0
        details.append(f"k=1 {order}: {rep.mean_ratio:.4f} >= 1/16")
    return ok, "; ".join(details) + "; outputs feasible on every run"


def ac12_reduce_and_solve_combiner(trials: int = 10_000):
    details, ok = [], True
    cases = [(generate_instance("random-graph", 8, 51), "graphic", Fraction(1, 108)),
             (generate_instance("partition×transversal", 8, 52), "combine-rs", Fraction(1, 768))]
    for inst, algo, expect in cases:
        ch = build_algorithm(algo, inst)
        if ch.bound != expect:
            return False, f"{algo} bound {ch.bound} != {expect}"
        for order in ("uniform", "opt-last"):
            rep = monte_carlo(inst, ch.factory, order, trials, SEED, bound=ch.bound)
            ok &= rep.margin >= 0
            details.append(f"{inst.name} {order}: {rep.mean_ratio:.4f} >= {ch.bound}")
    return ok, "; ".join(details) + "; T1 maps onto the output on every run"


def independent_joint_law(n: int, p, size_probs: list) -> dict:
    """Exact law of (S, S_1, ..., S_k) with S ~ mu_p and S_j uniform given |S_j| ~ size_probs[j]."""
    subsets = [frozenset(c) for r in range(n + 1) for c in combinations(range(n), r)]
    law = {}
    for combo in product(subsets, repeat=1 + len(size_probs)):
        pr = subset_probability(len(combo[0]), n, p)
        for Sj, dist in zip(combo[1:], size_probs):
            pr *= dist[len(Sj)] / math.comb(n, len(Sj))
        law[combo] = pr
    return law


def _binomial_pmf(n, q):
    q = Fraction(q)
    return [math.comb(n, i) * q ** i * (1 - q) ** (n - i) for i in range(n + 1)]


def ac13_sample_merging(draws: int = 100_000):
    from scipy.stats import chisquare

    results = []
    for n, k in ((3, 1), (2, 2)):
        p = combined_p(k)
        size_probs = [_binomial_pmf(n, Fraction(1, 2))] * k
        law = independent_joint_law(n, p, size_probs)
        keys = sorted(law, key=lambda c: tuple(tuple(sorted(s)) for s in c))
        index = {c: i for i, c in enumerate(keys)}
        counts = np.zeros(len(keys))
        rng = np.random.default_rng([SEED, 13, n, k])
        sizes = [lambda m, r: int(r.binomial(m, 0.5))] * k
        for _ in range(draws):
            plan = merge_samples(n, float(p), sizes, rng)
            counts[index[(plan.S, *plan.parts)]] += 1
        expected = np.array([float(law[c]) * draws for c in keys])
        res = chisquare(counts, expected)
        results.append((n, k, float(res.pvalue)))
    ok = all(pv > 0.01 for _, _, pv in results)
    return ok, "; ".join(f"n={n}, k={k}: p-value {pv:.3f}" for n, k, pv in results)


def submodular_functions() -> list[tuple[str, object]]:
    rng = np.random.default_rng([SEED, 14])
    cover = CoverageFunction([{0, 1}, {1, 2}, {2, 3, 4}, {4}, {0, 5}, {5, 6}, {1, 6}, {3}])
    wcover = CoverageFunction([{0, 1}, {1}, {2, 3}, {3}, {0, 3}, {4}], {0: 3, 1: 1, 2: 2, 3: 5, 4: 1})
    rank = MatroidRankFunction(GraphicMatroid(4, [(0, 1), (1, 2), (0, 2), (2, 3), (0, 3), (1, 3)]),
                               [3, 1, 4, 1, 5, 9])
    edges = [(int(a), int(b), int(rng.integers(1, 5))) for a, b in
             (rng.choice(8, size=2, replace=False) for _ in range(12))]
    cut = CutFunction(8, edges)
    modular = ModularFunction([2, 0, 3, 1, 4, 1, 5])
    return [("coverage", cover), ("weighted coverage", wcover), ("matroid rank", rank), ("cut", cut),
            ("modular", modular)]


def submodularity_violations(f) -> list[str]:
    n = f.n
    table = {}
    for r in range(n + 1):
        for c in combinations(range(n), r):
            table[frozenset(c)] = f(c)
    out = [f"negative at {sorted(s)}" for s, v in table.items() if v < 0]
    keys = list(table)
    for a in keys:
        for b in keys:
            if table[a] + table[b] < table[a | b] + table[a & b]:
                out.append(f"violated at {sorted(a)}, {sorted(b)}")
                return out
    return out


def submodular_cases() -> list[tuple[str, list, object]]:
    cover = CoverageFunction([{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {5}, {1, 5}, {2, 6}, {6}])
    edges = [(0, 1, 2), (1, 2, 1), (2, 3, 3), (3, 0, 1), (0, 2, 2), (4, 5, 2), (5, 6, 1), (1, 5, 2), (3, 6, 1)]
    cut = CutFunction(7, edges)
    return [
        ("coverage k=1", [PartitionMatroid([[0, 1, 2], [3, 4], [5, 6, 7, 8]], [1, 1, 2])], cover),
        ("coverage k=2", generate_instance("bipartite-matching-intersection", 9, 61).matroids, cover),
        ("cut k=1", [UniformMatroid(7, 3)], cut),
        ("cut k=2", [PartitionMatroid([[0, 1], [2, 3], [4, 5, 6]]), UniformMatroid(7, 3)], cut),
    ]


def ac14_submodular(trials: int = 10_000, restriction_trials: int = 4000):
    bad = [f"{name}: {v[0]}" for name, f in submodular_functions() if (v := submodularity_violations(f))]
    lemma_bad = []
    restriction_worst = math.inf
    rng = np.random.default_rng([SEED, 14, 1])
    for name, ms, f in submodular_cases():
        k = len(ms)
        S = submodular_greedy(ms, f).as_set
        fs = f(S)
        for C in feasible_sets(ms):
            if (k + 1) * fs < f(C | S):
                lemma_bad.append(name)
                break
        opt_value = f(brute_force_submodular(ms, f))
        vals = []
        for _ in range(restriction_trials):
            sample = [e for e in range(f.n) if rng.random() < 0.5]
            vals.append(float(f(submodular_greedy(ms, f, ground=sample).as_set)))
        mean, se = _mean_se(vals)
        restriction_worst = min(restriction_worst, mean + Z * se - float(opt_value) / (4 * (k + 1)))
    inst = generate_instance("random-partition", 8, 62)
    inst.objective = CoverageFunction([{0, 1}, {1, 2}, {2}, {3, 4}, {0, 4}, {5}, {1, 5}, {2, 6}])
    ch = build_algorithm("submodular-online", inst)
    rep = monte_carlo(inst, ch.factory, "uniform", trials, SEED, bound=ch.bound)
    rep2 = monte_carlo(inst, ch.factory, "opt-last", trials // 2, SEED + 1, bound=ch.bound)
    ok = not bad and not lemma_bad and restriction_worst >= 0 and rep.margin >= 0 and rep2.margin >= 0
    detail = (f"submodularity violations {bad}; greedy lemma failures {lemma_bad}; "
              f"random-restriction min margin {restriction_worst:.3f}; "
              f"Online ratio {rep.mean_ratio:.4f} / {rep2.mean_ratio:.4f} vs bound {ch.bound} = {float(ch.bound):.6f}")
    return ok, detail


def ac15_determinism():
    from .cli import main as cli_main

    inst = generate_instance("partition×transversal", 8, 71)
    ch = build_algorithm("combine-rs", inst)
    a = monte_carlo(inst, ch.factory, "uniform", 300, 5, bound=ch.bound)
    b = monte_carlo(inst, ch.factory, "uniform", 300, 5, bound=ch.bound)
    c = monte_carlo(inst, ch.factory, "uniform", 300, 5, bound=ch.bound, workers=2)
    same = a.to_json() == b.to_json() == c.to_json() and a.to_csv() == b.to_csv() == c.to_csv()
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "inst.json")
        inst.save(path)
        outs = []
        for i in range(2):
            j, cpath = os.path.join(tmp, f"r{i}.json"), os.path.join(tmp, f"r{i}.csv")
            code = cli_main(["run", "--instance", path, "--algo", "combine-rs", "--trials", "200",
                             "--seed", "9", "--threads", "1", "--out-json", j, "--out-csv", cpath, "--quiet"])
            with open(j, "rb") as fj, open(cpath, "rb") as fc:
                outs.append((code, fj.read(), fc.read()))
        same_cli = outs[0] == outs[1] and outs[0][0] == 0
    return same and same_cli, f"library reports identical: {same}; CLI report files identical: {same_cli}"


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        timing = f"{self.seconds:.1f}s/{self.budget:.0f}s"
        return f"[{status}] AC{self.number:02d} {self.name} ({timing}): {self.detail}"


CRITERIA: list[tuple[int, str, Callable, float]] = [
    (1, "matroid axioms", ac01_matroid_axioms, 10),
    (2, "greedy exactness", ac02_greedy_exact, 30),
    (3, "greedy k-approximation", ac03_k_approximation, 60),
    (4, "overlap bound 1/(4k^2)", ac04_overlap, 120),
    (5, "coupling lemma", ac05_coupling, 120),
    (6, "distributional equivalence", ac06_distribution, 10),
    (7, "simple partition 1/4", ac07_simple_partition, 120),
    (8, "generalized partition", ac08_generalized_partition, 120),
    (9, "graphic reduce-and-solve 4/27", ac09_graphic, 120),
    (10, "sparse linear 1/8 and transversal 1/4", ac10_sparse_and_transversal, 180),
    (11, "OPT-competitive combiner", ac11_opt_combiner, 180),
    (12, "reduce-and-solve combiner", ac12_reduce_and_solve_combiner, 300),
    (13, "sample merging chi-square", ac13_sample_merging, 60),
    (14, "submodular reduction", ac14_submodular, 300),
    (15, "determinism", ac15_determinism, 60),
]


def run_criterion(number: int) -> CriterionResult:
    for num, name, fn, budget in CRITERIA:
        if num == number:
            start = time.perf_counter()
            passed, detail = fn()
            elapsed = time.perf_counter() - start
            return CriterionResult(num, name, bool(passed) and elapsed <= budget, detail, elapsed, budget)
    raise ValueError(f"no acceptance criterion {number}")


def run_all(only=None, echo: Callable | None = print) -> list[CriterionResult]:
    results = []
    for num, *_ in CRITERIA:
        if only and num not in only:
            continue
        res = run_criterion(num)
        if echo:
            echo(res.line())
        results.append(res)
    return results
