"""Combining single-matroid secretary algorithms into one for an intersection.

Both combiners are themselves order-oblivious algorithms: ``sample_size`` draws
the joint sample counts, ``observe`` splits the single pooled sample into the
reweighting sample S and one sample per inner algorithm, and ``offer`` accepts
an element only when every inner algorithm accepts it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Callable, Sequence

from .matroids import Matroid, tie_break_order
from .offline import RelevanceOracle, as_constraint, greedy_single
from .overlap import (
    RELEVANT,
    SAMPLED,
    ZEROED,
    InvariantViolation,
    ReducedWeights,
    draw_bernoulli_sample,
)
from .secretary import T1, T2, OrderObliviousAlgorithm, ReduceAndSolve, run_episode


def combined_p(k: int) -> Fraction:
    return Fraction(2 * k - 1, 2 * k)


def opt_competitive_bound(cs: Sequence) -> Fraction:
    """prod(c_j) / (4 k^2)."""
    k = len(cs)
    return Fraction(prod(Fraction(c) for c in cs)) / (4 * k * k)


def reduce_and_solve_bound(procedures: Sequence[ReduceAndSolve]) -> Fraction:
    """prod(c^r c^o) / (8 k (k+1) max(sum c^a, 1))."""
    k = len(procedures)
    num = prod((Fraction(a.c_r) * Fraction(a.c_o) for a in procedures), start=Fraction(1))
    return num / (8 * k * (k + 1) * max(sum(Fraction(a.c_a) for a in procedures), 1))


# -- sample merging ---------------------------------------------------------

@dataclass
class MergedSamplePlan:
    m: int
    sizes: list
    overlaps: list
    pooled: frozenset = frozenset()
    S: frozenset = frozenset()
    parts: list = field(default_factory=list)
    clamped: list = field(default_factory=list)

    @property
    def pooled_size(self) -> int:
        return self.m + sum(mj - qj for mj, qj in zip(self.sizes, self.overlaps))


def _uniform_subset(pool, size: int, rng) -> frozenset:
    pool = sorted(pool)
    if size == 0:
        return frozenset()
    idx = rng.choice(len(pool), size=size, replace=False)
    return frozenset(pool[i] for i in idx)


def draw_sample_counts(n: int, p, sizes: Sequence[int], rng) -> MergedSamplePlan:
    """Counts (m, m_j, q_j) with the law induced by independent draws
    S ~ mu_p and S_j uniform of size m_j."""
    if any(s < 0 or s > n for s in sizes):
        raise ValueError(f"sample sizes {list(sizes)} exceed ground set of size {n}")
    S = draw_bernoulli_sample(n, float(p), rng)
    union = set(S)
    overlaps = []
    for mj in sizes:
        Sj = _uniform_subset(range(n), mj, rng)
        overlaps.append(len(Sj & union))
        union |= Sj
    return MergedSamplePlan(len(S), list(sizes), overlaps)


def split_pooled_sample(plan: MergedSamplePlan, pooled, rng) -> MergedSamplePlan:
    """Carve S and each S_j out of one uniform pooled sample of the planned size."""
    pooled = frozenset(pooled)
    if len(pooled) != plan.pooled_size:
        raise ValueError(f"pooled sample has {len(pooled)} elements, plan needs {plan.pooled_size}")
    S = _uniform_subset(pooled, plan.m, rng)
    union, parts = set(S), []
    for mj, qj in zip(plan.sizes, plan.overlaps):
        Sj = _uniform_subset(union, qj, rng) | _uniform_subset(pooled - union, mj - qj, rng)
        parts.append(Sj)
        union |= Sj
    plan.pooled, plan.S, plan.parts = pooled, S, parts
    return plan


def merge_samples(n: int, p, size_draws: Sequence, rng) -> MergedSamplePlan:
    """Single pooled sample standing in for S ~ mu_p plus k independent uniform samples.

    ``size_draws`` holds ints or callables ``(n, rng) -> int``.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    sizes = [d(n, rng) if callable(d) else int(d) for d in size_draws]
    plan = draw_sample_counts(n, p, sizes, rng)
    pooled = _uniform_subset(range(n), plan.pooled_size, rng)
    return split_pooled_sample(plan, pooled, rng)


# -- generalized greedy and reweighting -------------------------------------

@dataclass
class RefinementAssignment:
    d: list  # d[i][e] = refinement of e chosen for procedure i

    def image(self, i: int, elements) -> list:
        return [self.d[i][e] for e in elements]


def _first_addable(rs: ReduceAndSolve, current: set, e):
    for x in rs.refinements[e]:
        if rs.refined._independent(frozenset(current | {x})):
            return x
    return None


def generalized_greedy(procedures: Sequence[ReduceAndSolve], weights: Sequence, sample) -> list:
    """Per source element of ``sample`` in tie-break order, add its first feasible
    refinement to every I_i simultaneously, or skip it if some I_i has none."""
    sets = [set() for _ in procedures]
    sample = set(sample)
    for e in tie_break_order(weights):
        if e not in sample or weights[e] <= 0:
            continue
        picks = [_first_addable(rs, I, e) for rs, I in zip(procedures, sets)]
        if all(x is not None for x in picks):
            for I, x in zip(sets, picks):
                I.add(x)
    return sets


class GeneralizedRelevance:
    """Online greedy-relevance and role assignment against a fixed sample."""

    def __init__(self, procedures: Sequence[ReduceAndSolve], weights, sample):
        self.procedures = list(procedures)
        self.sample = frozenset(sample)
        ranked = sorted((e for e in self.sample if weights[e] > 0), key=lambda e: (-weights[e], e))
        self._keys, self._states = [], []
        state = [frozenset() for _ in procedures]
        for e in ranked:
            self._keys.append((-weights[e], e))
            self._states.append(state)
            picks = [_first_addable(rs, set(I), e) for rs, I in zip(procedures, state)]
            if all(x is not None for x in picks):
                state = [I | {x} for I, x in zip(state, picks)]
        self._keys.append(None)
        self._states.append(state)

    def _state_above(self, e, w_e):
        key = (-w_e, e)
        for i, k in enumerate(self._keys):
            if k is None or k > key:
                return self._states[i]
        return self._states[-1]

    def roles(self, e, w_e):
        """Refinements added for ``e`` by greedy on sample + e, or None if e is irrelevant."""
        if e in self.sample or w_e <= 0:
            return None
        state = self._state_above(e, w_e)
        picks = [_first_addable(rs, set(I), e) for rs, I in zip(self.procedures, state)]
        if all(x is not None for x in picks):
            return picks
        return None

    def assign(self, e, w_e):
        """(w'(e), [d_i(e)], flag)."""
        firsts = [rs.first_refinement(e) for rs in self.procedures]
        if e in self.sample:
            return 0, firsts, SAMPLED
        picks = self.roles(e, w_e)
        if picks is None:
            return 0, firsts, ZEROED
        return w_e, picks, RELEVANT


def generalized_overlapping_opt(procedures: Sequence[ReduceAndSolve], weights: Sequence, sample):
    """Reduced weights plus one refinement choice per element and procedure."""
    oracle = GeneralizedRelevance(procedures, weights, sample)
    n = procedures[0].matroid.n
    out, flags = [], []
    d = [[None] * n for _ in procedures]
    for e in range(n):
        w_e, picks, flag = oracle.assign(e, weights[e])
        out.append(w_e)
        flags.append(flag)
        for i, x in enumerate(picks):
            d[i][e] = x
    return ReducedWeights(out, flags), RefinementAssignment(d)


def refined_optimum(rs: ReduceAndSolve, reduced: Sequence, d_i: Sequence) -> frozenset:
    """Optimum of the refined matroid restricted to d_i(N), weights from the sources."""
    w = [0] * rs.refined.n
    for e, x in enumerate(d_i):
        w[x] = reduced[e]
    return greedy_single(rs.refined, w, ground=d_i)


def generalized_overlap_set(procedures: Sequence[ReduceAndSolve], reduced: Sequence,
                            assignment: RefinementAssignment) -> frozenset:
    """∩_i g_i(OPT'_i)."""
    sets = [rs.g(refined_optimum(rs, reduced, assignment.d[i])) for i, rs in enumerate(procedures)]
    return frozenset.intersection(*sets)


# -- combiners ---------------------------------------------------------------

class _Combiner(OrderObliviousAlgorithm):
    def __init__(self, inners: list):
        super().__init__()
        self.inners = inners
        self.k = len(inners)
        self.p = combined_p(self.k)
        self.plan: MergedSamplePlan | None = None
        self.reduced_log: dict = {}
        self.true_weights: dict = {}

    def sample_size(self, n, rng):
        self._rng = rng
        sizes, clamped = [], []
        for alg in self.inners:
            m = alg.sample_size(n, rng)
            clamped.append(m > n)
            sizes.append(min(m, n))
        self.plan = draw_sample_counts(n, self.p, sizes, rng)
        self.plan.clamped = clamped
        return self.plan.pooled_size

    def observe(self, sample):
        self.true_weights.update(sample)
        split_pooled_sample(self.plan, sample.keys(), self._rng)
        self._setup_reweighting(sample)
        self.leftovers = []
        for j, alg in enumerate(self.inners):
            part = self.plan.parts[j]
            alg.observe(self._inner_sample(j, part, sample))
            self.leftovers.append(sorted(self.plan.pooled - part))

    def finish(self):
        for j, alg in enumerate(self.inners):
            for e in self.leftovers[j]:
                self._feed_leftover(j, alg, e)


class OptCompetitiveCombiner(_Combiner):
    """Product-of-ratios combiner for OPT-competitive inner algorithms."""

    def __init__(self, constraint, factories: Sequence[Callable[[Matroid], OrderObliviousAlgorithm]]):
        self.c = as_constraint(constraint)
        if len(factories) != self.c.k:
            raise ValueError("one inner algorithm per matroid required")
        super().__init__([f(m) for f, m in zip(factories, self.c.matroids)])

    def _setup_reweighting(self, sample):
        self.relevance = RelevanceOracle(self.c, sample, self.plan.S)

    def reduced_weight(self, e, w):
        if e in self.plan.S:
            return 0
        return w if self.relevance.is_relevant(e, w) else 0

    def _inner_sample(self, j, part, sample):
        return {e: self._reduced(e, sample[e]) for e in part}

    def _reduced(self, e, w):
        if e not in self.reduced_log:
            self.reduced_log[e] = self.reduced_weight(e, w)
        return self.reduced_log[e]

    def _decide(self, e, w):
        self.true_weights[e] = w
        w2 = self._reduced(e, w)
        votes = [alg.offer(e, w2) for alg in self.inners]
        for alg, v in zip(self.inners, votes):
            if v:
                alg.place(e, T1)
        return all(votes)

    def _feed_leftover(self, j, alg, e):
        if alg.offer(e, self._reduced(e, self.true_weights[e])):
            alg.place(e, T1)


class ReduceAndSolveCombiner(_Combiner):
    """Combiner for reduce-and-solve procedures, playing each inner algorithm's
    switching adversary: unanimous accepts go to T1, partial accepts to T2."""

    def __init__(self, procedures: Sequence[ReduceAndSolve]):
        self.procedures = list(procedures)
        n = self.procedures[0].matroid.n
        if any(rs.matroid.n != n for rs in self.procedures):
            raise ValueError("all procedures must share the ground set")
        self.assignment: dict = {}
        super().__init__([rs.make_inner() for rs in self.procedures])

    def _setup_reweighting(self, sample):
        self.relevance = GeneralizedRelevance(self.procedures, sample, self.plan.S)

    def _assign(self, e, w):
        if e not in self.assignment:
            w2, picks, _ = self.relevance.assign(e, w)
            self.assignment[e] = (w2, picks)
            self.reduced_log[e] = w2
        return self.assignment[e]

    def _inner_sample(self, j, part, sample):
        out = {}
        for e in part:
            w2, picks = self._assign(e, sample[e])
            out[picks[j]] = w2
        return out

    def _decide(self, e, w):
        self.true_weights[e] = w
        w2, picks = self._assign(e, w)
        votes = [alg.offer(x, w2) for alg, x in zip(self.inners, picks)]
        unanimous = all(votes)
        for alg, x, v in zip(self.inners, picks, votes):
            if v:
                alg.place(x, T1 if unanimous else T2)
        return unanimous

    def _feed_leftover(self, j, alg, e):
        w2, picks = self._assign(e, self.true_weights[e])
        if alg.offer(picks[j], w2):
            alg.place(picks[j], T2)

    def check_output(self, selected) -> None:
        self.check_switching(selected)

    def check_switching(self, selected) -> None:
        chosen = frozenset(selected)
        for rs, alg in zip(self.procedures, self.inners):
            if rs.g(alg.t1) != chosen or len(alg.t1) != len(chosen):
                raise InvariantViolation("T1 of an inner algorithm does not map onto the output")
            if not rs.matroid._independent(rs.g(alg.t1)):
                raise InvariantViolation("g(T1) is dependent in the original matroid")


@dataclass
class CombinedRun:
    selected: frozenset
    combiner: _Combiner
    sample: frozenset


def combine_opt_competitive(constraint, factories, weights: Sequence, rng, arrange=None) -> CombinedRun:
    """One run of the OPT-competitive combiner on the full ground set."""
    combiner = OptCompetitiveCombiner(constraint, factories)
    ep = run_episode(combiner, range(combiner.c.n), weights, rng, arrange)
    chosen = frozenset(ep.selected)
    if not combiner.c.is_feasible(chosen):
        raise InvariantViolation("combined output is not feasible")
    return CombinedRun(chosen, combiner, ep.sample)


def combine_reduce_and_solve(procedures: Sequence[ReduceAndSolve], weights: Sequence, rng,
                             arrange=None) -> CombinedRun:
    """One run of the reduce-and-solve combiner on the full ground set."""
    combiner = ReduceAndSolveCombiner(procedures)
    n = procedures[0].matroid.n
    ep = run_episode(combiner, range(n), weights, rng, arrange)
    chosen = frozenset(ep.selected)
    combiner.check_switching(chosen)
    for rs in procedures:
        if not rs.matroid._independent(chosen):
            raise InvariantViolation("combined output is dependent in a constituent matroid")
    return CombinedRun(chosen, combiner, ep.sample)
