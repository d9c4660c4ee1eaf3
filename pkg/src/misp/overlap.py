"""Sample-driven reweighting that makes per-matroid optima overlap, and the
coupled greedy process used to check it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from .offline import (
    IntersectionConstraint,
    RelevanceOracle,
    as_constraint,
    brute_force_opt,
    greedy_single,
    set_weight,
)
from .matroids import tie_break_order

SAMPLED = "sampled"
RELEVANT = "greedy-relevant"
ZEROED = "zeroed"


@dataclass
class ReducedWeights:
    weights: list
    flags: list

    def __getitem__(self, e):
        return self.weights[e]

    def __len__(self):
        return len(self.weights)


def overlapping_opt(c, weights: Sequence, sample) -> ReducedWeights:
    """Keep the weight of greedy-relevant non-sample elements, zero everything else."""
    c = as_constraint(c)
    oracle = RelevanceOracle(c, weights, sample)
    out, flags = [], []
    for e in range(c.n):
        if e in oracle.sample:
            out.append(0)
            flags.append(SAMPLED)
        elif oracle.is_relevant(e, weights[e]):
            out.append(weights[e])
            flags.append(RELEVANT)
        else:
            out.append(0)
            flags.append(ZEROED)
    return ReducedWeights(out, flags)


def overlap_set(c, reduced: Sequence) -> frozenset:
    """Intersection of the single-matroid optima under the reduced weights."""
    c = as_constraint(c)
    sets = [greedy_single(m, reduced) for m in c.matroids]
    return frozenset.intersection(*sets)


@dataclass
class CoupledRun:
    p: float
    order: list
    G: set = field(default_factory=set)
    W: set = field(default_factory=set)
    W_prime: set = field(default_factory=set)
    opt_hat: list = field(default_factory=list)
    H: list = field(default_factory=list)

    def prefix_counts(self, s) -> list[int]:
        """``|s ∩ N_{<=l}|`` for l = 1..len(order)."""
        counts, acc = [], 0
        for e in self.order:
            acc += e in s
            counts.append(acc)
        return counts


class InvariantViolation(AssertionError):
    pass


def simulate_greedy(c, weights: Sequence, p: float, rng=None, coins=None,
                    check: bool = False) -> CoupledRun:
    """One pass of the coupled greedy process (extended form with H_j and W').

    ``coins[e]`` (True means "goes to G") overrides ``rng`` when given; a coin is
    only consulted for elements that extend G feasibly. With ``check`` the
    per-step invariants are asserted, including that every element of
    OPT^_j stays spanned by H_j.
    """
    c = as_constraint(c)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    order = tie_break_order(weights)
    run = CoupledRun(p=p, order=order, opt_hat=[set() for _ in c.matroids], H=[set() for _ in c.matroids])
    for e in order:
        if weights[e] <= 0:
            continue
        if not c.is_feasible(run.G | {e}):
            continue
        heads = coins[e] if coins is not None else rng.random() < p
        if heads:
            run.G.add(e)
            for j, m in enumerate(c.matroids):
                H = run.H[j]
                if m._independent(frozenset(H | {e})):
                    H.add(e)
                    continue
                for f in sorted(H - run.G):
                    if m._independent(frozenset((H - {f}) | {e})):
                        H.discard(f)
                        H.add(e)
                        break
                else:
                    raise InvariantViolation(f"no exchange element for {e} in matroid {j}")
        else:
            for j, m in enumerate(c.matroids):
                if m._independent(frozenset(run.opt_hat[j] | {e})):
                    run.opt_hat[j].add(e)
                if m._independent(frozenset(run.H[j] | {e})):
                    run.H[j].add(e)
            if all(e in o for o in run.opt_hat):
                run.W.add(e)
            if all(e in H for H in run.H):
                run.W_prime.add(e)
        if check:
            _check_coupled(c, run)
    if not run.W_prime <= run.W:
        raise InvariantViolation("W' is not a subset of W")
    for j, m in enumerate(c.matroids):
        if not m._independent(frozenset(run.H[j])):
            raise InvariantViolation(f"H_{j} became dependent")
    return run


def _check_coupled(c: IntersectionConstraint, run: CoupledRun):
    if not c.is_feasible(run.G):
        raise InvariantViolation("G left the feasible family")
    if not run.W_prime <= run.W:
        raise InvariantViolation("W' is not a subset of W")
    for j, m in enumerate(c.matroids):
        H = frozenset(run.H[j])
        if not m._independent(H):
            raise InvariantViolation(f"H_{j} became dependent")
        r = m._rank(H)
        for x in run.opt_hat[j]:
            if m._rank(H | {x}) != r:
                raise InvariantViolation(f"element {x} of OPT^_{j} not spanned by H_{j}")


def draw_bernoulli_sample(n: int, p: float, rng) -> frozenset:
    """Each element independently with probability p."""
    draws = rng.random(n)
    return frozenset(e for e in range(n) if draws[e] < p)


def subset_probability(size: int, n: int, p) -> Fraction:
    p = Fraction(p)
    return p ** size * (1 - p) ** (n - size)


def exact_coupled_distribution(c, weights: Sequence, p) -> dict:
    """Law of (G, W) from the coupled process, by enumerating every coin vector."""
    c = as_constraint(c)
    dist: dict = {}
    for bits in product((False, True), repeat=c.n):
        run = simulate_greedy(c, weights, float(p), coins=bits)
        key = (frozenset(run.G), frozenset(run.W))
        dist[key] = dist.get(key, 0) + subset_probability(sum(bits), c.n, p)
    return dist


def exact_sampled_distribution(c, weights: Sequence, p) -> dict:
    """Law of (greedy(S), ∩_j OPT'_j) with S ~ mu_p, by enumerating every sample."""
    from .offline import greedy_intersection

    c = as_constraint(c)
    dist: dict = {}
    for bits in product((False, True), repeat=c.n):
        sample = frozenset(e for e in range(c.n) if bits[e])
        G = greedy_intersection(c, weights, ground=sample).as_set
        W = overlap_set(c, overlapping_opt(c, weights, sample).weights)
        key = (G, W)
        dist[key] = dist.get(key, 0) + subset_probability(len(sample), c.n, p)
    return dist


def exact_overlap(c, weights: Sequence, p) -> Fraction:
    """E[w'(∩_j OPT'_j)] under S ~ mu_p, computed exactly by enumeration."""
    c = as_constraint(c)
    total = Fraction(0)
    for bits in product((False, True), repeat=c.n):
        sample = frozenset(e for e in range(c.n) if bits[e])
        reduced = overlapping_opt(c, weights, sample).weights
        total += subset_probability(len(sample), c.n, p) * set_weight(reduced, overlap_set(c, reduced))
    return total


@dataclass
class OverlapStats:
    trials: int
    p: float
    mean: float
    stderr: float
    opt_weight: float
    ratio: float
    bound: float

    @property
    def threshold(self) -> float:
        """bound * w(OPT) minus three standard errors."""
        return self.bound * self.opt_weight - 3 * self.stderr

    def holds(self) -> bool:
        return self.mean >= self.threshold


def estimate_overlap(c, weights: Sequence, p: float, trials: int, rng, opt=None) -> OverlapStats:
    """Monte Carlo estimate of E[w'(∩_j OPT'_j)] with S ~ mu_p."""
    c = as_constraint(c)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if opt is None:
        opt = brute_force_opt(c, weights)
    opt_w = float(set_weight(weights, opt))
    total = total_sq = 0.0
    for _ in range(trials):
        sample = draw_bernoulli_sample(c.n, p, rng)
        reduced = overlapping_opt(c, weights, sample).weights
        x = float(set_weight(reduced, overlap_set(c, reduced)))
        total += x
        total_sq += x * x
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0)
    stderr = math.sqrt(var / trials) if trials > 1 else 0.0
    return OverlapStats(
        trials=trials,
        p=p,
        mean=mean,
        stderr=stderr,
        opt_weight=opt_w,
        ratio=mean / opt_w if opt_w else 0.0,
        bound=1 / (4 * c.k ** 2),
    )
