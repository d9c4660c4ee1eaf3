"""Offline optima: greedy over one matroid or an intersection, brute force, and
greedy-relevant elements."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ResourceLimitError
from .matroids import Matroid, tie_break_order

BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True)
class IntersectionConstraint:
    matroids: tuple

    def __init__(self, matroids: Sequence[Matroid]):
        matroids = tuple(matroids)
        if not matroids:
            raise ValueError("intersection needs at least one matroid")
        n = matroids[0].n
        if any(m.n != n for m in matroids):
            raise ValueError("all matroids must share the ground-set size")
        object.__setattr__(self, "matroids", matroids)

    @property
    def n(self) -> int:
        return self.matroids[0].n

    @property
    def k(self) -> int:
        return len(self.matroids)

    def is_feasible(self, s) -> bool:
        s = frozenset(s)
        return all(m._independent(s) for m in self.matroids)


def as_constraint(c) -> IntersectionConstraint:
    if isinstance(c, IntersectionConstraint):
        return c
    if isinstance(c, Matroid):
        return IntersectionConstraint([c])
    return IntersectionConstraint(c)


@dataclass
class GreedyTrace:
    selected: list = field(default_factory=list)
    prefixes: dict = field(default_factory=dict)  # element -> G just before it was added

    @property
    def as_set(self) -> frozenset:
        return frozenset(self.selected)


def greedy_intersection(c, weights: Sequence, order: Sequence[int] | None = None,
                        ground: Iterable[int] | None = None, skip_zero: bool = True) -> GreedyTrace:
    """Greedy over the intersection, scanning ``order`` (default: tie-break order).

    ``ground`` restricts the scan to a subset. Zero-weight elements are skipped
    unless ``skip_zero`` is False.
    """
    c = as_constraint(c)
    if order is None:
        order = tie_break_order(weights)
    if ground is not None:
        ground = set(ground)
        order = [e for e in order if e in ground]
    trace = GreedyTrace()
    current: set = set()
    for e in order:
        if skip_zero and weights[e] <= 0:
            continue
        current.add(e)
        if c.is_feasible(current):
            trace.prefixes[e] = frozenset(trace.selected)
            trace.selected.append(e)
        else:
            current.discard(e)
    return trace


def greedy_single(m: Matroid, weights: Sequence, order: Sequence[int] | None = None,
                  ground: Iterable[int] | None = None, skip_zero: bool = True) -> frozenset:
    """Maximum-weight independent set of one matroid (exact by the greedy property)."""
    return greedy_intersection([m], weights, order, ground, skip_zero).as_set


def set_weight(weights: Sequence, s: Iterable[int]):
    return sum((weights[e] for e in s), 0)


def brute_force_opt(c, weights: Sequence, limit: int = BRUTE_FORCE_LIMIT) -> frozenset:
    """Exact maximum-weight feasible set by DFS with downward-closure pruning.

    Ties between optimal sets are broken toward the set that is lexicographically
    first when both are listed in tie-break order (include-first search).
    """
    c = as_constraint(c)
    if c.n > limit:
        raise ResourceLimitError(f"brute force limited to n <= {limit}, got n = {c.n}")
    order = [e for e in tie_break_order(weights) if weights[e] > 0]
    suffix = [0] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + weights[order[i]]

    best_w = 0
    best: list = []
    chosen: list = []

    def dfs(i, w):
        nonlocal best_w, best
        if w > best_w:
            best_w, best = w, list(chosen)
        if i == len(order) or w + suffix[i] <= best_w:
            return
        e = order[i]
        chosen.append(e)
        if c.is_feasible(chosen):
            dfs(i + 1, w + weights[e])
        chosen.pop()
        dfs(i + 1, w)

    dfs(0, 0)
    return frozenset(best)


def imp_set(c, weights: Sequence, sample: Iterable[int]) -> frozenset:
    """Elements outside ``sample`` that greedy would pick if added to it.

    ``greedy(S + e)`` agrees with ``greedy(S)`` on every element ranked above
    ``e``, so ``e`` is relevant iff it extends that prefix feasibly.
    """
    c = as_constraint(c)
    sample = frozenset(sample)
    oracle = RelevanceOracle(c, weights, sample)
    return frozenset(e for e in range(c.n) if e not in sample and oracle.is_relevant(e, weights[e]))


class RelevanceOracle:
    """Online greedy-relevance test against a fixed sample.

    Only the sample's weights are needed up front; an arriving element is
    judged from its own weight, as an online algorithm would.
    """

    def __init__(self, c, weights: Sequence, sample: Iterable[int]):
        self.c = as_constraint(c)
        self.sample = frozenset(sample)
        w = {e: weights[e] for e in self.sample}
        self._keys = []
        self._prefix_before = []
        ordered = sorted(self.sample, key=lambda e: (-w[e], e))
        trace = greedy_intersection(self.c, weights, order=ordered)
        selected = trace.as_set
        acc: list = []
        for e in ordered:
            if w[e] <= 0:
                break
            self._keys.append((-w[e], e))
            self._prefix_before.append(frozenset(acc))
            if e in selected:
                acc.append(e)
        self._keys.append(None)
        self._prefix_before.append(frozenset(acc))
        self.greedy = selected

    def prefix_above(self, e: int, w_e) -> frozenset:
        """Greedy(sample) restricted to elements ranked above (w_e, e)."""
        key = (-w_e, e)
        for i, k in enumerate(self._keys):
            if k is None or k > key:
                return self._prefix_before[i]
        return self._prefix_before[-1]

    def is_relevant(self, e: int, w_e) -> bool:
        if e in self.sample or w_e <= 0:
            return False
        return self.c.is_feasible(self.prefix_above(e, w_e) | {e})
