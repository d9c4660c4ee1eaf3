"""Order-oblivious single-matroid secretary algorithms and reduce-and-solve
constructions for graphic, column-sparse linear and transversal matroids."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .matroids import (
    GraphicMatroid,
    LinearMatroid,
    Matroid,
    PartitionMatroid,
    RestrictionMatroid,
    TransversalMatroid,
    UniformMatroid,
    _UnionFind,
)

T1, T2 = 1, 2


class OrderObliviousAlgorithm:
    """Two-phase secretary algorithm.

    The driver calls ``sample_size`` once, hands the sampled elements with their
    weights to ``observe``, then offers every remaining element through
    ``offer``. After each acceptance the driver (acting as switching adversary)
    reports the placement with ``place``; without an adversary every accepted
    element goes to T1.
    """

    def __init__(self):
        self.selected: list = []
        self.t1: set = set()
        self.t2: set = set()

    def sample_size(self, n: int, rng) -> int:
        raise NotImplementedError

    def observe(self, sample: Mapping[int, object]) -> None:
        pass

    def offer(self, e, w) -> bool:
        if self._decide(e, w):
            self.selected.append(e)
            return True
        return False

    def _decide(self, e, w) -> bool:
        raise NotImplementedError

    def place(self, e, slot: int) -> None:
        (self.t1 if slot == T1 else self.t2).add(e)

    def finish(self) -> None:
        """Called once after the last arrival."""

    def check_output(self, selected) -> None:
        """Raise if internal invariants disagree with the final selection."""


class BinomialSampling:
    p = Fraction(1, 2)

    def sample_size(self, n: int, rng) -> int:
        return int(rng.binomial(n, float(self.p))) if n else 0


class SimplePartitionSecretary(BinomialSampling, OrderObliviousAlgorithm):
    """At most one element per block: take ``e`` if its block is still empty and
    ``e`` beats the heaviest sampled element of the block (if any).

    ``block_of`` maps every element the algorithm may see to its block label;
    elements mapped to ``None`` are loops and are always rejected.
    """

    def __init__(self, block_of: Mapping[int, Hashable] | Sequence, p=Fraction(1, 2)):
        super().__init__()
        if not 0 < p < 1:
            raise ValueError("sampling probability must lie in (0, 1)")
        self.p = p
        self.block_of = block_of
        self.best: dict = {}
        self.taken: set = set()

    def observe(self, sample):
        for e, w in sample.items():
            b = self.block_of[e]
            if b is None:
                continue
            if b not in self.best or w > self.best[b]:
                self.best[b] = w

    def _block_open(self, e, w):
        b = self.block_of[e]
        if b is None or b in self.taken:
            return None
        if b in self.best and not w > self.best[b]:
            return None
        return b

    def _decide(self, e, w):
        b = self._block_open(e, w)
        if b is None:
            return False
        self.taken.add(b)
        return True

    @classmethod
    def for_matroid(cls, matroid: Matroid, p=Fraction(1, 2)):
        return cls(simple_partition_blocks(matroid), p)


def simple_partition_blocks(matroid: Matroid) -> Sequence:
    if isinstance(matroid, PartitionMatroid) and matroid.is_simple:
        return matroid.block_of
    if isinstance(matroid, RefinedPartitionMatroid):
        return matroid.block_of
    if isinstance(matroid, UniformMatroid) and matroid.r == 1:
        return [0] * matroid.n
    raise ValueError(f"{type(matroid).__name__} is not a simple partition matroid")


def simple_partition_secretary(p=Fraction(1, 2)) -> Callable[[Matroid], OrderObliviousAlgorithm]:
    """Factory: matroid -> fresh simple-partition algorithm sampling with probability ``p``."""
    if not 0 < p < 1:
        raise ValueError("sampling probability must lie in (0, 1)")
    return partial(SimplePartitionSecretary.for_matroid, p=p)


class GeneralizedPartitionSecretary(BinomialSampling, OrderObliviousAlgorithm):
    """Partition matroid with capacities, implemented with independence queries only.

    The threshold for ``e`` is the lightest element of OPT(sample) + e whose
    removal restores independence; it exists iff e's block is saturated in the
    sample, and it is then the cap-th heaviest sampled element of the block.
    """

    def __init__(self, matroid: Matroid):
        super().__init__()
        self.matroid = matroid
        self.opt_sample: list = []
        self.sample_weights: dict = {}

    def observe(self, sample):
        self.sample_weights = dict(sample)
        ranked = sorted(sample, key=lambda e: (-sample[e], e))
        opt: list = []
        for e in ranked:
            if self.matroid._independent(frozenset(opt + [e])):
                opt.append(e)
        self.opt_sample = opt

    def threshold(self, e):
        """Sampled element acting as ``t_e``, or None when the block is unsaturated."""
        base = frozenset(self.opt_sample)
        if self.matroid._independent(base | {e}):
            return None
        for f in reversed(self.opt_sample):
            if self.matroid._independent((base - {f}) | {e}):
                return f
        return None

    def _decide(self, e, w):
        if not self.matroid._independent(frozenset(self.selected) | {e}):
            return False
        t = self.threshold(e)
        return t is None or w > self.sample_weights[t]


def direct_partition_threshold(matroid: PartitionMatroid, sample: Mapping, e):
    """Cap-th heaviest sampled element of e's block (None if fewer are sampled)."""
    b = matroid.block_of[e]
    ranked = sorted((f for f in sample if matroid.block_of[f] == b), key=lambda f: (-sample[f], f))
    cap = matroid.caps[b]
    return ranked[cap - 1] if len(ranked) >= cap else None


def generalized_partition_secretary() -> Callable[[Matroid], OrderObliviousAlgorithm]:
    return GeneralizedPartitionSecretary


class RefinedPartitionMatroid(Matroid):
    """Simple partition matroid on refinement ids; ``None`` blocks mark dummy loops."""

    def __init__(self, block_of: Sequence[Hashable]):
        self.block_of = tuple(block_of)
        self.n = len(self.block_of)

    def _independent(self, s):
        seen = set()
        for e in s:
            b = self.block_of[e]
            if b is None or b in seen:
                return False
            seen.add(b)
        return True

    def to_dict(self):
        return {"type": "refined_partition", "block_of": list(self.block_of)}


@dataclass
class ReduceAndSolve:
    """A refinement of the ground set, a simpler matroid on it, and an inner
    algorithm for restrictions of that matroid.

    ``refinements[e]`` lists the refinement ids of source element ``e`` in their
    fixed order; ``source[x]`` maps refinement ``x`` back to its source.
    """

    matroid: Matroid
    refinements: tuple
    source: tuple
    refined: Matroid
    inner_factory: Callable
    c_r: Fraction
    c_o: Fraction
    c_a: Fraction
    name: str = ""

    def __post_init__(self):
        if len(self.refinements) != self.matroid.n:
            raise ValueError("one refinement list per source element required")
        for e, refs in enumerate(self.refinements):
            if not refs:
                raise ValueError(f"element {e} has no refinement")
            if any(self.source[x] != e for x in refs):
                raise ValueError("source map disagrees with refinement lists")

    def make_inner(self) -> OrderObliviousAlgorithm:
        return self.inner_factory(self)

    def first_refinement(self, e):
        return self.refinements[e][0]

    def g(self, refined_ids: Iterable) -> frozenset:
        return frozenset(self.source[x] for x in refined_ids)


class RestrictedInner(OrderObliviousAlgorithm):
    """Inner algorithm of a procedure run on the restriction d(N): element e is
    presented as refinement ``d[e]`` (default: its first refinement)."""

    def __init__(self, rs: ReduceAndSolve, d: Sequence | None = None):
        super().__init__()
        self.rs = rs
        self.d = list(d) if d is not None else [refs[0] for refs in rs.refinements]
        if any(rs.source[x] != e for e, x in enumerate(self.d)):
            raise ValueError("d must pick a refinement of every element")
        self.inner = rs.make_inner()

    def restricted_matroid(self) -> Matroid:
        return RestrictionMatroid(self.rs.refined, self.d)

    def sample_size(self, n, rng):
        return self.inner.sample_size(n, rng)

    def observe(self, sample):
        self.inner.observe({self.d[e]: w for e, w in sample.items()})

    def _decide(self, e, w):
        if self.inner.offer(self.d[e], w):
            self.inner.place(self.d[e], T1)
            return True
        return False

    def finish(self):
        self.inner.finish()


def _refinement_tables(per_element: Sequence[Sequence[Hashable]]):
    """Allocate consecutive refinement ids; a block label of None yields a dummy loop."""
    refinements, source, block_of = [], [], []
    for e, blocks in enumerate(per_element):
        ids = []
        for b in blocks:
            ids.append(len(source))
            source.append(e)
            block_of.append(b)
        refinements.append(tuple(ids))
    return tuple(refinements), tuple(source), RefinedPartitionMatroid(block_of)


class GraphicPartitionSecretary(SimplePartitionSecretary):
    """Vertex-partition rule on edge halves, refusing halves that would close a
    cycle among the selected source edges."""

    def __init__(self, rs: ReduceAndSolve, p):
        super().__init__(rs.refined.block_of, p)
        self.rs = rs
        self._forest = _UnionFind()

    def _decide(self, e, w):
        b = self._block_open(e, w)
        if b is None:
            return False
        u, v = self.rs.matroid.edges[self.rs.source[e]]
        if self._forest.find(u) == self._forest.find(v):
            return False
        self._forest.union(u, v)
        self.taken.add(b)
        return True


def graphic_reduce_and_solve(matroid: Matroid, p=Fraction(2, 3)) -> ReduceAndSolve:
    """Edges refine into one half per endpoint, partitioned by vertex.

    Parameters (c^r, c^o, c^a) = (1, p^2 (1 - p), 0). Self-loops get a dummy loop
    refinement.
    """
    if not isinstance(matroid, GraphicMatroid):
        raise ValueError("graphic reduce-and-solve needs a GraphicMatroid with edge endpoints")
    p = Fraction(p)
    if not 0 < p < 1:
        raise ValueError("sampling probability must lie in (0, 1)")
    per_element = [[None] if u == v else [u, v] for u, v in matroid.edges]
    refinements, source, refined = _refinement_tables(per_element)
    return ReduceAndSolve(
        matroid, refinements, source, refined,
        partial(GraphicPartitionSecretary, p=p),
        Fraction(1), p * p * (1 - p), Fraction(0), name="graphic",
    )


def rooted_refinement(rs: ReduceAndSolve, forest: Iterable[int]) -> frozenset:
    """For a forest B of the graph, pick for each edge the half at its endpoint
    farther from the root of its component; the result is independent in the
    vertex-partition matroid."""
    edges = rs.matroid.edges
    forest = list(forest)
    adj: dict = {}
    for e in forest:
        u, v = edges[e]
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    picked = set()
    visited = set()
    for root in sorted(adj):
        if root in visited:
            continue
        visited.add(root)
        stack = [root]
        while stack:
            x = stack.pop()
            for y, e in adj[x]:
                if y in visited:
                    continue
                visited.add(y)
                stack.append(y)
                u, _ = edges[e]
                half = rs.refinements[e][0] if y == u else rs.refinements[e][1]
                picked.add(half)
    return frozenset(picked)


class SparseLinearSecretary(SimplePartitionSecretary):
    """Row-partition rule on (column, row) pairs; a column is refused if any of
    its nonzero rows is already hit by the selection."""

    def __init__(self, rs: ReduceAndSolve, p):
        super().__init__(rs.refined.block_of, p)
        self.rs = rs

    def _decide(self, e, w):
        b = self._block_open(e, w)
        if b is None:
            return False
        rows = self.rs.matroid.nonzero_rows(self.rs.source[e])
        if any(r in self.taken for r in rows):
            return False
        self.taken.add(b)
        return True


def sparse_linear_reduce_and_solve(matroid: Matroid, k: int | None = None, p=None) -> ReduceAndSolve:
    """Columns refine into (column, row) pairs over their nonzero rows.

    Parameters (1, p^k (1 - p), 0), default p = (k - 1)/k.
    """
    if not isinstance(matroid, LinearMatroid):
        raise ValueError("sparse linear reduce-and-solve needs a LinearMatroid")
    if k is None:
        k = max(matroid.sparsity, 1)
    for c in range(matroid.n):
        if len(matroid.nonzero_rows(c)) > k:
            raise ValueError(f"column {c} has more than {k} nonzero entries")
    if p is None:
        p = Fraction(k - 1, k) if k > 1 else Fraction(1, 2)
    p = Fraction(p)
    if not 0 < p < 1:
        raise ValueError("sampling probability must lie in (0, 1)")
    per_element = [list(matroid.nonzero_rows(c)) or [None] for c in range(matroid.n)]
    refinements, source, refined = _refinement_tables(per_element)
    return ReduceAndSolve(
        matroid, refinements, source, refined,
        partial(SparseLinearSecretary, p=p),
        Fraction(1), p ** k * (1 - p), Fraction(0), name="sparse-linear",
    )


def _transversal_inner(rs: ReduceAndSolve, p):
    return SimplePartitionSecretary(rs.refined.block_of, p)


def transversal_reduce_and_solve(matroid: Matroid, p=Fraction(1, 2)) -> ReduceAndSolve:
    """Elements refine into their incident edges, partitioned by right node.

    Parameters (1, p (1 - p), 0). Isolated elements get a dummy loop refinement.
    """
    if not isinstance(matroid, TransversalMatroid):
        raise ValueError("transversal reduce-and-solve needs a TransversalMatroid")
    p = Fraction(p)
    if not 0 < p < 1:
        raise ValueError("sampling probability must lie in (0, 1)")
    per_element = [list(a) or [None] for a in matroid.adjacency]
    refinements, source, refined = _refinement_tables(per_element)
    return ReduceAndSolve(
        matroid, refinements, source, refined,
        partial(_transversal_inner, p=p),
        Fraction(1), p * (1 - p), Fraction(0), name="transversal",
    )


def _identity_inner(rs: ReduceAndSolve, factory):
    return factory(rs.refined)


def trivial_reduce_and_solve(matroid: Matroid, factory: Callable[[Matroid], OrderObliviousAlgorithm],
                             c_o, c_a=0, name: str = "identity") -> ReduceAndSolve:
    """Wrap a (weakly) OPT-competitive algorithm with the identity refinement."""
    refinements = tuple((e,) for e in range(matroid.n))
    source = tuple(range(matroid.n))
    return ReduceAndSolve(
        matroid, refinements, source, matroid,
        partial(_identity_inner, factory=factory),
        Fraction(1), Fraction(c_o), Fraction(c_a), name=name,
    )


def partition_reduce_and_solve(matroid: Matroid, p=Fraction(1, 2)) -> ReduceAndSolve:
    """Simple partition algorithm as a (1, p(1-p), 0) reduce-and-solve procedure."""
    simple_partition_blocks(matroid)
    p = Fraction(p)
    return trivial_reduce_and_solve(matroid, simple_partition_secretary(p), p * (1 - p), name="partition")


@dataclass
class Episode:
    sample: frozenset
    arrivals: list
    selected: list


def run_episode(alg: OrderObliviousAlgorithm, elements: Sequence, weight_of: Mapping | Sequence,
                rng, arrange: Callable | None = None, sample: Iterable | None = None) -> Episode:
    """Drive one run: sample phase, then the remaining elements in ``arrange`` order.

    ``arrange(remaining, sample)`` returns the arrival order (default: as given).
    A fixed ``sample`` bypasses the algorithm's sample-size draw.
    """
    elements = list(elements)
    if sample is None:
        m = min(alg.sample_size(len(elements), rng), len(elements))
        idx = rng.choice(len(elements), size=m, replace=False) if m else []
        sample = frozenset(elements[i] for i in idx)
    else:
        sample = frozenset(sample)
    alg.observe({e: weight_of[e] for e in sample})
    remaining = [e for e in elements if e not in sample]
    arrivals = list(arrange(remaining, sample)) if arrange is not None else remaining
    for e in arrivals:
        if alg.offer(e, weight_of[e]):
            alg.place(e, T1)
    alg.finish()
    return Episode(sample, arrivals, list(alg.selected))
