"""Nonnegative submodular objectives and the reduction of submodular selection
to linear-weight selection over a matroid intersection."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .errors import ResourceLimitError
from .matroids import Matroid, matroid_from_dict, to_rational
from .offline import BRUTE_FORCE_LIMIT, GreedyTrace, as_constraint, greedy_single
from .secretary import T1, OrderObliviousAlgorithm

CONVOLUTION_LIMIT = 15


class SubmodularFunction:
    n: int = 0

    def value(self, s: frozenset):
        raise NotImplementedError

    def __call__(self, s: Iterable[int]):
        return self.value(frozenset(s))

    def marginal(self, e: int, s: Iterable[int]):
        s = frozenset(s)
        return self.value(s | {e}) - self.value(s)


class CoverageFunction(SubmodularFunction):
    """Weighted size of the union of the per-element item sets (monotone)."""

    def __init__(self, sets: Sequence[Iterable], item_weights: dict | None = None):
        self.sets = tuple(frozenset(x) for x in sets)
        self.n = len(self.sets)
        self.item_weights = dict(item_weights) if item_weights else None

    def value(self, s):
        covered = set().union(*(self.sets[e] for e in s)) if s else set()
        if self.item_weights is None:
            return len(covered)
        return sum((self.item_weights.get(x, 1) for x in covered), 0)

    def to_dict(self):
        d = {"type": "coverage", "sets": [sorted(x, key=repr) for x in self.sets]}
        if self.item_weights:
            # pairs rather than a mapping: JSON object keys would turn items into strings
            d["item_weights"] = [[k, str(v)] for k, v in self.item_weights.items()]
        return d


class ModularFunction(SubmodularFunction):
    def __init__(self, weights: Sequence, offset=0):
        self.weights = list(weights)
        self.n = len(self.weights)
        self.offset = offset

    def value(self, s):
        return self.offset + sum((self.weights[e] for e in s), 0)

    def to_dict(self):
        return {"type": "modular", "weights": [str(w) for w in self.weights], "offset": str(self.offset)}


class MatroidRankFunction(SubmodularFunction):
    """Weight of a heaviest independent subset (plain rank when unweighted)."""

    def __init__(self, matroid: Matroid, weights: Sequence | None = None):
        self.matroid = matroid
        self.n = matroid.n
        self.weights = list(weights) if weights is not None else [1] * matroid.n

    def value(self, s):
        best = greedy_single(self.matroid, self.weights, ground=s)
        return sum((self.weights[e] for e in best), 0)

    def to_dict(self):
        return {"type": "matroid_rank", "matroid": self.matroid.to_dict(),
                "weights": [str(w) for w in self.weights]}


class CutFunction(SubmodularFunction):
    """Weight of edges leaving the vertex set S (nonmonotone)."""

    def __init__(self, num_vertices: int, edges: Sequence[Sequence]):
        self.n = num_vertices
        self.edges = []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = to_rational(e[2]) if len(e) > 2 else 1
            self.edges.append((u, v, w))

    def value(self, s):
        return sum((w for u, v, w in self.edges if (u in s) != (v in s)), 0)

    def to_dict(self):
        return {"type": "cut", "num_vertices": self.n,
                "edges": [[u, v, str(w)] for u, v, w in self.edges]}


def _item(x):
    return tuple(x) if isinstance(x, list) else x


def submodular_from_dict(d: dict) -> SubmodularFunction:
    kind = d.get("type")
    if kind == "coverage":
        sets = d["sets"]
        iw = d.get("item_weights")
        if isinstance(iw, dict):
            by_name = {str(x): x for items in sets for x in items}
            iw = [[by_name.get(k, k), v] for k, v in iw.items()]
        return CoverageFunction(sets, {_item(k): to_rational(v) for k, v in iw} if iw else None)
    if kind == "modular":
        return ModularFunction([to_rational(w) for w in d["weights"]], to_rational(d.get("offset", 0)))
    if kind == "matroid_rank":
        w = d.get("weights")
        return MatroidRankFunction(matroid_from_dict(d["matroid"]), [to_rational(x) for x in w] if w else None)
    if kind == "cut":
        return CutFunction(int(d["num_vertices"]), d["edges"])
    raise ValueError(f"unknown submodular function type {kind!r}")


class PrematureQueryError(RuntimeError):
    pass


class RevealGuard(SubmodularFunction):
    """Value oracle that refuses queries touching elements not yet revealed."""

    def __init__(self, f: SubmodularFunction):
        self.f = f
        self.n = f.n
        self.revealed: set = set()

    def reveal(self, elements: Iterable[int]):
        self.revealed.update(elements)

    def value(self, s):
        if not s <= self.revealed:
            raise PrematureQueryError(f"queried unrevealed elements {sorted(s - self.revealed)}")
        return self.f.value(s)


def submodular_greedy(c, f: SubmodularFunction, ground: Iterable[int] | None = None) -> GreedyTrace:
    """Repeatedly add the feasible element of largest positive marginal (ties: lowest id)."""
    c = as_constraint(c)
    candidates = sorted(set(range(c.n)) if ground is None else set(ground))
    trace = GreedyTrace()
    current: set = set()
    value = f(current)
    while True:
        best, best_gain = None, 0
        for e in candidates:
            if e in current or not c.is_feasible(current | {e}):
                continue
            gain = f(current | {e}) - value
            if gain > best_gain:
                best, best_gain = e, gain
        if best is None:
            return trace
        trace.prefixes[best] = frozenset(current)
        trace.selected.append(best)
        current.add(best)
        value += best_gain


def feasible_sets(c, limit: int = BRUTE_FORCE_LIMIT):
    """Every feasible set, by DFS over ids (the family is downward closed)."""
    c = as_constraint(c)
    if c.n > limit:
        raise ResourceLimitError(f"enumeration limited to n <= {limit}, got n = {c.n}")
    chosen: list = []

    def dfs(i):
        if i == c.n:
            yield frozenset(chosen)
            return
        chosen.append(i)
        if c.is_feasible(chosen):
            yield from dfs(i + 1)
        chosen.pop()
        yield from dfs(i + 1)

    yield from dfs(0)


def brute_force_submodular(c, f: SubmodularFunction, limit: int = BRUTE_FORCE_LIMIT) -> frozenset:
    """A feasible set maximizing f (smallest, then lexicographically first, among ties)."""
    best, best_v = frozenset(), f(frozenset())
    for s in feasible_sets(c, limit):
        v = f(s)
        if v > best_v or (v == best_v and (len(s), sorted(s)) < (len(best), sorted(best))):
            best, best_v = s, v
    return best


def convolution_value(f: SubmodularFunction, w: Sequence, s: Iterable[int], limit: int = CONVOLUTION_LIMIT):
    """min over A ⊆ S of f(A) + w(S \\ A), by exhaustive search."""
    s = sorted(set(s))
    if len(s) > limit:
        raise ResourceLimitError(f"convolution limited to |S| <= {limit}, got {len(s)}")
    total = sum((w[e] for e in s), 0)
    best = None
    for r in range(len(s) + 1):
        for a in combinations(s, r):
            val = f(a) + total - sum((w[e] for e in a), 0)
            if best is None or val < best:
                best = val
    return best


def default_online_p(alpha, k: int) -> Fraction:
    return Fraction(alpha) / (3 * k)


class SubmodularOnline(OrderObliviousAlgorithm):
    """Learn on a half sample, then feed a linear-weight algorithm synthetic weights.

    An arriving element that greedy would take when added to the learning sample
    L gets, with probability ``p``, weight f(u | G_u) where G_u is greedy's
    solution just before it adds u; everything else gets weight 0. The
    algorithm keeps only elements the inner algorithm takes that received a
    positive weight. Learning-sample elements are fed to the inner algorithm at
    the end with weight 0.
    """

    def __init__(self, constraint, f: SubmodularFunction, inner_factory: Callable,
                 alpha, p=None, guard: bool = True, coins: dict | None = None,
                 learning_sample: Iterable[int] | None = None):
        super().__init__()
        self.c = as_constraint(constraint)
        self.f = RevealGuard(f) if guard else f
        self.alpha = Fraction(alpha)
        self.p = Fraction(p) if p is not None else default_online_p(alpha, self.c.k)
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")
        self.inner = inner_factory(self.c)
        self.coins = coins
        self._fixed_learning = frozenset(learning_sample) if learning_sample is not None else None
        self.E: set = set()
        self.synthetic: dict = {}
        self._rng = None
        self._x = 0

    def sample_size(self, n, rng):
        self._rng = rng
        self._x = int(rng.binomial(n, 0.5)) if n else 0
        return self._x + min(self.inner.sample_size(n - self._x, rng), n - self._x)

    def _reveal(self, elements):
        if isinstance(self.f, RevealGuard):
            self.f.reveal(elements)

    def observe(self, sample):
        elements = sorted(sample)
        self._reveal(elements)
        if self._fixed_learning is not None:
            self.L = self._fixed_learning
        else:
            idx = self._rng.choice(len(elements), size=self._x, replace=False) if self._x else []
            self.L = frozenset(elements[i] for i in idx)
        self.G = submodular_greedy(self.c, self.f, ground=self.L)
        inner_sample = {u: self._weight(u) for u in elements if u not in self.L}
        self.inner.observe(inner_sample)

    def _coin(self, u) -> bool:
        if self.coins is not None:
            return self.coins[u]
        return self._rng.random() < self.p

    def _weight(self, u):
        if u in self.synthetic:
            return self.synthetic[u]
        w = 0
        trace = submodular_greedy(self.c, self.f, ground=self.L | {u})
        if u in trace.prefixes and self._coin(u):
            self.E.add(u)
            w = self.f.marginal(u, trace.prefixes[u])
        self.synthetic[u] = w
        return w

    def _decide(self, u, _w):
        self._reveal([u])
        took = self.inner.offer(u, self._weight(u))
        if took:
            self.inner.place(u, T1)
        return took and u in self.E

    def finish(self):
        for u in sorted(self.L):
            if self.inner.offer(u, 0):
                self.inner.place(u, T1)
        self.inner.finish()


@dataclass
class OnlineResult:
    selected: frozenset
    E: frozenset
    learning: frozenset
    greedy: list
    value: object


def submodular_online(constraint, f: SubmodularFunction, inner_factory: Callable, alpha, rng,
                      p=None, arrange=None) -> OnlineResult:
    """One run of the submodular-to-linear reduction; returns Q ∩ E."""
    from .secretary import run_episode

    c = as_constraint(constraint)
    alg = SubmodularOnline(c, f, inner_factory, alpha, p)
    ep = run_episode(alg, range(c.n), [0] * c.n, rng, arrange)
    chosen = frozenset(ep.selected)
    if not c.is_feasible(chosen):
        raise AssertionError("Q ∩ E is infeasible")
    return OnlineResult(chosen, frozenset(alg.E), alg.L, list(alg.G.selected), f(chosen))
