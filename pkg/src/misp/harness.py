"""Simulation engine: instances, arrival orders, Monte Carlo runs, instance
generators and an algorithm registry shared with the command line."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .errors import ResourceLimitError
from .framework import (
    OptCompetitiveCombiner,
    ReduceAndSolveCombiner,
    opt_competitive_bound,
    reduce_and_solve_bound,
)
from .matroids import (
    GraphicMatroid,
    LaminarMatroid,
    LinearMatroid,
    Matroid,
    PartitionMatroid,
    TransversalMatroid,
    matroid_from_dict,
    to_rational,
)
from .offline import BRUTE_FORCE_LIMIT, IntersectionConstraint, brute_force_opt, greedy_intersection, set_weight
from .overlap import InvariantViolation, subset_probability
from .secretary import (
    GeneralizedPartitionSecretary,
    OrderObliviousAlgorithm,
    SimplePartitionSecretary,
    graphic_reduce_and_solve,
    partition_reduce_and_solve,
    run_episode,
    simple_partition_blocks,
    simple_partition_secretary,
    sparse_linear_reduce_and_solve,
    transversal_reduce_and_solve,
)
from .submodular import SubmodularFunction, SubmodularOnline, brute_force_submodular, submodular_from_dict


# -- instances --------------------------------------------------------------

def _weight_to_json(w):
    if isinstance(w, Fraction):
        return w.numerator if w.denominator == 1 else str(w)
    return w


@dataclass
class SecretaryInstance:
    matroids: list
    weights: list
    objective: SubmodularFunction | None = None
    name: str = ""

    def __post_init__(self):
        if not self.matroids:
            raise ValueError("an instance needs at least one matroid")
        n = self.matroids[0].n
        if any(m.n != n for m in self.matroids):
            raise ValueError("all matroids must share the ground-set size")
        if len(self.weights) != n:
            raise ValueError(f"expected {n} weights, got {len(self.weights)}")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if self.objective is not None and self.objective.n != n:
            raise ValueError("objective ground set does not match the matroids")

    @property
    def n(self) -> int:
        return self.matroids[0].n

    @property
    def k(self) -> int:
        return len(self.matroids)

    @property
    def constraint(self) -> IntersectionConstraint:
        return IntersectionConstraint(self.matroids)

    def value(self, s) -> object:
        if self.objective is not None:
            return self.objective(s)
        return set_weight(self.weights, s)

    def optimum(self, limit: int = BRUTE_FORCE_LIMIT) -> frozenset:
        if self.objective is not None:
            return brute_force_submodular(self.constraint, self.objective, limit)
        return brute_force_opt(self.constraint, self.weights, limit)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "matroids": [m.to_dict() for m in self.matroids],
            "weights": [_weight_to_json(w) for w in self.weights],
        }
        if self.objective is not None:
            d["objective"] = self.objective.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SecretaryInstance":
        if not isinstance(d, dict) or "matroids" not in d:
            raise ValueError("instance must be an object with a 'matroids' list")
        matroids = [matroid_from_dict(m) for m in d["matroids"]]
        n = matroids[0].n if matroids else 0
        weights = [to_rational(w) for w in d.get("weights", [0] * n)]
        objective = submodular_from_dict(d["objective"]) if d.get("objective") else None
        return cls(matroids, weights, objective, d.get("name", ""))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SecretaryInstance":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# -- arrival orders ---------------------------------------------------------

ORDERS = ("uniform", "weight-decreasing", "weight-increasing", "opt-last", "opt-first")


def _decreasing(elements, weight_of):
    return sorted(elements, key=lambda e: (-weight_of[e], e))


@dataclass(frozen=True)
class ArrivalOrder:
    """How the non-sample elements are lined up.

    ``opt-last`` sends the non-OPT elements first, heaviest first, then the OPT
    elements lightest first; ``opt-first`` sends OPT first. Both need OPT,
    which the harness computes by brute force.
    """

    kind: str = "uniform"
    permutation: tuple | None = None

    def __post_init__(self):
        if self.kind == "explicit":
            if self.permutation is None:
                raise ValueError("explicit order needs a permutation")
        elif self.kind not in ORDERS:
            raise ValueError(f"unknown arrival order {self.kind!r}")

    @classmethod
    def parse(cls, value) -> "ArrivalOrder":
        if isinstance(value, ArrivalOrder):
            return value
        if isinstance(value, (list, tuple)):
            return cls("explicit", tuple(int(x) for x in value))
        if isinstance(value, str) and "," in value:
            return cls("explicit", tuple(int(x) for x in value.split(",")))
        return cls(str(value))

    @property
    def needs_opt(self) -> bool:
        return self.kind in ("opt-last", "opt-first")

    def realize(self, remaining: Sequence, weight_of, opt=frozenset(), rng=None) -> list:
        remaining = list(remaining)
        if self.kind == "uniform":
            out = [remaining[i] for i in rng.permutation(len(remaining))]
        elif self.kind == "weight-decreasing":
            out = _decreasing(remaining, weight_of)
        elif self.kind == "weight-increasing":
            out = _decreasing(remaining, weight_of)[::-1]
        elif self.kind == "opt-last":
            out = (_decreasing([e for e in remaining if e not in opt], weight_of)
                   + _decreasing([e for e in remaining if e in opt], weight_of)[::-1])
        elif self.kind == "opt-first":
            out = (_decreasing([e for e in remaining if e in opt], weight_of)
                   + _decreasing([e for e in remaining if e not in opt], weight_of))
        else:
            left = set(remaining)
            out = [e for e in self.permutation if e in left]
        if sorted(out) != sorted(remaining):
            raise ValueError("realized order is not a permutation of the remaining elements")
        return out

    def __str__(self):
        return self.kind if self.kind != "explicit" else ",".join(map(str, self.permutation))


# -- algorithms -------------------------------------------------------------

class OfflineGreedyBaseline(OrderObliviousAlgorithm):
    """Clairvoyant baseline: knows all weights and accepts exactly greedy's set."""

    def __init__(self, constraint, weights):
        super().__init__()
        self.target = greedy_intersection(constraint, weights).as_set

    def sample_size(self, n, rng):
        return 0

    def _decide(self, e, w):
        return e in self.target


def procedure_for(matroid: Matroid, p=None):
    """Reduce-and-solve procedure matching the matroid's class."""
    kw = {} if p is None else {"p": Fraction(p)}
    if isinstance(matroid, GraphicMatroid):
        return graphic_reduce_and_solve(matroid, **kw)
    if isinstance(matroid, LinearMatroid):
        return sparse_linear_reduce_and_solve(matroid, **kw)
    if isinstance(matroid, TransversalMatroid):
        return transversal_reduce_and_solve(matroid, **kw)
    simple_partition_blocks(matroid)
    return partition_reduce_and_solve(matroid, **kw)


def linear_inner(c: IntersectionConstraint, p=Fraction(1, 2)) -> OrderObliviousAlgorithm:
    """Simple-partition algorithm for k = 1, the OPT-competitive combiner otherwise."""
    if c.k == 1:
        return SimplePartitionSecretary.for_matroid(c.matroids[0], Fraction(p))
    return OptCompetitiveCombiner(c, [simple_partition_secretary(Fraction(p))] * c.k)


def linear_inner_ratio(k: int, p=Fraction(1, 2)) -> Fraction:
    p = Fraction(p)
    c = p * (1 - p)
    return c if k == 1 else opt_competitive_bound([c] * k)


def _make_offline(inst):
    return OfflineGreedyBaseline(inst.constraint, inst.weights)


def _make_simple(inst, p):
    return SimplePartitionSecretary.for_matroid(inst.matroids[0], p)


def _make_generalized(inst):
    return GeneralizedPartitionSecretary(inst.matroids[0])


def _make_combine_opt(inst, p):
    return OptCompetitiveCombiner(inst.constraint, [simple_partition_secretary(p)] * inst.k)


def _make_combine_rs(inst, p):
    return ReduceAndSolveCombiner([procedure_for(m, p) for m in inst.matroids])


def _make_submodular(inst, alpha, p, inner_p):
    return SubmodularOnline(inst.constraint, inst.objective, partial(linear_inner, p=inner_p), alpha, p)


@dataclass
class AlgorithmChoice:
    name: str
    factory: Callable
    bound: Fraction
    bound_label: str


def _require(cond, msg):
    if not cond:
        raise ValueError(msg)


def build_algorithm(name: str, inst: SecretaryInstance, p=None) -> AlgorithmChoice:
    """Resolve an algorithm name to a picklable factory plus the bound it is tested against.

    ``p`` overrides the sampling probability of the single-matroid algorithms
    (for ``submodular-online`` it overrides the reduction's own p).
    """
    if p is not None:
        p = Fraction(p).limit_denominator(10 ** 6)
        _require(0 < p < 1, "p must lie in (0, 1)")
    if name == "offline-greedy":
        return AlgorithmChoice(name, _make_offline, Fraction(1, inst.k), "1/k (offline greedy)")
    if name == "simple-partition":
        _require(inst.k == 1, "simple-partition needs exactly one matroid")
        simple_partition_blocks(inst.matroids[0])
        q = p if p is not None else Fraction(1, 2)
        return AlgorithmChoice(name, partial(_make_simple, p=q), q * (1 - q), "p(1-p)")
    if name == "generalized-partition":
        _require(inst.k == 1 and isinstance(inst.matroids[0], PartitionMatroid),
                 "generalized-partition needs exactly one partition matroid")
        return AlgorithmChoice(name, _make_generalized, Fraction(1, 4), "1/4")
    if name == "combine-opt":
        for m in inst.matroids:
            simple_partition_blocks(m)
        q = p if p is not None else Fraction(1, 2)
        bound = opt_competitive_bound([q * (1 - q)] * inst.k)
        return AlgorithmChoice(name, partial(_make_combine_opt, p=q), bound, "prod(c_j)/(4k^2)")
    if name in ("combine-rs", "graphic", "sparse-linear", "transversal"):
        want = {"graphic": GraphicMatroid, "sparse-linear": LinearMatroid, "transversal": TransversalMatroid}
        if name in want:
            _require(all(isinstance(m, want[name]) for m in inst.matroids),
                     f"{name} needs {want[name].__name__} constraints")
        procs = [procedure_for(m, p) for m in inst.matroids]
        bound = reduce_and_solve_bound(procs)
        return AlgorithmChoice(name, partial(_make_combine_rs, p=p), bound,
                               "prod(c^r c^o)/(8k(k+1)max(sum c^a,1))")
    if name == "submodular-online":
        _require(inst.objective is not None, "submodular-online needs an objective")
        for m in inst.matroids:
            simple_partition_blocks(m)
        alpha = linear_inner_ratio(inst.k)
        bound = alpha ** 2 / (128 * inst.k ** 2)
        return AlgorithmChoice(name, partial(_make_submodular, alpha=alpha, p=p, inner_p=Fraction(1, 2)),
                               bound, "alpha^2/(128k^2)")
    raise ValueError(f"unknown algorithm {name!r}")


ALGORITHMS = ("offline-greedy", "simple-partition", "generalized-partition", "combine-opt",
              "combine-rs", "graphic", "sparse-linear", "transversal", "submodular-online")


# -- Monte Carlo ------------------------------------------------------------

@dataclass
class TrialRecord:
    trial: int
    value: object
    ratio: float
    accepted: tuple


@dataclass
class SimulationReport:
    trials: int
    seed: int
    order: str
    opt: tuple
    opt_value: object
    mean_ratio: float
    stderr: float
    frequencies: list
    records: list = field(default_factory=list)
    label: str = ""
    bound: Fraction | None = None
    wall_time: float = 0.0

    @property
    def threshold(self) -> float | None:
        """Acceptance threshold: bound minus three standard errors."""
        return None if self.bound is None else float(self.bound) - 3 * self.stderr

    @property
    def margin(self) -> float | None:
        return None if self.bound is None else self.mean_ratio - self.threshold

    def frequency_stderr(self, e: int) -> float:
        f = self.frequencies[e]
        return math.sqrt(f * (1 - f) / self.trials)

    def frequency_margin(self, e: int, bound) -> float:
        """freq - (bound - 3 SE); nonnegative means the bound is not rejected."""
        return self.frequencies[e] - (float(bound) - 3 * self.frequency_stderr(e))

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "label": self.label,
            "trials": self.trials,
            "seed": self.seed,
            "order": self.order,
            "opt": list(self.opt),
            "opt_value": str(self.opt_value),
            "mean_ratio": self.mean_ratio,
            "stderr": self.stderr,
            "bound": None if self.bound is None else str(self.bound),
            "frequencies": {str(e): f for e, f in enumerate(self.frequencies)},
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["trial", "ratio", "accepted_ids", "seed"])
        for r in self.records:
            writer.writerow([r.trial, repr(r.ratio), " ".join(map(str, r.accepted)), self.seed])
        return buf.getvalue()


def trial_rng(seed: int, trial: int):
    """Independent stream for one trial, reproducible in isolation."""
    return np.random.default_rng([seed, trial])


def _run_trials(instance, factory, order, opt, opt_value, seed, trials, check):
    records = []
    c = instance.constraint
    for t in trials:
        rng = trial_rng(seed, t)
        alg = factory(instance)
        arrange = partial(_arrange, order=order, weight_of=instance.weights, opt=opt, rng=rng)
        ep = run_episode(alg, range(instance.n), instance.weights, rng, arrange)
        chosen = tuple(sorted(ep.selected))
        if check:
            if not c.is_feasible(chosen):
                raise InvariantViolation(f"trial {t}: output {chosen} is infeasible")
            alg.check_output(chosen)
        value = instance.value(chosen)
        ratio = float(Fraction(value) / Fraction(opt_value)) if opt_value else 0.0
        records.append(TrialRecord(t, value, ratio, chosen))
    return records


def _arrange(remaining, sample, order, weight_of, opt, rng):
    return order.realize(remaining, weight_of, opt, rng)


def monte_carlo(instance: SecretaryInstance, factory: Callable, order="uniform", trials: int = 1000,
                seed: int = 0, opt=None, workers: int = 1, check: bool = True,
                label: str = "", bound=None) -> SimulationReport:
    """Run ``trials`` independent episodes and aggregate ratio and frequencies.

    ``opt`` overrides the brute-force optimum (used for ratios and for the
    OPT-aware orders). Trial t always uses the stream ``trial_rng(seed, t)``, so
    the report does not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    order = ArrivalOrder.parse(order)
    start = time.perf_counter()
    if opt is None:
        if instance.n > BRUTE_FORCE_LIMIT:
            raise ResourceLimitError(f"ratio needs brute force, limited to n <= {BRUTE_FORCE_LIMIT}")
        opt = instance.optimum()
    opt = frozenset(opt)
    opt_value = instance.value(opt)
    ids = list(range(trials))
    if workers <= 1 or trials < 2 * workers:
        records = _run_trials(instance, factory, order, opt, opt_value, seed, ids, check)
    else:
        chunks = [ids[i::workers] for i in range(workers)]
        job = partial(_run_trials, instance, factory, order, opt, opt_value, seed, check=check)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, chunks))
        records = sorted((r for part in parts for r in part), key=lambda r: r.trial)
    ratios = np.array([r.ratio for r in records], dtype=float)
    mean = float(ratios.mean())
    stderr = float(ratios.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    counts = [0] * instance.n
    for r in records:
        for e in r.accepted:
            counts[e] += 1
    return SimulationReport(
        trials=trials, seed=seed, order=str(order), opt=tuple(sorted(opt)), opt_value=opt_value,
        mean_ratio=mean, stderr=stderr, frequencies=[c / trials for c in counts],
        records=records, label=label, bound=None if bound is None else Fraction(bound),
        wall_time=time.perf_counter() - start,
    )


def exact_selection_probabilities(elements: Sequence, weight_of, factory: Callable, p,
                                  arrange: Callable | None = None) -> dict:
    """Exact per-element acceptance probability of an algorithm whose sample is
    mu_p, by enumerating every sample (the arrival order must be deterministic)."""
    elements = list(elements)
    n = len(elements)
    probs = {e: Fraction(0) for e in elements}
    for bits in product((False, True), repeat=n):
        sample = [e for e, b in zip(elements, bits) if b]
        alg = factory()
        ep = run_episode(alg, elements, weight_of, None, arrange, sample=sample)
        pr = subset_probability(len(sample), n, p)
        for e in ep.selected:
            probs[e] += pr
    return probs


# -- generators -------------------------------------------------------------

FAMILIES = ("random-partition", "random-laminar", "random-graph", "random-bipartite",
            "random-sparse-matrix", "bipartite-matching-intersection", "partition×transversal")
_FAMILY_ALIASES = {"partition-x-transversal": "partition×transversal",
                   "partition-transversal": "partition×transversal"}


def _distinct_weights(n, rng) -> list:
    return [int(x) + 1 for x in rng.choice(10 * max(n, 1), size=n, replace=False)]


def _random_partition(n, rng) -> PartitionMatroid:
    labels = rng.integers(0, max(1, (n + 1) // 2), size=n)
    groups: dict = {}
    for e, b in enumerate(labels):
        groups.setdefault(int(b), []).append(e)
    return PartitionMatroid([groups[b] for b in sorted(groups)])


def _random_laminar(n, rng) -> LaminarMatroid:
    family, caps = [], []

    def split(part):
        family.append(sorted(part))
        caps.append(int(rng.integers(1, len(part) + 1)))
        if len(part) < 3:
            return
        perm = [part[i] for i in rng.permutation(len(part))]
        pieces = int(rng.integers(2, 4))
        cuts = sorted(int(x) for x in rng.choice(range(1, len(perm)), size=min(pieces - 1, len(perm) - 1),
                                                  replace=False))
        for a, b in zip([0] + cuts, cuts + [len(perm)]):
            if b - a >= 2:
                split(perm[a:b])

    split(list(range(n)))
    return LaminarMatroid(n, family, caps)


def _random_graph(m, rng) -> GraphicMatroid:
    v = max(3, int(math.ceil(math.sqrt(2 * m))) + 1)
    edges = []
    for _ in range(m):
        a, b = rng.choice(v, size=2, replace=False)
        edges.append((int(a), int(b)))
    return GraphicMatroid(v, edges)


def _random_bipartite(n, rng) -> TransversalMatroid:
    r = max(1, n // 2)
    adj = []
    for _ in range(n):
        deg = int(rng.integers(1, min(2, r) + 1))
        adj.append(sorted(int(x) for x in rng.choice(r, size=deg, replace=False)))
    return TransversalMatroid(adj)


def _random_sparse_matrix(n, rng) -> LinearMatroid:
    """Vertex-arc incidence matrix of a random digraph: totally unimodular, two
    nonzeros per column."""
    g = _random_graph(n, rng)
    rows = [[0] * n for _ in range(g.num_vertices)]
    for c, (a, b) in enumerate(g.edges):
        rows[a][c] = 1
        rows[b][c] = -1
    return LinearMatroid(rows)


def _matching_intersection(n, rng):
    side = int(math.ceil(math.sqrt(n))) + 1
    cells = rng.choice(side * side, size=n, replace=False)
    pairs = [(int(x) // side, int(x) % side) for x in cells]
    left, right = {}, {}
    for e, (a, b) in enumerate(pairs):
        left.setdefault(a, []).append(e)
        right.setdefault(b, []).append(e)
    return [PartitionMatroid([left[a] for a in sorted(left)]),
            PartitionMatroid([right[b] for b in sorted(right)])]


def generate_instance(family: str, size: int, seed: int) -> SecretaryInstance:
    """Deterministic random instance with distinct integer weights."""
    family = _FAMILY_ALIASES.get(family, family)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    if size < 1:
        raise ValueError("size must be >= 1")
    rng = np.random.default_rng(seed)
    if family == "random-partition":
        matroids = [_random_partition(size, rng)]
    elif family == "random-laminar":
        matroids = [_random_laminar(size, rng)]
    elif family == "random-graph":
        matroids = [_random_graph(size, rng)]
    elif family == "random-bipartite":
        matroids = [_random_bipartite(size, rng)]
    elif family == "random-sparse-matrix":
        matroids = [_random_sparse_matrix(size, rng)]
    elif family == "bipartite-matching-intersection":
        matroids = _matching_intersection(size, rng)
    else:
        matroids = [_random_partition(size, rng), _random_bipartite(size, rng)]
    weights = _distinct_weights(size, rng)
    return SecretaryInstance(matroids, weights, name=f"{family}-{size}-{seed}")
