"""Matroid oracles over dense integer ground sets.

Every matroid exposes ``n`` (ground set ``0..n-1``) and an independence test.
Rank and span are derived greedily from independence, so derived matroids
(dual, restriction, direct sum) only need to answer independence queries.

Oracles are immutable after construction.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


def tie_break_order(weights: Sequence) -> list[int]:
    """Element ids sorted by weight descending, then id ascending."""
    return sorted(range(len(weights)), key=lambda e: (-weights[e], e))


def priority_key(weights: Sequence, e: int):
    return (-weights[e], e)


def to_rational(value):
    """Parse an exact integer, Fraction, or decimal/ratio string."""
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value if value.denominator != 1 else value.numerator
    if isinstance(value, str):
        q = Fraction(value)
        return q if q.denominator != 1 else q.numerator
    if isinstance(value, float):
        # floats are accepted but converted exactly; prefer strings in JSON
        q = Fraction(value)
        return q if q.denominator != 1 else q.numerator
    raise ValueError(f"not a number: {value!r}")


class Matroid:
    """Base oracle. Subclasses implement ``_independent`` on a set of valid ids."""

    n: int = 0

    def _check_ids(self, ids: Iterable[int]) -> frozenset:
        s = frozenset(ids)
        for e in s:
            if not isinstance(e, (int,)) or e < 0 or e >= self.n:
                raise ValueError(f"element id {e!r} out of range for ground set of size {self.n}")
        return s

    def _independent(self, s: frozenset) -> bool:
        raise NotImplementedError

    def is_independent(self, s: Iterable[int]) -> bool:
        return self._independent(self._check_ids(s))

    def _rank(self, s: Iterable[int]) -> int:
        basis: set = set()
        for e in sorted(s):
            basis.add(e)
            if not self._independent(frozenset(basis)):
                basis.discard(e)
        return len(basis)

    def rank(self, s: Iterable[int]) -> int:
        return self._rank(self._check_ids(s))

    def in_span(self, s: Iterable[int], e: int) -> bool:
        s = self._check_ids(s)
        self._check_ids([e])
        return self._rank(s | {e}) == self._rank(s)

    def full_rank(self) -> int:
        return self._rank(range(self.n))

    def is_loop(self, e: int) -> bool:
        return not self.is_independent([e])

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class UniformMatroid(Matroid):
    def __init__(self, n: int, r: int):
        if n < 0 or r < 0:
            raise ValueError("uniform matroid needs n >= 0 and r >= 0")
        self.n = n
        self.r = r

    def _independent(self, s):
        return len(s) <= self.r

    def _rank(self, s):
        return min(len(set(s)), self.r)

    def to_dict(self):
        return {"type": "uniform", "n": self.n, "r": self.r}


class PartitionMatroid(Matroid):
    """Disjoint blocks covering the ground set, block ``i`` holds at most ``caps[i]``."""

    def __init__(self, blocks: Sequence[Sequence[int]], caps: Sequence[int] | None = None):
        blocks = [tuple(b) for b in blocks]
        if caps is None:
            caps = [1] * len(blocks)
        if len(caps) != len(blocks):
            raise ValueError("one cap per block required")
        if any(c < 1 for c in caps):
            raise ValueError("partition caps must be >= 1")
        n = sum(len(b) for b in blocks)
        block_of = [-1] * n
        for i, b in enumerate(blocks):
            for e in b:
                if not 0 <= e < n or block_of[e] != -1:
                    raise ValueError("partition blocks must partition 0..n-1")
                block_of[e] = i
        self.n = n
        self.blocks = blocks
        self.caps = tuple(caps)
        self.block_of = tuple(block_of)

    @property
    def is_simple(self) -> bool:
        return all(c == 1 for c in self.caps)

    def _independent(self, s):
        counts: dict[int, int] = {}
        for e in s:
            b = self.block_of[e]
            c = counts.get(b, 0) + 1
            if c > self.caps[b]:
                return False
            counts[b] = c
        return True

    def _rank(self, s):
        counts: dict[int, int] = {}
        for e in set(s):
            b = self.block_of[e]
            counts[b] = counts.get(b, 0) + 1
        return sum(min(c, self.caps[b]) for b, c in counts.items())

    def to_dict(self):
        return {"type": "partition", "blocks": [list(b) for b in self.blocks], "caps": list(self.caps)}


class LaminarMatroid(Matroid):
    """Family of nested-or-disjoint sets with caps; elements outside every set are free."""

    def __init__(self, n: int, family: Sequence[Sequence[int]], caps: Sequence[int]):
        if len(family) != len(caps):
            raise ValueError("one cap per laminar set required")
        sets = [frozenset(f) for f in family]
        for f in sets:
            if any(not 0 <= e < n for e in f):
                raise ValueError("laminar set references element outside ground set")
        for i, a in enumerate(sets):
            for b in sets[i + 1:]:
                if a & b and not (a <= b or b <= a):
                    raise ValueError("family is not laminar: sets must be disjoint or nested")
        if any(c < 0 for c in caps):
            raise ValueError("laminar caps must be >= 0")
        self.n = n
        self.family = tuple(sets)
        self.caps = tuple(caps)
        self._member_of = [tuple(i for i, f in enumerate(sets) if e in f) for e in range(n)]

    def _independent(self, s):
        counts: dict[int, int] = {}
        for e in s:
            for i in self._member_of[e]:
                c = counts.get(i, 0) + 1
                if c > self.caps[i]:
                    return False
                counts[i] = c
        return True

    def to_dict(self):
        return {
            "type": "laminar",
            "n": self.n,
            "family": [sorted(f) for f in self.family],
            "caps": list(self.caps),
        }


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        parent = self.parent
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while x != root:
            nxt = parent.get(x, x)
            parent[x] = root
            x = nxt
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


class GraphicMatroid(Matroid):
    """Edges of a multigraph; forests are independent. Self-loops are matroid loops."""

    def __init__(self, num_vertices: int, edges: Sequence[Sequence[int]]):
        edges = [tuple(e) for e in edges]
        for u, v in edges:
            if not (0 <= u < num_vertices and 0 <= v < num_vertices):
                raise ValueError(f"edge ({u}, {v}) has endpoint outside 0..{num_vertices - 1}")
        self.n = len(edges)
        self.num_vertices = num_vertices
        self.edges = tuple(edges)

    def _independent(self, s):
        uf = _UnionFind()
        for e in s:
            u, v = self.edges[e]
            if not uf.union(u, v):
                return False
        return True

    def _rank(self, s):
        uf = _UnionFind()
        return sum(1 for e in set(s) if uf.union(*self.edges[e]))

    def to_dict(self):
        return {"type": "graphic", "num_vertices": self.num_vertices, "edges": [list(e) for e in self.edges]}


def _max_bipartite_matching(left: Iterable[int], adj: Sequence[Sequence]) -> int:
    """Size of a maximum matching from ``left`` into right nodes (augmenting paths)."""
    match_right: dict = {}

    def augment(u, seen):
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if v not in match_right or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    size = 0
    for u in left:
        if augment(u, set()):
            size += 1
    return size


class TransversalMatroid(Matroid):
    """Element ``e`` may be matched to any right node in ``adjacency[e]``."""

    def __init__(self, adjacency: Sequence[Iterable]):
        self.adjacency = tuple(tuple(sorted(set(a), key=repr)) for a in adjacency)
        self.n = len(self.adjacency)

    def _independent(self, s):
        return _max_bipartite_matching(sorted(s), self.adjacency) == len(s)

    def _rank(self, s):
        return _max_bipartite_matching(sorted(set(s)), self.adjacency)

    def right_nodes(self) -> list:
        return sorted({v for a in self.adjacency for v in a}, key=repr)

    def to_dict(self):
        return {"type": "transversal", "adjacency": [list(a) for a in self.adjacency]}


def rational_rank(columns: Sequence[Sequence]) -> int:
    """Rank of a list of column vectors, exact Gaussian elimination over Q."""
    rows = [[Fraction(x) for x in col] for col in columns]  # eliminate on the transpose
    rank = 0
    if not rows:
        return 0
    width = len(rows[0])
    for c in range(width):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pr = rows[rank]
        for i in range(rank + 1, len(rows)):
            if rows[i][c] != 0:
                factor = rows[i][c] / pr[c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], pr)]
        rank += 1
        if rank == len(rows):
            break
    return rank


class LinearMatroid(Matroid):
    """Columns of a rational matrix; linearly independent column sets are independent."""

    def __init__(self, matrix: Sequence[Sequence]):
        rows = [[to_rational(x) for x in row] for row in matrix]
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("matrix rows must have equal length")
        self.num_rows = len(rows)
        self.n = len(rows[0]) if rows else 0
        self.matrix = tuple(tuple(r) for r in rows)
        self.columns = tuple(tuple(rows[i][c] for i in range(self.num_rows)) for c in range(self.n))
        self.sparsity = max((len(self.nonzero_rows(c)) for c in range(self.n)), default=0)

    def nonzero_rows(self, c: int) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.columns[c]) if x != 0)

    def _independent(self, s):
        if len(s) > self.num_rows:
            return False
        return rational_rank([self.columns[c] for c in sorted(s)]) == len(s)

    def _rank(self, s):
        return rational_rank([self.columns[c] for c in sorted(set(s))])

    def to_dict(self):
        return {"type": "linear", "matrix": [[str(x) for x in row] for row in self.matrix]}


class DualMatroid(Matroid):
    """``S`` is independent iff ``N \\ S`` still spans the base matroid."""

    def __init__(self, base: Matroid):
        self.base = base
        self.n = base.n
        self._base_rank = base._rank(range(base.n))

    def _independent(self, s):
        rest = [e for e in range(self.n) if e not in s]
        return self.base._rank(rest) == self._base_rank

    def _rank(self, s):
        s = set(s)
        rest = [e for e in range(self.n) if e not in s]
        return len(s) + self.base._rank(rest) - self._base_rank

    def to_dict(self):
        return {"type": "dual", "base": self.base.to_dict()}


class RestrictionMatroid(Matroid):
    """``base`` restricted to ``subset``; new id ``i`` stands for ``subset[i]``."""

    def __init__(self, base: Matroid, subset: Sequence[int]):
        subset = tuple(subset)
        if len(set(subset)) != len(subset):
            raise ValueError("restriction subset has duplicates")
        base._check_ids(subset)
        self.base = base
        self.subset = subset
        self.n = len(subset)

    def _independent(self, s):
        return self.base._independent(frozenset(self.subset[e] for e in s))

    def _rank(self, s):
        return self.base._rank([self.subset[e] for e in set(s)])

    def to_dict(self):
        return {"type": "restriction", "base": self.base.to_dict(), "subset": list(self.subset)}


class DirectSumMatroid(Matroid):
    """Parts laid out on consecutive id ranges in the given order."""

    def __init__(self, parts: Sequence[Matroid]):
        self.parts = tuple(parts)
        self.offsets = []
        off = 0
        for m in self.parts:
            self.offsets.append(off)
            off += m.n
        self.n = off
        self._part_of = []
        for i, m in enumerate(self.parts):
            self._part_of.extend([i] * m.n)

    def _split(self, s):
        pieces = [set() for _ in self.parts]
        for e in s:
            i = self._part_of[e]
            pieces[i].add(e - self.offsets[i])
        return pieces

    def _independent(self, s):
        return all(m._independent(frozenset(p)) for m, p in zip(self.parts, self._split(s)))

    def _rank(self, s):
        return sum(m._rank(p) for m, p in zip(self.parts, self._split(set(s))))

    def to_dict(self):
        return {"type": "direct_sum", "parts": [m.to_dict() for m in self.parts]}


# Module-level query surface.

def is_independent(m: Matroid, s: Iterable[int]) -> bool:
    return m.is_independent(s)


def rank(m: Matroid, s: Iterable[int]) -> int:
    return m.rank(s)


def in_span(m: Matroid, s: Iterable[int], e: int) -> bool:
    return m.in_span(s, e)


def dual_of(m: Matroid) -> Matroid:
    return DualMatroid(m)


def matroid_from_dict(d: dict) -> Matroid:
    """Build a matroid from its JSON description (``weights`` keys are ignored here)."""
    try:
        kind = d["type"]
        if kind == "uniform":
            return UniformMatroid(int(d["n"]), int(d["r"]))
        if kind == "partition":
            return PartitionMatroid(d["blocks"], d.get("caps"))
        if kind == "laminar":
            return LaminarMatroid(int(d["n"]), d["family"], d["caps"])
        if kind == "graphic":
            return GraphicMatroid(int(d["num_vertices"]), d["edges"])
        if kind == "transversal":
            return TransversalMatroid(d["adjacency"])
        if kind == "linear":
            return LinearMatroid(d["matrix"])
        if kind == "dual":
            return DualMatroid(matroid_from_dict(d["base"]))
        if kind == "restriction":
            return RestrictionMatroid(matroid_from_dict(d["base"]), d["subset"])
        if kind == "direct_sum":
            return DirectSumMatroid([matroid_from_dict(p) for p in d["parts"]])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matroid description: {exc}") from exc
    raise ValueError(f"unknown matroid type {kind!r}")
