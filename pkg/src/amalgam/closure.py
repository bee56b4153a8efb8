"""Strength, self-sufficient closure, the g-function, dimension and flatness.

The minimum of delta over supersets of A is computed through a bipartite
matching between edges and vertices outside A: the largest surplus of edges
over new vertices equals the number of edges left unmatched by a maximum
matching, and the edges reachable from unmatched edges by alternating paths
span the smallest minimising superset.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .structures import Edge, FinStructure, StructureError, delta


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INFINITY"

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


@dataclass(frozen=True)
class ClosureReport:
    closure: FrozenSet[int]
    delta_value: int
    witness_chain: Tuple[FrozenSet[int], ...] = ()


@dataclass(frozen=True)
class GValue:
    value: object  # int or INFINITY
    witness: Optional[Tuple[FrozenSet[int], int]] = None

    @property
    def finite(self) -> bool:
        return self.value is not INFINITY

    def to_dict(self) -> dict:
        d = {"value": "INFINITY" if self.value is INFINITY else self.value}
        if self.witness is not None:
            d["witness"] = {"X": sorted(self.witness[0]), "m": self.witness[1]}
        return d


# -- matching core --------------------------------------------------------------


class _Matching:
    """Maximum matching of edges into vertices avoiding a base set."""

    def __init__(self, S: FinStructure, edges: Sequence[Edge], excluded: FrozenSet[int],
                 start: Optional[Dict[int, int]] = None):
        self.S = S
        self.edges = edges
        self.excluded = excluded
        self.nbrs = [sorted(vs - excluded) for _, vs in edges]
        self.vert_of: Dict[int, int] = {}  # edge index -> vertex
        self.edge_of: Dict[int, int] = {}  # vertex -> edge index
        if start:
            for ei, v in start.items():
                if v not in excluded:
                    self.vert_of[ei] = v
                    self.edge_of[v] = ei

    def augment(self, ei: int) -> bool:
        # iterative DFS for an augmenting path starting at edge ei
        seen = set()
        stack = [(ei, iter(self.nbrs[ei]))]
        parent: Dict[int, Tuple[int, int]] = {}
        while stack:
            e, it = stack[-1]
            advanced = False
            for v in it:
                if v in seen:
                    continue
                seen.add(v)
                owner = self.edge_of.get(v)
                if owner is None:
                    # flip along the stack
                    cur_e, cur_v = e, v
                    while True:
                        prev = self.vert_of.get(cur_e)
                        self.vert_of[cur_e] = cur_v
                        self.edge_of[cur_v] = cur_e
                        if cur_e == ei:
                            break
                        cur_v = prev
                        cur_e = parent[cur_e][0]
                    return True
                parent[owner] = (e, v)
                stack.append((owner, iter(self.nbrs[owner])))
                advanced = True
                break
            if not advanced:
                stack.pop()
        return False

    def run(self, indices: Iterable[int]) -> None:
        for ei in indices:
            if ei not in self.vert_of:
                self.augment(ei)

    def unmatched(self) -> List[int]:
        return [i for i in range(len(self.edges)) if i not in self.vert_of]




def _base_matching(S: FinStructure) -> Tuple[List[Edge], Dict[Edge, int], Dict[int, int]]:
    cached = S.__dict__.get("_base_matching")
    if cached is not None:
        return cached
    edges = S.sorted_edges()
    M = _Matching(S, edges, frozenset())
    M.run(range(len(edges)))
    index = {e: i for i, e in enumerate(edges)}
    result = (edges, index, dict(M.vert_of))
    S.__dict__["_base_matching"] = result
    return result


def _matching_for(S: FinStructure, A: FrozenSet[int]) -> _Matching:
    edges, index, base = _base_matching(S)
    M = _Matching(S, edges, A, base)
    freed = sorted(i for i, v in base.items() if v in A)
    M.run(freed)
    return M


def _closure_data(S: FinStructure, A: FrozenSet[int]) -> Tuple[FrozenSet[int], int, List[FrozenSet[int]]]:
    M = _matching_for(S, A)
    free = M.unmatched()
    reached_e = set(free)
    reached_v = set()
    frontier = list(free)
    chain = [A]
    while frontier:
        nxt = []
        for ei in frontier:
            for v in M.nbrs[ei]:
                if v not in reached_v:
                    reached_v.add(v)
                    owner = M.edge_of.get(v)
                    if owner is not None and owner not in reached_e:
                        reached_e.add(owner)
                        nxt.append(owner)
        frontier = nxt
        if nxt:
            chain.append(A | frozenset(reached_v))
    closure = A | frozenset(reached_v)
    if chain[-1] != closure:
        chain.append(closure)
    return closure, len(A) - len(free), chain


def _as_set(S: FinStructure, A: Iterable[int]) -> FrozenSet[int]:
    A = frozenset(A)
    extra = A - S.vertices
    if extra:
        raise StructureError(f"vertices {sorted(extra)} not in structure")
    return A


def min_delta(S: FinStructure, A: Iterable[int]) -> int:
    """delta(A, S): the least delta of a superset of A inside S."""
    A = _as_set(S, A)
    M = _matching_for(S, A)
    return len(A) - len(M.unmatched())


def is_strong(S: FinStructure, A: Iterable[int]) -> bool:
    A = _as_set(S, A)
    return min_delta(S, A) == delta(S, A)


def ss_closure(S: FinStructure, A: Iterable[int]) -> ClosureReport:
    A = _as_set(S, A)
    closure, value, chain = _closure_data(S, A)
    return ClosureReport(closure, value, tuple(chain))


def closure_set(S: FinStructure, A: Iterable[int]) -> FrozenSet[int]:
    return ss_closure(S, A).closure


def dim(S: FinStructure, A: Iterable[int]) -> int:
    return min_delta(S, A)


def is_in_C0(S: FinStructure) -> bool:
    """delta(X) >= 0 for every X (the empty set is strong)."""
    edges, _, base = _base_matching(S)
    return len(base) == len(edges)


# -- g ------------------------------------------------------------------------


def g_bound(S: FinStructure, A: Iterable[int]) -> int:
    maxsym = max(S.symbols_used) if S.edges else 0
    return len(S.vertices) - len(frozenset(A)) + maxsym + 1


def _smallest_violator(S: FinStructure, A: FrozenSet[int], size_cap: int) -> Optional[FrozenSet[int]]:
    """Smallest X with A ⊆ X, delta(X) < delta(A), |X - A| <= size_cap, or None.

    Any violator meets the closure of A in a violator, so only subsets of the
    closure are searched.
    """
    closure, value, _ = _closure_data(S, A)
    dA = delta(S, A)
    if value >= dA:
        return None
    pool = sorted(closure - A)
    if len(pool) <= size_cap:
        best = closure
        size_cap = len(pool) - 1
    else:
        best = None
    # useful new vertices lie on edges that meet the pool and stay inside the closure
    for k in range(1, size_cap + 1):
        for extra in combinations(pool, k):
            X = A | frozenset(extra)
            if delta(S, X) < dA:
                return X
    return best


def g_value(S: FinStructure, A: Iterable[int], limit: Optional[int] = None) -> GValue:
    """g_S(A): least m with a witness of non-strength of size |A|+m in symbols < m.

    With ``limit`` set, only m < limit is searched and INFINITY stands for
    "at least limit"; callers use this when they only compare g to a threshold.
    """
    A = _as_set(S, A)
    if is_strong(S, A):
        return GValue(INFINITY)
    top = g_bound(S, A)
    if limit is not None:
        top = min(top, limit - 1)
    symbols = sorted(S.symbols_used)
    for m in range(1, top + 1):
        R = S.reduct(m) if symbols and symbols[-1] >= m else S
        X = _smallest_violator(R, A, m)
        if X is not None:
            return GValue(m, (X, m))
    return GValue(INFINITY)


def g_compare_below(S: FinStructure, A: Iterable[int], threshold: int) -> bool:
    """True iff g_S(A) < threshold."""
    return g_value(S, A, limit=threshold).finite


# -- flatness -------------------------------------------------------------------


def flatness_defect(S: FinStructure, E: Sequence[Iterable[int]], convention: str = "closure") -> int:
    """Alternating sum of dimensions over intersections of a family of closed sets.

    ``convention`` fixes the empty-index term: "closure" uses the closure of the
    union, "ambient" uses the whole structure.
    """
    fam = [_as_set(S, X) for X in E]
    for X in fam:
        if closure_set(S, X) != X:
            raise StructureError(f"set {sorted(X)} is not closed")
    total = 0
    I = range(len(fam))
    for r in range(len(fam) + 1):
        for s in combinations(I, r):
            if not s:
                if convention == "closure":
                    term = dim(S, frozenset().union(*fam))
                elif convention == "ambient":
                    term = dim(S, S.vertices)
                else:
                    raise ValueError(f"unknown convention {convention!r}")
            else:
                inter = frozenset.intersection(*(fam[i] for i in s))
                term = dim(S, inter)
            total += (-1) ** r * term
    return total
