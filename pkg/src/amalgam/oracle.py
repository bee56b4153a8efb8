"""Brute-force reference implementations.

Everything here works by plain subset enumeration and shares nothing with the
fast paths except the FinStructure container, so agreement between the two
is meaningful evidence.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .structures import FinStructure

DEFAULT_BOUND = 12
BOUND_ENV = "AMALGAM_EXHAUSTIVE_BOUND"


class ExhaustiveBoundError(RuntimeError):
    """Raised instead of approximating when an input exceeds the exhaustive bound."""


def exhaustive_bound() -> int:
    raw = os.environ.get(BOUND_ENV)
    return int(raw) if raw else DEFAULT_BOUND


def _guard(size: int, bound: Optional[int] = None) -> None:
    b = exhaustive_bound() if bound is None else bound
    if size > b:
        raise ExhaustiveBoundError(f"{size} vertices exceeds the exhaustive bound {b}")


def _arity(sym: int, n: int) -> int:
    return 3 if sym == 0 else n + 2


def _count(S: FinStructure, X: FrozenSet[int], below: Optional[int] = None) -> int:
    return sum(1 for s, vs in S.edges if vs <= X and (below is None or s < below))


def _delta(S: FinStructure, X: Iterable[int], below: Optional[int] = None) -> int:
    X = frozenset(X)
    return len(X) - _count(S, X, below)


def _supersets(S: FinStructure, A: FrozenSet[int], max_extra: Optional[int] = None) -> Iterator[FrozenSet[int]]:
    rest = sorted(S.vertices - A)
    top = len(rest) if max_extra is None else min(max_extra, len(rest))
    for k in range(top + 1):
        for extra in combinations(rest, k):
            yield A | frozenset(extra)


def _subsets(X: Iterable[int]) -> Iterator[FrozenSet[int]]:
    X = sorted(X)
    for k in range(len(X) + 1):
        for c in combinations(X, k):
            yield frozenset(c)


# -- closure and strength -------------------------------------------------------


def brute_min_delta(S: FinStructure, A: Iterable[int], bound: Optional[int] = None) -> Tuple[int, List[FrozenSet[int]]]:
    """Least delta over supersets of A, with every superset attaining it."""
    _guard(len(S.vertices), bound)
    A = frozenset(A)
    best = None
    mins: List[FrozenSet[int]] = []
    for X in _supersets(S, A):
        d = _delta(S, X)
        if best is None or d < best:
            best, mins = d, [X]
        elif d == best:
            mins.append(X)
    return best, mins


def brute_is_strong(S: FinStructure, A: Iterable[int], bound: Optional[int] = None) -> bool:
    A = frozenset(A)
    return brute_min_delta(S, A, bound)[0] == _delta(S, A)


def brute_closure(S: FinStructure, A: Iterable[int], bound: Optional[int] = None) -> FrozenSet[int]:
    """Smallest strong superset of A, found as the unique inclusion-minimal minimiser."""
    best, mins = brute_min_delta(S, A, bound)
    minimal = [X for X in mins if not any(Y < X for Y in mins)]
    if len(minimal) != 1:
        raise AssertionError(f"closure not unique: {minimal}")
    return minimal[0]


def brute_g(S: FinStructure, A: Iterable[int], bound: Optional[int] = None):
    """g_S(A) by direct search; returns (value or None for infinity, witness)."""
    _guard(len(S.vertices), bound)
    A = frozenset(A)
    if brute_is_strong(S, A, bound):
        return None, None
    maxsym = max((s for s, _ in S.edges), default=0)
    for m in range(0, len(S.vertices) - len(A) + maxsym + 2):
        dA = _delta(S, A, m)
        for X in _supersets(S, A, m):
            if _delta(S, X, m) < dA:
                return m, X
    return None, None


def brute_c0(S: FinStructure, bound: Optional[int] = None) -> bool:
    _guard(len(S.vertices), bound)
    return all(_delta(S, X) >= 0 for X in _subsets(S.vertices))


def brute_zeta(S: FinStructure) -> bool:
    return not any(s != t and ws <= vs for s, vs in S.edges for t, ws in S.edges)


# -- simple algebraicity and packings ---------------------------------------------


def brute_simply_algebraic(S: FinStructure, A: Iterable[int], B: Iterable[int]) -> bool:
    A, B = frozenset(A), frozenset(B)
    if not B or A & B:
        return False
    U = A | B
    T = S.restrict(U)
    if not brute_is_strong(T, A):
        return False
    dA = _delta(S, A)
    if _delta(S, U) - dA != 0:
        return False
    for B0 in _subsets(B):
        if B0 and B0 != B and _delta(S, A | B0) - dA == 0:
            return False
    return True


def brute_msa(S: FinStructure, A: Iterable[int], B: Iterable[int]) -> bool:
    A, B = frozenset(A), frozenset(B)
    if not brute_simply_algebraic(S, A, B):
        return False
    return not any(brute_simply_algebraic(S, A0, B) for A0 in _subsets(A) if A0 != A)


def brute_max_packing(sets: Sequence[Iterable[int]]) -> int:
    """Largest number of pairwise disjoint sets, by trying every subfamily."""
    sets = [frozenset(s) for s in sets]
    best = 0
    for k in range(len(sets), 0, -1):
        if k <= best:
            break
        for fam in combinations(sets, k):
            union = frozenset().union(*fam)
            if len(union) == sum(len(s) for s in fam):
                return k
    return best


# -- canonical forms and enumeration ----------------------------------------------


def canonical_form(S: FinStructure) -> Tuple[int, Tuple[Tuple[int, Tuple[int, ...]], ...]]:
    """Isomorphism invariant: (size, lexicographically least relabelled edge list)."""
    verts = sorted(S.vertices)
    color = {v: tuple(sorted(s for s, vs in S.edges if v in vs)) for v in verts}
    while True:
        sig = {}
        for v in verts:
            around = sorted((s, tuple(sorted(color[u] for u in vs if u != v))) for s, vs in S.edges if v in vs)
            sig[v] = (color[v], tuple(around))
        ranks = {c: i for i, c in enumerate(sorted(set(sig.values())))}
        new = {v: ranks[sig[v]] for v in verts}
        old_classes = len(set(color.values()))
        color = {v: (new[v],) for v in verts}
        if len(set(new.values())) == old_classes:
            break
    cells: Dict[int, List[int]] = {}
    for v in verts:
        cells.setdefault(color[v][0], []).append(v)
    ordered = [cells[c] for c in sorted(cells)]
    isolated = {v for v in verts if not any(v in vs for _, vs in S.edges)}
    choices = []
    for cell in ordered:
        if all(v in isolated for v in cell):
            choices.append([tuple(cell)])
        else:
            choices.append(list(permutations(cell)))
    best = None
    for pick in product(*choices):
        order = [v for part in pick for v in part]
        pos = {v: i for i, v in enumerate(order)}
        key = tuple(sorted((s, tuple(sorted(pos[v] for v in vs))) for s, vs in S.edges))
        if best is None or key < best:
            best = key
    return (len(verts), best)


def from_canonical(n: int, form) -> FinStructure:
    size, edges = form
    return FinStructure.build(n, range(size), [(s, vs) for s, vs in edges])


@dataclass(frozen=True)
class EnumerationSpec:
    vertices: int
    symbols: Tuple[int, ...] = (0,)
    n: int = 1
    require_zeta: bool = False
    require_c0: bool = False
    class_filter: Optional[Callable[[FinStructure], bool]] = field(default=None, compare=False)
    max_edges: Optional[int] = None


def enumerate_structures(spec: EnumerationSpec, bound: Optional[int] = None) -> Iterator[FinStructure]:
    """All isomorphism classes on exactly ``spec.vertices`` vertices, canonical labels.

    Classes are grown one edge at a time; zeta and C_0 are closed under edge
    deletion, so they prune the search.  ``class_filter`` is applied on output only.
    """
    _guard(spec.vertices, bound)
    n, v = spec.n, spec.vertices
    slots = [(s, frozenset(c)) for s in spec.symbols for c in combinations(range(v), _arity(s, n)) if _arity(s, n) <= v]
    level = {canonical_form(FinStructure(n, frozenset(range(v)))): None}
    k = 0
    while level:
        nxt = {}
        for form in sorted(level):
            S = from_canonical(n, form)
            if spec.class_filter is None or spec.class_filter(S):
                yield S
            if spec.max_edges is not None and k >= spec.max_edges:
                continue
            for e in slots:
                if e in S.edges:
                    continue
                T = FinStructure(n, S.vertices, S.edges | {e})
                if spec.require_zeta and not brute_zeta(T):
                    continue
                if spec.require_c0 and not brute_c0(T, bound):
                    continue
                f = canonical_form(T)
                if f not in nxt:
                    nxt[f] = None
        level = nxt
        k += 1


def enumerate_up_to(max_vertices: int, **kw) -> Iterator[FinStructure]:
    for v in range(max_vertices + 1):
        yield from enumerate_structures(EnumerationSpec(vertices=v, **kw))


def brute_isomorphic(S: FinStructure, T: FinStructure) -> bool:
    if len(S.vertices) != len(T.vertices) or len(S.edges) != len(T.edges):
        return False
    sv, tv = sorted(S.vertices), sorted(T.vertices)
    for perm in permutations(tv):
        m = dict(zip(sv, perm))
        if all((s, frozenset(m[x] for x in vs)) in T.edges for s, vs in S.edges):
            return True
    return False


# -- D_t from its definition ------------------------------------------------------


def oracle_D(k: int, t: int, n: int = 1):
    """D_t with a_1..a_k = 1..k, g = k+1, h = k+2 and b_1..b_2t = k+3..k+2+2t."""
    a = lambda i: ((i - 1) % k) + 1
    g, h = k + 1, k + 2
    b = lambda i: k + 2 + i
    edges = [(0, (b(i), a(i), b(i + 1))) for i in range(1, t + 1)]
    edges += [(0, (b(i), a(i), b(i + 1))) for i in range(t + 1, 2 * t)]
    edges.append((0, (b(2 * t), g, b(1))))
    edges.append((0, (b(1), h, b(t + 1))))
    A = frozenset(range(1, k + 3))
    B1 = frozenset(b(i) for i in range(1, t + 2))
    B2 = frozenset([b(i) for i in range(t + 1, 2 * t + 1)] + [b(1)])
    S = FinStructure.build(n, A | B1 | B2, edges)
    return S, A, B1 | B2, B1, B2, g, h


# -- lemma verifiers ----------------------------------------------------------------


@dataclass
class LemmaResult:
    lemma: str
    passed: bool
    checked: int
    counterexample: Optional[dict] = None

    def to_dict(self) -> dict:
        return {"lemma": self.lemma, "passed": self.passed, "checked": self.checked,
                "counterexample": self.counterexample}


def _pool(params: dict) -> Iterator[FinStructure]:
    v = int(params.get("v", 4))
    symbols = tuple(params.get("symbols", (0,)))
    yield from enumerate_up_to(v, symbols=symbols, n=int(params.get("n", 1)),
                               require_c0=bool(params.get("c0", False)))


def _verify_submodularity(params: dict) -> LemmaResult:
    checked = 0
    for S in _pool(params):
        subs = list(_subsets(S.vertices))
        for A in subs:
            for B in subs:
                lhs = _delta(S, A | B)
                rhs = _delta(S, A) + _delta(S, B) - _delta(S, A & B)
                cross = any(vs <= A | B and not vs <= A and not vs <= B for _, vs in S.edges)
                checked += 1
                if lhs > rhs or (lhs == rhs) == cross:
                    return LemmaResult("submodularity", False, checked,
                                       {"structure": S.to_dict(), "A": sorted(A), "B": sorted(B)})
    return LemmaResult("submodularity", True, checked)


def _verify_closure(params: dict) -> LemmaResult:
    checked = 0
    for S in _pool(dict(params, c0=True)):
        for A in _subsets(S.vertices):
            best, mins = brute_min_delta(S, A)
            minimal = [X for X in mins if not any(Y < X for Y in mins)]
            checked += 1
            if len(minimal) != 1 or not brute_is_strong(S, minimal[0]):
                return LemmaResult("closure", False, checked, {"structure": S.to_dict(), "A": sorted(A)})
    return LemmaResult("closure", True, checked)


def _verify_transitivity(params: dict) -> LemmaResult:
    checked = 0
    for S in _pool(params):
        strong = {X for X in _subsets(S.vertices) if brute_is_strong(S, X)}
        for B in strong:
            T = S.restrict(B)
            for A in _subsets(B):
                if brute_is_strong(T, A):
                    checked += 1
                    if A not in strong:
                        return LemmaResult("transitivity", False, checked,
                                           {"structure": S.to_dict(), "A": sorted(A), "B": sorted(B)})
    return LemmaResult("transitivity", True, checked)


def _verify_g_invariance(params: dict) -> LemmaResult:
    checked = 0
    for S in _pool(params):
        for B in _subsets(S.vertices):
            if not brute_is_strong(S, B):
                continue
            T = S.restrict(B)
            for A in _subsets(B):
                checked += 1
                if brute_g(T, A)[0] != brute_g(S, A)[0]:
                    return LemmaResult("g-invariance", False, checked,
                                       {"structure": S.to_dict(), "A": sorted(A), "B": sorted(B)})
    return LemmaResult("g-invariance", True, checked)


def _verify_disjointness(params: dict) -> LemmaResult:
    checked = 0
    for S in _pool(dict(params, c0=True)):
        for X in _subsets(S.vertices):
            if not brute_is_strong(S, X):
                continue
            rest = S.vertices - X
            sa = [Y for Y in _subsets(rest) if brute_simply_algebraic(S, X, Y)]
            for Y, Z in combinations(sa, 2):
                checked += 1
                if Y & Z:
                    return LemmaResult("disjointness", False, checked,
                                       {"structure": S.to_dict(), "X": sorted(X), "Y": sorted(Y), "Z": sorted(Z)})
    return LemmaResult("disjointness", True, checked)


def verify_possible_zeros(S: FinStructure, A, B, B1, B2, g, h) -> LemmaResult:
    """Exhaustive check of the D_t trichotomy and its strict-drop clause."""
    A, B, B1, B2 = map(frozenset, (A, B, B1, B2))
    checked = 0
    for A0 in _subsets(A):
        dA0 = _delta(S, A0)
        for B0 in _subsets(B):
            if not B0:
                continue
            checked += 1
            d = _delta(S, A0 | B0) - dA0
            if d > 0:
                continue
            case1 = A0 >= A - {h} and B0 == B
            case2 = A0 >= A - {g} and B0 >= B1
            case3 = A0 == A and B0 >= B2
            ok = case1 or case2 or case3
            if d < 0:
                ok = ok and A0 == A and B0 == B
            if not ok:
                return LemmaResult("possible-zeros", False, checked,
                                   {"A0": sorted(A0), "B0": sorted(B0), "delta": d})
    return LemmaResult("possible-zeros", True, checked)


def _verify_possible_zeros(params: dict) -> LemmaResult:
    k, t = int(params["k"]), int(params["t"])
    S, A, B, B1, B2, g, h = oracle_D(k, t)
    drop = params.get("drop_edge")
    if drop is not None:
        S = S.without_edges([S.sorted_edges()[int(drop)]])
    add = params.get("add_edge")
    if add is not None:
        S = S.with_edges([(0, frozenset(int(v) for v in add))])
    return verify_possible_zeros(S, A, B, B1, B2, g, h)


LEMMAS: Dict[str, Callable[[dict], LemmaResult]] = {
    "submodularity": _verify_submodularity,
    "closure": _verify_closure,
    "transitivity": _verify_transitivity,
    "g-invariance": _verify_g_invariance,
    "disjointness": _verify_disjointness,
    "possible-zeros": _verify_possible_zeros,
}


def verify_lemma(lemma_id: str, params: Optional[dict] = None) -> LemmaResult:
    if lemma_id not in LEMMAS:
        raise KeyError(f"unknown lemma id {lemma_id!r}; known: {sorted(LEMMAS)}")
    return LEMMAS[lemma_id](dict(params or {}))


# -- class membership by exhaustion ----------------------------------------------


def _cantor(i: int, j: int) -> int:
    return (i + j) * (i + j + 1) // 2 + j


def _cantor_column(code: int) -> int:
    for w in range(code + 1):
        if w * (w + 1) // 2 <= code < (w + 1) * (w + 2) // 2:
            return w - (code - w * (w + 1) // 2)
    raise ValueError(code)


def oracle_D_hat(k: int, t: int, n: int = 1):
    """D-hat with a_1..a_k = 1..k, g = k+1 and b_1..b_2t = k+2..k+1+2t."""
    a = lambda i: ((i - 1) % k) + 1
    g = k + 1
    b = lambda i: k + 1 + i
    edges = [(0, (b(i), a(i), b(i + 1))) for i in range(1, 2 * t)]
    edges.append((0, (b(2 * t), g, b(1))))
    A = frozenset(range(1, k + 2))
    B = frozenset(b(i) for i in range(1, 2 * t + 1))
    return FinStructure.build(n, A | B, edges), A, B


def brute_omega_index(F: FrozenSet[int], C: FrozenSet[int], Ep, n: int) -> Optional[int]:
    """c if (F, C, E') is isomorphic over the base to the Omega_c pattern."""
    if len(F) != n + 2 or len(C) % 2 or len(C) // 2 < n + 3:
        return None
    t = len(C) // 2
    D, A, B = oracle_D_hat(n + 1, t, n)
    Ep = {(s, frozenset(vs)) for s, vs in Ep}
    if len(Ep) != len(D.edges):
        return None
    for fa in permutations(sorted(F)):
        m0 = dict(zip(sorted(A), fa))
        # backtrack over the b's following the cycle
        bs = sorted(B)

        def rec(idx, m, used):
            if idx == len(bs):
                return all((s, frozenset(m[v] for v in vs)) in Ep for s, vs in D.edges)
            for c in sorted(C - used):
                m[bs[idx]] = c
                ok = all((s, frozenset(m[v] for v in vs)) in Ep for s, vs in D.edges if vs <= m.keys())
                if ok and rec(idx + 1, m, used | {c}):
                    return True
                del m[bs[idx]]
            return False

        if rec(0, dict(m0), frozenset()):
            return t - n - 3
    return None


def brute_mu(columns: Dict[int, Sequence[int]], F: FrozenSet[int], code: Optional[int],
             facts: Iterable[int], m: Optional[int]) -> int:
    """The mu schedule read straight off the column lists; m None means infinity."""
    base = len(F)
    if code is None:
        return base + 3
    i = _cantor_column(code)
    col = list(columns.get(i, ()))
    facts = set(facts)
    if len(col) >= 2:
        j0, j1 = col[-2], col[-1]
        if code == j0 and i in facts:
            return base + 4
        if code == j1 and i in facts and (m is None or m >= j1):
            return base + 4
    if code in col[:-2]:
        return base + 4
    return base + 3


def brute_in_class(S: FinStructure, columns: Dict[int, Sequence[int]], bound: int = 8):
    """(accept, reason) by enumerating every base, extension and link-edge choice."""
    _guard(len(S.vertices), bound)
    if not brute_c0(S, bound):
        return False, "delta"
    if not brute_zeta(S):
        return False, "zeta"
    V = sorted(S.vertices)
    for F in _subsets(V):
        rest = sorted(S.vertices - F)
        for C in _subsets(rest):
            if not C:
                continue
            link = sorted((e for e in S.edges if e[1] <= F | C and e[1] & C), key=lambda e: (e[0], sorted(e[1])))
            for Ep in combinations(link, len(C)):
                P = FinStructure(S.n, F | C, frozenset(Ep))
                if not brute_msa(P, F, C):
                    continue
                # all copies over F with the same link pattern
                Cs = sorted(C)
                copies = set()
                for C2 in combinations(rest, len(C)):
                    for perm in permutations(C2):
                        m = dict(zip(Cs, perm))
                        m.update({v: v for v in F})
                        if all((s, frozenset(m[v] for v in vs)) in S.edges for s, vs in Ep):
                            copies.add(frozenset(C2))
                            break
                r = brute_max_packing(list(copies))
                if r < len(F) + 4:
                    continue
                code = brute_omega_index(F, C, Ep, S.n)
                facts = [s - 1 for s, vs in S.edges if s > 0 and vs == F]
                g = brute_g(S, F, bound)[0]
                if r > brute_mu(columns, F, code, facts, g):
                    return False, "mu"
    return True, "ok"
