"""Simple algebraicity, form matching, disjoint families and class membership."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .closure import INFINITY, _matching_for, closure_set, g_value, is_in_C0, is_strong, min_delta
from .structures import (Edge, ExtensionTemplate, FinStructure, StructureError, delta, edge_key,
                         find_embeddings, rel_qf_type, zeta_violation)


class SearchBudgetError(RuntimeError):
    """Raised when an exact search would exceed its configured budget."""


@dataclass(frozen=True)
class MsaWitness:
    base: FrozenSet[int]
    extension: FrozenSet[int]
    template: ExtensionTemplate


@dataclass(frozen=True)
class FamilyCount:
    base: Tuple[int, ...]
    template: ExtensionTemplate
    count: int
    witnesses: Tuple[FrozenSet[int], ...]


# -- simple algebraicity ----------------------------------------------------------


def is_simply_algebraic(S: FinStructure, A: Iterable[int], B: Iterable[int]) -> bool:
    A, B = frozenset(A), frozenset(B)
    if not B or A & B:
        return False
    T = S.restrict(A | B)
    if delta(T) != delta(T, A):
        return False
    if not is_strong(T, A):
        return False
    # zero sets over A are closed under union and intersection, so B is the
    # only non-empty one iff every point's closure over A is all of A ∪ B
    return all(closure_set(T, A | {b}) == A | B for b in sorted(B))


def msa_base(S: FinStructure, A: Iterable[int], B: Iterable[int]) -> Optional[MsaWitness]:
    """Unique minimal sub-base F ⊆ A over which B stays simply algebraic."""
    A, B = frozenset(A), frozenset(B)
    if not is_simply_algebraic(S, A, B):
        return None
    U = A | B
    F = frozenset(v for e in S.edges_within(U) if e[1] & B for v in e[1] if v in A)
    if not is_simply_algebraic(S, F, B):
        return None
    return MsaWitness(F, B, rel_qf_type(S, tuple(sorted(F)), tuple(sorted(B))))


def is_msa(S: FinStructure, A: Iterable[int], B: Iterable[int]) -> bool:
    w = msa_base(S, A, B)
    return w is not None and w.base == frozenset(A)


# -- form matching ----------------------------------------------------------------


def _base_type(S: FinStructure, A: Sequence[int]) -> FrozenSet[Tuple[int, FrozenSet[int]]]:
    pos = {v: i for i, v in enumerate(A)}
    return frozenset((s, frozenset(pos[v] for v in vs)) for s, vs in S.edges_within(A))


def matches_form(S: FinStructure, A: Sequence[int], B: Sequence[int], T: ExtensionTemplate) -> bool:
    """B over A is of the form of T: same base qf type, relative type contains T's."""
    A, B = tuple(A), tuple(B)
    if len(A) != len(T.base) or len(B) != len(T.ext):
        raise StructureError("tuple lengths differ from the template")
    if set(A) & set(B):
        return False
    base_idx, link_idx = T.index_edges()
    if _base_type(S, A) != base_idx:
        return False
    full = A + B
    for s, idx in link_idx:
        if not S.has_edge(s, (full[i] for i in idx)):
            return False
    return True


def _max_packing(sets: Sequence[FrozenSet[int]]) -> List[FrozenSet[int]]:
    """Exact maximum pairwise-disjoint subfamily by branch and bound."""
    sets = sorted(set(sets), key=lambda s: (len(s), sorted(s)))
    best: List[FrozenSet[int]] = []
    cur: List[FrozenSet[int]] = []

    def rec(i: int, used: FrozenSet[int]):
        nonlocal best
        if len(cur) > len(best):
            best = list(cur)
        if i == len(sets):
            return
        # bound: remaining candidates compatible with used
        rest = [s for s in sets[i:] if not (s & used)]
        if len(cur) + len(rest) <= len(best):
            return
        if not rest:
            return
        first = rest[0]
        j = sets.index(first, i)
        cur.append(first)
        rec(j + 1, used | first)
        cur.pop()
        rec(j + 1, used)

    rec(0, frozenset())
    return best


def template_copies(S: FinStructure, A: Sequence[int], T: ExtensionTemplate,
                    host: Optional[FinStructure] = None) -> List[FrozenSet[int]]:
    """Distinct extension sets B with B over A of the form of T."""
    A = tuple(A)
    H = S if host is None else host
    if _base_type(S, A) != T.index_edges()[0]:
        return []
    pattern = T.pattern()
    anchor = dict(zip(T.base, A))
    seen = set()
    out = []
    for emb in find_embeddings(pattern, H, anchor):
        img = frozenset(emb[v] for v in T.ext)
        if img not in seen:
            seen.add(img)
            out.append(img)
    return out


def max_disjoint_family(S: FinStructure, A: Sequence[int], T: ExtensionTemplate) -> FamilyCount:
    copies = template_copies(S, A, T)
    best = _max_packing(copies)
    best = sorted(best, key=lambda s: sorted(s))
    return FamilyCount(tuple(A), T, len(best), tuple(best))


# -- class membership ---------------------------------------------------------------


@dataclass
class ClassVerdict:
    accept: bool
    reason: str = "ok"
    certificate: Optional[dict] = None

    def to_dict(self) -> dict:
        return {"verdict": "ACCEPT" if self.accept else "REJECT", "reason": self.reason,
                "certificate": self.certificate}


@dataclass
class ClassCheckConfig:
    connected_budget: int = 200_000
    max_base: Optional[int] = None
    # vertex set of an induced substructure already known to be in the class;
    # bases inside it whose copies cannot reach outside it are skipped
    known_ok: Optional[FrozenSet[int]] = None


def _essential_vertices(S: FinStructure, F: FrozenSet[int]) -> FrozenSet[int]:
    """Vertices v outside F with delta(F ∪ {v}, S) <= delta(F, S).

    These are the vertices covered by every maximum matching of edges into
    the complement of F.
    """
    M = _matching_for(S, F)
    free = [v for v in S.vertices - F if v not in M.edge_of]
    freeable = set(free)
    frontier = list(free)
    inc = S.incidence
    index = {e: i for i, e in enumerate(M.edges)}
    while frontier:
        nxt = []
        for v in frontier:
            for e in inc[v]:
                ei = index[e]
                w = M.vert_of.get(ei)
                if w is not None and w not in freeable:
                    freeable.add(w)
                    nxt.append(w)
        frontier = nxt
    return frozenset(v for v in S.vertices - F if v in M.edge_of and v not in freeable)


def _candidate_region(S: FinStructure, F: FrozenSet[int]) -> FrozenSet[int]:
    if min_delta(S, F) == delta(S, F):
        return _essential_vertices(S, F)
    return S.vertices - F


def _components(S: FinStructure, F: FrozenSet[int], region: FrozenSet[int]):
    """Components of the hypergraph {e - F} on region, with 2-section adjacency."""
    allowed = F | region
    adj: Dict[int, set] = {v: set() for v in region}
    hyper: List[Tuple[Edge, FrozenSet[int]]] = []
    for e in S.edges:
        vs = e[1]
        if vs <= allowed and not vs <= F:
            inner = vs - F
            hyper.append((e, inner))
            for x in inner:
                adj[x] |= inner - {x}
    comp: Dict[int, int] = {}
    comps: List[FrozenSet[int]] = []
    for v in sorted(region):
        if v in comp:
            continue
        stack, part = [v], {v}
        comp[v] = len(comps)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in comp:
                    comp[y] = len(comps)
                    part.add(y)
                    stack.append(y)
        comps.append(frozenset(part))
    return adj, hyper, comp, comps


def _connected_subsets(adj: Dict[int, set], K: FrozenSet[int], cap: int, budget: List[int],
                       within: Optional[Callable[[int], FrozenSet[int]]] = None) -> Iterator[FrozenSet[int]]:
    """Every connected vertex subset of K with at most cap vertices, each exactly once.

    With ``within``, only sets C with C ⊆ within(u) for every u in C are
    produced; that condition is inherited by subsets, so whole branches are cut.
    """
    order = sorted(K)
    rank = {v: i for i, v in enumerate(order)}

    def extend(root: int, sub: FrozenSet[int], ext: List[int], nbhd: FrozenSet[int], allowed):
        budget[0] -= 1
        if budget[0] < 0:
            raise SearchBudgetError("connected-subset enumeration exceeded its budget")
        yield sub
        if len(sub) >= cap:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            fresh = [u for u in adj[w] if u in rank and rank[u] > rank[root] and u not in nbhd]
            if within is None:
                yield from extend(root, sub | {w}, ext + sorted(fresh), nbhd | adj[w], None)
                continue
            if allowed is not None and w not in allowed:
                continue
            Ww = within(w)
            if not sub <= Ww:
                continue
            yield from extend(root, sub | {w}, ext + sorted(fresh), nbhd | adj[w], allowed & Ww)

    for v in order:
        first = sorted(u for u in adj[v] if u in rank and rank[u] > rank[v])
        allowed = within(v) if within is not None else None
        if allowed is not None and v not in allowed:
            continue
        yield from extend(v, frozenset([v]), first, frozenset(adj[v]) | {v}, allowed)


def _pattern_msa(F: FrozenSet[int], C: FrozenSet[int], Ep: Sequence[Edge], n: int) -> bool:
    P = FinStructure(n, F | C, frozenset(Ep))
    if min_delta(P, F) != len(F):
        return False
    if delta(P) != len(F):
        return False
    return all(closure_set(P, F | {c}) == F | C for c in sorted(C))


def msa_patterns(S: FinStructure, F: FrozenSet[int], region: FrozenSet[int], adj, comps,
                 cap: int, budget: List[int], within=None) -> Iterator[Tuple[FrozenSet[int], Tuple[Edge, ...]]]:
    """(C, E') with C ⊆ region minimally simply algebraic over F via link edges E'."""
    for K in comps:
        for C in _connected_subsets(adj, K, cap, budget, within):
            U = F | C
            link = [e for e in S.edges_within(U) if e[1] & C]
            if len(link) < len(C):
                continue
            touched = frozenset(v for e in link for v in e[1] if v in F)
            if touched != F:
                continue
            link.sort(key=edge_key)
            choices = [tuple(link)] if len(link) == len(C) else combinations(link, len(C))
            for Ep in choices:
                if frozenset(v for e in Ep for v in e[1] if v in F) != F:
                    continue
                if _pattern_msa(F, C, Ep, S.n):
                    yield C, tuple(Ep)


def _degree_outside(S: FinStructure, v: int, F: FrozenSet[int]) -> int:
    return sum(1 for e in S.incidence[v] if not e[1] <= F)


def _candidate_bases(S: FinStructure, max_base: Optional[int]) -> Iterator[FrozenSet[int]]:
    yield frozenset()
    f = 1
    verts = sorted(S.vertices)
    while True:
        if max_base is not None and f > max_base:
            return
        hubs = [v for v in verts if S.degree(v) >= f + 4]
        if len(hubs) < f:
            return
        for F in combinations(hubs, f):
            F = frozenset(F)
            if all(_degree_outside(S, v, F) >= f + 4 for v in F):
                yield F
        f += 1


def in_class(S: FinStructure, snap, config: Optional[ClassCheckConfig] = None) -> ClassVerdict:
    """Decide membership in the class cut out by delta >= 0, zeta and the mu bounds."""
    from .mu import omega_code_value
    from .gadgets import omega_index_of

    config = config or ClassCheckConfig()
    if not is_in_C0(S):
        bad = closure_set(S, frozenset())
        return ClassVerdict(False, "delta", {"set": sorted(bad), "delta": delta(S, bad)})
    z = zeta_violation(S)
    if z is not None:
        (s1, v1), (s2, v2) = z
        return ClassVerdict(False, "zeta", {"edge": [s1, sorted(v1)], "sub_edge": [s2, sorted(v2)]})
    budget = [config.connected_budget]
    for F in _candidate_bases(S, config.max_base):
        f = len(F)
        need = f + 4
        region = _candidate_region(S, F)
        if not region:
            continue
        known = config.known_ok
        if known is not None and F <= known and region <= known \
                and not any(s > 0 and vs == F for s, vs in S.edges):
            continue
        adj, hyper, comp, comps = _components(S, F, region)
        # each copy sits in one component, uses a distinct edge at every base
        # point and has at least smin points (edges have arity >= 3)
        smin = 4 if not F else max(1, 3 - f)

        def room(K, F=F, smin=smin):
            size = len(K) // smin
            if not F:
                return size
            return min(size, min(sum(1 for e in S.incidence[v] if (e[1] - F) and (e[1] - F) <= K)
                                 for v in sorted(F)))

        rooms = [room(K) for K in comps]
        if sum(rooms) < need:
            continue
        comps = [K for K, r in zip(comps, rooms) if r > 0]
        cap = max(1, len(region) // need)
        host = S.restrict(F | region)
        Ft = tuple(sorted(F))
        covered = set()
        # a simply algebraic C over F lies inside cl(F ∪ {c}) for each of its points c
        wcache: Dict[int, FrozenSet[int]] = {}

        def within(u, F=F, wcache=wcache):
            if u not in wcache:
                wcache[u] = closure_set(S, F | {u}) - F
            return wcache[u]

        for C, Ep in msa_patterns(S, F, region, adj, comps, cap, budget, within):
            key = (C, frozenset(Ep))
            if key in covered:
                continue
            ext = tuple(sorted(C))
            T = ExtensionTemplate(S.restrict(F | C), Ft, ext, frozenset(Ep), frozenset(S.edges_within(F)))
            pattern = T.pattern()
            anchor = {v: v for v in Ft}
            images = {}
            for emb in find_embeddings(pattern, host, anchor):
                img = frozenset(emb[v] for v in ext)
                covered.add((img, frozenset((s, frozenset(emb[v] for v in vs)) for s, vs in Ep)))
                images.setdefault(img, None)
            if len(images) < need:
                continue
            fam = _max_packing(list(images))
            r = len(fam)
            if r < need:
                continue
            code = omega_index_of(Ft, ext, Ep, S.n)
            facts = [s - 1 for s, vs in S.edges if s > 0 and vs == F]
            m = INFINITY
            if code is not None:
                from .mu import unpair
                i = unpair(code)[0]
                if snap.j1(i) == code and i in facts:
                    m = g_value(S, F).value
            mu = omega_code_value(snap, f, code, facts, m)
            if r > mu:
                return ClassVerdict(False, "mu", {
                    "base": list(Ft), "template_ext": list(ext),
                    "template_edges": [[s, sorted(vs)] for s, vs in sorted(Ep, key=edge_key)],
                    "family": [sorted(x) for x in sorted(fam, key=sorted)], "r": r, "mu": mu,
                    "omega_code": code, "g": None if m is INFINITY else m})
    return ClassVerdict(True)
