"""Algebraic and strong amalgamation over the class."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .closure import INFINITY, _smallest_violator, closure_set, g_value, is_strong
from .extensions import _max_packing, in_class, is_simply_algebraic, msa_base, template_copies
from .gadgets import omega
from .mu import MuSnapshot, mu_eval
from .structures import FinStructure, StructureError, find_embeddings, free_join

MAX_FAMILY = "MAX_FAMILY"
NEGATIVE_Y = "NEGATIVE_Y"
G_DROP = "G_DROP"


@dataclass
class AmalgamOutcome:
    result: Optional[FinStructure] = None
    exception: Optional[str] = None
    certificate: Optional[dict] = None
    embedding: Optional[Dict[int, int]] = None


@dataclass(frozen=True)
class Step:
    before: FrozenSet[int]
    after: FrozenSet[int]
    kind: str  # "free" or "algebraic"

    @property
    def new(self) -> FrozenSet[int]:
        return self.after - self.before


def decompose_strong(A: Sequence[int], B: FinStructure) -> List[Step]:
    """Chain A = C_0 <= C_1 <= ... <= B of minimal strong steps.

    Each step adds the smallest closure cl(C ∪ {x}) (ties broken by sorted
    vertex order), so no strong set sits strictly inside a step.
    """
    A = frozenset(A)
    if not is_strong(B, A):
        raise StructureError("base is not strong in the target")
    steps = []
    C = A
    while C != B.vertices:
        best = None
        for x in sorted(B.vertices - C):
            cand = closure_set(B, C | {x})
            key = (len(cand), sorted(cand - C))
            if best is None or key < best[0]:
                best = (key, cand)
        nxt = best[1]
        new = nxt - C
        free = len(new) == 1 and not any(e[1] & new for e in B.edges_within(nxt))
        kind = "free" if free else "algebraic"
        if not free:
            T = B.restrict(nxt)
            if not is_simply_algebraic(T, C, new):
                raise AssertionError("minimal strong step is neither free nor simply algebraic")
        steps.append(Step(C, nxt, kind))
        C = nxt
    return steps


def _symbols_of_link(B1: FinStructure, A: FrozenSet[int]) -> FrozenSet[int]:
    return frozenset(s for s, vs in B1.edges if vs & (B1.vertices - A))


def _reduct_to(S: FinStructure, symbols: FrozenSet[int]) -> FinStructure:
    return FinStructure(S.n, S.vertices, frozenset(e for e in S.edges if e[0] in symbols))


def algebraic_amalgamate(A: Sequence[int], B1: FinStructure, B2: FinStructure, snap: MuSnapshot,
                         verify: bool = False) -> AmalgamOutcome:
    """Free join of B1 and B2 over A, or the exception case that blocks it."""
    A = frozenset(A)
    if B1.vertices & B2.vertices != A:
        raise StructureError("B1 and B2 must meet exactly in A")
    ext = B1.vertices - A
    if not ext:
        return AmalgamOutcome(result=B2, embedding={v: v for v in B1.vertices})
    if not is_simply_algebraic(B1, A, ext):
        raise StructureError("B1 - A is not simply algebraic over A")
    E = free_join(B1, B2, A)

    # (2) a small negative set over A in B2, in the language of B1/A
    L = _symbols_of_link(B1, A)
    R2 = _reduct_to(B2, L)
    Y = _smallest_violator(R2, A, len(ext))
    if Y is not None:
        return AmalgamOutcome(exception=NEGATIVE_Y, certificate={"Y": sorted(Y - A), "symbols": sorted(L)})

    # (3) g drops on an R_i-tuple of B1 that carries the Omega_{j1} form
    for s, F in sorted(B1.edges, key=lambda e: (e[0], sorted(e[1]))):
        if s == 0:
            continue
        i = s - 1
        j1 = snap.j1(i)
        if j1 is None:
            continue
        g1 = g_value(B1, F)
        if g1.value is not INFINITY and g1.value < j1:
            continue
        gE = g_value(E, F, limit=j1)
        if not gE.finite:
            continue
        if _has_omega_copy(B1, F, j1):
            return AmalgamOutcome(exception=G_DROP, certificate={
                "F": sorted(F), "column": i, "code": j1, "g_B1": g1.to_dict()["value"], "g_E": gE.value})

    # (1) the family over the msa base is already saturated in B2
    w = msa_base(B1, A, ext)
    if w is not None:
        F = tuple(sorted(w.base))
        T = w.template
        copies = template_copies(B2, F, T)
        fam = _max_packing(copies)
        if fam:
            gv = g_value(B2, F).value
            mu = mu_eval(snap, B2, F, T, gv)
            if len(fam) >= mu:
                return AmalgamOutcome(exception=MAX_FAMILY, certificate={
                    "F": list(F), "family": [sorted(c) for c in sorted(fam, key=sorted)],
                    "copies": sorted(sorted(c) for c in copies), "mu": mu})
    if verify:
        v = in_class(E, snap)
        if not v.accept:
            raise AssertionError(f"free join left the class without an exception case: {v.to_dict()}")
    return AmalgamOutcome(result=E, embedding={v: v for v in B1.vertices})


def _has_omega_copy(S: FinStructure, F: FrozenSet[int], code: int) -> bool:
    """Some extension inside S over F is of the form of Omega_code (any base order)."""
    T = omega(code, S.n)
    if len(S.vertices) - len(F) < len(T.ext):
        return False
    for order in permutations(sorted(F)):
        if template_copies(S, order, T):
            return True
    return False


def strong_amalgamate(A: Sequence[int], B1: FinStructure, B2: FinStructure, snap: MuSnapshot,
                      trace: Optional[List[dict]] = None) -> Tuple[FinStructure, Dict[int, int]]:
    """D with B2 <= D and an embedding g of B1 over A with g(B1) <= D."""
    A = frozenset(A)
    if not A <= B1.vertices or not A <= B2.vertices:
        raise StructureError("A must lie in both structures")
    if B1.restrict(A) != B2.restrict(A):
        raise StructureError("B1 and B2 disagree on A")
    if not is_strong(B1, A) or not is_strong(B2, A):
        raise StructureError("A must be strong in B1 and in B2")
    steps = decompose_strong(A, B1)
    D = B2
    g: Dict[int, int] = {v: v for v in A}
    for st in steps:
        base_img = frozenset(g[v] for v in st.before)
        piece = B1.restrict(st.after)
        nxt = D.next_id
        mapping = dict((v, g[v]) for v in st.before)
        for j, v in enumerate(sorted(st.new)):
            mapping[v] = nxt + j
        P = piece.relabel(mapping)
        if st.kind == "free":
            D = free_join(P, D, base_img)
            g.update({v: mapping[v] for v in st.new})
            if trace is not None:
                trace.append({"step": "free", "new": [mapping[v] for v in sorted(st.new)]})
            continue
        out = algebraic_amalgamate(base_img, P, D, snap)
        if out.exception is None:
            D = out.result
            g.update({v: mapping[v] for v in st.new})
            if trace is not None:
                trace.append({"step": "join", "new": [mapping[v] for v in sorted(st.new)]})
            continue
        if out.exception != MAX_FAMILY:
            raise AssertionError(f"strong amalgamation hit {out.exception} over a strong base")
        reuse = _reuse_copy(P, base_img, D, [mapping[v] for v in sorted(st.new)])
        if reuse is None:
            raise AssertionError("no reusable copy found although the family is saturated")
        g.update({v: reuse[mapping[v]] for v in st.new})
        if trace is not None:
            trace.append({"step": "reuse", "onto": sorted(reuse.values())})
    img = frozenset(g.values())
    if not is_strong(D, img) or not is_strong(D, B2.vertices):
        raise AssertionError("strong amalgamation produced a non-strong image")
    return D, g


def _reuse_copy(P: FinStructure, base: FrozenSet[int], D: FinStructure, new: List[int]) -> Optional[Dict[int, int]]:
    """Lexicographically least embedding of P over base into D whose image is strong and induced."""
    anchor = {v: v for v in base}
    cands = []
    for emb in find_embeddings(P, D, anchor):
        img_new = tuple(sorted(emb[v] for v in new))
        if set(img_new) & base:
            continue
        cands.append((img_new, tuple(emb[v] for v in new), emb))
    cands.sort(key=lambda c: (c[0], c[1]))
    for img_new, _, emb in cands:
        U = base | frozenset(img_new)
        if D.restrict(U) != P.relabel(emb):
            continue
        if not is_strong(D, U):
            continue
        return {v: emb[v] for v in new}
    return None
