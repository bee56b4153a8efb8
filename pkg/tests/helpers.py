"""Random generators shared by the test modules."""

import random
from itertools import combinations

from hypothesis import strategies as st

from amalgam.closure import is_strong
from amalgam.extensions import in_class
from amalgam.oracle import brute_c0, brute_zeta
from amalgam.structures import FinStructure


def random_structure(rng: random.Random, v: int, symbols=(0, 1), n: int = 1, max_edges=None) -> FinStructure:
    """Uniform vertex count v, a random number of random edges (ternary symbols only for n=1)."""
    triples = list(combinations(range(v), 3))
    cap = len(triples) if max_edges is None else min(max_edges, len(triples))
    k = rng.randint(0, cap) if triples else 0
    edges = [(rng.choice(symbols), t) for t in rng.sample(triples, k)]
    return FinStructure.build(n, range(v), edges)


def random_c0(rng: random.Random, max_v: int = 9, symbols=(0, 1), zeta: bool = True) -> FinStructure:
    while True:
        v = rng.randint(1, max_v)
        S = random_structure(rng, v, symbols, max_edges=v)
        if zeta and not brute_zeta(S):
            continue
        if brute_c0(S):
            return S


def random_subset(rng: random.Random, X, p: float = 0.4) -> frozenset:
    return frozenset(x for x in sorted(X) if rng.random() < p)


def random_extension(rng: random.Random, A: FinStructure, size: int, snap, start: int, symbols=(0,),
                     tries: int = 200):
    """A class member B >= A with vertices A plus ids start.., or None."""
    base = sorted(A.vertices)
    new = list(range(start, start + size - len(base)))
    verts = base + new
    triples = [t for t in combinations(verts, 3) if set(t) & set(new)]
    for _ in range(tries):
        k = rng.randint(0, min(len(triples), len(new) + 2))
        edges = [(rng.choice(symbols), t) for t in rng.sample(triples, k)]
        B = A.with_vertices(new).with_edges([(s, frozenset(t)) for s, t in edges])
        if is_strong(B, A.vertices) and in_class(B, snap).accept:
            return B
    return None


def stacked_copies(A: FinStructure, B1: FinStructure, max_size: int, snap, start: int):
    """Free copies of B1 over A stacked while the result stays small and in the class."""
    ext = sorted(B1.vertices - A.vertices)
    if not ext:
        return None
    B2 = A
    nxt = start
    while len(B2.vertices) + len(ext) <= max_size:
        m = {v: nxt + j for j, v in enumerate(ext)}
        T = B2.with_vertices(m.values()).with_edges(B1.relabel(m).edges)
        if not in_class(T, snap).accept:
            break
        B2, nxt = T, nxt + len(ext)
    return B2 if B2 is not A else None


@st.composite
def structures(draw):
    v = draw(st.integers(0, 7))
    triples = [(a, b, c) for a in range(v) for b in range(a + 1, v) for c in range(b + 1, v)]
    chosen = draw(st.lists(st.sampled_from(triples), unique=True, max_size=8)) if triples else []
    syms = draw(st.lists(st.sampled_from([0, 1]), min_size=len(chosen), max_size=len(chosen)))
    return FinStructure.build(1, range(v), list(zip(syms, chosen)))
