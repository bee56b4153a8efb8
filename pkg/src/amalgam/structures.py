"""Finite symmetric relational structures.

Symbol 0 is the ternary relation ``R``; symbol ``i + 1`` is the ``(n+2)``-ary
relation ``R_i``.  Edges are stored as ``(symbol, frozenset(vertices))`` so a
symmetric relation on a set of vertices is counted exactly once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import chain
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

Edge = Tuple[int, FrozenSet[int]]


class StructureError(ValueError):
    """Raised when an operation's precondition on a structure fails."""


def edge(symbol: int, *vertices: int) -> Edge:
    return (symbol, frozenset(vertices))


def arity(symbol: int, n: int) -> int:
    return 3 if symbol == 0 else n + 2


@dataclass(frozen=True)
class Signature:
    """Relational signature: R (ternary) followed by R_0, R_1, ... of arity n+2."""

    n: int
    num_symbols: Optional[int] = None  # None means the whole initial segment of omega

    def __post_init__(self):
        if self.n < 1:
            raise StructureError("spectrum parameter n must be >= 1")

    def arity(self, symbol: int) -> int:
        if symbol < 0 or (self.num_symbols is not None and symbol >= self.num_symbols):
            raise StructureError(f"symbol {symbol} not in signature")
        return arity(symbol, self.n)

    @property
    def symbols(self) -> List[Tuple[int, int]]:
        if self.num_symbols is None:
            raise StructureError("infinite signature has no finite symbol list")
        return [(s, self.arity(s)) for s in range(self.num_symbols)]


@dataclass(frozen=True, eq=True)
class FinStructure:
    n: int
    vertices: FrozenSet[int] = frozenset()
    edges: FrozenSet[Edge] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "edges", frozenset((s, frozenset(vs)) for s, vs in self.edges))
        if self.n < 1:
            raise StructureError("spectrum parameter n must be >= 1")
        for s, vs in self.edges:
            if s < 0:
                raise StructureError(f"negative symbol {s}")
            if len(vs) != arity(s, self.n):
                raise StructureError(
                    f"edge {s}:{sorted(vs)} has {len(vs)} distinct vertices, arity is {arity(s, self.n)}")
            if not vs <= self.vertices:
                raise StructureError(f"edge {s}:{sorted(vs)} uses vertices outside the structure")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def build(cls, n: int, vertices: Iterable[int], edges: Iterable[Tuple[int, Iterable[int]]]) -> "FinStructure":
        edges = [(s, tuple(vs)) for s, vs in edges]
        for s, vs in edges:
            if len(set(vs)) != len(vs):
                raise StructureError(f"edge {s}:{list(vs)} repeats a vertex")
        return cls(n, frozenset(vertices), frozenset((s, frozenset(vs)) for s, vs in edges))

    def with_vertices(self, new: Iterable[int]) -> "FinStructure":
        return FinStructure(self.n, self.vertices | frozenset(new), self.edges)

    def with_edges(self, new: Iterable[Edge]) -> "FinStructure":
        new = frozenset((s, frozenset(vs)) for s, vs in new)
        verts = self.vertices.union(*(vs for _, vs in new)) if new else self.vertices
        return FinStructure(self.n, verts, self.edges | new)

    def without_edges(self, old: Iterable[Edge]) -> "FinStructure":
        return FinStructure(self.n, self.vertices, self.edges - frozenset(old))

    def restrict(self, X: Iterable[int]) -> "FinStructure":
        X = frozenset(X)
        self._check_subset(X)
        return FinStructure(self.n, X, frozenset(e for e in self.edges if e[1] <= X))

    def reduct(self, max_symbol: int) -> "FinStructure":
        """Keep only edges whose symbol index is < max_symbol."""
        return FinStructure(self.n, self.vertices, frozenset(e for e in self.edges if e[0] < max_symbol))

    def relabel(self, mapping: Mapping[int, int]) -> "FinStructure":
        m = lambda v: mapping.get(v, v)
        verts = frozenset(m(v) for v in self.vertices)
        if len(verts) != len(self.vertices):
            raise StructureError("relabelling is not injective")
        return FinStructure(self.n, verts, frozenset((s, frozenset(m(v) for v in vs)) for s, vs in self.edges))

    def fresh_ids(self, count: int, start: Optional[int] = None) -> List[int]:
        base = self.next_id if start is None else start
        return list(range(base, base + count))

    # -- queries --------------------------------------------------------------

    @property
    def next_id(self) -> int:
        return max(self.vertices) + 1 if self.vertices else 0

    @cached_property
    def incidence(self) -> Dict[int, Tuple[Edge, ...]]:
        inc: Dict[int, List[Edge]] = {v: [] for v in self.vertices}
        for e in sorted(self.edges, key=edge_key):
            for v in e[1]:
                inc[v].append(e)
        return {v: tuple(es) for v, es in inc.items()}

    @cached_property
    def symbols_used(self) -> FrozenSet[int]:
        return frozenset(s for s, _ in self.edges)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def edges_within(self, X: Iterable[int]) -> List[Edge]:
        X = X if isinstance(X, (set, frozenset)) else frozenset(X)
        seen = set()
        out = []
        for v in X:
            for e in self.incidence.get(v, ()):
                if e not in seen and e[1] <= X:
                    seen.add(e)
                    out.append(e)
        return out

    def count_edges_within(self, X: Iterable[int]) -> int:
        return len(self.edges_within(X))

    def has_edge(self, symbol: int, vertices: Iterable[int]) -> bool:
        return (symbol, frozenset(vertices)) in self.edges

    def _check_subset(self, X: Iterable[int]) -> None:
        extra = frozenset(X) - self.vertices
        if extra:
            raise StructureError(f"vertices {sorted(extra)} not in structure")

    def __len__(self) -> int:
        return len(self.vertices)

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges, key=edge_key)

    # -- serialisation --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "vertices": sorted(self.vertices),
            "edges": [[s, sorted(vs)] for s, vs in self.sorted_edges()],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: Mapping) -> "FinStructure":
        return cls.build(int(d["n"]), d["vertices"], [(int(s), vs) for s, vs in d["edges"]])

    @classmethod
    def from_json(cls, text: str) -> "FinStructure":
        return cls.from_dict(json.loads(text))

    def to_dot(self, name: str = "S") -> str:
        """Render edges as labelled hub nodes joined to their vertices."""
        lines = [f"graph {name} {{"]
        for v in sorted(self.vertices):
            lines.append(f'  v{v} [label="{v}"];')
        for k, (s, vs) in enumerate(self.sorted_edges()):
            label = "R" if s == 0 else f"R{s - 1}"
            lines.append(f'  e{k} [shape=point, xlabel="{label}"];')
            for v in sorted(vs):
                lines.append(f"  e{k} -- v{v};")
        lines.append("}")
        return "\n".join(lines)


def edge_key(e: Edge) -> Tuple[int, Tuple[int, ...]]:
    return (e[0], tuple(sorted(e[1])))


# -- primitive operations -------------------------------------------------------


def delta(S: FinStructure, X: Iterable[int] = None) -> int:
    """Predimension: |X| minus the number of edges of S inside X."""
    if X is None:
        return len(S.vertices) - len(S.edges)
    X = frozenset(X)
    S._check_subset(X)
    return len(X) - S.count_edges_within(X)


def delta_rel(S: FinStructure, B: Iterable[int], A: Iterable[int]) -> int:
    A = frozenset(A)
    return delta(S, A | frozenset(B)) - delta(S, A)


def free_join(S1: FinStructure, S2: FinStructure, A: Iterable[int]) -> FinStructure:
    """Union of S1 and S2 over the shared set A, adding no cross edges."""
    A = frozenset(A)
    if S1.n != S2.n:
        raise StructureError("structures have different n")
    if S1.vertices & S2.vertices != A:
        raise StructureError("vertex overlap differs from the declared base")
    e1 = frozenset(e for e in S1.edges if e[1] <= A)
    e2 = frozenset(e for e in S2.edges if e[1] <= A)
    if e1 != e2:
        raise StructureError("structures disagree on edges inside the base")
    return FinStructure(S1.n, S1.vertices | S2.vertices, S1.edges | S2.edges)


def disjoint_copy(S: FinStructure, keep: Iterable[int], start: int) -> Tuple[FinStructure, Dict[int, int]]:
    """Rename every vertex of S outside ``keep`` to fresh ids from ``start`` upward.

    Returns the renamed structure and the renaming (identity on ``keep``).
    """
    keep = frozenset(keep)
    mapping = {v: v for v in keep}
    nxt = start
    for v in sorted(S.vertices - keep):
        mapping[v] = nxt
        nxt += 1
    return S.relabel(mapping), mapping


@dataclass(frozen=True)
class ExtensionTemplate:
    """A base tuple plus extension tuple, with the relative qf type of the extension.

    ``link_edges`` are the template edges touching the extension; ``base_edges``
    are the edges inside the base (its full quantifier-free type).
    """

    structure: FinStructure
    base: Tuple[int, ...]
    ext: Tuple[int, ...]
    link_edges: FrozenSet[Edge] = field(default=frozenset())
    base_edges: FrozenSet[Edge] = field(default=frozenset())

    def __post_init__(self):
        b, x = frozenset(self.base), frozenset(self.ext)
        if b & x:
            raise StructureError("base and extension tuples overlap")
        if len(b) != len(self.base) or len(x) != len(self.ext):
            raise StructureError("tuples repeat a vertex")
        for e in self.link_edges:
            if not (e[1] & x):
                raise StructureError("link edge does not touch the extension")

    @property
    def sublanguage(self) -> FrozenSet[int]:
        return frozenset(s for s, _ in self.link_edges)

    @property
    def base_size(self) -> int:
        return len(self.base)

    @property
    def ext_size(self) -> int:
        return len(self.ext)

    def pattern(self) -> FinStructure:
        """Base plus extension carrying exactly the base edges and link edges."""
        return FinStructure(self.structure.n, frozenset(self.base) | frozenset(self.ext),
                            self.base_edges | self.link_edges)

    def index_edges(self) -> Tuple[FrozenSet[Tuple[int, FrozenSet[int]]], FrozenSet[Tuple[int, FrozenSet[int]]]]:
        """Edges rewritten over tuple positions (base i -> i, ext j -> len(base)+j)."""
        pos = {v: i for i, v in enumerate(self.base + self.ext)}
        tr = lambda es: frozenset((s, frozenset(pos[v] for v in vs)) for s, vs in es)
        return tr(self.base_edges), tr(self.link_edges)


def rel_qf_type(S: FinStructure, base: Sequence[int], ext: Sequence[int]) -> ExtensionTemplate:
    """Relative quantifier-free type of ``ext`` over ``base`` read off S."""
    base, ext = tuple(base), tuple(ext)
    if set(base) & set(ext):
        raise StructureError("base and extension tuples overlap")
    S._check_subset(base + ext)
    both = frozenset(base) | frozenset(ext)
    xs = frozenset(ext)
    link = frozenset(e for e in S.edges_within(both) if e[1] & xs)
    inner = frozenset(e for e in S.edges_within(base))
    return ExtensionTemplate(S.restrict(both), base, ext, link, inner)


def zeta_check(S: FinStructure) -> bool:
    """No edge of one symbol sits on a subset of an edge of another symbol."""
    return zeta_violation(S) is None


def zeta_violation(S: FinStructure) -> Optional[Tuple[Edge, Edge]]:
    for e in S.sorted_edges():
        s, vs = e
        cands = set(chain.from_iterable(S.incidence[v] for v in vs))
        for f in sorted(cands, key=edge_key):
            if f[0] != s and f[1] <= vs:
                return (e, f)
    return None


def find_embeddings(pattern: FinStructure, host: FinStructure,
                    anchor: Optional[Mapping[int, int]] = None,
                    avoid: Iterable[int] = ()) -> Iterator[Dict[int, int]]:
    """Yield every injection extending ``anchor`` that maps pattern edges onto host edges.

    Edge preservation is containment: the host may carry more edges.  Images of
    unanchored vertices never land in ``avoid``.
    """
    anchor = dict(anchor or {})
    if len(set(anchor.values())) != len(anchor):
        return
    for p, h in anchor.items():
        if p not in pattern.vertices or h not in host.vertices:
            return
    avoid = frozenset(avoid)
    # every pattern edge fully inside the anchor must already hold
    for s, vs in pattern.edges:
        if vs <= anchor.keys() and (s, frozenset(anchor[v] for v in vs)) not in host.edges:
            return

    order: List[int] = []
    placed = set(anchor)
    rest = set(pattern.vertices) - placed
    while rest:
        # prefer vertices sharing an edge with already placed ones
        best = max(sorted(rest), key=lambda v: sum(1 for e in pattern.incidence[v] if e[1] & placed))
        order.append(best)
        placed.add(best)
        rest.discard(best)

    used = set(anchor.values())
    mapping = dict(anchor)

    def candidates(v: int) -> Iterable[int]:
        # intersect over every pattern edge at v that already has mapped points,
        # scanning the lowest-degree mapped point of each
        result = None
        for s, vs in pattern.incidence[v]:
            mapped = [mapping[u] for u in vs if u in mapping]
            if not mapped:
                continue
            pivot = min(mapped, key=lambda h: len(host.incidence[h]))
            pool = set()
            for he in host.incidence[pivot]:
                if he[0] == s and all(m in he[1] for m in mapped):
                    pool |= he[1]
            result = pool if result is None else result & pool
            if not result:
                return ()
        if result is None:
            return sorted(host.vertices)
        return sorted(result)

    def ok(v: int) -> bool:
        for s, vs in pattern.incidence[v]:
            if all(u in mapping for u in vs):
                if (s, frozenset(mapping[u] for u in vs)) not in host.edges:
                    return False
        return True

    def rec(k: int) -> Iterator[Dict[int, int]]:
        if k == len(order):
            yield dict(mapping)
            return
        v = order[k]
        for h in candidates(v):
            if h in used or h in avoid:
                continue
            mapping[v] = h
            used.add(h)
            if ok(v):
                yield from rec(k + 1)
            del mapping[v]
            used.discard(h)

    yield from rec(0)
