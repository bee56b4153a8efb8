"""Named gadgets: the dimension-dropping D_t, its msa variant D-hat, generalized
paths, the Omega catalogue, and the padded repair used when removing facts.

Vertex labels: in D_t, a_1..a_k are 0..k-1, g = k, h = k+1 and b_1..b_2t follow;
in D-hat the b's start right after g; in paths a_i is i-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .structures import ExtensionTemplate, FinStructure, StructureError, free_join, rel_qf_type


@dataclass(frozen=True)
class Gadget:
    structure: FinStructure
    base: Tuple[int, ...]
    ext: Tuple[int, ...]
    kind: str
    params: Tuple[int, ...]

    @property
    def template(self) -> ExtensionTemplate:
        return rel_qf_type(self.structure, self.base, self.ext)

    def to_dict(self) -> dict:
        d = self.structure.to_dict()
        d.update(kind=self.kind, params=list(self.params), base=list(self.base), ext=list(self.ext))
        return d


def _fold(i: int, k: int) -> int:
    """Index of a_i with i read mod k into 1..k, as a 0-based vertex."""
    return (i - 1) % k


def build_D(k: int, t: int, n: int = 1) -> Gadget:
    if not (t > k >= 2):
        raise StructureError(f"D_t needs t > k >= 2, got k={k}, t={t}")
    g, h = k, k + 1
    b = lambda i: k + 1 + i
    edges = [(0, (b(i), _fold(i, k), b(i + 1))) for i in range(1, 2 * t)]
    edges.append((0, (b(2 * t), g, b(1))))
    edges.append((0, (b(1), h, b(t + 1))))
    base = tuple(range(k + 2))
    ext = tuple(b(i) for i in range(1, 2 * t + 1))
    return Gadget(FinStructure.build(n, base + ext, edges), base, ext, "D", (k, t))


def D_parts(k: int, t: int) -> Dict[str, Tuple[int, ...]]:
    """The named pieces of build_D(k, t): B1, B2, g and h."""
    b = lambda i: k + 1 + i
    return {
        "B1": tuple(b(i) for i in range(1, t + 2)),
        "B2": tuple([b(i) for i in range(t + 1, 2 * t + 1)] + [b(1)]),
        "g": (k,),
        "h": (k + 1,),
    }


def build_D_hat(k: int, t: int, n: int = 1) -> Gadget:
    if not (k >= 2 and t > k + 1):
        raise StructureError(f"D-hat needs k >= 2 and t > k+1, got k={k}, t={t}")
    g = k
    b = lambda i: k + i
    edges = [(0, (b(i), _fold(i, k), b(i + 1))) for i in range(1, 2 * t)]
    edges.append((0, (b(2 * t), g, b(1))))
    base = tuple(range(k + 1))
    ext = tuple(b(i) for i in range(1, 2 * t + 1))
    return Gadget(FinStructure.build(n, base + ext, edges), base, ext, "Dhat", (k, t))


_PATH_MIN = {"P": 3, "H": 4, "L": 5}


def build_path(kind: str, k: int, n: int = 1) -> Gadget:
    if kind not in _PATH_MIN:
        raise StructureError(f"unknown path kind {kind!r}")
    if k < _PATH_MIN[kind]:
        raise StructureError(f"{kind}_k needs k >= {_PATH_MIN[kind]}, got {k}")
    a = lambda i: (i - 1) % k
    edges = [(0, (a(i), a(i + 1), a(i + 2))) for i in range(1, k - 1)]
    if kind in ("H", "L"):
        edges.append((0, (a(k - 1), a(k), a(1))))
    if kind == "L":
        edges.append((0, (a(k), a(1), a(2))))
    base = {"P": (a(1), a(k)), "H": (a(1),), "L": ()}[kind]
    ext = tuple(v for v in range(k) if v not in base)
    return Gadget(FinStructure.build(n, range(k), edges), base, ext, kind, (k,))


def omega_params(i: int, n: int) -> Tuple[int, int]:
    return n + 1, n + 3 + i


def omega_gadget(i: int, n: int) -> Gadget:
    k, t = omega_params(i, n)
    return build_D_hat(k, t, n)


def omega(i: int, n: int) -> ExtensionTemplate:
    """Template of the i-th Omega extension over a base of size n+2."""
    if n < 1 or i < 0:
        raise StructureError("omega needs n >= 1 and i >= 0")
    return omega_gadget(i, n).template


def omega_index_of(base: Sequence[int], ext: Sequence[int], link_edges: Iterable, n: int) -> Optional[int]:
    """c if the extension (base, ext, link edges) is an Omega_c-extension, else None.

    An Omega_c relative type is a cycle b_1..b_2t of extension points, edge i
    joining b_i, b_{i+1} and one base point; read around the cycle starting
    after the unique point g used once, the base labels repeat with period
    k = n+1 through all other base points.
    """
    base, ext = frozenset(base), frozenset(ext)
    link = list(link_edges)
    k = n + 1
    if len(base) != n + 2 or len(ext) % 2 or len(link) != len(ext):
        return None
    t = len(ext) // 2
    c = t - n - 3
    if c < 0:
        return None
    nbr: Dict[int, List[Tuple[int, int]]] = {v: [] for v in ext}
    for s, vs in link:
        if s != 0:
            return None
        inner = vs & ext
        outer = vs & base
        if len(inner) != 2 or len(outer) != 1:
            return None
        x, y = sorted(inner)
        (z,) = outer
        nbr[x].append((y, z))
        nbr[y].append((x, z))
    if any(len(v) != 2 for v in nbr.values()):
        return None
    # walk the cycle
    start = min(ext)
    labels = []
    seen = {start}
    prev, cur = None, start
    for step in range(len(ext)):
        opts = [(w, z) for w, z in nbr[cur] if w != prev] if prev is not None else [nbr[cur][0]]
        if len(opts) != 1:
            return None
        w, z = opts[0]
        labels.append(z)
        prev, cur = cur, w
        if step < len(ext) - 1:
            if cur in seen:
                return None
            seen.add(cur)
    if cur != start:
        return None
    counts = {z: labels.count(z) for z in set(labels)}
    singles = [z for z, m in counts.items() if m == 1]
    if len(singles) != 1 or set(counts) != base:
        return None
    gpos = labels.index(singles[0])
    seq = labels[gpos + 1:] + labels[:gpos]
    head = seq[:k]
    if len(set(head)) != k:
        return None
    if any(seq[j] != head[j % k] for j in range(len(seq))):
        return None
    return c


def omega_index(T: ExtensionTemplate, n: int) -> Optional[int]:
    return omega_index_of(T.base, T.ext, T.link_edges, n)


# -- dimension-dropping repair ----------------------------------------------------


def attach_D(M: FinStructure, cbar: Sequence[int], t: int) -> Tuple[FinStructure, Tuple[int, ...]]:
    """Free join of M with D_t over cbar = (a_1..a_k, g, h); returns (E_t, new b's)."""
    cbar = tuple(cbar)
    k = len(cbar) - 2
    D = build_D(k, t, M.n)
    start = M.next_id
    mapping = {v: cbar[v] for v in D.base}
    for j, v in enumerate(D.ext):
        mapping[v] = start + j
    Dm = D.structure.relabel(mapping)
    base_edges = [e for e in M.edges if e[1] <= frozenset(cbar)]
    Dm = Dm.with_edges(base_edges)
    return free_join(M, Dm, frozenset(cbar)), tuple(mapping[v] for v in D.ext)


def padding_plan(bbar: Sequence[int]) -> Tuple[int, int]:
    """(number of pad points, number of D_t applications) for a tuple."""
    m = len(bbar)
    if m >= 4:
        return 0, 1
    return 4 - m, 5 - m


def drop_dimension(M: FinStructure, bbar: Sequence[int], t_for=None) -> Tuple[FinStructure, dict]:
    """Add structure over bbar lowering delta exactly for sets whose minimisers can meet bbar.

    Tuples shorter than 4 are padded with fresh isolated points and the D_t
    attachment is repeated as many times as the padding rule asks.  ``t_for``
    maps (structure, tuple) to the t to use; by default t = k+1.
    """
    bbar = tuple(bbar)
    pads, reps = padding_plan(bbar)
    pad_ids = tuple(M.fresh_ids(pads))
    E = M.with_vertices(pad_ids)
    cbar = bbar + pad_ids
    k = len(cbar) - 2
    used = []
    for _ in range(reps):
        t = t_for(E, cbar) if t_for is not None else k + 1
        E, bs = attach_D(E, cbar, t)
        used.append({"t": t, "b": list(bs)})
    return E, {"pads": list(pad_ids), "tuple": list(cbar), "attachments": used}


def t_lower_bounds(M: FinStructure, snap=None) -> Dict[str, int]:
    """The three lower bounds on t asked for by the stay-in-class argument.

    ``size`` is |M|, ``symbols`` the largest symbol index in M, and
    ``mu_stable`` the largest pair-code consulted by the snapshot (mu values
    are constant in m beyond it).
    """
    mu_stable = 0
    if snap is not None:
        for cs in snap.columns.values():
            if cs:
                mu_stable = max(mu_stable, max(cs))
    return {
        "size": len(M.vertices),
        "symbols": max(M.symbols_used) if M.edges else 0,
        "mu_stable": mu_stable,
    }


# -- unblockability ----------------------------------------------------------------


@dataclass
class UnblockReport:
    template: str
    hosts_checked: int
    placements_checked: int
    passed: bool
    counterexample: Optional[dict] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_unblockable(gadget: Gadget, snap, host_bound: int, k: int = 3, pool=None) -> UnblockReport:
    """Desk-scale check of k-unblockability over class hosts with <= host_bound vertices.

    For every host Z in the pool that is in the class, and every placement of
    the base X inside Z with the same quantifier-free type, either the free
    join of Z with the extension is in the class, or Z already holds the
    mu-allowed number of disjoint copies over the placement.
    """
    from itertools import permutations

    from .closure import g_value
    from .extensions import ClassCheckConfig, in_class, max_disjoint_family
    from .mu import is_permissive, mu_eval
    from .oracle import EnumerationSpec, enumerate_structures

    if not is_permissive(snap, k):
        raise ValueError(f"snapshot is not {k}-permissive")
    T = gadget.template
    X = gadget.base
    if not in_class(gadget.structure, snap).accept:
        return UnblockReport(gadget.kind, 0, 0, False, {"reason": "template not in class"})
    if pool is None:
        pool = []
        for v in range(len(X), host_bound + 1):
            pool.extend(enumerate_structures(EnumerationSpec(vertices=v, require_c0=True, n=gadget.structure.n)))
    hosts = placements = 0
    base_edges = set(T.index_edges()[0])
    for Z in pool:
        if not in_class(Z, snap).accept:
            continue
        hosts += 1
        seen = set()
        for img in permutations(sorted(Z.vertices), len(X)):
            pos = {v: i for i, v in enumerate(img)}
            zedges = {(s, frozenset(pos[v] for v in vs)) for s, vs in Z.edges_within(img)}
            if zedges != base_edges:
                continue
            key = frozenset(img) if not X else img
            if key in seen:
                continue
            seen.add(key)
            placements += 1
            start = Z.next_id
            mapping = {x: img[i] for i, x in enumerate(X)}
            for j, y in enumerate(gadget.ext):
                mapping[y] = start + j
            Y = gadget.structure.relabel(mapping)
            E = free_join(Z, Y, frozenset(img))
            if in_class(E, snap, ClassCheckConfig(known_ok=Z.vertices)).accept:
                continue
            Tz = rel_qf_type(Y, img, tuple(mapping[y] for y in gadget.ext))
            fam = max_disjoint_family(Z, img, Tz)
            need = mu_eval(snap, Z, img, Tz, g_value(Z, img).value)
            if fam.count < need:
                return UnblockReport(gadget.kind, hosts, placements, False,
                                     {"host": Z.to_dict(), "base": list(img), "copies": fam.count, "need": need})
    return UnblockReport(gadget.kind, hosts, placements, True)
