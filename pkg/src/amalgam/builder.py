"""Staged construction of the recursive model: scheduling, clean-up and audits.

N_s is built from N_{s-1} by (1) one enumeration into the snapshot, (2) the
clean-up of the least defunct occurrence of the advanced column, replaced by a
dimension-restoring D_t attachment, and (3) strong amalgamation for the first s
pending requirements.  Requirements come from a finite catalog with quotas so
runs stay desk-scale.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .amalgamation import strong_amalgamate
from .closure import closure_set, is_strong, min_delta
from .extensions import _essential_vertices, _max_packing, in_class
from .gadgets import drop_dimension, omega_gadget, omega_params, t_lower_bounds
from .mu import MuSnapshot, advance, is_defunct, seeded
from .structures import Edge, FinStructure, StructureError, find_embeddings


class BuilderInvariantError(RuntimeError):
    """A stage left the class or broke dimension preservation."""

    def __init__(self, message: str, certificate: Optional[dict] = None):
        super().__init__(message)
        self.certificate = certificate or {}


# -- configuration ------------------------------------------------------------------


DEFAULT_QUOTAS = {"point": 4, "edge": 2, "cycle": 1, "fact": 2, "omega": 2, "defunct": 12}


@dataclass
class BuildConfig:
    n: int = 1
    columns: Tuple[int, ...] = (0, 1)
    fact_column: int = 0
    defunct_column: int = 1
    quotas: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_QUOTAS))
    enumerate: Tuple[Optional[int], ...] = ()
    default_column: Optional[int] = 1
    t_policy: str = "minimal"
    audit: bool = True
    seed: int = 0

    def column_at(self, stage: int) -> Optional[int]:
        if 1 <= stage <= len(self.enumerate):
            return self.enumerate[stage - 1]
        return self.default_column

    def to_dict(self) -> dict:
        return {"n": self.n, "columns": list(self.columns), "fact_column": self.fact_column,
                "defunct_column": self.defunct_column, "quotas": dict(sorted(self.quotas.items())),
                "enumerate": list(self.enumerate), "default_column": self.default_column,
                "t_policy": self.t_policy, "audit": self.audit, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "BuildConfig":
        quotas = dict(DEFAULT_QUOTAS)
        quotas.update({k: int(v) for k, v in d.get("quotas", {}).items()})
        return cls(n=int(d.get("n", 1)), columns=tuple(d.get("columns", (0, 1))),
                   fact_column=int(d.get("fact_column", 0)), defunct_column=int(d.get("defunct_column", 1)),
                   quotas=quotas, enumerate=tuple(d.get("enumerate", ())),
                   default_column=d.get("default_column", 1), t_policy=d.get("t_policy", "minimal"),
                   audit=bool(d.get("audit", True)), seed=int(d.get("seed", 0)))


# -- requirements -------------------------------------------------------------------


@dataclass
class Requirement:
    """Amalgamation task: embed ``pattern`` over ``base`` strongly into N.

    ``pattern`` lives on 0..m-1 with positions 0..|base|-1 standing for the base.
    """

    rid: int
    kind: str
    base: Tuple[int, ...]
    pattern: FinStructure
    birth: int
    status: str = "pending"
    image: Optional[Tuple[int, ...]] = None
    info: Dict[str, object] = field(default_factory=dict)

    def extension(self, start: int) -> FinStructure:
        """The pattern placed on the base ids, extension points from ``start`` on."""
        k = len(self.base)
        mapping = {i: self.base[i] for i in range(k)}
        for j, v in enumerate(sorted(self.pattern.vertices - set(range(k)))):
            mapping[v] = start + j
        return self.pattern.relabel(mapping)

    def to_dict(self) -> dict:
        return {"rid": self.rid, "kind": self.kind, "base": list(self.base), "birth": self.birth,
                "status": self.status, "image": None if self.image is None else list(self.image),
                "info": self.info, "pattern": self.pattern.to_dict()}


def _pattern(n: int, size: int, edges: Iterable) -> FinStructure:
    return FinStructure.build(n, range(size), list(edges))


def point_pattern(n: int) -> FinStructure:
    return _pattern(n, 1, [])


def edge_pattern(n: int) -> FinStructure:
    return _pattern(n, 3, [(0, (0, 1, 2))])


def cycle_pattern(n: int, k: int = 5) -> FinStructure:
    """L_k over the empty base."""
    from .gadgets import build_path
    return build_path("L", k, n).structure


def defunct_pattern(n: int, column: int) -> FinStructure:
    """R_i on x_1..x_{n+2} together with a point w pulling the tuple's R-dimension down."""
    w = n + 2
    edges = [(column + 1, tuple(range(n + 2)))]
    edges += [(0, (j, j + 1, w)) for j in range(n + 1)]
    return _pattern(n, n + 3, edges)


def fact_pattern(n: int, column: int) -> FinStructure:
    """Base b_1..b_{n+1} with n+4 points y each carrying R_i(b, y)."""
    k = n + 1
    edges = [(column + 1, tuple(range(k)) + (k + j,)) for j in range(n + 4)]
    return _pattern(n, k + n + 4, edges)


def omega_pattern(n: int, code: int, copies: int, base_fact: int) -> FinStructure:
    """Base of size n+2 carrying R_i plus ``copies`` disjoint Omega_code extensions."""
    G = omega_gadget(code, n)
    k = len(G.base)
    edges = [(base_fact + 1, tuple(range(k)))]
    nxt = k
    for _ in range(copies):
        m = {b: i for i, b in enumerate(G.base)}
        for v in G.ext:
            m[v] = nxt
            nxt += 1
        edges += [(s, tuple(m[v] for v in vs)) for s, vs in G.structure.edges if not vs <= set(G.base)]
    return _pattern(n, nxt, edges)


# -- stage state --------------------------------------------------------------------


@dataclass
class StageState:
    N: FinStructure
    snap: MuSnapshot
    config: BuildConfig
    stage: int = 0
    queue: List[Requirement] = field(default_factory=list)
    tombstones: List[dict] = field(default_factory=list)
    log: List[str] = field(default_factory=list)
    history: List[FinStructure] = field(default_factory=list)
    audits: List[dict] = field(default_factory=list)
    issued: Dict[str, int] = field(default_factory=dict)
    used_bases: Dict[str, set] = field(default_factory=dict)

    @property
    def tombstone_set(self) -> FrozenSet[Edge]:
        return frozenset((t["symbol"], frozenset(t["tuple"])) for t in self.tombstones)


def initial_state(config: BuildConfig) -> StageState:
    snap = seeded(config.n, config.columns)
    N = FinStructure(config.n, frozenset(), frozenset())
    st = StageState(N, snap, config)
    st.history.append(N)
    return st


def tuple_order_key(vs: Iterable[int]) -> Tuple[int, Tuple[int, ...]]:
    """Fixed order of type omega on finite tuples: max id, then lexicographic."""
    t = tuple(sorted(vs))
    return (t[-1] if t else -1, t)


# -- scheduling ---------------------------------------------------------------------


def _quota_left(state: StageState, kind: str) -> int:
    return state.config.quotas.get(kind, 0) - state.issued.get(kind, 0)


def _issue(state: StageState, kind: str, base: Tuple[int, ...], pattern: FinStructure, **info) -> None:
    rid = sum(state.issued.values())
    state.issued[kind] = state.issued.get(kind, 0) + 1
    state.used_bases.setdefault(kind, set()).add(frozenset(base))
    state.queue.append(Requirement(rid, kind, base, pattern, state.stage, info=info))


def _legal(pattern: FinStructure, k: int, snap: MuSnapshot) -> bool:
    return is_strong(pattern, range(k)) and in_class(pattern, snap).accept


def schedule(state: StageState) -> StageState:
    """Append the requirements that became available at this stage.

    A requirement is available at stage s once its base lies among vertex ids
    below s and its extension adds at most s points.  Existing entries keep
    their order; new ones go to the end in catalog order.
    """
    s, n, cfg, N = state.stage, state.config.n, state.config, state.N
    early = [v for v in sorted(N.vertices) if v < s]

    def empty_base(kind: str, pat: FinStructure, **info):
        if _quota_left(state, kind) > 0 and len(pat.vertices) <= s and _legal(pat, 0, state.snap):
            _issue(state, kind, (), pat, **info)

    if s >= 1:
        while _quota_left(state, "point") > 0:
            _issue(state, "point", (), point_pattern(n))
    empty_base("edge", edge_pattern(n))
    empty_base("cycle", cycle_pattern(n))
    if cfg.defunct_column in state.snap.columns:
        while _quota_left(state, "defunct") > 0 and n + 3 <= s:
            pat = defunct_pattern(n, cfg.defunct_column)
            if not _legal(pat, 0, state.snap):
                break
            _issue(state, "defunct", (), pat, column=cfg.defunct_column)

    # (n+1)-tuples with no edge inside, strong in N: extend by n+4 points y with R_i(b, y)
    fc = cfg.fact_column
    if _quota_left(state, "fact") > 0 and n + 4 <= s:
        pat = fact_pattern(n, fc)
        used = state.used_bases.get("fact", set())
        for b in combinations(early, n + 1):
            if _quota_left(state, "fact") <= 0:
                break
            fb = frozenset(b)
            if fb in used or any(e[0] == 0 for e in N.edges_within(fb)):
                continue
            if not is_strong(N, fb):
                continue
            if _legal(pat, n + 1, state.snap):
                _issue(state, "fact", b, pat, column=fc)

    # tuples carrying R_i: n+6 copies of Omega_{<i, j0>}
    j0 = state.snap.j0(fc)
    if j0 is not None and _quota_left(state, "omega") > 0:
        used = state.used_bases.get("omega", set())
        G = omega_gadget(j0, n)
        if len(G.ext) * (n + 6) <= s:
            for e in sorted((e for e in N.edges if e[0] == fc + 1), key=lambda e: tuple_order_key(e[1])):
                if _quota_left(state, "omega") <= 0:
                    break
                a = tuple(sorted(e[1]))
                if frozenset(a) in used or max(a) >= s or not is_strong(N, a):
                    continue
                pat = omega_pattern(n, j0, n + 6, fc)
                if _legal(pat, n + 2, state.snap):
                    _issue(state, "omega", a, pat, column=fc, code=j0)
    return state


# -- dimension audit ----------------------------------------------------------------


def _penalties(S: FinStructure, V: FrozenSet[int], K: Sequence[int], own: FrozenSet[Edge]) -> Dict[FrozenSet[int], int]:
    """For C ⊆ K: -(own edges inside C) + min over new points Z of delta(Z/C)."""
    W = S.vertices - V
    out = {}
    for r in range(len(K) + 1):
        for C in combinations(K, r):
            C = frozenset(C)
            val = -sum(1 for e in own if e[1] <= C)
            if W:
                G = FinStructure(S.n, C | W, frozenset(e for e in S.edges
                                                      if e[1] & W and e[1] <= C | W))
                val += min_delta(G, C) - len(C)
            out[C] = val
    return out


def dimension_audit(before: FinStructure, after: FinStructure, exhaustive_limit: int = 14) -> dict:
    """Exact check that d(X) agrees in both structures for every X ⊆ before.

    Both sides are written as min over Y of delta_common(Y) + p(Y ∩ K), with K
    the old vertices where the structures differ; equal penalty tables p prove
    agreement for every X.  Otherwise small cases are compared subset by subset.
    """
    V = before.vertices
    if not V <= after.vertices:
        return {"ok": False, "method": "shape", "reason": "vertices disappeared"}
    inside_after = frozenset(after.edges_within(V))
    common = before.edges & inside_after
    only_before = before.edges - common
    only_after = inside_after - common
    W = after.vertices - V
    K = set()
    for e in only_before | only_after:
        K |= e[1]
    for e in after.edges:
        if e[1] & W:
            K |= e[1] & V
    K = tuple(sorted(K))
    if len(K) <= 16:
        pb = _penalties(before, V, K, only_before)
        pa = _penalties(after, V, K, only_after)
        if pb == pa:
            return {"ok": True, "method": "boundary", "boundary": list(K)}
    if len(V) <= exhaustive_limit:
        from itertools import chain
        verts = sorted(V)
        for X in chain.from_iterable(combinations(verts, r) for r in range(len(verts) + 1)):
            if min_delta(before, X) != min_delta(after, X):
                return {"ok": False, "method": "exhaustive", "set": list(X),
                        "before": min_delta(before, X), "after": min_delta(after, X)}
        return {"ok": True, "method": "exhaustive"}
    return {"ok": False, "method": "boundary", "boundary": list(K), "reason": "penalty tables differ"}


# -- clean-up -----------------------------------------------------------------------


def defunct_occurrences(N: FinStructure, column: int, snap: MuSnapshot) -> List[Edge]:
    occ = [e for e in N.edges if e[0] == column + 1 and is_defunct(N, e[0], e[1], snap)]
    return sorted(occ, key=lambda e: tuple_order_key(e[1]))


def _paper_t(M: FinStructure, snap: MuSnapshot) -> int:
    b = t_lower_bounds(M, snap)
    return max(b.values()) + 1


def cleanup(state: StageState, column: Optional[int], prior: MuSnapshot) -> StageState:
    """Remove the least defunct R_column occurrence and restore dimensions with D_t."""
    if column is None:
        return state
    occ = defunct_occurrences(state.N, column, prior)
    if not occ:
        return state
    e = occ[0]
    old = state.N
    M0 = old.without_edges([e])
    bbar = tuple(sorted(e[1]))
    policy = state.config.t_policy
    chosen = None
    if policy == "paper":
        t = _paper_t(old, state.snap)
        E, info = drop_dimension(M0, bbar, t_for=lambda E_, c, t=t: t)
        chosen = (E, info)
    else:
        k = len(bbar) + max(0, 4 - len(bbar)) - 2
        for t in range(k + 1, k + 1 + 4 * len(old.vertices) + 8):
            E, info = drop_dimension(M0, bbar, t_for=lambda E_, c, t=t: t)
            if in_class(E, state.snap).accept and dimension_audit(old, E)["ok"]:
                chosen = (E, info)
                break
    if chosen is None:
        raise BuilderInvariantError("no admissible t for the clean-up gadget", {"tuple": list(bbar)})
    E, info = chosen
    if state.config.audit:
        aud = dimension_audit(old, E)
        if not aud["ok"]:
            raise BuilderInvariantError("clean-up changed a dimension", aud)
        state.audits.append({"stage": state.stage, "kind": "cleanup", **aud})
    state.N = E
    rec = {"stage": state.stage, "symbol": e[0], "tuple": list(bbar), "pads": info["pads"],
           "t": [a["t"] for a in info["attachments"]],
           "lower_bounds": t_lower_bounds(old, state.snap)}
    state.tombstones.append(rec)
    state.log.append(f"CLEANUP {state.stage} symbol={e[0]} tuple={_fmt(bbar)} pads={_fmt(info['pads'])} "
                     f"t={_fmt(rec['t'])} size={len(E.vertices)}")
    return state


def _fmt(xs) -> str:
    return ",".join(str(x) for x in xs)


# -- stage loop ---------------------------------------------------------------------


def _process(state: StageState, req: Requirement) -> None:
    N = state.N
    if not set(req.base) <= N.vertices or not is_strong(N, req.base):
        req.status = "void"
        state.log.append(f"VOID {state.stage} rid={req.rid} kind={req.kind} base={_fmt(req.base)}")
        return
    B = req.extension(N.next_id)
    if B.restrict(req.base) != N.restrict(req.base):
        req.status = "void"
        state.log.append(f"VOID {state.stage} rid={req.rid} kind={req.kind} base={_fmt(req.base)}")
        return
    trace: List[dict] = []
    D, g = strong_amalgamate(req.base, B, N, state.snap, trace)
    state.N = D
    req.status = "satisfied"
    req.image = tuple(g[v] for v in sorted(B.vertices))
    for t in trace:
        if t["step"] == "reuse":
            state.log.append(f"REUSE {state.stage} rid={req.rid} kind={req.kind} onto={_fmt(t['onto'])}")
        else:
            state.log.append(f"AMALGAM {state.stage} rid={req.rid} kind={req.kind} "
                             f"base={_fmt(req.base)} new={_fmt(t['new'])}")


def run_stage(state: StageState, column: Optional[int] = None, use_script: bool = True) -> StageState:
    """One stage: enumerate, clean up, schedule, then satisfy the first s pending requirements."""
    state.stage += 1
    s = state.stage
    if use_script:
        column = state.config.column_at(s)
    prior = state.snap
    before = state.N
    if column is not None:
        state.snap = advance(prior, column)
        state.log.append(f"ENUM {s} column={column} code={state.snap.column(column)[-1]}")
    cleanup(state, column, prior)
    schedule(state)
    pending = [r for r in state.queue if r.status == "pending"][:s]
    for r in pending:
        _process(state, r)
    if state.config.audit:
        v = in_class(state.N, state.snap)
        if not v.accept:
            raise BuilderInvariantError(f"stage {s} left the class", v.to_dict())
        aud = dimension_audit(before, state.N)
        if not aud["ok"]:
            raise BuilderInvariantError(f"stage {s} changed a dimension", aud)
        state.audits.append({"stage": s, "kind": "stage", **aud})
        dead = state.tombstone_set & state.N.edges
        if dead:
            raise BuilderInvariantError("tombstoned occurrence reappeared", {"edges": sorted(map(str, dead))})
    state.history.append(state.N)
    state.log.append(f"STAGE {s} size={len(state.N.vertices)} edges={len(state.N.edges)} "
                     f"pending={sum(1 for r in state.queue if r.status == 'pending')}")
    return state


def run(config: BuildConfig, stages: int, out: Optional[str] = None,
        on_stage: Optional[Callable[[StageState], None]] = None) -> StageState:
    state = initial_state(config)
    for _ in range(stages):
        run_stage(state)
        if on_stage is not None:
            on_stage(state)
    if out is not None:
        write_run_dir(state, out)
    return state


# -- analyses -----------------------------------------------------------------------


def omega_copies(N: FinStructure, code: int) -> Dict[Tuple[int, ...], List[FrozenSet[int]]]:
    """All Omega_code copies in N, grouped by the ordered base image."""
    k, t = omega_params(code, N.n)
    if k + 1 + 2 * t > len(N.vertices):
        return {}
    G = omega_gadget(code, N.n)
    pattern = G.structure
    groups: Dict[Tuple[int, ...], set] = {}
    for emb in find_embeddings(pattern, N):
        key = tuple(emb[v] for v in G.base)
        groups.setdefault(key, set()).add(frozenset(emb[v] for v in G.ext))
    return {k: sorted(v, key=sorted) for k, v in groups.items()}


def hat_expansion(state: StageState, columns: Optional[Iterable[int]] = None) -> Dict[Tuple[int, ...], dict]:
    """Finite-stage verdicts for the defined relations.

    For each live column i, a tuple's count is the largest disjoint family of
    Omega_{<i, j0>} copies over it, maximised over base orderings; the verdict
    is count >= n+6.  Tuples not listed have count 0.
    """
    N, snap, n = state.N, state.snap, state.config.n
    cols = sorted(snap.columns) if columns is None else sorted(columns)
    out: Dict[Tuple[int, ...], dict] = {}
    for i in cols:
        j0 = snap.j0(i)
        if j0 is None:
            continue
        per_set: Dict[FrozenSet[int], int] = {}
        for order, copies in omega_copies(N, j0).items():
            c = len(_max_packing(copies))
            key = frozenset(order)
            per_set[key] = max(per_set.get(key, 0), c)
        facts = {e[1] for e in N.edges if e[0] == i + 1}
        for key in set(per_set) | facts:
            t = tuple(sorted(key))
            c = per_set.get(key, 0)
            out.setdefault(t, {})[i] = {"count": c, "verdict": c >= n + 6, "fact": key in facts,
                                        "strong": is_strong(N, key)}
    return out


def extract_submodel(state: StageState, basis: Sequence[int], budget: Optional[int] = None) -> FrozenSet[int]:
    """Vertices seen algebraic over an independent basis by stage ``budget``."""
    basis = frozenset(basis)
    n = state.config.n
    if len(basis) > n:
        raise StructureError(f"basis larger than n = {n}")
    if not basis <= state.N.vertices or min_delta(state.N, basis) != len(basis):
        raise StructureError("basis is not independent")
    hist = state.history if budget is None else state.history[:budget + 1]
    found = set()
    for N in hist:
        if not basis <= N.vertices:
            continue
        found |= basis | _essential_vertices(N, basis)
    return frozenset(found)


def closure_profile(N: FinStructure, tuples: Iterable[Sequence[int]]) -> Dict[Tuple[int, ...], Tuple]:
    """Closure set and its induced edges, per tuple, for stabilization checks."""
    out = {}
    for t in tuples:
        c = closure_set(N, t)
        out[tuple(t)] = (tuple(sorted(c)), tuple(sorted((s, tuple(sorted(vs))) for s, vs in N.edges_within(c))))
    return out


# -- run directory ------------------------------------------------------------------


def write_run_dir(state: StageState, out: str) -> None:
    os.makedirs(out, exist_ok=True)
    dump = lambda obj: json.dumps(obj, sort_keys=True, indent=1)
    with open(os.path.join(out, "config.json"), "w") as fh:
        fh.write(dump(state.config.to_dict()) + "\n")
    for s, N in enumerate(state.history):
        with open(os.path.join(out, f"stage_{s:04d}.json"), "w") as fh:
            fh.write(dump(N.to_dict()) + "\n")
    with open(os.path.join(out, "snapshot.json"), "w") as fh:
        fh.write(dump(state.snap.to_dict()) + "\n")
    with open(os.path.join(out, "tombstones.log"), "w") as fh:
        for t in state.tombstones:
            fh.write(json.dumps(t, sort_keys=True) + "\n")
    with open(os.path.join(out, "events.log"), "w") as fh:
        for line in state.log:
            fh.write(line + "\n")
    with open(os.path.join(out, "requirements.json"), "w") as fh:
        fh.write(dump([r.to_dict() for r in state.queue]) + "\n")
