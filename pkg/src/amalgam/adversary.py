"""Strategies that enumerate the S_1 columns against candidate presentations.

Strategy i watches candidate i.  Step 0 seeds <i,0>, <i,1> and waits for a
witness c with apparent R_i(b, c); Step 1 waits until both live Omega codes
have n+6 copies over b c and every obstruction is removed; Step 2 enumerates
<i, s> and returns to Step 1.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .closure import min_delta
from .extensions import _max_packing
from .gadgets import omega_gadget
from .mu import MuSnapshot, advance, pair
from .oracle import ExhaustiveBoundError, exhaustive_bound
from .structures import FinStructure, StructureError, find_embeddings


# -- candidates ---------------------------------------------------------------------


@dataclass
class CandidateStream:
    """A finite partial atomic diagram revealed stage by stage."""

    index: int
    tuple: Tuple[int, ...]
    stages: List[List[tuple]] = field(default_factory=list)
    n: int = 1

    def view(self, stage: int, snap: Optional[MuSnapshot] = None) -> FinStructure:
        verts, edges = set(), set()
        for facts in self.stages[:max(0, stage)]:
            for f in facts:
                if f[0] == "V":
                    verts.add(f[1])
                else:
                    _, s, vs = f
                    if not set(vs) <= verts:
                        raise StructureError(f"edge {f} mentions an unintroduced vertex")
                    edges.add((s, tuple(vs)))
        return FinStructure.build(self.n, sorted(verts), sorted(edges))

    def to_text(self) -> str:
        lines = [f"N {self.n}", f"INDEX {self.index}", "TUPLE " + " ".join(map(str, self.tuple))]
        for facts in self.stages:
            for f in facts:
                if f[0] == "V":
                    lines.append(f"V {f[1]}")
                else:
                    lines.append(f"E {f[1]} " + " ".join(map(str, f[2])))
            lines.append("STAGE")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CandidateStream":
        n, index, tup = 1, 0, ()
        stages: List[List[tuple]] = [[]]
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, *rest = line.split()
            if head == "N":
                n = int(rest[0])
            elif head == "INDEX":
                index = int(rest[0])
            elif head == "TUPLE":
                tup = tuple(int(x) for x in rest)
            elif head == "V":
                stages[-1].append(("V", int(rest[0])))
            elif head == "E":
                stages[-1].append(("E", int(rest[0]), tuple(int(x) for x in rest[1:])))
            elif head == "STAGE":
                stages.append([])
            else:
                raise ValueError(f"unknown fact line: {raw!r}")
        if not stages[-1]:
            stages.pop()
        return cls(index, tup, stages, n)

    @classmethod
    def from_file(cls, path: str) -> "CandidateStream":
        with open(path) as fh:
            return cls.from_text(fh.read())

    @classmethod
    def from_run_dir(cls, path: str, tup: Sequence[int], index: int = 0) -> "CandidateStream":
        """Replay the R-reduct of a builder run, one builder stage per stream stage."""
        files = sorted(f for f in os.listdir(path) if f.startswith("stage_") and f.endswith(".json"))
        seen_v, seen_e = set(), set()
        stages, n = [], 1
        for f in files:
            with open(os.path.join(path, f)) as fh:
                N = FinStructure.from_json(fh.read())
            n = N.n
            facts = [("V", v) for v in sorted(N.vertices - seen_v)]
            new_e = sorted((vs for s, vs in N.edges if s == 0 and vs not in seen_e), key=sorted)
            facts += [("E", 0, tuple(sorted(vs))) for vs in new_e]
            seen_v |= N.vertices
            seen_e |= set(new_e)
            stages.append(facts)
        return cls(index, tuple(tup), stages, n)


class ReactiveCandidate:
    """Candidate that keeps n+6 Omega copies over (b, c) for every live code of its column.

    It plays a structure in which R_i(b, c) looks true without any dimension
    drop over b; copies for a code appear one stage after the code goes live.
    """

    def __init__(self, n: int, column: int, index: Optional[int] = None):
        self.n = n
        self.column = column
        self.index = column if index is None else index
        self.tuple = tuple(range(n + 1))
        self.c = n + 1
        self.S = FinStructure.build(n, range(n + 2), [])
        self.served: Set[int] = set()
        self.pending: List[int] = []

    def view(self, stage: int, snap: Optional[MuSnapshot] = None) -> FinStructure:
        for code in self.pending:
            if code not in self.served:
                self._add_copies(code)
                self.served.add(code)
        self.pending = []
        if snap is not None:
            cs = snap.column(self.column)
            self.pending = [c for c in cs[-2:] if c not in self.served]
        return self.S

    def _add_copies(self, code: int) -> None:
        G = omega_gadget(code, self.n)
        base = self.tuple + (self.c,)
        for _ in range(self.n + 6):
            start = self.S.next_id
            m = {b: base[j] for j, b in enumerate(G.base)}
            for j, v in enumerate(G.ext):
                m[v] = start + j
            new = [(s, tuple(m[v] for v in vs)) for s, vs in G.structure.edges if not vs <= set(G.base)]
            self.S = self.S.with_vertices([m[v] for v in G.ext]).with_edges(new)


# -- apparent relations and obstructions -----------------------------------------------


def omega_count(B: FinStructure, tup: Sequence[int], code: int) -> int:
    """Largest disjoint family of Omega_code copies over the set tup, any base order."""
    G = omega_gadget(code, B.n)
    if len(tup) != len(G.base) or not set(tup) <= B.vertices:
        return 0
    best = 0
    for order in permutations(tup):
        anchor = dict(zip(G.base, order))
        imgs = {frozenset(e[v] for v in G.ext) for e in find_embeddings(G.structure, B, anchor)}
        if len(imgs) > best:
            best = max(best, len(_max_packing(list(imgs))))
    return best


def witnesses(B: FinStructure, bbar: Sequence[int], code: int, need: int) -> List[int]:
    """Vertices c with at least ``need`` disjoint Omega_code copies over bbar ∪ {c}."""
    G = omega_gadget(code, B.n)
    k = len(G.base)
    found: Dict[int, Dict[Tuple, set]] = {}
    for cpos in range(k):
        others = [b for j, b in enumerate(G.base) if j != cpos]
        for order in permutations(bbar):
            anchor = dict(zip(others, order))
            for emb in find_embeddings(G.structure, B, anchor):
                c = emb[G.base[cpos]]
                found.setdefault(c, {}).setdefault((cpos, order), set()).add(frozenset(emb[v] for v in G.ext))
    out = []
    for c, groups in sorted(found.items()):
        if any(len(_max_packing(list(g))) >= need for g in groups.values()):
            out.append(c)
    return out


def dalet(B: FinStructure, Y: Iterable[int], symbols_out: FrozenSet[int]) -> int:
    """|Y| minus the edges inside Y whose symbol is not suspicious."""
    Y = frozenset(Y)
    return len(Y) - sum(1 for s, vs in B.edges_within(Y) if s not in symbols_out)


def find_obstructions(B: FinStructure, btuple: Sequence[int], bound: Optional[int] = None) -> List[FrozenSet[int]]:
    """Every Y ⊇ btuple with delta(Y) < |btuple|.

    Any such Y lies in the zone of points v with d(btuple ∪ {v}) < |btuple|,
    which is searched exhaustively.
    """
    b = frozenset(btuple)
    target = len(b)
    if not b <= B.vertices or min_delta(B, b) >= target:
        return []
    zone = sorted(v for v in B.vertices - b if min_delta(B, b | {v}) < target)
    bound = exhaustive_bound() if bound is None else bound
    if len(zone) > bound:
        raise ExhaustiveBoundError(f"obstruction zone has {len(zone)} points, bound {bound}")
    out = []
    for r in range(len(zone) + 1):
        for extra in combinations(zone, r):
            Y = b | frozenset(extra)
            if len(Y) - len(B.edges_within(Y)) < target:
                out.append(Y)
    return out


# -- strategy -----------------------------------------------------------------------


@dataclass
class StrategyState:
    index: int
    step: int = 0
    bbar: Tuple[int, ...] = ()
    witness: Optional[int] = None
    obstructions: List[Tuple[FrozenSet[int], bool]] = field(default_factory=list)
    late: List[FrozenSet[int]] = field(default_factory=list)
    suspicious: Set[int] = field(default_factory=set)
    passes: int = 0
    entered: int = 0
    seeded: bool = False

    def to_dict(self) -> dict:
        return {"index": self.index, "step": self.step, "bbar": list(self.bbar), "witness": self.witness,
                "obstructions": [[sorted(Y), r] for Y, r in self.obstructions],
                "late": [sorted(Y) for Y in self.late], "suspicious": sorted(self.suspicious),
                "passes": self.passes, "entered": self.entered}


def _live_codes(snap: MuSnapshot, i: int) -> List[int]:
    return list(snap.column(i)[-2:])


def _enter_step1(st: StrategyState, B: FinStructure, btuple: Sequence[int], stage: int, bound=None) -> None:
    st.step = 1
    st.entered = stage
    st.suspicious = set()
    st.obstructions = [(Y, False) for Y in find_obstructions(B, btuple, bound)]
    st.late = []


def strategy_step(st: StrategyState, candidate, B: FinStructure, snap: MuSnapshot, stage: int,
                  enum_stages: Dict[int, int], bound: Optional[int] = None) -> Tuple[StrategyState, List[Tuple[int, int]], List[dict]]:
    """Advance one strategy; returns (state, enumeration actions (column, j), events).

    ``enum_stages`` maps each column to the last stage it received a code.
    """
    n = candidate.n
    i = st.index
    acts: List[Tuple[int, int]] = []
    events: List[dict] = []
    btuple = tuple(candidate.tuple)
    if st.step == 0:
        if not st.seeded:
            if len(btuple) < n + 1:
                return st, acts, [{"event": "bad-tuple"}]
            st.bbar = btuple[:n + 1]
            st.seeded = True
            acts += [(i, 0), (i, 1)]
            events.append({"event": "seed", "codes": [pair(i, 0), pair(i, 1)]})
            return st, acts, events
        for code in _live_codes(snap, i):
            ws = [c for c in witnesses(B, st.bbar, code, n + 6) if c not in st.bbar]
            if ws:
                st.witness = ws[0]
                _enter_step1(st, B, btuple, stage, bound)
                events.append({"event": "witness", "c": st.witness, "code": code,
                               "obstructions": len(st.obstructions)})
                break
        if st.step == 0:
            return st, acts, events
    if st.step == 1:
        for col, last in enum_stages.items():
            if last > st.entered and col + 1 not in st.suspicious:
                st.suspicious.add(col + 1)
        for k, (Y, removed) in enumerate(st.obstructions):
            if not removed and dalet(B, Y, frozenset(st.suspicious)) >= len(btuple):
                st.obstructions[k] = (Y, True)
                events.append({"event": "removed", "Y": sorted(Y)})
        for Y in find_obstructions(B, btuple, bound):
            if all(Y != Z for Z, _ in st.obstructions) and Y not in st.late:
                st.late.append(Y)
                events.append({"event": "late-obstruction", "Y": sorted(Y)})
        live = _live_codes(snap, i)
        base = st.bbar + (st.witness,)
        counts = {c: omega_count(B, base, c) for c in live}
        clear = all(r for _, r in st.obstructions)
        if len(live) == 2 and all(v >= n + 6 for v in counts.values()) and clear:
            acts.append((i, stage))
            st.passes += 1
            events.append({"event": "pass", "code": pair(i, stage), "counts": {str(k): v for k, v in counts.items()}})
            _enter_step1(st, B, btuple, stage, bound)
    return st, acts, events


# -- duel ---------------------------------------------------------------------------


@dataclass
class Transcript:
    n: int
    stages: List[dict] = field(default_factory=list)
    passes: List[dict] = field(default_factory=list)
    final: Optional[dict] = None

    def to_dict(self) -> dict:
        return {"n": self.n, "stages": self.stages, "passes": self.passes, "final": self.final}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def run_duel(candidates: Sequence, stages: int, n: int = 1, bound: Optional[int] = None,
             stop_after_passes: Optional[int] = None) -> Transcript:
    """Run strategies 0..s-1 at each stage s against the candidates, one code per stage.

    With ``stop_after_passes`` the duel ends once that many Step-2 codes have
    been enumerated.
    """
    snap = MuSnapshot(n, {}, 0)
    strategies = [StrategyState(index=getattr(c, "index", j)) for j, c in enumerate(candidates)]
    queue: List[Tuple[int, int]] = []
    enum_stages: Dict[int, int] = {}
    tr = Transcript(n)
    views: Dict[int, FinStructure] = {}
    for s in range(1, stages + 1):
        rec = {"stage": s, "events": []}
        for j, (st, cand) in enumerate(zip(strategies, candidates)):
            if j >= s:
                break
            B = cand.view(s, snap)
            views[j] = B
            st, acts, events = strategy_step(st, cand, B, snap, s, enum_stages, bound)
            queue.extend(acts)
            for e in events:
                e.update(strategy=st.index, step=st.step)
                rec["events"].append(e)
        if queue:
            col, jj = queue.pop(0)
            prior = snap
            snap = advance(snap, col, jj)
            enum_stages[col] = s
            code = snap.column(col)[-1]
            rec["enum"] = {"column": col, "code": code}
            if jj >= 2:
                # a Step-2 code: check the previous j0 left the live pair and R_i still shows
                j0_prev = prior.j0(col)
                idx = [k for k, st in enumerate(strategies) if st.index == col]
                persists = None
                if idx and strategies[idx[0]].witness is not None:
                    st = strategies[idx[0]]
                    B = views.get(idx[0])
                    base = st.bbar + (st.witness,)
                    persists = omega_count(B, base, snap.j0(col)) >= n + 6 if B is not None else None
                tr.passes.append({"stage": s, "column": col, "code": code, "prior_j0": j0_prev,
                                  "prior_j0_in_S0": j0_prev is not None and snap.in_s0(j0_prev),
                                  "apparent_persists": persists})
        rec["snapshot"] = snap.to_dict()
        rec["strategies"] = [st.to_dict() for st in strategies]
        tr.stages.append(rec)
        if stop_after_passes is not None and len(tr.passes) >= stop_after_passes:
            break
    tr.final = {"snapshot": snap.to_dict(), "strategies": [st.to_dict() for st in strategies],
                "queue": [list(a) for a in queue]}
    return tr


def classify(tr: Transcript) -> List[str]:
    """Per strategy: 'idle-step0', 'stuck-obstruction', 'stuck-waiting' or 'passing'."""
    out = []
    for st in tr.final["strategies"]:
        if st["step"] == 0:
            out.append("idle-step0")
        elif any(not r for _, r in st["obstructions"]):
            out.append("stuck-obstruction")
        elif st["passes"] == 0:
            out.append("stuck-waiting")
        else:
            out.append("passing")
    return out
