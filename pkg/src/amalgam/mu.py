"""The mu schedule and its column bookkeeping.

A snapshot records, per column i, the pair-codes enumerated so far.  All but
the last two codes of a column form S0; the last two are j0 (older) and j1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple

from .closure import g_value


def pair(i: int, j: int) -> int:
    """Cantor pairing <i, j>."""
    return (i + j) * (i + j + 1) // 2 + j


def unpair(code: int) -> Tuple[int, int]:
    w = (math.isqrt(8 * code + 1) - 1) // 2
    j = code - w * (w + 1) // 2
    return w - j, j


@dataclass(frozen=True)
class MuSnapshot:
    n: int
    columns: Mapping[int, Tuple[int, ...]] = field(default_factory=dict)
    stage: int = 0

    def __post_init__(self):
        cols = {int(i): tuple(int(c) for c in cs) for i, cs in dict(self.columns).items()}
        for i, cs in cols.items():
            for c in cs:
                if unpair(c)[0] != i:
                    raise ValueError(f"code {c} does not belong to column {i}")
        object.__setattr__(self, "columns", cols)

    def column(self, i: int) -> Tuple[int, ...]:
        return self.columns.get(i, ())

    def j0(self, i: int) -> Optional[int]:
        cs = self.column(i)
        return cs[-2] if len(cs) >= 2 else None

    def j1(self, i: int) -> Optional[int]:
        cs = self.column(i)
        return cs[-1] if len(cs) >= 2 else None

    def s0(self, i: int) -> Tuple[int, ...]:
        return self.column(i)[:-2]

    def in_s0(self, code: int) -> bool:
        i, _ = unpair(code)
        return code in self.s0(i)

    def to_dict(self) -> dict:
        return {"n": self.n, "stage": self.stage,
                "columns": {str(i): list(cs) for i, cs in sorted(self.columns.items())}}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: Mapping) -> "MuSnapshot":
        return cls(int(d["n"]), {int(i): tuple(cs) for i, cs in d.get("columns", {}).items()},
                   int(d.get("stage", 0)))

    @classmethod
    def from_json(cls, text: str) -> "MuSnapshot":
        return cls.from_dict(json.loads(text))


def seeded(n: int, columns: Sequence[int]) -> MuSnapshot:
    """Snapshot in which each listed column holds <i,0> and <i,1>."""
    return MuSnapshot(n, {i: (pair(i, 0), pair(i, 1)) for i in columns}, 2)


def advance(snap: MuSnapshot, i: int, j: Optional[int] = None) -> MuSnapshot:
    """Enumerate <i, j> (default j = current stage) into column i and bump the stage."""
    j = snap.stage if j is None else j
    code = pair(i, j)
    if code in snap.column(i):
        raise ValueError(f"code {code} already enumerated")
    cols = dict(snap.columns)
    cols[i] = snap.column(i) + (code,)
    return MuSnapshot(snap.n, cols, max(snap.stage, j) + 1)


def omega_code_value(snap: MuSnapshot, base_size: int, omega_code: Optional[int],
                     facts: Sequence[int], m) -> int:
    """mu for a template over a base of ``base_size`` vertices.

    ``omega_code`` is c when the template is an Omega_c-extension (else None);
    ``facts`` lists the column indices i with R_i holding on the base.
    """
    hi, lo = base_size + 4, base_size + 3
    if omega_code is None:
        return lo
    i, _ = unpair(omega_code)
    j0, j1 = snap.j0(i), snap.j1(i)
    has_fact = i in facts
    if j0 is not None and omega_code == j0 and has_fact:
        return hi
    if j1 is not None and omega_code == j1 and has_fact and m >= j1:
        return hi
    if snap.in_s0(omega_code):
        return hi
    return lo


def is_permissive(snap: MuSnapshot, k: int, min_base: int = 0) -> bool:
    """mu >= k everywhere; the smallest value is min_base + 3."""
    return min_base + 3 >= k


def is_defunct(S, symbol: int, vertices, snap: MuSnapshot) -> bool:
    """Occurrence of R_i (symbol i+1) on ``vertices`` has g below the code of j1."""
    i = symbol - 1
    if i < 0:
        raise ValueError("symbol 0 (R) never carries a defunct occurrence")
    if not S.has_edge(symbol, vertices):
        raise ValueError("occurrence not present")
    j1 = snap.j1(i)
    if j1 is None:
        return False
    return g_value(S, vertices, limit=j1).finite


def limited_away_now(snap: MuSnapshot, i: int, window: int) -> bool:
    """Finite-run proxy: column i received no code within the last ``window`` stages.

    The stage at which a code <i, j> entered is read back as j.
    """
    if window <= 0:
        return True
    cs = snap.column(i)
    if not cs:
        return True
    return snap.stage - 1 - unpair(cs[-1])[1] >= window


def mu_eval(snap: MuSnapshot, S, base: Sequence[int], T, m) -> int:
    """mu(base, T, m) where the base carries the R_i facts it has in S."""
    from .gadgets import omega_index

    base = tuple(base)
    facts = [s - 1 for s, vs in S.edges if s > 0 and vs == frozenset(base)]
    return omega_code_value(snap, len(base), omega_index(T, snap.n), facts, m)
