import filecmp
import os
import random

import pytest

from amalgam.builder import (
    BuildConfig,
    closure_profile,
    dimension_audit,
    extract_submodel,
    hat_expansion,
    initial_state,
    run,
    run_stage,
)
from amalgam.closure import min_delta
from amalgam.extensions import in_class
from amalgam.gadgets import build_path
from amalgam.structures import FinStructure, StructureError

from helpers import random_structure

SMALL = {"point": 2, "edge": 1, "cycle": 1, "fact": 1, "omega": 1, "defunct": 2}


@pytest.fixture(scope="module")
def small_run():
    return run(BuildConfig(n=1, quotas=dict(SMALL)), 8)


def test_small_run_invariants(small_run):
    st = small_run
    assert len(st.history) == 9
    assert all(a["ok"] for a in st.audits)
    assert in_class(st.N, st.snap).accept
    assert len(st.tombstones) == 2
    assert not (st.tombstone_set & st.N.edges)
    for a, b in zip(st.history, st.history[1:]):
        assert a.vertices <= b.vertices


def test_config_round_trip():
    c = BuildConfig(n=1, enumerate=(0, None, 1), default_column=None, quotas=dict(SMALL))
    assert BuildConfig.from_dict(c.to_dict()) == c
    assert [c.column_at(s) for s in range(1, 5)] == [0, None, 1, None]


def test_stage_without_enumeration():
    st = initial_state(BuildConfig(n=1, enumerate=(None,), default_column=None, quotas=dict(SMALL)))
    before = st.snap
    run_stage(st)
    assert st.snap.columns == before.columns
    assert not any(line.startswith("ENUM") for line in st.log)


def test_run_dir_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = BuildConfig(n=1, quotas=dict(SMALL))
    run(cfg, 6, out=str(a))
    run(cfg, 6, out=str(b))
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b))
    assert "stage_0006.json" in names and "snapshot.json" in names
    _, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert mismatch == [] and errors == []


def test_audit_is_sound():
    rng = random.Random(11)
    for _ in range(200):
        before = random_structure(rng, rng.randint(2, 6), symbols=(0,), max_edges=4)
        after = before
        if rng.random() < 0.5 and before.edges:
            after = after.without_edges([rng.choice(sorted(before.edges, key=str))])
        w = before.next_id
        extra = [(0, frozenset(rng.sample(sorted(before.vertices), 2) + [w]))] if len(before.vertices) >= 2 else []
        after = after.with_vertices([w]).with_edges(extra)
        exact = all(min_delta(before, X) == min_delta(after, X) for X in _all_subsets(before.vertices))
        assert dimension_audit(before, after)["ok"] == exact
        if dimension_audit(before, after, exhaustive_limit=0)["ok"]:
            assert exact


def _all_subsets(V):
    from itertools import chain, combinations
    V = sorted(V)
    return chain.from_iterable(combinations(V, r) for r in range(len(V) + 1))


def test_hat_verdicts_follow_counts(small_run):
    n = small_run.config.n
    for t, per_col in hat_expansion(small_run).items():
        for i, rec in per_col.items():
            assert rec["verdict"] == (rec["count"] >= n + 6)


def test_extract_submodel(small_run):
    st = small_run
    v = min(st.N.vertices)
    got = extract_submodel(st, [v])
    assert v in got and got <= st.N.vertices
    with pytest.raises(StructureError):
        extract_submodel(st, sorted(st.N.vertices)[:3])


def test_closure_profile():
    S = FinStructure.build(1, range(4), [(0, (0, 1, 2))])
    prof = closure_profile(S, [(0, 1), (3,)])
    assert prof[(0, 1)] == ((0, 1), ())
    assert prof[(3,)] == ((3,), ())
    L = build_path("L", 5).structure
    assert closure_profile(L, [(0,)])[(0,)][0] == (0, 1, 2, 3, 4)
