import pytest
from helpers import structures
from hypothesis import given, strategies as st

from amalgam.closure import (
    INFINITY,
    closure_set,
    dim,
    flatness_defect,
    g_compare_below,
    g_value,
    is_in_C0,
    is_strong,
    min_delta,
    ss_closure,
)
from amalgam.gadgets import build_D_hat, build_path
from amalgam.oracle import brute_c0, brute_closure, brute_g, brute_min_delta
from amalgam.structures import FinStructure, StructureError


@pytest.mark.parametrize("k", [5, 6, 7, 8])
def test_loop_examples(k):
    L = build_path("L", k).structure
    assert not is_strong(L, [0])
    assert closure_set(L, [0]) == L.vertices
    assert dim(L, [0]) == 0
    assert g_value(L, [0]).value == max(1, k - 1)
    assert brute_g(L, [0])[0] == max(1, k - 1)
    value, minimisers = brute_min_delta(L, [0])
    assert value == 0 and minimisers == [L.vertices]


@pytest.mark.parametrize("k", [3, 4, 5, 6, 7, 8])
def test_path_base_is_strong(k):
    G = build_path("P", k)
    assert is_strong(G.structure, G.base)
    assert dim(G.structure, G.base) == 2


def test_trivial_cases():
    S = FinStructure.build(1, range(4), [])
    assert is_strong(S, S.vertices)
    assert dim(S, range(4)) == 4
    assert g_value(S, [0, 1]).value is INFINITY
    assert closure_set(S, [1]) == frozenset([1])
    assert min_delta(S, [2, 3]) == 2


def test_dhat_base_is_strong():
    G = build_D_hat(2, 4)
    assert closure_set(G.structure, G.base) == frozenset(G.base)


def test_g_compare_below():
    L = build_path("L", 6).structure
    assert g_compare_below(L, [0], 9)
    assert not g_compare_below(L, [0], 5)
    G = build_path("P", 5)
    assert not g_compare_below(G.structure, G.base, 100)


def test_closure_report_chain_ends_at_closure():
    L = build_path("L", 5).structure
    rep = ss_closure(L, [0])
    assert rep.closure == L.vertices and rep.delta_value == 0


def test_flatness_examples():
    S = FinStructure.build(1, range(4), [])
    assert flatness_defect(S, [[0]]) == 0
    assert flatness_defect(S, [[0], [1]]) == 0
    assert flatness_defect(S, [[0, 1], [1, 2]]) == 0
    L = build_path("L", 5).structure.with_vertices([9])
    with pytest.raises(StructureError):
        flatness_defect(L, [[0]])


def test_flatness_conventions_differ_only_in_empty_term():
    S = FinStructure.build(1, range(3), [])
    a = flatness_defect(S, [[0], [1]], convention="closure")
    b = flatness_defect(S, [[0], [1]], convention="ambient")
    assert a - b == dim(S, [0, 1]) - dim(S, range(3))


@given(structures(), st.data())
def test_closure_matches_brute(S, data):
    A = data.draw(st.sets(st.sampled_from(sorted(S.vertices)))) if S.vertices else set()
    assert closure_set(S, A) == brute_closure(S, A)
    assert min_delta(S, A) == brute_min_delta(S, A)[0]
    assert closure_set(S, closure_set(S, A)) == closure_set(S, A)


@given(structures(), st.data())
def test_g_matches_brute(S, data):
    A = data.draw(st.sets(st.sampled_from(sorted(S.vertices)))) if S.vertices else set()
    want = brute_g(S, A)[0]
    got = g_value(S, A)
    assert (got.value is INFINITY) == (want is None)
    if want is not None:
        assert got.value == want


@given(structures())
def test_c0_matches_brute(S):
    assert is_in_C0(S) == brute_c0(S)
