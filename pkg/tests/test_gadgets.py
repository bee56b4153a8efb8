import pytest

from amalgam.closure import dim, is_in_C0, is_strong
from amalgam.extensions import in_class
from amalgam.gadgets import (
    D_parts,
    build_D,
    build_D_hat,
    build_path,
    drop_dimension,
    omega,
    omega_gadget,
    omega_index,
    padding_plan,
    t_lower_bounds,
    verify_unblockable,
)
from amalgam.mu import seeded
from amalgam.oracle import oracle_D, oracle_D_hat
from amalgam.structures import FinStructure, StructureError, delta, delta_rel


def test_parameter_guards():
    with pytest.raises(StructureError):
        build_D(2, 2)
    with pytest.raises(StructureError):
        build_D_hat(2, 3)
    with pytest.raises(StructureError):
        build_path("H", 3)
    with pytest.raises(StructureError):
        build_path("Q", 6)
    with pytest.raises(StructureError):
        omega(0, 0)


def test_shapes():
    H = build_path("H", 5)
    assert (len(H.structure.vertices), len(H.structure.edges)) == (5, 4)
    for k in (5, 6, 9):
        L = build_path("L", k).structure
        assert delta(L) == 0 and is_in_C0(L)
    P = build_path("P", 6)
    assert delta_rel(P.structure, P.ext, P.base) == 0
    assert len(omega(0, 1).base) == 3
    assert len(omega(2, 2).base) == 4


@pytest.mark.parametrize("k,t", [(2, 3), (3, 4), (3, 6)])
def test_D_matches_oracle(k, t):
    G = build_D(k, t)
    S = oracle_D(k, t)[0]
    assert S.relabel({v: v - 1 for v in S.vertices}) == G.structure
    parts = D_parts(k, t)
    assert len(parts["B1"]) == t + 1 and len(parts["B2"]) == t + 1
    assert set(parts["B1"]) & set(parts["B2"]) == {k + 2, k + 2 + t}


@pytest.mark.parametrize("k,t", [(2, 4), (3, 5)])
def test_D_hat_matches_oracle(k, t):
    G = build_D_hat(k, t)
    S, A, _ = oracle_D_hat(k, t)
    assert S.relabel({v: v - 1 for v in S.vertices}) == G.structure
    assert sorted(v - 1 for v in A) == list(G.base)


@pytest.mark.parametrize("i,n", [(0, 1), (1, 1), (3, 1), (0, 2)])
def test_omega_index_round_trip(i, n):
    assert omega_index(omega(i, n), n) == i


def test_omega_index_rejects_other_templates():
    assert omega_index(build_path("P", 5).template, 1) is None
    assert omega_index(build_D_hat(3, 5).template, 1) is None


def test_padding_plan():
    assert padding_plan((0, 1, 2, 3)) == (0, 1)
    assert padding_plan((0, 1, 2, 3, 4)) == (0, 1)
    assert padding_plan((0, 1)) == (2, 3)
    assert padding_plan((0,)) == (3, 4)


def test_drop_dimension_on_a_four_tuple():
    M = FinStructure.build(1, range(6), [(0, (0, 4, 5))])
    E, info = drop_dimension(M, (0, 1, 2, 3))
    assert info["pads"] == [] and len(info["attachments"]) == 1
    assert not is_strong(E, M.vertices)
    assert dim(E, (0, 1, 2, 3)) == dim(M, (0, 1, 2, 3)) - 1
    assert dim(E, (4, 5)) == dim(M, (4, 5))
    assert in_class(E, seeded(1, [0, 1])).accept


def test_drop_dimension_pads_short_tuples():
    M = FinStructure.build(1, range(2), [])
    E, info = drop_dimension(M, (0, 1))
    assert len(info["pads"]) == 2 and len(info["attachments"]) == 3
    assert dim(E, (0, 1)) == dim(M, (0, 1)) - 1
    assert is_in_C0(E)


def test_t_lower_bounds():
    M = FinStructure.build(1, range(4), [(1, (0, 1, 2))])
    b = t_lower_bounds(M, seeded(1, [0, 1]))
    assert b == {"size": 4, "symbols": 1, "mu_stable": 4}
    assert t_lower_bounds(FinStructure.build(1, [], []))["symbols"] == 0


def test_unblockable_small_hosts():
    snap = seeded(1, [0, 1])
    for G in (omega_gadget(0, 1), build_path("P", 5)):
        r = verify_unblockable(G, snap, 5)
        assert r.passed and r.hosts_checked > 0
