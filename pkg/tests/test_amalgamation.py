import pytest

from amalgam.amalgamation import (
    MAX_FAMILY,
    NEGATIVE_Y,
    algebraic_amalgamate,
    decompose_strong,
    strong_amalgamate,
)
from amalgam.closure import is_strong
from amalgam.extensions import in_class
from amalgam.gadgets import build_D_hat, build_path
from amalgam.mu import seeded
from amalgam.structures import FinStructure, StructureError

SNAP = seeded(1, [0, 1])


def fan(copies, start=2):
    return FinStructure.build(1, [0, 1] + list(range(start, start + copies)),
                              [(0, (0, 1, start + j)) for j in range(copies)])


def test_decompose_free_and_algebraic_steps():
    B = FinStructure.build(1, range(5), [(0, (0, 1, 2))])
    steps = decompose_strong([0, 1], B)
    assert [s.kind for s in steps] == ["algebraic", "free", "free"]
    assert steps[0].new == frozenset([2])
    P = build_path("P", 5)
    steps = decompose_strong(P.base, P.structure)
    assert len(steps) == 1 and steps[0].kind == "algebraic"
    with pytest.raises(StructureError):
        decompose_strong([0], build_path("L", 5).structure)


def test_join_below_the_cap():
    B1 = FinStructure.build(1, [0, 1, 50], [(0, (0, 1, 50))])
    out = algebraic_amalgamate([0, 1], B1, fan(4), SNAP, verify=True)
    assert out.exception is None and len(out.result.vertices) == 7
    assert in_class(out.result, SNAP).accept


def test_max_family_at_the_cap():
    B1 = FinStructure.build(1, [0, 1, 50], [(0, (0, 1, 50))])
    out = algebraic_amalgamate([0, 1], B1, fan(5), SNAP)
    assert out.exception == MAX_FAMILY and out.certificate["mu"] == 5
    D, g = strong_amalgamate([0, 1], B1, fan(5), SNAP)
    assert D == fan(5) and g[50] == 2


def test_negative_set_blocks_join():
    B1 = FinStructure.build(1, [0, 1, 50, 51], [(0, (0, 50, 51)), (0, (1, 50, 51))])
    B2 = FinStructure.build(1, [0, 1, 2, 3], [(0, (0, 1, 2)), (0, (0, 2, 3)), (0, (1, 2, 3))])
    out = algebraic_amalgamate([0, 1], B1, B2, SNAP)
    assert out.exception == NEGATIVE_Y and out.certificate["Y"] == [2, 3]


def test_self_amalgamation_of_dhat():
    G = build_D_hat(2, 4)
    B1 = G.structure
    shift = {v: (v if v in G.base else v + 100) for v in B1.vertices}
    B2 = B1.relabel(shift)
    D, g = strong_amalgamate(G.base, B1, B2, SNAP)
    assert len(D.vertices) == 19
    assert is_strong(D, B2.vertices) and is_strong(D, set(g.values()))
    assert in_class(D, SNAP).accept


def test_trivial_amalgam_is_identity():
    A = FinStructure.build(1, range(3), [(0, (0, 1, 2))])
    D, g = strong_amalgamate(A.vertices, A, A, SNAP)
    assert D == A and g == {v: v for v in A.vertices}


def test_input_checks():
    A = FinStructure.build(1, range(3), [(0, (0, 1, 2))])
    B = FinStructure.build(1, range(3), [])
    with pytest.raises(StructureError):
        strong_amalgamate([0, 1, 2], A, B, SNAP)
    with pytest.raises(StructureError):
        algebraic_amalgamate([0, 1], A, fan(2, start=2), SNAP)
