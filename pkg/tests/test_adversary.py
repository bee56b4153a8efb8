import pytest

from amalgam.adversary import (
    CandidateStream,
    ReactiveCandidate,
    StrategyState,
    _enter_step1,
    classify,
    dalet,
    find_obstructions,
    omega_count,
    run_duel,
    strategy_step,
)
from amalgam.mu import pair, seeded
from amalgam.structures import FinStructure, StructureError

OBSTRUCTED = [(0, (0, 1, 8)), (2, (0, 8, 9)), (2, (1, 8, 9))]


class Obstructed(ReactiveCandidate):
    """Reactive candidate that also carries a small negative set over its tuple."""

    def __init__(self, n, column, symbol=0):
        super().__init__(n, column)
        edges = [(symbol if s else 0, vs) for s, vs in OBSTRUCTED]
        self.S = self.S.with_vertices([8, 9]).with_edges([(s, frozenset(vs)) for s, vs in edges])


def test_stream_text_round_trip():
    c = CandidateStream(3, (0, 1), [[("V", 0), ("V", 1)], [("V", 2), ("E", 0, (0, 1, 2))]])
    back = CandidateStream.from_text(c.to_text())
    assert back == c
    assert back.view(1).edges == frozenset()
    assert len(back.view(2).edges) == 1
    with pytest.raises(ValueError):
        CandidateStream.from_text("Q 1\n")
    bad = CandidateStream(0, (0,), [[("E", 0, (0, 1, 2))]])
    with pytest.raises(StructureError):
        bad.view(1)


def test_empty_candidate_idles():
    c = CandidateStream(0, (0, 1), [[("V", 0), ("V", 1)]])
    tr = run_duel([c], 12)
    assert classify(tr) == ["idle-step0"]
    assert tr.final["snapshot"]["columns"] == {"0": [pair(0, 0), pair(0, 1)]}
    assert tr.passes == []


def test_reactive_candidate_passes():
    tr = run_duel([ReactiveCandidate(1, 0)], 120, stop_after_passes=2)
    assert len(tr.passes) == 2
    for p in tr.passes:
        assert p["prior_j0_in_S0"] and p["apparent_persists"]
    assert classify(tr) == ["passing"]


def test_obstruction_blocks_passing():
    tr = run_duel([Obstructed(1, 0)], 60)
    assert classify(tr) == ["stuck-obstruction"]
    assert tr.passes == []


def test_find_obstructions_and_dalet():
    B = FinStructure.build(1, [0, 1, 8, 9], OBSTRUCTED)
    obs = find_obstructions(B, (0, 1))
    assert frozenset([0, 1, 8, 9]) in obs
    assert dalet(B, [0, 1, 8, 9], frozenset()) == 1
    assert dalet(B, [0, 1, 8, 9], frozenset([2])) == 3
    assert find_obstructions(FinStructure.build(1, [0, 1], []), (0, 1)) == []


def test_suspicious_symbols_remove_obstructions_in_a_second_phase():
    cand = Obstructed(1, 0, symbol=2)
    B = cand.S
    snap = seeded(1, [0])
    st = StrategyState(index=0, bbar=(0, 1), witness=2, seeded=True)
    _enter_step1(st, B, (0, 1), 3)
    assert st.obstructions and not any(r for _, r in st.obstructions)
    st, _, events = strategy_step(st, cand, B, snap, 4, {})
    assert not any(e["event"] == "removed" for e in events)
    st, _, events = strategy_step(st, cand, B, snap, 5, {1: 4})
    assert 2 in st.suspicious
    assert any(e["event"] == "removed" for e in events)
    assert all(r for _, r in st.obstructions)


def test_omega_count_on_reactive_copies():
    c = ReactiveCandidate(1, 0)
    snap = seeded(1, [0])
    c.view(1, snap)
    B = c.view(2, snap)
    base = c.tuple + (c.c,)
    assert omega_count(B, base, snap.j0(0)) == 7
    assert omega_count(B, base[:2], snap.j0(0)) == 0
