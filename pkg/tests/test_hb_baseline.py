import itertools

import pytest

from ziptrace.errors import OracleCapExceeded, UsageError
from ziptrace.gen import random_suite
from ziptrace.hb_baseline import (
    RacePair, VectorClock, after_before_oracle, conflicting, djit_detect, djit_races,
    goldilocks_detect, goldilocks_races, has_race_oracle, hb_closure_oracle,
    hb_leq_by_clock, oracle_cap, races_oracle, vector_clocks,
)
from ziptrace.trace import Trace, lock_obj, parse_trace, thread_obj

T1, T2, L = thread_obj("1"), thread_obj("2"), lock_obj("l")


def warshall(trace: Trace):
    """Textbook closure over explicit edges, for tiny traces."""
    n = len(trace)
    rel = [[i == j for j in range(n + 1)] for i in range(n + 1)]
    labs = (None,) + trace.labels
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            a, b = labs[i], labs[j]
            if a.thread == b.thread:
                rel[i][j] = True
            if a.kind == "rel" and b.kind == "acq" and a.target == b.target:
                rel[i][j] = True
            if a.kind == "fork" and b.thread == a.target:
                rel[i][j] = True
            if b.kind == "join" and a.thread == b.target:
                rel[i][j] = True
    for k in range(1, n + 1):
        for i in range(1, n + 1):
            if rel[i][k]:
                for j in range(1, n + 1):
                    if rel[k][j]:
                        rel[i][j] = True
    return rel


def test_sigma1_hb_goldens(s1):
    hb = hb_closure_oracle(s1)
    assert hb.leq(5, 10)
    assert hb.concurrent(10, 13)
    assert all(hb.leq(i, i) for i in range(1, 17))
    assert races_oracle(s1) == [RacePair(10, 13, "y")]


def test_detectors_on_fixtures(s1, s2):
    assert djit_detect(s1) == RacePair(10, 13, "y")
    assert goldilocks_detect(s1) == RacePair(10, 13, "y")
    assert djit_detect(s2) is None
    assert goldilocks_detect(s2) is None
    assert not has_race_oracle(s2)


def test_single_thread_never_races():
    tr = parse_trace("1|w(x)\n1|r(x)\n1|w(x)")
    assert djit_detect(tr) is None and goldilocks_detect(tr) is None


def test_first_write_is_not_a_race():
    tr = parse_trace("1|w(x)")
    assert goldilocks_detect(tr) is None
    # a read by another thread of a never-written variable is fine too
    assert goldilocks_detect(parse_trace("1|r(x)\n2|r(x)")) is None


def test_write_write_race_found():
    tr = parse_trace("1|w(x)\n2|w(x)")
    assert djit_detect(tr) == goldilocks_detect(tr) == RacePair(1, 2, "x")


def test_partner_is_latest_unordered_access():
    tr = parse_trace("2|r(x)\n3|r(x)\n1|w(x)")
    assert djit_detect(tr) == goldilocks_detect(tr) == RacePair(2, 3, "x")


def test_lock_clock_accumulates_all_releases():
    # the acquire by 3 is ordered after both earlier releases
    tr = parse_trace("1|w(x)\n1|acq(l)\n1|rel(l)\n2|acq(l)\n2|rel(l)\n3|acq(l)\n3|w(x)\n3|rel(l)")
    assert djit_detect(tr) is None
    assert not has_race_oracle(tr)


def test_all_races_streamed(s1):
    assert list(djit_races(s1)) == list(goldilocks_races(s1)) == [RacePair(10, 13, "y")]


def test_after_before_goldens(s1):
    chunk_e = Trace(s1.labels[0:2])
    chunk_c = Trace(s1.labels[0:6])
    chunk_b = Trace(s1.labels[2:6] + s1.labels[14:16])
    assert after_before_oracle(chunk_e, 1)[0] == {T1, T2}
    assert after_before_oracle(chunk_c, 1)[0] == {T1, T2, L}
    assert after_before_oracle(chunk_b, 6)[1] == {T1, T2, L}


def test_after_before_single_event():
    tr = parse_trace("t|w(x)")
    t = thread_obj("t")
    assert after_before_oracle(tr, 1) == ({t}, {t})
    with pytest.raises(UsageError):
        after_before_oracle(tr, 2)


def test_cap(monkeypatch):
    tr = Trace(parse_trace("1|r(x)").labels * 5)
    with pytest.raises(OracleCapExceeded):
        hb_closure_oracle(tr, cap=4)
    monkeypatch.setenv("ZIPTRACE_ORACLE_CAP", "3")
    assert oracle_cap() == 3
    with pytest.raises(OracleCapExceeded):
        has_race_oracle(tr)
    monkeypatch.setenv("ZIPTRACE_ORACLE_CAP", "junk")
    assert oracle_cap() == 2000


def test_vector_clock_ops():
    a = VectorClock({"1": 2})
    b = VectorClock({"2": 1, "1": 1})
    j = a.join(b)
    assert j == VectorClock({"1": 2, "2": 1}) == b.join(a)
    assert a <= j and b <= j and not j <= a
    assert a.join(a) == a
    assert j["9"] == 0


def small_traces():
    return list(random_suite(150, seed=5, max_events=25))


def test_closure_matches_warshall():
    for tr in small_traces():
        hb = hb_closure_oracle(tr)
        ref = warshall(tr)
        n = len(tr)
        for i, j in itertools.product(range(1, n + 1), repeat=2):
            assert hb.leq(i, j) == ref[i][j]


def test_closure_is_partial_order():
    for tr in small_traces()[:60]:
        hb = hb_closure_oracle(tr)
        n = len(tr)
        for i, j in itertools.product(range(1, n + 1), repeat=2):
            if i != j and hb.leq(i, j):
                assert not hb.leq(j, i)
                for k in range(1, n + 1):
                    if hb.leq(j, k):
                        assert hb.leq(i, k)


def test_clocks_agree_with_closure():
    for tr in small_traces():
        hb = hb_closure_oracle(tr)
        vcs = vector_clocks(tr)
        n = len(tr)
        for i, j in itertools.product(range(1, n + 1), repeat=2):
            assert hb_leq_by_clock(vcs, tr, i, j) == hb.leq(i, j)
            if hb.leq(i, j):
                assert vcs[i - 1] <= vcs[j - 1]


def test_detectors_agree_with_oracle():
    for tr in random_suite(300, seed=21, max_events=120):
        truth = races_oracle(tr)
        d, g = djit_detect(tr), goldilocks_detect(tr)
        assert (d is not None) == (g is not None) == bool(truth)
        if truth:
            # both report the first racy access with the same partner
            assert d == g
            assert d.second == min(p.second for p in truth)
            assert any(p == d for p in truth)


def test_conflicting():
    tr = parse_trace("1|r(x)\n2|r(x)\n2|w(x)\n1|w(y)")
    assert not conflicting(tr[1], tr[2])
    assert conflicting(tr[1], tr[3])
    assert not conflicting(tr[3], tr[4])
