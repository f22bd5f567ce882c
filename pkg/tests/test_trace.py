import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ziptrace.errors import TraceParseError, UsageError
from ziptrace.trace import (
    ACQ, OP_KINDS, READ, WRITE, EventLabel, Trace, first, has_errors, last, make_label,
    match_event, parse_trace, project, reads, serialize_trace, trace_stats, validate, writes,
)


def test_parse_two_events():
    tr = parse_trace("1|w(x)\n1|fork(2)")
    assert len(tr) == 2
    assert tr.threads == {"1", "2"}
    assert tr[2].label == EventLabel("1", "fork", "2")


def test_parse_skips_comments_and_blanks():
    tr = parse_trace("# header\n\n1|r(x)\n   \n# more\n2|w(x)\n")
    assert [ev.index for ev in tr] == [1, 2]
    assert tr[2].thread == "2"


def test_parse_empty():
    assert len(parse_trace("")) == 0


@pytest.mark.parametrize("bad", ["1|foo(x)", "1|r()", "1 |r(x)", "1|r(x-y)", "|r(x)", "1|r(x)extra"])
def test_parse_rejects_malformed(bad):
    with pytest.raises(TraceParseError) as info:
        parse_trace("1|r(x)\n" + bad)
    assert info.value.line == 2
    assert "line 2" in str(info.value)


def test_numeric_tokens_stay_strings():
    tr = parse_trace("007|w(01)")
    assert tr[1].thread == "007" and tr[1].target == "01"


def test_sigma1_metadata(s1):
    st_ = trace_stats(s1)
    assert st_.threads == {"1", "2"}
    assert st_.locks == {"l"}
    assert st_.wvars == {"x", "y"}
    assert st_.rvars == {("1", "x"), ("2", "x")}
    assert st_.max_reentrancy == 1


def test_sigma1_reads_writes(s1):
    s = reads(s1, "2", "x")
    assert [e.index for e in s] == [3, 11]
    assert last(s).index == 11
    w = writes(s1, "y")
    assert [e.index for e in w] == [5, 10, 13, 16]
    assert first(w).index == 5
    assert first([]) is None


def test_empty_stats():
    st_ = trace_stats(Trace())
    assert st_.n_events == 0 and not st_.threads and not st_.rvars and st_.max_reentrancy == 0


def test_reentrancy_depth():
    assert trace_stats(parse_trace("1|acq(l)\n1|acq(l)")).max_reentrancy == 2


def test_match_reentrant():
    tr = parse_trace("1|acq(l)\n1|acq(l)\n1|rel(l)\n1|rel(l)")
    assert match_event(tr, 3).index == 2
    assert match_event(tr, 4).index == 1
    assert match_event(tr, tr[1]).index == 4


def test_match_sigma1(s1):
    assert match_event(s1, 6).index == 4


def test_match_unmatched_release():
    assert match_event(parse_trace("1|rel(l)"), 1) is None


def test_match_errors(s1):
    with pytest.raises(UsageError):
        match_event(s1, 1)
    with pytest.raises(UsageError):
        match_event(s1, 99)


def test_project(s1):
    assert [e.index for e in project(s1, "2")] == [3, 4, 5, 6, 11, 12, 13, 14]
    assert project(s1, "9") == []
    one = parse_trace("1|r(x)\n1|w(y)")
    assert project(one, "1") == one.events


def test_validate_sigma1_clean(s1):
    assert validate(s1) == []


def test_validate_join_unforked():
    d = validate(parse_trace("1|join(2)"))
    assert [x.code for x in d] == ["join-unforked"]
    assert has_errors(d)


def test_validate_unmatched_release_is_warning():
    d = validate(parse_trace("1|rel(l)"))
    assert [(x.severity, x.code) for x in d] == [("warning", "unmatched-release")]
    assert not has_errors(d)


@pytest.mark.parametrize(
    "text, code",
    [
        ("2|r(x)\n1|fork(2)", "event-before-fork"),
        ("1|fork(1)", "self-fork"),
        ("1|fork(2)\n1|join(1)", "self-join"),
        ("1|fork(2)\n3|join(2)", "join-parent-mismatch"),
        ("1|acq(l)\n2|acq(l)", "lock-held-elsewhere"),
        ("1|acq(l)", "unmatched-acquire"),
        ("1|fork(2)\n1|join(2)\n2|r(x)", "event-after-join"),
        ("1|fork(2)\n1|fork(2)", "double-fork"),
    ],
)
def test_validate_codes(text, code):
    assert code in {d.code for d in validate(parse_trace(text))}


def test_lock_reacquired_after_release_is_fine():
    assert validate(parse_trace("1|acq(l)\n1|rel(l)\n2|acq(l)\n2|rel(l)")) == []


def test_make_label_checks():
    with pytest.raises(UsageError):
        make_label("1", "lock", "l")
    with pytest.raises(UsageError):
        make_label("a b", READ, "x")
    assert str(make_label("t", WRITE, "x")) == "t|w(x)"


tokens = st.sampled_from(["1", "2", "t3", "x", "y_0", "l"])
labels = st.builds(EventLabel, tokens, st.sampled_from(OP_KINDS), tokens)


@settings(max_examples=200, deadline=None)
@given(st.lists(labels, max_size=40))
def test_roundtrip(labs):
    tr = Trace(labs)
    assert parse_trace(serialize_trace(tr)) == tr


@settings(max_examples=200, deadline=None)
@given(st.lists(labels, max_size=40))
def test_match_is_involution(labs):
    tr = Trace(labs)
    for ev in tr:
        if ev.kind not in ("acq", "rel"):
            continue
        m = match_event(tr, ev)
        if m is None:
            continue
        assert match_event(tr, m) == ev
        assert m.thread == ev.thread and m.target == ev.target
        acq, rel = (ev, m) if ev.kind == ACQ else (m, ev)
        assert acq.kind == ACQ and acq.index < rel.index


@settings(max_examples=200, deadline=None)
@given(st.lists(labels, max_size=40))
def test_stats_match_definitions(labs):
    tr = Trace(labs)
    s = trace_stats(tr)
    threads = {lab.thread for lab in labs}
    assert s.rvars == {(t, x) for t in threads for x in tr.variables if reads(tr, t, x)}
    assert s.wvars == {x for x in tr.variables if writes(tr, x)}
    for t in threads:
        p = project(tr, t)
        assert [e.index for e in p] == sorted(e.index for e in p)
        assert {e.index for e in p} == {e.index for e in tr if e.thread == t}
