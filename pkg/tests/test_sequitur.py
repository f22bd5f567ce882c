import random

from hypothesis import given, settings
from hypothesis import strategies as st

from ziptrace.gen import GenSpec, gen_trace
from ziptrace.sequitur import digram_violations, sequitur_compress, utility_violations
from ziptrace.slp import Slp, expand, grammar_stats, validate_slp
from ziptrace.trace import EventLabel, Trace

a, b, c = (EventLabel("1", "r", v) for v in "abc")


def check(tr: Trace) -> Slp:
    g = sequitur_compress(tr)
    assert expand(g) == tr
    assert digram_violations(g) == []
    assert utility_violations(g) == []
    assert not any(d.severity == "error" for d in validate_slp(g))
    return g


def test_single_event():
    g = check(Trace([a]))
    assert g.rules == {0: (a,)}


def test_abcabc():
    g = check(Trace([a, b, c, a, b, c]))
    assert g.rules == {0: (1, 1), 1: (a, b, c)}


def test_empty_trace():
    g = sequitur_compress(Trace())
    assert g.rules == {0: ()}


def test_runs_of_one_symbol():
    for n in range(1, 40):
        check(Trace([a] * n))


def test_utility_collapses_nested_rules():
    # abcdbc... style inputs force a rule to drop to a single use
    d = EventLabel("1", "r", "d")
    check(Trace([a, b, c, d, b, c, a, b, c, d]))


def test_checkers_catch_bad_grammars():
    assert digram_violations(Slp(0, {0: (a, b, a, b)})) == [(a, b)]
    assert digram_violations(Slp(0, {0: (a, a, a)})) == []
    assert digram_violations(Slp(0, {0: (a, a, a, a)})) == [(a, a)]
    assert utility_violations(Slp(0, {0: (1, a), 1: (a, b)})) == [1]


def test_random_traces():
    rng = random.Random(11)
    alphabet = [EventLabel(str(t), k, v) for t in "12" for k in ("r", "w") for v in "xy"]
    for _ in range(300):
        k = rng.randint(1, len(alphabet))
        n = rng.randint(0, 300)
        check(Trace(rng.choice(alphabet[:k]) for _ in range(n)))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from([a, b, c]), max_size=60))
def test_property_roundtrip_and_invariants(labs):
    check(Trace(labs))


def test_loop_ratio():
    tr = gen_trace(GenSpec("inc-loop", 10**5))
    g = check(tr)
    assert grammar_stats(g).compression_ratio >= 100


def test_ratio_grows_with_n():
    ratios = [grammar_stats(sequitur_compress(gen_trace(GenSpec("inc-loop", n)))).compression_ratio
              for n in (64, 128, 256, 512)]
    assert all(r2 > r1 for r1, r2 in zip(ratios, ratios[1:]))
