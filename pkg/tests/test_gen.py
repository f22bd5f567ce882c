import pytest

from ziptrace.errors import UsageError
from ziptrace.gen import GenSpec, gen_trace, random_suite
from ziptrace.hb_baseline import djit_detect, has_race_oracle
from ziptrace.trace import has_errors, trace_stats, validate


def test_inc_loop_size():
    tr = gen_trace(GenSpec("inc-loop", 3))
    assert len(tr) == 16
    st = trace_stats(tr)
    assert st.threads == {"0", "1", "2"}
    assert sum(1 for lab in tr.labels if lab.is_access) == 12


def test_inc_loop_races_lock_loop_does_not():
    assert has_race_oracle(gen_trace(GenSpec("inc-loop", 5)))
    small = gen_trace(GenSpec("lock-loop", 5))
    assert not has_race_oracle(small)
    assert djit_detect(gen_trace(GenSpec("lock-loop", 5000))) is None


def test_generated_traces_validate():
    for n in (0, 1, 7):
        for p in ("inc-loop", "lock-loop"):
            assert validate(gen_trace(GenSpec(p, n))) == []
    for seed in range(200):
        spec = GenSpec("random", iterations=seed % 9 + 1, threads=seed % 4 + 1, locks=seed % 4,
                       vars=seed % 4 + 1, seed=seed)
        assert not has_errors(validate(gen_trace(spec)))


def test_random_is_deterministic():
    spec = GenSpec("random", iterations=8, seed=42)
    assert gen_trace(spec) == gen_trace(spec)
    assert gen_trace(spec) != gen_trace(GenSpec("random", iterations=8, seed=43))


def test_reentrancy_bounded():
    for seed in range(100):
        tr = gen_trace(GenSpec("random", iterations=10, locks=1, seed=seed))
        assert trace_stats(tr).max_reentrancy <= 3


def test_max_events_and_suite_bounds():
    assert len(gen_trace(GenSpec("inc-loop", 100, max_events=10))) == 10
    for tr in random_suite(100, seed=1, max_events=50):
        st = trace_stats(tr)
        assert len(tr) <= 50
        assert len(st.threads) <= 4 and len(st.locks) <= 3 and len(st.variables) <= 4


def test_bad_generator_settings():
    with pytest.raises(UsageError):
        gen_trace(GenSpec("spiral"))
    with pytest.raises(UsageError):
        gen_trace(GenSpec("inc-loop", -1))
