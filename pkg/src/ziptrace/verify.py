"""Differential verification: every engine and oracle must agree."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .engines import ENGINES, HB_ENGINES, run_engine, wants_grammar
from .hb_baseline import has_race_oracle, oracle_cap
from .lockset_baseline import lockset_violations_oracle
from .sequitur import sequitur_compress
from .slp import normalize
from .trace import Trace


@dataclass
class Verdict:
    trace: Trace
    hb: dict[str, bool]
    ls: dict[str, frozenset[str]]

    @property
    def agree(self) -> bool:
        return len(set(self.hb.values())) <= 1 and len(set(self.ls.values())) <= 1

    def to_dict(self) -> dict:
        return {
            "events": len(self.trace),
            "agree": self.agree,
            "hb": self.hb,
            "ls": {k: sorted(v) for k, v in self.ls.items()},
        }


def check_trace(trace: Trace, cap: int | None = None, run_threshold: int | None = None) -> Verdict:
    """All engines on one trace, plus the brute-force oracles under the cap."""
    slp = sequitur_compress(trace)
    if run_threshold and len(trace):
        slp = normalize(slp, run_threshold)
    hb: dict[str, bool] = {}
    ls: dict[str, frozenset[str]] = {}
    for engine in ENGINES:
        rep = run_engine(engine, slp if wants_grammar(engine) else trace)
        if engine in HB_ENGINES:
            hb[engine] = rep.race_found
        else:
            ls[engine] = frozenset(rep.violations)
    cap = oracle_cap() if cap is None else cap
    if len(trace) <= cap:
        hb["oracle"] = has_race_oracle(trace, cap)
        ls["oracle"] = frozenset(lockset_violations_oracle(trace, cap))
    return Verdict(trace, hb, ls)


def minimize(trace: Trace, failing: Callable[[Trace], bool]) -> Trace:
    """Greedily drop blocks of events while ``failing`` still holds."""
    labels = list(trace.labels)
    block = max(1, len(labels) // 2)
    while block >= 1:
        i = 0
        shrunk = False
        while i < len(labels):
            cand = labels[:i] + labels[i + block:]
            if cand and failing(Trace(cand)):
                labels = cand
                shrunk = True
            else:
                i += block
        if not shrunk:
            block //= 2
    return Trace(labels)


def verify_traces(traces: Iterable[Trace], cap: int | None = None) -> tuple[int, list[Verdict]]:
    """(number checked, disagreeing verdicts with minimized traces)."""
    n = 0
    bad: list[Verdict] = []
    for tr in traces:
        n += 1
        v = check_trace(tr, cap)
        if not v.agree:
            small = minimize(tr, lambda t: not check_trace(t, cap).agree)
            bad.append(check_trace(small, cap))
    return n, bad

