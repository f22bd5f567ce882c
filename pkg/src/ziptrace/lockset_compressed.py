"""Lockset checking directly on a grammar.

A chunk's summary counts the acquires and releases it leaves unmatched
per (thread, lock), and keeps the lockset of each accessed
(thread, variable) pair relative to the chunk alone.  When two chunks
are glued, an access on the left additionally holds every lock whose
unmatched releases on the right outnumber the open acquires on the left,
and symmetrically for accesses on the right.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Sequence

from .lockset_baseline import LsLock, READ_MARKER, real, thread_dummy
from .report import ViolationReport, slp_report_stats
from .slp import Slp, rank_order
from .trace import ACQ, READ, REL, WRITE, EventLabel


class _Top:
    """The universal lockset of an unaccessed pair."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "TOP"

    def __reduce__(self):
        return (_Top, ())


TOP = _Top()


def ls_union(a, b):
    if a is TOP or b is TOP:
        return TOP
    return a | b


def ls_intersect(a, b):
    if a is TOP:
        return b
    if b is TOP:
        return a
    return a & b


@dataclass(frozen=True)
class LockSetSummary:
    open_acq: Mapping[tuple[str, str], int] = field(default_factory=dict)
    open_rel: Mapping[tuple[str, str], int] = field(default_factory=dict)
    # absent key means TOP
    lockset: Mapping[tuple[str, str], frozenset[LsLock]] = field(default_factory=dict)
    violated: frozenset[str] = frozenset()

    def get(self, t: str, x: str):
        return self.lockset.get((t, x), TOP)


def ls_summarize_terminal(label: EventLabel) -> LockSetSummary:
    t, k, x = label
    if k == READ:
        return LockSetSummary(lockset={(t, x): frozenset((READ_MARKER, thread_dummy(t)))})
    if k == WRITE:
        return LockSetSummary(lockset={(t, x): frozenset((thread_dummy(t),))})
    if k == ACQ:
        return LockSetSummary(open_acq={(t, x): 1})
    if k == REL:
        return LockSetSummary(open_rel={(t, x): 1})
    return LockSetSummary()


def chunk_violations(lockset: Mapping[tuple[str, str], frozenset[LsLock]]) -> set[str]:
    common: dict[str, frozenset[LsLock]] = {}
    for (_, x), s in lockset.items():
        c = common.get(x)
        common[x] = s if c is None else c & s
    return {x for x, s in common.items() if not s}


def ls_combine(b: LockSetSummary, c: LockSetSummary) -> LockSetSummary:
    oacq_b, orel_b, oacq_c, orel_c = b.open_acq, b.open_rel, c.open_acq, c.open_rel

    open_acq = dict(oacq_c)
    for key, n in oacq_b.items():
        left = n - orel_c.get(key, 0)
        if left > 0:
            open_acq[key] = open_acq.get(key, 0) + left
    open_rel = dict(orel_b)
    for key, n in orel_c.items():
        left = n - oacq_b.get(key, 0)
        if left > 0:
            open_rel[key] = open_rel.get(key, 0) + left

    # locks an access on one side holds because of the other side
    into_left: dict[str, set[LsLock]] = {}
    for (t, l), n in orel_c.items():
        if n > oacq_b.get((t, l), 0):
            into_left.setdefault(t, set()).add(real(l))
    into_right: dict[str, set[LsLock]] = {}
    for (t, l), n in oacq_b.items():
        if n > orel_c.get((t, l), 0):
            into_right.setdefault(t, set()).add(real(l))

    lockset: dict[tuple[str, str], frozenset[LsLock]] = {}
    for key, s in b.lockset.items():
        extra = into_left.get(key[0])
        lockset[key] = s | extra if extra else s
    for key, s in c.lockset.items():
        extra = into_right.get(key[0])
        if extra:
            s = s | extra
        cur = lockset.get(key)
        lockset[key] = s if cur is None else cur & s

    violated = b.violated | c.violated | chunk_violations(lockset)
    return LockSetSummary(open_acq, open_rel, lockset, frozenset(violated))


def ls_fold(parts: Sequence[LockSetSummary]) -> LockSetSummary:
    if not parts:
        return LockSetSummary()
    return reduce(ls_combine, parts)


def ls_fold_labels(labels: Sequence[EventLabel]) -> LockSetSummary:
    return ls_fold([ls_summarize_terminal(lab) for lab in labels])


def ls_summarize_rules(slp: Slp) -> dict[int, LockSetSummary]:
    terminal_cache: dict[EventLabel, LockSetSummary] = {}
    out: dict[int, LockSetSummary] = {}
    for rid in rank_order(slp):
        acc = None
        for sym in slp.rules[rid]:
            if isinstance(sym, int):
                part = out[sym]
            else:
                part = terminal_cache.get(sym)
                if part is None:
                    part = terminal_cache[sym] = ls_summarize_terminal(sym)
            acc = part if acc is None else ls_combine(acc, part)
        out[rid] = acc if acc is not None else LockSetSummary()
    return out


def analyze_slp_lockset(slp: Slp, input: str | None = None) -> ViolationReport:
    t0 = time.perf_counter()
    top = ls_summarize_rules(slp)[slp.start]
    wall = (time.perf_counter() - t0) * 1000
    return ViolationReport("ls-compressed", sorted(top.violated), None, input, slp_report_stats(slp, wall))
