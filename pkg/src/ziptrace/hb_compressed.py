"""Happens-before race detection directly on a grammar.

Each nonterminal D gets an :class:`HbSummary` describing how its chunk
interacts with whatever comes before or after it:

* ``af[u]``: After set of the first event of D that synchronises "out of" u
  (for a thread t: first event of t or first join of t; for a lock l: first
  acquire of l);
* ``bl[u]``: Before set of the last event synchronising "into" u (last event
  of t or last fork of t; last release of l);
* ``ar[(t, x)]`` / ``aw[x]``: After set of the last read of x by t / last
  write of x;
* ``br[(t, x)]`` / ``bw[x]``: Before set of the first such access;
* ``race``: whether the chunk already contains a race.

A race across B|C exists iff some last access on the left and first
conflicting access on the right share no thread or lock.  Sets use the
reflexive order, so an event's own thread is always in its sets.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Sequence

from .errors import UsageError
from .hb_baseline import djit_detect, vector_clocks
from .report import RaceReport, slp_report_stats
from .slp import Slp, rank_order
from .trace import (
    ACQ, FORK, JOIN, READ, REL, WRITE,
    EventLabel, SyncObject, Trace, lock_obj, thread_obj,
)

ObjSet = frozenset  # frozenset[SyncObject]


@dataclass(frozen=True)
class HbSummary:
    race: bool = False
    af: Mapping[SyncObject, ObjSet] = field(default_factory=dict)
    bl: Mapping[SyncObject, ObjSet] = field(default_factory=dict)
    ar: Mapping[tuple[str, str], ObjSet] = field(default_factory=dict)
    aw: Mapping[str, ObjSet] = field(default_factory=dict)
    br: Mapping[tuple[str, str], ObjSet] = field(default_factory=dict)
    bw: Mapping[str, ObjSet] = field(default_factory=dict)


def summarize_terminal(label: EventLabel) -> HbSummary:
    t, k, x = label
    T = thread_obj(t)
    only_t = frozenset((T,))
    af = {T: only_t}
    bl = {T: only_t}
    ar = aw = br = bw = {}
    if k == READ:
        ar = br = {(t, x): only_t}
    elif k == WRITE:
        aw = bw = {x: only_t}
    elif k == ACQ:
        L = lock_obj(x)
        af[L] = only_t
        bl[T] = frozenset((T, L))
    elif k == REL:
        L = lock_obj(x)
        af[T] = frozenset((T, L))
        bl[L] = only_t
    elif k == FORK:
        C = thread_obj(x)
        af[T] = frozenset((T, C))
        bl[C] = only_t
    elif k == JOIN:
        C = thread_obj(x)
        af[C] = only_t
        bl[T] = frozenset((T, C))
    return HbSummary(False, af, bl, ar, aw, br, bw)


def _extend_after(s: ObjSet, af_c: Mapping[SyncObject, ObjSet]) -> ObjSet:
    out = set(s)
    for u in s:
        more = af_c.get(u)
        if more:
            out |= more
    return frozenset(out)


def _cross_race(b: HbSummary, c: HbSummary) -> bool:
    aw_b, bw_c = b.aw, c.bw
    if aw_b:
        for x, s in aw_b.items():
            s2 = bw_c.get(x)
            if s2 is not None and s.isdisjoint(s2):
                return True
        for (t, x), s2 in c.br.items():
            s = aw_b.get(x)
            if s is not None and s.isdisjoint(s2):
                return True
    if bw_c:
        for (t, x), s in b.ar.items():
            s2 = bw_c.get(x)
            if s2 is not None and s.isdisjoint(s2):
                return True
    return False


def combine(b: HbSummary, c: HbSummary) -> HbSummary:
    """Summary of the concatenation of chunk ``b`` followed by chunk ``c``."""
    race = b.race or c.race or _cross_race(b, c)
    af_b, af_c, bl_b, bl_c = b.af, c.af, b.bl, c.bl

    af = dict(af_c)
    for u, s in af_b.items():
        out = set(s)
        own = af_c.get(u)
        if own:
            out |= own
        for v in s:
            more = af_c.get(v)
            if more:
                out |= more
        af[u] = frozenset(out)

    bl = dict(bl_b)
    for u, s in bl_c.items():
        out = set(s)
        own = bl_b.get(u)
        if own:
            out |= own
        for v in s:
            more = bl_b.get(v)
            if more:
                out |= more
        bl[u] = frozenset(out)

    ar = dict(c.ar)
    for key, s in b.ar.items():
        if key not in ar:
            ar[key] = _extend_after(s, af_c)
    aw = dict(c.aw)
    for key, s in b.aw.items():
        if key not in aw:
            aw[key] = _extend_after(s, af_c)
    br = dict(b.br)
    for key, s in c.br.items():
        if key not in br:
            br[key] = _extend_after(s, bl_b)
    bw = dict(b.bw)
    for key, s in c.bw.items():
        if key not in bw:
            bw[key] = _extend_after(s, bl_b)
    return HbSummary(race, af, bl, ar, aw, br, bw)


def fold_summaries(parts: Sequence[HbSummary]) -> HbSummary:
    if not parts:
        return HbSummary()
    return reduce(combine, parts)


def fold_labels(labels: Sequence[EventLabel]) -> HbSummary:
    return fold_summaries([summarize_terminal(lab) for lab in labels])


# ---------------------------------------------------------------------------
# terminal runs via vector clocks


def vc_shortcut_summary(labels: Sequence[EventLabel]) -> HbSummary:
    """Summary of an all-terminal run computed with one vector-clock pass.

    Each witness event's After set only needs the last event per thread,
    the last release per (thread, lock) and the last fork per (thread,
    child); Before sets are the mirror image.
    """
    if not labels:
        raise UsageError("vc_shortcut_summary needs a nonempty run")
    trace = Trace(labels)
    ts = vector_clocks(trace)
    race = djit_detect(trace) is not None

    first_of: dict[str, int] = {}
    last_of: dict[str, int] = {}
    last_rel: dict[tuple[str, str], int] = {}
    last_fork: dict[tuple[str, str], int] = {}
    first_acq: dict[tuple[str, str], int] = {}
    first_join: dict[tuple[str, str], int] = {}
    af_wit: dict[SyncObject, int] = {}
    bl_wit: dict[SyncObject, int] = {}
    ar_wit: dict[tuple[str, str], int] = {}
    aw_wit: dict[str, int] = {}
    br_wit: dict[tuple[str, str], int] = {}
    bw_wit: dict[str, int] = {}

    for i, (t, k, x) in enumerate(labels):
        T = thread_obj(t)
        first_of.setdefault(t, i)
        last_of[t] = i
        af_wit.setdefault(T, i)
        bl_wit[T] = i
        if k == READ:
            ar_wit[(t, x)] = i
            br_wit.setdefault((t, x), i)
        elif k == WRITE:
            aw_wit[x] = i
            bw_wit.setdefault(x, i)
        elif k == ACQ:
            af_wit.setdefault(lock_obj(x), i)
            first_acq.setdefault((t, x), i)
        elif k == REL:
            bl_wit[lock_obj(x)] = i
            last_rel[(t, x)] = i
        elif k == FORK:
            bl_wit[thread_obj(x)] = i
            last_fork[(t, x)] = i
        elif k == JOIN:
            af_wit.setdefault(thread_obj(x), i)
            first_join.setdefault((t, x), i)

    def leq(i: int, j: int) -> bool:
        if i > j:
            return False
        t = labels[i].thread
        return ts[i][t] <= ts[j][t]

    after_cache: dict[int, ObjSet] = {}
    before_cache: dict[int, ObjSet] = {}

    def after(i: int) -> ObjSet:
        s = after_cache.get(i)
        if s is None:
            out = {thread_obj(u) for u, j in last_of.items() if leq(i, j)}
            out.update(lock_obj(l) for (_, l), j in last_rel.items() if leq(i, j))
            out.update(thread_obj(c) for (_, c), j in last_fork.items() if leq(i, j))
            s = after_cache[i] = frozenset(out)
        return s

    def before(i: int) -> ObjSet:
        s = before_cache.get(i)
        if s is None:
            out = {thread_obj(u) for u, j in first_of.items() if leq(j, i)}
            out.update(lock_obj(l) for (_, l), j in first_acq.items() if leq(j, i))
            out.update(thread_obj(c) for (_, c), j in first_join.items() if leq(j, i))
            s = before_cache[i] = frozenset(out)
        return s

    return HbSummary(
        race,
        {u: after(i) for u, i in af_wit.items()},
        {u: before(i) for u, i in bl_wit.items()},
        {key: after(i) for key, i in ar_wit.items()},
        {key: after(i) for key, i in aw_wit.items()},
        {key: before(i) for key, i in br_wit.items()},
        {key: before(i) for key, i in bw_wit.items()},
    )


# ---------------------------------------------------------------------------
# whole grammar


@dataclass(frozen=True)
class HbOptions:
    # all-terminal rules at least this long use the vector-clock shortcut;
    # 0 disables it
    vc_min_run: int = 16


def summarize_rules(slp: Slp, opts: HbOptions | None = None) -> dict[int, HbSummary]:
    """One summary per reachable rule, children before parents."""
    opts = opts or HbOptions()
    terminal_cache: dict[EventLabel, HbSummary] = {}
    out: dict[int, HbSummary] = {}
    for rid in rank_order(slp):
        body = slp.rules[rid]
        if not body:
            out[rid] = HbSummary()
            continue
        if opts.vc_min_run and len(body) >= opts.vc_min_run and not any(isinstance(s, int) for s in body):
            out[rid] = vc_shortcut_summary(body)
            continue
        acc = None
        for sym in body:
            if isinstance(sym, int):
                part = out[sym]
            else:
                part = terminal_cache.get(sym)
                if part is None:
                    part = terminal_cache[sym] = summarize_terminal(sym)
            acc = part if acc is None else combine(acc, part)
        out[rid] = acc
    return out


def analyze_slp_hb(slp: Slp, opts: HbOptions | None = None, input: str | None = None) -> RaceReport:
    t0 = time.perf_counter()
    summaries = summarize_rules(slp, opts)
    race = summaries[slp.start].race
    wall = (time.perf_counter() - t0) * 1000
    return RaceReport("hb-compressed", race, None, input, slp_report_stats(slp, wall))
