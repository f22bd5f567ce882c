"""Happens-before race detection on uncompressed traces.

Two streaming detectors (full vector clocks in the Djit+ style, and the
set-based Goldilocks algorithm) plus brute-force oracles for small traces.
Happens-before here is the reflexive order generated by thread order,
release-to-later-acquire of the same lock, fork-to-child and
child-to-join edges.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple

from .errors import OracleCapExceeded, UsageError
from .trace import (
    ACQ, FORK, JOIN, READ, REL, WRITE,
    Event, SyncObject, Trace, lock_obj, thread_obj,
)

DEFAULT_ORACLE_CAP = 2000


def oracle_cap() -> int:
    """Brute-force size cap; ``ZIPTRACE_ORACLE_CAP`` overrides the default."""
    raw = os.environ.get("ZIPTRACE_ORACLE_CAP")
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return DEFAULT_ORACLE_CAP


class RacePair(NamedTuple):
    first: int
    second: int
    variable: str


def conflicting(a: Event, b: Event) -> bool:
    la, lb = a.label, b.label
    return (
        la.is_access and lb.is_access
        and la.target == lb.target
        and la.thread != lb.thread
        and (la.kind == WRITE or lb.kind == WRITE)
    )


# ---------------------------------------------------------------------------
# vector clocks


class VectorClock:
    """Map thread -> counter; missing entries are 0."""

    __slots__ = ("c",)

    def __init__(self, entries: Mapping[str, int] | None = None):
        self.c = {k: v for k, v in (entries or {}).items() if v}

    def __getitem__(self, t: str) -> int:
        return self.c.get(t, 0)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VectorClock) and self.c == other.c

    def __repr__(self) -> str:
        return f"VectorClock({self.c})"

    def copy(self) -> "VectorClock":
        return VectorClock(self.c)

    def tick(self, t: str) -> None:
        self.c[t] = self.c.get(t, 0) + 1

    def join(self, other: "VectorClock") -> "VectorClock":
        out = dict(self.c)
        for k, v in other.c.items():
            if v > out.get(k, 0):
                out[k] = v
        return VectorClock(out)

    def join_in(self, other: "VectorClock") -> None:
        c = self.c
        for k, v in other.c.items():
            if v > c.get(k, 0):
                c[k] = v

    def __le__(self, other: "VectorClock") -> bool:
        oc = other.c
        return all(v <= oc.get(k, 0) for k, v in self.c.items())


def vector_clocks(trace: Trace) -> list[VectorClock]:
    """Timestamp of every event (0-based list, event i at position i-1).

    Lock clocks accumulate every release so that a release is ordered
    before every later acquire of the lock, not just the next one.
    """
    threads: dict[str, VectorClock] = {}
    locks: dict[str, VectorClock] = {}
    out = []
    for lab in trace.labels:
        t, k, x = lab
        ct = threads.get(t)
        if ct is None:
            ct = threads[t] = VectorClock()
        ct.tick(t)
        if k == ACQ and x in locks:
            ct.join_in(locks[x])
        elif k == JOIN and x in threads:
            ct.join_in(threads[x])
        ts = ct.copy()
        out.append(ts)
        if k == REL:
            locks.setdefault(x, VectorClock()).join_in(ts)
        elif k == FORK:
            threads.setdefault(x, VectorClock()).join_in(ts)
    return out


def hb_leq_by_clock(clocks: list[VectorClock], trace: Trace, i: int, j: int) -> bool:
    """e_i <=HB e_j from timestamps (1-based indices)."""
    if i > j:
        return False
    t = trace.labels[i - 1].thread
    return clocks[i - 1][t] <= clocks[j - 1][t]


def djit_detect(trace: Trace) -> RacePair | None:
    """First race in trace order, reported at its later event."""
    return next(djit_races(trace), None)


def djit_races(trace: Trace) -> Iterator[RacePair]:
    """Every racy access, streaming, paired with one unordered partner.

    Keeps, per variable, the local time and index of every thread's last
    write and last read.  The partner is the latest prior conflicting
    access not ordered before the current one.
    """
    clocks: dict[str, dict[str, int]] = {}
    locks: dict[str, dict[str, int]] = {}
    last_w: dict[str, dict[str, tuple[int, int]]] = {}
    last_r: dict[str, dict[str, tuple[int, int]]] = {}
    for i, lab in enumerate(trace.labels, 1):
        t, k, x = lab
        ct = clocks.get(t)
        if ct is None:
            ct = clocks[t] = {}
        now = ct.get(t, 0) + 1
        ct[t] = now
        if k == READ or k == WRITE:
            partner = 0
            w = last_w.get(x)
            if w:
                for u, (c, idx) in w.items():
                    if u != t and c > ct.get(u, 0) and idx > partner:
                        partner = idx
            if k == WRITE:
                r = last_r.get(x)
                if r:
                    for u, (c, idx) in r.items():
                        if u != t and c > ct.get(u, 0) and idx > partner:
                            partner = idx
                table = last_w
            else:
                table = last_r
            if partner:
                yield RacePair(partner, i, x)
            per = table.get(x)
            if per is None:
                per = table[x] = {}
            per[t] = (now, i)
        elif k == ACQ:
            lc = locks.get(x)
            if lc:
                for u, v in lc.items():
                    if v > ct.get(u, 0):
                        ct[u] = v
        elif k == REL:
            lc = locks.get(x)
            if lc is None:
                locks[x] = dict(ct)
            else:
                for u, v in ct.items():
                    if v > lc.get(u, 0):
                        lc[u] = v
        elif k == FORK:
            cc = clocks.get(x)
            if cc is None:
                clocks[x] = dict(ct)
            else:
                for u, v in ct.items():
                    if v > cc.get(u, 0):
                        cc[u] = v
        elif k == JOIN:
            cc = clocks.get(x)
            if cc:
                for u, v in cc.items():
                    if v > ct.get(u, 0):
                        ct[u] = v


# ---------------------------------------------------------------------------
# Goldilocks


@dataclass
class GoldilocksState:
    """GLS sets plus the index of the access each set belongs to.

    Read sets are grouped by variable first so a write only scans the
    readers of its own variable.
    """

    gls_w: dict[str, set] = field(default_factory=dict)
    gls_r: dict[str, dict[str, set]] = field(default_factory=dict)
    last_w: dict[str, int] = field(default_factory=dict)
    last_r: dict[str, dict[str, int]] = field(default_factory=dict)

    def sets(self):
        yield from self.gls_w.values()
        for per in self.gls_r.values():
            yield from per.values()


def goldilocks_detect(trace: Trace) -> RacePair | None:
    return next(goldilocks_races(trace), None)


def goldilocks_races(trace: Trace) -> Iterator[RacePair]:
    """Set-based detector: GLS sets hold the After set of the last access.

    A check against an undefined set (variable never written, or a thread
    that never read it) reports nothing.
    """
    st = GoldilocksState()
    gls_w, gls_r = st.gls_w, st.gls_r
    for i, (t, k, x) in enumerate(trace.labels, 1):
        tobj = thread_obj(t)
        if k == READ or k == WRITE:
            partner = 0
            s = gls_w.get(x)
            if s is not None and tobj not in s:
                partner = st.last_w[x]
            if k == WRITE:
                readers = gls_r.get(x)
                if readers:
                    idx_by = st.last_r[x]
                    for u, s in readers.items():
                        if tobj not in s and idx_by[u] > partner:
                            partner = idx_by[u]
            if partner:
                yield RacePair(partner, i, x)
            if k == WRITE:
                gls_w[x] = {tobj}
                st.last_w[x] = i
            else:
                gls_r.setdefault(x, {})[t] = {tobj}
                st.last_r.setdefault(x, {})[t] = i
            continue
        if k == ACQ or k == JOIN:
            # whatever reached the lock (or the child) now reaches t
            src = lock_obj(x) if k == ACQ else thread_obj(x)
            for s in st.sets():
                if src in s:
                    s.add(tobj)
        elif k == REL or k == FORK:
            dst = lock_obj(x) if k == REL else thread_obj(x)
            for s in st.sets():
                if tobj in s:
                    s.add(dst)


# ---------------------------------------------------------------------------
# brute-force oracles


class HbRelation:
    """Reflexive happens-before as predecessor bitmasks.

    ``preds[j]`` has bit ``i`` set iff e_i <=HB e_j (1-based).
    """

    def __init__(self, trace: Trace, preds: list[int]):
        self.trace = trace
        self.preds = preds

    def leq(self, i: int, j: int) -> bool:
        return bool(self.preds[j] >> i & 1)

    def concurrent(self, i: int, j: int) -> bool:
        return not self.leq(i, j) and not self.leq(j, i)

    def pairs(self):
        n = len(self.trace)
        for j in range(1, n + 1):
            m = self.preds[j]
            for i in range(1, j + 1):
                if m >> i & 1:
                    yield i, j


def _check_cap(trace: Trace, cap: int | None) -> None:
    cap = oracle_cap() if cap is None else cap
    if len(trace) > cap:
        raise OracleCapExceeded(f"trace has {len(trace)} events, oracle cap is {cap}")


def hb_closure_oracle(trace: Trace, cap: int | None = None) -> HbRelation:
    """Transitive closure of the four edge kinds, one forward pass.

    Every edge points forward in the trace, so the predecessor set of an
    event is the union of the predecessor sets of its direct edge sources.
    """
    _check_cap(trace, cap)
    preds = [0] * (len(trace) + 1)
    by_thread: dict[str, int] = {}
    releases: dict[str, int] = {}
    forks: dict[str, int] = {}
    for j, (t, k, x) in enumerate(trace.labels, 1):
        m = 1 << j
        m |= by_thread.get(t, 0)
        m |= forks.get(t, 0)
        if k == ACQ:
            m |= releases.get(x, 0)
        elif k == JOIN:
            m |= by_thread.get(x, 0)
        preds[j] = m
        by_thread[t] = m
        if k == REL:
            releases[x] = releases.get(x, 0) | m
        elif k == FORK:
            forks[x] = forks.get(x, 0) | m
    return HbRelation(trace, preds)


def races_oracle(trace: Trace, cap: int | None = None) -> list[RacePair]:
    """Every conflicting pair unordered by happens-before."""
    hb = hb_closure_oracle(trace, cap)
    accesses = [ev for ev in trace if ev.label.is_access]
    out = []
    for a_pos, a in enumerate(accesses):
        for b in accesses[a_pos + 1:]:
            if conflicting(a, b) and not hb.leq(a.index, b.index):
                out.append(RacePair(a.index, b.index, a.target))
    return out


def has_race_oracle(trace: Trace, cap: int | None = None) -> bool:
    return bool(races_oracle(trace, cap))


def after_set(trace: Trace, hb: HbRelation, index: int) -> frozenset[SyncObject]:
    out = set()
    for j in range(index, len(trace) + 1):
        if hb.leq(index, j):
            t, k, x = trace.labels[j - 1]
            out.add(thread_obj(t))
            if k == FORK:
                out.add(thread_obj(x))
            elif k == REL:
                out.add(lock_obj(x))
    return frozenset(out)


def before_set(trace: Trace, hb: HbRelation, index: int) -> frozenset[SyncObject]:
    out = set()
    for j in range(1, index + 1):
        if hb.leq(j, index):
            t, k, x = trace.labels[j - 1]
            out.add(thread_obj(t))
            if k == JOIN:
                out.add(thread_obj(x))
            elif k == ACQ:
                out.add(lock_obj(x))
    return frozenset(out)


def after_before_oracle(
    trace: Trace, e: Event | int, cap: int | None = None, hb: HbRelation | None = None
) -> tuple[frozenset[SyncObject], frozenset[SyncObject]]:
    """(After, Before) of one event: threads and locks with an event
    happening after (resp. before) it, the event itself included."""
    index = e.index if isinstance(e, Event) else e
    if not 1 <= index <= len(trace):
        raise UsageError(f"event index {index} outside trace")
    if hb is None:
        hb = hb_closure_oracle(trace, cap)
    return after_set(trace, hb, index), before_set(trace, hb, index)
