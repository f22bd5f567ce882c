"""Eraser lockset checking on uncompressed traces.

Besides real locks, every access is protected by two kinds of dummy
locks: ``Λ`` (held by every read, so read-only data never alarms) and
``ℓ_t`` (held by every access of thread t, so thread-local data never
alarms).  A variable violates the discipline when the locksets of all
threads accessing it have an empty intersection.

Locks held at an access follow whole-trace semantics: besides the
enclosing acquires, a release of t later in the trace whose acquire is
not between the access and the release also counts.  A single forward
pass cannot see those, so :func:`eraser_detect` makes two passes.
"""

from __future__ import annotations

import time
from typing import Iterable, NamedTuple

from .errors import UsageError
from .hb_baseline import _check_cap
from .report import ViolationReport, trace_report_stats
from .trace import ACQ, READ, REL, WRITE, Event, Trace, match_event


class LsLock(NamedTuple):
    kind: str  # "real", "read" or "thread"
    name: str

    def __str__(self) -> str:
        if self.kind == "real":
            return self.name
        if self.kind == "read":
            return "Λ"
        return f"ℓ{self.name}"


READ_MARKER = LsLock("read", "")


def real(lock: str) -> LsLock:
    return LsLock("real", lock)


def thread_dummy(t: str) -> LsLock:
    return LsLock("thread", t)


def access_lockset(kind: str, t: str, held: Iterable[str]) -> frozenset[LsLock]:
    base = [thread_dummy(t)]
    if kind == READ:
        base.append(READ_MARKER)
    return frozenset(base + [real(l) for l in held])


# ---------------------------------------------------------------------------
# brute force


def locksheld_oracle(trace: Trace, e: Event | int, cap: int | None = None) -> frozenset[str]:
    """Locks held by the thread of access ``e``, straight from the definition."""
    _check_cap(trace, cap)
    ev = trace.event(e.index if isinstance(e, Event) else e)
    if not ev.label.is_access:
        raise UsageError(f"locks held is defined for accesses, got {ev.label}")
    i, t = ev.index, ev.thread
    out = set()
    for other in trace:
        if other.thread != t:
            continue
        if other.kind == ACQ and other.index < i:
            m = match_event(trace, other)
            if m is None or m.index > i:
                out.add(other.target)
        elif other.kind == REL and other.index > i:
            m = match_event(trace, other)
            if m is None or m.index < i:
                out.add(other.target)
    return frozenset(out)


def locksets_oracle(trace: Trace, cap: int | None = None) -> dict[tuple[str, str], frozenset[LsLock]]:
    out: dict[tuple[str, str], frozenset[LsLock]] = {}
    for ev in trace:
        if not ev.label.is_access:
            continue
        ls = access_lockset(ev.kind, ev.thread, locksheld_oracle(trace, ev, cap))
        key = (ev.thread, ev.target)
        out[key] = out[key] & ls if key in out else ls
    return out


def violations_from_locksets(locksets: dict[tuple[str, str], frozenset[LsLock]]) -> set[str]:
    common: dict[str, frozenset[LsLock]] = {}
    for (_, x), ls in locksets.items():
        common[x] = common[x] & ls if x in common else ls
    return {x for x, s in common.items() if not s}


def lockset_violations_oracle(trace: Trace, cap: int | None = None) -> set[str]:
    return violations_from_locksets(locksets_oracle(trace, cap))


# ---------------------------------------------------------------------------
# streaming engine


def _last_unmatched_releases(trace: Trace) -> dict[tuple[str, str], int]:
    depth: dict[tuple[str, str], int] = {}
    last: dict[tuple[str, str], int] = {}
    for i, (t, k, l) in enumerate(trace.labels, 1):
        if k == ACQ:
            depth[(t, l)] = depth.get((t, l), 0) + 1
        elif k == REL:
            d = depth.get((t, l), 0)
            if d:
                depth[(t, l)] = d - 1
            else:
                last[(t, l)] = i
    return last


def eraser_locksets(trace: Trace) -> tuple[dict[tuple[str, str], frozenset[LsLock]], dict[str, int]]:
    """Final LockSet(t, x) for every accessed pair, plus for each violated
    variable the index of the access at which its intersection emptied."""
    pending = _last_unmatched_releases(trace)
    pending_by_thread: dict[str, dict[str, int]] = {}
    for (t, l), i in pending.items():
        pending_by_thread.setdefault(t, {})[l] = i

    depth: dict[tuple[str, str], int] = {}
    held: dict[str, set[str]] = {}
    locksets: dict[tuple[str, str], frozenset[LsLock]] = {}
    common: dict[str, frozenset[LsLock]] = {}
    first_empty: dict[str, int] = {}
    for i, (t, k, x) in enumerate(trace.labels, 1):
        if k == READ or k == WRITE:
            locks = set(held.get(t, ()))
            for l, last in pending_by_thread.get(t, {}).items():
                if last > i:
                    locks.add(l)
            ls = access_lockset(k, t, locks)
            key = (t, x)
            cur = locksets.get(key)
            locksets[key] = ls if cur is None else cur & ls
            c = common.get(x)
            common[x] = ls if c is None else c & ls
            if not common[x] and x not in first_empty:
                first_empty[x] = i
        elif k == ACQ:
            d = depth.get((t, x), 0)
            depth[(t, x)] = d + 1
            if d == 0:
                held.setdefault(t, set()).add(x)
        elif k == REL:
            d = depth.get((t, x), 0)
            if d:
                depth[(t, x)] = d - 1
                if d == 1:
                    held[t].discard(x)
    return locksets, first_empty


def eraser_detect(trace: Trace, input: str | None = None) -> ViolationReport:
    t0 = time.perf_counter()
    locksets, first_empty = eraser_locksets(trace)
    violations = sorted(violations_from_locksets(locksets))
    wall = (time.perf_counter() - t0) * 1000
    return ViolationReport("ls-eraser", violations, first_empty, input, trace_report_stats(trace, wall))
