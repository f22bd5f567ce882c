"""Events, traces and the derived bookkeeping the analyses rely on.

A trace is a sequence of event *labels* ``<thread>|<op>``; an event is a
label together with its 1-based position.  Labels are what the grammar
compressor sees, positions are what the race detectors report.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import TraceParseError, UsageError

READ = "r"
WRITE = "w"
ACQ = "acq"
REL = "rel"
FORK = "fork"
JOIN = "join"

OP_KINDS = (READ, WRITE, ACQ, REL, FORK, JOIN)
ACCESS_KINDS = (READ, WRITE)
LOCK_KINDS = (ACQ, REL)
THREAD_KINDS = (FORK, JOIN)

_TOKEN = r"[A-Za-z0-9_]+"
_LINE_RE = re.compile(rf"^({_TOKEN})\|(r|w|acq|rel|fork|join)\(({_TOKEN})\)$")
TOKEN_RE = re.compile(rf"^{_TOKEN}$")


class EventLabel(NamedTuple):
    """``<thread, op>``: the thread performing an operation on one operand.

    ``target`` is a variable for r/w, a lock for acq/rel and a thread for
    fork/join.
    """

    thread: str
    kind: str
    target: str

    def __str__(self) -> str:
        return f"{self.thread}|{self.kind}({self.target})"

    @property
    def is_access(self) -> bool:
        return self.kind == READ or self.kind == WRITE


class Event(NamedTuple):
    index: int
    label: EventLabel

    @property
    def thread(self) -> str:
        return self.label.thread

    @property
    def kind(self) -> str:
        return self.label.kind

    @property
    def target(self) -> str:
        return self.label.target


class SyncObject(NamedTuple):
    """A thread or a lock: the carriers of happens-before across chunks."""

    kind: str  # "thread" or "lock"
    name: str

    def __str__(self) -> str:
        return self.name if self.kind == "thread" else f"<{self.name}>"


def thread_obj(name: str) -> SyncObject:
    return SyncObject("thread", name)


def lock_obj(name: str) -> SyncObject:
    return SyncObject("lock", name)


def make_label(thread: str, kind: str, target: str) -> EventLabel:
    """Build a label, checking the token grammar and the op kind."""
    if kind not in OP_KINDS:
        raise UsageError(f"unknown operation kind {kind!r}")
    for tok in (thread, target):
        if not isinstance(tok, str) or not TOKEN_RE.match(tok):
            raise UsageError(f"bad identifier token {tok!r}")
    return EventLabel(thread, kind, target)


def parse_label(text: str, line: int | None = None) -> EventLabel:
    m = _LINE_RE.match(text)
    if m is None:
        raise TraceParseError(f"malformed event {text!r}", line)
    return EventLabel(m.group(1), m.group(2), m.group(3))


class Trace:
    """An immutable sequence of events.

    Only the labels are stored; ``Event`` objects are materialised on
    demand so that multi-million event traces stay cheap.
    """

    __slots__ = ("labels", "__dict__")

    def __init__(self, labels: Iterable[EventLabel] = ()):
        self.labels: tuple[EventLabel, ...] = tuple(labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[Event]:
        for i, lab in enumerate(self.labels, 1):
            yield Event(i, lab)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Trace) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"Trace({len(self.labels)} events)"

    @property
    def events(self) -> list[Event]:
        return list(self)

    def event(self, index: int) -> Event:
        if not 1 <= index <= len(self.labels):
            raise UsageError(f"event index {index} outside 1..{len(self.labels)}")
        return Event(index, self.labels[index - 1])

    def __getitem__(self, index: int) -> Event:
        return self.event(index)

    @cached_property
    def threads(self) -> frozenset[str]:
        out = set()
        for lab in self.labels:
            out.add(lab.thread)
            if lab.kind == FORK or lab.kind == JOIN:
                out.add(lab.target)
        return frozenset(out)

    @cached_property
    def locks(self) -> frozenset[str]:
        return frozenset(lab.target for lab in self.labels if lab.kind == ACQ or lab.kind == REL)

    @cached_property
    def variables(self) -> frozenset[str]:
        return frozenset(lab.target for lab in self.labels if lab.is_access)

    @cached_property
    def _matching(self) -> dict[int, int]:
        return _compute_matching(self.labels)


def _compute_matching(labels: Sequence[EventLabel]) -> dict[int, int]:
    # per (thread, lock) stack of unmatched acquire indices
    stacks: dict[tuple[str, str], list[int]] = {}
    match: dict[int, int] = {}
    for i, lab in enumerate(labels, 1):
        if lab.kind == ACQ:
            stacks.setdefault((lab.thread, lab.target), []).append(i)
        elif lab.kind == REL:
            st = stacks.get((lab.thread, lab.target))
            if st:
                a = st.pop()
                match[i] = a
                match[a] = i
    return match


# ---------------------------------------------------------------------------
# file format


def parse_trace(text: str | Iterable[str]) -> Trace:
    """Parse the line-oriented trace format.

    Blank lines and ``#`` comment lines are skipped; event indices count
    event lines only.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    labels: list[EventLabel] = []
    cache: dict[str, EventLabel] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n").strip()
        if not line or line.startswith("#"):
            continue
        lab = cache.get(line)
        if lab is None:
            lab = parse_label(line, lineno)
            cache[line] = lab
        labels.append(lab)
    return Trace(labels)


def serialize_trace(trace: Trace) -> str:
    return "".join(f"{lab}\n" for lab in trace.labels)


def read_trace(path) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh)


def write_trace(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_trace(trace))


# ---------------------------------------------------------------------------
# derived relations


def _require_event(trace: Trace, e: Event | int) -> Event:
    index = e.index if isinstance(e, Event) else e
    ev = trace.event(index)
    if isinstance(e, Event) and e.label != ev.label:
        raise UsageError(f"event {e} is not part of this trace")
    return ev


def match_event(trace: Trace, e: Event | int) -> Event | None:
    """The matching release of an acquire, or matching acquire of a release.

    A release matches the latest acquire of the same lock by the same
    thread that is not already matched by an earlier release.
    """
    ev = _require_event(trace, e)
    if ev.kind not in LOCK_KINDS:
        raise UsageError(f"match is only defined for acquire/release events, got {ev.label}")
    other = trace._matching.get(ev.index)
    return None if other is None else trace.event(other)


def project(trace: Trace, thread: str) -> list[Event]:
    return [ev for ev in trace if ev.thread == thread]


def first(events: Iterable[Event]) -> Event | None:
    return min(events, key=lambda ev: ev.index, default=None)


def last(events: Iterable[Event]) -> Event | None:
    return max(events, key=lambda ev: ev.index, default=None)


def reads(trace: Trace, thread: str, var: str) -> list[Event]:
    return [ev for ev in trace if ev.kind == READ and ev.thread == thread and ev.target == var]


def writes(trace: Trace, var: str) -> list[Event]:
    return [ev for ev in trace if ev.kind == WRITE and ev.target == var]


@dataclass(frozen=True)
class TraceStats:
    n_events: int
    threads: frozenset[str]
    locks: frozenset[str]
    variables: frozenset[str]
    rvars: frozenset[tuple[str, str]]
    wvars: frozenset[str]
    max_reentrancy: int


def trace_stats(trace: Trace) -> TraceStats:
    rvars = set()
    wvars = set()
    depth: dict[tuple[str, str], int] = {}
    r = 0
    for lab in trace.labels:
        k = lab.kind
        if k == READ:
            rvars.add((lab.thread, lab.target))
        elif k == WRITE:
            wvars.add(lab.target)
        elif k == ACQ:
            key = (lab.thread, lab.target)
            d = depth.get(key, 0) + 1
            depth[key] = d
            if d > r:
                r = d
        elif k == REL:
            key = (lab.thread, lab.target)
            if depth.get(key, 0) > 0:
                depth[key] -= 1
    return TraceStats(
        n_events=len(trace),
        threads=trace.threads,
        locks=trace.locks,
        variables=trace.variables,
        rvars=frozenset(rvars),
        wvars=frozenset(wvars),
        max_reentrancy=r,
    )


# ---------------------------------------------------------------------------
# validation

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    index: int | None = None

    def __str__(self) -> str:
        where = f"event {self.index}: " if self.index is not None else ""
        return f"{self.severity}: {where}{self.message} [{self.code}]"


def validate(trace: Trace) -> list[Diagnostic]:
    """Check the structural assumptions the analyses make.

    Fork/join structure and cross-thread lock holding are errors; locks
    left open at either end of the trace are only warnings.
    """
    out: list[Diagnostic] = []
    forked_by: dict[str, tuple[str, int]] = {}
    joined: dict[str, int] = {}
    seen_thread: dict[str, int] = {}
    depth: dict[tuple[str, str], int] = {}
    holder: dict[str, str] = {}

    def diag(sev, code, msg, idx):
        out.append(Diagnostic(sev, code, msg, idx))

    for i, lab in enumerate(trace.labels, 1):
        t, k, tgt = lab
        if t in joined:
            diag(ERROR, "event-after-join", f"thread {t} acts after being joined at event {joined[t]}", i)
        seen_thread.setdefault(t, i)
        if k == FORK:
            if tgt == t:
                diag(ERROR, "self-fork", f"thread {t} forks itself", i)
            elif tgt in forked_by:
                diag(ERROR, "double-fork", f"thread {tgt} already forked at event {forked_by[tgt][1]}", i)
            else:
                if tgt in seen_thread:
                    diag(ERROR, "event-before-fork",
                         f"thread {tgt} has event {seen_thread[tgt]} before its fork", i)
                forked_by[tgt] = (t, i)
        elif k == JOIN:
            if tgt == t:
                diag(ERROR, "self-join", f"thread {t} joins itself", i)
            elif tgt not in forked_by:
                diag(ERROR, "join-unforked", f"join of never-forked thread {tgt}", i)
            else:
                parent = forked_by[tgt][0]
                if parent != t:
                    diag(ERROR, "join-parent-mismatch",
                         f"thread {tgt} forked by {parent} but joined by {t}", i)
            joined.setdefault(tgt, i)
        elif k == ACQ:
            other = holder.get(tgt)
            if other is not None and other != t:
                diag(ERROR, "lock-held-elsewhere", f"thread {t} acquires {tgt} held by thread {other}", i)
            key = (t, tgt)
            depth[key] = depth.get(key, 0) + 1
            holder[tgt] = t
        elif k == REL:
            key = (t, tgt)
            if depth.get(key, 0) == 0:
                diag(WARNING, "unmatched-release", f"release of {tgt} by {t} has no matching acquire", i)
            else:
                depth[key] -= 1
                if depth[key] == 0 and holder.get(tgt) == t:
                    del holder[tgt]
    for (t, lock), d in sorted(depth.items()):
        if d > 0:
            diag(WARNING, "unmatched-acquire", f"thread {t} still holds {lock} ({d}x) at trace end", None)
    return out


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity == ERROR for d in diags)
