"""Brute-force summaries straight from the definitions, for comparison
with the compositional engines."""

from __future__ import annotations

from ziptrace.hb_baseline import after_set, before_set, has_race_oracle, hb_closure_oracle
from ziptrace.hb_compressed import HbSummary
from ziptrace.trace import ACQ, FORK, JOIN, READ, REL, WRITE, Trace, lock_obj, match_event, thread_obj


def hb_summary_oracle(chunk: Trace) -> HbSummary:
    hb = hb_closure_oracle(chunk)
    af_wit, bl_wit, ar_wit, aw_wit, br_wit, bw_wit = {}, {}, {}, {}, {}, {}
    for i, (t, k, x) in enumerate(chunk.labels, 1):
        T = thread_obj(t)
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
        elif k == REL:
            bl_wit[lock_obj(x)] = i
        elif k == FORK:
            bl_wit[thread_obj(x)] = i
        elif k == JOIN:
            af_wit.setdefault(thread_obj(x), i)

    def after(i):
        return after_set(chunk, hb, i)

    def before(i):
        return before_set(chunk, hb, i)

    return HbSummary(
        has_race_oracle(chunk),
        {u: after(i) for u, i in af_wit.items()},
        {u: before(i) for u, i in bl_wit.items()},
        {key: after(i) for key, i in ar_wit.items()},
        {key: after(i) for key, i in aw_wit.items()},
        {key: before(i) for key, i in br_wit.items()},
        {key: before(i) for key, i in bw_wit.items()},
    )


def open_counts_oracle(chunk: Trace) -> tuple[dict, dict]:
    """Unmatched acquires and releases per (thread, lock), via match_event."""
    acq: dict = {}
    rel: dict = {}
    for ev in chunk:
        if ev.kind in (ACQ, REL) and match_event(chunk, ev) is None:
            d = acq if ev.kind == ACQ else rel
            key = (ev.thread, ev.target)
            d[key] = d.get(key, 0) + 1
    return acq, rel
