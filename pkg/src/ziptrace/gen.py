"""Synthetic trace generators.

``inc-loop`` has two threads racing on an unprotected counter; ``lock-loop``
puts every iteration inside a critical section.  ``random`` draws seeded
well-formed traces with nested locks and fork/join.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import UsageError
from .trace import ACQ, FORK, JOIN, READ, REL, WRITE, EventLabel, Trace

PATTERNS = ("inc-loop", "lock-loop", "random")


@dataclass(frozen=True)
class GenSpec:
    pattern: str = "random"
    iterations: int = 10
    threads: int = 3
    locks: int = 2
    vars: int = 3
    seed: int = 0
    max_events: int | None = None
    max_reentrancy: int = 3


def gen_trace(spec: GenSpec) -> Trace:
    if spec.pattern not in PATTERNS:
        raise UsageError(f"unknown pattern {spec.pattern!r}")
    if spec.iterations < 0:
        raise UsageError("iterations must be >= 0")
    if spec.pattern == "random":
        labels = _random_labels(spec)
    else:
        labels = _loop_labels(spec.iterations, locked=spec.pattern == "lock-loop")
    if spec.max_events is not None:
        labels = labels[: spec.max_events]
    return Trace(labels)


def _loop_labels(n: int, locked: bool) -> list[EventLabel]:
    main, t1, t2 = "0", "1", "2"
    out = [EventLabel(main, FORK, t1), EventLabel(main, FORK, t2)]
    bodies = []
    for t in (t1, t2):
        body = [EventLabel(t, READ, "y"), EventLabel(t, WRITE, "y")]
        if locked:
            body = [EventLabel(t, ACQ, "l"), *body, EventLabel(t, REL, "l")]
        bodies.append(body)
    one_round = bodies[0] + bodies[1]
    out.extend(one_round * n)
    out += [EventLabel(main, JOIN, t1), EventLabel(main, JOIN, t2)]
    return out


def _random_body(rng: random.Random, t: str, spec: GenSpec) -> list[EventLabel]:
    """A short block with well-nested locks taken in increasing order."""
    body: list[EventLabel] = []
    held: list[int] = []
    n_ops = rng.randint(1, 6)
    for _ in range(n_ops):
        roll = rng.random()
        if spec.locks and roll < 0.25:
            top = held[-1] if held else -1
            choices = list(range(top + 1, spec.locks))
            if held and sum(1 for h in held if h == top) < spec.max_reentrancy:
                choices.append(top)
            if choices:
                lk = rng.choice(choices)
                held.append(lk)
                body.append(EventLabel(t, ACQ, f"l{lk}"))
                continue
        if held and roll < 0.45:
            body.append(EventLabel(t, REL, f"l{held.pop()}"))
            continue
        kind = READ if rng.random() < 0.5 else WRITE
        body.append(EventLabel(t, kind, f"x{rng.randrange(max(1, spec.vars))}"))
    while held:
        body.append(EventLabel(t, REL, f"l{held.pop()}"))
    return body


def _random_labels(spec: GenSpec) -> list[EventLabel]:
    rng = random.Random(spec.seed)
    n_threads = max(1, spec.threads)
    main = "0"
    children = [str(i) for i in range(1, n_threads)]
    names = [main] + children

    programs: dict[str, list[EventLabel]] = {}
    for t in names:
        bodies = [_random_body(rng, t, spec) for _ in range(rng.randint(1, 2))]
        prog: list[EventLabel] = []
        for _ in range(max(0, spec.iterations)):
            prog.extend(rng.choice(bodies))
        programs[t] = prog

    # main forks every child at a random point of its program, then joins
    # them all at the end
    main_prog = programs[main]
    for c in children:
        pos = rng.randint(0, len(main_prog))
        main_prog.insert(pos, EventLabel(main, FORK, c))
    main_prog.extend(EventLabel(main, JOIN, c) for c in children)

    pc = dict.fromkeys(names, 0)
    started = {main}
    owner: dict[str, tuple[str, int]] = {}
    out: list[EventLabel] = []
    while True:
        runnable = []
        for t in names:
            if t not in started or pc[t] >= len(programs[t]):
                continue
            lab = programs[t][pc[t]]
            if lab.kind == ACQ:
                o = owner.get(lab.target)
                if o is not None and o[0] != t:
                    continue
            elif lab.kind == JOIN and pc[lab.target] < len(programs[lab.target]):
                continue
            runnable.append(t)
        if not runnable:
            break
        t = rng.choice(runnable)
        lab = programs[t][pc[t]]
        pc[t] += 1
        out.append(lab)
        if lab.kind == FORK:
            started.add(lab.target)
        elif lab.kind == ACQ:
            o = owner.get(lab.target)
            owner[lab.target] = (t, (o[1] if o else 0) + 1)
        elif lab.kind == REL:
            o = owner[lab.target]
            if o[1] == 1:
                del owner[lab.target]
            else:
                owner[lab.target] = (t, o[1] - 1)
    return out


def random_window(trace: Trace, rng: random.Random, min_len: int = 1) -> Trace:
    """A contiguous slice of ``trace``; slices keep unmatched locks at the edges."""
    n = len(trace)
    if n <= min_len:
        return trace
    a = rng.randrange(0, n - min_len + 1)
    b = rng.randrange(a + min_len, n + 1)
    return Trace(trace.labels[a:b])


def random_suite(
    count: int,
    seed: int = 0,
    max_events: int = 200,
    threads: int = 4,
    locks: int = 3,
    vars: int = 4,
    windows: bool = True,
):
    """Seeded stream of small random traces for differential testing.

    Every other trace is a contiguous window of a generated one, which
    exercises locks left open or released without an acquire at the edges.
    """
    master = random.Random(seed)
    for k in range(count):
        s = master.randrange(2**32)
        rng = random.Random(s)
        spec = GenSpec(
            pattern="random",
            iterations=rng.randint(1, 12),
            threads=rng.randint(1, threads),
            locks=rng.randint(0, locks),
            vars=rng.randint(1, vars),
            seed=s,
            max_events=max_events,
        )
        tr = gen_trace(spec)
        if windows and k % 2:
            tr = random_window(tr, rng)
        yield tr
