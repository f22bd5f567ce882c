"""Straight-line programs: single-string grammars over event labels.

A rule body is a tuple of symbols.  A symbol is either an
:class:`~ziptrace.trace.EventLabel` (terminal) or an ``int`` naming another
rule (nonterminal).  Rules may have any arity >= 1; the analyses fold
longer bodies left to right.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .errors import GrammarError, TraceParseError
from .trace import ERROR, WARNING, Diagnostic, EventLabel, Trace, parse_label

Symbol = Union[EventLabel, int]

DEFAULT_RUN_THRESHOLD = 8


def is_nonterminal(sym: Symbol) -> bool:
    return isinstance(sym, int)


@dataclass(frozen=True)
class Slp:
    start: int
    rules: Mapping[int, tuple[Symbol, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "rules", {k: tuple(v) for k, v in self.rules.items()})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Slp) and self.start == other.start and self.rules == other.rules

    def __hash__(self):
        return hash((self.start, tuple(sorted(self.rules.items()))))

    def terminals(self) -> set[EventLabel]:
        return {s for body in self.rules.values() for s in body if not isinstance(s, int)}


def validate_slp(slp: Slp) -> list[Diagnostic]:
    """Report undefined references, cycles, empty and unreachable rules.

    The only empty rule tolerated is the start rule of the empty grammar.
    """
    out: list[Diagnostic] = []
    rules = slp.rules
    if slp.start not in rules:
        out.append(Diagnostic(ERROR, "undefined-start", f"start rule @{slp.start} is not defined"))
        return out
    for rid, body in sorted(rules.items()):
        if not body:
            if rid == slp.start:
                out.append(Diagnostic(WARNING, "empty-grammar", "start rule is empty"))
            else:
                out.append(Diagnostic(ERROR, "empty-rule", f"rule @{rid} has an empty body"))
        for sym in body:
            if isinstance(sym, int) and sym not in rules:
                out.append(Diagnostic(ERROR, "undefined-rule", f"rule @{rid} references undefined @{sym}"))
    cycle = _find_cycle(slp)
    if cycle is not None:
        path = " -> ".join(f"@{r}" for r in cycle)
        out.append(Diagnostic(ERROR, "cycle", f"rule reference cycle {path}"))
    reachable = _reachable(slp)
    for rid in sorted(set(rules) - reachable):
        out.append(Diagnostic(WARNING, "unreachable-rule", f"rule @{rid} is unreachable from start"))
    return out


def _reachable(slp: Slp) -> set[int]:
    seen = {slp.start}
    stack = [slp.start]
    while stack:
        for sym in slp.rules.get(stack.pop(), ()):
            if isinstance(sym, int) and sym not in seen and sym in slp.rules:
                seen.add(sym)
                stack.append(sym)
    return seen


def _find_cycle(slp: Slp) -> list[int] | None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(slp.rules, WHITE)
    for root in slp.rules:
        if color[root] != WHITE:
            continue
        path = [root]
        iters = [iter(slp.rules[root])]
        color[root] = GREY
        while iters:
            for sym in iters[-1]:
                if isinstance(sym, int) and sym in color:
                    if color[sym] == GREY:
                        return path[path.index(sym):] + [sym]
                    if color[sym] == WHITE:
                        color[sym] = GREY
                        path.append(sym)
                        iters.append(iter(slp.rules[sym]))
                        break
            else:
                color[path.pop()] = BLACK
                iters.pop()
    return None


def check_slp(slp: Slp) -> None:
    """Raise :class:`GrammarError` if the grammar has any error diagnostic."""
    errors = [d for d in validate_slp(slp) if d.severity == ERROR]
    if errors:
        raise GrammarError("; ".join(d.message for d in errors))


def rank_order(slp: Slp) -> list[int]:
    """Reachable rule ids, every rule after all rules it references.

    The existence of this order is exactly the acyclicity condition.
    """
    check_slp(slp)
    order: list[int] = []
    done = set()
    stack = [(slp.start, False)]
    while stack:
        rid, expanded = stack.pop()
        if expanded:
            if rid not in done:
                done.add(rid)
                order.append(rid)
            continue
        if rid in done:
            continue
        stack.append((rid, True))
        for sym in reversed(slp.rules[rid]):
            if isinstance(sym, int) and sym not in done:
                stack.append((sym, False))
    return order


def rule_lengths(slp: Slp, order: list[int] | None = None) -> dict[int, int]:
    lengths: dict[int, int] = {}
    for rid in order if order is not None else rank_order(slp):
        lengths[rid] = sum(lengths[s] if isinstance(s, int) else 1 for s in slp.rules[rid])
    return lengths


def iter_labels(slp: Slp, rule: int | None = None):
    """Yield the terminal string derived from ``rule`` (default: start)."""
    rules = slp.rules
    stack = [iter(rules[slp.start if rule is None else rule])]
    while stack:
        for sym in stack[-1]:
            if isinstance(sym, int):
                stack.append(iter(rules[sym]))
                break
            yield sym
        else:
            stack.pop()


def expand(slp: Slp) -> Trace:
    check_slp(slp)
    return Trace(iter_labels(slp))


def chunk(slp: Slp, rule: int) -> Trace:
    """The sub-trace derived by one nonterminal."""
    return Trace(iter_labels(slp, rule))


@dataclass(frozen=True)
class GrammarStats:
    n_terminals: int
    n_nonterminals: int
    size: int
    expanded_length: int
    compression_ratio: float

    def as_dict(self) -> dict:
        return {
            "n_terminals": self.n_terminals,
            "n_nonterminals": self.n_nonterminals,
            "size": self.size,
            "expanded_length": self.expanded_length,
            "compression_ratio": self.compression_ratio,
        }


def grammar_stats(slp: Slp) -> GrammarStats:
    """Size is |distinct terminals| + |nonterminals|; ratio is n / size."""
    order = rank_order(slp)
    n = rule_lengths(slp, order)[slp.start]
    n_term = len(slp.terminals())
    size = n_term + len(slp.rules)
    return GrammarStats(n_term, len(slp.rules), size, n, n / size if size else 0.0)


def normalize(slp: Slp, run_threshold: int = DEFAULT_RUN_THRESHOLD) -> Slp:
    """Split long terminal runs out of mixed rules into fresh rules.

    Only rules that contain at least one nonterminal are touched; a run of
    at least ``run_threshold`` consecutive terminals becomes a new rule, so
    that terminal-only bodies can be summarised in one pass.
    """
    if run_threshold < 2:
        raise ValueError("run_threshold must be >= 2")
    check_slp(slp)
    next_id = max(slp.rules) + 1
    rules = dict(slp.rules)
    for rid in sorted(slp.rules):
        body = slp.rules[rid]
        if all(not isinstance(s, int) for s in body):
            continue
        new_body: list[Symbol] = []
        run: list[Symbol] = []

        def flush():
            nonlocal next_id
            if len(run) >= run_threshold:
                rules[next_id] = tuple(run)
                new_body.append(next_id)
                next_id += 1
            else:
                new_body.extend(run)
            run.clear()

        for sym in body:
            if isinstance(sym, int):
                flush()
                new_body.append(sym)
            else:
                run.append(sym)
        flush()
        rules[rid] = tuple(new_body)
    return Slp(slp.start, rules)


def trivial_slp(trace: Trace) -> Slp:
    """A one-rule grammar whose start body is the whole trace."""
    return Slp(0, {0: tuple(trace.labels)})


# ---------------------------------------------------------------------------
# file format

_HEADER = "slp v1"
_START_RE = re.compile(r"^start @(\d+)$")
_RULE_RE = re.compile(r"^@(\d+) :=((?: \S+)*)$")
_NT_RE = re.compile(r"^@(\d+)$")


def serialize_slp(slp: Slp) -> str:
    lines = [_HEADER, f"start @{slp.start}"]
    for rid in sorted(slp.rules):
        syms = " ".join(f"@{s}" if isinstance(s, int) else str(s) for s in slp.rules[rid])
        lines.append(f"@{rid} := {syms}" if syms else f"@{rid} :=")
    return "\n".join(lines) + "\n"


def parse_slp(text: str | Iterable[str]) -> Slp:
    lines = text.splitlines() if isinstance(text, str) else text
    header_seen = False
    start: int | None = None
    rules: dict[int, tuple[Symbol, ...]] = {}
    cache: dict[str, EventLabel] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if not header_seen:
            if line != _HEADER:
                raise TraceParseError(f"expected header {_HEADER!r}", lineno)
            header_seen = True
            continue
        if start is None:
            m = _START_RE.match(line)
            if m is None:
                raise TraceParseError("expected 'start @<id>'", lineno)
            start = int(m.group(1))
            continue
        m = _RULE_RE.match(line)
        if m is None:
            raise TraceParseError(f"malformed rule line {line!r}", lineno)
        rid = int(m.group(1))
        if rid in rules:
            raise TraceParseError(f"duplicate definition of rule @{rid}", lineno)
        body: list[Symbol] = []
        for tok in m.group(2).split():
            nt = _NT_RE.match(tok)
            if nt is not None:
                body.append(int(nt.group(1)))
                continue
            lab = cache.get(tok)
            if lab is None:
                lab = parse_label(tok, lineno)
                cache[tok] = lab
            body.append(lab)
        rules[rid] = tuple(body)
    if not header_seen:
        raise TraceParseError("empty grammar file")
    if start is None:
        raise TraceParseError("missing start line")
    if start not in rules:
        raise TraceParseError(f"start rule @{start} is not defined")
    return Slp(start, rules)


def read_slp(path) -> Slp:
    with open(path, encoding="utf-8") as fh:
        return parse_slp(fh)


def write_slp(slp: Slp, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_slp(slp))
