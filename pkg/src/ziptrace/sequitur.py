"""Online Sequitur grammar inference.

Maintains two invariants while consuming the input left to right:

* digram uniqueness: no pair of adjacent symbols occurs twice (except
  overlapping occurrences such as the two ``aa`` in ``aaa``);
* rule utility: every rule other than the start rule is referenced at
  least twice.

Rule bodies are circular doubly linked lists closed by a guard node, and
the digram index maps a pair of symbol keys to the left symbol of its
registered occurrence.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Hashable, Iterable

from .slp import Slp
from .trace import Trace


class _Sym:
    # key: terminal id (>= 0), ~rule.id for a nonterminal, None for a guard.
    # rule: referenced rule for a nonterminal, owning rule for a guard.
    __slots__ = ("p", "n", "key", "rule")

    def __init__(self, key, rule=None):
        self.p = None
        self.n = None
        self.key = key
        self.rule = rule


class _Rule:
    __slots__ = ("id", "guard", "refs", "alive")

    def __init__(self, rid: int):
        self.id = rid
        self.refs = 0
        self.alive = True
        g = _Sym(None, self)
        g.p = g.n = g
        self.guard = g


class Sequitur:
    """Incremental compressor; feed terminal ids with :meth:`append`."""

    def __init__(self):
        self._digrams: dict[tuple, _Sym] = {}
        self._next_id = 1
        self.start = _Rule(0)

    # -- linked list primitives -------------------------------------------

    def _join(self, left: _Sym, right: _Sym) -> None:
        ln = left.n
        if ln is not None:
            d = self._digrams
            k = left.key
            if k is not None and ln.key is not None:
                key = (k, ln.key)
                if d.get(key) is left:
                    del d[key]
            # Overlapping triples only register their second pair; when that
            # pair goes away, re-register the first so it is not forgotten.
            rk = right.key
            if rk is not None:
                rp, rn = right.p, right.n
                if rp is not None and rn is not None and rk == rp.key and rk == rn.key:
                    d[(rk, rk)] = right
            if k is not None and k == ln.key:
                lp = left.p
                if lp is not None and k == lp.key:
                    d[(k, k)] = lp
        left.n = right
        right.p = left

    def _insert_after(self, s: _Sym, y: _Sym) -> None:
        self._join(y, s.n)
        self._join(s, y)

    def _delete_digram(self, s: _Sym) -> None:
        n = s.n
        if s.key is None or n.key is None:
            return
        key = (s.key, n.key)
        if self._digrams.get(key) is s:
            del self._digrams[key]

    def _remove(self, s: _Sym) -> None:
        self._join(s.p, s.n)
        self._delete_digram(s)
        if s.key < 0:
            s.rule.refs -= 1

    def _nonterminal(self, rule: _Rule) -> _Sym:
        rule.refs += 1
        return _Sym(~rule.id, rule)

    def _copy(self, s: _Sym) -> _Sym:
        if s.key < 0:
            return self._nonterminal(s.rule)
        return _Sym(s.key)

    # -- the algorithm ------------------------------------------------------

    def append(self, term: int) -> None:
        g = self.start.guard
        last = g.p
        s = _Sym(term)
        s.p = last
        s.n = g
        g.p = s
        last.n = s
        self._check(last)

    def extend(self, terms: Iterable[int]) -> None:
        for t in terms:
            self.append(t)

    def _check(self, s: _Sym) -> bool:
        n = s.n
        if s.key is None or n.key is None:
            return False
        key = (s.key, n.key)
        x = self._digrams.get(key)
        if x is None:
            self._digrams[key] = s
            return False
        if x is s:
            return False
        if x.n is not s and s.n is not x:
            self._match(s, x)
        return True

    def _match(self, ss: _Sym, m: _Sym) -> None:
        if m.p.key is None and m.n.n.key is None and m.p.rule is not self.start:
            r = m.p.rule
            self._substitute(ss, r)
        else:
            r = _Rule(self._next_id)
            self._next_id += 1
            self._insert_after(r.guard.p, self._copy(ss))
            self._insert_after(r.guard.p, self._copy(ss.n))
            self._substitute(m, r)
            self._substitute(ss, r)
            first = r.guard.n
            self._digrams[(first.key, first.n.key)] = first
        if not r.alive:
            return
        # Substitution drops one reference to each symbol of the digram;
        # the survivor of a rule now used once lives in r's body.
        a = r.guard.n
        b = a.n
        if a.key is not None and a.key < 0 and a.rule.refs == 1:
            self._expand(a)
        if b.key is not None and b.key < 0 and b.rule.alive and b.rule.refs == 1 and b.p is not None:
            self._expand(b)

    def _substitute(self, s: _Sym, r: _Rule) -> None:
        q = s.p
        self._remove(q.n)
        self._remove(q.n)
        self._insert_after(q, self._nonterminal(r))
        if not self._check(q):
            self._check(q.n)

    def _expand(self, s: _Sym) -> None:
        left, right = s.p, s.n
        r = s.rule
        f, l = r.guard.n, r.guard.p
        self._delete_digram(s)
        r.alive = False
        self._join(left, f)
        self._join(l, right)
        if right.key is not None:
            self._digrams[(l.key, right.key)] = l

    # -- output ---------------------------------------------------------------

    def rules(self) -> dict[int, list[Hashable]]:
        """Reachable rules keyed by internal id; nonterminals as ``~id`` keys."""
        out: dict[int, list] = {}
        stack = [self.start]
        while stack:
            r = stack.pop()
            if r.id in out:
                continue
            body = []
            s = r.guard.n
            while s is not r.guard:
                body.append(s.key)
                if s.key < 0 and s.rule.id not in out:
                    stack.append(s.rule)
                s = s.n
            out[r.id] = body
        return out


def compress_ids(ids: Iterable[int]) -> Sequitur:
    seq = Sequitur()
    seq.extend(ids)
    return seq


def sequitur_compress(trace: Trace) -> Slp:
    """Compress a trace into a grammar whose expansion is the trace.

    Rules are renumbered in order of first appearance in a depth-first walk
    from the start rule, which is ``@0``.
    """
    alphabet: dict = {}
    ids = []
    for lab in trace.labels:
        i = alphabet.get(lab)
        if i is None:
            i = alphabet[lab] = len(alphabet)
        ids.append(i)
    labels = list(alphabet)
    seq = compress_ids(ids)
    raw = seq.rules()

    renum: dict[int, int] = {}
    order: list[int] = []
    stack = [0]
    while stack:
        rid = stack.pop()
        if rid in renum:
            continue
        renum[rid] = len(renum)
        order.append(rid)
        children = [~k for k in raw[rid] if k < 0]
        stack.extend(reversed(children))
    rules = {
        renum[rid]: tuple(renum[~k] if k < 0 else labels[k] for k in raw[rid])
        for rid in order
    }
    return Slp(0, rules)


# ---------------------------------------------------------------------------
# invariant checks


def digram_violations(slp: Slp) -> list[tuple]:
    """Digrams occurring twice without overlapping."""
    where: dict[tuple, list[tuple[int, int]]] = defaultdict(list)
    for rid, body in slp.rules.items():
        for i in range(len(body) - 1):
            where[(body[i], body[i + 1])].append((rid, i))
    bad = []
    for dg, occ in where.items():
        if len(occ) < 2:
            continue
        occ.sort()
        for (r1, i1), (r2, i2) in zip(occ, occ[1:]):
            if not (r1 == r2 and i2 == i1 + 1):
                bad.append(dg)
                break
        else:
            # a run like aaaa has pairwise overlapping neighbours but
            # non-overlapping first/third occurrences
            if len(occ) > 2:
                bad.append(dg)
    return bad


def utility_violations(slp: Slp) -> list[int]:
    """Non-start rules referenced fewer than two times."""
    refs = Counter(s for body in slp.rules.values() for s in body if isinstance(s, int))
    return sorted(rid for rid in slp.rules if rid != slp.start and refs[rid] < 2)
