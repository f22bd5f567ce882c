"""Timing harness comparing the grammar engines with the baselines."""

from __future__ import annotations

import statistics
import time
from typing import Sequence

from .engines import ENGINES, run_engine, wants_grammar
from .hb_compressed import HbOptions
from .sequitur import sequitur_compress
from .slp import Slp, grammar_stats, normalize
from .trace import Trace

_BASELINES = {"hb-compressed": ("hb-vc", "hb-goldilocks"), "ls-compressed": ("ls-eraser",)}


def bench_one(
    name: str,
    trace: Trace,
    engines: Sequence[str] = ENGINES,
    repeat: int = 3,
    slp: Slp | None = None,
    run_threshold: int | None = None,
    parse_ms: float | None = None,
) -> list[dict]:
    """One row per engine; engine time is the median over ``repeat`` runs.

    Grammar construction is timed once and reported as ``compress_ms``,
    separate from every engine's ``wall_ms``.
    """
    compress_ms = None
    if slp is None and any(wants_grammar(e) for e in engines):
        t0 = time.perf_counter()
        slp = sequitur_compress(trace)
        if run_threshold and len(trace):
            slp = normalize(slp, run_threshold)
        compress_ms = (time.perf_counter() - t0) * 1000
    gs = grammar_stats(slp) if slp is not None else None

    times: dict[str, float] = {}
    rows: dict[str, dict] = {}
    for engine in engines:
        data = slp if wants_grammar(engine) else trace
        samples = []
        rep = None
        for _ in range(max(1, repeat)):
            rep = run_engine(engine, data, name, HbOptions())
            samples.append(rep.stats["wall_ms"])
        times[engine] = statistics.median(samples)
        rows[engine] = {
            "v": 1,
            "input": name,
            "engine": engine,
            "found": rep.found,
            "events": len(trace),
            "grammar_size": gs.size if gs else None,
            "compression_ratio": gs.compression_ratio if gs else None,
            "parse_ms": parse_ms,
            "compress_ms": compress_ms,
            "wall_ms": times[engine],
            "speedup": None,
        }
    for engine, bases in _BASELINES.items():
        measured = [times[b] for b in bases if b in times]
        if engine in times and measured:
            mine = times[engine]
            rows[engine]["speedup"] = min(measured) / mine if mine > 0 else float("inf")
    return [rows[e] for e in engines]
