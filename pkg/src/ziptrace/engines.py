"""Uniform entry points for the five analysis engines."""

from __future__ import annotations

import time

from .errors import UsageError
from .hb_baseline import djit_races, goldilocks_races
from .hb_compressed import HbOptions, analyze_slp_hb
from .lockset_baseline import eraser_detect
from .lockset_compressed import analyze_slp_lockset
from .report import RaceReport, ViolationReport, trace_report_stats
from .slp import Slp
from .trace import Trace

HB_ENGINES = ("hb-compressed", "hb-vc", "hb-goldilocks")
LS_ENGINES = ("ls-compressed", "ls-eraser")
ENGINES = HB_ENGINES + LS_ENGINES
COMPRESSED_ENGINES = ("hb-compressed", "ls-compressed")


def wants_grammar(engine: str) -> bool:
    if engine not in ENGINES:
        raise UsageError(f"unknown engine {engine!r}")
    return engine in COMPRESSED_ENGINES


def _streaming_hb(engine: str, races, trace: Trace, input: str | None) -> RaceReport:
    # run to the end of the trace even after the first race so that timings
    # cover the same amount of work as the grammar analysis
    t0 = time.perf_counter()
    first = None
    for pair in races(trace):
        if first is None:
            first = pair
    wall = (time.perf_counter() - t0) * 1000
    return RaceReport(engine, first is not None, first, input, trace_report_stats(trace, wall))


def run_engine(
    engine: str,
    data: Trace | Slp,
    input: str | None = None,
    hb_options: HbOptions | None = None,
) -> RaceReport | ViolationReport:
    """Run ``engine`` on a trace (baselines) or a grammar (compressed engines)."""
    if wants_grammar(engine) != isinstance(data, Slp):
        need = "a grammar" if wants_grammar(engine) else "a trace"
        raise UsageError(f"engine {engine} needs {need}")
    if engine == "hb-compressed":
        return analyze_slp_hb(data, hb_options, input)
    if engine == "ls-compressed":
        return analyze_slp_lockset(data, input)
    if engine == "hb-vc":
        return _streaming_hb(engine, djit_races, data, input)
    if engine == "hb-goldilocks":
        return _streaming_hb(engine, goldilocks_races, data, input)
    return eraser_detect(data, input)
