"""Engine reports and their JSON-lines serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .hb_baseline import RacePair
from .slp import Slp, grammar_stats
from .trace import Trace, trace_stats

REPORT_VERSION = 1


@dataclass
class RaceReport:
    engine: str
    race_found: bool
    first_race: RacePair | None = None
    input: str | None = None
    stats: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"v": REPORT_VERSION, "engine": self.engine, "input": self.input,
             "race_found": self.race_found}
        if self.first_race is not None:
            d["first_race"] = list(self.first_race)
        d["stats"] = self.stats
        return d

    @property
    def found(self) -> bool:
        return self.race_found


@dataclass
class ViolationReport:
    engine: str
    violations: list[str]
    first_empty: dict[str, int] | None = None
    input: str | None = None
    stats: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"v": REPORT_VERSION, "engine": self.engine, "input": self.input,
             "violations": list(self.violations)}
        if self.first_empty is not None:
            d["first_empty"] = dict(self.first_empty)
        d["stats"] = self.stats
        return d

    @property
    def found(self) -> bool:
        return bool(self.violations)


def to_json(report: RaceReport | ViolationReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=False)


def trace_report_stats(trace: Trace, wall_ms: float) -> dict:
    st = trace_stats(trace)
    return {
        "events": st.n_events,
        "threads": len(st.threads),
        "locks": len(st.locks),
        "vars": len(st.variables),
        "grammar_size": None,
        "compression_ratio": None,
        "wall_ms": max(0.0, wall_ms),
    }


def slp_report_stats(slp: Slp, wall_ms: float) -> dict:
    gs = grammar_stats(slp)
    threads, locks, variables = set(), set(), set()
    for lab in slp.terminals():
        threads.add(lab.thread)
        if lab.kind in ("fork", "join"):
            threads.add(lab.target)
        elif lab.kind in ("acq", "rel"):
            locks.add(lab.target)
        else:
            variables.add(lab.target)
    return {
        "events": gs.expanded_length,
        "threads": len(threads),
        "locks": len(locks),
        "vars": len(variables),
        "grammar_size": gs.size,
        "compression_ratio": gs.compression_ratio,
        "wall_ms": max(0.0, wall_ms),
    }
