"""Race and lockset analysis of concurrency traces compressed into
straight-line grammars."""

from .errors import GrammarError, OracleCapExceeded, TraceParseError, UsageError, ZipTraceError
from .hb_baseline import RacePair, djit_detect, goldilocks_detect
from .hb_compressed import HbSummary, analyze_slp_hb
from .lockset_baseline import eraser_detect
from .lockset_compressed import LockSetSummary, analyze_slp_lockset
from .sequitur import sequitur_compress
from .slp import Slp, expand, normalize, parse_slp, serialize_slp
from .trace import Event, EventLabel, Trace, parse_trace, serialize_trace

__version__ = "0.1.0"

__all__ = [
    "Event", "EventLabel", "GrammarError", "HbSummary", "LockSetSummary",
    "OracleCapExceeded", "RacePair", "Slp", "Trace", "TraceParseError",
    "UsageError", "ZipTraceError", "analyze_slp_hb", "analyze_slp_lockset",
    "djit_detect", "eraser_detect", "expand", "goldilocks_detect", "normalize",
    "parse_slp", "parse_trace", "sequitur_compress", "serialize_slp",
    "serialize_trace",
]
