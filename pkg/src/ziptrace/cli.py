"""``ziptrace`` command line.

Exit codes: 0 clean, 1 race/violation (or verification disagreement)
found, 2 usage or I/O error, 3 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .bench import bench_one
from .engines import ENGINES, run_engine, wants_grammar
from .errors import GrammarError, TraceParseError, UsageError
from .gen import PATTERNS, GenSpec, gen_trace, random_suite
from .hb_compressed import HbOptions
from .report import to_json
from .sequitur import sequitur_compress
from .slp import (
    DEFAULT_RUN_THRESHOLD, Slp, check_slp, expand, grammar_stats, normalize,
    parse_slp, serialize_slp, validate_slp,
)
from .trace import Trace, has_errors, parse_trace, read_trace, serialize_trace, validate
from .verify import verify_traces

EXIT_OK, EXIT_FOUND, EXIT_USAGE, EXIT_MALFORMED = 0, 1, 2, 3


def _out(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _err(msg: str) -> None:
    sys.stderr.write(f"ziptrace: {msg}\n")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _is_grammar_text(text: str) -> bool:
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith("#"):
            return s == "slp v1"
    return False


def load_input(path: str) -> tuple[Trace | Slp, float]:
    """Parse a trace or grammar file, sniffing the ``slp v1`` header."""
    text = _read_text(path)
    t0 = time.perf_counter()
    if _is_grammar_text(text):
        data: Trace | Slp = parse_slp(text)
        check_slp(data)
    else:
        data = parse_trace(text)
    return data, (time.perf_counter() - t0) * 1000


def _report_diags(diags) -> None:
    for d in diags:
        _err(str(d))


# ---------------------------------------------------------------------------
# commands


def cmd_compress(args) -> int:
    trace = parse_trace(_read_text(args.trace))
    slp = sequitur_compress(trace)
    if not len(trace):
        _err("warning: empty trace, writing the empty grammar")
    elif args.normalize_threshold:
        slp = normalize(slp, args.normalize_threshold)
    _write_text(args.output, serialize_slp(slp))
    _out(grammar_stats(slp).as_dict())
    return EXIT_OK


def cmd_expand(args) -> int:
    slp = parse_slp(_read_text(args.grammar))
    _report_diags(d for d in validate_slp(slp) if d.severity != "error")
    _write_text(args.output, serialize_trace(expand(slp)))
    return EXIT_OK


def cmd_analyze(args) -> int:
    data, _ = load_input(args.input)
    is_grammar = isinstance(data, Slp)
    need_grammar = wants_grammar(args.engine)
    if is_grammar != need_grammar:
        if not args.auto:
            need = "a grammar (.slp)" if need_grammar else "a trace"
            raise UsageError(f"engine {args.engine} needs {need}; pass --auto to convert")
        data = sequitur_compress(data) if need_grammar else expand(data)
        if need_grammar and args.normalize_threshold and data.rules[data.start]:
            data = normalize(data, args.normalize_threshold)
    trace_view = expand(data) if isinstance(data, Slp) and args.strict else data
    if isinstance(trace_view, Trace):
        diags = validate(trace_view)
        _report_diags(diags)
        if args.strict and has_errors(diags):
            return EXIT_MALFORMED
    opts = HbOptions(vc_min_run=args.vc_min_run)
    rep = run_engine(args.engine, data, args.input, opts)
    print(to_json(rep))
    return EXIT_FOUND if rep.found else EXIT_OK


def cmd_verify(args) -> int:
    if args.traces:
        traces = [read_trace(p) for p in args.traces]
    else:
        traces = random_suite(
            args.runs, args.seed, args.max_events, args.threads, args.locks, args.vars
        )
    n, bad = verify_traces(traces)
    for v in bad:
        d = v.to_dict()
        d["trace"] = [str(lab) for lab in v.trace.labels]
        _out({"disagreement": d})
    _out({"checked": n, "disagreements": len(bad)})
    return EXIT_FOUND if bad else EXIT_OK


def _spec_from(args) -> GenSpec:
    return GenSpec(
        pattern=args.pattern,
        iterations=args.iterations,
        threads=args.threads,
        locks=args.locks,
        vars=args.vars,
        seed=args.seed,
        max_events=args.max_events,
    )


def cmd_gen(args) -> int:
    _write_text(args.output, serialize_trace(gen_trace(_spec_from(args))))
    return EXIT_OK


def cmd_bench(args) -> int:
    engines = args.engines.split(",") if args.engines else list(ENGINES)
    for e in engines:
        wants_grammar(e)  # validates the name
    inputs = []
    if args.files:
        for path in args.files:
            data, parse_ms = load_input(path)
            if isinstance(data, Slp):
                inputs.append((path, expand(data), data, parse_ms))
            else:
                inputs.append((path, data, None, parse_ms))
    else:
        spec = _spec_from(args)
        inputs.append((f"{spec.pattern}:N={spec.iterations}", gen_trace(spec), None, None))
    for name, trace, slp, parse_ms in inputs:
        rows = bench_one(name, trace, engines, args.repeat, slp, args.normalize_threshold, parse_ms)
        for row in rows:
            _out(row)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_gen_flags(p: argparse.ArgumentParser, pattern_default: str) -> None:
    p.add_argument("--pattern", choices=PATTERNS, default=pattern_default)
    p.add_argument("-n", "--iterations", type=int, default=10)
    p.add_argument("--threads", type=int, default=3)
    p.add_argument("--locks", type=int, default=2)
    p.add_argument("--vars", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-events", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ziptrace",
        description="Race and lockset analysis of grammar-compressed concurrency traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress a trace into an SLP")
    p.add_argument("trace")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--normalize-threshold", type=int, default=DEFAULT_RUN_THRESHOLD,
                   help="split terminal runs at least this long (0 disables)")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("expand", help="expand an SLP back into a trace")
    p.add_argument("grammar")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("analyze", help="run one engine")
    p.add_argument("input")
    p.add_argument("--engine", choices=ENGINES, required=True)
    p.add_argument("--auto", action="store_true", help="compress or expand the input as the engine needs")
    p.add_argument("--strict", action="store_true", help="exit 3 on trace validation errors")
    p.add_argument("--normalize-threshold", type=int, default=DEFAULT_RUN_THRESHOLD)
    p.add_argument("--vc-min-run", type=int, default=HbOptions().vc_min_run)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="differential check of all engines and oracles")
    p.add_argument("traces", nargs="*")
    p.add_argument("--runs", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-events", type=int, default=200)
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--locks", type=int, default=3)
    p.add_argument("--vars", type=int, default=4)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate a synthetic trace")
    _add_gen_flags(p, "random")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time engines on files or a generated trace")
    p.add_argument("files", nargs="*")
    _add_gen_flags(p, "inc-loop")
    p.add_argument("--engines", help="comma-separated engine list")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--normalize-threshold", type=int, default=DEFAULT_RUN_THRESHOLD)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (TraceParseError, GrammarError) as exc:
        _err(str(exc))
        return EXIT_MALFORMED
    except (UsageError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
