"""Command-line surface: trace replay, interactive serving, study
generation, statistics (CSV plus optional rendered figure), fuzzing,
exhaustive enumeration and benchmarking.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 invalid event
stream, 4 verification findings.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from .core import EngineConfig, ProtocolViolation
from .scene import Circle, Scene, SceneObject, SceneParseError, parse_scene, serialize_scene
from .integrator import RecognizerSession
from .logfmt import event_line
from . import study, traceio, verification

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_STREAM = 3
EXIT_FINDINGS = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise _UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", choices=["fig8", "immediate", "ghost"], default=None)
    p.add_argument("--slop", type=float, default=None, metavar="MM")
    p.add_argument("--stacking", choices=["on", "off"], default=None)


def _cli_config_overrides(args) -> dict:
    out = {}
    if args.policy is not None:
        out["policy"] = traceio.parse_policy(args.policy)
    if args.slop is not None:
        out["slop_radius"] = args.slop
    if args.stacking is not None:
        out["stacking_rule"] = traceio.parse_stacking(args.stacking)
    return out


def _load_initial_scene(args) -> Scene:
    if args.scene is not None:
        return parse_scene(Path(args.scene).read_text())
    if args.study_trial is not None:
        path, sep, index = args.study_trial.rpartition(":")
        if not sep:
            raise _UsageError("--study-trial expects FILE:INDEX")
        specs = study.read_specs_csv(Path(path).read_text())
        try:
            spec = next(s for s in specs if s.index == int(index))
        except (StopIteration, ValueError) as exc:
            raise _UsageError(f"trial {index!r} not found in {path}") from exc
        return Scene(
            [
                SceneObject(
                    id=1,
                    center=spec.source,
                    shape=Circle(spec.object_diameter_mm / 2.0),
                    z=0,
                )
            ]
        )
    return Scene()


def _build_parser() -> _Parser:
    parser = _Parser(prog="tapdrag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("replay", help="replay a trace and print gesture log plus final scene")
    p.add_argument("trace")
    p.add_argument("--scene", default=None, help="initial scene snapshot file")
    p.add_argument("--study-trial", default=None, metavar="FILE:INDEX")
    _add_config_flags(p)

    p = sub.add_parser("serve", help="interactive stdin/stdout session (one frame per event)")
    p.add_argument("--scene", default=None)
    p.add_argument("--study-trial", default=None, metavar="FILE:INDEX")
    _add_config_flags(p)

    p = sub.add_parser("gen-study", help="emit the trial CSV for one or more sessions")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--participants", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("stats", help="summarize result CSVs; optionally render a figure")
    p.add_argument("results")
    p.add_argument("--specs", default=None, help="trial spec CSV (needed for factor grouping)")
    p.add_argument("--group-by", default="", metavar="F1,F2")
    p.add_argument("--out", default=None)
    p.add_argument("--plot", default=None, metavar="FILE", help="write a box-plot figure here")

    p = sub.add_parser("fuzz", help="randomized invariant checking with minimized reproducers")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--streams", type=int, required=True)
    p.add_argument("--out-dir", default=None, help="where reproducer traces are written")

    p = sub.add_parser("enumerate", help="exhaustive small-stream check against the oracle")
    p.add_argument("--max-events", type=int, default=6)

    p = sub.add_parser("bench", help="throughput and per-event latency of the recognizer")
    p.add_argument("trace")
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--scene", default=None)
    p.add_argument("--study-trial", default=None, metavar="FILE:INDEX")
    _add_config_flags(p)

    return parser


def _cmd_replay(args, out) -> int:
    try:
        trace = traceio.parse_trace(Path(args.trace).read_text())
    except traceio.TraceParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        scene = _load_initial_scene(args)
    except SceneParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    config = trace.build_config(cli=_cli_config_overrides(args))
    try:
        result = traceio.replay(trace.events, scene, config)
    except (traceio.StreamErrorException, ProtocolViolation) as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return EXIT_STREAM
    out.write(result.to_text())
    return EXIT_OK


def _cmd_serve(args, out) -> int:
    try:
        scene = _load_initial_scene(args)
    except SceneParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    config = EngineConfig(**_cli_config_overrides(args))
    serve_loop(sys.stdin, out, scene, config)
    return EXIT_OK


def serve_loop(in_stream, out, scene: Scene, config: EngineConfig) -> None:
    """One line-delimited frame per input event: the gesture log lines it
    produced, then ``#scene`` + snapshot + ``#end``. A ``#scene`` block
    on input replaces the scene and resets the session; ``#quit`` ends
    the loop."""
    session = RecognizerSession(scene, config)

    def frame(lines) -> None:
        for line in lines:
            out.write(line + "\n")
        out.write("#scene\n")
        out.write(serialize_scene(session.scene))
        out.write("#end\n")
        out.flush()

    frame([])
    pending: list[str] | None = None
    for raw in in_stream:
        line = raw.strip()
        if pending is not None:
            if line == "#end":
                try:
                    new_scene = parse_scene("\n".join(pending))
                except SceneParseError as exc:
                    out.write(f"#error {exc}\n#end\n")
                    out.flush()
                    pending = None
                    continue
                session = RecognizerSession(new_scene, config)
                pending = None
                frame([])
            else:
                pending.append(line)
            continue
        if not line:
            continue
        if line == "#quit":
            break
        if line == "#scene":
            pending = []
            continue
        if line.startswith("#"):
            out.write(f"#error unsupported directive {line.split()[0]!r}\n#end\n")
            out.flush()
            continue
        try:
            parsed = traceio.parse_trace(line)
            if len(parsed.events) != 1:
                raise traceio.TraceParseError(1, "expected one event per line")
            ev = parsed.events[0]
            if not config.contains(ev.x, ev.y):
                raise traceio.TraceParseError(1, "event out of display bounds")
            emitted = session.process_event(ev)
        except (traceio.TraceParseError, ProtocolViolation) as exc:
            out.write(f"#error {exc}\n#end\n")
            out.flush()
            continue
        frame(event_line(ev.t, ge) for ge in emitted)


def _cmd_gen_study(args, out) -> int:
    cfg = study.StudyConfig(seed=args.seed)
    if args.participants is not None:
        if args.participants <= 0:
            raise _UsageError("--participants must be positive")
        specs = study.generate_participants(cfg, args.participants)
    else:
        specs = study.generate_session(cfg)
    text = study.specs_to_csv(specs)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def _cmd_stats(args, out) -> int:
    try:
        results = study.read_results_csv(Path(args.results).read_text())
    except ValueError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    group_by = [f for f in args.group_by.split(",") if f] if args.group_by else []
    specs: list[study.TrialSpec]
    if args.specs is not None:
        try:
            specs = study.read_specs_csv(Path(args.specs).read_text())
        except ValueError as exc:
            print(f"parse error: {exc}", file=sys.stderr)
            return EXIT_PARSE
    elif group_by:
        raise _UsageError("--group-by needs --specs to look up trial factors")
    else:
        # overall stats need no factors; synthesize bare specs from indexes
        specs = [
            study.TrialSpec(
                r.trial_index,
                study.Technique.TAPDRAG,
                True,
                study.SourceArea.LEFT_HALF,
                study.SHORT_DISTANCE_MM,
                study.Direction.RIGHT,
                (0.0, 0.0),
                (study.SHORT_DISTANCE_MM, 0.0),
            )
            for r in results
        ]
    try:
        stats = study.summarize(specs, results, group_by)
    except (study.EmptyGroup, study.MismatchedTrial, KeyError) as exc:
        print(f"stats error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*group_by, "n", "mean_time_s", "failure_rate", "min_s", "q1_s", "median_s", "q3_s", "max_s"])
    for s in stats:
        values = dict(s.key)
        fn = s.five_number
        w.writerow(
            [
                *[values[g] for g in group_by],
                s.n,
                f"{s.mean_time_s:.4f}",
                f"{s.failure_rate:.4f}",
                f"{fn.min:.4f}",
                f"{fn.q1:.4f}",
                f"{fn.median:.4f}",
                f"{fn.q3:.4f}",
                f"{fn.max:.4f}",
            ]
        )
    text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    if args.plot:
        from .plots import render_condition_stats

        render_condition_stats(stats, args.plot, title="trial completion")
    return EXIT_OK


def _cmd_fuzz(args, out) -> int:
    report = verification.fuzz(args.seed, args.streams)
    out.write(report.to_text())
    if args.out_dir and report.violations:
        repro_dir = Path(args.out_dir)
        repro_dir.mkdir(parents=True, exist_ok=True)
        for i, finding in enumerate(report.violations):
            path = repro_dir / f"repro_{i:03d}_{finding.kind}.trace"
            path.write_text(
                traceio.serialize_trace(
                    finding.events,
                    display=(
                        verification.MICRO_CONFIG.display_width,
                        verification.MICRO_CONFIG.display_height,
                    ),
                )
            )
            out.write(f"reproducer {path}\n")
    return EXIT_OK if report.ok else EXIT_FINDINGS


def _cmd_enumerate(args, out) -> int:
    if args.max_events > 8 or args.max_events < 2:
        raise _UsageError("--max-events must be between 2 and 8")
    report = verification.enumerate_and_check(args.max_events)
    out.write(report.to_text())
    return EXIT_OK if report.ok else EXIT_FINDINGS


def _cmd_bench(args, out) -> int:
    try:
        trace = traceio.parse_trace(Path(args.trace).read_text())
    except traceio.TraceParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        scene = _load_initial_scene(args)
    except SceneParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.repeat <= 0:
        raise _UsageError("--repeat must be positive")
    config = trace.build_config(cli=_cli_config_overrides(args))
    try:
        report = traceio.bench(trace.events, scene, config, args.repeat)
    except (traceio.StreamErrorException, ProtocolViolation) as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return EXIT_STREAM
    out.write(report.to_text())
    return EXIT_OK


_COMMANDS = {
    "replay": _cmd_replay,
    "serve": _cmd_serve,
    "gen-study": _cmd_gen_study,
    "stats": _cmd_stats,
    "fuzz": _cmd_fuzz,
    "enumerate": _cmd_enumerate,
    "bench": _cmd_bench,
}


def cli_dispatch(argv, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args, out)
    except _UsageError:
        return EXIT_USAGE
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))
