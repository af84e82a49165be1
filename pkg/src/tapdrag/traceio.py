"""Plain-text trace files, deterministic replay, and the event
throughput benchmark.

Trace format: optional header lines ``#display <w_mm> <h_mm>``,
``#dpi <value>`` and ``#config key=value``, then one event per line
``t_ms id phase x_mm y_mm`` with phases ``d|m|u``, integer millisecond
timestamps and coordinates printed with 3 fraction digits. The format
round-trips exactly, which golden-file tests rely on.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .core import (
    EngineConfig,
    PHASE_BY_CODE,
    Policy,
    StackingRule,
    StreamError,
    TouchEvent,
    validate_stream,
)
from .integrator import RecognizerSession
from .logfmt import event_line
from .scene import Scene, serialize_scene


class TraceParseError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


_CONFIG_KEYS = ("policy", "slop", "stacking", "tolerance")


@dataclass
class ParsedTrace:
    events: list[TouchEvent]
    overrides: dict[str, str] = field(default_factory=dict)
    display: tuple[float, float] | None = None
    dpi: float | None = None

    def build_config(self, base: EngineConfig | None = None, cli: dict | None = None) -> EngineConfig:
        """Merge precedence: explicit CLI flags > trace header > base."""
        base = base or EngineConfig()
        values = {
            "display_width": base.display_width,
            "display_height": base.display_height,
            "dpi": base.dpi,
            "slop_radius": base.slop_radius,
            "policy": base.policy,
            "stacking_rule": base.stacking_rule,
            "target_tolerance_radius": base.target_tolerance_radius,
        }
        if self.display is not None:
            values["display_width"], values["display_height"] = self.display
        if self.dpi is not None:
            values["dpi"] = self.dpi
        if "policy" in self.overrides:
            values["policy"] = parse_policy(self.overrides["policy"])
        if "slop" in self.overrides:
            values["slop_radius"] = float(self.overrides["slop"])
        if "stacking" in self.overrides:
            values["stacking_rule"] = parse_stacking(self.overrides["stacking"])
        if "tolerance" in self.overrides:
            values["target_tolerance_radius"] = float(self.overrides["tolerance"])
        for key, value in (cli or {}).items():
            if value is not None:
                values[key] = value
        return EngineConfig(**values)


def parse_policy(text: str) -> Policy:
    key = text.strip().lower()
    if key in ("fig8", "immediate"):
        return Policy.IMMEDIATE
    if key == "ghost":
        return Policy.GHOST
    raise ValueError(f"unknown policy {text!r}")


def parse_stacking(text: str) -> StackingRule:
    key = text.strip().lower()
    if key in ("on", StackingRule.TAPDRAG_ON_OBJECT_TARGET.value):
        return StackingRule.TAPDRAG_ON_OBJECT_TARGET
    if key in ("off", StackingRule.REJECT_OBJECT_TARGET.value):
        return StackingRule.REJECT_OBJECT_TARGET
    raise ValueError(f"unknown stacking rule {text!r}")


def _fmt_header_num(v: float) -> str:
    return f"{v:g}"


def parse_trace(text: str) -> ParsedTrace:
    """Parse trace text; raises :class:`TraceParseError` with a 1-based
    line number on the first malformed line."""
    events: list[TouchEvent] = []
    trace = ParsedTrace(events)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = line.split()
            tag = fields[0]
            try:
                if tag == "#display":
                    if len(fields) != 3:
                        raise ValueError("#display needs width and height")
                    trace.display = (float(fields[1]), float(fields[2]))
                elif tag == "#dpi":
                    if len(fields) != 2:
                        raise ValueError("#dpi needs one value")
                    trace.dpi = float(fields[1])
                elif tag == "#config":
                    if len(fields) != 2 or "=" not in fields[1]:
                        raise ValueError("#config needs key=value")
                    key, _, value = fields[1].partition("=")
                    if key not in _CONFIG_KEYS:
                        raise ValueError(f"unknown config key {key!r}")
                    trace.overrides[key] = value
                else:
                    raise ValueError(f"unknown header {tag!r}")
            except ValueError as exc:
                raise TraceParseError(lineno, str(exc)) from exc
            continue
        fields = line.split()
        if len(fields) != 5:
            raise TraceParseError(lineno, f"expected 5 fields, got {len(fields)}")
        phase = PHASE_BY_CODE.get(fields[2])
        if phase is None:
            raise TraceParseError(lineno, f"bad_phase {fields[2]!r}")
        try:
            t = float(int(fields[0]))
            touch_id = int(fields[1])
            x = float(fields[3])
            y = float(fields[4])
        except ValueError as exc:
            raise TraceParseError(lineno, str(exc)) from exc
        if touch_id <= 0:
            raise TraceParseError(lineno, f"touch id must be positive, got {touch_id}")
        events.append(TouchEvent(t, touch_id, phase, x, y))
    return trace


def serialize_trace(
    events,
    *,
    display: tuple[float, float] | None = None,
    dpi: float | None = None,
    overrides: dict[str, str] | None = None,
) -> str:
    lines = []
    if display is not None:
        lines.append(f"#display {_fmt_header_num(display[0])} {_fmt_header_num(display[1])}")
    if dpi is not None:
        lines.append(f"#dpi {_fmt_header_num(dpi)}")
    for key in _CONFIG_KEYS:
        if overrides and key in overrides:
            lines.append(f"#config {key}={overrides[key]}")
    for ev in events:
        lines.append(
            f"{int(round(ev.t))} {ev.touch_id} {ev.phase.value} {ev.x:.3f} {ev.y:.3f}"
        )
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class ReplayResult:
    log_lines: list[str]
    scene: Scene

    def to_text(self) -> str:
        body = "".join(f"{line}\n" for line in self.log_lines)
        return f"{body}#scene\n{serialize_scene(self.scene)}"


def replay(events, scene: Scene, config: EngineConfig) -> ReplayResult:
    """Run a validated stream through a fresh session; deterministic for
    identical inputs."""
    err = validate_stream(events, config)
    if err is not None:
        raise StreamErrorException(err)
    session = RecognizerSession(scene, config)
    log: list[str] = []
    for ev in events:
        for ge in session.process_event(ev):
            log.append(event_line(ev.t, ge))
    return ReplayResult(log, session.scene)


class StreamErrorException(ValueError):
    def __init__(self, error: StreamError):
        super().__init__(f"invalid stream at event {error.index}: {error.kind.value}")
        self.error = error


@dataclass(frozen=True)
class BenchReport:
    events_processed: int
    wall_time_s: float
    events_per_second: float
    p50_ns: int
    p99_ns: int
    max_ns: int

    def to_text(self) -> str:
        return (
            f"events_processed {self.events_processed}\n"
            f"wall_time_s {self.wall_time_s:.3f}\n"
            f"events_per_second {self.events_per_second:.1f}\n"
            f"latency_p50_ns {self.p50_ns}\n"
            f"latency_p99_ns {self.p99_ns}\n"
            f"latency_max_ns {self.max_ns}\n"
        )


def _rank(sorted_ns: list[int], q: float) -> int:
    # nearest-rank percentile; p50 <= p99 <= max holds structurally
    n = len(sorted_ns)
    idx = max(0, min(n - 1, math.ceil(q * n) - 1))
    return sorted_ns[idx]


def bench(events, scene: Scene, config: EngineConfig, repeats: int = 1) -> BenchReport:
    """Replay the stream ``repeats`` times against fresh sessions,
    timing every event."""
    err = validate_stream(events, config)
    if err is not None:
        raise StreamErrorException(err)
    latencies: list[int] = []
    total = 0
    t_start = time.perf_counter()
    for _ in range(repeats):
        session = RecognizerSession(scene.clone(), config)
        process = session.process_event
        for ev in events:
            t0 = time.perf_counter_ns()
            process(ev)
            latencies.append(time.perf_counter_ns() - t0)
        total += len(events)
    wall = time.perf_counter() - t_start
    latencies.sort()
    if not latencies:
        return BenchReport(0, wall, 0.0, 0, 0, 0)
    return BenchReport(
        events_processed=total,
        wall_time_s=wall,
        events_per_second=total / wall if wall > 0 else float("inf"),
        p50_ns=_rank(latencies, 0.50),
        p99_ns=_rank(latencies, 0.99),
        max_ns=latencies[-1],
    )
