"""Gesture-log line format.

One event per line: ``timestamp_ms EVENT_NAME key=value ...`` with keys
sorted and every decimal printed with exactly 3 fraction digits. Golden
file tests depend on this being bit-exact, so all formatting funnels
through here.
"""
from __future__ import annotations


def fmt(v: float) -> str:
    """Format one millimetre/scalar value with 3 fraction digits."""
    r = round(v, 3)
    if r == 0.0:
        r = 0.0  # avoid "-0.000"
    return f"{r:.3f}"


def fmt_ts(t: float) -> str:
    """Timestamps print as integers when whole (the file formats store
    integer milliseconds), otherwise with 3 fraction digits."""
    i = int(t)
    return str(i) if i == t else fmt(t)


def fmt_point(p) -> str:
    return f"{fmt(p[0])},{fmt(p[1])}"


def fmt_ids(ids) -> str:
    return ",".join(str(i) for i in sorted(ids))


def format_line(t: float, name: str, items) -> str:
    parts = [fmt_ts(t), name]
    parts.extend(f"{k}={v}" for k, v in sorted(items))
    return " ".join(parts)


def event_line(t: float, event) -> str:
    """Render one gesture event at the timestamp of the touch event that
    produced it."""
    return format_line(t, event.NAME, event.log_items())


def parse_line(line: str) -> tuple[float, str, dict[str, str]]:
    """Inverse of format_line at the string level."""
    fields = line.split(" ")
    if len(fields) < 2:
        raise ValueError(f"malformed gesture log line: {line!r}")
    t = float(fields[0])
    name = fields[1]
    kv: dict[str, str] = {}
    for field in fields[2:]:
        k, sep, v = field.partition("=")
        if not sep:
            raise ValueError(f"malformed key=value field: {field!r}")
        kv[k] = v
    return t, name, kv
