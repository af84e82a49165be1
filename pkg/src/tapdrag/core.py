"""Shared value types, units, and input-stream validation.

Conventions used throughout the engine:

* coordinates are physical millimetres, origin at the display's top-left
  corner, x growing rightward and y growing downward;
* timestamps are milliseconds and never decrease within a stream;
* touch ids are opaque positive integers that may be reused once lifted.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

Point = tuple[float, float]


class Phase(enum.Enum):
    """Lifecycle phase of one touch sample."""

    DOWN = "d"
    MOVE = "m"
    UP = "u"


PHASE_BY_CODE = {p.value: p for p in Phase}


@dataclass(frozen=True, slots=True)
class TouchEvent:
    """One timestamped sample of one touch point.

    For UP events the position carries the last known location of the
    touch rather than new information.
    """

    t: float
    touch_id: int
    phase: Phase
    x: float
    y: float

    @property
    def pos(self) -> Point:
        return (self.x, self.y)


class Policy(enum.Enum):
    """How a second touch is disambiguated while an object is held.

    IMMEDIATE previews the tap-drag destination as soon as the second
    touch lands (wire name ``fig8``); GHOST shows a translucent preview
    and defers the decision until a touch moves or lifts.
    """

    IMMEDIATE = "fig8"
    GHOST = "ghost"


class StackingRule(enum.Enum):
    """Whether a second touch on a different draggable object may serve
    as a tap-drag destination (allowing objects to be stacked)."""

    TAPDRAG_ON_OBJECT_TARGET = "tapdrag_on_object_target"
    REJECT_OBJECT_TARGET = "reject_object_target"


@dataclass(frozen=True, slots=True)
class EngineConfig:
    """Static recognizer configuration.

    The default display is the 708 x 398 mm active area of a 32-inch
    16:9 panel. ``dpi`` only matters to frontends converting pixels to
    millimetres; recognition itself is resolution-independent.
    """

    display_width: float = 708.0
    display_height: float = 398.0
    dpi: float = 96.0
    slop_radius: float = 5.0
    policy: Policy = Policy.IMMEDIATE
    stacking_rule: StackingRule = StackingRule.TAPDRAG_ON_OBJECT_TARGET
    target_tolerance_radius: float = 17.5

    def __post_init__(self) -> None:
        if self.display_width <= 0 or self.display_height <= 0:
            raise ValueError("display dimensions must be positive")
        if self.slop_radius <= 0:
            raise ValueError("slop_radius must be positive")
        if self.target_tolerance_radius <= 0:
            raise ValueError("target_tolerance_radius must be positive")
        if self.dpi <= 0:
            raise ValueError("dpi must be positive")

    @property
    def mm_per_px(self) -> float:
        return 25.4 / self.dpi

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.display_width and 0.0 <= y <= self.display_height


class StreamErrorKind(enum.Enum):
    PHASE_ORDER = "phase_order"
    DUPLICATE_DOWN = "duplicate_down"
    UP_WITHOUT_DOWN = "up_without_down"
    TIME_REGRESSION = "time_regression"
    OUT_OF_BOUNDS = "out_of_bounds"


@dataclass(frozen=True, slots=True)
class StreamError:
    """First invariant violation found in a stream, by event index."""

    index: int
    kind: StreamErrorKind


class ProtocolViolation(Exception):
    """Raised when the recognizer is fed an event that breaks stream
    well-formedness. Always a caller bug, never an expected error."""


def validate_stream(events, config: EngineConfig) -> StreamError | None:
    """Check a whole event sequence against the stream invariants.

    Returns None when the stream is acceptable, otherwise the first
    violation. Streams may end with touches still down; every prefix of
    a valid stream is itself valid.
    """
    down: set[int] = set()
    last_t = -math.inf
    for i, ev in enumerate(events):
        if ev.t < last_t:
            return StreamError(i, StreamErrorKind.TIME_REGRESSION)
        last_t = ev.t
        if not (math.isfinite(ev.x) and math.isfinite(ev.y)) or not config.contains(ev.x, ev.y):
            return StreamError(i, StreamErrorKind.OUT_OF_BOUNDS)
        if ev.phase is Phase.DOWN:
            if ev.touch_id in down:
                return StreamError(i, StreamErrorKind.DUPLICATE_DOWN)
            down.add(ev.touch_id)
        elif ev.phase is Phase.MOVE:
            if ev.touch_id not in down:
                return StreamError(i, StreamErrorKind.PHASE_ORDER)
        else:
            if ev.touch_id not in down:
                return StreamError(i, StreamErrorKind.UP_WITHOUT_DOWN)
            down.discard(ev.touch_id)
    return None
