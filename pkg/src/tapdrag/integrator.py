"""Combined recognizer: routes raw touch events through hit testing and
slop tracking, and arbitrates among tap-drag, traditional one-finger
drag, two-finger pinch/rotate/move and selection gestures.

Two disambiguation policies exist for a second touch that lands on the
background or another object while a source object is held:

* IMMEDIATE: the tap-drag preview starts at once; the destination can
  be slid around like a slider before committing.
* GHOST: a translucent preview is shown while the pair is ambiguous; a
  touch moving beyond the slop radius resolves it as a two-finger
  manipulation, a lift resolves it as a tap-drag.

A second touch on the *same* object always means a two-finger
manipulation, so short tap-drags inside one object are rejected by
design. Whether a second touch on a *different* draggable object may be
a tap-drag destination is controlled by the stacking rule.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import EngineConfig, Phase, Point, Policy, ProtocolViolation, StackingRule, TouchEvent
from .logfmt import fmt, fmt_point
from .scene import (
    RectRegion,
    Scene,
    SimilarityTransform,
    hit_test,
    objects_in_region,
    similarity_from_touch_pairs,
)
from . import machine
from .machine import (
    IDLE,
    Idle,
    ObjectHit,
    Preview,
    Reverted,
    SelectAnchor,
    SelectVertexHeld,
    SelectionChanged,
    SetSelection,
    SourceHeld,
    TranslateObjects,
    apply_mutations,
    td_step,
)

# --- Integrator-level gesture events ------------------------------------


@dataclass(frozen=True, slots=True)
class DragStarted:
    NAME = "DRAG_STARTED"
    object_id: int

    def log_items(self):
        return [("object", str(self.object_id))]


@dataclass(frozen=True, slots=True)
class DragMoved:
    NAME = "DRAG_MOVED"
    object_id: int
    to: Point

    def log_items(self):
        return [("object", str(self.object_id)), ("to", fmt_point(self.to))]


@dataclass(frozen=True, slots=True)
class Dropped:
    NAME = "DROPPED"
    object_id: int
    at: Point

    def log_items(self):
        return [("at", fmt_point(self.at)), ("object", str(self.object_id))]


@dataclass(frozen=True, slots=True)
class ManipulationUpdated:
    NAME = "MANIPULATION_UPDATED"
    object_id: int
    xf: SimilarityTransform

    def log_items(self):
        return [
            ("object", str(self.object_id)),
            ("s", fmt(self.xf.s)),
            ("theta", fmt(self.xf.theta)),
            ("tx", fmt(self.xf.tx)),
            ("ty", fmt(self.xf.ty)),
        ]


@dataclass(frozen=True, slots=True)
class GhostShown:
    NAME = "GHOST_SHOWN"
    object_id: int
    at: Point

    def log_items(self):
        return [("at", fmt_point(self.at)), ("object", str(self.object_id))]


@dataclass(frozen=True, slots=True)
class GhostResolved:
    NAME = "GHOST_RESOLVED"
    resolved_as: str  # "tapdrag" | "manipulation"

    def log_items(self):
        return [("as", self.resolved_as)]


@dataclass(frozen=True, slots=True)
class RubberBandChanged:
    NAME = "RUBBER_BAND_CHANGED"
    rect: tuple[float, float, float, float]  # minx, miny, maxx, maxy

    def log_items(self):
        r = self.rect
        return [("rect", f"{fmt(r[0])},{fmt(r[1])},{fmt(r[2])},{fmt(r[3])}")]


# --- Session modes --------------------------------------------------------


@dataclass(slots=True)
class TradDragging:
    touch_id: int
    object_id: int
    grab_offset: Point


@dataclass(slots=True)
class Manipulating:
    touch_a: int
    touch_b: int
    object_id: int
    start_a: Point  # down points of the pair
    start_b: Point
    start_center: Point
    start_rotation: float
    start_scale: float


@dataclass(slots=True)
class RubberBand:
    touch_id: int
    anchor: Point


@dataclass(slots=True)
class AmbiguousPair:
    """GHOST policy only: a held source plus a stationary second touch,
    still undecided between tap-drag and manipulation. Carries the held
    source's data so the machine can stay idle while the pair is
    pending."""

    source_touch_id: int
    target_touch_id: int
    object_id: int
    origin: Point
    grab_offset: Point


Mode = TradDragging | Manipulating | RubberBand | AmbiguousPair


@dataclass(slots=True)
class TouchState:
    down: Point
    last: Point
    beyond_slop: bool


class RecognizerSession:
    """Full mutable recognition state for one logical event stream.

    Sessions are independent and single-threaded: feed events in stream
    order through :meth:`process_event` and apply nothing else to the
    scene while the session is live.
    """

    def __init__(self, scene: Scene, config: EngineConfig | None = None):
        self.scene = scene
        self.config = config or EngineConfig()
        self.td: machine.TapDragState = IDLE
        self.mode: Mode | None = None
        self.touches: dict[int, TouchState] = {}
        self._last_t = float("-inf")
        self._slop_sq = self.config.slop_radius * self.config.slop_radius

    # -- helpers ----------------------------------------------------------

    def _delegate(self, event: TouchEvent, hit: ObjectHit | None = None) -> list:
        new_state, events, mutations = td_step(self.td, event, hit, self.scene, self.config)
        self.td = new_state
        apply_mutations(self.scene, mutations)
        return events

    def _classify(self, p: Point) -> ObjectHit | None:
        oid = hit_test(self.scene, p)
        if oid is None:
            return None
        return ObjectHit(oid, self.scene.get(oid).center)

    def _enter_manipulation(self, touch_a: int, touch_b: int, object_id: int) -> None:
        obj = self.scene.get(object_id)
        self.mode = Manipulating(
            touch_a,
            touch_b,
            object_id,
            self.touches[touch_a].down,
            self.touches[touch_b].down,
            obj.center,
            obj.rotation,
            obj.scale,
        )

    def _translate_selection_with(self, object_id: int, delta: Point) -> None:
        others = tuple(i for i in sorted(self.scene.selection) if i != object_id)
        if others:
            apply_mutations(self.scene, [TranslateObjects(others, delta)])

    # -- event entry point --------------------------------------------------

    def process_event(self, event: TouchEvent) -> list:
        """Advance the session by one touch event and return the gesture
        events it produced. Scene mutations are applied atomically
        before returning."""
        if event.t < self._last_t:
            raise ProtocolViolation(f"timestamp regressed at t={event.t}")
        self._last_t = event.t
        phase = event.phase
        if phase is Phase.DOWN:
            if event.touch_id in self.touches:
                raise ProtocolViolation(f"duplicate down for touch {event.touch_id}")
            self.touches[event.touch_id] = TouchState(event.pos, event.pos, False)
            return self._on_down(event)
        ts = self.touches.get(event.touch_id)
        if ts is None:
            raise ProtocolViolation(f"{phase.name.lower()} for unknown touch {event.touch_id}")
        ts.last = event.pos
        if phase is Phase.MOVE:
            if not ts.beyond_slop:
                dx = event.x - ts.down[0]
                dy = event.y - ts.down[1]
                if dx * dx + dy * dy > self._slop_sq:
                    ts.beyond_slop = True
            return self._on_move(event, ts)
        out = self._on_up(event, ts)
        del self.touches[event.touch_id]
        return out

    # -- phase handlers -----------------------------------------------------

    def _on_down(self, event: TouchEvent) -> list:
        if self.mode is not None:
            return []  # an active drag/manipulation/band/ghost owns the session
        td = self.td
        if isinstance(td, Idle):
            return self._delegate(event, self._classify(event.pos))
        if isinstance(td, SourceHeld):
            hit = self._classify(event.pos)
            if hit is not None and hit.object_id == td.object_id:
                # Both touches on one object: always a manipulation; the
                # acquired source is rescinded without an abort because
                # the object never moved.
                self._enter_manipulation(td.source_touch_id, event.touch_id, td.object_id)
                self.td = IDLE
                return []
            if (
                hit is not None
                and self.config.stacking_rule is StackingRule.REJECT_OBJECT_TARGET
            ):
                return []  # second touch on another object is not a destination
            if self.config.policy is Policy.GHOST:
                self.mode = AmbiguousPair(
                    td.source_touch_id, event.touch_id, td.object_id, td.origin, td.grab_offset
                )
                self.td = IDLE
                at = (event.x + td.grab_offset[0], event.y + td.grab_offset[1])
                return [GhostShown(td.object_id, at)]
            return self._delegate(event, hit)
        if isinstance(td, SelectAnchor):
            return self._delegate(event, None)
        return []  # Preview / TargetResidue / SelectVertexHeld: extra touch ignored

    def _on_move(self, event: TouchEvent, ts: TouchState) -> list:
        mode = self.mode
        tid = event.touch_id
        if mode is not None:
            if isinstance(mode, TradDragging):
                if tid != mode.touch_id:
                    return []
                new_center = (event.x + mode.grab_offset[0], event.y + mode.grab_offset[1])
                obj = self.scene.get(mode.object_id)
                delta = (new_center[0] - obj.center[0], new_center[1] - obj.center[1])
                obj.center = new_center
                if mode.object_id in self.scene.selection:
                    self._translate_selection_with(mode.object_id, delta)
                return [DragMoved(mode.object_id, new_center)]
            if isinstance(mode, Manipulating):
                if tid != mode.touch_a and tid != mode.touch_b:
                    return []
                if mode.start_a == mode.start_b:
                    return []  # degenerate pair: no transform defined
                xf = similarity_from_touch_pairs(
                    mode.start_a,
                    mode.start_b,
                    self.touches[mode.touch_a].last,
                    self.touches[mode.touch_b].last,
                )
                obj = self.scene.get(mode.object_id)
                obj.center = xf.apply(mode.start_center)
                obj.rotation = mode.start_rotation + xf.theta
                obj.scale = mode.start_scale * xf.s
                return [ManipulationUpdated(mode.object_id, xf)]
            if isinstance(mode, RubberBand):
                if tid != mode.touch_id:
                    return []
                return [RubberBandChanged(_norm_rect(mode.anchor, event.pos))]
            # AmbiguousPair: movement beyond slop on either touch means
            # a manipulation, not a tap-drag.
            if tid != mode.source_touch_id and tid != mode.target_touch_id:
                return []
            if ts.beyond_slop:
                self._enter_manipulation(
                    mode.source_touch_id, mode.target_touch_id, mode.object_id
                )
                return [GhostResolved("manipulation")]
            return []

        td = self.td
        if isinstance(td, SourceHeld) and tid == td.source_touch_id:
            if not ts.beyond_slop:
                return []
            # Escalate to a traditional drag: the object snaps under the
            # finger and follows it from now on.
            new_center = (event.x + td.grab_offset[0], event.y + td.grab_offset[1])
            obj = self.scene.get(td.object_id)
            delta = (new_center[0] - obj.center[0], new_center[1] - obj.center[1])
            obj.center = new_center
            if td.object_id in self.scene.selection:
                self._translate_selection_with(td.object_id, delta)
            self.mode = TradDragging(tid, td.object_id, td.grab_offset)
            self.td = IDLE
            return [DragStarted(td.object_id), DragMoved(td.object_id, new_center)]
        if (
            isinstance(td, SelectAnchor)
            and tid == td.anchor_touch_id
            and not td.vertices
            and ts.beyond_slop
        ):
            self.mode = RubberBand(tid, td.anchor)
            self.td = IDLE
            return [RubberBandChanged(_norm_rect(td.anchor, event.pos))]
        if isinstance(td, Preview) and tid == td.target_touch_id:
            return self._delegate(event)
        if isinstance(td, SelectVertexHeld) and tid == td.active_touch_id:
            return self._delegate(event)
        return []

    def _on_up(self, event: TouchEvent, ts: TouchState) -> list:
        mode = self.mode
        tid = event.touch_id
        if mode is not None:
            if isinstance(mode, TradDragging):
                if tid != mode.touch_id:
                    return []
                self.mode = None
                return [Dropped(mode.object_id, self.scene.get(mode.object_id).center)]
            if isinstance(mode, Manipulating):
                if tid == mode.touch_a or tid == mode.touch_b:
                    self.mode = None  # remaining pair touch goes inert
                return []
            if isinstance(mode, RubberBand):
                if tid != mode.touch_id:
                    return []
                self.mode = None
                rect = _norm_rect(mode.anchor, ts.last)
                region = RectRegion((rect[0], rect[1]), (rect[2], rect[3]))
                ids = objects_in_region(self.scene, region)
                apply_mutations(self.scene, [SetSelection(frozenset(ids))])
                return [SelectionChanged(tuple(sorted(ids)))]
            # AmbiguousPair: a lift while both touches are stationary
            # resolves the pair as a tap-drag.
            if tid == mode.source_touch_id:
                self.mode = None
                target_last = self.touches[mode.target_touch_id].last
                new_state, events, mutations = machine.commit_preview(
                    mode.object_id,
                    mode.origin,
                    mode.grab_offset,
                    target_last,
                    mode.target_touch_id,
                    self.scene,
                    already_previewed=False,
                )
                self.td = new_state
                apply_mutations(self.scene, mutations)
                return [GhostResolved("tapdrag")] + events
            if tid == mode.target_touch_id:
                # Cancelled tap-drag: back to the held source, ready to
                # retarget. The object never moved while ambiguous.
                self.mode = None
                self.td = SourceHeld(
                    mode.source_touch_id, mode.object_id, mode.origin, mode.grab_offset
                )
                return [GhostResolved("tapdrag"), Reverted(mode.object_id, mode.origin)]
            return []
        return self._delegate(event)


def _norm_rect(a: Point, b: Point) -> tuple[float, float, float, float]:
    return (min(a[0], b[0]), min(a[1], b[1]), max(a[0], b[0]), max(a[1], b[1]))


def process_event(session: RecognizerSession, event: TouchEvent) -> list:
    """Module-level alias of :meth:`RecognizerSession.process_event`."""
    return session.process_event(event)
