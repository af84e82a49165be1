"""Pure tap-drag state machine.

Recognition here is driven purely by touch ordering: hold a finger on an
object (source), tap a destination with a second finger (target) and
the object previews there instantly; lift source then target to commit,
lift the target first to cancel and optionally retarget, lift the
source with no target held to abort. A first touch on the background
anchors a selection instead: each subsequent tap adds a lasso vertex
(one vertex means a corner-to-corner box), and lifting the anchor
completes the selection.

The machine knows nothing about slop thresholds, traditional drags or
pinch/rotate; the integrator routes events and pre-classifies touch
positions before delegating here. There are deliberately no timing
rules anywhere: only ordering matters.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import EngineConfig, Phase, Point, ProtocolViolation, TouchEvent
from .logfmt import fmt_ids, fmt_point
from .scene import PolygonRegion, RectRegion, Region, Scene, objects_in_region

# --- States -----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Idle:
    pass


@dataclass(frozen=True, slots=True)
class SourceHeld:
    source_touch_id: int
    object_id: int
    origin: Point
    grab_offset: Point  # object center minus touch position at grab


@dataclass(frozen=True, slots=True)
class Preview:
    source_touch_id: int
    target_touch_id: int
    object_id: int
    origin: Point
    grab_offset: Point
    target: Point  # current target touch position


@dataclass(frozen=True, slots=True)
class TargetResidue:
    """A commit happened; the remaining target touch is inert until it
    lifts. New touches are not admitted while it lingers."""

    target_touch_id: int


@dataclass(frozen=True, slots=True)
class SelectAnchor:
    anchor_touch_id: int
    anchor: Point
    vertices: tuple[Point, ...]


@dataclass(frozen=True, slots=True)
class SelectVertexHeld:
    anchor_touch_id: int
    anchor: Point
    vertices: tuple[Point, ...]  # last entry tracks the held touch
    active_touch_id: int


TapDragState = Idle | SourceHeld | Preview | TargetResidue | SelectAnchor | SelectVertexHeld

IDLE = Idle()


# --- Gesture events ----------------------------------------------------


@dataclass(frozen=True, slots=True)
class SourceAcquired:
    NAME = "SOURCE_ACQUIRED"
    object_id: int

    def log_items(self):
        return [("object", str(self.object_id))]


@dataclass(frozen=True, slots=True)
class PreviewMoved:
    NAME = "PREVIEW_MOVED"
    object_id: int
    to: Point

    def log_items(self):
        return [("object", str(self.object_id)), ("to", fmt_point(self.to))]


@dataclass(frozen=True, slots=True)
class Committed:
    NAME = "COMMITTED"
    object_ids: tuple[int, ...]
    translation: Point

    def log_items(self):
        return [("ids", fmt_ids(self.object_ids)), ("translation", fmt_point(self.translation))]


@dataclass(frozen=True, slots=True)
class Reverted:
    NAME = "REVERTED"
    object_id: int
    to: Point

    def log_items(self):
        return [("object", str(self.object_id)), ("to", fmt_point(self.to))]


@dataclass(frozen=True, slots=True)
class Aborted:
    NAME = "ABORTED"
    object_id: int

    def log_items(self):
        return [("object", str(self.object_id))]


def _fmt_region(region: Region) -> str:
    if isinstance(region, RectRegion):
        return f"rect:{fmt_point(region.corner_a)},{fmt_point(region.corner_b)}"
    return "poly:" + ";".join(fmt_point(v) for v in region.vertices)


@dataclass(frozen=True, slots=True)
class SelectionPreview:
    NAME = "SELECTION_PREVIEW"
    region: Region

    def log_items(self):
        return [("region", _fmt_region(self.region))]


@dataclass(frozen=True, slots=True)
class SelectionChanged:
    NAME = "SELECTION_CHANGED"
    object_ids: tuple[int, ...]

    def log_items(self):
        return [("ids", fmt_ids(self.object_ids))]


@dataclass(frozen=True, slots=True)
class BackgroundTap:
    NAME = "BACKGROUND_TAP"

    def log_items(self):
        return []


# --- Scene mutations ----------------------------------------------------
# td_step never touches the scene itself; it returns mutations that the
# caller applies atomically, all-or-nothing per event.


@dataclass(frozen=True, slots=True)
class MoveObject:
    object_id: int
    to: Point


@dataclass(frozen=True, slots=True)
class TranslateObjects:
    object_ids: tuple[int, ...]
    delta: Point


@dataclass(frozen=True, slots=True)
class SetSelection:
    object_ids: frozenset[int]


@dataclass(frozen=True, slots=True)
class SetPose:
    object_id: int
    center: Point
    rotation: float
    scale: float


Mutation = MoveObject | TranslateObjects | SetSelection | SetPose


def apply_mutation(scene: Scene, m: Mutation) -> None:
    if isinstance(m, MoveObject):
        scene.get(m.object_id).center = m.to
    elif isinstance(m, TranslateObjects):
        dx, dy = m.delta
        for oid in m.object_ids:
            obj = scene.get(oid)
            cx, cy = obj.center
            obj.center = (cx + dx, cy + dy)
    elif isinstance(m, SetSelection):
        scene.set_selection(m.object_ids)
    else:
        obj = scene.get(m.object_id)
        obj.center = m.center
        obj.rotation = m.rotation
        obj.scale = m.scale


def apply_mutations(scene: Scene, mutations) -> None:
    for m in mutations:
        apply_mutation(scene, m)


# --- Classification ------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ObjectHit:
    """Down-event classification for a draggable object; ``None`` stands
    for the background."""

    object_id: int
    center: Point


StepResult = tuple[TapDragState, list, list]


def commit_preview(
    object_id: int,
    origin: Point,
    grab_offset: Point,
    target: Point,
    target_touch_id: int,
    scene: Scene,
    already_previewed: bool,
) -> StepResult:
    """Shared commit path: the held object lands at the previewed
    position; if it belongs to a non-empty selection the whole selection
    translates with it."""
    center = (target[0] + grab_offset[0], target[1] + grab_offset[1])
    delta = (center[0] - origin[0], center[1] - origin[1])
    mutations: list = []
    if not already_previewed:
        mutations.append(MoveObject(object_id, center))
    if object_id in scene.selection:
        ids = tuple(sorted(scene.selection))
        others = tuple(i for i in ids if i != object_id)
        if others:
            mutations.append(TranslateObjects(others, delta))
    else:
        ids = (object_id,)
    return TargetResidue(target_touch_id), [Committed(ids, delta)], mutations


def _finalize_selection(anchor: Point, vertices: tuple[Point, ...], scene: Scene) -> tuple[list, list]:
    if not vertices:
        return [BackgroundTap()], [SetSelection(frozenset())]
    if len(vertices) == 1:
        region: Region = RectRegion(anchor, vertices[0])
    else:
        region = PolygonRegion((anchor,) + vertices)
    ids = objects_in_region(scene, region)
    return [SelectionChanged(tuple(sorted(ids)))], [SetSelection(frozenset(ids))]


def _selection_region(anchor: Point, vertices: tuple[Point, ...]) -> Region:
    if len(vertices) == 1:
        return RectRegion(anchor, vertices[0])
    return PolygonRegion((anchor,) + vertices)


def td_step(
    state: TapDragState,
    event: TouchEvent,
    hit: ObjectHit | None,
    scene: Scene,
    config: EngineConfig,
) -> StepResult:
    """Advance the machine by one touch event.

    ``hit`` is the caller's hit-test classification of the event
    position and is only consulted for DOWN events. The scene is read
    but never written; returned mutations must be applied by the caller
    before the next step. Touches beyond the two tracked ones are
    ignored.
    """
    phase = event.phase
    tid = event.touch_id

    if isinstance(state, Idle):
        if phase is Phase.DOWN:
            if hit is not None:
                offset = (hit.center[0] - event.x, hit.center[1] - event.y)
                return (
                    SourceHeld(tid, hit.object_id, hit.center, offset),
                    [SourceAcquired(hit.object_id)],
                    [],
                )
            return SelectAnchor(tid, event.pos, ()), [], []
        return state, [], []

    if isinstance(state, SourceHeld):
        if phase is Phase.DOWN:
            if tid == state.source_touch_id:
                raise ProtocolViolation(f"touch {tid} already down as source")
            center = (event.x + state.grab_offset[0], event.y + state.grab_offset[1])
            new = Preview(
                state.source_touch_id,
                tid,
                state.object_id,
                state.origin,
                state.grab_offset,
                event.pos,
            )
            return new, [PreviewMoved(state.object_id, center)], [MoveObject(state.object_id, center)]
        if phase is Phase.UP and tid == state.source_touch_id:
            return IDLE, [Aborted(state.object_id)], []
        return state, [], []

    if isinstance(state, Preview):
        if phase is Phase.MOVE and tid == state.target_touch_id:
            center = (event.x + state.grab_offset[0], event.y + state.grab_offset[1])
            new = Preview(
                state.source_touch_id,
                state.target_touch_id,
                state.object_id,
                state.origin,
                state.grab_offset,
                event.pos,
            )
            return new, [PreviewMoved(state.object_id, center)], [MoveObject(state.object_id, center)]
        if phase is Phase.UP and tid == state.source_touch_id:
            return commit_preview(
                state.object_id,
                state.origin,
                state.grab_offset,
                state.target,
                state.target_touch_id,
                scene,
                already_previewed=True,
            )
        if phase is Phase.UP and tid == state.target_touch_id:
            back = SourceHeld(state.source_touch_id, state.object_id, state.origin, state.grab_offset)
            return back, [Reverted(state.object_id, state.origin)], [MoveObject(state.object_id, state.origin)]
        if phase is Phase.DOWN and tid in (state.source_touch_id, state.target_touch_id):
            raise ProtocolViolation(f"touch {tid} already tracked")
        return state, [], []

    if isinstance(state, TargetResidue):
        if phase is Phase.UP and tid == state.target_touch_id:
            return IDLE, [], []
        if phase is Phase.DOWN and tid == state.target_touch_id:
            raise ProtocolViolation(f"touch {tid} already tracked")
        return state, [], []

    if isinstance(state, SelectAnchor):
        if phase is Phase.DOWN:
            if tid == state.anchor_touch_id:
                raise ProtocolViolation(f"touch {tid} already down as anchor")
            vertices = state.vertices + (event.pos,)
            new = SelectVertexHeld(state.anchor_touch_id, state.anchor, vertices, tid)
            return new, [SelectionPreview(_selection_region(state.anchor, vertices))], []
        if phase is Phase.UP and tid == state.anchor_touch_id:
            events, mutations = _finalize_selection(state.anchor, state.vertices, scene)
            return IDLE, events, mutations
        return state, [], []

    # SelectVertexHeld
    if phase is Phase.MOVE and tid == state.active_touch_id:
        vertices = state.vertices[:-1] + (event.pos,)
        new = SelectVertexHeld(state.anchor_touch_id, state.anchor, vertices, tid)
        return new, [SelectionPreview(_selection_region(state.anchor, vertices))], []
    if phase is Phase.UP and tid == state.active_touch_id:
        return SelectAnchor(state.anchor_touch_id, state.anchor, state.vertices), [], []
    if phase is Phase.UP and tid == state.anchor_touch_id:
        # Anchor lifted while a vertex is still held: the selection
        # completes (commit ordering) and the held touch goes inert.
        events, mutations = _finalize_selection(state.anchor, state.vertices, scene)
        return TargetResidue(state.active_touch_id), events, mutations
    if phase is Phase.DOWN and tid in (state.anchor_touch_id, state.active_touch_id):
        raise ProtocolViolation(f"touch {tid} already tracked")
    return state, [], []
