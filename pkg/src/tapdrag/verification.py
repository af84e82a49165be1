"""Independent certification of the recognizer.

Three layers of redundancy:

* :func:`oracle_final_scene` re-derives the final scene of a down/up
  stream straight from the interaction rules, sharing no code with the
  state machine or the integrator;
* :func:`enumerate_and_check` exhaustively generates every well-formed
  down/up interleaving over a small fixed scene and diffs recognizer
  against oracle;
* :func:`fuzz` runs randomized streams (moves included, both policies)
  under per-event invariant checks, with greedy reproducer
  minimization, and :func:`differential_subslop` cross-checks the two
  policies on streams whose touches never leave the slop radius.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .core import (
    EngineConfig,
    Phase,
    Point,
    Policy,
    StackingRule,
    TouchEvent,
)
from .scene import Circle, Scene, SceneObject, serialize_scene
from .integrator import Manipulating, RecognizerSession, TradDragging
from .machine import Idle, Preview
from .logfmt import event_line


class UnsupportedStream(ValueError):
    """The oracle only interprets down/up streams over circle scenes
    under the immediate-preview policy."""


# --- Fixed micro scene ----------------------------------------------------

MICRO_CONFIG = EngineConfig(display_width=600.0, display_height=300.0)

_MICRO_OBJECTS = (
    (1, (200.0, 100.0)),
    (2, (300.0, 200.0)),
    (3, (400.0, 100.0)),
)

# 3x3 grid of background points giving every object a neighbour on each
# side; none lies inside any object.
MICRO_PALETTE: tuple[Point, ...] = (
    (100.0, 50.0),
    (300.0, 50.0),
    (500.0, 50.0),
    (100.0, 150.0),
    (300.0, 150.0),
    (500.0, 150.0),
    (100.0, 250.0),
    (300.0, 250.0),
    (500.0, 250.0),
)

MICRO_RADIUS = 17.5


def micro_scene() -> Scene:
    """Three-circle scene used by enumeration and fuzzing."""
    return Scene(
        SceneObject(id=oid, center=c, shape=Circle(MICRO_RADIUS), z=oid)
        for oid, c in _MICRO_OBJECTS
    )


def micro_positions() -> list[Point]:
    return [c for _, c in _MICRO_OBJECTS] + list(MICRO_PALETTE)


# --- Independent oracle ----------------------------------------------------


def _oracle_hit(centers, objects, p: Point) -> int | None:
    best = None
    best_key = None
    for oid, (z, radius, draggable) in objects.items():
        if not draggable:
            continue
        c = centers[oid]
        dx = p[0] - c[0]
        dy = p[1] - c[1]
        if dx * dx + dy * dy <= radius * radius:
            key = (z, oid)
            if best_key is None or key > best_key:
                best, best_key = oid, key
    return best


def _oracle_on_segment(a: Point, b: Point, p: Point) -> bool:
    if (b[0] - a[0]) * (p[1] - a[1]) != (b[1] - a[1]) * (p[0] - a[0]):
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(
        a[1], b[1]
    )


def _oracle_in_polygon(vertices, p: Point) -> bool:
    # Winding number, boundary-inclusive. Agrees with the engine's
    # even-odd test on the simple polygons reachable here; implemented
    # separately on purpose.
    n = len(vertices)
    winding = 0
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        if _oracle_on_segment(a, b, p):
            return True
        if a[1] <= p[1]:
            if b[1] > p[1]:
                if _is_left(a, b, p) > 0:
                    winding += 1
        else:
            if b[1] <= p[1]:
                if _is_left(a, b, p) < 0:
                    winding -= 1
    return winding != 0


def _is_left(a: Point, b: Point, p: Point) -> float:
    return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])


def _oracle_region_ids(centers, objects, anchor: Point, vertices) -> set[int]:
    out = set()
    if len(vertices) == 1:
        xlo, xhi = sorted((anchor[0], vertices[0][0]))
        ylo, yhi = sorted((anchor[1], vertices[0][1]))
        for oid, (z, radius, draggable) in objects.items():
            if not draggable:
                continue
            c = centers[oid]
            if xlo <= c[0] <= xhi and ylo <= c[1] <= yhi:
                out.add(oid)
    else:
        poly = [anchor] + list(vertices)
        for oid, (z, radius, draggable) in objects.items():
            if draggable and _oracle_in_polygon(poly, centers[oid]):
                out.add(oid)
    return out


def oracle_final_scene(events, scene0: Scene, config: EngineConfig) -> Scene:
    """Final scene of a down/up stream, derived declaratively.

    A held first touch on an object arms a move; the object relocates
    (to the second touch plus the grab offset) exactly when the first
    touch lifts while a second is held, and the whole selection follows
    when the object is selected. A held first touch on the background
    collects tap vertices instead and completes a selection when it
    lifts. Everything else is bookkeeping about which touches are
    admitted to the pattern.
    """
    if config.policy is not Policy.IMMEDIATE:
        raise UnsupportedStream("oracle only covers the immediate-preview policy")
    allow_object_target = config.stacking_rule is StackingRule.TAPDRAG_ON_OBJECT_TARGET

    centers: dict[int, Point] = {}
    objects: dict[int, tuple[int, float, bool]] = {}
    for obj in scene0:
        if not isinstance(obj.shape, Circle):
            raise UnsupportedStream("oracle only covers circle scenes")
        centers[obj.id] = obj.center
        objects[obj.id] = (obj.z, obj.shape.radius * obj.scale, obj.draggable)
    selection = set(scene0.selection)

    ctx = None  # ("source", touch, oid, origin, down) | ("anchor", touch, pos, [verts]) |
    # ("manip", a, b) | ("residue", touch)
    second = None  # ("target", touch, pos) | ("vertex", touch)
    ignored: set[int] = set()

    for ev in events:
        if ev.phase is Phase.MOVE:
            raise UnsupportedStream("oracle only covers down/up streams")
        tid = ev.touch_id
        if ev.phase is Phase.DOWN:
            pos = ev.pos
            if ctx is None:
                oid = _oracle_hit(centers, objects, pos)
                if oid is not None:
                    ctx = ("source", tid, oid, centers[oid], pos)
                else:
                    ctx = ("anchor", tid, pos, [])
                continue
            kind = ctx[0]
            if kind in ("manip", "residue") or second is not None:
                ignored.add(tid)
                continue
            if kind == "source":
                oid = _oracle_hit(centers, objects, pos)
                if oid == ctx[2]:
                    ctx = ("manip", ctx[1], tid)
                elif oid is not None and not allow_object_target:
                    ignored.add(tid)
                else:
                    second = ("target", tid, pos)
            else:  # anchor
                ctx[3].append(pos)
                second = ("vertex", tid)
            continue

        # UP
        if tid in ignored:
            ignored.discard(tid)
            continue
        if ctx is None:
            continue
        kind = ctx[0]
        if kind == "manip":
            if tid == ctx[1] or tid == ctx[2]:
                other = ctx[2] if tid == ctx[1] else ctx[1]
                ignored.add(other)
                ctx = None
            continue
        if kind == "residue":
            if tid == ctx[1]:
                ctx = None
            continue
        if second is not None and second[1] == tid:
            second = None  # target cancel / vertex committed; nothing moves
            continue
        if tid != ctx[1]:
            continue
        if kind == "source":
            if second is not None:
                _, src_touch, oid, origin, down = ctx
                q = second[2]
                offset = (origin[0] - down[0], origin[1] - down[1])
                new_center = (q[0] + offset[0], q[1] + offset[1])
                delta = (new_center[0] - origin[0], new_center[1] - origin[1])
                centers[oid] = new_center
                if oid in selection:
                    for other in selection:
                        if other != oid:
                            c = centers[other]
                            centers[other] = (c[0] + delta[0], c[1] + delta[1])
                ctx = ("residue", second[1])
                second = None
            else:
                ctx = None  # abort: never moved
        else:  # anchor lift completes the selection
            verts = ctx[3]
            if not verts:
                selection = set()
            else:
                selection = _oracle_region_ids(centers, objects, ctx[2], verts)
            if second is not None:
                ctx = ("residue", second[1])
                second = None
            else:
                ctx = None

    out = scene0.clone()
    for oid, c in centers.items():
        out.get(oid).center = c
    out.set_selection(selection)
    return out


def relabel_stream(events, mapping) -> list[TouchEvent]:
    """Consistently rename touch ids; used for metamorphic checks."""
    return [TouchEvent(e.t, mapping[e.touch_id], e.phase, e.x, e.y) for e in events]


# --- Exhaustive enumeration -------------------------------------------------


def enumerate_streams(max_events: int, positions):
    """Yield every complete well-formed down/up interleaving with at
    most ``max_events`` events, down positions drawn from ``positions``,
    touch ids assigned in order of appearance."""
    stream: list[tuple[Phase, int, Point]] = []

    def rec(open_order: list[int], open_pos: dict[int, Point], next_id: int, remaining: int):
        if not open_order and stream:
            yield [
                TouchEvent(float(10 * i), tid, phase, pos[0], pos[1])
                for i, (phase, tid, pos) in enumerate(stream)
            ]
        if remaining == 0:
            return
        if len(open_order) + 1 <= remaining - 1:
            for pos in positions:
                stream.append((Phase.DOWN, next_id, pos))
                open_pos[next_id] = pos
                yield from rec(open_order + [next_id], open_pos, next_id + 1, remaining - 1)
                del open_pos[next_id]
                stream.pop()
        for tid in open_order:
            stream.append((Phase.UP, tid, open_pos[tid]))
            yield from rec([t for t in open_order if t != tid], open_pos, next_id, remaining - 1)
            stream.pop()

    yield from rec([], {}, 1, max_events)


def _scene_signature(scene: Scene):
    return (
        tuple(
            (o.id, o.center, round(o.rotation, 12), round(o.scale, 12))
            for o in sorted(scene, key=lambda o: o.id)
        ),
        frozenset(scene.selection),
    )


@dataclass
class Finding:
    stream_index: int
    kind: str
    detail: str
    events: tuple[TouchEvent, ...] = ()


@dataclass
class FuzzReport:
    streams_run: int = 0
    violations: list[Finding] = field(default_factory=list)
    mismatches: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.mismatches

    def to_text(self) -> str:
        lines = [
            f"streams_run {self.streams_run}",
            f"violations {len(self.violations)}",
            f"oracle_mismatches {len(self.mismatches)}",
        ]
        for tag, findings in (("violation", self.violations), ("mismatch", self.mismatches)):
            for f in findings:
                lines.append(f"{tag} stream={f.stream_index} kind={f.kind} {f.detail}")
        return "\n".join(lines) + "\n"


_FINDING_CAP = 25


def enumerate_and_check(
    max_events: int,
    scene: Scene | None = None,
    config: EngineConfig | None = None,
    positions=None,
) -> FuzzReport:
    """Run recognizer and oracle over every down/up interleaving of at
    most ``max_events`` events and report disagreements. The stream
    count in the report doubles as a regression value."""
    if max_events > 8:
        raise ValueError("enumeration beyond 8 events is combinatorially unreasonable")
    base = scene if scene is not None else micro_scene()
    cfg = config if config is not None else MICRO_CONFIG
    pos = positions if positions is not None else micro_positions()
    report = FuzzReport()
    for idx, events in enumerate(enumerate_streams(max_events, pos)):
        report.streams_run += 1
        session = RecognizerSession(base.clone(), cfg)
        for ev in events:
            session.process_event(ev)
        expected = oracle_final_scene(events, base, cfg)
        if _scene_signature(session.scene) != _scene_signature(expected):
            if len(report.mismatches) < _FINDING_CAP:
                report.mismatches.append(
                    Finding(
                        idx,
                        "oracle_mismatch",
                        f"recognizer={_scene_signature(session.scene)} "
                        f"oracle={_scene_signature(expected)}",
                        tuple(events),
                    )
                )
    return report


# --- Invariant checking -----------------------------------------------------

_POSE_EVENTS = {
    "PREVIEW_MOVED",
    "COMMITTED",
    "REVERTED",
    "DRAG_STARTED",
    "DRAG_MOVED",
    "MANIPULATION_UPDATED",
}


class InvariantViolation(Exception):
    def __init__(self, kind: str, detail: str):
        super().__init__(f"{kind}: {detail}")
        self.kind = kind
        self.detail = detail


def _poses(scene: Scene):
    return {o.id: (o.center, o.rotation, o.scale) for o in scene}


def run_checked(events, scene0: Scene, config: EngineConfig) -> list[str]:
    """Feed a stream through a session, asserting the machine and
    integrator invariants after every event. Returns the gesture log."""
    session = RecognizerSession(scene0.clone(), config)
    initial = _poses(session.scene)
    prev_poses = _poses(session.scene)
    down: set[int] = set()
    slop_seen: dict[int, bool] = {}
    ghost_open = False
    log: list[str] = []
    names_seen: list[str] = []

    for ev in events:
        emitted = session.process_event(ev)
        names = [e.NAME for e in emitted]
        names_seen.extend(names)
        log.extend(event_line(ev.t, e) for e in emitted)

        if ev.phase is Phase.DOWN:
            down.add(ev.touch_id)
            slop_seen[ev.touch_id] = False
        elif ev.phase is Phase.UP:
            down.discard(ev.touch_id)

        # registry mirrors the currently-down touches
        if set(session.touches) != down:
            raise InvariantViolation(
                "registry", f"registry {sorted(session.touches)} vs down {sorted(down)}"
            )
        # slop flags never reset while a touch is down
        for tid, ts in session.touches.items():
            if slop_seen.get(tid) and not ts.beyond_slop:
                raise InvariantViolation("slop_monotonic", f"touch {tid} reset beyond_slop")
            slop_seen[tid] = ts.beyond_slop

        # mutual exclusion: an active mode implies an idle machine
        if session.mode is not None and not isinstance(session.td, Idle):
            raise InvariantViolation(
                "mutual_exclusion", f"mode {type(session.mode).__name__} with td {session.td}"
            )

        # position safety: pose changes require a pose event in the same step
        poses = _poses(session.scene)
        if poses != prev_poses and not (_POSE_EVENTS & set(names)):
            raise InvariantViolation("position_safety", f"silent pose change on {ev}")
        prev_poses = poses

        # selection mirror
        flagged = {o.id for o in session.scene if o.selected}
        if flagged != session.scene.selection:
            raise InvariantViolation("selection_mirror", "selection set and flags diverged")

        # drag exactness
        mode = session.mode
        if isinstance(mode, TradDragging):
            obj = session.scene.get(mode.object_id)
            t = session.touches[mode.touch_id]
            want = (t.last[0] + mode.grab_offset[0], t.last[1] + mode.grab_offset[1])
            if obj.center != want:
                raise InvariantViolation("drag_exact", f"center {obj.center} != {want}")
        # preview tracking
        td = session.td
        if isinstance(td, Preview):
            t = session.touches[td.target_touch_id]
            if td.target != t.last:
                raise InvariantViolation("preview_track", "preview target out of date")
            obj = session.scene.get(td.object_id)
            want = (t.last[0] + td.grab_offset[0], t.last[1] + td.grab_offset[1])
            if obj.center != want:
                raise InvariantViolation("preview_track", f"center {obj.center} != {want}")
        # manipulation anchoring
        if isinstance(mode, Manipulating) and mode.start_a != mode.start_b:
            ta = session.touches[mode.touch_a]
            tb = session.touches[mode.touch_b]
            if ta.last == mode.start_a and tb.last == mode.start_b:
                obj = session.scene.get(mode.object_id)
                if (
                    abs(obj.center[0] - mode.start_center[0]) > 1e-6
                    or abs(obj.center[1] - mode.start_center[1]) > 1e-6
                    or abs(obj.rotation - mode.start_rotation) > 1e-6
                    or abs(obj.scale - mode.start_scale) > 1e-6
                ):
                    raise InvariantViolation("manip_anchor", "identity pair but pose drifted")
        # ghost bracketing
        for name in names:
            if name == "GHOST_SHOWN":
                if ghost_open:
                    raise InvariantViolation("ghost_bracket", "nested GHOST_SHOWN")
                ghost_open = True
            elif name == "GHOST_RESOLVED":
                if not ghost_open:
                    raise InvariantViolation("ghost_bracket", "GHOST_RESOLVED without shown")
                ghost_open = False

    if ghost_open:
        raise InvariantViolation("ghost_bracket", "GHOST_SHOWN never resolved")

    # commit/abort bracketing over the whole log
    open_source = False
    closed = False
    for name in names_seen:
        if name == "SOURCE_ACQUIRED":
            open_source = True
            closed = False
        elif name in ("COMMITTED", "ABORTED"):
            if not open_source or closed:
                raise InvariantViolation("commit_abort", f"unmatched {name}")
            closed = True
        elif name == "REVERTED":
            if not open_source or closed:
                raise InvariantViolation("commit_abort", "REVERTED outside a held source")

    # cancel exactness: a fully-lifted stream that committed nothing and
    # never dragged or manipulated must leave every pose untouched
    if not down and not (
        {"COMMITTED", "DRAG_STARTED", "MANIPULATION_UPDATED"} & set(names_seen)
    ):
        if _poses(session.scene) != initial:
            raise InvariantViolation("cancel_exact", "poses changed without a committing path")
    return log


# --- Random stream generation ------------------------------------------------


def random_stream(
    rng: random.Random,
    config: EngineConfig,
    positions,
    *,
    max_ops: int = 22,
    max_touches: int = 4,
    sub_slop_only: bool = False,
) -> list[TouchEvent]:
    """One random well-formed stream. With ``sub_slop_only`` every move
    stays strictly inside the slop radius of its touch's down point."""
    w = config.display_width
    h = config.display_height
    slop = config.slop_radius

    def clamp(p: Point) -> Point:
        return (min(max(p[0], 0.0), w), min(max(p[1], 0.0), h))

    def down_point() -> Point:
        if positions and rng.random() < 0.7:
            return positions[rng.randrange(len(positions))]
        return (round(rng.uniform(0, w), 3), round(rng.uniform(0, h), 3))

    events: list[TouchEvent] = []
    open_pos: dict[int, Point] = {}
    open_down: dict[int, Point] = {}
    t = 0.0
    next_id = 1
    n_ops = rng.randrange(2, max_ops + 1)

    def emit(phase: Phase, tid: int, pos: Point):
        nonlocal t
        events.append(TouchEvent(t, tid, phase, pos[0], pos[1]))
        t += rng.randrange(1, 30)

    while len(events) < n_ops or open_pos:
        if len(events) >= n_ops:
            tid = rng.choice(sorted(open_pos))
            emit(Phase.UP, tid, open_pos.pop(tid))
            open_down.pop(tid)
            continue
        r = rng.random()
        if not open_pos or (r < 0.35 and len(open_pos) < max_touches):
            pos = down_point()
            open_pos[next_id] = pos
            open_down[next_id] = pos
            emit(Phase.DOWN, next_id, pos)
            next_id += 1
        elif r < 0.75:
            tid = rng.choice(sorted(open_pos))
            base = open_down[tid]
            if sub_slop_only:
                radius = rng.uniform(0.0, 0.7 * slop)
            elif rng.random() < 0.2:
                radius = 0.0  # return exactly to the down point
            else:
                radius = rng.uniform(0.0, 60.0)
            angle = rng.uniform(0.0, 2.0 * math.pi)
            pos = clamp((base[0] + radius * math.cos(angle), base[1] + radius * math.sin(angle)))
            open_pos[tid] = pos
            emit(Phase.MOVE, tid, pos)
        else:
            tid = rng.choice(sorted(open_pos))
            emit(Phase.UP, tid, open_pos.pop(tid))
            open_down.pop(tid)
    return events


def minimize_stream(events, still_fails) -> list[TouchEvent]:
    """Greedy reduction: drop whole touches, then single moves, while
    the failure predicate keeps holding."""
    events = list(events)
    changed = True
    while changed:
        changed = False
        for tid in sorted({e.touch_id for e in events}):
            cand = [e for e in events if e.touch_id != tid]
            if cand and still_fails(cand):
                events = cand
                changed = True
                break
        if changed:
            continue
        for i, e in enumerate(events):
            if e.phase is Phase.MOVE:
                cand = events[:i] + events[i + 1 :]
                if still_fails(cand):
                    events = cand
                    changed = True
                    break
    return events


def fuzz(
    seed: int,
    n_streams: int,
    config: EngineConfig | None = None,
    *,
    max_ops: int = 22,
) -> FuzzReport:
    """Randomized invariant checking over both policies and both
    stacking rules. Reproducible from the seed; violations carry
    minimized reproducers."""
    base_cfg = config if config is not None else MICRO_CONFIG
    scene0 = micro_scene()
    positions = micro_positions()
    report = FuzzReport()
    policies = (Policy.IMMEDIATE, Policy.GHOST)
    stackings = (StackingRule.TAPDRAG_ON_OBJECT_TARGET, StackingRule.REJECT_OBJECT_TARGET)
    for idx in range(n_streams):
        rng = random.Random(f"{seed}:{idx}")
        cfg = EngineConfig(
            display_width=base_cfg.display_width,
            display_height=base_cfg.display_height,
            dpi=base_cfg.dpi,
            slop_radius=base_cfg.slop_radius,
            policy=policies[idx % 2],
            stacking_rule=stackings[(idx // 2) % 2],
            target_tolerance_radius=base_cfg.target_tolerance_radius,
        )
        events = random_stream(rng, cfg, positions, max_ops=max_ops)
        report.streams_run += 1
        try:
            run_checked(events, scene0, cfg)
        except InvariantViolation as exc:

            def still_fails(cand, _kind=exc.kind):
                try:
                    run_checked(cand, scene0, cfg)
                except InvariantViolation as e2:
                    return e2.kind == _kind
                except Exception:
                    return False
                return False

            reduced = minimize_stream(events, still_fails)
            if len(report.violations) < _FINDING_CAP:
                report.violations.append(Finding(idx, exc.kind, exc.detail, tuple(reduced)))
    return report


def _strip_policy_noise(log: list[str]) -> list[str]:
    """Drop the lines that legitimately differ between policies: ghost
    bookkeeping and the immediate preview tracking."""
    drop = ("GHOST_SHOWN", "GHOST_RESOLVED", "PREVIEW_MOVED")
    return [ln for ln in log if ln.split(" ", 2)[1] not in drop]


def differential_subslop(seed: int, n_streams: int, config: EngineConfig | None = None) -> FuzzReport:
    """On streams whose touches never move beyond slop the two policies
    must agree: identical final scenes, and identical logs once ghost
    and preview bookkeeping lines are removed."""
    base_cfg = config if config is not None else MICRO_CONFIG
    scene0 = micro_scene()
    positions = micro_positions()
    report = FuzzReport()
    for idx in range(n_streams):
        rng = random.Random(f"diff:{seed}:{idx}")
        events = random_stream(rng, base_cfg, positions, sub_slop_only=True)
        report.streams_run += 1
        finals = {}
        logs = {}
        for policy in (Policy.IMMEDIATE, Policy.GHOST):
            cfg = EngineConfig(
                display_width=base_cfg.display_width,
                display_height=base_cfg.display_height,
                dpi=base_cfg.dpi,
                slop_radius=base_cfg.slop_radius,
                policy=policy,
                stacking_rule=base_cfg.stacking_rule,
                target_tolerance_radius=base_cfg.target_tolerance_radius,
            )
            session = RecognizerSession(scene0.clone(), cfg)
            log: list[str] = []
            for ev in events:
                log.extend(event_line(ev.t, e) for e in session.process_event(ev))
            finals[policy] = serialize_scene(session.scene)
            logs[policy] = _strip_policy_noise(log)
        if finals[Policy.IMMEDIATE] != finals[Policy.GHOST]:
            if len(report.mismatches) < _FINDING_CAP:
                report.mismatches.append(
                    Finding(idx, "policy_scene_divergence", "final scenes differ", tuple(events))
                )
        elif logs[Policy.IMMEDIATE] != logs[Policy.GHOST]:
            if len(report.mismatches) < _FINDING_CAP:
                report.mismatches.append(
                    Finding(idx, "policy_log_divergence", "stripped logs differ", tuple(events))
                )
    return report
