import math

import pytest

from conftest import down, move, names, up
from tapdrag.core import EngineConfig, Policy, ProtocolViolation, StackingRule
from tapdrag.integrator import RecognizerSession
from tapdrag.scene import Circle, Scene, SceneObject


def circle(oid, cx, cy, r=17.5, **kw):
    return SceneObject(id=oid, center=(cx, cy), shape=Circle(r), **kw)


def fig8(**kw):
    return EngineConfig(policy=Policy.IMMEDIATE, **kw)


def ghost(**kw):
    return EngineConfig(policy=Policy.GHOST, **kw)


def run(session, events):
    log = []
    for ev in events:
        log.extend(session.process_event(ev))
    return log


class TestSameObjectManipulation:
    def test_two_touches_on_one_object_pinch(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        s.process_event(down(0, 1, 100, 100))
        assert s.process_event(down(10, 2, 110, 100)) == []
        events = s.process_event(move(20, 2, 120, 100))
        assert names(events) == ["MANIPULATION_UPDATED"]
        xf = events[0].xf
        assert xf.s == pytest.approx(2.0)
        assert xf.theta == pytest.approx(0.0)
        # anchored at the stationary touch: center stays put, scale doubles
        assert s.scene.get(1).center == pytest.approx((100, 100))
        assert s.scene.get(1).scale == pytest.approx(2.0)

    def test_no_tapdrag_events_emitted(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        log = run(
            s,
            [
                down(0, 1, 100, 100),
                down(10, 2, 110, 100),
                move(20, 2, 120, 100),
                up(30, 1, 100, 100),
                up(40, 2, 120, 100),
            ],
        )
        assert "PREVIEW_MOVED" not in names(log)
        assert "ABORTED" not in names(log)
        assert "COMMITTED" not in names(log)

    def test_rotation_about_pair(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        s.process_event(down(0, 1, 100, 100))
        s.process_event(down(10, 2, 110, 100))
        events = s.process_event(move(20, 2, 100, 110))
        assert events[0].xf.theta == pytest.approx(math.pi / 2)
        assert s.scene.get(1).rotation == pytest.approx(math.pi / 2)

    def test_returning_to_down_points_restores_pose(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        s.process_event(down(0, 1, 100, 100))
        s.process_event(down(10, 2, 110, 100))
        s.process_event(move(20, 2, 140, 160))
        s.process_event(move(30, 2, 110, 100))
        obj = s.scene.get(1)
        assert obj.center == pytest.approx((100, 100), abs=1e-6)
        assert obj.rotation == pytest.approx(0.0, abs=1e-6)
        assert obj.scale == pytest.approx(1.0, abs=1e-6)

    def test_remaining_touch_inert_after_manipulation(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        run(s, [down(0, 1, 100, 100), down(10, 2, 110, 100), up(20, 1, 100, 100)])
        assert s.process_event(move(30, 2, 200, 200)) == []
        assert s.process_event(up(40, 2, 200, 200)) == []


class TestImmediatePolicy:
    def test_commit_through_integrator(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        log = run(
            s,
            [
                down(0, 1, 100, 100),
                down(10, 2, 400, 300),
                up(20, 1, 100, 100),
                up(30, 2, 400, 300),
            ],
        )
        assert names(log) == ["SOURCE_ACQUIRED", "PREVIEW_MOVED", "COMMITTED"]
        assert s.scene.get(1).center == (400, 300)

    def test_target_move_keeps_tracking_beyond_slop(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        run(s, [down(0, 1, 100, 100), down(10, 2, 300, 100)])
        events = s.process_event(move(20, 2, 380, 100))  # 80 mm, far past slop
        assert names(events) == ["PREVIEW_MOVED"]
        assert s.scene.get(1).center == (380, 100)

    def test_different_object_target_with_stacking(self):
        scene = Scene([circle(1, 100, 100), circle(2, 300, 100)])
        s = RecognizerSession(scene, fig8(stacking_rule=StackingRule.TAPDRAG_ON_OBJECT_TARGET))
        log = run(
            s,
            [
                down(0, 1, 100, 100),
                down(10, 2, 305, 100),
                up(20, 1, 100, 100),
                up(30, 2, 305, 100),
            ],
        )
        assert "COMMITTED" in names(log)
        assert s.scene.get(1).center == (305, 100)
        assert s.scene.get(2).center == (300, 100)

    def test_different_object_target_rejected(self):
        scene = Scene([circle(1, 100, 100), circle(2, 300, 100)])
        s = RecognizerSession(scene, fig8(stacking_rule=StackingRule.REJECT_OBJECT_TARGET))
        log = run(
            s,
            [
                down(0, 1, 100, 100),
                down(10, 2, 305, 100),
                up(20, 2, 305, 100),
                up(30, 1, 100, 100),
            ],
        )
        assert names(log) == ["SOURCE_ACQUIRED", "ABORTED"]
        assert s.scene.get(1).center == (100, 100)


class TestTraditionalDrag:
    def test_drag_displaces_exactly(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        log = run(s, [down(0, 1, 100, 100), move(10, 1, 120, 100), up(20, 1, 120, 100)])
        assert names(log) == ["SOURCE_ACQUIRED", "DRAG_STARTED", "DRAG_MOVED", "DROPPED"]
        assert s.scene.get(1).center == (120, 100)

    def test_sub_slop_motion_is_a_tap(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        log = run(s, [down(0, 1, 100, 100), move(10, 1, 103, 100), up(20, 1, 103, 100)])
        assert names(log) == ["SOURCE_ACQUIRED", "ABORTED"]
        assert s.scene.get(1).center == (100, 100)

    def test_slop_boundary_is_strict(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        s.process_event(down(0, 1, 100, 100))
        assert s.process_event(move(10, 1, 105.0, 100)) == []  # exactly slop: stationary
        events = s.process_event(move(20, 1, 105.001, 100))
        assert "DRAG_STARTED" in names(events)

    def test_dragging_selected_object_moves_selection(self):
        scene = Scene([circle(1, 100, 100), circle(2, 200, 200)])
        scene.set_selection({1, 2})
        s = RecognizerSession(scene, fig8())
        run(s, [down(0, 1, 100, 100), move(10, 1, 150, 100), up(20, 1, 150, 100)])
        assert s.scene.get(1).center == (150, 100)
        assert s.scene.get(2).center == (250, 200)

    def test_dragging_unselected_object_moves_alone(self):
        scene = Scene([circle(1, 100, 100), circle(2, 200, 200)])
        scene.set_selection({2})
        s = RecognizerSession(scene, fig8())
        run(s, [down(0, 1, 100, 100), move(10, 1, 150, 100), up(20, 1, 150, 100)])
        assert s.scene.get(1).center == (150, 100)
        assert s.scene.get(2).center == (200, 200)

    def test_drag_grab_offset(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        run(s, [down(0, 1, 110, 105), move(10, 1, 130, 105)])
        assert s.scene.get(1).center == (120, 100)


class TestRubberBand:
    def test_band_selects_rectangle(self):
        scene = Scene([circle(1, 100, 100), circle(2, 300, 100)])
        s = RecognizerSession(scene, fig8())
        log = run(
            s,
            [down(0, 1, 50, 50), move(10, 1, 150, 150), up(20, 1, 150, 150)],
        )
        assert names(log) == ["RUBBER_BAND_CHANGED", "SELECTION_CHANGED"]
        assert s.scene.selection == {1}

    def test_band_rect_normalized(self):
        s = RecognizerSession(Scene(), fig8())
        s.process_event(down(0, 1, 150, 150))
        events = s.process_event(move(10, 1, 50, 50))
        assert events[0].rect == (50, 50, 150, 150)

    def test_stationary_background_touch_stays_in_selection_machine(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        log = run(s, [down(0, 1, 50, 50), move(10, 1, 52, 50), up(20, 1, 52, 50)])
        assert names(log) == ["BACKGROUND_TAP"]

    def test_band_does_not_escalate_mid_lasso(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        run(s, [down(0, 1, 50, 50), down(10, 2, 200, 50), up(20, 2, 200, 50)])
        assert s.process_event(move(30, 1, 90, 90)) == []  # anchor has a vertex: no band
        log = s.process_event(up(40, 1, 90, 90))
        assert names(log) == ["SELECTION_CHANGED"]


class TestGhostPolicy:
    def test_movement_resolves_to_manipulation(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), ghost())
        log = run(s, [down(0, 1, 100, 100), down(10, 2, 400, 300)])
        assert names(log) == ["SOURCE_ACQUIRED", "GHOST_SHOWN"]
        assert s.scene.get(1).center == (100, 100)  # ghost never moves the object
        events = s.process_event(move(20, 2, 410, 300))  # 10 mm > slop
        assert names(events) == ["GHOST_RESOLVED"]
        assert events[0].resolved_as == "manipulation"
        assert s.scene.get(1).center == (100, 100)
        events = s.process_event(move(30, 2, 420, 300))
        assert names(events) == ["MANIPULATION_UPDATED"]

    def test_stationary_source_lift_commits(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), ghost())
        log = run(
            s,
            [
                down(0, 1, 100, 100),
                down(10, 2, 400, 300),
                up(20, 1, 100, 100),
                up(30, 2, 400, 300),
            ],
        )
        assert names(log) == ["SOURCE_ACQUIRED", "GHOST_SHOWN", "GHOST_RESOLVED", "COMMITTED"]
        assert log[2].resolved_as == "tapdrag"
        assert s.scene.get(1).center == (400, 300)

    def test_target_lift_cancels_and_allows_retarget(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), ghost())
        log = run(
            s,
            [
                down(0, 1, 100, 100),
                down(10, 2, 400, 300),
                up(20, 2, 400, 300),
            ],
        )
        assert names(log) == ["SOURCE_ACQUIRED", "GHOST_SHOWN", "GHOST_RESOLVED", "REVERTED"]
        events = s.process_event(down(30, 3, 200, 200))
        assert names(events) == ["GHOST_SHOWN"]
        log = run(s, [up(40, 1, 100, 100), up(50, 3, 200, 200)])
        assert "COMMITTED" in names(log)
        assert s.scene.get(1).center == (200, 200)

    def test_ghost_position_includes_grab_offset(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), ghost())
        s.process_event(down(0, 1, 90, 95))
        events = s.process_event(down(10, 2, 300, 200))
        assert events[0].at == (310, 205)

    def test_commit_uses_last_target_position(self):
        # sub-slop wiggles keep the pair ambiguous but shift the drop point
        s = RecognizerSession(Scene([circle(1, 100, 100)]), ghost())
        run(s, [down(0, 1, 100, 100), down(10, 2, 300, 200), move(20, 2, 302, 200)])
        log = run(s, [up(30, 1, 100, 100)])
        assert names(log) == ["GHOST_RESOLVED", "COMMITTED"]
        assert s.scene.get(1).center == (302, 200)


class TestSessionHygiene:
    def test_registry_tracks_down_touches(self):
        s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
        s.process_event(down(0, 1, 100, 100))
        s.process_event(down(1, 2, 300, 100))
        assert set(s.touches) == {1, 2}
        s.process_event(up(2, 1, 100, 100))
        assert set(s.touches) == {2}

    def test_timestamp_regression_rejected(self):
        s = RecognizerSession(Scene(), fig8())
        s.process_event(down(10, 1, 50, 50))
        with pytest.raises(ProtocolViolation):
            s.process_event(move(5, 1, 60, 50))

    def test_unknown_touch_move_rejected(self):
        s = RecognizerSession(Scene(), fig8())
        with pytest.raises(ProtocolViolation):
            s.process_event(move(0, 9, 60, 50))

    def test_determinism_log_and_scene(self):
        events = [
            down(0, 1, 100, 100),
            down(5, 2, 300, 100),
            move(8, 2, 320, 110),
            up(12, 1, 100, 100),
            up(15, 2, 320, 110),
        ]

        def once():
            from tapdrag.logfmt import event_line

            s = RecognizerSession(Scene([circle(1, 100, 100)]), fig8())
            lines = []
            for ev in events:
                lines += [event_line(ev.t, g) for g in s.process_event(ev)]
            from tapdrag.scene import serialize_scene

            return lines, serialize_scene(s.scene)

        assert once() == once()
