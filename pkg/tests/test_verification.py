import random

import pytest

from conftest import down, move, up
from tapdrag.core import EngineConfig, Phase, Policy
from tapdrag.verification import (
    MICRO_CONFIG,
    MICRO_PALETTE,
    UnsupportedStream,
    differential_subslop,
    enumerate_and_check,
    enumerate_streams,
    fuzz,
    micro_positions,
    micro_scene,
    minimize_stream,
    oracle_final_scene,
    random_stream,
    relabel_stream,
    run_checked,
)


class TestMicroScene:
    def test_palette_outside_all_objects(self):
        scene = micro_scene()
        for p in MICRO_PALETTE:
            for obj in scene:
                dx = p[0] - obj.center[0]
                dy = p[1] - obj.center[1]
                assert dx * dx + dy * dy > obj.shape.radius**2

    def test_objects_do_not_overlap(self):
        objs = list(micro_scene())
        for i, a in enumerate(objs):
            for b in objs[i + 1 :]:
                dx = a.center[0] - b.center[0]
                dy = a.center[1] - b.center[1]
                assert (dx * dx + dy * dy) ** 0.5 > a.shape.radius + b.shape.radius

    def test_palette_surrounds_each_object(self):
        for obj in micro_scene():
            cx, cy = obj.center
            assert any(p[0] < cx for p in MICRO_PALETTE)
            assert any(p[0] > cx for p in MICRO_PALETTE)
            assert any(p[1] < cy for p in MICRO_PALETTE)
            assert any(p[1] > cy for p in MICRO_PALETTE)

    def test_palette_in_bounds(self):
        for p in MICRO_PALETTE:
            assert MICRO_CONFIG.contains(*p)


class TestOracle:
    def scene(self):
        return micro_scene()

    def test_commit_sequence(self):
        events = [
            down(0, 1, 200, 100),
            down(10, 2, 500, 250),
            up(20, 1, 200, 100),
            up(30, 2, 500, 250),
        ]
        out = oracle_final_scene(events, self.scene(), MICRO_CONFIG)
        assert out.get(1).center == (500, 250)

    def test_cancel_and_abort_sequence(self):
        events = [
            down(0, 1, 200, 100),
            down(10, 2, 500, 250),
            up(20, 2, 500, 250),
            up(30, 1, 200, 100),
        ]
        out = oracle_final_scene(events, self.scene(), MICRO_CONFIG)
        assert out.get(1).center == (200, 100)

    def test_background_only_stream_keeps_positions(self):
        events = [down(0, 1, 100, 50), up(10, 1, 100, 50)]
        out = oracle_final_scene(events, self.scene(), MICRO_CONFIG)
        for obj in micro_scene():
            assert out.get(obj.id).center == obj.center
        assert out.selection == set()

    def test_moves_unsupported(self):
        with pytest.raises(UnsupportedStream):
            oracle_final_scene([down(0, 1, 1, 1), move(1, 1, 2, 2)], self.scene(), MICRO_CONFIG)

    def test_ghost_policy_unsupported(self):
        cfg = EngineConfig(display_width=600, display_height=300, policy=Policy.GHOST)
        with pytest.raises(UnsupportedStream):
            oracle_final_scene([], self.scene(), cfg)

    def test_relabeling_touch_ids_is_neutral(self):
        rng = random.Random(5)
        for _ in range(100):
            events = []
            # random down/up-only stream over the micro positions
            open_ids = []
            next_id = 1
            t = 0
            positions = micro_positions()
            for _ in range(rng.randrange(2, 9)):
                if open_ids and rng.random() < 0.5:
                    tid = rng.choice(open_ids)
                    open_ids.remove(tid)
                    events.append(up(t, tid, 0, 0))
                else:
                    p = positions[rng.randrange(len(positions))]
                    events.append(down(t, next_id, p[0], p[1]))
                    open_ids.append(next_id)
                    next_id += 1
                t += 10
            for tid in open_ids:
                events.append(up(t, tid, 0, 0))
                t += 10
            mapping = {i: i * 13 + 5 for i in range(1, next_id)}
            base = oracle_final_scene(events, self.scene(), MICRO_CONFIG)
            relabeled = oracle_final_scene(
                relabel_stream(events, mapping), self.scene(), MICRO_CONFIG
            )
            assert {o.id: o.center for o in base} == {o.id: o.center for o in relabeled}
            assert base.selection == relabeled.selection


class TestEnumeration:
    def test_two_events_all_single_taps(self):
        report = enumerate_and_check(2)
        assert report.ok
        assert report.streams_run == 12  # one down/up pair per position

    def test_four_events(self):
        report = enumerate_and_check(4)
        assert report.ok
        assert report.streams_run == 444

    def test_stream_count_matches_combinatorics(self):
        # independent count: each down picks one of 12 positions, each
        # up closes any one of the currently open touches
        def with_positions(seq_len, n_pos):
            def rec(opened, budget):
                if budget == 0:
                    return 1 if opened == 0 else 0
                n = 0
                if budget >= opened + 2:
                    n += n_pos * rec(opened + 1, budget - 1)
                if opened:
                    n += opened * rec(opened - 1, budget - 1)
                return n

            return rec(0, seq_len)

        expected = sum(with_positions(k, 12) for k in (2, 4, 6))
        streams = sum(1 for _ in enumerate_streams(6, micro_positions()))
        assert streams == expected == 26364

    def test_four_events_with_object_targets_rejected(self):
        from tapdrag.core import StackingRule

        cfg = EngineConfig(
            display_width=600.0,
            display_height=300.0,
            stacking_rule=StackingRule.REJECT_OBJECT_TARGET,
        )
        report = enumerate_and_check(4, config=cfg)
        assert report.ok
        assert report.streams_run == 444

    def test_enumerated_streams_are_wellformed_and_unique(self):
        from tapdrag.core import validate_stream

        seen = set()
        for events in enumerate_streams(4, micro_positions()):
            assert validate_stream(events, MICRO_CONFIG) is None
            key = tuple((e.phase, e.touch_id, e.pos) for e in events)
            assert key not in seen
            seen.add(key)

    def test_budget_guard(self):
        with pytest.raises(ValueError):
            enumerate_and_check(9)


class TestCheckedRun:
    def test_clean_stream_passes(self):
        events = [
            down(0, 1, 200, 100),
            down(10, 2, 500, 250),
            up(20, 1, 200, 100),
            up(30, 2, 500, 250),
        ]
        log = run_checked(events, micro_scene(), MICRO_CONFIG)
        assert any("COMMITTED" in line for line in log)

    def test_checker_catches_injected_corruption(self):
        # sanity that the harness is alive: a scene mutated behind the
        # recognizer's back must trip the position-safety check
        from tapdrag.integrator import RecognizerSession
        from tapdrag.verification import InvariantViolation

        events = [down(0, 1, 100, 50), up(10, 1, 100, 50)]
        original = RecognizerSession.process_event

        def corrupting(self, ev):
            out = original(self, ev)
            self.scene.get(1).center = (999.0, 1.0)
            return out

        RecognizerSession.process_event = corrupting
        try:
            with pytest.raises(InvariantViolation):
                run_checked(events, micro_scene(), MICRO_CONFIG)
        finally:
            RecognizerSession.process_event = original


class TestFuzz:
    def test_small_fuzz_is_clean(self):
        report = fuzz(seed=3, n_streams=1500)
        assert report.ok
        assert report.streams_run == 1500

    def test_fuzz_is_reproducible(self):
        a = fuzz(seed=4, n_streams=200)
        b = fuzz(seed=4, n_streams=200)
        assert a.to_text() == b.to_text()

    def test_differential_subslop_policies_agree(self):
        report = differential_subslop(seed=2, n_streams=400)
        assert report.ok

    def test_random_streams_are_wellformed(self):
        from tapdrag.core import validate_stream

        for seed in range(50):
            rng = random.Random(seed)
            events = random_stream(rng, MICRO_CONFIG, micro_positions())
            assert validate_stream(events, MICRO_CONFIG) is None

    def test_subslop_streams_stay_within_slop(self):
        for seed in range(30):
            rng = random.Random(seed)
            events = random_stream(rng, MICRO_CONFIG, micro_positions(), sub_slop_only=True)
            downs = {}
            for e in events:
                if e.phase is Phase.DOWN:
                    downs[e.touch_id] = e.pos
                elif e.phase is Phase.MOVE:
                    dx = e.x - downs[e.touch_id][0]
                    dy = e.y - downs[e.touch_id][1]
                    assert (dx * dx + dy * dy) ** 0.5 <= MICRO_CONFIG.slop_radius

    def test_minimizer_shrinks_while_predicate_holds(self):
        events = [
            down(0, 1, 200, 100),
            move(5, 1, 202, 100),
            down(10, 2, 500, 250),
            move(15, 2, 501, 250),
            up(20, 1, 202, 100),
            up(30, 2, 501, 250),
            down(40, 3, 100, 50),
            up(50, 3, 100, 50),
        ]

        def involves_touch_2(stream):
            return any(e.touch_id == 2 for e in stream)

        reduced = minimize_stream(events, involves_touch_2)
        assert involves_touch_2(reduced)
        assert len(reduced) < len(events)
        assert all(e.touch_id == 2 or e.phase is not Phase.MOVE for e in reduced)
