"""Deterministic multi-touch gesture recognition engine.

Recognizes a tap-based dragging technique alongside traditional drag,
two-finger pinch/rotate/move, lasso and box selection, over timestamped
touch-event streams. Ships with trace replay and fuzzing tools and a
target-acquisition study harness.
"""
from .core import (
    EngineConfig,
    Phase,
    Point,
    Policy,
    ProtocolViolation,
    StackingRule,
    StreamError,
    StreamErrorKind,
    TouchEvent,
    validate_stream,
)
from .scene import (
    Circle,
    PolygonRegion,
    Rectangle,
    RectRegion,
    Scene,
    SceneObject,
    SimilarityTransform,
    apply_transform,
    hit_test,
    objects_in_region,
    parse_scene,
    point_in_polygon,
    serialize_scene,
    similarity_from_touch_pairs,
)
from .machine import td_step
from .integrator import RecognizerSession, process_event
from .traceio import BenchReport, bench, parse_trace, replay, serialize_trace
from .study import (
    ConditionStats,
    StudyConfig,
    TrialLog,
    TrialResult,
    TrialSpec,
    evaluate_trial,
    generate_session,
    summarize,
)
from .verification import enumerate_and_check, fuzz, oracle_final_scene

__all__ = [
    "BenchReport",
    "Circle",
    "ConditionStats",
    "EngineConfig",
    "Phase",
    "Point",
    "PolygonRegion",
    "Policy",
    "ProtocolViolation",
    "RecognizerSession",
    "RectRegion",
    "Rectangle",
    "Scene",
    "SceneObject",
    "SimilarityTransform",
    "StackingRule",
    "StreamError",
    "StreamErrorKind",
    "StudyConfig",
    "TouchEvent",
    "TrialLog",
    "TrialResult",
    "TrialSpec",
    "apply_transform",
    "bench",
    "enumerate_and_check",
    "evaluate_trial",
    "fuzz",
    "generate_session",
    "hit_test",
    "objects_in_region",
    "oracle_final_scene",
    "parse_scene",
    "parse_trace",
    "point_in_polygon",
    "process_event",
    "replay",
    "serialize_scene",
    "serialize_trace",
    "similarity_from_touch_pairs",
    "summarize",
    "td_step",
    "validate_stream",
]
