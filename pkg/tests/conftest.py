import pytest

from tapdrag.core import Phase, TouchEvent


def down(t, tid, x, y):
    return TouchEvent(float(t), tid, Phase.DOWN, float(x), float(y))


def move(t, tid, x, y):
    return TouchEvent(float(t), tid, Phase.MOVE, float(x), float(y))


def up(t, tid, x, y):
    return TouchEvent(float(t), tid, Phase.UP, float(x), float(y))


def names(gesture_events):
    return [e.NAME for e in gesture_events]


@pytest.fixture
def golden_dir():
    from pathlib import Path

    return Path(__file__).parent / "golden"
