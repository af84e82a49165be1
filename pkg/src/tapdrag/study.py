"""Target-acquisition study harness: deterministic trial generation for
the factorial design, pass/fail trial evaluation, and descriptive
statistics in five-number (Tukey box plot) form.

The design crosses technique (tap-drag vs. traditional drag), target
visibility, source area (left or right half of the display) and, for
short 100 mm trials, four dragging directions. Long 550 mm trials only
fit horizontally, so their direction is forced by the source area:
sources on the left half drag rightward and vice versa. That yields
32 short cells + 8 long cells; at 10 trials per cell a session is 400
trials, and 18 participants produce 7200 data points.
"""
from __future__ import annotations

import csv
import enum
import io
import math
import random
from dataclasses import dataclass, field

from .core import EngineConfig, Point, TouchEvent

SHORT_DISTANCE_MM = 100.0
LONG_DISTANCE_MM = 550.0
OBJECT_DIAMETER_MM = 35.0
PASS_TOLERANCE_MM = 17.5  # radius of the accepted drop zone


class Technique(enum.Enum):
    TAPDRAG = "tapdrag"
    TRADITIONAL = "traditional"


class SourceArea(enum.Enum):
    LEFT_HALF = "left_half"
    RIGHT_HALF = "right_half"


class Direction(enum.Enum):
    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"


_DIR_VECTORS = {
    Direction.UP: (0.0, -1.0),  # y grows downward
    Direction.DOWN: (0.0, 1.0),
    Direction.LEFT: (-1.0, 0.0),
    Direction.RIGHT: (1.0, 0.0),
}


class DisplayTooSmall(ValueError):
    pass


class MismatchedTrial(ValueError):
    pass


class EmptyGroup(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class TrialSpec:
    index: int
    technique: Technique
    target_visible: bool
    source_area: SourceArea
    distance_mm: float
    direction: Direction
    source: Point
    target: Point
    object_diameter_mm: float = OBJECT_DIAMETER_MM


@dataclass(frozen=True, slots=True)
class TrialLog:
    trial_index: int
    start_ms: float
    end_ms: float
    drop_point: Point
    events: tuple[TouchEvent, ...] = ()

    def __post_init__(self) -> None:
        if self.end_ms < self.start_ms:
            raise ValueError("trial ends before it starts")


@dataclass(frozen=True, slots=True)
class TrialResult:
    trial_index: int
    completion_time_s: float
    passed: bool


@dataclass(frozen=True, slots=True)
class FiveNumber:
    min: float
    q1: float
    median: float
    q3: float
    max: float


@dataclass(frozen=True, slots=True)
class ConditionStats:
    key: tuple[tuple[str, str], ...]
    n: int
    mean_time_s: float
    failure_rate: float
    five_number: FiveNumber


@dataclass(frozen=True)
class StudyConfig:
    seed: int = 0
    trials_per_cell: int = 10
    margin_mm: float = 50.0
    engine: EngineConfig = field(default_factory=EngineConfig)

    def __post_init__(self) -> None:
        if self.trials_per_cell <= 0:
            raise ValueError("trials_per_cell must be positive")


def cells() -> list[tuple[Technique, bool, SourceArea, Direction, float]]:
    """The 40 factor combinations in canonical order: 32 short cells plus
    8 long cells with the direction forced by the source area."""
    out = []
    for technique in Technique:
        for visible in (True, False):
            for area in SourceArea:
                for direction in Direction:
                    out.append((technique, visible, area, direction, SHORT_DISTANCE_MM))
    for technique in Technique:
        for visible in (True, False):
            for area in SourceArea:
                direction = Direction.RIGHT if area is SourceArea.LEFT_HALF else Direction.LEFT
                out.append((technique, visible, area, direction, LONG_DISTANCE_MM))
    return out


def source_band(
    area: SourceArea, direction: Direction, distance: float, cfg: StudyConfig
) -> tuple[float, float, float, float]:
    """Legal (xlo, xhi, ylo, yhi) band for a trial's source point: the
    source stays in its display half and both endpoints keep the margin."""
    w = cfg.engine.display_width
    h = cfg.engine.display_height
    m = cfg.margin_mm
    if area is SourceArea.LEFT_HALF:
        xlo, xhi = m, w / 2.0
    else:
        xlo, xhi = w / 2.0, w - m
    ylo, yhi = m, h - m
    if direction is Direction.RIGHT:
        xhi = min(xhi, w - m - distance)
    elif direction is Direction.LEFT:
        xlo = max(xlo, m + distance)
    elif direction is Direction.DOWN:
        yhi = min(yhi, h - m - distance)
    else:
        ylo = max(ylo, m + distance)
    if xlo > xhi or ylo > yhi:
        raise DisplayTooSmall(
            f"no room for {direction.value} {distance:g} mm trials from the {area.value}"
        )
    return xlo, xhi, ylo, yhi


# Source coordinates are snapped to a 1/1024 mm grid so that adding the
# trial distance is exact in binary floating point and the generated
# distances are exact to 0 mm, not merely close.
_GRID = 1024.0


def _quantize(v: float) -> float:
    return round(v * _GRID) / _GRID


def _random_source(rng: random.Random, band) -> Point:
    xlo, xhi, ylo, yhi = band
    return (_quantize(rng.uniform(xlo, xhi)), _quantize(rng.uniform(ylo, yhi)))


def generate_session(cfg: StudyConfig, *, index_base: int = 0) -> list[TrialSpec]:
    """All trials of one session, uniformly shuffled, fully determined
    by the seed."""
    return _generate_with_rng(cfg, random.Random(f"study:{cfg.seed}"), index_base=index_base)


def generate_participants(cfg: StudyConfig, participants: int) -> list[TrialSpec]:
    """Concatenated sessions for several participants, one derived seed
    per participant, with a globally increasing trial index."""
    out: list[TrialSpec] = []
    for p in range(participants):
        rng = random.Random(f"study:{cfg.seed}:participant:{p}")
        out.extend(_generate_with_rng(cfg, rng, index_base=len(out)))
    return out


def _generate_with_rng(cfg: StudyConfig, rng: random.Random, *, index_base: int) -> list[TrialSpec]:
    drafts = []
    for technique, visible, area, direction, distance in cells():
        band = source_band(area, direction, distance, cfg)
        dx, dy = _DIR_VECTORS[direction]
        for _ in range(cfg.trials_per_cell):
            source = _random_source(rng, band)
            target = (source[0] + dx * distance, source[1] + dy * distance)
            drafts.append((technique, visible, area, distance, direction, source, target))
    rng.shuffle(drafts)
    return [
        TrialSpec(index_base + i, tech, vis, area, dist, direction, source, target)
        for i, (tech, vis, area, dist, direction, source, target) in enumerate(drafts)
    ]


def evaluate_trial(spec: TrialSpec, log: TrialLog) -> TrialResult:
    """Pass/fail with the fixed drop tolerance, boundary inclusive."""
    if log.trial_index != spec.index:
        raise MismatchedTrial(f"log for trial {log.trial_index}, spec is {spec.index}")
    dx = log.drop_point[0] - spec.target[0]
    dy = log.drop_point[1] - spec.target[1]
    passed = math.hypot(dx, dy) <= PASS_TOLERANCE_MM
    return TrialResult(spec.index, (log.end_ms - log.start_ms) / 1000.0, passed)


# --- Statistics -------------------------------------------------------------


def _quantile(sorted_xs, p: float) -> float:
    # linear interpolation between order statistics (inclusive method)
    n = len(sorted_xs)
    if n == 1:
        return sorted_xs[0]
    h = (n - 1) * p
    lo = int(h)
    frac = h - lo
    if lo + 1 >= n:
        return sorted_xs[-1]
    return sorted_xs[lo] + frac * (sorted_xs[lo + 1] - sorted_xs[lo])


def five_number(times) -> FiveNumber:
    xs = sorted(times)
    return FiveNumber(xs[0], _quantile(xs, 0.25), _quantile(xs, 0.5), _quantile(xs, 0.75), xs[-1])


FACTORS = {
    "technique": lambda s: s.technique.value,
    "visible": lambda s: "1" if s.target_visible else "0",
    "area": lambda s: s.source_area.value,
    "distance": lambda s: f"{s.distance_mm:g}",
    "direction": lambda s: s.direction.value,
}


def summarize(specs, results, group_by=()) -> list[ConditionStats]:
    """Per-group mean time, failure rate and five-number summary, with
    whiskers at the data extremes. ``group_by`` names any subset of
    {technique, visible, area, distance, direction}."""
    for name in group_by:
        if name not in FACTORS:
            raise KeyError(f"unknown factor {name!r}")
    spec_by_index = {s.index: s for s in specs}
    groups: dict[tuple, list[TrialResult]] = {}
    for r in results:
        spec = spec_by_index.get(r.trial_index)
        if spec is None:
            raise MismatchedTrial(f"result for unknown trial {r.trial_index}")
        key = tuple((name, FACTORS[name](spec)) for name in group_by)
        groups.setdefault(key, []).append(r)
    if not groups:
        raise EmptyGroup("no results to summarize")
    out = []
    for key in sorted(groups):
        rs = groups[key]
        times = sorted(r.completion_time_s for r in rs)
        failures = sum(1 for r in rs if not r.passed)
        out.append(
            ConditionStats(
                key=key,
                n=len(rs),
                mean_time_s=sum(times) / len(times),
                failure_rate=failures / len(rs),
                five_number=five_number(times),
            )
        )
    return out


# --- CSV wire formats --------------------------------------------------------

SPEC_HEADER = ["index", "technique", "visible", "area", "distance_mm", "direction", "sx", "sy", "tx", "ty"]
RESULT_HEADER = ["index", "time_s", "passed"]


def write_specs_csv(specs, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SPEC_HEADER)
    for s in specs:
        w.writerow(
            [
                s.index,
                s.technique.value,
                "1" if s.target_visible else "0",
                s.source_area.value,
                f"{s.distance_mm:g}",
                s.direction.value,
                f"{s.source[0]:.3f}",
                f"{s.source[1]:.3f}",
                f"{s.target[0]:.3f}",
                f"{s.target[1]:.3f}",
            ]
        )


def specs_to_csv(specs) -> str:
    buf = io.StringIO()
    write_specs_csv(specs, buf)
    return buf.getvalue()


def read_specs_csv(text: str) -> list[TrialSpec]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != SPEC_HEADER:
        raise ValueError("missing or unexpected trial-spec CSV header")
    out = []
    for row in rows[1:]:
        if not row:
            continue
        out.append(
            TrialSpec(
                index=int(row[0]),
                technique=Technique(row[1]),
                target_visible=row[2] == "1",
                source_area=SourceArea(row[3]),
                distance_mm=float(row[4]),
                direction=Direction(row[5]),
                source=(float(row[6]), float(row[7])),
                target=(float(row[8]), float(row[9])),
            )
        )
    return out


def write_results_csv(results, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for r in results:
        w.writerow([r.trial_index, f"{r.completion_time_s:.3f}", "1" if r.passed else "0"])


def results_to_csv(results) -> str:
    buf = io.StringIO()
    write_results_csv(results, buf)
    return buf.getvalue()


def read_results_csv(text: str) -> list[TrialResult]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != RESULT_HEADER:
        raise ValueError("missing or unexpected result CSV header")
    out = []
    for row in rows[1:]:
        if not row:
            continue
        out.append(TrialResult(int(row[0]), float(row[1]), row[2] == "1"))
    return out
