"""Object model under manipulation: hit testing, similarity transforms
for pinch/rotate/move, and region containment for lasso and box
selection.

All operations here are pure; mutation happens only through the
recognizer session, one event at a time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .core import Point


class DegeneratePair(ValueError):
    """Two source touch points coincide; no similarity is defined."""


class DegeneratePolygon(ValueError):
    """A polygon needs at least three vertices."""


class SceneParseError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True, slots=True)
class Circle:
    radius: float


@dataclass(frozen=True, slots=True)
class Rectangle:
    width: float
    height: float


@dataclass(slots=True)
class SceneObject:
    """A draggable item. ``scale`` is stored, not baked into the shape
    parameters, so cumulative pinches stay exact."""

    id: int
    center: Point
    shape: Circle | Rectangle
    rotation: float = 0.0
    scale: float = 1.0
    z: int = 0
    draggable: bool = True
    selected: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.shape, Circle):
            if self.shape.radius <= 0:
                raise ValueError("radius must be positive")
        else:
            if self.shape.width <= 0 or self.shape.height <= 0:
                raise ValueError("rectangle sides must be positive")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def contains(self, p: Point) -> bool:
        """Boundary-inclusive containment after rotation/scale about the
        object's center."""
        dx = p[0] - self.center[0]
        dy = p[1] - self.center[1]
        if isinstance(self.shape, Circle):
            r = self.shape.radius * self.scale
            return dx * dx + dy * dy <= r * r
        c = math.cos(-self.rotation)
        s = math.sin(-self.rotation)
        lx = dx * c - dy * s
        ly = dx * s + dy * c
        hw = self.shape.width * self.scale / 2.0
        hh = self.shape.height * self.scale / 2.0
        return abs(lx) <= hw and abs(ly) <= hh

    def copy(self) -> "SceneObject":
        return replace(self)


class Scene:
    """Ordered collection of objects plus the current selection.

    The selection id set and the per-object ``selected`` flags are kept
    mirrored at all times.
    """

    def __init__(self, objects=()):
        self.objects: dict[int, SceneObject] = {}
        self.selection: set[int] = set()
        for obj in objects:
            self.add(obj)

    def add(self, obj: SceneObject) -> None:
        if obj.id in self.objects:
            raise ValueError(f"duplicate object id {obj.id}")
        self.objects[obj.id] = obj
        if obj.selected:
            self.selection.add(obj.id)

    def get(self, object_id: int) -> SceneObject:
        return self.objects[object_id]

    def set_selection(self, ids) -> None:
        ids = set(ids)
        unknown = ids - self.objects.keys()
        if unknown:
            raise KeyError(f"selection references unknown ids {sorted(unknown)}")
        self.selection = ids
        for obj in self.objects.values():
            obj.selected = obj.id in ids

    def clone(self) -> "Scene":
        return Scene(obj.copy() for obj in self.objects.values())

    def __iter__(self):
        return iter(self.objects.values())

    def __len__(self) -> int:
        return len(self.objects)


def hit_test(scene: Scene, p: Point) -> int | None:
    """Id of the top-most draggable object containing ``p``, or None for
    the background. Ties on z fall to the higher id; non-draggable
    objects never hit."""
    best: SceneObject | None = None
    for obj in scene:
        if not obj.draggable or not obj.contains(p):
            continue
        if best is None or (obj.z, obj.id) > (best.z, best.id):
            best = obj
    return None if best is None else best.id


@dataclass(frozen=True, slots=True)
class SimilarityTransform:
    """Uniform scale + rotation + translation: ``x -> s R(theta) x + t``."""

    s: float
    theta: float
    tx: float
    ty: float

    def apply(self, p: Point) -> Point:
        c = math.cos(self.theta) * self.s
        s = math.sin(self.theta) * self.s
        return (p[0] * c - p[1] * s + self.tx, p[0] * s + p[1] * c + self.ty)

    def inverse(self) -> "SimilarityTransform":
        inv_s = 1.0 / self.s
        c = math.cos(-self.theta) * inv_s
        s = math.sin(-self.theta) * inv_s
        return SimilarityTransform(
            inv_s, -self.theta, -(self.tx * c - self.ty * s), -(self.tx * s + self.ty * c)
        )

    @staticmethod
    def identity() -> "SimilarityTransform":
        return SimilarityTransform(1.0, 0.0, 0.0, 0.0)


def similarity_from_touch_pairs(p1: Point, p2: Point, q1: Point, q2: Point) -> SimilarityTransform:
    """Similarity mapping the touch pair (p1, p2) onto (q1, q2).

    Scale is the ratio of pair distances, rotation the change of pair
    bearing, and the translation carries the pair midpoint onto the new
    midpoint; the construction maps p1 to q1 and p2 to q2 exactly.
    """
    vx = p2[0] - p1[0]
    vy = p2[1] - p1[1]
    wx = q2[0] - q1[0]
    wy = q2[1] - q1[1]
    d_p = math.hypot(vx, vy)
    if d_p == 0.0:
        raise DegeneratePair("source touch points coincide")
    s = math.hypot(wx, wy) / d_p
    theta = math.atan2(wy, wx) - math.atan2(vy, vx)
    mpx = (p1[0] + p2[0]) / 2.0
    mpy = (p1[1] + p2[1]) / 2.0
    mqx = (q1[0] + q2[0]) / 2.0
    mqy = (q1[1] + q2[1]) / 2.0
    c = math.cos(theta) * s
    sn = math.sin(theta) * s
    return SimilarityTransform(s, theta, mqx - (mpx * c - mpy * sn), mqy - (mpx * sn + mpy * c))


def apply_transform(obj: SceneObject, xf: SimilarityTransform) -> SceneObject:
    """New object with center mapped, rotation and scale composed; shape
    parameters stay untouched."""
    out = obj.copy()
    out.center = xf.apply(obj.center)
    out.rotation = obj.rotation + xf.theta
    out.scale = obj.scale * xf.s
    return out


@dataclass(frozen=True, slots=True)
class RectRegion:
    """Axis-aligned closed box spanned by two corner points."""

    corner_a: Point
    corner_b: Point

    def contains(self, p: Point) -> bool:
        xlo, xhi = sorted((self.corner_a[0], self.corner_b[0]))
        ylo, yhi = sorted((self.corner_a[1], self.corner_b[1]))
        return xlo <= p[0] <= xhi and ylo <= p[1] <= yhi


@dataclass(frozen=True, slots=True)
class PolygonRegion:
    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise DegeneratePolygon("polygon needs at least 3 vertices")

    def contains(self, p: Point) -> bool:
        return point_in_polygon(self.vertices, p)


Region = RectRegion | PolygonRegion


def _on_segment(a: Point, b: Point, p: Point) -> bool:
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if cross != 0.0:
        return False
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def point_in_polygon(vertices, p: Point) -> bool:
    """Even-odd rule on the closed polygon, boundary-inclusive: a point
    on any edge counts as inside."""
    n = len(vertices)
    if n < 3:
        raise DegeneratePolygon("polygon needs at least 3 vertices")
    px, py = p
    inside = False
    ax, ay = vertices[-1]
    for bx, by in vertices:
        if _on_segment((ax, ay), (bx, by), p):
            return True
        if (ay <= py < by) or (by <= py < ay):
            # x coordinate where the edge crosses the horizontal ray
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < x_cross:
                inside = not inside
        ax, ay = bx, by
    return inside


def objects_in_region(scene: Scene, region: Region) -> set[int]:
    """Ids of draggable objects whose center lies in the region."""
    return {obj.id for obj in scene if obj.draggable and region.contains(obj.center)}


# Scene snapshot wire format: one object per line,
#   id z kind cx cy param1 [param2] rotation scale draggable selected
# space-separated, decimals with 6 fraction digits.


def _fmt6(v: float) -> str:
    r = round(v, 6)
    if r == 0.0:
        r = 0.0
    return f"{r:.6f}"


def serialize_scene(scene: Scene) -> str:
    lines = []
    for obj in sorted(scene, key=lambda o: o.id):
        if isinstance(obj.shape, Circle):
            kind = "circle"
            params = [_fmt6(obj.shape.radius)]
        else:
            kind = "rectangle"
            params = [_fmt6(obj.shape.width), _fmt6(obj.shape.height)]
        fields = [
            str(obj.id),
            str(obj.z),
            kind,
            _fmt6(obj.center[0]),
            _fmt6(obj.center[1]),
            *params,
            _fmt6(obj.rotation),
            _fmt6(obj.scale),
            "1" if obj.draggable else "0",
            "1" if obj.selected else "0",
        ]
        lines.append(" ".join(fields))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_scene(text: str) -> Scene:
    scene = Scene()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        try:
            kind = fields[2]
            if kind == "circle":
                if len(fields) != 10:
                    raise SceneParseError(lineno, "circle line needs 10 fields")
                shape: Circle | Rectangle = Circle(float(fields[5]))
                rest = fields[6:]
            elif kind == "rectangle":
                if len(fields) != 11:
                    raise SceneParseError(lineno, "rectangle line needs 11 fields")
                shape = Rectangle(float(fields[5]), float(fields[6]))
                rest = fields[7:]
            else:
                raise SceneParseError(lineno, f"unknown shape kind {kind!r}")
            obj = SceneObject(
                id=int(fields[0]),
                z=int(fields[1]),
                center=(float(fields[3]), float(fields[4])),
                shape=shape,
                rotation=float(rest[0]),
                scale=float(rest[1]),
                draggable=rest[2] == "1",
                selected=rest[3] == "1",
            )
        except SceneParseError:
            raise
        except (IndexError, ValueError) as exc:
            raise SceneParseError(lineno, str(exc)) from exc
        scene.add(obj)
    scene.set_selection({o.id for o in scene if o.selected})
    return scene
