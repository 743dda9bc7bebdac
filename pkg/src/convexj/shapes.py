"""Named shapes, the shape JSON schema, and the random convex corpus."""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import InvalidShapeError
from .geometry import ConvexPolygon, convex_hull, transform

DISC_SEGMENTS = 256


def regular_polygon(n: int, edge: float = 1.0, center=(0.0, 0.0)) -> ConvexPolygon:
    if n < 3:
        raise InvalidShapeError("a regular polygon needs n >= 3")
    if edge <= 0:
        raise InvalidShapeError("edge must be positive")
    radius = edge / (2 * math.sin(math.pi / n))
    return _inscribed(n, radius, center)


def _inscribed(n: int, radius: float, center) -> ConvexPolygon:
    th = 2 * math.pi * np.arange(n) / n
    return ConvexPolygon(np.column_stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)]))


def disc(radius: float = 1.0, segments: int = DISC_SEGMENTS, center=(0.0, 0.0)) -> ConvexPolygon:
    """Regular ``segments``-gon inscribed in the circle of the given radius."""
    if radius <= 0:
        raise InvalidShapeError("radius must be positive")
    if segments < 3:
        raise InvalidShapeError("need at least 3 segments")
    return _inscribed(segments, radius, center)


def rectangle(a: float, b: float) -> ConvexPolygon:
    """The rectangle ``(0, a) x (0, b)``."""
    if a <= 0 or b <= 0:
        raise InvalidShapeError("rectangle sides must be positive")
    return ConvexPolygon([[0, 0], [a, 0], [a, b], [0, b]])


def ellipse(a: float, b: float, segments: int = 128) -> ConvexPolygon:
    th = 2 * math.pi * np.arange(segments) / segments
    return ConvexPolygon(np.column_stack([a * np.cos(th), b * np.sin(th)]))


def _number(obj: dict, key: str) -> float:
    try:
        value = obj[key]
    except KeyError:
        raise InvalidShapeError(f"missing field {key!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidShapeError(f"field {key!r} must be a number")
    return float(value)


def shape_from_dict(obj) -> ConvexPolygon:
    if not isinstance(obj, dict):
        raise InvalidShapeError("shape must be a JSON object")
    kind = obj.get("kind")
    if kind == "polygon":
        verts = obj.get("vertices")
        if not isinstance(verts, list):
            raise InvalidShapeError("polygon needs a vertex list")
        try:
            return ConvexPolygon(np.array(verts, dtype=float))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidShapeError):
                raise
            raise InvalidShapeError(f"bad vertex list: {exc}") from exc
    if kind == "rectangle":
        return rectangle(_number(obj, "a"), _number(obj, "b"))
    if kind == "regular":
        n = _number(obj, "n")
        if n != int(n):
            raise InvalidShapeError("n must be an integer")
        return regular_polygon(int(n), _number(obj, "edge") if "edge" in obj else 1.0)
    if kind == "disc":
        segments = int(_number(obj, "segments")) if "segments" in obj else DISC_SEGMENTS
        return disc(_number(obj, "radius"), segments)
    raise InvalidShapeError(f"unknown shape kind {kind!r}")


def shape_to_dict(poly: ConvexPolygon) -> dict:
    return {"kind": "polygon", "vertices": poly.vertices.tolist()}


def load_shape(path) -> ConvexPolygon:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidShapeError(f"malformed JSON: {exc}") from exc
    return shape_from_dict(obj)


def random_convex(rng: np.random.Generator, max_aspect: float = 20.0) -> ConvexPolygon:
    """Hull of 8-40 uniform points in a randomly rotated box of random aspect,
    rescaled to unit area."""
    k = int(rng.integers(8, 41))
    aspect = float(np.exp(rng.uniform(0.0, math.log(max_aspect))))
    pts = rng.uniform(0.0, 1.0, size=(k, 2)) * np.array([aspect, 1.0])
    hull = convex_hull(pts)
    hull = transform(hull, translation=-hull.centroid)
    return transform(hull, scale=1.0 / math.sqrt(hull.area), rotation=float(rng.uniform(0, 2 * math.pi)))


def random_corpus(count: int, seed: int = 0, max_aspect: float = 20.0) -> list[ConvexPolygon]:
    rng = np.random.default_rng(seed)
    return [random_convex(rng, max_aspect) for _ in range(count)]


def named_shapes() -> dict[str, ConvexPolygon]:
    shapes = {f"regular_{n}": regular_polygon(n) for n in (3, 4, 5, 6, 8, 12)}
    shapes["disc"] = disc(1.0)
    shapes["rectangle_2x1"] = rectangle(2.0, 1.0)
    shapes["rectangle_20x1"] = rectangle(20.0, 1.0)
    shapes["right_triangle"] = ConvexPolygon([[0, 0], [1, 0], [0, 1]])
    shapes["ellipse_1.2x1"] = ellipse(1.2, 1.0)
    return shapes
