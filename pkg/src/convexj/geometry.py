"""Computational geometry for planar convex bodies.

Polygons are stored as ``(n, 2)`` float arrays of counterclockwise vertices.
All routines are pure; a :class:`ConvexPolygon` is never mutated after
construction (its vertex array is flagged read-only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence, Union

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateInputError, InvalidShapeError

#: relative geometric epsilon, multiplied by the shape diameter
REL_TOL = 1e-10


class Point2(NamedTuple):
    x: float
    y: float


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _shoelace(v: np.ndarray) -> float:
    w = np.roll(v, -1, axis=0)
    return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]))


def _max_pairwise(points: np.ndarray) -> float:
    d = points[:, None, :] - points[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", d, d))))


class ConvexPolygon:
    """Open convex polygon given by its vertex chain.

    Clockwise input is reversed, a repeated closing vertex is dropped, and
    duplicate or collinear vertices (within ``tol``) are pruned.  Anything
    left that is not strictly convex raises :class:`InvalidShapeError`.
    """

    def __init__(self, vertices, tol: float | None = None):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise InvalidShapeError("need at least 3 vertices of shape (n, 2)")
        if not np.all(np.isfinite(v)):
            raise InvalidShapeError("vertex coordinates must be finite")
        scale = _max_pairwise(v)
        if scale == 0.0:
            raise InvalidShapeError("all vertices coincide")
        if tol is None:
            tol = REL_TOL * scale
        if _shoelace(v) < 0:
            v = v[::-1]
        v = _prune(v, tol)
        if len(v) < 3:
            raise InvalidShapeError("fewer than 3 non-collinear vertices")
        e = np.roll(v, -1, axis=0) - v
        turn = _cross(e, np.roll(e, -1, axis=0))
        if np.any(turn <= 0):
            raise InvalidShapeError("vertex chain is not strictly convex")
        total = np.sum(np.arctan2(turn, np.einsum("ij,ij->i", e, np.roll(e, -1, axis=0))))
        if abs(total - 2 * math.pi) > 1e-6:
            raise InvalidShapeError("vertex chain winds more than once")
        if _shoelace(v) <= tol * scale:
            raise InvalidShapeError("polygon has zero area")
        v.setflags(write=False)
        self.vertices = v
        self.tol = float(tol)

    def __repr__(self):
        return f"ConvexPolygon(n={self.n}, area={self.area:.6g})"

    def __eq__(self, other):
        return isinstance(other, ConvexPolygon) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash(self.vertices.tobytes())

    @property
    def n(self) -> int:
        return len(self.vertices)

    @cached_property
    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        return np.hypot(self.edges[:, 0], self.edges[:, 1])

    @cached_property
    def normals(self) -> np.ndarray:
        """Outward unit normals, one per edge ``v[i] -> v[i+1]``."""
        e = self.edges / self.edge_lengths[:, None]
        return np.column_stack([e[:, 1], -e[:, 0]])

    @cached_property
    def offsets(self) -> np.ndarray:
        """Support values: edge ``i`` lies on ``<normals[i], x> = offsets[i]``."""
        return np.einsum("ij,ij->i", self.normals, self.vertices)

    @cached_property
    def area(self) -> float:
        return _shoelace(self.vertices)

    @cached_property
    def perimeter(self) -> float:
        return float(np.sum(self.edge_lengths))

    @cached_property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        c = _cross(v, w)
        return np.array([np.sum((v[:, 0] + w[:, 0]) * c), np.sum((v[:, 1] + w[:, 1]) * c)]) / (
            6.0 * self.area
        )

    def boundary_distance(self, points) -> np.ndarray:
        """Signed distance to the nearest edge line (positive inside)."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.min(self.offsets[None, :] - p @ self.normals.T, axis=1)

    def contains(self, points, tol: float | None = None) -> np.ndarray:
        tol = self.tol if tol is None else tol
        return self.boundary_distance(points) >= -tol

    def distance(self, points) -> np.ndarray:
        """Euclidean distance from each point to the closed polygon."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        a = self.vertices[None, :, :]
        e = self.edges[None, :, :]
        s = np.einsum("pij,pij->pi", p[:, None, :] - a, e) / self.edge_lengths[None, :] ** 2
        s = np.clip(s, 0.0, 1.0)
        q = a + s[..., None] * e
        d = np.min(np.linalg.norm(p[:, None, :] - q, axis=2), axis=1)
        return np.where(self.boundary_distance(p) >= 0, 0.0, d)

    def boundary_point(self, edge: int, s: float) -> np.ndarray:
        return self.vertices[edge] + s * self.edges[edge]


def _prune(v: np.ndarray, tol: float) -> np.ndarray:
    """Drop repeated and collinear vertices until none remain."""
    changed = True
    while changed and len(v) >= 3:
        changed = False
        nxt = np.roll(v, -1, axis=0)
        keep = np.linalg.norm(nxt - v, axis=1) > tol
        if not keep.all():
            v = v[keep]
            changed = True
            continue
        prev = np.roll(v, 1, axis=0)
        nxt = np.roll(v, -1, axis=0)
        base = np.linalg.norm(nxt - prev, axis=1)
        height = np.abs(_cross(v - prev, nxt - prev)) / np.maximum(base, tol)
        flat = height <= tol
        if flat.any():
            # remove one at a time so that long runs stay anchored
            i = int(np.argmin(np.where(flat, height, np.inf)))
            v = np.delete(v, i, axis=0)
            changed = True
    return v


@dataclass(frozen=True)
class Segment:
    start: np.ndarray
    end: np.ndarray

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    def to_json(self) -> dict:
        return {"type": "segment", "start": list(map(float, self.start)), "end": list(map(float, self.end))}


@dataclass(frozen=True)
class Arc:
    """Counterclockwise circular arc from ``theta0`` to ``theta1 > theta0``."""

    center: np.ndarray
    radius: float
    theta0: float
    theta1: float

    @property
    def sweep(self) -> float:
        return self.theta1 - self.theta0

    @property
    def length(self) -> float:
        return self.radius * self.sweep

    @property
    def start(self) -> np.ndarray:
        return self.center + self.radius * np.array([math.cos(self.theta0), math.sin(self.theta0)])

    @property
    def end(self) -> np.ndarray:
        return self.center + self.radius * np.array([math.cos(self.theta1), math.sin(self.theta1)])

    def to_json(self) -> dict:
        return {
            "type": "arc",
            "center": list(map(float, self.center)),
            "radius": float(self.radius),
            "theta0": float(self.theta0),
            "theta1": float(self.theta1),
        }


class ArcBoundaryShape:
    """Convex region bounded by segments and arcs of one common radius."""

    def __init__(self, pieces: Sequence[Union[Segment, Arc]], tol: float = 1e-9):
        pieces = list(pieces)
        if not pieces:
            raise InvalidShapeError("empty boundary")
        radii = {round(p.radius, 12) for p in pieces if isinstance(p, Arc)}
        if len(radii) > 1:
            raise InvalidShapeError("arcs must share one radius")
        for a, b in zip(pieces, pieces[1:] + pieces[:1]):
            if np.linalg.norm(a.end - b.start) > tol:
                raise InvalidShapeError("boundary pieces do not chain")
        self.pieces = tuple(pieces)
        self.closed = True
        self.tol = tol

    @property
    def radius(self) -> float:
        for p in self.pieces:
            if isinstance(p, Arc):
                return p.radius
        return 0.0

    @cached_property
    def area(self) -> float:
        corners = np.array([p.start for p in self.pieces])
        a = _shoelace(corners) if len(corners) >= 3 else 0.0
        for p in self.pieces:
            if isinstance(p, Arc):
                a += 0.5 * p.radius**2 * (p.sweep - math.sin(p.sweep))
        return a

    @cached_property
    def perimeter(self) -> float:
        return float(sum(p.length for p in self.pieces))

    def sample(self, per_arc: int = 64) -> np.ndarray:
        """Boundary points in order; arcs are subdivided into ``per_arc`` chords."""
        out = []
        for p in self.pieces:
            if isinstance(p, Arc):
                th = np.linspace(p.theta0, p.theta1, per_arc, endpoint=False)
                out.append(p.center + p.radius * np.column_stack([np.cos(th), np.sin(th)]))
            else:
                out.append(p.start[None, :])
        return np.vstack(out)

    def to_json(self) -> list:
        return [p.to_json() for p in self.pieces]


Shape = Union[ConvexPolygon, ArcBoundaryShape]


def area(shape: Shape) -> float:
    return shape.area


def perimeter(shape: Shape) -> float:
    return shape.perimeter


def diameter(poly: ConvexPolygon) -> float:
    """Largest vertex-to-vertex distance, by rotating calipers over antipodal pairs."""
    v = poly.vertices
    n = len(v)
    e = poly.edges
    best = 0.0
    j = 1
    for i in range(n):
        # advance j while the triangle area on edge i keeps growing
        while abs(_cross(e[i], v[(j + 1) % n] - v[i])) > abs(_cross(e[i], v[j] - v[i])):
            j = (j + 1) % n
        for k in (i, (i + 1) % n):
            best = max(best, float(np.linalg.norm(v[k] - v[j])))
    return best


def inradius(poly: ConvexPolygon) -> tuple[float, Point2]:
    """Radius and center of the largest inscribed disc (Chebyshev center LP)."""
    a_ub = np.column_stack([poly.normals, np.ones(poly.n)])
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=a_ub,
        b_ub=poly.offsets,
        bounds=[(None, None), (None, None), (0, None)],
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise InvalidShapeError(f"inradius LP failed: {res.message}")
    c = res.x[:2]
    # report the radius the center actually achieves
    r = float(np.min(poly.offsets - poly.normals @ c))
    return r, Point2(float(c[0]), float(c[1]))


def _clip(v: np.ndarray, lab: np.ndarray, n: np.ndarray, c: float, label: int, eps: float):
    """Intersect a convex chain with ``<n, x> <= c``; labels name the edge leaving each vertex."""
    s = v @ n - c
    inside = s <= eps
    if inside.all():
        return v, lab
    if not inside.any():
        return v[:0], lab[:0]
    m = len(v)
    nxt = np.roll(inside, -1)
    exits = np.flatnonzero(inside & ~nxt)
    enters = np.flatnonzero(~inside & nxt)
    i_exit, i_enter = int(exits[0]), int(enters[0])
    # inside run: i_enter+1 ... i_exit (cyclic)
    run = (np.arange(i_enter + 1, i_enter + 1 + ((i_exit - i_enter) % m)) % m)
    a, b = v[i_exit], v[(i_exit + 1) % m]
    x_exit = a + (s[i_exit] / (s[i_exit] - s[(i_exit + 1) % m])) * (b - a)
    a, b = v[i_enter], v[(i_enter + 1) % m]
    x_enter = a + (s[i_enter] / (s[i_enter] - s[(i_enter + 1) % m])) * (b - a)
    nv = np.vstack([v[run], x_exit, x_enter])
    nl = np.concatenate([lab[run], [label, lab[i_enter]]])
    return nv, nl


def _clean_chain(v: np.ndarray, lab: np.ndarray, tol: float):
    """Remove zero-length edges from a labelled chain."""
    while len(v) >= 2:
        d = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        short = d <= tol
        if not short.any():
            break
        i = int(np.flatnonzero(short)[0])
        # vertex i+1 takes over position i together with its own outgoing label
        v = np.delete(v, i, axis=0)
        lab = np.delete(lab, i)
    return v, lab


def offset_chain(poly: ConvexPolygon, r: float) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the inward offset at distance ``r`` and the parent edge index
    of each outgoing edge.  May be empty or degenerate (segment / point)."""
    v = np.array(poly.vertices)
    lab = np.arange(poly.n)
    eps = poly.tol * 1e-3
    for j in range(poly.n):
        v, lab = _clip(v, lab, poly.normals[j], poly.offsets[j] - r, j, eps)
        if len(v) == 0:
            break
    return _clean_chain(v, lab, poly.tol)


def inward_offset(poly: ConvexPolygon, r: float) -> ConvexPolygon | None:
    """Points at distance at least ``r`` from the boundary; ``None`` when empty."""
    if r < 0:
        raise ValueError("offset distance must be nonnegative")
    if r == 0:
        return poly
    v, _ = offset_chain(poly, r)
    if len(v) < 3:
        return None
    try:
        return ConvexPolygon(v, tol=poly.tol)
    except InvalidShapeError:
        return None


def minkowski_sum_disc(poly: ConvexPolygon, r: float) -> ArcBoundaryShape:
    """``poly ⊕ B_r``: edges pushed out by ``r`` joined by vertex arcs."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    v, nrm = poly.vertices, poly.normals
    pieces: list = []
    for i in range(poly.n):
        j = (i + 1) % poly.n
        if r > 0:
            t0 = math.atan2(nrm[i - 1, 1], nrm[i - 1, 0])
            t1 = math.atan2(nrm[i, 1], nrm[i, 0])
            while t1 <= t0:
                t1 += 2 * math.pi
            pieces.append(Arc(v[i].copy(), float(r), t0, t1))
        pieces.append(Segment(v[i] + r * nrm[i], v[j] + r * nrm[i]))
    return ArcBoundaryShape(pieces, tol=max(poly.tol, 1e-12) * 1e3)


def hausdorff_distance(a: ConvexPolygon, b: ConvexPolygon) -> float:
    """Hausdorff distance between the closures; for convex bodies it is
    attained at a vertex of one of them."""
    return float(max(np.max(b.distance(a.vertices)), np.max(a.distance(b.vertices))))


@dataclass(frozen=True)
class SymmetrizationAxis:
    point: tuple[float, float]
    direction: tuple[float, float]

    def __post_init__(self):
        if abs(math.hypot(*self.direction) - 1.0) > 1e-12:
            raise ValueError("axis direction must have unit norm")

    @classmethod
    def through(cls, point, direction) -> "SymmetrizationAxis":
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        return cls((float(point[0]), float(point[1])), (float(d[0]), float(d[1])))

    @classmethod
    def x_axis(cls) -> "SymmetrizationAxis":
        return cls((0.0, 0.0), (1.0, 0.0))


def _chord_extent(s_vert, t_vert, s):
    """Min and max of ``t`` over the polygon slice at abscissa ``s``."""
    s0, s1 = s_vert, np.roll(s_vert, -1)
    t0, t1 = t_vert, np.roll(t_vert, -1)
    lo = np.full(len(s), np.inf)
    hi = np.full(len(s), -np.inf)
    for a, b, ta, tb in zip(s0, s1, t0, t1):
        smin, smax = min(a, b), max(a, b)
        hit = (s >= smin) & (s <= smax)
        if not hit.any():
            continue
        if b == a:
            lo[hit] = np.minimum(lo[hit], min(ta, tb))
            hi[hit] = np.maximum(hi[hit], max(ta, tb))
            continue
        t = ta + (s[hit] - a) / (b - a) * (tb - ta)
        lo[hit] = np.minimum(lo[hit], t)
        hi[hit] = np.maximum(hi[hit], t)
    return lo, hi


def steiner_symmetrize(poly: ConvexPolygon, axis: SymmetrizationAxis, slices: int = 2) -> ConvexPolygon:
    """Replace every chord perpendicular to ``axis`` by a centered chord of the same length."""
    if slices < 2:
        raise ValueError("slices must be at least 2")
    p = np.asarray(axis.point)
    d = np.asarray(axis.direction)
    dn = np.array([-d[1], d[0]])
    rel = poly.vertices - p
    s_vert, t_vert = rel @ d, rel @ dn
    s = np.union1d(s_vert, np.linspace(s_vert.min(), s_vert.max(), slices))
    lo, hi = _chord_extent(s_vert, t_vert, s)
    half = 0.5 * np.maximum(hi - lo, 0.0)
    pts = np.vstack([np.column_stack([s, half]), np.column_stack([s, -half])])
    world = p + pts[:, :1] * d + pts[:, 1:] * dn
    return convex_hull(world, tol=poly.tol)


def convex_hull(points, tol: float | None = None) -> ConvexPolygon:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise DegenerateInputError("need at least 3 points")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateInputError("points are collinear") from exc
    return ConvexPolygon(pts[hull.vertices], tol=tol)


def transform(
    poly: ConvexPolygon,
    scale: float = 1.0,
    rotation: float = 0.0,
    translation=(0.0, 0.0),
) -> ConvexPolygon:
    """Apply ``x -> scale * R(rotation) x + translation``."""
    if not scale > 0:
        raise ValueError("dilation factor must be positive")
    c, s = math.cos(rotation), math.sin(rotation)
    rot = np.array([[c, -s], [s, c]])
    v = scale * poly.vertices @ rot.T + np.asarray(translation, dtype=float)
    return ConvexPolygon(v, tol=poly.tol * scale)
