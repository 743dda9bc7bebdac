"""Cheeger constant and Cheeger set of a convex polygon.

For a planar convex body the Cheeger set is ``C_r ⊕ B_r`` where ``C_r`` is the
inner parallel set at distance ``r`` and ``r`` is the unique root of
``|C_r| = pi r^2``; the Cheeger constant is ``1 / r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError
from .geometry import (
    ArcBoundaryShape,
    ConvexPolygon,
    _shoelace,
    convex_hull,
    inradius,
    minkowski_sum_disc,
    offset_chain,
)


@dataclass(frozen=True)
class ContactPiece:
    """Straight part of the Cheeger boundary lying on edge ``edge`` of the domain."""

    edge: int
    start: np.ndarray
    end: np.ndarray

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))


@dataclass(frozen=True)
class CheegerSolution:
    h1: float
    r: float
    inner_set: ConvexPolygon
    cheeger_set: ArcBoundaryShape
    contact_length: float
    residual: float
    contact: tuple[ContactPiece, ...] = field(default=())
    polygon: ConvexPolygon | None = None

    @property
    def area(self) -> float:
        """Area of the Cheeger set."""
        return self.cheeger_set.area

    def to_json(self) -> dict:
        return {
            "h1": self.h1,
            "r": self.r,
            "inner_set": self.inner_set.vertices.tolist(),
            "contact_length": self.contact_length,
            "residual": self.residual,
            "pieces": self.cheeger_set.to_json(),
        }


def _f(poly: ConvexPolygon, r: float) -> float:
    v, _ = offset_chain(poly, r)
    a = _shoelace(v) if len(v) >= 3 else 0.0
    return a - math.pi * r * r


def cheeger_constant(poly: ConvexPolygon) -> CheegerSolution:
    rin, _ = inradius(poly)
    lo, hi = 0.0, rin
    if poly.area <= 0 or _f(poly, hi) > 0:
        raise ConsistencyError("Cheeger root not bracketed")
    while hi - lo > 1e-13 * rin:
        mid = 0.5 * (lo + hi)
        if _f(poly, mid) > 0:
            lo = mid
        else:
            hi = mid
    r = lo
    v, lab = offset_chain(poly, r)
    inner = ConvexPolygon(v, tol=poly.tol)
    if inner.n != len(v):
        # pruning merged vertices; relabel by matching edge directions
        lab = np.array([int(np.argmax(poly.normals @ nrm)) for nrm in inner.normals])
        v = inner.vertices
    residual = abs(inner.area - math.pi * r * r) / (math.pi * r * r)
    cset = minkowski_sum_disc(inner, r)
    nrm = poly.normals
    pieces = []
    for k in range(len(v)):
        j = int(lab[k])
        a, b = v[k] + r * nrm[j], v[(k + 1) % len(v)] + r * nrm[j]
        pieces.append(ContactPiece(j, a, b))
    # C must sit inside the domain: every inner vertex is at least r from every edge line
    slack = float(np.min(poly.boundary_distance(inner.vertices))) - r
    if slack < -1e3 * poly.tol:
        raise ConsistencyError(f"Cheeger set leaves the domain by {-slack:g}")
    return CheegerSolution(
        h1=1.0 / r,
        r=r,
        inner_set=inner,
        cheeger_set=cset,
        contact_length=float(sum(p.length for p in pieces)),
        residual=residual,
        contact=tuple(pieces),
        polygon=poly,
    )


def cheeger_rectangle(a: float, b: float) -> float:
    if a <= 0 or b <= 0:
        raise ValueError("rectangle sides must be positive")
    return (4 - math.pi) / (a + b - math.sqrt((a - b) ** 2 + math.pi * a * b))


def cheeger_triangle(area: float, perimeter: float) -> float:
    """Closed form for any triangle with the given area and perimeter."""
    if area <= 0 or perimeter <= 0:
        raise ValueError("area and perimeter must be positive")
    if perimeter**2 < 12 * math.sqrt(3) * area * (1 - 1e-12):
        raise ValueError("no triangle has this area and perimeter")
    return (perimeter + math.sqrt(4 * math.pi * area)) / (2 * area)


def cheeger_disc(radius: float) -> float:
    if radius <= 0:
        raise ValueError("radius must be positive")
    return 2.0 / radius


@dataclass
class CheegerValidation:
    passed: bool
    ratio_error: float
    min_trial_ratio: float
    lemma_h1: float | None
    lemma_error: float | None
    witnesses: list = field(default_factory=list)


def _random_interior_points(poly: ConvexPolygon, k: int, rng) -> np.ndarray:
    lo, hi = poly.vertices.min(axis=0), poly.vertices.max(axis=0)
    out = []
    while sum(len(o) for o in out) < k:
        p = rng.uniform(lo, hi, size=(4 * k, 2))
        out.append(p[poly.contains(p, tol=0.0)])
    return np.vstack(out)[:k]


def truncate_outside_cheeger(poly: ConvexPolygon, sol: CheegerSolution, vertex: int | None = None):
    """Cut a corner of ``poly`` by a line that misses the Cheeger set.

    The truncated polygon keeps the same contact set, so it has the same
    Cheeger set and constant.  Returns ``None`` if no corner can be cut.
    """
    order = range(poly.n) if vertex is None else [vertex]
    for i in order:
        d = poly.normals[i - 1] + poly.normals[i]
        d /= np.linalg.norm(d)
        support = float(np.max(sol.inner_set.vertices @ d)) + sol.r
        corner = float(poly.vertices[i] @ d)
        if corner - support <= 1e3 * poly.tol:
            continue
        level = support + 0.25 * (corner - support)
        v = poly.vertices
        s = v @ d - level
        keep = [p for p, si in zip(v, s) if si <= 0]
        for k in range(poly.n):
            a, b = v[k], v[(k + 1) % poly.n]
            sa, sb = s[k], s[(k + 1) % poly.n]
            if (sa < 0) != (sb < 0):
                keep.append(a + sa / (sa - sb) * (b - a))
        return convex_hull(np.array(keep), tol=poly.tol), i
    return None


def extend_outside_cheeger(poly: ConvexPolygon, sol: CheegerSolution):
    """Drop an edge that carries no contact and extend its neighbours.

    The enlarged polygon contains ``poly`` and has the same contact set.
    Returns ``(polygon, removed_edge)`` or ``None`` when no such edge exists.
    """
    touched = {p.edge for p in sol.contact}
    n = poly.n
    if n <= 3:
        return None
    for j in range(n):
        if j in touched:
            continue
        a, b = (j - 1) % n, (j + 1) % n
        na, nb = poly.normals[a], poly.normals[b]
        det = na[0] * nb[1] - na[1] * nb[0]
        if det <= 1e-12:
            continue
        p = np.linalg.solve(np.array([na, nb]), np.array([poly.offsets[a], poly.offsets[b]]))
        if poly.normals[j] @ p <= poly.offsets[j] + 1e3 * poly.tol:
            continue
        return convex_hull(np.vstack([poly.vertices, p]), tol=poly.tol), j
    return None


def validate_cheeger(sol: CheegerSolution, poly: ConvexPolygon, trials: int = 50, seed: int = 0) -> CheegerValidation:
    """Check optimality of ``sol`` against random competitors and the
    same-contact-set invariance."""
    rng = np.random.default_rng(seed)
    witnesses = []
    ratio_error = abs(sol.cheeger_set.perimeter / sol.cheeger_set.area - sol.h1) / sol.h1
    if ratio_error > 1e-8:
        witnesses.append(("ratio", ratio_error))
    rin, _ = inradius(poly)
    best = math.inf
    for t in range(trials):
        if t % 2 == 0:
            k = int(rng.integers(3, 30))
            pts = _random_interior_points(poly, k, rng)
            try:
                cand = convex_hull(pts)
            except ValueError:
                continue
            ratio = cand.perimeter / cand.area
        else:
            rho = float(rng.uniform(0.02, 0.98)) * rin
            v, _ = offset_chain(poly, rho)
            # a degenerate inner set (segment or point) still gives a valid stadium or disc
            a_in = _shoelace(v) if len(v) >= 3 else 0.0
            p_in = float(np.sum(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)))
            ratio = (p_in + 2 * math.pi * rho) / (a_in + rho * p_in + math.pi * rho**2)
        best = min(best, ratio)
        if ratio < sol.h1 - 1e-9:
            witnesses.append(("subset", ratio))
    lemma_h1 = lemma_err = None
    other = extend_outside_cheeger(poly, sol) or truncate_outside_cheeger(poly, sol)
    if other is not None:
        lemma_h1 = cheeger_constant(other[0]).h1
        lemma_err = abs(lemma_h1 - sol.h1)
        if lemma_err > 1e-9 * max(1.0, sol.h1):
            witnesses.append(("same-contact", lemma_h1))
    return CheegerValidation(
        passed=not witnesses,
        ratio_error=ratio_error,
        min_trial_ratio=best,
        lemma_h1=lemma_h1,
        lemma_error=lemma_err,
        witnesses=witnesses,
    )

