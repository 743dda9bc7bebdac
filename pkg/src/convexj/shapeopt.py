"""Shape derivatives, optimality residuals, and minimization of J over polygons."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cheeger import CheegerSolution, cheeger_constant
from .errors import InvalidShapeError, OptimizationError
from .functionals import FunctionalReport, evaluate
from .geometry import ConvexPolygon, convex_hull, transform
from .spectral import SpectralSolution, lambda1_extrapolated, lambda1_fem, richardson


@dataclass(frozen=True)
class PerturbationField:
    """Piecewise-linear boundary field given by one displacement per vertex."""

    polygon: ConvexPolygon
    displacements: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.displacements, dtype=float)
        if d.shape != self.polygon.vertices.shape or not np.all(np.isfinite(d)):
            raise ValueError("need one finite displacement per vertex")
        object.__setattr__(self, "displacements", d)

    def at(self, edge: int, s) -> np.ndarray:
        """Field value at parameter ``s`` in [0, 1] along ``edge``."""
        s = np.asarray(s, dtype=float)[..., None]
        d = self.displacements
        return (1 - s) * d[edge] + s * d[(edge + 1) % len(d)]

    def normal_speed(self, edge: int, s) -> np.ndarray:
        return self.at(edge, s) @ self.polygon.normals[edge]

    def apply(self, t: float) -> ConvexPolygon:
        """``(Id + tV)(Omega)``; raises if convexity or the vertex count is lost."""
        moved = ConvexPolygon(self.polygon.vertices + t * self.displacements)
        if moved.n != self.polygon.n:
            raise InvalidShapeError("perturbation changes the vertex count")
        return moved

    def __add__(self, other: "PerturbationField") -> "PerturbationField":
        return PerturbationField(self.polygon, self.displacements + other.displacements)

    def __mul__(self, c: float) -> "PerturbationField":
        return PerturbationField(self.polygon, c * self.displacements)

    __rmul__ = __mul__

    @classmethod
    def zero(cls, poly):
        return cls(poly, np.zeros_like(poly.vertices))

    @classmethod
    def translation(cls, poly, vector):
        return cls(poly, np.tile(np.asarray(vector, dtype=float), (poly.n, 1)))

    @classmethod
    def dilation(cls, poly, center=None):
        c = poly.centroid if center is None else np.asarray(center, dtype=float)
        return cls(poly, poly.vertices - c)

    @classmethod
    def from_function(cls, poly, f):
        return cls(poly, np.array([f(v) for v in poly.vertices], dtype=float))

    @classmethod
    def normal_offset(cls, poly, speeds=None):
        """Moves edge ``i`` parallel to itself with normal speed ``speeds[i]`` (default 1)."""
        w = np.ones(poly.n) if speeds is None else np.asarray(speeds, dtype=float)
        d = np.empty_like(poly.vertices)
        for i in range(poly.n):
            a = np.array([poly.normals[i - 1], poly.normals[i]])
            d[i] = np.linalg.solve(a, [w[i - 1], w[i]])
        return cls(poly, d)

    @classmethod
    def edge_shift(cls, poly, edge: int):
        """Pushes one edge outward at unit speed; the others slide along their lines."""
        w = np.zeros(poly.n)
        w[edge] = 1.0
        return cls.normal_offset(poly, w)

    @classmethod
    def vertex_move(cls, poly, vertex: int, direction):
        d = np.zeros_like(poly.vertices)
        d[vertex] = direction
        return cls(poly, d)


@dataclass(frozen=True)
class ShapeGradient:
    dh1: float
    dlambda1: float
    dJ: float
    criticality_gap: float
    h1: float
    lambda1: float


def _check(poly, V, sol):
    if V.polygon != poly:
        raise ValueError("field is defined on a different polygon")
    if sol.polygon is not None and sol.polygon != poly:
        raise ValueError("solution was computed on a different polygon")


def dh1(poly: ConvexPolygon, V: PerturbationField, sol: CheegerSolution) -> float:
    """Shape derivative of the Cheeger constant.

    Polygon edges are flat, so only ``-h1 <V, nu>`` survives on the contact
    pieces; ``V . nu`` is linear along each piece and the midpoint rule is exact.
    """
    _check(poly, V, sol)
    total = 0.0
    for piece in sol.contact:
        j = piece.edge
        mid = 0.5 * (piece.start + piece.end)
        s = (mid - poly.vertices[j]) @ poly.edges[j] / poly.edge_lengths[j] ** 2
        total += piece.length * float(V.normal_speed(j, s))
    return -sol.h1 * total / sol.area


def dlambda1(poly: ConvexPolygon, V: PerturbationField, sol: SpectralSolution, method: str = "boundary") -> float:
    """Shape derivative of the first eigenvalue.

    ``"boundary"`` is Hadamard's formula ``-int |u_n|^2 <V, nu>`` by edgewise
    midpoint quadrature of the recovered flux.  ``"volume"`` is the
    distributed form ``int (|grad u|^2 - lambda u^2) div V - 2 grad u . DV grad u``
    with V carried into the interior by the mesh construction; it equals the
    exact derivative of the discrete eigenvalue.
    """
    _check(poly, V, sol)
    if method == "volume":
        return _dlambda1_volume(poly, V, sol)
    if method != "boundary":
        raise ValueError(f"unknown method {method!r}")
    mesh = sol.mesh
    mid = mesh.boundary_midpoints()
    par = mesh.boundary_parent
    s = np.einsum("bk,bk->b", mid - poly.vertices[par], poly.edges[par]) / poly.edge_lengths[par] ** 2
    d = V.displacements
    vel = (1 - s)[:, None] * d[par] + s[:, None] * d[(par + 1) % poly.n]
    w = np.einsum("bk,bk->b", vel, poly.normals[par])
    return -float(np.sum(sol.normal_trace**2 * w * mesh.boundary_lengths()))


def _centroid(v: np.ndarray):
    w = np.roll(v, -1, axis=0)
    cross = v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]
    a = 0.5 * cross.sum()
    return ((v + w) * cross[:, None]).sum(axis=0) / (6 * a)


def _dlambda1_volume(poly, V, sol) -> float:
    mesh = sol.mesh
    h = 1e-30
    # complex step gives the centroid velocity to rounding
    dc = _centroid(poly.vertices + 1j * h * V.displacements).imag / h
    w = mesh.embedding @ np.vstack([V.displacements, dc])
    x = mesh.vertices[mesh.triangles]
    d1, d2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    # rows of the inverse edge matrix give the gradients of the hat functions 1, 2
    det = 2 * area
    inv = np.stack([np.column_stack([d2[:, 1], -d2[:, 0]]), np.column_stack([-d1[:, 1], d1[:, 0]])], axis=1) / det[:, None, None]
    u = sol.eigenvector[mesh.triangles]
    grad = (u[:, 1] - u[:, 0])[:, None] * inv[:, 0] + (u[:, 2] - u[:, 0])[:, None] * inv[:, 1]
    wt = w[mesh.triangles]
    dv = np.einsum("tk,tl->tkl", wt[:, 1] - wt[:, 0], inv[:, 0]) + np.einsum("tk,tl->tkl", wt[:, 2] - wt[:, 0], inv[:, 1])
    div = dv[:, 0, 0] + dv[:, 1, 1]
    # P1 mass of u on each triangle: area/12 * (sum u^2 + (sum u)^2)
    mass = area / 12 * ((u**2).sum(axis=1) + u.sum(axis=1) ** 2)
    stiff = area * ((grad**2).sum(axis=1) * div - 2 * np.einsum("tk,tkl,tl->t", grad, dv, grad))
    return float(stiff.sum() - sol.lambda1 * (mass * div).sum())


def dJ(poly, V, cheeger_sol: CheegerSolution, spectral_sol: SpectralSolution, method: str = "boundary") -> ShapeGradient:
    dh = dh1(poly, V, cheeger_sol)
    dl = dlambda1(poly, V, spectral_sol, method)
    return _quotient(spectral_sol.lambda1, cheeger_sol.h1, dl, dh)


def _quotient(lam, h, dl, dh) -> ShapeGradient:
    dj = (dl * h**2 - 2 * lam * h * dh) / h**4
    gap = abs(dl - 2 * lam / h * dh) / lam
    return ShapeGradient(dh1=dh, dlambda1=dl, dJ=dj, criticality_gap=gap, h1=h, lambda1=lam)


def shape_gradient(poly, V, refinement: int = 5, extrapolate: bool = True, method: str = "boundary") -> ShapeGradient:
    """``dJ`` with lambda and its derivative Richardson-combined over two levels."""
    cs = cheeger_constant(poly)
    coarse = lambda1_fem(poly, refinement)
    if not extrapolate:
        return dJ(poly, V, cs, coarse, method)
    fine = lambda1_fem(poly, refinement + 1)
    lam = richardson(coarse.lambda1, fine.lambda1)
    dl = richardson(dlambda1(poly, V, coarse, method), dlambda1(poly, V, fine, method))
    return _quotient(lam, cs.h1, dl, dh1(poly, V, cs))


def J_discrete(poly: ConvexPolygon, refinement: int, extrapolate: bool = False) -> float:
    if extrapolate:
        lam = lambda1_extrapolated(poly, refinement)
    else:
        lam = lambda1_fem(poly, refinement).lambda1
    return lam / cheeger_constant(poly).h1 ** 2


@dataclass
class FDReport:
    dJ: float
    steps: list = field(default_factory=list)
    fd: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    orders: list = field(default_factory=list)
    best_step: float = math.nan
    best_error: float = math.nan


def fd_validate(
    poly,
    V,
    steps=(1e-2, 1e-3, 1e-4),
    refinement: int = 5,
    extrapolate: bool = True,
    method: str = "boundary",
    gradient: ShapeGradient | None = None,
) -> FDReport:
    """Compare ``dJ`` against central differences of J computed the same way.

    A step whose perturbed polygons lose convexity is halved until usable;
    ``steps`` in the report are the ones actually taken.
    """
    steps = list(steps)
    if any(t <= 0 for t in steps) or steps != sorted(steps, reverse=True):
        raise ValueError("steps must be positive and decreasing")
    if gradient is None:
        gradient = shape_gradient(poly, V, refinement, extrapolate, method)
    report = FDReport(dJ=gradient.dJ)
    for t in steps:
        for _ in range(30):
            try:
                plus, minus = V.apply(t), V.apply(-t)
                break
            except InvalidShapeError:
                t *= 0.5
        else:
            continue
        fd = (J_discrete(plus, refinement, extrapolate) - J_discrete(minus, refinement, extrapolate)) / (2 * t)
        report.steps.append(t)
        report.fd.append(fd)
        report.errors.append(abs(gradient.dJ - fd) / max(abs(fd), 1e-8))
    diffs = [abs(f - gradient.dJ) for f in report.fd]
    for i in range(1, len(diffs)):
        if diffs[i] > 0 and diffs[i - 1] > 0:
            report.orders.append(math.log(diffs[i - 1] / diffs[i]) / math.log(report.steps[i - 1] / report.steps[i]))
    if report.errors:
        k = int(np.argmin(report.errors))
        report.best_step, report.best_error = report.steps[k], report.errors[k]
    return report


@dataclass(frozen=True)
class OptimalityResidual:
    points: np.ndarray
    residual: np.ndarray
    curvature: np.ndarray
    trace_squared: np.ndarray
    a: float
    b: float
    linf: float
    l2: float
    level: float

    @property
    def empty(self) -> bool:
        return len(self.points) == 0


def vertex_curvature(poly: ConvexPolygon) -> np.ndarray:
    """Curvature of the circle through each vertex and its two neighbours."""
    v = poly.vertices
    p, q = np.roll(v, 1, axis=0), np.roll(v, -1, axis=0)
    a = np.linalg.norm(v - p, axis=1)
    b = np.linalg.norm(q - v, axis=1)
    c = np.linalg.norm(q - p, axis=1)
    cross = (v - p)[:, 0] * (q - v)[:, 1] - (v - p)[:, 1] * (q - v)[:, 0]
    return 2.0 * cross / (a * b * c)


#: polygons with at least this many vertices are read as samples of a smooth curve
SMOOTH_VERTEX_COUNT = 32


def optimality_residual(
    poly, cheeger_sol: CheegerSolution, spectral_sol: SpectralSolution, curvature: str = "auto"
) -> OptimalityResidual:
    """``|u_n|^2 - (a - b kappa)`` on the contact set, where criticality of J
    requires ``|u_n|^2 = 2 lambda (h - kappa) / (h |C|)``.

    ``curvature="flat"`` uses the true polygon value kappa = 0 on edges;
    ``"discrete"`` interpolates three-point vertex curvatures, which is what a
    many-sided approximation of a smooth boundary needs.  ``"auto"`` picks
    ``"discrete"`` from ``SMOOTH_VERTEX_COUNT`` vertices on.
    """
    if curvature == "auto":
        curvature = "discrete" if poly.n >= SMOOTH_VERTEX_COUNT else "flat"
    if curvature not in ("flat", "discrete"):
        raise ValueError(f"unknown curvature mode {curvature!r}")
    h, lam, c_area = cheeger_sol.h1, spectral_sol.lambda1, cheeger_sol.area
    a = 2 * lam / c_area
    b = 2 * lam / (h * c_area)
    mesh = spectral_sol.mesh
    mid = mesh.boundary_midpoints()
    par = mesh.boundary_parent
    kv = vertex_curvature(poly) if curvature == "discrete" else np.zeros(poly.n)
    keep = np.zeros(len(mid), dtype=bool)
    for piece in cheeger_sol.contact:
        on = par == piece.edge
        if not on.any():
            continue
        seg = piece.end - piece.start
        t = (mid[on] - piece.start) @ seg / (seg @ seg)
        keep[np.flatnonzero(on)[(t >= 0) & (t <= 1)]] = True
    idx = np.flatnonzero(keep)
    p = par[idx]
    s = np.einsum("bk,bk->b", mid[idx] - poly.vertices[p], poly.edges[p]) / poly.edge_lengths[p] ** 2
    kappa = (1 - s) * kv[p] + s * kv[(p + 1) % poly.n]
    un2 = spectral_sol.normal_trace[idx] ** 2
    res = un2 - (a - b * kappa)
    if len(idx) == 0:
        return OptimalityResidual(mid[:0], res, kappa, un2, a, b, math.nan, math.nan, math.nan)
    lengths = mesh.boundary_lengths()[idx]
    return OptimalityResidual(
        points=mid[idx],
        residual=res,
        curvature=kappa,
        trace_squared=un2,
        a=a,
        b=b,
        linf=float(np.max(np.abs(res))),
        l2=float(math.sqrt(np.sum(res**2 * lengths) / np.sum(lengths))),
        level=float(np.sum(un2 * lengths) / np.sum(lengths)),
    )


# --- minimization -----------------------------------------------------------


@dataclass
class OptimizerConfig:
    seed: int = 0
    max_iter: int = 600
    refinement: int = 3
    extrapolate: bool = True
    initial_step: float = 0.15
    xatol: float = 1e-5
    fatol: float = 1e-9
    restarts: int = 2
    start: np.ndarray | None = None
    #: accuracy of the closing evaluation of the best polygon; None skips it
    final_accuracy: str | None = "precise"


@dataclass
class MinimizeResult:
    polygon: ConvexPolygon
    J: float
    h1: float
    lambda1: float
    trace: list
    evaluations: int
    report: FunctionalReport | None = None


def gauge_fix(poly: ConvexPolygon) -> ConvexPolygon:
    """Unit area, centroid at the origin, first vertex on the positive x-axis."""
    p = transform(poly, translation=-poly.centroid)
    p = transform(p, scale=1.0 / math.sqrt(p.area))
    x, y = p.vertices[0]
    return transform(p, rotation=-math.atan2(y, x))


def _similarity(points: np.ndarray):
    """Similarity taking the hull of ``points`` to the gauge; applied to whole simplexes."""
    hull = convex_hull(points)
    c = hull.centroid
    s = 1.0 / math.sqrt(hull.area)
    x, y = points[0] - c
    ang = -math.atan2(y, x)
    rot = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])

    def apply(pts):
        return s * (pts - c) @ rot.T

    return apply


def _random_start(n: int, rng) -> np.ndarray:
    th = np.sort(rng.uniform(0, 2 * math.pi, n))
    # keep the angular gaps below pi so the points stay in convex position
    th = 0.5 * th + 0.5 * 2 * math.pi * np.arange(n) / n
    rad = 1.0 + 0.3 * rng.uniform(-1, 1, n)
    return np.column_stack([rad * np.cos(th), rad * np.sin(th)])


def minimize_J(n_vertices: int, config: OptimizerConfig | None = None) -> MinimizeResult:
    """Nelder-Mead over vertex coordinates with hull repair and gauge fixing."""
    if n_vertices < 3:
        raise ValueError("need at least 3 vertices")
    cfg = config or OptimizerConfig()
    rng = np.random.default_rng(cfg.seed)
    n = n_vertices
    dim = 2 * n
    info: dict[bytes, tuple] = {}
    evals = 0

    def objective(x: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        try:
            poly = convex_hull(x.reshape(n, 2))
            poly = gauge_fix(poly)
            if cfg.extrapolate:
                lam = lambda1_extrapolated(poly, cfg.refinement)
            else:
                lam = lambda1_fem(poly, cfg.refinement).lambda1
            h = cheeger_constant(poly).h1
        except (ValueError, RuntimeError):
            return math.inf
        J = lam / h**2
        info[x.tobytes()] = (poly, h, lam)
        return J

    x0 = _random_start(n, rng) if cfg.start is None else np.asarray(cfg.start, dtype=float)
    x0 = _similarity(x0)(x0).ravel()
    # adaptive coefficients for the simplex moves
    alpha, gamma = 1.0, 1.0 + 2.0 / dim
    rho, sigma = 0.75 - 1.0 / (2 * dim), 1.0 - 1.0 / dim
    trace: list[dict] = []
    it = 0
    best_x, best_f = x0, objective(x0)
    for restart in range(cfg.restarts + 1):
        sim = np.vstack([best_x] + [best_x + cfg.initial_step * e for e in np.eye(dim)])
        f = np.array([best_f] + [objective(x) for x in sim[1:]])
        while it < cfg.max_iter:
            order = np.argsort(f, kind="stable")
            sim, f = sim[order], f[order]
            if not np.isfinite(f[0]):
                raise OptimizationError("all candidates are degenerate", trace)
            spread = float(np.max(np.abs(sim[1:] - sim[0])))
            poly, h, lam = info[sim[0].tobytes()]
            trace.append(
                {
                    "iter": it,
                    "J": float(f[0]),
                    "h1": h,
                    "lambda1": lam,
                    "vertices": poly.vertices.tolist(),
                    "simplex_spread": spread,
                }
            )
            it += 1
            if spread <= cfg.xatol and f[-1] - f[0] <= cfg.fatol:
                break
            xbar = sim[:-1].mean(axis=0)
            xr = xbar + alpha * (xbar - sim[-1])
            fr = objective(xr)
            shrink = False
            if fr < f[0]:
                xe = xbar + gamma * (xr - xbar)
                fe = objective(xe)
                sim[-1], f[-1] = (xe, fe) if fe < fr else (xr, fr)
            elif fr < f[-2]:
                sim[-1], f[-1] = xr, fr
            elif fr < f[-1]:
                xc = xbar + rho * (xr - xbar)
                fc = objective(xc)
                if fc <= fr:
                    sim[-1], f[-1] = xc, fc
                else:
                    shrink = True
            else:
                xc = xbar + rho * (sim[-1] - xbar)
                fc = objective(xc)
                if fc < f[-1]:
                    sim[-1], f[-1] = xc, fc
                else:
                    shrink = True
            if shrink:
                for i in range(1, dim + 1):
                    sim[i] = sim[0] + sigma * (sim[i] - sim[0])
                    f[i] = objective(sim[i])
            # renormalize the whole simplex by the best vertex's gauge
            k = int(np.argmin(f))
            g = _similarity(sim[k].reshape(n, 2))
            new = np.array([g(x.reshape(n, 2)).ravel() for x in sim])
            for x_old, x_new in zip(sim, new):
                if x_old.tobytes() in info:
                    poly, h, lam = info[x_old.tobytes()]
                    info[x_new.tobytes()] = (poly, h, lam)
            sim = new
        k = int(np.argmin(f))
        best_x, best_f = sim[k], f[k]
        if it >= cfg.max_iter:
            break
    if not np.isfinite(best_f):
        raise OptimizationError("no valid polygon found", trace)
    poly, h, lam = info[best_x.tobytes()]
    report = evaluate(poly, cfg.final_accuracy) if cfg.final_accuracy else None
    return MinimizeResult(
        polygon=poly, J=float(best_f), h1=h, lambda1=lam, trace=trace, evaluations=evals, report=report
    )
