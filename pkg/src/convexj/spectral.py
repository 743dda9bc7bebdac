"""First Dirichlet eigenvalue of the Laplacian by P1 finite elements."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MeshTooCoarseError, SolverError
from .geometry import ConvexPolygon


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_flags: np.ndarray
    boundary_edges: np.ndarray
    boundary_normals: np.ndarray
    boundary_parent: np.ndarray
    boundary_triangles: np.ndarray
    #: sparse weights expressing every node in the polygon vertices and the centroid
    embedding: sp.csr_matrix | None = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def triangle_areas(self) -> np.ndarray:
        x = self.vertices[self.triangles]
        d1, d2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def boundary_lengths(self) -> np.ndarray:
        p = self.vertices[self.boundary_edges]
        return np.linalg.norm(p[:, 1] - p[:, 0], axis=1)

    def boundary_midpoints(self) -> np.ndarray:
        return self.vertices[self.boundary_edges].mean(axis=1)

    def to_json(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary": self.boundary_flags.tolist(),
        }


def _edge_keys(a, b, n):
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    return lo.astype(np.int64) * n + hi


def _refine(points, tris, bedges, emb):
    n = len(points)
    e = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    keys = _edge_keys(e[:, 0], e[:, 1], n)
    uniq, inv = np.unique(keys, return_inverse=True)
    mid = n + inv.reshape(3, -1).T
    lo, hi = uniq // n, uniq % n
    points = np.vstack([points, 0.5 * (points[lo] + points[hi])])
    emb = sp.vstack([emb, 0.5 * (emb[lo] + emb[hi])]).tocsr()
    a, b, c = tris.T
    ab, bc, ca = mid.T
    tris = np.vstack(
        [
            np.column_stack([a, ab, ca]),
            np.column_stack([ab, b, bc]),
            np.column_stack([ca, bc, c]),
            np.column_stack([ab, bc, ca]),
        ]
    )
    m = n + np.searchsorted(uniq, _edge_keys(bedges[:, 0], bedges[:, 1], n))
    split = np.empty((2 * len(bedges), 3), dtype=np.int64)
    split[0::2] = np.column_stack([bedges[:, 0], m, bedges[:, 2]])
    split[1::2] = np.column_stack([m, bedges[:, 1], bedges[:, 2]])
    return points, tris, split, emb


def triangulate(poly: ConvexPolygon, refinement: int = 0) -> TriangleMesh:
    """Fan from the area centroid followed by ``refinement`` rounds of
    midpoint subdivision."""
    if refinement < 0:
        raise ValueError("refinement must be nonnegative")
    n = poly.n
    points = np.vstack([poly.vertices, poly.centroid])
    idx = np.arange(n)
    tris = np.column_stack([idx, (idx + 1) % n, np.full(n, n)])
    bedges = np.column_stack([idx, (idx + 1) % n, idx]).astype(np.int64)
    emb = sp.identity(n + 1, format="csr")
    for _ in range(refinement):
        points, tris, bedges, emb = _refine(points, tris, bedges, emb)

    nv = len(points)
    flags = np.zeros(nv, dtype=bool)
    flags[bedges[:, :2].ravel()] = True
    # triangle owning each boundary edge
    e = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    tri_of = np.tile(np.arange(len(tris)), 3)
    keys = _edge_keys(e[:, 0], e[:, 1], nv)
    order = np.argsort(keys, kind="stable")
    bkeys = _edge_keys(bedges[:, 0], bedges[:, 1], nv)
    pos = np.searchsorted(keys[order], bkeys)
    btri = tri_of[order[pos]]
    return TriangleMesh(
        vertices=points,
        triangles=tris,
        boundary_flags=flags,
        boundary_edges=bedges[:, :2].copy(),
        boundary_normals=poly.normals[bedges[:, 2]],
        boundary_parent=bedges[:, 2].copy(),
        boundary_triangles=btri,
        embedding=emb,
    )


def _gradients(mesh: TriangleMesh):
    """Per-triangle gradients of the three hat functions and triangle areas."""
    x = mesh.vertices[mesh.triangles]
    area = mesh.triangle_areas()
    opp = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    g = np.stack([-opp[..., 1], opp[..., 0]], axis=-1) / (2.0 * area[:, None, None])
    return g, area


def assemble(mesh: TriangleMesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Global P1 stiffness and consistent mass matrices."""
    g, area = _gradients(mesh)
    ke = np.einsum("tik,tjk->tij", g, g) * area[:, None, None]
    me = ((np.ones((3, 3)) + np.eye(3)) / 12.0)[None] * area[:, None, None]
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_vertices
    k = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    m = sp.coo_matrix((me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return k, m


@dataclass(frozen=True)
class SpectralSolution:
    lambda1: float
    eigenvector: np.ndarray
    mesh: TriangleMesh
    refinement_level: int
    normal_trace: np.ndarray
    polygon: ConvexPolygon
    iterations: int = 0

    def rayleigh_quotient(self) -> float:
        k, m = assemble(self.mesh)
        u = self.eigenvector
        return float(u @ (k @ u)) / float(u @ (m @ u))


MAX_ITER = 1000
EIG_RTOL = 1e-12


def _smallest_eigenpair(k: sp.csr_matrix, m: sp.csr_matrix) -> tuple[float, np.ndarray, int]:
    """Smallest eigenpair of ``K u = lam M u``.

    A shift-invert Lanczos pass supplies the start vector; inverse power
    iteration with the same sparse factorization then runs until the
    eigenvalue stagnates.
    """
    try:
        lu = spla.splu(k.tocsc(), permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SolverError(f"factorization failed: {exc}") from exc
    n = k.shape[0]
    x = np.ones(n)
    if n > 3:
        op = spla.LinearOperator((n, n), matvec=lu.solve, dtype=float)
        try:
            _, vec = spla.eigsh(k, k=1, M=m, sigma=0.0, OPinv=op, v0=x, tol=1e-14)
            x = vec[:, 0]
        except spla.ArpackError:
            pass
    x = x / math.sqrt(x @ (m @ x))
    lam = float(x @ (k @ x))
    for it in range(1, MAX_ITER + 1):
        y = lu.solve(m @ x)
        y /= math.sqrt(y @ (m @ y))
        new = float(y @ (k @ y))
        x = y
        if abs(new - lam) <= EIG_RTOL * abs(new):
            lam = new
            break
        lam = new
    else:
        raise SolverError("inverse iteration did not stagnate")
    if not (lam > 0 and np.isfinite(lam)):
        raise SolverError(f"nonpositive eigenvalue {lam}")
    return lam, x, it


def normal_derivative_trace(sol_or_mesh, u: np.ndarray | None = None) -> np.ndarray:
    """Outward normal derivative on every boundary edge from the gradient on
    the adjacent triangle (first order; ``normal_trace`` holds the sharper flux)."""
    if u is None:
        mesh, u = sol_or_mesh.mesh, sol_or_mesh.eigenvector
    else:
        mesh = sol_or_mesh
    g, _ = _gradients(mesh)
    t = mesh.boundary_triangles
    grad = np.einsum("bi,bik->bk", u[mesh.triangles[t]], g[t])
    return np.einsum("bk,bk->b", grad, mesh.boundary_normals)


def boundary_flux(mesh: TriangleMesh, u: np.ndarray, lam: float) -> np.ndarray:
    """Consistent normal flux at the boundary nodes, in cycle order.

    The residual of the unconstrained equations at a boundary node equals the
    flux tested against that node's hat function; inverting the boundary mass
    matrix recovers a continuous piecewise-linear ``u_n`` that converges an
    order faster than the one-sided gradient trace.
    """
    k, m = assemble(mesh)
    nodes = mesh.boundary_edges[:, 0]
    r = (k @ u - lam * (m @ u))[nodes]
    nb = len(nodes)
    ln = mesh.boundary_lengths()
    i = np.arange(nb)
    j = (i + 1) % nb
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([i, j, j, i])
    vals = np.concatenate([ln / 3, ln / 3, ln / 6, ln / 6])
    mb = sp.csc_matrix((vals, (rows, cols)), shape=(nb, nb))
    return spla.spsolve(mb, r)


@lru_cache(maxsize=16)
def lambda1_fem(poly: ConvexPolygon, refinement: int = 4) -> SpectralSolution:
    mesh = triangulate(poly, refinement)
    interior = np.flatnonzero(~mesh.boundary_flags)
    if len(interior) < 1:
        raise MeshTooCoarseError("mesh has no interior vertices")
    k, m = assemble(mesh)
    ki = k[interior][:, interior]
    mi = m[interior][:, interior]
    lam, x, its = _smallest_eigenpair(ki, mi)
    if x.sum() < 0:
        x = -x
    u = np.zeros(mesh.n_vertices)
    u[interior] = x
    u.setflags(write=False)
    flux = boundary_flux(mesh, u, lam)
    trace = 0.5 * (flux + np.roll(flux, -1))
    trace.setflags(write=False)
    return SpectralSolution(
        lambda1=lam,
        eigenvector=u,
        mesh=mesh,
        refinement_level=refinement,
        normal_trace=trace,
        polygon=poly,
        iterations=its,
    )


def richardson(coarse: float, fine: float) -> float:
    """Second-order Richardson extrapolation for mesh-size ratio 2."""
    return (4.0 * fine - coarse) / 3.0


def lambda1_extrapolated(poly: ConvexPolygon, base_refinement: int = 4) -> float:
    if base_refinement < 3:
        raise ValueError("base_refinement must be at least 3")
    coarse = lambda1_fem(poly, base_refinement).lambda1
    fine = lambda1_fem(poly, base_refinement + 1).lambda1
    value = richardson(coarse, fine)
    if not value < min(coarse, fine):
        raise SolverError("extrapolated eigenvalue is not below the discrete ones")
    return value


def bessel_j0(x: float) -> float:
    """J0 by its power series; adequate for the first zero."""
    term, total, k = 1.0, 1.0, 0
    q = -(x * x) / 4.0
    while abs(term) > 1e-17 * max(1.0, abs(total)):
        k += 1
        term *= q / (k * k)
        total += term
    return total


@lru_cache(maxsize=None)
def bessel_j0_first_zero() -> float:
    lo, hi = 2.0, 3.0
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if bessel_j0(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lambda1_rectangle(a: float, b: float) -> float:
    if a <= 0 or b <= 0:
        raise ValueError("sides must be positive")
    return math.pi**2 * (1 / a**2 + 1 / b**2)


def lambda1_equilateral(edge: float) -> float:
    if edge <= 0:
        raise ValueError("edge must be positive")
    perim = 3 * edge
    area = math.sqrt(3) * edge**2 / 4
    return math.pi**2 * perim**2 / (9 * area**2)


def lambda1_disc(radius: float) -> float:
    if radius <= 0:
        raise ValueError("radius must be positive")
    return bessel_j0_first_zero() ** 2 / radius**2


def lambda1_interval(a: float, b: float) -> float:
    if not b > a:
        raise ValueError("need b > a")
    return math.pi**2 / (b - a) ** 2


_CLOSED_FORMS = {
    "rectangle": lambda1_rectangle,
    "equilateral": lambda1_equilateral,
    "disc": lambda1_disc,
    "interval": lambda1_interval,
}


def lambda1_closed_form(kind: str, *dims: float) -> float:
    """Dispatch to ``rectangle(a, b)``, ``equilateral(edge)``, ``disc(R)`` or ``interval(a, b)``."""
    try:
        fn = _CLOSED_FORMS[kind]
    except KeyError:
        raise ValueError(f"no closed form for {kind!r}") from None
    return fn(*dims)


def rellich_check(sol: SpectralSolution) -> float:
    """Relative gap between ``lambda1`` and half the boundary integral of
    ``|u_n|^2 <x, nu>``."""
    mesh = sol.mesh
    xnu = np.einsum("bk,bk->b", mesh.boundary_midpoints(), mesh.boundary_normals)
    value = 0.5 * float(np.sum(sol.normal_trace**2 * xnu * mesh.boundary_lengths()))
    return abs(value - sol.lambda1) / sol.lambda1
