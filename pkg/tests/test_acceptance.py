"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (bypassing output capture)
before asserting, so ``pytest -v`` logs show every verdict.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from convexj.cheeger import cheeger_constant, cheeger_rectangle
from convexj.cli import elongate_rows, table2_rows
from convexj.functionals import evaluate, interval_J
from convexj.geometry import SymmetrizationAxis, steiner_symmetrize, transform
from convexj.shapeopt import (
    J_discrete,
    PerturbationField,
    dh1,
    dJ,
    dlambda1,
    fd_validate,
)
from convexj.shapes import named_shapes, random_corpus, rectangle
from convexj.spectral import lambda1_extrapolated, lambda1_fem, lambda1_rectangle, rellich_check

pytestmark = pytest.mark.slow

INV_J01_SQ = 0.172915069030645
PI2_16 = math.pi**2 / 16
PI2_4 = math.pi**2 / 4


@pytest.fixture
def verdict(capsys):
    def report(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        return ok

    return report


@pytest.fixture(scope="module")
def corpus_reports(corpus):
    t0 = time.perf_counter()
    reps = [evaluate(p, "fast") for p in corpus]
    return reps, time.perf_counter() - t0


def test_criterion_01_regular_polygon_table(verdict):
    t0 = time.perf_counter()
    rows = {r["n"]: r for r in table2_rows("precise")}
    elapsed = time.perf_counter() - t0
    bad = []
    for n in ("3", "4", "5", "6", "8"):
        r = rows[n]
        if abs(r["h1"] - r["h1_paper"]) > 1e-4:
            bad.append(f"h1[{n}]")
        if abs(r["lambda1_rel_dev"]) > 2e-3:
            bad.append(f"lambda1[{n}]")
        if abs(r["J_rel_dev"]) > 3e-3:
            bad.append(f"J[{n}]")
    d = rows["inf"]
    if abs(d["h1"] - 2.0) > 1e-3:
        bad.append("h1[disc]")
    if abs(d["lambda1"] / 5.7832 - 1) > 3e-3:
        bad.append("lambda1[disc]")
    if abs(d["J_rel_dev"]) > 5e-3:
        bad.append("J[disc]")
    worst = max(abs(r["J_rel_dev"]) for r in rows.values())
    ok = verdict(1, not bad, f"max |J rel dev| {worst:.2e}, {elapsed:.0f} s" + (f", out of tolerance: {bad}" if bad else ""))
    assert ok


def test_criterion_02_J_bounds_on_corpus(verdict, corpus_reports):
    reps, elapsed = corpus_reports
    named = [evaluate(p, "precise") for p in named_shapes().values()]
    Js = [r.J for r in reps + named]
    ok = all(PI2_16 - 1e-6 <= J < PI2_4 - 1e-9 for J in Js)
    verdict(2, ok, f"{len(Js)} shapes, J in [{min(Js):.5f}, {max(Js):.5f}], corpus {elapsed:.0f} s")
    assert ok


def test_criterion_03_elongation(verdict):
    ds = [1, 2, 5, 10, 50, 100, 1000]
    rows = elongate_rows(ds, "rectangle", "precise")
    J = {int(r["d"]): r["J"] for r in rows}
    inc = all(J[b] > J[a] for a, b in zip(ds, ds[1:]))
    window = 2.42 <= J[100] <= 2.44
    gap = PI2_4 - J[1000]
    fem = max(abs(r["fem_rel_dev"]) for r in rows if r["d"] <= 5)
    ok = inc and window and gap <= 4e-3 and fem <= 5e-3
    verdict(3, ok, f"increasing={inc}, J(100)={J[100]:.5f}, gap(1000)={gap:.2e}, FEM dev {fem:.1e}")
    assert ok


def test_criterion_04_interval_identity(verdict):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        a = float(rng.uniform(-1e3, 1e3))
        b = a + float(np.exp(rng.uniform(-8, 8)))
        worst = max(worst, abs(interval_J(a, b) - PI2_4))
    ok = worst <= 1e-12
    verdict(4, ok, f"max |interval_J - pi^2/4| = {worst:.1e}")
    assert ok


def test_criterion_05_disc_criticality(verdict, disc256, disc_fine):
    cs = cheeger_constant(disc256)
    fields = {
        "normal": PerturbationField.normal_offset(disc256),
        "polynomial": PerturbationField.from_function(disc256, lambda x: np.array([x[0] * (1 + 0.3 * x[1]), x[1] + 0.5 * x[0] ** 2])),
        "trigonometric": PerturbationField.from_function(disc256, lambda x: np.array([math.sin(3 * x[1]) + x[0], math.cos(2 * x[0]) + 0.5 * x[1]])),
    }
    gaps = {k: dJ(disc256, V, cs, disc_fine).criticality_gap for k, V in fields.items()}
    # |u_n|^2 = 2 lambda (h - kappa) / (h |C|) with h = 2, kappa = 1, |C| = pi, in units of lambda / pi
    h, kappa = Fraction(2), Fraction(1)
    coefficient = 2 * (h - kappa) / h
    ok = max(gaps.values()) <= 5e-2 and coefficient == 1
    verdict(5, ok, "gaps " + ", ".join(f"{k} {v:.1e}" for k, v in gaps.items()) + f"; identity coefficient {coefficient}")
    assert ok


def _derivative_pairs():
    rng = np.random.default_rng(6)
    shapes = random_corpus(10, seed=6)
    pairs = []
    for poly in shapes:
        scale = math.sqrt(poly.area)
        pairs.append((poly, PerturbationField(poly, 0.3 * scale * rng.normal(size=poly.vertices.shape))))
    return pairs


def test_criterion_06_shape_derivatives(verdict):
    errs, vol_errs = [], []
    for poly, V in _derivative_pairs():
        errs.append(fd_validate(poly, V, refinement=5).best_error)
        vol_errs.append(fd_validate(poly, V, refinement=3, method="volume").best_error)
    trans = []
    for poly, _ in _derivative_pairs():
        T = PerturbationField.translation(poly, (0.6, -0.8))
        trans.append(abs(dh1(poly, T, cheeger_constant(poly))))
        trans.append(abs(dlambda1(poly, T, lambda1_fem(poly, 5), "volume")))
    sq = rectangle(1, 1)
    T = PerturbationField.translation(sq, (1.0, 0.0))
    rep = fd_validate(sq, T, refinement=4)
    trans += [abs(rep.dJ)] + [abs(f) for f in rep.fd]
    boundary_resid = max(
        abs(dlambda1(p, PerturbationField.translation(p, (0.6, -0.8)), lambda1_fem(p, 5))) / lambda1_fem(p, 5).lambda1
        for p, _ in _derivative_pairs()
    )
    ok = max(errs) <= 5e-2 and max(trans) <= 1e-8
    verdict(
        6,
        ok,
        f"boundary route max FD error {max(errs):.1e}, volume route {max(vol_errs):.1e}, "
        f"translation max {max(trans):.1e} (boundary-route translation residual {boundary_resid:.1e} lambda, not asserted)",
    )
    assert ok


def test_criterion_07_square_best_rectangle(verdict):
    aspects = np.exp(np.linspace(math.log(0.2), math.log(5.0), 481))
    J = np.array([lambda1_rectangle(math.sqrt(a), 1 / math.sqrt(a)) / cheeger_rectangle(math.sqrt(a), 1 / math.sqrt(a)) ** 2 for a in aspects])
    k = int(np.argmin(J))
    ok = abs(aspects[k] - 1.0) < 1e-12 and abs(J[k] - 1.38701) <= 1e-4
    verdict(7, ok, f"argmin aspect {aspects[k]:.6f}, J(1) = {J[k]:.6f}")
    assert ok


def test_criterion_08_inradius_ratios(verdict, corpus_reports, disc256, disc_fine):
    reps, _ = corpus_reports
    inf1 = [r.ratio_inf1 for r in reps]
    inf2 = [r.ratio_inf2 for r in reps]
    corpus_ok = all(0.5 - 1e-6 <= q < 1 for q in inf1) and all(INV_J01_SQ - 1e-6 <= q < 4 / math.pi**2 for q in inf2)
    d = evaluate(disc256, "precise")
    disc_ok = abs(d.ratio_inf1 - 0.5) <= 1e-3 and abs(d.ratio_inf2 - INV_J01_SQ) <= 1e-3
    ok = corpus_ok and disc_ok
    verdict(
        8,
        ok,
        f"inf1 in [{min(inf1):.4f}, {max(inf1):.4f}], inf2 in [{min(inf2):.5f}, {max(inf2):.5f}]; "
        f"disc {d.ratio_inf1:.5f}, {d.ratio_inf2:.6f}",
    )
    assert ok


def test_criterion_09_continuity(verdict, corpus, rng):
    eps = (1e-2, 1e-3, 1e-4)
    records = []
    for poly in corpus:
        if len(records) == 20:
            break
        d = rng.normal(size=poly.vertices.shape)
        V = PerturbationField(poly, d / np.abs(d).max())
        try:
            moved = [V.apply(e) for e in eps]
        except ValueError:
            continue
        h0, J0 = cheeger_constant(poly).h1, J_discrete(poly, 4)
        dh = [abs(cheeger_constant(m).h1 - h0) for m in moved]
        dj = [abs(J_discrete(m, 4) - J0) for m in moved]
        records.append((dh, dj))
    K = 2 * max(r[0][0] / eps[0] for r in records)
    lipschitz = all(r[0][i] <= K * eps[i] for r in records for i in range(3))
    monotone = all(r[1][0] > r[1][1] > r[1][2] for r in records)
    ok = len(records) == 20 and lipschitz and monotone
    worst = max(r[0][i] / eps[i] for r in records for i in range(3))
    verdict(9, ok, f"{len(records)} shapes, K = {K:.2f}, max |dh|/eps = {worst:.2f}, |dJ| monotone = {monotone}")
    assert ok


def test_criterion_10_solver_consistency(verdict, corpus, disc_fine, rng):
    sq = transform(rectangle(1, 1), translation=(-0.5, -0.5))
    rel_sq = [rellich_check(lambda1_fem(sq, r)) for r in (4, 5, 6)]
    rel_disc = rellich_check(disc_fine)
    rellich_ok = max(rel_sq[-1], rel_disc) <= 5e-2 and rel_sq[0] > rel_sq[1] > rel_sq[2]
    mono_ok = True
    for poly in corpus[:20]:
        lams = [lambda1_fem(poly, r).lambda1 for r in (2, 3, 4)]
        mono_ok &= lams[0] > lams[1] > lams[2]
    resid = max(cheeger_constant(p).residual for p in corpus)
    steiner_ok, worst_ratio = True, 0.0
    for poly in corpus[:20]:
        ax = SymmetrizationAxis.through(poly.centroid, rng.normal(size=2))
        ratio = lambda1_extrapolated(steiner_symmetrize(poly, ax), 4) / lambda1_extrapolated(poly, 4)
        worst_ratio = max(worst_ratio, ratio)
        steiner_ok &= ratio <= 1 + 1e-3
    ok = rellich_ok and mono_ok and resid <= 1e-9 and steiner_ok
    verdict(
        10,
        ok,
        f"Rellich square {rel_sq[-1]:.2e} (decreasing {rel_sq[0] > rel_sq[1] > rel_sq[2]}), disc {rel_disc:.2e}; "
        f"FEM monotone {mono_ok}; Cheeger residual {resid:.1e}; Steiner max ratio {worst_ratio:.5f}",
    )
    assert ok
