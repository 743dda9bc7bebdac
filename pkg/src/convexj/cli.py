"""Command-line drivers: single-shape reports, regular-polygon table, elongation
sweeps, random corpora and the polygon optimizer."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager

from .cheeger import cheeger_rectangle, cheeger_triangle
from .errors import InvalidShapeError, OptimizationError, SolverError
from .functionals import ACCURACY_LEVELS, CSV_COLUMNS, evaluate, lambda1_at
from .geometry import ConvexPolygon
from .shapeopt import OptimizerConfig, minimize_J
from .shapes import disc, load_shape, named_shapes, random_corpus, rectangle, regular_polygon, shape_to_dict
from .spectral import lambda1_fem, lambda1_rectangle

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_BOUNDS = 4
EXIT_OPTIMIZER = 5

# Published reference values for regular n-gons of unit edge and the unit disc
# (lambda_1, h_1, J).  Used only for comparison columns.
TABLE2_REFERENCE = {
    "3": (52.63789, 6.157649, 1.388252),
    "4": (19.739208, 3.772453, 1.38701),
    "5": (10.9964, 2.8044, 1.39820),
    "6": (7.15533, 2.2543, 1.40801),
    "8": (3.7988, 1.6351, 1.42088),
    "inf": (5.7830, 2.0, 1.4457),
}

DEFAULT_D = (1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 1000.0)
FEM_CHECK_MAX_D = 5.0


class InputError(Exception):
    pass


class BoundViolation(Exception):
    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


@contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r[k]) for k in columns})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return v


def _emit(args, rows: list[dict], columns: list[str], extra: dict | None = None) -> None:
    if args.format == "json":
        doc = {"rows": rows} if extra is None else {"rows": rows, **extra}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        text = _csv_text(rows, columns)
    with _sink(args.output) as fh:
        fh.write(text)


def cmd_compute(args) -> int:
    if not args.input:
        raise InputError("--input is required")
    poly = load_shape(args.input)
    report = evaluate(poly, args.accuracy)
    row = report.row(args.shape_id)
    if args.format == "json":
        doc = dict(row, bound_flags=report.bound_flags, shape=shape_to_dict(poly))
        with _sink(args.output) as fh:
            fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        with _sink(args.output) as fh:
            fh.write(_csv_text([row], CSV_COLUMNS))
    if not report.all_bounds_hold:
        raise BoundViolation(f"bounds violated: {report.failed_flags()}", shape_to_dict(poly))
    return EXIT_OK


TABLE2_COLUMNS = [
    "n",
    "lambda1",
    "lambda1_paper",
    "lambda1_rel_dev",
    "h1",
    "h1_paper",
    "h1_rel_dev",
    "J",
    "J_paper",
    "J_rel_dev",
]


def table2_rows(accuracy: str) -> list[dict]:
    rows = []
    for key, (lam_ref, h_ref, j_ref) in TABLE2_REFERENCE.items():
        poly = disc(1.0) if key == "inf" else regular_polygon(int(key))
        rep = evaluate(poly, accuracy)
        rows.append(
            {
                "n": key,
                "lambda1": rep.lambda1,
                "lambda1_paper": lam_ref,
                "lambda1_rel_dev": (rep.lambda1 - lam_ref) / lam_ref,
                "h1": rep.h1,
                "h1_paper": h_ref,
                "h1_rel_dev": (rep.h1 - h_ref) / h_ref,
                "J": rep.J,
                "J_paper": j_ref,
                "J_rel_dev": (rep.J - j_ref) / j_ref,
            }
        )
    return rows


def cmd_table2(args) -> int:
    _emit(args, table2_rows(args.accuracy), TABLE2_COLUMNS)
    return EXIT_OK


ELONGATE_COLUMNS = ["d", "geometry", "lambda1", "h1", "J", "gap", "J_fem", "fem_rel_dev", "mesh_change", "resolved"]

#: largest relative change of lambda between the last two mesh levels for a
#: FEM-only row to count as resolved
RESOLVED_CHANGE = 1e-2


def elongated_shape(d: float, geometry: str) -> ConvexPolygon:
    """Unit-area body with elongation ``d``: the sqrt(d) x 1/sqrt(d) rectangle,
    or the isosceles triangle stretched the same way from the equilateral one."""
    a = math.sqrt(d)
    if geometry == "rectangle":
        return rectangle(a, 1.0 / a)
    base = a * math.sqrt(4 / math.sqrt(3))
    return ConvexPolygon([[0.0, 0.0], [base, 0.0], [0.5 * base, 2.0 / base]])


def elongate_rows(ds, geometry: str = "rectangle", accuracy: str = "precise") -> list[dict]:
    rows = []
    level, _ = ACCURACY_LEVELS[accuracy]
    for d in ds:
        poly = elongated_shape(d, geometry)
        fem = change = math.nan
        if geometry == "rectangle":
            a = math.sqrt(d)
            lam = lambda1_rectangle(a, 1.0 / a)
            h = cheeger_rectangle(a, 1.0 / a)
            if d <= FEM_CHECK_MAX_D:
                fem = lambda1_at(poly, accuracy) / h**2
            resolved = True
        else:
            # thin triangles localize the eigenfunction; judge the mesh by its last refinement step
            lam = lambda1_at(poly, accuracy)
            h = cheeger_triangle(poly.area, poly.perimeter)
            a, b = lambda1_fem(poly, level).lambda1, lambda1_fem(poly, level + 1).lambda1
            change = (a - b) / b
            resolved = change <= RESOLVED_CHANGE
        J = lam / h**2
        rows.append(
            {
                "d": float(d),
                "geometry": geometry,
                "lambda1": lam,
                "h1": h,
                "J": J,
                "gap": math.pi**2 / 4 - J,
                "J_fem": fem,
                "fem_rel_dev": (fem - J) / J if math.isfinite(fem) else math.nan,
                "mesh_change": change,
                "resolved": resolved,
            }
        )
    return rows


def _parse_d(text: str | None) -> list[float]:
    if text is None:
        return list(DEFAULT_D)
    try:
        ds = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad --d list {text!r}") from None
    if not ds or any(not (d > 0) or not math.isfinite(d) for d in ds):
        raise InputError("d values must be positive")
    if any(b <= a for a, b in zip(ds, ds[1:])):
        raise InputError("d values must be strictly ascending")
    return ds


def cmd_elongate(args) -> int:
    rows = elongate_rows(_parse_d(args.d), args.geometry, args.accuracy)
    _emit(args, rows, ELONGATE_COLUMNS)
    Js = [r["J"] for r in rows if r["resolved"]]
    if any(J >= math.pi**2 / 4 - 1e-9 for J in Js):
        raise BoundViolation("J reached the upper bound")
    if any(b <= a for a, b in zip(Js, Js[1:])):
        raise BoundViolation("J is not increasing along the sweep")
    return EXIT_OK


def cmd_corpus(args) -> int:
    if args.count < 1:
        raise InputError("--count must be at least 1")
    rows, bad = [], []
    shapes = [(f"random_{args.seed}_{i}", p, args.accuracy) for i, p in enumerate(random_corpus(args.count, args.seed))]
    if args.named:
        shapes += [(name, p, "precise") for name, p in named_shapes().items()]
    for sid, poly, acc in shapes:
        rep = evaluate(poly, acc)
        rows.append(rep.row(sid))
        if not rep.all_bounds_hold:
            bad.append({"shape_id": sid, "failed": rep.failed_flags(), "shape": shape_to_dict(poly)})
    Js = [r["J"] for r in rows]
    summary = {"count": len(rows), "min_J": min(Js), "max_J": max(Js), "violations": len(bad)}
    _emit(args, rows, CSV_COLUMNS, {"summary": summary})
    if args.format != "json":
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    if bad:
        raise BoundViolation(f"{len(bad)} shape(s) violate a bound", bad)
    return EXIT_OK


def cmd_minimize(args) -> int:
    if args.n is None or args.n < 3:
        raise InputError("--n must be at least 3")
    cfg = OptimizerConfig(seed=args.seed, max_iter=args.max_iter)
    trace_path = args.trace or (args.output + ".trace.jsonl" if args.output else None)
    try:
        res = minimize_J(args.n, cfg)
    except OptimizationError as exc:
        _write_trace(trace_path, exc.trace)
        raise
    _write_trace(trace_path, res.trace)
    doc = {
        "n_vertices": args.n,
        "seed": args.seed,
        "J": res.J,
        "h1": res.h1,
        "lambda1": res.lambda1,
        "evaluations": res.evaluations,
        "iterations": len(res.trace),
        "shape": shape_to_dict(res.polygon),
    }
    if res.report is not None:
        doc["J_precise"] = res.report.J
        doc["bound_flags"] = res.report.bound_flags
    with _sink(args.output) as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if res.report is not None and not res.report.all_bounds_hold:
        raise BoundViolation(f"bounds violated: {res.report.failed_flags()}", doc["shape"])
    return EXIT_OK


def _write_trace(path, trace) -> None:
    if path is None:
        return
    with open(path, "w") as fh:
        for rec in trace:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convexj", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, accuracy="precise"):
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--accuracy", choices=tuple(ACCURACY_LEVELS), default=accuracy)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("compute", help="report for one shape file")
    common(p)
    p.add_argument("--input", help="shape JSON")
    p.add_argument("--shape-id", default="input")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("table2", help="regular n-gons and the disc against reference values")
    common(p)
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("elongate", help="J along unit-area bodies of growing diameter")
    common(p)
    p.add_argument("--d", help="comma-separated ascending elongation factors")
    p.add_argument("--geometry", choices=("rectangle", "triangle"), default="rectangle")
    p.set_defaults(func=cmd_elongate)

    p = sub.add_parser("corpus", help="bound checks over a random convex corpus")
    common(p, accuracy="fast")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--named", action="store_true", help="append the named shapes")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("minimize", help="search for the minimizer of J among n-gons")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--max-iter", type=int, default=600)
    p.add_argument("--trace", help="trace JSONL path (default: OUTPUT.trace.jsonl)")
    p.set_defaults(func=cmd_minimize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, InvalidShapeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OptimizationError as exc:
        print(f"optimizer failed: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZER
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except BoundViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        if exc.payload is not None:
            print(json.dumps(exc.payload, sort_keys=True), file=sys.stderr)
        return EXIT_BOUNDS


if __name__ == "__main__":
    sys.exit(main())
