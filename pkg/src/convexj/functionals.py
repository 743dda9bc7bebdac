"""Scale-invariant ratio functionals and the inequalities they satisfy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cheeger import cheeger_constant
from .geometry import ConvexPolygon, diameter, inradius
from .spectral import bessel_j0_first_zero, lambda1_extrapolated, lambda1_fem, lambda1_interval

#: slack granted to non-strict lower bounds
LOWER_SLACK = 1e-6
#: margin demanded below the strict upper bound on J
UPPER_MARGIN = 1e-9

ACCURACY_LEVELS = {
    # name -> (refinement, extrapolate)
    "fast": (4, False),
    "precise": (5, True),
}

CSV_COLUMNS = [
    "shape_id",
    "n_vertices",
    "area",
    "perimeter",
    "diameter",
    "inradius",
    "h1",
    "lambda1",
    "Lambda1",
    "J",
    "ratio_inf1",
    "ratio_inf2",
    "flags",
    "accuracy",
]


@dataclass(frozen=True)
class FunctionalReport:
    lambda1: float
    h1: float
    Lambda1: float
    J: float
    ratio_inf1: float
    ratio_inf2: float
    bound_flags: dict = field(default_factory=dict)
    accuracy: str = "fast"
    area: float = math.nan
    perimeter: float = math.nan
    diameter: float = math.nan
    n_vertices: int = 0

    @property
    def all_bounds_hold(self) -> bool:
        return all(self.bound_flags.values())

    @property
    def inradius(self) -> float:
        return 1.0 / self.Lambda1

    def failed_flags(self) -> list[str]:
        return [k for k, v in self.bound_flags.items() if not v]

    def row(self, shape_id: str) -> dict:
        return {
            "shape_id": shape_id,
            "n_vertices": self.n_vertices,
            "area": self.area,
            "perimeter": self.perimeter,
            "diameter": self.diameter,
            "inradius": self.inradius,
            "h1": self.h1,
            "lambda1": self.lambda1,
            "Lambda1": self.Lambda1,
            "J": self.J,
            "ratio_inf1": self.ratio_inf1,
            "ratio_inf2": self.ratio_inf2,
            "flags": ";".join(k for k, v in self.bound_flags.items() if v),
            "accuracy": self.accuracy,
        }


def bound_flags(J: float, inf1: float, inf2: float) -> dict:
    """Verdicts for every inequality on J, Lambda/h and Lambda^2/lambda."""
    jb = bessel_j0_first_zero() ** 2
    return {
        "cheeger_ge_quarter": J >= 0.25 - LOWER_SLACK,
        "improved_ge_pi2_16": J >= math.pi**2 / 16 - LOWER_SLACK,
        "reverse_lt_pi2_4": J < math.pi**2 / 4 - UPPER_MARGIN,
        "inf1_in_half_one": 0.5 - LOWER_SLACK <= inf1 < 1.0,
        "inf2_in_bounds": 1.0 / jb - LOWER_SLACK <= inf2 < 4 / math.pi**2,
    }


def lambda1_at(poly: ConvexPolygon, accuracy: str = "fast") -> float:
    try:
        level, extrapolate = ACCURACY_LEVELS[accuracy]
    except KeyError:
        raise ValueError(f"unknown accuracy level {accuracy!r}") from None
    if extrapolate:
        return lambda1_extrapolated(poly, level)
    return lambda1_fem(poly, level).lambda1


def evaluate(poly: ConvexPolygon, accuracy: str = "fast") -> FunctionalReport:
    lam = lambda1_at(poly, accuracy)
    h = cheeger_constant(poly).h1
    rin, _ = inradius(poly)
    big = 1.0 / rin
    J = lam / h**2
    inf1 = big / h
    inf2 = big**2 / lam
    return FunctionalReport(
        lambda1=lam,
        h1=h,
        Lambda1=big,
        J=J,
        ratio_inf1=inf1,
        ratio_inf2=inf2,
        bound_flags=bound_flags(J, inf1, inf2),
        accuracy=accuracy,
        area=poly.area,
        perimeter=poly.perimeter,
        diameter=diameter(poly),
        n_vertices=poly.n,
    )


def ratio_inf1(poly: ConvexPolygon) -> float:
    """``Lambda_1 / h_1``: inverse inradius over the Cheeger constant."""
    rin, _ = inradius(poly)
    return 1.0 / (rin * cheeger_constant(poly).h1)


def ratio_inf2(poly: ConvexPolygon, accuracy: str = "precise") -> float:
    rin, _ = inradius(poly)
    return 1.0 / (rin**2 * lambda1_at(poly, accuracy))


def h1_interval(a: float, b: float) -> float:
    if not b > a:
        raise ValueError("need b > a")
    return 2.0 / (b - a)


def interval_J(a: float, b: float) -> float:
    if not b > a:
        raise ValueError("need b > a")
    return lambda1_interval(a, b) / h1_interval(a, b) ** 2


def otani_lambda1(p: float, a: float = 0.0, b: float = 1.0) -> float:
    """First Dirichlet eigenvalue of the one-dimensional p-Laplacian on ``(a, b)``."""
    if not p > 1:
        raise ValueError("exponent must exceed 1")
    if not b > a:
        raise ValueError("need b > a")
    return (p - 1) * (2 * math.pi / (p * (b - a) * math.sin(math.pi / p))) ** p


def interval_ratio_from_eigenvalues(p: float, q: float) -> float:
    return otani_lambda1(p) ** (1 / p) / otani_lambda1(q) ** (1 / q)


def interval_ratio(p: float, q: float) -> float:
    """``lambda(p)^(1/p) / lambda(q)^(1/q)`` on an interval, in closed form."""
    if not 1 < q < p:
        raise ValueError("need 1 < q < p")
    return (
        q * (p - 1) ** (1 / p) / (p * (q - 1) ** (1 / q)) * math.sin(math.pi / q) / math.sin(math.pi / p)
    )
