"""Quadrature checks of the two-centre exponential integrals behind the
interaction estimates.

Integrals of the form int g0(|x|) g1(|x - a|) dx over the plane are split along
the perpendicular bisector of [0, a]; each half-plane is integrated in polar
coordinates centred on its own point, so the weight r absorbs any |x|^{-gamma}
singularity with gamma < 3/2 (or the 1/r of K1).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from . import bessel
from .errors import ParameterError

C1 = math.sqrt(math.pi / 2.0)
_RADIAL_BREAKS = (1.0, 4.0, 16.0, 64.0, 256.0)


@dataclass(frozen=True)
class QuadratureSpec:
    """radius: cut-off for the radial integrals (inf = none); resolution: number of
    angular cells per half-plane; tolerance: relative tolerance of each quad call."""

    radius: float = math.inf
    resolution: int = 8
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.resolution < 1:
            raise ParameterError("resolution must be >= 1")
        if not 0 < self.tolerance <= 1e-8:
            raise ParameterError("tolerance must lie in (0, 1e-8]")

    def refined(self) -> "QuadratureSpec":
        return QuadratureSpec(self.radius, 2 * self.resolution, self.tolerance)


def _half_plane(g_near: Callable[[float], float], g_far: Callable[[float], float], d: float,
                spec: QuadratureSpec) -> float:
    """int over {x . e < d/2} of g_near(|x|) g_far(|x - d e|) dx, polar about 0."""
    def radial(theta: float) -> float:
        c = math.cos(theta)
        r_hi = spec.radius if c <= 0 else min(spec.radius, 0.5 * d / c)

        def f(r: float) -> float:
            rf = math.sqrt(max(r * r + d * d - 2.0 * r * d * c, 0.0))
            return r * g_near(r) * g_far(rf)

        if math.isinf(r_hi):
            val, _ = integrate.quad(f, 0.0, r_hi, epsabs=0.0, epsrel=spec.tolerance, limit=200)
            return val
        pts = [p for p in _RADIAL_BREAKS if p < r_hi]
        val, _ = integrate.quad(f, 0.0, r_hi, epsabs=0.0, epsrel=spec.tolerance, limit=200,
                                points=pts or None)
        return val

    edges = np.linspace(0.0, math.pi, spec.resolution + 1)
    # the cut-off d/(2 cos theta) sweeps from d/2 to infinity near theta = pi/2;
    # extra breakpoints where it crosses fixed radii keep the outer integrand tame
    extra = [math.acos(0.5 * d / rho) for rho in (0.25, 1.0, 4.0, 16.0) if 0.5 * d < rho]
    edges = np.unique(np.concatenate((edges, extra)))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(radial, lo, hi, epsabs=0.0, epsrel=spec.tolerance, limit=200)
        total += val
    return 2.0 * total  # the half-plane is symmetric about the axis


def two_centre_integral(g0: Callable[[float], float], g1: Callable[[float], float], a,
                        spec: QuadratureSpec | None = None) -> float:
    """int_{R^2} g0(|x|) g1(|x - a|) dx for radial g0, g1."""
    spec = spec or QuadratureSpec()
    d = float(np.hypot(*np.asarray(a, dtype=float)))
    if d <= 0:
        raise ParameterError("the two centres must be distinct")
    return _half_plane(g0, g1, d, spec) + _half_plane(g1, g0, d, spec)


def convolution_integral(alpha: float, beta: float, gamma: float, delta: float, a,
                         spec: QuadratureSpec | None = None) -> float:
    """int e^{-alpha|x|} e^{-beta|x-a|} / (|x|^gamma |x-a|^delta) dx."""
    if not 0 < alpha <= beta:
        raise ParameterError(f"need 0 < alpha <= beta, got alpha={alpha}, beta={beta}")
    for name, v in (("gamma", gamma), ("delta", delta)):
        if not 0 <= v < 1.5:
            raise ParameterError(f"{name}={v} must lie in [0, 3/2)")

    def g0(r):
        return math.exp(-alpha * r) * (r ** -gamma if gamma else 1.0) if r > 0 else (1.0 if not gamma else 0.0)

    def g1(r):
        return math.exp(-beta * r) * (r ** -delta if delta else 1.0) if r > 0 else (1.0 if not delta else 0.0)

    # polar weights: r * r^{-gamma} -> 0 at r = 0 since gamma < 3/2 < 2; the centre
    # value never matters for the quadrature
    return two_centre_integral(g0, g1, a, spec)


def equal_rate_oracle(alpha: float, d: float) -> float:
    """Closed form for alpha = beta, gamma = delta = 0: (pi d^2 / 4) K2(alpha d).

    Elliptic coordinates with foci 0 and a turn the integral into
    (d^2/4) int int e^{-alpha d cosh mu} (cosh^2 mu - cos^2 nu) dmu dnu.
    """
    z = alpha * d
    k0, k1 = bessel.k0_k1(z)
    return math.pi * d * d / 4.0 * (k0 + 2.0 * k1 / z)


def exponential_moment(m: float) -> float:
    """2 pi int_0^inf r e^{-m r} I0(r) dr = 2 pi m / (m^2 - 1)^{3/2}, m > 1."""
    if m <= 1:
        raise ParameterError(f"m={m} must exceed 1")
    return 2.0 * math.pi * m / (m * m - 1.0) ** 1.5


def localized_overlap(m: float, z, spec: QuadratureSpec | None = None) -> tuple[float, float]:
    """(numeric, asymptotic) values of int e^{-m|x|} K1(|x - z|) dx."""
    if m <= 1:
        raise ParameterError(f"localized weight needs m > 1, got m={m}")
    d = float(np.hypot(*np.asarray(z, dtype=float)))
    if d < 4:
        raise ParameterError(f"|z|={d:.3g} must be at least 4")

    def b(r):
        return math.exp(-m * r)

    def e(r):
        return bessel.k1(r) if r > 0 else math.inf

    numeric = two_centre_integral(b, e, z, spec)
    asymptotic = C1 * math.exp(-d) / math.sqrt(d) * exponential_moment(m)
    return numeric, asymptotic


def fit_scaling(distances: Sequence[float], values: Sequence[float], base_power: float = 0.0,
                correction: bool = True) -> dict:
    """Fit log I = c + (base_power + p) log d - k d [+ q / d].

    Returns {"rate": k, "power": p, ...}. The optional q/d term absorbs the
    first 1/d correction of the prefactor so that p measures the limiting power.
    """
    d = np.asarray(distances, dtype=float)
    y = np.log(np.asarray(values, dtype=float)) - base_power * np.log(d)
    cols = [np.ones_like(d), np.log(d), -d]
    if correction:
        cols.append(1.0 / d)
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    out = {"log_c": float(coef[0]), "power": float(coef[1]), "rate": float(coef[2])}
    if correction:
        out["correction"] = float(coef[3])
    return out


def fit_rate(distances: Sequence[float], values: Sequence[float]) -> float:
    """Plain log-linear decay rate: log I = c - k d."""
    d = np.asarray(distances, dtype=float)
    A = np.column_stack([np.ones_like(d), -d])
    coef, *_ = np.linalg.lstsq(A, np.log(np.asarray(values, dtype=float)), rcond=None)
    return float(coef[1])


@dataclass(frozen=True)
class CheckRow:
    name: str
    parameters: str
    measured: float
    expected: float
    tolerance: float
    relative: bool = False

    @property
    def passed(self) -> bool:
        err = abs(self.measured - self.expected)
        if self.relative:
            err /= abs(self.expected)
        return err <= self.tolerance


def run_checks(spec: QuadratureSpec | None = None) -> list[CheckRow]:
    """Exponent fits for both rate branches, the a -> 0 limit, and overlap ratios."""
    spec = spec or QuadratureSpec()
    rows = []
    d_eq = [4.0, 6.0, 8.0, 10.0]
    vals = [convolution_integral(2.0, 2.0, 0.0, 0.0, (d, 0.0), spec) for d in d_eq]
    fit = fit_scaling(d_eq, vals, base_power=2.0)
    rows.append(CheckRow("equal_rates_decay", "alpha=beta=2 gamma=delta=0", fit["rate"], 2.0, 0.03, True))
    rows.append(CheckRow("equal_rates_power", "alpha=beta=2 gamma=delta=0", fit["power"], -0.5, 0.1))
    d_un = [4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
    vals = [convolution_integral(1.0, 2.0, 0.0, 0.0, (d, 0.0), spec) for d in d_un]
    rows.append(CheckRow("unequal_rates_decay", "alpha=1 beta=2 gamma=delta=0",
                         fit_scaling(d_un, vals)["rate"], 1.0, 0.05, True))
    small = convolution_integral(2.0, 2.0, 0.0, 0.0, (1e-7, 0.0), spec)
    rows.append(CheckRow("zero_separation_limit", "alpha=beta=2 |a|=1e-7", small, math.pi / 8.0, 1e-6, True))
    for zz in (6.0, 12.0):
        num, asy = localized_overlap(2.0, (zz, 0.0), spec)
        rows.append(CheckRow("overlap_ratio", f"m=2 |z|={zz:g}", num / asy, 1.0, 0.15))
    num, asy = localized_overlap(4.0, (10.0, 0.0), spec)
    rows.append(CheckRow("overlap_ratio", "m=4 |z|=10", num / asy, 1.0, 0.1))
    return rows


def write_report(path, rows: Sequence[CheckRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["check", "parameters", "measured", "expected", "tolerance", "pass"])
        for r in rows:
            w.writerow([r.name, r.parameters, repr(r.measured), repr(r.expected), repr(r.tolerance),
                        "pass" if r.passed else "fail"])
