"""Equivariant n-vortex profiles and the scalars derived from them.

The ansatz psi = f(r) e^{i n theta}, A = a(r) n grad(theta) reduces the static
equations to

    f'' + f'/r - n^2 (1-a)^2 f / r^2 + lam (1 - f^2) f = 0
    a'' - a'/r + (1-a) f^2 = 0

with f(0) = a(0) = 0 and f, a -> 1 as r -> inf (derivation in
docs/math_notes.md). The solver works in the tail variables u = 1 - f and
w = 1 - a so that the exponentially small tails keep relative precision.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from . import bessel
from .errors import DivergentIntegralError, ParameterError, RangeError, SolverError

RESIDUAL_TOL = 1e-8
_TAIL_FLOOR = 1e-40


def m_lambda(lam: float) -> float:
    """Decay rate of 1 - |psi|: min(sqrt(2 lam), 2)."""
    return min(math.sqrt(2.0 * lam), 2.0)


@dataclass(frozen=True)
class ProfileParams:
    n: int
    lam: float
    r_max: float = 25.0
    num_points: int = 2048

    def __post_init__(self):
        if int(self.n) != self.n or self.n == 0:
            raise ParameterError(f"vortex degree must be a nonzero integer, got {self.n}")
        if not self.lam > 0:
            raise ParameterError(f"lambda must be positive, got {self.lam}")
        if self.num_points < 256:
            raise ParameterError(f"num_points must be >= 256, got {self.num_points}")
        min_r = 20.0 / min(m_lambda(self.lam), 1.0)
        if self.r_max < min_r - 1e-12:
            raise ParameterError(f"r_max={self.r_max} too small; need >= {min_r:.3g}")

    @property
    def m_lambda(self) -> float:
        return m_lambda(self.lam)


@dataclass(frozen=True)
class ProfileScalars:
    energy: float
    gamma_n: float
    beta_n: float
    m_lambda: float
    fitted_rate_f: float
    fitted_rate_B: float
    source_integral: float = float("nan")


@dataclass(frozen=True, eq=False)
class VortexProfile:
    """Radial solution on a uniform grid r_0 = 0 < ... < r_max.

    ``u`` and ``w`` hold 1 - f and 1 - a at full relative precision; f and a
    are derived from them.
    """

    params: ProfileParams
    r: np.ndarray
    u: np.ndarray
    w: np.ndarray
    scalars: ProfileScalars | None = None
    residual: float = float("nan")

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def lam(self) -> float:
        return self.params.lam

    @property
    def f(self) -> np.ndarray:
        return 1.0 - self.u

    @property
    def a(self) -> np.ndarray:
        return 1.0 - self.w

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])

    @property
    def magnetic_field(self) -> np.ndarray:
        """B(r) = n a'(r) / r, with the r -> 0 limit 2 n a''(0)/2 filled in."""
        da = -np.gradient(self.w, self.r, edge_order=2)
        out = np.empty_like(self.r)
        out[1:] = self.n * da[1:] / self.r[1:]
        # a ~ c r^2 at the origin, so a'/r -> 2c = a''(0)
        out[0] = self.n * 2.0 * self.a[1] / self.r[1] ** 2
        return out

    @classmethod
    def from_values(cls, params: ProfileParams, r, f, a) -> "VortexProfile":
        """Wrap externally supplied f, a values (no solve, no scalars)."""
        r = np.asarray(r, dtype=float)
        return cls(params, r, 1.0 - np.asarray(f, dtype=float), 1.0 - np.asarray(a, dtype=float))


# ---------------------------------------------------------------------------
# Finite-difference residual and Jacobian

def _far_log_derivatives(r_max: float, lam: float) -> tuple[float, float]:
    """Logarithmic derivatives of u and w at r_max from the linearised tails.

    u ~ K0(m r), w ~ r K1(r) (so w'/w = -K0(r)/K1(r)).
    """
    m = m_lambda(lam)
    k0m, k1m = bessel.k0_k1(m * r_max)
    k0r, k1r = bessel.k0_k1(r_max)
    return -m * k1m / k0m, -k0r / k1r


def _residual(u, w, r, dr, n2, lam, du_log, dw_log):
    # unknowns at nodes 1..N-1; node 0 is fixed at u = w = 1
    uu = np.concatenate(([1.0], u))
    ww = np.concatenate(([1.0], w))
    # ghost node beyond r_max from the Robin conditions
    ghost_u = uu[-2] + 2.0 * dr * du_log * uu[-1]
    ghost_w = ww[-2] + 2.0 * dr * dw_log * ww[-1]
    up = np.concatenate((uu[2:], [ghost_u]))
    wp = np.concatenate((ww[2:], [ghost_w]))
    um, wm = uu[:-1], ww[:-1]
    uc, wc = uu[1:], ww[1:]
    rc = r[1:]
    fu = ((up - 2 * uc + um) / dr**2 + (up - um) / (2 * dr * rc)
          + n2 * wc**2 * (1 - uc) / rc**2 - lam * uc * (2 - uc) * (1 - uc))
    fw = ((wp - 2 * wc + wm) / dr**2 - (wp - wm) / (2 * dr * rc)
          - wc * (1 - uc) ** 2)
    return np.concatenate((fu, fw))


def _jacobian(u, w, r, dr, n2, lam, du_log, dw_log):
    m = u.size
    rc = r[1:]
    lo_u = 1 / dr**2 - 1 / (2 * dr * rc)
    hi_u = 1 / dr**2 + 1 / (2 * dr * rc)
    lo_w = 1 / dr**2 + 1 / (2 * dr * rc)
    hi_w = 1 / dr**2 - 1 / (2 * dr * rc)
    diag_u = (-2 / dr**2 - n2 * w**2 / rc**2
              - lam * (2 - 6 * u + 3 * u**2))
    diag_w = -2 / dr**2 - (1 - u) ** 2
    # ghost contributions at the last node
    diag_u = diag_u.copy()
    diag_w = diag_w.copy()
    diag_u[-1] += hi_u[-1] * 2 * dr * du_log
    diag_w[-1] += hi_w[-1] * 2 * dr * dw_log
    sub_u = lo_u[1:].copy()
    sub_w = lo_w[1:].copy()
    sub_u[-1] += hi_u[-1]
    sub_w[-1] += hi_w[-1]
    j_uu = sps.diags([sub_u, diag_u, hi_u[:-1]], [-1, 0, 1], shape=(m, m))
    j_ww = sps.diags([sub_w, diag_w, hi_w[:-1]], [-1, 0, 1], shape=(m, m))
    j_uw = sps.diags(2 * n2 * w * (1 - u) / rc**2, 0, shape=(m, m))
    j_wu = sps.diags(2 * w * (1 - u), 0, shape=(m, m))
    return sps.bmat([[j_uu, j_uw], [j_wu, j_ww]], format="csc")


def solve_profile(params: ProfileParams, tol: float = 1e-11, max_iter: int = 100) -> VortexProfile:
    """Solve the radial boundary-value problem by damped Newton iteration."""
    N = params.num_points
    r = np.linspace(0.0, params.r_max, N)
    dr = r[1] - r[0]
    n2 = float(params.n) ** 2
    lam = params.lam
    du_log, dw_log = _far_log_derivatives(params.r_max, lam)

    rc = r[1:]
    u = 1.0 - np.tanh(rc) ** abs(params.n)
    w = np.exp(-rc**2)
    args = (r, dr, n2, lam, du_log, dw_log)
    res = _residual(u, w, *args)
    norm = np.max(np.abs(res))
    for _ in range(max_iter):
        if norm <= tol:
            break
        step = spla.spsolve(_jacobian(u, w, *args), -res)
        du, dw = step[: u.size], step[u.size:]
        t = 1.0
        while True:
            u_try, w_try = u + t * du, w + t * dw
            res_try = _residual(u_try, w_try, *args)
            norm_try = np.max(np.abs(res_try))
            if norm_try < (1 - 1e-4 * t) * norm or t < 1e-6:
                break
            t *= 0.5
        if t < 1e-6:
            if norm <= RESIDUAL_TOL:
                break  # round-off floor of the fine-grid residual
            raise SolverError("profile Newton iteration stalled", norm)
        u, w, res, norm = u_try, w_try, res_try, norm_try
    if norm > max(tol, RESIDUAL_TOL):
        raise SolverError("profile Newton iteration did not converge", norm)

    u = np.concatenate(([1.0], u))
    w = np.concatenate(([1.0], w))
    bare = VortexProfile(params, r, u, w, residual=float(norm))
    return _with_scalars(bare)


@lru_cache(maxsize=64)
def cached_profile(params: ProfileParams) -> VortexProfile:
    return solve_profile(params)


def ode_residual(profile: VortexProfile) -> float:
    """Sup norm of the discrete ODE residual at the stored solution."""
    r = profile.r
    dr = profile.dr
    du_log, dw_log = _far_log_derivatives(profile.params.r_max, profile.lam)
    res = _residual(profile.u[1:], profile.w[1:], r, dr, float(profile.n) ** 2,
                    profile.lam, du_log, dw_log)
    return float(np.max(np.abs(res)))


# ---------------------------------------------------------------------------
# Quadratures

def _midpoint_derivatives(profile: VortexProfile):
    r = profile.r
    dr = profile.dr
    rm = 0.5 * (r[1:] + r[:-1])
    df = -np.diff(profile.u) / dr
    da = -np.diff(profile.w) / dr
    return rm, df, da


def _gradient_terms(profile: VortexProfile):
    """Pieces shared by the energy and gamma quadratures."""
    r, dr, n2 = profile.r, profile.dr, float(profile.n) ** 2
    rm, df, da = _midpoint_derivatives(profile)
    f, w = profile.f, profile.w
    kinetic_radial = np.sum(df**2 * rm) * dr
    magnetic = np.sum(n2 * da**2 / rm) * dr
    # n^2 (1-a)^2 f^2 / r; vanishes at r = 0 because f ~ r^|n|
    angular = np.zeros_like(r)
    angular[1:] = n2 * w[1:] ** 2 * f[1:] ** 2 / r[1:]
    kinetic_angular = _trapezoid(angular, dr)
    return kinetic_radial, kinetic_angular, magnetic


def _trapezoid(y, dx):
    return float(dx * (np.sum(y) - 0.5 * (y[0] + y[-1])))


def vortex_energy(profile: VortexProfile) -> float:
    """E = pi int [f'^2 + n^2(1-a)^2 f^2/r^2 + n^2 a'^2/r^2 + lam/2 (f^2-1)^2] r dr."""
    kin_r, kin_a, mag = _gradient_terms(profile)
    u = profile.u
    potential = 0.5 * profile.lam * (u * (2 - u)) ** 2 * profile.r
    return float(np.pi * (kin_r + kin_a + mag + _trapezoid(potential, profile.dr)))


def gamma_coefficient(profile: VortexProfile) -> float:
    """gamma_n = (1/2)||grad_A psi||^2 + ||curl A||^2 in radial form."""
    kin_r, kin_a, mag = _gradient_terms(profile)
    return float(np.pi * (kin_r + kin_a) + 2.0 * np.pi * mag)


class BesselFit(NamedTuple):
    beta: float
    residual: float


def fit_bessel_amplitude(r, values, n: int, fit_window: tuple[float, float],
                         kernel: str = "k1") -> BesselFit:
    """Least-squares constant c with values ~ n c K(r) on the window.

    Returns the constant and the relative RMS misfit.
    """
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = fit_window
    sel = (r >= lo) & (r <= hi)
    if sel.sum() < 3:
        raise RangeError(f"fit window {fit_window} contains fewer than 3 grid points")
    if kernel == "k1":
        basis = n * bessel.k1(r[sel])
    elif kernel == "k0":
        basis = n * bessel.k0(r[sel])
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    y = values[sel]
    beta = float(np.dot(basis, y) / np.dot(basis, basis))
    misfit = float(np.sqrt(np.sum((y - beta * basis) ** 2) / np.sum(y**2)))
    return BesselFit(beta, misfit)


def beta_coefficient(profile: VortexProfile, fit_window: tuple[float, float] = (8.0, 12.0),
                     kernel: str = "k1") -> BesselFit:
    """Far-field amplitude of B(r) = n beta K(r) over ``fit_window``.

    ``kernel="k1"`` fits the leading form n beta K1(r). B actually decays like
    K0(r) = K1(r)[1 - 1/(2r) + O(r^-2)], so ``kernel="k0"`` removes the
    O(1/r) bias of a finite window and recovers the true asymptotic amplitude.
    """
    lo, hi = fit_window
    if not (5.0 < lo < hi < profile.params.r_max - 2.0):
        raise RangeError(f"fit window {fit_window} must lie inside (5, r_max - 2)")
    return fit_bessel_amplitude(profile.r, profile.magnetic_field, profile.n, fit_window, kernel)


def _loglinear_rate(r, values, window, floor):
    lo, hi = window
    sel = (r >= lo) & (r <= hi) & (np.abs(values) > floor)
    if sel.sum() < 8:
        return None
    slope = np.polyfit(r[sel], np.log(np.abs(values[sel])), 1)[0]
    return float(-slope)


def decay_exponents(profile: VortexProfile, floor: float = _TAIL_FLOOR) -> tuple[float, float]:
    """Log-linear decay rates of 1 - f and |B| over [r_max/2, r_max - 2].

    If 1 - f underflows ``floor`` inside that window the window is shrunk to
    [r_hi/2, r_hi] with r_hi the last radius above the floor.
    """
    r = profile.r
    r_max = profile.params.r_max
    window = (0.5 * r_max, r_max - 2.0)
    rates = []
    for values in (profile.u, profile.magnetic_field):
        above = np.nonzero(np.abs(values) > floor)[0]
        r_hi = min(window[1], r[above[-1]]) if above.size else 0.0
        win = window if r_hi >= window[1] else (0.5 * r_hi, r_hi)
        rate = _loglinear_rate(r, values, win, floor)
        if rate is None:
            raise RangeError("tail underflows machine precision on every usable fit window")
        rates.append(rate)
    return rates[0], rates[1]


def source_integral(profile: VortexProfile) -> float:
    """int_0^inf [2(1-a) f f' + a'(1-f^2)] I0(r) dr.

    The integrand is (r/n) (-Delta + 1) B times I0(r); it converges only when
    the order parameter decays faster than e^{-r}, i.e. lam > 1/2.
    """
    if profile.lam <= 0.5:
        raise DivergentIntegralError(
            f"lambda={profile.lam} <= 1/2: the I0-weighted source integral diverges (Type-I regime)")
    r = profile.r
    f, u, w = profile.f, profile.u, profile.w
    df = -np.gradient(u, r, edge_order=2)
    da = -np.gradient(w, r, edge_order=2)
    integrand = (2.0 * w * f * df + da * u * (2.0 - u)) * bessel.i0(r)
    return _trapezoid(integrand, profile.dr)


def interaction_coefficient(profile_j: VortexProfile, profile_k: VortexProfile) -> float:
    """Pair coefficient c_jk of W ~ sum n_j n_k c_jk e^{-d}/sqrt(d).

    c_jk = (sqrt(pi/2) beta_j / 2) * 2 pi * source_integral(profile_k), where
    2 pi int g(r) I0(r) r dr is the plane-wave moment of the radial source.
    """
    if profile_j.lam != profile_k.lam:
        raise ParameterError("interaction coefficient needs profiles at the same lambda")
    for p in (profile_j, profile_k):
        if p.lam <= 0.5:
            raise DivergentIntegralError(
                f"lambda={p.lam} <= 1/2: interaction integral diverges (Type-I regime)")
    beta_j = _asymptotic_beta(profile_j)
    return float(math.sqrt(math.pi / 2.0) * beta_j / 2.0 * 2.0 * math.pi * source_integral(profile_k))


def _default_beta_window(r_max: float) -> tuple[float, float]:
    hi = min(12.0, r_max - 2.5)
    return (max(5.5, hi - 4.0), hi)


def _asymptotic_beta(profile: VortexProfile) -> float:
    if profile.scalars is not None:
        return profile.scalars.beta_n
    return beta_coefficient(profile, _default_beta_window(profile.params.r_max), kernel="k0").beta


def _with_scalars(profile: VortexProfile) -> VortexProfile:
    rate_f, rate_b = decay_exponents(profile)
    beta = beta_coefficient(profile, _default_beta_window(profile.params.r_max), kernel="k0").beta
    src = source_integral(profile) if profile.lam > 0.5 else float("nan")
    scalars = ProfileScalars(
        energy=vortex_energy(profile),
        gamma_n=gamma_coefficient(profile),
        beta_n=beta,
        m_lambda=profile.params.m_lambda,
        fitted_rate_f=rate_f,
        fitted_rate_B=rate_b,
        source_integral=src,
    )
    return VortexProfile(profile.params, profile.r, profile.u, profile.w, scalars, profile.residual)


# ---------------------------------------------------------------------------
# Serialisation: CSV table (r, f, a, B) + JSON sidecar

def save_profile(profile: VortexProfile, stem: str | Path) -> tuple[Path, Path]:
    stem = Path(stem)
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")
    B = profile.magnetic_field
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "f", "a", "B", "one_minus_f", "one_minus_a"])
        for row in zip(profile.r, profile.f, profile.a, B, profile.u, profile.w):
            writer.writerow([repr(float(v)) for v in row])
    meta = {
        "params": asdict(profile.params),
        "scalars": asdict(profile.scalars) if profile.scalars else None,
        "residual": profile.residual,
    }
    json_path.write_text(json.dumps(meta, indent=2))
    return csv_path, json_path


def load_profile(stem: str | Path) -> VortexProfile:
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    data = np.loadtxt(stem.with_suffix(".csv"), delimiter=",", skiprows=1)
    params = ProfileParams(**meta["params"])
    scalars = ProfileScalars(**meta["scalars"]) if meta["scalars"] else None
    return VortexProfile(params, data[:, 0], data[:, 4], data[:, 5], scalars, meta["residual"])
