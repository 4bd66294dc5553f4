"""Modified Bessel functions I0, I1, K0, K1 for real positive arguments.

Small arguments use the ascending power series; K0/K1 for x > 2 use Steed's
continued fraction (Temme's CF2 form); I0/I1 switch to the Hankel asymptotic
series for x > 30, where the ascending series would need many terms.
All routines are vectorised over numpy arrays.
"""
from __future__ import annotations

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061

_SERIES_MAX = 2.0
_I_ASYMPTOTIC_MIN = 30.0
_EPS = 1e-16


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _i_series(x: np.ndarray, order: int) -> np.ndarray:
    # sum_k (x/2)^(2k+order) / (k! (k+order)!)
    q = 0.25 * x * x
    term = (0.5 * x) ** order / (1.0 if order == 0 else float(order))
    total = term.copy()
    k = 0
    while True:
        k += 1
        term = term * q / (k * (k + order))
        total += term
        if np.all(term <= _EPS * total):
            break
        if k > 500:
            break
    return total


def _i_asymptotic(x: np.ndarray, order: int) -> np.ndarray:
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 30):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total += term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    return np.exp(x) / np.sqrt(2.0 * np.pi * x) * total


def _i_order(x, order: int):
    arr, scalar = _as_array(x)
    if np.any(arr < 0):
        raise ValueError("modified Bessel I is implemented for x >= 0 only")
    out = np.empty_like(arr)
    small = arr <= _I_ASYMPTOTIC_MIN
    if np.any(small):
        out[small] = _i_series(arr[small], order)
    if np.any(~small):
        out[~small] = _i_asymptotic(arr[~small], order)
    return float(out) if scalar else out


def i0(x):
    """Modified Bessel function of the first kind, order 0."""
    return _i_order(x, 0)


def i1(x):
    """Modified Bessel function of the first kind, order 1."""
    return _i_order(x, 1)


def _k_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """K0 and K1 from the ascending series (accurate for x <= 2)."""
    q = 0.25 * x * x
    log_half = np.log(0.5 * x)
    # K0 = -(ln(x/2)+gamma) I0 + sum_{k>=1} q^k/(k!)^2 H_k
    t0 = np.ones_like(x)
    i0_sum = np.ones_like(x)
    h_sum = np.zeros_like(x)
    harmonic = 0.0
    # K1 = 1/x + ln(x/2) I1 - (x/4) sum_k [psi(k+1)+psi(k+2)] q^k/(k!(k+1)!)
    t1 = np.ones_like(x)
    psi_k1 = -EULER_GAMMA
    psi_k2 = 1.0 - EULER_GAMMA
    k1_sum = (psi_k1 + psi_k2) * t1
    i1_sum = t1.copy()
    for k in range(1, 60):
        harmonic += 1.0 / k
        t0 = t0 * q / (k * k)
        i0_sum += t0
        h_sum += t0 * harmonic
        t1 = t1 * q / (k * (k + 1))
        psi_k1 += 1.0 / k
        psi_k2 += 1.0 / (k + 1)
        i1_sum += t1
        k1_sum += (psi_k1 + psi_k2) * t1
        if np.all(t0 < _EPS * i0_sum) and np.all(t1 < _EPS * i1_sum):
            break
    k0 = -(log_half + EULER_GAMMA) * i0_sum + h_sum
    i1v = 0.5 * x * i1_sum
    k1 = 1.0 / x + log_half * i1v - 0.25 * x * k1_sum
    return k0, k1


def _k_steed(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """K0 and K1 from Steed's continued fraction CF2 (x >= 2)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    active = np.ones(x.shape, dtype=bool)
    for i in range(2, 10_000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = np.where(active, (b * d - 1.0) * delh, 0.0)
        h = h + delh
        dels = q * delh
        s = s + dels
        active &= np.abs(dels) >= _EPS * np.abs(s)
        if not active.any():
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _k_pair_float(x: float) -> tuple[float, float]:
    """Scalar twin of the array routines, free of numpy overhead for quadrature loops."""
    if x <= _SERIES_MAX:
        q = 0.25 * x * x
        log_half = math.log(0.5 * x)
        t0 = i0_sum = 1.0
        h_sum = harmonic = 0.0
        t1 = i1_sum = 1.0
        psi_k1, psi_k2 = -EULER_GAMMA, 1.0 - EULER_GAMMA
        k1_sum = psi_k1 + psi_k2
        for k in range(1, 60):
            harmonic += 1.0 / k
            t0 *= q / (k * k)
            i0_sum += t0
            h_sum += t0 * harmonic
            t1 *= q / (k * (k + 1))
            psi_k1 += 1.0 / k
            psi_k2 += 1.0 / (k + 1)
            i1_sum += t1
            k1_sum += (psi_k1 + psi_k2) * t1
            if t0 < _EPS * i0_sum and t1 < _EPS * i1_sum:
                break
        k0 = -(log_half + EULER_GAMMA) * i0_sum + h_sum
        return k0, 1.0 / x + log_half * 0.5 * x * i1_sum - 0.25 * x * k1_sum
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10_000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels) < _EPS * abs(s):
            break
    h *= a1
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    return k0, k0 * (x + 0.5 - h) / x


def _k_pair(x):
    if isinstance(x, float) and x > 0:
        return _k_pair_float(x)
    arr, scalar = _as_array(x)
    if np.any(arr <= 0):
        raise ValueError("modified Bessel K is defined for x > 0 only")
    k0 = np.empty_like(arr)
    k1 = np.empty_like(arr)
    small = arr <= _SERIES_MAX
    if np.any(small):
        k0[small], k1[small] = _k_series(arr[small])
    if np.any(~small):
        k0[~small], k1[~small] = _k_steed(arr[~small])
    if scalar:
        return float(k0), float(k1)
    return k0, k1


def k0(x):
    """Modified Bessel function of the second kind, order 0."""
    return _k_pair(x)[0]


def k1(x):
    """Modified Bessel function of the second kind, order 1."""
    return _k_pair(x)[1]


def k0_k1(x):
    """Both K0(x) and K1(x) in one pass."""
    return _k_pair(x)
