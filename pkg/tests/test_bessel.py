from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from glvortex import bessel


def k_integral(nu: int, x: float) -> float:
    # K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt
    # the integrand is below 1e-300 once x cosh t > 700
    t_max = math.acosh(max(700.0 / x, 1.0) + 1.0)
    return integrate.quad(lambda t: math.exp(-x * math.cosh(t)) * math.cosh(nu * t), 0, t_max,
                          epsabs=0, epsrel=1e-13, limit=200)[0]


def i_integral(nu: int, x: float) -> float:
    # I_nu(x) = (1/pi) int_0^pi exp(x cos t) cos(nu t) dt
    return integrate.quad(lambda t: math.exp(x * math.cos(t)) * math.cos(nu * t), 0, math.pi,
                          epsabs=0, epsrel=1e-13, limit=200)[0] / math.pi


@pytest.mark.parametrize("x", [1e-3, 0.1, 0.7, 1.9, 2.0, 2.1, 5.0, 12.0, 30.0])
def test_k_matches_integral_representation(x):
    assert bessel.k0(x) == pytest.approx(k_integral(0, x), rel=1e-11)
    assert bessel.k1(x) == pytest.approx(k_integral(1, x), rel=1e-11)


@pytest.mark.parametrize("x", [0.0, 1e-3, 0.5, 3.0, 10.0, 29.0, 31.0, 45.0])
def test_i_matches_integral_representation(x):
    assert bessel.i0(x) == pytest.approx(i_integral(0, x), rel=1e-11)
    assert bessel.i1(x) == pytest.approx(i_integral(1, x), rel=1e-11, abs=1e-15)


def test_array_and_scalar_paths_agree():
    x = np.geomspace(1e-4, 60, 300)
    k0a, k1a = bessel.k0_k1(x)
    assert np.allclose(k0a, [bessel.k0(float(v)) for v in x], rtol=1e-14, atol=0)
    assert np.allclose(k1a, [bessel.k1(float(v)) for v in x], rtol=1e-14, atol=0)


def test_small_argument_limits():
    x = 1e-6
    assert bessel.k1(x) == pytest.approx(1 / x, rel=1e-9)
    assert bessel.k0(x) == pytest.approx(-math.log(x / 2) - bessel.EULER_GAMMA, rel=1e-9)
    assert bessel.i0(0.0) == 1.0
    assert bessel.i1(0.0) == 0.0


def test_domain_errors():
    with pytest.raises(ValueError):
        bessel.k0(0.0)
    with pytest.raises(ValueError):
        bessel.i0(-1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-3, max_value=40.0))
def test_wronskian(x):
    # I0 K1 + I1 K0 = 1/x
    k0, k1 = bessel.k0_k1(x)
    assert bessel.i0(x) * k1 + bessel.i1(x) * k0 == pytest.approx(1.0 / x, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-2, max_value=40.0))
def test_k_recurrence_derivative(x):
    # K0' = -K1, checked by a central difference
    d = 1e-5 * x
    deriv = (bessel.k0(x + d) - bessel.k0(x - d)) / (2 * d)
    assert deriv == pytest.approx(-bessel.k1(x), rel=1e-7)
