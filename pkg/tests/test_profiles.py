from __future__ import annotations

import math

import numpy as np
import pytest

from glvortex import bessel
from glvortex.errors import DivergentIntegralError, ParameterError, RangeError, SolverError
from glvortex.profiles import (ProfileParams, VortexProfile, beta_coefficient, decay_exponents,
                               fit_bessel_amplitude, gamma_coefficient, interaction_coefficient,
                               load_profile, m_lambda, ode_residual, save_profile, solve_profile,
                               source_integral, vortex_energy)

from conftest import profile

# n=1, lambda=1 energy on an 8192-point grid (r_max=25), recorded once
E1_LAMBDA1_FINE = 3.6340694274542273


def vacuum_profile(n=1, lam=1.0):
    params = ProfileParams(n, lam)
    r = np.linspace(0, params.r_max, params.num_points)
    return VortexProfile.from_values(params, r, np.ones_like(r), np.ones_like(r))


def test_boundary_values(p1_one):
    assert p1_one.f[0] == 0.0 and p1_one.a[0] == 0.0
    assert p1_one.f[-1] >= 1 - 1e-4
    assert p1_one.a[-1] >= 1 - 1e-4
    assert p1_one.r[0] == 0.0 and np.all(np.diff(p1_one.r) > 0)


@pytest.mark.parametrize("n,lam", [(1, 0.5), (1, 1.0), (2, 1.0), (1, 2.0), (-1, 2.0), (3, 0.8)])
def test_profile_invariants(n, lam):
    p = profile(n, lam)
    assert ode_residual(p) <= 1e-8
    assert np.all(np.diff(p.f) >= -1e-14)
    assert np.all(np.diff(p.a) >= -1e-14)
    assert np.all((p.f >= 0) & (p.f <= 1)) and np.all((p.a >= 0) & (p.a <= 1))
    assert p.scalars.m_lambda == min(math.sqrt(2 * lam), 2.0)
    assert p.scalars.energy > 0 and p.scalars.gamma_n > 0 and p.scalars.beta_n > 0


def test_bogomolny_energy(p1_half):
    assert vortex_energy(p1_half) == pytest.approx(math.pi, rel=2e-3)


def test_bogomolny_energy_scales_with_degree():
    assert vortex_energy(profile(2, 0.5)) == pytest.approx(2 * math.pi, rel=2e-3)


def test_core_power_law(p2_one):
    sel = (p2_one.r > 0.02) & (p2_one.r < 0.1)
    slope = np.polyfit(np.log(p2_one.r[sel]), np.log(p2_one.f[sel]), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.05)


def test_vacuum_scalars():
    vac = vacuum_profile()
    assert vortex_energy(vac) == 0.0
    assert gamma_coefficient(vac) == 0.0


def test_energy_regression_against_fine_grid():
    fine = solve_profile(ProfileParams(1, 1.0, 25.0, 8192))
    assert vortex_energy(fine) == pytest.approx(E1_LAMBDA1_FINE, rel=1e-6)
    # Richardson extrapolation from coarser grids lands on the same value
    e2 = vortex_energy(solve_profile(ProfileParams(1, 1.0, 25.0, 2048)))
    e4 = vortex_energy(solve_profile(ProfileParams(1, 1.0, 25.0, 4096)))
    assert e4 + (e4 - e2) / 3 == pytest.approx(E1_LAMBDA1_FINE, rel=1e-6)


def test_second_order_refinement():
    e = [vortex_energy(solve_profile(ProfileParams(1, 1.0, 25.0, n))) for n in (1024, 2048, 4096)]
    ratio = (e[0] - e[1]) / (e[1] - e[2])
    assert 3.0 <= ratio <= 5.0


def test_energy_increases_with_degree():
    for lam in (0.5, 1.0, 2.0):
        energies = [profile(n, lam).scalars.energy for n in (1, 2, 3)]
        assert energies[0] < energies[1] < energies[2]


@pytest.mark.parametrize("n,lam", [(1, 0.5), (1, 1.0), (2, 1.0), (1, 2.0)])
def test_gamma_equals_energy(n, lam):
    # Derrick scaling makes the magnetic and potential energies equal, so gamma_n = E
    p = profile(n, lam)
    assert gamma_coefficient(p) == pytest.approx(vortex_energy(p), rel=1e-4)


def test_beta_synthetic_exact():
    r = np.linspace(0, 25, 2048)
    values = np.zeros_like(r)
    values[1:] = 2.0 * bessel.k1(r[1:])
    fit = fit_bessel_amplitude(r, values, 1, (8.0, 12.0))
    assert fit.beta == pytest.approx(2.0, rel=1e-14)
    assert fit.residual < 1e-12


def test_beta_fit_quality(p1_one):
    fit = beta_coefficient(p1_one, (8.0, 12.0))
    assert fit.beta > 0
    assert fit.residual < 0.01


def test_beta_conjugation_symmetry(p1_two):
    neg = profile(-1, 2.0)
    assert beta_coefficient(neg, (8.0, 12.0)).beta == pytest.approx(beta_coefficient(p1_two, (8.0, 12.0)).beta,
                                                                  rel=1e-12)
    assert np.allclose(neg.magnetic_field, -p1_two.magnetic_field, atol=1e-15)


def test_beta_window_errors(p1_one):
    with pytest.raises(RangeError):
        beta_coefficient(p1_one, (4.0, 10.0))
    with pytest.raises(RangeError):
        beta_coefficient(p1_one, (10.0, 24.0))


def test_k0_amplitude_equals_source_integral(p1_two):
    # (-Delta + 1) B = source; the far field is (source moment) K0(r)
    assert p1_two.scalars.beta_n == pytest.approx(source_integral(p1_two), rel=1e-3)


@pytest.mark.parametrize("lam,expected", [(2.0, 2.0), (0.5, 1.0), (0.6, math.sqrt(1.2)), (1.0, math.sqrt(2.0))])
def test_decay_rate_f(lam, expected):
    rate_f, _ = decay_exponents(profile(1, lam))
    assert rate_f == pytest.approx(expected, rel=0.05)


@pytest.mark.parametrize("lam", [0.6, 1.0, 2.0])
def test_decay_rate_b(lam):
    _, rate_b = decay_exponents(profile(1, lam))
    assert rate_b == pytest.approx(1.0, rel=0.05)


def test_m_lambda_exact():
    for lam in (0.1, 0.5, 1.0, 2.0, 3.0):
        assert m_lambda(lam) == min(math.sqrt(2 * lam), 2.0)


def test_interaction_coefficient_symmetric_positive(p1_two):
    c = interaction_coefficient(p1_two, p1_two)
    assert c > 0
    assert c == interaction_coefficient(p1_two, p1_two)
    other = profile(-1, 2.0)
    assert interaction_coefficient(p1_two, other) == pytest.approx(interaction_coefficient(other, p1_two),
                                                                    rel=1e-3)


def test_interaction_coefficient_type_one_diverges(p1_half):
    with pytest.raises(DivergentIntegralError):
        interaction_coefficient(p1_half, p1_half)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        ProfileParams(0, 1.0)
    with pytest.raises(ParameterError):
        ProfileParams(1, 0.0)
    with pytest.raises(ParameterError):
        ProfileParams(1, -1.0)
    with pytest.raises(ParameterError):
        ProfileParams(1, 1.0, num_points=100)
    with pytest.raises(ParameterError):
        ProfileParams(1, 0.1, r_max=25.0)  # needs r_max >= 20 / m_lambda


def test_solver_failure_carries_residual():
    with pytest.raises(SolverError) as info:
        solve_profile(ProfileParams(1, 1.0), max_iter=1)
    assert info.value.residual > 0


def test_save_load_roundtrip(tmp_path, p1_one):
    csv_path, json_path = save_profile(p1_one, tmp_path / "prof")
    header = csv_path.read_text().splitlines()[0].split(",")
    assert header[:4] == ["r", "f", "a", "B"]
    back = load_profile(tmp_path / "prof")
    assert back.scalars == p1_one.scalars
    assert np.array_equal(back.u, p1_one.u) and np.array_equal(back.w, p1_one.w)
