from __future__ import annotations

import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glvortex import effective as ef
from glvortex.errors import DivergentIntegralError, ParameterError, SeparationError

from conftest import profile


@pytest.fixture(scope="module")
def pair_params(p1_two):
    return ef.EffectiveParams.from_profiles((1, 1), {1: p1_two})


@pytest.fixture(scope="module")
def mixed_params(p1_two):
    return ef.EffectiveParams.from_profiles((1, -1), {1: p1_two})


def pair(r, p=0.0):
    return ef.EffectiveState([[-r / 2, 0.0], [r / 2, 0.0]], [[p, 0.0], [-p, 0.0]])


def test_params_from_profiles(pair_params, p1_two):
    assert np.allclose(pair_params.gamma, p1_two.scalars.gamma_n)
    c = pair_params.coefficients
    assert c[0, 0] == 0 and c[0, 1] == c[1, 0] > 0


def test_params_validation():
    with pytest.raises(ParameterError):
        ef.EffectiveParams((1, 1), [1.0, -1.0], np.zeros((2, 2)), 2.0)
    with pytest.raises(ParameterError):
        ef.EffectiveParams((1, 1), [1.0], np.zeros((2, 2)), 2.0)


def test_single_vortex_has_no_interaction(p1_two):
    params = ef.EffectiveParams.from_profiles((1,), {1: p1_two})
    s = ef.EffectiveState([[1.0, 2.0]])
    assert ef.interaction_energy_asymptotic(s, params) == 0.0
    assert np.all(ef.force(s, params) == 0)
    assert np.array_equal(ef.step_effective_gf(s, params, 0.1).positions, s.positions)
    assert np.array_equal(ef.step_effective_mh(s, params, 0.1).positions, s.positions)


def test_interaction_sign_and_monotonicity(pair_params, mixed_params):
    w = [ef.interaction_energy_asymptotic(pair(r), pair_params) for r in (4.0, 6.0, 8.0, 12.0)]
    assert all(v > 0 for v in w)
    assert all(a > b for a, b in zip(w, w[1:]))
    assert ef.interaction_energy_asymptotic(pair(8.0), mixed_params) < 0


def test_interaction_closed_form(pair_params):
    c = pair_params.coefficients[0, 1]
    assert ef.interaction_energy_asymptotic(pair(8.0), pair_params) == pytest.approx(
        2 * c * math.exp(-8) / math.sqrt(8), rel=1e-14)


def test_type_one_rejected(p1_half):
    params = ef.EffectiveParams.from_profiles((1, 1), {1: p1_half})
    with pytest.raises(DivergentIntegralError):
        ef.interaction_energy_asymptotic(pair(8.0), params)
    with pytest.raises(DivergentIntegralError):
        ef.force(pair(8.0), params)


def test_force_matches_finite_difference(pair_params):
    z0 = np.array([[-3.7, 0.4], [4.1, -0.9], [0.3, 5.2]])
    params = ef.EffectiveParams((1, 1, -1), np.ones(3), pair_params.coefficients[0, 1] * (1 - np.eye(3)), 2.0)
    f = ef.force(ef.EffectiveState(z0), params)
    d = 1e-5
    for l in range(3):
        for m in range(2):
            zp, zm = z0.copy(), z0.copy()
            zp[l, m] += d
            zm[l, m] -= d
            fd = (ef.interaction_energy_asymptotic(ef.EffectiveState(zp), params)
                  - ef.interaction_energy_asymptotic(ef.EffectiveState(zm), params)) / (2 * d)
            assert -f[l, m] == pytest.approx(fd, abs=1e-8)


def test_pair_force_is_repulsive_along_line(pair_params):
    s = ef.EffectiveState([[1.0, 2.0], [5.0, 5.0]])
    f = ef.force(s, pair_params)
    away = (s.positions[0] - s.positions[1]) / 5.0
    assert np.dot(f[0], away) > 0
    assert abs(f[0][0] * away[1] - f[0][1] * away[0]) < 1e-15 * np.linalg.norm(f[0]) + 1e-300
    assert np.allclose(f[0], -f[1], rtol=1e-14, atol=0)


def test_gradient_flow_separation_increases(pair_params):
    s = pair(8.0)
    seps = [s.separation]
    for _ in range(200):
        s = ef.step_effective_gf(s, pair_params, 0.5)
        seps.append(s.separation)
    assert np.all(np.diff(seps) > 0)


def test_gradient_flow_mirror_symmetry(pair_params):
    s = ef.EffectiveState([[-3.1, 0.7], [3.1, -0.7]])
    for _ in range(100):
        s = ef.step_effective_gf(s, pair_params, 0.5)
    assert np.allclose(s.positions[0], -s.positions[1], rtol=0, atol=1e-14)


def test_gradient_flow_is_lyapunov(pair_params):
    params = ef.EffectiveParams((1, 1, 1), np.ones(3), pair_params.coefficients[0, 1] * (1 - np.eye(3)), 2.0)
    traj = ef.integrate(ef.EffectiveState([[-3.0, 0.0], [3.0, 0.5], [0.0, 4.0]]), params, 20.0, 0.1, False)
    assert np.all(np.diff(traj.interaction) <= 1e-15)


def test_second_order_drift_scales_with_dt_squared(pair_params):
    s = ef.EffectiveState([[-3.0, 0.2], [3.0, -0.2]], [[0.05, 0.0], [-0.05, 0.0]])
    drifts = []
    for dt in (0.2, 0.1):
        traj = ef.integrate(s, pair_params, 100.0, dt, True)
        drifts.append(np.max(np.abs(traj.energy - traj.energy[0])))
    assert 3.5 <= drifts[0] / drifts[1] <= 4.5


def test_head_on_collision_bounces(pair_params):
    traj = ef.integrate(pair(8.0, 0.05), pair_params, 80.0, 0.05, True)
    com = traj.positions.mean(axis=1)
    assert np.max(np.abs(com)) < 1e-14
    sep = traj.separations()
    k = int(np.argmin(sep))
    assert sep[k] > 2.0 and 0 < k < len(sep) - 1
    assert sep[-1] > sep[k]


def test_stationary_without_momentum(p1_two):
    params = ef.EffectiveParams.from_profiles((1,), {1: p1_two})
    s = ef.step_effective_mh(ef.EffectiveState([[0.5, 0.5]]), params, 0.1)
    assert np.all(s.momenta == 0)


def test_separation_error(pair_params):
    with pytest.raises(SeparationError):
        ef.step_effective_gf(pair(1.5), pair_params, 0.1)
    with pytest.raises(SeparationError):
        ef.integrate(pair(2.5, 0.5), pair_params, 10.0, 0.05, True)
    with pytest.raises(ParameterError):
        ef.step_effective_gf(pair(8.0), pair_params, 0.0)


def test_trajectory_resampling_and_csv(pair_params, tmp_path):
    traj = ef.integrate(pair(8.0, 0.01), pair_params, 1.0, 0.1, True)
    pos, mom = traj.at([0.0, 0.05, 1.0])
    assert np.allclose(pos[0], traj.positions[0]) and np.allclose(pos[2], traj.positions[-1])
    assert np.allclose(pos[1], 0.5 * (traj.positions[0] + traj.positions[1]))
    ef.write_effective_csv(tmp_path / "eff.csv", traj)
    rows = list(csv.reader(open(tmp_path / "eff.csv")))
    assert rows[0][:5] == ["t", "x0", "y0", "px0", "py0"]
    assert rows[0][-3:] == ["W", "effective_energy", "separation"]
    assert len(rows) == len(traj.times) + 1


@settings(max_examples=30, deadline=None)
@given(st.floats(2.5, 20.0), st.floats(0, 2 * math.pi), st.floats(-5, 5), st.floats(-5, 5))
def test_force_invariances(r, angle, x, y):
    params = ef.EffectiveParams((1, 1), np.ones(2), np.array([[0.0, 6.0], [6.0, 0.0]]), 2.0)
    e = np.array([math.cos(angle), math.sin(angle)])
    z = np.array([[x, y], [x, y]]) + 0.5 * r * np.array([-e, e])
    f = ef.force(ef.EffectiveState(z), params)
    # total force vanishes (translation invariance of W); repulsion along the axis
    assert np.allclose(f.sum(axis=0), 0.0, atol=1e-14 * np.abs(f).max() + 1e-300)
    assert np.dot(f[1], e) >= 0


# -- lattice interaction energies and forces

def test_direct_single_vortex_zero(p1_two, pair_lattice):
    assert ef.interaction_energy_direct([[0.0, 0.0]], (1,), p1_two, pair_lattice) == 0.0


def test_direct_gauge_independent(p1_two, wide_lattice):
    x, y = np.meshgrid(wide_lattice.coords, wide_lattice.coords, indexing="ij")
    chi = 2.0 * np.sin(0.3 * x + 0.2 * y) + 0.05 * x * y
    pos = [[-4.0, 0.0], [4.0, 0.0]]
    w0 = ef.interaction_energy_direct(pos, (1, 1), p1_two, wide_lattice)
    w1 = ef.interaction_energy_direct(pos, (1, 1), p1_two, wide_lattice, chi=chi)
    assert w1 == pytest.approx(w0, rel=1e-10)


def test_direct_matches_asymptotic_and_improves(p1_two, pair_params, wide_lattice):
    ratios = []
    for r in (8.0, 12.0):
        direct = ef.interaction_energy_direct([[-r / 2, 0.0], [r / 2, 0.0]], (1, 1), p1_two, wide_lattice)
        ratios.append(direct / ef.interaction_energy_asymptotic(pair(r), pair_params))
    assert 0.9 <= ratios[1] <= 1.1
    assert abs(ratios[1] - 1) < abs(ratios[0] - 1)


def test_direct_force_direction_and_antisymmetry(p1_two, pair_params, wide_lattice):
    pos = [[-5.0, 0.0], [5.0, 0.0]]
    fd = ef.force_direct(pos, (1, 1), p1_two, wide_lattice)
    fa = ef.force(ef.EffectiveState(pos), pair_params)
    for l in range(2):
        cos = np.dot(fd[l], fa[l]) / (np.linalg.norm(fd[l]) * np.linalg.norm(fa[l]))
        assert math.degrees(math.acos(min(cos, 1.0))) <= 5.0
    assert np.linalg.norm(fd[0] + fd[1]) <= 0.01 * np.linalg.norm(fd[0])


def test_direct_force_single_vortex_small(p1_two, pair_lattice):
    f = ef.force_direct([[0.0, 0.0]], (1,), p1_two, pair_lattice)
    assert np.all(np.abs(f) < 1e-4)
