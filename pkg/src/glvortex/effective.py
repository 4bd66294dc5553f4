"""Point-vortex dynamics driven by the pair interaction energy W.

Asymptotic form: W(z) = sum_{j != k} n_j n_k c_jk e^{-d_jk} / sqrt(d_jk), summed
over ordered pairs. Forces are the exact negative gradient of this W.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import lattice as lt
from .errors import DivergentIntegralError, ParameterError, SeparationError
from .lattice import LatticeSpec, VortexAnsatz
from .profiles import VortexProfile, interaction_coefficient

MIN_SEPARATION = 2.0


@dataclass(frozen=True, eq=False)
class EffectiveParams:
    degrees: tuple[int, ...]
    gamma: np.ndarray
    coefficients: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(n) for n in self.degrees))
        g = np.asarray(self.gamma, dtype=float)
        c = np.asarray(self.coefficients, dtype=float)
        m = len(self.degrees)
        if g.shape != (m,) or c.shape != (m, m):
            raise ParameterError("gamma must have shape (m,) and coefficients (m, m)")
        if np.any(g <= 0):
            raise ParameterError("gamma entries must be positive")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_profiles(cls, degrees: Sequence[int], profiles) -> "EffectiveParams":
        profs = [lt._profile_for(profiles, n) for n in degrees]
        lam = profs[0].lam
        if any(p.lam != lam for p in profs):
            raise ParameterError("profiles disagree on lambda")
        gamma = np.array([p.scalars.gamma_n for p in profs])
        m = len(profs)
        coef = np.zeros((m, m))
        if lam > 0.5:
            for j in range(m):
                for k in range(m):
                    if j != k:
                        coef[j, k] = interaction_coefficient(profs[j], profs[k])
        return cls(tuple(degrees), gamma, coef, lam)


@dataclass(frozen=True, eq=False)
class EffectiveState:
    positions: np.ndarray
    momenta: np.ndarray = field(default=None)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "positions", pos)
        mom = np.zeros_like(pos) if self.momenta is None else np.asarray(self.momenta, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "momenta", mom)

    @property
    def separation(self) -> float:
        return lt.min_separation(self.positions)


def _require_type_ii(params: EffectiveParams) -> None:
    if params.lam <= 0.5:
        raise DivergentIntegralError(
            f"lambda={params.lam} <= 1/2: no asymptotic interaction law in the Type-I regime; "
            "use interaction_energy_direct")


def _check_separation(positions: np.ndarray) -> None:
    r = lt.min_separation(positions)
    if r <= MIN_SEPARATION:
        raise SeparationError(f"vortex separation {r:.3g} fell to {MIN_SEPARATION} or below")


def interaction_energy_asymptotic(state: EffectiveState, params: EffectiveParams) -> float:
    _require_type_ii(params)
    z = state.positions
    n = params.degrees
    total = 0.0
    for j in range(len(n)):
        for k in range(len(n)):
            if j != k:
                d = math.hypot(*(z[j] - z[k]))
                total += n[j] * n[k] * params.coefficients[j, k] * math.exp(-d) / math.sqrt(d)
    return total


def force(state: EffectiveState, params: EffectiveParams) -> np.ndarray:
    """-grad_{z_l} W for every vortex l, shape (m, 2)."""
    _require_type_ii(params)
    z = state.positions
    n = params.degrees
    out = np.zeros_like(z)
    for j in range(len(n)):
        for k in range(len(n)):
            if j == k:
                continue
            diff = z[j] - z[k]
            d = math.hypot(*diff)
            # d/dd [e^{-d}/sqrt(d)] = -e^{-d}/sqrt(d) (1 + 1/(2d)); pair (j,k) and (k,j) both touch j
            dw = -(params.coefficients[j, k] + params.coefficients[k, j]) * n[j] * n[k] \
                * math.exp(-d) / math.sqrt(d) * (1.0 + 0.5 / d)
            out[j] -= dw * diff / d
    return out


def effective_energy(state: EffectiveState, params: EffectiveParams) -> float:
    kinetic = 0.5 * float(np.sum(params.gamma * np.sum(state.momenta**2, axis=1)))
    return kinetic + interaction_energy_asymptotic(state, params)


def step_effective_gf(state: EffectiveState, params: EffectiveParams, dt: float) -> EffectiveState:
    """One RK4 step of gamma_j z_j' = -grad_j W."""
    if dt <= 0:
        raise ParameterError("dt must be positive")
    _check_separation(state.positions)
    inv_g = 1.0 / params.gamma[:, None]

    def rate(z):
        return force(EffectiveState(z), params) * inv_g

    z = state.positions
    k1 = rate(z)
    k2 = rate(z + 0.5 * dt * k1)
    k3 = rate(z + 0.5 * dt * k2)
    k4 = rate(z + dt * k3)
    new = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    _check_separation(new)
    return EffectiveState(new, np.zeros_like(new))


def step_effective_mh(state: EffectiveState, params: EffectiveParams, dt: float) -> EffectiveState:
    """One velocity-Verlet step of z' = p, gamma p' = -grad W."""
    if dt <= 0:
        raise ParameterError("dt must be positive")
    _check_separation(state.positions)
    inv_g = 1.0 / params.gamma[:, None]
    p_half = state.momenta + 0.5 * dt * force(state, params) * inv_g
    z_new = state.positions + dt * p_half
    _check_separation(z_new)
    p_new = p_half + 0.5 * dt * force(EffectiveState(z_new), params) * inv_g
    return EffectiveState(z_new, p_new)


@dataclass
class EffectiveTrajectory:
    times: np.ndarray
    positions: np.ndarray  # (T, m, 2)
    momenta: np.ndarray    # (T, m, 2)
    interaction: np.ndarray
    energy: np.ndarray

    def separations(self) -> np.ndarray:
        return np.array([lt.min_separation(p) for p in self.positions])

    def at(self, times) -> tuple[np.ndarray, np.ndarray]:
        """Linear resampling of positions and momenta at the requested times."""
        times = np.asarray(times, dtype=float)
        m = self.positions.shape[1]
        pos = np.empty((times.size, m, 2))
        mom = np.empty((times.size, m, 2))
        for j in range(m):
            for c in range(2):
                pos[:, j, c] = np.interp(times, self.times, self.positions[:, j, c])
                mom[:, j, c] = np.interp(times, self.times, self.momenta[:, j, c])
        return pos, mom


def integrate(state: EffectiveState, params: EffectiveParams, t_end: float, dt: float,
              second_order: bool, record_every: int = 1) -> EffectiveTrajectory:
    stepper = step_effective_mh if second_order else step_effective_gf
    n_steps = int(round(t_end / dt))
    times, pos, mom, w, e = [], [], [], [], []

    def record(t, s):
        times.append(t)
        pos.append(s.positions.copy())
        mom.append(s.momenta.copy())
        w.append(interaction_energy_asymptotic(s, params))
        e.append(effective_energy(s, params))

    record(0.0, state)
    for step in range(1, n_steps + 1):
        state = stepper(state, params, dt)
        if step % record_every == 0 or step == n_steps:
            record(step * dt, state)
    return EffectiveTrajectory(np.array(times), np.array(pos), np.array(mom), np.array(w), np.array(e))


def write_effective_csv(path, traj: EffectiveTrajectory) -> None:
    m = traj.positions.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        head = ["t"]
        for j in range(m):
            head += [f"x{j}", f"y{j}", f"px{j}", f"py{j}"]
        w.writerow(head + ["W", "effective_energy", "separation"])
        for i, t in enumerate(traj.times):
            row = [repr(float(t))]
            for j in range(m):
                row += [repr(float(v)) for v in (*traj.positions[i, j], *traj.momenta[i, j])]
            row += [repr(float(traj.interaction[i])), repr(float(traj.energy[i])),
                    repr(lt.min_separation(traj.positions[i]))]
            w.writerow(row)


# ---------------------------------------------------------------------------
# Lattice interaction energy and forces

def _single_energies(profiles, positions, degrees, lattice: LatticeSpec, lam: float | None) -> float:
    total = 0.0
    for z, n in zip(positions, degrees):
        single = lt.build_multivortex(profiles, VortexAnsatz([z], (n,)), lattice, lam)
        total += lt.energy(single)
    return total


def interaction_energy_direct(positions, degrees, profiles, lattice: LatticeSpec,
                              chi: np.ndarray | None = None) -> float:
    """Lattice energy of the glued configuration minus the energies of each vortex
    glued alone at the same position on the same lattice."""
    ansatz = VortexAnsatz(positions, degrees, chi=chi)
    glued = lt.build_multivortex(profiles, ansatz, lattice)
    return lt.energy(glued) - _single_energies(profiles, ansatz.positions, ansatz.degrees, lattice, None)


def force_direct(positions, degrees, profiles, lattice: LatticeSpec) -> np.ndarray:
    """-<E'(v), T_lm> for every vortex l and direction m, shape (m, 2)."""
    ansatz = VortexAnsatz(positions, degrees)
    glued = lt.build_multivortex(profiles, ansatz, lattice)
    grad = lt.gl_gradient(glued)
    out = np.zeros((ansatz.count, 2))
    for l in range(ansatz.count):
        for m in range(2):
            t = lt.translational_mode(profiles, ansatz, lattice, l, m)
            out[l, m] = -lt.inner(grad, t, lattice.h)
    return out
