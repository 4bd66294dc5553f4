"""Time stepping for the dissipative and Hamiltonian lattice models.

Gradient flow: explicit RK4 for d_t u = -E'(u), u = (psi, A).
Maxwell-Higgs: kick-drift-kick Stormer-Verlet for the separable system
d_t u = -w, d_t w = E'(u) with momenta w = (pi, E) = -d_t u.
The Dirichlet ring is frozen because the masked gradient vanishes there and
momenta are zero on it.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import lattice as lt
from .errors import BlowUpError, ConfigError
from .lattice import FieldState, MomentumState
from .snapshot import write_snapshot
from .tracking import TrackSet, locate_vortices, match_step

MAX_CFL = 0.2
MAX_COURANT = 0.4


@dataclass(frozen=True)
class GfRunConfig:
    t_end: float
    cfl_factor: float = 0.1
    snapshot_every: int = 100

    def __post_init__(self):
        if not 0.0 < self.cfl_factor <= MAX_CFL:
            raise ConfigError(f"must lie in (0, {MAX_CFL}]", "run.cfl_factor")
        if self.t_end < 0:
            raise ConfigError("must be nonnegative", "run.t_end")
        if self.snapshot_every < 1:
            raise ConfigError("must be >= 1", "run.snapshot_every")

    def dt(self, h: float) -> float:
        return self.cfl_factor * h * h


@dataclass(frozen=True)
class MhRunConfig:
    t_end: float
    courant_factor: float = 0.25
    snapshot_every: int = 40

    def __post_init__(self):
        if not 0.0 < self.courant_factor <= MAX_COURANT:
            raise ConfigError(f"must lie in (0, {MAX_COURANT}]", "run.courant_factor")
        if self.t_end < 0:
            raise ConfigError("must be nonnegative", "run.t_end")
        if self.snapshot_every < 1:
            raise ConfigError("must be >= 1", "run.snapshot_every")

    def dt(self, h: float) -> float:
        return self.courant_factor * h


def _check_finite(arrays, step: int) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise BlowUpError("non-finite field values", step)


def step_gradient_flow(state: FieldState, dt: float, step: int = 0) -> FieldState:
    """One RK4 step of d_t u = -E'(u) with the boundary ring frozen."""
    def rate(psi, ax, ay):
        g = lt.gl_gradient(state.with_arrays(psi, ax, ay))
        return -g.psi, -g.ax, -g.ay

    u0 = (state.psi, state.ax, state.ay)
    k1 = rate(*u0)
    k2 = rate(*(u + 0.5 * dt * k for u, k in zip(u0, k1)))
    k3 = rate(*(u + 0.5 * dt * k for u, k in zip(u0, k2)))
    k4 = rate(*(u + dt * k for u, k in zip(u0, k3)))
    new = tuple(u + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + d)
                for u, a, b, c, d in zip(u0, k1, k2, k3, k4))
    _check_finite(new, step)
    return state.with_arrays(*new)


def step_maxwell_higgs(field_state: FieldState, momentum: MomentumState, dt: float,
                       step: int = 0, gradient: lt.FieldVector | None = None):
    """One Stormer-Verlet step; returns (field, momentum, gradient at the new field)."""
    g = lt.gl_gradient(field_state) if gradient is None else gradient
    half = dt / 2.0
    pi = momentum.pi + half * g.psi
    ex = momentum.ex + half * g.ax
    ey = momentum.ey + half * g.ay
    new_field = field_state.with_arrays(field_state.psi - dt * pi, field_state.ax - dt * ex,
                                        field_state.ay - dt * ey)
    g = lt.gl_gradient(new_field)
    new_mom = MomentumState(momentum.lattice, pi + half * g.psi, ex + half * g.ax, ey + half * g.ay)
    _check_finite((new_field.psi, new_field.ax, new_field.ay, new_mom.pi, new_mom.ex, new_mom.ey), step)
    return new_field, new_mom, g


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    tracks: TrackSet = field(default_factory=TrackSet)
    energy_series: list[float] = field(default_factory=list)
    gauss_series: list[float] = field(default_factory=list)
    final_field: FieldState | None = None
    final_momentum: MomentumState | None = None

    def positions(self) -> np.ndarray:
        return self.tracks.positions()

    def separations(self) -> np.ndarray:
        return np.array([lt.min_separation(p) for p in self.positions()])


class DiagnosticsSink:
    """Streams (t, energy, gauss_residual, x_k, y_k, n_k ...) rows to a CSV file."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._header_done = False

    def write(self, t: float, energy: float, gauss: float, observations) -> None:
        if not self._header_done:
            head = ["t", "energy", "gauss_residual"]
            for k in range(len(observations)):
                head += [f"x{k}", f"y{k}", f"n{k}"]
            self._writer.writerow(head)
            self._header_done = True
        row = [repr(float(t)), repr(float(energy)), repr(float(gauss))]
        for obs in observations:
            row += [repr(obs.position[0]), repr(obs.position[1]), obs.charge]
        self._writer.writerow(row)
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _record(traj: Trajectory, t: float, field_state: FieldState, momentum, sink, snapshot_dir,
            index: int, track: bool) -> None:
    if momentum is None:
        energy, gauss = lt.energy(field_state), math.nan
    else:
        energy, gauss = lt.hamiltonian(field_state, momentum), lt.gauss_residual(field_state, momentum)
    traj.times.append(t)
    traj.energy_series.append(energy)
    traj.gauss_series.append(gauss)
    obs = []
    if track:
        obs = locate_vortices(field_state)
        traj.tracks = TrackSet.start(obs, t) if not traj.tracks.tracks else match_step(traj.tracks, obs, t)
        obs = traj.tracks.latest()
    if sink is not None:
        sink.write(t, energy, gauss, obs)
    if snapshot_dir is not None:
        write_snapshot(Path(snapshot_dir) / f"snap_{index:06d}.glvx", field_state, momentum)


def evolve(field_state: FieldState, config: GfRunConfig | MhRunConfig,
           momentum: MomentumState | None = None, sink: DiagnosticsSink | None = None,
           snapshot_dir=None, track: bool = True,
           callback: Callable[[float, FieldState, MomentumState | None], None] | None = None) -> Trajectory:
    """Run the stepper selected by the config type and record diagnostics at cadence."""
    h = field_state.lattice.h
    dt = config.dt(h)
    n_steps = int(round(config.t_end / dt))
    hamiltonian_run = isinstance(config, MhRunConfig)
    if hamiltonian_run and momentum is None:
        momentum = MomentumState.zeros(field_state.lattice)
    if momentum is not None and momentum.lattice != field_state.lattice:
        raise ConfigError("momentum and field lattices differ", "lattice")
    if snapshot_dir is not None:
        Path(snapshot_dir).mkdir(parents=True, exist_ok=True)
    traj = Trajectory()
    mom = momentum if hamiltonian_run else None
    _record(traj, 0.0, field_state, mom, sink, snapshot_dir, 0, track)
    grad = None
    for step in range(1, n_steps + 1):
        if hamiltonian_run:
            field_state, mom, grad = step_maxwell_higgs(field_state, mom, dt, step, grad)
        else:
            field_state = step_gradient_flow(field_state, dt, step)
        if step % config.snapshot_every == 0 or step == n_steps:
            t = step * dt
            _record(traj, t, field_state, mom, sink, snapshot_dir, step, track)
            if callback is not None:
                callback(t, field_state, mom)
    traj.final_field = field_state
    traj.final_momentum = mom
    return traj
