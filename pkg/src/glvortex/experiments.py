"""Experiment orchestration and PDE-vs-effective comparison reports."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import effective as eff
from . import lattice as lt
from .config import ExperimentConfig, serialize
from .errors import ConfigurationError, TopologyChangeError
from .evolve import DiagnosticsSink, GfRunConfig, MhRunConfig, Trajectory, evolve
from .lattice import FieldState, LatticeSpec, MomentumState, VortexAnsatz
from .profiles import ProfileParams, VortexProfile, cached_profile, save_profile
from .snapshot import write_snapshot
from .tracking import TrackSet, write_tracks_csv


def epsilon(r0: float) -> float:
    """Small parameter of a configuration with minimal separation r0: e^{-r0}/sqrt(r0)."""
    return math.exp(-r0) / math.sqrt(r0)


# ---------------------------------------------------------------------------
# Comparison

@dataclass
class ComparisonReport:
    model: str
    epsilon: float
    h: float
    times: list[float]
    deviation: list[float]                  # max_j |z_pde - z_eff| per time
    separation: list[float]                 # PDE minimal separation per time
    velocity_times: list[float]             # interior times with centred differences
    law_residual: list[float]               # GF: max_j |gamma z' + grad W| / |grad W|
    velocity_residual: list[float]          # MH: max_j |z'_pde - p_eff|
    momentum_residual: list[float]          # MH: max_j |gamma z''_pde + grad W|
    thresholds: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)

    @property
    def sup_deviation(self) -> float:
        return max(self.deviation) if self.deviation else 0.0

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> str:
        d = asdict(self)
        d["sup_deviation"] = self.sup_deviation
        d["passed"] = self.passed
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ComparisonReport":
        d = json.loads(text)
        d.pop("sup_deviation", None)
        d.pop("passed", None)
        return cls(**d)


def compute_verdicts(report: ComparisonReport) -> dict:
    """Verdicts as a pure function of the stored series and thresholds."""
    th = report.thresholds
    v = {"deviation": report.sup_deviation <= th["deviation"]}
    if report.model in ("gradient_flow", "effective_gf"):
        if report.law_residual:
            v["law_residual"] = max(report.law_residual) <= th["law_residual"]
    else:
        if report.velocity_residual and "velocity_residual" in th:
            v["velocity_residual"] = max(report.velocity_residual) <= th["velocity_residual"]
    return v


def _positions_and_times(tracks) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(tracks, TrackSet):
        return tracks.times(), tracks.positions()
    if isinstance(tracks, eff.EffectiveTrajectory):
        return tracks.times, tracks.positions
    times, positions = tracks
    return np.asarray(times, dtype=float), np.asarray(positions, dtype=float)


def _align(pde_pos: np.ndarray, eff_pos0: np.ndarray) -> np.ndarray:
    """Permutation k -> j mapping PDE tracks to effective vortices by initial proximity."""
    m = eff_pos0.shape[0]
    if pde_pos.shape[1] != m:
        raise TopologyChangeError(f"track count {pde_pos.shape[1]} differs from {m} effective vortices")
    order = np.empty(m, dtype=int)
    free = set(range(pde_pos.shape[1]))
    for j in range(m):
        k = min(free, key=lambda k: np.hypot(*(pde_pos[0, k] - eff_pos0[j])))
        order[j] = k
        free.remove(k)
    return order


def compare_trajectories(pde_tracks, effective_tracks, params: eff.EffectiveParams, model: str,
                         h: float, thresholds: dict | None = None, p0_scale: float | None = None,
                         r0: float | None = None) -> ComparisonReport:
    """Compare PDE tracks with an effective trajectory resampled to the PDE times.

    Velocities come from centred differences of the PDE tracks at interior
    snapshot times. ``thresholds`` may set law_residual, deviation (absolute)
    and velocity_residual (absolute).
    """
    t_pde, z_pde = _positions_and_times(pde_tracks)
    if isinstance(effective_tracks, eff.EffectiveTrajectory):
        z_eff_full, p_eff = effective_tracks.at(t_pde)
    else:
        t_e, z_e = _positions_and_times(effective_tracks)
        z_eff_full = np.stack([np.stack([np.interp(t_pde, t_e, z_e[:, j, c]) for c in range(2)], -1)
                               for j in range(z_e.shape[1])], 1)
        p_eff = np.gradient(z_eff_full, t_pde, axis=0) if len(t_pde) > 1 else np.zeros_like(z_eff_full)
    z_pde = z_pde[:, _align(z_pde, z_eff_full[0]), :]
    deviation = np.max(np.linalg.norm(z_pde - z_eff_full, axis=2), axis=1)
    separation = [lt.min_separation(z) for z in z_pde]

    law, vel, mom = [], [], []
    vt = []
    gamma = params.gamma[:, None]
    if len(t_pde) >= 3:
        dt_f = t_pde[2:] - t_pde[1:-1]
        dt_b = t_pde[1:-1] - t_pde[:-2]
        zdot = ((z_pde[2:] - z_pde[1:-1]) * (dt_b / dt_f)[:, None, None]
                + (z_pde[1:-1] - z_pde[:-2]) * (dt_f / dt_b)[:, None, None]) / (dt_f + dt_b)[:, None, None]
        zddot = 2.0 * ((z_pde[2:] - z_pde[1:-1]) / dt_f[:, None, None]
                       - (z_pde[1:-1] - z_pde[:-2]) / dt_b[:, None, None]) / (dt_f + dt_b)[:, None, None]
        vt = list(t_pde[1:-1])
        for i in range(len(vt)):
            grad_w = -eff.force(eff.EffectiveState(z_pde[i + 1]), params)
            if model in ("gradient_flow", "effective_gf"):
                res = np.linalg.norm(gamma * zdot[i] + grad_w, axis=1)
                law.append(float(np.max(res / np.linalg.norm(grad_w, axis=1))))
            else:
                vel.append(float(np.max(np.linalg.norm(zdot[i] - p_eff[i + 1], axis=1))))
                mom.append(float(np.max(np.linalg.norm(gamma * zddot[i] + grad_w, axis=1))))
    if r0 is None:
        r0 = separation[0] if separation else math.inf
    th = {"law_residual": 0.3, "deviation": 1.5 * h}
    if p0_scale is not None:
        th["velocity_residual"] = 0.3 * p0_scale
    th.update(thresholds or {})
    report = ComparisonReport(model, epsilon(r0) if math.isfinite(r0) else 0.0, h, list(map(float, t_pde)),
                              list(map(float, deviation)), list(map(float, separation)),
                              list(map(float, vt)), law, vel, mom, th)
    report.verdicts = compute_verdicts(report)
    return report


# ---------------------------------------------------------------------------
# Setup helpers

def profiles_for(config: ExperimentConfig) -> dict[int, VortexProfile]:
    out = {}
    for n in sorted({abs(v.n) for v in config.vortices}):
        out[n] = cached_profile(ProfileParams(n, config.lam, config.profile.r_max, config.profile.num_points))
    return out


@lru_cache(maxsize=8)
def _core(profile_params: ProfileParams, h: float, extent: float) -> lt.LatticeCore:
    return lt.relaxed_core(cached_profile(profile_params), h, extent)


def core_for(profile: VortexProfile, lattice: LatticeSpec) -> lt.LatticeCore:
    """Relaxed single-vortex core large enough to cover ``lattice`` at any admissible shift."""
    extent = 2.0 * lattice.extent - lt.BOUNDARY_MARGIN + 2.0
    extent = math.ceil(extent / lattice.h) * lattice.h
    return _core(profile.params, lattice.h, extent)


def initial_state(config: ExperimentConfig, profiles=None) -> tuple[FieldState, MomentumState | None, VortexAnsatz]:
    profiles = profiles or profiles_for(config)
    lattice = config.lattice_spec()
    momenta = config.momenta() if config.is_hamiltonian and config.vortices else None
    ansatz = VortexAnsatz(np.array(config.positions(), dtype=float).reshape(-1, 2), config.degrees(),
                          momenta_p=momenta)
    if config.initial.glue == "lattice_core" and ansatz.count:
        cores = {n: core_for(p, lattice) for n, p in profiles.items()}
        state = lt.glue_cores(cores, ansatz, lattice)
    else:
        state = lt.build_multivortex(profiles, ansatz, lattice, lam=config.lam)
    if config.initial.perturbation > 0:
        rng = np.random.default_rng(config.initial.seed)
        noise = rng.normal(size=state.psi.shape) + 1j * rng.normal(size=state.psi.shape)
        noise[~lattice.site_mask()] = 0.0
        state = state.with_arrays(state.psi + config.initial.perturbation * noise, state.ax, state.ay)
    momentum = None
    if config.model == "maxwell_higgs":
        momentum = lt.build_momentum(ansatz, profiles, lattice, state) if ansatz.count else \
            MomentumState.zeros(lattice)
    return state, momentum, ansatz


def effective_params(config: ExperimentConfig, profiles=None) -> eff.EffectiveParams:
    profiles = profiles or profiles_for(config)
    return eff.EffectiveParams.from_profiles(config.degrees(), profiles)


def run_effective(config: ExperimentConfig, params: eff.EffectiveParams | None = None,
                  t_end: float | None = None) -> eff.EffectiveTrajectory:
    params = params or effective_params(config)
    state = eff.EffectiveState(config.positions(), config.momenta() if config.is_hamiltonian else None)
    return eff.integrate(state, params, config.run.t_end if t_end is None else t_end,
                         config.run.effective_dt, config.is_hamiltonian)


# ---------------------------------------------------------------------------
# Orchestration

@dataclass
class ExperimentResult:
    output_dir: Path
    trajectory: Trajectory | None = None
    effective: eff.EffectiveTrajectory | None = None
    report: ComparisonReport | None = None
    files: dict = field(default_factory=dict)


def run_experiment(config: ExperimentConfig, compare: bool = True) -> ExperimentResult:
    """Solve profiles, build the initial data, run the selected model and write artifacts."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = ExperimentResult(out)
    if not config.vortices and not config.is_pde:
        raise ConfigurationError("effective models need at least one vortex")
    profiles = profiles_for(config)
    for n, prof in profiles.items():
        csv_path, json_path = save_profile(prof, out / f"profile_n{n}")
        result.files[f"profile_n{n}"] = str(csv_path)
    (out / "config.toml").write_text(serialize(config))

    if not config.is_pde:
        traj = run_effective(config)
        path = out / "effective.csv"
        eff.write_effective_csv(path, traj)
        result.effective = traj
        result.files["effective"] = str(path)
        return result

    state, momentum, ansatz = initial_state(config, profiles)
    lattice = state.lattice
    run = config.run
    if config.model == "gradient_flow":
        run_cfg = GfRunConfig(run.t_end, run.cfl_factor, run.snapshot_every)
    else:
        run_cfg = MhRunConfig(run.t_end, run.courant_factor, run.snapshot_every)
    diag_path = out / "diagnostics.csv"
    snap_dir = out / "snapshots" if run.write_snapshots else None
    with DiagnosticsSink(diag_path) as sink:
        traj = evolve(state, run_cfg, momentum=momentum, sink=sink, snapshot_dir=snap_dir,
                      track=bool(config.vortices))
    result.trajectory = traj
    result.files["diagnostics"] = str(diag_path)
    if config.vortices:
        tracks_path = out / "tracks.csv"
        write_tracks_csv(tracks_path, traj.tracks)
        result.files["tracks"] = str(tracks_path)
    final = out / "final.glvx"
    write_snapshot(final, traj.final_field, traj.final_momentum)
    result.files["final"] = str(final)

    if compare and len(config.vortices) >= 2 and config.lam > 0.5:
        params = eff.EffectiveParams.from_profiles(config.degrees(), profiles)
        eff_traj = run_effective(config, params)
        eff.write_effective_csv(out / "effective.csv", eff_traj)
        result.effective = eff_traj
        p0 = max((math.hypot(v.px, v.py) for v in config.vortices), default=0.0)
        thresholds = {"law_residual": config.compare.law_residual,
                      "deviation": config.compare.deviation_in_h * lattice.h}
        if config.model == "maxwell_higgs" and p0 > 0:
            thresholds["velocity_residual"] = config.compare.velocity_fraction * p0
        report = compare_trajectories(traj.tracks, eff_traj, params, config.model, lattice.h, thresholds,
                                      p0_scale=p0 if p0 > 0 else None, r0=ansatz.separation)
        (out / "report.json").write_text(report.to_json())
        result.report = report
        result.files["report"] = str(out / "report.json")
    return result
