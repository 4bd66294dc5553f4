"""Vortex detection on lattice fields and identity tracking across snapshots.

A plaquette hosts a vortex when the principal-value phase increments of psi
around its four corners add up to a nonzero multiple of 2 pi. A single-valued
gauge transform changes every increment by a difference of chi values that
telescopes around the loop, so the winding (and hence detection) is gauge
safe. The sub-grid position is the zero of the bilinear interpolant of the
corner values after parallel transport to the lower-left corner; transporting
makes every corner pick up the same gauge phase, so the zero is gauge
invariant too.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegeneratePlaquetteError, TopologyChangeError
from .lattice import FieldState

MATCH_RADIUS = 1.0
_DEGENERATE = 1e-12
_WINDING_TOL = 1e-6


@dataclass(frozen=True)
class VortexObservation:
    position: tuple[float, float]
    charge: int
    core_value: float


def _wrap(d: np.ndarray) -> np.ndarray:
    return (d + np.pi) % (2.0 * np.pi) - np.pi


def plaquette_winding(psi: np.ndarray) -> np.ndarray:
    """Integer winding of the raw phase of psi around every plaquette (counter-clockwise)."""
    ph = np.angle(psi)
    c00, c10, c11, c01 = ph[:-1, :-1], ph[1:, :-1], ph[1:, 1:], ph[:-1, 1:]
    total = _wrap(c10 - c00) + _wrap(c11 - c10) + _wrap(c01 - c11) + _wrap(c00 - c01)
    k = np.rint(total / (2.0 * np.pi))
    bad = (k != 0) & (np.abs(total - 2.0 * np.pi * k) > _WINDING_TOL)
    if np.any(bad):
        raise DegeneratePlaquetteError("plaquette circulation is not a multiple of 2 pi")
    return k.astype(int)


def _bilinear_zero(c00: complex, c10: complex, c01: complex, c11: complex) -> tuple[float, float]:
    """Zero (s, t) in [0,1]^2 of P(s,t) = (a + b s) + t (c + d s)."""
    a, b, c, d = c00, c10 - c00, c01 - c00, c11 - c10 - c01 + c00
    # Im[(a + b s) conj(c + d s)] = 0 is a quadratic in s
    q2 = (b * np.conj(d)).imag
    q1 = (a * np.conj(d)).imag + (b * np.conj(c)).imag
    q0 = (a * np.conj(c)).imag
    if abs(q2) > 1e-14 * (abs(q1) + abs(q0)):
        roots = np.roots([q2, q1, q0])
    elif abs(q1) > 0:
        roots = np.array([-q0 / q1])
    else:
        roots = np.array([0.5])
    best, best_err = (0.5, 0.5), math.inf
    for s in roots:
        if abs(complex(s).imag) > 1e-9:
            continue
        s = float(complex(s).real)
        den = c + d * s
        if abs(den) == 0:
            continue
        t = float((-(a + b * s) / den).real)
        err = max(0.0, -s, s - 1.0, -t, t - 1.0)
        if err < best_err:
            best, best_err = (s, t), err
    s, t = best
    return min(max(s, 0.0), 1.0), min(max(t, 0.0), 1.0)


def _transported_corners(field_state: FieldState, i: int, j: int):
    psi, h = field_state.psi, field_state.lattice.h
    ux0 = np.exp(-1j * h * field_state.ax[i, j])
    uy0 = np.exp(-1j * h * field_state.ay[i, j])
    ux1 = np.exp(-1j * h * field_state.ax[i, j + 1])
    uy1 = np.exp(-1j * h * field_state.ay[i + 1, j])
    p1 = ux0 * uy1  # along x then y
    p2 = uy0 * ux1  # along y then x
    mid = p1 * np.exp(0.5j * np.angle(p2 / p1))
    return psi[i, j], ux0 * psi[i + 1, j], uy0 * psi[i, j + 1], mid * psi[i + 1, j + 1]


def locate_vortices(field_state: FieldState, aggregate_radius: float | None = None) -> list[VortexObservation]:
    psi = field_state.psi
    lat = field_state.lattice
    h = lat.h
    mod = np.abs(psi)
    corner_max = np.maximum.reduce([mod[:-1, :-1], mod[1:, :-1], mod[:-1, 1:], mod[1:, 1:]])
    if np.any(corner_max < _DEGENERATE):
        raise DegeneratePlaquetteError("|psi| vanishes on all four corners of a plaquette")
    wind = plaquette_winding(psi)
    x = lat.coords
    raw = []
    for i, j in zip(*np.nonzero(wind)):
        s, t = _bilinear_zero(*_transported_corners(field_state, i, j))
        raw.append((x[i] + s * h, x[j] + t * h, int(wind[i, j])))
    radius = 2.0 * h if aggregate_radius is None else aggregate_radius
    clusters: list[list[tuple[float, float, int]]] = []
    for item in raw:
        for cl in clusters:
            if np.sign(cl[0][2]) == np.sign(item[2]) and any(
                    math.hypot(item[0] - o[0], item[1] - o[1]) <= radius + 1e-12 for o in cl):
                cl.append(item)
                break
        else:
            clusters.append([item])
    out = []
    for cl in clusters:
        q = sum(c[2] for c in cl)
        wts = np.array([abs(c[2]) for c in cl], dtype=float)
        px = float(np.dot(wts, [c[0] for c in cl]) / wts.sum())
        py = float(np.dot(wts, [c[1] for c in cl]) / wts.sum())
        ii = int(np.clip(round((px + lat.extent) / h), 0, lat.points - 1))
        jj = int(np.clip(round((py + lat.extent) / h), 0, lat.points - 1))
        out.append(VortexObservation((px, py), q, float(mod[ii, jj])))
    out.sort(key=lambda o: (o.position[0], o.position[1]))
    return out


@dataclass
class TrackSet:
    """Per-vortex time series; tracks[k] is a list of (t, observation)."""

    tracks: list[list[tuple[float, VortexObservation]]] = field(default_factory=list)

    @classmethod
    def start(cls, observations: Sequence[VortexObservation], t: float = 0.0) -> "TrackSet":
        return cls([[(t, obs)] for obs in observations])

    @property
    def count(self) -> int:
        return len(self.tracks)

    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.tracks[0]]) if self.tracks else np.zeros(0)

    def positions(self) -> np.ndarray:
        """Array of shape (num_times, num_vortices, 2)."""
        if not self.tracks:
            return np.zeros((0, 0, 2))
        return np.array([[obs.position for _, obs in tr] for tr in self.tracks]).transpose(1, 0, 2)

    def charges(self) -> tuple[int, ...]:
        return tuple(tr[0][1].charge for tr in self.tracks)

    def latest(self) -> list[VortexObservation]:
        return [tr[-1][1] for tr in self.tracks]


def match_step(prev: TrackSet, current: Sequence[VortexObservation], t: float | None = None,
               radius: float = MATCH_RADIUS) -> TrackSet:
    """Greedy nearest-neighbour continuation restricted to equal charges."""
    last = prev.latest()
    if len(current) != len(last) or sorted(o.charge for o in current) != sorted(o.charge for o in last):
        raise TopologyChangeError(
            f"vortex content changed: {sorted(o.charge for o in last)} -> {sorted(o.charge for o in current)}")
    if t is None:
        t = prev.tracks[0][-1][0] + 1.0 if prev.tracks else 0.0
    pairs = []
    for k, old in enumerate(last):
        for m, new in enumerate(current):
            if old.charge == new.charge:
                d = math.hypot(new.position[0] - old.position[0], new.position[1] - old.position[1])
                pairs.append((d, k, m))
    pairs.sort()
    assign: dict[int, int] = {}
    used: set[int] = set()
    for d, k, m in pairs:
        if k in assign or m in used:
            continue
        if d > radius:
            raise TopologyChangeError(f"vortex {k} moved {d:.3g} > matching radius {radius}")
        assign[k] = m
        used.add(m)
    tracks = [tr + [(t, current[assign[k]])] for k, tr in enumerate(prev.tracks)]
    return TrackSet(tracks)


def write_tracks_csv(path, tracks: TrackSet) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "vortex_id", "charge", "x", "y", "core_value"])
        for k, tr in enumerate(tracks.tracks):
            for t, obs in tr:
                w.writerow([repr(float(t)), k, obs.charge, repr(obs.position[0]), repr(obs.position[1]),
                            repr(obs.core_value)])


def read_tracks_csv(path) -> TrackSet:
    rows: dict[int, list[tuple[float, VortexObservation]]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            obs = VortexObservation((float(row["x"]), float(row["y"])), int(row["charge"]),
                                    float(row["core_value"]))
            rows.setdefault(int(row["vortex_id"]), []).append((float(row["t"]), obs))
    return TrackSet([rows[k] for k in sorted(rows)])
