"""Gauge-covariant lattice representation of (psi, A) and momenta (pi, E).

Non-compact links: A is stored at link midpoints and enters through the
parallel transporter exp(-i h A). The covariant forward difference is
(D_mu psi)_x = (exp(-i h A_{x,mu}) psi_{x+mu} - psi_x) / h, the magnetic field
lives on plaquettes, and the energy

    E = 1/2 sum h^2 { |D psi|^2 + B^2 + lam/2 (|psi|^2 - 1)^2 }

is exactly invariant under psi -> e^{i chi} psi, A -> A + grad_h chi. The outer
ring of sites and the links lying on it are Dirichlet data frozen to the
initial ansatz.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize

from . import _kernels
from .errors import (ConfigurationError, PlacementError, UndefinedDegreeError)
from .profiles import VortexProfile

BOUNDARY_MARGIN = 8.0


@dataclass(frozen=True)
class LatticeSpec:
    """Square lattice on [-L, L]^2 with N points per side, spacing h = 2L/(N-1)."""

    extent: float
    points: int

    def __post_init__(self):
        if self.points < 64:
            raise ConfigurationError(f"lattice needs at least 64 points per side, got {self.points}")
        if self.spacing > 0.25 + 1e-12:
            raise ConfigurationError(f"lattice spacing {self.spacing:.4g} exceeds 0.25")

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / (self.points - 1)

    h = spacing

    @property
    def coords(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.points)

    @classmethod
    def from_spacing(cls, h: float, min_extent: float) -> "LatticeSpec":
        """Smallest lattice with spacing h, half-width >= min_extent and an even
        number of points, so the origin (and every multiple of h) is a plaquette centre."""
        n = int(math.ceil(2.0 * min_extent / h)) + 1
        if n % 2:
            n += 1
        return cls((n - 1) * h / 2.0, n)

    def site_mask(self) -> np.ndarray:
        m = np.zeros((self.points, self.points), dtype=bool)
        m[1:-1, 1:-1] = True
        return m

    def xlink_mask(self) -> np.ndarray:
        m = np.ones((self.points - 1, self.points), dtype=bool)
        m[:, 0] = m[:, -1] = False
        return m

    def ylink_mask(self) -> np.ndarray:
        m = np.ones((self.points, self.points - 1), dtype=bool)
        m[0, :] = m[-1, :] = False
        return m


class FieldVector(NamedTuple):
    """Tangent vector with the layout of a field: site values plus x/y link values."""

    psi: np.ndarray
    ax: np.ndarray
    ay: np.ndarray


@dataclass(frozen=True, eq=False)
class FieldState:
    lattice: LatticeSpec
    psi: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    lam: float

    def vector(self) -> FieldVector:
        return FieldVector(self.psi, self.ax, self.ay)

    def with_arrays(self, psi, ax, ay) -> "FieldState":
        return replace(self, psi=psi, ax=ax, ay=ay)


@dataclass(frozen=True, eq=False)
class MomentumState:
    """Conjugate momenta (pi, E) = (-d_t psi, -d_t A) on the field layout."""

    lattice: LatticeSpec
    pi: np.ndarray
    ex: np.ndarray
    ey: np.ndarray

    def vector(self) -> FieldVector:
        return FieldVector(self.pi, self.ex, self.ey)

    @classmethod
    def zeros(cls, lattice: LatticeSpec) -> "MomentumState":
        n = lattice.points
        return cls(lattice, np.zeros((n, n), complex), np.zeros((n - 1, n)), np.zeros((n, n - 1)))

    @classmethod
    def from_vector(cls, lattice: LatticeSpec, vec: FieldVector) -> "MomentumState":
        return cls(lattice, vec.psi, vec.ax, vec.ay)


@dataclass(frozen=True, eq=False)
class VortexAnsatz:
    positions: np.ndarray
    degrees: tuple[int, ...]
    chi: np.ndarray | None = None
    momenta_p: np.ndarray | None = None
    zeta: np.ndarray | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "degrees", tuple(int(n) for n in self.degrees))
        if len(self.degrees) != pos.shape[0]:
            raise ConfigurationError("one degree per vortex position is required")
        if any(n == 0 for n in self.degrees):
            raise ConfigurationError("vortex degrees must be nonzero")
        if self.momenta_p is not None:
            p = np.asarray(self.momenta_p, dtype=float).reshape(-1, 2)
            if p.shape != pos.shape:
                raise ConfigurationError("momenta_p must have one 2-vector per vortex")
            object.__setattr__(self, "momenta_p", p)
        if pos.shape[0] > 1 and self.separation <= 2.0:
            raise PlacementError(f"vortex separation R = {self.separation:.3g} must exceed 2")

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    @property
    def separation(self) -> float:
        """R(z) = min_{j<k} |z_j - z_k| (inf for fewer than two vortices)."""
        return min_separation(self.positions)


def min_separation(positions) -> float:
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    if pos.shape[0] < 2:
        return math.inf
    d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    return float(d[np.triu_indices(pos.shape[0], 1)].min())


def check_placement(ansatz: VortexAnsatz, lattice: LatticeSpec, margin: float = BOUNDARY_MARGIN) -> None:
    for idx, z in enumerate(ansatz.positions):
        if np.hypot(*z) > lattice.extent - margin + 1e-9:
            raise PlacementError(
                f"vortex {idx} at ({z[0]:.4g}, {z[1]:.4g}) is closer than {margin} to the boundary "
                f"(|z| must be <= {lattice.extent - margin:.4g})")


# ---------------------------------------------------------------------------
# Sampling radial profiles

class RadialSampler:
    """Cubic-spline evaluation of f, a and their derivatives at arbitrary radii."""

    def __init__(self, profile: VortexProfile):
        self.profile = profile
        r = profile.r
        self.r_max = float(r[-1])
        self._u = CubicSpline(r, profile.u)
        self._w = CubicSpline(r, profile.w)

    def f(self, rho):
        return np.where(rho < self.r_max, 1.0 - self._u(np.minimum(rho, self.r_max)), 1.0)

    def one_minus_a(self, rho):
        return np.where(rho < self.r_max, self._w(np.minimum(rho, self.r_max)), 0.0)

    def df(self, rho):
        return np.where(rho < self.r_max, -self._u(np.minimum(rho, self.r_max), 1), 0.0)

    def da(self, rho):
        return np.where(rho < self.r_max, -self._w(np.minimum(rho, self.r_max), 1), 0.0)


_RHO_EPS = 1e-12


def _profile_for(profiles, n: int) -> VortexProfile:
    if isinstance(profiles, VortexProfile):
        profiles = {profiles.n: profiles}
    for key in (n, -n):
        if key in profiles:
            return profiles[key]
    raise ConfigurationError(f"no vortex profile supplied for degree {n}")


def _samplers(profiles, degrees) -> dict[int, RadialSampler]:
    out = {}
    for n in set(degrees):
        out[n] = RadialSampler(_profile_for(profiles, n))
    return out


def _coupling(profiles, degrees) -> float:
    lams = {_profile_for(profiles, n).lam for n in degrees}
    if len(lams) > 1:
        raise ConfigurationError(f"profiles disagree on lambda: {sorted(lams)}")
    return lams.pop()


def _single_psi(s: RadialSampler, n: int, dx, dy):
    rho = np.hypot(dx, dy)
    theta = np.arctan2(dy, dx)
    return s.f(rho) * np.exp(1j * n * theta)


def _single_a(s: RadialSampler, n: int, dx, dy):
    """A^(n) = n a(rho) grad(theta) = n a(rho) (-dy, dx) / rho^2."""
    rho2 = dx * dx + dy * dy
    rho = np.sqrt(rho2)
    a = 1.0 - s.one_minus_a(rho)
    coef = np.where(rho2 > 0, n * a / np.where(rho2 > 0, rho2, 1.0), 0.0)
    return -coef * dy, coef * dx


def _single_covariant_gradient(s: RadialSampler, n: int, dx, dy):
    """(grad_A psi) of one vortex: e^{in theta}[f' rhat + i n (1-a) f / rho thetahat]."""
    rho = np.maximum(np.hypot(dx, dy), _RHO_EPS)
    theta = np.arctan2(dy, dx)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    radial = s.df(rho)
    angular = 1j * n * s.one_minus_a(rho) * s.f(rho) / rho
    phase = np.exp(1j * n * theta)
    return phase * (radial * cos_t - angular * sin_t), phase * (radial * sin_t + angular * cos_t)


def _single_b(s: RadialSampler, n: int, dx, dy):
    """B^(n) = n a'(rho) / rho."""
    rho = np.maximum(np.hypot(dx, dy), _RHO_EPS)
    return n * s.da(rho) / rho


def _grids(lattice: LatticeSpec):
    x = lattice.coords
    h = lattice.h
    xm = x[:-1] + 0.5 * h
    sites = np.meshgrid(x, x, indexing="ij")
    xlinks = np.meshgrid(xm, x, indexing="ij")
    ylinks = np.meshgrid(x, xm, indexing="ij")
    return sites, xlinks, ylinks


def grad_sites(chi: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Forward-difference gradient of a site function onto x- and y-links."""
    return (chi[1:, :] - chi[:-1, :]) / h, (chi[:, 1:] - chi[:, :-1]) / h


def build_multivortex(profiles, ansatz: VortexAnsatz, lattice: LatticeSpec,
                      lam: float | None = None) -> FieldState:
    """Glue psi = e^{i chi} prod psi^(n_j)(x - z_j), A = sum A^(n_j)(x - z_j) + grad chi."""
    n = lattice.points
    if ansatz.count:
        check_placement(ansatz, lattice)
        samplers = _samplers(profiles, ansatz.degrees)
        lam = _coupling(profiles, ansatz.degrees) if lam is None else lam
    elif lam is None:
        raise ConfigurationError("vacuum configuration needs an explicit lambda")
    (sx, sy), (xx, xy), (yx, yy) = _grids(lattice)
    psi = np.ones((n, n), dtype=complex)
    ax = np.zeros((n - 1, n))
    ay = np.zeros((n, n - 1))
    for z, deg in zip(ansatz.positions, ansatz.degrees):
        s = samplers[deg]
        psi *= _single_psi(s, deg, sx - z[0], sy - z[1])
        ax += _single_a(s, deg, xx - z[0], xy - z[1])[0]
        ay += _single_a(s, deg, yx - z[0], yy - z[1])[1]
    field_state = FieldState(lattice, psi, ax, ay, float(lam))
    if ansatz.chi is not None:
        field_state = gauge_transform(field_state, ansatz.chi)
    return field_state


def vacuum(lattice: LatticeSpec, lam: float) -> FieldState:
    return build_multivortex({}, VortexAnsatz(np.zeros((0, 2)), ()), lattice, lam=lam)


# ---------------------------------------------------------------------------
# Diagnostics

def inner(u: FieldVector, v: FieldVector, h: float) -> float:
    """Real L2 inner product h^2 sum [Re(conj(u_psi) v_psi) + u_A . v_A]."""
    s = np.sum((np.conj(u.psi) * v.psi).real) + np.sum(u.ax * v.ax) + np.sum(u.ay * v.ay)
    return float(h * h * s)


def norm(u: FieldVector, h: float) -> float:
    return math.sqrt(inner(u, u, h))


def energy(field_state: FieldState) -> float:
    return _kernels.energy(field_state.psi, field_state.ax, field_state.ay,
                           field_state.lam, field_state.lattice.h)


def gl_gradient(field_state: FieldState, mask_boundary: bool = True) -> FieldVector:
    """Exact L2 gradient of the discrete energy; frozen boundary entries zeroed."""
    g = _kernels.gradient(field_state.psi, field_state.ax, field_state.ay,
                          field_state.lam, field_state.lattice.h, mask_boundary)
    return FieldVector(*g)


def magnetic_field(field_state: FieldState) -> np.ndarray:
    return _kernels.plaquette_field(field_state.ax, field_state.ay, field_state.lattice.h)


def flux(field_state: FieldState) -> float:
    return float(field_state.lattice.h ** 2 * np.sum(magnetic_field(field_state)))


def boundary_loop(a: np.ndarray) -> np.ndarray:
    """Outermost ring of a site array, counter-clockwise from the lower-left corner."""
    return np.concatenate((a[:-1, 0], a[-1, :-1], a[:0:-1, -1], a[0, :0:-1]))


def winding(values: np.ndarray) -> float:
    """Sum of principal-value phase increments around a closed loop, over 2 pi."""
    ph = np.angle(values)
    d = np.diff(np.concatenate((ph, ph[:1])))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return float(np.sum(d) / (2 * np.pi))


def degree(field_state: FieldState) -> int:
    loop = boundary_loop(field_state.psi)
    if np.min(np.abs(loop)) <= 0.5:
        raise UndefinedDegreeError("|psi| <= 0.5 somewhere on the boundary loop")
    return int(round(winding(loop)))


def supercurrent(field_state: FieldState) -> tuple[np.ndarray, np.ndarray]:
    """j = Im(conj(psi) exp(-ihA) psi') / h on x- and y-links."""
    psi, h = field_state.psi, field_state.lattice.h
    jx = np.imag(np.conj(psi[:-1, :]) * np.exp(-1j * h * field_state.ax) * psi[1:, :]) / h
    jy = np.imag(np.conj(psi[:, :-1]) * np.exp(-1j * h * field_state.ay) * psi[:, 1:]) / h
    return jx, jy


def gauge_transform(field_state: FieldState, chi) -> FieldState:
    chi = np.broadcast_to(np.asarray(chi, dtype=float), field_state.psi.shape)
    gx, gy = grad_sites(chi, field_state.lattice.h)
    return field_state.with_arrays(np.exp(1j * chi) * field_state.psi,
                                   field_state.ax + gx, field_state.ay + gy)


def laplacian(g: np.ndarray, h: float) -> np.ndarray:
    """div grad on the full lattice graph, so that <grad g, grad z> = <g, -laplacian(z)> exactly."""
    gx, gy = grad_sites(g, h)
    return divergence(gx, gy, h)


def divergence(ex: np.ndarray, ey: np.ndarray, h: float) -> np.ndarray:
    """Adjoint of -grad_sites: (div E)_x = sum of link values in minus out, over h."""
    n = ey.shape[0]
    out = np.zeros((n, n))
    out[:-1, :] -= ex
    out[1:, :] += ex
    out[:, :-1] -= ey
    out[:, 1:] += ey
    return -out / h


def gauge_operator(field_state: FieldState, zeta: np.ndarray) -> np.ndarray:
    """K zeta = (-Delta + |psi|^2) zeta."""
    return -laplacian(zeta, field_state.lattice.h) + np.abs(field_state.psi) ** 2 * zeta


def gauge_mode(field_state: FieldState, gamma) -> FieldVector:
    """G_gamma = (i gamma psi, grad gamma)."""
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), field_state.psi.shape)
    gx, gy = grad_sites(gamma, field_state.lattice.h)
    return FieldVector(1j * gamma * field_state.psi, gx, gy)


def translational_mode(profiles, ansatz: VortexAnsatz, lattice: LatticeSpec, j: int, k: int) -> FieldVector:
    """T_jk = -(e^{i chi} [prod_{l != j} psi_l] (grad_{A,k} psi)_j, B_j e_k^perp).

    k = 0 is the x direction, k = 1 the y direction; e_x^perp = (0, 1),
    e_y^perp = (-1, 0).
    """
    samplers = _samplers(profiles, ansatz.degrees)
    (sx, sy), (xx, xy), (yx, yy) = _grids(lattice)
    n = lattice.points
    prod = np.ones((n, n), dtype=complex)
    for l, (z, deg) in enumerate(zip(ansatz.positions, ansatz.degrees)):
        if l != j:
            prod *= _single_psi(samplers[deg], deg, sx - z[0], sy - z[1])
    zj, nj = ansatz.positions[j], ansatz.degrees[j]
    s = samplers[nj]
    cov = _single_covariant_gradient(s, nj, sx - zj[0], sy - zj[1])[k]
    psi_part = prod * cov
    if ansatz.chi is not None:
        psi_part = psi_part * np.exp(1j * ansatz.chi)
    ax = np.zeros((n - 1, n))
    ay = np.zeros((n, n - 1))
    if k == 0:
        ay = _single_b(s, nj, yx - zj[0], yy - zj[1])
    else:
        ax = -_single_b(s, nj, xx - zj[0], xy - zj[1])
    return FieldVector(-psi_part, -ax, -ay)


def _mask_vector(vec: FieldVector, lattice: LatticeSpec) -> FieldVector:
    return FieldVector(np.where(lattice.site_mask(), vec.psi, 0),
                       np.where(lattice.xlink_mask(), vec.ax, 0.0),
                       np.where(lattice.ylink_mask(), vec.ay, 0.0))


def build_momentum(ansatz: VortexAnsatz, profiles, lattice: LatticeSpec,
                   field_state: FieldState | None = None) -> MomentumState:
    """Momentum (pi, E) = -sum_j p_j . T_j + G_zeta, zero on the frozen boundary.

    With pi = -d_t psi the minus sign makes the vortices start with velocity
    z_dot_j = p_j; see docs/math_notes.md.
    """
    n = lattice.points
    pi = np.zeros((n, n), dtype=complex)
    ex = np.zeros((n - 1, n))
    ey = np.zeros((n, n - 1))
    if ansatz.momenta_p is not None:
        for j, p in enumerate(ansatz.momenta_p):
            for k in range(2):
                if p[k] != 0.0:
                    t = translational_mode(profiles, ansatz, lattice, j, k)
                    pi -= p[k] * t.psi
                    ex -= p[k] * t.ax
                    ey -= p[k] * t.ay
    if ansatz.zeta is not None:
        if field_state is None:
            field_state = build_multivortex(profiles, ansatz, lattice)
        g = gauge_mode(field_state, ansatz.zeta)
        pi = pi + g.psi
        ex = ex + g.ax
        ey = ey + g.ay
    masked = _mask_vector(FieldVector(pi, ex, ey), lattice)
    return MomentumState.from_vector(lattice, masked)


def _check_same_lattice(field_state: FieldState, momentum: MomentumState) -> None:
    if field_state.lattice != momentum.lattice or field_state.psi.shape != momentum.pi.shape:
        raise ConfigurationError("field and momentum live on different lattices")


def kinetic_energy(momentum: MomentumState) -> float:
    v = momentum.vector()
    return 0.5 * inner(v, v, momentum.lattice.h)


def hamiltonian(field_state: FieldState, momentum: MomentumState) -> float:
    """H = E_GL + 1/2 ||(pi, E)||^2."""
    _check_same_lattice(field_state, momentum)
    return energy(field_state) + kinetic_energy(momentum)


def gauss_density(field_state: FieldState, momentum: MomentumState) -> np.ndarray:
    """Interior-site constraint density Im(conj(psi) pi) - div E.

    <G_gamma, (pi, E)> = <gamma, Im(conj(psi) pi) - div E>, so the density is
    the momentum map of the lattice gauge symmetry; it is conserved by the
    temporal-gauge Maxwell-Higgs flow.
    """
    _check_same_lattice(field_state, momentum)
    h = field_state.lattice.h
    dens = np.imag(np.conj(field_state.psi) * momentum.pi) - divergence(momentum.ex, momentum.ey, h)
    return dens[1:-1, 1:-1]


def gauss_residual(field_state: FieldState, momentum: MomentumState) -> float:
    dens = gauss_density(field_state, momentum)
    return float(field_state.lattice.h * np.sqrt(np.sum(dens**2)))


# ---------------------------------------------------------------------------
# Lattice-exact vortex cores

def _pack(field_state: FieldState) -> np.ndarray:
    lat = field_state.lattice
    psi = field_state.psi[lat.site_mask()]
    return np.concatenate((psi.real, psi.imag, field_state.ax[lat.xlink_mask()],
                           field_state.ay[lat.ylink_mask()]))


def _unpack(x: np.ndarray, template: FieldState) -> FieldState:
    lat = template.lattice
    sm, xm, ym = lat.site_mask(), lat.xlink_mask(), lat.ylink_mask()
    ns, nx = sm.sum(), xm.sum()
    psi = template.psi.copy()
    psi[sm] = x[:ns] + 1j * x[ns:2 * ns]
    ax = template.ax.copy()
    ax[xm] = x[2 * ns:2 * ns + nx]
    ay = template.ay.copy()
    ay[ym] = x[2 * ns + nx:]
    return template.with_arrays(psi, ax, ay)


def relax_field(field_state: FieldState, gtol: float = 1e-10, max_iter: int = 20000) -> FieldState:
    """Minimise the discrete energy over the free (non-boundary) variables."""
    lat = field_state.lattice
    h2 = lat.h ** 2
    sm, xm, ym = lat.site_mask(), lat.xlink_mask(), lat.ylink_mask()

    def fun(x):
        st = _unpack(x, field_state)
        g = gl_gradient(st)
        gp = g.psi[sm]
        grad = h2 * np.concatenate((gp.real, gp.imag, g.ax[xm], g.ay[ym]))
        return energy(st), grad

    res = minimize(fun, _pack(field_state), jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "maxcor": 30, "gtol": gtol * h2, "ftol": 0.0,
                            "maxfun": 2 * max_iter})
    return _unpack(res.x, field_state)


@dataclass(frozen=True, eq=False)
class LatticeCore:
    """A single vortex relaxed to a static solution of the discrete equations.

    The core sits at the centre plaquette of its own lattice; it is glued into
    other lattices with the same spacing by integer site shifts.
    """

    state: FieldState
    n: int

    @property
    def h(self) -> float:
        return self.state.lattice.h

    def conjugate(self) -> "LatticeCore":
        st = self.state
        return LatticeCore(st.with_arrays(np.conj(st.psi), -st.ax, -st.ay), -self.n)


def relaxed_core(profile: VortexProfile, h: float, extent: float, gtol: float = 1e-10) -> LatticeCore:
    lattice = LatticeSpec.from_spacing(h, extent)
    glued = build_multivortex(profile, VortexAnsatz([[0.0, 0.0]], (profile.n,)), lattice)
    return LatticeCore(relax_field(glued, gtol=gtol), profile.n)


def _site_offset(value: float, h: float) -> int:
    k = value / h
    if abs(k - round(k)) > 1e-6:
        raise PlacementError(f"position {value} is not a multiple of the core lattice spacing {h}")
    return int(round(k))


def glue_cores(cores: Mapping[int, LatticeCore] | LatticeCore, ansatz: VortexAnsatz,
               lattice: LatticeSpec) -> FieldState:
    """Glue lattice-exact cores by integer shifts (positions must be multiples of h)."""
    if isinstance(cores, LatticeCore):
        cores = {cores.n: cores}
    check_placement(ansatz, lattice)
    n = lattice.points
    psi = np.ones((n, n), dtype=complex)
    ax = np.zeros((n - 1, n))
    ay = np.zeros((n, n - 1))
    lam = None
    for z, deg in zip(ansatz.positions, ansatz.degrees):
        core = cores.get(deg) or (cores[-deg].conjugate() if -deg in cores else None)
        if core is None:
            raise ConfigurationError(f"no lattice core for degree {deg}")
        if abs(core.h - lattice.h) > 1e-12 or (core.state.lattice.points - n) % 2:
            raise ConfigurationError("core lattice is incompatible with the target lattice")
        lam = core.state.lam
        base = (core.state.lattice.points - n) // 2
        oi = base - _site_offset(z[0], lattice.h)
        oj = base - _site_offset(z[1], lattice.h)
        if oi < 1 or oj < 1 or oi + n > core.state.lattice.points - 1 or oj + n > core.state.lattice.points - 1:
            raise PlacementError("core lattice too small to cover the target lattice at this shift")
        psi *= core.state.psi[oi:oi + n, oj:oj + n]
        ax += core.state.ax[oi:oi + n - 1, oj:oj + n]
        ay += core.state.ay[oi:oi + n, oj:oj + n - 1]
    field_state = FieldState(lattice, psi, ax, ay, float(lam))
    if ansatz.chi is not None:
        field_state = gauge_transform(field_state, ansatz.chi)
    return field_state
