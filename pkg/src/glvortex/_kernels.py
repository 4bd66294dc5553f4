"""Row-band numba kernels for the lattice energy and its exact gradient.

Layout: psi[i, j] on sites (x_i, y_j); ax[i, j] on the x-link (i,j)->(i+1,j);
ay[i, j] on the y-link (i,j)->(i,j+1); B[i, j] on the plaquette with lower-left
corner (i, j). Every kernel handles site rows [i0, i1) and writes only those
rows, so any banding gives bit-identical output.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

_pool: ThreadPoolExecutor | None = None
_workers = max(1, int(os.environ.get("GLVX_THREADS", "1") or 1))


def set_workers(n: int) -> None:
    global _workers, _pool
    n = max(1, int(n))
    if n != _workers and _pool is not None:
        _pool.shutdown()
        _pool = None
    _workers = n


def get_workers() -> int:
    return _workers


def run_banded(kernel, n_rows: int, *args) -> None:
    """Call ``kernel(*args, i0, i1)`` over contiguous row bands."""
    global _pool
    if _workers == 1 or n_rows < 2 * _workers:
        kernel(*args, 0, n_rows)
        return
    if _pool is None:
        _pool = ThreadPoolExecutor(max_workers=_workers)
    edges = np.linspace(0, n_rows, _workers + 1).astype(int)
    futures = [_pool.submit(kernel, *args, int(edges[k]), int(edges[k + 1]))
               for k in range(_workers) if edges[k + 1] > edges[k]]
    for fut in futures:
        fut.result()


@njit(cache=True, nogil=True)
def plaquettes(ax, ay, h, out, i0, i1):
    n = ay.shape[0]
    for i in range(i0, min(i1, n - 1)):
        for j in range(n - 1):
            out[i, j] = (ax[i, j] + ay[i + 1, j] - ax[i, j + 1] - ay[i, j]) / h


@njit(cache=True, nogil=True)
def energy_rows(psi, ax, ay, B, lam, h, out, i0, i1):
    """Per-row energy contributions; row i owns site i, its +x link, its y-links and plaquettes."""
    n = psi.shape[0]
    h2 = h * h
    for i in range(i0, i1):
        acc = 0.0
        for j in range(n):
            p = psi[i, j]
            if i < n - 1:
                ux = np.cos(h * ax[i, j]) - 1j * np.sin(h * ax[i, j])
                d = ux * psi[i + 1, j] - p
                acc += 0.5 * (d.real * d.real + d.imag * d.imag)
            if j < n - 1:
                uy = np.cos(h * ay[i, j]) - 1j * np.sin(h * ay[i, j])
                d = uy * psi[i, j + 1] - p
                acc += 0.5 * (d.real * d.real + d.imag * d.imag)
            if i < n - 1 and j < n - 1:
                acc += 0.5 * h2 * B[i, j] * B[i, j]
            m2 = p.real * p.real + p.imag * p.imag - 1.0
            acc += 0.25 * lam * h2 * m2 * m2
        out[i] = acc


@njit(cache=True, nogil=True)
def transporters(ax, ay, h, ux, uy, i0, i1):
    """Link phases exp(-i h A) for rows [i0, i1)."""
    n = ay.shape[0]
    for i in range(i0, i1):
        if i < n - 1:
            for j in range(n):
                ux[i, j] = np.cos(h * ax[i, j]) - 1j * np.sin(h * ax[i, j])
        for j in range(n - 1):
            uy[i, j] = np.cos(h * ay[i, j]) - 1j * np.sin(h * ay[i, j])


@njit(cache=True, nogil=True)
def gradient_rows(psi, ux, uy, B, lam, h, mask, gpsi, gax, gay, i0, i1):
    """L2 gradient (d energy / d variable) / h^2; frozen Dirichlet ring zeroed if mask."""
    n = psi.shape[0]
    inv_h2 = 1.0 / (h * h)
    inv_h = 1.0 / h
    for i in range(i0, i1):
        for j in range(n):
            p = psi[i, j]
            g = 0j
            if i < n - 1:
                fx = ux[i, j] * psi[i + 1, j]
                g += p - fx
            if i > 0:
                g += p - np.conj(ux[i - 1, j]) * psi[i - 1, j]
            if j < n - 1:
                fy = uy[i, j] * psi[i, j + 1]
                g += p - fy
            if j > 0:
                g += p - np.conj(uy[i, j - 1]) * psi[i, j - 1]
            m2 = p.real * p.real + p.imag * p.imag - 1.0
            g = g * inv_h2 + lam * m2 * p
            if mask and (i == 0 or j == 0 or i == n - 1 or j == n - 1):
                g = 0j
            gpsi[i, j] = g
            # x-link (i,j)->(i+1,j): -Im(conj(psi) U psi')/h + (B[i,j] - B[i,j-1])/h
            if i < n - 1:
                if mask and (j == 0 or j == n - 1):
                    gax[i, j] = 0.0
                else:
                    q = p.real * fx.imag - p.imag * fx.real
                    b_up = B[i, j] if j < n - 1 else 0.0
                    b_dn = B[i, j - 1] if j > 0 else 0.0
                    gax[i, j] = (b_up - b_dn - q) * inv_h
            # y-link (i,j)->(i,j+1): -Im(conj(psi) U psi')/h + (B[i-1,j] - B[i,j])/h
            if j < n - 1:
                if mask and (i == 0 or i == n - 1):
                    gay[i, j] = 0.0
                else:
                    q = p.real * fy.imag - p.imag * fy.real
                    b_l = B[i - 1, j] if i > 0 else 0.0
                    b_r = B[i, j] if i < n - 1 else 0.0
                    gay[i, j] = (b_l - b_r - q) * inv_h


def plaquette_field(ax, ay, h):
    n = ay.shape[0]
    out = np.empty((n - 1, n - 1))
    run_banded(plaquettes, n - 1, ax, ay, h, out)
    return out


def energy(psi, ax, ay, lam, h) -> float:
    B = plaquette_field(ax, ay, h)
    rows = np.empty(psi.shape[0])
    run_banded(energy_rows, psi.shape[0], psi, ax, ay, B, lam, h, rows)
    total = 0.0
    for v in rows:  # fixed summation order
        total += v
    return total


def gradient(psi, ax, ay, lam, h, mask=True):
    B = plaquette_field(ax, ay, h)
    ux = np.empty(ax.shape, dtype=complex)
    uy = np.empty(ay.shape, dtype=complex)
    run_banded(transporters, psi.shape[0], ax, ay, h, ux, uy)
    gpsi = np.empty_like(psi)
    gax = np.empty_like(ax)
    gay = np.empty_like(ay)
    run_banded(gradient_rows, psi.shape[0], psi, ux, uy, B, lam, h, mask, gpsi, gax, gay)
    return gpsi, gax, gay
