"""GLVX binary snapshots of a lattice field and optional momenta.

Layout (all little-endian):

    offset  size        content
    0       4           magic b"GLVX"
    4       4           format version, u32 (currently 1)
    8       4           N, u32
    12      8           L, f64
    20      8 * 2N^2    psi, re/im interleaved, row-major psi[i, j]
    ...     8 * (N-1)N  A on x-links, row-major ax[i, j], shape (N-1, N)
    ...     8 * N(N-1)  A on y-links, row-major ay[i, j], shape (N, N-1)
    ...     1           u8 flag: 1 if a momentum block follows, else 0
    ...                 momentum block: pi, E_x, E_y in the same layouts

The coupling lambda is not part of the format; readers supply it.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .lattice import FieldState, LatticeSpec, MomentumState

MAGIC = b"GLVX"
VERSION = 1
_HEADER = struct.Struct("<4sIId")


def _site_block(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<c16").tobytes()


def _link_block(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def encode(field_state: FieldState, momentum: MomentumState | None = None) -> bytes:
    lat = field_state.lattice
    parts = [_HEADER.pack(MAGIC, VERSION, lat.points, lat.extent),
             _site_block(field_state.psi), _link_block(field_state.ax), _link_block(field_state.ay)]
    if momentum is None:
        parts.append(b"\x00")
    else:
        if momentum.lattice != lat:
            raise ConfigurationError("momentum lattice differs from field lattice")
        parts += [b"\x01", _site_block(momentum.pi), _link_block(momentum.ex), _link_block(momentum.ey)]
    return b"".join(parts)


def decode(data: bytes, lam: float) -> tuple[FieldState, MomentumState | None]:
    if len(data) < _HEADER.size:
        raise ConfigurationError("truncated GLVX header")
    magic, version, n, extent = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ConfigurationError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ConfigurationError(f"unsupported GLVX version {version}")
    lattice = LatticeSpec(extent, n)
    pos = _HEADER.size

    def take(count: int, dtype: str, shape):
        nonlocal pos
        size = count * np.dtype(dtype).itemsize
        if pos + size > len(data):
            raise ConfigurationError("truncated GLVX payload")
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=pos).reshape(shape).astype(
            complex if dtype == "<c16" else float)
        pos += size
        return arr

    def block():
        return (take(n * n, "<c16", (n, n)), take((n - 1) * n, "<f8", (n - 1, n)),
                take(n * (n - 1), "<f8", (n, n - 1)))

    psi, ax, ay = block()
    if pos >= len(data):
        raise ConfigurationError("missing momentum flag")
    flag = data[pos]
    pos += 1
    momentum = None
    if flag == 1:
        momentum = MomentumState(lattice, *block())
    elif flag != 0:
        raise ConfigurationError(f"bad momentum flag {flag}")
    if pos != len(data):
        raise ConfigurationError("trailing bytes after GLVX payload")
    return FieldState(lattice, psi, ax, ay, float(lam)), momentum


def write_snapshot(path, field_state: FieldState, momentum: MomentumState | None = None) -> None:
    Path(path).write_bytes(encode(field_state, momentum))


def read_snapshot(path, lam: float) -> tuple[FieldState, MomentumState | None]:
    return decode(Path(path).read_bytes(), lam)
