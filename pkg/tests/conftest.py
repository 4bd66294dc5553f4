from __future__ import annotations

import pytest

from glvortex import lattice as lt
from glvortex.experiments import core_for
from glvortex.profiles import ProfileParams, cached_profile

H = 0.125


def profile(n: int, lam: float):
    return cached_profile(ProfileParams(n, lam))


@pytest.fixture(scope="session")
def p1_half():
    return profile(1, 0.5)


@pytest.fixture(scope="session")
def p1_one():
    return profile(1, 1.0)


@pytest.fixture(scope="session")
def p2_one():
    return profile(2, 1.0)


@pytest.fixture(scope="session")
def p1_two():
    return profile(1, 2.0)


@pytest.fixture(scope="session")
def pair_lattice():
    """Lattice for a pair at separation 8 (half-width 12.0625)."""
    return lt.LatticeSpec.from_spacing(H, 12.0)


@pytest.fixture(scope="session")
def wide_lattice():
    """Lattice for pairs up to separation 12 (half-width 14.0625)."""
    return lt.LatticeSpec.from_spacing(H, 14.0)


@pytest.fixture(scope="session")
def core_two(p1_two, wide_lattice):
    """Lattice-relaxed n=1, lambda=2 core covering both pair lattices."""
    return core_for(p1_two, wide_lattice)
