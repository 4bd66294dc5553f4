"""Ginzburg-Landau / Abelian-Higgs vortex laboratory.

Radial vortex profiles, gauge-covariant lattice fields, gradient-flow and
Maxwell-Higgs evolution, vortex tracking and effective point-vortex laws.
"""
from __future__ import annotations

from .errors import GLVortexError
from .lattice import FieldState, LatticeSpec, MomentumState, VortexAnsatz
from .profiles import ProfileParams, VortexProfile, solve_profile

__all__ = ["FieldState", "GLVortexError", "LatticeSpec", "MomentumState", "ProfileParams",
           "VortexAnsatz", "VortexProfile", "solve_profile"]
__version__ = "0.1.0"
