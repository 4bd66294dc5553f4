"""Exception hierarchy shared by all modules.

CLI exit codes are attached to the classes so the harness can map failures
without a lookup table of its own.
"""
from __future__ import annotations


class GLVortexError(Exception):
    exit_code = 1


class ParameterError(GLVortexError, ValueError):
    """Invalid physical or numerical parameters (lambda <= 0, n = 0, ...)."""

    exit_code = 2


class ConfigError(GLVortexError, ValueError):
    """Experiment configuration failed validation; `path` names the key."""

    exit_code = 2

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SolverError(GLVortexError, RuntimeError):
    exit_code = 3

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (last residual {residual:.3e})")


class RangeError(GLVortexError, ValueError):
    exit_code = 2


class DivergentIntegralError(GLVortexError, ValueError):
    """Raised for Type-I couplings where an interaction integral diverges."""

    exit_code = 2


class PlacementError(GLVortexError, ValueError):
    """A vortex sits too close to the lattice boundary or to another vortex."""

    exit_code = 2


class ConfigurationError(GLVortexError, ValueError):
    """Inconsistent inputs: missing profile, lattice mismatch, shape errors."""

    exit_code = 2


class BlowUpError(GLVortexError, FloatingPointError):
    exit_code = 3

    def __init__(self, message: str, step: int):
        self.step = step
        super().__init__(f"{message} at step {step}")


class UndefinedDegreeError(GLVortexError, ValueError):
    exit_code = 3


class DegeneratePlaquetteError(GLVortexError, ValueError):
    exit_code = 3


class TopologyChangeError(GLVortexError, RuntimeError):
    exit_code = 4


class SeparationError(GLVortexError, RuntimeError):
    """Vortex separation dropped below the regime where the effective laws apply."""

    exit_code = 3


class ComparisonFailure(GLVortexError):
    exit_code = 5
