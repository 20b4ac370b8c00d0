"""Unified gas-kinetic scheme with hybrid Boltzmann / Shakhov collisions."""

from .errors import (ConfigurationError, ConvergenceError, DegenerateStateError,
                     NumericError, ResolutionError, UGKSError)
from .kinetic import GasProperties, MacroState, VelocityGrid, build_grid, maxwellian, moments
from .collision import CollisionModel, SpectralKernel, boltzmann_Q, build_kernel
from .kernels import backend_name

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "ConvergenceError", "DegenerateStateError", "NumericError",
    "ResolutionError", "UGKSError", "GasProperties", "MacroState", "VelocityGrid",
    "build_grid", "maxwellian", "moments", "CollisionModel", "SpectralKernel",
    "boltzmann_Q", "build_kernel", "backend_name",
]
