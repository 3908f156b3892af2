"""Littlewood–Paley analysis for the barrier Schrödinger operator H = -d²/dx² + ε² χ_[-1,1]."""

from .besov import BesovParams, BesovResult, besov_norm, peetre_maximal
from .dyadic import DyadicSystem, build_system, check_system
from .eigen import BarrierPotential, coefficients, eval_eigenfunction, eval_eigenfunction_dx
from .symbols import Symbol
from .transform import GeneralizedFourier, Grids, SpatialGrid, SpectralGrid, kernel_matrix

__version__ = "0.1.0"

__all__ = [
    "BarrierPotential",
    "BesovParams",
    "BesovResult",
    "DyadicSystem",
    "GeneralizedFourier",
    "Grids",
    "SpatialGrid",
    "SpectralGrid",
    "Symbol",
    "besov_norm",
    "build_system",
    "check_system",
    "coefficients",
    "eval_eigenfunction",
    "eval_eigenfunction_dx",
    "kernel_matrix",
    "peetre_maximal",
]
