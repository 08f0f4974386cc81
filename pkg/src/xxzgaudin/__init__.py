"""Open XXZ Gaudin model with non-diagonal boundaries.

Six-vertex algebra, Gaudin Hamiltonians, Bethe equations and
determinant formulas for scalar products, with brute-force oracles.
"""
from . import bethe, core, gaudin, params, scalar, tolerances, vertex
from .params import ModelParams, desk_params, genericity, random_params

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "desk_params",
    "genericity",
    "random_params",
    "bethe",
    "core",
    "gaudin",
    "params",
    "scalar",
    "tolerances",
    "vertex",
]
