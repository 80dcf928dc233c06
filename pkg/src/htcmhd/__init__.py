"""Thermodynamically compatible finite volume solver for ideal MHD with GLM cleaning."""
from .cases import CASES, get_case
from .grid import BoundaryCondition, FieldState, Mesh, build_mesh
from .scheme import SchemeParams, rhs
from .thermo import DomainError, GasParams, conserved_to_primitive, primitive_to_conserved
from .timeint import Integrator, SolverError, TimeControls

__all__ = [
    "CASES", "get_case", "BoundaryCondition", "FieldState", "Mesh", "build_mesh",
    "SchemeParams", "rhs", "DomainError", "GasParams", "conserved_to_primitive",
    "primitive_to_conserved", "Integrator", "SolverError", "TimeControls",
]
