"""Symmetry-preserving difference schemes and moving meshes for heat equations."""
from .grid import MeshLayer, Stencil, SymmetryOperator, mesh_conditions, uniform_layer
from .schemes import Family, NewtonOptions, SchemeKind, step
from .symmetry import operator_set, verify_scheme_invariance

__all__ = [
    "Family", "MeshLayer", "NewtonOptions", "SchemeKind", "Stencil", "SymmetryOperator",
    "mesh_conditions", "operator_set", "step", "uniform_layer", "verify_scheme_invariance",
]
__version__ = "0.1.0"
