"""Optimal control of generalized Oseen flow in velocity-vorticity-pressure form.

Conforming (MINI velocity, continuous vorticity) and DG discretizations,
a projected fixed-point optimizer, residual estimators and adaptivity.
"""

from .adapt import adaptive_loop, dorfler_mark
from .estimate import cg_indicators, dg_indicators, efficiency_index, global_estimators, true_errors
from .mesh import bisect_refine, generate, uniform_refine
from .optctl import Discretization, cost, fixed_point_solve, gradient_check, project_admissible, vi_residual
from .problems import make_problem, registry

__all__ = [
    "Discretization",
    "adaptive_loop",
    "bisect_refine",
    "cg_indicators",
    "cost",
    "dg_indicators",
    "dorfler_mark",
    "efficiency_index",
    "fixed_point_solve",
    "generate",
    "global_estimators",
    "gradient_check",
    "make_problem",
    "project_admissible",
    "registry",
    "true_errors",
    "uniform_refine",
    "vi_residual",
]

__version__ = "0.1.0"
