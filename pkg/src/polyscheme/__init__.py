"""Matrix polynomial evaluation schemes with a fixed number of products.

A scheme ``(A, B, c)`` evaluates a polynomial of a square matrix using ``m``
matrix-matrix products.  This package expands schemes into polynomials,
applies them to matrices, transforms them into equivalent schemes, analyses
the Jacobian of the expansion map and fits schemes to target polynomials.
"""
from .analysis import (
    JacobianMatrix,
    ParamMask,
    condition_number,
    dimension_estimate,
    jacobian,
    numerical_rank,
)
from .poly import Polynomial, horner_eval, poly_approx_eq, poly_mul
from .scalars import COMPLEX, DOUBLE, EXACT, ScalarContext, ScalarContextError, extended, parse_context
from .scheme import ReductionPattern, Scheme, SchemeError, apply_to_matrix, expand, structural_degree, validate
from .transform import (
    TransformError,
    adjust_row3,
    normalize,
    scale_row,
    shift_first_column,
    zero_b22,
)
from .solve import FitOptions, FitReport, SolveError, fit, paterson_stockmeyer, refine, solve_degree12
from .catalog import enumerate_structures, max_admissible_degree

__all__ = [
    "JacobianMatrix", "ParamMask", "condition_number", "dimension_estimate", "jacobian", "numerical_rank",
    "Polynomial", "horner_eval", "poly_approx_eq", "poly_mul",
    "COMPLEX", "DOUBLE", "EXACT", "ScalarContext", "ScalarContextError", "extended", "parse_context",
    "ReductionPattern", "Scheme", "SchemeError", "apply_to_matrix", "expand", "structural_degree", "validate",
    "TransformError", "adjust_row3", "normalize", "scale_row", "shift_first_column", "zero_b22",
    "FitOptions", "FitReport", "SolveError", "fit", "paterson_stockmeyer", "refine", "solve_degree12",
    "enumerate_structures", "max_admissible_degree",
]

__version__ = "0.1.0"
