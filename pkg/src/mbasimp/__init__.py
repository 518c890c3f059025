"""Simplification of linear and semi-linear mixed boolean-arithmetic expressions."""

from .expr import (
    Binary,
    Const,
    Expr,
    MbaClass,
    UnassignedVariable,
    Unary,
    Var,
    canonical,
    classify,
    evaluate,
    fold_constants,
    node_count,
    render,
    variables,
)
from .linear import find_linear_combination, simplify_linear
from .oracle import EquivReport, Method, Verdict, exhaustive_equiv, matrix_equiv, random_equiv
from .parser import ParseError, parse
from .semilinear import (
    MaskedSum,
    MaskedTerm,
    can_change_coefficient_to,
    can_change_mask_to,
    cost,
    merge_terms,
    per_bit_solution,
    recover_structure,
    simplify,
    substitute_and_solve_1bit,
)
from .signature import (
    NotSemiLinear,
    SignatureMatrix,
    SignatureVector,
    adjusted_matrix,
    linear_signature,
    reconstruct_conjunctions,
    semilinear_matrix,
)

__all__ = [
    "Binary", "Const", "Expr", "MbaClass", "UnassignedVariable", "Unary", "Var",
    "canonical", "classify", "evaluate", "fold_constants", "node_count", "render", "variables",
    "find_linear_combination", "simplify_linear",
    "EquivReport", "Method", "Verdict", "exhaustive_equiv", "matrix_equiv", "random_equiv",
    "ParseError", "parse",
    "MaskedSum", "MaskedTerm", "can_change_coefficient_to", "can_change_mask_to", "cost",
    "merge_terms", "per_bit_solution", "recover_structure", "simplify", "substitute_and_solve_1bit",
    "NotSemiLinear", "SignatureMatrix", "SignatureVector", "adjusted_matrix", "linear_signature",
    "reconstruct_conjunctions", "semilinear_matrix",
]
