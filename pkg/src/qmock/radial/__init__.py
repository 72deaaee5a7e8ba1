"""Numeric radial limits toward roots of unity and conjecture checks."""

from .cases import (
    RADIAL_CASES,
    RadialCase,
    RadialProbeResult,
    admissible_roots,
    default_schedule,
    finite_sum_rhs,
    get_case,
    radial_probe,
)
from .conjectures import CONJECTURES, ConjectureRow, conjecture_check
from .numeric import (
    DEFAULT_BITS,
    PrimitiveRoot,
    eval_expression_numeric,
    eval_product_numeric,
    eval_series_numeric,
)

__all__ = [
    "CONJECTURES",
    "ConjectureRow",
    "DEFAULT_BITS",
    "PrimitiveRoot",
    "RADIAL_CASES",
    "RadialCase",
    "RadialProbeResult",
    "admissible_roots",
    "conjecture_check",
    "default_schedule",
    "eval_expression_numeric",
    "eval_product_numeric",
    "eval_series_numeric",
    "finite_sum_rhs",
    "get_case",
    "radial_probe",
]
