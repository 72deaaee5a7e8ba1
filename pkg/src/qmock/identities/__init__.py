"""Identity DSL, evaluator and registry."""

from .ast import BinOp, Call, Neg, Node, Num, Poch, Pow, QVar, Sum, Var
from .evaluator import Evaluator, evaluate
from .parser import parse, to_text
from .registry import (
    IdentityRecord,
    Registry,
    VerificationReport,
    default_registry,
    load_registry,
    parse_registry,
    verify,
    verify_all,
    verify_record,
)

__all__ = [
    "BinOp",
    "Call",
    "Evaluator",
    "IdentityRecord",
    "Neg",
    "Node",
    "Num",
    "Poch",
    "Pow",
    "QVar",
    "Registry",
    "Sum",
    "Var",
    "VerificationReport",
    "default_registry",
    "evaluate",
    "load_registry",
    "parse",
    "parse_registry",
    "to_text",
    "verify",
    "verify_all",
    "verify_record",
]
