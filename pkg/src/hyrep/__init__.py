"""Repair of finite Kripke structures against HyperLTL sentences."""

from .errors import HyrepError
from .formula import (
    FragmentClass,
    HyperFormula,
    Quantifier,
    classify_fragment,
    format_formula,
    negate_body,
    parse_formula,
)
from .kripke import (
    FrameShape,
    KripkeStructure,
    RepairCandidate,
    UltimatelyPeriodicTrace,
    apply_repair,
    classify_frame,
    enumerate_lassos,
    enumerate_repairs,
    enumerate_traces,
    load_structure,
    validate,
)
from .repair import Prefer, RepairResult, Strategy, Verdict, repair
from .semantics import EvalHorizon, LassoBounds, evaluate, evaluate_body, horizon, model_check

__version__ = "0.1.0"

__all__ = [
    "EvalHorizon",
    "FragmentClass",
    "FrameShape",
    "HyperFormula",
    "HyrepError",
    "KripkeStructure",
    "LassoBounds",
    "Prefer",
    "Quantifier",
    "RepairCandidate",
    "RepairResult",
    "Strategy",
    "UltimatelyPeriodicTrace",
    "Verdict",
    "apply_repair",
    "classify_fragment",
    "classify_frame",
    "enumerate_lassos",
    "enumerate_repairs",
    "enumerate_traces",
    "evaluate",
    "evaluate_body",
    "format_formula",
    "horizon",
    "load_structure",
    "model_check",
    "negate_body",
    "parse_formula",
    "repair",
    "validate",
]
