"""Generalized Hukuhara delta-derivatives of fuzzy number-valued functions on time scales."""

__version__ = "0.1.0"

from .derivative import (  # noqa: E402
    CaseReport,
    CaseTag,
    DerivativeResult,
    Tolerances,
    classify_case,
    derivative,
    derivative_scattered,
    uniformity_check,
    verify_sigma_identity,
)
from .errors import EvaluationError, GhDeltaError, ScenarioError  # noqa: E402
from .function import FIXTURES, FuzzyFunction, builtin_fixture  # noqa: E402
from .fuzzy import (  # noqa: E402
    DEFAULT_GRID,
    AlphaGrid,
    FuzzyNumber,
    add,
    crisp,
    gh_difference,
    hausdorff,
    rect,
    scale,
    trap,
    tri,
    validate,
)
from .scenario import Scenario, load_scenario, scenario_from_dict  # noqa: E402
from .timescale import PointClass, SamplingPlan, Side, TimeScale  # noqa: E402

__all__ = [
    "AlphaGrid", "CaseReport", "CaseTag", "DEFAULT_GRID", "DerivativeResult", "EvaluationError", "FIXTURES",
    "FuzzyFunction", "FuzzyNumber", "GhDeltaError", "PointClass", "SamplingPlan", "Scenario", "ScenarioError",
    "Side", "TimeScale", "Tolerances", "add", "builtin_fixture", "classify_case", "crisp", "derivative",
    "derivative_scattered", "gh_difference", "hausdorff", "load_scenario", "rect", "scale", "scenario_from_dict",
    "trap", "tri", "uniformity_check", "validate", "verify_sigma_identity",
]
