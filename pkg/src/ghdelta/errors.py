"""Exception hierarchy shared by every ghdelta module."""


class GhDeltaError(Exception):
    """Base class for all errors raised by ghdelta."""


class ScenarioError(GhDeltaError):
    """A scenario, scale or function description is malformed."""


class PointNotInScale(ScenarioError):
    def __init__(self, t: float):
        super().__init__(f"point {t!r} is not an element of the time scale")
        self.t = t


class BoundarySide(GhDeltaError):
    """The requested side of a point has no scale points."""


class EmptyGrid(GhDeltaError):
    """Projection of the sampling targets left no usable offsets."""


class AlphaOutOfRange(GhDeltaError):
    def __init__(self, alpha: float):
        super().__init__(f"alpha level {alpha!r} is outside [0, 1]")
        self.alpha = alpha


class EvaluationError(GhDeltaError):
    """Numerical evaluation of a function failed."""


class EvalDomainError(EvaluationError):
    """An expression left the domain of one of its operations."""


class NotAFuzzyNumber(EvaluationError):
    def __init__(self, t: float, alpha: float, detail: str):
        super().__init__(f"f({t!r}) is not a fuzzy number at alpha={alpha!r}: {detail}")
        self.t = t
        self.alpha = alpha


class DegenerateDenominator(EvaluationError):
    """A slope offset coincides with the graininess."""


class GhDifferenceFails(EvaluationError):
    """A gH-difference required by a formula does not exist."""


class PointNotApplicable(GhDeltaError):
    """The requested computation does not apply to this kind of point."""


class GridMismatch(GhDeltaError):
    """Two traces were sampled on different grids."""
