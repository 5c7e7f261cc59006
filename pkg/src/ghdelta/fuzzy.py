"""Fuzzy numbers on an alpha grid.

A fuzzy number is kept as its lower and upper level endpoints sampled on a
strictly increasing grid of levels containing 0 and 1, with linear
interpolation in between.  Under that interpolation every sup over
``alpha in [0, 1]`` of a piecewise-linear quantity is attained at a node, so
the Hausdorff distance below is exact on the union grid.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlphaOutOfRange, ScenarioError


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class AlphaGrid:
    levels: np.ndarray

    def __post_init__(self):
        lv = _frozen(self.levels)
        if lv.ndim != 1 or lv.size < 2:
            raise ScenarioError("an alpha grid needs at least two levels")
        if lv[0] != 0.0 or lv[-1] != 1.0:
            raise ScenarioError("alpha grid must start at 0 and end at 1")
        if np.any(np.diff(lv) <= 0):
            raise ScenarioError("alpha levels must be strictly increasing")
        object.__setattr__(self, "levels", lv)

    @classmethod
    def uniform(cls, n: int = 11) -> AlphaGrid:
        # k/(n-1) rather than linspace so that e.g. 0.3 is the nearest double
        return cls([k / (n - 1) for k in range(n)])

    def __len__(self) -> int:
        return int(self.levels.size)

    def __iter__(self):
        return iter(float(a) for a in self.levels)

    def __eq__(self, other) -> bool:
        return isinstance(other, AlphaGrid) and np.array_equal(self.levels, other.levels)

    def __hash__(self):
        return hash(self.levels.tobytes())

    def union(self, other: AlphaGrid) -> AlphaGrid:
        if self == other:
            return self
        return AlphaGrid(np.union1d(self.levels, other.levels))

    def __repr__(self) -> str:
        return f"AlphaGrid({[float(a) for a in self.levels]})"


DEFAULT_GRID = AlphaGrid.uniform(11)


@dataclass(frozen=True)
class LevelInterval:
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True, eq=False)
class FuzzyNumber:
    grid: AlphaGrid
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, up = _frozen(self.lower), _frozen(self.upper)
        if lo.shape != (len(self.grid),) or up.shape != (len(self.grid),):
            raise ScenarioError("endpoint arrays must have one value per alpha level")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FuzzyNumber):
            return NotImplemented
        if self.grid != other.grid:
            g = self.grid.union(other.grid)
            a, b = refine(self, g), refine(other, g)
            return np.array_equal(a.lower, b.lower) and np.array_equal(a.upper, b.upper)
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    __hash__ = None

    def __add__(self, other: FuzzyNumber) -> FuzzyNumber:
        return add(self, other)

    def __rmul__(self, k: float) -> FuzzyNumber:
        return scale(k, self)

    def __repr__(self) -> str:
        rows = ", ".join(
            f"{a:g}:[{lo:.6g}, {up:.6g}]" for a, lo, up in zip(self.grid.levels, self.lower, self.upper)
        )
        return f"FuzzyNumber({rows})"

    def cut(self, alpha: float) -> LevelInterval:
        return level_cut(self, alpha)

    @property
    def is_crisp(self) -> bool:
        return bool(np.all(self.lower == self.upper)) and bool(np.all(self.lower == self.lower[0]))

    def to_dict(self) -> dict:
        return {
            "levels": [float(a) for a in self.grid.levels],
            "lower": [float(x) for x in self.lower],
            "upper": [float(x) for x in self.upper],
        }


# -- constructors -----------------------------------------------------------


def trap(a: float, b: float, c: float, d: float, grid: AlphaGrid = DEFAULT_GRID) -> FuzzyNumber:
    if not a <= b <= c <= d:
        raise ScenarioError(f"trap({a}, {b}, {c}, {d}) needs a <= b <= c <= d")
    lv = grid.levels
    # clipping keeps rounding from carrying the core past [b, c]
    return FuzzyNumber(grid, np.minimum(a + (b - a) * lv, b), np.maximum(d - (d - c) * lv, c))


def tri(a: float, b: float, c: float, grid: AlphaGrid = DEFAULT_GRID) -> FuzzyNumber:
    return trap(a, b, b, c, grid)


def rect(a: float, b: float, grid: AlphaGrid = DEFAULT_GRID) -> FuzzyNumber:
    return trap(a, a, b, b, grid)


def crisp(x: float, grid: AlphaGrid = DEFAULT_GRID) -> FuzzyNumber:
    n = len(grid)
    return FuzzyNumber(grid, np.full(n, float(x)), np.full(n, float(x)))


def from_table(levels: Sequence[float], lower: Sequence[float], upper: Sequence[float]) -> FuzzyNumber:
    return FuzzyNumber(AlphaGrid(levels), lower, upper)


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # "lowerDecreasing" | "upperIncreasing" | "ordering"
    alpha: float
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    @property
    def first(self) -> Violation | None:
        return min(self.violations, key=lambda v: v.alpha) if self.violations else None


def check_levels(levels: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> ValidationReport:
    out: list[Violation] = []
    for i in range(1, len(levels)):
        if lower[i] < lower[i - 1]:
            out.append(Violation("lowerDecreasing", float(levels[i]),
                                 f"lower drops from {lower[i - 1]!r} to {lower[i]!r}"))
        if upper[i] > upper[i - 1]:
            out.append(Violation("upperIncreasing", float(levels[i]),
                                 f"upper rises from {upper[i - 1]!r} to {upper[i]!r}"))
    for i in range(len(levels)):
        if lower[i] > upper[i]:
            out.append(Violation("ordering", float(levels[i]), f"lower {lower[i]!r} > upper {upper[i]!r}"))
    out.sort(key=lambda v: v.alpha)
    return ValidationReport(tuple(out))


def validate(u: FuzzyNumber) -> ValidationReport:
    return check_levels(u.grid.levels, u.lower, u.upper)


# -- level access -----------------------------------------------------------


def level_cut(u: FuzzyNumber, alpha: float) -> LevelInterval:
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRange(alpha)
    lv = u.grid.levels
    return LevelInterval(float(np.interp(alpha, lv, u.lower)), float(np.interp(alpha, lv, u.upper)))


def len_level(u: FuzzyNumber, alpha: float) -> float:
    return level_cut(u, alpha).length


def refine(u: FuzzyNumber, grid: AlphaGrid) -> FuzzyNumber:
    if grid == u.grid:
        return u
    lv = u.grid.levels
    return FuzzyNumber(grid, np.interp(grid.levels, lv, u.lower), np.interp(grid.levels, lv, u.upper))


def _common(u: FuzzyNumber, v: FuzzyNumber) -> tuple[FuzzyNumber, FuzzyNumber]:
    if u.grid == v.grid:
        return u, v
    g = u.grid.union(v.grid)
    return refine(u, g), refine(v, g)


# -- arithmetic -------------------------------------------------------------


def add(u: FuzzyNumber, v: FuzzyNumber) -> FuzzyNumber:
    u, v = _common(u, v)
    return FuzzyNumber(u.grid, u.lower + v.lower, u.upper + v.upper)


def scale(k: float, u: FuzzyNumber) -> FuzzyNumber:
    k = float(k)
    if k == 0.0:
        return crisp(0.0, u.grid)
    if k > 0:
        return FuzzyNumber(u.grid, k * u.lower, k * u.upper)
    return FuzzyNumber(u.grid, k * u.upper, k * u.lower)


def hausdorff(u: FuzzyNumber, v: FuzzyNumber) -> float:
    u, v = _common(u, v)
    return float(np.max(np.maximum(np.abs(u.lower - v.lower), np.abs(u.upper - v.upper))))


# -- gH-difference ----------------------------------------------------------


class GhCase(str, enum.Enum):
    CASE_I = "caseI"
    CASE_II = "caseII"
    MIXED_DEGENERATE = "mixed-degenerate"


@dataclass(frozen=True)
class GhFailure:
    alpha: float
    reason: str


@dataclass(frozen=True)
class GhDiffOutcome:
    value: FuzzyNumber | None = None
    case: GhCase | None = None
    failure: GhFailure | None = None

    def __post_init__(self):
        if (self.value is None) == (self.failure is None):
            raise ValueError("exactly one of value / failure must be set")

    @property
    def exists(self) -> bool:
        return self.value is not None


def gh_envelope(grid: AlphaGrid, d_lower: np.ndarray, d_upper: np.ndarray,
                magnitude: float = 0.0) -> GhDiffOutcome:
    """Build ``u ⊖gH v`` from the level-wise endpoint differences.

    ``d_lower = u⁻ - v⁻`` and ``d_upper = u⁺ - v⁺``; the candidate is their
    level-wise min/max, accepted only if it is itself a fuzzy number.
    ``magnitude`` bounds the operands the differences came from and sets the
    scale below which the two orientations count as tied.
    """
    d_lower = np.asarray(d_lower, dtype=float)
    d_upper = np.asarray(d_upper, dtype=float)
    lo = np.minimum(d_lower, d_upper)
    up = np.maximum(d_lower, d_upper)
    report = check_levels(grid.levels, lo, up)
    if not report.ok:
        v = report.first
        return GhDiffOutcome(failure=GhFailure(v.alpha, f"{v.kind}: {v.detail}"))
    # Orientation must hold at every level, otherwise neither u = v + w nor
    # v = u + (-1)w is true; the envelope can still look valid on a finite
    # grid when the level lengths of u and v cross between two nodes.
    # Sign flips at rounding scale are ties, not crossings.
    gap = d_upper - d_lower
    mag = max(1.0, magnitude, float(np.max(np.abs(np.concatenate([d_lower, d_upper])))))
    noise = 8 * np.finfo(float).eps * mag
    wider = gap > noise       # u wider than v at this level
    narrower = gap < -noise   # u narrower than v
    if wider.any() and narrower.any():
        first = min(int(np.argmax(wider)), int(np.argmax(narrower)))
        flip = max(int(np.argmax(wider)), int(np.argmax(narrower)))
        return GhDiffOutcome(failure=GhFailure(
            float(grid.levels[flip]),
            f"orientation: level lengths of u and v cross between alpha={grid.levels[first]:g} "
            f"and alpha={grid.levels[flip]:g}",
        ))
    if wider.any():
        case = GhCase.CASE_I
    elif narrower.any():
        case = GhCase.CASE_II
    else:
        case = GhCase.MIXED_DEGENERATE
    return GhDiffOutcome(value=FuzzyNumber(grid, lo, up), case=case)


def gh_difference(u: FuzzyNumber, v: FuzzyNumber) -> GhDiffOutcome:
    u, v = _common(u, v)
    mag = float(max(np.max(np.abs(u.lower)), np.max(np.abs(u.upper)), np.max(np.abs(v.lower)), np.max(np.abs(v.upper))))
    return gh_envelope(u.grid, u.lower - v.lower, u.upper - v.upper, mag)
