"""Time scales as finite unions of closed intervals and isolated points.

A scale is stored as two sorted float arrays of block bounds, so scales with
a million materialized points (``harmonic(10**6)``) stay cheap.  Membership
and jump operators use exact comparisons on those bounds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Sequence

import numpy as np

from .errors import BoundarySide, EmptyGrid, PointNotInScale, ScenarioError


class Side(str, enum.Enum):
    RIGHT = "right"
    LEFT = "left"

    @property
    def sign(self) -> int:
        return 1 if self is Side.RIGHT else -1


class RightKind(str, enum.Enum):
    DENSE = "rightDense"
    SCATTERED = "rightScattered"
    BOUNDARY = "rightBoundary"


class LeftKind(str, enum.Enum):
    DENSE = "leftDense"
    SCATTERED = "leftScattered"
    BOUNDARY = "leftBoundary"


@dataclass(frozen=True)
class Block:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ScenarioError(f"block [{self.lo}, {self.hi}] has lo > hi")


@dataclass(frozen=True)
class PointClass:
    right: RightKind
    left: LeftKind

    @property
    def is_dense(self) -> bool:
        return self.right is RightKind.DENSE and self.left is LeftKind.DENSE

    @property
    def is_isolated(self) -> bool:
        if self.right is RightKind.DENSE or self.left is LeftKind.DENSE:
            return False
        return self.right is RightKind.SCATTERED or self.left is LeftKind.SCATTERED

    def kind(self, side: Side):
        return self.right if side is Side.RIGHT else self.left

    def side_is_dense(self, side: Side) -> bool:
        return self.kind(side).value.endswith("Dense")

    def side_is_scattered(self, side: Side) -> bool:
        return self.kind(side).value.endswith("Scattered")

    @property
    def label(self) -> str:
        if self.is_dense:
            return "dense"
        if self.is_isolated:
            return "isolated"
        return f"{self.right.value}-{self.left.value}"


@dataclass(frozen=True)
class SamplingPlan:
    """Geometric offsets ``h0 * ratio**j`` for ``j < count``.

    The last ``tail_window`` samples decide every convergence verdict.
    """

    h0: float = 0.9
    ratio: float = 0.7
    count: int = 48
    tail_window: int = 12

    def __post_init__(self):
        if not self.h0 > 0:
            raise ScenarioError("plan h0 must be > 0")
        if not 0 < self.ratio < 1:
            raise ScenarioError("plan ratio must lie in (0, 1)")
        if self.count < 2:
            raise ScenarioError("plan count must be >= 2")
        if not 2 <= self.tail_window <= self.count:
            raise ScenarioError("plan tail_window must satisfy 2 <= tail_window <= count")

    def targets(self) -> list[float]:
        return [self.h0 * self.ratio**j for j in range(self.count)]


@dataclass(frozen=True)
class LocalGrid:
    """Offsets ``h`` in the shifted scale around ``t0`` on one side.

    ``points[i]`` is the scale point reached by ``offsets[i]``; slope
    computations use ``points[i] - t0`` in extended precision.
    """

    t0: float
    side: Side
    offsets: tuple[float, ...]
    points: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.offsets)


class TimeScale:
    """Closed, bounded subset of the reals built from blocks.

    ``right_limits`` / ``left_limits`` name points that are limits of a
    materialized sequence (``0`` for the harmonic scale); they are treated as
    dense on that side even though only finitely many points are stored.
    """

    __slots__ = ("_lo", "_hi", "right_limits", "left_limits")

    def __init__(
        self,
        blocks: Iterable[Block | tuple[float, float]] | None = None,
        *,
        lo: Sequence[float] | np.ndarray | None = None,
        hi: Sequence[float] | np.ndarray | None = None,
        right_limits: Iterable[float] = (),
        left_limits: Iterable[float] = (),
    ):
        if blocks is not None:
            pairs = [(b.lo, b.hi) if isinstance(b, Block) else (float(b[0]), float(b[1])) for b in blocks]
            lo = np.array([p[0] for p in pairs], dtype=float)
            hi = np.array([p[1] for p in pairs], dtype=float)
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.size == 0:
            raise ScenarioError("a time scale needs at least one block")
        if lo.shape != hi.shape:
            raise ScenarioError("block bound arrays differ in length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ScenarioError("block bounds must be finite")
        if np.any(lo > hi):
            bad = int(np.argmax(lo > hi))
            raise ScenarioError(f"block [{lo[bad]}, {hi[bad]}] has lo > hi")
        order = np.argsort(lo, kind="stable")
        lo, hi = lo[order], hi[order]
        # merge blocks that overlap or touch
        reach = np.maximum.accumulate(hi)
        starts = np.ones(lo.size, dtype=bool)
        starts[1:] = lo[1:] > reach[:-1]
        idx = np.flatnonzero(starts)
        ends = np.append(idx[1:], lo.size) - 1
        merged_lo = lo[idx]
        merged_hi = reach[ends]
        merged_lo.flags.writeable = False
        merged_hi.flags.writeable = False
        self._lo = merged_lo
        self._hi = merged_hi
        self.right_limits = frozenset(float(x) for x in right_limits)
        self.left_limits = frozenset(float(x) for x in left_limits)
        for x in self.right_limits | self.left_limits:
            if not self.contains(x):
                raise ScenarioError(f"declared limit point {x!r} is not in the scale")

    # -- constructors -----------------------------------------------------

    @classmethod
    def interval(cls, lo: float, hi: float) -> TimeScale:
        return cls([(lo, hi)])

    @classmethod
    def points(cls, values: Iterable[float]) -> TimeScale:
        vals = np.asarray(list(values), dtype=float)
        return cls(lo=vals, hi=vals)

    @classmethod
    def arith(cls, start, step, count: int) -> TimeScale:
        """``{start + k*step : 0 <= k < count}`` with decimal-exact stepping."""
        if int(count) != count or count < 1:
            raise ScenarioError("arith count must be a positive integer")
        s0, ds = Decimal(str(start)), Decimal(str(step))
        if ds <= 0:
            raise ScenarioError("arith step must be positive")
        return cls.points(float(s0 + k * ds) for k in range(int(count)))

    @classmethod
    def harmonic(cls, depth: int) -> TimeScale:
        """``{0} ∪ {1/n : 1 <= n <= depth}``; 0 is kept right-dense."""
        if int(depth) != depth or depth < 1:
            raise ScenarioError("harmonic depth must be a positive integer")
        vals = np.concatenate(([0.0], 1.0 / np.arange(int(depth), 0, -1, dtype=float)))
        return cls(lo=vals, hi=vals, right_limits=[0.0])

    @classmethod
    def union(cls, *scales: TimeScale) -> TimeScale:
        lo = np.concatenate([s._lo for s in scales])
        hi = np.concatenate([s._hi for s in scales])
        rl = set().union(*(s.right_limits for s in scales))
        ll = set().union(*(s.left_limits for s in scales))
        return cls(lo=lo, hi=hi, right_limits=rl, left_limits=ll)

    # -- structure --------------------------------------------------------

    @property
    def blocks(self) -> list[Block]:
        return [Block(float(a), float(b)) for a, b in zip(self._lo, self._hi)]

    @property
    def n_blocks(self) -> int:
        return int(self._lo.size)

    @property
    def inf(self) -> float:
        return float(self._lo[0])

    @property
    def sup(self) -> float:
        return float(self._hi[-1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeScale):
            return NotImplemented
        return (
            np.array_equal(self._lo, other._lo)
            and np.array_equal(self._hi, other._hi)
            and self.right_limits == other.right_limits
            and self.left_limits == other.left_limits
        )

    def __hash__(self):
        return hash((self._lo.tobytes(), self._hi.tobytes(), self.right_limits, self.left_limits))

    def __repr__(self) -> str:
        if self.n_blocks <= 6:
            parts = [f"[{b.lo!r}, {b.hi!r}]" if b.lo != b.hi else f"{{{b.lo!r}}}" for b in self.blocks]
            return "TimeScale(" + " ∪ ".join(parts) + ")"
        return f"TimeScale({self.n_blocks} blocks in [{self.inf!r}, {self.sup!r}])"

    def _block_index(self, t: float) -> int:
        return int(np.searchsorted(self._lo, t, side="right")) - 1

    def contains(self, t: float) -> bool:
        i = self._block_index(t)
        return i >= 0 and t <= self._hi[i]

    def __contains__(self, t: float) -> bool:
        return self.contains(t)

    def _require(self, t: float) -> int:
        i = self._block_index(t)
        if i < 0 or not t <= self._hi[i]:
            raise PointNotInScale(t)
        return i

    # -- jump operators ---------------------------------------------------

    def sigma(self, t: float) -> float:
        i = self._require(t)
        if t < self._hi[i] or t in self.right_limits:
            return float(t)
        if i + 1 < self._lo.size:
            return float(self._lo[i + 1])
        return self.sup

    def rho(self, t: float) -> float:
        i = self._require(t)
        if t > self._lo[i] or t in self.left_limits:
            return float(t)
        if i > 0:
            return float(self._hi[i - 1])
        return self.inf

    def graininess(self, t: float) -> float:
        return self.sigma(t) - t

    def classify_point(self, t: float) -> PointClass:
        s, r = self.sigma(t), self.rho(t)
        if t == self.sup:
            right = RightKind.BOUNDARY
        elif s == t:
            right = RightKind.DENSE
        else:
            right = RightKind.SCATTERED
        if t == self.inf:
            left = LeftKind.BOUNDARY
        elif r == t:
            left = LeftKind.DENSE
        else:
            left = LeftKind.SCATTERED
        return PointClass(right, left)

    def kappa_contains(self, t: float) -> bool:
        cls = self.classify_point(t)
        return not (t == self.sup and cls.left is LeftKind.SCATTERED)

    # -- sampling ---------------------------------------------------------

    def _project(self, x: float, t0: float, side: Side) -> float | None:
        """Nearest scale point to ``x`` lying strictly on ``side`` of ``t0``."""
        if self.contains(x):
            cand = [x]
        else:
            i = self._block_index(x)
            cand = []
            if i >= 0:
                cand.append(float(self._hi[i]))
            if i + 1 < self._lo.size:
                cand.append(float(self._lo[i + 1]))
        cand = [p for p in cand if (p > t0 if side is Side.RIGHT else p < t0)]
        if not cand:
            return None
        return min(cand, key=lambda p: abs(p - x))

    def local_grid(self, t0: float, side: Side | str, plan: SamplingPlan | None = None) -> LocalGrid:
        side = Side(side)
        plan = plan or SamplingPlan()
        pc = self.classify_point(t0)
        kind = pc.kind(side)
        if kind.value.endswith("Boundary"):
            raise BoundarySide(f"{t0!r} has no scale points on its {side.value} side")
        if kind.value.endswith("Scattered"):
            p = self.sigma(t0) if side is Side.RIGHT else self.rho(t0)
            return LocalGrid(t0, side, (p - t0,), (p,))
        offsets: list[float] = []
        points: list[float] = []
        for target in plan.targets():
            x = t0 + side.sign * target
            p = self._project(x, t0, side)
            if p is None:
                continue
            h = side.sign * target if p == x else p - t0
            if offsets and not abs(h) < abs(offsets[-1]):
                continue
            offsets.append(h)
            points.append(p)
        if not offsets:
            raise EmptyGrid(f"no offsets survive projection at {t0!r} ({side.value})")
        return LocalGrid(t0, side, tuple(offsets), tuple(points))

    def kappa_points(self, per_block: int = 5) -> list[float]:
        """Representative points of the kappa-set: every degenerate block and
        ``per_block`` evenly spaced points of each nondegenerate block."""
        out: list[float] = []
        for a, b in zip(self._lo, self._hi):
            if a == b:
                out.append(float(a))
            else:
                out.extend(float(x) for x in np.linspace(a, b, max(per_block, 2)))
        return [t for t in out if self.kappa_contains(t)]
