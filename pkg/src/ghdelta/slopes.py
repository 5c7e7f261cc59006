"""Slope traces, one-sided limit estimation and cluster sets.

A slope trace samples ``(f(t0 + h) - f(sigma(t0))) / (h - mu(t0))`` for one
endpoint function at one level, over the offsets of a :class:`LocalGrid`.
Only the last ``tail_window`` samples enter any verdict: a finite stand-in
for "infinitely many terms" in the definition of a cluster point.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import DegenerateDenominator, GridMismatch, PointNotApplicable
from .expr import MP
from .function import FuzzyFunction
from .timescale import LocalGrid, Side

DEFAULT_EPS_LIM = 1e-6
DEFAULT_EPS_CLUSTER = 1e-3
DEFAULT_TAIL = 12


class Endpoint(str, enum.Enum):
    LOWER = "lower"
    UPPER = "upper"
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class SlopeTrace:
    t0: float
    endpoint: Endpoint
    alpha: float
    side: Side
    offsets: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.offsets) != len(self.values):
            raise ValueError("offsets and values differ in length")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("slope values must be finite")

    def __len__(self) -> int:
        return len(self.values)

    def tail(self, window: int) -> np.ndarray:
        return np.asarray(self.values[-window:], dtype=float)


def _require_kappa(f: FuzzyFunction, t0: float) -> None:
    if not f.domain.kappa_contains(t0):
        raise PointNotApplicable(f"{t0!r} is the left-scattered maximum, outside the kappa-set")


def _denominators(f: FuzzyFunction, t0: float, grid: LocalGrid) -> list:
    mu = MP.mpf(f.domain.sigma(t0)) - MP.mpf(t0)
    dens = []
    for h, p in zip(grid.offsets, grid.points):
        d = MP.mpf(p) - MP.mpf(t0) - mu
        if d == 0:
            raise DegenerateDenominator(
                f"offset {h!r} equals the graininess at {t0!r}; use the scattered formula"
            )
        dens.append(d)
    return dens


def slope_trace(f: FuzzyFunction, t0: float, endpoint: Endpoint | str, alpha: float, grid: LocalGrid) -> SlopeTrace:
    endpoint = Endpoint(endpoint)
    if endpoint not in (Endpoint.LOWER, Endpoint.UPPER):
        raise ValueError("slope_trace samples the lower or upper endpoint; use pointwise() for min/max")
    _require_kappa(f, t0)
    dens = _denominators(f, t0, grid)
    base = f.endpoint_mp(f.domain.sigma(t0), alpha, endpoint.value)
    vals = tuple(float((f.endpoint_mp(p, alpha, endpoint.value) - base) / d) for p, d in zip(grid.points, dens))
    return SlopeTrace(t0, endpoint, float(alpha), grid.side, grid.offsets, vals)


def level_traces(f: FuzzyFunction, t0: float, grid: LocalGrid) -> tuple[list[SlopeTrace], list[SlopeTrace]]:
    """Lower and upper traces at every level of ``f.grid`` in one pass."""
    _require_kappa(f, t0)
    dens = _denominators(f, t0, grid)
    base_lo, base_up = f.levels_mp(f.domain.sigma(t0))
    n = len(f.grid)
    lo_vals = [[] for _ in range(n)]
    up_vals = [[] for _ in range(n)]
    for p, d in zip(grid.points, dens):
        lo, up = f.levels_mp(p)
        for k in range(n):
            lo_vals[k].append(float((lo[k] - base_lo[k]) / d))
            up_vals[k].append(float((up[k] - base_up[k]) / d))
    lows, ups = [], []
    for k, a in enumerate(f.grid):
        lows.append(SlopeTrace(t0, Endpoint.LOWER, a, grid.side, grid.offsets, tuple(lo_vals[k])))
        ups.append(SlopeTrace(t0, Endpoint.UPPER, a, grid.side, grid.offsets, tuple(up_vals[k])))
    return lows, ups


def _check_pair(a: SlopeTrace, b: SlopeTrace) -> None:
    if a.offsets != b.offsets or a.t0 != b.t0 or a.alpha != b.alpha or a.side != b.side:
        raise GridMismatch("traces differ in t0, level, side or offsets")


def pointwise(a: SlopeTrace, b: SlopeTrace, which: Endpoint | str) -> SlopeTrace:
    which = Endpoint(which)
    _check_pair(a, b)
    op = min if which is Endpoint.MIN else max
    return SlopeTrace(a.t0, which, a.alpha, a.side, a.offsets, tuple(op(x, y) for x, y in zip(a.values, b.values)))


# -- limits -----------------------------------------------------------------


class LimitKind(str, enum.Enum):
    CONVERGED = "converged"
    TWO_POINT = "twoPoint"
    SPREAD = "spread"
    INSUFFICIENT = "insufficient"


@dataclass(frozen=True)
class LimitEstimate:
    kind: LimitKind
    lo: float = math.nan
    hi: float = math.nan
    tail_spread: float = math.nan
    divergent: bool = False

    @property
    def converged(self) -> bool:
        return self.kind is LimitKind.CONVERGED

    @property
    def value(self) -> float:
        """The limit for converged estimates, NaN otherwise."""
        return self.lo if self.converged else math.nan

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind is LimitKind.CONVERGED:
            out["value"] = self.lo
        elif self.kind is not LimitKind.INSUFFICIENT:
            out["lo"], out["hi"] = self.lo, self.hi
        if not math.isnan(self.tail_spread):
            out["tailSpread"] = self.tail_spread
        if self.divergent:
            out["divergent"] = True
        return out


def gap_clusters(values: Sequence[float], gap: float) -> list[np.ndarray]:
    """Split sorted values wherever consecutive members are more than ``gap`` apart."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return []
    cuts = np.flatnonzero(np.diff(v) > gap) + 1
    return np.split(v, cuts)


def _looks_divergent(tail: np.ndarray) -> bool:
    mags = np.abs(tail)
    return bool(np.all(np.diff(mags) >= 0) and mags[-1] >= 10 * max(mags[0], 1.0))


def estimate_limit(
    trace: SlopeTrace,
    eps_lim: float = DEFAULT_EPS_LIM,
    eps_cluster: float = DEFAULT_EPS_CLUSTER,
    tail_window: int = DEFAULT_TAIL,
) -> LimitEstimate:
    if len(trace) < tail_window:
        return LimitEstimate(LimitKind.INSUFFICIENT)
    tail = trace.tail(tail_window)
    spread = float(tail.max() - tail.min())
    if spread <= eps_lim:
        mid = float(np.median(tail))
        return LimitEstimate(LimitKind.CONVERGED, mid, mid, spread)
    clusters = gap_clusters(tail, eps_cluster)
    if (
        len(clusters) == 2
        and all(c.size >= 2 and c[-1] - c[0] <= eps_cluster for c in clusters)
    ):
        return LimitEstimate(LimitKind.TWO_POINT, float(np.median(clusters[0])), float(np.median(clusters[1])), spread)
    return LimitEstimate(LimitKind.SPREAD, float(tail.min()), float(tail.max()), spread, _looks_divergent(tail))


@dataclass(frozen=True)
class ClusterSet:
    values: tuple[float, ...]
    member_radius: float

    def __len__(self) -> int:
        return len(self.values)

    def matches(self, other: ClusterSet, tol: float) -> bool:
        return len(self) == len(other) and all(abs(x - y) <= tol for x, y in zip(self.values, other.values))


def cluster_set(
    trace: SlopeTrace,
    eps_cluster: float = DEFAULT_EPS_CLUSTER,
    tail_window: int = DEFAULT_TAIL,
) -> ClusterSet:
    """Medians of the tail clusters that recur at least twice."""
    groups = gap_clusters(trace.tail(tail_window), eps_cluster)
    keep = [float(np.median(g)) for g in groups if g.size >= 2 or len(groups) == 1]
    return ClusterSet(tuple(keep), eps_cluster / 2)


@dataclass(frozen=True)
class ComplementaryReport:
    is_complementary: bool
    a: float = math.nan
    b: float = math.nan
    reason: str = ""


def complementary_check(
    trace_lo: SlopeTrace,
    trace_up: SlopeTrace,
    eps: float = DEFAULT_EPS_LIM,
    eps_cluster: float = DEFAULT_EPS_CLUSTER,
    tail_window: int = DEFAULT_TAIL,
) -> ComplementaryReport:
    _check_pair(trace_lo, trace_up)
    c_lo = cluster_set(trace_lo, eps_cluster, tail_window)
    c_up = cluster_set(trace_up, eps_cluster, tail_window)
    if len(c_lo) != 2 or len(c_up) != 2:
        return ComplementaryReport(False, reason=f"cluster sets have sizes {len(c_lo)} and {len(c_up)}, need 2")
    if not c_lo.matches(c_up, eps):
        return ComplementaryReport(False, reason=f"cluster sets differ: {c_lo.values} vs {c_up.values}")
    est_min = estimate_limit(pointwise(trace_lo, trace_up, Endpoint.MIN), eps, eps_cluster, tail_window)
    est_max = estimate_limit(pointwise(trace_lo, trace_up, Endpoint.MAX), eps, eps_cluster, tail_window)
    if not (est_min.converged and est_max.converged):
        return ComplementaryReport(False, reason="pointwise min/max traces do not converge")
    a, b = est_min.value, est_max.value
    if not (abs(a - c_lo.values[0]) <= eps and abs(b - c_lo.values[1]) <= eps):
        return ComplementaryReport(False, a, b, reason="min/max limits differ from the cluster values")
    return ComplementaryReport(True, a, b)


# -- export -----------------------------------------------------------------

TRACE_HEADER = ("t0", "side", "endpoint", "alpha", "h", "value")


def write_traces_csv(traces: Iterable[SlopeTrace], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for tr in traces:
        for h, v in zip(tr.offsets, tr.values):
            w.writerow((repr(float(tr.t0)), tr.side.value, tr.endpoint.value, repr(float(tr.alpha)), repr(float(h)), repr(float(v))))
