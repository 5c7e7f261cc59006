"""gH delta derivatives and point-case classification.

At a right-scattered point the derivative is the scaled gH-difference
``(f(sigma(t0)) ⊖gH f(t0)) / mu(t0)``.  At a point with dense sides the
endpoint slope traces on each dense side are reduced to limit estimates and
matched, in order, against the five differentiability patterns:

* caseI    endpoint derivatives exist, lower increasing / upper decreasing
* caseII   the same with the endpoint roles swapped
* caseIII  two-sided: left-lower = right-upper increasing,
           right-lower = left-upper decreasing
* caseIV   two-sided: right-lower = left-upper increasing,
           left-lower = right-upper decreasing
* caseV    a threshold level alpha0: endpoints differentiable and equal from
           alpha0 up, complementary slope pairs below it

Points matching none of them are reported ``notDifferentiable`` with the
per-level estimates that broke each pattern.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GhDeltaError, ScenarioError, GhDifferenceFails, PointNotApplicable
from .expr import MP
from .fuzzy import FuzzyNumber, add, check_levels, gh_envelope, hausdorff, scale
from .function import FuzzyFunction
from .slopes import (
    DEFAULT_EPS_CLUSTER,
    DEFAULT_EPS_LIM,
    ComplementaryReport,
    Endpoint,
    LimitEstimate,
    SlopeTrace,
    complementary_check,
    estimate_limit,
    level_traces,
    pointwise,
)
from .timescale import LocalGrid, PointClass, SamplingPlan, Side


@dataclass(frozen=True)
class Tolerances:
    eps_lim: float = DEFAULT_EPS_LIM
    eps_cluster: float = DEFAULT_EPS_CLUSTER

    def __post_init__(self):
        if not (self.eps_lim > 0 and self.eps_cluster > 0):
            raise ScenarioError("tolerances must be positive")


class CaseTag(str, enum.Enum):
    CASE_I = "caseI"
    CASE_II = "caseII"
    CASE_III = "caseIII"
    CASE_IV = "caseIV"
    CASE_V = "caseV"
    SCATTERED = "scattered"
    # Isolated points go through the scattered formula; isolation is reported
    # by the point class.  The tag is kept so serialized reports round-trip.
    ISOLATED = "isolated"
    NOT_DIFFERENTIABLE = "notDifferentiable"


# -- one dense side ---------------------------------------------------------


@dataclass(frozen=True)
class AlphaSideEntry:
    alpha: float
    lower: LimitEstimate
    upper: LimitEstimate
    min_limit: LimitEstimate
    max_limit: LimitEstimate
    complementary: ComplementaryReport

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "lowerEndpoint": self.lower.to_dict(),
            "upperEndpoint": self.upper.to_dict(),
            "minLimit": self.min_limit.to_dict(),
            "maxLimit": self.max_limit.to_dict(),
            "complementary": self.complementary.is_complementary,
        }


@dataclass(frozen=True)
class SideDerivativeReport:
    side: Side
    grid: LocalGrid
    entries: tuple[AlphaSideEntry, ...]
    exists: bool
    a: np.ndarray
    b: np.ndarray
    gh_tail_ok: bool
    gh_first_failure: float | None
    lower_traces: tuple[SlopeTrace, ...] = field(repr=False, default=())
    upper_traces: tuple[SlopeTrace, ...] = field(repr=False, default=())

    @property
    def per_alpha(self) -> dict[float, AlphaSideEntry]:
        return {e.alpha: e for e in self.entries}

    def endpoint_values(self, which: str) -> np.ndarray:
        ests = [e.lower if which == "lower" else e.upper for e in self.entries]
        return np.array([x.value for x in ests])

    @property
    def endpoints_converged(self) -> bool:
        return all(e.lower.converged and e.upper.converged for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "side": self.side.value,
            "exists": self.exists,
            "samples": len(self.grid),
            "smallestOffset": self.grid.offsets[-1],
            "ghApproach": {"tailExists": self.gh_tail_ok, "firstFailureOffset": self.gh_first_failure},
            "perAlpha": [e.to_dict() for e in self.entries],
        }


def _gh_along_approach(f: FuzzyFunction, t0: float, grid: LocalGrid, tail: int) -> tuple[bool, float | None]:
    """Existence of f(t0+h) ⊖gH f(sigma(t0)) for every grid offset.

    Differences are formed in extended precision and rounded once, which keeps
    exactly monotone envelopes monotone in floating point.
    """
    base_lo, base_up = f.levels_mp(f.domain.sigma(t0))
    first_fail = None
    tail_ok = True
    n = len(grid)
    for i, p in enumerate(grid.points):
        lo, up = f.levels_mp(p)
        d_lo = np.array([float(x - y) for x, y in zip(lo, base_lo)])
        d_up = np.array([float(x - y) for x, y in zip(up, base_up)])
        if not gh_envelope(f.grid, d_lo, d_up).exists:
            if first_fail is None:
                first_fail = grid.offsets[i]
            if i >= n - tail:
                tail_ok = False
    return tail_ok, first_fail


def derivative_dense_side(
    f: FuzzyFunction,
    t0: float,
    side: Side | str,
    plan: SamplingPlan | None = None,
    tol: Tolerances | None = None,
) -> SideDerivativeReport:
    side = Side(side)
    plan = plan or SamplingPlan()
    tol = tol or Tolerances()
    pc = f.domain.classify_point(t0)
    if not pc.side_is_dense(side):
        raise PointNotApplicable(f"the {side.value} side of {t0!r} is not dense")
    grid = f.domain.local_grid(t0, side, plan)
    lows, ups = level_traces(f, t0, grid)
    tw = plan.tail_window
    entries = []
    for lo_tr, up_tr in zip(lows, ups):
        entries.append(
            AlphaSideEntry(
                alpha=lo_tr.alpha,
                lower=estimate_limit(lo_tr, tol.eps_lim, tol.eps_cluster, tw),
                upper=estimate_limit(up_tr, tol.eps_lim, tol.eps_cluster, tw),
                min_limit=estimate_limit(pointwise(lo_tr, up_tr, Endpoint.MIN), tol.eps_lim, tol.eps_cluster, tw),
                max_limit=estimate_limit(pointwise(lo_tr, up_tr, Endpoint.MAX), tol.eps_lim, tol.eps_cluster, tw),
                complementary=complementary_check(lo_tr, up_tr, tol.eps_lim, tol.eps_cluster, tw),
            )
        )
    a = np.array([e.min_limit.value for e in entries])
    b = np.array([e.max_limit.value for e in entries])
    exists = bool(
        all(e.min_limit.converged and e.max_limit.converged for e in entries)
        and _monotone_ok(a, b, tol.eps_lim)
    )
    gh_ok, gh_fail = _gh_along_approach(f, t0, grid, tw)
    return SideDerivativeReport(side, grid, tuple(entries), exists, a, b, gh_ok, gh_fail, tuple(lows), tuple(ups))


# -- case matching ----------------------------------------------------------


def _nondecreasing(x: np.ndarray, eps: float) -> bool:
    return bool(np.all(np.diff(x) >= -eps))


def _monotone_ok(lower: np.ndarray, upper: np.ndarray, eps: float) -> bool:
    if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
        return False
    return _nondecreasing(lower, eps) and _nondecreasing(-upper, eps) and lower[-1] <= upper[-1] + eps


def _close(x: np.ndarray, y: np.ndarray, eps: float) -> bool:
    return bool(np.all(np.abs(x - y) <= eps))


def _repair(lower: np.ndarray, upper: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project tolerance-accepted level arrays onto exact fuzzy-number shape.

    Only moves values by the slack the matcher already allowed (<= eps_lim).
    """
    lo, up = np.array(lower, dtype=float), np.array(upper, dtype=float)
    for _ in range(len(lo) + 1):
        lo = np.maximum.accumulate(lo)
        up = np.minimum.accumulate(up)
        bad = lo > up
        if not bad.any():
            return lo, up
        mid = (lo[bad] + up[bad]) / 2
        lo[bad] = mid
        up[bad] = mid
    raise GhDeltaError("could not repair derivative level arrays")


@dataclass
class _Match:
    tag: CaseTag
    lower: np.ndarray
    upper: np.ndarray
    alpha0: float | None = None
    bracket: tuple[float, float] | None = None


def _match_endpoint_cases(reports: dict[Side, SideDerivativeReport], eps: float) -> list[_Match]:
    if not all(r.endpoints_converged for r in reports.values()):
        return []
    out = []
    R, L = reports.get(Side.RIGHT), reports.get(Side.LEFT)
    primary = R or L
    lo, up = primary.endpoint_values("lower"), primary.endpoint_values("upper")
    two_sided = R is not None and L is not None
    if two_sided:
        lo_r, up_r = R.endpoint_values("lower"), R.endpoint_values("upper")
        lo_l, up_l = L.endpoint_values("lower"), L.endpoint_values("upper")
        same = _close(lo_r, lo_l, eps) and _close(up_r, up_l, eps)
    else:
        same = True
    if same and _monotone_ok(lo, up, eps):
        out.append(_Match(CaseTag.CASE_I, lo, up))
    if same and _monotone_ok(up, lo, eps):
        out.append(_Match(CaseTag.CASE_II, up, lo))
    if two_sided:
        if _close(lo_l, up_r, eps) and _close(lo_r, up_l, eps):
            if _monotone_ok(lo_l, up_l, eps):
                out.append(_Match(CaseTag.CASE_III, lo_l, up_l))
            if _monotone_ok(lo_r, up_r, eps):
                out.append(_Match(CaseTag.CASE_IV, lo_r, up_r))
    return out


def _level_status(e: AlphaSideEntry, eps: float) -> str:
    if e.lower.converged and e.upper.converged and abs(e.lower.value - e.upper.value) <= eps:
        return "coincide"
    if e.complementary.is_complementary:
        return "complementary"
    return "other"


def _match_threshold(reports: dict[Side, SideDerivativeReport], levels: np.ndarray, eps: float) -> _Match | None:
    sides = list(reports.values())
    n = len(levels)
    status = [[_level_status(r.entries[k], eps) for r in sides] for k in range(n)]
    # smallest k such that every level >= k coincides on every side
    k0 = n
    while k0 > 0 and all(s == "coincide" for s in status[k0 - 1]):
        k0 -= 1
    if k0 == n or k0 == 0:
        return None
    if not all(all(s == "complementary" for s in status[k]) for k in range(k0)):
        return None
    a = np.empty(n)
    b = np.empty(n)
    for k in range(n):
        if k >= k0:
            vals = [r.entries[k].lower.value for r in sides] + [r.entries[k].upper.value for r in sides]
            if max(vals) - min(vals) > eps:
                return None
            a[k] = b[k] = sides[0].entries[k].lower.value
        else:
            av = [r.entries[k].complementary.a for r in sides]
            bv = [r.entries[k].complementary.b for r in sides]
            if max(av) - min(av) > eps or max(bv) - min(bv) > eps:
                return None
            a[k], b[k] = av[0], bv[0]
    if not _monotone_ok(a, b, eps):
        return None
    return _Match(CaseTag.CASE_V, a, b, float(levels[k0]), (float(levels[k0 - 1]), float(levels[k0])))


# -- reports ----------------------------------------------------------------


@dataclass(frozen=True)
class CaseReport:
    case_tag: CaseTag
    point_class: PointClass
    alpha0: float | None = None
    alpha0_bracket: tuple[float, float] | None = None
    one_sided_only: bool = False
    matches: tuple[CaseTag, ...] = ()
    sides: tuple[SideDerivativeReport, ...] = ()
    warnings: tuple[str, ...] = ()
    evidence: dict = field(default_factory=dict)

    def side(self, side: Side) -> SideDerivativeReport | None:
        for r in self.sides:
            if r.side is Side(side):
                return r
        return None

    def to_dict(self) -> dict:
        return {
            "caseTag": self.case_tag.value,
            "pointClass": self.point_class.label,
            "alpha0": self.alpha0,
            "alpha0Bracket": list(self.alpha0_bracket) if self.alpha0_bracket else None,
            "oneSidedOnly": self.one_sided_only,
            "matches": [m.value for m in self.matches],
            "warnings": list(self.warnings),
            "sides": [s.to_dict() for s in self.sides],
            "evidence": self.evidence,
        }


@dataclass(frozen=True)
class DerivativeResult:
    t0: float
    derivative: FuzzyNumber | None
    case_report: CaseReport
    sigma_residual: float | None = None
    uniformity_deficit: float = math.nan

    @property
    def case_tag(self) -> CaseTag:
        return self.case_report.case_tag

    @property
    def differentiable(self) -> bool:
        return self.derivative is not None

    def to_dict(self) -> dict:
        out = {"t0": self.t0}
        out.update(self.case_report.to_dict())
        if self.derivative is not None:
            out["levels"] = [float(x) for x in self.derivative.grid.levels]
            out["a"] = [float(x) for x in self.derivative.lower]
            out["b"] = [float(x) for x in self.derivative.upper]
        else:
            out["levels"] = out["a"] = out["b"] = None
        out["sigmaResidual"] = self.sigma_residual
        out["uniformityDeficit"] = None if math.isnan(self.uniformity_deficit) else self.uniformity_deficit
        return out


# -- scattered points -------------------------------------------------------


def _scattered_levels(f: FuzzyFunction, t0: float) -> tuple[np.ndarray, np.ndarray, float]:
    sig = f.domain.sigma(t0)
    mu = MP.mpf(sig) - MP.mpf(t0)
    f.eval_at(t0)
    f.eval_at(sig)
    lo_s, up_s = f.levels_mp(sig)
    lo_0, up_0 = f.levels_mp(t0)
    d_lo = np.array([float((x - y) / mu) for x, y in zip(lo_s, lo_0)])
    d_up = np.array([float((x - y) / mu) for x, y in zip(up_s, up_0)])
    return d_lo, d_up, sig


def derivative_scattered(f: FuzzyFunction, t0: float, tol: Tolerances | None = None,
                         plan: SamplingPlan | None = None) -> DerivativeResult:
    tol = tol or Tolerances()
    pc = f.domain.classify_point(t0)
    if not pc.side_is_scattered(Side.RIGHT):
        raise PointNotApplicable(f"{t0!r} is not right-scattered")
    d_lo, d_up, sig = _scattered_levels(f, t0)
    outcome = gh_envelope(f.grid, d_lo, d_up)
    if not outcome.exists:
        raise GhDifferenceFails(
            f"f({sig!r}) ⊖gH f({t0!r}) does not exist (first failure at alpha={outcome.failure.alpha!r})"
        )
    report = CaseReport(CaseTag.SCATTERED, pc, evidence={"ghCase": outcome.case.value, "sigma": sig})
    result = DerivativeResult(float(t0), outcome.value, report)
    return _finish(f, result, plan or SamplingPlan(), tol)


def _continuity_warning(f: FuzzyFunction, t0: float, plan: SamplingPlan, tol: Tolerances) -> str | None:
    grid = f.domain.local_grid(t0, Side.LEFT, plan)
    here = f.eval_at(t0)
    gaps = [hausdorff(f.eval_at(p), here) for p in grid.points[-plan.tail_window:]]
    if max(gaps) > tol.eps_cluster:
        return (f"f may be discontinuous from the left at {t0!r}: "
                f"D(f(t0+h), f(t0)) = {gaps[-1]:.3g} at h = {grid.offsets[-1]:.3g}")
    return None


# -- identities -------------------------------------------------------------


def verify_sigma_identity(f: FuzzyFunction, t0: float, d: DerivativeResult) -> float:
    if d.derivative is None:
        raise PointNotApplicable("no derivative to check")
    sig = f.domain.sigma(t0)
    mu = sig - t0
    if mu == 0:
        return 0.0
    f_t, f_s = f.eval_at(t0), f.eval_at(sig)
    r1 = hausdorff(f_s, add(f_t, scale(mu, d.derivative)))
    r2 = hausdorff(f_t, add(f_s, scale(-mu, d.derivative)))
    return min(r1, r2)


def _quotient_gap(lo_vals, up_vals, a: float, b: float) -> float:
    return max(abs(min(lo_vals, up_vals) - a), abs(max(lo_vals, up_vals) - b))


def _deficit(deriv: FuzzyNumber, sides: Sequence[SideDerivativeReport],
             tail: int) -> float:
    worst = 0.0
    a, b = deriv.lower, deriv.upper
    for rep in sides:
        for k, (lo_tr, up_tr) in enumerate(zip(rep.lower_traces, rep.upper_traces)):
            for x, y in zip(lo_tr.values[-tail:], up_tr.values[-tail:]):
                worst = max(worst, _quotient_gap(x, y, a[k], b[k]))
    return worst


def _scattered_deficit(f: FuzzyFunction, t0: float, deriv: FuzzyNumber) -> float:
    # the quotient at h = 0: (f(t0) - f(sigma)) / (0 - mu)
    d_lo, d_up, _ = _scattered_levels(f, t0)
    return max(_quotient_gap(x, y, a, b) for x, y, a, b in zip(d_lo, d_up, deriv.lower, deriv.upper))


def _finish(f: FuzzyFunction, result: DerivativeResult, plan: SamplingPlan,
            tol: Tolerances | None = None) -> DerivativeResult:
    tol = tol or Tolerances()
    rep = result.case_report
    if result.derivative is None:
        return result
    residual = verify_sigma_identity(f, result.t0, result)
    if rep.case_tag is CaseTag.SCATTERED:
        deficit = _scattered_deficit(f, result.t0, result.derivative)
        warnings = list(rep.warnings)
        sides = list(rep.sides)
        if rep.point_class.side_is_dense(Side.LEFT):
            try:
                left = derivative_dense_side(f, result.t0, Side.LEFT, plan, tol)
                sides.append(left)
                deficit = max(deficit, _deficit(result.derivative, [left], plan.tail_window))
                w = _continuity_warning(f, result.t0, plan, tol)
                if w:
                    warnings.append(w)
            except GhDeltaError as exc:
                warnings.append(f"left-side analysis failed: {exc}")
        rep = CaseReport(rep.case_tag, rep.point_class, sides=tuple(sides), warnings=tuple(warnings),
                         evidence=rep.evidence, matches=rep.matches)
    else:
        deficit = _deficit(result.derivative, rep.sides, plan.tail_window)
    return DerivativeResult(result.t0, result.derivative, rep, residual, deficit)


# -- dispatch ---------------------------------------------------------------


def _analyze(f: FuzzyFunction, t0: float, plan: SamplingPlan, tol: Tolerances) -> DerivativeResult:
    t0 = float(t0)
    dom = f.domain
    pc = dom.classify_point(t0)
    if not dom.kappa_contains(t0):
        raise PointNotApplicable(f"{t0!r} is the left-scattered maximum, outside the kappa-set")
    if pc.side_is_scattered(Side.RIGHT):
        return derivative_scattered(f, t0, tol, plan)
    sides = [s for s in (Side.RIGHT, Side.LEFT) if pc.side_is_dense(s)]
    reports = {s: derivative_dense_side(f, t0, s, plan, tol) for s in sides}
    one_sided = len(sides) == 1 and (t0 == dom.inf or t0 == dom.sup)
    matches = _match_endpoint_cases(reports, tol.eps_lim)
    thr = _match_threshold(reports, f.grid.levels, tol.eps_lim)
    if thr is not None:
        matches.append(thr)
    evidence: dict = {}
    gh_ok = all(r.gh_tail_ok for r in reports.values())
    if matches and not gh_ok:
        evidence["rejected"] = [m.tag.value for m in matches]
        evidence["reason"] = "gH-difference along the approach fails on the tail"
        matches = []
    if not matches:
        evidence.setdefault("reason", "no differentiability pattern matched")
        evidence["estimateKinds"] = {
            s.value: {
                f"{e.alpha:g}": [e.lower.kind.value, e.upper.kind.value, e.min_limit.kind.value,
                                 e.max_limit.kind.value]
                for e in r.entries
            }
            for s, r in reports.items()
        }
        report = CaseReport(CaseTag.NOT_DIFFERENTIABLE, pc, one_sided_only=one_sided,
                            sides=tuple(reports.values()), evidence=evidence)
        return DerivativeResult(t0, None, report)
    best = matches[0]
    lo, up = _repair(best.lower, best.upper)
    deriv = FuzzyNumber(f.grid, lo, up)
    assert check_levels(f.grid.levels, lo, up).ok
    report = CaseReport(
        best.tag, pc, alpha0=best.alpha0, alpha0_bracket=best.bracket, one_sided_only=one_sided,
        matches=tuple(m.tag for m in matches), sides=tuple(reports.values()), evidence=evidence,
    )
    return _finish(f, DerivativeResult(t0, deriv, report), plan, tol)


def classify_case(f: FuzzyFunction, t0: float, plan: SamplingPlan | None = None,
                  tol: Tolerances | None = None) -> CaseReport:
    return _analyze(f, t0, plan or SamplingPlan(), tol or Tolerances()).case_report


def derivative(f: FuzzyFunction, t0: float, plan: SamplingPlan | None = None,
               tol: Tolerances | None = None) -> DerivativeResult:
    return _analyze(f, t0, plan or SamplingPlan(), tol or Tolerances())


def uniformity_check(f: FuzzyFunction, t0: float, plan: SamplingPlan | None = None,
                     tol: Tolerances | None = None) -> float:
    """Worst Hausdorff gap, over levels and tail offsets, between the gH
    difference quotient and the derivative's level sets."""
    res = derivative(f, t0, plan, tol)
    if res.derivative is None:
        raise PointNotApplicable(f"f is not differentiable at {t0!r}")
    return res.uniformity_deficit
