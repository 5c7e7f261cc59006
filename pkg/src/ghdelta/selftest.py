"""Bundled fixture suite behind ``ghdelta selftest``.

Each criterion returns a :class:`CriterionResult` carrying the worst residual
it saw.  The derivative criteria honour tolerance and sampling overrides, and
the threshold criterion can be pointed at replacement expressions, so the
suite can be run against deliberately tampered inputs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .derivative import CaseTag, Tolerances, derivative
from .errors import EvalDomainError
from .expr import ExprSyntaxError, evaluate, parse_expression
from .function import FuzzyFunction, builtin_fixture
from .fuzzy import DEFAULT_GRID, AlphaGrid, FuzzyNumber, GhCase, add, gh_difference, hausdorff, rect, scale, trap, tri
from .report import render_sweep
from .scenario import scenario_from_dict
from .slopes import cluster_set, complementary_check, level_traces
from .timescale import SamplingPlan, Side

SEED = 20240521


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    residual: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        res = "-" if math.isnan(self.residual) else f"{self.residual:.3e}"
        tail = f"  {self.detail}" if self.detail else ""
        return f"[{status}] {self.number:2d} {self.name:<28} residual={res} ({self.seconds:.2f}s){tail}"


@dataclass(frozen=True)
class SelftestConfig:
    plan: SamplingPlan = SamplingPlan()
    tol: Tolerances = Tolerances()
    qiu_lower: str | None = None
    qiu_upper: str | None = None
    seed: int = SEED


# -- random fuzzy numbers ---------------------------------------------------


def random_trap(rng: np.random.Generator, grid: AlphaGrid, span: float = 10.0) -> FuzzyNumber:
    a, b, c, d = np.sort(rng.uniform(-span, span, 4))
    if rng.random() < 0.5:
        b = c = (b + c) / 2
    return trap(a, b, c, d, grid)


def _dyadic_trap(rng: np.random.Generator, grid: AlphaGrid):
    a, b, c, d = np.sort(rng.integers(-64, 65, 4)) / 8.0
    if rng.random() < 0.5:
        c = b
    return trap(a, b, c, d, grid)


# -- criteria ---------------------------------------------------------------


def crit_metric(cfg: SelftestConfig, n: int = 1000) -> tuple[bool, float, str]:
    rng = np.random.default_rng(cfg.seed)
    grid = AlphaGrid([k / 16 for k in range(17)])  # dyadic, so sums below are exact
    worst = 0.0
    for _ in range(n):
        u, v, w, z = (_dyadic_trap(rng, grid) for _ in range(4))
        d_uv = hausdorff(u, v)
        if hausdorff(u, u) != 0 or d_uv != hausdorff(v, u):
            return False, math.inf, "identity or symmetry broken"
        if (d_uv == 0) != (u == v):
            return False, math.inf, "D(u,v) = 0 without u = v"
        if hausdorff(add(u, w), add(v, w)) != d_uv:
            return False, math.inf, "translation invariance is not exact"
        worst = max(worst, hausdorff(u, w) - d_uv - hausdorff(v, w))
        k = float(rng.uniform(-5, 5))
        rel = abs(hausdorff(scale(k, u), scale(k, v)) - abs(k) * d_uv) / max(1.0, abs(k) * d_uv)
        worst = max(worst, rel)
        sub = hausdorff(add(u, w), add(v, z)) - d_uv - hausdorff(w, z)
        worst = max(worst, sub / max(1.0, d_uv))
    return worst <= 1e-12, max(worst, 0.0), f"{n} quadruples"


def _roundtrip_residual(u, v, out) -> float:
    if out.case is GhCase.CASE_I:
        return hausdorff(u, add(v, out.value))
    if out.case is GhCase.CASE_II:
        return hausdorff(v, add(u, scale(-1.0, out.value)))
    return min(hausdorff(u, add(v, out.value)), hausdorff(v, add(u, scale(-1.0, out.value))))


def crit_gh_roundtrip(cfg: SelftestConfig, n: int = 1000) -> tuple[bool, float, str]:
    rng = np.random.default_rng(cfg.seed + 1)
    worst, found, tries = 0.0, 0, 0
    while found < n and tries < 50 * n:
        tries += 1
        u, v = random_trap(rng, DEFAULT_GRID), random_trap(rng, DEFAULT_GRID)
        out = gh_difference(u, v)
        if not out.exists:
            continue
        found += 1
        worst = max(worst, _roundtrip_residual(u, v, out))
    return found == n and worst <= 1e-12, worst, f"{found} existing differences from {tries} pairs"


def crit_scalar(cfg: SelftestConfig, n: int = 500) -> tuple[bool, float, str]:
    rng = np.random.default_rng(cfg.seed + 2)
    worst, found, tries = 0.0, 0, 0
    while found < n and tries < 50 * n:
        tries += 1
        u, v = random_trap(rng, DEFAULT_GRID), random_trap(rng, DEFAULT_GRID)
        k = float(rng.uniform(-4, 4))
        lhs = gh_difference(u, v)
        rhs = gh_difference(scale(k, u), scale(k, v))
        if not lhs.exists:
            continue
        if not rhs.exists:
            return False, math.inf, "k(u - v) exists but ku - kv does not"
        found += 1
        worst = max(worst, hausdorff(scale(k, lhs.value), rhs.value))
    return found == n and worst <= 1e-12, worst, f"{found} triples"


def crit_gh_failure(cfg: SelftestConfig) -> tuple[bool, float, str]:
    out = gh_difference(tri(0, 1, 2), rect(0, 1))
    if out.exists:
        return False, math.nan, "difference unexpectedly exists"
    a = out.failure.alpha
    return 0 < a < 1, math.nan, f"first violation at alpha={a:g}"


def crit_scattered(cfg: SelftestConfig) -> tuple[bool, float, str]:
    f = builtin_fixture("LINEAR_TRI")
    worst, res = 0.0, 0.0
    for t0 in (1.0, 2.0, 3.0):
        d = derivative(f, t0, cfg.plan, cfg.tol)
        if d.case_tag is not CaseTag.SCATTERED:
            return False, math.inf, f"t0={t0:g} gave {d.case_tag.value}"
        worst = max(worst, hausdorff(d.derivative, tri(0, 1, 2)))
        res = max(res, d.sigma_residual)
    ok = worst == 0 and res <= 1e-12
    return ok, max(worst, res), f"derivative gap {worst:.1e}, sigma residual {res:.1e}"


def _dense_fixture(cfg, name: str, t0: float, tag: CaseTag) -> tuple[bool, float, str]:
    f = builtin_fixture(name)
    d = derivative(f, t0, cfg.plan, cfg.tol)
    if d.case_tag is not tag:
        return False, math.inf, f"classified {d.case_tag.value}, matches {[m.value for m in d.case_report.matches]}"
    err = hausdorff(d.derivative, tri(-1, 0, 1))
    return err <= 1e-6, err, f"matches {[m.value for m in d.case_report.matches]}"


def crit_case_iv(cfg: SelftestConfig) -> tuple[bool, float, str]:
    ok, err, detail = _dense_fixture(cfg, "GROW", 0.0, CaseTag.CASE_IV)
    if not ok:
        return ok, err, detail
    d = derivative(builtin_fixture("GROW"), 0.0, cfg.plan, cfg.tol)
    target = 1 - d.derivative.grid.levels
    for rep in d.case_report.sides:
        for which in ("lower", "upper"):
            vals = rep.endpoint_values(which)
            err = max(err, float(np.max(np.abs(np.abs(vals) - target))))
    return err <= 1e-6, err, detail


def crit_case_ii(cfg: SelftestConfig) -> tuple[bool, float, str]:
    return _dense_fixture(cfg, "SHRINK", 0.5, CaseTag.CASE_II)


def qiu_function(cfg: SelftestConfig) -> FuzzyFunction:
    base = builtin_fixture("QIU")
    if cfg.qiu_lower is None and cfg.qiu_upper is None:
        return base
    return FuzzyFunction(cfg.qiu_lower or base.lower_source, cfg.qiu_upper or base.upper_source,
                         base.domain, base.grid)


def crit_threshold(cfg: SelftestConfig) -> tuple[bool, float, str]:
    f = qiu_function(cfg)
    d = derivative(f, 0.0, cfg.plan, cfg.tol)
    rep = d.case_report
    if rep.case_tag is not CaseTag.CASE_V:
        spreads = []
        for s in rep.sides:
            e = s.entries[0]
            spreads.append(f"{s.side.value}: lower {e.lower.kind.value} [{e.lower.lo:.4g}, {e.lower.hi:.4g}]")
        return False, math.inf, f"classified {rep.case_tag.value}; alpha=0 {'; '.join(spreads)}"
    lo_b, hi_b = rep.alpha0_bracket
    if not (0.4 <= lo_b and hi_b <= 0.5 and lo_b < rep.alpha0 <= hi_b):
        return False, math.inf, f"alpha0 bracket ({lo_b:g}, {hi_b:g}]"
    err = max(abs(d.derivative.lower[0] - 1.0), abs(d.derivative.upper[0] - 2.0))
    grid = f.domain.local_grid(0.0, Side.RIGHT, cfg.plan)
    lows, ups = level_traces(f, 0.0, grid)
    tw = cfg.plan.tail_window
    for tr in (lows[0], ups[0]):
        cs = cluster_set(tr, cfg.tol.eps_cluster, tw)
        if len(cs) != 2:
            return False, math.inf, f"cluster set at alpha=0 has {len(cs)} members"
        err = max(err, abs(cs.values[0] - 1.0), abs(cs.values[1] - 2.0))
    for lo_tr, up_tr in zip(lows, ups):
        comp = complementary_check(lo_tr, up_tr, max(cfg.tol.eps_lim, 1e-12), cfg.tol.eps_cluster, tw)
        if comp.is_complementary != (lo_tr.alpha < 0.5):
            return False, math.inf, f"complementary_check={comp.is_complementary} at alpha={lo_tr.alpha:g}"
    return err <= 1e-6, err, f"alpha0={rep.alpha0:g} in ({lo_b:g}, {hi_b:g}]"


def crit_negative(cfg: SelftestConfig) -> tuple[bool, float, str]:
    d = derivative(builtin_fixture("OSCILLATE"), 0.0, cfg.plan, cfg.tol)
    if d.differentiable:
        return False, math.inf, f"classified {d.case_tag.value}"
    lo, hi = math.inf, -math.inf
    for rep in d.case_report.sides:
        for e in rep.entries:
            for est in (e.lower, e.upper):
                lo, hi = min(lo, est.lo), max(hi, est.hi)
    ok = lo <= 1.05 and hi >= 1.95
    return ok, math.nan, f"spread [{lo:.4f}, {hi:.4f}]"


def crit_uniformity(cfg: SelftestConfig) -> tuple[bool, float, str]:
    cases = [("LINEAR_TRI", t) for t in (1.0, 2.0, 3.0)] + [("GROW", 0.0), ("SHRINK", 0.5)]
    worst = 0.0
    for name, t0 in cases:
        d = derivative(builtin_fixture(name), t0, cfg.plan, cfg.tol)
        if not d.differentiable:
            return False, math.inf, f"{name} at {t0:g} not differentiable"
        worst = max(worst, d.uniformity_deficit)
    d = derivative(qiu_function(cfg), 0.0, cfg.plan, cfg.tol)
    if not d.differentiable:
        return False, math.inf, "QIU at 0 not differentiable"
    worst = max(worst, d.uniformity_deficit)
    return worst <= 1e-9, worst, f"{len(cases) + 1} points"


TS1_SCENARIO = {
    "scale": [[0, 1], "point(1.5)", "interval(2, 3)"],
    "function": {"fixture": "LINEAR_TRI"},
    "points": "all-kappa",
}


def crit_sweep(cfg: SelftestConfig) -> tuple[bool, float, str]:
    data = dict(TS1_SCENARIO)
    data["plan"] = {"h0": cfg.plan.h0, "ratio": cfg.plan.ratio, "count": cfg.plan.count,
                    "tailWindow": cfg.plan.tail_window}
    data["tolerances"] = {"epsLim": cfg.tol.eps_lim, "epsCluster": cfg.tol.eps_cluster}
    first = render_sweep(scenario_from_dict(data))
    second = render_sweep(scenario_from_dict(data))
    if first != second:
        return False, math.nan, "two runs differ"
    scn = scenario_from_dict(data)
    want = {repr(float(p)) for p in scn.resolved_points()}
    rows = [line.split(",") for line in first.splitlines()[1:]]
    seen = {r[0] for r in rows}
    bad = [r[0] for r in rows if r[2] == CaseTag.NOT_DIFFERENTIABLE.value]
    ok = seen == want and not bad
    return ok, math.nan, f"{len(want)} points, {len(rows)} rows" + (f", not differentiable at {bad}" if bad else "")


# (source, t, a, expected value) and (source, error position)
PARSER_VALUES = [
    ("1 + 2*3", 0, 0, 7.0),
    ("(1 + 2)*3", 0, 0, 9.0),
    ("2^3^2", 0, 0, 512.0),
    ("-2^2", 0, 0, -4.0),
    ("(-2)^2", 0, 0, 4.0),
    ("2^-1", 0, 0, 0.5),
    ("-t", 3, 0, -3.0),
    ("--t", 3, 0, 3.0),
    ("+t", 2, 0, 2.0),
    ("t - a - 1", 5, 1, 3.0),
    ("8/4/2", 0, 0, 1.0),
    ("2*-3", 0, 0, -6.0),
    ("1 - 2 + 3", 0, 0, 2.0),
    ("2*(3 + 4)*5", 0, 0, 70.0),
    ("step(0)", 0, 0, 1.0),
    ("step(-0)", 0, 0, 1.0),
    ("step(-1e-300)", 0, 0, -1.0),
    ("step(t - 2)", 2, 0, 1.0),
    ("abs(-3)", 0, 0, 3.0),
    ("max(t, a)", 0.25, 0.75, 0.75),
    ("min(t, a)", 0.25, 0.75, 0.25),
    ("-max(-1, -2)", 0, 0, 1.0),
    ("sqrt(16)", 0, 0, 4.0),
    ("ln(e)", 0, 0, 1.0),
    ("exp(0)", 0, 0, 1.0),
    ("sin(0) + cos(0)", 0, 0, 1.0),
    ("pi", 0, 0, math.pi),
    ("a*t", 2, 0.5, 1.0),
    ("1e3", 0, 0, 1000.0),
    (".5 + 2.", 0, 0, 2.5),
    ("2*t^2", 3, 0, 18.0),
    ("1.5*t - max(0, 1 - 2*a)", 2, 0.25, 2.5),
]

PARSER_ERRORS = [
    ("1 +", 3),
    ("(1 + 2", 6),
    ("foo(1)", 0),
    ("max(1)", 0),
    ("1 $ 2", 2),
    ("", 0),
    ("2*)", 2),
    ("sin + 1", 0),
    ("t(1)", 1),
    ("1 2", 2),
    ("min(1, 2, 3)", 0),
    ("x + 1", 0),
]


def crit_parser(cfg: SelftestConfig) -> tuple[bool, float, str]:
    failures = []
    for src, t, a, want in PARSER_VALUES:
        got = evaluate(src, t, a)
        if got != want:
            failures.append(f"{src!r} -> {got!r}")
    for src, pos in PARSER_ERRORS:
        try:
            parse_expression(src)
            failures.append(f"{src!r} parsed")
        except ExprSyntaxError as exc:
            if exc.position != pos:
                failures.append(f"{src!r} error at {exc.position}, want {pos}")
    for src in ("ln(0)", "1/(t - t)", "sqrt(-1)"):
        try:
            evaluate(src, 1.0, 0.0)
            failures.append(f"{src!r} evaluated")
        except EvalDomainError:
            pass
    n = len(PARSER_VALUES) + len(PARSER_ERRORS) + 3
    return not failures, math.nan, f"{n} cases" + (f"; {failures[:3]}" if failures else "")


CRITERIA: list[tuple[int, str, Callable[[SelftestConfig], tuple[bool, float, str]]]] = [
    (1, "metric axioms", crit_metric),
    (2, "gH round-trip", crit_gh_roundtrip),
    (3, "scalar distributivity", crit_scalar),
    (4, "gH non-existence", crit_gh_failure),
    (5, "scattered formula", crit_scattered),
    (6, "dense case IV (GROW)", crit_case_iv),
    (7, "dense case II (SHRINK)", crit_case_ii),
    (8, "threshold case V (QIU)", crit_threshold),
    (9, "negative control", crit_negative),
    (10, "uniformity", crit_uniformity),
    (11, "hybrid sweep determinism", crit_sweep),
    (12, "expression parser", crit_parser),
]


def run(cfg: SelftestConfig | None = None, only: set[int] | None = None) -> list[CriterionResult]:
    cfg = cfg or SelftestConfig()
    out = []
    for num, name, fn in CRITERIA:
        if only and num not in only:
            continue
        start = time.perf_counter()
        try:
            ok, residual, detail = fn(cfg)
        except Exception as exc:  # a crash is a failed criterion, not a crashed suite
            ok, residual, detail = False, math.nan, f"{type(exc).__name__}: {exc}"
        out.append(CriterionResult(num, name, bool(ok), float(residual), detail, time.perf_counter() - start))
    return out


__all__ = ["CRITERIA", "CriterionResult", "SelftestConfig", "run"]
