"""Fuzzy number-valued functions on a time scale.

A function is a pair of endpoint expressions ``lower(t, a)`` and
``upper(t, a)`` giving ``[f(t)]_a``.  Values are computed in extended
precision and rounded once, so float level arrays are correctly rounded and
difference quotients can be formed without cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import EvalDomainError, NotAFuzzyNumber, PointNotInScale, ScenarioError
from .expr import MP, Expr, compile_expr, parse_expression, to_source
from .fuzzy import DEFAULT_GRID, AlphaGrid, FuzzyNumber, ValidationReport, Violation, check_levels
from .timescale import TimeScale


class UnknownFixture(ScenarioError):
    pass


class BadParams(ScenarioError):
    pass


def _as_expr(src: str | Expr) -> tuple[Expr, str]:
    if isinstance(src, str):
        return parse_expression(src), src
    return src, to_source(src)


class FuzzyFunction:
    def __init__(
        self,
        lower: str | Expr,
        upper: str | Expr,
        domain: TimeScale,
        grid: AlphaGrid = DEFAULT_GRID,
        *,
        name: str | None = None,
        params: Mapping | None = None,
    ):
        self.lower_expr, self.lower_source = _as_expr(lower)
        self.upper_expr, self.upper_source = _as_expr(upper)
        self.domain = domain
        self.grid = grid
        self.name = name
        self.params = dict(params or {})
        self._lo = compile_expr(self.lower_expr, "mp")
        self._up = compile_expr(self.upper_expr, "mp")
        self._alphas = [MP.mpf(float(x)) for x in grid.levels]
        self._cache: dict[float, tuple[tuple, tuple]] = {}

    def __repr__(self) -> str:
        tag = self.name or f"[{self.lower_source}, {self.upper_source}]"
        return f"FuzzyFunction({tag} on {self.domain!r})"

    def _rebuild(self, domain: TimeScale, grid: AlphaGrid) -> FuzzyFunction:
        out = FuzzyFunction(self.lower_expr, self.upper_expr, domain, grid, name=self.name, params=self.params)
        out.lower_source, out.upper_source = self.lower_source, self.upper_source
        return out

    def with_grid(self, grid: AlphaGrid) -> FuzzyFunction:
        return self._rebuild(self.domain, grid)

    def with_domain(self, domain: TimeScale) -> FuzzyFunction:
        return self._rebuild(domain, self.grid)

    def levels_mp(self, t: float) -> tuple[tuple, tuple]:
        """Extended-precision lower and upper endpoints at every grid level."""
        t = float(t)
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        if not self.domain.contains(t):
            raise PointNotInScale(t)
        tm = MP.mpf(t)
        try:
            lo = tuple(MP.mpf(self._lo(tm, a)) for a in self._alphas)
            up = tuple(MP.mpf(self._up(tm, a)) for a in self._alphas)
        except EvalDomainError as exc:
            raise EvalDomainError(f"{exc} (at t={t!r})") from exc
        self._cache[t] = (lo, up)
        return lo, up

    def endpoint_mp(self, t: float, alpha: float, which: str):
        """One endpoint (``"lower"`` or ``"upper"``) at an arbitrary level."""
        levels = self.grid.levels
        hit = np.flatnonzero(levels == alpha)
        if hit.size:
            lo, up = self.levels_mp(t)
            return (lo if which == "lower" else up)[int(hit[0])]
        if not self.domain.contains(float(t)):
            raise PointNotInScale(float(t))
        fn = self._lo if which == "lower" else self._up
        return MP.mpf(fn(MP.mpf(float(t)), MP.mpf(float(alpha))))

    def levels(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        lo, up = self.levels_mp(t)
        lo_f = np.array([float(x) for x in lo])
        up_f = np.array([float(x) for x in up])
        if not (np.all(np.isfinite(lo_f)) and np.all(np.isfinite(up_f))):
            raise EvalDomainError(f"endpoint value overflows double precision at t={t!r}")
        return lo_f, up_f

    def eval_at(self, t: float) -> FuzzyNumber:
        lo, up = self.levels(t)
        report = check_levels(self.grid.levels, lo, up)
        if not report.ok:
            v = report.first
            raise NotAFuzzyNumber(t, v.alpha, v.detail)
        return FuzzyNumber(self.grid, lo, up)

    def to_dict(self) -> dict:
        if self.name is not None:
            out = {"fixture": self.name}
            if self.params:
                out["params"] = dict(self.params)
            return out
        return {"lower": self.lower_source, "upper": self.upper_source}


@dataclass(frozen=True)
class FunctionValidation:
    reports: dict = field(default_factory=dict)  # t -> ValidationReport

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.reports.values())

    def failures(self) -> dict:
        return {t: r for t, r in self.reports.items() if not r.ok}


def validate_function(f: FuzzyFunction, t_samples: Iterable[float]) -> FunctionValidation:
    out = {}
    for t in t_samples:
        try:
            lo, up = f.levels(t)
        except (EvalDomainError, PointNotInScale) as exc:
            out[float(t)] = ValidationReport((Violation("evaluation", float("nan"), str(exc)),))
            continue
        out[float(t)] = check_levels(f.grid.levels, lo, up)
    return FunctionValidation(out)


# -- fixtures ---------------------------------------------------------------

# ln(abs(t) + 1e-300) keeps the expressions total at t = 0, where the factor t
# in front makes the oscillating term vanish (the limit value).
_QIU_SWITCH = "max(0, 1 - 2*a)*(1 + t*step(sin(ln(abs(t) + 1e-300))))/2"
_OSC = "t*(2 + sin(ln(abs(t) + 1e-300)))"


def _fixture_table(params: Mapping) -> dict:
    value = params.get("value", 3.0)
    return {
        "LINEAR_TRI": ("a*t", "(2 - a)*t", lambda: TimeScale.arith(0, 1, 5)),
        "GROW": ("-(1 - a)*(1 + abs(t))", "(1 - a)*(1 + abs(t))", lambda: TimeScale.interval(-1, 1)),
        "SHRINK": ("-(1 - a)*(2 - t)", "(1 - a)*(2 - t)", lambda: TimeScale.interval(0, 1.5)),
        "QIU": (f"1.5*t - {_QIU_SWITCH}", f"1.5*t + {_QIU_SWITCH}", lambda: TimeScale.interval(0, 1)),
        "OSCILLATE": (_OSC, f"{_OSC} + 1", lambda: TimeScale.interval(-1, 1)),
        "CONSTANT": (repr(float(value)), repr(float(value)), lambda: TimeScale.arith(0, 1, 5)),
    }


_FIXTURE_PARAMS = {"CONSTANT": {"value"}}
FIXTURES = tuple(_fixture_table({}))


def builtin_fixture(
    name: str,
    params: Mapping | None = None,
    *,
    domain: TimeScale | None = None,
    grid: AlphaGrid = DEFAULT_GRID,
) -> FuzzyFunction:
    """Catalog of functions realizing the differentiability cases.

    ``LINEAR_TRI``  tri(0, t, 2t), smooth everywhere
    ``GROW``        ±(1-a)(1+|t|) on [-1, 1], cone opening at 0
    ``SHRINK``      ±(1-a)(2-t) on [0, 1.5], level lengths shrink
    ``QIU``         endpoint quotients switch between 1.5 ± L/2 with
                    L = max(0, 1-2a) as sin(ln t) changes sign; 0 is a
                    threshold point with alpha0 = 0.5
    ``OSCILLATE``   quotients 2 + sin(ln|h|) at 0, no limit and no two-point
                    cluster set
    ``CONSTANT``    crisp(value), default value 3
    """
    params = dict(params or {})
    key = name.upper()
    if key not in FIXTURES:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    extra = set(params) - _FIXTURE_PARAMS.get(key, set())
    if extra:
        raise BadParams(f"fixture {key} does not accept parameter(s) {sorted(extra)}")
    if "value" in params:
        try:
            float(params["value"])
        except (TypeError, ValueError) as exc:
            raise BadParams(f"fixture {key}: value must be numeric") from exc
    table = _fixture_table(params)
    lower, upper, default_domain = table[key]
    return FuzzyFunction(lower, upper, domain or default_domain(), grid, name=key, params=params)
