"""Scenario files.

A scenario is a JSON object::

    {
      "scale": [[0, 1], "point(1.5)", "interval(2, 3)"],
      "function": {"fixture": "LINEAR_TRI"}            # or {"lower": "...", "upper": "..."}
      "alphaGrid": [0, 0.25, 0.5, 0.75, 1],            # optional, or an integer level count
      "plan": {"h0": 0.9, "ratio": 0.7, "count": 48, "tailWindow": 12},   # optional
      "tolerances": {"epsLim": 1e-6, "epsCluster": 1e-3},                 # optional
      "points": [0, 0.5, 1] | "all-kappa",
      "samplesPerBlock": 5                               # optional, for all-kappa
    }

Scale items are ``[lo, hi]`` pairs, bare numbers (isolated points) or one of
the shorthands ``interval(lo, hi)``, ``point(x)``, ``arith(start, step, count)``
and ``harmonic(depth)``.  Numbers may be given as decimal strings.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .errors import ScenarioError
from .expr import ExprSyntaxError, parse_expression
from .fuzzy import DEFAULT_GRID, AlphaGrid
from .function import FuzzyFunction, builtin_fixture
from .derivative import Tolerances
from .timescale import SamplingPlan, TimeScale

_SHORTHAND = re.compile(r"^\s*(interval|point|arith|harmonic)\s*\((.*)\)\s*$")
_ARGC = {"interval": 2, "point": 1, "arith": 3, "harmonic": 1}


def _num(x: Any, where: str) -> float:
    if isinstance(x, bool):
        raise ScenarioError(f"{where}: expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(x.strip())
        except ValueError:
            pass
    raise ScenarioError(f"{where}: expected a number, got {x!r}")


def _int(x: Any, where: str) -> int:
    v = _num(x, where)
    if v != int(v):
        raise ScenarioError(f"{where}: expected an integer, got {x!r}")
    return int(v)


def _fmt(x: float) -> str:
    return repr(float(x) + 0.0)


def parse_scale_item(item: Any, where: str) -> tuple[TimeScale, Any]:
    """Return the scale piece and its normalized description."""
    if isinstance(item, (list, tuple)):
        if len(item) != 2:
            raise ScenarioError(f"{where}: a block must be a [lo, hi] pair")
        lo, hi = _num(item[0], where), _num(item[1], where)
        if lo > hi:
            raise ScenarioError(f"{where}: block [{lo}, {hi}] has lo > hi")
        return TimeScale([(lo, hi)]), [lo, hi]
    if isinstance(item, (int, float)) and not isinstance(item, bool):
        x = float(item)
        return TimeScale.points([x]), f"point({_fmt(x)})"
    if isinstance(item, str):
        m = _SHORTHAND.match(item)
        if not m:
            try:
                x = _num(item, where)
            except ScenarioError:
                raise ScenarioError(f"{where}: cannot parse scale item {item!r}") from None
            return TimeScale.points([x]), f"point({_fmt(x)})"
        kind, body = m.group(1), m.group(2)
        args = [s.strip() for s in body.split(",")] if body.strip() else []
        if len(args) != _ARGC[kind]:
            raise ScenarioError(f"{where}: {kind}() takes {_ARGC[kind]} argument(s), got {len(args)}")
        if kind == "interval":
            lo, hi = _num(args[0], where), _num(args[1], where)
            if lo > hi:
                raise ScenarioError(f"{where}: interval({lo}, {hi}) has lo > hi")
            return TimeScale.interval(lo, hi), f"interval({_fmt(lo)}, {_fmt(hi)})"
        if kind == "point":
            x = _num(args[0], where)
            return TimeScale.points([x]), f"point({_fmt(x)})"
        if kind == "arith":
            _num(args[0], where), _num(args[1], where)
            count = _int(args[2], where)
            # keep the decimal text: stepping is done exactly in decimal
            return TimeScale.arith(args[0], args[1], count), f"arith({args[0]}, {args[1]}, {count})"
        depth = _int(args[0], where)
        return TimeScale.harmonic(depth), f"harmonic({depth})"
    raise ScenarioError(f"{where}: cannot parse scale item {item!r}")


def parse_scale(raw: Any) -> tuple[TimeScale, list]:
    if isinstance(raw, str):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        raise ScenarioError("scale: expected a non-empty list of blocks or shorthands")
    pieces, norm = [], []
    for i, item in enumerate(raw):
        ts, n = parse_scale_item(item, f"scale[{i}]")
        pieces.append(ts)
        norm.append(n)
    return TimeScale.union(*pieces), norm


def parse_alpha_grid(raw: Any) -> AlphaGrid:
    if raw is None:
        return DEFAULT_GRID
    if isinstance(raw, (int, str)) and not isinstance(raw, bool):
        text = str(raw).strip()
        if "," not in text:
            n = _int(text, "alphaGrid")
            if n < 2:
                raise ScenarioError("alphaGrid: need at least 2 levels")
            return AlphaGrid.uniform(n)
        raw = [s for s in text.split(",") if s.strip()]
    if not isinstance(raw, list):
        raise ScenarioError("alphaGrid: expected a list of levels or a level count")
    return AlphaGrid([_num(x, "alphaGrid") for x in raw])


@dataclass(frozen=True)
class Scenario:
    scale: TimeScale
    scale_items: tuple
    function: FuzzyFunction
    grid: AlphaGrid = DEFAULT_GRID
    plan: SamplingPlan = field(default_factory=SamplingPlan)
    tolerances: Tolerances = field(default_factory=Tolerances)
    points: tuple[float, ...] | str = "all-kappa"
    samples_per_block: int = 5

    def resolved_points(self) -> list[float]:
        if self.points == "all-kappa":
            return self.scale.kappa_points(self.samples_per_block)
        return list(self.points)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "scale": list(self.scale_items),
            "function": self.function.to_dict(),
        }
        out["alphaGrid"] = [float(a) for a in self.grid.levels]
        out["plan"] = {"h0": self.plan.h0, "ratio": self.plan.ratio, "count": self.plan.count,
                       "tailWindow": self.plan.tail_window}
        out["tolerances"] = {"epsLim": self.tolerances.eps_lim, "epsCluster": self.tolerances.eps_cluster}
        out["points"] = self.points if isinstance(self.points, str) else [float(p) for p in self.points]
        out["samplesPerBlock"] = self.samples_per_block
        return out

    def with_overrides(
        self,
        *,
        alpha_levels: AlphaGrid | None = None,
        h0: float | None = None,
        ratio: float | None = None,
        count: int | None = None,
        tail_window: int | None = None,
        eps_lim: float | None = None,
        eps_cluster: float | None = None,
    ) -> Scenario:
        plan = self.plan
        changes = {k: v for k, v in
                   {"h0": h0, "ratio": ratio, "count": count, "tail_window": tail_window}.items()
                   if v is not None}
        if changes:
            plan = replace(plan, **changes)
        tol = self.tolerances
        tchanges = {k: v for k, v in {"eps_lim": eps_lim, "eps_cluster": eps_cluster}.items() if v is not None}
        if tchanges:
            tol = replace(tol, **tchanges)
        grid = alpha_levels or self.grid
        fn = self.function if grid == self.function.grid else self.function.with_grid(grid)
        return replace(self, plan=plan, tolerances=tol, grid=grid, function=fn)


_KNOWN_KEYS = {"scale", "function", "alphaGrid", "plan", "tolerances", "points", "samplesPerBlock"}


def scenario_from_dict(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario: top level must be a JSON object")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ScenarioError(f"scenario: unknown key(s) {sorted(unknown)}")
    fn_raw = data.get("function")
    if not isinstance(fn_raw, dict):
        raise ScenarioError("function: expected an object with 'fixture' or 'lower'/'upper'")
    grid = parse_alpha_grid(data.get("alphaGrid"))

    if "scale" in data:
        scale, scale_norm = parse_scale(data["scale"])
    else:
        scale, scale_norm = None, None

    if "fixture" in fn_raw:
        extra = set(fn_raw) - {"fixture", "params"}
        if extra:
            raise ScenarioError(f"function: unexpected key(s) {sorted(extra)} next to 'fixture'")
        params = fn_raw.get("params") or {}
        if not isinstance(params, dict):
            raise ScenarioError("function.params: expected an object")
        fn = builtin_fixture(str(fn_raw["fixture"]), params, domain=scale, grid=grid)
    else:
        if set(fn_raw) != {"lower", "upper"}:
            raise ScenarioError("function: expected exactly the keys 'lower' and 'upper'")
        if scale is None:
            raise ScenarioError("scale: required when the function is given by expressions")
        parsed = []
        for key in ("lower", "upper"):
            try:
                parsed.append(parse_expression(str(fn_raw[key])))
            except ExprSyntaxError as exc:
                exc.args = (f"function.{key}: {exc}",)
                raise
        fn = FuzzyFunction(parsed[0], parsed[1], scale, grid)
        fn.lower_source, fn.upper_source = str(fn_raw["lower"]), str(fn_raw["upper"])
    if scale is None:
        scale = fn.domain
        scale_norm = [[b.lo, b.hi] if b.lo != b.hi else f"point({_fmt(b.lo)})" for b in scale.blocks]
        if scale.right_limits or scale.left_limits or scale.n_blocks > 1000:
            raise ScenarioError("scale: this fixture's default scale cannot be echoed; give 'scale' explicitly")

    plan_raw = data.get("plan") or {}
    if not isinstance(plan_raw, dict):
        raise ScenarioError("plan: expected an object")
    base = SamplingPlan()
    plan = SamplingPlan(
        h0=_num(plan_raw.get("h0", base.h0), "plan.h0"),
        ratio=_num(plan_raw.get("ratio", base.ratio), "plan.ratio"),
        count=_int(plan_raw.get("count", base.count), "plan.count"),
        tail_window=_int(plan_raw.get("tailWindow", base.tail_window), "plan.tailWindow"),
    )
    tol_raw = data.get("tolerances") or {}
    if not isinstance(tol_raw, dict):
        raise ScenarioError("tolerances: expected an object")
    tol = Tolerances(
        eps_lim=_num(tol_raw.get("epsLim", Tolerances.eps_lim), "tolerances.epsLim"),
        eps_cluster=_num(tol_raw.get("epsCluster", Tolerances.eps_cluster), "tolerances.epsCluster"),
    )

    pts = data.get("points", "all-kappa")
    if pts == "all-kappa":
        points: tuple[float, ...] | str = "all-kappa"
    elif isinstance(pts, list):
        points = tuple(_num(p, f"points[{i}]") for i, p in enumerate(pts))
        for p in points:
            if not scale.contains(p):
                raise ScenarioError(f"points: {p!r} is not an element of the time scale")
            if not scale.kappa_contains(p):
                raise ScenarioError(f"points: {p!r} is the left-scattered maximum, outside the kappa-set")
    else:
        raise ScenarioError("points: expected a list of times or \"all-kappa\"")
    per_block = _int(data.get("samplesPerBlock", 5), "samplesPerBlock")
    if per_block < 2:
        raise ScenarioError("samplesPerBlock: must be >= 2")
    return Scenario(scale, tuple(scale_norm), fn, grid, plan, tol, points, per_block)


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return scenario_from_dict(data)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
