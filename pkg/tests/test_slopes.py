from __future__ import annotations

import io
import math

import pytest

from ghdelta.errors import DegenerateDenominator, GridMismatch, PointNotApplicable
from ghdelta.function import builtin_fixture
from ghdelta.slopes import (
    Endpoint,
    LimitKind,
    SlopeTrace,
    cluster_set,
    complementary_check,
    estimate_limit,
    gap_clusters,
    level_traces,
    pointwise,
    slope_trace,
    write_traces_csv,
)
from ghdelta.timescale import LocalGrid, SamplingPlan, Side, TimeScale

QIU_PLAN = SamplingPlan(h0=0.9, ratio=0.7, count=41, tail_window=12)


def synthetic(values, side=Side.RIGHT, alpha=0.0, endpoint=Endpoint.UPPER) -> SlopeTrace:
    offsets = tuple(0.9 * 0.7**j for j in range(len(values)))
    return SlopeTrace(0.0, endpoint, alpha, side, offsets, tuple(float(v) for v in values))


def qiu_traces(alpha_index=0):
    f = builtin_fixture("QIU")
    grid = f.domain.local_grid(0, Side.RIGHT, QIU_PLAN)
    lows, ups = level_traces(f, 0, grid)
    return lows[alpha_index], ups[alpha_index]


# -- traces -----------------------------------------------------------------


def test_scattered_side_is_rejected():
    f = builtin_fixture("LINEAR_TRI")
    grid = f.domain.local_grid(1, Side.RIGHT)
    assert grid.offsets == (1.0,)
    with pytest.raises(DegenerateDenominator):
        slope_trace(f, 1, "lower", 0.0, grid)


def test_qiu_quotient_at_known_offset():
    h = math.exp(-math.pi / 2)
    grid = LocalGrid(0.0, Side.RIGHT, (h,), (h,))
    tr = slope_trace(builtin_fixture("QIU"), 0, Endpoint.UPPER, 0.0, grid)
    assert tr.values == (1.0,)


def test_grow_quotient_is_one():
    f = builtin_fixture("GROW")
    grid = f.domain.local_grid(0, Side.RIGHT, SamplingPlan(h0=1, ratio=0.5, count=20, tail_window=5))
    tr = slope_trace(f, 0, Endpoint.UPPER, 0.0, grid)
    assert all(v == pytest.approx(1, abs=1e-15) for v in tr.values)


def test_level_traces_match_single_traces():
    f = builtin_fixture("SHRINK")
    grid = f.domain.local_grid(0.5, Side.LEFT, SamplingPlan(count=12, tail_window=4))
    lows, ups = level_traces(f, 0.5, grid)
    for k, a in enumerate(f.grid):
        assert lows[k].values == slope_trace(f, 0.5, "lower", a, grid).values
        assert ups[k].values == slope_trace(f, 0.5, "upper", a, grid).values


def test_off_grid_alpha():
    f = builtin_fixture("GROW")
    grid = f.domain.local_grid(0, Side.RIGHT, SamplingPlan(count=10, tail_window=3))
    tr = slope_trace(f, 0, "upper", 0.25, grid)
    assert tr.values[-1] == pytest.approx(0.75)


def test_trace_outside_kappa():
    ts = TimeScale.union(TimeScale.interval(0, 1), TimeScale.points([2]))
    f = builtin_fixture("GROW", domain=ts)
    with pytest.raises(PointNotApplicable):
        level_traces(f, 2, LocalGrid(2.0, Side.LEFT, (-1.0,), (1.0,)))


def test_trace_rejects_nonfinite():
    with pytest.raises(ValueError):
        synthetic([1.0, math.nan])


# -- limits -----------------------------------------------------------------


def test_converged_constant():
    est = estimate_limit(synthetic([3.0] * 20))
    assert est.kind is LimitKind.CONVERGED and est.value == 3.0


def test_qiu_two_point():
    _, up = qiu_traces()
    est = estimate_limit(up)
    assert est.kind is LimitKind.TWO_POINT
    assert est.lo == pytest.approx(1.0, abs=1e-9) and est.hi == pytest.approx(2.0, abs=1e-9)
    assert math.isnan(est.value)


def test_smooth_oscillation_is_spread():
    hs = [0.9 * 0.7**j for j in range(41)]
    est = estimate_limit(synthetic([1.5 + 0.5 * math.sin(math.log(h)) for h in hs]))
    assert est.kind is LimitKind.SPREAD
    assert est.lo < 1.1 and est.hi > 1.9


def test_insufficient():
    assert estimate_limit(synthetic([1.0] * 5), tail_window=12).kind is LimitKind.INSUFFICIENT


def test_divergence_flag():
    est = estimate_limit(synthetic([2.0**j for j in range(20)]))
    assert est.kind is LimitKind.SPREAD and est.divergent


def test_estimate_to_dict():
    assert estimate_limit(synthetic([3.0] * 20)).to_dict()["value"] == 3.0
    assert estimate_limit(synthetic([1.0] * 3)).to_dict() == {"kind": "insufficient"}


def test_gap_clusters():
    groups = gap_clusters([2.0, 1.0, 1.0005, 2.0002, 5.0], 1e-3)
    assert [g.tolist() for g in groups] == [[1.0, 1.0005], [2.0, 2.0002], [5.0]]
    assert gap_clusters([], 1e-3) == []


# -- cluster sets and complementary pairs ------------------------------------


def test_cluster_sets():
    _, up = qiu_traces()
    assert cluster_set(up).values == pytest.approx((1.0, 2.0), abs=1e-9)
    assert cluster_set(synthetic([3.0] * 20)).values == (3.0,)
    _, up75 = qiu_traces(alpha_index=7)
    assert cluster_set(up75).values == pytest.approx((1.5,), abs=1e-12)


def test_qiu_complementary():
    lo, up = qiu_traces()
    rep = complementary_check(lo, up)
    assert rep.is_complementary
    assert (rep.a, rep.b) == pytest.approx((1.0, 2.0), abs=1e-12)


def test_grow_not_complementary():
    f = builtin_fixture("GROW")
    grid = f.domain.local_grid(0, Side.RIGHT)
    lows, ups = level_traces(f, 0, grid)
    assert estimate_limit(lows[0]).value == pytest.approx(-1)
    assert estimate_limit(ups[0]).value == pytest.approx(1)
    assert not complementary_check(lows[0], ups[0]).is_complementary


def test_identical_two_point_traces_not_complementary():
    _, up = qiu_traces()
    rep = complementary_check(up, SlopeTrace(up.t0, Endpoint.LOWER, up.alpha, up.side, up.offsets, up.values))
    assert not rep.is_complementary
    assert "converge" in rep.reason


def test_grid_mismatch():
    a = synthetic([1.0] * 12)
    b = synthetic([1.0] * 12, alpha=0.5)
    with pytest.raises(GridMismatch):
        complementary_check(a, b)
    with pytest.raises(GridMismatch):
        pointwise(a, synthetic([1.0] * 13), "min")


def test_pointwise():
    a, b = synthetic([1, 4, 2]), synthetic([3, 0, 2], endpoint=Endpoint.LOWER)
    assert pointwise(a, b, "min").values == (1, 0, 2)
    assert pointwise(a, b, Endpoint.MAX).values == (3, 4, 2)


def test_write_traces_csv():
    buf = io.StringIO()
    tr = synthetic([1.0, 2.0])
    write_traces_csv([tr], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t0,side,endpoint,alpha,h,value"
    assert lines[1] == "0.0,right,upper,0.0,0.9,1.0"
    assert len(lines) == 3
    assert float(lines[2].split(",")[4]) == tr.offsets[1]
