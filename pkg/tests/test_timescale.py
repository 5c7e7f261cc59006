from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghdelta.errors import BoundarySide, PointNotInScale, ScenarioError
from ghdelta.timescale import LeftKind, RightKind, SamplingPlan, Side, TimeScale


@pytest.mark.parametrize("t, want", [(1, 1.5), (0.5, 0.5), (3, 3), (1.5, 2), (0, 0)])
def test_sigma(ts1, t, want):
    assert ts1.sigma(t) == want


@pytest.mark.parametrize("t, want", [(2, 1.5), (0, 0), (2.5, 2.5), (1.5, 1)])
def test_rho(ts1, t, want):
    assert ts1.rho(t) == want


@pytest.mark.parametrize("t, want", [(1, 0.5), (0.5, 0), (1.5, 0.5), (3, 0)])
def test_graininess(ts1, t, want):
    assert ts1.graininess(t) == want


def test_classify_point_examples(ts1):
    pc = ts1.classify_point(1)
    assert (pc.right, pc.left) == (RightKind.SCATTERED, LeftKind.DENSE)
    pc = ts1.classify_point(1.5)
    assert (pc.right, pc.left) == (RightKind.SCATTERED, LeftKind.SCATTERED)
    assert pc.is_isolated and pc.label == "isolated"
    pc = ts1.classify_point(0)
    assert (pc.right, pc.left) == (RightKind.DENSE, LeftKind.BOUNDARY)
    assert ts1.classify_point(0.5).label == "dense"
    assert ts1.classify_point(3).right is RightKind.BOUNDARY


def test_kappa(ts1, ts2):
    assert not ts2.kappa_contains(2)
    assert ts1.kappa_contains(3)
    assert ts2.kappa_contains(0.5)


@pytest.mark.parametrize("op", ["sigma", "rho", "graininess", "classify_point", "kappa_contains"])
def test_point_not_in_scale(ts1, op):
    with pytest.raises(PointNotInScale):
        getattr(ts1, op)(1.2)


def test_membership(ts1):
    assert 1.5 in ts1 and 0.25 in ts1 and 3 in ts1
    assert 1.25 not in ts1 and -0.1 not in ts1 and 3.0001 not in ts1


def test_local_grid_harmonic_targets_are_scale_points():
    ts3 = TimeScale.harmonic(10**6)
    g = ts3.local_grid(0, Side.RIGHT, SamplingPlan(h0=1, ratio=0.5, count=4, tail_window=3))
    assert g.offsets == (1.0, 0.5, 0.25, 0.125)


def test_local_grid_scattered_side(ts1):
    assert ts1.local_grid(2, Side.LEFT).offsets == (-0.5,)
    assert ts1.local_grid(1, "right").offsets == (0.5,)


def test_local_grid_continuous_block(ts1):
    g = ts1.local_grid(2.5, Side.RIGHT, SamplingPlan(h0=0.1, ratio=0.5, count=3, tail_window=3))
    assert g.offsets == (0.1, 0.05, 0.025)
    assert g.points == (2.6, 2.55, 2.525)


def test_local_grid_projects_onto_the_scale(ts1):
    # targets past the end of [0, 1] are pulled back to scale points
    g = ts1.local_grid(0.5, Side.RIGHT, SamplingPlan(h0=0.9, ratio=0.5, count=6, tail_window=3))
    assert all(p in ts1 for p in g.points)
    assert list(g.offsets) == sorted(g.offsets, reverse=True)
    assert len(set(g.offsets)) == len(g.offsets)


def test_local_grid_boundary_side(ts1):
    with pytest.raises(BoundarySide):
        ts1.local_grid(0, Side.LEFT)
    with pytest.raises(BoundarySide):
        ts1.local_grid(3, Side.RIGHT)


def test_arith_is_decimal_exact():
    ts = TimeScale.arith("0", "0.1", 11)
    assert 0.3 in ts and 0.7 in ts and 1.0 in ts
    assert ts.sigma(0.3) == 0.4
    assert ts.graininess(0.2) == pytest.approx(0.1)


def test_union_merges_touching_blocks():
    ts = TimeScale.union(TimeScale.interval(0, 1), TimeScale.interval(1, 2), TimeScale.points([1.5]))
    assert ts.n_blocks == 1
    assert ts.classify_point(1).is_dense


def test_harmonic_classification():
    ts = TimeScale.harmonic(50)
    assert ts.classify_point(0).right is RightKind.DENSE
    assert ts.classify_point(0.5).is_isolated
    assert ts.sigma(0.5) == 1.0
    assert ts.rho(0.5) == pytest.approx(1 / 3)


def test_kappa_points(ts1):
    pts = ts1.kappa_points(5)
    assert pts == sorted(pts)
    assert {0.0, 1.0, 1.5, 2.0, 3.0} <= set(pts)
    ts2 = TimeScale.union(TimeScale.interval(0, 1), TimeScale.points([2]))
    assert 2.0 not in ts2.kappa_points(5)


@pytest.mark.parametrize("kwargs", [dict(h0=0), dict(ratio=1), dict(ratio=0), dict(count=1),
                                    dict(count=4, tail_window=5), dict(tail_window=1)])
def test_bad_plans(kwargs):
    with pytest.raises(ScenarioError):
        SamplingPlan(**kwargs)


def test_bad_block():
    with pytest.raises(ScenarioError):
        TimeScale([(1, 0)])


# -- properties -------------------------------------------------------------

blocks = st.lists(
    st.tuples(st.integers(-50, 50), st.integers(0, 6)).map(lambda p: (p[0] / 4, (p[0] + p[1]) / 4)),
    min_size=1, max_size=6,
)


@st.composite
def scale_and_point(draw):
    ts = TimeScale(draw(blocks))
    b = draw(st.sampled_from(ts.blocks))
    t = draw(st.floats(b.lo, b.hi)) if b.hi > b.lo else b.lo
    return ts, t


@settings(max_examples=200, deadline=None)
@given(scale_and_point())
def test_jump_invariants(sp):
    ts, t = sp
    s, r = ts.sigma(t), ts.rho(t)
    assert r <= t <= s
    assert s in ts and r in ts
    mu = ts.graininess(t)
    assert (mu > 0) == (ts.classify_point(t).right is RightKind.SCATTERED)
    if mu > 0:
        assert ts.rho(s) == t
        assert not any(t < x < s for x in (t + mu / 3, t + mu / 2) if x in ts)


@settings(max_examples=100, deadline=None)
@given(scale_and_point())
def test_kappa_only_drops_left_scattered_max(sp):
    ts, t = sp
    dropped = not ts.kappa_contains(t)
    assert dropped == (t == ts.sup and ts.classify_point(t).left is LeftKind.SCATTERED)
    assert math.isfinite(ts.graininess(t))
