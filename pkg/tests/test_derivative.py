from __future__ import annotations

import json

import numpy as np
import pytest

from ghdelta.derivative import (
    CaseTag,
    Tolerances,
    classify_case,
    derivative,
    derivative_dense_side,
    derivative_scattered,
    uniformity_check,
    verify_sigma_identity,
)
from ghdelta.errors import GhDifferenceFails, PointNotApplicable
from ghdelta.function import FuzzyFunction, builtin_fixture
from ghdelta.fuzzy import DEFAULT_GRID, crisp, hausdorff, level_cut, tri, validate
from ghdelta.timescale import SamplingPlan, Side, TimeScale

from conftest import make_ts1

LEVELS = DEFAULT_GRID.levels
L = np.maximum(0, 1 - 2 * LEVELS)


# -- scattered points -------------------------------------------------------


def test_scattered_linear_tri():
    d = derivative_scattered(builtin_fixture("LINEAR_TRI"), 1)
    assert d.case_tag is CaseTag.SCATTERED
    assert d.derivative == tri(0, 1, 2)


def test_scattered_crisp_derivative():
    f = FuzzyFunction("t^2 + a", "t^2 + 3 - a", TimeScale.arith(0, 1, 5))
    d = derivative_scattered(f, 1)
    assert d.derivative == crisp(3)


def test_scattered_constant_is_zero():
    f = builtin_fixture("CONSTANT")
    for t0 in (0, 1, 3):
        assert derivative_scattered(f, t0).derivative == crisp(0)


def test_scattered_rejects_dense_point():
    with pytest.raises(PointNotApplicable):
        derivative_scattered(builtin_fixture("GROW"), 0)


def test_scattered_gh_failure():
    # f(0) = tri(0, 1, 2) and f(1) = rect(0, 1): the difference does not exist
    f = FuzzyFunction("a*(1 - t)", "(2 - a)*(1 - t) + t", TimeScale.arith(0, 1, 2))
    with pytest.raises(GhDifferenceFails):
        derivative(f, 0)


def test_scattered_matches_general_entry_point():
    f = builtin_fixture("LINEAR_TRI")
    for t0 in (0, 1, 2, 3):
        a, b = derivative(f, t0), derivative_scattered(f, t0)
        assert a.derivative == b.derivative
        assert a.case_report.point_class == b.case_report.point_class


def test_left_scattered_max_is_outside_kappa():
    with pytest.raises(PointNotApplicable):
        derivative(builtin_fixture("LINEAR_TRI"), 4)


# -- dense side reports -----------------------------------------------------


def test_qiu_right_side():
    rep = derivative_dense_side(builtin_fixture("QIU"), 0, Side.RIGHT)
    assert rep.exists
    np.testing.assert_allclose(rep.a, 1.5 - L / 2, atol=1e-9)
    np.testing.assert_allclose(rep.b, 1.5 + L / 2, atol=1e-9)
    flags = [e.complementary.is_complementary for e in rep.entries]
    assert flags == [bool(a < 0.5) for a in LEVELS]


def test_grow_sides():
    f = builtin_fixture("GROW")
    right = derivative_dense_side(f, 0, "right")
    np.testing.assert_allclose(right.endpoint_values("lower"), -(1 - LEVELS), atol=1e-12)
    np.testing.assert_allclose(right.endpoint_values("upper"), 1 - LEVELS, atol=1e-12)
    left = derivative_dense_side(f, 0, "left")
    np.testing.assert_allclose(left.endpoint_values("upper"), -(1 - LEVELS), atol=1e-12)
    np.testing.assert_allclose(left.endpoint_values("lower"), 1 - LEVELS, atol=1e-12)
    assert right.exists and left.exists


def test_dense_side_requires_dense():
    with pytest.raises(PointNotApplicable):
        derivative_dense_side(builtin_fixture("GROW"), -1, "left")


# -- classification ---------------------------------------------------------


def test_grow_case_iv():
    d = derivative(builtin_fixture("GROW"), 0)
    assert d.case_tag is CaseTag.CASE_IV
    assert hausdorff(d.derivative, tri(-1, 0, 1)) <= 1e-6
    assert d.sigma_residual == 0


def test_shrink_case_ii():
    rep = classify_case(builtin_fixture("SHRINK"), 0.5)
    assert rep.case_tag is CaseTag.CASE_II
    assert derivative(builtin_fixture("SHRINK"), 0.5).derivative == tri(-1, 0, 1)


def test_qiu_case_v():
    d = derivative(builtin_fixture("QIU"), 0)
    rep = d.case_report
    assert rep.case_tag is CaseTag.CASE_V
    assert rep.alpha0 == 0.5 and rep.alpha0_bracket == (0.4, 0.5)
    assert rep.one_sided_only
    np.testing.assert_allclose(d.derivative.lower, 1.5 - L / 2, atol=1e-9)
    np.testing.assert_allclose(d.derivative.upper, 1.5 + L / 2, atol=1e-9)


def test_oscillation_not_differentiable():
    d = derivative(builtin_fixture("OSCILLATE"), 0)
    assert d.case_tag is CaseTag.NOT_DIFFERENTIABLE
    assert d.derivative is None and not d.differentiable
    kinds = d.case_report.evidence["estimateKinds"]
    assert set(kinds) == {"right", "left"}
    assert kinds["right"]["0"][0] == "spread"


def test_crisp_derivative_lists_all_matches():
    f = FuzzyFunction("2*t", "2*t", TimeScale.interval(0, 1))
    rep = classify_case(f, 0.5)
    assert rep.case_tag is CaseTag.CASE_I
    assert rep.matches[:2] == (CaseTag.CASE_I, CaseTag.CASE_II)
    assert derivative(f, 0.5).derivative == crisp(2)


def test_smooth_fuzzy_function_case_i():
    f = FuzzyFunction("a*t", "(2 - a)*t", TimeScale.interval(0, 1))
    d = derivative(f, 0.5)
    assert d.case_tag is CaseTag.CASE_I
    assert hausdorff(d.derivative, tri(0, 1, 2)) <= 1e-12
    assert d.uniformity_deficit <= 1e-9


def test_boundary_points_are_one_sided():
    d = derivative(builtin_fixture("GROW"), 1)
    assert d.case_report.one_sided_only
    assert [s.side for s in d.case_report.sides] == [Side.LEFT]
    assert d.differentiable


def test_mixed_point_carries_left_report():
    f = builtin_fixture("LINEAR_TRI", domain=make_ts1())
    d = derivative(f, 1)
    assert d.case_tag is CaseTag.SCATTERED
    assert d.case_report.point_class.label == "rightScattered-leftDense"
    assert [s.side for s in d.case_report.sides] == [Side.LEFT]
    assert d.case_report.warnings == ()
    assert d.derivative == tri(0, 1, 2)


def test_left_discontinuity_warns():
    f = FuzzyFunction("step(t - 1) + a", "step(t - 1) + 2 - a", make_ts1())
    d = derivative(f, 1)
    assert d.case_tag is CaseTag.SCATTERED
    assert any("discontinuous" in w for w in d.case_report.warnings)


def test_right_dense_left_scattered_point():
    f = builtin_fixture("LINEAR_TRI", domain=make_ts1())
    d = derivative(f, 2)
    assert d.case_tag is CaseTag.CASE_I
    assert not d.case_report.one_sided_only


# -- identities and invariants ----------------------------------------------


def test_sigma_identity_examples():
    f = builtin_fixture("LINEAR_TRI")
    d = derivative(f, 1)
    assert verify_sigma_identity(f, 1, d) == 0
    g = FuzzyFunction("t^2", "t^2", TimeScale.arith(0, 1, 5))
    assert verify_sigma_identity(g, 1, derivative(g, 1)) == 0
    dense = derivative(builtin_fixture("GROW"), 0)
    assert verify_sigma_identity(builtin_fixture("GROW"), 0, dense) == 0


def test_sigma_identity_needs_derivative():
    f = builtin_fixture("OSCILLATE")
    with pytest.raises(PointNotApplicable):
        verify_sigma_identity(f, 0, derivative(f, 0))


@pytest.mark.parametrize("name, t0", [("GROW", 0), ("QIU", 0), ("SHRINK", 0.5)])
def test_uniformity(name, t0):
    assert uniformity_check(builtin_fixture(name), t0) <= 1e-9


def test_uniformity_dense_linear():
    f = builtin_fixture("LINEAR_TRI", domain=TimeScale.interval(0, 1))
    assert uniformity_check(f, 0.25) <= 1e-9


def test_uniformity_requires_derivative():
    with pytest.raises(PointNotApplicable):
        uniformity_check(builtin_fixture("OSCILLATE"), 0)


@pytest.mark.parametrize("name, t0", [("GROW", 0), ("GROW", 0.5), ("SHRINK", 0.5), ("QIU", 0), ("QIU", 0.3),
                                      ("LINEAR_TRI", 2)])
def test_results_are_valid_and_coherent(name, t0):
    f = builtin_fixture(name)
    d = derivative(f, t0)
    assert validate(d.derivative).ok
    assert d.sigma_residual <= 1e-9
    for rep in d.case_report.sides:
        if d.case_tag in (CaseTag.CASE_I, CaseTag.CASE_II, CaseTag.CASE_V) and rep.exists:
            for k, a in enumerate(f.grid):
                cut = level_cut(d.derivative, a)
                assert abs(cut.lo - rep.a[k]) <= 1e-6 and abs(cut.hi - rep.b[k]) <= 1e-6
        if d.case_tag is not CaseTag.SCATTERED:
            assert rep.gh_tail_ok


def test_case_v_degenerates_to_crisp():
    # with the switch switched off at every level the quotients are a constant 1.5
    f = FuzzyFunction("1.5*t", "1.5*t", TimeScale.interval(0, 1))
    d = derivative(f, 0)
    assert d.case_tag is CaseTag.CASE_I
    assert d.derivative == crisp(1.5)


def test_tight_tolerance_keeps_exact_fixtures():
    tol = Tolerances(eps_lim=1e-15)
    assert classify_case(builtin_fixture("QIU"), 0, tol=tol).case_tag is CaseTag.CASE_V
    assert classify_case(builtin_fixture("GROW"), 0, tol=tol).case_tag is CaseTag.CASE_IV


def test_coarse_plan_only_sees_one_branch():
    # h = 0.9 * 0.7**j for j < 4 all have sin(ln h) < 0, so the switch never
    # flips and the sampled quotients look like a plain case II function
    plan = SamplingPlan(h0=0.9, ratio=0.7, count=4, tail_window=4)
    d = derivative(builtin_fixture("QIU"), 0, plan)
    assert d.case_tag is CaseTag.CASE_II
    assert d.case_report.alpha0 is None


def test_to_dict_is_json():
    for name, t0 in [("QIU", 0), ("OSCILLATE", 0), ("LINEAR_TRI", 1)]:
        out = derivative(builtin_fixture(name), t0).to_dict()
        text = json.dumps(out, allow_nan=False)
        assert json.loads(text)["caseTag"] == out["caseTag"]
    out = derivative(builtin_fixture("QIU"), 0).to_dict()
    assert out["alpha0"] == 0.5 and out["alpha0Bracket"] == [0.4, 0.5]
    assert out["a"][0] == 1.0 and out["b"][0] == 2.0
