from __future__ import annotations

import numpy as np
import pytest

from ghdelta.errors import EvalDomainError, NotAFuzzyNumber, PointNotInScale
from ghdelta.expr import ExprSyntaxError
from ghdelta.function import FIXTURES, BadParams, FuzzyFunction, UnknownFixture, builtin_fixture, validate_function
from ghdelta.fuzzy import DEFAULT_GRID, crisp, hausdorff, tri
from ghdelta.timescale import TimeScale

LEVELS = DEFAULT_GRID.levels
QIU_AT_ZERO = np.maximum(0, 1 - 2 * LEVELS) / 2


def test_expression_function_at_one():
    f = FuzzyFunction("a*t", "(2 - a)*t", TimeScale.interval(0, 2))
    assert hausdorff(f.eval_at(1), tri(0, 1, 2)) <= 1e-15


def test_constant_fixture():
    f = builtin_fixture("CONSTANT")
    for t in (0, 2, 4):
        assert f.eval_at(t) == crisp(3)
    assert builtin_fixture("constant", {"value": -1.5}).eval_at(1) == crisp(-1.5)


def test_linear_tri_fixture():
    assert hausdorff(builtin_fixture("LINEAR_TRI").eval_at(2), tri(0, 2, 4)) <= 1e-15


def test_qiu_fixture_at_zero():
    u = builtin_fixture("QIU").eval_at(0)
    np.testing.assert_allclose(u.lower, -QIU_AT_ZERO, atol=1e-16)
    np.testing.assert_allclose(u.upper, QIU_AT_ZERO, atol=1e-16)


def test_grow_fixture_at_zero():
    assert hausdorff(builtin_fixture("GROW").eval_at(0), tri(-1, 0, 1)) <= 1e-15


def test_fixture_names():
    assert set(FIXTURES) == {"LINEAR_TRI", "GROW", "SHRINK", "QIU", "OSCILLATE", "CONSTANT"}
    with pytest.raises(UnknownFixture):
        builtin_fixture("NOPE")
    with pytest.raises(BadParams):
        builtin_fixture("GROW", {"value": 1})
    with pytest.raises(BadParams):
        builtin_fixture("CONSTANT", {"value": "abc"})


def test_fixture_domain_override():
    f = builtin_fixture("LINEAR_TRI", domain=TimeScale.interval(0, 1))
    assert f.domain.classify_point(0.5).is_dense


def test_point_not_in_scale():
    f = builtin_fixture("LINEAR_TRI")
    with pytest.raises(PointNotInScale):
        f.eval_at(0.5)


def test_not_a_fuzzy_number_reports_level():
    f = FuzzyFunction("t", "-t", TimeScale.interval(0, 2))
    with pytest.raises(NotAFuzzyNumber) as info:
        f.eval_at(1)
    assert info.value.alpha == 0.0


def test_eval_domain_error():
    f = FuzzyFunction("ln(t)", "ln(t) + 1", TimeScale.interval(0, 1))
    with pytest.raises(EvalDomainError):
        f.eval_at(0)
    assert f.eval_at(1).lower[0] == 0


def test_syntax_errors_surface_at_construction():
    with pytest.raises(ExprSyntaxError):
        FuzzyFunction("t +", "t", TimeScale.interval(0, 1))


def test_validate_function_examples():
    qiu = builtin_fixture("QIU")
    assert validate_function(qiu, [0, 0.01, 0.1, 1]).ok
    bad = validate_function(FuzzyFunction("t", "-t", TimeScale.points([1])), [1])
    assert not bad.ok and bad.failures()[1.0].first.kind == "ordering"
    dec = validate_function(FuzzyFunction("1 - a", "2", TimeScale.points([0])), [0])
    assert dec.failures()[0.0].first.kind == "lowerDecreasing"


def test_validate_function_collects_evaluation_errors():
    f = FuzzyFunction("ln(t)", "ln(t) + 1", TimeScale.interval(0, 1))
    rep = validate_function(f, [0, 0.5])
    assert list(rep.failures()) == [0.0]
    assert rep.failures()[0.0].first.kind == "evaluation"


@pytest.mark.parametrize("name", ["LINEAR_TRI", "GROW", "SHRINK", "QIU", "OSCILLATE", "CONSTANT"])
def test_fixtures_are_fuzzy_everywhere(name):
    f = builtin_fixture(name)
    assert validate_function(f, f.domain.kappa_points(9)).ok


def test_to_dict():
    assert builtin_fixture("CONSTANT", {"value": 2}).to_dict() == {"fixture": "CONSTANT", "params": {"value": 2}}
    f = FuzzyFunction("a*t", "(2 - a)*t", TimeScale.interval(0, 1))
    assert f.to_dict() == {"lower": "a*t", "upper": "(2 - a)*t"}
