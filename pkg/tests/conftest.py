from __future__ import annotations

import pytest

from ghdelta.timescale import TimeScale


def make_ts1() -> TimeScale:
    """[0, 1] with the isolated point 1.5 and the block [2, 3]."""
    return TimeScale.union(TimeScale.interval(0, 1), TimeScale.points([1.5]), TimeScale.interval(2, 3))


@pytest.fixture
def ts1() -> TimeScale:
    return make_ts1()


@pytest.fixture
def ts2() -> TimeScale:
    return TimeScale.union(TimeScale.interval(0, 1), TimeScale.points([2]))
