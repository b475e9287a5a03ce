"""Fairness, outage and aggregation statistics."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from voltesched import metrics


def test_jain_equal_rates():
    assert metrics.jain_index([5, 5, 5, 5]) == pytest.approx(1.0)


def test_jain_single_user_extreme():
    assert metrics.jain_index([1, 0, 0, 0]) == pytest.approx(0.25)


def test_jain_worked_value():
    # (1+2+3)^2 / (3 * (1+4+9)) = 36/42
    assert metrics.jain_index([1, 2, 3]) == pytest.approx(36 / 42)


def test_jain_all_zero_is_fair():
    assert metrics.jain_index([0.0, 0.0]) == 1.0


def test_jain_rejects_empty_and_negative():
    with pytest.raises(ValueError):
        metrics.jain_index([])
    with pytest.raises(ValueError):
        metrics.jain_index([1.0, -0.5])


@given(st.lists(st.floats(min_value=0, max_value=1e6), min_size=1, max_size=20))
def test_jain_bounds(rates):
    j = metrics.jain_index(rates)
    assert 1 / len(rates) - 1e-12 <= j <= 1 + 1e-12


@given(
    st.lists(st.floats(min_value=0.01, max_value=1e4), min_size=1, max_size=10),
    st.floats(min_value=0.01, max_value=100),
)
def test_jain_scale_invariance(rates, c):
    assert metrics.jain_index(np.array(rates) * c) == pytest.approx(
        metrics.jain_index(rates), rel=1e-9
    )


@given(st.lists(st.floats(min_value=0, max_value=1e4), min_size=2, max_size=10))
def test_jain_permutation_invariance(rates):
    shuffled = list(reversed(rates))
    assert metrics.jain_index(shuffled) == pytest.approx(metrics.jain_index(rates))


def test_outage_all_served():
    assert metrics.outage_probability([4, 4], 4) == 0.0


def test_outage_none_served():
    assert metrics.outage_probability([0, 0, 0], 5) == 1.0


def test_outage_worked_value():
    # 3 of 4 served in each of 2 frames -> 0.25
    assert metrics.outage_probability([3, 3], 4) == pytest.approx(0.25)


def test_outage_input_validation():
    with pytest.raises(ValueError):
        metrics.outage_probability([1], 0)
    with pytest.raises(ValueError):
        metrics.outage_probability([], 3)
    with pytest.raises(ValueError):
        metrics.outage_probability([5], 3)


def _mk(v):
    return metrics.RunMetrics(v, 2 * v, 3 * v, 0.5, 0.1)


def test_aggregate_single_run():
    agg = metrics.aggregate_runs([_mk(10.0)])
    assert agg["volte_throughput_bits_per_frame"] == (10.0, 0.0)


def test_aggregate_two_runs():
    agg = metrics.aggregate_runs([_mk(10.0), _mk(20.0)])
    mean, std = agg["data_throughput_bits_per_frame"]
    assert mean == pytest.approx(30.0)
    assert std == pytest.approx(np.std([20.0, 40.0], ddof=1))


def test_aggregate_none_fields():
    runs = [metrics.RunMetrics(0, 1, 1, 0.5, None), metrics.RunMetrics(0, 2, 2, 0.5, None)]
    mean, std = metrics.aggregate_runs(runs)["outage_fraction"]
    assert np.isnan(mean) and np.isnan(std)


def test_kbps_conversion():
    assert metrics.bits_per_frame_to_kbps(300) == pytest.approx(15.0)
    assert metrics.bits_per_frame_to_kbps(0) == 0.0
