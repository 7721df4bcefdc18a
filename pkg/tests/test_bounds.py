import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from tfmlab.bounds import (
    ASYMPTOTIC_BOUND,
    BoundParams,
    allocation_bound_curve,
    efficiency_witness_check,
    find_efficiency_threshold,
    minimize_allocation_bound,
    two_bidder_lower,
    two_bidder_upper_extended,
    two_bidder_upper_general,
)
from tfmlab.model import DomainError, UsageError


def test_allocation_curve_value():
    assert allocation_bound_curve(3, 2) == pytest.approx(1.4)


@pytest.mark.parametrize("A, B", [(2, 3), (2, 1), (1, 0.5)])
def test_allocation_curve_domain(A, B):
    with pytest.raises(UsageError):
        allocation_bound_curve(A, B)


def test_minimized_allocation_bound():
    result = minimize_allocation_bound(1e6, 1e-4)
    assert 0.91421 <= result.value <= 0.91430
    assert result.value >= ASYMPTOTIC_BOUND
    assert result.A > result.B > 1
    assert result.value == pytest.approx(allocation_bound_curve(result.A, result.B))


def test_minimize_rejects_small_range():
    with pytest.raises(UsageError):
        minimize_allocation_bound(1.5)


@given(B=st.floats(min_value=1.01, max_value=1e4), gap=st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=100)
def test_allocation_curve_above_asymptote(B, gap):
    A = B * (1 + gap)
    assume(A > B)
    assert allocation_bound_curve(A, B) >= ASYMPTOTIC_BOUND - 1e-12


def test_bound_params_validation():
    with pytest.raises(UsageError):
        BoundParams(v1=1, v2=2)
    with pytest.raises(UsageError):
        BoundParams(b=0)
    with pytest.raises(UsageError):
        BoundParams(alpha=1.5)
    BoundParams(A=3, B=2, v1=2, v2=1, alpha=0.5)


def test_two_bidder_bounds():
    assert two_bidder_lower(3, 1, 2) == pytest.approx(0.5)
    # la borne générale peut être négative : elle est renvoyée telle quelle
    assert two_bidder_upper_general(19.8, 2.4, 16.6) < 0
    with pytest.raises(DomainError):
        two_bidder_upper_extended(19.8, 2.4, 5.0)


@given(v2=st.floats(min_value=0.5, max_value=10), ratio=st.floats(min_value=1.2, max_value=10))
@settings(max_examples=100)
def test_extended_bound_limit(v2, ratio):
    """À l'entrée du régime, la borne étendue tend vers v1/(2·v2)."""
    v1 = v2 * ratio
    u = (v1 + v2) / 2 + 1e-9 * (v1 - v2)
    assert two_bidder_upper_extended(v1, v2, u) == pytest.approx(v1 / (2 * v2), rel=1e-5)


def test_efficiency_examples():
    high = efficiency_witness_check(19.8, 2.4, 0.842 * 19.8)
    assert high.contradicts and high.bound == "extended"
    assert high.notes
    low = efficiency_witness_check(19.8, 2.4, 0.83 * 19.8)
    assert not low.contradicts


def test_efficiency_threshold():
    result = find_efficiency_threshold(19.8, 2.4, 1e-4)
    assert 0.83 < result.threshold <= 0.842
    lo, hi = result.bracket
    assert hi - lo <= 1e-4
    assert hi == result.threshold


@given(v2=st.floats(min_value=0.5, max_value=10), ratio=st.floats(min_value=1.5, max_value=20))
@settings(max_examples=50, deadline=None)
def test_threshold_brackets_the_sign_change(v2, ratio):
    v1 = v2 * ratio
    result = find_efficiency_threshold(v1, v2, 1e-4)
    assert result.threshold is not None
    lo, hi = result.bracket
    assert efficiency_witness_check(v1, v2, hi * v1).contradicts
    assert not efficiency_witness_check(v1, v2, lo * v1).contradicts


def test_threshold_tolerance():
    with pytest.raises(UsageError):
        find_efficiency_threshold(19.8, 2.4, 0)
    assert math.isfinite(find_efficiency_threshold(19.8, 2.4, 1e-2).threshold)


@given(v2=st.floats(min_value=0.5, max_value=10), ratio=st.floats(min_value=1.2, max_value=20))
@settings(max_examples=50)
def test_two_bidder_bounds_are_monotone_in_u(v2, ratio):
    """Sur le régime étendu, la borne haute décroît et la borne basse croît avec u."""
    v1 = v2 * ratio
    start, end = (v1 + v2) / 2, v1
    samples = [start + (end - start) * k / 20 for k in range(1, 20)]
    upper = [two_bidder_upper_extended(v1, v2, u) for u in samples]
    lower = [two_bidder_lower(v1, v2, u) for u in samples]
    assert all(b < a for a, b in zip(upper, upper[1:]))
    assert all(b > a for a, b in zip(lower, lower[1:]))
