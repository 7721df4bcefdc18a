from fractions import Fraction

import pytest

from tfmlab.model import (
    BidEntry,
    BidProfile,
    GridSpec,
    OffGridError,
    Origin,
    UsageError,
    format_money,
    is_infinite,
    to_money,
    to_reserve,
)


@pytest.mark.parametrize("raw, expected", [
    (3, Fraction(3)),
    ("1/4", Fraction(1, 4)),
    (" 0.5 ", Fraction(1, 2)),
    (0.25, Fraction(1, 4)),
    (Fraction(2, 3), Fraction(2, 3)),
])
def test_to_money(raw, expected):
    assert to_money(raw) == expected


@pytest.mark.parametrize("raw", ["abc", True, None, float("nan")])
def test_to_money_rejects(raw):
    with pytest.raises(UsageError):
        to_money(raw)


def test_reserve_infinity():
    assert is_infinite(to_reserve("inf"))
    assert is_infinite(to_reserve(float("inf")))
    assert format_money(to_reserve("inf")) == "inf"
    assert format_money(to_reserve("3/2")) == "3/2"
    with pytest.raises(UsageError):
        to_reserve(-1)


def test_profile_identities():
    """Les réels sont b0, b1, … et les faux f0, f1, …, placés après les réels."""
    profile = BidProfile.from_bids([1, 0], values=[1, 2], fakes=["1/2"])
    assert [e.bidder_id for e in profile.entries] == ["b0", "b1", "f0"]
    assert profile.bids == (1, 0, Fraction(1, 2))
    assert profile.n_real == 2
    assert profile.fake_indices == (2,)
    assert len(profile) == 3


def test_profile_fakes_must_follow_reals():
    entries = (BidEntry("f0", Fraction(1), Origin.FAKE), BidEntry("b0", Fraction(1)))
    with pytest.raises(UsageError):
        BidProfile(entries)


def test_profile_values_match_reals():
    with pytest.raises(UsageError):
        BidProfile.from_bids([1, 2], values=[1])


def test_profile_negative_bid():
    with pytest.raises(UsageError):
        BidProfile.from_bids([-1])


def test_with_bids_keeps_origins():
    profile = BidProfile.from_bids([1], values=[1], fakes=[2])
    moved = profile.with_bids([0, 3])
    assert moved.entries[1].origin is Origin.FAKE
    assert moved.bids == (0, 3)
    assert moved.true_values == profile.true_values


def test_arithmetic_grid():
    grid = GridSpec.arithmetic(0, 2, Fraction(1, 4))
    assert len(grid.points) == 9
    assert grid.points[-1] == 2
    assert grid.label == "{0,1/4,1/2,3/4,1,5/4,3/2,7/4,2} n≤3 faux≤2"


def test_arithmetic_grid_adds_zero():
    grid = GridSpec.arithmetic(1, 3, 1)
    assert grid.points == (0, 1, 2, 3)


@pytest.mark.parametrize("text, points", [
    ("0..1:1/2", (0, Fraction(1, 2), 1)),
    ("1:3/2:3", (0, 1, Fraction(3, 2), Fraction(9, 4))),
    ("1/4,1/2", (0, Fraction(1, 4), Fraction(1, 2))),
])
def test_grid_parse(text, points):
    assert GridSpec.parse(text).points == points


@pytest.mark.parametrize("text", ["0..1", "1:1:3", "abc", "0..1:-1"])
def test_grid_parse_rejects(text):
    with pytest.raises(UsageError):
        GridSpec.parse(text)


@pytest.mark.parametrize("points", [(1, 2), (0, 1, 1), ()])
def test_grid_rejects_points(points):
    with pytest.raises(UsageError):
        GridSpec(points)


def test_grid_index():
    grid = GridSpec.parse("0..2:1/2")
    assert grid.index(Fraction(3, 2)) == 3
    assert Fraction(3, 2) in grid
    with pytest.raises(OffGridError):
        grid.index(Fraction(3, 8))
    # OffGridError reste une KeyError pour les appelants génériques
    with pytest.raises(KeyError):
        grid.index(Fraction(5))


def test_grid_caps_and_json():
    grid = GridSpec.parse("0..2:1/2", max_profile_size=2, max_fake_bids=1)
    assert GridSpec.from_json(grid.to_json()) == grid
    assert GridSpec.from_json({"spec": "0..2:1/2", "max_profile_size": 2, "max_fake_bids": 1}) == grid
    bigger = grid.with_caps(max_profile_size=3, max_fake_bids=None)
    assert (bigger.max_profile_size, bigger.max_fake_bids) == (3, 1)
    with pytest.raises(UsageError):
        GridSpec.from_json({})
