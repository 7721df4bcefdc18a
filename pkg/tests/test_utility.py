from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product

import pytest

from tfmlab.mechanisms import Family, MechanismSpec, catalog, make_mechanism
from tfmlab.model import BidProfile, GridSpec, Outcome, UsageError
from tfmlab.utility import (
    BasicViolation,
    active_entries,
    bidder_utility,
    joint_utility,
    miner_utility,
    validate_outcome,
)


def bsp(r):
    return make_mechanism(MechanismSpec(Family.BURNED_SECOND_PRICE, Fraction(r)))


def outcome(alloc, pay, burn):
    return Outcome(tuple(map(Fraction, alloc)), tuple(map(Fraction, pay)), tuple(map(Fraction, burn)))


def test_active_entries_skip_zero_bids():
    assert active_entries(BidProfile.from_bids([0, 2, 0, 1])) == (1, 3)


def test_absent_bidders_get_nothing():
    mech = make_mechanism(MechanismSpec(Family.FIRST_PRICE))
    result = mech.evaluate_bids([0, 0])
    assert result == Outcome.zeros(2)


def test_bidder_and_miner_utilities():
    mech = bsp(1)
    profile = BidProfile.from_bids([3, 2], values=[3, 2])
    assert bidder_utility(mech, profile, 0, 3) == 1
    assert bidder_utility(mech, profile, 1, 2) == 0
    # paiement 2, brûlage 1
    assert miner_utility(mech, profile) == 1


def test_fake_bids_raise_revenue():
    mech = bsp(1)
    profile = BidProfile.from_bids([3], values=[3], fakes=[2])
    assert miner_utility(mech, profile) == 1


def test_winning_fake_bid_costs_the_miner():
    mech = bsp(1)
    profile = BidProfile.from_bids([2], values=[2], fakes=[3])
    # la fausse enchère gagne : le mineur paie à lui-même, le brûlage est perdu
    assert miner_utility(mech, profile) == -1


def test_joint_utility_matches_split():
    mech = bsp(1)
    profile = BidProfile.from_bids([3, 2], values=[3, 2])
    assert joint_utility(mech, profile) == 2
    assert joint_utility(mech, profile) == miner_utility(mech, profile) + sum(
        bidder_utility(mech, profile, i, v) for i, v in enumerate([3, 2])
    )


def test_joint_utility_needs_values():
    with pytest.raises(UsageError):
        joint_utility(bsp(1), BidProfile.from_bids([3]))


def test_bidder_utility_rejects_fake_slot():
    profile = BidProfile.from_bids([1], values=[1], fakes=[1])
    with pytest.raises(UsageError):
        bidder_utility(bsp(1), profile, 1, 1)


@pytest.mark.parametrize("result, bids, expected", [
    (outcome([1], [1], [1]), [2], []),
    (outcome([2], [0], [0]), [2], [BasicViolation.PROBABILITY_RANGE, BasicViolation.FEASIBILITY]),
    (outcome(["2/3", "2/3"], [0, 0], [0, 0]), [1, 1], [BasicViolation.FEASIBILITY]),
    (outcome([1], [-1], [0]), [2], [BasicViolation.NEGATIVE_PAYMENT, BasicViolation.BURN_BALANCE]),
    (outcome([1], [4], [0]), [3], [BasicViolation.INDIVIDUAL_RATIONALITY]),
    (outcome([1], [1], [2]), [3], [BasicViolation.BURN_BALANCE]),
])
def test_validate_outcome(result, bids, expected):
    assert validate_outcome(result, BidProfile.from_bids(bids)) == expected


def test_validate_outcome_length():
    with pytest.raises(UsageError):
        validate_outcome(outcome([1], [0], [0]), BidProfile.from_bids([1, 1]))


GRID = GridSpec.parse("0..2:1/2", max_profile_size=2, max_fake_bids=1)
MECHANISMS = catalog([0, 1])


def value_vectors(grid):
    for n in range(1, grid.max_profile_size + 1):
        yield from product(grid.positive_points, repeat=n)


def fake_sets(grid):
    for k in range(grid.max_fake_bids + 1):
        yield from combinations_with_replacement(grid.positive_points, k)


@pytest.mark.parametrize("mech", MECHANISMS, ids=lambda m: m.name)
def test_joint_utility_never_exceeds_the_best_value(mech):
    for values in value_vectors(GRID):
        for bids in product(GRID.points, repeat=len(values)):
            for fakes in fake_sets(GRID):
                profile = BidProfile.from_bids(bids, values=values, fakes=fakes)
                assert joint_utility(mech, profile) <= max(values), (bids, fakes)


@pytest.mark.parametrize("mech", MECHANISMS, ids=lambda m: m.name)
def test_joint_utility_covers_every_coalition(mech):
    """Hors coalition on enchérit sa valeur : l'utilité jointe majore mineur + coalition."""
    for values in value_vectors(GRID):
        n = len(values)
        for members in (c for size in range(n + 1) for c in combinations(range(n), size)):
            choices = [GRID.points if i in members else (v,) for i, v in enumerate(values)]
            for bids in product(*choices):
                for fakes in fake_sets(GRID):
                    profile = BidProfile.from_bids(bids, values=values, fakes=fakes)
                    result = mech.evaluate(profile)
                    coalition = miner_utility(mech, profile, result) + sum(
                        (bidder_utility(mech, profile, i, values[i], result) for i in members),
                        Fraction(0),
                    )
                    assert joint_utility(mech, profile, outcome=result) >= coalition, (bids, members)
