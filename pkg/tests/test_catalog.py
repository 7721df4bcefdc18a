from fractions import Fraction
from itertools import combinations_with_replacement, product

import pytest

from tfmlab.mechanisms import (
    CURVE_MENU,
    Family,
    MechanismSpec,
    PaymentCurve,
    TabulatedMechanism,
    catalog,
    enumerate_family,
    make_mechanism,
)
from tfmlab.mechanisms.base import Mechanism
from tfmlab.model import INFINITY, BidProfile, GridSpec, OffGridError, Outcome, SpecError
from tfmlab.utility import validate_outcome


def run(spec, bids, fakes=()):
    return make_mechanism(spec).evaluate_bids(bids, fakes)


def winner(result: Outcome):
    served = [i for i, a in enumerate(result.alloc) if a == 1]
    return served[0] if served else None


@pytest.mark.parametrize("spec, label", [
    (MechanismSpec(Family.TRIVIAL), "Trivial"),
    (MechanismSpec(Family.BURNED_SECOND_PRICE, Fraction(1)), "BurnedSecondPrice(r=1)"),
    (MechanismSpec(Family.BURNED_SECOND_PRICE, INFINITY), "BurnedSecondPrice(r=inf)"),
    (MechanismSpec(Family.GENERALIZED_BURNED_FIRST_PRICE, Fraction(1), PaymentCurve.affine(Fraction(1, 2))),
     "GeneralizedBurnedFirstPrice(r=1, f=min(v,1/2v+r))"),
    (MechanismSpec(Family.NON_ANONYMOUS_POSTED_BURN, Fraction(1), i_star="b0"),
     "NonAnonymousPostedBurn(i*=b0, r=1)"),
])
def test_labels(spec, label):
    assert spec.label == label
    assert make_mechanism(spec).name == label


def test_first_and_second_price():
    first = run(MechanismSpec(Family.FIRST_PRICE), [1, 3, 2])
    assert winner(first) == 1 and first.pay[1] == 3
    second = run(MechanismSpec(Family.SECOND_PRICE), [1, 3, 2])
    assert winner(second) == 1 and second.pay[1] == 2
    assert sum(second.burn) == 0


def test_third_price():
    result = run(MechanismSpec(Family.THIRD_PRICE), [3, 2, 1])
    assert winner(result) == 0 and result.pay[0] == 1
    # deux enchères : le troisième prix est nul
    assert run(MechanismSpec(Family.THIRD_PRICE), [3, 2]).pay[0] == 0


def test_ties_go_to_lowest_index():
    result = run(MechanismSpec(Family.FIRST_PRICE), [2, 2])
    assert winner(result) == 0


def test_ties_skip_absent_entries():
    result = run(MechanismSpec(Family.SECOND_PRICE), [0, 2, 2])
    assert winner(result) == 1 and result.pay[1] == 2


def test_burned_second_price():
    spec = MechanismSpec(Family.BURNED_SECOND_PRICE, Fraction(1))
    result = run(spec, [3, 2])
    assert (result.pay[0], result.burn[0]) == (2, 1)
    single = run(spec, [3])
    assert (single.pay[0], single.burn[0]) == (1, 1)
    assert winner(run(spec, ["1/2"])) is None


def test_generalized_burned_first_price():
    spec = MechanismSpec(Family.GENERALIZED_BURNED_FIRST_PRICE, Fraction(1), PaymentCurve.affine(Fraction(1, 2)))
    result = run(spec, [4, 1])
    assert (result.pay[0], result.burn[0]) == (3, 1)
    capped = run(spec, [Fraction(3, 2)])
    assert capped.pay[0] == Fraction(3, 2)


def test_posted_burn_serves_only_its_identity():
    spec = MechanismSpec(Family.NON_ANONYMOUS_POSTED_BURN, Fraction(1), i_star="b0")
    assert winner(run(spec, [0, 5])) is None
    assert winner(run(spec, ["1/2", 5])) is None
    result = run(spec, [1, 5])
    assert winner(result) == 0 and (result.pay[0], result.burn[0]) == (1, 1)
    assert not make_mechanism(spec).anonymous


@pytest.mark.parametrize("family", [
    Family.BURNED_SECOND_PRICE,
    Family.GENERALIZED_BURNED_FIRST_PRICE,
    Family.NON_ANONYMOUS_POSTED_BURN,
])
def test_infinite_reserve_never_allocates(family):
    f = PaymentCurve.identity() if family is Family.GENERALIZED_BURNED_FIRST_PRICE else None
    i_star = "b0" if family is Family.NON_ANONYMOUS_POSTED_BURN else None
    spec = MechanismSpec(family, INFINITY, f, i_star)
    assert run(spec, [100, 50], fakes=[70]) == Outcome.zeros(3)


def test_invalid_specs():
    with pytest.raises(SpecError):
        make_mechanism(MechanismSpec(Family.GENERALIZED_BURNED_FIRST_PRICE, Fraction(1)))
    with pytest.raises(SpecError):
        make_mechanism(MechanismSpec(Family.GENERALIZED_BURNED_FIRST_PRICE, Fraction(1),
                                     PaymentCurve.constant(Fraction(1, 2))))
    with pytest.raises(SpecError):
        make_mechanism(MechanismSpec(Family.NON_ANONYMOUS_POSTED_BURN, Fraction(1)))
    with pytest.raises(SpecError):
        PaymentCurve.tabulated({1: 2}).validate(Fraction(0))


def test_spec_json_round_trip():
    spec = MechanismSpec(Family.GENERALIZED_BURNED_FIRST_PRICE, Fraction(1, 2),
                         PaymentCurve.affine(Fraction(1, 2)))
    assert MechanismSpec.from_json(spec.to_json()) == spec
    assert spec.to_json()["f"]["intercept"] == "r"


def test_reserve_map():
    spec = MechanismSpec.from_json({"family": "NonAnonymousPostedBurn",
                                    "r_map": {"b0": "inf", "b1": "2"}})
    assert (spec.i_star, spec.r) == ("b1", 2)
    with pytest.raises(SpecError):
        MechanismSpec.from_json({"family": "NonAnonymousPostedBurn",
                                 "r_map": {"b0": "1", "b1": "2"}})


def test_unknown_family():
    with pytest.raises(SpecError):
        MechanismSpec.from_json({"family": "Vickrey"})


def test_enumerate_family():
    assert len(enumerate_family(Family.SECOND_PRICE, [0, 1])) == 1
    assert len(enumerate_family(Family.BURNED_SECOND_PRICE, [0, 1, "inf"])) == 3
    assert len(enumerate_family(Family.GENERALIZED_BURNED_FIRST_PRICE, [0, 1, "inf"])) == 3 * len(CURVE_MENU)
    posted = enumerate_family("NonAnonymousPostedBurn", [1])
    assert posted[0].spec.i_star == "b0"


def test_catalog_covers_every_family():
    mechanisms = catalog([0])
    assert {m.spec.family for m in mechanisms} == set(Family)
    assert len(mechanisms) == 6 + len(CURVE_MENU)


def test_tabulated_copy():
    grid = GridSpec.parse("0..2:1/2", max_profile_size=2, max_fake_bids=0)
    mech = make_mechanism(MechanismSpec(Family.BURNED_SECOND_PRICE, Fraction(1)))
    table = TabulatedMechanism.from_mechanism(mech, grid)
    assert table.evaluate_bids([2, Fraction(3, 2)]) == mech.evaluate_bids([2, Fraction(3, 2)])
    with pytest.raises(OffGridError):
        table.evaluate_bids([Fraction(1, 3)])
    with pytest.raises(OffGridError):
        table.evaluate_bids([1, 1, 1])


def test_tabulated_rejects_bad_outcome():
    bad = {(Fraction(1),): Outcome((Fraction(1),), (Fraction(2),), (Fraction(0),))}
    with pytest.raises(SpecError):
        TabulatedMechanism(bad)


@pytest.mark.parametrize("mech", catalog([0, "1/2", 1, "inf"]), ids=lambda m: m.name)
def test_catalog_outcomes_are_valid(mech):
    grid = GridSpec.parse("0..2:1/2", max_profile_size=3, max_fake_bids=1)
    for n in range(1, grid.max_profile_size + 1):
        for bids in product(grid.points, repeat=n):
            for k in range(grid.max_fake_bids + 1):
                for fakes in combinations_with_replacement(grid.positive_points, k):
                    profile = BidProfile.from_bids(bids, fakes=fakes)
                    assert validate_outcome(mech.evaluate(profile), profile) == [], (bids, fakes)


def test_mechanism_needs_a_rule():
    class Empty(Mechanism):
        pass

    with pytest.raises(TypeError):
        Empty()


def test_tabulated_curve_validation():
    curve = PaymentCurve.tabulated({1: 1, 2: "3/2", 3: 2})
    curve.validate(Fraction(1))
    with pytest.raises(SpecError):
        curve.validate(Fraction(2))
    with pytest.raises(SpecError):
        PaymentCurve.tabulated({1: 1, 2: "1/2"}).validate(Fraction(0))
