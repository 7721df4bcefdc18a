"""Utilités des enchérisseurs, du mineur et de la coalition ; contrôle des issues."""

from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Sequence

from tfmlab.model import BidProfile, Origin, Outcome, UsageError

if TYPE_CHECKING:
    from tfmlab.mechanisms.base import Mechanism

ZERO = Fraction(0)


class BasicViolation(Enum):
    PROBABILITY_RANGE = "ProbabilityRange"
    FEASIBILITY = "Feasibility"
    NEGATIVE_PAYMENT = "NegativePayment"
    INDIVIDUAL_RATIONALITY = "IndividualRationality"
    BURN_BALANCE = "BurnBalance"


def active_entries(profile: BidProfile) -> tuple[int, ...]:
    """Indices des entrées présentes (enchère strictement positive)."""
    return tuple(i for i, bid in enumerate(profile.bids) if bid > 0)


def _check_real_slot(profile: BidProfile, i: int):
    if not 0 <= i < len(profile) or profile.entries[i].origin is not Origin.REAL:
        raise UsageError(f"L'indice {i} ne désigne pas un enchérisseur réel.")


def outcome_bidder_utility(outcome: Outcome, i: int, value: Fraction) -> Fraction:
    return value * outcome.alloc[i] - outcome.pay[i]


def outcome_miner_utility(outcome: Outcome, profile: BidProfile) -> Fraction:
    """Paiements des vraies transactions moins tout ce qui est brûlé (faux compris)."""
    total = ZERO
    for i, entry in enumerate(profile.entries):
        if entry.origin is Origin.REAL:
            total += outcome.pay[i] - outcome.burn[i]
        else:
            total -= outcome.burn[i]
    return total


def bidder_utility(mech: "Mechanism", profile: BidProfile, i: int, value,
                   outcome: Outcome | None = None) -> Fraction:
    _check_real_slot(profile, i)
    if outcome is None:
        outcome = mech.evaluate(profile)
    return outcome_bidder_utility(outcome, i, Fraction(value))


def miner_utility(mech: "Mechanism", profile: BidProfile,
                  outcome: Outcome | None = None) -> Fraction:
    if outcome is None:
        outcome = mech.evaluate(profile)
    return outcome_miner_utility(outcome, profile)


def joint_utility(mech: "Mechanism", profile: BidProfile, values: Sequence | None = None,
                  outcome: Outcome | None = None) -> Fraction:
    """
    Utilité jointe du mineur et de toutes les vraies transactions :
    Σ_réels (v·a − β) − Σ_faux β, qui coïncide avec mineur + Σ utilités.
    """
    if values is None:
        values = profile.true_values
    if values is None:
        raise UsageError("Valeurs manquantes pour l'utilité jointe.")
    values = tuple(Fraction(v) for v in values)
    if len(values) != profile.n_real:
        raise UsageError(f"{len(values)} valeurs pour {profile.n_real} enchérisseurs réels.")
    if outcome is None:
        outcome = mech.evaluate(profile)
    direct = ZERO
    for i, entry in enumerate(profile.entries):
        if entry.origin is Origin.REAL:
            direct += values[i] * outcome.alloc[i] - outcome.burn[i]
        else:
            direct -= outcome.burn[i]
    split = outcome_miner_utility(outcome, profile) + sum(
        (outcome_bidder_utility(outcome, i, values[i]) for i in range(len(values))), ZERO
    )
    assert direct == split
    return direct


def validate_outcome(outcome: Outcome, profile: BidProfile) -> list[BasicViolation]:
    """Liste les contraintes de base violées par une issue (vide si tout va bien)."""
    if not (len(outcome.alloc) == len(outcome.pay) == len(outcome.burn) == len(profile)):
        raise UsageError("L'issue et le profil n'ont pas la même longueur.")
    found = []
    if any(a < 0 or a > 1 for a in outcome.alloc):
        found.append(BasicViolation.PROBABILITY_RANGE)
    if outcome.total_alloc > 1:
        found.append(BasicViolation.FEASIBILITY)
    if any(p < 0 for p in outcome.pay):
        found.append(BasicViolation.NEGATIVE_PAYMENT)
    if any(p > a * b for a, p, b in zip(outcome.alloc, outcome.pay, profile.bids)):
        found.append(BasicViolation.INDIVIDUAL_RATIONALITY)
    if any(not 0 <= beta <= p for beta, p in zip(outcome.burn, outcome.pay)):
        found.append(BasicViolation.BURN_BALANCE)
    return found
