"""Interface commune des mécanismes de frais."""

from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Sequence

from tfmlab.model import BidProfile, Outcome
from tfmlab.utility import active_entries

ZERO = Fraction(0)

# Règle brute : (allocations, paiements, brûlages) pour les seules entrées présentes.
RuleResult = tuple[list[Fraction], list[Fraction], list[Fraction]]


def highest_bidder(bids: Sequence[Fraction]) -> int:
    """Indice de la plus haute enchère ; les égalités vont au plus petit indice."""
    best = 0
    for k, bid in enumerate(bids):
        if bid > bids[best]:
            best = k
    return best


def winner_takes(n: int, winner: int | None, pay=ZERO, burn=ZERO) -> RuleResult:
    alloc = [ZERO] * n
    pays = [ZERO] * n
    burns = [ZERO] * n
    if winner is not None:
        alloc[winner] = Fraction(1)
        pays[winner] = Fraction(pay)
        burns[winner] = Fraction(burn)
    return alloc, pays, burns


class Mechanism(ABC):
    """
    Un mécanisme associe à chaque profil d'enchères une issue
    (probabilités d'allocation, paiements, brûlages).
    """
    name: str = "Mechanism"
    anonymous: bool = True
    deterministic: bool = True

    @abstractmethod
    def evaluate(self, profile: BidProfile) -> Outcome:
        ...

    def evaluate_bids(self, bids: Sequence, fakes: Sequence = ()) -> Outcome:
        return self.evaluate(BidProfile.from_bids(bids, fakes=fakes))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class RuleMechanism(Mechanism):
    """
    Mécanisme décrit par une règle sur les seules entrées présentes. Les
    entrées nulles ne voient jamais la règle et reçoivent 0.
    """

    def evaluate(self, profile: BidProfile) -> Outcome:
        active = active_entries(profile)
        n = len(profile)
        if not active:
            return Outcome.zeros(n)
        ids = [profile.entries[i].bidder_id for i in active]
        bids = [profile.entries[i].bid for i in active]
        alloc, pay, burn = self._rule(ids, bids)
        full_alloc = [ZERO] * n
        full_pay = [ZERO] * n
        full_burn = [ZERO] * n
        for k, i in enumerate(active):
            full_alloc[i] = Fraction(alloc[k])
            full_pay[i] = Fraction(pay[k])
            full_burn[i] = Fraction(burn[k])
        return Outcome(tuple(full_alloc), tuple(full_pay), tuple(full_burn))

    @abstractmethod
    def _rule(self, ids: list[str], bids: list[Fraction]) -> RuleResult:
        ...
