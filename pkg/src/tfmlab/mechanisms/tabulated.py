"""Mécanismes donnés par une table : profil d'enchères -> issue."""

from itertools import product
from typing import Mapping

from tfmlab.mechanisms.base import Mechanism
from tfmlab.model import BidProfile, GridSpec, OffGridError, Outcome, SpecError, to_money
from tfmlab.utility import validate_outcome


class TabulatedMechanism(Mechanism):
    """
    Mécanisme défini point par point. Les clés sont les tuples d'enchères
    complets (zéros compris) ; l'issue ne dépend pas des identités.
    """

    def __init__(self, table: Mapping[tuple, Outcome], name: str = "Tabulated",
                 anonymous: bool = False, deterministic: bool = True):
        self.table = {tuple(to_money(b) for b in key): outcome for key, outcome in table.items()}
        for key, outcome in self.table.items():
            if len(outcome) != len(key):
                raise SpecError(f"Issue de longueur {len(outcome)} pour le profil {key}")
            broken = validate_outcome(outcome, BidProfile.from_bids(key))
            if broken:
                names = ", ".join(v.value for v in broken)
                raise SpecError(f"Issue invalide pour {tuple(map(str, key))} : {names}")
        self.name = name
        self.anonymous = anonymous
        self.deterministic = deterministic

    @classmethod
    def from_mechanism(cls, mech: Mechanism, grid: GridSpec, max_len: int | None = None,
                       name: str | None = None) -> "TabulatedMechanism":
        """Tabule mech sur tous les profils de la grille de longueur 1..max_len."""
        if max_len is None:
            max_len = grid.max_profile_size + grid.max_fake_bids
        table = {}
        for n in range(1, max_len + 1):
            for bids in product(grid.points, repeat=n):
                table[bids] = mech.evaluate(BidProfile.from_bids(bids))
        return cls(table, name or mech.name, mech.anonymous, mech.deterministic)

    def evaluate(self, profile: BidProfile) -> Outcome:
        try:
            return self.table[profile.bids]
        except KeyError:
            raise OffGridError(f"Profil hors table : {tuple(map(str, profile.bids))}")
