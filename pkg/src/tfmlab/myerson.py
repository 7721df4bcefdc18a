"""
Monotonie d'une règle d'allocation tabulée et paiements DSIC uniques.

Le paiement est a(b)·b − Q(b), où Q est la somme de Riemann à gauche de
l'allocation sur la grille : a(t) est supposée constante sur [g_k, g_{k+1}).
Quand g_k est l'enchère d'un rival, la valeur retenue sur ce pas est celle de
l'enchérisseur qui gagne l'égalité (règle anonyme) : une égalité perdue en g_k
ne décale pas le saut au point suivant.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
import logging
from typing import Mapping, Sequence

from tfmlab.mechanisms.base import Mechanism
from tfmlab.mechanisms.tabulated import TabulatedMechanism
from tfmlab.model import (
    BidProfile,
    DomainError,
    GridSpec,
    OffGridError,
    Outcome,
    SpecError,
    UsageError,
    to_money,
)

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


@dataclass(frozen=True)
class TabulatedAllocation:
    """Probabilités d'allocation par profil complet de la grille (zéros compris)."""
    grid: GridSpec
    values: Mapping[tuple, tuple]
    anonymous: bool = True

    def __post_init__(self):
        table = {}
        for key, probs in self.values.items():
            key = tuple(to_money(b) for b in key)
            probs = tuple(to_money(p) for p in probs)
            if len(key) != len(probs):
                raise UsageError(f"Profil {key} et allocation {probs} de tailles différentes.")
            if any(b not in self.grid for b in key):
                raise OffGridError(f"Profil hors grille : {tuple(map(str, key))}")
            if any(p < 0 or p > 1 for p in probs) or sum(probs, ZERO) > 1:
                raise UsageError(f"Allocation infaisable pour {tuple(map(str, key))}")
            table[key] = probs
        object.__setattr__(self, "values", table)

    def prob(self, i: int, bids: Sequence[Fraction]) -> Fraction:
        try:
            return self.values[tuple(bids)][i]
        except KeyError:
            raise OffGridError(f"Profil absent de la table : {tuple(map(str, bids))}")

    def axis(self, i: int, bids: Sequence[Fraction]) -> list[tuple[Fraction, Fraction]]:
        """(t, a_i(t, b_{-i})) pour tous les t de la grille."""
        bids = list(bids)
        line = []
        for t in self.grid.points:
            bids[i] = t
            line.append((t, self.prob(i, bids)))
        return line

    @property
    def deterministic(self) -> bool:
        return all(p in (0, 1) for probs in self.values.values() for p in probs)

    def to_json(self) -> dict:
        return {
            "grid": self.grid.to_json(),
            "anonymous": self.anonymous,
            "rows": [{"bids": [str(b) for b in key], "alloc": [str(p) for p in probs]}
                     for key, probs in sorted(self.values.items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TabulatedAllocation":
        grid = GridSpec.from_json(data["grid"])
        return cls(grid, {tuple(row["bids"]): tuple(row["alloc"]) for row in data["rows"]},
                   bool(data.get("anonymous", True)))


@dataclass(frozen=True)
class MonotonicityCheck:
    monotone: bool
    slot: int | None = None
    profile: tuple | None = None
    lower_bid: Fraction | None = None
    higher_bid: Fraction | None = None

    def __bool__(self) -> bool:
        return self.monotone


def tabulate_allocation(mech: Mechanism, grid: GridSpec,
                        max_bidders: int | None = None) -> TabulatedAllocation:
    if max_bidders is None:
        max_bidders = grid.max_profile_size
    values = {}
    for n in range(1, max_bidders + 1):
        for bids in product(grid.points, repeat=n):
            values[bids] = mech.evaluate(BidProfile.from_bids(bids)).alloc
    return TabulatedAllocation(grid, values, mech.anonymous)


def is_monotone(alloc: TabulatedAllocation) -> MonotonicityCheck:
    """Vérifie que a_i est croissante en b_i à b_{-i} fixé ; sinon renvoie le premier contre-exemple."""
    points = alloc.grid.points
    following = dict(zip(points, points[1:]))
    for key in sorted(alloc.values):
        for i, b in enumerate(key):
            if b not in following:
                continue
            higher = key[:i] + (following[b],) + key[i + 1:]
            if higher not in alloc.values:
                continue
            if alloc.values[higher][i] < alloc.values[key][i]:
                return MonotonicityCheck(False, i, key, b, following[b])
    return MonotonicityCheck(True)


def _monotone_axis(alloc: TabulatedAllocation, i: int, bids: Sequence[Fraction]):
    line = alloc.axis(i, bids)
    for (t, a), (s, c) in zip(line, line[1:]):
        if c < a:
            raise DomainError(
                f"Allocation non monotone pour l'emplacement {i} : a({t}) = {a} > a({s}) = {c}"
            )
    return line


def _step_value(alloc: TabulatedAllocation, i: int, bids: Sequence[Fraction],
                t: Fraction, a: Fraction) -> Fraction:
    """Valeur de a_i juste au-dessus de t."""
    if not alloc.anonymous:
        return a
    tied = list(bids)
    tied[i] = t
    for j, x in enumerate(bids):
        if j != i and x == t and x > 0:
            a = max(a, alloc.prob(j, tied))
    return a


def myerson_payment(alloc: TabulatedAllocation, i: int, bids: Sequence) -> Fraction:
    """Paiement DSIC de l'emplacement i : a(b_i)·b_i − Σ_{g_k < b_i} a(g_k⁺)·(g_{k+1} − g_k)."""
    bids = tuple(to_money(b) for b in bids)
    if not 0 <= i < len(bids):
        raise UsageError(f"Emplacement {i} absent d'un profil de taille {len(bids)}")
    line = _monotone_axis(alloc, i, bids)
    b = bids[i]
    integral = ZERO
    for (t, a), (s, _) in zip(line, line[1:]):
        if t >= b:
            break
        integral += _step_value(alloc, i, bids, t, a) * (s - t)
    return alloc.prob(i, bids) * b - integral


def payment_error_bound(alloc: TabulatedAllocation, i: int, bids: Sequence) -> Fraction:
    """Écart entre sommes de Riemann à droite et à gauche sur [0, b_i] : borne l'erreur de discrétisation."""
    bids = tuple(to_money(b) for b in bids)
    line = _monotone_axis(alloc, i, bids)
    gap = ZERO
    for (t, a), (s, c) in zip(line, line[1:]):
        if t >= bids[i]:
            break
        gap += (c - a) * (s - t)
    return gap


def critical_bid(alloc: TabulatedAllocation, i: int, bids: Sequence) -> Fraction | None:
    """Plus petite enchère de la grille qui fait servir l'emplacement i avec certitude."""
    bids = tuple(to_money(b) for b in bids)
    for t, a in alloc.axis(i, bids):
        if a == 1:
            return t
    return None


def derive_dsic_mechanism(alloc: TabulatedAllocation,
                          burn: Mapping[tuple, Sequence] | None = None,
                          name: str = "Myerson") -> TabulatedMechanism:
    """
    Mécanisme tabulé dont les paiements sont ceux de Myerson sur chaque profil
    de la table ; burn donne les brûlages par profil (zéro si absent).
    """
    burn = {tuple(to_money(b) for b in key): tuple(to_money(x) for x in row)
            for key, row in (burn or {}).items()}
    table = {}
    for key, probs in alloc.values.items():
        pay = tuple(myerson_payment(alloc, i, key) if key[i] > 0 else ZERO
                    for i in range(len(key)))
        burns = burn.get(key, (ZERO,) * len(key))
        if len(burns) != len(key):
            raise SpecError(f"Brûlage de taille incorrecte pour {tuple(map(str, key))}")
        for i, (p, beta) in enumerate(zip(pay, burns)):
            if beta < 0 or beta > p:
                raise SpecError(
                    f"Brûlage {beta} hors de [0, {p}] pour l'emplacement {i} "
                    f"du profil {tuple(map(str, key))}"
                )
        table[key] = Outcome(probs, pay, burns)
    logger.debug("%s : %d profils dérivés", name, len(table))
    return TabulatedMechanism(table, name=name, anonymous=alloc.anonymous,
                              deterministic=alloc.deterministic)
