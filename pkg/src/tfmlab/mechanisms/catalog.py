"""Catalogue des mécanismes paramétrés."""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
import logging
from typing import Iterable

from tfmlab.mechanisms.base import Mechanism, RuleMechanism, RuleResult, highest_bidder, winner_takes
from tfmlab.mechanisms.curves import CURVE_MENU, PaymentCurve
from tfmlab.model import (
    GridSpec,
    Reserve,
    SpecError,
    format_money,
    is_infinite,
    to_reserve,
)

logger = logging.getLogger(__name__)


class Family(str, Enum):
    TRIVIAL = "Trivial"
    FIRST_PRICE = "FirstPrice"
    SECOND_PRICE = "SecondPrice"
    THIRD_PRICE = "ThirdPrice"
    BURNED_SECOND_PRICE = "BurnedSecondPrice"
    GENERALIZED_BURNED_FIRST_PRICE = "GeneralizedBurnedFirstPrice"
    NON_ANONYMOUS_POSTED_BURN = "NonAnonymousPostedBurn"


RESERVE_FAMILIES = (
    Family.BURNED_SECOND_PRICE,
    Family.GENERALIZED_BURNED_FIRST_PRICE,
    Family.NON_ANONYMOUS_POSTED_BURN,
)


@dataclass(frozen=True)
class MechanismSpec:
    family: Family
    r: Reserve = Fraction(0)
    f: PaymentCurve | None = None
    i_star: str | None = None

    @property
    def label(self) -> str:
        r = format_money(self.r)
        if self.family is Family.BURNED_SECOND_PRICE:
            return f"{self.family.value}(r={r})"
        if self.family is Family.GENERALIZED_BURNED_FIRST_PRICE:
            return f"{self.family.value}(r={r}, f={self.f.label})"
        if self.family is Family.NON_ANONYMOUS_POSTED_BURN:
            return f"{self.family.value}(i*={self.i_star}, r={r})"
        return self.family.value

    def validate(self):
        if self.family in RESERVE_FAMILIES and not is_infinite(self.r) and self.r < 0:
            raise SpecError(f"Réserve négative : {self.r}")
        if self.family is Family.GENERALIZED_BURNED_FIRST_PRICE:
            if self.f is None:
                raise SpecError("Le premier prix brûlé généralisé exige une courbe f.")
            self.f.validate(self.r)
        if self.family is Family.NON_ANONYMOUS_POSTED_BURN and not self.i_star:
            raise SpecError("Le mécanisme non anonyme exige une identité i*.")

    def to_json(self) -> dict:
        data = {"family": self.family.value}
        if self.family in RESERVE_FAMILIES:
            data["r"] = format_money(self.r)
        if self.f is not None:
            data["f"] = self.f.to_json()
        if self.i_star is not None:
            data["i_star"] = self.i_star
        return data

    @classmethod
    def from_json(cls, data: dict) -> "MechanismSpec":
        try:
            family = Family(data["family"])
        except (KeyError, ValueError):
            raise SpecError(f"Famille de mécanisme inconnue : {data.get('family')!r}")
        r = to_reserve(data.get("r", 0))
        i_star = data.get("i_star")
        if "r_map" in data:
            i_star, r = _read_reserve_map(data["r_map"])
        curve = PaymentCurve.from_json(data["f"]) if "f" in data else None
        spec = cls(family, r, curve, i_star)
        spec.validate()
        return spec


def _read_reserve_map(r_map: dict) -> tuple[str, Reserve]:
    """Une carte identité -> réserve avec au plus une réserve finie."""
    finite = {k: to_reserve(v) for k, v in r_map.items() if not is_infinite(to_reserve(v))}
    if len(finite) > 1:
        raise SpecError(f"Plus d'une réserve finie : {sorted(finite)}")
    if not finite:
        return next(iter(r_map), "b0"), to_reserve("inf")
    return next(iter(finite.items()))


class CatalogMechanism(RuleMechanism):
    """Mécanisme du catalogue, décrit entièrement par sa MechanismSpec."""

    def __init__(self, spec: MechanismSpec):
        spec.validate()
        self.spec = spec
        self.name = spec.label
        self.anonymous = spec.family is not Family.NON_ANONYMOUS_POSTED_BURN
        self.deterministic = True

    def _rule(self, ids: list[str], bids: list[Fraction]) -> RuleResult:
        spec = self.spec
        n = len(bids)
        ordered = sorted(bids, reverse=True)
        second = ordered[1] if n > 1 else Fraction(0)
        w = highest_bidder(bids)

        if spec.family is Family.TRIVIAL:
            return winner_takes(n, None)
        if spec.family is Family.FIRST_PRICE:
            return winner_takes(n, w, pay=bids[w])
        if spec.family is Family.SECOND_PRICE:
            return winner_takes(n, w, pay=second)
        if spec.family is Family.THIRD_PRICE:
            return winner_takes(n, w, pay=ordered[2] if n > 2 else 0)
        if spec.family is Family.BURNED_SECOND_PRICE:
            if is_infinite(spec.r) or bids[w] < spec.r:
                return winner_takes(n, None)
            return winner_takes(n, w, pay=max(spec.r, second), burn=spec.r)
        if spec.family is Family.GENERALIZED_BURNED_FIRST_PRICE:
            if is_infinite(spec.r) or bids[w] < spec.r:
                return winner_takes(n, None)
            return winner_takes(n, w, pay=spec.f(bids[w], spec.r), burn=spec.r)
        if spec.family is Family.NON_ANONYMOUS_POSTED_BURN:
            if is_infinite(spec.r) or spec.i_star not in ids:
                return winner_takes(n, None)
            k = ids.index(spec.i_star)
            if bids[k] < spec.r:
                return winner_takes(n, None)
            return winner_takes(n, k, pay=spec.r, burn=spec.r)
        raise SpecError(f"Famille non gérée : {spec.family}")


def make_mechanism(spec: MechanismSpec) -> Mechanism:
    return CatalogMechanism(spec)


def _reserves_of(param_grid) -> list[Reserve]:
    if param_grid is None:
        return [Fraction(0)]
    if isinstance(param_grid, GridSpec):
        return list(param_grid.points)
    return [to_reserve(r) for r in param_grid]


def enumerate_family(family: Family | str, param_grid: GridSpec | Iterable | None = None) -> list[Mechanism]:
    """
    Un mécanisme par réserve de la grille de paramètres (et par courbe du menu
    pour le premier prix brûlé généralisé). Les familles sans paramètre
    donnent un seul mécanisme.
    """
    family = Family(family)
    if family not in RESERVE_FAMILIES:
        return [make_mechanism(MechanismSpec(family))]
    mechanisms = []
    for r in _reserves_of(param_grid):
        if family is Family.GENERALIZED_BURNED_FIRST_PRICE:
            for curve in CURVE_MENU:
                spec = MechanismSpec(family, r, curve)
                try:
                    mechanisms.append(make_mechanism(spec))
                except SpecError as e:
                    logger.debug("Courbe ignorée pour %s : %s", spec.label, e)
        elif family is Family.NON_ANONYMOUS_POSTED_BURN:
            mechanisms.append(make_mechanism(MechanismSpec(family, r, i_star="b0")))
        else:
            mechanisms.append(make_mechanism(MechanismSpec(family, r)))
    return mechanisms


def catalog(param_grid: GridSpec | Iterable | None = None) -> list[Mechanism]:
    """Tous les mécanismes du catalogue pour les réserves données."""
    return [m for family in Family for m in enumerate_family(family, param_grid)]
