"""Manipulations, témoins de violation et verdicts ; rejeu exact d'un témoin."""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Sequence

from tfmlab.model import BidProfile, UsageError, to_money
from tfmlab.utility import (
    bidder_utility,
    joint_utility,
    miner_utility,
)

if TYPE_CHECKING:
    from tfmlab.mechanisms.base import Mechanism


class Property(str, Enum):
    DSIC = "dsic"
    MMIC = "mmic"
    OCA = "oca"
    OCA_JOINT = "oca_joint"
    SCP = "scp"
    SCALE_INVARIANCE = "scale_invariance"
    CTPA = "ctpa"
    ANONYMITY = "anonymity"
    SINGLE_BIDDER_FORM = "single_bidder_form"
    GENERAL_OCA_FORM = "general_oca_form"
    PAYMENT_BURN_BOUND = "payment_burn_bound"
    LOW_VALUE_FEASIBILITY = "low_value_feasibility"
    TWO_BIDDERS_CONDITION = "two_bidders_condition"


# Propriétés d'égalité : la marge est l'écart absolu.
EQUALITY_PROPERTIES = frozenset({
    Property.SCALE_INVARIANCE,
    Property.CTPA,
    Property.ANONYMITY,
    Property.SINGLE_BIDDER_FORM,
    Property.GENERAL_OCA_FORM,
})


class ManipulationKind(str, Enum):
    MINER_STRATEGY = "MinerStrategy"
    OFF_CHAIN_AGREEMENT = "OffChainAgreement"
    SIDE_CONTRACT = "SideContract"
    BIDDER_DEVIATION = "BidderDeviation"


KIND_OF_PROPERTY = {
    Property.MMIC: ManipulationKind.MINER_STRATEGY,
    Property.OCA: ManipulationKind.OFF_CHAIN_AGREEMENT,
    Property.OCA_JOINT: ManipulationKind.OFF_CHAIN_AGREEMENT,
    Property.SCP: ManipulationKind.SIDE_CONTRACT,
}


@dataclass(frozen=True)
class Manipulation:
    """
    Écart par rapport au comportement honnête : les enchérisseurs réels de
    kept enchérissent leur valeur, ceux de changed une autre enchère, les
    autres sont omis ; fakes est le multiensemble des fausses enchères.
    """
    kind: ManipulationKind
    kept: frozenset[int]
    changed: tuple[tuple[int, Fraction], ...] = ()
    fakes: tuple[Fraction, ...] = ()
    coalition: frozenset[int] = frozenset()

    def __post_init__(self):
        changed_ids = {i for i, _ in self.changed}
        if changed_ids & self.kept:
            raise UsageError("Un enchérisseur ne peut être à la fois conservé et modifié.")
        if not changed_ids <= self.coalition:
            raise UsageError("Seuls les membres de la coalition peuvent modifier leur enchère.")
        if self.kind is ManipulationKind.MINER_STRATEGY and self.changed:
            raise UsageError("Une stratégie du mineur ne peut qu'inclure, omettre ou ajouter.")

    def real_bids(self, values: Sequence[Fraction]) -> list[Fraction]:
        changed = dict(self.changed)
        bids = []
        for i, v in enumerate(values):
            if i in self.kept:
                bids.append(Fraction(v))
            else:
                bids.append(changed.get(i, Fraction(0)))
        return bids

    def omitted(self, n: int) -> frozenset[int]:
        changed = {i for i, _ in self.changed}
        return frozenset(i for i in range(n) if i not in self.kept and i not in changed)

    def profile(self, values: Sequence[Fraction]) -> BidProfile:
        return BidProfile.from_bids(self.real_bids(values), values=values, fakes=self.fakes)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "kept": sorted(self.kept),
            "changed": {str(i): str(b) for i, b in self.changed},
            "fakes": [str(b) for b in self.fakes],
            "coalition": sorted(self.coalition),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Manipulation":
        return cls(
            ManipulationKind(data["kind"]),
            frozenset(data["kept"]),
            tuple(sorted((int(i), to_money(b)) for i, b in data["changed"].items())),
            tuple(to_money(b) for b in data["fakes"]),
            frozenset(data["coalition"]),
        )


@dataclass(frozen=True)
class ViolationWitness:
    """
    La propriété exige lhs ≥ rhs (ou lhs = rhs pour les propriétés
    d'égalité) ; un témoin est un cas où ce n'est pas vrai.
    """
    property: Property
    values: tuple[Fraction, ...]
    lhs: Fraction
    rhs: Fraction
    manipulation: Manipulation | None = None
    detail: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.margin <= 0:
            raise UsageError(f"Témoin sans violation : lhs={self.lhs}, rhs={self.rhs}")

    @property
    def margin(self) -> Fraction:
        if self.property in EQUALITY_PROPERTIES:
            return abs(self.rhs - self.lhs)
        return self.rhs - self.lhs

    def to_json(self) -> dict:
        return {
            "property": self.property.value,
            "values": [str(v) for v in self.values],
            "manipulation": None if self.manipulation is None else self.manipulation.to_json(),
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "margin": str(self.margin),
            "detail": self.detail,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ViolationWitness":
        manipulation = data.get("manipulation")
        return cls(
            Property(data["property"]),
            tuple(to_money(v) for v in data["values"]),
            to_money(data["lhs"]),
            to_money(data["rhs"]),
            None if manipulation is None else Manipulation.from_json(manipulation),
            dict(data.get("detail", {})),
        )


@dataclass
class Verdict:
    property: Property
    passed: bool
    grid_label: str
    witness: ViolationWitness | None = None
    coalition_limit: int | None = None
    examined: int = 0
    skipped: int = 0
    info: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if self.property in (Property.OCA, Property.SCP):
            c = "all" if self.coalition_limit is None else self.coalition_limit
            return f"{self.property.value}(c={c})"
        return self.property.value

    def to_json(self) -> dict:
        return {
            "property": self.property.value,
            "label": self.label,
            "passed": self.passed,
            "grid": self.grid_label,
            "coalition_limit": self.coalition_limit,
            "examined": self.examined,
            "skipped": self.skipped,
            "info": self.info,
            "witness": None if self.witness is None else self.witness.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Verdict":
        witness = data.get("witness")
        return cls(
            Property(data["property"]),
            data["passed"],
            data["grid"],
            None if witness is None else ViolationWitness.from_json(witness),
            data.get("coalition_limit"),
            data.get("examined", 0),
            data.get("skipped", 0),
            dict(data.get("info", {})),
        )


def _coalition_gain(mech, profile, coalition, values) -> Fraction:
    outcome = mech.evaluate(profile)
    total = miner_utility(mech, profile, outcome)
    for i in sorted(coalition):
        total += bidder_utility(mech, profile, i, values[i], outcome)
    return total


def _rule_vector(mech, bids, rule: str) -> tuple[Fraction, ...]:
    outcome = mech.evaluate(BidProfile.from_bids(bids))
    return getattr(outcome, rule)


def replay_witness(mech: "Mechanism", witness: ViolationWitness) -> tuple[Fraction, Fraction]:
    """Recalcule (lhs, rhs) d'un témoin à partir du seul modèle de base."""
    prop = witness.property
    values = witness.values
    detail = witness.detail
    manipulation = witness.manipulation
    honest = BidProfile.from_bids(values, values=values)

    if prop is Property.DSIC:
        i = next(iter(manipulation.coalition))
        deviated = manipulation.profile(values)
        return (bidder_utility(mech, honest, i, values[i]),
                bidder_utility(mech, deviated, i, values[i]))
    if prop is Property.MMIC:
        return miner_utility(mech, honest), miner_utility(mech, manipulation.profile(values))
    if prop is Property.OCA:
        manipulated = manipulation.profile(values)
        return (joint_utility(mech, honest),
                _coalition_gain(mech, manipulated, manipulation.coalition, values))
    if prop is Property.OCA_JOINT:
        return joint_utility(mech, honest), joint_utility(mech, manipulation.profile(values))
    if prop is Property.SCP:
        manipulated = manipulation.profile(values)
        return (_coalition_gain(mech, honest, manipulation.coalition, values),
                _coalition_gain(mech, manipulated, manipulation.coalition, values))
    if prop is Property.SCALE_INVARIANCE:
        alpha = to_money(detail["alpha"])
        slot = detail["slot"]
        return (_rule_vector(mech, values, "alloc")[slot],
                _rule_vector(mech, [alpha * b for b in values], "alloc")[slot])
    if prop is Property.CTPA:
        reference = [to_money(b) for b in detail["reference"]]
        return (mech.evaluate(BidProfile.from_bids(reference)).total_alloc,
                mech.evaluate(BidProfile.from_bids(values)).total_alloc)
    if prop is Property.ANONYMITY:
        perm = detail["permutation"]
        slot = detail["slot"]
        rule = detail["rule"]
        permuted = [values[perm[j]] for j in range(len(values))]
        return (_rule_vector(mech, permuted, rule)[slot],
                _rule_vector(mech, values, rule)[perm[slot]])
    if prop in (Property.SINGLE_BIDDER_FORM, Property.GENERAL_OCA_FORM):
        slot = detail["slot"]
        rule = detail["rule"]
        return to_money(detail["expected"]), _rule_vector(mech, values, rule)[slot]
    if prop is Property.PAYMENT_BURN_BOUND:
        x, y = values
        ours = mech.evaluate(BidProfile.from_bids((x, y)))
        swapped = mech.evaluate(BidProfile.from_bids((y, x)))
        return ours.burn[0] + swapped.burn[0], ours.pay[0]
    if prop is Property.LOW_VALUE_FEASIBILITY:
        outcome = mech.evaluate(BidProfile.from_bids(values))
        slot = detail["slot"]
        return outcome.total_alloc / len(values), outcome.alloc[slot]
    if prop is Property.TWO_BIDDERS_CONDITION:
        from tfmlab.checkers.properties import two_bidders_sides
        grid_points = tuple(to_money(p) for p in detail["grid"])
        x, y = values
        return two_bidders_sides(mech, grid_points, x, y)
    raise UsageError(f"Propriété sans rejeu : {prop}")


def witness_replays(mech: "Mechanism", witness: ViolationWitness) -> bool:
    """Vrai si le rejeu retrouve exactement lhs et rhs du témoin."""
    return replay_witness(mech, witness) == (witness.lhs, witness.rhs)
