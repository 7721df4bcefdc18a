"""Courbes de paiement f utilisées par le premier prix brûlé généralisé."""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping

from tfmlab.model import Reserve, SpecError, format_money, is_infinite, to_money


class CurveKind(str, Enum):
    IDENTITY = "identity"
    AFFINE = "affine"
    CONSTANT = "constant"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class PaymentCurve:
    """
    f(v, r). Pour AFFINE et CONSTANT, un paramètre à None désigne la réserve r.
    La courbe affine est plafonnée par v : min(v, pente·v + ordonnée).
    """
    kind: CurveKind
    slope: Fraction = Fraction(1)
    intercept: Fraction | None = None
    table: tuple[tuple[Fraction, Fraction], ...] = ()

    @classmethod
    def identity(cls) -> "PaymentCurve":
        return cls(CurveKind.IDENTITY)

    @classmethod
    def affine(cls, slope, intercept=None) -> "PaymentCurve":
        return cls(CurveKind.AFFINE, to_money(slope),
                   None if intercept is None else to_money(intercept))

    @classmethod
    def constant(cls, value=None) -> "PaymentCurve":
        return cls(CurveKind.CONSTANT, intercept=None if value is None else to_money(value))

    @classmethod
    def tabulated(cls, mapping: Mapping) -> "PaymentCurve":
        table = tuple(sorted((to_money(k), to_money(v)) for k, v in mapping.items()))
        return cls(CurveKind.TABULATED, table=table)

    def _offset(self, r: Reserve) -> Fraction:
        return Fraction(r) if self.intercept is None else self.intercept

    def __call__(self, v: Fraction, r: Reserve) -> Fraction:
        if self.kind is CurveKind.IDENTITY:
            return v
        if self.kind is CurveKind.AFFINE:
            return min(v, self.slope * v + self._offset(r))
        if self.kind is CurveKind.CONSTANT:
            return self._offset(r)
        if self.kind is CurveKind.TABULATED:
            for point, value in self.table:
                if point == v:
                    return value
            raise SpecError(f"Courbe tabulée non définie en {v}")
        raise SpecError(f"Type de courbe inconnu : {self.kind}")

    @property
    def label(self) -> str:
        if self.kind is CurveKind.IDENTITY:
            return "v"
        offset = "r" if self.intercept is None else str(self.intercept)
        if self.kind is CurveKind.AFFINE:
            return f"min(v,{self.slope}v+{offset})"
        if self.kind is CurveKind.CONSTANT:
            return offset
        return "table"

    def validate(self, r: Reserve):
        """Vérifie f croissante et f(v) ≥ r pour v ≥ r."""
        if is_infinite(r):
            return
        if self.kind is CurveKind.AFFINE:
            if self.slope < 0:
                raise SpecError(f"Pente négative : {self.slope}")
            if self(Fraction(r), r) < r:
                raise SpecError(f"f({r}) < r pour la courbe {self.label}")
        elif self.kind is CurveKind.CONSTANT:
            if self._offset(r) < r:
                raise SpecError(f"Courbe constante {self.label} sous la réserve {r}")
        elif self.kind is CurveKind.TABULATED:
            values = [value for _, value in self.table]
            if any(b < a for a, b in zip(values, values[1:])):
                raise SpecError("La courbe tabulée n'est pas croissante.")
            if any(value > point for point, value in self.table):
                raise SpecError("La courbe tabulée dépasse l'enchère (rationalité individuelle).")
            if any(value < r for point, value in self.table if point >= r):
                raise SpecError(f"La courbe tabulée passe sous la réserve {r}")

    def to_json(self) -> dict:
        data = {"kind": self.kind.value}
        if self.kind is CurveKind.AFFINE:
            data["slope"] = str(self.slope)
        if self.kind in (CurveKind.AFFINE, CurveKind.CONSTANT):
            data["intercept"] = "r" if self.intercept is None else format_money(self.intercept)
        if self.kind is CurveKind.TABULATED:
            data["table"] = [[str(k), str(v)] for k, v in self.table]
        return data

    @classmethod
    def from_json(cls, data: dict) -> "PaymentCurve":
        try:
            kind = CurveKind(data["kind"])
        except (KeyError, ValueError):
            raise SpecError(f"Courbe invalide : {data!r}")
        intercept = data.get("intercept", "r")
        intercept = None if intercept == "r" else to_money(intercept)
        if kind is CurveKind.IDENTITY:
            return cls.identity()
        if kind is CurveKind.AFFINE:
            return cls(kind, to_money(data.get("slope", 1)), intercept)
        if kind is CurveKind.CONSTANT:
            return cls(kind, intercept=intercept)
        return cls.tabulated(dict(data.get("table", [])))


# Menu fixe parcouru par enumerate_family pour le premier prix brûlé généralisé.
CURVE_MENU = (
    PaymentCurve.identity(),
    PaymentCurve.affine(Fraction(1, 2)),
    PaymentCurve.constant(),
)
