"""Types de base du laboratoire : montants, profils d'enchères, issues et grilles."""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import math
from typing import Iterable, Sequence

Money = Fraction

# Une réserve peut valoir l'infini (mécanisme qui n'alloue jamais).
Reserve = Fraction | float
INFINITY = math.inf


class TfmError(Exception):
    """Erreur de base du laboratoire."""


class UsageError(TfmError, ValueError):
    """Argument invalide fourni par l'appelant."""


class DomainError(TfmError, ValueError):
    """Précondition mathématique non respectée."""


class SpecError(TfmError, ValueError):
    """Spécification de mécanisme invalide."""


class OffGridError(TfmError, KeyError):
    """Profil absent d'une table discrétisée."""


def to_money(value) -> Fraction:
    """Convertit un entier, une chaîne ('1/4', '0.5') ou un Fraction en montant exact."""
    if isinstance(value, Fraction):
        money = value
    elif isinstance(value, bool):
        raise UsageError(f"Montant invalide : {value!r}")
    elif isinstance(value, int):
        money = Fraction(value)
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise UsageError(f"Montant non fini : {value!r}")
        money = Fraction(str(value))
    elif isinstance(value, str):
        try:
            money = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"Montant illisible : {value!r}")
    else:
        raise UsageError(f"Type de montant non supporté : {type(value).__name__}")
    return money


def to_reserve(value) -> Reserve:
    """Comme to_money, mais accepte aussi l'infini ('inf', math.inf)."""
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "∞"):
        return INFINITY
    if isinstance(value, float) and math.isinf(value) and value > 0:
        return INFINITY
    money = to_money(value)
    if money < 0:
        raise UsageError(f"Réserve négative : {money}")
    return money


def is_infinite(r: Reserve) -> bool:
    return isinstance(r, float) and math.isinf(r)


def format_money(value: Reserve) -> str:
    """Représentation textuelle stable, utilisée dans les rapports JSON."""
    if is_infinite(value):
        return "inf"
    return str(Fraction(value))


class Origin(Enum):
    REAL = "real"
    FAKE = "fake"


@dataclass(frozen=True)
class BidEntry:
    bidder_id: str
    bid: Fraction
    origin: Origin = Origin.REAL


@dataclass(frozen=True)
class BidProfile:
    """
    Profil d'enchères : les n premières entrées sont réelles (alignées sur
    true_values), les suivantes sont les fausses enchères du mineur.
    Une enchère nulle signifie que la transaction est absente (omise).
    """
    entries: tuple[BidEntry, ...]
    true_values: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        seen_fake = False
        for entry in self.entries:
            if entry.bid < 0:
                raise UsageError(f"Enchère négative pour {entry.bidder_id} : {entry.bid}")
            if entry.origin is Origin.FAKE:
                seen_fake = True
            elif seen_fake:
                raise UsageError("Les enchères réelles doivent précéder les fausses enchères.")
        if self.true_values is not None:
            if len(self.true_values) != self.n_real:
                raise UsageError(
                    f"{len(self.true_values)} valeurs pour {self.n_real} enchérisseurs réels."
                )
            if any(v < 0 for v in self.true_values):
                raise UsageError("Les valeurs doivent être positives ou nulles.")

    @classmethod
    def from_bids(cls, bids: Iterable, values: Iterable | None = None,
                  fakes: Iterable = ()) -> "BidProfile":
        """Construit un profil avec les identités b0, b1, … (réels) et f0, f1, … (faux)."""
        entries = [BidEntry(f"b{i}", to_money(b)) for i, b in enumerate(bids)]
        entries += [BidEntry(f"f{j}", to_money(b), Origin.FAKE) for j, b in enumerate(fakes)]
        true_values = None if values is None else tuple(to_money(v) for v in values)
        return cls(tuple(entries), true_values)

    @property
    def bids(self) -> tuple[Fraction, ...]:
        return tuple(entry.bid for entry in self.entries)

    @property
    def n_real(self) -> int:
        return sum(1 for entry in self.entries if entry.origin is Origin.REAL)

    @property
    def fake_indices(self) -> tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.entries) if e.origin is Origin.FAKE)

    def with_bids(self, bids: Sequence[Fraction]) -> "BidProfile":
        """Même identités et origines, nouvelles enchères (slot par slot)."""
        if len(bids) != len(self.entries):
            raise UsageError("Le nombre d'enchères ne correspond pas au profil.")
        entries = tuple(BidEntry(e.bidder_id, to_money(b), e.origin)
                        for e, b in zip(self.entries, bids))
        return BidProfile(entries, self.true_values)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Outcome:
    alloc: tuple[Fraction, ...]
    pay: tuple[Fraction, ...]
    burn: tuple[Fraction, ...]

    @classmethod
    def zeros(cls, n: int) -> "Outcome":
        zero = (Fraction(0),) * n
        return cls(zero, zero, zero)

    @property
    def total_alloc(self) -> Fraction:
        return sum(self.alloc, Fraction(0))

    def __len__(self) -> int:
        return len(self.alloc)


def _format_points(points: Sequence[Fraction]) -> str:
    return "{" + ",".join(str(p) for p in points) + "}"


@dataclass(frozen=True)
class GridSpec:
    """Discrétisation de R+ utilisée par les vérifications exhaustives."""
    points: tuple[Fraction, ...]
    max_profile_size: int = 3
    max_fake_bids: int = 2
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        points = tuple(to_money(p) for p in self.points)
        if not points:
            raise UsageError("La grille est vide.")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise UsageError("Les points de la grille doivent être strictement croissants.")
        if points[0] != 0:
            raise UsageError("La grille doit contenir 0 comme plus petit point.")
        if self.max_profile_size < 1:
            raise UsageError("max_profile_size doit être au moins 1.")
        if self.max_fake_bids < 0:
            raise UsageError("max_fake_bids ne peut pas être négatif.")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "_index", {p: k for k, p in enumerate(points)})

    @classmethod
    def arithmetic(cls, lo, hi, step, **caps) -> "GridSpec":
        lo, hi, step = to_money(lo), to_money(hi), to_money(step)
        if step <= 0 or hi < lo or lo < 0:
            raise UsageError(f"Grille arithmétique invalide : {lo}..{hi}:{step}")
        points = []
        x = lo
        while x <= hi:
            points.append(x)
            x += step
        if points[0] != 0:
            points.insert(0, Fraction(0))
        return cls(tuple(points), **caps)

    @classmethod
    def geometric(cls, base, ratio, count: int, **caps) -> "GridSpec":
        base, ratio = to_money(base), to_money(ratio)
        if base <= 0 or ratio <= 1 or count < 1:
            raise UsageError(f"Grille géométrique invalide : {base}:{ratio}:{count}")
        return cls((Fraction(0),) + tuple(base * ratio ** k for k in range(count)), **caps)

    @classmethod
    def from_values(cls, values: Iterable, **caps) -> "GridSpec":
        points = sorted({to_money(v) for v in values} | {Fraction(0)})
        return cls(tuple(points), **caps)

    @classmethod
    def parse(cls, text: str, **caps) -> "GridSpec":
        """Lit 'lo..hi:step', 'base:ratio:count' (géométrique) ou '0,1/4,1/2'."""
        text = text.strip()
        if ".." in text:
            bounds, _, step = text.partition(":")
            lo, _, hi = bounds.partition("..")
            if not step:
                raise UsageError(f"Pas manquant dans la grille : {text!r}")
            return cls.arithmetic(lo, hi, step, **caps)
        if text.count(":") == 2:
            base, ratio, count = text.split(":")
            try:
                n = int(count)
            except ValueError:
                raise UsageError(f"Nombre de points illisible : {count!r}")
            return cls.geometric(base, ratio, n, **caps)
        if "," in text:
            return cls.from_values(text.split(","), **caps)
        raise UsageError(f"Syntaxe de grille inconnue : {text!r}")

    @property
    def positive_points(self) -> tuple[Fraction, ...]:
        return self.points[1:]

    @property
    def label(self) -> str:
        return f"{_format_points(self.points)} n≤{self.max_profile_size} faux≤{self.max_fake_bids}"

    def __contains__(self, value) -> bool:
        return value in self._index

    def index(self, value: Fraction) -> int:
        try:
            return self._index[value]
        except KeyError:
            raise OffGridError(f"Valeur hors grille : {value}")

    def with_caps(self, **caps) -> "GridSpec":
        current = {"max_profile_size": self.max_profile_size,
                   "max_fake_bids": self.max_fake_bids}
        current.update({k: v for k, v in caps.items() if v is not None})
        return GridSpec(self.points, **current)

    def to_json(self) -> dict:
        return {
            "points": [str(p) for p in self.points],
            "max_profile_size": self.max_profile_size,
            "max_fake_bids": self.max_fake_bids,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GridSpec":
        caps = {k: data[k] for k in ("max_profile_size", "max_fake_bids") if k in data}
        if "points" in data:
            return cls(tuple(to_money(p) for p in data["points"]), **caps)
        if "spec" in data:
            return cls.parse(data["spec"], **caps)
        raise UsageError("Grille JSON sans 'points' ni 'spec'.")
