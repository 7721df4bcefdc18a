"""Bornes à deux enchérisseurs et seuil d'efficacité (calcul flottant)."""

from dataclasses import dataclass, field
import logging
import math

from tfmlab.model import DomainError, UsageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundParams:
    """Paramètres des bornes ; seuls les champs fournis sont contrôlés."""
    A: float | None = None
    B: float | None = None
    b: float | None = None
    v1: float | None = None
    v2: float | None = None
    u: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        if self.A is not None and self.B is not None and not self.A > self.B > 1:
            raise UsageError(f"Il faut A > B > 1 (A={self.A}, B={self.B})")
        if self.b is not None and not self.b > 0:
            raise UsageError(f"L'enchère de base doit être > 0 (b={self.b})")
        if self.v1 is not None and self.v2 is not None and not self.v1 > self.v2 > 0:
            raise UsageError(f"Il faut v1 > v2 > 0 (v1={self.v1}, v2={self.v2})")
        if self.alpha is not None and not 0 <= self.alpha <= 1:
            raise UsageError(f"alpha doit être dans [0, 1] (alpha={self.alpha})")


def two_bidder_lower(v1: float, v2: float, u: float) -> float:
    """Borne inférieure (u − v2)/(v1 − v2) sur la probabilité de servir le plus offrant."""
    BoundParams(v1=v1, v2=v2, u=u)
    return (u - v2) / (v1 - v2)


def two_bidder_upper_general(v1: float, v2: float, u: float) -> float:
    """3/2 − u/v2, telle quelle (peut être négative)."""
    BoundParams(v1=v1, v2=v2, u=u)
    return 1.5 - u / v2


def extended_regime(v1: float, v2: float, u: float) -> bool:
    return (v1 + v2) / 2 < u < v1 and 2 * u - v1 > v2


def two_bidder_upper_extended(v1: float, v2: float, u: float) -> float:
    """1 − (2u − 3v1/2 + (v1 − u)·ln(2(v1 − u)/(v1 − v2))) / v2, pour (v1 + v2)/2 < u < v1."""
    BoundParams(v1=v1, v2=v2, u=u)
    if not extended_regime(v1, v2, u):
        raise DomainError(
            f"Borne étendue hors de son domaine : u={u} doit être dans ](v1+v2)/2, v1["
        )
    log_term = (v1 - u) * math.log(2 * (v1 - u) / (v1 - v2))
    return 1 - (2 * u - 1.5 * v1 + log_term) / v2


@dataclass
class ContradictionReport:
    lower: float
    upper: float
    bound: str
    contradicts: bool
    general_upper: float
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "bound": self.bound,
            "contradicts": self.contradicts,
            "general_upper": self.general_upper,
            "notes": list(self.notes),
        }


def efficiency_witness_check(v1: float, v2: float, u: float) -> ContradictionReport:
    """Compare la borne inférieure à la borne supérieure applicable (étendue si possible)."""
    lower = two_bidder_lower(v1, v2, u)
    general = two_bidder_upper_general(v1, v2, u)
    notes = []
    if extended_regime(v1, v2, u):
        upper, bound = two_bidder_upper_extended(v1, v2, u), "extended"
    else:
        upper, bound = general, "general"
    if general < 0:
        notes.append(
            f"borne générale négative ({general:.6g}) : la formule publiée est incohérente "
            "ici, seule la borne étendue est utilisée pour le seuil"
        )
    return ContradictionReport(lower, upper, bound, lower > upper, general, notes)


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float | None
    bracket: tuple[float, float] | None
    iterations: int
    message: str = ""

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "bracket": None if self.bracket is None else list(self.bracket),
            "iterations": self.iterations,
            "message": self.message,
        }


def find_efficiency_threshold(v1: float, v2: float, tol: float = 1e-4) -> ThresholdResult:
    """
    Dichotomie sur le ratio u/v1 dans le régime de la borne étendue : plus petit
    ratio à partir duquel la borne inférieure dépasse la borne supérieure.
    Renvoie l'extrémité haute de l'intervalle final.
    """
    BoundParams(v1=v1, v2=v2)
    if not tol > 0:
        raise UsageError(f"La tolérance doit être > 0 (tol={tol})")
    start = (v1 + v2) / (2 * v1)
    width = 1 - start
    if width <= tol:
        return ThresholdResult(None, None, 0, "régime de la borne étendue trop étroit")
    margin = min(tol, width) / 10
    lo, hi = start + margin, 1 - margin

    def contradicts(ratio: float) -> bool:
        return efficiency_witness_check(v1, v2, ratio * v1).contradicts

    if not contradicts(hi):
        return ThresholdResult(None, None, 0, "pas de changement de signe dans le régime")
    if contradicts(lo):
        return ThresholdResult(lo, (lo, lo), 0, "contradiction dès le début du régime")
    iterations = 0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if contradicts(mid):
            hi = mid
        else:
            lo = mid
        iterations += 1
    logger.info("Seuil d'efficacité pour v1=%g, v2=%g : %.6f", v1, v2, hi)
    return ThresholdResult(hi, (lo, hi), iterations)
