"""Courbe de borne sur la probabilité d'allocation et sa minimisation numérique."""

from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.optimize import minimize

from tfmlab.bounds.efficiency import BoundParams
from tfmlab.model import UsageError

logger = logging.getLogger(__name__)

# Infimum de la courbe quand A tend vers l'infini.
ASYMPTOTIC_BOUND = math.sqrt(2) - 0.5


def allocation_bound_curve(A: float, B: float) -> float:
    """(2A² + AB + B²) / (2(A − 1)(A + B)), définie pour A > B > 1."""
    BoundParams(A=A, B=B)
    return _curve(A, B)


def _curve(A, B):
    # sans contrôle : accepte aussi des tableaux numpy
    return (2 * A * A + A * B + B * B) / (2 * (A - 1) * (A + B))


@dataclass(frozen=True)
class AllocationBoundResult:
    A: float
    B: float
    value: float
    converged: bool
    message: str = ""

    def to_json(self) -> dict:
        return {"A": self.A, "B": self.B, "value": self.value,
                "converged": self.converged, "message": self.message}


def minimize_allocation_bound(A_max: float, search_tol: float = 1e-4) -> AllocationBoundResult:
    """
    Minimise la courbe sur 1 < B < A ≤ A_max. On paramètre
    A = exp(x), B = 1 + u·(A − 1) avec u ∈ (0, 1) : grille grossière puis L-BFGS-B.
    """
    if not A_max > 2:
        raise UsageError(f"A_max doit être > 2 (reçu {A_max})")
    lo = math.log1p(1e-6)
    hi = math.log(A_max)
    xs = np.linspace(lo, hi, 200)
    us = np.linspace(0.005, 0.995, 199)
    X, U = np.meshgrid(xs, us, indexing="ij")
    A = np.exp(X)
    B = 1 + U * (A - 1)
    values = _curve(A, B)
    k, j = np.unravel_index(np.argmin(values), values.shape)
    start = np.array([xs[k], us[j]])

    def objective(z):
        a = math.exp(z[0])
        return _curve(a, 1 + z[1] * (a - 1))

    result = minimize(objective, start, method="L-BFGS-B",
                      bounds=[(lo, hi), (1e-9, 1 - 1e-9)],
                      options={"ftol": 1e-14, "gtol": 1e-12})
    best = start if objective(start) <= result.fun else result.x
    a_star = math.exp(best[0])
    b_star = 1 + best[1] * (a_star - 1)
    value = objective(best)
    converged = bool(result.success)
    message = str(result.message)
    if value < ASYMPTOTIC_BOUND - search_tol:
        logger.warning("Minimum %.6f sous la borne asymptotique : recherche suspecte", value)
        converged = False
        message = "minimum inférieur à la borne asymptotique"
    logger.info("Borne d'allocation : A=%.6g B=%.6g valeur=%.8f", a_star, b_star, value)
    return AllocationBoundResult(a_star, b_star, value, converged, message)
