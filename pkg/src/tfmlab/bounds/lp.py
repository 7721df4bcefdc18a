"""
Programme linéaire sur les mécanismes randomisés discrétisés (un ou deux enchérisseurs).

Variables : a1[k], b1[k] pour une enchère seule g_k ; a2[j,k], b2[j,k] pour
l'enchère g_j face à l'enchère g_k. L'indexation symétrique tient lieu de
contrainte d'anonymat. Les intégrales de Myerson sont des sommes de Riemann
à gauche avec a(0) = 0.
"""

from dataclasses import dataclass, field, replace
import logging
from pathlib import Path
from typing import TextIO

import numpy as np
import scipy.sparse
from scipy.optimize import linprog

from tfmlab.mechanisms.base import Mechanism
from tfmlab.model import BidProfile, DomainError, GridSpec, UsageError

logger = logging.getLogger(__name__)

MAX_LP_POINTS = 40

CONSTRAINT_CLASSES = {
    "feasibility": "a(x,y) + a(y,x) ≤ 1",
    "monotonicity": "a croissante en l'enchère propre",
    "single_zero_revenue": "p(b) = β(b)",
    "payment_burn_bound": "p(x,y) ≤ β(x,y) + β(y,x)",
    "two_bidders": "a(y,x)·y + ∫a(t,y) ≥ ∫a(t), x ≥ y",
    "low_value": "a(y,x) ≤ (a(x,y) + a(y,x))/2, x > y",
    "burn_below_payment": "β(x,y) ≤ p(x,y)",
}


@dataclass
class LpInstance:
    """Forme standard : min/max c·x sous A_ub x ≤ b_ub, A_eq x = b_eq, bornes."""
    grid: GridSpec
    variables: list[str]
    costs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    a_ub: scipy.sparse.csr_matrix
    b_ub: np.ndarray
    a_eq: scipy.sparse.csr_matrix
    b_eq: np.ndarray
    ub_classes: list[str] = field(default_factory=list)
    eq_classes: list[str] = field(default_factory=list)
    maximize: bool = True

    @property
    def variables_dict(self) -> dict[str, int]:
        return {name: k for k, name in enumerate(self.variables)}

    @property
    def size(self) -> tuple[int, int]:
        return len(self.variables), self.a_ub.shape[0] + self.a_eq.shape[0]

    def minimized(self) -> "LpInstance":
        return replace(self, maximize=False)


@dataclass
class LpSolution:
    optimum: float | None
    assignment: dict[str, float]
    status: str
    message: str = ""

    def to_json(self) -> dict:
        return {"optimum": self.optimum, "status": self.status, "message": self.message}


class _RowBuilder:
    """Accumule les lignes en triplets, à la manière d'un SparseLP."""

    def __init__(self):
        self.rows, self.cols, self.vals, self.rhs, self.classes = [], [], [], [], []

    def add(self, cls: str, coeffs: dict[int, float], rhs: float = 0.0):
        row = len(self.rhs)
        for col, val in coeffs.items():
            if val != 0:
                self.rows.append(row)
                self.cols.append(col)
                self.vals.append(val)
        self.rhs.append(rhs)
        self.classes.append(cls)

    def matrix(self, n_vars: int) -> scipy.sparse.csr_matrix:
        return scipy.sparse.coo_matrix(
            (self.vals, (self.rows, self.cols)), shape=(len(self.rhs), n_vars)
        ).tocsr()


def _merge(*parts: dict[int, float]) -> dict[int, float]:
    total: dict[int, float] = {}
    for part in parts:
        for k, v in part.items():
            total[k] = total.get(k, 0.0) + v
    return total


def _scaled(coeffs: dict[int, float], factor: float) -> dict[int, float]:
    return {k: factor * v for k, v in coeffs.items()}


def build_lp(grid: GridSpec, max_points: int = MAX_LP_POINTS) -> LpInstance:
    """Construit le programme linéaire ; le 0 de la grille sert d'origine aux intégrales."""
    g = [float(p) for p in grid.positive_points]
    m = len(g)
    if m == 0:
        raise UsageError("La grille du programme linéaire n'a aucun point positif.")
    if m > max_points:
        estimate = 2 * m + 2 * m * m
        raise UsageError(
            f"Grille trop grande pour le programme linéaire : {m} points "
            f"(~{estimate} variables, ~{4 * m * m} contraintes), limite {max_points}"
        )
    delta = [g[k + 1] - g[k] for k in range(m - 1)]

    names = [f"a1[{k}]" for k in range(m)] + [f"b1[{k}]" for k in range(m)]
    names += [f"a2[{j},{k}]" for j in range(m) for k in range(m)]
    names += [f"b2[{j},{k}]" for j in range(m) for k in range(m)]
    index = {name: i for i, name in enumerate(names)}

    def a1(k): return index[f"a1[{k}]"]
    def b1(k): return index[f"b1[{k}]"]
    def a2(j, k): return index[f"a2[{j},{k}]"]
    def b2(j, k): return index[f"b2[{j},{k}]"]

    def integral_single(upto: int) -> dict[int, float]:
        """Σ_{0 < g_l < g_upto} a1[l]·Δ_l (a(0) = 0 sur [0, g_0))."""
        return {a1(l): delta[l] for l in range(upto)}

    def integral_pair(upto: int, rival: int) -> dict[int, float]:
        return {a2(l, rival): delta[l] for l in range(upto)}

    def pay_single(k: int) -> dict[int, float]:
        return _merge({a1(k): g[k]}, _scaled(integral_single(k), -1.0))

    def pay_pair(j: int, k: int) -> dict[int, float]:
        return _merge({a2(j, k): g[j]}, _scaled(integral_pair(j, k), -1.0))

    ub = _RowBuilder()
    eq = _RowBuilder()
    for j in range(m):
        for k in range(j, m):
            ub.add("feasibility", _merge({a2(j, k): 1.0}, {a2(k, j): 1.0}), 1.0)
    for l in range(m - 1):
        ub.add("monotonicity", {a1(l): 1.0, a1(l + 1): -1.0})
        for k in range(m):
            ub.add("monotonicity", {a2(l, k): 1.0, a2(l + 1, k): -1.0})
    for k in range(m):
        eq.add("single_zero_revenue", _merge(pay_single(k), {b1(k): -1.0}))
    for j in range(m):
        for k in range(m):
            ub.add("payment_burn_bound",
                   _merge(pay_pair(j, k), _scaled(_merge({b2(j, k): 1.0}, {b2(k, j): 1.0}), -1.0)))
            ub.add("burn_below_payment", _merge({b2(j, k): 1.0}, _scaled(pay_pair(j, k), -1.0)))
    for x in range(m):
        for y in range(x + 1):
            # a(y,x)·y + Σ a(t,y)Δ − Σ a(t)Δ ≥ 0, écrit en ≤.
            lhs = _merge({a2(y, x): g[y]}, integral_pair(x, y), _scaled(integral_single(x), -1.0))
            ub.add("two_bidders", _scaled(lhs, -1.0))
            if x > y:
                ub.add("low_value", {a2(y, x): 0.5, a2(x, y): -0.5})

    n = len(names)
    costs = np.zeros(n)
    costs[a1(m - 1)] = 1.0
    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    for name, k in index.items():
        if name.startswith("a"):
            upper[k] = 1.0
    instance = LpInstance(
        grid, names, costs, lower, upper,
        ub.matrix(n), np.array(ub.rhs, dtype=float),
        eq.matrix(n), np.array(eq.rhs, dtype=float),
        ub.classes, eq.classes,
    )
    logger.info("Programme linéaire : %d variables, %d contraintes", *instance.size)
    return instance


def solve_lp(instance: LpInstance) -> LpSolution:
    """Résout avec HiGHS ; infaisable ou non borné signale un bogue de construction."""
    sign = -1.0 if instance.maximize else 1.0
    bounds = list(zip(instance.lower, [None if np.isinf(u) else u for u in instance.upper]))
    result = linprog(
        sign * instance.costs,
        A_ub=instance.a_ub if instance.a_ub.shape[0] else None,
        b_ub=instance.b_ub if instance.a_ub.shape[0] else None,
        A_eq=instance.a_eq if instance.a_eq.shape[0] else None,
        b_eq=instance.b_eq if instance.a_eq.shape[0] else None,
        bounds=bounds,
        method="highs",
    )
    if result.status == 2:
        raise DomainError(f"Programme linéaire infaisable : {result.message}")
    if result.status == 3:
        raise DomainError(f"Programme linéaire non borné : {result.message}")
    if result.status != 0:
        logger.error("Échec du solveur : %s", result.message)
        return LpSolution(None, {}, "error", str(result.message))
    assignment = dict(zip(instance.variables, map(float, result.x)))
    return LpSolution(sign * float(result.fun), assignment, "optimal", str(result.message))


def lp_assignment_from_mechanism(mech: Mechanism, grid: GridSpec) -> dict[str, float]:
    """
    Valeurs des variables pour un mécanisme donné ; a2 et b2 sont symétrisés
    sur les deux emplacements, ce qui partage les égalités.
    """
    g = grid.positive_points
    assignment = {}
    for k, b in enumerate(g):
        outcome = mech.evaluate(BidProfile.from_bids((b,)))
        assignment[f"a1[{k}]"] = float(outcome.alloc[0])
        assignment[f"b1[{k}]"] = float(outcome.burn[0])
    for j, x in enumerate(g):
        for k, y in enumerate(g):
            first = mech.evaluate(BidProfile.from_bids((x, y)))
            second = mech.evaluate(BidProfile.from_bids((y, x)))
            assignment[f"a2[{j},{k}]"] = float((first.alloc[0] + second.alloc[1]) / 2)
            assignment[f"b2[{j},{k}]"] = float((first.burn[0] + second.burn[1]) / 2)
    return assignment


def check_lp_assignment(instance: LpInstance, assignment: dict[str, float],
                        tol: float = 1e-9) -> dict[str, int]:
    """Nombre de contraintes violées par classe (dictionnaire vide si tout tient)."""
    missing = [name for name in instance.variables if name not in assignment]
    if missing:
        raise UsageError(f"Variables sans valeur : {', '.join(missing[:5])}")
    x = np.array([assignment[name] for name in instance.variables])
    violated: dict[str, int] = {}
    if instance.a_ub.shape[0]:
        excess = instance.a_ub @ x - instance.b_ub
        for cls, value in zip(instance.ub_classes, excess):
            if value > tol:
                violated[cls] = violated.get(cls, 0) + 1
    if instance.a_eq.shape[0]:
        gap = np.abs(instance.a_eq @ x - instance.b_eq)
        for cls, value in zip(instance.eq_classes, gap):
            if value > tol:
                violated[cls] = violated.get(cls, 0) + 1
    if np.any(x < instance.lower - tol) or np.any(x > instance.upper + tol):
        violated["bounds"] = violated.get("bounds", 0) + 1
    return violated


def _write_mps(instance: LpInstance, out: TextIO):
    out.write("NAME          TFMLAB\n")
    out.write("OBJSENSE\n")
    out.write("    MAX\n" if instance.maximize else "    MIN\n")
    out.write("ROWS\n")
    out.write(" N  OBJ\n")
    for i in range(instance.a_eq.shape[0]):
        out.write(f" E  E{i}\n")
    for i in range(instance.a_ub.shape[0]):
        out.write(f" L  I{i}\n")
    out.write("COLUMNS\n")
    a_eq = instance.a_eq.tocsc()
    a_ub = instance.a_ub.tocsc()
    for k in range(len(instance.variables)):
        column = f"X{k}"
        if instance.costs[k] != 0:
            out.write(f"    {column:<10}OBJ       {instance.costs[k]:.15g}\n")
        for prefix, matrix in (("E", a_eq), ("I", a_ub)):
            start, stop = matrix.indptr[k], matrix.indptr[k + 1]
            for row, value in zip(matrix.indices[start:stop], matrix.data[start:stop]):
                out.write(f"    {column:<10}{prefix}{int(row):<9}{float(value):.15g}\n")
    out.write("RHS\n")
    for prefix, rhs in (("E", instance.b_eq), ("I", instance.b_ub)):
        for row, value in enumerate(rhs):
            if value != 0:
                out.write(f"    RHS0      {prefix}{row:<9}{value:.15g}\n")
    out.write("BOUNDS\n")
    for k in range(len(instance.variables)):
        if instance.lower[k] != 0:
            out.write(f" LO BOUND     X{k:<9}{instance.lower[k]:.15g}\n")
        if np.isfinite(instance.upper[k]):
            out.write(f" UP BOUND     X{k:<9}{instance.upper[k]:.15g}\n")
    out.write("ENDATA\n")


def export_mps(instance: LpInstance, path: str | Path):
    """Écrit le programme au format MPS libre ; les noms X{k} suivent l'ordre de instance.variables."""
    with open(path, "w", encoding="utf-8") as out:
        _write_mps(instance, out)
    logger.info("Programme linéaire exporté vers %s", path)
