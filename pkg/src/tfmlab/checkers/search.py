"""
Recherche exhaustive des manipulations sur une grille.

Toutes les issues d'un mécanisme sur les profils de la grille sont calculées
une seule fois, puis converties en entiers numpy à un dénominateur commun S :
les comparaisons restent exactes et se font par blocs entiers.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
import logging
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from tfmlab.checkers.manipulation import (
    KIND_OF_PROPERTY,
    Manipulation,
    ManipulationKind,
    Property,
    ViolationWitness,
)
from tfmlab.model import BidProfile, GridSpec, UsageError

logger = logging.getLogger(__name__)

INT64_SAFE = 2 ** 62


@dataclass
class Block:
    """Profils à n enchérisseurs réels et k fausses enchères."""
    n_real: int
    n_fake: int
    bid_idx: np.ndarray
    alloc: np.ndarray
    pay: np.ndarray
    burn: np.ndarray
    miner: np.ndarray


@dataclass
class ScanResult:
    witness: ViolationWitness | None
    examined: int = 0
    strict: bool = False


def _scaled(values: list[list[Fraction]], scale: int) -> list[list[int]]:
    return [[x.numerator * (scale // x.denominator) for x in row] for row in values]


class OutcomeTable:
    """Issues mises à l'échelle d'un mécanisme sur tous les profils de la grille."""

    def __init__(self, mech, grid: GridSpec, max_real: int | None = None,
                 max_fake: int | None = None):
        self.grid = grid
        self.points = grid.points
        self.max_real = grid.max_profile_size if max_real is None else max_real
        self.max_fake = grid.max_fake_bids if max_fake is None else max_fake
        size = len(self.points)

        raw = {}
        for n in range(1, self.max_real + 1):
            real_rows = list(product(range(size), repeat=n))
            for k in range(self.max_fake + 1):
                fake_rows = list(combinations_with_replacement(range(1, size), k))
                rows = [r + f for r in real_rows for f in fake_rows]
                outcomes = [
                    mech.evaluate(BidProfile.from_bids(
                        [self.points[j] for j in row[:n]],
                        fakes=[self.points[j] for j in row[n:]],
                    ))
                    for row in rows
                ]
                raw[(n, k)] = (rows, outcomes)
                logger.debug("%s : bloc n=%d k=%d, %d profils", mech.name, n, k, len(rows))

        grid_den = lcm(*{p.denominator for p in self.points})
        alloc_den = 1
        money_den = 1
        for _, outcomes in raw.values():
            alloc_den = lcm(alloc_den, *{a.denominator for o in outcomes for a in o.alloc})
            money_den = lcm(money_den, *{x.denominator for o in outcomes for x in o.pay + o.burn})
        self.scale = lcm(grid_den * alloc_den, money_den)
        self.value_factor = self.scale // (grid_den * alloc_den)
        self.alloc_scale = alloc_den

        grid_ints = [p.numerator * (grid_den // p.denominator) for p in self.points]
        biggest = max(grid_ints) * alloc_den * self.value_factor
        for _, outcomes in raw.values():
            for o in outcomes:
                biggest = max(biggest, *(x * self.scale for x in o.pay + o.burn))
        width = self.max_real + self.max_fake + 2
        self.dtype = np.int64 if biggest * width < INT64_SAFE else object
        if self.dtype is object:
            logger.info("Montants trop grands pour int64 : calcul en entiers Python")
        self.values_int = np.array(grid_ints, dtype=self.dtype)

        self.blocks: dict[tuple[int, int], Block] = {}
        for (n, k), (rows, outcomes) in raw.items():
            alloc = np.array(_scaled([list(o.alloc) for o in outcomes], alloc_den), dtype=self.dtype)
            pay = np.array(_scaled([list(o.pay) for o in outcomes], self.scale), dtype=self.dtype)
            burn = np.array(_scaled([list(o.burn) for o in outcomes], self.scale), dtype=self.dtype)
            miner = (pay[:, :n] - burn[:, :n]).sum(axis=1) - burn[:, n:].sum(axis=1)
            self.blocks[(n, k)] = Block(n, k, np.array(rows, dtype=np.int64), alloc, pay, burn, miner)

    def block(self, n: int, k: int) -> Block:
        try:
            return self.blocks[(n, k)]
        except KeyError:
            raise UsageError(f"Pas de profils à {n} enchérisseurs et {k} fausses enchères.")

    def honest_row(self, v_idx: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(v_idx), (len(self.points),) * len(v_idx)))

    def utilities(self, block: Block, v_idx: Sequence[int], rows=None) -> np.ndarray:
        n = len(v_idx)
        v = self.values_int[list(v_idx)]
        if rows is None:
            return v[None, :] * block.alloc[:, :n] * self.value_factor - block.pay[:, :n]
        return v[None, :] * block.alloc[rows, :n] * self.value_factor - block.pay[rows, :n]

    def rows_where(self, block: Block, choices: Sequence[Sequence[int]]) -> np.ndarray:
        """Lignes du bloc dont l'enchère réelle i est dans choices[i], dans l'ordre du bloc."""
        size = len(self.points)
        n = block.n_real
        per_real = len(block.bid_idx) // size ** n
        axes = np.meshgrid(*[np.array(sorted(set(c)), dtype=np.int64) for c in choices],
                           indexing="ij")
        real = np.ravel_multi_index([a.ravel() for a in axes], (size,) * n)
        return (real[:, None] * per_real + np.arange(per_real)[None, :]).ravel()

    def money(self, x) -> Fraction:
        return Fraction(int(x), self.scale)

    def value_vectors(self) -> list[tuple[int, ...]]:
        """Vecteurs de valeurs strictement positives, par taille croissante."""
        positive = range(1, len(self.points))
        return [v for n in range(1, self.max_real + 1) for v in product(positive, repeat=n)]

    def to_indices(self, values: Iterable[Sequence]) -> list[tuple[int, ...]]:
        vectors = []
        for vector in values:
            idx = tuple(self.grid.index(Fraction(v)) for v in vector)
            if 0 in idx:
                raise UsageError("Les valeurs examinées doivent être strictement positives.")
            if len(idx) > self.max_real:
                raise UsageError(f"Profil de taille {len(idx)} au-delà de la limite {self.max_real}.")
            vectors.append(idx)
        return vectors


def _witness(table: OutcomeTable, prop: Property, v_idx, block: Block, row: int,
             coalition: Iterable[int], lhs, rhs, detail: dict) -> ViolationWitness:
    n = len(v_idx)
    points = table.points
    bids = block.bid_idx[row]
    kept = frozenset(i for i in range(n) if bids[i] == v_idx[i])
    changed = tuple((i, points[bids[i]]) for i in range(n)
                    if bids[i] != v_idx[i] and bids[i] != 0)
    manipulation = Manipulation(
        KIND_OF_PROPERTY[prop],
        kept,
        changed,
        tuple(points[j] for j in bids[n:]),
        frozenset(coalition),
    )
    detail = dict(detail, fake_count=block.n_fake)
    return ViolationWitness(prop, tuple(points[j] for j in v_idx), table.money(lhs),
                            table.money(rhs), manipulation, detail)


def scan_coalitions(table: OutcomeTable, vectors: Sequence[tuple[int, ...]],
                    prop: Property, limit: int | None = None) -> ScanResult:
    """
    Cherche, pour chaque vecteur de valeurs, une manipulation rentable :
      MMIC      mineur seul (omissions et fausses enchères seulement) ;
      OCA       mineur + au plus c enchérisseurs contre l'utilité jointe honnête ;
      OCA_JOINT utilité jointe manipulée contre utilité jointe honnête ;
      SCP       mineur + C contre leur propre utilité honnête, pour chaque |C| ≤ c.
    """
    examined = 0
    for v_idx in vectors:
        n = len(v_idx)
        v_arr = np.array(v_idx, dtype=np.int64)
        honest = table.block(n, 0)
        h_row = table.honest_row(v_idx)
        honest_u = table.utilities(honest, v_idx)[h_row]
        honest_miner = honest.miner[h_row]
        honest_joint = honest_miner + honest_u.sum()
        cap = n if limit is None else min(limit, n)
        coalitions = []
        if prop is Property.SCP:
            coalitions = [c for size in range(cap + 1) for c in combinations(range(n), size)]

        everything = range(len(table.points))

        for k in range(table.max_fake + 1):
            block = table.block(n, k)

            # chaque test : (membres, lignes admissibles, gain sur ces lignes, référence honnête)
            if prop is Property.MMIC:
                rows = table.rows_where(block, [(0, v) for v in v_idx])
                checks = [((), rows, block.miner[rows], honest_miner)]
            elif prop is Property.OCA_JOINT:
                u = table.utilities(block, v_idx)
                rows = np.arange(len(block.bid_idx))
                checks = [(tuple(range(n)), rows, block.miner + u.sum(axis=1), honest_joint)]
            elif prop is Property.OCA:
                real = block.bid_idx[:, :n]
                changed = ~((real == v_arr[None, :]) | (real == 0))
                u = table.utilities(block, v_idx)
                n_changed = changed.sum(axis=1)
                zero = np.zeros_like(u)
                must = np.where(changed, u, zero).sum(axis=1)
                optional = np.where(changed, zero, np.maximum(u, zero))
                if cap >= n:
                    picked = optional.sum(axis=1)
                else:
                    optional = -np.sort(-optional, axis=1)
                    cumulated = np.concatenate([zero[:, :1], np.cumsum(optional, axis=1)], axis=1)
                    room = np.clip(cap - n_changed, 0, n)
                    picked = cumulated[np.arange(len(real)), room]
                rows = np.flatnonzero(n_changed <= cap)
                checks = [(None, rows, (block.miner + must + picked)[rows], honest_joint)]
            elif prop is Property.SCP:
                checks = []
                for members in coalitions:
                    choices = [everything if i in members else (0, v) for i, v in enumerate(v_idx)]
                    rows = table.rows_where(block, choices)
                    u = table.utilities(block, v_idx, rows)
                    gain = block.miner[rows] + u[:, list(members)].sum(axis=1)
                    checks.append((members, rows, gain, honest_miner + honest_u[list(members)].sum()))
            else:
                raise UsageError(f"Propriété non gérée par la recherche : {prop}")

            for members, rows, rhs, lhs in checks:
                examined += len(rows)
                violated = rhs > lhs
                if not violated.any():
                    continue
                hit = int(np.argmax(violated))
                row = int(rows[hit])
                if members is None:
                    members = _oca_members(u[row], changed[row], cap)
                witness = _witness(table, prop, v_idx, block, row, members, lhs, rhs[hit],
                                   {"coalition_limit": limit})
                return ScanResult(witness, examined)
    return ScanResult(None, examined)


def _oca_members(u_row, changed_row, cap: int) -> tuple[int, ...]:
    """Membres modifiés, complétés par les meilleurs gains positifs restants."""
    must = [i for i, flag in enumerate(changed_row) if flag]
    optional = sorted((i for i, flag in enumerate(changed_row) if not flag and u_row[i] > 0),
                      key=lambda i: (-u_row[i], i))
    return tuple(sorted(must + optional[:max(cap - len(must), 0)]))


def scan_dsic(table: OutcomeTable) -> ScanResult:
    """Déviations unilatérales : chaque emplacement, chaque valeur, chaque enchère de la grille."""
    size = len(table.points)
    examined = 0
    strict = False
    for n in range(1, table.max_real + 1):
        block = table.block(n, 0)
        shape = (size,) * n
        for slot in range(n):
            alloc = np.moveaxis(block.alloc[:, slot].reshape(shape), slot, 0).reshape(size, -1)
            pay = np.moveaxis(block.pay[:, slot].reshape(shape), slot, 0).reshape(size, -1)
            for vi in range(1, size):
                util = table.values_int[vi] * alloc * table.value_factor - pay
                truthful = util[vi]
                best = util.max(axis=0)
                examined += util.size
                strict = strict or bool((truthful[None, :] > util).any())
                violated = best > truthful
                if not violated.any():
                    continue
                col = int(np.argmax(violated))
                deviation = int(np.argmax(util[:, col] == best[col]))
                rest = np.unravel_index(col, (size,) * (n - 1)) if n > 1 else ()
                others = [int(j) for j in rest]
                idx = others[:slot] + [vi] + others[slot:]
                values = tuple(table.points[j] for j in idx)
                manipulation = Manipulation(
                    ManipulationKind.BIDDER_DEVIATION,
                    frozenset(i for i in range(n) if i != slot),
                    ((slot, table.points[deviation]),),
                    (),
                    frozenset({slot}),
                )
                witness = ViolationWitness(
                    Property.DSIC, values, table.money(truthful[col]), table.money(best[col]),
                    manipulation, {"slot": slot},
                )
                return ScanResult(witness, examined, strict)
    return ScanResult(None, examined, strict)
