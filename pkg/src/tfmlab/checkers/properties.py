"""Vérificateurs de propriétés : chacun renvoie un Verdict, avec un témoin en cas d'échec."""

from concurrent.futures import ProcessPoolExecutor, as_completed
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
import logging
from typing import Iterable, Sequence

from tfmlab.checkers.manipulation import Property, Verdict, ViolationWitness
from tfmlab.checkers.search import OutcomeTable, ScanResult, scan_coalitions, scan_dsic
from tfmlab.mechanisms.base import Mechanism, highest_bidder
from tfmlab.model import BidProfile, GridSpec, OffGridError, Outcome, UsageError, to_money

logger = logging.getLogger(__name__)

DEFAULT_SCALE_FACTORS = (Fraction(2), Fraction(1, 2), Fraction(3))


def _verdict(mech: Mechanism, prop: Property, grid: GridSpec, witness: ViolationWitness | None,
             **fields) -> Verdict:
    verdict = Verdict(prop, witness is None, grid.label, witness, **fields)
    logger.info("%s %s : %s", mech.name, verdict.label, "PASS" if verdict.passed else "VIOLATION")
    if witness is not None:
        logger.debug("Témoin : %s", witness.to_json())
    return verdict


def _profiles(grid: GridSpec, min_len: int = 1) -> Iterable[tuple[Fraction, ...]]:
    for n in range(min_len, grid.max_profile_size + 1):
        yield from product(grid.points, repeat=n)


def _evaluate(mech: Mechanism, bids: Sequence[Fraction]) -> Outcome:
    return mech.evaluate(BidProfile.from_bids(bids))


@lru_cache(maxsize=8)
def outcome_table(mech: Mechanism, grid: GridSpec, max_real: int | None = None,
                  max_fake: int | None = None) -> OutcomeTable:
    """Table des issues, partagée entre les vérificateurs d'un même mécanisme."""
    return OutcomeTable(mech, grid, max_real, max_fake)


def _table_for(mech: Mechanism, grid: GridSpec, values) -> tuple[OutcomeTable, list]:
    if values is None:
        table = outcome_table(mech, grid)
        return table, table.value_vectors()
    values = [tuple(to_money(v) for v in vector) for vector in values]
    largest = max((len(v) for v in values), default=1)
    table = outcome_table(mech, grid, max(largest, 1))
    return table, table.to_indices(values)


def _chunks(items: list, count: int) -> list[list]:
    size = max(1, -(-len(items) // count))
    return [items[k:k + size] for k in range(0, len(items), size)]


def _scan(table: OutcomeTable, vectors: list, prop: Property, limit: int | None,
          workers: int, deterministic: bool) -> ScanResult:
    """Parcourt les vecteurs de valeurs, éventuellement en parallèle par morceaux contigus."""
    if deterministic or workers <= 1 or len(vectors) < 2 * workers:
        return scan_coalitions(table, vectors, prop, limit)
    chunks = _chunks(vectors, 4 * workers)
    results: dict[int, ScanResult] = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(scan_coalitions, table, chunk, prop, limit): k
                   for k, chunk in enumerate(chunks)}
        for future in as_completed(futures):
            if future.cancelled():
                continue
            k = futures[future]
            results[k] = future.result()
            if results[k].witness is not None:
                for other, index in futures.items():
                    if index > k:
                        other.cancel()
    examined = sum(r.examined for r in results.values())
    for k in sorted(results):
        if results[k].witness is not None:
            return ScanResult(results[k].witness, examined)
    return ScanResult(None, examined)


def check_dsic(mech: Mechanism, grid: GridSpec) -> Verdict:
    """Aucun enchérisseur ne gagne à s'écarter de sa valeur, les autres enchères fixées."""
    table = outcome_table(mech, grid, max_fake=0)
    result = scan_dsic(table)
    return _verdict(mech, Property.DSIC, grid, result.witness,
                    examined=result.examined, info={"strict": result.strict})


def check_mmic(mech: Mechanism, grid: GridSpec, workers: int = 1, deterministic: bool = False,
               values: Iterable[Sequence] | None = None) -> Verdict:
    table, vectors = _table_for(mech, grid, values)
    result = _scan(table, vectors, Property.MMIC, None, workers, deterministic)
    return _verdict(mech, Property.MMIC, grid, result.witness, examined=result.examined)


def check_oca(mech: Mechanism, grid: GridSpec, c: int | None = None, workers: int = 1,
              deterministic: bool = False, values: Iterable[Sequence] | None = None) -> Verdict:
    """c=None : coalition de taille quelconque."""
    if c is not None and not 1 <= c <= grid.max_profile_size:
        raise UsageError(f"Taille de coalition invalide : {c}")
    table, vectors = _table_for(mech, grid, values)
    result = _scan(table, vectors, Property.OCA, c, workers, deterministic)
    return _verdict(mech, Property.OCA, grid, result.witness,
                    coalition_limit=c, examined=result.examined)


def check_oca_joint_form(mech: Mechanism, grid: GridSpec, workers: int = 1,
                         deterministic: bool = False,
                         values: Iterable[Sequence] | None = None) -> Verdict:
    table, vectors = _table_for(mech, grid, values)
    result = _scan(table, vectors, Property.OCA_JOINT, None, workers, deterministic)
    return _verdict(mech, Property.OCA_JOINT, grid, result.witness, examined=result.examined)


def check_scp(mech: Mechanism, grid: GridSpec, c: int | None = None, workers: int = 1,
              deterministic: bool = False, values: Iterable[Sequence] | None = None) -> Verdict:
    if c is not None and not 1 <= c <= grid.max_profile_size:
        raise UsageError(f"Taille de coalition invalide : {c}")
    table, vectors = _table_for(mech, grid, values)
    result = _scan(table, vectors, Property.SCP, c, workers, deterministic)
    info = {}
    if result.witness is not None and not result.witness.manipulation.coalition:
        # coalition vide : le mineur seul y gagne, comme pour MMIC
        info["note"] = "témoin du mineur seul"
    return _verdict(mech, Property.SCP, grid, result.witness,
                    coalition_limit=c, examined=result.examined, info=info)


def check_scale_invariance(mech: Mechanism, grid: GridSpec,
                           scale_factors: Sequence = DEFAULT_SCALE_FACTORS) -> Verdict:
    """L'allocation ne change pas quand toutes les enchères sont multipliées par α."""
    factors = [to_money(alpha) for alpha in scale_factors]
    if any(alpha <= 0 for alpha in factors):
        raise UsageError("Les facteurs d'échelle doivent être strictement positifs.")
    examined = skipped = 0
    for bids in _profiles(grid):
        if not any(bids):
            continue
        base = _evaluate(mech, bids)
        for alpha in factors:
            try:
                scaled = _evaluate(mech, [alpha * b for b in bids])
            except OffGridError:
                skipped += 1
                continue
            examined += 1
            for slot, (before, after) in enumerate(zip(base.alloc, scaled.alloc)):
                if before != after:
                    witness = ViolationWitness(Property.SCALE_INVARIANCE, bids, before, after,
                                               detail={"alpha": str(alpha), "slot": slot})
                    return _verdict(mech, Property.SCALE_INVARIANCE, grid, witness,
                                    examined=examined, skipped=skipped)
    if skipped:
        logger.warning("%s : %d couples (profil, α) hors table ignorés", mech.name, skipped)
    return _verdict(mech, Property.SCALE_INVARIANCE, grid, None,
                    examined=examined, skipped=skipped)


def check_ctpa(mech: Mechanism, grid: GridSpec) -> Verdict:
    """Probabilité totale d'allocation constante sur les profils non vides ; info['alpha'] la donne."""
    reference = None
    alpha = None
    examined = 0
    for bids in _profiles(grid):
        if not any(bids):
            continue
        total = _evaluate(mech, bids).total_alloc
        examined += 1
        if reference is None:
            reference, alpha = bids, total
        elif total != alpha:
            witness = ViolationWitness(Property.CTPA, bids, alpha, total,
                                       detail={"reference": [str(b) for b in reference]})
            return _verdict(mech, Property.CTPA, grid, witness, examined=examined)
    info = {} if alpha is None else {"alpha": str(alpha)}
    positive = grid.positive_points
    if positive and alpha and single_bidder_threshold(mech, grid) == positive[0]:
        # une réserve éventuelle sous le plus petit point positif reste invisible
        info["note"] = f"aucun point de la grille sous la réserve détectée {positive[0]}"
    return _verdict(mech, Property.CTPA, grid, None, examined=examined, info=info)


def _has_ties(bids: Sequence[Fraction]) -> bool:
    active = [b for b in bids if b > 0]
    return len(set(active)) != len(active)


def check_anonymity(mech: Mechanism, grid: GridSpec) -> Verdict:
    """x(π(b)) = π(x(b)) pour x ∈ {alloc, pay, burn}, sur les profils sans égalité."""
    examined = 0
    for bids in _profiles(grid, min_len=2):
        if _has_ties(bids):
            continue
        outcome = _evaluate(mech, bids)
        for perm in permutations(range(len(bids))):
            permuted = [bids[perm[j]] for j in range(len(bids))]
            if tuple(permuted) == tuple(bids):
                continue
            moved = _evaluate(mech, permuted)
            examined += 1
            for rule in ("alloc", "pay", "burn"):
                ours, theirs = getattr(moved, rule), getattr(outcome, rule)
                for j in range(len(bids)):
                    if ours[j] != theirs[perm[j]]:
                        witness = ViolationWitness(
                            Property.ANONYMITY, tuple(bids), ours[j], theirs[perm[j]],
                            detail={"permutation": list(perm), "slot": j, "rule": rule},
                        )
                        return _verdict(mech, Property.ANONYMITY, grid, witness, examined=examined)
    return _verdict(mech, Property.ANONYMITY, grid, None, examined=examined)


def single_bidder_threshold(mech: Mechanism, grid: GridSpec) -> Fraction | None:
    """Plus petite enchère isolée servie avec certitude, None si aucune."""
    for b in grid.positive_points:
        if _evaluate(mech, (b,)).alloc[0] == 1:
            return b
    return None


def _form_witness(prop, bids, slot, rule, expected, observed, threshold):
    return ViolationWitness(
        prop, tuple(bids), expected, observed,
        detail={"slot": slot, "rule": rule, "expected": str(expected),
                "threshold": None if threshold is None else str(threshold)},
    )


def check_single_bidder_form(mech: Mechanism, grid: GridSpec) -> Verdict:
    """
    Forme imposée à un enchérisseur seul : servi si et seulement si b ≥ r,
    paiement et brûlage égaux à r quand il est servi.
    """
    r = single_bidder_threshold(mech, grid)
    examined = 0
    for b in grid.positive_points:
        outcome = _evaluate(mech, (b,))
        served = r is not None and b >= r
        expected = {
            "alloc": Fraction(1 if served else 0),
            "pay": r if served else Fraction(0),
            "burn": r if served else Fraction(0),
        }
        examined += 1
        for rule, value in expected.items():
            observed = getattr(outcome, rule)[0]
            if observed != value:
                witness = _form_witness(Property.SINGLE_BIDDER_FORM, (b,), 0, rule, value, observed, r)
                return _verdict(mech, Property.SINGLE_BIDDER_FORM, grid, witness, examined=examined)
    info = {"reserve": "inf" if r is None else str(r)}
    return _verdict(mech, Property.SINGLE_BIDDER_FORM, grid, None, examined=examined, info=info)


def check_general_oca_form(mech: Mechanism, grid: GridSpec) -> Verdict:
    """Le plus offrant est servi si et seulement si max ≥ r, et brûle exactement r."""
    r = single_bidder_threshold(mech, grid)
    examined = 0
    for bids in _profiles(grid):
        active = [k for k, b in enumerate(bids) if b > 0]
        if not active:
            continue
        outcome = _evaluate(mech, bids)
        examined += 1
        top = active[highest_bidder([bids[k] for k in active])]
        served = r is not None and bids[top] >= r
        for slot in range(len(bids)):
            winner = served and slot == top
            expected = {"alloc": Fraction(1 if winner else 0),
                        "burn": r if winner else Fraction(0)}
            for rule, value in expected.items():
                observed = getattr(outcome, rule)[slot]
                if observed != value:
                    witness = _form_witness(Property.GENERAL_OCA_FORM, bids, slot, rule,
                                            value, observed, r)
                    return _verdict(mech, Property.GENERAL_OCA_FORM, grid, witness,
                                    examined=examined)
    info = {"reserve": "inf" if r is None else str(r)}
    return _verdict(mech, Property.GENERAL_OCA_FORM, grid, None, examined=examined, info=info)


def check_payment_burn_bound(mech: Mechanism, grid: GridSpec) -> Verdict:
    """p(x, y) ≤ β(x, y) + β(y, x) sur tous les profils à deux enchères de la grille."""
    examined = 0
    for x, y in product(grid.positive_points, repeat=2):
        ours = _evaluate(mech, (x, y))
        swapped = _evaluate(mech, (y, x))
        examined += 1
        bound = ours.burn[0] + swapped.burn[0]
        if ours.pay[0] > bound:
            witness = ViolationWitness(Property.PAYMENT_BURN_BOUND, (x, y), bound, ours.pay[0])
            return _verdict(mech, Property.PAYMENT_BURN_BOUND, grid, witness, examined=examined)
    return _verdict(mech, Property.PAYMENT_BURN_BOUND, grid, None, examined=examined)


def check_low_value_feasibility(mech: Mechanism, grid: GridSpec) -> Verdict:
    """Le plus petit enchérisseur (strict) n'est pas servi plus que la moyenne."""
    examined = 0
    for bids in _profiles(grid, min_len=2):
        if 0 in bids:
            continue
        low = min(bids)
        if bids.count(low) > 1:
            continue
        outcome = _evaluate(mech, bids)
        examined += 1
        slot = bids.index(low)
        average = outcome.total_alloc / len(bids)
        if outcome.alloc[slot] > average:
            witness = ViolationWitness(Property.LOW_VALUE_FEASIBILITY, bids, average,
                                       outcome.alloc[slot], detail={"slot": slot})
            return _verdict(mech, Property.LOW_VALUE_FEASIBILITY, grid, witness, examined=examined)
    return _verdict(mech, Property.LOW_VALUE_FEASIBILITY, grid, None, examined=examined)


def _left_riemann(points: Sequence[Fraction], upto: Fraction, height) -> Fraction:
    """Σ_{g_k < upto} height(g_k)·(g_{k+1} − g_k)."""
    total = Fraction(0)
    for g, nxt in zip(points, points[1:]):
        if g >= upto:
            break
        total += height(g) * (nxt - g)
    return total


def two_bidders_sides(mech: Mechanism, points: Sequence[Fraction], x: Fraction,
                      y: Fraction) -> tuple[Fraction, Fraction]:
    """(a(y, x)·y + ∫₀ˣ a(t, y)dt, ∫₀ˣ a(t)dt) en sommes de Riemann à gauche."""
    lhs = _evaluate(mech, (y, x)).alloc[0] * y + _left_riemann(
        points, x, lambda t: _evaluate(mech, (t, y)).alloc[0])
    rhs = _left_riemann(points, x, lambda t: _evaluate(mech, (t,)).alloc[0])
    return lhs, rhs


def check_two_bidders_condition(mech: Mechanism, grid: GridSpec) -> Verdict:
    examined = 0
    for x, y in product(grid.positive_points, repeat=2):
        if x < y:
            continue
        lhs, rhs = two_bidders_sides(mech, grid.points, x, y)
        examined += 1
        if rhs > lhs:
            witness = ViolationWitness(Property.TWO_BIDDERS_CONDITION, (x, y), lhs, rhs,
                                       detail={"grid": [str(p) for p in grid.points]})
            return _verdict(mech, Property.TWO_BIDDERS_CONDITION, grid, witness, examined=examined)
    return _verdict(mech, Property.TWO_BIDDERS_CONDITION, grid, None, examined=examined)
