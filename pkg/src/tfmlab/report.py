"""Configuration d'une exécution, rapports JSON et suites d'expériences préconstruites."""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
import json
import logging
from pathlib import Path
import time

from tfmlab import __version__
from tfmlab.bounds.allocation import minimize_allocation_bound
from tfmlab.bounds.efficiency import efficiency_witness_check, find_efficiency_threshold
from tfmlab.bounds.lp import build_lp, export_mps, solve_lp
from tfmlab.checkers.manipulation import Property, Verdict
from tfmlab.checkers import properties as checks
from tfmlab.mechanisms.base import Mechanism
from tfmlab.mechanisms.catalog import Family, MechanismSpec, enumerate_family, make_mechanism
from tfmlab.model import (
    BidProfile,
    GridSpec,
    TfmError,
    UsageError,
    to_reserve,
)
from tfmlab.utility import miner_utility

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

PROPERTY_ALIASES = {
    "dsic": Property.DSIC,
    "mmic": Property.MMIC,
    "oca": Property.OCA,
    "oca_joint": Property.OCA_JOINT,
    "scp": Property.SCP,
    "scale": Property.SCALE_INVARIANCE,
    "ctpa": Property.CTPA,
    "anon": Property.ANONYMITY,
    "single_form": Property.SINGLE_BIDDER_FORM,
    "general_form": Property.GENERAL_OCA_FORM,
    "payment_burn": Property.PAYMENT_BURN_BOUND,
    "low_value": Property.LOW_VALUE_FEASIBILITY,
    "two_bidders": Property.TWO_BIDDERS_CONDITION,
}

BOUNDS_KINDS = ("allocation_bound", "efficiency", "lp")


@dataclass(frozen=True)
class PropertyJob:
    prop: Property
    c: int | None = None

    @classmethod
    def parse(cls, text: str, default_c: int | None = None) -> "PropertyJob":
        """'dsic', 'oca:all', 'scp:1', … ; la taille de coalition par défaut vaut default_c."""
        name, _, limit = text.strip().lower().partition(":")
        if name not in PROPERTY_ALIASES:
            raise UsageError(f"Propriété inconnue : {text!r}")
        prop = PROPERTY_ALIASES[name]
        if prop not in (Property.OCA, Property.SCP):
            if limit:
                raise UsageError(f"La propriété {name} n'a pas de taille de coalition.")
            return cls(prop)
        return cls(prop, parse_coalition(limit) if limit else default_c)

    @property
    def label(self) -> str:
        alias = next(k for k, v in PROPERTY_ALIASES.items() if v is self.prop)
        if self.prop in (Property.OCA, Property.SCP):
            return f"{alias}:{'all' if self.c is None else self.c}"
        return alias


def parse_coalition(text: str) -> int | None:
    if text.strip().lower() == "all":
        return None
    try:
        c = int(text)
    except ValueError:
        raise UsageError(f"Taille de coalition illisible : {text!r}")
    if c < 1:
        raise UsageError(f"Taille de coalition invalide : {c}")
    return c


@dataclass(frozen=True)
class BoundsJob:
    kind: str
    params: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.kind not in BOUNDS_KINDS:
            raise UsageError(f"Calcul de borne inconnu : {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params}


@dataclass
class RunConfig:
    mechanism: MechanismSpec | None = None
    grid: GridSpec | None = None
    properties: list[PropertyJob] = field(default_factory=list)
    bounds: list[BoundsJob] = field(default_factory=list)
    output: Path | None = None
    deterministic: bool = False
    workers: int = 1
    scale_factors: tuple = checks.DEFAULT_SCALE_FACTORS

    def validate(self):
        if not self.properties and not self.bounds:
            raise UsageError("La configuration ne contient aucun travail.")
        if self.properties and (self.mechanism is None or self.grid is None):
            raise UsageError("Les vérifications de propriétés exigent un mécanisme et une grille.")
        if self.workers < 1:
            raise UsageError(f"Nombre de processus invalide : {self.workers}")
        for job in self.properties:
            if job.c is not None and job.c > self.grid.max_profile_size:
                raise UsageError(
                    f"Coalition {job.c} plus grande que max_profile_size={self.grid.max_profile_size}"
                )

    def to_json(self) -> dict:
        return {
            "mechanism": None if self.mechanism is None else self.mechanism.to_json(),
            "grid": None if self.grid is None else self.grid.to_json(),
            "properties": [job.label for job in self.properties],
            "bounds": [job.to_json() for job in self.bounds],
            "output": None if self.output is None else str(self.output),
            "deterministic": self.deterministic,
            "workers": self.workers,
            "scale_factors": [str(alpha) for alpha in self.scale_factors],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise UsageError("La configuration doit être un objet JSON.")
        mechanism = data.get("mechanism")
        grid = data.get("grid")
        config = cls(
            mechanism=None if mechanism is None else MechanismSpec.from_json(mechanism),
            grid=None if grid is None else GridSpec.from_json(grid),
            properties=[PropertyJob.parse(p) for p in data.get("properties", [])],
            bounds=[BoundsJob(b["kind"], {k: v for k, v in b.items() if k != "kind"})
                    for b in data.get("bounds", [])],
            output=None if data.get("output") is None else Path(data["output"]),
            deterministic=bool(data.get("deterministic", False)),
            workers=int(data.get("workers", 1)),
        )
        if "scale_factors" in data:
            config.scale_factors = tuple(Fraction(str(a)) for a in data["scale_factors"])
        config.validate()
        return config

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise UsageError(f"Configuration illisible ({path}) : {e}")
        return cls.from_json(data)


@dataclass
class Report:
    tool_version: str = __version__
    schema_version: str = SCHEMA_VERSION
    config: dict = field(default_factory=dict)
    verdicts: list[dict] = field(default_factory=list)
    bounds: list[dict] = field(default_factory=list)
    suites: list[dict] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "schema_version": self.schema_version,
            "config": self.config,
            "verdicts": self.verdicts,
            "bounds": self.bounds,
            "suites": self.suites,
            "errors": self.errors,
            "timings": self.timings,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Report":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise UsageError(f"Version de schéma non supportée : {data.get('schema_version')!r}")
        return cls(**{key: data[key] for key in cls().to_json() if key in data})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Report":
        return cls.from_json(json.loads(text))

    def write(self, path: str | Path):
        Path(path).write_text(self.dumps(), encoding="utf-8")
        logger.info("Rapport écrit dans %s", path)

    @property
    def ok(self) -> bool:
        return not self.errors


def _verdict_entry(mech: Mechanism, verdict: Verdict) -> dict:
    return {"mechanism": mech.name, **verdict.to_json()}


def run_property(mech: Mechanism, grid: GridSpec, job: PropertyJob, config: RunConfig) -> Verdict:
    prop = job.prop
    parallel = {"workers": config.workers, "deterministic": config.deterministic}
    if prop is Property.DSIC:
        return checks.check_dsic(mech, grid)
    if prop is Property.MMIC:
        return checks.check_mmic(mech, grid, **parallel)
    if prop is Property.OCA:
        return checks.check_oca(mech, grid, job.c, **parallel)
    if prop is Property.OCA_JOINT:
        return checks.check_oca_joint_form(mech, grid, **parallel)
    if prop is Property.SCP:
        return checks.check_scp(mech, grid, job.c, **parallel)
    if prop is Property.SCALE_INVARIANCE:
        return checks.check_scale_invariance(mech, grid, config.scale_factors)
    if prop is Property.CTPA:
        return checks.check_ctpa(mech, grid)
    if prop is Property.ANONYMITY:
        return checks.check_anonymity(mech, grid)
    if prop is Property.SINGLE_BIDDER_FORM:
        return checks.check_single_bidder_form(mech, grid)
    if prop is Property.GENERAL_OCA_FORM:
        return checks.check_general_oca_form(mech, grid)
    if prop is Property.PAYMENT_BURN_BOUND:
        return checks.check_payment_burn_bound(mech, grid)
    if prop is Property.LOW_VALUE_FEASIBILITY:
        return checks.check_low_value_feasibility(mech, grid)
    if prop is Property.TWO_BIDDERS_CONDITION:
        return checks.check_two_bidders_condition(mech, grid)
    raise UsageError(f"Propriété non gérée : {prop}")


def run_bounds(job: BoundsJob) -> dict:
    params = job.params
    if job.kind == "allocation_bound":
        result = minimize_allocation_bound(float(params.get("A_max", 1e6)),
                                           float(params.get("tol", 1e-4)))
        return {"kind": job.kind, **result.to_json()}
    if job.kind == "efficiency":
        v1, v2 = float(params["v1"]), float(params["v2"])
        entry = {"kind": job.kind, "v1": v1, "v2": v2}
        if "u_ratio" in params:
            entry["check"] = efficiency_witness_check(v1, v2, float(params["u_ratio"]) * v1).to_json()
        entry["threshold"] = find_efficiency_threshold(v1, v2, float(params.get("tol", 1e-4))).to_json()
        return entry
    grid = GridSpec.parse(params.get("grid", "1:3/2:20"))
    instance = build_lp(grid)
    solution = solve_lp(instance)
    if params.get("mps"):
        export_mps(instance, params["mps"])
    n_vars, n_rows = instance.size
    return {"kind": job.kind, "grid": [str(p) for p in grid.points],
            "variables": n_vars, "constraints": n_rows, **solution.to_json()}


def run(config: RunConfig) -> Report:
    """Exécute tous les travaux ; les erreurs opérationnelles sont consignées dans report.errors."""
    config.validate()
    report = Report(config=config.to_json())
    mech = None if config.mechanism is None else make_mechanism(config.mechanism)
    for job in config.properties:
        start = time.perf_counter()
        try:
            verdict = run_property(mech, config.grid, job, config)
            report.verdicts.append(_verdict_entry(mech, verdict))
        except TfmError as e:
            logger.error("%s : %s", job.label, e)
            report.errors.append(f"{job.label}: {e}")
        if not config.deterministic:
            report.timings[job.label] = time.perf_counter() - start
    for job in config.bounds:
        start = time.perf_counter()
        try:
            report.bounds.append(run_bounds(job))
        except (TfmError, KeyError, ValueError) as e:
            logger.error("%s : %s", job.kind, e)
            report.errors.append(f"{job.kind}: {e}")
        if not config.deterministic:
            report.timings[job.kind] = time.perf_counter() - start
    if config.output is not None:
        report.write(config.output)
    return report


def _grid_profiles(grid: GridSpec):
    for n in range(1, grid.max_profile_size + 1):
        yield from product(grid.points, repeat=n)


def never_allocates(mech: Mechanism, grid: GridSpec) -> bool:
    """Équivalent au mécanisme trivial sur la grille : issue nulle partout."""
    for bids in _grid_profiles(grid):
        outcome = mech.evaluate(BidProfile.from_bids(bids))
        if any(outcome.alloc) or any(outcome.pay) or any(outcome.burn):
            return False
    return True


def zero_miner_revenue(mech: Mechanism, grid: GridSpec) -> bool:
    return all(miner_utility(mech, BidProfile.from_bids(bids)) == 0
               for bids in _grid_profiles(grid))


def impossibility_mechanisms(r_grid) -> list[Mechanism]:
    """Les deux familles caractérisées sur r_grid, plus les mécanismes anonymes sans paramètre."""
    mechanisms = []
    for family in (Family.TRIVIAL, Family.FIRST_PRICE, Family.SECOND_PRICE, Family.THIRD_PRICE):
        mechanisms += enumerate_family(family)
    mechanisms += enumerate_family(Family.BURNED_SECOND_PRICE, r_grid)
    mechanisms += enumerate_family(Family.GENERALIZED_BURNED_FIRST_PRICE, r_grid)
    return mechanisms


def suite_deterministic_impossibility(r_grid, bid_grid: GridSpec, workers: int = 1,
                                      deterministic: bool = False) -> Report:
    """DSIC + MMIC + OCA(1) sur les familles caractérisées : seuls les mécanismes triviaux passent."""
    reserves = [to_reserve(r) for r in r_grid]
    report = Report(config={"suite": "impossibility", "reserves": [str(r) for r in reserves],
                            "grid": bid_grid.to_json()})
    passers = []
    for mech in impossibility_mechanisms(reserves):
        start = time.perf_counter()
        verdicts = [
            checks.check_dsic(mech, bid_grid),
            checks.check_mmic(mech, bid_grid, workers, deterministic),
            checks.check_oca(mech, bid_grid, 1, workers, deterministic),
        ]
        report.verdicts += [_verdict_entry(mech, v) for v in verdicts]
        if not deterministic:
            report.timings[mech.name] = time.perf_counter() - start
        if all(v.passed for v in verdicts):
            trivial = never_allocates(mech, bid_grid)
            revenue = zero_miner_revenue(mech, bid_grid)
            passers.append({"mechanism": mech.name, "trivial": trivial, "zero_revenue": revenue})
            if not trivial:
                report.errors.append(
                    f"mécanisme non trivial passant DSIC, MMIC et OCA(1) : "
                    f"{json.dumps(mech.spec.to_json(), sort_keys=True)}"
                )
            if not revenue:
                report.errors.append(f"revenu du mineur non nul pour {mech.name}")
    report.suites.append({"name": "impossibility", "passed": report.ok, "triple_passers": passers})
    return report


def _expectation(name: str, expected, actual, ok: bool) -> dict:
    return {"name": name, "expected": expected, "actual": actual, "ok": ok}


def suite_paper_tables(workers: int = 1) -> Report:
    """Les trois reproductions chiffrées : contre-exemple du troisième prix, borne d'allocation, seuil d'efficacité."""
    report = Report(config={"suite": "paper"})
    rows = []

    grid = GridSpec.arithmetic(0, 2, Fraction(1, 4), max_profile_size=3, max_fake_bids=0)
    third = make_mechanism(MechanismSpec(Family.THIRD_PRICE))
    oca = checks.check_oca(third, grid, None, workers)
    scp = checks.check_scp(third, grid, 1, deterministic=True,
                           values=[(1, Fraction(1, 2), Fraction(1, 4))])
    report.verdicts += [_verdict_entry(third, oca), _verdict_entry(third, scp)]
    actual = None if scp.witness is None else {"lhs": str(scp.witness.lhs), "rhs": str(scp.witness.rhs)}
    rows.append(_expectation("third_price_oca", "pass", "pass" if oca.passed else "violation", oca.passed))
    rows.append(_expectation("third_price_scp", {"lhs": "1/4", "rhs": "1/2"}, actual,
                             actual == {"lhs": "1/4", "rhs": "1/2"}))

    bound = minimize_allocation_bound(1e6, 1e-4)
    report.bounds.append({"kind": "allocation_bound", **bound.to_json()})
    rows.append(_expectation("allocation_bound", [0.91421, 0.91430], bound.value,
                             0.91421 <= bound.value <= 0.91430))

    high = efficiency_witness_check(19.8, 2.4, 0.842 * 19.8)
    low = efficiency_witness_check(19.8, 2.4, 0.83 * 19.8)
    threshold = find_efficiency_threshold(19.8, 2.4, 1e-4)
    report.bounds.append({"kind": "efficiency", "v1": 19.8, "v2": 2.4,
                          "check_0.842": high.to_json(), "check_0.83": low.to_json(),
                          "threshold": threshold.to_json()})
    rows.append(_expectation("efficiency_0.842", True, high.contradicts, high.contradicts))
    rows.append(_expectation("efficiency_0.83", False, low.contradicts, not low.contradicts))
    ratio = threshold.threshold
    rows.append(_expectation("efficiency_threshold", [0.83, 0.842], ratio,
                             ratio is not None and 0.83 < ratio <= 0.842))

    for row in rows:
        if not row["ok"]:
            report.errors.append(f"écart sur {row['name']} : attendu {row['expected']}, obtenu {row['actual']}")
    report.suites.append({"name": "paper", "passed": report.ok, "rows": rows})
    return report


def suite_randomized_conditions(grid: GridSpec, reserves=(0, 1), workers: int = 1,
                                deterministic: bool = False) -> Report:
    """
    Conditions nécessaires des mécanismes randomisés sur le catalogue : un membre
    invariant d'échelle ou à CTPA qui passe DSIC, MMIC et OCA(1) ne doit jamais allouer,
    et doit vérifier les conditions nécessaires.
    """
    reserves = [to_reserve(r) for r in reserves]
    report = Report(config={"suite": "randomized", "grid": grid.to_json(),
                            "reserves": [str(r) for r in reserves]})
    summary = []
    for mech in impossibility_mechanisms(reserves):
        scale = checks.check_scale_invariance(mech, grid)
        ctpa = checks.check_ctpa(mech, grid)
        necessary = [
            checks.check_payment_burn_bound(mech, grid),
            checks.check_two_bidders_condition(mech, grid),
            checks.check_low_value_feasibility(mech, grid),
        ]
        triple = [
            checks.check_dsic(mech, grid),
            checks.check_mmic(mech, grid, workers, deterministic),
            checks.check_oca(mech, grid, 1, workers, deterministic),
        ]
        for verdict in [scale, ctpa, *necessary, *triple]:
            report.verdicts.append(_verdict_entry(mech, verdict))
        incentive = all(v.passed for v in triple)
        summary.append({
            "mechanism": mech.name,
            "scale_invariant": scale.passed,
            "ctpa": ctpa.info.get("alpha") if ctpa.passed else None,
            "incentive_compatible": incentive,
        })
        if incentive and (scale.passed or ctpa.passed):
            if not never_allocates(mech, grid):
                report.errors.append(f"{mech.name} alloue tout en passant DSIC, MMIC et OCA(1)")
            if not all(v.passed for v in necessary):
                report.errors.append(f"{mech.name} viole une condition nécessaire")
    report.suites.append({"name": "randomized", "passed": report.ok, "mechanisms": summary})
    return report
