import argparse
import json
import logging
import sys
from pathlib import Path

from tfmlab.bounds.lp import CONSTRAINT_CLASSES, build_lp, export_mps, solve_lp
from tfmlab.mechanisms.catalog import Family, MechanismSpec, catalog
from tfmlab.mechanisms.curves import CURVE_MENU
from tfmlab.model import GridSpec, TfmError, UsageError, to_reserve
from tfmlab.report import (
    BoundsJob,
    PropertyJob,
    Report,
    RunConfig,
    parse_coalition,
    run,
    suite_deterministic_impossibility,
    suite_paper_tables,
    suite_randomized_conditions,
)

logger = logging.getLogger("tfmlab")

CURVES = {"identity": CURVE_MENU[0], "affine": CURVE_MENU[1], "constant": CURVE_MENU[2]}


def print_report(report: Report, with_mechanism: bool = False):
    for v in report.verdicts:
        status = "PASS" if v["passed"] else "VIOLATION"
        if v["property"] == "ctpa" and v["passed"] and "alpha" in v["info"]:
            status += f" (alpha={v['info']['alpha']})"
        prefix = f"{v['mechanism']} " if with_mechanism else ""
        print(f"{prefix}{v['label']} : {status}")
    for b in report.bounds:
        print(format_bound(b))
    for s in report.suites:
        print(f"suite {s['name']} : {'OK' if s['passed'] else 'ÉCHEC'}")
    for e in report.errors:
        print(f"Erreur: {e}")


def format_bound(entry: dict) -> str:
    if entry["kind"] == "allocation_bound":
        return (f"borne d'allocation : {entry['value']:.8f} "
                f"(A={entry['A']:.6g}, B={entry['B']:.6g})")
    if entry["kind"] == "efficiency":
        lines = []
        for key in sorted(k for k in entry if k.startswith("check")):
            c = entry[key]
            lines.append(f"contradiction : {'oui' if c['contradicts'] else 'non'} "
                         f"(inférieure {c['lower']:.5f}, supérieure {c['upper']:.5f}, borne {c['bound']})")
        threshold = entry["threshold"]
        if threshold["threshold"] is None:
            lines.append(f"seuil d'efficacité : aucun ({threshold['message']})")
        else:
            lines.append(f"seuil d'efficacité : {threshold['threshold']:.5f}")
        return "\n".join(lines)
    optimum = "aucun" if entry["optimum"] is None else f"{entry['optimum']:.6f}"
    return (f"programme linéaire : optimum {optimum} "
            f"({entry['variables']} variables, {entry['constraints']} contraintes)")


def run_file(filename, out=None) -> Report:
    """Exécute une configuration JSON et affiche le résumé des verdicts."""
    config = RunConfig.load(filename)
    if out is not None:
        config.output = out
    if config.mechanism is not None:
        print(f"🔎 {config.mechanism.label} sur {config.grid.label}")
    else:
        print("🔎 tfmlab")
    report = run(config)
    print_report(report)
    return report


def read_grid(args, default: str, **default_caps) -> GridSpec:
    caps = {
        "max_profile_size": args.max_profile_size or default_caps.get("max_profile_size"),
        "max_fake_bids": args.fake_bids if args.fake_bids is not None
        else default_caps.get("max_fake_bids"),
    }
    caps = {k: v for k, v in caps.items() if v is not None}
    if args.grid_geom:
        return GridSpec.parse(args.grid_geom, **caps)
    if args.grid_list:
        return GridSpec.parse(args.grid_list, **caps)
    return GridSpec.parse(args.grid or default, **caps)


def read_mechanism(args) -> MechanismSpec:
    text = args.mechanism.strip()
    if text.startswith("{"):
        try:
            return MechanismSpec.from_json(json.loads(text))
        except json.JSONDecodeError as e:
            raise UsageError(f"Mécanisme JSON illisible : {e}")
    try:
        family = Family(text)
    except ValueError:
        names = ", ".join(f.value for f in Family)
        raise UsageError(f"Famille inconnue : {text!r} (choix : {names})")
    curve = CURVES[args.curve] if family is Family.GENERALIZED_BURNED_FIRST_PRICE else None
    i_star = args.i_star if family is Family.NON_ANONYMOUS_POSTED_BURN else None
    spec = MechanismSpec(family, to_reserve(args.r), curve, i_star)
    spec.validate()
    return spec


def read_reserves(text: str) -> list:
    return [to_reserve(r) for r in text.split(",") if r.strip()]


def cmd_check(args) -> Report:
    grid = read_grid(args, "0..2:1/4")
    default_c = parse_coalition(args.coalition)
    config = RunConfig(
        mechanism=read_mechanism(args),
        grid=grid,
        properties=[PropertyJob.parse(p, default_c) for p in args.properties.split(",") if p.strip()],
        output=args.out,
        deterministic=args.deterministic,
        workers=args.workers,
    )
    print(f"🔎 {config.mechanism.label} sur {grid.label}")
    report = run(config)
    print_report(report)
    return report


def cmd_run(args) -> Report:
    return run_file(args.config, args.out)


def _finish(report: Report, args, with_mechanism: bool = True) -> Report:
    print_report(report, with_mechanism=with_mechanism)
    if args.out is not None:
        report.write(args.out)
    return report


def cmd_suite(args) -> Report:
    if args.suite == "impossibility":
        grid = read_grid(args, "0..4:1/2")
        print(f"🔎 impossibilité déterministe sur {grid.label}")
        report = suite_deterministic_impossibility(read_reserves(args.reserves), grid,
                                                   args.workers, args.deterministic)
    elif args.suite in ("paper", "reference"):
        print("🔎 reproductions chiffrées")
        report = suite_paper_tables(args.workers)
    else:
        grid = read_grid(args, "0..3:1/2", max_profile_size=2, max_fake_bids=1)
        print(f"🔎 conditions des mécanismes randomisés sur {grid.label}")
        report = suite_randomized_conditions(grid, read_reserves(args.reserves),
                                             args.workers, args.deterministic)
    return _finish(report, args)


def cmd_bounds(args) -> Report:
    if args.bounds == "allocation":
        job = BoundsJob("allocation_bound", {"A_max": args.a_max, "tol": args.tol})
    else:
        params = {"v1": args.v1, "v2": args.v2, "tol": args.tol}
        if args.u_ratio is not None:
            params["u_ratio"] = args.u_ratio
        job = BoundsJob("efficiency", params)
    report = run(RunConfig(bounds=[job], deterministic=True))
    return _finish(report, args, with_mechanism=False)


def cmd_lp(args) -> Report:
    grid = GridSpec.parse(args.grid_geom)
    instance = build_lp(grid)
    if args.minimize:
        instance = instance.minimized()
    solution = solve_lp(instance)
    if args.mps:
        export_mps(instance, args.mps)
    n_vars, n_rows = instance.size
    report = Report(config={"lp": args.grid_geom, "minimize": args.minimize})
    report.bounds.append({"kind": "lp", "grid": [str(p) for p in grid.points],
                          "variables": n_vars, "constraints": n_rows, **solution.to_json()})
    for cls, meaning in CONSTRAINT_CLASSES.items():
        count = instance.ub_classes.count(cls) + instance.eq_classes.count(cls)
        logger.info("classe %s (%s) : %d contraintes", cls, meaning, count)
    return _finish(report, args, with_mechanism=False)


def cmd_catalog(args) -> Report:
    for mech in catalog(read_reserves(args.reserves)):
        flags = "anonyme" if mech.anonymous else "non anonyme"
        print(f"{mech.name} [{flags}] {json.dumps(mech.spec.to_json(), sort_keys=True)}")
    return Report()


def _add_search_options(p: argparse.ArgumentParser):
    p.add_argument("--grid", help="grille arithmétique lo..hi:pas (ex. 0..2:1/4)")
    p.add_argument("--grid-geom", help="grille géométrique base:ratio:nombre, 0 ajouté")
    p.add_argument("--grid-list", help="liste explicite de points (ex. 0,1/4,1/2)")
    p.add_argument("--max-profile-size", type=int, help="nombre maximal d'enchérisseurs réels")
    p.add_argument("--fake-bids", type=int, help="nombre maximal de fausses enchères")
    p.add_argument("--workers", type=int, default=1, help="processus pour la recherche")
    p.add_argument("--deterministic", action="store_true",
                   help="recherche séquentielle, rapport reproductible à l'octet près")
    p.add_argument("--out", type=Path, help="chemin du rapport JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfmlab", description="Vérification de mécanismes de frais")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="vérifie des propriétés d'un mécanisme")
    check.add_argument("--mechanism", required=True, help="famille ou spécification JSON")
    check.add_argument("--r", default="0", help="réserve (ou inf)")
    check.add_argument("--curve", choices=sorted(CURVES), default="identity")
    check.add_argument("--i-star", default="b0")
    check.add_argument("--properties", default="dsic,mmic,oca:1")
    check.add_argument("--coalition", default="1", help="taille de coalition par défaut (c ou all)")
    _add_search_options(check)
    check.set_defaults(handler=cmd_check)

    run_p = sub.add_parser("run", help="exécute une configuration JSON")
    run_p.add_argument("config", type=Path)
    run_p.add_argument("--out", type=Path)
    run_p.set_defaults(handler=cmd_run)

    suite = sub.add_parser("suite", help="suites d'expériences")
    suite.add_argument("suite", choices=("impossibility", "paper", "reference", "randomized"))
    suite.add_argument("--reserves", default="0,1/2,1,2,inf")
    _add_search_options(suite)
    suite.set_defaults(handler=cmd_suite)

    bounds = sub.add_parser("bounds", help="bornes numériques")
    bounds.add_argument("bounds", choices=("allocation", "efficiency"))
    bounds.add_argument("--a-max", type=float, default=1e6)
    bounds.add_argument("--tol", type=float, default=1e-4)
    bounds.add_argument("--v1", type=float, default=19.8)
    bounds.add_argument("--v2", type=float, default=2.4)
    bounds.add_argument("--u-ratio", type=float)
    bounds.add_argument("--out", type=Path)
    bounds.set_defaults(handler=cmd_bounds)

    lp = sub.add_parser("lp", help="programme linéaire discrétisé")
    lp.add_argument("--grid-geom", default="1:3/2:20")
    lp.add_argument("--mps", type=Path, help="export MPS")
    lp.add_argument("--minimize", action="store_true")
    lp.add_argument("--out", type=Path)
    lp.set_defaults(handler=cmd_lp)

    cat = sub.add_parser("catalog", help="catalogue des mécanismes")
    cat.add_argument("action", choices=("list",))
    cat.add_argument("--reserves", default="0,1,inf")
    cat.set_defaults(handler=cmd_catalog)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=max(logging.WARNING - 10 * args.verbose, logging.DEBUG),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        report = args.handler(args)
    except (TfmError, OSError) as e:
        print(f"Erreur: {e}")
        return 1
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
