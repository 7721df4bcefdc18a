import json
import pytest
from pathlib import Path

# Importation des fonctions à tester
from tfmlab.cli import main, run_file
from tfmlab.report import Report

def collect_test_cases():
    """
    Parcourt le dossier tests/fixtures/configs/ pour tous les fichiers .json
    et retourne une liste de tuples (chemin_config, chemin_attendu).
    """
    cases_dir = Path(__file__).parent / "fixtures" / "configs"
    test_cases = []
    # Pour chaque fichier .json, on cherche le fichier .out correspondant
    for config_path in sorted(cases_dir.glob("*.json")):
        out_path = config_path.with_suffix(".out")
        if not out_path.exists():
            raise FileNotFoundError(f"Fichier de sortie attendu manquant pour {config_path}")
        test_cases.append((config_path, out_path))
    return test_cases


# Paramétrage du test pour chaque couple (configuration, attendu)
test_cases = collect_test_cases()
id_list = [x[0].name for x in test_cases]
@pytest.mark.parametrize("config_path, expected_path",
                         test_cases,
                         ids=id_list)
def test_file_outputs_match(config_path: Path,
                            expected_path: Path,
                            capfd):
    """
    Pour chaque configuration .json, exécute run_file(...), capture la sortie
    standard et la compare au contenu du fichier .out correspondant.
    """
    report = run_file(config_path)
    assert report.ok

    # capfd capture stdout/stderr pendant le test
    captured = capfd.readouterr()
    actual_stdout = captured.out

    # On lit la sortie attendue depuis le fichier .out
    expected_stdout = expected_path.read_text(encoding="utf-8")

    # Vérification que la sortie réelle correspond à la sortie attendue
    assert actual_stdout == expected_stdout, (
        f"\nDifférence de sortie pour {config_path.name}:\n"
        f"--- obtenu ---\n{actual_stdout!r}\n"
        f"--- attendu ---\n{expected_stdout!r}\n"
    )


def test_check_writes_report(tmp_path, capfd):
    out = tmp_path / "report.json"
    code = main(["check", "--mechanism", "SecondPrice", "--grid", "0..2:1",
                 "--max-profile-size", "2", "--fake-bids", "1",
                 "--properties", "dsic,mmic", "--deterministic", "--out", str(out)])
    assert code == 0
    report = Report.loads(out.read_text(encoding="utf-8"))
    assert [v["passed"] for v in report.verdicts] == [True, False]
    assert "mmic : VIOLATION" in capfd.readouterr().out


def test_check_with_json_mechanism(capfd):
    spec = json.dumps({"family": "BurnedSecondPrice", "r": "1"})
    code = main(["check", "--mechanism", spec, "--grid-list", "1/2,1,2",
                 "--max-profile-size", "1", "--fake-bids", "0", "--properties", "single_form"])
    assert code == 0
    assert capfd.readouterr().out.splitlines()[-1] == "single_bidder_form : PASS"


def test_unknown_family(capfd):
    code = main(["check", "--mechanism", "Vickrey"])
    assert code == 1
    assert capfd.readouterr().out.startswith("Erreur: Famille inconnue")


def test_coalition_too_large(capfd):
    code = main(["check", "--mechanism", "SecondPrice", "--grid", "0..1:1",
                 "--max-profile-size", "1", "--properties", "oca:2"])
    assert code == 1
    assert "Erreur:" in capfd.readouterr().out


def test_missing_config(tmp_path, capfd):
    code = main(["run", str(tmp_path / "absent.json")])
    assert code == 1
    assert capfd.readouterr().out.startswith("Erreur:")


def test_bounds_errors_set_exit_code(capfd):
    code = main(["bounds", "efficiency", "--v1", "2", "--v2", "3"])
    assert code == 1
    assert "Erreur: efficiency:" in capfd.readouterr().out


def test_efficiency_threshold_output(capfd):
    assert main(["bounds", "efficiency", "--u-ratio", "0.842"]) == 0
    out = capfd.readouterr().out
    assert "contradiction : oui" in out
    assert "seuil d'efficacité : 0.84" in out


def test_lp_export(tmp_path, capfd):
    mps = tmp_path / "tfm.mps"
    assert main(["lp", "--grid-geom", "1:3/2:4", "--mps", str(mps)]) == 0
    assert mps.read_text(encoding="utf-8").endswith("ENDATA\n")
    assert "40 variables" in capfd.readouterr().out


def test_catalog_list(capfd):
    assert main(["catalog", "list", "--reserves", "1"]) == 0
    lines = capfd.readouterr().out.splitlines()
    assert "BurnedSecondPrice(r=1) [anonyme] " + json.dumps(
        {"family": "BurnedSecondPrice", "r": "1"}, sort_keys=True) in lines
    assert any(line.startswith("NonAnonymousPostedBurn(i*=b0, r=1) [non anonyme]") for line in lines)


@pytest.mark.parametrize("name", ["paper", "reference"])
def test_paper_suite_names(name, tmp_path, capfd):
    out = tmp_path / "suite.json"
    assert main(["suite", name, "--out", str(out)]) == 0
    report = Report.loads(out.read_text(encoding="utf-8"))
    assert report.config == {"suite": "paper"}
    assert report.suites[0]["name"] == "paper"
    assert "reproductions chiffrées" in capfd.readouterr().out
