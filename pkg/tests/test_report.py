import json
from fractions import Fraction

import pytest

from tfmlab.checkers import Property
from tfmlab.mechanisms import Family, MechanismSpec, make_mechanism
from tfmlab.model import GridSpec, UsageError
from tfmlab.report import (
    BoundsJob,
    PropertyJob,
    Report,
    RunConfig,
    impossibility_mechanisms,
    never_allocates,
    run,
    suite_deterministic_impossibility,
    suite_paper_tables,
    suite_randomized_conditions,
)


def config_for(family="SecondPrice", properties=("dsic", "mmic"), **extra):
    data = {
        "mechanism": {"family": family},
        "grid": {"spec": "0..2:1/2", "max_profile_size": 2, "max_fake_bids": 1},
        "properties": list(properties),
        "deterministic": True,
    }
    data.update(extra)
    return RunConfig.from_json(data)


@pytest.mark.parametrize("text, prop, c", [
    ("dsic", Property.DSIC, None),
    ("oca", Property.OCA, 1),
    ("oca:all", Property.OCA, None),
    ("SCP:2", Property.SCP, 2),
    ("anon", Property.ANONYMITY, None),
])
def test_property_job_parse(text, prop, c):
    job = PropertyJob.parse(text, default_c=1)
    assert (job.prop, job.c) == (prop, c)


@pytest.mark.parametrize("text", ["dsic:2", "vickrey", "oca:0", "scp:x"])
def test_property_job_rejects(text):
    with pytest.raises(UsageError):
        PropertyJob.parse(text)


def test_config_validation():
    with pytest.raises(UsageError):
        RunConfig.from_json({"properties": []})
    with pytest.raises(UsageError):
        RunConfig.from_json({"properties": ["dsic"]})
    with pytest.raises(UsageError):
        config_for(properties=["oca:3"])
    with pytest.raises(UsageError):
        config_for(workers=0)
    with pytest.raises(UsageError):
        BoundsJob("volume")


def test_config_json_round_trip():
    config = config_for(properties=["dsic", "scp:all", "scale"], scale_factors=["2", "1/3"])
    again = RunConfig.from_json(json.loads(json.dumps(config.to_json())))
    assert again.to_json() == config.to_json()
    assert config.scale_factors == (Fraction(2), Fraction(1, 3))


def test_load_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(UsageError):
        RunConfig.load(path)


def test_run_collects_verdicts():
    report = run(config_for())
    assert report.ok
    assert [(v["property"], v["passed"]) for v in report.verdicts] == [("dsic", True), ("mmic", False)]
    assert report.verdicts[0]["mechanism"] == "SecondPrice"
    assert report.timings == {}


def test_deterministic_reports_are_identical(tmp_path):
    first = run(config_for(output=str(tmp_path / "a.json")))
    second = run(config_for(output=str(tmp_path / "b.json")))
    a = (tmp_path / "a.json").read_text(encoding="utf-8")
    b = (tmp_path / "b.json").read_text(encoding="utf-8")
    assert a.replace("a.json", "b.json") == b
    assert first.verdicts == second.verdicts


def test_report_round_trip():
    report = run(config_for(properties=["dsic", "mmic", "ctpa", "anon"]))
    again = Report.loads(report.dumps())
    assert again.to_json() == json.loads(report.dumps())
    assert report.dumps().endswith("\n")


def test_report_schema_version():
    with pytest.raises(UsageError):
        Report.from_json({"schema_version": "0"})


def test_operational_errors_are_recorded():
    config = RunConfig(bounds=[BoundsJob("efficiency", {"v1": 1.0, "v2": 2.0})], deterministic=True)
    report = run(config)
    assert not report.ok
    assert report.errors[0].startswith("efficiency:")


def test_bounds_jobs():
    config = RunConfig(bounds=[
        BoundsJob("efficiency", {"v1": 19.8, "v2": 2.4, "u_ratio": 0.842}),
        BoundsJob("lp", {"grid": "1:3/2:4"}),
    ], deterministic=True)
    report = run(config)
    assert report.ok
    efficiency, lp = report.bounds
    assert efficiency["check"]["contradicts"]
    assert 0.83 < efficiency["threshold"]["threshold"] <= 0.842
    assert lp["status"] == "optimal" and lp["variables"] == 40


def test_impossibility_suite():
    """Sur la grille, seuls les mécanismes qui n'allouent jamais passent DSIC, MMIC et OCA(1)."""
    grid = GridSpec.parse("0..4:1/2", max_profile_size=2, max_fake_bids=1)
    report = suite_deterministic_impossibility(["0", "1/2", "1", "2", "inf"], grid, deterministic=True)
    assert report.ok, report.errors
    passers = report.suites[0]["triple_passers"]
    assert passers
    for entry in passers:
        assert entry["trivial"] and entry["zero_revenue"]
        assert entry["mechanism"] == "Trivial" or "r=inf" in entry["mechanism"]
    names = {m.name for m in impossibility_mechanisms([Fraction(1)])}
    assert not any(name.startswith("NonAnonymousPostedBurn") for name in names)


def test_never_allocates():
    grid = GridSpec.parse("0..2:1", max_profile_size=2, max_fake_bids=0)
    assert never_allocates(make_mechanism(MechanismSpec(Family.TRIVIAL)), grid)
    assert not never_allocates(make_mechanism(MechanismSpec(Family.FIRST_PRICE)), grid)


def test_randomized_conditions_suite():
    grid = GridSpec.parse("0..2:1/2", max_profile_size=2, max_fake_bids=1)
    report = suite_randomized_conditions(grid, reserves=(0, 1), deterministic=True)
    assert report.ok, report.errors
    summary = {entry["mechanism"]: entry for entry in report.suites[0]["mechanisms"]}
    assert summary["Trivial"]["incentive_compatible"]
    assert summary["SecondPrice"]["ctpa"] == "1"
    assert not summary["SecondPrice"]["incentive_compatible"]


def test_paper_suite():
    report = suite_paper_tables()
    assert report.ok, report.errors
    rows = {row["name"]: row for row in report.suites[0]["rows"]}
    assert rows["third_price_scp"]["actual"] == {"lhs": "1/4", "rhs": "1/2"}
    assert 0.91421 <= rows["allocation_bound"]["actual"] <= 0.91430
