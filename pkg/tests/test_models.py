import json
from datetime import timedelta

import pytest

from orbitlab.models import (
    HMEstimate,
    ReproductionReport,
    RunConfig,
    RunRecord,
    ShrinkingTargetReport,
    ensure_output_directories,
    write_output_file,
)
from orbitlab.utils.error_handler import ConfigParseError, ValidationError


class TestRunConfig:
    def test_gap_rule(self):
        assert RunConfig.from_toml('experiment = "dw-fraction"\n').gap_rule == "nonincreasing"
        cfg = RunConfig.from_toml('experiment = "dw-fraction"\ngap_rule = "block-max"\n')
        assert cfg.gap_rule == "block-max"
        with pytest.raises(ValidationError):
            RunConfig.from_toml('experiment = "dw-fraction"\ngap_rule = "eventually"\n')

    def test_defaults_and_overrides(self):
        cfg = RunConfig.from_toml('experiment = "orbit-density"\nhorizon = 150\nK = 8\n', {"horizon": 40, "seed": None})
        assert cfg.horizon == 40
        assert cfg.K == 8
        assert cfg.sequence_id == "ex8.3:a=1-1/n"
        assert cfg.precision is None

    def test_canonical_form_parses_back(self):
        cfg = RunConfig.from_toml('experiment = "dw-fraction"\nz0 = "0.5j"\ntol = 1e-4\nprecision = 400\n')
        assert RunConfig.from_toml(cfg.canonical()) == cfg
        assert cfg.base_point == 0.5j

    def test_unknown_key(self):
        with pytest.raises(ValidationError):
            RunConfig.from_toml('experiment = "growth"\ncolour = 3\n')

    def test_unknown_experiment(self):
        with pytest.raises(ValidationError):
            RunConfig.from_toml('experiment = "lyapunov"\n')

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            RunConfig.from_toml('experiment = "growth"\ntol = 2.0\n')
        with pytest.raises(ValidationError):
            RunConfig.from_toml('experiment = "growth"\nz0 = "north"\n')

    def test_syntax_error_position(self):
        with pytest.raises(ConfigParseError) as info:
            RunConfig.from_toml('experiment = "growth"\n\nhorizon = [1,\n')
        assert info.value.line is not None
        assert "line" in info.value.user_message


def test_report_save_splits_metadata(tmp_path):
    report = ReproductionReport(example_id="demo", metadata={"wall_time": 1.5})
    report.check("holds", True)
    report.check("fails", False, "off by one")
    assert not report.passed
    path = report.save(tmp_path / "demo.json")
    saved = json.loads(path.read_text())
    assert "metadata" not in saved
    assert saved["checks"][1]["detail"] == "off by one"
    assert json.loads((tmp_path / "demo.meta.json").read_text()) == {"wall_time": 1.5}
    loaded = ReproductionReport.load(path)
    assert loaded.example_id == "demo"
    assert [c.passed for c in loaded.checks] == [True, False]


def test_hm_estimate_json():
    estimate = HMEstimate(value=0.25, std_error=0.01, n_samples=100, method="walk-on-spheres", seed=4)
    assert json.loads(estimate.to_json()) == {
        "method": "walk-on-spheres", "n_samples": 100, "seed": 4, "std_error": 0.01, "value": 0.25,
    }
    with pytest.raises(Exception):
        HMEstimate(value=1.5)


def test_limsup_fraction_reads_k():
    report = ShrinkingTargetReport(
        epsilon_description="1/n", max_index=2, overlaps=[], all_within_bound=True, disjointness_holds=True,
        horizon=10, n_samples=4, k=2, seed=0, visit_fractions={1: 0.75, 2: 0.5},
    )
    assert report.limsup_fraction == 0.5


def test_output_directories(tmp_path):
    root = ensure_output_directories(tmp_path / "out")
    assert all((root / name).is_dir() for name in ("reports", "plots", "samples"))


class TestThresholdChecks:
    def test_unreachable_miss_is_inconclusive(self):
        report = ReproductionReport(example_id="demo")
        assert not report.check_threshold("score above 0.9", 0.47, 0.9, reachable=False)
        check = report.checks[0]
        assert not check.passed and check.inconclusive
        assert check.status == "INCONCLUSIVE"
        assert report.passed
        assert [c.name for c in report.inconclusive_checks] == ["score above 0.9"]

    def test_reachable_miss_fails(self):
        report = ReproductionReport(example_id="demo")
        report.check_threshold("score above 0.9", 0.47, 0.9, reachable=True)
        assert report.checks[0].status == "FAIL"
        assert not report.passed
        assert report.failed_checks == report.checks

    def test_hit_passes_either_way(self):
        report = ReproductionReport(example_id="demo")
        assert report.check_threshold("score above 0.9", 0.95, 0.9, reachable=False)
        assert report.checks[0].status == "PASS"
        assert report.checks[0].detail == "0.950 vs > 0.9"


def test_output_file_is_replaced_whole(tmp_path):
    target = tmp_path / "nested" / "report.json"
    write_output_file(target, "first\n")
    write_output_file(target, "second\n")
    assert target.read_text() == "second\n"
    assert [p.name for p in target.parent.iterdir()] == ["report.json"]


def test_run_record_timestamp_is_timezone_aware():
    record = RunRecord(experiment="growth", sequence_id="ex8.2", params={}, seed=None, results={}, wall_time=0.0)
    assert record.timestamp.tzinfo is not None
    assert record.timestamp.utcoffset() == timedelta(0)
