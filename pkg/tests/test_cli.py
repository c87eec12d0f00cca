import json
import threading

import pytest

import orbit_cli
from orbitlab.config import config
from orbitlab.models import ReproductionReport


@pytest.fixture(autouse=True)
def quiet_log_file(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "LOG_FILE", str(tmp_path / "orbitlab.log"))


async def test_list(capsys):
    assert await orbit_cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert "thmA" in out
    assert "shrinking-target" in out


async def test_no_command_is_a_usage_error():
    assert await orbit_cli.main([]) == 2


async def test_unknown_reproduction_id(capsys, tmp_path):
    assert await orbit_cli.main(["reproduce", "ex9.9", "--out-dir", str(tmp_path)]) == 2
    assert "list" in capsys.readouterr().err


async def test_unknown_flag():
    assert await orbit_cli.main(["reproduce", "thmA", "--fast"]) == 2


async def test_bad_toml_reports_position(capsys, tmp_path):
    run_file = tmp_path / "run.toml"
    run_file.write_text('experiment = "growth"\nhorizon = = 3\n')
    assert await orbit_cli.main(["run", "-c", str(run_file)]) == 2
    assert "line 2" in capsys.readouterr().err


async def test_unknown_key_rejected(tmp_path):
    run_file = tmp_path / "run.toml"
    run_file.write_text('experiment = "growth"\nhorizons = 3\n')
    assert await orbit_cli.main(["run", "-c", str(run_file)]) == 2


async def test_missing_config_file(tmp_path):
    assert await orbit_cli.main(["run", "-c", str(tmp_path / "absent.toml")]) == 2


async def test_precision_override_below_minimum(capsys, tmp_path):
    run_file = tmp_path / "run.toml"
    run_file.write_text('experiment = "dw-fraction"\nsequence_id = "ex8.3:a=1-1/n"\nn_samples = 4\n')
    code = await orbit_cli.main(
        ["run", "-c", str(run_file), "--horizon", "100", "--precision", "168", "--out-dir", str(tmp_path)]
    )
    assert code == 3
    assert "drop the precision override" in capsys.readouterr().err


async def test_run_cross_ratio(capsys, tmp_path):
    run_file = tmp_path / "run.toml"
    run_file.write_text('experiment = "cross-ratio"\nsequence_id = "ex8.1:a=1-1/n"\nzeta = "1/4"\n')
    code = await orbit_cli.main(["run", "-c", str(run_file), "--horizon", "30", "--out-dir", str(tmp_path)])
    assert code == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["horizon"] == 30
    assert printed["max_residual"] < 1e-10
    assert (tmp_path / "reports" / "run-cross-ratio.json").exists()
    assert (tmp_path / "run_log.jsonl").exists()


async def test_reproduce_quick(capsys, tmp_path):
    code = await orbit_cli.main(["reproduce", "loewner", "--quick", "--seed", "3", "--out-dir", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "[PASS] equality for inner maps" in out
    assert (tmp_path / "reports" / "loewner.json").exists()


def stub_reproduction(threads, passing):
    def fake(example_id, out_dir, seed, workers, quick):
        threads.append(threading.current_thread())
        report = ReproductionReport(example_id=example_id)
        report.check("holds", True)
        report.check_threshold("score above 0.9", 0.45, 0.9, reachable=False, detail="expected 0.44")
        if not passing:
            report.check_threshold("score above 0.4", 0.3, 0.4, reachable=True)
        return report

    return fake


async def test_reproduce_runs_off_the_event_loop(monkeypatch, capsys):
    threads = []
    monkeypatch.setattr(orbit_cli, "reproduce", stub_reproduction(threads, passing=True))
    assert await orbit_cli.main(["reproduce", "ex8.3"]) == 0
    assert threads and threads[0] is not threading.main_thread()
    out = capsys.readouterr().out
    assert "[INCONCLUSIVE] score above 0.9  (0.450 vs > 0.9; expected 0.44)" in out
    assert "ex8.3: 1 of 2 checks passed, 1 inconclusive" in out


async def test_reachable_threshold_miss_fails(monkeypatch, capsys):
    monkeypatch.setattr(orbit_cli, "reproduce", stub_reproduction([], passing=False))
    assert await orbit_cli.main(["reproduce", "ex8.3"]) == 1
    captured = capsys.readouterr()
    assert "[FAIL] score above 0.4" in captured.out
    assert "1 of 3 checks failed" in captured.err
