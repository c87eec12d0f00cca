from orbitlab.experiments import record_run
from show_runs import display_runs, load_run_summary


def test_missing_log(tmp_path):
    assert load_run_summary(tmp_path / "run_log.jsonl") is None
    assert display_runs(tmp_path / "run_log.jsonl") == 1


def test_summary(tmp_path, capsys):
    log = tmp_path / "run_log.jsonl"
    record_run("growth", "ex8.2", {}, None, {"persists": True}, 1.0, log)
    record_run("growth", "ex8.2", {}, None, {"persists": False}, 3.0, log)
    record_run("dw-fraction", "ex8.3:a=1-1/n", {}, 7, {"fraction": 0.98}, 2.0, log)
    summary = load_run_summary(log)
    assert summary["total_runs"] == 3
    growth = summary["experiments"]["growth"]
    assert growth["runs"] == 2
    assert growth["mean_wall_time"] == 2.0
    assert growth["last_outcome"] == "persists=False"
    assert display_runs(log) == 0
    assert "dw-fraction" in capsys.readouterr().out
