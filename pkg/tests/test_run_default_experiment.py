import sys
from pathlib import Path
from unittest.mock import patch

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))

import run_default_experiment

from src.experiment import StageError
from src.run_store import RunManifest


def test_default_config_is_shipped():
    assert run_default_experiment.DEFAULT_CONFIG.exists()


def test_prints_report_and_returns_its_code(tmp_path, capsys):
    manifest = RunManifest(name="demo", config_hash="abc", tool_version="0.1.0")
    manifest.suites["decay"] = {"passed": True}
    argv = ["run_default_experiment.py", "--out", str(tmp_path), "--threads", "2"]

    with (
        patch.object(sys, "argv", argv),
        patch("run_default_experiment.run", return_value=manifest) as mock_run,
    ):
        code = run_default_experiment.main()

    assert code == 0
    assert mock_run.call_args.kwargs == {"force": False, "threads": 2}
    assert "# Run report: demo" in capsys.readouterr().out


def test_stage_failure_returns_numerical_exit_code(tmp_path):
    argv = ["run_default_experiment.py", "--out", str(tmp_path)]

    with (
        patch.object(sys, "argv", argv),
        patch("run_default_experiment.run", side_effect=StageError("solve", "diverged")),
    ):
        assert run_default_experiment.main() == 3
