import json

import numpy as np
import pytest
from click.testing import CliRunner

from conftest import ECHO_LAST_VALUE_PY, fredmd_bytes, write_python_adapter
from dbits.cli import main
from dbits.store import Store

SMALL_FLAGS = ["--lookback", "8", "--horizons", "1,2", "--season", "2"]


def write_source(tmp_path, name="2024-03.csv", rows=24):
    rng = np.random.default_rng(2)
    series = {
        "RAMP": list(3.0 + 0.5 * np.arange(rows)),
        "WALK": list(rng.normal(size=rows).cumsum() + 40.0),
    }
    path = tmp_path / name
    path.write_bytes(fredmd_bytes(series, {"RAMP": 1, "WALK": 1}))
    return path


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def store_root(tmp_path):
    return str(tmp_path / "store")


def run_ok(runner, args, **kwargs):
    result = runner.invoke(main, args, catch_exceptions=False, **kwargs)
    assert result.exit_code == 0, result.output
    return result


class TestIngest:
    def test_stores_new_vintage(self, runner, store_root, tmp_path):
        source = write_source(tmp_path)
        result = run_ok(runner, ["ingest", "--source", str(source), "--store", store_root])
        assert "2024-03" in result.output
        assert "24 months x 2 series" in result.output
        assert Store(store_root).latest_vintage().id == "2024-03"

    def test_second_ingest_reports_no_change(self, runner, store_root, tmp_path):
        source = write_source(tmp_path)
        run_ok(runner, ["ingest", "--source", str(source), "--store", store_root])
        result = run_ok(runner, ["ingest", "--source", str(source), "--store", store_root])
        assert "no new vintage" in result.output

    def test_missing_source_fails_cleanly(self, runner, store_root, tmp_path):
        result = runner.invoke(
            main, ["ingest", "--source", str(tmp_path / "nope.csv"), "--store", store_root]
        )
        assert result.exit_code != 0
        assert "fetch failed" in result.output

    def test_unparsable_source_fails_cleanly(self, runner, store_root, tmp_path):
        bad = tmp_path / "2024-01.csv"
        bad.write_bytes(b"not,a,panel\n1,2,3\n")
        result = runner.invoke(main, ["ingest", "--source", str(bad), "--store", store_root])
        assert result.exit_code != 0
        assert "does not parse" in result.output

    def test_env_var_selects_store(self, runner, tmp_path):
        source = write_source(tmp_path)
        env_store = str(tmp_path / "env_store")
        run_ok(
            runner,
            ["ingest", "--source", str(source)],
            env={"DBITS_STORE": env_store},
        )
        assert Store(env_store).latest_vintage() is not None


class TestEval:
    def seed(self, runner, store_root, tmp_path):
        source = write_source(tmp_path)
        run_ok(runner, ["ingest", "--source", str(source), "--store", store_root])

    def test_eval_commits_run(self, runner, store_root, tmp_path):
        self.seed(runner, store_root, tmp_path)
        result = run_ok(runner, ["eval", "--store", store_root, *SMALL_FLAGS])
        assert "committed" in result.output
        store = Store(store_root)
        assert len(store.list_runs()) == 1
        assert store.query_records()

    def test_repeat_eval_is_idempotent(self, runner, store_root, tmp_path):
        self.seed(runner, store_root, tmp_path)
        run_ok(runner, ["eval", "--store", store_root, *SMALL_FLAGS])
        result = run_ok(runner, ["eval", "--store", store_root, *SMALL_FLAGS])
        assert "already present" in result.output
        assert len(Store(store_root).list_runs()) == 1

    def test_eval_without_vintage_fails(self, runner, store_root):
        result = runner.invoke(main, ["eval", "--store", store_root, *SMALL_FLAGS])
        assert result.exit_code != 0
        assert "ingest" in result.output

    def test_eval_rejects_inconsistent_flags(self, runner, store_root, tmp_path):
        self.seed(runner, store_root, tmp_path)
        result = runner.invoke(
            main, ["eval", "--store", store_root, "--lookback", "8"]  # season stays 12
        )
        assert result.exit_code != 0
        assert "lookback" in result.output

    def test_eval_from_config_file(self, runner, store_root, tmp_path):
        self.seed(runner, store_root, tmp_path)
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"lookback": 8, "horizons": [1, 2], "season": 2}))
        result = run_ok(runner, ["eval", "--store", store_root, "--config", str(cfg_path)])
        assert "committed" in result.output


class TestRank:
    def test_rank_table(self, runner, store_root, tmp_path):
        source = write_source(tmp_path)
        run_ok(runner, ["ingest", "--source", str(source), "--store", store_root])
        run_ok(runner, ["eval", "--store", store_root, *SMALL_FLAGS])
        result = run_ok(
            runner, ["rank", "--metric", "MAE", "--horizon", "1", "--store", store_root]
        )
        lines = [l for l in result.output.splitlines() if l.strip()]
        assert lines[0].split() == ["rank", "model", "score", "n"]
        assert lines[1].split()[0] == "1"
        assert len(lines) == 1 + 6  # header + six builtins

    def test_rank_empty_context_fails(self, runner, store_root):
        Store(store_root)
        result = runner.invoke(
            main, ["rank", "--metric", "MAE", "--horizon", "1", "--store", store_root]
        )
        assert result.exit_code != 0


class TestAdapterTest:
    def test_passing_adapter(self, runner, tmp_path):
        d = write_python_adapter(tmp_path / "echo", ECHO_LAST_VALUE_PY, "echo_stub", window_len=8)
        result = run_ok(runner, ["adapter-test", str(d), *SMALL_FLAGS])
        assert result.output.count("PASS") == 3
        assert "passed 3/3" in result.output

    def test_failing_adapter(self, runner, tmp_path):
        d = write_python_adapter(tmp_path / "bad", "import sys; sys.exit(1)", "bad", window_len=8)
        result = runner.invoke(main, ["adapter-test", str(d), *SMALL_FLAGS])
        assert result.exit_code != 0
        assert result.output.count("FAIL") == 3

    def test_invalid_manifest(self, runner, tmp_path):
        d = tmp_path / "empty"
        d.mkdir()
        result = runner.invoke(main, ["adapter-test", str(d), *SMALL_FLAGS])
        assert result.exit_code != 0
        assert "manifest invalid" in result.output

    def test_window_mismatch_reported(self, runner, tmp_path):
        d = write_python_adapter(tmp_path / "w", ECHO_LAST_VALUE_PY, "w96", window_len=96)
        result = runner.invoke(main, ["adapter-test", str(d), *SMALL_FLAGS])
        assert result.exit_code != 0
        assert "96" in result.output


class TestRegister:
    def test_register_builtin(self, runner, store_root):
        result = run_ok(runner, ["register", "--builtin", "linear_trend", "--store", store_root])
        assert "registered builtin linear_trend" in result.output
        models = Store(store_root).list_models()
        assert [m.model_id for m in models] == ["linear_trend"]

    def test_register_all_builtins(self, runner, store_root):
        run_ok(runner, ["register", "--builtin", "all", "--store", store_root])
        assert len(Store(store_root).list_models()) == 6

    def test_duplicate_builtin_fails(self, runner, store_root):
        run_ok(runner, ["register", "--builtin", "linear_trend", "--store", store_root])
        result = runner.invoke(main, ["register", "--builtin", "linear_trend", "--store", store_root])
        assert result.exit_code != 0

    def test_unknown_builtin(self, runner, store_root):
        result = runner.invoke(main, ["register", "--builtin", "nope", "--store", store_root])
        assert result.exit_code != 0
        assert "unknown builtin" in result.output

    def test_register_adapter_after_conformance(self, runner, store_root, tmp_path):
        d = write_python_adapter(tmp_path / "echo", ECHO_LAST_VALUE_PY, "echo_stub", window_len=8)
        result = run_ok(runner, ["register", str(d), "--store", store_root, *SMALL_FLAGS])
        assert "registered adapter echo_stub" in result.output
        models = Store(store_root).list_models()
        assert [m.model_id for m in models] == ["echo_stub"]

    def test_failing_adapter_not_registered(self, runner, store_root, tmp_path):
        d = write_python_adapter(tmp_path / "bad", "import sys; sys.exit(1)", "bad", window_len=8)
        result = runner.invoke(main, ["register", str(d), "--store", store_root, *SMALL_FLAGS])
        assert result.exit_code != 0
        assert Store(store_root).list_models() == []

    def test_requires_exactly_one_target(self, runner, store_root, tmp_path):
        result = runner.invoke(main, ["register", "--store", store_root])
        assert result.exit_code != 0
        d = write_python_adapter(tmp_path / "echo", ECHO_LAST_VALUE_PY, "echo_stub", window_len=8)
        result = runner.invoke(
            main, ["register", str(d), "--builtin", "linear_trend", "--store", store_root]
        )
        assert result.exit_code != 0


class TestShowConfig:
    def test_defaults(self, runner):
        result = run_ok(runner, ["show-config"])
        doc = json.loads(result.output)
        assert doc["lookback"] == 96
        assert doc["horizons"] == [12, 24, 36, 48, 60]

    def test_flags_override(self, runner):
        result = run_ok(runner, ["show-config", "--horizons", "6,12", "--stride", "2"])
        doc = json.loads(result.output)
        assert doc["horizons"] == [6, 12]
        assert doc["stride"] == 2

    def test_invalid_combination_fails(self, runner):
        result = runner.invoke(main, ["show-config", "--lookback", "4"])
        assert result.exit_code != 0
