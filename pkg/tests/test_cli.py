"""Command-line surface: generation, eval report, bench table, flow debug."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from lens.cli.main import main


@pytest.fixture
def runner():
    return CliRunner()


class TestGenData:
    def test_generates_and_reports(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["--seed", "5", "--json", "gen-data", "--out", str(tmp_path / "ds"),
             "--groups", "1", "--clips", "2"],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["clips"] == 8
        assert (tmp_path / "ds" / "dataset.json").exists()

    def test_same_seed_byte_identical(self, runner, tmp_path):
        for name in ("a", "b"):
            assert runner.invoke(
                main,
                ["--seed", "9", "gen-data", "--out", str(tmp_path / name),
                 "--groups", "1", "--clips", "1"],
            ).exit_code == 0
        files_a = sorted((tmp_path / "a").rglob("*.lclip"))
        files_b = sorted((tmp_path / "b").rglob("*.lclip"))
        for fa, fb in zip(files_a, files_b):
            assert hashlib.sha256(fa.read_bytes()).digest() == \
                hashlib.sha256(fb.read_bytes()).digest()


class TestBench:
    def test_rows_and_ratios(self, runner):
        result = runner.invoke(
            main,
            ["--json", "bench", "--cost-ms", "40", "--cloud-cost-ms", "20",
             "--window-s", "1.0", "--skip", "1"],
        )
        assert result.exit_code == 0, result.output
        rows = json.loads(result.output)["rows"]
        assert len(rows) == 8
        by_tag = {r["row"]: r for r in rows}
        assert set(by_tag) == {"J", "J+SF", "J+R", "J+SF+R", "C", "C+SF", "C+R",
                               "C+SF+R"}
        assert by_tag["J"]["speedup"] == pytest.approx(1.0)
        assert by_tag["J+SF"]["speedup"] == pytest.approx(2.0, rel=0.1)
        assert by_tag["C+SF"]["speedup"] == pytest.approx(2.0, rel=0.1)

    def test_window_too_short_rejected(self, runner):
        result = runner.invoke(main, ["bench", "--window-s", "0.2"])
        assert result.exit_code != 0


class TestFlowCommand:
    def test_flow_dump_and_viz(self, runner, tmp_path):
        gen = runner.invoke(
            main, ["--seed", "3", "gen-data", "--out", str(tmp_path / "ds"),
                   "--groups", "1", "--clips", "1"],
        )
        assert gen.exit_code == 0
        clip_path = next((tmp_path / "ds" / "theft").glob("*.lclip"))
        out = tmp_path / "f.lflo"
        viz = tmp_path / "f.png"
        result = runner.invoke(
            main, ["--json", "flow", str(clip_path), "--index", "40",
                   "--out", str(out), "--viz", str(viz)],
        )
        assert result.exit_code == 0, result.output
        assert out.exists() and viz.exists()
        from lens.optflow import load_flow

        flow = load_flow(out)
        assert flow.width == 64 and flow.height == 64

    def test_index_out_of_range(self, runner, tmp_path):
        runner.invoke(main, ["--seed", "3", "gen-data", "--out",
                             str(tmp_path / "ds"), "--groups", "1", "--clips", "1"])
        clip_path = next((tmp_path / "ds" / "theft").glob("*.lclip"))
        result = runner.invoke(main, ["flow", str(clip_path), "--index", "500"])
        assert result.exit_code != 0


class TestTrainAndEval:
    def test_epochs_zero_writes_initialized_checkpoints(self, runner, tmp_path,
                                                        corpus_dir):
        result = runner.invoke(
            main,
            ["train-streams", "--dataset", str(corpus_dir),
             "--out", str(tmp_path / "m0"), "--epochs", "0"],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "m0" / "spatial.lmdl").exists()
        assert (tmp_path / "m0" / "temporal.lmdl").exists()

    def test_eval_report_deterministic(self, runner, trained, corpus_dir):
        args = ["eval", "--dataset", str(corpus_dir),
                "--models", str(trained.models_dir)]
        first = runner.invoke(main, args)
        second = runner.invoke(main, args)
        assert first.exit_code == 0, first.output
        assert first.output == second.output
        report = json.loads(first.output)
        assert set(report["confusion"]) == {"spatial", "temporal", "fused"}
        assert 0.0 <= report["fused_accuracy"] <= 1.0
        assert report["classes"] == ["theft", "assault", "shooting", "no_action"]

    def test_eval_fused_beats_streams_on_corpus(self, runner, trained, corpus_dir):
        result = runner.invoke(
            main, ["eval", "--dataset", str(corpus_dir),
                   "--models", str(trained.models_dir)],
        )
        report = json.loads(result.output)
        assert report["fused_accuracy"] >= report["temporal_accuracy"]

    def test_train_svm_writes_checkpoint(self, runner, trained, corpus_dir,
                                         tmp_path):
        # copy stream checkpoints so the fusion model of the shared fixture
        # is not overwritten
        import shutil

        models = tmp_path / "models"
        models.mkdir()
        for name in ("spatial.lmdl", "spatial.lmdl.json", "temporal.lmdl",
                     "temporal.lmdl.json"):
            shutil.copy(trained.models_dir / name, models / name)
        result = runner.invoke(
            main,
            ["--json", "train-svm", "--models", str(models),
             "--dataset", str(corpus_dir), "--heldout-groups", "1",
             "--trials", "2"],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert (models / "fusion.lsvm").exists()
        assert 0.0 <= payload["cv_mean"] <= 1.0
