import json
from pathlib import Path

import pytest

from clinfusion import SynthSpec, gen_synth
from clinfusion.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    spec = SynthSpec.from_json_file(FIXTURES / "synth_small.json")
    gen_synth(spec, out)
    return out


def write_config(tmp_path, synth_dir, **train_overrides):
    train_block = {
        "stage_learning_rates": [1e-3, 1e-4, 1e-5],
        "epochs_per_stage": [2, 1, 1],
        "batch_size": 16,
        "seed": 3,
    }
    train_block.update(train_overrides)
    cfg = {
        "train_data": str(synth_dir / "train.csv"),
        "test_data": str(synth_dir / "test.csv"),
        "output_dir": str(tmp_path / "run"),
        "class_names": [
            "benign_mass",
            "malignant_mass",
            "benign_calcification",
            "malignant_calcification",
        ],
        "image_dim": 16,
        "variant": {"kind": "concat", "proj_dim": 8, "hidden_dim": 12},
        "train": train_block,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg, indent=2))
    return path


class TestGenSynth:
    def test_writes_both_splits(self, tmp_path, capsys):
        code = main(
            ["gen-synth", "--spec", str(FIXTURES / "synth_small.json"),
             "--out", str(tmp_path / "d")]
        )
        assert code == 0
        assert (tmp_path / "d" / "train.csv").exists()
        assert (tmp_path / "d" / "test.csv").exists()
        assert "train.csv" in capsys.readouterr().out

    def test_missing_spec_is_config_error(self, tmp_path, capsys):
        code = main(["gen-synth", "--spec", str(tmp_path / "no.json"), "--out", str(tmp_path)])
        assert code == 3
        assert "error:" in capsys.readouterr().err


class TestTrain:
    def test_train_writes_model_and_history(self, tmp_path, synth_dir, capsys):
        cfg = write_config(tmp_path, synth_dir)
        assert main(["train", "--config", str(cfg)]) == 0
        assert (tmp_path / "run" / "model.clf").exists()
        history = (tmp_path / "run" / "history.jsonl").read_text().splitlines()
        assert len(history) == 4  # one record per epoch
        assert {"epoch", "stage", "learning_rate"} <= set(json.loads(history[0]))

    def test_same_config_twice_byte_identical_model(self, tmp_path, synth_dir):
        cfg = write_config(tmp_path, synth_dir)
        assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "r1")]) == 0
        assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "r2")]) == 0
        b1 = (tmp_path / "r1" / "model.clf").read_bytes()
        b2 = (tmp_path / "r2" / "model.clf").read_bytes()
        assert b1 == b2

    def test_seed_override_changes_model(self, tmp_path, synth_dir):
        cfg = write_config(tmp_path, synth_dir)
        main(["train", "--config", str(cfg), "--out", str(tmp_path / "r1")])
        main(["train", "--config", str(cfg), "--out", str(tmp_path / "r2"), "--seed", "99"])
        assert (tmp_path / "r1" / "model.clf").read_bytes() != (
            tmp_path / "r2" / "model.clf"
        ).read_bytes()

    def test_variant_override(self, tmp_path, synth_dir):
        from clinfusion import load_model

        cfg = write_config(tmp_path, synth_dir)
        main(["train", "--config", str(cfg), "--out", str(tmp_path / "rx"),
              "--variant", "cross-attention"])
        model = load_model(tmp_path / "rx" / "model.clf")
        assert model.variant.kind == "cross_attention"

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["train", "--config", str(tmp_path / "nope.json")]) == 3


@pytest.fixture(scope="module")
def trained(tmp_path_factory, synth_dir):
    tmp = tmp_path_factory.mktemp("trained")
    cfg = write_config(tmp, synth_dir)
    assert main(["train", "--config", str(cfg)]) == 0
    return tmp / "run" / "model.clf"


class TestEvaluate:

    def test_mask_p_zero_equals_no_flag(self, tmp_path, synth_dir, trained):
        data = str(synth_dir / "test.csv")
        assert main(["evaluate", "--model", str(trained), "--data", data,
                     "--out", str(tmp_path / "e1")]) == 0
        assert main(["evaluate", "--model", str(trained), "--data", data,
                     "--mask-p", "0", "--out", str(tmp_path / "e2")]) == 0
        assert (tmp_path / "e1" / "report.json").read_bytes() == (
            tmp_path / "e2" / "report.json"
        ).read_bytes()
        assert (tmp_path / "e1" / "summary.csv").read_bytes() == (
            tmp_path / "e2" / "summary.csv"
        ).read_bytes()

    def test_report_files_well_formed(self, tmp_path, synth_dir, trained, capsys):
        assert main(["evaluate", "--model", str(trained),
                     "--data", str(synth_dir / "test.csv"),
                     "--mask-p", "0.3", "--seed", "5",
                     "--out", str(tmp_path / "e")]) == 0
        report = json.loads((tmp_path / "e" / "report.json").read_text())
        assert report["sample_count"] == 120
        assert len(report["classes"]) == 4
        lines = (tmp_path / "e" / "summary.csv").read_text().splitlines()
        assert lines[0] == "class,auc_roc,auc_pr"
        assert lines[-1].startswith("macro,")
        assert "macro" in capsys.readouterr().out

    def test_bad_model_path_is_persistence_error(self, tmp_path, synth_dir):
        code = main(["evaluate", "--model", str(tmp_path / "no.clf"),
                     "--data", str(synth_dir / "test.csv"),
                     "--out", str(tmp_path / "e")])
        assert code == 7


class TestPredict:
    def test_prints_probabilities(self, tmp_path, synth_dir, capsys):
        cfg = write_config(tmp_path, synth_dir)
        main(["train", "--config", str(cfg)])
        capsys.readouterr()  # drain the train command's output
        code = main(["predict", "--model", str(tmp_path / "run" / "model.clf"),
                     "--data", str(synth_dir / "test.csv"), "--index", "2"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["id"] == "test-00002"
        probs = out["probabilities"]
        assert len(probs) == 4
        assert abs(sum(probs.values()) - 1.0) < 1e-9

    def test_unknown_id(self, tmp_path, synth_dir, capsys):
        cfg = write_config(tmp_path, synth_dir)
        main(["train", "--config", str(cfg)])
        code = main(["predict", "--model", str(tmp_path / "run" / "model.clf"),
                     "--data", str(synth_dir / "test.csv"), "--id", "nope"])
        assert code == 6


class TestGradcheck:
    def test_cross_attention_passes(self, capsys):
        code = main(["gradcheck", "--variant", "cross-attention", "--seeds", "2"])
        assert code == 0
        out = capsys.readouterr().out
        assert "max relative gradient error" in out
        assert float(out.strip().split()[-1]) <= 1e-4

    def test_threshold_violation_nonzero_exit(self, capsys):
        code = main(["gradcheck", "--variant", "concat", "--seeds", "1",
                     "--threshold", "1e-12"])
        assert code == 1

    def test_unknown_variant_is_config_error(self, capsys):
        assert main(["gradcheck", "--variant", "mega-fusion"]) == 3


class TestUsage:
    def test_unknown_subcommand_exit_2(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_no_arguments_exit_2(self, capsys):
        assert main([]) == 2

    def test_unknown_flag_exit_2(self, capsys):
        assert main(["gradcheck", "--variant", "concat", "--bogus", "1"]) == 2
