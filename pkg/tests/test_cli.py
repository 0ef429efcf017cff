import json

import pytest

from repclf.cli import main
from repclf.modelio import load_dataset


@pytest.fixture(scope="module")
def config_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "config.json"
    from repclf import PipelineConfig, SegmentationParams
    import dataclasses

    config = dataclasses.replace(
        PipelineConfig(num_kernels=400),
        segmentation=SegmentationParams(expected_reps=8),
    )
    path.write_text(json.dumps(config.to_dict(), indent=2))
    return path


@pytest.fixture(scope="module")
def workspace(tmp_path_factory, config_file):
    """synth -> ingest -> train, shared by the command tests."""
    root = tmp_path_factory.mktemp("ws")
    corpus = root / "corpus"
    code = main([
        "synth", "--out", str(corpus), "--participants", "3", "--reps", "8",
        "--synth-seed", "3",
    ])
    assert code == 0
    dataset = root / "data.rcds"
    code = main([
        "ingest", str(corpus / "manifest.csv"), "--out", str(dataset),
        "--config", str(config_file),
    ])
    assert code == 0
    model = root / "model.rcmd"
    code = main([
        "train", str(dataset), "--out", str(model), "--config", str(config_file),
    ])
    assert code == 0
    return {"root": root, "corpus": corpus, "dataset": dataset, "model": model}


class TestPipelineCommands:
    def test_ingest_built_expected_reps(self, workspace):
        ds = load_dataset(workspace["dataset"])
        assert ds.n_samples == 3 * 4 * 8
        assert ds.length == 161
        assert ds.n_channels == 16

    def test_predict_training_clips_agree_with_labels(self, workspace, capsys):
        total = 0
        agree = 0
        for clip_dir in sorted(workspace["corpus"].iterdir()):
            if not clip_dir.is_dir():
                continue
            label = clip_dir.name.split("_", 1)[1]
            code = main(["predict", str(workspace["model"]), str(clip_dir)])
            assert code == 0
            result = json.loads(capsys.readouterr().out)
            assert result["n_repetitions"] == 8
            total += result["n_repetitions"]
            agree += sum(1 for rep in result["repetitions"] if rep["label"] == label)
        assert total == 96
        assert agree / total >= 0.99

    def test_predict_rep_fields(self, workspace, capsys):
        clip = next(d for d in sorted(workspace["corpus"].iterdir()) if d.is_dir())
        assert main(["predict", str(workspace["model"]), str(clip)]) == 0
        result = json.loads(capsys.readouterr().out)
        rep = result["repetitions"][0]
        assert {"rep_index", "start_frame", "end_frame", "label", "scores"} <= set(rep)
        assert len(rep["scores"]) == 4
        assert result["config_hash"]

    def test_predict_refuses_mismatched_config(self, workspace, tmp_path, capsys):
        from repclf import PipelineConfig

        other = PipelineConfig(frame_step=2)
        other_path = tmp_path / "other.json"
        other_path.write_text(json.dumps(other.to_dict()))
        clip = next(d for d in sorted(workspace["corpus"].iterdir()) if d.is_dir())
        code = main([
            "predict", str(workspace["model"]), str(clip), "--config", str(other_path),
        ])
        capsys.readouterr()
        assert code == 2

    def test_evaluate_json_and_csv(self, workspace, config_file, capsys):
        code = main([
            "evaluate", str(workspace["dataset"]), "--config", str(config_file),
            "--splits", "2", "--seeds", "0,1",
        ])
        assert code == 0
        out = capsys.readouterr().out
        report = json.loads(out)
        assert len(report["splits"]) == 2
        code = main([
            "evaluate", str(workspace["dataset"]), "--config", str(config_file),
            "--splits", "1", "--seeds", "0", "--format", "csv",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("split,seed,")


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        assert main(["train"]) == 1  # missing required argument
        capsys.readouterr()

    def test_unknown_command_is_1(self, capsys):
        assert main(["frobnicate"]) == 1
        capsys.readouterr()

    def test_corrupted_model_magic_is_2(self, workspace, tmp_path, capsys):
        bad = tmp_path / "bad.rcmd"
        blob = bytearray(workspace["model"].read_bytes())
        blob[:4] = b"NOPE"
        bad.write_bytes(bytes(blob))
        clip = next(d for d in sorted(workspace["corpus"].iterdir()) if d.is_dir())
        assert main(["predict", str(bad), str(clip)]) == 2
        capsys.readouterr()

    def test_bad_seeds_flag_is_1(self, workspace, config_file, capsys):
        code = main([
            "evaluate", str(workspace["dataset"]), "--config", str(config_file),
            "--seeds", "zero,one",
        ])
        assert code == 1
        capsys.readouterr()

    def test_empty_clip_dir_is_2(self, workspace, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["predict", str(workspace["model"]), str(empty)]) == 2
        capsys.readouterr()

    def test_help_is_0(self, capsys):
        assert main(["--help"]) == 0
        capsys.readouterr()


class TestWorkersFlag:
    def test_workers_option_accepted(self, tmp_path, capsys):
        out = tmp_path / "corpus"
        assert main(["--workers", "1", "synth", "--out", str(out),
                     "--participants", "1", "--reps", "3"]) == 0
        capsys.readouterr()

    def test_workers_must_be_positive(self, capsys):
        assert main(["--workers", "0", "synth", "--out", "x"]) == 1
        capsys.readouterr()
