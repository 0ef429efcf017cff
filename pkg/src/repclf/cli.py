"""Command-line pipeline: synth, ingest, train, predict, evaluate.

Configuration lives in a single JSON file (every field of
``PipelineConfig``); common knobs can be overridden per invocation with
flags. Exit codes: 0 ok, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from . import modelio, rocket
from .errors import DataError, InvalidParamsError, NumericalError, PipelineError
from .evaluation import evaluate as run_evaluate
from .pipeline import PipelineConfig, build_dataset, predict_clip, train as run_train
from .pose import load_sequence, read_manifest
from .synth import SynthConfig, write_corpus


def _load_config(config_path: str | None, **overrides) -> PipelineConfig:
    config = PipelineConfig.from_file(config_path) if config_path else PipelineConfig()
    overrides = {k: v for k, v in overrides.items() if v is not None}
    seg_overrides = {}
    if "expected_reps" in overrides:
        seg_overrides["expected_reps"] = overrides.pop("expected_reps")
    if seg_overrides:
        config = dataclasses.replace(
            config, segmentation=dataclasses.replace(config.segmentation, **seg_overrides)
        )
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


_CONFIG_OPTIONS = [
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="Pipeline config JSON."),
    click.option("--frame-step", type=int, default=None, help="Take every n-th frame."),
    click.option("--target-len", type=int, default=None, help="Resampled repetition length."),
    click.option("--transform", type=click.Choice(["rocket", "minirocket"]), default=None),
    click.option("--num-kernels", type=int, default=None, help="Random kernel count."),
    click.option("--normalize/--no-normalize", default=None,
                 help="Per-channel z-normalization of each repetition (ablation only)."),
    click.option("--seed", "transform_seed", type=int, default=None,
                 help="Feature-transform seed."),
]


def _with_config_options(fn):
    for opt in reversed(_CONFIG_OPTIONS):
        fn = opt(fn)
    return fn


@click.group()
@click.option("--workers", type=int, default=None,
              help="Worker threads for the feature transforms.")
def cli(workers):
    if workers is not None:
        if workers < 1:
            raise click.UsageError("--workers must be >= 1")
        rocket.set_num_threads(workers)


@cli.command()
@click.option("--out", required=True, type=click.Path(file_okay=False),
              help="Output corpus directory.")
@click.option("--participants", type=int, default=10, show_default=True)
@click.option("--reps", type=int, default=10, show_default=True)
@click.option("--period", type=float, default=3.0, show_default=True,
              help="Base repetition period in seconds.")
@click.option("--amplitude", type=float, default=80.0, show_default=True)
@click.option("--noise-sd", type=float, default=3.0, show_default=True)
@click.option("--fps", type=float, default=30.0, show_default=True)
@click.option("--synth-seed", "seed", type=int, default=0, show_default=True)
def synth(out, participants, reps, period, amplitude, noise_sd, fps, seed):
    """Generate a synthetic keypoint corpus with a manifest."""
    config = SynthConfig(
        participants=participants,
        reps_per_clip=reps,
        rep_period_s=period,
        amplitude_px=amplitude,
        noise_sd_px=noise_sd,
        fps=fps,
        seed=seed,
    )
    manifest = write_corpus(out, config)
    click.echo(f"wrote corpus for {participants} participants to {out}")
    click.echo(f"manifest: {manifest}")


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Output dataset file.")
@click.option("--expected-reps", type=int, default=None,
              help="Warn when a clip segments into a different count.")
@_with_config_options
def ingest(manifest, out, expected_reps, config_path, **overrides):
    """Segment manifest clips into a dataset of fixed-length repetitions."""
    config = _load_config(config_path, expected_reps=expected_reps, **overrides)
    entries = read_manifest(manifest)
    clips = []
    for entry in entries:
        try:
            clips.append(
                load_sequence(
                    entry.path,
                    clip_id=entry.clip_id,
                    participant_id=entry.participant_id,
                    class_label=entry.class_label,
                    fps=entry.fps,
                    max_gap=config.max_gap,
                )
            )
        except PipelineError as exc:
            raise DataError(f"clip {entry.clip_id!r}: {exc}") from exc
    data = build_dataset(clips, config, log=click.echo)
    modelio.save_dataset(out, data, config_hash=config.config_hash())
    click.echo(
        f"dataset: {data.n_samples} repetitions, {data.n_channels} channels, "
        f"length {data.length} -> {out}"
    )


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Output model file.")
@_with_config_options
def train(dataset, out, config_path, **overrides):
    """Fit the transform, scaler and classifier on the full dataset."""
    config = _load_config(config_path, **overrides)
    data = modelio.load_dataset(dataset)
    model = run_train(data, config)
    modelio.save_model(out, model)
    click.echo(
        f"model: transform={config.transform} alpha={model.classifier.ridge_.alpha_:g} "
        f"classes={[str(c) for c in model.classifier.classes_]} -> {out}"
    )


@cli.command()
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.argument("clip_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Refuse to run if this config differs from the model's.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON result here instead of stdout.")
def predict(model, clip_dir, config_path, out):
    """Segment one keypoint clip and classify each repetition."""
    trained = modelio.load_model(model)
    if config_path is not None:
        supplied = PipelineConfig.from_file(config_path)
        if supplied.config_hash() != trained.config_hash:
            raise DataError(
                "supplied config does not match the model's config "
                f"({supplied.config_hash()[:12]} != {trained.config_hash[:12]})"
            )
    seq = load_sequence(clip_dir, max_gap=trained.config.max_gap)
    result = predict_clip(trained, seq)
    blob = json.dumps(result, indent=2)
    if out:
        Path(out).write_text(blob + "\n")
        click.echo(f"predictions -> {out}")
    else:
        click.echo(blob)


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--splits", "n_splits", type=int, default=None,
              help="Number of grouped splits (default: one per seed).")
@click.option("--seeds", type=str, default=None,
              help="Comma-separated split seeds, e.g. '0,1,2'.")
@click.option("--ratio", type=float, default=None, help="Train participant fraction.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the report here instead of stdout.")
@_with_config_options
def evaluate(dataset, n_splits, seeds, ratio, fmt, out, config_path, **overrides):
    """Grouped-split evaluation with per-split confusion matrices."""
    config = _load_config(config_path, **overrides)
    data = modelio.load_dataset(dataset)
    seed_list = None
    if seeds is not None:
        try:
            seed_list = tuple(int(s) for s in seeds.split(",") if s.strip() != "")
        except ValueError:
            raise click.UsageError(f"--seeds must be comma-separated integers, got {seeds!r}")
    report = run_evaluate(data, config, n_splits=n_splits, seeds=seed_list, ratio=ratio)
    click.echo(report.to_table(), err=True)
    blob = report.to_json() if fmt == "json" else report.to_csv()
    if out:
        Path(out).write_text(blob if blob.endswith("\n") else blob + "\n")
        click.echo(f"report -> {out}", err=True)
    else:
        click.echo(blob)


def main(argv=None) -> int:
    """Run the CLI, mapping exceptions onto documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except InvalidParamsError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except NumericalError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        return 3
    except PipelineError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
