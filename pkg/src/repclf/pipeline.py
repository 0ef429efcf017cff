"""Pipeline configuration and end-to-end orchestration.

A single declarative config drives ingestion (channel extraction,
segmentation, resampling), the feature transform, and the classifier.
Datasets embed the hash of the preprocessing fields; models embed the
hash of the full config, and prediction refuses mismatched pipelines.
"""

from __future__ import annotations

import hashlib
import json
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .bodyparts import UPPER_BODY_PARTS
from .dataset import Dataset, RepetitionSample
from .errors import DataError, InvalidParamsError, RepCountMismatchWarning, TooShortError
from .minirocket import MiniRocketFeatures
from .pose import ChannelSpec, KeypointSequence, extract_series, quality_gate
from .prep import SegmentationParams, resample_cubic, segment_repetitions, znormalize
from .ridge import DEFAULT_ALPHAS, ColumnScaler, RidgeClassifierLOO
from .rocket import RocketFeatures

TRANSFORMS = ("rocket", "minirocket")

# Preprocessing fields: everything that shapes the repetition samples.
_PREP_FIELDS = (
    "parts",
    "axes",
    "frame_step",
    "target_len",
    "max_gap",
    "min_mean_confidence",
    "max_undetected_fraction",
    "segmentation",
)


@dataclass(frozen=True)
class PipelineConfig:
    """All knobs of the pipeline, serializable and hashable.

    ``normalize`` is off by default: per-channel z-normalization erases
    the magnitude information that separates the execution classes and is
    only provided for ablation runs.
    """

    parts: tuple[int, ...] = UPPER_BODY_PARTS
    axes: tuple[str, ...] = ("x", "y")
    frame_step: int = 1
    target_len: int = 161
    normalize: bool = False
    transform: str = "rocket"
    num_kernels: int = 10_000
    num_features: int = 10_000
    transform_seed: int = 0
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    segmentation: SegmentationParams = field(default_factory=SegmentationParams)
    split_ratio: float = 0.7
    split_seeds: tuple[int, ...] = (0, 1, 2)
    max_gap: int = 15
    min_mean_confidence: float = 0.3
    max_undetected_fraction: float = 0.2

    def __post_init__(self):
        if self.transform not in TRANSFORMS:
            raise InvalidParamsError(f"transform must be one of {TRANSFORMS}")
        if self.frame_step < 1:
            raise InvalidParamsError("frame_step must be >= 1")
        if self.target_len < 2:
            raise InvalidParamsError("target_len must be >= 2")
        if not 0.0 < self.split_ratio <= 1.0:
            raise InvalidParamsError("split_ratio must be in (0, 1]")
        object.__setattr__(self, "parts", tuple(int(p) for p in self.parts))
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "split_seeds", tuple(int(s) for s in self.split_seeds))
        self.channel_spec()  # validate parts/axes

    def channel_spec(self) -> ChannelSpec:
        return ChannelSpec(parts=self.parts, axes=self.axes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["segmentation"] = asdict(self.segmentation)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        seg = d.pop("segmentation", None)
        if seg is not None:
            seg = SegmentationParams(
                **{**seg, "anchor_parts": tuple(seg.get("anchor_parts", ()))}
            )
            d["segmentation"] = seg
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InvalidParamsError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise InvalidParamsError(f"config {path}: not valid JSON: {exc}") from exc

    def _hash_of(self, d: dict) -> str:
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def config_hash(self) -> str:
        return self._hash_of(self.to_dict())

    def preprocessing_hash(self) -> str:
        d = self.to_dict()
        return self._hash_of({k: d[k] for k in _PREP_FIELDS})


@dataclass
class ClipSegments:
    """Per-repetition samples extracted from one clip, with diagnostics."""

    samples: list[RepetitionSample]
    n_segments: int
    n_dropped: int
    rep_count_mismatch: bool
    windows: list[tuple[int, int]]  # frame windows in original frame units


def clip_to_samples(seq: KeypointSequence, config: PipelineConfig) -> ClipSegments:
    """Extract channels, segment repetitions, and resample to fixed length."""
    series = extract_series(seq, config.channel_spec(), config.frame_step)
    mismatch = False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RepCountMismatchWarning)
        segments = segment_repetitions(series, config.segmentation)
        mismatch = any(issubclass(w.category, RepCountMismatchWarning) for w in caught)

    samples: list[RepetitionSample] = []
    windows: list[tuple[int, int]] = []
    dropped = 0
    for start, end in segments:
        piece = series.slice(start, end)
        try:
            fixed = resample_cubic(piece, config.target_len)
        except TooShortError:
            dropped += 1
            continue
        samples.append(
            RepetitionSample(
                values=fixed.values,
                label=seq.class_label,
                participant_id=seq.participant_id,
                clip_id=seq.clip_id,
                rep_index=len(samples),
            )
        )
        windows.append((start * config.frame_step, end * config.frame_step))
    return ClipSegments(
        samples=samples,
        n_segments=len(segments),
        n_dropped=dropped,
        rep_count_mismatch=mismatch,
        windows=windows,
    )


def build_dataset(
    clips: list[KeypointSequence],
    config: PipelineConfig,
    enforce_quality: bool = True,
    log=None,
) -> Dataset:
    """Run every clip through quality gating and segmentation.

    Clips failing the quality gate are skipped (reported via ``log``);
    hard per-clip errors propagate with the clip id attached.
    """
    spec = config.channel_spec()
    samples: list[RepetitionSample] = []
    for seq in clips:
        if enforce_quality:
            report = quality_gate(
                seq, spec, config.min_mean_confidence, config.max_undetected_fraction
            )
            if not report.passed:
                if log:
                    log(f"clip {seq.clip_id}: skipped, low-quality parts {report.failing_parts}")
                continue
        result = clip_to_samples(seq, config)
        if log:
            note = " (rep count mismatch)" if result.rep_count_mismatch else ""
            log(
                f"clip {seq.clip_id}: {len(result.samples)} reps"
                f" ({result.n_dropped} dropped){note}"
            )
        samples.extend(result.samples)
    if not samples:
        raise DataError("no repetition samples survived ingestion")
    return Dataset.from_samples(
        samples, spec.channel_names(), preprocessing_hash=config.preprocessing_hash()
    )


class RepetitionClassifier(BaseEstimator, ClassifierMixin):
    """Feature transform + scaler + ridge, as one estimator over (N, C, L).

    Parameters mirror the pipeline config; ``fit`` learns the transform
    parameters, feature scaling and classifier weights from the training
    panel only.
    """

    def __init__(
        self,
        transform: str = "rocket",
        num_kernels: int = 10_000,
        num_features: int = 10_000,
        normalize: bool = False,
        alphas=DEFAULT_ALPHAS,
        random_state: int = 0,
    ):
        self.transform = transform
        self.num_kernels = num_kernels
        self.num_features = num_features
        self.normalize = normalize
        self.alphas = alphas
        self.random_state = random_state

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "RepetitionClassifier":
        return cls(
            transform=config.transform,
            num_kernels=config.num_kernels,
            num_features=config.num_features,
            normalize=config.normalize,
            alphas=config.alphas,
            random_state=config.transform_seed,
        )

    def _prepare(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return znormalize(X) if self.normalize else X

    def fit(self, X, y):
        X = self._prepare(X)
        if self.transform == "rocket":
            self.features_ = RocketFeatures(self.num_kernels, self.random_state)
        elif self.transform == "minirocket":
            self.features_ = MiniRocketFeatures(
                self.num_features, random_state=self.random_state
            )
        else:
            raise InvalidParamsError(f"unknown transform {self.transform!r}")
        F = self.features_.fit(X).transform(X)
        self.scaler_ = ColumnScaler().fit(F)
        self.ridge_ = RidgeClassifierLOO(alphas=self.alphas).fit(
            self.scaler_.transform(F), y
        )
        self.classes_ = self.ridge_.classes_
        return self

    def decision_function(self, X) -> np.ndarray:
        F = self.features_.transform(self._prepare(X))
        return self.ridge_.decision_function(self.scaler_.transform(F))

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


@dataclass
class TrainedModel:
    """A fitted pipeline plus the config and shapes it was trained with."""

    config: PipelineConfig
    channel_names: tuple[str, ...]
    classifier: RepetitionClassifier

    @property
    def config_hash(self) -> str:
        return self.config.config_hash()


def train(dataset: Dataset, config: PipelineConfig) -> TrainedModel:
    """Fit transform, scaler and classifier on the whole dataset."""
    if dataset.preprocessing_hash and dataset.preprocessing_hash != config.preprocessing_hash():
        raise DataError(
            "dataset was ingested with a different preprocessing config "
            f"({dataset.preprocessing_hash[:12]} != {config.preprocessing_hash()[:12]})"
        )
    clf = RepetitionClassifier.from_config(config).fit(dataset.X, dataset.labels)
    return TrainedModel(
        config=config, channel_names=dataset.channel_names, classifier=clf
    )


def predict_clip(model: TrainedModel, seq: KeypointSequence) -> dict:
    """Segment a clip and classify each repetition.

    Returns a JSON-ready dict with one entry per repetition: label,
    per-class scores, and the source frame window.
    """
    t0 = time.perf_counter()
    result = clip_to_samples(seq, model.config)
    if not result.samples:
        raise DataError(f"clip {seq.clip_id}: no repetitions found")
    X = np.stack([s.values for s in result.samples])
    scores = model.classifier.decision_function(X)
    labels = model.classifier.classes_[np.argmax(scores, axis=1)]
    reps = []
    for i, sample in enumerate(result.samples):
        reps.append(
            {
                "rep_index": sample.rep_index,
                "start_frame": result.windows[i][0],
                "end_frame": result.windows[i][1],
                "label": str(labels[i]),
                "scores": {
                    str(cls): float(scores[i, j])
                    for j, cls in enumerate(model.classifier.classes_)
                },
            }
        )
    return {
        "clip_id": seq.clip_id,
        "config_hash": model.config_hash,
        "n_repetitions": len(reps),
        "dropped_segments": result.n_dropped,
        "elapsed_s": time.perf_counter() - t0,
        "repetitions": reps,
    }
