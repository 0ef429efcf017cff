"""Participant-grouped splitting and repeated-split evaluation.

Splits are always at participant granularity so nobody contributes
samples to both sides; every evaluation asserts that property before
fitting anything.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InvalidParamsError, LengthMismatchError, TooFewParticipantsError
from .pipeline import PipelineConfig, RepetitionClassifier


@dataclass(frozen=True)
class SplitPlan:
    """Disjoint participant partition covering everyone."""

    train_participants: tuple[str, ...]
    test_participants: tuple[str, ...]
    seed: int
    ratio: float


def grouped_split(dataset: Dataset, ratio: float = 0.7, seed: int = 0) -> SplitPlan:
    """Shuffle unique participant ids and send the first ceil(ratio*P) to train.

    Every sample follows its participant, so train and test stay disjoint
    at the person level regardless of how many clips or repetitions each
    person contributed.
    """
    if not 0.0 < ratio <= 1.0:
        raise InvalidParamsError(f"ratio must be in (0, 1], got {ratio}")
    participants = np.unique(dataset.participant_ids)
    if len(participants) < 2:
        raise TooFewParticipantsError(
            f"grouped split needs >= 2 participants, got {len(participants)}"
        )
    order = np.random.default_rng(seed).permutation(len(participants))
    n_train = int(np.ceil(ratio * len(participants)))
    shuffled = participants[order]
    return SplitPlan(
        train_participants=tuple(str(p) for p in shuffled[:n_train]),
        test_participants=tuple(str(p) for p in shuffled[n_train:]),
        seed=int(seed),
        ratio=float(ratio),
    )


def confusion_matrix(y_true, y_pred, labels) -> np.ndarray:
    """Counts with true classes as rows and predicted classes as columns."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise LengthMismatchError(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    labels = list(labels)
    index = {lbl: i for i, lbl in enumerate(labels)}
    out = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        out[index[t], index[p]] += 1
    return out


@dataclass
class SplitResult:
    seed: int
    accuracy: float
    confusion: list[list[int]]
    n_train: int
    n_test: int
    train_time_s: float
    test_time_s: float
    test_participants: tuple[str, ...]


@dataclass
class EvalReport:
    """Per-split metrics plus their mean and standard deviation.

    ``std_accuracy`` is the population standard deviation over splits.
    Timing fields vary run to run; everything else is reproducible given
    the same dataset, config and seeds.
    """

    class_labels: tuple[str, ...]
    splits: list[SplitResult]
    mean_accuracy: float
    std_accuracy: float

    def to_dict(self) -> dict:
        return {
            "class_labels": list(self.class_labels),
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "splits": [
                {
                    "seed": s.seed,
                    "accuracy": s.accuracy,
                    "confusion": s.confusion,
                    # true-class sample counts are the confusion row sums
                    "test_class_counts": [int(sum(row)) for row in s.confusion],
                    "n_train": s.n_train,
                    "n_test": s.n_test,
                    "train_time_s": s.train_time_s,
                    "test_time_s": s.test_time_s,
                    "test_participants": list(s.test_participants),
                }
                for s in self.splits
            ],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def to_table(self) -> str:
        lines = []
        header = f"{'split':>6} {'seed':>5} {'train':>6} {'test':>6} {'accuracy':>9}"
        lines.append(header)
        lines.append("-" * len(header))
        for i, s in enumerate(self.splits):
            lines.append(
                f"{i:>6} {s.seed:>5} {s.n_train:>6} {s.n_test:>6} {s.accuracy:>9.4f}"
            )
        lines.append("-" * len(header))
        lines.append(
            f"mean accuracy {self.mean_accuracy:.4f} (+/- {self.std_accuracy:.4f})"
        )
        lines.append("confusion matrix of last split (rows true, cols predicted):")
        labels = self.class_labels
        width = max(6, max((len(str(l)) for l in labels), default=6))
        lines.append(" " * width + "".join(f"{str(l):>{width}}" for l in labels))
        for lbl, row in zip(labels, self.splits[-1].confusion):
            lines.append(f"{str(lbl):>{width}}" + "".join(f"{v:>{width}}" for v in row))
        return "\n".join(lines)

    def to_csv(self) -> str:
        lines = ["split,seed,n_train,n_test,accuracy,train_time_s,test_time_s"]
        for i, s in enumerate(self.splits):
            lines.append(
                f"{i},{s.seed},{s.n_train},{s.n_test},{s.accuracy:.6f},"
                f"{s.train_time_s:.3f},{s.test_time_s:.3f}"
            )
        return "\n".join(lines) + "\n"


def evaluate(
    dataset: Dataset,
    config: PipelineConfig,
    n_splits: int | None = None,
    seeds=None,
    ratio: float | None = None,
) -> EvalReport:
    """Repeated grouped-split evaluation of the configured pipeline.

    For each split the full pipeline (feature transform parameters,
    scaler, classifier) is fitted on the training side only, then scored
    on the held-out participants. Defaults come from the config.
    """
    seeds = tuple(seeds) if seeds is not None else config.split_seeds
    if n_splits is None:
        n_splits = len(seeds)
    if n_splits < 1:
        raise InvalidParamsError("n_splits must be >= 1")
    if n_splits > len(seeds):
        seeds = tuple(seeds) + tuple(range(len(seeds), n_splits))
    ratio = ratio if ratio is not None else config.split_ratio

    class_labels = tuple(str(c) for c in np.unique(dataset.labels))
    results: list[SplitResult] = []
    for seed in seeds[:n_splits]:
        plan = grouped_split(dataset, ratio=ratio, seed=seed)
        assert not set(plan.train_participants) & set(plan.test_participants)
        train_mask = np.isin(dataset.participant_ids, plan.train_participants)
        train, test = dataset.subset(train_mask), dataset.subset(~train_mask)

        clf = RepetitionClassifier.from_config(config)
        t0 = time.perf_counter()
        clf.fit(train.X, train.labels)
        train_time = time.perf_counter() - t0

        if test.n_samples:
            t0 = time.perf_counter()
            pred = clf.predict(test.X)
            test_time = time.perf_counter() - t0
            acc = float(np.mean(pred == test.labels))
            conf = confusion_matrix(test.labels, pred, class_labels)
        else:
            test_time, acc = 0.0, float("nan")
            conf = np.zeros((len(class_labels), len(class_labels)), dtype=np.int64)

        results.append(
            SplitResult(
                seed=int(seed),
                accuracy=acc,
                confusion=conf.tolist(),
                n_train=train.n_samples,
                n_test=test.n_samples,
                train_time_s=train_time,
                test_time_s=test_time,
                test_participants=plan.test_participants,
            )
        )
    accs = np.array([r.accuracy for r in results])
    return EvalReport(
        class_labels=class_labels,
        splits=results,
        mean_accuracy=float(accs.mean()),
        std_accuracy=float(accs.std()),
    )
