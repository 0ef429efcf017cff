"""Fixed-length repetition samples collected into a dataset."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError
from .series import MultivariateSeries


@dataclass(frozen=True)
class RepetitionSample:
    """One segmented, fixed-length repetition with its provenance."""

    values: np.ndarray  # (C, L)
    label: str | None
    participant_id: str
    clip_id: str
    rep_index: int


@dataclass
class Dataset:
    """Stacked repetition samples sharing channel set and length.

    ``X`` is (N, C, L) float64; label, participant and clip arrays run
    parallel to the first axis. ``preprocessing_hash`` records the
    configuration that produced the samples.
    """

    X: np.ndarray
    labels: np.ndarray
    participant_ids: np.ndarray
    clip_ids: np.ndarray
    rep_indices: np.ndarray
    channel_names: tuple[str, ...]
    preprocessing_hash: str = ""

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        if self.X.ndim != 3:
            raise InvalidParamsError(f"X must be (N, C, L), got {self.X.shape}")
        self.labels = np.asarray(self.labels)
        self.participant_ids = np.asarray(self.participant_ids)
        self.clip_ids = np.asarray(self.clip_ids)
        self.rep_indices = np.asarray(self.rep_indices, dtype=np.int64)
        n = self.X.shape[0]
        for name, arr in (
            ("labels", self.labels),
            ("participant_ids", self.participant_ids),
            ("clip_ids", self.clip_ids),
            ("rep_indices", self.rep_indices),
        ):
            if len(arr) != n:
                raise InvalidParamsError(f"{name} has {len(arr)} entries for {n} samples")
        if len(self.channel_names) != self.X.shape[1]:
            raise InvalidParamsError("channel_names length does not match X")
        self.channel_names = tuple(self.channel_names)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_channels(self) -> int:
        return self.X.shape[1]

    @property
    def length(self) -> int:
        return self.X.shape[2]

    @classmethod
    def from_samples(
        cls,
        samples: list[RepetitionSample],
        channel_names: tuple[str, ...],
        preprocessing_hash: str = "",
    ) -> "Dataset":
        if not samples:
            raise InvalidParamsError("cannot build a dataset from zero samples")
        return cls(
            X=np.stack([s.values for s in samples]),
            labels=np.array([s.label if s.label is not None else "" for s in samples]),
            participant_ids=np.array([s.participant_id for s in samples]),
            clip_ids=np.array([s.clip_id for s in samples]),
            rep_indices=np.array([s.rep_index for s in samples]),
            channel_names=channel_names,
            preprocessing_hash=preprocessing_hash,
        )

    def subset(self, mask: np.ndarray) -> "Dataset":
        mask = np.asarray(mask)
        return Dataset(
            X=self.X[mask],
            labels=self.labels[mask],
            participant_ids=self.participant_ids[mask],
            clip_ids=self.clip_ids[mask],
            rep_indices=self.rep_indices[mask],
            channel_names=self.channel_names,
            preprocessing_hash=self.preprocessing_hash,
        )

    def sample_series(self, i: int) -> MultivariateSeries:
        return MultivariateSeries(self.X[i], self.channel_names)
