"""Named multivariate time series container."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError


@dataclass(frozen=True)
class MultivariateSeries:
    """C named channels of equal length T, stored as a (C, T) float array.

    Values are finite real numbers in the units of the source signal
    (pixels for pose-derived channels).
    """

    values: np.ndarray
    channel_names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidParamsError(f"series values must be 2-d (C, T), got {values.shape}")
        if values.shape[0] < 1:
            raise InvalidParamsError("series needs at least one channel")
        if len(self.channel_names) != values.shape[0]:
            raise InvalidParamsError(
                f"{len(self.channel_names)} channel names for {values.shape[0]} channels"
            )
        if not np.isfinite(values).all():
            raise InvalidParamsError("series contains non-finite values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "channel_names", tuple(self.channel_names))

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    def channel(self, name: str) -> np.ndarray:
        try:
            idx = self.channel_names.index(name)
        except ValueError:
            raise InvalidParamsError(f"no channel named {name!r}") from None
        return self.values[idx]

    def slice(self, start: int, end: int) -> "MultivariateSeries":
        if not 0 <= start < end <= self.length:
            raise InvalidParamsError(f"bad slice [{start}, {end}) for length {self.length}")
        return MultivariateSeries(self.values[:, start:end], self.channel_names)
