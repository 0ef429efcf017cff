"""Deterministic small-kernel convolutional features (PPV only).

Uses the fixed set of 84 length-9 kernels whose weights are -1 except
for exactly three taps of weight 2 (one kernel per 3-subset of the 9 tap
positions, zero-sum). Dilations follow a logarithmic ladder capped by
the input length; biases are quantiles of convolution outputs computed
on randomly chosen training samples, which makes the features invariant
to a common rescaling of the data refit end to end. Channel subsets are
assigned to (dilation, kernel) combinations cyclically.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numba import njit, prange
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import EmptyDatasetError, InvalidParamsError, ShapeMismatchError

NUM_KERNELS = 84
KERNEL_LENGTH = 9
MIN_INPUT_LENGTH = KERNEL_LENGTH
DEFAULT_NUM_FEATURES = 10_000

KERNEL_INDICES = np.asarray(list(combinations(range(KERNEL_LENGTH), 3)), dtype=np.int64)

_GOLDEN = (np.sqrt(5.0) + 1.0) / 2.0


@dataclass(frozen=True)
class MiniRocketParams:
    """Everything the transform needs; fully determined by (data, seed).

    Combinations are enumerated dilation-major then kernel; features of
    one combination are consecutive columns. ``fit_sample_indices``
    records which training sample supplied each combination's bias
    quantiles.
    """

    num_channels: int
    input_length: int
    seed: int
    dilations: np.ndarray                  # (D,)
    num_features_per_dilation: np.ndarray  # (D,)
    quantiles: np.ndarray                  # (F,)
    biases: np.ndarray                     # (F,)
    channel_counts: np.ndarray             # (84*D,)
    channel_indices: np.ndarray            # (sum counts,)
    channel_starts: np.ndarray             # (84*D + 1,)
    feature_starts: np.ndarray             # (84*D + 1,)
    fit_sample_indices: np.ndarray         # (84*D,)

    @property
    def num_features(self) -> int:
        return int(self.feature_starts[-1])

    @property
    def num_combinations(self) -> int:
        return len(self.channel_counts)

    def region_length(self, combo: int) -> int:
        """Output positions pooled by the given combination's features."""
        di, k = divmod(combo, NUM_KERNELS)
        pad = ((KERNEL_LENGTH - 1) // 2) * int(self.dilations[di])
        if (di % 2 + k) % 2 == 0:
            return self.input_length
        return self.input_length - 2 * pad

    def feature_region_lengths(self) -> np.ndarray:
        out = np.empty(self.num_features, dtype=np.int64)
        for combo in range(self.num_combinations):
            out[self.feature_starts[combo] : self.feature_starts[combo + 1]] = (
                self.region_length(combo)
            )
        return out


def _fit_dilations(
    input_length: int, num_features: int, max_dilations_per_kernel: int
) -> tuple[np.ndarray, np.ndarray]:
    num_features_per_kernel = num_features // NUM_KERNELS
    true_max = min(num_features_per_kernel, max_dilations_per_kernel)
    multiplier = num_features_per_kernel / true_max
    max_exponent = np.log2((input_length - 1) / (KERNEL_LENGTH - 1))
    dilations, counts = np.unique(
        np.logspace(0, max_exponent, true_max, base=2).astype(np.int64),
        return_counts=True,
    )
    num_per_dilation = (counts * multiplier).astype(np.int64)
    remainder = num_features_per_kernel - int(num_per_dilation.sum())
    i = 0
    while remainder > 0:
        num_per_dilation[i] += 1
        remainder -= 1
        i = (i + 1) % len(num_per_dilation)
    return dilations, num_per_dilation


def _quantiles(n: int) -> np.ndarray:
    # low-discrepancy positions so consecutive features probe different
    # parts of the convolution-output distribution
    return ((np.arange(1, n + 1) * _GOLDEN) % 1.0).astype(np.float64)


@njit(cache=True)
def _combo_conv(sample, dilation, i0, i1, i2, channels):  # pragma: no cover
    """Convolution output (full length, zero-padded) of one combination.

    Accumulation order matches the batch transform exactly so bias
    quantiles taken here are attained values of the transform's outputs.
    """
    t = sample.shape[1]
    m = len(channels)
    shifts = np.zeros((KERNEL_LENGTH, m, t))
    for j in range(KERNEL_LENGTH):
        off = (j - KERNEL_LENGTH // 2) * dilation
        lo = max(0, -off)
        hi = min(t, t - off)
        for ci in range(m):
            row = sample[channels[ci]]
            for s in range(lo, hi):
                shifts[j, ci, s] = row[s + off]
    z = np.zeros(t)
    for ci in range(m):
        for s in range(t):
            total = 0.0
            for j in range(KERNEL_LENGTH):
                total += shifts[j, ci, s]
            z[s] += 3.0 * (shifts[i0, ci, s] + shifts[i1, ci, s] + shifts[i2, ci, s]) - total
    return z


@njit(cache=True, parallel=True)
def _minirocket_batch(X, dilations, kernel_indices, channel_counts, channel_indices,
                      channel_starts, feature_starts, biases):  # pragma: no cover
    n_samples, n_channels, t = X.shape
    n_dilations = len(dilations)
    n_features = feature_starts[-1]
    out = np.empty((n_samples, n_features))
    for n in prange(n_samples):
        sample = X[n]
        shifts = np.zeros((KERNEL_LENGTH, n_channels, t))
        totals = np.zeros((n_channels, t))
        z = np.zeros(t)
        for di in range(n_dilations):
            d = dilations[di]
            pad = (KERNEL_LENGTH // 2) * d
            shifts[:] = 0.0
            for j in range(KERNEL_LENGTH):
                off = (j - KERNEL_LENGTH // 2) * d
                lo = max(0, -off)
                hi = min(t, t - off)
                for c in range(n_channels):
                    row = sample[c]
                    for s in range(lo, hi):
                        shifts[j, c, s] = row[s + off]
            for c in range(n_channels):
                for s in range(t):
                    total = 0.0
                    for j in range(KERNEL_LENGTH):
                        total += shifts[j, c, s]
                    totals[c, s] = total
            for k in range(NUM_KERNELS):
                combo = di * NUM_KERNELS + k
                i0 = kernel_indices[k, 0]
                i1 = kernel_indices[k, 1]
                i2 = kernel_indices[k, 2]
                z[:] = 0.0
                for ci in range(channel_counts[combo]):
                    c = channel_indices[channel_starts[combo] + ci]
                    for s in range(t):
                        z[s] += 3.0 * (shifts[i0, c, s] + shifts[i1, c, s] + shifts[i2, c, s]) - totals[c, s]
                if (di % 2 + k) % 2 == 0:
                    lo = 0
                    hi = t
                else:
                    lo = pad
                    hi = t - pad
                region_len = hi - lo
                for f in range(feature_starts[combo], feature_starts[combo + 1]):
                    b = biases[f]
                    npos = 0
                    for s in range(lo, hi):
                        if z[s] > b:
                            npos += 1
                    out[n, f] = npos / region_len
    return out


def minirocket_fit(
    X: np.ndarray,
    num_features: int = DEFAULT_NUM_FEATURES,
    max_dilations_per_kernel: int = 32,
    seed: int = 0,
) -> MiniRocketParams:
    """Derive dilations, channel combinations and bias quantiles from data.

    Biases for each (dilation, kernel) combination are quantiles (at
    low-discrepancy positions, lower-interpolation so every bias is an
    attained convolution output) of that combination's outputs on one
    randomly chosen training sample.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 3:
        raise ShapeMismatchError(f"X must be (N, C, T), got {X.shape}")
    n_samples, n_channels, input_length = X.shape
    if n_samples == 0:
        raise EmptyDatasetError("minirocket_fit needs at least one sample")
    if input_length < MIN_INPUT_LENGTH:
        raise InvalidParamsError(
            f"input_length must be >= {MIN_INPUT_LENGTH}, got {input_length}"
        )
    if num_features < NUM_KERNELS:
        raise InvalidParamsError(f"num_features must be >= {NUM_KERNELS}")

    rng = np.random.default_rng(seed)
    dilations, num_per_dilation = _fit_dilations(
        input_length, num_features, max_dilations_per_kernel
    )
    n_combos = NUM_KERNELS * len(dilations)

    feature_counts = np.repeat(num_per_dilation, NUM_KERNELS)
    feature_starts = np.zeros(n_combos + 1, dtype=np.int64)
    feature_starts[1:] = np.cumsum(feature_counts)
    quantiles = _quantiles(int(feature_starts[-1]))

    # cyclic channel assignment over a fixed shuffled arrangement
    limit = min(n_channels, KERNEL_LENGTH)
    channel_counts = (2 ** rng.uniform(0, np.log2(limit + 1), n_combos)).astype(np.int64)
    channel_starts = np.zeros(n_combos + 1, dtype=np.int64)
    channel_starts[1:] = np.cumsum(channel_counts)
    arrangement = rng.permutation(n_channels)
    channel_indices = np.empty(channel_starts[-1], dtype=np.int64)
    pos = 0
    for combo in range(n_combos):
        m = int(channel_counts[combo])
        idx = (pos + np.arange(m)) % n_channels
        channel_indices[channel_starts[combo] : channel_starts[combo + 1]] = arrangement[idx]
        pos = (pos + m) % n_channels

    fit_sample_indices = rng.integers(0, n_samples, n_combos)

    biases = np.empty(int(feature_starts[-1]), dtype=np.float64)
    for combo in range(n_combos):
        di, k = divmod(combo, NUM_KERNELS)
        d = int(dilations[di])
        sample = X[int(fit_sample_indices[combo])]
        channels = channel_indices[channel_starts[combo] : channel_starts[combo + 1]]
        i0, i1, i2 = KERNEL_INDICES[k]
        z = _combo_conv(sample, d, int(i0), int(i1), int(i2), channels)
        if (di % 2 + k) % 2 == 0:
            region = z
        else:
            pad = (KERNEL_LENGTH // 2) * d
            region = z[pad : input_length - pad]
        fs, fe = feature_starts[combo], feature_starts[combo + 1]
        biases[fs:fe] = np.quantile(region, quantiles[fs:fe], method="lower")

    return MiniRocketParams(
        num_channels=n_channels,
        input_length=input_length,
        seed=int(seed),
        dilations=dilations,
        num_features_per_dilation=num_per_dilation,
        quantiles=quantiles,
        biases=biases,
        channel_counts=channel_counts,
        channel_indices=channel_indices,
        channel_starts=channel_starts,
        feature_starts=feature_starts,
        fit_sample_indices=fit_sample_indices,
    )


def minirocket_transform(X: np.ndarray, params: MiniRocketParams) -> np.ndarray:
    """PPV features for every (kernel, dilation, bias, channels) tuple.

    Column order follows the enumeration order frozen in ``params``; no
    randomness at transform time. All features lie in [0, 1].
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 3:
        raise ShapeMismatchError(f"X must be (N, C, T), got {X.shape}")
    if X.shape[1] != params.num_channels or X.shape[2] != params.input_length:
        raise ShapeMismatchError(
            f"X has shape {X.shape[1:]}, params expect "
            f"({params.num_channels}, {params.input_length})"
        )
    return _minirocket_batch(
        X,
        params.dilations,
        KERNEL_INDICES,
        params.channel_counts,
        params.channel_indices,
        params.channel_starts,
        params.feature_starts,
        params.biases,
    )


class MiniRocketFeatures(BaseEstimator, TransformerMixin):
    """Deterministic convolutional feature transform (PPV pooling only).

    Faster and smaller than the random-kernel transform, but its
    quantile-bias scheme makes the features scale invariant, which costs
    accuracy when signal magnitude matters.

    Parameters
    ----------
    num_features : int, default 10000
        Approximate feature count (rounded to a multiple of 84).
    max_dilations_per_kernel : int, default 32
    random_state : int, default 0
        Seed for sample choice and channel assignments.
    """

    def __init__(
        self,
        num_features: int = DEFAULT_NUM_FEATURES,
        max_dilations_per_kernel: int = 32,
        random_state: int = 0,
    ):
        self.num_features = num_features
        self.max_dilations_per_kernel = max_dilations_per_kernel
        self.random_state = random_state

    def fit(self, X, y=None):
        self.params_ = minirocket_fit(
            np.asarray(X),
            num_features=self.num_features,
            max_dilations_per_kernel=self.max_dilations_per_kernel,
            seed=self.random_state,
        )
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "params_"):
            raise NotFittedError("MiniRocketFeatures is not fitted")
        return minirocket_transform(np.asarray(X), self.params_)
