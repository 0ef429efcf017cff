"""Random convolutional kernel features for multivariate series.

Each kernel convolves a random subset of input channels with independent
mean-centered Gaussian weights summed into one output sequence; two
features per kernel are pooled from the convolution output: its maximum
and the proportion of positive values (PPV). Kernels are reproducible
from ``(seed, num_kernels, num_channels, input_length)`` using a fixed
RNG algorithm, so a bank can be persisted as those four numbers plus a
checksum.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import InvalidParamsError, ShapeMismatchError

KERNEL_LENGTHS = (7, 9, 11)
MIN_INPUT_LENGTH = max(KERNEL_LENGTHS) + 1
RNG_ALGORITHM = "numpy-pcg64"

DEFAULT_NUM_KERNELS = 10_000


def set_num_threads(n: int) -> None:
    """Cap the worker threads used by the batch transforms."""
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


@dataclass(frozen=True)
class RocketKernel:
    """One kernel: dilated taps over a channel subset, plus bias and padding."""

    length: int
    dilation: int
    padding: bool
    bias: float
    channels: np.ndarray  # (m,) channel indices
    weights: np.ndarray   # (m, length), each row sums to ~0


@dataclass(frozen=True)
class KernelBank:
    """A flat-array bank of ``num_kernels`` random kernels.

    Per-kernel channel subsets and weights are stored in concatenated
    arrays indexed by ``channel_starts`` / ``weight_starts`` so the batch
    transform can run without object overhead.
    """

    num_kernels: int
    num_channels: int
    input_length: int
    seed: int
    lengths: np.ndarray         # (K,)
    dilations: np.ndarray       # (K,)
    paddings: np.ndarray        # (K,) 0/1
    biases: np.ndarray          # (K,)
    channel_counts: np.ndarray  # (K,)
    channel_indices: np.ndarray # (sum m_k,)
    channel_starts: np.ndarray  # (K+1,)
    weights: np.ndarray         # (sum m_k * l_k,)
    weight_starts: np.ndarray   # (K+1,)

    def kernel(self, k: int) -> RocketKernel:
        cs, ce = self.channel_starts[k], self.channel_starts[k + 1]
        ws, we = self.weight_starts[k], self.weight_starts[k + 1]
        m = int(self.channel_counts[k])
        return RocketKernel(
            length=int(self.lengths[k]),
            dilation=int(self.dilations[k]),
            padding=bool(self.paddings[k]),
            bias=float(self.biases[k]),
            channels=self.channel_indices[cs:ce].copy(),
            weights=self.weights[ws:we].reshape(m, int(self.lengths[k])).copy(),
        )

    def checksum(self) -> str:
        """SHA-256 over the generated arrays, for regeneration verification."""
        h = hashlib.sha256()
        for arr in (
            self.lengths,
            self.dilations,
            self.paddings,
            self.biases,
            self.channel_counts,
            self.channel_indices,
            self.weights,
        ):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


def generate_kernels(
    num_kernels: int, num_channels: int, input_length: int, seed: int = 0
) -> KernelBank:
    """Draw a reproducible random kernel bank.

    Per kernel: length uniform over {7, 9, 11}; channel subset size
    uniform over 1..C; per-channel weights are unit-normal draws centered
    to zero mean; bias uniform in [-1, 1]; dilation ``floor(2**u)`` with
    ``u`` uniform in [0, log2((T-1)/(length-1))], which keeps the dilated
    span inside the input; padding is a fair coin.
    """
    if num_kernels < 1:
        raise InvalidParamsError(f"num_kernels must be >= 1, got {num_kernels}")
    if num_channels < 1:
        raise InvalidParamsError(f"num_channels must be >= 1, got {num_channels}")
    if input_length < MIN_INPUT_LENGTH:
        raise InvalidParamsError(
            f"input_length must be >= {MIN_INPUT_LENGTH}, got {input_length}"
        )
    rng = np.random.default_rng(seed)
    k = num_kernels
    lengths = rng.choice(np.asarray(KERNEL_LENGTHS, dtype=np.int64), k)
    channel_counts = rng.integers(1, num_channels + 1, k)
    paddings = rng.integers(0, 2, k)
    biases = rng.uniform(-1.0, 1.0, k)
    max_exp = np.log2((input_length - 1) / (lengths - 1.0))
    dilations = np.floor(2.0 ** (rng.uniform(0.0, 1.0, k) * max_exp)).astype(np.int64)

    channel_starts = np.zeros(k + 1, dtype=np.int64)
    channel_starts[1:] = np.cumsum(channel_counts)
    weight_starts = np.zeros(k + 1, dtype=np.int64)
    weight_starts[1:] = np.cumsum(channel_counts * lengths)

    # channel subsets: first m_k entries of a per-kernel permutation, sorted
    perms = rng.permuted(np.tile(np.arange(num_channels), (k, 1)), axis=1)
    channel_indices = np.empty(channel_starts[-1], dtype=np.int64)
    for i in range(k):
        channel_indices[channel_starts[i] : channel_starts[i + 1]] = np.sort(
            perms[i, : channel_counts[i]]
        )

    # per-channel weight rows, centered to zero mean row by row
    weights = rng.standard_normal(weight_starts[-1])
    row_lengths = np.repeat(lengths, channel_counts)
    row_starts = np.zeros(len(row_lengths), dtype=np.int64)
    row_starts[1:] = np.cumsum(row_lengths)[:-1]
    row_means = np.add.reduceat(weights, row_starts) / row_lengths
    weights -= np.repeat(row_means, row_lengths)

    return KernelBank(
        num_kernels=k,
        num_channels=num_channels,
        input_length=input_length,
        seed=int(seed),
        lengths=lengths,
        dilations=dilations,
        paddings=paddings,
        biases=biases,
        channel_counts=channel_counts,
        channel_indices=channel_indices,
        channel_starts=channel_starts,
        weights=weights,
        weight_starts=weight_starts,
    )


def apply_kernel(sample: np.ndarray, kernel: RocketKernel) -> tuple[float, float]:
    """Convolve one (C, T) sample with one kernel; return (max, PPV).

    The convolution output at position t is
    ``sum_c sum_j w[c][j] * x[c][t + j*dilation] - bias`` over all valid
    positions (zero-padded to center when the kernel has padding); PPV is
    the fraction of positions where the output exceeds zero.
    """
    x = np.asarray(sample, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatchError(f"sample must be (C, T), got {x.shape}")
    n_channels, t = x.shape
    if kernel.channels.max(initial=-1) >= n_channels:
        raise ShapeMismatchError("kernel channel indices exceed sample channels")
    l, d = kernel.length, kernel.dilation
    pad = ((l - 1) * d) // 2 if kernel.padding else 0
    out_len = t + 2 * pad - (l - 1) * d
    if out_len < 1:
        raise ShapeMismatchError("kernel span exceeds sample length")
    z = np.full(out_len, -kernel.bias)
    for ci, c in enumerate(kernel.channels):
        for j in range(l):
            off = j * d - pad
            s0 = max(0, -off)
            s1 = min(out_len, t - off)
            z[s0:s1] += kernel.weights[ci, j] * x[c, s0 + off : s1 + off]
    return float(z.max()), float((z > 0).sum() / out_len)


@njit(cache=True, parallel=True)
def _rocket_batch(X, lengths, dilations, paddings, biases, channel_counts,
                  channel_indices, channel_starts, weights, weight_starts):  # pragma: no cover
    n_samples, _, t = X.shape
    k = len(lengths)
    out = np.empty((n_samples, 2 * k))
    for n in prange(n_samples):
        z = np.empty(2 * t)
        sample = X[n]
        for i in range(k):
            l = lengths[i]
            d = dilations[i]
            pad = ((l - 1) * d) // 2 if paddings[i] == 1 else 0
            out_len = t + 2 * pad - (l - 1) * d
            z[:out_len] = -biases[i]
            for ci in range(channel_counts[i]):
                row = sample[channel_indices[channel_starts[i] + ci]]
                wbase = weight_starts[i] + ci * l
                for j in range(l):
                    w = weights[wbase + j]
                    off = j * d - pad
                    s0 = max(0, -off)
                    s1 = min(out_len, t - off)
                    # zero-based unit-stride views keep this loop vectorizable
                    zv = z[s0:s1]
                    rv = row[s0 + off : s1 + off]
                    for s in range(s1 - s0):
                        zv[s] += w * rv[s]
            zmax = z[0]
            npos = 0
            for s in range(out_len):
                v = z[s]
                if v > zmax:
                    zmax = v
                if v > 0.0:
                    npos += 1
            out[n, 2 * i] = zmax
            out[n, 2 * i + 1] = npos / out_len
    return out


def rocket_transform(X: np.ndarray, bank: KernelBank) -> np.ndarray:
    """Transform (N, C, T) samples into a (N, 2K) feature matrix.

    Row i concatenates (max, PPV) for every kernel applied to sample i;
    column order is fixed by kernel index. Deterministic given
    ``(X, bank)`` and embarrassingly parallel over samples.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 3:
        raise ShapeMismatchError(f"X must be (N, C, T), got {X.shape}")
    if X.shape[1] != bank.num_channels or X.shape[2] != bank.input_length:
        raise ShapeMismatchError(
            f"X has shape {X.shape[1:]}, bank expects "
            f"({bank.num_channels}, {bank.input_length})"
        )
    return _rocket_batch(
        X,
        bank.lengths,
        bank.dilations,
        bank.paddings,
        bank.biases,
        bank.channel_counts,
        bank.channel_indices,
        bank.channel_starts,
        bank.weights,
        bank.weight_starts,
    )


class RocketFeatures(BaseEstimator, TransformerMixin):
    """Random convolutional kernel transform with max and PPV pooling.

    Operates on raw (unnormalized) inputs by default; magnitude-sensitive
    features are the point. ``fit`` only draws the kernel bank for the
    input shape, so it ignores ``y``.

    Parameters
    ----------
    num_kernels : int, default 10000
        Number of random kernels; the output has ``2 * num_kernels``
        columns.
    random_state : int, default 0
        Seed for the kernel bank.
    """

    def __init__(self, num_kernels: int = DEFAULT_NUM_KERNELS, random_state: int = 0):
        self.num_kernels = num_kernels
        self.random_state = random_state

    def fit(self, X, y=None):
        X = np.asarray(X)
        if X.ndim != 3:
            raise ShapeMismatchError(f"X must be (N, C, T), got {X.shape}")
        self.bank_ = generate_kernels(
            self.num_kernels, X.shape[1], X.shape[2], self.random_state
        )
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "bank_"):
            raise NotFittedError("RocketFeatures is not fitted")
        return rocket_transform(np.asarray(X), self.bank_)
