"""Smoothing, repetition segmentation, resampling and channel selection.

The segmentation convention: the averaged, smoothed anchor signal has one
local maximum per repetition, and repetitions are cut at the minima
between consecutive maxima (a repetition spans valley to valley around
one peak). For signals where the apex of the movement is a minimum of
the raw coordinate, set ``invert_anchor``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import peak_prominences, savgol_filter

from .bodyparts import DEFAULT_ANCHOR_PARTS, part_name
from .errors import (
    DegenerateDatasetError,
    InvalidParamsError,
    NoRepetitionsFoundError,
    RepCountMismatchWarning,
    TooShortError,
)
from .series import MultivariateSeries

logger = logging.getLogger(__name__)


def smooth_savgol(x, window: int = 11, polyorder: int = 3) -> np.ndarray:
    """Savitzky-Golay smoothing with polynomial edge handling.

    Interior points are least-squares polynomial fits over the sliding
    window; the first and last half-windows are evaluated from the
    polynomial fitted to the boundary window, which preserves the motion
    amplitude at clip edges.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidParamsError("smooth_savgol expects a 1-d sequence")
    if window % 2 == 0 or window < 3:
        raise InvalidParamsError(f"window must be odd and >= 3, got {window}")
    if polyorder >= window:
        raise InvalidParamsError(f"polyorder {polyorder} must be < window {window}")
    if len(x) < window:
        raise InvalidParamsError(f"sequence of length {len(x)} shorter than window {window}")
    return savgol_filter(x, window, polyorder, mode="interp")


def _local_maxima(x: np.ndarray) -> np.ndarray:
    """Indices of strict local maxima; flat tops yield their midpoint."""
    maxima = []
    i = 1
    n = len(x)
    while i < n - 1:
        if x[i - 1] < x[i]:
            # scan ahead over a possible plateau
            j = i
            while j < n - 1 and x[j + 1] == x[i]:
                j += 1
            if j < n - 1 and x[j + 1] < x[i]:
                maxima.append((i + j) // 2)
            i = j + 1
        else:
            i += 1
    return np.asarray(maxima, dtype=np.int64)


def _select_by_distance(peaks: np.ndarray, heights: np.ndarray, min_distance: int) -> np.ndarray:
    """Greedy suppression: visit peaks by descending height (ties by
    descending index) and drop any unvisited peak closer than
    ``min_distance`` samples to a kept one."""
    keep = np.ones(len(peaks), dtype=bool)
    order = sorted(range(len(peaks)), key=lambda i: (heights[i], i), reverse=True)
    for i in order:
        if not keep[i]:
            continue
        for j in range(len(peaks)):
            if j != i and keep[j] and abs(int(peaks[j]) - int(peaks[i])) < min_distance:
                keep[j] = False
    return keep


def detect_peaks(x, min_distance: int = 1, min_prominence: float = 0.1) -> np.ndarray:
    """Local maxima filtered by range-relative prominence and distance.

    ``min_prominence`` is a fraction of the signal range, which makes the
    returned index set invariant under positive affine transforms of the
    signal. Prominence filtering runs first, then greedy distance
    suppression in descending height order. Returns sorted indices,
    possibly empty.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidParamsError("detect_peaks expects a 1-d sequence")
    if min_distance < 1:
        raise InvalidParamsError(f"min_distance must be >= 1, got {min_distance}")
    if len(x) < 3:
        return np.empty(0, dtype=np.int64)
    peaks = _local_maxima(x)
    if len(peaks) == 0:
        return peaks
    prominences = peak_prominences(x, peaks)[0]
    threshold = min_prominence * (x.max() - x.min())
    peaks = peaks[prominences >= threshold]
    if len(peaks) == 0:
        return peaks
    keep = _select_by_distance(peaks, x[peaks], min_distance)
    return peaks[keep]


@dataclass(frozen=True)
class SegmentationParams:
    """Knobs for cutting a clip-long series into single repetitions.

    ``min_peak_distance=None`` estimates the distance from the anchor
    signal's autocorrelation (half the dominant period) and refines it
    from the median inter-peak gap. Segments shorter than
    ``min_length_fraction`` of the median segment length are dropped.
    """

    anchor_parts: tuple[int, ...] = DEFAULT_ANCHOR_PARTS
    smoothing_window: int = 11
    smoothing_polyorder: int = 3
    min_peak_distance: int | None = None
    min_prominence: float = 0.1
    expected_reps: int | None = None
    invert_anchor: bool = False
    min_length_fraction: float = 0.25

    def __post_init__(self):
        if self.smoothing_window % 2 == 0 or self.smoothing_polyorder >= self.smoothing_window:
            raise InvalidParamsError("smoothing window must be odd and > polyorder")
        if not 0.0 < self.min_prominence < 1.0:
            raise InvalidParamsError("min_prominence must be in (0, 1)")
        if self.min_peak_distance is not None and self.min_peak_distance < 1:
            raise InvalidParamsError("min_peak_distance must be >= 1")
        object.__setattr__(self, "anchor_parts", tuple(int(p) for p in self.anchor_parts))


def _autocorr_distance(a: np.ndarray) -> int:
    """Half the dominant autocorrelation period, as a peak-distance floor."""
    b = a - a.mean()
    r = np.correlate(b, b, mode="full")[len(b) - 1 :]
    maxima = _local_maxima(r)
    maxima = maxima[maxima >= 2]
    if len(maxima) == 0:
        return 1
    period = int(maxima[np.argmax(r[maxima])])
    return max(1, period // 2)


def segment_repetitions(
    series: MultivariateSeries, params: SegmentationParams
) -> list[tuple[int, int]]:
    """Cut a multi-repetition series into per-repetition index windows.

    Smooths the anchor channels, averages them, finds one peak per
    repetition, and cuts at the minima between consecutive peaks; the
    first window starts at 0 and the last ends at the series length.
    Windows are half-open ``(start, end)`` pairs, non-overlapping and
    ordered. Raises ``NoRepetitionsFoundError`` when no peak survives;
    warns with ``RepCountMismatchWarning`` when ``expected_reps`` is set
    and the count differs.
    """
    anchors = []
    for p in params.anchor_parts:
        name = f"{part_name(p)}_y"
        anchors.append(series.channel(name))
    smoothed = [
        smooth_savgol(a, params.smoothing_window, params.smoothing_polyorder) for a in anchors
    ]
    anchor = np.mean(smoothed, axis=0)
    if params.invert_anchor:
        anchor = -anchor
    if np.ptp(anchor) <= 1e-9 * max(1.0, float(np.abs(anchor).max())):
        raise NoRepetitionsFoundError("anchor signal is flat")

    distance = params.min_peak_distance or _autocorr_distance(anchor)
    peaks = detect_peaks(anchor, distance, params.min_prominence)
    # refine the distance from the observed inter-peak gaps
    for _ in range(2):
        if len(peaks) < 2:
            break
        refined = max(1, int(round(0.5 * float(np.median(np.diff(peaks))))))
        if refined == distance:
            break
        distance = refined
        peaks = detect_peaks(anchor, distance, params.min_prominence)
    if len(peaks) == 0:
        raise NoRepetitionsFoundError("no peaks found in the anchor signal")

    cuts = []
    for left, right in zip(peaks[:-1], peaks[1:]):
        cuts.append(int(left) + int(np.argmin(anchor[left : right + 1])))
    bounds = [0, *cuts, series.length]
    segments = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]

    lengths = np.array([e - s for s, e in segments], dtype=np.float64)
    min_len = params.min_length_fraction * float(np.median(lengths))
    kept = [(s, e) for s, e in segments if (e - s) >= min_len]
    if len(kept) < len(segments):
        logger.info("dropped %d short segment(s)", len(segments) - len(kept))

    if params.expected_reps is not None and len(kept) != params.expected_reps:
        warnings.warn(
            f"found {len(kept)} repetitions, expected {params.expected_reps}",
            RepCountMismatchWarning,
            stacklevel=2,
        )
    return kept


def segment_equal(series: MultivariateSeries, n_reps: int) -> list[tuple[int, int]]:
    """Divide the series into ``n_reps`` equal windows (last takes the remainder)."""
    if n_reps < 1:
        raise InvalidParamsError(f"n_reps must be >= 1, got {n_reps}")
    t = series.length
    width = t // n_reps
    if width < 1:
        raise InvalidParamsError(f"cannot cut length {t} into {n_reps} windows")
    bounds = [i * width for i in range(n_reps)] + [t]
    return [(bounds[i], bounds[i + 1]) for i in range(n_reps)]


def _resample_channel(y: np.ndarray, target_len: int) -> np.ndarray:
    src = np.linspace(0.0, 1.0, len(y))
    dst = np.linspace(0.0, 1.0, target_len)
    return CubicSpline(src, y, bc_type="not-a-knot")(dst)


def resample_cubic(series: MultivariateSeries, target_len: int) -> MultivariateSeries:
    """Resample every channel to ``target_len`` points with a cubic spline.

    Each channel is fit independently over normalized time [0, 1] with
    not-a-knot boundaries and evaluated on an equally spaced grid;
    endpoints are preserved exactly.
    """
    if target_len < 2:
        raise InvalidParamsError(f"target_len must be >= 2, got {target_len}")
    if series.length < 4:
        raise TooShortError(f"need at least 4 points for a cubic spline, got {series.length}")
    out = np.empty((series.n_channels, target_len), dtype=np.float64)
    for c in range(series.n_channels):
        out[c] = _resample_channel(series.values[c], target_len)
    return MultivariateSeries(out, series.channel_names)


def znormalize(x: np.ndarray) -> np.ndarray:
    """Per-channel z-normalization along the last axis.

    Subtracts the mean and divides by the (population) standard
    deviation; zero-variance channels map to all zeros. Off by default in
    the pipeline because physical signal magnitude carries class
    information; provided for ablations.
    """
    x = np.asarray(x, dtype=np.float64)
    centered = x - x.mean(axis=-1, keepdims=True)
    sd = centered.std(axis=-1, keepdims=True)
    constant = np.ptp(x, axis=-1, keepdims=True) == 0
    return np.where(constant, 0.0, centered / np.where(constant, 1.0, sd))


def _as_panel(X, labels):
    if labels is None:
        if not (hasattr(X, "X") and hasattr(X, "labels")):
            raise InvalidParamsError("pass a Dataset, or X of shape (N, C, L) with labels")
        return np.asarray(X.X, dtype=np.float64), np.asarray(X.labels)
    return np.asarray(X, dtype=np.float64), np.asarray(labels)


def ecp_channel_scores(X, labels=None) -> np.ndarray:
    """Per-channel sum of Euclidean distances between class-centroid series.

    Accepts either a ``Dataset`` or an ``(X, labels)`` pair with X of
    shape (N, C, L).
    """
    X, labels = _as_panel(X, labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise DegenerateDatasetError("channel scoring needs at least two classes")
    centroids = np.stack([X[labels == cls].mean(axis=0) for cls in classes])  # (K, C, L)
    n_classes, n_channels = centroids.shape[0], centroids.shape[1]
    scores = np.zeros(n_channels, dtype=np.float64)
    for i in range(n_classes):
        for j in range(i + 1, n_classes):
            scores += np.linalg.norm(centroids[i] - centroids[j], axis=-1)
    return scores


def select_channels_ecp(X, labels=None, keep: int | None = None) -> np.ndarray:
    """Rank channels by class-centroid separation and cut at the elbow.

    Channels are sorted by descending score; the cut point is the largest
    second difference of the sorted score curve unless ``keep`` overrides
    it. Returns the selected channel indices in rank order. The ranking
    is invariant to sample order (ties broken by channel index).
    """
    scores = ecp_channel_scores(X, labels)
    order = np.lexsort((np.arange(len(scores)), -scores))
    if keep is not None:
        if not 1 <= keep <= len(scores):
            raise InvalidParamsError(f"keep must be in 1..{len(scores)}, got {keep}")
        return order[:keep]
    s = scores[order]
    if len(s) < 3:
        return order
    second_diff = s[:-2] - 2.0 * s[1:-1] + s[2:]  # at positions 1..C-2
    elbow = 1 + int(np.argmax(second_diff))
    return order[:elbow]
