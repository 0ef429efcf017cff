import numpy as np
import pytest

from repclf import (
    MultivariateSeries,
    SegmentationParams,
    detect_peaks,
    resample_cubic,
    segment_equal,
    segment_repetitions,
    select_channels_ecp,
    smooth_savgol,
    znormalize,
)
from repclf.errors import (
    DegenerateDatasetError,
    InvalidParamsError,
    NoRepetitionsFoundError,
    RepCountMismatchWarning,
    TooShortError,
)
from repclf.prep import ecp_channel_scores

# --- Savitzky-Golay ----------------------------------------------------------


def savgol_window_oracle(x, window, polyorder):
    """Independent per-window least-squares fit evaluated at the center."""
    half = window // 2
    t = np.arange(-half, half + 1)
    out = np.full(len(x), np.nan)
    for i in range(half, len(x) - half):
        coeffs = np.polyfit(t, x[i - half : i + half + 1], polyorder)
        out[i] = coeffs[-1]  # polynomial value at t=0
    return out


class TestSmoothSavgol:
    def test_reproduces_low_degree_polynomials(self):
        t = np.linspace(0.0, 1.0, 60)
        for coeffs in ([2.0], [1.0, -0.5], [0.3, 1.0, 2.0], [1.0, -2.0, 0.5, 3.0]):
            x = np.polyval(coeffs, t)
            np.testing.assert_allclose(smooth_savgol(x, 11, 3), x, atol=1e-9)

    def test_constant_unchanged(self):
        x = np.full(40, 7.5)
        np.testing.assert_allclose(smooth_savgol(x, 11, 3), x, atol=1e-12)

    def test_matches_per_window_least_squares(self):
        rng = np.random.default_rng(42)
        x = rng.normal(0, 1, 120)
        smoothed = smooth_savgol(x, 11, 3)
        oracle = savgol_window_oracle(x, 11, 3)
        interior = slice(5, len(x) - 5)
        np.testing.assert_allclose(smoothed[interior], oracle[interior], atol=1e-9)

    def test_invalid_params(self):
        x = np.zeros(30)
        with pytest.raises(InvalidParamsError):
            smooth_savgol(x, 10, 3)  # even window
        with pytest.raises(InvalidParamsError):
            smooth_savgol(x, 11, 11)  # polyorder >= window
        with pytest.raises(InvalidParamsError):
            smooth_savgol(np.zeros(5), 11, 3)  # shorter than window


# --- peak detection ----------------------------------------------------------


def oracle_local_maxima(x):
    out = []
    i = 1
    while i < len(x) - 1:
        if x[i - 1] < x[i]:
            j = i
            while j < len(x) - 1 and x[j + 1] == x[i]:
                j += 1
            if j < len(x) - 1 and x[j + 1] < x[i]:
                out.append((i + j) // 2)
            i = j + 1
        else:
            i += 1
    return out


def oracle_prominence(x, p):
    left_min = x[p]
    i = p
    while i > 0 and x[i - 1] <= x[p]:
        i -= 1
        left_min = min(left_min, x[i])
    right_min = x[p]
    i = p
    while i < len(x) - 1 and x[i + 1] <= x[p]:
        i += 1
        right_min = min(right_min, x[i])
    return x[p] - max(left_min, right_min)


def oracle_detect_peaks(x, min_distance, min_prominence):
    """Enumerate all local maxima, filter by prominence, then greedily by
    distance in descending height order (ties by descending index)."""
    threshold = min_prominence * (max(x) - min(x))
    candidates = [p for p in oracle_local_maxima(x) if oracle_prominence(x, p) >= threshold]
    kept = []
    removed = set()
    for p in sorted(candidates, key=lambda p: (x[p], p), reverse=True):
        if p in removed:
            continue
        kept.append(p)
        for q in candidates:
            if q != p and q not in removed and abs(q - p) < min_distance:
                removed.add(q)
    return sorted(set(kept) - removed)


class TestDetectPeaks:
    def test_sine_wave_peak_count_and_positions(self):
        t = np.arange(300)
        x = np.sin(2 * np.pi * t / 30.0)
        peaks = detect_peaks(x, min_distance=15, min_prominence=0.1)
        assert len(peaks) == 10
        expected = 7.5 + 30.0 * np.arange(10)
        assert np.all(np.abs(peaks - expected) <= 1.0)

    def test_monotone_ramp_has_no_peaks(self):
        assert len(detect_peaks(np.arange(50.0), 1, 0.1)) == 0

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(123)
        for trial in range(20):
            t = np.arange(200)
            period = rng.uniform(18, 40)
            x = np.sin(2 * np.pi * t / period) + rng.normal(0, 0.35, 200)
            dist = int(rng.integers(1, 25))
            prom = float(rng.uniform(0.02, 0.3))
            got = detect_peaks(x, dist, prom).tolist()
            want = oracle_detect_peaks(x, dist, prom)
            assert got == want, f"trial {trial}: {got} != {want}"

    def test_affine_invariance(self):
        rng = np.random.default_rng(5)
        x = np.sin(np.arange(150) / 6.0) + rng.normal(0, 0.2, 150)
        base = detect_peaks(x, 5, 0.15)
        for a, b in ((2.5, 0.0), (0.1, -40.0), (1000.0, 7.0)):
            np.testing.assert_array_equal(detect_peaks(a * x + b, 5, 0.15), base)

    def test_short_input_empty(self):
        assert len(detect_peaks(np.array([1.0, 2.0]), 1, 0.1)) == 0


# --- repetition segmentation --------------------------------------------------

ANCHOR_NAMES = ("right_elbow_y", "right_wrist_y", "left_elbow_y", "left_wrist_y")


def bump_series(n_reps=10, period=90, amp=80.0, noise=0.0, lead=12, seed=0):
    rng = np.random.default_rng(seed)
    total = lead + n_reps * period + lead
    t = np.arange(total, dtype=float)
    bump = np.zeros(total)
    apexes = []
    for r in range(n_reps):
        start = lead + r * period
        inside = (t >= start) & (t < start + period)
        u = (t[inside] - start) / period
        bump[inside] = 0.5 * (1 - np.cos(2 * np.pi * u))
        apexes.append(start + period // 2)
    values = np.stack([300.0 + amp * bump + rng.normal(0, noise, total) for _ in range(4)])
    return MultivariateSeries(values, ANCHOR_NAMES), apexes


class TestSegmentRepetitions:
    def test_ten_bumps_give_ten_segments_one_peak_each(self):
        series, apexes = bump_series(n_reps=10, noise=1.5)
        segments = segment_repetitions(series, SegmentationParams())
        assert len(segments) == 10
        for (start, end), apex in zip(segments, apexes):
            assert start <= apex < end
        # non-overlapping, ordered, in range
        for (s0, e0), (s1, e1) in zip(segments[:-1], segments[1:]):
            assert e0 == s1
        assert segments[0][0] == 0 and segments[-1][1] == series.length

    def test_single_period_spans_whole_series(self):
        series, _ = bump_series(n_reps=1)
        segments = segment_repetitions(series, SegmentationParams())
        assert segments == [(0, series.length)]

    def test_flat_series_raises(self):
        values = np.full((4, 200), 42.0)
        series = MultivariateSeries(values, ANCHOR_NAMES)
        with pytest.raises(NoRepetitionsFoundError):
            segment_repetitions(series, SegmentationParams())

    def test_expected_reps_mismatch_warns(self):
        series, _ = bump_series(n_reps=6)
        with pytest.warns(RepCountMismatchWarning):
            segments = segment_repetitions(
                series, SegmentationParams(expected_reps=10)
            )
        assert len(segments) == 6

    def test_missing_anchor_channel_raises(self):
        series = MultivariateSeries(np.zeros((1, 50)), ("right_wrist_x",))
        with pytest.raises(InvalidParamsError):
            segment_repetitions(series, SegmentationParams())

    def test_inverted_anchor(self):
        series, _ = bump_series(n_reps=8)
        flipped = MultivariateSeries(-series.values, series.channel_names)
        segments = segment_repetitions(
            flipped, SegmentationParams(invert_anchor=True)
        )
        assert len(segments) == 8


class TestSegmentEqual:
    def test_even_division(self):
        series = MultivariateSeries(np.zeros((1, 100)), ("c",))
        assert segment_equal(series, 10) == [(i * 10, (i + 1) * 10) for i in range(10)]

    def test_remainder_goes_to_last(self):
        series = MultivariateSeries(np.zeros((1, 101)), ("c",))
        segments = segment_equal(series, 10)
        assert segments[-1] == (90, 101)
        assert segments[0] == (0, 10)

    def test_single_window(self):
        series = MultivariateSeries(np.zeros((1, 37)), ("c",))
        assert segment_equal(series, 1) == [(0, 37)]

    def test_invalid(self):
        series = MultivariateSeries(np.zeros((1, 5)), ("c",))
        with pytest.raises(InvalidParamsError):
            segment_equal(series, 0)
        with pytest.raises(InvalidParamsError):
            segment_equal(series, 6)


# --- cubic resampling ----------------------------------------------------------


class TestResampleCubic:
    def test_constant_channel(self):
        series = MultivariateSeries(np.full((2, 9), 3.25), ("a", "b"))
        out = resample_cubic(series, 161)
        assert out.values.shape == (2, 161)
        np.testing.assert_allclose(out.values, 3.25, atol=1e-12)

    def test_linear_ramp(self):
        series = MultivariateSeries(np.linspace(0, 1, 50)[None, :], ("a",))
        out = resample_cubic(series, 161)
        np.testing.assert_allclose(out.values[0], np.linspace(0, 1, 161), atol=1e-9)

    def test_smooth_sinusoid_matches_analytic(self):
        def f(t):
            return np.sin(2 * np.pi * 1.5 * t) + 0.3 * np.cos(2 * np.pi * 0.7 * t)

        src = np.linspace(0.0, 1.0, 80)
        series = MultivariateSeries(f(src)[None, :], ("a",))
        out = resample_cubic(series, 161)
        expected = f(np.linspace(0.0, 1.0, 161))
        scale = np.abs(expected).max()
        assert np.max(np.abs(out.values[0] - expected)) < 1e-3 * scale

    def test_identity_when_grids_coincide(self):
        rng = np.random.default_rng(0)
        values = rng.normal(0, 1, (3, 64))
        series = MultivariateSeries(values, ("a", "b", "c"))
        out = resample_cubic(series, 64)
        np.testing.assert_allclose(out.values, values, atol=1e-9)

    def test_endpoints_preserved(self):
        rng = np.random.default_rng(1)
        values = rng.normal(0, 10, (1, 30))
        out = resample_cubic(MultivariateSeries(values, ("a",)), 101)
        assert out.values[0, 0] == pytest.approx(values[0, 0], abs=1e-9)
        assert out.values[0, -1] == pytest.approx(values[0, -1], abs=1e-9)

    def test_too_short(self):
        series = MultivariateSeries(np.zeros((1, 3)), ("a",))
        with pytest.raises(TooShortError):
            resample_cubic(series, 10)
        with pytest.raises(InvalidParamsError):
            resample_cubic(MultivariateSeries(np.zeros((1, 10)), ("a",)), 1)


# --- z-normalization -----------------------------------------------------------


class TestZnormalize:
    def test_mean_zero_sd_one(self):
        out = znormalize(np.array([1.0, 2.0, 3.0]))
        assert out.mean() == pytest.approx(0.0, abs=1e-12)
        assert out.std() == pytest.approx(1.0, abs=1e-12)

    def test_constant_maps_to_zeros(self):
        np.testing.assert_array_equal(znormalize(np.full(10, 4.2)), np.zeros(10))

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        x = rng.normal(3, 2, 50)
        np.testing.assert_allclose(znormalize(7.5 * x), znormalize(x), atol=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        x = rng.normal(0, 5, (4, 30))
        once = znormalize(x)
        np.testing.assert_allclose(znormalize(once), once, atol=1e-9)

    def test_mixed_constant_and_varying_channels(self):
        x = np.stack([np.full(20, 9.0), np.arange(20.0)])
        out = znormalize(x)
        np.testing.assert_array_equal(out[0], np.zeros(20))
        assert out[1].std() == pytest.approx(1.0)


# --- ECP channel selection ------------------------------------------------------


def ecp_oracle(X, labels):
    classes = sorted(set(labels))
    scores = np.zeros(X.shape[1])
    for c in range(X.shape[1]):
        centroids = []
        for cls in classes:
            rows = [X[i, c] for i in range(len(labels)) if labels[i] == cls]
            centroids.append(np.mean(rows, axis=0))
        total = 0.0
        for i in range(len(classes)):
            for j in range(i + 1, len(classes)):
                total += np.sqrt(np.sum((centroids[i] - centroids[j]) ** 2))
        scores[c] = total
    return scores


class TestChannelSelection:
    def make_data(self, seed=0):
        rng = np.random.default_rng(seed)
        n, length = 40, 30
        labels = np.array(["a", "b", "c", "d"] * 10)
        X = np.zeros((n, 5, length))
        offsets = {"a": 0.0, "b": 2.0, "c": 4.0, "d": 6.0}
        for i, lbl in enumerate(labels):
            X[i, 2] = offsets[lbl] + rng.normal(0, 0.01, length)  # informative
            for c in (0, 1, 3, 4):
                X[i, c] = 1.0  # constant
        return X, labels

    def test_informative_channel_ranked_first(self):
        X, labels = self.make_data()
        scores = ecp_channel_scores(X, labels)
        assert np.argmax(scores) == 2
        assert scores[2] > 0
        np.testing.assert_allclose(scores[[0, 1, 3, 4]], 0.0, atol=1e-9)
        selected = select_channels_ecp(X, labels)
        assert selected[0] == 2

    def test_scores_match_brute_force(self):
        rng = np.random.default_rng(9)
        X = rng.normal(0, 1, (30, 6, 20))
        labels = np.array(["x", "y", "z"] * 10)
        np.testing.assert_allclose(
            ecp_channel_scores(X, labels), ecp_oracle(X, labels), atol=1e-9
        )

    def test_ranking_invariant_to_sample_order(self):
        rng = np.random.default_rng(10)
        X = rng.normal(0, 1, (24, 8, 15))
        labels = np.array(["x", "y", "z"] * 8)
        base = select_channels_ecp(X, labels, keep=8)
        perm = rng.permutation(len(labels))
        shuffled = select_channels_ecp(X[perm], labels[perm], keep=8)
        np.testing.assert_array_equal(base, shuffled)

    def test_keep_override(self):
        X, labels = self.make_data()
        assert len(select_channels_ecp(X, labels, keep=3)) == 3
        with pytest.raises(InvalidParamsError):
            select_channels_ecp(X, labels, keep=0)

    def test_single_class_raises(self):
        X = np.zeros((10, 3, 5))
        with pytest.raises(DegenerateDatasetError):
            select_channels_ecp(X, np.array(["a"] * 10))

    def test_accepts_dataset(self, small_dataset):
        selected = select_channels_ecp(small_dataset)
        assert 1 <= len(selected) <= small_dataset.n_channels
        with_arrays = select_channels_ecp(small_dataset.X, small_dataset.labels)
        np.testing.assert_array_equal(selected, with_arrays)
