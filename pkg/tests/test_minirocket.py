import numpy as np
import pytest

from repclf import MiniRocketFeatures, minirocket_fit, minirocket_transform
from repclf.errors import EmptyDatasetError, InvalidParamsError, ShapeMismatchError
from repclf.minirocket import KERNEL_INDICES, KERNEL_LENGTH, NUM_KERNELS


def oracle_combo_conv(sample, dilation, kernel_row, channels):
    """Direct positionwise dilated convolution with {-1, 2} weights."""
    t = sample.shape[1]
    weights = np.full(KERNEL_LENGTH, -1.0)
    weights[list(kernel_row)] = 2.0
    z = np.zeros(t)
    for pos in range(t):
        acc = 0.0
        for c in channels:
            for j in range(KERNEL_LENGTH):
                src = pos + (j - KERNEL_LENGTH // 2) * dilation
                if 0 <= src < t:
                    acc += weights[j] * sample[c, src]
        z[pos] = acc
    return z


def combo_region(params, combo, z):
    di, k = divmod(combo, NUM_KERNELS)
    if (di % 2 + k) % 2 == 0:
        return z
    pad = (KERNEL_LENGTH // 2) * int(params.dilations[di])
    return z[pad : params.input_length - pad]


@pytest.fixture(scope="module")
def train():
    rng = np.random.default_rng(21)
    return rng.normal(250.0, 40.0, (8, 3, 50))


@pytest.fixture(scope="module")
def params(train):
    return minirocket_fit(train, num_features=840, seed=5)


class TestFit:
    def test_deterministic(self, train):
        p1 = minirocket_fit(train, num_features=840, seed=5)
        p2 = minirocket_fit(train, num_features=840, seed=5)
        for name in ("dilations", "num_features_per_dilation", "quantiles", "biases",
                     "channel_counts", "channel_indices", "fit_sample_indices"):
            np.testing.assert_array_equal(getattr(p1, name), getattr(p2, name))

    def test_feature_count_close_to_requested(self, params):
        assert params.num_features == NUM_KERNELS * (840 // NUM_KERNELS)
        fitted = minirocket_fit(np.zeros((1, 2, 161)) + np.arange(161), num_features=10_000)
        assert fitted.num_features == 9996  # largest multiple of 84 under 10000

    def test_dilations_capped_by_input_length(self, params):
        assert np.all((KERNEL_LENGTH - 1) * params.dilations <= 49)

    def test_biases_are_attained_conv_outputs(self, train, params):
        rng = np.random.default_rng(3)
        for combo in rng.integers(0, params.num_combinations, 10):
            combo = int(combo)
            di, k = divmod(combo, NUM_KERNELS)
            channels = params.channel_indices[
                params.channel_starts[combo] : params.channel_starts[combo + 1]
            ]
            z = oracle_combo_conv(
                train[int(params.fit_sample_indices[combo])],
                int(params.dilations[di]),
                KERNEL_INDICES[k],
                channels,
            )
            region = combo_region(params, combo, z)
            scale = max(1.0, np.abs(region).max())
            for f in range(params.feature_starts[combo], params.feature_starts[combo + 1]):
                assert np.min(np.abs(region - params.biases[f])) < 1e-9 * scale

    def test_empty_and_invalid(self):
        with pytest.raises(EmptyDatasetError):
            minirocket_fit(np.zeros((0, 2, 50)))
        with pytest.raises(InvalidParamsError):
            minirocket_fit(np.zeros((2, 2, 8)))
        with pytest.raises(InvalidParamsError):
            minirocket_fit(np.zeros((2, 2, 50)), num_features=50)


class TestTransform:
    def test_features_in_unit_interval(self, train, params):
        F = minirocket_transform(train, params)
        assert F.shape == (len(train), params.num_features)
        assert np.all(F >= 0.0) and np.all(F <= 1.0)

    def test_deterministic_given_params(self, train, params):
        np.testing.assert_array_equal(
            minirocket_transform(train, params), minirocket_transform(train, params)
        )

    def test_end_to_end_repeat_bit_identical(self, train):
        f1 = minirocket_transform(train, minirocket_fit(train, num_features=840, seed=9))
        f2 = minirocket_transform(train, minirocket_fit(train, num_features=840, seed=9))
        np.testing.assert_array_equal(f1, f2)

    def test_ppv_at_own_quantile(self, train, params):
        """On the sample that supplied a bias, PPV sits near 1 - quantile."""
        F = minirocket_transform(train, params)
        lengths = params.feature_region_lengths()
        for combo in range(params.num_combinations):
            n = int(params.fit_sample_indices[combo])
            for f in range(params.feature_starts[combo], params.feature_starts[combo + 1]):
                tol = 1.0 / lengths[f] + 1e-12
                assert abs(F[n, f] - (1.0 - params.quantiles[f])) <= tol

    def test_scale_invariance_power_of_two_exact(self, train):
        base = minirocket_transform(train, minirocket_fit(train, num_features=840, seed=2))
        scaled = 8.0 * train
        refit = minirocket_transform(scaled, minirocket_fit(scaled, num_features=840, seed=2))
        np.testing.assert_array_equal(base, refit)

    def test_scale_invariance_factor_ten(self, train):
        """Scaling all data by 10 and refitting leaves features unchanged up
        to at most one rounding-tied position per feature."""
        params = minirocket_fit(train, num_features=840, seed=2)
        base = minirocket_transform(train, params)
        scaled = 10.0 * train
        params10 = minirocket_fit(scaled, num_features=840, seed=2)
        refit = minirocket_transform(scaled, params10)
        allowance = 1.0 / params.feature_region_lengths() + 1e-12
        assert np.all(np.abs(refit - base) <= allowance[None, :])

    def test_transform_matches_fit_conv_oracle(self, train, params):
        """Feature values recomputed from the brute-force convolution."""
        F = minirocket_transform(train, params)
        rng = np.random.default_rng(8)
        for combo in rng.integers(0, params.num_combinations, 6):
            combo = int(combo)
            di, k = divmod(combo, NUM_KERNELS)
            channels = params.channel_indices[
                params.channel_starts[combo] : params.channel_starts[combo + 1]
            ]
            for n in (0, 3):
                z = oracle_combo_conv(
                    train[n], int(params.dilations[di]), KERNEL_INDICES[k], channels
                )
                region = combo_region(params, combo, z)
                for f in range(
                    params.feature_starts[combo], params.feature_starts[combo + 1]
                ):
                    want = float((region > params.biases[f]).mean())
                    # brute-force summation order differs; a tied output can
                    # flip one position
                    assert abs(F[n, f] - want) <= 1.0 / len(region) + 1e-12

    def test_shape_mismatch(self, train, params):
        with pytest.raises(ShapeMismatchError):
            minirocket_transform(train[:, :, :30], params)
        with pytest.raises(ShapeMismatchError):
            minirocket_transform(train[:, :2], params)


class TestEstimator:
    def test_fit_transform(self, train):
        est = MiniRocketFeatures(num_features=840, random_state=1)
        F = est.fit(train).transform(train)
        assert F.shape[1] == 840
        assert est.get_params()["num_features"] == 840

    def test_unfitted_raises(self, train):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            MiniRocketFeatures().transform(train)
