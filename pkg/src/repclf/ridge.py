"""Feature standardization and a ridge classifier with closed-form LOO-CV.

The classifier regresses one-vs-rest +/-1 indicator targets with an
unpenalized intercept. Leave-one-out residuals for every alpha on the
grid come from the hat-matrix identity ``e_loo = e / (1 - h_ii)``,
evaluated through a single SVD of the centered feature matrix that is
reused across the whole grid (SVD rather than normal equations for
conditioning when features far outnumber samples).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import (
    DegenerateLabelsError,
    NumericalError,
    ShapeMismatchError,
    TooFewSamplesError,
)

DEFAULT_ALPHAS = tuple(float(a) for a in np.logspace(-3, 3, 10))


def _check_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeMismatchError(f"{name} must be 2-d, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ShapeMismatchError(f"{name} contains non-finite values")
    return X


class ColumnScaler(BaseEstimator, TransformerMixin):
    """Per-column standardization fitted on training features.

    Zero-variance columns keep scale 1, so they come out all-zero after
    centering. Needed because max-pooled and PPV features live on very
    different scales.
    """

    def fit(self, X, y=None):
        X = _check_matrix(X)
        if X.shape[0] < 2:
            raise TooFewSamplesError(f"scaler needs >= 2 samples, got {X.shape[0]}")
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale_ = scale
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "mean_"):
            raise NotFittedError("ColumnScaler is not fitted")
        X = _check_matrix(X)
        if X.shape[1] != self.mean_.shape[0]:
            raise ShapeMismatchError(
                f"X has {X.shape[1]} columns, scaler was fitted on {self.mean_.shape[0]}"
            )
        return (X - self.mean_) / self.scale_


def fit_scaler(X) -> ColumnScaler:
    return ColumnScaler().fit(X)


def apply_scaler(scaler: ColumnScaler, X) -> np.ndarray:
    return scaler.transform(X)


def loo_errors(X: np.ndarray, Y: np.ndarray, alphas) -> np.ndarray:
    """Exact leave-one-out residuals of ridge-with-intercept per alpha.

    For centered data the ones direction is orthogonal to the column
    space, so with the SVD ``Xc = U diag(s) V^T`` the hat-matrix diagonal
    and LOO residuals of every alpha are closed-form in ``U`` and ``s``;
    the decomposition is computed once and shared across the grid.

    Returns an array of shape (n_alphas, n_samples, n_targets).
    """
    X = _check_matrix(X)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    n = X.shape[0]
    Xc = X - X.mean(axis=0)
    Yc = Y - Y.mean(axis=0)
    try:
        U, s, _ = np.linalg.svd(Xc, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}") from exc
    UTY = U.T @ Yc
    U2 = U**2
    out = np.empty((len(alphas), n, Y.shape[1]), dtype=np.float64)
    for a, alpha in enumerate(alphas):
        w = 1.0 / (s**2 + alpha) - 1.0 / alpha
        c = U @ (w[:, None] * UTY) + Yc / alpha
        d = U2 @ w + 1.0 / alpha - 1.0 / (n * alpha)
        out[a] = c / d[:, None]
    return out


class RidgeClassifierLOO(BaseEstimator, ClassifierMixin):
    """One-vs-rest ridge classifier with grid-searched regularization.

    Targets are +/-1 class indicators. The alpha with the lowest mean
    squared leave-one-out residual wins and the final weights are refit
    on all data. Prediction is the argmax of per-class scores
    ``x @ coef_ + intercept_``; exact ties go to the lowest class index.

    Attributes
    ----------
    classes_ : sorted class labels
    coef_ : (n_features, n_classes) weight matrix
    intercept_ : (n_classes,)
    alpha_ : selected regularization strength (an element of ``alphas``)
    loo_mse_ : (n_alphas,) mean squared LOO residual per grid point
    """

    def __init__(self, alphas=DEFAULT_ALPHAS):
        self.alphas = alphas

    def fit(self, X, y):
        X = _check_matrix(X)
        y = np.asarray(y)
        if len(y) != X.shape[0]:
            raise ShapeMismatchError(f"{len(y)} labels for {X.shape[0]} samples")
        alphas = np.asarray(self.alphas, dtype=np.float64)
        if alphas.ndim != 1 or len(alphas) == 0 or np.any(alphas <= 0):
            raise ShapeMismatchError("alphas must be a non-empty sequence of positive values")
        self.classes_ = np.unique(y)
        if len(self.classes_) < 2:
            raise DegenerateLabelsError(f"need >= 2 classes, got {len(self.classes_)}")
        Y = np.where(y[:, None] == self.classes_[None, :], 1.0, -1.0)

        errors = loo_errors(X, Y, alphas)
        self.loo_mse_ = (errors**2).mean(axis=(1, 2))
        best = int(np.argmin(self.loo_mse_))
        self.alpha_ = float(alphas[best])

        x_mean = X.mean(axis=0)
        y_mean = Y.mean(axis=0)
        Xc = X - x_mean
        try:
            U, s, Vt = np.linalg.svd(Xc, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD failed: {exc}") from exc
        shrink = s / (s**2 + self.alpha_)
        self.coef_ = Vt.T @ (shrink[:, None] * (U.T @ (Y - y_mean)))
        self.intercept_ = y_mean - x_mean @ self.coef_
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "coef_"):
            raise NotFittedError("RidgeClassifierLOO is not fitted")
        X = _check_matrix(X)
        if X.shape[1] != self.coef_.shape[0]:
            raise ShapeMismatchError(
                f"X has {X.shape[1]} columns, model expects {self.coef_.shape[0]}"
            )
        return X @ self.coef_ + self.intercept_

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]


def ridge_fit(X, labels, alphas=DEFAULT_ALPHAS) -> RidgeClassifierLOO:
    return RidgeClassifierLOO(alphas=alphas).fit(X, labels)


def predict(model: RidgeClassifierLOO, X) -> np.ndarray:
    return model.predict(X)


def predict_scores(model: RidgeClassifierLOO, X) -> np.ndarray:
    return model.decision_function(X)
