"""scikit-learn compatible transformers over batches of realisations.

Rows of ``X`` are paths ``X_1 .. X_n``; columns are time steps.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import TWO_PI, check_paths, check_theta
from .fourier import goertzel_batch


def _check_thetas(thetas):
    ts = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
    if ts.ndim != 1 or ts.size == 0:
        raise ValueError("thetas must be a non-empty 1-D list of frequencies")
    for t in ts:
        check_theta(float(t))
    return ts


class _FrequencyTransformer(TransformerMixin, BaseEstimator):
    def __init__(self, thetas=(2.0,)):
        self.thetas = thetas

    def fit(self, X, y=None):
        X = check_paths(X)
        self.thetas_ = _check_thetas(self.thetas)
        self.n_features_in_ = X.shape[1]
        return self

    def _validated(self, X):
        check_is_fitted(self, "thetas_")
        X = check_paths(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} time steps, but {type(self).__name__} was fitted with "
                f"{self.n_features_in_}"
            )
        return X

    def _sums(self, X):
        return np.stack([goertzel_batch(X, t) for t in self.thetas_], axis=1)


class FourierTransformer(_FrequencyTransformer):
    """Map each path to ``(Re, Im)`` of ``S_n(theta)`` at every frequency.

    Output columns are ``Re(theta_0), Im(theta_0), Re(theta_1), ...``, divided
    by ``sqrt(n)`` when ``normalize`` is true.

    Parameters
    ----------
    thetas : sequence of float
        Frequencies in radians.
    normalize : bool, default=True
        Scale by ``1/sqrt(n)`` so the columns have the limiting variance
        ``g(theta)/2``.
    """

    def __init__(self, thetas=(2.0,), normalize=True):
        super().__init__(thetas)
        self.normalize = normalize

    def transform(self, X):
        X = self._validated(X)
        S = self._sums(X)
        if self.normalize:
            S = S / np.sqrt(X.shape[1])
        out = np.empty((X.shape[0], 2 * S.shape[1]))
        out[:, 0::2] = S.real
        out[:, 1::2] = S.imag
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "thetas_")
        names = []
        for i in range(self.thetas_.size):
            names += [f"re_theta{i}", f"im_theta{i}"]
        return np.asarray(names, dtype=object)


class PeriodogramTransformer(_FrequencyTransformer):
    """Map each path to its periodogram ``|S_n(theta)|^2 / (2 pi n)`` at every frequency."""

    def transform(self, X):
        X = self._validated(X)
        S = self._sums(X)
        return (S.real ** 2 + S.imag ** 2) / (TWO_PI * X.shape[1])

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "thetas_")
        return np.asarray([f"periodogram_theta{i}" for i in range(self.thetas_.size)], dtype=object)
