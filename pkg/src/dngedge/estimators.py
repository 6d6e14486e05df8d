"""scikit-learn style wrappers around the helicoid spectra.

Rows of ``X`` are ``(mu, mass, R)``. Both estimators support ``partial_fit`` so
parameter ensembles can be streamed in chunks.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .helicoid import background_solve, bulk_spectrum, endpoint_modes


def _rows(X):
    X = check_array(X, dtype=float)
    if X.shape[1] != 3:
        raise ValueError(f"expected rows (mu, mass, R), got {X.shape[1]} columns")
    return X


class EndpointModeAnalyzer(TransformerMixin, BaseEstimator):
    """Endpoint eigenfrequencies of the rotating string.

    ``transform`` returns eight columns: real and imaginary parts of the four roots.
    ``predict`` returns 1 where all four roots are complex.
    """

    def __init__(self, rel_tol=1e-8):
        self.rel_tol = rel_tol

    def fit(self, X, y=None):
        self.backgrounds_ = []
        self.u_ = np.empty(0)
        return self.partial_fit(X, y)

    def partial_fit(self, X, y=None):
        X = _rows(X)
        if not hasattr(self, "backgrounds_"):
            self.backgrounds_, self.u_ = [], np.empty(0)
        new = [background_solve(*row) for row in X]
        self.backgrounds_ = self.backgrounds_ + new
        self.u_ = np.concatenate([self.u_, [bg.u for bg in new]])
        self.n_features_in_ = 3
        return self

    def _roots(self, X):
        return np.array([endpoint_modes(background_solve(*row)).roots for row in _rows(X)])

    def transform(self, X):
        check_is_fitted(self, "backgrounds_")
        r = self._roots(X)
        return np.concatenate([r.real, r.imag], axis=1)

    def predict(self, X):
        check_is_fitted(self, "backgrounds_")
        r = self._roots(X)
        return np.all(np.abs(r.imag) > self.rel_tol * np.abs(r), axis=1).astype(int)


class BulkSpectrumEstimator(TransformerMixin, BaseEstimator):
    """Lowest Dirichlet eigenvalues Omega^2 of one bulk channel per row."""

    def __init__(self, channel=1, n_modes=5, points=4000):
        self.channel = channel
        self.n_modes = n_modes
        self.points = points

    def fit(self, X, y=None):
        self.spectra_ = np.empty((0, self.n_modes))
        return self.partial_fit(X, y)

    def partial_fit(self, X, y=None):
        if not hasattr(self, "spectra_"):
            self.spectra_ = np.empty((0, self.n_modes))
        self.spectra_ = np.vstack([self.spectra_, self.transform_unfitted(X)])
        self.n_features_in_ = 3
        return self

    def transform_unfitted(self, X):
        out = [bulk_spectrum(background_solve(*row), self.channel, self.n_modes, points=self.points)["omega2"]
               for row in _rows(X)]
        return np.array(out).reshape(-1, self.n_modes)

    def transform(self, X):
        check_is_fitted(self, "spectra_")
        return self.transform_unfitted(X)
