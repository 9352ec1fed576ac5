"""scikit-learn compatible wrappers.

``BlockMaximaTransformer`` turns a dated return series into block maxima and
``GEVEstimator`` fits them, so the two chain in a :class:`sklearn.pipeline.Pipeline`::

    pipe = make_pipeline(BlockMaximaTransformer(scheme="month"), GEVEstimator())
    pipe.fit(returns)
    pipe[-1].return_level(20)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .blocks import DEFAULT_MIN_EDGE_OBS, BlockMaxima, BlockScheme, extract_block_maxima
from .gev import FitConfig, fit_gev, gev_cdf, gev_loglik, gev_sample
from .inference import attach_param_cis, profile_ci_level, profile_ci_param, return_level
from .validation import check_k, check_level, check_maxima, check_series


class BlockMaximaTransformer(TransformerMixin, BaseEstimator):
    """Extract per-block maxima from a return series.

    Parameters
    ----------
    scheme : str or BlockScheme, default="month"
        ``month``, ``quarter``, ``semester`` or ``count:<m>``.
    tail : {"upper", "lower"}, default="upper"
        ``lower`` yields negated block minima.
    min_edge_obs : int, default=5
        Edge blocks with fewer observations are dropped.
    """

    def __init__(self, scheme="month", tail="upper", min_edge_obs=DEFAULT_MIN_EDGE_OBS):
        self.scheme = scheme
        self.tail = tail
        self.min_edge_obs = min_edge_obs

    def fit(self, X, y=None):
        self.scheme_ = BlockScheme.parse(self.scheme)
        if self.tail not in ("upper", "lower"):
            raise ValueError("tail must be 'upper' or 'lower'")
        return self

    def transform(self, X):
        check_is_fitted(self, "scheme_")
        return extract_block_maxima(check_series(X), self.scheme_, self.tail, self.min_edge_obs)


class GEVEstimator(BaseEstimator):
    """Maximum-likelihood GEV fit to block maxima.

    Parameters
    ----------
    n_restarts : int, default=5
        Jittered optimiser restarts on top of the moment-based start.
    min_maxima : int, default=10
    compute_cis : bool, default=False
        Attach profile-likelihood intervals for all parameters in ``fit``.
    level : float, default=0.95
        Confidence level for every interval.
    random_state : int, default=0
        Seed for the restart jitter.

    Attributes
    ----------
    fit_ : GevFit
    params_ : GevParams
    shape_, scale_, location_ : float
    log_lik_ : float
    n_maxima_ : int
    """

    def __init__(self, n_restarts=5, min_maxima=10, compute_cis=False, level=0.95, random_state=0):
        self.n_restarts = n_restarts
        self.min_maxima = min_maxima
        self.compute_cis = compute_cis
        self.level = level
        self.random_state = random_state

    def _config(self):
        return FitConfig(n_restarts=self.n_restarts, min_maxima=self.min_maxima, jitter_seed=self.random_state)

    def fit(self, X, y=None):
        level = check_level(self.level)
        x = check_maxima(X)
        tail = X.tail if isinstance(X, BlockMaxima) else "upper"
        scheme = X.scheme if isinstance(X, BlockMaxima) else None
        fit = fit_gev(x, self._config(), tail=tail, scheme=scheme)
        if self.compute_cis and fit.converged:
            fit = attach_param_cis(x, fit, level)
        self.maxima_ = x
        self.fit_ = fit
        self.params_ = fit.params
        self.shape_, self.scale_, self.location_ = fit.params.as_tuple()
        self.log_lik_ = fit.log_lik
        self.n_maxima_ = fit.n_maxima
        return self

    def score(self, X, y=None):
        """Total log-likelihood of ``X`` under the fitted distribution."""
        check_is_fitted(self, "fit_")
        return gev_loglik(self.params_, check_maxima(X))

    def transform(self, X):
        """Probability-integral transform ``F(x)`` of each maximum."""
        check_is_fitted(self, "fit_")
        return np.asarray(gev_cdf(self.params_, check_maxima(X)))

    def return_level(self, k):
        """Point estimate of the ``k``-block return level; ``k`` may be a list."""
        check_is_fitted(self, "fit_")
        if np.ndim(k):
            return np.array([return_level(self.params_, check_k(v)) for v in k])
        return return_level(self.params_, check_k(k))

    def return_level_ci(self, k):
        check_is_fitted(self, "fit_")
        return profile_ci_level(self.maxima_, self.fit_, check_k(k), check_level(self.level))

    def param_ci(self, which):
        check_is_fitted(self, "fit_")
        interval, _ = profile_ci_param(self.maxima_, self.fit_, which, check_level(self.level))
        return interval

    def sample(self, n, random_state=None):
        check_is_fitted(self, "fit_")
        seed = self.random_state if random_state is None else random_state
        return gev_sample(self.params_, n, seed)
