"""Input validation helpers shared by the estimators and the CLI."""

import math

import numpy as np
from sklearn.utils.validation import check_array

from .blocks import BlockMaxima
from .ingest import ReturnSeries


def check_maxima(X):
    """Coerce ``X`` to a finite 1-d float array of block maxima.

    Accepts a :class:`BlockMaxima`, a 1-d array-like, or a single-column
    2-d array (the sklearn convention).
    """
    if isinstance(X, BlockMaxima):
        return np.asarray(X.values, dtype=float)
    arr = check_array(X, ensure_2d=False, dtype=np.float64, ensure_all_finite=True)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected a single column of maxima, got shape {arr.shape}")
        arr = arr[:, 0]
    return arr


def check_series(X):
    """Coerce ``X`` to a :class:`ReturnSeries`.

    pandas Series with a datetime index are converted; undated arrays get
    consecutive daily dates, which only makes sense for fixed-count blocks.
    """
    if isinstance(X, ReturnSeries):
        return X
    index = getattr(X, "index", None)
    if index is not None and np.issubdtype(np.asarray(index).dtype, np.datetime64):
        return ReturnSeries.from_pandas(X)
    arr = check_maxima(X)
    dates = np.datetime64("1970-01-01") + np.arange(arr.size)
    return ReturnSeries(dates, arr)


def check_k(k):
    k = float(k)
    if not k > 1 or not math.isfinite(k):
        raise ValueError(f"return period k must be > 1, got {k}")
    return k


def check_level(level):
    level = float(level)
    if not 0 < level < 1:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    return level


def check_fraction(fraction):
    fraction = float(fraction)
    if not 0 < fraction < 0.5:
        raise ValueError(f"tail fraction must lie in (0, 0.5), got {fraction}")
    return fraction
