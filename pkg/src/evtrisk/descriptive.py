"""Summary statistics, Jarque-Bera, tail subsets and normal QQ data."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .exceptions import DegenerateDataError

__all__ = [
    "JB_CRITICAL_CHI2_1",
    "JB_CRITICAL_CHI2_2",
    "QqData",
    "SummaryStats",
    "jarque_bera",
    "qq_normal",
    "summarize",
    "tail_subset",
]

# 5% points of chi-square with one and two degrees of freedom; reports
# carry both, the p-value uses two.
JB_CRITICAL_CHI2_1 = 3.841458820694124
JB_CRITICAL_CHI2_2 = 5.991464547107979


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    std_dev: float
    min: float
    max: float
    skewness: float
    kurtosis: float
    jarque_bera: float
    jb_p_value: float

    def to_dict(self):
        return asdict(self)


def _values(series):
    return np.asarray(getattr(series, "values", series), dtype=float).ravel()


def _moments(x):
    d = x - x.mean()
    m2 = np.mean(d**2)
    if m2 == 0:
        raise DegenerateDataError("sample has zero variance")
    skew = np.mean(d**3) / m2**1.5
    kurt = np.mean(d**4) / m2**2
    return float(skew), float(kurt)


def jarque_bera(x):
    """Jarque-Bera statistic and its chi-square(2) p-value."""
    x = _values(x)
    skew, kurt = _moments(x)
    jb = x.size / 6.0 * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    return jb, float(stats.chi2.sf(jb, 2))


def summarize(series):
    """Table-style summary of a return sample.

    Skewness and kurtosis use population (``1/n``) central moments and the
    kurtosis is raw, so a normal sample gives about 3.  ``std_dev`` uses
    the ``n - 1`` denominator.
    """
    x = _values(series)
    if x.size < 4:
        raise ValueError(f"need at least 4 observations, got {x.size}")
    skew, kurt = _moments(x)
    jb, p = jarque_bera(x)
    return SummaryStats(
        n=int(x.size),
        mean=float(x.mean()),
        std_dev=float(x.std(ddof=1)),
        min=float(x.min()),
        max=float(x.max()),
        skewness=skew,
        kurtosis=kurt,
        jarque_bera=float(jb),
        jb_p_value=p,
    )


def tail_subset(series, tail, fraction=0.10):
    """The ``ceil(n * fraction)`` largest or smallest returns, in date order."""
    if tail not in ("upper", "lower"):
        raise ValueError("tail must be 'upper' or 'lower'")
    if not 0 < fraction < 0.5:
        raise ValueError("fraction must lie in (0, 0.5)")
    n = len(series)
    count = math.ceil(n * fraction - 1e-9)
    if count < 1:
        raise ValueError("tail subset would be empty")
    # stable sort keeps the earliest date first among ties
    order = np.argsort(series.values, kind="stable")
    picked = order[-count:] if tail == "upper" else order[:count]
    mask = np.zeros(n, dtype=bool)
    mask[picked] = True
    return series.subset(mask)


@dataclass(frozen=True)
class QqData:
    theoretical: np.ndarray
    empirical: np.ndarray

    @property
    def points(self):
        return list(zip(self.theoretical.tolist(), self.empirical.tolist()))

    def __len__(self):
        return self.theoretical.size

    def to_csv(self, path):
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["theoretical", "empirical"])
            for t, e in self.points:
                writer.writerow([repr(t), repr(e)])


def qq_normal(series):
    """Order statistics against normal quantiles at Hazen positions.

    The normal reference uses the sample's own mean and standard deviation,
    so points of a normal sample fall on the identity line.
    """
    x = np.sort(_values(series))
    n = x.size
    if n < 2:
        raise ValueError("need at least 2 observations")
    sd = x.std(ddof=1)
    if sd == 0:
        raise DegenerateDataError("sample has zero standard deviation")
    probs = (np.arange(1, n + 1) - 0.5) / n
    theo = x.mean() + sd * stats.norm.ppf(probs)
    return QqData(theoretical=theo, empirical=x)
