"""The bundled synthetic index used for examples and golden-file tests.

Generator: business days (Mon-Fri, no holidays) from 1985-01-01 to
2000-12-31, i.e. 16 calendar years or 192 months.  Daily percent log
returns are Student-t with 4 degrees of freedom scaled to unit standard
deviation, drawn from ``numpy.random.default_rng(1985)`` (PCG64).  Prices
start at 1000 and compound the returns.
"""

from importlib import resources

import numpy as np

from .ingest import PriceSeries, load_csv

FIXTURE_NAME = "synthetic_index.csv"
FIXTURE_SEED = 1985
START, END = "1985-01-01", "2001-01-01"
T_DOF = 4


def make_synthetic_prices(seed=FIXTURE_SEED, start=START, end=END, label="SYNTH"):
    """Regenerate the synthetic price series (``end`` is exclusive)."""
    dates = np.arange(np.datetime64(start), np.datetime64(end), dtype="datetime64[D]")
    dates = dates[np.is_busday(dates)]
    rng = np.random.default_rng(seed)
    # t(4) has variance 2
    rets = rng.standard_t(T_DOF, size=dates.size - 1) / np.sqrt(2.0)
    log_prices = np.log(1000.0) + np.concatenate([[0.0], np.cumsum(rets / 100.0)])
    prices = np.round(np.exp(log_prices), 6)
    return PriceSeries(dates, prices, label)


def fixture_path():
    """Filesystem path of the bundled CSV."""
    return resources.files("evtrisk") / "data" / FIXTURE_NAME


def load_fixture():
    return load_csv(fixture_path(), kind="prices", label="SYNTH")
