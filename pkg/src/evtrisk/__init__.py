"""Block-maxima extreme value analysis of financial return series."""

__version__ = "0.1.0"

from .blocks import BlockMaxima, BlockScheme, extract_block_maxima  # noqa: E402
from .descriptive import QqData, SummaryStats, qq_normal, summarize, tail_subset  # noqa: E402
from .exceptions import ConvergenceError, DataError, DegenerateDataError, EvtError, TooFewMaximaError  # noqa: E402
from .estimators import BlockMaximaTransformer, GEVEstimator  # noqa: E402
from .gev import (  # noqa: E402
    FitConfig,
    GevFit,
    GevParams,
    fit_gev,
    gev_cdf,
    gev_loglik,
    gev_pdf,
    gev_quantile,
    gev_sample,
)
from .inference import (  # noqa: E402
    ProfileCurve,
    RiskLevel,
    profile_ci_level,
    profile_ci_param,
    return_level,
)
from .fixtures import fixture_path, load_fixture  # noqa: E402
from .ingest import PriceSeries, ReturnSeries, load_csv, log_returns  # noqa: E402

__all__ = [
    "ConvergenceError",
    "DataError",
    "DegenerateDataError",
    "EvtError",
    "TooFewMaximaError",
    "fixture_path",
    "load_fixture",
    "BlockMaxima",
    "BlockMaximaTransformer",
    "BlockScheme",
    "FitConfig",
    "GEVEstimator",
    "GevFit",
    "GevParams",
    "PriceSeries",
    "ProfileCurve",
    "QqData",
    "ReturnSeries",
    "RiskLevel",
    "SummaryStats",
    "extract_block_maxima",
    "fit_gev",
    "gev_cdf",
    "gev_loglik",
    "gev_pdf",
    "gev_quantile",
    "gev_sample",
    "load_csv",
    "log_returns",
    "profile_ci_level",
    "profile_ci_param",
    "qq_normal",
    "return_level",
    "summarize",
    "tail_subset",
]
