import numpy as np
import pandas as pd
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from evtrisk import BlockMaximaTransformer, GEVEstimator
from evtrisk.blocks import BlockMaxima
from evtrisk.gev import GevParams, fit_gev, gev_sample

TRUTH = GevParams(0.2, 0.6, 1.4)


def test_get_params_and_clone():
    est = GEVEstimator(n_restarts=2, level=0.9)
    assert est.get_params()["n_restarts"] == 2
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    est.set_params(level=0.8)
    assert est.level == 0.8
    assert BlockMaximaTransformer(scheme="quarter").get_params()["scheme"] == "quarter"


def test_fit_attributes_match_function():
    x = gev_sample(TRUTH, 150, 4)
    est = GEVEstimator().fit(x)
    ref = fit_gev(x)
    assert est.params_ == ref.params
    assert est.n_maxima_ == 150
    assert est.score(x) == pytest.approx(ref.log_lik)
    assert est.return_level(20) == pytest.approx(est.return_level([20])[0])
    u = est.transform(x)
    assert np.all((u > 0) & (u < 1))


def test_column_vector_accepted():
    x = gev_sample(TRUTH, 80, 5)
    a = GEVEstimator().fit(x)
    b = GEVEstimator().fit(x.reshape(-1, 1))
    assert a.params_ == b.params_
    with pytest.raises(ValueError):
        GEVEstimator().fit(np.c_[x, x])
    with pytest.raises(ValueError):
        GEVEstimator().fit(np.r_[x, np.nan])


def test_not_fitted():
    with pytest.raises(NotFittedError):
        GEVEstimator().return_level(20)
    with pytest.raises(NotFittedError):
        BlockMaximaTransformer().transform([1.0, 2.0])


def test_cis():
    x = gev_sample(TRUTH, 192, 6)
    est = GEVEstimator(compute_cis=True).fit(x)
    lo, hi = est.fit_.param_cis["shape"]
    interval = est.param_ci("shape")
    assert (interval.low, interval.high) == (lo, hi)
    risk = est.return_level_ci(20)
    assert risk.ci_low < risk.estimate < risk.ci_high


def test_pipeline_on_dated_series(fixture_returns):
    s = pd.Series(fixture_returns.values, index=pd.to_datetime(fixture_returns.dates), name="SYNTH")
    pipe = make_pipeline(BlockMaximaTransformer(scheme="month", tail="lower"), GEVEstimator())
    pipe.fit(s)
    maxima = pipe[0].transform(s)
    assert isinstance(maxima, BlockMaxima)
    assert len(maxima) == 192
    gev = pipe[-1]
    assert gev.fit_.tail == "lower"
    assert str(gev.fit_.scheme) == "month"
    direct = GEVEstimator().fit(BlockMaximaTransformer(scheme="month", tail="lower").fit_transform(fixture_returns))
    assert direct.params_ == gev.params_


def test_undated_array_count_scheme():
    x = np.random.default_rng(0).standard_normal(2100)
    bm = BlockMaximaTransformer(scheme="count:21").fit_transform(x)
    assert len(bm) == 100
    np.testing.assert_array_equal(bm.values, x.reshape(100, 21).max(axis=1))


def test_sample_reproducible():
    est = GEVEstimator(random_state=3).fit(gev_sample(TRUTH, 60, 1))
    np.testing.assert_array_equal(est.sample(10), est.sample(10))
    assert not np.array_equal(est.sample(10), est.sample(10, random_state=4))
