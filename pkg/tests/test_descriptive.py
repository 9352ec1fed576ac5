import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import stats

from evtrisk.descriptive import (
    JB_CRITICAL_CHI2_1,
    JB_CRITICAL_CHI2_2,
    jarque_bera,
    qq_normal,
    summarize,
    tail_subset,
)
from evtrisk.exceptions import DegenerateDataError
from evtrisk.ingest import ReturnSeries


def series(values):
    values = np.asarray(values, dtype=float)
    return ReturnSeries(np.datetime64("2000-01-03") + np.arange(values.size), values)


def test_two_point_sample():
    s = summarize(series([-1.0, 1.0] * 50))
    assert s.n == 100
    assert s.mean == 0.0
    assert s.skewness == 0.0
    assert s.kurtosis == 1.0
    assert s.jarque_bera == 100 / 6
    assert s.jb_p_value == pytest.approx(np.exp(-100 / 12))


def test_moments_match_scipy():
    x = np.random.default_rng(3).standard_t(5, 999)
    s = summarize(x)
    assert s.skewness == pytest.approx(stats.skew(x), rel=1e-12)
    assert s.kurtosis == pytest.approx(stats.kurtosis(x, fisher=True) + 3, rel=1e-12)
    assert s.std_dev == pytest.approx(np.std(x, ddof=1), rel=1e-12)
    jb = stats.jarque_bera(x)
    assert s.jarque_bera == pytest.approx(jb.statistic, rel=1e-10)
    assert s.jb_p_value == pytest.approx(jb.pvalue, rel=1e-8, abs=1e-300)


def test_critical_values():
    assert JB_CRITICAL_CHI2_1 == pytest.approx(stats.chi2.ppf(0.95, 1), abs=1e-12)
    assert JB_CRITICAL_CHI2_2 == pytest.approx(stats.chi2.ppf(0.95, 2), abs=1e-12)


def test_degenerate_and_short_samples():
    with pytest.raises(DegenerateDataError):
        summarize(series([2.0] * 10))
    with pytest.raises(ValueError):
        summarize(series([1.0, 2.0, 3.0]))


def test_jb_zero_for_normal_shape():
    # symmetric, kurtosis exactly 3: points +-a with weight and 0
    # four-point sample {-s,0,0,s} style: build and check JB==0 iff S==0 and K==3
    x = np.array([-np.sqrt(3), 0, 0, 0, 0, np.sqrt(3)])
    s = summarize(x)
    assert s.skewness == pytest.approx(0.0, abs=1e-15)
    assert s.kurtosis == pytest.approx(3.0, abs=1e-12)
    assert s.jarque_bera == pytest.approx(0.0, abs=1e-12)


samples = st.lists(st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=5, max_size=80).filter(
    lambda v: np.ptp(v) > 1e-3
)


@given(samples)
def test_summary_invariants(values):
    s = summarize(values)
    assert s.min <= s.mean + 1e-9 and s.mean <= s.max + 1e-9
    assert s.std_dev >= 0
    assert s.jarque_bera >= 0
    assert 0 <= s.jb_p_value <= 1


@given(samples)
def test_negation_flips_skew_keeps_kurtosis(values):
    a, b = summarize(values), summarize([-v for v in values])
    assert b.skewness == pytest.approx(-a.skewness, abs=1e-9)
    assert b.kurtosis == pytest.approx(a.kurtosis, rel=1e-9)


def test_tail_subset_definition():
    x = np.random.default_rng(1).permutation(np.arange(100.0))
    up = tail_subset(series(x), "upper")
    assert sorted(up.values) == list(np.arange(90.0, 100.0))
    assert np.all(np.diff(up.dates).astype(int) > 0)
    low = tail_subset(series(np.arange(1.0, 11.0)), "lower")
    assert list(low.values) == [1.0]


def test_tail_subset_rounds_up():
    assert len(tail_subset(series(np.arange(15.0)), "upper", 0.1)) == 2


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=4, max_size=60, unique=True),
       st.floats(0.01, 0.49))
def test_tails_disjoint_and_above_quantile(values, fraction):
    # both subsets have ceil(n * fraction) members, so they can only be disjoint if that fits twice
    assume(2 * math.ceil(len(values) * fraction - 1e-9) <= len(values))
    s = series(values)
    up, low = tail_subset(s, "upper", fraction), tail_subset(s, "lower", fraction)
    assert not set(up.values) & set(low.values)
    assert up.values.min() >= np.quantile(values, 1 - fraction, method="lower")


def test_tail_subset_errors():
    with pytest.raises(ValueError):
        tail_subset(series([1.0, 2.0]), "upper", 0.6)
    with pytest.raises(ValueError):
        tail_subset(series([1.0, 2.0]), "middle")


def test_qq_odd_symmetric_middle_is_mean():
    q = qq_normal(series([13.0, 7.0, 10.0, 9.0, 11.0]))
    assert q.theoretical[2] == pytest.approx(10.0, abs=1e-12)
    assert q.empirical[2] == 10.0


def test_qq_two_points():
    q = qq_normal(series([1.0, 3.0]))
    sd = np.std([1.0, 3.0], ddof=1)
    np.testing.assert_allclose(q.theoretical, 2.0 + sd * stats.norm.ppf([0.25, 0.75]))
    assert q.theoretical[0] + q.theoretical[1] == pytest.approx(4.0)


def test_qq_normal_sample_tracks_identity():
    x = np.random.default_rng(0).standard_normal(10000)
    q = qq_normal(x)
    # extreme order statistics are too noisy for a fixed bound; check the central 98%
    assert np.max(np.abs(q.empirical - q.theoretical)[100:-100]) < 0.15


def test_qq_errors_and_export(tmp_path):
    with pytest.raises(DegenerateDataError):
        qq_normal(series([1.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        qq_normal(series([1.0]))
    q = qq_normal(series([3.0, 1.0, 2.0]))
    path = tmp_path / "qq.csv"
    q.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "theoretical,empirical"
    assert len(lines) == 4


@given(samples)
def test_qq_invariants(values):
    q = qq_normal(values)
    assert np.all(np.diff(q.empirical) >= 0)
    assert np.all(np.diff(q.theoretical) > 0)
    assert sorted(values) == list(q.empirical)


def test_jarque_bera_function():
    jb, p = jarque_bera([-1.0, 1.0] * 3)
    assert jb == pytest.approx(1.0)
    assert p == pytest.approx(np.exp(-0.5))
