"""Block maxima, exceedances, and extremal index estimators."""

import numpy as np
import pytest

from evtdyn.errors import ConfigurationError, DegenerateSampleError
from evtdyn.extraction import (block_maxima, block_minima, ei_blocks,
                               ei_ferro_segers, ei_runs, ei_sueveges,
                               exceedances, quantile_threshold, runs_decluster)


def test_block_maxima_trimmed_and_sorted():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(10000)
    bm = block_maxima(x, 100, trim_out=1)
    assert bm.maxima.size == 98          # 100 bins of length 100, 2 trimmed
    assert bm.bin_length == 100
    assert np.all(np.diff(bm.maxima) >= 0)
    raw = x[:100 * 100].reshape(100, 100).max(axis=1)
    assert np.allclose(bm.maxima, np.sort(raw)[1:-1])


def test_block_maxima_untrimmed_keeps_bin_order():
    x = np.arange(40.0)
    bm = block_maxima(x, 10, trim_out=0)
    assert np.allclose(bm.maxima, [9.0, 19.0, 29.0, 39.0])


def test_block_maxima_too_few_blocks():
    with pytest.raises(DegenerateSampleError):
        block_maxima(np.arange(50.0), 10, trim_out=1)


def test_block_minima_negation():
    x = np.arange(40.0)
    bmin = block_minima(x, 10, trim_out=0)
    assert np.allclose(bmin.maxima, [0.0, 10.0, 20.0, 30.0])


def test_exceedances_strict_and_empty():
    x = np.array([0.0, 1.0, 2.0, 1.0, 3.0])
    exc = exceedances(x, 1.0)
    assert np.allclose(exc.values, [1.0, 2.0])
    assert np.array_equal(exc.indices, [2, 4])
    with pytest.warns(UserWarning):
        exc0 = exceedances(x, 10.0)
    assert exc0.empty and exc0.values.size == 0


def test_quantile_threshold_validation():
    with pytest.raises(ConfigurationError):
        quantile_threshold(np.arange(10.0), 1.0)


def test_ferro_segers_interexceedance_formula():
    """Hand-checked on exceedance times {2, 5, 6, 10}: the estimate clamps at 1."""
    x = np.zeros(12)
    x[[2, 5, 6, 10]] = 1.0
    est = ei_ferro_segers(x, p=0.5)
    times = np.array([3.0, 1.0, 4.0])
    raw = (2.0 * np.sum(times - 1.0) ** 2
           / (times.size * np.sum((times - 1.0) * (times - 2.0))))
    assert raw > 1.0
    assert est.theta == 1.0 and est.clamped


def test_sueveges_degenerate_fallback():
    """All interexceedance times equal to one: the likelihood degenerates."""
    x = np.zeros(20)
    x[5:10] = 1.0
    est = ei_sueveges(x, p=0.7)
    assert est.degenerate
    assert 0.0 < est.theta <= 1.0


def test_estimators_near_one_for_iid():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(200000)
    for est in (ei_ferro_segers(x, p=0.99), ei_sueveges(x, p=0.99)):
        assert est.theta == pytest.approx(1.0, abs=0.05)


def test_runs_estimator_on_clustered_series():
    """Exceedances in tight pairs: runs declustering sees half the clusters."""
    x = np.zeros(10000)
    idx = np.arange(100, 9900, 100)
    x[idx] = 1.0
    x[idx + 1] = 1.0
    est = ei_runs(x, 0.5, q_run=2)
    assert est.theta == pytest.approx(0.5, abs=0.02)


def test_blocks_estimator_counts_blocks_with_exceedances():
    x = np.zeros(1000)
    x[[10, 11, 12, 510, 511]] = 1.0
    est = ei_blocks(x, 0.5, 10)
    assert est.theta == pytest.approx(2.0 / 5.0, abs=1e-12)


def test_runs_decluster_keeps_cluster_peaks():
    x = np.zeros(100)
    x[[10, 11, 12]] = [2.0, 5.0, 3.0]
    x[[50, 51]] = [4.0, 1.5]
    exc = exceedances(x, 1.0)
    peaks = runs_decluster(exc, q_run=3)
    assert np.allclose(peaks.values, [4.0, 3.0])
    assert np.array_equal(peaks.indices, [11, 50])
