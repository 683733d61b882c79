"""Recurrence scans, stability maps, tipping detection, noise studies."""

import numpy as np
import pytest

from evtdyn.dynsys import bernoulli_shift, cat_map, iterate, rotation
from evtdyn.errors import ConfigurationError
from evtdyn.evt import lilliefors_gumbel
from evtdyn.indicators import (jitter, min_convergent_bin,
                               noise_scaling_study, recurrence_scan,
                               recurrence_scan_2d, stability_map,
                               tipping_scan)


def _shift_series(s=10 ** 5, seed=1):
    return iterate(bernoulli_shift(3), None, np.array([0.5123]), s,
                   seed=seed).states.ravel()


# ---------------------------------------------------------------------------
# scan grid and rows

def test_recurrence_grid_formula():
    """Grid levels are min + i*(max-min)/num for i = 1..num."""
    x = np.concatenate(([0.0, 1.0], np.random.default_rng(0).random(5000)))
    rows = recurrence_scan(x, 4, B=200)
    assert [r.zeta for r in rows] == pytest.approx([0.25, 0.5, 0.75, 1.0])


def test_recurrence_rows_carry_fits_and_ei():
    rows = recurrence_scan(_shift_series(), 5, B=200)
    ok = [r for r in rows if not r.failed]
    assert len(ok) >= 4
    for r in ok:
        assert 0.0 < r.theta_fs <= 1.0
        assert 0.0 < r.theta_sv <= 1.0
        assert r.gev.sigma > 0
        assert r.gof is not None


def test_recurrence_2d_rescale_invariance():
    """Standardized distances make the joint scan scale-free."""
    rng = np.random.default_rng(7)
    a = rng.random(40000)
    b = rng.random(40000)
    rows1 = recurrence_scan_2d(a, b, 2, B=200)
    rows2 = recurrence_scan_2d(1000.0 * a, b, 2, B=200)
    for r1, r2 in zip(np.ravel(rows1), np.ravel(rows2)):
        if r1.failed or r2.failed:
            continue
        assert r1.theta_fs == pytest.approx(r2.theta_fs, abs=1e-9)
        # the optimizer sees distance series equal only to round-off, so the
        # fitted scale matches to optimizer tolerance rather than exactly
        assert r1.gev.sigma == pytest.approx(r2.gev.sigma, rel=1e-5)


# ---------------------------------------------------------------------------
# quantization and convergence scale

def test_jitter_restores_gumbel_fit():
    x = _shift_series(seed=5)
    quantized = np.round(x, 3)
    smoothed = jitter(quantized, 1e-3, seed=2)
    y = -np.log(np.abs(smoothed - 0.7371))
    from evtdyn.extraction import block_maxima
    bm = block_maxima(y, 500, trim_out=1)
    assert lilliefors_gumbel(bm.maxima, B=500).passed


def test_min_convergent_bin_finds_scale():
    x = _shift_series(seed=9)
    res = min_convergent_bin(x, 0.7371, [10, 200, 1000], B=300)
    assert not res.rare_at_all_scales
    assert res.n_min in (10, 200, 1000)
    assert len(res.table) == 3


def test_min_convergent_bin_rare_level():
    """Coarsely quantized data never passes the calibrated Gumbel test."""
    rng = np.random.default_rng(11)
    x = np.round(rng.random(50000), 1)              # 11 distinct values
    res = min_convergent_bin(x, 0.4123, [50, 100, 200], B=300)
    assert res.rare_at_all_scales
    assert res.n_min is None


def test_min_convergent_bin_rejects_unsorted_grid():
    with pytest.raises(ConfigurationError):
        min_convergent_bin(np.random.default_rng(0).random(1000), 0.5,
                           [500, 100])


# ---------------------------------------------------------------------------
# stability map

def test_stability_map_separates_regimes():
    regular = stability_map(1e-4, [(0.25, 0.25)], s=10 ** 5,
                            n_exceed=1000, seed=1)[0]
    chaotic = stability_map(100.0, [(0.25, 0.25)], s=10 ** 5,
                            n_exceed=1000, seed=1)[0]
    assert regular.d_sigma_g1 == pytest.approx(1.0, abs=0.15)
    assert chaotic.d_sigma_g1 == pytest.approx(2.0, abs=0.25)
    assert chaotic.delta_t > regular.delta_t


# ---------------------------------------------------------------------------
# tipping scan

def test_tipping_scan_flags_degenerate_zero_noise():
    res = tipping_scan(1.0, 0.2475, [0.0, 0.3], ensemble=2, s=2 * 10 ** 4,
                       bin_len=200, seed=3)
    assert res.rows[0].flagged                    # deterministic laminar orbit
    assert res.rows[1].n_transitions > 0


# ---------------------------------------------------------------------------
# noise scaling

def test_noise_scaling_rows_shape_and_theory():
    rows = noise_scaling_study(rotation((np.sqrt(5.0) - 1.0) / 2.0), 0.4123,
                               [1e-2], "additive", [1000], s=10 ** 5, B=300)
    r = rows[0]
    assert r.eps == 1e-2 and r.m == 1000
    assert np.isfinite(r.b_theory)
    assert r.rel_err < 0.05
    assert 0.0 < r.occupancy < 1.0
