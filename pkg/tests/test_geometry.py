"""Dimension predictions, inversion routes, Lyapunov spectra."""

import numpy as np
import pytest

from evtdyn.dynsys import (bernoulli_shift, cat_map, cantor_ifs, henon,
                           lorenz63, lozi)
from evtdyn.errors import ConfigurationError, InversionError
from evtdyn.geometry import (ROUTES, dim_from_fit, information_dimension,
                             lyapunov_spectrum, partial_dimensions,
                             physical_predictions, predict_bm_params,
                             predict_pot_params, theoretical_ei_periodic)


# ---------------------------------------------------------------------------
# predict / invert round trips

@pytest.mark.parametrize("d", [0.63, 1.0, 1.26, 2.0])
def test_g1_sigma_round_trip(d):
    pred = predict_bm_params("g1", d)
    assert pred.xi == 0.0
    assert dim_from_fit(pred.sigma, "sigma_g1") == pytest.approx(d, abs=1e-12)
    assert dim_from_fit(pred.mu_slope, "mu_slope_g1") == pytest.approx(
        d, abs=1e-12)


@pytest.mark.parametrize("d,alpha", [(0.63, 3.0), (1.26, 2.0), (2.0, 4.0)])
def test_g2_g3_shape_round_trip(d, alpha):
    x2 = predict_bm_params("g2", d, alpha=alpha).xi
    assert dim_from_fit(x2, "xi_g2", alpha=alpha) == pytest.approx(d,
                                                                   abs=1e-12)
    x3 = predict_bm_params("g3", d, alpha=alpha, C=10.0).xi
    assert dim_from_fit(x3, "xi_g3", alpha=alpha) == pytest.approx(d,
                                                                   abs=1e-12)


def test_pot_prediction_scales():
    par = predict_pot_params("g3", 1.5, T=9.0, alpha=3.0, C=10.0)
    assert par.xi == pytest.approx(-1.0 / 4.5, abs=1e-12)
    assert par.sigma == pytest.approx(1.0 / 4.5, abs=1e-12)
    with pytest.raises(ConfigurationError):
        predict_pot_params("g3", 1.5, T=11.0, alpha=3.0, C=10.0)


def test_slope_routes_invert():
    d, alpha = 1.26, 3.0
    assert dim_from_fit(-1.0 / (alpha * d), "sigma_g2",
                        alpha=alpha) == pytest.approx(d, abs=1e-12)
    assert dim_from_fit(1.0 / (alpha * d), "sigma_g3",
                        alpha=alpha) == pytest.approx(d, abs=1e-12)


def test_inversion_guards():
    with pytest.raises(InversionError):
        dim_from_fit(-0.1, "xi_g2", alpha=3.0)
    with pytest.raises(InversionError):
        dim_from_fit(0.1, "xi_g3", alpha=3.0)
    with pytest.raises(ConfigurationError):
        dim_from_fit(0.1, "no_such_route")


def test_physical_round_trip():
    d_s, d_u, d_n = 0.26, 1.0, 0.0
    alpha = 3.0
    delta, xi_a, sigma = physical_predictions(d_s, d_u, d_n, A_max=1.0, T=0.5)
    assert delta == pytest.approx(d_s + (d_u + d_n) / 2.0, abs=1e-15)
    assert sigma == pytest.approx(0.5 / delta, abs=1e-15)
    d_total = d_s + d_u + d_n
    xi_b = -1.0 / (alpha * d_total)
    d_un, d_s_back = partial_dimensions(xi_a, xi_b, alpha)
    assert d_un == pytest.approx(d_u + d_n, abs=1e-12)
    assert d_s_back == pytest.approx(d_s, abs=1e-12)


# ---------------------------------------------------------------------------
# extremal index theory

def test_theoretical_ei_at_periodic_points():
    # fixed point 1/2 of the ternary shift: derivative 3, theta = 1 - 1/3
    theta = theoretical_ei_periodic(bernoulli_shift(3), np.array([0.5]), 1)
    assert theta == pytest.approx(2.0 / 3.0, abs=1e-12)
    # origin of the doubling map at period 2 via 1/3 <-> 2/3
    theta2 = theoretical_ei_periodic(bernoulli_shift(2), np.array([1.0 / 3.0]),
                                     2)
    assert theta2 == pytest.approx(3.0 / 4.0, abs=1e-12)


def test_theoretical_ei_rejects_non_periodic_point():
    with pytest.raises(ConfigurationError):
        theoretical_ei_periodic(bernoulli_shift(3), np.array([0.1234]), 1)


# ---------------------------------------------------------------------------
# Lyapunov spectra

def test_cat_map_spectrum_exact():
    rep = lyapunov_spectrum(cat_map(), np.array([0.3123, 0.4123]), n=10 ** 5)
    golden = (3.0 + np.sqrt(5.0)) / 2.0
    assert rep.lyapunov[0] == pytest.approx(np.log(golden), abs=1e-3)
    assert rep.lyapunov[1] == pytest.approx(-np.log(golden), abs=1e-3)
    assert rep.d_ky == pytest.approx(2.0, abs=1e-3)
    assert (rep.d_u, rep.d_n) == (1, 0)


def test_henon_spectrum_volume_contraction():
    rep = lyapunov_spectrum(henon(1.4, 0.3), np.array([0.1, 0.1]), n=2 * 10 ** 5)
    # the sum of exponents equals log|det J| = log b exactly
    assert sum(rep.lyapunov) == pytest.approx(np.log(0.3), abs=1e-9)
    assert rep.lyapunov[0] == pytest.approx(0.419, abs=0.01)
    assert rep.d_ky == pytest.approx(1.26, abs=0.02)


def test_lozi_spectrum():
    rep = lyapunov_spectrum(lozi(1.7, 0.5), np.array([0.1, 0.1]), n=2 * 10 ** 5)
    assert sum(rep.lyapunov) == pytest.approx(np.log(0.5), abs=1e-9)
    assert 1.3 < rep.d_ky < 1.5


def test_lorenz_spectrum_signature():
    rep = lyapunov_spectrum(lorenz63(), np.array([1.0, 1.0, 1.0]),
                            n=2 * 10 ** 4, dt=0.01)
    lam = rep.lyapunov
    assert lam[0] > 0.5                   # chaotic
    assert abs(lam[1]) < 0.1              # neutral direction of the flow
    assert lam[2] < -10.0                 # strong contraction
    assert 2.0 < rep.d_ky < 2.2


# ---------------------------------------------------------------------------
# information dimension (fast smoke; accuracy is covered in acceptance tests)

def test_information_dimension_shift_is_one():
    rep = information_dimension(bernoulli_shift(3), ("sigma_g1",),
                                q_points=5, s=10 ** 5, seed=2)
    mean, sd = rep.d1["sigma_g1"]
    assert mean == pytest.approx(1.0, abs=0.1)
    assert rep.n_failed == 0


def test_information_dimension_cantor_below_one():
    rep = information_dimension(cantor_ifs(), ("xi_g3",), q_points=8,
                                s=10 ** 5, seed=3)
    mean, sd = rep.d1["xi_g3"]
    assert 0.4 < mean < 0.9


def test_routes_tuple_is_complete():
    assert set(("sigma_g1", "mu_slope_g1", "xi_g2", "xi_g3")) <= set(ROUTES)
