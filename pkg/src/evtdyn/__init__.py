"""Extreme value analysis of chaotic dynamical systems.

Orbit generation for a family of maps and flows (optionally perturbed by
noise), recurrence and physical observables, GEV/GPD estimation with several
independent estimators, extremal-index estimation, and geometric diagnostics
(local and information dimension, Lyapunov spectra, Kaplan-Yorke bounds,
regular-vs-chaotic classification, tipping-point detection).
"""

from . import (dynsys, errors, evt, extraction, geometry, indicators,
               observables, rng)
from .dynsys import (NoiseSpec, Orbit, SystemSpec, additive_noise,
                     bernoulli_shift, cantor_ifs, cat_map, henon,
                     integrate_lorenz, iterate, lorenz63, lozi, lsv, manpom,
                     observational_noise, observe_with_noise, orbit_divergence,
                     rasp_noise, reversibility_error, rotation,
                     simulate_toy_sde, standard_map, step, toy_turbulence)
from .evt import (FitResult, GevParams, GofResult, GpdParams, fit_gev_lmoments,
                  fit_gev_mle, fit_gpd_lmoments, fit_gpd_mle, fit_gpd_moments,
                  gev_cdf, gev_pdf, gev_quantile, gev_sample,
                  gpd_analytic_moment, gpd_cdf, gpd_pdf, gpd_quantile,
                  gpd_sample, gumbel_mle, ks_test, lilliefors_gumbel,
                  sample_lmoments)
from .extraction import (BlockMaxima, EiEstimate, Exceedances, block_maxima,
                         ei_blocks, ei_ferro_segers, ei_runs, ei_sueveges,
                         exceedances, quantile_threshold, runs_decluster)
from .geometry import (DimensionReport, SpectrumReport, dim_from_fit,
                       exceedance_tail_slope, information_dimension,
                       lyapunov_spectrum,
                       partial_dimensions, physical_predictions,
                       predict_bm_params, predict_pot_params,
                       theoretical_ei_periodic)
from .indicators import (jitter, min_convergent_bin, noise_scaling_study,
                         recurrence_scan, recurrence_scan_2d, stability_map,
                         tipping_scan)
from .observables import (ObservableSpec, TimeSeries, evaluate, g1, g2, g3,
                          linear_observable, metric_dist, series)

__version__ = "0.1.0"
