"""Extreme selection and extremal-index estimation.

Block maxima with optional outlier trimming, strict threshold exceedances, and
four extremal-index estimators: the inter-exceedance moment estimator, the
mixed-geometric maximum-likelihood closed form, and the classical runs and
blocks counting estimators, plus runs declustering.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigurationError, DegenerateSampleError,
                     EstimatorDegenerateError)
from .evt import empirical_quantile

__all__ = [
    "BlockMaxima", "Exceedances", "EiEstimate",
    "block_maxima", "block_minima", "quantile_threshold", "exceedances",
    "ei_ferro_segers", "ei_sueveges", "ei_runs", "ei_blocks", "runs_decluster",
]


@dataclass(frozen=True)
class BlockMaxima:
    bin_length: int
    maxima: np.ndarray
    trimmed: int = 0


@dataclass(frozen=True)
class Exceedances:
    threshold: float
    values: np.ndarray          # excesses z = X - T > 0
    indices: np.ndarray         # time positions, strictly increasing
    quantile: float = None
    empty: bool = False


@dataclass(frozen=True)
class EiEstimate:
    theta: float
    estimator: str              # "FerroSegers" | "Sueveges" | "Runs" | "Blocks"
    p: float = None
    threshold: float = None
    n_clusters: int = None
    clamped: bool = False
    degenerate: bool = False


def block_maxima(series, n, trim_out=1):
    """Maxima of consecutive bins of length n, trailing partial bin dropped.

    With trim_out > 0 the maxima are sorted and trim_out values removed from
    each end (guarding against the far tail of the slowest-converging bins);
    with trim_out = 0 bin order is preserved.
    """
    x = np.asarray(series, dtype=float)
    n = int(n)
    if n < 1:
        raise ConfigurationError("bin length must be >= 1")
    k = x.size // n
    if k < 1:
        raise DegenerateSampleError("series shorter than one bin")
    m = x[:k * n].reshape(k, n).max(axis=1)
    if trim_out > 0:
        if k - 2 * trim_out < 4:
            raise DegenerateSampleError(
                f"fewer than 4 maxima after trimming ({k} bins, trim {trim_out})")
        m = np.sort(m)[trim_out:k - trim_out]
    elif k < 4:
        warnings.warn(f"only {k} maxima: fits will be unreliable")
    return BlockMaxima(bin_length=n, maxima=m, trimmed=int(trim_out))


def block_minima(series, n, trim_out=1):
    """Minima of consecutive bins, via block_maxima of the negated series."""
    bm = block_maxima(-np.asarray(series, dtype=float), n, trim_out=trim_out)
    return BlockMaxima(bin_length=bm.bin_length, maxima=-bm.maxima,
                       trimmed=bm.trimmed)


def quantile_threshold(series, p):
    if not 0 < p < 1:
        raise ConfigurationError("quantile p must lie in (0,1)")
    return float(empirical_quantile(series, p))


def exceedances(series, threshold, quantile=None):
    """Strict exceedances X > T as excesses z = X - T with their time indices."""
    x = np.asarray(series, dtype=float)
    idx = np.flatnonzero(x > threshold)
    if idx.size == 0:
        warnings.warn("no exceedances above the threshold")
        return Exceedances(threshold=float(threshold), values=np.empty(0),
                           indices=idx, quantile=quantile, empty=True)
    return Exceedances(threshold=float(threshold), values=x[idx] - threshold,
                       indices=idx, quantile=quantile)


def _interexceedance_times(series, p):
    x = np.asarray(series, dtype=float)
    u = quantile_threshold(x, p)
    idx = np.flatnonzero(x > u)
    if idx.size < 2:
        raise DegenerateSampleError("need at least 2 exceedances")
    return np.diff(idx).astype(float), u


def ei_ferro_segers(series, p=0.98):
    """Inter-exceedance moment estimator of the extremal index.

    theta = 2 (sum(T_i - 1))^2 / (N sum (T_i - 1)(T_i - 2)) with T_i the gaps
    between consecutive exceedances of the p-quantile, clamped into (0, 1].
    """
    Ti, u = _interexceedance_times(series, p)
    N = Ti.size
    denom = N * np.sum((Ti - 1.0) * (Ti - 2.0))
    if denom <= 0:
        raise EstimatorDegenerateError(
            "all exceedances adjacent: moment estimator undefined")
    theta = 2.0 * np.sum(Ti - 1.0) ** 2 / denom
    clamped = theta > 1.0 or theta <= 0.0
    theta = min(max(theta, np.finfo(float).tiny), 1.0)
    return EiEstimate(theta=float(theta), estimator="FerroSegers", p=p,
                      threshold=u, n_clusters=int(np.sum(Ti > 1) + 1),
                      clamped=clamped)


def ei_sueveges(series, p=0.98):
    """Mixed-geometric maximum-likelihood closed form for the extremal index.

    With q = 1 - p, S_i = T_i - 1 and N_c the number of positive gaps, theta
    solves the cluster-likelihood quadratic in closed form.  If every gap is
    zero the N_c/N fallback is reported with the degenerate flag set.
    """
    Ti, u = _interexceedance_times(series, p)
    q = 1.0 - p
    Si = Ti - 1.0
    N = Ti.size
    Nc = int(np.sum(Si > 0))
    s = float(np.sum(q * Si))
    if s == 0.0:
        theta = Nc / N
        clamped = theta <= 0.0
        theta = min(max(theta, np.finfo(float).tiny), 1.0)
        return EiEstimate(theta=float(theta), estimator="Sueveges", p=p,
                          threshold=u, n_clusters=Nc, degenerate=True,
                          clamped=clamped)
    a = s + N + Nc
    theta = (a - np.sqrt(a * a - 8.0 * Nc * s)) / (2.0 * s)
    clamped = theta > 1.0 or theta <= 0.0
    theta = min(max(theta, np.finfo(float).tiny), 1.0)
    return EiEstimate(theta=float(theta), estimator="Sueveges", p=p,
                      threshold=u, n_clusters=Nc, clamped=clamped)


def ei_runs(series, threshold, q_run):
    """Runs estimator: fraction of exceedances followed by >= q_run quiet steps."""
    if q_run < 1:
        raise ConfigurationError("q_run must be >= 1")
    x = np.asarray(series, dtype=float)
    exc = x > threshold
    idx = np.flatnonzero(exc)
    if idx.size == 0:
        raise DegenerateSampleError("no exceedances")
    ends = 0
    for i in idx:
        ends += not np.any(exc[i + 1:i + 1 + q_run])
    theta = ends / idx.size
    return EiEstimate(theta=float(min(max(theta, np.finfo(float).tiny), 1.0)),
                      estimator="Runs", threshold=float(threshold),
                      n_clusters=int(ends))


def ei_blocks(series, threshold, n):
    """Blocks estimator: blocks containing an exceedance over total exceedances."""
    if n < 1:
        raise ConfigurationError("block length must be >= 1")
    x = np.asarray(series, dtype=float)
    exc = x > threshold
    total = int(np.sum(exc))
    if total == 0:
        raise DegenerateSampleError("no exceedances")
    k = x.size // n
    hit = exc[:k * n].reshape(k, n).any(axis=1)
    if exc[k * n:].any():
        hit = np.append(hit, True)
    theta = np.sum(hit) / total
    return EiEstimate(theta=float(min(max(theta, np.finfo(float).tiny), 1.0)),
                      estimator="Blocks", threshold=float(threshold),
                      n_clusters=int(np.sum(hit)))


def runs_decluster(exc, q_run):
    """Merge exceedances separated by gaps < q_run, keeping each cluster's peak."""
    if q_run < 1:
        raise ConfigurationError("q_run must be >= 1")
    if exc.empty or exc.indices.size == 0:
        return exc
    idx = exc.indices
    vals = exc.values
    starts = np.flatnonzero(np.diff(idx) >= q_run) + 1
    bounds = np.concatenate(([0], starts, [idx.size]))
    keep_idx = []
    keep_val = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        j = a + int(np.argmax(vals[a:b]))
        keep_idx.append(idx[j])
        keep_val.append(vals[j])
    return Exceedances(threshold=exc.threshold,
                       values=np.asarray(keep_val),
                       indices=np.asarray(keep_idx, dtype=idx.dtype),
                       quantile=exc.quantile)
