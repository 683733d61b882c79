"""Links between extreme value fits and attractor geometry.

For recurrence observables around a point zeta with local dimension d, the
limiting parameters are fully determined: the log-distance observable gives a
Gumbel law with scale 1/d and location drifting as (1/d) log k; the power-law
observables give shape +-1/(alpha d).  These relations run both ways: this
module predicts (xi, sigma, mu) from a known dimension, and inverts fitted
parameters back into local / information dimension estimates.  It also houses
the Lyapunov spectrum (QR tangent iteration), the Kaplan-Yorke dimension, the
extremal index at repelling periodic points, and the dimension relations for
physical observables.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import dynsys, observables
from .errors import (ConfigurationError, EvtdynError, FitError,
                     InversionError, UnsupportedOperationError)
from .evt import fit_gev_lmoments, GpdParams
from .extraction import block_maxima
from .rng import spawn_rng

__all__ = [
    "DimensionReport", "SpectrumReport", "BmPrediction",
    "predict_bm_params", "predict_pot_params", "dim_from_fit",
    "information_dimension", "theoretical_ei_periodic", "lyapunov_spectrum",
    "physical_predictions", "partial_dimensions", "exceedance_tail_slope",
]

ROUTES = ("sigma_g1", "mu_slope_g1", "xi_g2", "mu_g2", "sigma_g2",
          "xi_g3", "sigma_g3")


@dataclass(frozen=True)
class DimensionReport:
    routes: tuple                     # route names in report order
    d_point: dict                     # route -> array of per-zeta estimates
    d1: dict                          # route -> (mean, sd)
    n_failed: int = 0
    n_zetas: int = 0


@dataclass(frozen=True)
class SpectrumReport:
    lyapunov: tuple                   # ordered, largest first
    d_ky: float
    d_u: int
    d_n: int
    d_s: float
    delta: float
    dt: float = 1.0


@dataclass(frozen=True)
class BmPrediction:
    xi: float
    sigma: float                      # scale at the reference bin count, g1: 1/d
    mu_slope: float                   # d mu / d ln k (g1) or d ln mu / d ln k (g2)
    sigma_slope: float = None         # d ln sigma / d ln k for g2/g3
    mu_limit: float = None            # g3 only: mu -> C


# ---------------------------------------------------------------------------
# forward predictions


def predict_bm_params(obs_kind, d, alpha=None, C=None):
    """Limiting GEV behavior of block maxima around a point of dimension d."""
    if d <= 0:
        raise ConfigurationError("dimension must be > 0")
    if obs_kind == "g1":
        return BmPrediction(xi=0.0, sigma=1.0 / d, mu_slope=1.0 / d)
    if alpha is None or alpha <= 0:
        raise ConfigurationError("alpha must be > 0 for g2/g3")
    if obs_kind == "g2":
        return BmPrediction(xi=1.0 / (alpha * d), sigma=np.nan,
                            mu_slope=-1.0 / (alpha * d),
                            sigma_slope=-1.0 / (alpha * d))
    if obs_kind == "g3":
        if C is None:
            raise ConfigurationError("g3 needs C")
        return BmPrediction(xi=-1.0 / (alpha * d), sigma=np.nan,
                            mu_slope=0.0, sigma_slope=1.0 / (alpha * d),
                            mu_limit=float(C))
    raise ConfigurationError(f"unknown observable kind {obs_kind!r}")


def predict_pot_params(obs_kind, d, T, alpha=None, C=None):
    """Limiting GPD parameters for excesses of the observable over T."""
    if d <= 0:
        raise ConfigurationError("dimension must be > 0")
    if obs_kind == "g1":
        return GpdParams(xi=0.0, sigma=1.0 / d, threshold=float(T))
    if alpha is None or alpha <= 0:
        raise ConfigurationError("alpha must be > 0 for g2/g3")
    if obs_kind == "g2":
        return GpdParams(xi=1.0 / (alpha * d), sigma=T / (alpha * d),
                         threshold=float(T))
    if obs_kind == "g3":
        if C is None:
            raise ConfigurationError("g3 needs C")
        if T >= C:
            raise ConfigurationError("g3 threshold must satisfy T < C")
        return GpdParams(xi=-1.0 / (alpha * d), sigma=(C - T) / (alpha * d),
                         threshold=float(T))
    raise ConfigurationError(f"unknown observable kind {obs_kind!r}")


# ---------------------------------------------------------------------------
# inversion routes


def dim_from_fit(value, route, alpha=None):
    """Invert a fitted quantity into a local dimension estimate.

    ``value`` is the fitted sigma / xi, or the relevant slope for the drift
    routes: mu vs ln k for mu_slope_g1, ln mu (ln sigma) vs ln k for mu_g2
    (sigma_g2 / sigma_g3).
    """
    if route not in ROUTES:
        raise ConfigurationError(f"unknown route {route!r}")
    v = float(value)
    if not np.isfinite(v):
        raise InversionError("fit value is not finite")
    if route == "sigma_g1":
        if v <= 0:
            raise InversionError("sigma must be > 0")
        return 1.0 / v
    if route == "mu_slope_g1":
        if v == 0:
            raise InversionError("zero location drift")
        return 1.0 / abs(v)
    if alpha is None or alpha <= 0:
        raise ConfigurationError("alpha must be > 0 for g2/g3 routes")
    if route == "xi_g2":
        if v <= 0:
            raise InversionError("xi must be > 0 under the g2 route")
        return 1.0 / (alpha * v)
    if route == "xi_g3":
        if v >= 0:
            raise InversionError("xi must be < 0 under the g3 route")
        return -1.0 / (alpha * v)
    # slope routes: |slope| = 1/(alpha d) for scale/location drifts of g2/g3
    if v == 0:
        raise InversionError("zero drift slope")
    return 1.0 / (alpha * abs(v))


# ---------------------------------------------------------------------------
# extremal index at periodic points


def theoretical_ei_periodic(spec, zeta, period):
    """theta = 1 - 1/|det Df^p(zeta)| at a repelling p-periodic point."""
    if period < 1:
        raise ConfigurationError("period must be >= 1")
    if spec.kind in ("cantor", "lorenz", "toy"):
        raise UnsupportedOperationError(
            f"no deterministic periodic-orbit Jacobian for {spec.kind}")
    z = np.atleast_1d(np.asarray(zeta, dtype=float))
    x = z.copy()
    det = 1.0
    for _ in range(period):
        J = dynsys.map_jacobian(spec, x if spec.dim > 1 else x[0])
        det *= J if spec.dim == 1 else np.linalg.det(J)
        nxt = dynsys.step(spec, x if spec.dim > 1 else x[0])
        x = np.atleast_1d(np.asarray(nxt, dtype=float))
    err = observables.metric_dist(spec.space, x if spec.dim > 1 else x[0],
                                  z if spec.dim > 1 else z[0])
    if err > 1e-9:
        raise ConfigurationError(
            f"zeta is not {period}-periodic (return distance {err:.2e})")
    if abs(det) <= 1.0:
        raise ConfigurationError("periodic point is not repelling")
    return 1.0 - 1.0 / abs(det)


# ---------------------------------------------------------------------------
# Lyapunov spectra


@njit(cache=True)
def _lyap_1d(kind, p, x, n, branch):
    # kind codes follow dynsys._INTERVAL_CODES
    acc = 0.0
    for i in range(n):
        if kind == 0:
            acc += math.log(p)
            x = (p * x) % 1.0
        elif kind == 1:
            x = (x + p) % 1.0
        elif kind == 2:
            if x < 0.5:
                acc += math.log(1.0 + (1.0 + p) * (2.0 * x) ** p)
                x = x * (1.0 + (2.0 * x) ** p)
            else:
                acc += math.log(2.0)
                x = 2.0 * x - 1.0
        elif kind == 3:
            if x < 0.5:
                acc += math.log(1.0 + (p + 1.0) * 2.0 ** p * x ** p)
                x = x * (1.0 + 2.0 ** p * x ** p)
            else:
                acc += math.log(2.0)
                x = 2.0 * x - 1.0
        else:
            acc += math.log(1.0 / 3.0)
            if branch[i] < 0.5:
                x = x / 3.0
            else:
                x = (x + 2.0) / 3.0
        if x >= 1.0:
            x -= 1.0
    return acc / n


@njit(cache=True)
def _lyap_2d(kind, a, b, x, y, n, jitter_draws):
    twopi = 2.0 * math.pi
    v1x, v1y = 1.0, 0.0
    v2x, v2y = 0.0, 1.0
    s1 = 0.0
    s2 = 0.0
    for i in range(n):
        # tangent map at the current state
        if kind == 0:
            j11, j12, j21, j22 = 2.0, 1.0, 1.0, 1.0
        elif kind == 1:
            c = -a * math.cos(twopi * x)
            j11, j12, j21, j22 = 1.0 + c, 1.0, c, 1.0
        elif kind == 2:
            j11, j12, j21, j22 = -2.0 * a * x, 1.0, b, 0.0
        else:
            xx = x
            if xx == 0.0:
                xx = jitter_draws[i]     # one-sided derivative at the kink
            sg = 1.0 if xx > 0.0 else -1.0
            j11, j12, j21, j22 = -a * sg, 1.0, b, 0.0
        w1x = j11 * v1x + j12 * v1y
        w1y = j21 * v1x + j22 * v1y
        w2x = j11 * v2x + j12 * v2y
        w2y = j21 * v2x + j22 * v2y
        # Gram-Schmidt
        n1 = math.sqrt(w1x * w1x + w1y * w1y)
        v1x, v1y = w1x / n1, w1y / n1
        d = w2x * v1x + w2y * v1y
        w2x -= d * v1x
        w2y -= d * v1y
        n2 = math.sqrt(w2x * w2x + w2y * w2y)
        v2x, v2y = w2x / n2, w2y / n2
        s1 += math.log(n1)
        s2 += math.log(n2)
        # advance the base point
        if kind == 0:
            xn = (2.0 * x + y) % 1.0
            yn = (x + y) % 1.0
        elif kind == 1:
            yn = (y - a / twopi * math.sin(twopi * x)) % 1.0
            xn = (x + yn + 1.0) % 1.0
        elif kind == 2:
            xn = 1.0 + y - a * x * x
            yn = b * x
        else:
            xn = 1.0 + y - a * abs(x)
            yn = b * x
        x, y = xn, yn
    return s1 / n, s2 / n


def _kaplan_yorke(lams):
    lams = sorted(lams, reverse=True)
    if lams[0] <= 0:
        return 0.0 if lams[0] < 0 else 1.0
    acc = 0.0
    n = 0
    for lam in lams:
        if acc + lam >= 0:
            acc += lam
            n += 1
        else:
            break
    if n >= len(lams):
        return float(len(lams))
    return n + acc / abs(lams[n])


def lyapunov_spectrum(spec, x0, n=10 ** 6, burn_in=1000, dt=0.01, seed=0):
    """Lyapunov exponents by tangent-space iteration with QR renormalization.

    Returns nats per iteration for maps, nats per time unit for the Lorenz
    flow (integrated with step dt).  Also reports the Kaplan-Yorke dimension
    and the partial-dimension split (d_u unstable, d_n neutral, d_s the
    fractional remainder).
    """
    rng = spawn_rng(seed)
    if spec.kind in ("toy",):
        raise UnsupportedOperationError("no spectrum for the stochastic toy model")
    if spec.dim == 1:
        orb0 = dynsys.iterate(spec, None, np.asarray(x0, dtype=float),
                              1, burn_in=burn_in, seed=seed) \
            if spec.kind == "cantor" else None
        x = float(np.asarray(x0).ravel()[0])
        for _ in range(burn_in):
            if spec.kind == "cantor":
                break
            x = dynsys._step_1d(spec.kind, spec.params[0] if spec.params else 0.0, x)
        branch = rng.random(n) if spec.kind == "cantor" else np.empty(0)
        if spec.kind == "cantor":
            x = float(orb0.states[0])
        lam = _lyap_1d(dynsys._INTERVAL_CODES[spec.kind],
                       spec.params[0] if spec.params else 0.0, x, n, branch)
        lams = (float(lam),)
        dky = _kaplan_yorke(list(lams))
        if spec.kind in ("bernoulli", "lsv", "manpom") and lam > 0:
            dky = 1.0
        d_u = int(lams[0] > 1e-12)
        d_s = dky - d_u
        return SpectrumReport(lyapunov=lams, d_ky=dky, d_u=d_u, d_n=0,
                              d_s=d_s, delta=d_s + d_u / 2.0, dt=1.0)
    if spec.kind == "lorenz":
        return _lyap_lorenz(spec, x0, n, burn_in, dt)
    # 2-D maps
    burn_orbit = dynsys.iterate(spec, None, x0, 1, burn_in=burn_in, seed=seed)
    xb, yb = burn_orbit.states[0]
    jit = 1e-12 * (rng.random(n) - 0.5) if spec.kind == "lozi" else np.empty(0)
    if spec.kind == "lozi" and jit.size:
        jit = np.where(jit == 0.0, 1e-12, jit)
    a = spec.params[0] if spec.params else 0.0
    b = spec.params[1] if len(spec.params) > 1 else 0.0
    l1, l2 = _lyap_2d(dynsys._MAP2_CODES[spec.kind], a, b, xb, yb, n, jit)
    lams = tuple(sorted((float(l1), float(l2)), reverse=True))
    dky = _kaplan_yorke(list(lams))
    d_u = int(np.sum(np.asarray(lams) > 1e-6))
    d_s = dky - d_u
    return SpectrumReport(lyapunov=lams, d_ky=dky, d_u=d_u, d_n=0,
                          d_s=d_s, delta=d_s + d_u / 2.0, dt=1.0)


def _lyap_lorenz(spec, x0, n, burn_in, dt):
    s, r, b = spec.params
    orb = dynsys.integrate_lorenz(spec, x0, dt, 1, substeps=max(1, int(dt / 0.002)),
                                  burn_in=burn_in)
    state = np.concatenate([orb.states[0], np.eye(3).ravel()])

    def rhs(v):
        x, y, z = v[:3]
        Y = v[3:].reshape(3, 3)
        J = np.array([[-s, s, 0.0], [r - z, -1.0, -x], [y, x, -b]])
        return np.concatenate([[s * (y - x), x * (r - z) - y, x * y - b * z],
                               (J @ Y).ravel()])

    h = dt
    acc = np.zeros(3)
    for _ in range(n):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        Y = state[3:].reshape(3, 3)
        Q, R = np.linalg.qr(Y)
        sgn = np.sign(np.diag(R))
        sgn[sgn == 0] = 1.0
        Q *= sgn
        R *= sgn[:, None]
        acc += np.log(np.abs(np.diag(R)))
        state[3:] = Q.ravel()
    lams = tuple(sorted((acc / (n * dt)).tolist(), reverse=True))
    dky = _kaplan_yorke(list(lams))
    d_u = int(np.sum(np.asarray(lams) > 1e-3))
    d_n = 1
    d_s = dky - d_u - d_n
    return SpectrumReport(lyapunov=lams, d_ky=dky, d_u=d_u, d_n=d_n,
                          d_s=d_s, delta=d_s + (d_u + d_n) / 2.0, dt=dt)


# ---------------------------------------------------------------------------
# information dimension from recurrence fits


def _fit_route_values(dist, route, alpha, bin_len, k_grid, C):
    """Per-route dimension estimate from one zeta's distance series."""
    if route in ("sigma_g1", "xi_g2", "xi_g3"):
        if route == "sigma_g1":
            y = -np.log(dist)
        elif route == "xi_g2":
            y = dist ** (-1.0 / alpha)
        else:
            y = C - dist ** (1.0 / alpha)
        bm = block_maxima(y, bin_len, trim_out=1)
        fit = fit_gev_lmoments(bm.maxima)
        if route == "sigma_g1":
            return dim_from_fit(fit.params.sigma, "sigma_g1")
        if route == "xi_g2":
            return dim_from_fit(fit.params.xi, "xi_g2", alpha)
        return dim_from_fit(fit.params.xi, "xi_g3", alpha)
    # drift routes: sweep the bin count k over k_grid
    mus = []
    sigmas = []
    lks = []
    ntot = dist.size
    for k in k_grid:
        bl = ntot // int(k)
        if bl < 2:
            continue
        if route == "mu_slope_g1":
            y = -np.log(dist)
        elif route in ("mu_g2", "sigma_g2"):
            y = dist ** (-1.0 / alpha)
        else:
            y = C - dist ** (1.0 / alpha)
        bm = block_maxima(y, bl, trim_out=1)
        fit = fit_gev_lmoments(bm.maxima)
        mus.append(fit.params.mu)
        sigmas.append(fit.params.sigma)
        lks.append(np.log(ntot // bl))
    if len(lks) < 2:
        raise FitError("not enough usable bin counts for a drift route")
    lks = np.asarray(lks)
    if route == "mu_slope_g1":
        slope = np.polyfit(lks, np.asarray(mus), 1)[0]
        return dim_from_fit(slope, "mu_slope_g1")
    if route == "mu_g2":
        slope = np.polyfit(lks, np.log(np.asarray(mus)), 1)[0]
        return dim_from_fit(slope, "mu_g2", alpha)
    slope = np.polyfit(lks, np.log(np.asarray(sigmas)), 1)[0]
    return dim_from_fit(slope, route, alpha)


def information_dimension(spec, routes, q_points=20, s=10 ** 6, bin_len=1000,
                          alpha=3.0, C=10.0, k_grid=(250, 500, 1000, 2000),
                          seed=0, noise=None):
    """Average local dimension over reference points drawn from the orbit.

    Generates one long orbit, takes q_points reference points at a fixed
    stride (so they sample the invariant measure), builds the distance series
    to each, and estimates the dimension along every requested inversion
    route.  Reports per-point values and the mean +- sd per route.
    """
    if q_points < 2:
        raise ConfigurationError("need at least 2 reference points")
    for r in routes:
        if r not in ROUTES:
            raise ConfigurationError(f"unknown route {r!r}")
    rng = spawn_rng(seed, task_index=1)
    x0 = rng.random(spec.dim) if spec.dim > 1 else rng.random()
    if spec.kind in ("henon", "lozi"):
        x0 = 0.1 * (rng.random(2) - 0.5)
    orbit = dynsys.iterate(spec, noise, x0, int(s), burn_in=1000, seed=seed)
    states = orbit.states
    stride = max(1000, int(s) // q_points)
    zi = (np.arange(q_points) * stride + stride // 2) % len(states)
    d_point = {r: [] for r in routes}
    failed = 0
    for j in range(q_points):
        zeta = states[zi[j]]
        dist = observables.distances(states, spec.space, np.atleast_1d(zeta))
        dist = np.delete(dist, zi[j])           # drop the exact self-hit
        dist = dist[dist > 0]
        try:
            for r in routes:
                d_point[r].append(_fit_route_values(dist, r, alpha, bin_len,
                                                    k_grid, C))
        except EvtdynError:
            failed += 1
    if failed > q_points / 2:
        raise FitError(f"{failed}/{q_points} reference points failed to fit")
    d1 = {}
    dp = {}
    for r in routes:
        v = np.asarray(d_point[r], dtype=float)
        dp[r] = v
        d1[r] = (float(np.mean(v)), float(np.std(v)))
    return DimensionReport(routes=tuple(routes), d_point=dp, d1=d1,
                           n_failed=failed, n_zetas=q_points)


# ---------------------------------------------------------------------------
# physical observables


def physical_predictions(d_s, d_u, d_n, A_max, T):
    """(delta, xi, sigma) of the extremes of a physical observable.

    delta = d_s + (d_u + d_n)/2; xi = -1/delta; sigma = (A_max - T)/delta.
    """
    if min(d_s, d_u, d_n) < 0:
        raise ConfigurationError("partial dimensions must be >= 0")
    delta = d_s + (d_u + d_n) / 2.0
    if delta <= 0:
        raise ConfigurationError("delta must be > 0")
    return delta, -1.0 / delta, (A_max - T) / delta


def partial_dimensions(xi_A, xi_B, alpha):
    """Invert physical (xi_A) and distance (xi_B) shapes into partial dimensions.

    d_u + d_n = 2/xi_A - 2/(alpha xi_B);  d_s = 1/(alpha xi_B) - 2/xi_A.
    Warns when the Kaplan-Yorke bound -1/xi_A < d_KY < -2/xi_A is violated.
    """
    if xi_A >= 0 or xi_B >= 0:
        raise ConfigurationError("both shape parameters must be < 0")
    if alpha <= 0:
        raise ConfigurationError("alpha must be > 0")
    d_un = 2.0 / xi_A - 2.0 / (alpha * xi_B)
    d_s = 1.0 / (alpha * xi_B) - 2.0 / xi_A
    d_ky = -1.0 / (alpha * xi_B)
    if not (-1.0 / xi_A < d_ky < -2.0 / xi_A):
        warnings.warn("inputs violate the -1/xi_A < d_KY < -2/xi_A bound")
    return d_un, d_s


def exceedance_tail_slope(series, p=0.99999, n_points=30):
    """Log-log slope of the empirical excess survival function near the top.

    For a physical observable with maximum A_max over the attractor, the
    survival of excesses over T behaves like (1 - z/(A_max - T))**delta; the
    returned slope estimates delta.  A_max is taken as the sample maximum.
    """
    x = np.asarray(series, dtype=float)
    T = float(np.quantile(x, p))
    amax = float(x.max())
    z = x[x > T] - T
    z = z[z < (amax - T)]
    if z.size < 100:
        raise ConfigurationError("too few exceedances for a tail slope")
    zs = np.sort(z)
    # survival evaluated on a grid of excess levels away from both endpoints
    levels = np.linspace(0.0, 0.9 * (amax - T), n_points + 1)[1:]
    surv = 1.0 - np.searchsorted(zs, levels, side="right") / z.size
    keep = surv > 0
    lx = np.log(1.0 - levels[keep] / (amax - T))
    ly = np.log(surv[keep])
    return float(np.polyfit(lx, ly, 1)[0])
