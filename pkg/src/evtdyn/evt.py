"""GEV / GPD distribution kernels, estimation, and goodness of fit.

The generalized extreme value family

    G(y) = exp(-(1 + xi*(y-mu)/sigma)**(-1/xi)),   1 + xi*(y-mu)/sigma > 0

(Gumbel branch exp(-exp(-(y-mu)/sigma)) at xi = 0) models block maxima; the
generalized Pareto family

    H(z) = 1 - (1 + xi*z/sigma)**(-1/xi),          z >= 0

models threshold excesses and shares the shape xi with the matching GEV.
Estimators: maximum likelihood (simplex over (xi, log sigma, mu) with profile-
likelihood intervals), L-moments, and moment-based GPD inversion of arbitrary
order.  The Gumbel goodness-of-fit test calibrates its critical values by
Monte Carlo since the parameters are estimated from the data.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special, stats

from .errors import (ConfigurationError, DegenerateSampleError, FitError)
from .rng import spawn_rng

__all__ = [
    "GevParams", "GpdParams", "FitResult", "GofResult",
    "gev_cdf", "gev_pdf", "gev_quantile", "gev_sample",
    "gpd_cdf", "gpd_pdf", "gpd_quantile", "gpd_sample",
    "sample_lmoments", "empirical_quantile",
    "fit_gev_mle", "fit_gpd_mle", "fit_gev_lmoments", "fit_gpd_lmoments",
    "fit_gpd_moments", "gpd_analytic_moment",
    "ks_test", "lilliefors_gumbel", "gumbel_mle",
]

_XI_ZERO = 1.0e-6       # |xi| below this uses the Gumbel / exponential branch
_EULER = float(np.euler_gamma)


@dataclass(frozen=True)
class GevParams:
    xi: float
    sigma: float
    mu: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be > 0")


@dataclass(frozen=True)
class GpdParams:
    xi: float
    sigma: float
    threshold: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be > 0")


@dataclass(frozen=True)
class GofResult:
    test: str               # "KS" | "LillieforsGumbel"
    stat: float
    passed: bool
    p_value: float = None
    critical: float = None


@dataclass(frozen=True)
class FitResult:
    params: object          # GevParams or GpdParams
    method: str             # "MLE" | "LMOM" | "MOMENTS(n)"
    nll: float = None
    ci95: dict = None       # parameter name -> (lo, hi)
    gof: GofResult = None
    warnings: tuple = ()

    def to_json_dict(self):
        p = self.params
        out = {"schema_version": 1, "method": self.method,
               "xi": p.xi, "sigma": p.sigma}
        if isinstance(p, GevParams):
            out["mu"] = p.mu
        else:
            out["threshold"] = p.threshold
        if self.ci95 is not None:
            out["ci95"] = {k: list(v) for k, v in self.ci95.items()}
        if self.nll is not None:
            out["nll"] = self.nll
        if self.gof is not None:
            out["gof"] = {"test": self.gof.test, "stat": self.gof.stat,
                          "pass": bool(self.gof.passed)}
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out


# ---------------------------------------------------------------------------
# distribution kernels


def gev_cdf(y, params):
    y = np.asarray(y, dtype=float)
    z = (y - params.mu) / params.sigma
    if abs(params.xi) < _XI_ZERO:
        out = np.exp(-np.exp(-z))
    else:
        t = 1.0 + params.xi * z
        # outside the support the cdf saturates at 0 or 1 depending on the side
        t = np.maximum(t, 0.0)
        with np.errstate(divide="ignore"):
            out = np.exp(-np.where(t > 0, t ** (-1.0 / params.xi), np.inf))
        if params.xi < 0:
            out = np.where(t > 0, out, 1.0)
    return out if out.ndim else float(out)


def gev_pdf(y, params):
    y = np.asarray(y, dtype=float)
    z = (y - params.mu) / params.sigma
    if abs(params.xi) < _XI_ZERO:
        out = np.exp(-z - np.exp(-z)) / params.sigma
    else:
        t = 1.0 + params.xi * z
        ok = t > 0
        ts = np.where(ok, t, 1.0)
        out = np.where(
            ok,
            ts ** (-1.0 - 1.0 / params.xi) * np.exp(-ts ** (-1.0 / params.xi))
            / params.sigma,
            0.0)
    return out if out.ndim else float(out)


def gev_quantile(p, params):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ConfigurationError("quantile probability must lie in (0,1)")
    if abs(params.xi) < _XI_ZERO:
        out = params.mu - params.sigma * np.log(-np.log(p))
    else:
        out = params.mu + params.sigma * ((-np.log(p)) ** (-params.xi) - 1.0) \
            / params.xi
    return out if out.ndim else float(out)


def _open_uniform(rng, count):
    # uniform on the open interval (0,1): keeps inverse-cdf sampling finite
    return rng.integers(1, 2 ** 53, size=count) / float(2 ** 53)


def gev_sample(params, count, seed=0):
    rng = spawn_rng(seed)
    return gev_quantile(_open_uniform(rng, count), params)


def gpd_cdf(z, params):
    z = np.asarray(z, dtype=float)
    s = z / params.sigma
    if abs(params.xi) < _XI_ZERO:
        out = 1.0 - np.exp(-s)
    else:
        t = np.maximum(1.0 + params.xi * s, 0.0)
        with np.errstate(divide="ignore"):
            out = 1.0 - np.where(t > 0, t ** (-1.0 / params.xi), 0.0)
    out = np.where(z < 0, 0.0, out)
    return out if out.ndim else float(out)


def gpd_pdf(z, params):
    z = np.asarray(z, dtype=float)
    s = z / params.sigma
    if abs(params.xi) < _XI_ZERO:
        out = np.exp(-s) / params.sigma
    else:
        t = 1.0 + params.xi * s
        ok = t > 0
        ts = np.where(ok, t, 1.0)
        out = np.where(ok, ts ** (-1.0 - 1.0 / params.xi) / params.sigma, 0.0)
    out = np.where(z < 0, 0.0, out)
    return out if out.ndim else float(out)


def gpd_quantile(p, params):
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p >= 1)):
        raise ConfigurationError("quantile probability must lie in [0,1)")
    if abs(params.xi) < _XI_ZERO:
        out = -params.sigma * np.log1p(-p)
    else:
        out = params.sigma * ((1.0 - p) ** (-params.xi) - 1.0) / params.xi
    return out if out.ndim else float(out)


def gpd_sample(params, count, seed=0):
    rng = spawn_rng(seed)
    return gpd_quantile(_open_uniform(rng, count), params)


def gpd_analytic_moment(params, k):
    """E[Z^k] of the GPD: k! sigma^k / prod_{j<=k} (1 - j*xi), finite for xi < 1/k."""
    if params.xi >= 1.0 / k:
        raise ConfigurationError(f"moment of order {k} is infinite for xi >= 1/{k}")
    denom = np.prod([1.0 - j * params.xi for j in range(1, k + 1)])
    return special.factorial(k, exact=True) * params.sigma ** k / denom


# ---------------------------------------------------------------------------
# sample statistics


def empirical_quantile(data, p):
    """Linear interpolation between order statistics at h = (n-1)p + 1.

    The single quantile definition used across the package (thresholds,
    EI estimation, Monte Carlo calibration).
    """
    return np.quantile(np.asarray(data, dtype=float), p, method="linear")


def sample_lmoments(data):
    """Unbiased first four sample L-moments (lambda1..lambda4)."""
    x = np.sort(np.asarray(data, dtype=float))
    n = x.size
    if n < 4:
        raise DegenerateSampleError("need at least 4 points for L-moments")
    j = np.arange(n, dtype=float)
    b0 = x.mean()
    b1 = np.sum(x * j) / (n * (n - 1.0))
    b2 = np.sum(x * j * (j - 1.0)) / (n * (n - 1.0) * (n - 2.0))
    b3 = np.sum(x * j * (j - 1.0) * (j - 2.0)) / (n * (n - 1.0) * (n - 2.0)
                                                  * (n - 3.0))
    l1 = b0
    l2 = 2.0 * b1 - b0
    l3 = 6.0 * b2 - 6.0 * b1 + b0
    l4 = 20.0 * b3 - 30.0 * b2 + 12.0 * b1 - b0
    return l1, l2, l3, l4


# ---------------------------------------------------------------------------
# negative log likelihoods


def gev_nll(theta, x):
    """NLL at theta = (xi, log sigma, mu); +inf outside the support."""
    xi, logs, mu = theta
    sigma = np.exp(logs)
    z = (x - mu) / sigma
    if abs(xi) < _XI_ZERO:
        return x.size * logs + np.sum(z) + np.sum(np.exp(-z))
    t = 1.0 + xi * z
    if np.any(t <= 0):
        return np.inf
    lt = np.log(t)
    return x.size * logs + (1.0 + 1.0 / xi) * np.sum(lt) \
        + np.sum(np.exp(-lt / xi))


def gpd_nll(theta, z):
    """NLL at theta = (xi, log sigma) for excesses z >= 0."""
    xi, logs = theta
    sigma = np.exp(logs)
    s = z / sigma
    if abs(xi) < _XI_ZERO:
        return z.size * logs + np.sum(s)
    t = 1.0 + xi * s
    if np.any(t <= 0):
        return np.inf
    return z.size * logs + (1.0 + 1.0 / xi) * np.sum(np.log(t))


# ---------------------------------------------------------------------------
# L-moment fits


def fit_gpd_lmoments(excesses, threshold=0.0):
    z = np.asarray(excesses, dtype=float)
    l1, l2, _, _ = sample_lmoments(z)
    if l2 <= 0:
        raise DegenerateSampleError("lambda2 <= 0: degenerate sample")
    xi = 2.0 - l1 / l2
    sigma = l1 * (1.0 - xi)
    if sigma <= 0:
        raise DegenerateSampleError("L-moment inversion gave sigma <= 0")
    params = GpdParams(xi=xi, sigma=sigma, threshold=threshold)
    return FitResult(params=params, method="LMOM",
                     nll=float(gpd_nll((xi, np.log(sigma)), z)))


def _gev_from_lmoments(l1, l2, l3):
    if not l2 > 0:
        raise DegenerateSampleError("lambda2 <= 0: degenerate sample")
    tau3 = l3 / l2
    c = 2.0 / (3.0 + tau3) - np.log(2.0) / np.log(3.0)
    k = 7.8590 * c + 2.9554 * c * c
    xi = -k
    if abs(k) < 1e-8:
        sigma = l2 / np.log(2.0)
        mu = l1 - sigma * _EULER
    else:
        gam = special.gamma(1.0 + k)
        sigma = l2 * k / ((1.0 - 2.0 ** (-k)) * gam)
        mu = l1 - sigma * (1.0 - gam) / k
    return xi, sigma, mu


def fit_gev_lmoments(maxima):
    x = np.asarray(maxima, dtype=float)
    l1, l2, l3, _ = sample_lmoments(x)
    xi, sigma, mu = _gev_from_lmoments(l1, l2, l3)
    if sigma <= 0:
        raise DegenerateSampleError("L-moment inversion gave sigma <= 0")
    params = GevParams(xi=xi, sigma=sigma, mu=mu)
    return FitResult(params=params, method="LMOM",
                     nll=float(gev_nll((xi, np.log(sigma), mu), x)))


# ---------------------------------------------------------------------------
# moment-based GPD fit


def fit_gpd_moments(excesses, order=2, threshold=0.0):
    """GPD fit from empirical moments M_k = mean(z^k) of the given order.

    order=2 uses the dispersion-index form; higher orders use the general
    three-moment identity with M_0 = 1.
    """
    z = np.asarray(excesses, dtype=float)
    n = int(order)
    if n < 2:
        raise ConfigurationError("moment order must be >= 2")
    if z.size < 4:
        raise DegenerateSampleError("need at least 4 excesses")

    def M(k):
        return 1.0 if k == 0 else float(np.mean(z ** k))

    mn2, mn1, mn = M(n - 2), M(n - 1), M(n)
    denom = mn2 * mn - mn1 * mn1
    if denom <= 0 or not np.isfinite(denom):
        raise DegenerateSampleError("degenerate moment combination")
    c = 1.0 / (n * (n - 1.0))
    xi = c * ((n - 1.0) - mn1 * mn1 / denom)
    sigma = c * mn1 * mn / denom
    if sigma <= 0:
        raise DegenerateSampleError("moment inversion gave sigma <= 0")
    params = GpdParams(xi=xi, sigma=sigma, threshold=threshold)
    return FitResult(params=params, method="MOMENTS(%d)" % n)


# ---------------------------------------------------------------------------
# maximum likelihood


def _simplex(fun, x0):
    res = optimize.minimize(fun, x0, method="Nelder-Mead",
                            options={"xatol": 1e-8, "fatol": 1e-10,
                                     "maxiter": 5000, "maxfev": 5000})
    return res


_CHI2_95_HALF = float(stats.chi2.ppf(0.95, df=1)) / 2.0     # 1.9207...


def _profile_ci(nll_full, theta_hat, nll_hat, index, scale):
    """Profile-likelihood 95% interval for parameter ``index``.

    Walks outward from the MLE until the profiled NLL exceeds the cut
    nll_hat + chi2_{0.95,1}/2, then solves for the crossing by bisection.
    """
    free = [i for i in range(theta_hat.size) if i != index]

    def prof(v, start):
        def restricted(t):
            full = np.array(theta_hat)
            full[index] = v
            full[free] = t
            return nll_full(full)
        r = _simplex(restricted, start)
        return r.fun, r.x

    cut = nll_hat + _CHI2_95_HALF
    bounds = []
    for direction in (-1.0, 1.0):
        step = scale
        v_in = theta_hat[index]
        start = theta_hat[free]
        v_out = None
        for _ in range(60):
            v = theta_hat[index] + direction * step
            f, t = prof(v, start)
            if f > cut or not np.isfinite(f):
                v_out = v
                break
            v_in, start = v, t
            step *= 1.7
        if v_out is None:
            bounds.append(direction * np.inf)
            continue
        # bisect between the last inside point and the first outside point
        lo, hi = (v_out, v_in) if direction < 0 else (v_in, v_out)
        start_b = start
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            f, t = prof(mid, start_b)
            if np.isfinite(f):
                start_b = t
            inside = np.isfinite(f) and f <= cut
            if direction < 0:
                if inside:
                    hi = mid
                else:
                    lo = mid
            else:
                if inside:
                    lo = mid
                else:
                    hi = mid
            if abs(hi - lo) < 1e-4 * max(1.0, abs(theta_hat[index])):
                break
        bounds.append(0.5 * (lo + hi))
    return tuple(bounds)


def fit_gev_mle(maxima, ci=True, gof=False):
    """GEV fit by maximizing the log likelihood (simplex over xi, log sigma, mu).

    ci=True computes profile-likelihood 95% intervals for each parameter; the
    cut level is the maximized log likelihood minus half the 0.95 chi-square
    quantile with one degree of freedom.
    """
    x = np.asarray(maxima, dtype=float)
    if x.size < 4:
        raise DegenerateSampleError("need at least 4 maxima")
    if np.ptp(x) == 0:
        raise DegenerateSampleError("constant maxima: no spread to fit")
    warns = ()
    if x.size < 30:
        warnings.warn("fewer than 30 maxima: MLE may be unstable")
        warns = ("small-sample",)
    try:
        xi0, s0, m0 = _gev_from_lmoments(*sample_lmoments(x)[:3])
        if not (np.isfinite(s0) and s0 > 0):
            raise DegenerateSampleError("bad start")
    except DegenerateSampleError:
        xi0, s0, m0 = 0.1, max(np.std(x), 1e-8), np.mean(x)
    theta0 = np.array([np.clip(xi0, -0.9, 5.0), np.log(s0), m0])
    if not np.isfinite(gev_nll(theta0, x)):
        theta0 = np.array([0.0, np.log(max(np.std(x), 1e-8)), np.mean(x)])

    res = _simplex(lambda t: gev_nll(t, x), theta0)
    if not np.isfinite(res.fun):
        raise FitError("GEV MLE failed to converge", best=res.x)
    xi, logs, mu = res.x
    params = GevParams(xi=xi, sigma=float(np.exp(logs)), mu=mu)
    ci95 = None
    if ci:
        nll_full = lambda t: gev_nll(t, x)
        ci_xi = _profile_ci(nll_full, res.x, res.fun, 0, 0.03)
        ci_ls = _profile_ci(nll_full, res.x, res.fun, 1, 0.02)
        ci_mu = _profile_ci(nll_full, res.x, res.fun, 2, 0.02 * params.sigma)
        ci95 = {"xi": ci_xi,
                "sigma": (float(np.exp(ci_ls[0])), float(np.exp(ci_ls[1]))),
                "mu": ci_mu}
    g = lilliefors_gumbel(x) if gof and abs(xi) < 0.05 else \
        (ks_test(x, lambda v: gev_cdf(v, params)) if gof else None)
    return FitResult(params=params, method="MLE", nll=float(res.fun),
                     ci95=ci95, gof=g, warnings=warns)


def fit_gpd_mle(excesses, threshold=0.0, ci=True, gof=False):
    """GPD fit of threshold excesses by maximum likelihood.

    95% intervals come from the asymptotic covariance (valid for xi < 1/2);
    when xi >= 1/2 a profile interval is used instead.  A shape estimate at or
    above 1 makes the likelihood ill-posed and is flagged, not raised.
    """
    z = np.asarray(excesses, dtype=float)
    if z.size < 4:
        raise DegenerateSampleError("need at least 4 excesses")
    if np.any(z < 0):
        raise ConfigurationError("excesses must be >= 0")
    warns = ()
    if z.size < 30:
        warnings.warn("fewer than 30 excesses: MLE may be unstable")
        warns += ("small-sample",)
    try:
        f0 = fit_gpd_lmoments(z)
        xi0, s0 = f0.params.xi, f0.params.sigma
    except DegenerateSampleError:
        xi0, s0 = 0.1, max(np.mean(z), 1e-8)
    theta0 = np.array([np.clip(xi0, -0.9, 5.0), np.log(s0)])
    if not np.isfinite(gpd_nll(theta0, z)):
        theta0 = np.array([0.5, np.log(max(np.mean(z), 1e-8))])
    res = _simplex(lambda t: gpd_nll(t, z), theta0)
    if not np.isfinite(res.fun):
        raise FitError("GPD MLE failed to converge", best=res.x)
    xi, logs = res.x
    sigma = float(np.exp(logs))
    if xi >= 1.0:
        warnings.warn("GPD shape >= 1: likelihood is ill-posed, treat with care")
        warns += ("xi-ge-1",)
    params = GpdParams(xi=xi, sigma=sigma, threshold=threshold)
    ci95 = None
    if ci:
        k = z.size
        if xi < 0.5:
            # asymptotic covariance of (sigma, xi), scaled by the sample size
            var_s = 2.0 * sigma ** 2 * (1.0 - xi) / k
            var_x = (1.0 - xi) ** 2 / k
            hw_s = 1.959963984540054 * np.sqrt(var_s)
            hw_x = 1.959963984540054 * np.sqrt(var_x)
            ci95 = {"xi": (xi - hw_x, xi + hw_x),
                    "sigma": (sigma - hw_s, sigma + hw_s)}
        else:
            nll_full = lambda t: gpd_nll(t, z)
            ci_xi = _profile_ci(nll_full, res.x, res.fun, 0, 0.05)
            ci_ls = _profile_ci(nll_full, res.x, res.fun, 1, 0.02)
            ci95 = {"xi": ci_xi,
                    "sigma": (float(np.exp(ci_ls[0])), float(np.exp(ci_ls[1])))}
    g = ks_test(z, lambda v: gpd_cdf(v, params)) if gof else None
    return FitResult(params=params, method="MLE", nll=float(res.fun),
                     ci95=ci95, gof=g, warnings=warns)


# ---------------------------------------------------------------------------
# goodness of fit


def ks_test(data, cdf, level=0.05):
    """Kolmogorov-Smirnov test against a fully specified cdf callable."""
    x = np.asarray(data, dtype=float)
    if x.size < 10:
        raise DegenerateSampleError("need at least 10 points")
    res = stats.kstest(x, cdf)
    return GofResult(test="KS", stat=float(res.statistic),
                     p_value=float(res.pvalue), passed=bool(res.pvalue > level))


def gumbel_mle(data, iters=200, tol=1e-12):
    """Gumbel (xi = 0) fit by the standard fixed-point iteration for sigma."""
    x = np.asarray(data, dtype=float)
    sigma = max(np.std(x) * np.sqrt(6.0) / np.pi, 1e-12)
    xbar = x.mean()
    for _ in range(iters):
        w = np.exp(-(x - x.max()) / sigma)     # shifted for stability
        new = xbar - np.sum(x * w) / np.sum(w)
        if new <= 0:
            new = sigma * 0.5
        if abs(new - sigma) < tol * sigma:
            sigma = new
            break
        sigma = new
    mu = -sigma * np.log(np.mean(np.exp(-(x - x.max()) / sigma))) + x.max()
    return GevParams(xi=0.0, sigma=float(sigma), mu=float(mu))


def _ks_stat_sorted(u):
    """KS statistic of sorted probability-transformed values u (per row)."""
    n = u.shape[-1]
    i = np.arange(1, n + 1, dtype=float)
    d_plus = np.max(i / n - u, axis=-1)
    d_minus = np.max(u - (i - 1.0) / n, axis=-1)
    return np.maximum(d_plus, d_minus)


_lilliefors_cache = {}


def _lilliefors_critical(n, B=2000, seed=202408):
    """95% critical value of the KS statistic after a Gumbel MLE fit, size n."""
    key = (int(n), int(B))
    if key in _lilliefors_cache:
        return _lilliefors_cache[key]
    rng = spawn_rng(seed, task_index=n)
    stats_out = np.empty(B)
    chunk = max(1, min(B, int(2e6 // max(n, 1)) or 1))
    done = 0
    while done < B:
        take = min(chunk, B - done)
        u = rng.random((take, n))
        x = -np.log(-np.log(u))            # standard Gumbel draws
        # vectorized Gumbel MLE across rows
        sigma = np.maximum(x.std(axis=1) * np.sqrt(6.0) / np.pi, 1e-12)
        xbar = x.mean(axis=1)
        xmax = x.max(axis=1, keepdims=True)
        for _ in range(100):
            w = np.exp(-(x - xmax) / sigma[:, None])
            new = xbar - np.sum(x * w, axis=1) / np.sum(w, axis=1)
            new = np.where(new <= 0, sigma * 0.5, new)
            if np.all(np.abs(new - sigma) < 1e-10 * sigma):
                sigma = new
                break
            sigma = new
        w = np.exp(-(x - xmax) / sigma[:, None])
        mu = -sigma * np.log(np.mean(w, axis=1)) + xmax[:, 0]
        z = (x - mu[:, None]) / sigma[:, None]
        probs = np.sort(np.exp(-np.exp(-z)), axis=1)
        stats_out[done:done + take] = _ks_stat_sorted(probs)
        done += take
    crit = float(empirical_quantile(stats_out, 0.95))
    _lilliefors_cache[key] = crit
    return crit


def lilliefors_gumbel(data, B=2000):
    """Gumbel goodness of fit with parameters estimated from the data.

    Fits a Gumbel by MLE, computes the KS statistic against the fitted cdf,
    and compares it to a Monte Carlo null distribution (B simulated Gumbel
    samples of the same size, each refitted).  Pass at the 5% level.
    """
    x = np.asarray(data, dtype=float)
    if x.size < 10:
        raise DegenerateSampleError("need at least 10 points")
    if np.ptp(x) == 0:
        return GofResult(test="LillieforsGumbel", stat=1.0, passed=False)
    fitted = gumbel_mle(x)
    z = (x - fitted.mu) / fitted.sigma
    probs = np.sort(np.exp(-np.exp(-z)))
    stat = float(_ks_stat_sorted(probs))
    crit = _lilliefors_critical(x.size, B=B)
    return GofResult(test="LillieforsGumbel", stat=stat, passed=stat < crit,
                     critical=crit)
