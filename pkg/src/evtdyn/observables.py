"""Scalar observables along orbits.

Distance observables measure closeness to a reference point zeta through a
decreasing function of the phase-space distance:

    g1(r) = -log r        g2(r) = r**(-1/alpha)        g3(r) = C - r**(1/alpha)

so large observable values correspond to close returns.  Linear observables
a . x + d probe the attractor through a smooth function maximized at a unique
boundary point.  All evaluations are pure and vectorized.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SingularObservationError

__all__ = [
    "ObservableSpec", "TimeSeries",
    "g1", "g2", "g3", "linear_observable",
    "metric_dist", "distances", "evaluate", "series",
]

_SPACES = ("interval", "torus-1d", "torus-2d", "plane-2d", "space-3d")
_TORUS = ("torus-1d", "torus-2d")


@dataclass(frozen=True)
class ObservableSpec:
    kind: str                       # "g1" | "g2" | "g3" | "linear"
    zeta: np.ndarray = None         # reference point, distance kinds only
    alpha: float = None             # exponent, g2/g3
    C: float = None                 # upper bound, g3
    coeffs: np.ndarray = None       # (a_1..a_D, d), linear kind only

    def __post_init__(self):
        if self.kind not in ("g1", "g2", "g3", "linear"):
            raise ConfigurationError(f"unknown observable kind {self.kind!r}")
        if self.kind == "linear":
            if self.coeffs is None or len(np.atleast_1d(self.coeffs)) < 2:
                raise ConfigurationError("linear observable needs (a_1..a_D, d)")
            a = np.asarray(self.coeffs, dtype=float)[:-1]
            if not np.any(a != 0.0):
                raise ConfigurationError("linear coefficients must not all be zero")
            object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        else:
            if self.zeta is None:
                raise ConfigurationError(f"{self.kind} needs a reference point zeta")
            object.__setattr__(self, "zeta",
                               np.atleast_1d(np.asarray(self.zeta, dtype=float)))
            if self.kind in ("g2", "g3"):
                if self.alpha is None or self.alpha <= 0:
                    raise ConfigurationError("alpha must be > 0")
            if self.kind == "g3" and self.C is None:
                raise ConfigurationError("g3 needs the constant C")


def g1(zeta):
    return ObservableSpec("g1", zeta=zeta)


def g2(zeta, alpha):
    return ObservableSpec("g2", zeta=zeta, alpha=alpha)


def g3(zeta, alpha, C):
    return ObservableSpec("g3", zeta=zeta, alpha=alpha, C=C)


def linear_observable(coeffs):
    return ObservableSpec("linear", coeffs=coeffs)


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    dt: float = 1.0
    provenance: tuple = field(default=("external",))

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ConfigurationError("TimeSeries values must be a nonempty 1-D array")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def metric_dist(space, x, y):
    """Distance between points of the given phase space.

    Torus coordinates use the quotient metric min(|dx|, 1-|dx|) per coordinate,
    combined in the Euclidean way; flat spaces use the Euclidean distance.
    Broadcasts over leading axes of x / y.
    """
    if space not in _SPACES:
        raise ConfigurationError(f"unknown space {space!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1:] != y.shape[-1:] and x.ndim > 0 and y.ndim > 0:
        raise ConfigurationError("dimension mismatch between points")
    d = np.abs(x - y)
    if space in _TORUS:
        d = np.minimum(d, 1.0 - d)
    if d.ndim == 0 or space in ("interval", "torus-1d"):
        return np.abs(d) if d.ndim else float(d)
    return np.sqrt(np.sum(d * d, axis=-1))


def distances(orbit_states, space, zeta):
    """Distance series from orbit states to a fixed reference point."""
    s = np.asarray(orbit_states, dtype=float)
    z = np.atleast_1d(np.asarray(zeta, dtype=float))
    if s.ndim == 1:
        if z.size != 1:
            raise ConfigurationError("dimension mismatch between orbit and zeta")
        return metric_dist(space, s, z[0])
    if z.size != s.shape[1]:
        raise ConfigurationError("dimension mismatch between orbit and zeta")
    return metric_dist(space, s, z)


def _apply(obs, dist):
    if obs.kind == "g1":
        return -np.log(dist)
    if obs.kind == "g2":
        return dist ** (-1.0 / obs.alpha)
    return obs.C - dist ** (1.0 / obs.alpha)


def evaluate(obs, x, space="interval"):
    """Evaluate the observable at a single state."""
    if obs.kind == "linear":
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        return float(np.dot(obs.coeffs[:-1], xv) + obs.coeffs[-1])
    r = distances(np.atleast_2d(np.asarray(x, dtype=float))
                  if np.ndim(x) else np.asarray([x], dtype=float),
                  space, obs.zeta)
    r = float(np.asarray(r).ravel()[0])
    if r == 0.0 and obs.kind in ("g1", "g2"):
        raise SingularObservationError("evaluation exactly at zeta")
    return float(_apply(obs, r))


def series(orbit, obs, space=None):
    """Evaluate the observable along an orbit, returning a TimeSeries.

    ``orbit`` is anything with .states (and optionally .dt, .seed); ``space``
    defaults to orbit.spec.space when the orbit carries its system spec.
    """
    states = np.asarray(orbit.states, dtype=float)
    dt = float(getattr(orbit, "dt", 1.0))
    spec = getattr(orbit, "spec", None)
    if space is None:
        space = getattr(spec, "space", "interval")
    seed = getattr(orbit, "seed", None)
    if obs.kind == "linear":
        st = states if states.ndim == 2 else states[:, None]
        vals = st @ obs.coeffs[:-1] + obs.coeffs[-1]
        return TimeSeries(vals, dt=dt, provenance=(spec, obs, seed))
    r = distances(states, space, obs.zeta)
    if obs.kind in ("g1", "g2"):
        hits = np.flatnonzero(r == 0.0)
        if hits.size:
            raise SingularObservationError(
                f"orbit hits zeta exactly at index {hits[0]}", index=int(hits[0]))
    return TimeSeries(_apply(obs, r), dt=dt, provenance=(spec, obs, seed))
