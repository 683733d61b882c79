"""Orbit generation for the supported maps and flows.

Deterministic dynamics, three stochastic perturbation modes (additive noise on
the dynamics, random state resets, observational noise on recorded states
only), a 4th-order Runge-Kutta integrator for the Lorenz flow, and an
Euler-Maruyama integrator for the two-variable turbulence toy model.  The hot
iteration loops are JIT-compiled; all randomness flows through counter-based
substreams (see rng.py) so orbits are reproducible bit-for-bit.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import (ConfigurationError, DivergenceError,
                     UnsupportedOperationError)
from .observables import metric_dist
from .rng import spawn_rng

__all__ = [
    "SystemSpec", "NoiseSpec", "Orbit",
    "bernoulli_shift", "rotation", "cat_map", "standard_map", "henon", "lozi",
    "lsv", "manpom", "cantor_ifs", "lorenz63", "toy_turbulence",
    "no_noise", "additive_noise", "observational_noise", "rasp_noise",
    "step", "inverse_step", "iterate", "integrate_lorenz",
    "simulate_toy_sde", "simulate_toy_energy_ensemble", "toy_fixed_point",
    "observe_with_noise", "orbit_divergence", "reversibility_error",
    "map_jacobian",
]

_DIVERGENCE_RADIUS2 = 1.0e12    # ||state|| > 1e6 counts as escape to infinity

# ---------------------------------------------------------------------------
# specifications


@dataclass(frozen=True)
class SystemSpec:
    kind: str
    params: tuple = ()
    space: str = "interval"
    dim: int = 1
    invertible: bool = False


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"          # "none" | "additive" | "observational" | "rasp"
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "additive", "observational", "rasp"):
            raise ConfigurationError(f"unknown noise kind {self.kind!r}")
        if self.kind != "none" and not self.eps > 0:
            raise ConfigurationError("noise eps must be > 0")
        if self.kind == "rasp" and not self.eps < 1:
            raise ConfigurationError("rasp eps is a probability in (0,1)")


def no_noise():
    return NoiseSpec("none", 0.0)


def additive_noise(eps):
    return NoiseSpec("additive", float(eps))


def observational_noise(eps):
    return NoiseSpec("observational", float(eps))


def rasp_noise(eps):
    return NoiseSpec("rasp", float(eps))


@dataclass(frozen=True)
class Orbit:
    states: np.ndarray
    dt: float = 1.0
    seed: int = 0
    burn_in: int = 0
    spec: SystemSpec = None
    noise: NoiseSpec = None
    transitions: int = None     # toy-model laminarization count, when tracked

    def __len__(self):
        return len(self.states)


def bernoulli_shift(q):
    q = int(q)
    if q < 2:
        raise ConfigurationError("bernoulli shift needs integer q >= 2")
    return SystemSpec("bernoulli", (float(q),), "interval", 1, False)


def rotation(alpha):
    return SystemSpec("rotation", (float(alpha),), "interval", 1, True)


def cat_map():
    return SystemSpec("cat", (), "torus-2d", 2, True)


def standard_map(K):
    if K < 0:
        raise ConfigurationError("standard map needs K >= 0")
    return SystemSpec("standard", (float(K),), "torus-2d", 2, True)


def henon(a=1.4, b=0.3):
    return SystemSpec("henon", (float(a), float(b)), "plane-2d", 2, b != 0)


def lozi(a=1.7, b=0.5):
    return SystemSpec("lozi", (float(a), float(b)), "plane-2d", 2, b != 0)


def lsv(b):
    if not 0 < b < 1:
        raise ConfigurationError("intermittent map exponent b must lie in (0,1)")
    return SystemSpec("lsv", (float(b),), "interval", 1, False)


def manpom(alpha):
    if not alpha > 0:
        raise ConfigurationError("manpom exponent alpha must be > 0")
    return SystemSpec("manpom", (float(alpha),), "interval", 1, False)


def cantor_ifs():
    return SystemSpec("cantor", (), "interval", 1, False)


def lorenz63(sigma=10.0, rho=28.0, beta=8.0 / 3.0):
    if sigma <= 0 or rho <= 0 or beta <= 0:
        raise ConfigurationError("lorenz parameters must be > 0")
    return SystemSpec("lorenz", (float(sigma), float(rho), float(beta)),
                      "space-3d", 3, False)


def toy_turbulence(mu, nu, u=0.0):
    if mu <= 0 or nu <= 0 or u < 0:
        raise ConfigurationError("toy model needs mu, nu > 0 and u >= 0")
    if mu * nu >= 0.25:
        raise ConfigurationError(
            "mu*nu >= 1/4: the nontrivial fixed point does not exist")
    return SystemSpec("toy", (float(mu), float(nu), float(u)), "plane-2d", 2, False)


_INTERVAL_CODES = {"bernoulli": 0, "rotation": 1, "lsv": 2, "manpom": 3, "cantor": 4}
_MAP2_CODES = {"cat": 0, "standard": 1, "henon": 2, "lozi": 3}


# ---------------------------------------------------------------------------
# single steps (python, used for oracles and the 32/64-bit indicators)


def _step_1d(kind, p, x):
    if kind == "bernoulli":
        return (p * x) % 1.0
    if kind == "rotation":
        return (x + p) % 1.0
    if kind == "lsv":
        return x * (1.0 + (2.0 * x) ** p) if x < 0.5 else 2.0 * x - 1.0
    if kind == "manpom":
        return x * (1.0 + 2.0 ** p * x ** p) if x < 0.5 else 2.0 * x - 1.0
    raise UnsupportedOperationError("cantor branch needs a random draw; use iterate")


def _step_2d(kind, params, x, y):
    if kind == "cat":
        return (2.0 * x + y) % 1.0, (x + y) % 1.0
    if kind == "standard":
        K = params[0]
        yn = y - K / (2.0 * math.pi) * math.sin(2.0 * math.pi * x)
        xn = (x + yn + 1.0) % 1.0
        return xn, yn % 1.0
    a, b = params
    if kind == "henon":
        return 1.0 + y - a * x * x, b * x
    return 1.0 + y - a * abs(x), b * x      # lozi


def step(spec, x, noise=None, rng=None):
    """One application of the map, optionally with dynamical noise.

    For additive noise a uniform draw in eps*[-1,1]^D is added (reduced mod 1
    on compact spaces); for random resets the state is replaced by a uniform
    point with probability eps.  ``rng`` supplies the draws when needed.
    """
    if spec.kind in ("lorenz", "toy"):
        raise UnsupportedOperationError(f"{spec.kind} is a flow; use its integrator")
    if spec.dim == 1:
        x0 = float(np.asarray(x).ravel()[0])
        if spec.kind == "cantor":
            if rng is None:
                raise ConfigurationError("cantor branch selection needs an rng")
            xn = x0 / 3.0 if rng.random() < 0.5 else (x0 + 2.0) / 3.0
        else:
            xn = _step_1d(spec.kind, spec.params[0] if spec.params else 0.0, x0)
        out = np.array([xn])
    else:
        xv = np.asarray(x, dtype=float).ravel()
        out = np.array(_step_2d(spec.kind, spec.params, xv[0], xv[1]))
    if noise is not None and noise.kind == "additive":
        if rng is None:
            raise ConfigurationError("additive noise needs an rng")
        out = out + noise.eps * rng.uniform(-1.0, 1.0, size=out.size)
        if spec.space in ("interval", "torus-1d", "torus-2d"):
            out = out % 1.0
    elif noise is not None and noise.kind == "rasp":
        if rng is None:
            raise ConfigurationError("rasp noise needs an rng")
        if spec.space not in ("interval", "torus-1d", "torus-2d"):
            raise ConfigurationError("random resets need a compact phase space")
        if rng.random() < noise.eps:
            out = rng.random(out.size)
    return out if spec.dim > 1 else out[0] if np.ndim(x) == 0 else out


def inverse_step(spec, x):
    """Exact inverse of one deterministic step, for invertible maps."""
    if not spec.invertible:
        raise UnsupportedOperationError(f"{spec.kind} is not invertible")
    if spec.kind == "rotation":
        x0 = float(np.asarray(x).ravel()[0])
        out = (x0 - spec.params[0]) % 1.0
        return out if np.ndim(x) == 0 else np.array([out])
    xv = np.asarray(x, dtype=float).ravel()
    X, Y = xv[0], xv[1]
    if spec.kind == "cat":
        return np.array([(X - Y) % 1.0, (-X + 2.0 * Y) % 1.0])
    if spec.kind == "standard":
        K = spec.params[0]
        xo = (X - Y - 1.0) % 1.0
        yo = (Y + K / (2.0 * math.pi) * math.sin(2.0 * math.pi * xo)) % 1.0
        return np.array([xo, yo])
    a, b = spec.params
    xo = Y / b
    if spec.kind == "henon":
        return np.array([xo, X - 1.0 + a * xo * xo])
    return np.array([xo, X - 1.0 + a * abs(xo)])


def map_jacobian(spec, x):
    """Analytic Jacobian of one deterministic step at x.

    Returns a scalar derivative for 1-D maps, a (D,D) matrix otherwise.
    """
    if spec.dim == 1:
        x0 = float(np.asarray(x).ravel()[0])
        if spec.kind == "bernoulli":
            return spec.params[0]
        if spec.kind == "rotation":
            return 1.0
        if spec.kind == "cantor":
            return 1.0 / 3.0
        p = spec.params[0]
        if x0 < 0.5:
            if spec.kind == "lsv":
                return 1.0 + (1.0 + p) * (2.0 * x0) ** p
            return 1.0 + (p + 1.0) * 2.0 ** p * x0 ** p
        return 2.0
    xv = np.asarray(x, dtype=float).ravel()
    if spec.kind == "cat":
        return np.array([[2.0, 1.0], [1.0, 1.0]])
    if spec.kind == "standard":
        K = spec.params[0]
        c = -K * math.cos(2.0 * math.pi * xv[0])
        # state ordering (x, y): x' = x + y' + 1, y' = y - (K/2pi) sin(2 pi x)
        return np.array([[1.0 + c, 1.0], [c, 1.0]])
    if spec.kind == "lorenz":
        s, r, b = spec.params
        x0, y0, z0 = xv
        return np.array([[-s, s, 0.0], [r - z0, -1.0, -x0], [y0, x0, -b]])
    a, b = spec.params
    if spec.kind == "henon":
        return np.array([[-2.0 * a * xv[0], 1.0], [b, 0.0]])
    sg = 1.0 if xv[0] >= 0 else -1.0
    return np.array([[-a * sg, 1.0], [b, 0.0]])


# ---------------------------------------------------------------------------
# compiled iteration kernels


@njit(cache=True)
def _run_interval(kind, p, x0, n, burn, add, use_add, branch, trig,
                  rasp_x, rasp_eps, use_rasp, out):
    x = x0
    for i in range(n + burn):
        if kind == 0:
            x = (p * x) % 1.0
        elif kind == 1:
            x = (x + p) % 1.0
        elif kind == 2:
            if x < 0.5:
                x = x * (1.0 + (2.0 * x) ** p)
            else:
                x = 2.0 * x - 1.0
        elif kind == 3:
            if x < 0.5:
                x = x * (1.0 + 2.0 ** p * x ** p)
            else:
                x = 2.0 * x - 1.0
        else:
            if branch[i] < 0.5:
                x = x / 3.0
            else:
                x = (x + 2.0) / 3.0
        if use_add:
            x = (x + add[i]) % 1.0
        if use_rasp:
            if trig[i] < rasp_eps:
                x = rasp_x[i]
        if x >= 1.0:
            x -= 1.0
        if i >= burn:
            out[i - burn] = x
    return -1


@njit(cache=True)
def _run_map2(kind, a, b, x0, y0, n, burn, torus, add, use_add,
              aux, rasp_xy, rasp_eps, use_rasp, out):
    x = x0
    y = y0
    twopi = 2.0 * math.pi
    for i in range(n + burn):
        if kind == 0:
            xn = (2.0 * x + y) % 1.0
            yn = (x + y) % 1.0
        elif kind == 1:
            yn = y - a / twopi * math.sin(twopi * x)
            xn = (x + yn + 1.0) % 1.0
            yn = yn % 1.0
        elif kind == 2:
            xn = 1.0 + y - a * x * x
            yn = b * x
        else:
            xn = 1.0 + y - a * abs(x)
            yn = b * x
        if use_add:
            xn = xn + add[i, 0]
            yn = yn + add[i, 1]
            if torus:
                xn = xn % 1.0
                yn = yn % 1.0
        if use_rasp:
            if aux[i] < rasp_eps:
                xn = rasp_xy[i, 0]
                yn = rasp_xy[i, 1]
        x = xn
        y = yn
        if not torus:
            if x * x + y * y > 1.0e12 or x != x or y != y:
                return i
        if i >= burn:
            out[i - burn, 0] = x
            out[i - burn, 1] = y
    return -1


@njit(cache=True)
def _run_lorenz(s, r, b, x0, y0, z0, h, steps_per_sample, n, burn_steps, out):
    x = x0
    y = y0
    z = z0
    total = burn_steps + n * steps_per_sample
    taken = 0
    for i in range(n + 1):
        # sample i = 0 is the (discarded) end of burn-in
        nsub = burn_steps if i == 0 else steps_per_sample
        for _ in range(nsub):
            k1x = s * (y - x)
            k1y = x * (r - z) - y
            k1z = x * y - b * z
            x2 = x + 0.5 * h * k1x
            y2 = y + 0.5 * h * k1y
            z2 = z + 0.5 * h * k1z
            k2x = s * (y2 - x2)
            k2y = x2 * (r - z2) - y2
            k2z = x2 * y2 - b * z2
            x3 = x + 0.5 * h * k2x
            y3 = y + 0.5 * h * k2y
            z3 = z + 0.5 * h * k2z
            k3x = s * (y3 - x3)
            k3y = x3 * (r - z3) - y3
            k3z = x3 * y3 - b * z3
            x4 = x + h * k3x
            y4 = y + h * k3y
            z4 = z + h * k3z
            k4x = s * (y4 - x4)
            k4y = x4 * (r - z4) - y4
            k4z = x4 * y4 - b * z4
            x = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            y = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            z = z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
            taken += 1
            if x * x + y * y + z * z > 1.0e12 or x != x:
                return taken
        if i > 0:
            out[i - 1, 0] = x
            out[i - 1, 1] = y
            out[i - 1, 2] = z
    if taken != total:
        return taken
    return -1


@njit(cache=True)
def _toy_chunk(xs, ys, mu, nu, u, dt, sqdt, normals, restart, fx, fy,
               thresh2, e_out, trans, record_xy, xy_out):
    nsteps = normals.shape[0]
    m = normals.shape[1]
    for i in range(nsteps):
        for j in range(m):
            x = xs[j]
            y = ys[j]
            xn = x + dt * (-mu * x + y * y) - u * x * sqdt * normals[i, j]
            yn = y + dt * (-nu * y + x - x * y)
            if xn * xn + yn * yn > 1.0e12 or xn != xn:
                return i
            if restart and xn * xn + yn * yn < thresh2:
                xn = fx
                yn = fy
                trans[j] += 1
            xs[j] = xn
            ys[j] = yn
            e_out[i, j] = 0.5 * (xn * xn + yn * yn)
            if record_xy:
                xy_out[i, 0] = xn
                xy_out[i, 1] = yn
    return -1


# ---------------------------------------------------------------------------
# orbit drivers


def iterate(spec, noise, x0, n, burn_in=1000, seed=0, stream=0):
    """Generate an orbit of length n (after burn_in discarded iterates)."""
    if n < 1:
        raise ConfigurationError("orbit length must be >= 1")
    if spec.kind in ("lorenz", "toy"):
        raise UnsupportedOperationError(f"{spec.kind} is a flow; use its integrator")
    noise = noise or no_noise()
    rng = spawn_rng(seed, stream)
    nt = n + burn_in
    use_add = noise.kind == "additive"
    use_rasp = noise.kind == "rasp"
    if use_rasp and spec.space not in ("interval", "torus-1d", "torus-2d"):
        raise ConfigurationError("random resets need a compact phase space")
    empty1 = np.empty(0)
    if spec.dim == 1:
        x0f = float(np.asarray(x0).ravel()[0])
        branch = rng.random(nt) if spec.kind == "cantor" else empty1
        add = (noise.eps * rng.uniform(-1.0, 1.0, nt)) if use_add else empty1
        trig = rng.random(nt) if use_rasp else empty1
        rasp_x = rng.random(nt) if use_rasp else empty1
        out = np.empty(n)
        code = _run_interval(_INTERVAL_CODES[spec.kind],
                             spec.params[0] if spec.params else 0.0,
                             x0f, n, burn_in, add, use_add, branch,
                             trig, rasp_x, noise.eps, use_rasp, out)
    else:
        xv = np.asarray(x0, dtype=float).ravel()
        torus = spec.space == "torus-2d"
        add = (noise.eps * rng.uniform(-1.0, 1.0, (nt, 2))) if use_add \
            else np.empty((0, 2))
        aux = rng.random(nt) if use_rasp else empty1
        rasp_xy = rng.random((nt, 2)) if use_rasp else np.empty((0, 2))
        out = np.empty((n, 2))
        a = spec.params[0] if spec.params else 0.0
        b = spec.params[1] if len(spec.params) > 1 else 0.0
        code = _run_map2(_MAP2_CODES[spec.kind], a, b, xv[0], xv[1], n, burn_in,
                         torus, add, use_add, aux, rasp_xy, noise.eps,
                         use_rasp, out)
    if code >= 0:
        raise DivergenceError(f"orbit diverged at step {code}", step=int(code))
    return Orbit(out, dt=1.0, seed=seed, burn_in=burn_in, spec=spec, noise=noise)


def integrate_lorenz(spec, x0, dt, n, substeps=1, burn_in=None, seed=0):
    """Sample the Lorenz flow every dt using RK4 with internal step dt/substeps.

    burn_in is an iterate count (samples of dt); the default discards 1000 time
    units of transient.
    """
    if spec.kind != "lorenz":
        raise ConfigurationError("integrate_lorenz needs a lorenz63 spec")
    if dt <= 0 or substeps < 1 or n < 1:
        raise ConfigurationError("need dt > 0, substeps >= 1, n >= 1")
    if burn_in is None:
        burn_in = int(round(1000.0 / dt))
    s, r, b = spec.params
    xv = np.asarray(x0, dtype=float).ravel()
    out = np.empty((n, 3))
    h = dt / substeps
    code = _run_lorenz(s, r, b, xv[0], xv[1], xv[2], h, substeps, n,
                       burn_in * substeps, out)
    if code >= 0:
        raise DivergenceError(f"flow diverged after {code} internal steps",
                              step=int(code))
    return Orbit(out, dt=dt, seed=seed, burn_in=burn_in, spec=spec)


def toy_fixed_point(mu, nu):
    """Stable nontrivial fixed point of the noise-free toy model.

    Solves -mu*X + Y^2 = 0, -nu*Y + X - X*Y = 0 starting from the closed-form
    branch Y = (1 + sqrt(1-4*mu*nu))/2, X = Y^2/mu and polishing with Newton.
    """
    if mu * nu >= 0.25:
        raise ConfigurationError("mu*nu >= 1/4: no nontrivial fixed point")
    Y = 0.5 * (1.0 + math.sqrt(1.0 - 4.0 * mu * nu))
    X = Y * Y / mu
    for _ in range(50):
        f1 = -mu * X + Y * Y
        f2 = -nu * Y + X - X * Y
        J = np.array([[-mu, 2.0 * Y], [1.0 - Y, -nu - X]])
        dx = np.linalg.solve(J, -np.array([f1, f2]))
        X += dx[0]
        Y += dx[1]
        if abs(f1) + abs(f2) < 1e-14:
            break
    return X, Y


_LAMINAR_THRESHOLD = 1.0e-3


def _toy_run(mu, nu, u, dt, n, members, seed, restart, record_xy, x0=None, stream=0):
    if dt <= 0 or n < 1 or members < 1:
        raise ConfigurationError("need dt > 0, n >= 1, members >= 1")
    fx, fy = toy_fixed_point(mu, nu)
    if x0 is None:
        x0 = (fx, fy)
    xs = np.full(members, float(x0[0]))
    ys = np.full(members, float(x0[1]))
    e_out = np.empty((n, members))
    xy_out = np.empty((n, 2)) if record_xy else np.empty((0, 2))
    trans = np.zeros(members, dtype=np.int64)
    sqdt = math.sqrt(dt)
    done = 0
    chunk = 65536
    rng = spawn_rng(seed, stream)
    while done < n:
        take = min(chunk, n - done)
        normals = rng.standard_normal((take, members))
        code = _toy_chunk(xs, ys, mu, nu, u, dt, sqdt, normals, restart,
                          fx, fy, _LAMINAR_THRESHOLD ** 2,
                          e_out[done:done + take], trans, record_xy,
                          xy_out[done:done + take] if record_xy else xy_out)
        if code >= 0:
            raise DivergenceError(f"toy trajectory diverged at step {done + code}",
                                  step=int(done + code))
        done += take
    return e_out, xy_out, trans


def simulate_toy_sde(mu, nu, u, dt, n, seed=0, restart=True, x0=None, stream=0):
    """Euler-Maruyama trajectory of the two-variable turbulence toy model.

    Multiplicative noise -u*X*sqrt(dt)*N(0,1) acts on the X equation.  When
    restart is true, entering the laminar basin (||(X,Y)|| below 1e-3) resets
    the state to the stable nontrivial fixed point and increments the
    transition counter.
    """
    spec = toy_turbulence(mu, nu, u)
    e, xy, trans = _toy_run(mu, nu, u, dt, n, 1, seed, restart, True, x0=x0, stream=stream)
    return Orbit(xy, dt=dt, seed=seed, burn_in=0, spec=spec,
                 transitions=int(trans[0]))


def simulate_toy_energy_ensemble(mu, nu, u, dt, n, members, seed=0, restart=True, stream=0):
    """Energy series E = (X^2+Y^2)/2 for an ensemble of toy-model members.

    Returns (E, transitions) with E of shape (n, members).  Member j draws from
    column j of a shared noise matrix, so results are independent of how the
    ensemble is partitioned across workers.
    """
    e, _, trans = _toy_run(mu, nu, u, dt, n, members, seed, restart, False, stream=stream)
    return e, trans


def observe_with_noise(orbit, eps, seed=0, stream=0):
    """Perturb recorded states by eps * uniform[-1,1]^D, dynamics untouched."""
    if not eps > 0:
        raise ConfigurationError("eps must be > 0")
    states = np.asarray(orbit.states, dtype=float)
    rng = spawn_rng(seed, stream)
    pert = eps * rng.uniform(-1.0, 1.0, states.shape)
    out = states + pert
    space = getattr(orbit.spec, "space", None)
    if space in ("torus-1d", "torus-2d"):
        out = out % 1.0
    return Orbit(out, dt=orbit.dt, seed=seed, burn_in=orbit.burn_in,
                 spec=orbit.spec, noise=observational_noise(eps))


# ---------------------------------------------------------------------------
# divergence-of-orbits and reversibility-error indicators


def _step_dtype(spec, x, to32):
    """One deterministic step, optionally rounded to 32-bit after the step."""
    xn = step(spec, np.asarray(x, dtype=np.float64))
    xn = np.asarray(xn, dtype=np.float64).ravel()
    if to32:
        xn = xn.astype(np.float32).astype(np.float64)
    return xn


def orbit_divergence(spec, x0, t):
    """Distance after t steps between 32-bit and 64-bit arithmetic orbits."""
    if t < 0:
        raise ConfigurationError("t must be >= 0")
    if spec.kind in ("cantor", "lorenz", "toy"):
        raise UnsupportedOperationError(
            "round-off divergence is defined for deterministic maps")
    xv = np.asarray(x0, dtype=np.float64).ravel()
    xs = xv.astype(np.float32).astype(np.float64)
    xd = xv.copy()
    for _ in range(t):
        xs = _step_dtype(spec, xs, True)
        xd = _step_dtype(spec, xd, False)
    return float(metric_dist(spec.space, xs, xd)) if spec.dim > 1 else \
        float(metric_dist(spec.space, xs[0], xd[0]))


def reversibility_error(spec, x0, t):
    """Distance between x0 and its forward-then-backward t-step 32-bit image."""
    if t < 0:
        raise ConfigurationError("t must be >= 0")
    if not spec.invertible:
        raise UnsupportedOperationError(f"{spec.kind} is not invertible")
    xv = np.asarray(x0, dtype=np.float64).ravel()
    x = xv.astype(np.float32).astype(np.float64)
    for _ in range(t):
        x = _step_dtype(spec, x, True)
    for _ in range(t):
        x = np.asarray(inverse_step(spec, x), dtype=np.float64).ravel()
        x = x.astype(np.float32).astype(np.float64)
    return float(metric_dist(spec.space, x, xv)) if spec.dim > 1 else \
        float(metric_dist(spec.space, x[0], xv[0]))
