"""Euler-Maruyama integration of the controlled slow-fast system.

The simulated dynamics (slow ``X``, fast ``Y``, controls ``u1``, ``u2``) are

    dX = [-(eps/delta) Q'(Y) - X + sqrt(lam) u1] dt + sqrt(eps lam) dW
    dY = [-(eps/delta**2) Q'(Y) + sqrt(2D)/delta (theta u1 + sqrt(1-theta**2) u2)] dt
         + sqrt(eps)/delta sqrt(2D) (theta dW + sqrt(1-theta**2) dB)

and every path carries the log likelihood ratio
``-(1/2eps) int |u|**2 dt - (1/sqrt(eps)) int <u, (dW, dB)>``.

The inner loop is compiled with numba. The field enters through a
piecewise-cubic Hermite table of ``Q, Q', Q''`` built from the exact modal
sums; points outside the table fall back to direct modal evaluation.
"""

from dataclasses import dataclass
import math

import numba
import numpy as np

from .environment import analytic_moments
from .errors import InvalidParameterError, PathDivergedError, TooExpensiveError
from .hjb_control import ControlPolicy, EffectiveModel
from .random_field import eval_all

DEFAULT_MAX_STEPS = 10**8
CHUNK_STEPS = 1 << 14

TABLE_HALF_WIDTH = 256.0
TABLE_SPACING = 1.0 / 256.0


@dataclass(frozen=True)
class ModelParams:
    epsilon: float
    delta: float
    T: float = 1.0
    t0: float = 0.0
    lambda_: float = 1.0
    D: float = 1.0
    theta: float = 0.5
    x0: float = 0.05
    y0: float = 0.0
    zeta: float = 1e-3

    def __post_init__(self):
        if not (self.epsilon > 0 and self.delta > 0):
            raise InvalidParameterError("epsilon and delta must be positive")
        if not self.delta / self.epsilon < 1:
            raise InvalidParameterError("delta/epsilon must be below 1")
        if not (self.lambda_ > 0 and self.D > 0 and self.zeta > 0):
            raise InvalidParameterError("lambda_, D and zeta must be positive")
        if not -1.0 <= self.theta <= 1.0:
            raise InvalidParameterError(f"theta must lie in [-1, 1], got {self.theta}")
        if not self.T > self.t0:
            raise InvalidParameterError("T must exceed t0")
        if self.dt > (self.T - self.t0) * (1 + 1e-12):
            raise InvalidParameterError("time step exceeds the horizon")

    @property
    def dt(self):
        return self.delta ** 2 / self.epsilon * self.zeta

    def replace(self, **changes):
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class PathSample:
    x_terminal: float
    i1: float
    i2: float
    weight: float
    contribution: float
    log_contribution: float


def steps_for(params, max_steps=DEFAULT_MAX_STEPS):
    """Number of Euler steps, ``ceil((T - t0) eps / (delta**2 zeta))``."""
    ratio = (params.T - params.t0) * params.epsilon / (params.delta ** 2 * params.zeta)
    # Representation noise must not add a spurious extra step.
    n = max(1, math.ceil(ratio - 1e-9 * ratio))
    if n > max_steps:
        raise TooExpensiveError(
            f"{n} steps per path exceeds the cap of {max_steps}; increase zeta")
    return n


@dataclass(frozen=True, eq=False)
class FieldTable:
    """Hermite interpolation table of ``Q`` and its first two derivatives."""

    lo: float
    spacing: float
    values: np.ndarray  # shape (3, n_nodes): Q, Q', Q''

    @classmethod
    def build(cls, real, center=0.0, half_width=TABLE_HALF_WIDTH, spacing=TABLE_SPACING):
        n = int(round(2 * half_width / spacing))
        lo = center - half_width
        nodes = lo + spacing * np.arange(n + 1)
        return cls(lo, spacing, np.ascontiguousarray(eval_all(real, nodes)))


@numba.njit(cache=True, nogil=True, error_model="numpy")
def _hermite(f0, f1, d0, d1, tau, h):
    t2 = tau * tau
    om = 1.0 - tau
    return ((1.0 + 2.0 * tau) * om * om * f0 + tau * om * om * h * d0
            + t2 * (3.0 - 2.0 * tau) * f1 + t2 * (tau - 1.0) * h * d1)


@numba.njit(cache=True, nogil=True, error_model="numpy")
def _field_at(y, lo, spacing, table, k, a, b, scale):
    s = (y - lo) * (1.0 / spacing)
    if s >= 0.0 and s < table.shape[1] - 1:
        i = int(s)
        tau = s - i
        q = _hermite(table[0, i], table[0, i + 1], table[1, i], table[1, i + 1], tau, spacing)
        dq = _hermite(table[1, i], table[1, i + 1], table[2, i], table[2, i + 1], tau, spacing)
        return q, dq
    q = 0.0
    dq = 0.0
    for j in range(k.shape[0]):
        c = math.cos(k[j] * y)
        sn = math.sin(k[j] * y)
        q += a[j] * c + b[j] * sn
        dq += k[j] * (b[j] * c - a[j] * sn)
    return scale * q, scale * dq


@numba.njit(cache=True, nogil=True, error_model="numpy")
def _advance(state, normals, step0, n_total, coef, lo, spacing, table, k, a, b, scale,
             controlled, cscale):
    """Advance ``state = [x, y, i1, i2]`` over ``len(normals)`` steps.

    Returns -1 on success or the global index of the first step producing a
    non-finite state.
    """
    t0, dt, T, eps, delta, lam, D, theta, K, q = (
        coef[0], coef[1], coef[2], coef[3], coef[4], coef[5], coef[6], coef[7],
        coef[8], coef[9])
    sl = math.sqrt(lam)
    s2d = math.sqrt(2.0 * D)
    sth = math.sqrt(1.0 - theta * theta)
    noise_x = math.sqrt(eps * lam)
    noise_y = math.sqrt(eps) / delta * s2d
    drift_x = eps / delta
    drift_y = eps / (delta * delta)
    eT = math.exp(T)
    den_T = (1.0 + q) * math.exp(2.0 * T)

    x = state[0]
    y = state[1]
    i1 = state[2]
    i2 = state[3]
    for j in range(normals.shape[0]):
        step = step0 + j
        t = t0 + step * dt
        h = dt if step < n_total - 1 else T - t
        sq = math.sqrt(h)
        dw = sq * normals[j, 0]
        db = sq * normals[j, 1]
        qy, dqy = _field_at(y, lo, spacing, table, k, a, b, scale)
        if controlled:
            et = math.exp(t)
            gx = -2.0 * et * (eT - abs(x) * et) / (den_T - q * et * et)
            if x < 0.0:
                gx = -gx
            gx *= cscale
            psi = math.exp(qy / D) / K - 1.0
            u1 = -(sl + theta * s2d * psi) * gx
            u2 = -s2d * sth * psi * gx
            i1 += (u1 * u1 + u2 * u2) * h
            i2 += u1 * dw + u2 * db
        else:
            u1 = 0.0
            u2 = 0.0
        xn = x + (-drift_x * dqy - x + sl * u1) * h + noise_x * dw
        yn = y + (-drift_y * dqy + s2d / delta * (theta * u1 + sth * u2)) * h \
            + noise_y * (theta * dw + sth * db)
        if not (math.isfinite(xn) and math.isfinite(yn) and math.isfinite(i2)):
            return step
        x = xn
        y = yn
    state[0] = x
    state[1] = y
    state[2] = i1
    state[3] = i2
    return -1


def terminal_cost_scalar(x):
    return (x - 1.0) ** 2 if x >= 0 else (x + 1.0) ** 2


class PathEngine:
    """Simulator bound to one environment realization and parameter set.

    Building the engine tabulates the field once; :meth:`simulate_path` can
    then be called concurrently from several threads.
    """

    def __init__(self, params, real, stats=None, model=None, max_steps=DEFAULT_MAX_STEPS,
                 table=None):
        self.params = params
        self.real = real
        self.stats = stats if stats is not None else analytic_moments(params.D)
        if model is None:
            model = EffectiveModel.build(self.stats, T=params.T, lambda_=params.lambda_,
                                         theta=params.theta)
        self.model = model
        self.n_steps = steps_for(params, max_steps)
        self.table = table if table is not None else FieldTable.build(real, center=params.y0)
        p = params
        self._coef = np.array([p.t0, p.dt, p.T, p.epsilon, p.delta, p.lambda_, p.D, p.theta,
                               self.stats.K, model.q])
        self._modes = (np.ascontiguousarray(real.wavenumbers),
                       np.ascontiguousarray(real.cos_amps),
                       np.ascontiguousarray(real.sin_amps),
                       1.0 / math.sqrt(real.n_modes))

    def simulate_path(self, policy, rng, control_scale=1.0):
        """Run one path from ``(x0, y0)`` to ``T`` using normals drawn from ``rng``.

        ``control_scale`` multiplies the importance-sampling control; it
        exists so the zero-control limit can be exercised through the
        controlled code path.
        """
        policy = ControlPolicy(policy)
        p = self.params
        state = np.array([p.x0, p.y0, 0.0, 0.0])
        controlled = policy is ControlPolicy.ImportanceSampling
        k, a, b, scale = self._modes
        tab = self.table
        done = 0
        while done < self.n_steps:
            m = min(CHUNK_STEPS, self.n_steps - done)
            normals = rng.standard_normal((m, 2))
            bad = _advance(state, normals, done, self.n_steps, self._coef, tab.lo,
                           tab.spacing, tab.values, k, a, b, scale, controlled,
                           float(control_scale))
            if bad >= 0:
                raise PathDivergedError(bad)
            done += m
        x, _, i1, i2 = state
        log_w = -i1 / (2 * p.epsilon) - i2 / math.sqrt(p.epsilon)
        log_c = log_w - terminal_cost_scalar(x) / p.epsilon
        if not math.isfinite(log_w):
            raise PathDivergedError(self.n_steps)
        weight = math.exp(log_w)
        return PathSample(float(x), float(i1), float(i2), weight, math.exp(log_c), log_c)


def simulate_path(params, real, stats, model, policy, rng, max_steps=DEFAULT_MAX_STEPS):
    """One controlled or uncontrolled path; see :class:`PathEngine`."""
    return PathEngine(params, real, stats, model, max_steps).simulate_path(policy, rng)
