"""Homogenized coefficients, the explicit HJB subsolution and the feedback control.

For the quadratic slow potential the homogenized drift is ``r(x) = -x`` and
the effective diffusivity is the constant

    q = lam + (2 D - 2 theta sqrt(lam) sqrt(2 D)) (1 - 1/(K Z)).

The terminal cost ``h`` has two wells at ``x = +-1``. The HJB equation
``G_t - x G_x - q G_x**2 / 2 = 0`` has the piecewise solution

    G(t, x) = (e^T - |x| e^t)**2 / ((1 + q) e^{2T} - q e^{2t}),

the minimum of two smooth solutions, which is used directly as the
subsolution driving the change of measure.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np

from .corrector import chi_prime_explicit
from .errors import InvalidParameterError
from .random_field import DEFAULT_N_MODES, ensemble_values


class ControlPolicy(enum.Enum):
    StandardMC = "std"
    ImportanceSampling = "is"


@dataclass(frozen=True)
class EffectiveModel:
    q: float
    T: float = 1.0
    lambda_: float = 1.0
    D: float = 1.0
    theta: float = 0.5

    def __post_init__(self):
        if not self.q > 0:
            raise InvalidParameterError(f"effective diffusivity must be positive, got {self.q}")
        if not (self.lambda_ > 0 and self.D > 0):
            raise InvalidParameterError("lambda_ and D must be positive")
        if not -1.0 <= self.theta <= 1.0:
            raise InvalidParameterError(f"theta must lie in [-1, 1], got {self.theta}")

    @classmethod
    def build(cls, stats, T=1.0, lambda_=1.0, theta=0.5):
        """Model with ``q`` computed from the environment statistics."""
        q = effective_q(lambda_, stats.D, theta, stats)
        return cls(q=q, T=T, lambda_=lambda_, D=stats.D, theta=theta)


def effective_q(lambda_, D, theta, stats):
    """Effective diffusivity of the homogenized slow process."""
    if not (lambda_ > 0 and D > 0):
        raise InvalidParameterError("lambda_ and D must be positive")
    if not -1.0 <= theta <= 1.0:
        raise InvalidParameterError(f"theta must lie in [-1, 1], got {theta}")
    q = lambda_ + (2 * D - 2 * theta * math.sqrt(lambda_) * math.sqrt(2 * D)) * (
        1.0 - 1.0 / (stats.K * stats.Z))
    # (sqrt(lam) - theta sqrt(2D))^2 + (1 - theta^2) 2D > 0 bounds q below.
    assert q > 0, "effective diffusivity must be positive"
    return q


def effective_q_oracle(lambda_, D, theta, stats, n_realizations=10**6,
                       n_modes=DEFAULT_N_MODES, seed=0):
    """Ergodic-average estimate of ``q`` and its standard error.

    Averages ``(sigma + xi tau1)**2 + (xi tau2)**2`` with
    ``xi = exp(Q/D)/K - 1`` under the invariant measure, realised by
    reweighting field samples ``Q(0)`` with ``exp(-Q/D)`` (ratio estimator).
    """
    q0 = ensemble_values(n_realizations, [0.0], n_modes=n_modes, seed=seed)[:, 0]
    w = np.exp(-q0 / D)
    xi = np.exp(q0 / D) / stats.K - 1.0
    tau1 = math.sqrt(2 * D) * theta
    tau2 = math.sqrt(2 * D) * math.sqrt(1.0 - theta * theta)
    g = (math.sqrt(lambda_) + xi * tau1) ** 2 + (xi * tau2) ** 2
    est = np.sum(w * g) / np.sum(w)
    se = np.std(w * (g - est), ddof=1) / (np.mean(w) * math.sqrt(q0.size))
    return est, se


def terminal_cost(x):
    """Two-well terminal cost: ``(x-1)**2`` for ``x >= 0``, ``(x+1)**2`` otherwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x >= 0, (x - 1.0) ** 2, (x + 1.0) ** 2)
    return float(out) if out.ndim == 0 else out


def _sign(x):
    return np.where(x >= 0, 1.0, -1.0)


def _parts(t, x, model):
    num = math.exp(model.T) - np.abs(x) * np.exp(t)
    den = (1 + model.q) * math.exp(2 * model.T) - model.q * np.exp(2 * t)
    return num, den


def _check_time(t, model):
    if np.any(np.asarray(t) > model.T):
        raise InvalidParameterError("t must not exceed the horizon T")


def _scalar(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


def G_value(t, x, model):
    """Explicit HJB subsolution ``G(t, x)``."""
    _check_time(t, model)
    num, den = _parts(t, x, model)
    return _scalar(num * num / den)


def G_gradient(t, x, model):
    """``dG/dx`` with the convention ``sign(0) = +1``."""
    _check_time(t, model)
    num, den = _parts(t, x, model)
    return _scalar(-2.0 * np.exp(t) * num / den * _sign(np.asarray(x)))


def G_time_derivative(t, x, model):
    """Closed-form ``dG/dt``."""
    _check_time(t, model)
    num, den = _parts(t, x, model)
    et = np.exp(t)
    return _scalar(-2.0 * np.abs(x) * et * num / den
                   + 2.0 * model.q * et * et * num * num / (den * den))


def hjb_residual(t, x, model):
    """``G_t - x G_x - (q/2) G_x**2``; zero away from ``x = 0``."""
    gx = np.asarray(G_gradient(t, x, model))
    return _scalar(np.asarray(G_time_derivative(t, x, model)) - np.asarray(x) * gx
                   - 0.5 * model.q * gx * gx)


def control(t, x, y, real, stats, model, policy):
    """Feedback control ``(u1, u2)`` at slow state ``x`` and fast state ``y``.

    Standard Monte Carlo applies no control. Importance sampling uses

        u1 = -(sqrt(lam) + theta sqrt(2D) chi'(y)) G_x(t, x)
        u2 = -sqrt(2D) sqrt(1 - theta**2) chi'(y) G_x(t, x)

    where ``chi'`` is the explicit corrector gradient.
    """
    policy = ControlPolicy(policy)
    if policy is ControlPolicy.StandardMC:
        return 0.0, 0.0
    gx = G_gradient(t, x, model)
    psi = chi_prime_explicit(real, stats, y)
    s2d = math.sqrt(2 * model.D)
    u1 = -(math.sqrt(model.lambda_) + model.theta * s2d * psi) * gx
    u2 = -s2d * math.sqrt(1.0 - model.theta ** 2) * psi * gx
    return _scalar(u1), _scalar(u2)
