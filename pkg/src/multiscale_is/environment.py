"""Environment statistics for the gradient-type fast process.

For the fast dynamics ``dY = -Q'(Y) ds + sqrt(2 D) dW`` the environment seen
from the particle has invariant density proportional to ``exp(-Q/D)`` with
respect to the field law. The normalising constants

    Z = E[exp(-Q/D)],   K = E[exp(Q/D)]

enter the corrector and the effective diffusivity. Because every field
marginal is exactly standard normal, both equal ``exp(1 / (2 D**2))``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidParameterError
from .random_field import DEFAULT_N_MODES, ensemble_values, eval_Q


@dataclass(frozen=True)
class EnvironmentStats:
    D: float
    K: float
    Z: float

    def __post_init__(self):
        if not (self.D > 0 and self.K > 0 and self.Z > 0):
            raise InvalidParameterError("D, K and Z must be positive")

    @property
    def KZ(self):
        return self.K * self.Z


def analytic_moments(D):
    """Exact ``K`` and ``Z`` for a unit-variance Gaussian marginal."""
    if not D > 0:
        raise InvalidParameterError(f"D must be positive, got {D}")
    m = math.exp(0.5 / (D * D))
    return EnvironmentStats(D=float(D), K=m, Z=m)


def invariant_density_weight(real, D, y):
    """Unnormalised invariant-density weight ``exp(-Q(y)/D)`` along the orbit."""
    if not D > 0:
        raise InvalidParameterError(f"D must be positive, got {D}")
    return np.exp(-np.asarray(eval_Q(real, y)) / D)


def monte_carlo_moments(D, n_realizations=10**6, n_modes=DEFAULT_N_MODES, seed=0):
    """Ensemble estimates of ``K`` and ``Z`` with their standard errors.

    Independent oracle for :func:`analytic_moments`: averages
    ``exp(+-Q(0)/D)`` over independent field realizations.

    Returns
    -------
    dict with keys ``K``, ``K_se``, ``Z``, ``Z_se``.
    """
    if not D > 0:
        raise InvalidParameterError(f"D must be positive, got {D}")
    q0 = ensemble_values(n_realizations, [0.0], n_modes=n_modes, seed=seed)[:, 0]
    n = q0.size
    ep, em = np.exp(q0 / D), np.exp(-q0 / D)
    return {
        "K": ep.mean(), "K_se": ep.std(ddof=1) / math.sqrt(n),
        "Z": em.mean(), "Z_se": em.std(ddof=1) / math.sqrt(n),
    }


def spatial_average_weight(real, D, half_width=50.0, n_points=20001):
    """Average of ``exp(-Q(y)/D)`` over ``[-half_width, half_width]`` (trapezoid rule)."""
    y = np.linspace(-half_width, half_width, n_points)
    w = invariant_density_weight(real, D, y)
    return np.trapezoid(w, y) / (2.0 * half_width)
