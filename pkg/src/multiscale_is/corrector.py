"""Corrector (cell problem) for the one-dimensional gradient environment.

With fast generator ``L = f d/dy + D d2/dy2`` and ``f = b = -Q'``, the
problem ``rho chi - L chi = b`` can be solved in closed form at ``rho = 0``:

    chi'(y) = exp(Q(y)/D) / K - 1,    chi(y) = int_0^y exp(Q/D) dz / K - y.

For ``rho > 0`` a finite-difference solver on a truncated interval is
provided; it is only used to check that regularised gradients approach the
closed form, since downstream code consumes the gradient alone.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.linalg import solve_banded

from .errors import InvalidParameterError, SolverError
from .random_field import eval_dQ, eval_Q


@dataclass(frozen=True, eq=False)
class CorrectorGrid:
    rho: float
    grid_lo: float
    grid_hi: float
    n_cells: int
    chi_values: np.ndarray
    dchi_values: np.ndarray

    @property
    def nodes(self):
        return np.linspace(self.grid_lo, self.grid_hi, self.n_cells + 1)


def chi_prime_explicit(real, stats, y):
    """Gradient of the explicit corrector, ``exp(Q(y)/D)/K - 1``."""
    return np.exp(np.asarray(eval_Q(real, y)) / stats.D) / stats.K - 1.0


def chi_explicit(real, stats, y, epsabs=1e-8):
    """Explicit corrector ``chi(y)`` normalised by ``chi(0) = 0``.

    ``y`` may be an array: the points are sorted and the integral is
    accumulated segment by segment from the origin, so closely spaced points
    share all but one short quadrature.
    """
    ys = np.atleast_1d(np.asarray(y, dtype=np.float64))
    D, K = stats.D, stats.K

    def integrand(z):
        return np.exp(eval_Q(real, z) / D)

    out = np.empty_like(ys)
    for sign in (1.0, -1.0):
        mask = ys * sign > 0
        idx = np.flatnonzero(mask)
        order = idx[np.argsort(np.abs(ys[idx]))]
        acc, prev = 0.0, 0.0
        for i in order:
            acc += integrate.quad(integrand, prev, ys[i], epsabs=epsabs, epsrel=0.0,
                                  limit=200)[0]
            prev = ys[i]
            out[i] = acc / K - ys[i]
    out[ys == 0] = 0.0
    return float(out[0]) if np.ndim(y) == 0 else out.reshape(np.shape(y))


def solve_resolvent_1d(real, stats, rho, grid_lo=-20.0, grid_hi=20.0, n_cells=4000,
                       bc="flux"):
    """Solve ``rho chi - (f chi' + D chi'') = b`` with ``f = b = -Q'``.

    Second-order central differences on a uniform grid. Boundary handling:

    ``"flux"`` (default)
        Transparent truncation: ``chi'`` at both ends is set to the
        ``rho = 0`` closed-form gradient, so the truncated problem has the
        same zero-``rho`` limit as the one on the whole line.
    ``"neumann"``
        ``chi' = 0`` at both ends. Its ``rho -> 0`` limit on a fixed interval
        differs from the closed form by an O(1) boundary-driven term.
    ``"dirichlet"``
        ``chi = 0`` at both ends.
    """
    if not rho > 0:
        raise InvalidParameterError(f"rho must be positive, got {rho}")
    if not grid_lo < grid_hi:
        raise InvalidParameterError("grid_lo must be below grid_hi")
    if n_cells < 100:
        raise InvalidParameterError(f"n_cells must be >= 100, got {n_cells}")
    if grid_lo > -20.0 or grid_hi < 20.0:
        raise InvalidParameterError("grid must cover at least [-20, 20]")
    if bc not in ("flux", "neumann", "dirichlet"):
        raise InvalidParameterError(f"unknown boundary condition {bc!r}")

    y = np.linspace(grid_lo, grid_hi, n_cells + 1)
    h = (grid_hi - grid_lo) / n_cells
    D = stats.D
    f = -np.asarray(eval_dQ(real, y))
    rhs = f.copy()

    lower = -(D / h**2 - f / (2 * h))   # coefficient of chi[i-1] in row i
    upper = -(D / h**2 + f / (2 * h))   # coefficient of chi[i+1] in row i
    ab = np.zeros((3, y.size))
    ab[0, 1:] = upper[:-1]
    ab[1] = rho + 2 * D / h**2
    ab[2, :-1] = lower[1:]

    if bc == "dirichlet":
        ab[1, 0] = ab[1, -1] = 1.0
        ab[0, 1] = ab[2, -2] = 0.0
        rhs[0] = rhs[-1] = 0.0
        g = None
    else:
        # Ghost nodes: chi[-1] = chi[1] - 2h g_lo, chi[n+1] = chi[n-1] + 2h g_hi.
        g = (np.zeros(2) if bc == "neumann"
             else np.asarray(chi_prime_explicit(real, stats, y[[0, -1]])))
        ab[0, 1] += lower[0]
        ab[2, -2] += upper[-1]
        rhs[0] += 2 * h * g[0] * lower[0]
        rhs[-1] -= 2 * h * g[1] * upper[-1]

    try:
        chi = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError(str(exc)) from exc
    if not np.all(np.isfinite(chi)):
        raise SolverError("non-finite corrector values")

    dchi = np.empty_like(chi)
    dchi[1:-1] = (chi[2:] - chi[:-2]) / (2 * h)
    if g is None:
        dchi[0] = (chi[1] - chi[0]) / h
        dchi[-1] = (chi[-1] - chi[-2]) / h
    else:
        dchi[0], dchi[-1] = g
    return CorrectorGrid(float(rho), float(grid_lo), float(grid_hi), int(n_cells), chi, dchi)
