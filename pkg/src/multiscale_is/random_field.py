"""Stationary Gaussian random fields on the line by spectral randomization.

The field has mean zero, unit variance and covariance ``C(y) = exp(-y**2)``.
A realization is a finite sum of randomly weighted sinusoids

    Q(y) = n**-0.5 * sum_j [xi_j cos(k_j y) + eta_j sin(k_j y)]

with wavenumbers ``k_j`` drawn i.i.d. from the normalised spectral density of
``C`` (a centred normal with variance 2) and standard normal amplitudes.
Conditional on the wavenumbers the field is Gaussian with variance exactly 1
at every point, and ``E[cos(k y)] = exp(-y**2)`` gives the covariance.
"""

from dataclasses import dataclass

import numpy as np

from . import streams
from .errors import InvalidParameterError

SPECTRAL_STD = np.sqrt(2.0)
DEFAULT_N_MODES = 200

# Number of evaluation points per vectorised block; bounds temporaries to
# roughly _BLOCK * n_modes doubles.
_BLOCK = 4096


@dataclass(frozen=True)
class FieldSpec:
    """Recipe for one field realization.

    ``index`` selects the realization within the family generated by
    ``seed``; distinct indices give independent environments.
    """

    n_modes: int = DEFAULT_N_MODES
    seed: int = 0
    index: int = 0

    def __post_init__(self):
        if int(self.n_modes) < 1:
            raise InvalidParameterError(f"n_modes must be >= 1, got {self.n_modes}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class FieldRealization:
    """A frozen environment: spectral modes of one field sample."""

    wavenumbers: np.ndarray
    cos_amps: np.ndarray
    sin_amps: np.ndarray

    def __post_init__(self):
        arrays = []
        for name in ("wavenumbers", "cos_amps", "sin_amps"):
            a = np.array(getattr(self, name), dtype=np.float64).ravel()
            a.flags.writeable = False
            object.__setattr__(self, name, a)
            arrays.append(a)
        if not len(arrays[0]) == len(arrays[1]) == len(arrays[2]) >= 1:
            raise InvalidParameterError("mode arrays must share a nonzero length")

    @property
    def n_modes(self):
        return len(self.wavenumbers)

    def __eq__(self, other):
        if not isinstance(other, FieldRealization):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, n), getattr(other, n))
            for n in ("wavenumbers", "cos_amps", "sin_amps")
        )

    __hash__ = None


def sample_field(spec):
    """Draw the realization identified by ``spec`` (pure in the spec)."""
    rng = streams.make_rng(spec.seed, streams.FIELD, spec.index)
    n = int(spec.n_modes)
    k = rng.normal(0.0, SPECTRAL_STD, n)
    xi = rng.standard_normal(n)
    eta = rng.standard_normal(n)
    return FieldRealization(k, xi, eta)


def constant_field(value=0.0):
    """Degenerate realization with ``Q == value`` everywhere.

    Useful for checks where the environment must drop out.
    """
    return FieldRealization([0.0], [value], [0.0])


def _evaluate(real, y, order):
    y = np.asarray(y, dtype=np.float64)
    flat = y.ravel()
    k, a, b = real.wavenumbers, real.cos_amps, real.sin_amps
    scale = 1.0 / np.sqrt(real.n_modes)
    out = np.empty_like(flat)
    for start in range(0, flat.size, _BLOCK):
        phase = np.multiply.outer(flat[start:start + _BLOCK], k)
        c, s = np.cos(phase), np.sin(phase)
        if order == 0:
            terms = c @ a + s @ b
        elif order == 1:
            terms = s @ (-k * a) + c @ (k * b)
        else:
            terms = -(c @ (k * k * a) + s @ (k * k * b))
        out[start:start + _BLOCK] = scale * terms
    out = out.reshape(y.shape)
    return float(out) if out.ndim == 0 else out


def eval_Q(real, y):
    """Field value ``Q(y)``; ``y`` may be a scalar or an array."""
    return _evaluate(real, y, 0)


def eval_dQ(real, y):
    """Exact derivative ``dQ/dy`` of :func:`eval_Q`."""
    return _evaluate(real, y, 1)


def eval_d2Q(real, y):
    """Exact second derivative of :func:`eval_Q`."""
    return _evaluate(real, y, 2)


def eval_all(real, y):
    """``(Q, dQ, d2Q)`` at array ``y``, sharing one set of trigonometric evaluations."""
    flat = np.asarray(y, dtype=np.float64).ravel()
    k, a, b = real.wavenumbers, real.cos_amps, real.sin_amps
    scale = 1.0 / np.sqrt(real.n_modes)
    out = np.empty((3, flat.size))
    for start in range(0, flat.size, _BLOCK):
        phase = np.multiply.outer(flat[start:start + _BLOCK], k)
        c, s = np.cos(phase), np.sin(phase)
        sl = slice(start, start + _BLOCK)
        out[0, sl] = c @ a + s @ b
        out[1, sl] = s @ (-k * a) + c @ (k * b)
        out[2, sl] = -(c @ (k * k * a) + s @ (k * k * b))
    return scale * out


def ensemble_values(n_realizations, y, n_modes=DEFAULT_N_MODES, seed=0, derivative=False,
                    chunk=2000):
    """Evaluate ``Q`` (or ``dQ``) at points ``y`` over many independent realizations.

    This is a vectorised ensemble sampler used for statistical checks; its
    realizations are independent of those produced by :func:`sample_field`.

    Returns
    -------
    ndarray of shape ``(n_realizations, len(y))``
    """
    ys = np.atleast_1d(np.asarray(y, dtype=np.float64))
    rng = streams.make_rng(seed, streams.ENSEMBLE, n_modes)
    out = np.empty((n_realizations, ys.size))
    scale = 1.0 / np.sqrt(n_modes)
    for start in range(0, n_realizations, chunk):
        m = min(chunk, n_realizations - start)
        k = rng.normal(0.0, SPECTRAL_STD, (m, n_modes))
        xi = rng.standard_normal((m, n_modes))
        eta = rng.standard_normal((m, n_modes))
        for j, yj in enumerate(ys):
            c, s = np.cos(k * yj), np.sin(k * yj)
            if derivative:
                vals = np.einsum("ij,ij->i", k, eta * c - xi * s)
            else:
                vals = np.einsum("ij,ij->i", xi, c) + np.einsum("ij,ij->i", eta, s)
            out[start:start + m, j] = scale * vals
    return out
