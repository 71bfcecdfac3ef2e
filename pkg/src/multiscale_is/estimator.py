"""Quenched Monte Carlo estimation of ``E[exp(-h(X_T)/eps)]``.

One environment realization is drawn per experiment and shared by all paths.
Paths get independent random streams keyed by ``(seed, mode, path index)``,
are grouped into fixed-size blocks, summarised per block with Welford's
recursion and merged pairwise in block order. The result is therefore a
deterministic function of the inputs whatever the number of workers.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math
import os
import time

from . import streams
from .environment import analytic_moments
from .errors import InvalidParameterError, PathDivergedError
from .hjb_control import ControlPolicy
from .random_field import sample_field
from .sde_engine import DEFAULT_MAX_STEPS, PathEngine

log = logging.getLogger(__name__)

BLOCK_SIZE = 256
WORKERS_ENV = "MSIS_WORKERS"

_MODE_TAG = {ControlPolicy.StandardMC: 0, ControlPolicy.ImportanceSampling: 1}


@dataclass
class _Moments:
    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    lo: float = math.inf
    hi: float = -math.inf

    def push(self, v):
        self.n += 1
        d = v - self.mean
        self.mean += d / self.n
        self.m2 += d * (v - self.mean)
        self.lo = min(self.lo, v)
        self.hi = max(self.hi, v)

    @staticmethod
    def merge(a, b):
        if a.n == 0:
            return b
        if b.n == 0:
            return a
        n = a.n + b.n
        d = b.mean - a.mean
        return _Moments(n, a.mean + d * b.n / n, a.m2 + b.m2 + d * d * a.n * b.n / n,
                        min(a.lo, b.lo), max(a.hi, b.hi))


def _pairwise(parts):
    while len(parts) > 1:
        nxt = [_Moments.merge(parts[i], parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


@dataclass
class EstimatorOutput:
    estimate: float
    sample_std: float
    rel_err_per_sample: float
    n_samples: int
    ci95_half_width: float
    mode: str
    wall_time_s: float
    diverged_paths: int = 0
    min_contribution: float = 0.0
    max_contribution: float = 0.0
    n_steps: int = 0
    env_seed: int = 0
    env_index: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def standard_error(self):
        return self.sample_std / math.sqrt(self.n_samples)


def summarize(values, mode="std"):
    """Statistics of a plain sequence of contributions (no simulation)."""
    acc = _Moments()
    for v in values:
        acc.push(float(v))
    return _finish(acc, mode, 0.0)


def _finish(acc, mode, wall):
    if acc.n < 2:
        raise InvalidParameterError("need at least two samples")
    std = math.sqrt(max(acc.m2, 0.0) / (acc.n - 1))
    rel = std / acc.mean if acc.mean > 0 else math.inf
    return EstimatorOutput(
        estimate=acc.mean, sample_std=std, rel_err_per_sample=rel, n_samples=acc.n,
        ci95_half_width=1.96 * std / math.sqrt(acc.n), mode=mode, wall_time_s=wall,
        min_contribution=acc.lo, max_contribution=acc.hi)


def resolve_workers(workers=None):
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers < 1:
        raise InvalidParameterError("workers must be >= 1")
    return workers


def _run_block(engine, policy, seed, run_key, start, stop):
    acc = _Moments()
    tag = _MODE_TAG[policy]
    for i in range(start, stop):
        rng = streams.make_rng(seed, streams.PATH, *run_key, tag, i)
        try:
            acc.push(engine.simulate_path(policy, rng).contribution)
        except PathDivergedError as exc:
            raise PathDivergedError(exc.step, path_index=i) from None
    return acc


def run_with_engine(engine, policy, n_samples, seed, workers=None, run_key=()):
    """Estimate with a prebuilt :class:`PathEngine` (shared environment).

    ``run_key`` is appended to the path stream keys so that several runs
    sharing a seed (e.g. rows of a table) draw independent noise.
    """
    policy = ControlPolicy(policy)
    if n_samples < 2:
        raise InvalidParameterError("n_samples must be >= 2")
    workers = resolve_workers(workers)
    bounds = [(s, min(s + BLOCK_SIZE, n_samples)) for s in range(0, n_samples, BLOCK_SIZE)]
    began = time.perf_counter()
    if workers == 1:
        parts = [_run_block(engine, policy, seed, run_key, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_block, engine, policy, seed, run_key, a, b)
                       for a, b in bounds]
            parts = [f.result() for f in futures]
    out = _finish(_pairwise(parts), policy.value, time.perf_counter() - began)
    out.n_steps = engine.n_steps
    log.info("%s: estimate %.6g rel.err %.4g (%d paths, %.1fs)", policy.value, out.estimate,
             out.rel_err_per_sample, n_samples, out.wall_time_s)
    return out


def run_experiment(params, spec, policy, n_samples, seed, workers=None,
                   max_steps=DEFAULT_MAX_STEPS):
    """Sample one environment from ``spec`` and estimate with ``n_samples`` paths."""
    real = sample_field(spec)
    engine = PathEngine(params, real, analytic_moments(params.D), max_steps=max_steps)
    out = run_with_engine(engine, policy, n_samples, seed, workers)
    out.env_seed, out.env_index = spec.seed, spec.index
    return out


def compare_modes(params, spec, n_samples, seed, workers=None, max_steps=DEFAULT_MAX_STEPS,
                  run_key=()):
    """Standard and importance-sampling estimates on the same environment.

    Returns
    -------
    (EstimatorOutput, EstimatorOutput)
        Standard Monte Carlo first, importance sampling second.
    """
    real = sample_field(spec)
    engine = PathEngine(params, real, analytic_moments(params.D), max_steps=max_steps)
    pair = []
    for mode in (ControlPolicy.StandardMC, ControlPolicy.ImportanceSampling):
        out = run_with_engine(engine, mode, n_samples, seed, workers, run_key)
        out.env_seed, out.env_index = spec.seed, spec.index
        pair.append(out)
    return tuple(pair)
