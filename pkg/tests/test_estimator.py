import math

import numpy as np
import pytest

from multiscale_is.errors import InvalidParameterError, PathDivergedError
from multiscale_is.estimator import (
    BLOCK_SIZE,
    compare_modes,
    resolve_workers,
    run_experiment,
    run_with_engine,
    summarize,
)
from multiscale_is.random_field import FieldSpec, sample_field
from multiscale_is.sde_engine import FieldTable, ModelParams, PathEngine

PARAMS = ModelParams(0.25, 0.1, zeta=0.1)


def test_summarize_constant_values():
    out = summarize([0.3] * 10)
    assert out.estimate == pytest.approx(0.3, rel=1e-15)
    assert out.sample_std == pytest.approx(0.0, abs=1e-15)
    assert out.rel_err_per_sample == pytest.approx(0.0, abs=1e-13)


def test_summarize_matches_numpy():
    v = np.random.default_rng(1).exponential(size=1001)
    out = summarize(v)
    assert out.estimate == pytest.approx(v.mean(), rel=1e-13)
    assert out.sample_std == pytest.approx(v.std(ddof=1), rel=1e-12)
    assert out.ci95_half_width == pytest.approx(1.96 * v.std(ddof=1) / math.sqrt(v.size),
                                                rel=1e-12)
    assert out.min_contribution == v.min() and out.max_contribution == v.max()


def test_summarize_zero_mean_gives_infinite_relative_error():
    assert summarize([0.0, 0.0, 0.0]).rel_err_per_sample == math.inf


def test_summarize_needs_two_values():
    with pytest.raises(InvalidParameterError):
        summarize([1.0])


@pytest.fixture(scope="module")
def engine(field, stats1):
    return PathEngine(PARAMS, field, stats1)


def test_estimate_within_contribution_range(engine):
    out = run_with_engine(engine, "is", 300, seed=2)
    assert out.min_contribution <= out.estimate <= out.max_contribution
    assert out.n_samples == 300 and out.n_steps == engine.n_steps
    assert out.mode == "is"


def test_worker_count_does_not_change_result(engine):
    n = 2 * BLOCK_SIZE + 17
    one = run_with_engine(engine, "is", n, seed=3, workers=1)
    many = run_with_engine(engine, "is", n, seed=3, workers=3)
    assert (one.estimate, one.sample_std) == (many.estimate, many.sample_std)


def test_run_keys_give_independent_noise(engine):
    a = run_with_engine(engine, "std", 50, seed=3, run_key=(0,))
    b = run_with_engine(engine, "std", 50, seed=3, run_key=(1,))
    assert a.estimate != b.estimate


def test_compare_modes_shares_environment():
    spec = FieldSpec(50, seed=4)
    std, imp = compare_modes(PARAMS, spec, 100, seed=1)
    assert std.mode == "std" and imp.mode == "is"
    assert std.env_seed == imp.env_seed == 4
    single = run_experiment(PARAMS, spec, "is", 100, seed=1)
    assert single.estimate == imp.estimate


def test_divergence_reports_path_index(field, stats1):
    tab = FieldTable.build(field, half_width=2.0)
    bad = FieldTable(tab.lo, tab.spacing, np.full_like(tab.values, np.inf))
    eng = PathEngine(PARAMS, field, stats1, table=bad)
    with pytest.raises(PathDivergedError) as info:
        run_with_engine(eng, "std", 10, seed=0)
    assert info.value.path_index == 0


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("MSIS_WORKERS", "5")
    assert resolve_workers() == 5
    assert resolve_workers(2) == 2
    with pytest.raises(InvalidParameterError):
        resolve_workers(0)


def test_sample_count_validated(engine):
    with pytest.raises(InvalidParameterError):
        run_with_engine(engine, "std", 1, seed=0)


def test_same_environment_for_same_spec():
    assert sample_field(FieldSpec(30, 8)) == sample_field(FieldSpec(30, 8))
