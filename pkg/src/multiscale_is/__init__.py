"""Rare-event importance sampling for multiscale diffusions in Gaussian random environments."""

from .corrector import CorrectorGrid, chi_explicit, chi_prime_explicit, solve_resolvent_1d
from .environment import EnvironmentStats, analytic_moments, invariant_density_weight
from .errors import (
    ConfigError,
    InvalidParameterError,
    PathDivergedError,
    SolverError,
    TooExpensiveError,
)
from .estimator import EstimatorOutput, compare_modes, run_experiment
from .hjb_control import (
    ControlPolicy,
    EffectiveModel,
    G_gradient,
    G_value,
    control,
    effective_q,
    terminal_cost,
)
from .random_field import FieldRealization, FieldSpec, eval_dQ, eval_Q, sample_field
from .sde_engine import ModelParams, PathEngine, PathSample, simulate_path, steps_for

__version__ = "0.1.0"
