"""Command line front end: compare both estimators row by row from a config file.

Configuration is flat ``key = value`` text with ``#`` comments::

    rows = 0.125:0.04, 0.0625:0.018
    n_samples = 10000
    seed = 1

Usage::

    msis run --config table.cfg [--mode std|is|both] [--samples N] [--seed S]
             [--workers W] [--output out.csv]
"""

import argparse
import csv
from dataclasses import dataclass, field, fields
import io
import logging
import math
import os
import sys

from .errors import ConfigError, InvalidParameterError, PathDivergedError, TooExpensiveError
from .estimator import WORKERS_ENV, run_with_engine
from .environment import analytic_moments
from .hjb_control import ControlPolicy
from .random_field import DEFAULT_N_MODES, FieldSpec, sample_field
from .sde_engine import DEFAULT_MAX_STEPS, ModelParams, PathEngine

log = logging.getLogger("multiscale_is")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

CSV_COLUMNS = [
    "row_index", "epsilon", "delta", "eps_over_delta", "est_std", "est_is",
    "relerr_std", "relerr_is", "ci95_std", "ci95_is", "n_samples", "n_steps",
    "env_seed", "env_index", "wall_time_s",
]

ENV_POLICIES = ("shared", "per_row_fresh")


@dataclass
class ExperimentConfig:
    rows: list = field(default_factory=list)
    T: float = 1.0
    t0: float = 0.0
    lambda_: float = 1.0
    D: float = 1.0
    theta: float = 0.5
    x0: float = 0.05
    y0: float = 0.0
    zeta: float = 1e-3
    n_samples: int = 10000
    n_modes: int = DEFAULT_N_MODES
    seed: int = 0
    env_seed_policy: str = "shared"
    workers: int = 1
    output_path: str = "results.csv"
    max_steps: int = DEFAULT_MAX_STEPS

    def params_for(self, epsilon, delta):
        return ModelParams(epsilon=epsilon, delta=delta, T=self.T, t0=self.t0,
                           lambda_=self.lambda_, D=self.D, theta=self.theta, x0=self.x0,
                           y0=self.y0, zeta=self.zeta)

    def validate(self):
        if not self.rows:
            raise ConfigError("no rows")
        for eps, delta in self.rows:
            try:
                self.params_for(eps, delta)
            except InvalidParameterError as exc:
                raise ConfigError(f"rows: ({eps}, {delta}): {exc}") from None
        if self.n_samples < 2:
            raise ConfigError("n_samples must be >= 2")
        if self.n_modes < 1:
            raise ConfigError("n_modes must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.env_seed_policy not in ENV_POLICIES:
            raise ConfigError(f"env_seed_policy must be one of {ENV_POLICIES}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        return self


# Config key -> attribute name.
_ALIASES = {"lambda": "lambda_"}
_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_rows(value):
    rows = []
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        eps, sep, delta = item.partition(":")
        if not sep:
            raise ValueError(f"row {item!r} is not of the form epsilon:delta")
        rows.append((float(eps), float(delta)))
    return rows


def parse_config(text):
    """Parse configuration text into a validated :class:`ExperimentConfig`."""
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = key.strip(), value.strip()
        name = _ALIASES.get(key, key)
        if name not in _TYPES:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            if name == "rows":
                parsed = _parse_rows(value)
            elif _TYPES[name] in (int, "int"):
                parsed = int(value)
            elif _TYPES[name] in (float, "float"):
                parsed = float(value)
            else:
                parsed = value
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno) from None
        setattr(cfg, name, parsed)
    return cfg.validate()


def render_config(cfg):
    """Inverse of :func:`parse_config`."""
    lines = []
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        key = "lambda" if f.name == "lambda_" else f.name
        if f.name == "rows":
            value = ", ".join(f"{e!r}:{d!r}" for e, d in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _num(v):
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return format(v, ".17g")


def run_table(cfg, modes=("std", "is"), stdout=None):
    """Run every configured row; write the CSV and print a summary table.

    Returns the list of CSV records (dicts).
    """
    stdout = stdout or sys.stdout
    records = []
    for r, (eps, delta) in enumerate(cfg.rows):
        params = cfg.params_for(eps, delta)
        index = r if cfg.env_seed_policy == "per_row_fresh" else 0
        spec = FieldSpec(n_modes=cfg.n_modes, seed=cfg.seed, index=index)
        engine = PathEngine(params, sample_field(spec), analytic_moments(params.D),
                            max_steps=cfg.max_steps)
        res = {}
        for mode in modes:
            res[mode] = run_with_engine(engine, ControlPolicy(mode), cfg.n_samples, cfg.seed,
                                        cfg.workers, run_key=(r,))
        rec = {
            "row_index": r, "epsilon": eps, "delta": delta, "eps_over_delta": eps / delta,
            "n_samples": cfg.n_samples, "n_steps": engine.n_steps,
            "env_seed": cfg.seed, "env_index": index,
            "wall_time_s": sum(o.wall_time_s for o in res.values()),
        }
        for mode in ("std", "is"):
            o = res.get(mode)
            rec[f"est_{mode}"] = o.estimate if o else None
            rec[f"relerr_{mode}"] = o.rel_err_per_sample if o else None
            rec[f"ci95_{mode}"] = o.ci95_half_width if o else None
        records.append(rec)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([_num(rec[c]) for c in CSV_COLUMNS])
    with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())

    print(format_table(records), file=stdout)
    return records


def format_table(records):
    head = f"{'No.':>3} {'eps':>8} {'delta':>8} {'eps/dl':>7} {'theta0':>11} {'theta1':>11} " \
           f"{'rho0':>8} {'rho1':>8}"
    out = [head, "-" * len(head)]

    def g(v, spec):
        return "-" if v is None or (isinstance(v, float) and math.isnan(v)) else format(v, spec)

    for rec in records:
        out.append(
            f"{rec['row_index'] + 1:>3} {rec['epsilon']:>8g} {rec['delta']:>8g} "
            f"{rec['eps_over_delta']:>7.3f} {g(rec['est_std'], '11.3e')} "
            f"{g(rec['est_is'], '11.3e')} {g(rec['relerr_std'], '8.2f')} "
            f"{g(rec['relerr_is'], '8.2f')}")
    return "\n".join(out)


def build_parser():
    parser = argparse.ArgumentParser(prog="msis", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the configured comparison table")
    run.add_argument("--config", required=True, help="path to the key = value config file")
    run.add_argument("--mode", choices=("std", "is", "both"), default="both")
    run.add_argument("--samples", type=int, help="override n_samples")
    run.add_argument("--seed", type=int, help="override seed")
    run.add_argument("--workers", type=int, help=f"override workers (also ${WORKERS_ENV})")
    run.add_argument("--output", help="override output_path")
    run.add_argument("--max-steps", type=int, help="per-path Euler step cap")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        if os.environ.get(WORKERS_ENV):
            cfg.workers = int(os.environ[WORKERS_ENV])
        for opt, name in (("samples", "n_samples"), ("seed", "seed"), ("workers", "workers"),
                          ("output", "output_path"), ("max_steps", "max_steps")):
            value = getattr(args, opt)
            if value is not None:
                setattr(cfg, name, value)
        cfg.validate()
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    modes = ("std", "is") if args.mode == "both" else (args.mode,)
    try:
        run_table(cfg, modes)
    except (PathDivergedError, TooExpensiveError, InvalidParameterError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
