"""Experiment configuration and the parallel Monte Carlo driver."""
import logging
from dataclasses import asdict, dataclass, fields
from functools import lru_cache
from typing import Optional

import numpy as np
from joblib import Parallel, delayed, effective_n_jobs

from dnull.common.exceptions import ConfigurationError, DimensionMismatchError
from dnull.db.tables import RiskReport
from dnull.estimators.naive import SIGN_RULES
from dnull.measurements.bases import DisplacementSchedule
from dnull.quantum.models import get_model
from dnull.workchains.experiment import TwoStageConfig, TwoStageWorkChain
from dnull.workchains.strategies import get_strategy
from dnull.workchains.utils import scaling_fit, summarize
from dnull.workflows import settings

logger = logging.getLogger(__name__)


def _plain(value):
    """Nested tuples -> nested lists for serialization"""
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    return value


def _tuple(value, depth=1):
    """Nested lists -> nested tuples so configs stay hashable"""
    if value is None or isinstance(value, str):
        return value
    if depth == 0 or np.ndim(value) == 0:
        return float(value)
    return tuple(_tuple(v, depth - 1) for v in value)


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    strategy: str
    n_grid: tuple = ()
    trials: int = 1
    true_parameter: object = "prior"
    seed: int = 0
    epsilon: float = settings.EPSILON
    g: Optional[tuple] = None
    weight: Optional[tuple] = None
    sign_rule: str = "plus"
    workers: int = 1
    holevo_restarts: int = settings.HOLEVO_RESTARTS
    split_budget: bool = False
    out: Optional[str] = None
    format: str = settings.OUTPUT_FORMAT

    @classmethod
    def from_dict(cls, values):
        """Validate a raw config mapping"""
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key in ("model", "strategy"):
            if key not in values:
                raise ConfigurationError(f"config needs '{key}'")
        try:
            config = cls(
                model=str(values["model"]),
                strategy=str(values["strategy"]),
                n_grid=tuple(int(n) for n in np.atleast_1d(values.get("n_grid", ()))),
                trials=int(values.get("trials", 1)),
                true_parameter=_tuple(values.get("true_parameter", "prior"), 1),
                seed=int(values.get("seed", 0)),
                epsilon=float(values.get("epsilon", settings.EPSILON)),
                g=_tuple(values.get("g"), 1),
                weight=_tuple(values.get("weight"), 2),
                sign_rule=str(values.get("sign_rule", "plus")),
                workers=int(values.get("workers", 1)),
                holevo_restarts=int(values.get("holevo_restarts", settings.HOLEVO_RESTARTS)),
                split_budget=bool(values.get("split_budget", False)),
                out=values.get("out"),
                format=str(values.get("format", settings.OUTPUT_FORMAT)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid config value: {exc}") from exc
        config.validate()
        return config

    def validate(self):
        if self.trials < 1:
            raise ConfigurationError(f"trials must be at least 1, got {self.trials}")
        if any(n < 1 for n in self.n_grid):
            raise ConfigurationError("sample sizes must be positive")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigurationError(f"n_grid must be strictly increasing, got {list(self.n_grid)}")
        if not 0.0 < self.epsilon < 0.1:
            raise ConfigurationError(f"epsilon must lie in (0, 1/10), got {self.epsilon}")
        if self.sign_rule not in SIGN_RULES:
            raise ConfigurationError(f"unknown sign rule '{self.sign_rule}'")
        if self.workers == 0 or self.holevo_restarts < 1 or self.seed < 0:
            raise ConfigurationError("workers must be nonzero, holevo_restarts positive, seed non-negative")
        if self.format not in ("csv", "json"):
            raise ConfigurationError(f"unknown output format '{self.format}'")
        model = get_model(self.model)
        if self.true_parameter != "prior":
            if isinstance(self.true_parameter, str):
                raise ConfigurationError("true_parameter must be numbers or 'prior'")
            try:
                model.as_parameter(self.true_parameter)
            except DimensionMismatchError as exc:
                raise ConfigurationError(str(exc)) from exc
        get_strategy(self.strategy, model, self)

    def as_dict(self):
        return {key: _plain(value) for key, value in asdict(self).items()}

    def two_stage(self, n):
        return TwoStageConfig(schedule=DisplacementSchedule(self.epsilon, n), strategy=self.strategy,
                              g=self.g, weight=self.weight, seed=self.seed,
                              sign_rule=self.sign_rule, holevo_restarts=self.holevo_restarts,
                              split_budget=self.split_budget)


@lru_cache(maxsize=8)
def _strategy_for(config):
    return get_strategy(config.strategy, get_model(config.model), config)


def run_trials(config, n, indices):
    """Run the listed trials at sample size n in this process"""
    strategy = _strategy_for(config)
    two_stage = config.two_stage(n)
    return [TwoStageWorkChain(strategy, two_stage, index, config.true_parameter).run()
            for index in indices]


def run_sample_size(config, n):
    splits = np.array_split(np.arange(config.trials), effective_n_jobs(config.workers))
    chunks = [chunk.tolist() for chunk in splits if chunk.size]
    with Parallel(n_jobs=config.workers) as parallel:
        batches = parallel(delayed(run_trials)(config, n, chunk) for chunk in chunks)
    results = [result for batch in batches for result in batch]
    strategy = _strategy_for(config)
    return summarize(n, results, strategy.loss_name)


def run_experiment(config):
    """Monte Carlo risk over the n grid; deterministic given the config seed"""
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_dict(config)
    else:
        config.validate()
    logger.info("running %s on %s for n in %s", config.strategy, config.model, list(config.n_grid))
    rows = []
    for n in config.n_grid:
        row = run_sample_size(config, n)
        logger.info("n=%d risk %.6e n*risk %.6f", n, row.risk, row.n_risk)
        rows.append(row)
    scaling = scaling_fit(rows) if len(rows) >= 3 else None
    return RiskReport(config=config.as_dict(), rows=rows, scaling=scaling)
