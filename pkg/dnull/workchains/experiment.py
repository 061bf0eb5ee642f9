"""One Monte Carlo trial of a two-stage experiment, run as an outline of steps."""
import logging
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Optional

import numpy as np

from dnull.common.exceptions import DNullError
from dnull.measurements.bases import DisplacementSchedule
from dnull.workchains.utils import trial_rng
from dnull.workflows import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TwoStageConfig:
    """Schedule and strategy options shared by all trials at one sample size"""
    schedule: DisplacementSchedule
    strategy: str
    g: Optional[tuple] = None
    weight: Optional[tuple] = None
    seed: int = 0
    sign_rule: str = "plus"
    holevo_restarts: int = settings.HOLEVO_RESTARTS
    split_budget: bool = False

    @property
    def n_prelim(self):
        return self.schedule.n_prelim

    @property
    def main_shots(self):
        """n, or n - n_prelim when the budget is split between the stages"""
        if self.split_budget:
            return max(self.schedule.n - self.schedule.n_prelim, 1)
        return self.schedule.n


@dataclass
class TrialResult:
    theta: np.ndarray
    theta_tilde: np.ndarray
    theta_hat: np.ndarray
    loss: float
    error: np.ndarray
    in_confidence: bool
    limit_covariance: Optional[np.ndarray] = None
    extras: dict = field(default_factory=dict)


class TwoStageWorkChain:
    """Preliminary estimate, basis construction, main measurement and final estimate"""

    def __init__(self, strategy, config, trial_index, true_parameter="prior"):
        self.strategy = strategy
        self.config = config
        self.trial_index = int(trial_index)
        self.true_parameter = true_parameter
        self.label = f"{strategy.name}:n={config.schedule.n}:trial={self.trial_index}"
        self.ctx = SimpleNamespace()
        self.exit_status = None

    @classmethod
    def outline(cls):
        return (cls.setup, cls.run_preliminary, cls.build_basis, cls.run_main, cls.inspect)

    def report(self, message):
        logger.info("[%s] %s", self.label, message)

    def run(self):
        try:
            for step in self.outline():
                step(self)
        except DNullError as exc:
            self.exit_status = exc.exit_code
            logger.warning("[%s] %s: %s", self.label, exc.name, exc)
            raise
        self.exit_status = 0
        return self.ctx.result

    def setup(self):
        """Draw the true parameter and prepare its state"""
        model = self.strategy.model
        self.ctx.rng = trial_rng(self.config.seed, self.config.schedule.n, self.trial_index)
        if isinstance(self.true_parameter, str) and self.true_parameter == "prior":
            self.ctx.theta = model.sample_uniform(self.ctx.rng)
        else:
            self.ctx.theta = model.as_parameter(self.true_parameter)
        self.ctx.state = model.state(self.ctx.theta)

    def run_preliminary(self):
        self.ctx.theta_tilde, self.ctx.prelim = self.strategy.preliminary(
            self.ctx.state, self.config.schedule, self.ctx.rng)
        self.report(f"preliminary estimate {np.round(self.ctx.theta_tilde, 6).tolist()} "
                    f"from {self.config.n_prelim} shots")

    def build_basis(self):
        self.ctx.design = self.strategy.design(self.ctx.theta_tilde, self.config.schedule)

    def run_main(self):
        self.ctx.counts = self.strategy.measure(self.ctx.design, self.ctx.state,
                                                self.config.main_shots, self.ctx.rng)

    def inspect(self):
        """Estimate, then score the estimate against the true parameter"""
        strategy, schedule, ctx = self.strategy, self.config.schedule, self.ctx
        record = strategy.estimate(ctx.theta_tilde, ctx.counts, ctx.design, schedule, ctx.prelim)
        distance = np.linalg.norm(np.atleast_1d(ctx.theta) - np.atleast_1d(ctx.theta_tilde))
        record.in_confidence = bool(distance <= schedule.radius)
        limit = strategy.limit_covariance(ctx.theta, ctx.design)
        ctx.result = TrialResult(
            theta=np.atleast_1d(ctx.theta),
            theta_tilde=np.atleast_1d(ctx.theta_tilde),
            theta_hat=record.theta_hat,
            loss=float(strategy.loss(record, ctx.theta, ctx.state, ctx.design)),
            error=np.atleast_1d(strategy.local_error(record, ctx.theta, ctx.state, ctx.design,
                                                     schedule)),
            in_confidence=record.in_confidence,
            limit_covariance=None if limit is None else np.atleast_2d(limit),
            extras=strategy.extras(record, ctx.theta, ctx.counts, ctx.design, schedule, ctx.prelim),
        )
        ctx.record = record
        self.report(f"loss {ctx.result.loss:.6e}")
