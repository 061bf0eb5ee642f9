"""Estimation strategies: the per-step hooks a TwoStageWorkChain calls."""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from dnull.common.exceptions import ConfigurationError, StrategyModelMismatchError
from dnull.estimators.displaced import (estimate_bures, estimate_displaced_qubit, estimate_general,
                                        estimate_matsumoto, estimate_qcrb, qcrb_transform)
from dnull.estimators.naive import SIGN_RULES, estimate_naive_null
from dnull.estimators.preliminary import PreliminaryDesign, preliminary_qubit_mle
from dnull.gaussian.holevo import GaussianShiftModel, holevo_bound_gaussian
from dnull.measurements.bases import (displaced_basis_general, displaced_basis_qubit,
                                      displaced_bases_bures, matsumoto_basis, null_basis,
                                      qcrb_basis, sigma_x_basis, system_state)
from dnull.quantum.core import bures_distance_sq, measurement_probs, sample_counts
from dnull.quantum.information import qfi_pure
from dnull.quantum.models import linearize_at, local_coordinates
from dnull.workchains.utils import squared_error, weighted_quadratic

logger = logging.getLogger(__name__)

STRATEGY_REGISTRY = {}


def register_strategy(name):
    def decorator(cls):
        cls.name = name
        STRATEGY_REGISTRY[name] = cls
        return cls
    return decorator


def get_strategy(name, model, config):
    """Instantiate a registered strategy, validating it against the model"""
    if name not in STRATEGY_REGISTRY:
        raise ConfigurationError(
            f"unknown strategy '{name}', available: {', '.join(sorted(STRATEGY_REGISTRY))}"
        )
    return STRATEGY_REGISTRY[name](model, config)


class Strategy:
    """Base strategy: squared-error loss, QCRB limit covariance, single-basis main stage"""
    name = None
    loss_name = "squared_error"

    def __init__(self, model, config):
        self.model = model
        self.config = config
        self.validate()

    def validate(self):
        pass

    def preliminary(self, state, schedule, rng):
        raise NotImplementedError

    def design(self, theta_tilde, schedule):
        raise NotImplementedError

    def measure(self, design, state, shots, rng):
        return sample_counts(measurement_probs(design, state), shots, rng)

    def estimate(self, theta_tilde, counts, design, schedule, prelim):
        raise NotImplementedError

    def loss(self, record, theta, state, design):
        return squared_error(record.theta_hat, theta)

    def local_error(self, record, theta, state, design, schedule):
        return math.sqrt(schedule.n) * (record.theta_hat - theta)

    def limit_covariance(self, theta, design):
        return np.linalg.inv(qfi_pure(self.model, theta))

    def extras(self, record, theta, counts, design, schedule, prelim):
        return {}


class QubitPreliminaryMixin:
    """sigma_x stage one with the closed-form MLE"""

    def validate(self):
        if self.model.name != "qubit_rotation":
            raise StrategyModelMismatchError(
                f"strategy '{self.name}' needs the qubit_rotation model, got '{self.model.name}'"
            )

    def preliminary(self, state, schedule, rng):
        counts = sample_counts(measurement_probs(sigma_x_basis(), state), schedule.n_prelim, rng)
        return np.atleast_1d(preliminary_qubit_mle(counts)), counts


class GenericPreliminaryMixin:
    """Grid MLE over the fixed SLD-derived bases"""

    @cached_property
    def prelim_design(self):
        return PreliminaryDesign(self.model)

    def preliminary(self, state, schedule, rng):
        samples = self.prelim_design.simulate(state, schedule.n_prelim, rng)
        return self.prelim_design.estimate(samples), samples


@register_strategy("displaced_qubit")
class DisplacedQubitStrategy(QubitPreliminaryMixin, Strategy):

    def design(self, theta_tilde, schedule):
        return displaced_basis_qubit(theta_tilde, schedule)

    def estimate(self, theta_tilde, counts, design, schedule, prelim):
        return estimate_displaced_qubit(theta_tilde, counts, schedule)


@register_strategy("naive_null")
class NaiveNullStrategy(QubitPreliminaryMixin, Strategy):
    """Null basis at the preliminary estimate, no displacement"""

    def design(self, theta_tilde, schedule):
        return null_basis(self.model, theta_tilde)

    def estimate(self, theta_tilde, counts, design, schedule, prelim):
        return estimate_naive_null(theta_tilde, counts, schedule, self.config.sign_rule,
                                   prelim_count=prelim[1], n_prelim=prelim.total)

    def limit_covariance(self, theta, design):
        return None

    def extras(self, record, theta, counts, design, schedule, prelim):
        """n times the loss of every sign rule on the same counts"""
        losses = {}
        for rule in SIGN_RULES:
            other = estimate_naive_null(record.theta_tilde, counts, schedule, rule,
                                        prelim_count=prelim[1], n_prelim=prelim.total)
            losses[f"n_loss_{rule}"] = schedule.n * squared_error(other.theta_hat, theta)
        return losses


@dataclass(frozen=True)
class BuresDesign:
    base: object
    first: object
    second: object


@register_strategy("bures")
class BuresStrategy(GenericPreliminaryMixin, Strategy):
    """Full-state estimation with two displaced copies of the null basis"""
    loss_name = "bures_sq"

    def validate(self):
        full = 2 * (self.model.dim - 1)
        if self.model.param_dim != full:
            raise StrategyModelMismatchError(
                f"bures needs a full model with {full} parameters, "
                f"'{self.model.name}' has {self.model.param_dim}"
            )

    def design(self, theta_tilde, schedule):
        base = null_basis(self.model, theta_tilde)
        first, second = displaced_bases_bures(base, schedule)
        return BuresDesign(base, first, second)

    def measure(self, design, state, shots, rng):
        half = shots // 2
        return (sample_counts(measurement_probs(design.first, state), half, rng),
                sample_counts(measurement_probs(design.second, state), shots - half, rng))

    def estimate(self, theta_tilde, counts, design, schedule, prelim):
        return estimate_bures(design.base, counts, schedule)

    def loss(self, record, theta, state, design):
        return bures_distance_sq(record.state, state)

    def local_error(self, record, theta, state, design, schedule):
        return record.u_hat - math.sqrt(schedule.n) * local_coordinates(design.base, state)

    def limit_covariance(self, theta, design):
        return 0.5 * np.eye(2 * (self.model.dim - 1))


@dataclass(frozen=True)
class HolevoDesign:
    lin: object
    holevo: object
    basis: object
    coefficients: object = None


@register_strategy("general_holevo")
class GeneralHolevoStrategy(GenericPreliminaryMixin, Strategy):
    """Ancilla-assisted displaced-null scheme attaining the Holevo bound"""
    loss_name = "weighted_quadratic"

    def validate(self):
        weight = self.weight
        if weight.shape != (self.model.param_dim, self.model.param_dim):
            raise ConfigurationError(
                f"weight must be {self.model.param_dim}x{self.model.param_dim}, got {weight.shape}"
            )

    @property
    def weight(self):
        if self.config.weight is None:
            return np.eye(self.model.param_dim)
        return np.atleast_2d(np.asarray(self.config.weight, dtype=float))

    def solve(self, theta_tilde):
        lin = linearize_at(self.model, theta_tilde)
        gaussian = GaussianShiftModel.from_linearized(lin, self.weight)
        return lin, holevo_bound_gaussian(gaussian, restarts=self.config.holevo_restarts)

    def design(self, theta_tilde, schedule):
        lin, holevo = self.solve(theta_tilde)
        return HolevoDesign(lin, holevo, displaced_basis_general(lin, holevo, schedule))

    def measure(self, design, state, shots, rng):
        extended = system_state(state, self.model.dim)
        return sample_counts(measurement_probs(design.basis, extended), shots, rng)

    def estimate(self, theta_tilde, counts, design, schedule, prelim):
        return estimate_general(theta_tilde, counts, design.holevo, schedule)

    def loss(self, record, theta, state, design):
        return weighted_quadratic(record.theta_hat, theta, self.weight)

    def limit_covariance(self, theta, design):
        return design.holevo.limit_covariance


@register_strategy("matsumoto")
class MatsumotoStrategy(GeneralHolevoStrategy):
    """Linear-in-frequencies estimator on the general basis, compared with the general one"""

    def design(self, theta_tilde, schedule):
        lin, holevo = self.solve(theta_tilde)
        coefficients = matsumoto_basis(lin, holevo, schedule)
        return HolevoDesign(lin, holevo, coefficients.basis, coefficients)

    def estimate(self, theta_tilde, counts, design, schedule, prelim):
        return estimate_matsumoto(theta_tilde, counts, design.coefficients, schedule)

    def extras(self, record, theta, counts, design, schedule, prelim):
        general = estimate_general(record.theta_tilde, counts, design.holevo, schedule)
        return {"coupling": schedule.n * squared_error(record.theta_hat, general.theta_hat)}


@dataclass(frozen=True)
class QCRBDesign:
    lin: object
    basis: object
    transform: np.ndarray


@register_strategy("qcrb")
class QCRBStrategy(GenericPreliminaryMixin, Strategy):
    """Real-form displaced basis for models whose QCRB is achievable"""

    def validate(self):
        if self.model.param_dim > self.model.dim - 1:
            raise StrategyModelMismatchError(
                f"qcrb needs at most {self.model.dim - 1} parameters, "
                f"'{self.model.name}' has {self.model.param_dim}"
            )
        if self.g.size != self.model.dim - 1:
            raise ConfigurationError(f"g needs {self.model.dim - 1} entries, got {self.g.size}")

    @property
    def g(self):
        if self.config.g is None:
            return np.ones(self.model.dim - 1)
        return np.asarray(self.config.g, dtype=float).reshape(-1)

    def design(self, theta_tilde, schedule):
        lin = linearize_at(self.model, theta_tilde)
        return QCRBDesign(lin, qcrb_basis(lin, self.g, schedule), qcrb_transform(lin))

    def measure(self, design, state, shots, rng):
        return sample_counts(measurement_probs(design.basis, state), shots, rng)

    def estimate(self, theta_tilde, counts, design, schedule, prelim):
        return estimate_qcrb(theta_tilde, counts, design.lin, self.g, schedule, design.transform)
