"""Stage-one estimators computed from n^(1-eps) samples."""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy import optimize

from dnull.common.exceptions import LikelihoodFlatError
from dnull.quantum.core import (HermitianOp, OutcomeCounts, ProjectiveBasis, StateVector,
                                measurement_probs, sample_counts)
from dnull.quantum.information import sld_pure
from dnull.quantum.models import gauge_fixed_derivatives
from dnull.workflows import settings

logger = logging.getLogger(__name__)


def preliminary_qubit_mle(counts, n_prelim=None):
    """pi/4 - arcsin(sqrt(X)) from sigma_x counts, clamped to [-pi/8, pi/8]"""
    total = counts.total if n_prelim is None else int(n_prelim)
    mean = counts[1] / total
    theta = math.pi / 4 - math.asin(math.sqrt(min(max(mean, 0.0), 1.0)))
    clamped = min(max(theta, -math.pi / 8), math.pi / 8)
    if clamped != theta:
        logger.debug("preliminary estimate %.6f clamped to %.6f", theta, clamped)
    return clamped


def preliminary_bases(model, theta=None):
    """Eigenbases of L_j and of its quadrature partner 2(i|d_j><psi| - i|psi><d_j|), j = 1..m"""
    theta = model.center if theta is None else theta
    psi, derivs = gauge_fixed_derivatives(model, theta)
    psi = psi.amplitudes
    slds = sld_pure(model, theta)
    bases = []
    for sld, dpsi in zip(slds, derivs):
        partner = HermitianOp(2.0 * (1j * np.outer(dpsi, psi.conj()) - 1j * np.outer(psi, dpsi.conj())))
        for operator in (sld, partner):
            _, eigvecs = np.linalg.eigh(operator.entries)
            bases.append(ProjectiveBasis.from_matrix(eigvecs))
    return bases


class PreliminaryDesign:
    """Fixed stage-one bases with a tabulated log-likelihood grid"""

    def __init__(self, model, bases=None, grid_budget=settings.PRELIM_GRID_BUDGET):
        self.model = model
        self.bases = list(bases) if bases is not None else preliminary_bases(model)
        points = max(5, int(math.floor(grid_budget ** (1.0 / model.param_dim))))
        axes = [np.linspace(lo, hi, points) for lo, hi in zip(model.lower, model.upper)]
        mesh = np.meshgrid(*axes, indexing='ij')
        self.grid = np.stack([m.reshape(-1) for m in mesh], axis=1)
        self.log_probs = [np.empty((len(self.grid), b.dim)) for b in self.bases]
        for row, theta in enumerate(self.grid):
            psi = model.amplitudes(theta)
            for table, basis in zip(self.log_probs, self.bases):
                table[row] = self._log(measurement_probs(basis, psi))

    @staticmethod
    def _log(probs):
        return np.log(np.maximum(probs, 1e-300))

    def shots_per_basis(self, n_prelim):
        return int(math.ceil(n_prelim / len(self.bases)))

    def simulate(self, state, n_prelim, seed):
        rng = np.random.default_rng(seed)
        shots = self.shots_per_basis(n_prelim)
        return [sample_counts(measurement_probs(basis, state), shots, rng) for basis in self.bases]

    def log_likelihood(self, theta, samples):
        psi = self.model.amplitudes(self.model.clamp(theta))
        return float(sum(counts.counts @ self._log(measurement_probs(basis, psi))
                         for basis, counts in zip(self.bases, samples)))

    def estimate(self, samples):
        if len(samples) != len(self.bases):
            raise ValueError(f"expected {len(self.bases)} count sets, got {len(samples)}")
        grid_ll = sum(table @ counts.counts for table, counts in zip(self.log_probs, samples))
        if np.ptp(grid_ll) < 1e-12:
            raise LikelihoodFlatError(f"likelihood of '{self.model.name}' is flat on the grid")
        start = self.grid[int(np.argmax(grid_ll))]
        result = optimize.minimize(lambda t: -self.log_likelihood(t, samples), start,
                                   method="Nelder-Mead",
                                   bounds=list(zip(self.model.lower, self.model.upper)),
                                   options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        best = result.x if -result.fun >= grid_ll.max() else start
        return self.model.clamp(best)


def preliminary_generic(model, samples, n_prelim, seed=0, bases=None, design=None):
    """Grid-plus-Nelder-Mead MLE over fixed bases.

    samples is either a list of OutcomeCounts (one per basis) or the true state,
    which is then measured with n_prelim shots drawn from seed.
    """
    design = design or PreliminaryDesign(model, bases=bases)
    if isinstance(samples, StateVector):
        samples = design.simulate(samples, n_prelim, seed)
    elif isinstance(samples, OutcomeCounts):
        samples = [samples]
    return design.estimate(list(samples))
