"""Quantum and classical Fisher information for pure-state models."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from dnull.common.exceptions import LyapunovError
from dnull.quantum.core import HermitianOp, ProjectiveBasis
from dnull.quantum.models import (gauge_fixed_derivatives, phase_fixed_derivatives,
                                  project_derivative_gauge)
from dnull.workflows import settings

logger = logging.getLogger(__name__)


def _symmetric(matrix):
    return 0.5 * (matrix + matrix.T)


def qfi_pure(model, theta):
    """F_ij = 4 Re(<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>)"""
    psi = model.amplitudes(theta)
    derivs = model.derivatives(theta)
    gram = derivs.conj() @ derivs.T
    overlaps = derivs.conj() @ psi
    qfi = 4.0 * np.real(gram - np.outer(overlaps, overlaps.conj()))
    return _symmetric(qfi)


def sld_pure(model, theta):
    """L_j = 2(|d_j psi><psi| + |psi><d_j psi|) with gauge-projected derivatives"""
    psi, raw = phase_fixed_derivatives(model, theta)
    derivs = project_derivative_gauge(psi, raw)
    rho = np.outer(psi, psi.conj())
    slds = []
    for dpsi, draw in zip(derivs, raw):
        sld = 2.0 * (np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj()))
        drho = np.outer(draw, psi.conj()) + np.outer(psi, draw.conj())
        residual = np.max(np.abs(drho - 0.5 * (sld @ rho + rho @ sld)))
        if residual > settings.TOL_SLD:
            raise LyapunovError(f"SLD misses the Lyapunov equation by {residual:.3e}")
        slds.append(HermitianOp(sld))
    return slds


def sld_eigenbasis(model, theta, index=0):
    """Eigenbasis of the index-th SLD"""
    _, eigvecs = np.linalg.eigh(sld_pure(model, theta)[index].entries)
    return ProjectiveBasis.from_matrix(eigvecs)


def cfi(basis, model, theta, threshold=settings.PROB_THRESHOLD):
    """Classical Fisher information of a projective measurement"""
    psi = model.amplitudes(theta)
    derivs = model.derivatives(theta)
    overlaps = basis.matrix.conj().T @ psi
    doverlaps = basis.matrix.conj().T @ derivs.T
    probs = np.abs(overlaps) ** 2
    dprobs = 2.0 * np.real(overlaps.conj()[:, None] * doverlaps)
    keep = probs > threshold
    info = (dprobs[keep].T / probs[keep]) @ dprobs[keep]
    return _symmetric(info)


@dataclass(frozen=True)
class OutcomeCondition:
    index: int
    probability: float
    condition: int
    margin: float
    satisfied: bool


@dataclass(frozen=True)
class QCRBConditionReport:
    """Per-outcome saturation conditions for a one-parameter model"""
    outcomes: tuple
    achievable: bool

    @property
    def max_violation(self):
        return max((o.margin for o in self.outcomes if not o.satisfied), default=0.0)

    def violations(self, condition=None):
        return [o for o in self.outcomes
                if not o.satisfied and (condition is None or o.condition == condition)]


def qcrb_conditions(basis, model, theta, threshold=settings.PROB_THRESHOLD,
                    ratio_tol=settings.TOL_SLD, null_tol=settings.TOL_NULL_OUTCOME):
    """Check whether a projective measurement saturates the QCRB at theta.

    Outcomes with p > 0 (condition 1) need <v|psi> = lambda <v|L psi> with real
    lambda, measured by |Im(conj(<v|psi>) <v|L psi>)|. Outcomes with p = 0
    (condition 2) need Tr(M L rho L) = |<v|L psi>|^2 to vanish.
    """
    if model.param_dim != 1:
        raise ValueError("operator conditions apply to one-parameter models; use compatibility")
    sld = sld_pure(model, theta)[0].entries
    psi_fixed, _ = phase_fixed_derivatives(model, theta)
    amplitudes = basis.matrix.conj().T @ psi_fixed
    lifted = basis.matrix.conj().T @ (sld @ psi_fixed)
    outcomes = []
    for index, (a, l) in enumerate(zip(amplitudes, lifted)):
        probability = float(abs(a) ** 2)
        if probability > threshold:
            margin = float(abs(np.imag(np.conj(a) * l)))
            outcome = OutcomeCondition(index, probability, 1, margin, margin < ratio_tol)
        else:
            margin = float(abs(l) ** 2)
            outcome = OutcomeCondition(index, probability, 2, margin, margin < null_tol)
        outcomes.append(outcome)
    achievable = all(o.satisfied for o in outcomes)
    if not achievable:
        logger.debug("QCRB conditions fail at %s: %s", np.atleast_1d(theta).tolist(),
                     [(o.index, o.condition) for o in outcomes if not o.satisfied])
    return QCRBConditionReport(outcomes=tuple(outcomes), achievable=achievable)


@dataclass(frozen=True)
class Compatibility:
    matrix: np.ndarray
    compatible: bool


def compatibility(model, theta, tol=settings.TOL_COMPAT):
    """Antisymmetric matrix Im<d_i psi|d_j psi> of gauge-projected derivatives"""
    _, derivs = gauge_fixed_derivatives(model, theta)
    matrix = np.imag(derivs.conj() @ derivs.T)
    matrix = 0.5 * (matrix - matrix.T)
    return Compatibility(matrix=matrix, compatible=bool(np.max(np.abs(matrix), initial=0.0) < tol))


@dataclass(frozen=True)
class FisherReport:
    qfi: np.ndarray
    cfi: np.ndarray
    compat: np.ndarray
    achievable: bool

    def as_dict(self):
        return {
            "qfi": self.qfi.tolist(),
            "cfi": self.cfi.tolist(),
            "compat": self.compat.tolist(),
            "achievable": self.achievable,
        }


def fisher_report(model, theta, basis):
    """QFI, CFI of basis, and the compatibility matrix at theta"""
    compat = compatibility(model, theta)
    return FisherReport(qfi=qfi_pure(model, theta), cfi=cfi(basis, model, theta),
                        compat=compat.matrix, achievable=compat.compatible)
