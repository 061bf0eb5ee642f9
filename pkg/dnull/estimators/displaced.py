"""Displaced-null estimators: qubit, Bures full-state, general Holevo, QCRB and Matsumoto."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dnull.common.exceptions import DimensionMismatchError, IdentifiabilityError
from dnull.measurements.bases import real_form
from dnull.quantum.core import OutcomeCounts, StateVector
from dnull.quantum.models import local_qudit_model, real_rank


@dataclass
class EstimateRecord:
    """Outcome of one two-stage run; theta_hat = theta_tilde + u_hat / sqrt(n)"""
    theta_tilde: np.ndarray
    theta_hat: np.ndarray
    u_hat: np.ndarray
    counts: object
    in_confidence: Optional[bool] = None
    state: Optional[StateVector] = None

    @classmethod
    def from_local(cls, theta_tilde, u_hat, n, counts, state=None):
        theta_tilde = np.atleast_1d(np.asarray(theta_tilde, dtype=float))
        u_hat = np.atleast_1d(np.asarray(u_hat, dtype=float))
        return cls(theta_tilde=theta_tilde, theta_hat=theta_tilde + u_hat / math.sqrt(n),
                   u_hat=u_hat, counts=counts, state=state)


def empirical_frequencies(counts):
    if isinstance(counts, OutcomeCounts):
        return counts.frequencies
    return np.asarray(counts, dtype=float).reshape(-1)


def estimate_displaced_qubit(theta_tilde, counts, schedule):
    """theta_tilde + delta/2 - p(1)/(2 delta), p(1) the empirical null-outcome frequency"""
    p_hat = empirical_frequencies(counts)[1]
    Delta, n = schedule.Delta, schedule.n
    u_hat = Delta / 2 - (n / Delta) * p_hat / 2
    return EstimateRecord.from_local(theta_tilde, u_hat, n, counts)


def estimate_bures(base, counts_pair, schedule):
    """Full-state estimate from the two rotated copies of base, n/2 shots each"""
    first, second = (empirical_frequencies(c) for c in counts_pair)
    if first.size != base.dim or second.size != base.dim:
        raise DimensionMismatchError(f"expected {base.dim} outcomes per basis")
    Delta, n = schedule.Delta, schedule.n
    u_hat = np.empty(2 * (base.dim - 1))
    u_hat[0::2] = Delta / 2 - (n / Delta) * first[1:] / 2
    u_hat[1::2] = Delta / 2 - (n / Delta) * second[1:] / 2
    record = EstimateRecord.from_local(np.zeros_like(u_hat), u_hat, n, tuple(counts_pair))
    record.state = local_qudit_model(base.dim, base).state(record.theta_hat)
    return record


def estimate_general(theta_tilde, counts, holevo, schedule):
    """u_j = sum_k T_jk (Delta/sqrt2 - (n/Delta) p(k)/sqrt2), k = 1..m; later outcomes unused"""
    p_hat = empirical_frequencies(counts)
    m = holevo.T.shape[0]
    Delta, n = schedule.Delta, schedule.n
    local = Delta / math.sqrt(2) - (n / Delta) * p_hat[1:m + 1] / math.sqrt(2)
    return EstimateRecord.from_local(theta_tilde, holevo.T @ local, n, counts)


def qcrb_transform(lin):
    """T = (C^T C)^{-1} C^T for the real-form coefficient matrix"""
    real, _ = real_form(lin)
    C = real.coefficients.real
    if real_rank(C) < C.shape[1]:
        raise IdentifiabilityError(f"coefficient matrix has rank below {C.shape[1]}")
    return np.linalg.solve(C.T @ C, C.T)


def estimate_qcrb(theta_tilde, counts, lin, g, schedule, transform=None):
    """u_j = sum_k T_jk (g_k Delta/2 - (n/Delta) p(k)/(2 g_k))"""
    T = qcrb_transform(lin) if transform is None else transform
    g = np.asarray(g, dtype=float).reshape(-1)
    p_hat = empirical_frequencies(counts)[1:g.size + 1]
    Delta, n = schedule.Delta, schedule.n
    local = g * Delta / 2 - (n / Delta) * p_hat / (2 * g)
    return EstimateRecord.from_local(theta_tilde, T @ local, n, counts)


def estimate_matsumoto(theta_tilde, counts, coefficients, schedule):
    """theta_i = theta_tilde_i + Re sum_k <b_k|z_i> p(k) / (sqrt2 <b_k|psi>), k = 0..m"""
    p_hat = empirical_frequencies(counts)
    rows = coefficients.z_overlaps.shape[0]
    weights = coefficients.z_overlaps / (math.sqrt(2) * coefficients.psi_overlaps[:, None])
    shift = np.real(p_hat[:rows] @ weights)
    n = schedule.n
    return EstimateRecord.from_local(theta_tilde, math.sqrt(n) * shift, n, counts)
