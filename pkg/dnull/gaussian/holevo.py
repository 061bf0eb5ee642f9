"""Gaussian shift models and the Holevo bound over matrices B with BD = 1."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import linalg, optimize

from dnull.common.exceptions import (AchievabilityError, IdentifiabilityError, NumericalError,
                                     OptimizerNotConvergedError)
from dnull.gaussian.coherent import CoherentState
from dnull.quantum.models import real_rank
from dnull.workflows import settings

logger = logging.getLogger(__name__)


def symplectic_form(modes):
    """Omega = [[0, 1], [-1, 0]] in the ordering (Q_1..Q_M, P_1..P_M)"""
    eye = np.eye(modes)
    zero = np.zeros((modes, modes))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class GaussianShiftModel:
    """Coherent states |Cu> with weight matrix W"""
    C: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=complex))
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        if W.shape != (C.shape[1], C.shape[1]):
            raise ValueError(f"weight must be {C.shape[1]}x{C.shape[1]}, got {W.shape}")
        if not np.allclose(W, W.T, atol=settings.TOL_ALGEBRA) or np.linalg.eigvalsh(W).min() <= 0:
            raise ValueError("weight matrix must be symmetric positive definite")
        if real_rank(C) < C.shape[1]:
            raise IdentifiabilityError(f"rank(D) < {C.shape[1]}: parameter not identifiable")
        object.__setattr__(self, 'C', C)
        object.__setattr__(self, 'W', 0.5 * (W + W.T))

    @classmethod
    def from_linearized(cls, lin, W=None):
        W = np.eye(lin.param_dim) if W is None else W
        return cls(C=lin.coefficients, W=W)

    @property
    def modes(self):
        return self.C.shape[0]

    @property
    def param_dim(self):
        return self.C.shape[1]

    @property
    def D(self):
        return np.sqrt(2) * np.vstack([self.C.real, self.C.imag])

    @property
    def Omega(self):
        return symplectic_form(self.modes)

    @property
    def fisher(self):
        return 2.0 * self.D.T @ self.D

    @property
    def achievable(self):
        return bool(np.max(np.abs(self.D.T @ self.Omega @ self.D)) < settings.TOL_ALGEBRA)

    def coherent_state(self, u):
        return CoherentState(self.C @ np.asarray(u, dtype=float))

    @cached_property
    def weight_root(self):
        eigvals, eigvecs = np.linalg.eigh(self.W)
        return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T

    def objective(self, B):
        """1/2 Tr(W B B^T) + 1/2 ||sqrt(W) B Omega B^T sqrt(W)||_1"""
        root = self.weight_root
        commutator = root @ B @ self.Omega @ B.T @ root
        return 0.5 * np.trace(self.W @ B @ B.T) + 0.5 * np.linalg.svd(commutator, compute_uv=False).sum()


@dataclass(frozen=True)
class HolevoSolution:
    value: float
    B: np.ndarray
    B_prime: Optional[np.ndarray]
    T: np.ndarray
    quad_rows: np.ndarray
    quad_vectors: np.ndarray
    gradient_norm: float = 0.0
    restart_values: tuple = ()

    @property
    def ancilla(self):
        return self.B_prime is not None

    @property
    def limit_covariance(self):
        return 0.5 * self.T @ self.T.T

    def as_dict(self):
        return {
            "value": float(self.value),
            "B": self.B.tolist(),
            "B_prime": None if self.B_prime is None else self.B_prime.tolist(),
            "T": self.T.tolist(),
            "ancilla": self.ancilla,
        }


def quadrature_to_vector(rows, modes):
    """CLT map: coefficients (x_Q, x_P) of each mode -> complex vector x_Q + i x_P.

    Rows over 4M quadratures (system then ancilla) map to vectors of length 2M.
    """
    rows = np.atleast_2d(rows)
    blocks = rows.shape[1] // (2 * modes)
    parts = []
    for b in range(blocks):
        block = rows[:, 2 * modes * b: 2 * modes * (b + 1)]
        parts.append(block[:, :modes] + 1j * block[:, modes:])
    return np.hstack(parts)


def _orthonormal_rows(full):
    """full = T Q with Q orthonormal rows; T lower triangular with positive diagonal"""
    q, r = np.linalg.qr(full.T)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q, r = q * signs, (r.T * signs).T
    return r.T, q.T


def ancilla_block(model, B, tol=settings.HOLEVO_ANCILLA_TOL):
    """B' with B' Omega B'^T = -B Omega B^T and Tr(W B'B'^T) = ||sqrt(W) B Omega B^T sqrt(W)||_1"""
    root = model.weight_root
    root_inv = np.linalg.inv(root)
    commutator = root @ B @ model.Omega @ B.T @ root
    commutator = 0.5 * (commutator - commutator.T)
    if np.linalg.svd(commutator, compute_uv=False).sum() <= tol:
        return None
    schur, orth = linalg.schur(commutator, output='real')
    m = commutator.shape[0]
    scaled = np.zeros((m, 2 * model.modes))
    pair = 0
    k = 0
    while k < m - 1:
        strength = schur[k, k + 1]
        if abs(strength) <= tol and abs(schur[k + 1, k]) <= tol:
            k += 1
            continue
        first, second = orth[:, k], orth[:, k + 1]
        if strength < 0:
            strength, second = -strength, -second
        # commutator contains strength (first second^T - second first^T)
        scaled[:, pair] = np.sqrt(strength) * second
        scaled[:, model.modes + pair] = np.sqrt(strength) * first
        pair += 1
        k += 2
    return root_inv @ scaled


def _assemble(model, B, gradient_norm=0.0, restart_values=()):
    B_prime = ancilla_block(model, B)
    full = B if B_prime is None else np.hstack([B, B_prime])
    T, quad_rows = _orthonormal_rows(full)
    if not np.allclose(B @ model.D, np.eye(model.param_dim), atol=1e-8):
        raise NumericalError("Holevo solution violates BD = 1")
    if B_prime is not None and not np.allclose(B_prime @ model.Omega @ B_prime.T,
                                               -B @ model.Omega @ B.T, atol=1e-8):
        raise NumericalError("ancilla block does not cancel the commutator")
    if not np.allclose(T @ quad_rows, full, atol=1e-8) or not np.isfinite(np.linalg.cond(T)):
        raise NumericalError("T-matrix reconstruction failed")
    value = model.objective(B)
    return HolevoSolution(value=float(value), B=B, B_prime=B_prime, T=T, quad_rows=quad_rows,
                          quad_vectors=quadrature_to_vector(quad_rows, model.modes),
                          gradient_norm=float(gradient_norm), restart_values=tuple(restart_values))


class _Objective:
    """Objective and subgradient in the null-space parameterization B = B0 + K N^T"""

    def __init__(self, model):
        self.model = model
        D = model.D
        self.B0 = np.linalg.solve(D.T @ D, D.T)
        self.N = linalg.null_space(D.T)
        self.root = model.weight_root
        self.shape = (model.param_dim, self.N.shape[1])

    def matrix(self, K):
        return self.B0 + K.reshape(self.shape) @ self.N.T

    def value(self, K):
        return self.model.objective(self.matrix(K))

    def _gradient(self, B, G):
        omega, root = self.model.Omega, self.root
        grad_B = self.model.W @ B + 0.5 * root @ (G.T - G) @ root @ B @ omega
        return (grad_B @ self.N).reshape(-1)

    def subgradient(self, K):
        B = self.matrix(K)
        commutator = self.root @ B @ self.model.Omega @ B.T @ self.root
        u, s, vt = np.linalg.svd(commutator)
        rank = int(np.sum(s > settings.HOLEVO_ANCILLA_TOL * max(s[0], 1.0)))
        return self._gradient(B, u[:, :rank] @ vt[:rank])

    def smoothed(self, K, mu):
        """Value and gradient with singular values s replaced by sqrt(s^2 + mu^2)"""
        B = self.matrix(K)
        commutator = self.root @ B @ self.model.Omega @ B.T @ self.root
        u, s, vt = np.linalg.svd(commutator)
        soft = np.sqrt(s ** 2 + mu ** 2)
        value = 0.5 * np.trace(self.model.W @ B @ B.T) + 0.5 * soft.sum()
        return value, self._gradient(B, (u * (s / soft)) @ vt)


def _subgradient_descent(objective, K, max_iter, window, rtol):
    step0 = 1.0 / np.linalg.eigvalsh(objective.model.W).max()
    best_K, best = K.copy(), objective.value(K)
    history = [best]
    for k in range(1, max_iter + 1):
        grad = objective.subgradient(K)
        K = K - (step0 / k) * grad
        current = objective.value(K)
        if current < best:
            best, best_K = current, K.copy()
        history.append(best)
        if k >= window and abs(history[-window] - best) <= rtol * max(abs(best), 1e-300):
            break
    return best_K, best


def _smoothing_continuation(objective, K, levels=settings.HOLEVO_SMOOTHING):
    """BFGS on the smoothed objective for decreasing mu, keeping the best exact value"""
    best_K, best = K, objective.value(K)
    scale = max(abs(best), 1e-12)
    for level in levels:
        result = optimize.minimize(objective.smoothed, K, args=(level * scale,), jac=True,
                                   method="BFGS", options={"gtol": 1e-13 * scale})
        K = result.x
        current = objective.value(K)
        if current < best:
            best, best_K = current, K.copy()
    return best_K, best


def holevo_bound_gaussian(model, restarts=settings.HOLEVO_RESTARTS, seed=0,
                          max_iter=settings.HOLEVO_MAX_ITER, window=settings.HOLEVO_WINDOW,
                          rtol=settings.HOLEVO_RTOL, spread_tol=settings.HOLEVO_SPREAD_TOL):
    """Minimize the Holevo objective from several starts.

    Each start runs subgradient descent, then BFGS on a smoothed nuclear norm with the
    smoothing driven towards zero. Starts whose best values differ by more than
    `spread_tol` relative raise OptimizerNotConvergedError.
    """
    objective = _Objective(model)
    if objective.N.shape[1] == 0:
        return _assemble(model, objective.B0, restart_values=(model.objective(objective.B0),))

    rng = np.random.default_rng(seed)
    size = objective.shape[0] * objective.shape[1]
    scale = np.linalg.norm(objective.B0)
    results = []
    for restart in range(max(int(restarts), 1)):
        start = np.zeros(size) if restart == 0 else rng.normal(scale=scale, size=size)
        K, _ = _subgradient_descent(objective, start, max_iter, window, rtol)
        K, value = _smoothing_continuation(objective, K)
        results.append((value, K))
    values = np.array([v for v, _ in results])
    best_value, best_K = min(results, key=lambda item: item[0])
    gradient_norm = np.linalg.norm(objective.subgradient(best_K))
    if not np.isfinite(best_value):
        raise OptimizerNotConvergedError("Holevo objective is not finite", best_value, gradient_norm)
    spread = (values.max() - values.min()) / max(abs(best_value), 1e-300)
    if spread > spread_tol:
        logger.warning("Holevo restarts spread %.2e relative", spread)
        raise OptimizerNotConvergedError(f"restarts disagree (relative spread {spread:.2e})",
                                         best_value, gradient_norm)
    logger.debug("Holevo bound %.12g after %d restarts", best_value, len(results))
    return _assemble(model, objective.matrix(best_K), gradient_norm, values)


def optimal_quadratures_achievable(model):
    """Z = Sigma^{-1} D^T R for models with D^T Omega D = 0"""
    D = model.D
    if np.max(np.abs(D.T @ model.Omega @ D)) > settings.TOL_ALGEBRA:
        raise AchievabilityError("D^T Omega D != 0: quadratures do not commute")
    sigma = D.T @ D
    B = np.linalg.solve(sigma, D.T)
    if not np.allclose(B @ model.Omega @ B.T, 0.0, atol=1e-8):
        raise AchievabilityError("optimal quadratures do not commute")
    if not np.allclose(B @ D, np.eye(model.param_dim), atol=1e-8):
        raise NumericalError("optimal quadratures are biased")
    if not np.allclose(0.5 * B @ B.T, 0.5 * np.linalg.inv(sigma), atol=1e-8):
        raise NumericalError("optimal quadrature covariance differs from Sigma^{-1}/2")
    return _assemble(model, B)
