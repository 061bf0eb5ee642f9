"""Null and displaced-null measurement bases."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from dnull.common.exceptions import (ConfigurationError, QuadratureVectorError, RealFormError,
                                     VanishingOverlapError)
from dnull.quantum.core import (HermitianOp, ProjectiveBasis, StateVector, complete_basis,
                                exp_generator, sigma_x, sigma_y)
from dnull.quantum.models import LinearizedModel, gauge_fixed_derivatives
from dnull.workflows import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DisplacementSchedule:
    """Sample-size dependent constants of the two-stage scheme"""
    epsilon: float
    n: int
    delta_override: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.1:
            raise ConfigurationError(f"epsilon must lie in (0, 1/10), got {self.epsilon}")
        if int(self.n) < 1:
            raise ConfigurationError(f"sample size must be positive, got {self.n}")
        object.__setattr__(self, 'n', int(self.n))

    @property
    def n_prelim(self):
        return int(math.ceil(self.n ** (1.0 - self.epsilon)))

    @property
    def delta(self):
        if self.delta_override is not None:
            return float(self.delta_override)
        return self.n ** (-0.5 + 3.0 * self.epsilon)

    @property
    def Delta(self):
        return self.delta * math.sqrt(self.n)

    @property
    def radius(self):
        return self.n ** (-0.5 + self.epsilon)

    def with_delta(self, delta):
        return replace(self, delta_override=delta)


def sigma_x_basis():
    """{(|0> + |1>)/sqrt(2), (|0> - |1>)/sqrt(2)}"""
    return ProjectiveBasis.from_matrix(np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2))


def rotation_basis(tau):
    """exp(-i tau sigma_y){|0>, |1>}"""
    return ProjectiveBasis.from_matrix(np.array([[np.cos(tau), -np.sin(tau)],
                                                 [np.sin(tau), np.cos(tau)]], dtype=complex))


def null_basis(model, theta_tilde):
    """ONB whose first vector is psi_theta_tilde"""
    psi, _ = gauge_fixed_derivatives(model, theta_tilde)
    return complete_basis([psi], model.dim)


def displaced_basis_qubit(theta_tilde, schedule):
    """Rotation basis at tau = theta_tilde + delta_n"""
    return rotation_basis(float(np.atleast_1d(theta_tilde)[0]) + schedule.delta)


def _rotate(basis, generator, angle):
    return basis.rotated(exp_generator(generator, angle))


def displaced_bases_bures(base, schedule):
    """exp(-i delta sum_k sigma_y^k) and exp(+i delta sum_k sigma_x^k) applied to base"""
    v0 = base[0]
    g_y = sum((sigma_y(v0, base[k]).entries for k in range(1, base.dim)),
              np.zeros((base.dim, base.dim), dtype=complex))
    g_x = sum((sigma_x(v0, base[k]).entries for k in range(1, base.dim)),
              np.zeros((base.dim, base.dim), dtype=complex))
    first = _rotate(base, HermitianOp(g_y), schedule.delta)
    second = _rotate(base, HermitianOp(g_x), -schedule.delta)
    return first, second


def _quadrature_states(lin, holevo):
    """|0~> = |0>|0'> and |k~> on span{|k>|0'>, |0>|k'>} from the quadrature vectors"""
    d = lin.dim
    frame = lin.basis.matrix
    ancilla0 = np.zeros(d, dtype=complex)
    ancilla0[0] = 1.0
    reference = np.kron(frame[:, 0], ancilla0)
    modes = d - 1
    vectors = []
    for row in np.atleast_2d(holevo.quad_vectors):
        system_part = frame[:, 1:] @ row[:modes]
        vector = np.kron(system_part, ancilla0)
        if row.size > modes:
            ancilla_part = np.concatenate([[0.0], row[modes:2 * modes]])
            vector = vector + np.kron(frame[:, 0], ancilla_part)
        vectors.append(vector)
    vectors = np.array(vectors)
    gram = vectors.conj() @ vectors.T
    if not np.allclose(gram, np.eye(len(vectors)), atol=1e-8):
        raise QuadratureVectorError("quadrature vectors are not orthonormal")
    return reference, vectors


def _general_rotation(lin, holevo, schedule):
    reference, vectors = _quadrature_states(lin, holevo)
    basis = complete_basis([reference, *vectors], reference.size)
    generator = np.zeros((reference.size, reference.size), dtype=complex)
    for vector in vectors:
        generator += sigma_y(reference, vector).entries
    return basis.rotated(exp_generator(HermitianOp(generator), schedule.delta)), vectors


def displaced_basis_general(lin, holevo, schedule):
    """Rotated ONB of C^d (x) C^d: |v_j> = exp(-i delta sum_k sigma(i k~))|j~>"""
    basis, _ = _general_rotation(lin, holevo, schedule)
    return basis


def real_form(lin, tol=1e-8):
    """Rephase |k> so every coefficient c_kj is real; returns (LinearizedModel, phases)"""
    C = lin.coefficients
    scale = max(float(np.max(np.abs(C))), 1.0)
    phases = np.ones(C.shape[0], dtype=complex)
    for k, row in enumerate(C):
        lead = row[np.argmax(np.abs(row))]
        if abs(lead) > 0:
            phases[k] = lead / abs(lead)
        if np.max(np.abs(np.imag(row / phases[k]))) > tol * scale:
            raise RealFormError(f"row {k + 1} of C has no common phase: {row.tolist()}")
    frame = lin.basis.matrix.copy()
    frame[:, 1:] = frame[:, 1:] * phases
    real = (C / phases[:, None]).real.astype(complex)
    return LinearizedModel(basis=ProjectiveBasis.from_matrix(frame), coefficients=real,
                           base_point=lin.base_point), phases


def qcrb_basis(lin, g, schedule):
    """Real-form ONB rotated by exp(-i delta sum_k g_k sigma_y^k)"""
    g = np.asarray(g, dtype=float).reshape(-1)
    if g.size != lin.dim - 1:
        raise ConfigurationError(f"g needs {lin.dim - 1} entries, got {g.size}")
    if np.any(g == 0):
        raise ConfigurationError("every g_k must be nonzero")
    real, _ = real_form(lin)
    base = real.basis
    generator = np.zeros((base.dim, base.dim), dtype=complex)
    for k in range(1, base.dim):
        generator += g[k - 1] * sigma_y(base[0], base[k]).entries
    return _rotate(base, HermitianOp(generator), schedule.delta)


@dataclass(frozen=True)
class MatsumotoBasis:
    """Rotated basis plus <b_k|z_i> (rows k = 0..m) and <b_k|psi>"""
    basis: ProjectiveBasis
    z_overlaps: np.ndarray
    psi_overlaps: np.ndarray


def matsumoto_basis(lin, holevo, schedule, tol=settings.TOL_OVERLAP):
    basis, vectors = _general_rotation(lin, holevo, schedule)
    m = vectors.shape[0]
    b = basis.matrix[:, :m + 1]
    psi = system_state(lin.reference, lin.dim).amplitudes
    z = holevo.T @ vectors
    psi_overlaps = b.conj().T @ psi
    if np.any(np.abs(psi_overlaps) < tol):
        raise VanishingOverlapError("a Matsumoto basis vector is orthogonal to the reference state")
    z_overlaps = b.conj().T @ z.T
    return MatsumotoBasis(basis=basis, z_overlaps=z_overlaps, psi_overlaps=psi_overlaps)


def system_state(state, dim):
    """psi (x) |0'> on the doubled space"""
    ancilla0 = np.zeros(dim, dtype=complex)
    ancilla0[0] = 1.0
    amplitudes = state.amplitudes if isinstance(state, StateVector) else np.asarray(state)
    return StateVector(np.kron(amplitudes, ancilla0))
