"""Dense linear algebra on small Hilbert spaces: states, bases, probabilities, sampling."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from dnull.common.exceptions import (DimensionMismatchError, InvalidProbabilitiesError,
                                     NotHermitianError, NotOrthonormalError)
from dnull.workflows import settings

logger = logging.getLogger(__name__)


def phase_factor(amplitudes, tol=settings.TOL_CONSTRUCTION):
    """Unit scalar making the first nonzero amplitude real positive"""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    nonzero = np.flatnonzero(np.abs(amplitudes) > tol)
    if nonzero.size == 0:
        return 1.0 + 0j
    lead = amplitudes[nonzero[0]]
    return abs(lead) / lead


def fix_phase(amplitudes, tol=settings.TOL_CONSTRUCTION):
    """Multiply by a unit scalar so the first nonzero amplitude is real positive"""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    return amplitudes * phase_factor(amplitudes, tol)


@dataclass(frozen=True)
class StateVector:
    """Unit vector in C^d"""
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.size == 0:
            raise ValueError("state needs at least one amplitude")
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > settings.TOL_CONSTRUCTION:
            raise ValueError(f"state is not normalized (norm {norm:.3e})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    @classmethod
    def from_vector(cls, vector, phase_fixed=False):
        """Normalize an arbitrary nonzero vector"""
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        vector = vector / norm
        if phase_fixed:
            vector = fix_phase(vector)
        return cls(vector)

    @classmethod
    def basis_state(cls, dim, index):
        vector = np.zeros(dim, dtype=complex)
        vector[index] = 1.0
        return cls(vector)

    @property
    def dim(self):
        return self.amplitudes.size

    def tensor(self, other):
        return StateVector(np.kron(self.amplitudes, other.amplitudes))

    def __len__(self):
        return self.dim


@dataclass(frozen=True)
class HermitianOp:
    """Hermitian matrix acting on C^d"""
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("operator must be a square matrix")
        if not np.allclose(entries, entries.conj().T, rtol=0, atol=settings.TOL_CONSTRUCTION):
            raise NotHermitianError("operator is not Hermitian")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def dim(self):
        return self.entries.shape[0]

    def __add__(self, other):
        return HermitianOp(self.entries + other.entries)

    def __mul__(self, scalar):
        return HermitianOp(float(scalar) * self.entries)

    __rmul__ = __mul__


@dataclass(frozen=True)
class ProjectiveBasis:
    """Orthonormal basis of C^d, one outcome per vector"""
    vectors: tuple = field(default_factory=tuple)

    def __post_init__(self):
        vectors = tuple(v if isinstance(v, StateVector) else StateVector(v)
                        for v in self.vectors)
        dims = {v.dim for v in vectors}
        if len(dims) != 1:
            raise DimensionMismatchError("basis vectors must share one dimension")
        dim = dims.pop()
        if len(vectors) != dim:
            raise NotOrthonormalError(f"a basis of C^{dim} needs {dim} vectors, got {len(vectors)}")
        matrix = np.column_stack([v.amplitudes for v in vectors])
        gram = matrix.conj().T @ matrix
        if not np.allclose(gram, np.eye(dim), rtol=0, atol=settings.TOL_ORTHONORMAL):
            raise NotOrthonormalError("basis vectors are not orthonormal")
        object.__setattr__(self, 'vectors', vectors)

    @classmethod
    def from_matrix(cls, matrix):
        """Columns of a unitary matrix as basis vectors"""
        matrix = np.asarray(matrix, dtype=complex)
        return cls(tuple(StateVector(matrix[:, k]) for k in range(matrix.shape[1])))

    @classmethod
    def canonical(cls, dim):
        return cls.from_matrix(np.eye(dim, dtype=complex))

    @property
    def dim(self):
        return len(self.vectors)

    @property
    def matrix(self):
        """d x d matrix whose columns are the basis vectors"""
        return np.column_stack([v.amplitudes for v in self.vectors])

    def rotated(self, unitary):
        return ProjectiveBasis.from_matrix(np.asarray(unitary) @ self.matrix)

    def __getitem__(self, index):
        return self.vectors[index]

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return self.dim


@dataclass(frozen=True)
class OutcomeCounts:
    """Multinomial data: counts per outcome and their total"""
    counts: np.ndarray
    total: int

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64).reshape(-1)
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if int(counts.sum()) != int(self.total) or self.total <= 0:
            raise ValueError(f"counts sum to {counts.sum()}, expected total {self.total}")
        counts.setflags(write=False)
        object.__setattr__(self, 'counts', counts)
        object.__setattr__(self, 'total', int(self.total))

    @property
    def frequencies(self):
        return self.counts / self.total

    def __getitem__(self, index):
        return int(self.counts[index])

    def __len__(self):
        return self.counts.size


def _amplitudes(v):
    return v.amplitudes if isinstance(v, StateVector) else np.asarray(v, dtype=complex)


def _check_dims(a, b):
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(f"dimension {a.shape[0]} does not match {b.shape[0]}")


def inner_product(a, b):
    """<a|b>, conjugate-linear in the first argument"""
    a, b = _amplitudes(a), _amplitudes(b)
    _check_dims(a, b)
    return complex(np.vdot(a, b))


def bures_distance_sq(a, b):
    """Squared Bures distance 2(1 - |<a|b>|) between pure states"""
    fidelity = min(abs(inner_product(a, b)), 1.0)
    return 2.0 * (1.0 - fidelity)


def exp_generator(g, angle):
    """Unitary exp(-i angle g) via the eigendecomposition of the Hermitian g"""
    entries = g.entries if isinstance(g, HermitianOp) else HermitianOp(g).entries
    eigvals, eigvecs = np.linalg.eigh(entries)
    phases = np.exp(-1j * angle * eigvals)
    return (eigvecs * phases) @ eigvecs.conj().T


def apply_exp_generator(g, angle, v):
    """exp(-i angle g)|v>"""
    if not isinstance(g, HermitianOp):
        g = HermitianOp(g)
    amplitudes = _amplitudes(v)
    _check_dims(g.entries, amplitudes)
    rotated = exp_generator(g, angle) @ amplitudes
    return StateVector.from_vector(rotated)


def sigma_x(v0, vk):
    """|vk><v0| + |v0><vk|"""
    v0, vk = _amplitudes(v0), _amplitudes(vk)
    return HermitianOp(np.outer(vk, v0.conj()) + np.outer(v0, vk.conj()))


def sigma_y(v0, vk):
    """i|vk><v0| - i|v0><vk|, so that exp(-i t sigma_y)|v0> = cos t|v0> + sin t|vk>"""
    v0, vk = _amplitudes(v0), _amplitudes(vk)
    return HermitianOp(1j * np.outer(vk, v0.conj()) - 1j * np.outer(v0, vk.conj()))


def measurement_probs(basis, state):
    """Outcome distribution |<v_i|state>|^2 of a projective measurement"""
    amplitudes = _amplitudes(state)
    _check_dims(basis.matrix, amplitudes)
    probs = np.abs(basis.matrix.conj().T @ amplitudes) ** 2
    return probs / probs.sum()


def validate_probs(probs, tol=settings.TOL_ALGEBRA):
    probs = np.asarray(probs, dtype=float).reshape(-1)
    if np.any(probs < -tol):
        raise InvalidProbabilitiesError(f"negative probability {probs.min():.3e}")
    if abs(probs.sum() - 1.0) > tol:
        raise InvalidProbabilitiesError(f"probabilities sum to {probs.sum():.12f}")
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def sample_counts(probs, n, seed):
    """Multinomial draw of n outcomes; seed may be an int, SeedSequence or Generator"""
    probs = validate_probs(probs)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(n), probs)
    return OutcomeCounts(counts, int(n))


def complete_basis(partial, dim=None):
    """Extend orthonormal vectors to an ONB by Gram-Schmidt on canonical vectors.

    The canonical vector with the largest residual is taken first; new vectors
    are phase fixed.
    """
    vectors = [_amplitudes(v) for v in partial]
    if dim is None:
        if not vectors:
            raise ValueError("dimension is required for an empty partial basis")
        dim = vectors[0].shape[0]
    if any(v.shape[0] != dim for v in vectors):
        raise DimensionMismatchError("partial basis vectors must have dimension %d" % dim)
    if len(vectors) > dim:
        raise NotOrthonormalError(f"{len(vectors)} vectors cannot be orthonormal in C^{dim}")
    if vectors:
        matrix = np.column_stack(vectors)
        if not np.allclose(matrix.conj().T @ matrix, np.eye(len(vectors)),
                           rtol=0, atol=settings.TOL_ORTHONORMAL):
            raise NotOrthonormalError("partial basis is not orthonormal")

    basis = list(vectors)
    identity = np.eye(dim, dtype=complex)
    while len(basis) < dim:
        if basis:
            span = np.column_stack(basis)
            residuals = identity - span @ (span.conj().T @ identity)
        else:
            residuals = identity
        norms = np.linalg.norm(residuals, axis=0)
        pivot = int(np.argmax(norms))
        new = residuals[:, pivot] / norms[pivot]
        if basis:
            # second pass keeps orthogonality at machine precision
            new = new - span @ (span.conj().T @ new)
            new = new / np.linalg.norm(new)
        basis.append(fix_phase(new))
    return ProjectiveBasis(tuple(StateVector(v) for v in basis))
