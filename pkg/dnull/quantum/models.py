"""Parametric pure-state models, local charts and linearization."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from dnull.common.exceptions import (ConfigurationError, DerivativeUnavailableError,
                                     DimensionMismatchError, IdentifiabilityError)
from dnull.quantum.core import (HermitianOp, ProjectiveBasis, StateVector, complete_basis,
                                exp_generator, phase_factor, sigma_x, sigma_y)
from dnull.workflows import settings

logger = logging.getLogger(__name__)

MODEL_REGISTRY = {}


def register_model(name):
    """Register a model constructor under a name usable in configs"""
    def decorator(constructor):
        MODEL_REGISTRY[name] = constructor
        return constructor
    return decorator


def get_model(key):
    """Build a model from 'name' or 'name:arg'"""
    name, _, arg = str(key).partition(':')
    if name not in MODEL_REGISTRY:
        raise ConfigurationError(
            f"unknown model '{name}', available: {', '.join(sorted(MODEL_REGISTRY))}"
        )
    constructor = MODEL_REGISTRY[name]
    if not arg:
        return constructor()
    try:
        return constructor(int(arg))
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad model argument in '{key}': {exc}") from exc


@dataclass(frozen=True)
class PureStateModel:
    """Family theta -> |psi_theta> on a box domain"""
    dim: int
    param_dim: int
    state_fn: Callable
    domain: tuple
    derivative_fn: Optional[Callable] = None
    name: str = "custom"

    def __post_init__(self):
        lower, upper = (np.broadcast_to(np.asarray(b, dtype=float), (self.param_dim,)).copy()
                        for b in self.domain)
        if np.any(lower >= upper):
            raise ValueError("domain lower bounds must be below upper bounds")
        object.__setattr__(self, 'domain', (lower, upper))

    @property
    def lower(self):
        return self.domain[0]

    @property
    def upper(self):
        return self.domain[1]

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    def as_parameter(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.param_dim,):
            raise DimensionMismatchError(
                f"model '{self.name}' takes {self.param_dim} parameters, got shape {theta.shape}"
            )
        return theta

    def in_domain(self, theta):
        theta = self.as_parameter(theta)
        return bool(np.all(theta > self.lower) and np.all(theta < self.upper))

    def clamp(self, theta):
        return np.clip(self.as_parameter(theta), self.lower, self.upper)

    def sample_uniform(self, rng):
        return np.random.default_rng(rng).uniform(self.lower, self.upper)

    def amplitudes(self, theta):
        amplitudes = np.asarray(self.state_fn(self.as_parameter(theta)), dtype=complex)
        if amplitudes.shape != (self.dim,):
            raise DimensionMismatchError(f"state_fn returned shape {amplitudes.shape}")
        return amplitudes

    def state(self, theta):
        return StateVector(self.amplitudes(theta))

    def derivatives(self, theta, finite_differences=False):
        """m x d array whose rows are the partial derivatives of psi_theta"""
        theta = self.as_parameter(theta)
        if self.derivative_fn is not None and not finite_differences:
            derivs = np.asarray(self.derivative_fn(theta), dtype=complex)
        else:
            derivs = finite_difference_derivatives(self.amplitudes, theta)
        if derivs.shape != (self.param_dim, self.dim) or not np.all(np.isfinite(derivs)):
            raise DerivativeUnavailableError(
                f"derivatives of '{self.name}' unavailable at {theta.tolist()}"
            )
        return derivs

    def check_derivatives(self, points, tol=1e-6):
        """Largest gap between analytic and finite-difference derivatives"""
        if self.derivative_fn is None:
            return 0.0
        gap = 0.0
        for theta in points:
            analytic = self.derivatives(theta)
            numeric = self.derivatives(theta, finite_differences=True)
            gap = max(gap, float(np.max(np.abs(analytic - numeric))))
        if gap > tol:
            logger.warning("analytic derivatives of %s deviate by %.3e", self.name, gap)
        return gap

    def grid(self, points_per_axis=5):
        """Interior grid of the domain"""
        axes = [np.linspace(lo, hi, points_per_axis + 2)[1:-1]
                for lo, hi in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing='ij')
        return np.stack([m.reshape(-1) for m in mesh], axis=1)


def finite_difference_derivatives(fn, theta, step=settings.FD_STEP):
    """Fourth-order central differences of a vector-valued map"""
    theta = np.asarray(theta, dtype=float)
    rows = []
    for j in range(theta.size):
        shift = np.zeros_like(theta)
        shift[j] = step
        rows.append((-np.asarray(fn(theta + 2 * shift)) + 8 * np.asarray(fn(theta + shift))
                     - 8 * np.asarray(fn(theta - shift)) + np.asarray(fn(theta - 2 * shift)))
                    / (12 * step))
    return np.array(rows, dtype=complex)


@register_model("qubit_rotation")
def qubit_rotation_model():
    """cos(theta)|0> + sin(theta)|1> on (-pi/8, pi/8)"""
    return PureStateModel(
        dim=2,
        param_dim=1,
        state_fn=lambda t: np.array([np.cos(t[0]), np.sin(t[0])], dtype=complex),
        derivative_fn=lambda t: np.array([[-np.sin(t[0]), np.cos(t[0])]], dtype=complex),
        domain=(-np.pi / 8, np.pi / 8),
        name="qubit_rotation",
    )


@register_model("qutrit_real")
def qutrit_real_model():
    """Real three-level family (cos t1 cos t2, sin t1 cos t2, sin t2)"""
    def state_fn(t):
        return np.array([np.cos(t[0]) * np.cos(t[1]),
                         np.sin(t[0]) * np.cos(t[1]),
                         np.sin(t[1])], dtype=complex)

    def derivative_fn(t):
        c1, s1, c2, s2 = np.cos(t[0]), np.sin(t[0]), np.cos(t[1]), np.sin(t[1])
        return np.array([[-s1 * c2, c1 * c2, 0.0],
                         [-c1 * s2, -s1 * s2, c2]], dtype=complex)

    return PureStateModel(dim=3, param_dim=2, state_fn=state_fn, derivative_fn=derivative_fn,
                          domain=(-np.pi / 8, np.pi / 8), name="qutrit_real")


def _sinc(r):
    return np.sinc(r / np.pi)


def _sinc_slope(r):
    """(r cos r - sin r) / r^3"""
    if r < 1e-2:
        return -1.0 / 3.0 + r ** 2 / 30.0 - r ** 4 / 840.0
    return (r * np.cos(r) - np.sin(r)) / r ** 3


@register_model("local_qudit")
def local_qudit_model(d=2, base=None):
    """exp(-i sum_k (u1^k sigma_y^k - u2^k sigma_x^k))|0>, parameters interleaved (u1^1, u2^1, u1^2, ...)

    The generators are taken relative to `base` (canonical basis by default).
    """
    if d < 2:
        raise ConfigurationError(f"local_qudit needs d >= 2, got {d}")
    frame = (base.matrix if base is not None else np.eye(d, dtype=complex))
    if frame.shape != (d, d):
        raise DimensionMismatchError(f"base must be a basis of C^{d}")
    e0, excited = frame[:, 0], frame[:, 1:]

    def split(u):
        z = u[0::2] + 1j * u[1::2]
        return z, float(np.linalg.norm(z))

    def state_fn(u):
        z, r = split(u)
        return np.cos(r) * e0 + _sinc(r) * (excited @ z)

    def derivative_fn(u):
        z, r = split(u)
        w = excited @ z
        s, h = _sinc(r), _sinc_slope(r)
        rows = []
        for k in range(d - 1):
            for x, dz in ((z[k].real, 1.0), (z[k].imag, 1j)):
                rows.append(-s * x * e0 + h * x * w + s * dz * excited[:, k])
        return np.array(rows, dtype=complex)

    return PureStateModel(dim=d, param_dim=2 * (d - 1), state_fn=state_fn,
                          derivative_fn=derivative_fn, domain=(-np.pi / 8, np.pi / 8),
                          name=f"local_qudit:{d}")


def local_coordinates(base, state):
    """Inverse chart of local_qudit_model(d, base): angles u with psi_u equal to state up to phase"""
    amplitudes = base.matrix.conj().T @ (state.amplitudes if isinstance(state, StateVector)
                                         else np.asarray(state, dtype=complex))
    a0 = amplitudes[0]
    phase = np.conj(a0) / abs(a0) if abs(a0) > 0 else 1.0
    cos_r = min(abs(a0), 1.0)
    w = phase * amplitudes[1:]
    r = float(np.arccos(cos_r))
    z = w / _sinc(r)
    u = np.empty(2 * z.size)
    u[0::2], u[1::2] = z.real, z.imag
    return u


class LocalChart:
    """u -> psi_{theta_tilde + u / sqrt(n)}"""

    def __init__(self, model, base_point, n):
        self.model = model
        self.base_point = model.as_parameter(base_point)
        self.n = int(n)

    def parameter(self, u):
        return self.base_point + np.asarray(u, dtype=float) / np.sqrt(self.n)

    def state(self, u):
        return self.model.state(self.parameter(u))


def project_derivative_gauge(psi, dpsi):
    """dpsi - <psi|dpsi> psi"""
    psi = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    dpsi = np.asarray(dpsi, dtype=complex)
    if psi.shape[-1] != dpsi.shape[-1]:
        raise DimensionMismatchError("state and derivative dimensions differ")
    if dpsi.ndim == 1:
        return dpsi - np.vdot(psi, dpsi) * psi
    return dpsi - np.outer(dpsi @ psi.conj(), psi)


def phase_fixed_derivatives(model, theta, finite_differences=False):
    """Phase-fixed amplitudes and derivatives carrying the same phase"""
    amplitudes = model.amplitudes(theta)
    phase = phase_factor(amplitudes)
    return phase * amplitudes, phase * model.derivatives(theta, finite_differences=finite_differences)


def gauge_fixed_derivatives(model, theta, finite_differences=False):
    """Phase-fixed state and its gauge-projected derivatives (rows)"""
    fixed, derivs = phase_fixed_derivatives(model, theta, finite_differences)
    return StateVector(fixed), project_derivative_gauge(fixed, derivs)


def real_rank(matrix, tol=settings.TOL_RANK):
    """Rank of a complex matrix viewed as a real map R^m -> R^{2k}"""
    stacked = np.vstack([matrix.real, matrix.imag])
    singular = np.linalg.svd(stacked, compute_uv=False)
    if singular.size == 0 or singular[0] == 0:
        return 0
    return int(np.sum(singular > tol * singular[0]))


@dataclass(frozen=True)
class LinearizedModel:
    """Generators S_j = sum_k (c^q_kj sigma_y^k - c^p_kj sigma_x^k) around the base state |0>"""
    basis: ProjectiveBasis
    coefficients: np.ndarray
    base_point: np.ndarray = field(default=None)

    @property
    def dim(self):
        return self.basis.dim

    @property
    def param_dim(self):
        return self.coefficients.shape[1]

    @property
    def coefficients_q(self):
        return self.coefficients.real

    @property
    def coefficients_p(self):
        return self.coefficients.imag

    @property
    def D(self):
        return np.sqrt(2) * np.vstack([self.coefficients.real, self.coefficients.imag])

    @property
    def reference(self):
        return self.basis[0]

    @property
    def generators(self):
        v0 = self.basis[0]
        generators = []
        for j in range(self.param_dim):
            entries = np.zeros((self.dim, self.dim), dtype=complex)
            for k in range(1, self.dim):
                c = self.coefficients[k - 1, j]
                entries += c.real * sigma_y(v0, self.basis[k]).entries
                entries -= c.imag * sigma_x(v0, self.basis[k]).entries
            generators.append(HermitianOp(entries))
        return generators

    def state(self, u):
        """exp(-i sum_j u_j S_j)|0>"""
        u = np.asarray(u, dtype=float).reshape(-1)
        total = sum(float(uj) * g.entries for uj, g in zip(u, self.generators))
        return StateVector.from_vector(exp_generator(HermitianOp(total), 1.0)
                                       @ self.reference.amplitudes)


def linearize_at(model, theta_tilde, finite_differences=False):
    """Linearized model at theta_tilde with |0> = psi_theta_tilde"""
    psi, derivs = gauge_fixed_derivatives(model, theta_tilde, finite_differences)
    basis = complete_basis([psi], model.dim)
    coefficients = basis.matrix[:, 1:].conj().T @ derivs.T
    rank = real_rank(coefficients)
    if rank < model.param_dim:
        raise IdentifiabilityError(
            f"model '{model.name}' not identifiable at {np.atleast_1d(theta_tilde).tolist()}: "
            f"rank {rank} < {model.param_dim}"
        )
    return LinearizedModel(basis=basis, coefficients=coefficients,
                           base_point=model.as_parameter(theta_tilde))
