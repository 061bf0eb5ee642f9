"""Coherent-state companion: quadrature and displaced photon-counting samplers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CoherentState:
    """Product of coherent states |z_1> ... |z_M>"""
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'z', np.atleast_1d(np.asarray(self.z, dtype=complex)))

    @property
    def modes(self):
        return self.z.size

    def mean_quadratures(self):
        """(Q_1..Q_M, P_1..P_M) means sqrt(2) Re z, sqrt(2) Im z"""
        return np.sqrt(2) * np.concatenate([self.z.real, self.z.imag])

    def sample_quadratures(self, n_shots, seed):
        """n_shots x 2M array of quadrature samples with vacuum variance 1/2"""
        rng = np.random.default_rng(seed)
        mean = self.mean_quadratures()
        return rng.normal(loc=mean, scale=np.sqrt(0.5), size=(int(n_shots), mean.size))

    def intensities(self, displacement=None):
        displacement = np.zeros(self.modes) if displacement is None else displacement
        return np.abs(self.z - np.asarray(displacement, dtype=complex)) ** 2


def sample_coherent_counts(state, displacement, n_shots, seed):
    """M x n_shots Poisson(|z_k - Delta_k|^2) counts of the displaced number operators"""
    displacement = np.atleast_1d(np.asarray(displacement, dtype=complex))
    if displacement.size != state.modes:
        raise ValueError(f"displacement needs {state.modes} entries, got {displacement.size}")
    rng = np.random.default_rng(seed)
    intensities = state.intensities(displacement)
    return rng.poisson(intensities[:, None], size=(state.modes, int(n_shots)))


def counting_homodyne_estimator(counts, displacement):
    """u = Delta/2 - mean(N)/(2 Delta) per mode"""
    displacement = np.atleast_1d(np.asarray(displacement, dtype=float))
    if np.any(displacement == 0):
        raise ValueError("counting homodyne needs a nonzero displacement")
    counts = np.atleast_2d(np.asarray(counts, dtype=float))
    mean = counts.mean(axis=1)
    return displacement / 2 - mean / (2 * displacement)
