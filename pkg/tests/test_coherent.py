import numpy as np
import pytest
from scipy import stats

from dnull.gaussian.coherent import (CoherentState, counting_homodyne_estimator,
                                     sample_coherent_counts)
from dnull.gaussian.holevo import GaussianShiftModel


def test_mean_quadratures():
    state = CoherentState([0.5 + 0.25j, -1.0])
    assert np.allclose(state.mean_quadratures(), np.sqrt(2) * np.array([0.5, -1.0, 0.25, 0.0]))


def test_quadrature_samples_have_vacuum_variance():
    samples = CoherentState([0.3j]).sample_quadratures(20000, 3)
    assert samples.shape == (20000, 2)
    assert samples.var(axis=0) == pytest.approx([0.5, 0.5], abs=0.03)


def test_counts_are_poisson():
    state = CoherentState([0.3 + 0.1j])
    shots = 10 ** 6
    counts = sample_coherent_counts(state, [2.0], shots, 11)
    intensity = 1.7 ** 2 + 0.1 ** 2
    assert counts.shape == (1, shots)
    assert abs(counts.mean() - intensity) < 3 * np.sqrt(intensity / shots)
    assert abs(counts.var() - intensity) < 3 * np.sqrt((intensity + 2 * intensity ** 2) / shots)


def test_plus_minus_u_are_indistinguishable_without_displacement():
    plus = sample_coherent_counts(CoherentState([0.7]), [0.0], 20000, 21)[0]
    minus = sample_coherent_counts(CoherentState([-0.7]), [0.0], 20000, 22)[0]
    assert stats.ks_2samp(plus, minus).pvalue > 0.01


def test_counting_homodyne_is_a_quadrature_measurement():
    u, Delta = 0.4, 50.0
    counts = sample_coherent_counts(CoherentState([u]), [Delta], 20000, 5)
    estimates = counting_homodyne_estimator(counts[0][:, None], [Delta])
    assert estimates.mean() == pytest.approx(u, abs=0.02)
    assert estimates.var() == pytest.approx(0.25, rel=0.1)
    quadratures = CoherentState([u]).sample_quadratures(20000, 6)[:, 0] / np.sqrt(2)
    assert stats.ks_2samp(estimates, quadratures).pvalue > 1e-3


def test_counting_homodyne_needs_displacement():
    with pytest.raises(ValueError):
        counting_homodyne_estimator([[1, 2, 3]], [0.0])


def test_displacement_size_is_checked():
    with pytest.raises(ValueError):
        sample_coherent_counts(CoherentState([0.1]), [1.0, 2.0], 10, 0)


def test_gaussian_model_bridges_to_coherent_states():
    model = GaussianShiftModel(C=[[1.0, 1j]], W=np.eye(2))
    state = model.coherent_state([0.3, -0.2])
    assert np.allclose(state.z, [0.3 - 0.2j])
    assert np.allclose(state.mean_quadratures(), model.D @ [0.3, -0.2])
