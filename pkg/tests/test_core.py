import numpy as np
import pytest
from numpy.testing import assert_allclose

from dnull.common.exceptions import (DimensionMismatchError, InvalidProbabilitiesError,
                                     NotHermitianError, NotOrthonormalError)
from dnull.quantum.core import (HermitianOp, OutcomeCounts, ProjectiveBasis, StateVector,
                                apply_exp_generator, bures_distance_sq, complete_basis, exp_generator,
                                inner_product, measurement_probs, sample_counts, sigma_x, sigma_y,
                                validate_probs)
from tests.conftest import random_unit_vector, random_unitary


def test_state_must_be_normalized():
    with pytest.raises(ValueError):
        StateVector([1.0, 1.0])


def test_from_vector_fixes_phase():
    state = StateVector.from_vector([0.0, 1j, 1j], phase_fixed=True)
    assert_allclose(state.amplitudes, [0.0, 1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-15)


def test_hermitian_check():
    with pytest.raises(NotHermitianError):
        HermitianOp([[0.0, 1.0], [0.0, 0.0]])


def test_basis_needs_orthonormal_vectors():
    with pytest.raises(NotOrthonormalError):
        ProjectiveBasis.from_matrix([[1.0, 1 / np.sqrt(2)], [0.0, 1 / np.sqrt(2)]])


def test_sigma_y_rotates_reference_into_partner():
    e0, e1 = np.eye(2, dtype=complex)
    for angle in (0.1, -0.7, 1.3):
        rotated = exp_generator(sigma_y(e0, e1), angle) @ e0
        assert_allclose(rotated, [np.cos(angle), np.sin(angle)], atol=1e-14)


def test_apply_exp_generator_rotates_state():
    e0, e1 = np.eye(2, dtype=complex)
    rotated = apply_exp_generator(sigma_y(e0, e1), 0.4, StateVector.basis_state(2, 0))
    assert_allclose(rotated.amplitudes, [np.cos(0.4), np.sin(0.4)], atol=1e-14)


def test_apply_exp_generator_checks_dimensions():
    with pytest.raises(DimensionMismatchError):
        apply_exp_generator(np.eye(3), 0.1, StateVector.basis_state(2, 0))


def test_sigma_x_is_pauli_x_on_canonical_pair():
    e0, e1 = np.eye(2, dtype=complex)
    assert_allclose(sigma_x(e0, e1).entries, [[0, 1], [1, 0]])


def test_exp_generator_is_unitary(rng):
    vector = random_unit_vector(rng, 4)
    g = np.outer(vector, vector.conj()) + sigma_x(np.eye(4)[0], np.eye(4)[2]).entries
    unitary = exp_generator(HermitianOp(g), 0.37)
    assert_allclose(unitary @ unitary.conj().T, np.eye(4), atol=1e-12)



def test_exp_generator_group_law(rng):
    matrix = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    g = HermitianOp(0.5 * (matrix + matrix.conj().T))
    state = StateVector(random_unit_vector(rng, 3))
    for a, b in [(0.3, -1.1), (0.05, 0.07), (2.0, 1.5)]:
        twice = apply_exp_generator(g, a, apply_exp_generator(g, b, state))
        once = apply_exp_generator(g, a + b, state)
        assert_allclose(twice.amplitudes, once.amplitudes, atol=1e-9)

def test_measurement_probs_of_sigma_x_basis():
    basis = ProjectiveBasis.from_matrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    assert_allclose(measurement_probs(basis, StateVector.basis_state(2, 0)), [0.5, 0.5])


def test_measurement_probs_sum_to_one(rng):
    basis = ProjectiveBasis.from_matrix(random_unitary(rng, 5))
    probs = measurement_probs(basis, random_unit_vector(rng, 5))
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(probs >= 0)


def test_validate_probs_rejects_negative_mass():
    with pytest.raises(InvalidProbabilitiesError):
        validate_probs([1.1, -0.1])


def test_sample_counts_is_seeded():
    probs = [0.2, 0.3, 0.5]
    first = sample_counts(probs, 1000, 7)
    second = sample_counts(probs, 1000, 7)
    assert first.total == 1000
    assert np.array_equal(first.counts, second.counts)
    assert first.counts.sum() == 1000


def test_outcome_counts_total_must_match():
    with pytest.raises(ValueError):
        OutcomeCounts([1, 2], 4)


def test_complete_basis_keeps_partial_vectors(rng):
    vector = random_unit_vector(rng, 4)
    basis = complete_basis([vector])
    assert_allclose(basis[0].amplitudes, vector)
    assert_allclose(basis.matrix.conj().T @ basis.matrix, np.eye(4), atol=1e-12)


def test_complete_basis_rejects_non_orthonormal_input():
    with pytest.raises(NotOrthonormalError):
        complete_basis([[1.0, 0.0, 0.0], [np.sqrt(0.5), np.sqrt(0.5), 0.0]])


def test_bures_distance_ignores_global_phase(rng):
    vector = random_unit_vector(rng, 3)
    assert bures_distance_sq(vector, np.exp(0.4j) * vector) == pytest.approx(0.0, abs=1e-14)
    assert bures_distance_sq([1, 0], [0, 1]) == pytest.approx(2.0)


def test_inner_product_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        inner_product([1, 0], [1, 0, 0])


def test_sampled_frequencies_converge_at_root_n(rng):
    probs = np.array([0.5, 0.3, 0.2])
    sizes = np.array([10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6])
    errors = [np.mean([np.linalg.norm(sample_counts(probs, n, rng).frequencies - probs)
                       for _ in range(200)]) for n in sizes]
    slope, _ = np.polyfit(np.log(sizes), np.log(errors), 1)
    assert slope == pytest.approx(-0.5, abs=0.05)


def test_empty_completion_is_canonical():
    assert_allclose(complete_basis([], 3).matrix, np.eye(3))
    with pytest.raises(ValueError):
        complete_basis([])
