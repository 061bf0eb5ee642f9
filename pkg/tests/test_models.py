import numpy as np
import pytest
from numpy.testing import assert_allclose

from dnull.common.exceptions import (ConfigurationError, DerivativeUnavailableError,
                                     DimensionMismatchError, IdentifiabilityError)
from dnull.quantum.core import ProjectiveBasis, bures_distance_sq, inner_product
from dnull.quantum import models
from dnull.quantum.models import (LocalChart, PureStateModel, get_model, linearize_at,
                                  local_coordinates, local_qudit_model, project_derivative_gauge,
                                  real_rank, register_model)
from tests.conftest import random_unit_vector, random_unitary


def test_qubit_state(qubit):
    assert_allclose(qubit.amplitudes([0.1]), [np.cos(0.1), np.sin(0.1)])


@pytest.mark.parametrize("key, dim, param_dim", [
    ("qubit_rotation", 2, 1),
    ("qutrit_real", 3, 2),
    ("local_qudit", 2, 2),
    ("local_qudit:3", 3, 4),
])
def test_registry(key, dim, param_dim):
    model = get_model(key)
    assert (model.dim, model.param_dim) == (dim, param_dim)


@pytest.mark.parametrize("key", ["missing", "local_qudit:x", "local_qudit:1", "qubit_rotation:2",
                                 "qutrit_real:3"])
def test_registry_rejects_bad_names(key):
    with pytest.raises(ConfigurationError):
        get_model(key)


def test_register_model_makes_name_available(monkeypatch):
    monkeypatch.setattr(models, "MODEL_REGISTRY", dict(models.MODEL_REGISTRY))
    register_model("qudit_alias")(local_qudit_model)
    model = get_model("qudit_alias:4")
    assert (model.dim, model.param_dim) == (4, 6)


def test_gauge_projection_removes_state_component(rng):
    psi = random_unit_vector(rng, 3)
    dpsi = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    projected = project_derivative_gauge(psi, dpsi)
    assert_allclose(projected @ psi.conj(), 0.0, atol=1e-14)
    assert_allclose(project_derivative_gauge(psi, projected), projected, atol=1e-12)
    assert_allclose(project_derivative_gauge(psi, dpsi[0]), projected[0], atol=1e-14)
    with pytest.raises(DimensionMismatchError):
        project_derivative_gauge(psi, dpsi[:, :2])


@pytest.mark.parametrize("key", ["qubit_rotation", "qutrit_real", "local_qudit:2", "local_qudit:3"])
def test_linearized_model_is_locally_indistinguishable(key, rng):
    model = get_model(key)
    n = 10 ** 6
    theta_tilde = model.center
    lin = linearize_at(model, theta_tilde)
    for _ in range(5):
        direction = rng.normal(size=model.param_dim)
        h = n ** 0.1 * direction / np.linalg.norm(direction) / np.sqrt(n)
        fidelity = abs(inner_product(lin.state(h), model.state(theta_tilde + h))) ** 2
        assert 1.0 - fidelity ** n < 0.05


def test_parameter_shape_is_checked(qutrit):
    with pytest.raises(DimensionMismatchError):
        qutrit.state([0.1])


@pytest.mark.parametrize("key", ["qubit_rotation", "qutrit_real", "local_qudit:2", "local_qudit:3"])
def test_analytic_derivatives_match_finite_differences(key):
    model = get_model(key)
    assert model.check_derivatives(model.grid(3)) < 1e-6


def test_derivative_failure_is_reported():
    model = PureStateModel(dim=2, param_dim=1, domain=(-1.0, 1.0),
                           state_fn=lambda t: np.array([1.0, 0.0]),
                           derivative_fn=lambda t: np.array([[np.nan, 0.0]]))
    with pytest.raises(DerivativeUnavailableError):
        model.derivatives([0.0])


@pytest.mark.parametrize("use_base", [False, True])
def test_local_coordinates_invert_the_chart(use_base, rng):
    base = ProjectiveBasis.from_matrix(random_unitary(rng, 3)) if use_base else None
    model = local_qudit_model(3, base)
    u = np.array([0.1, -0.05, 0.03, 0.02])
    state = np.exp(0.3j) * model.amplitudes(u)
    chart_base = base if use_base else ProjectiveBasis.canonical(3)
    assert_allclose(local_coordinates(chart_base, state), u, atol=1e-12)


def test_local_chart_scales_by_root_n(qubit):
    chart = LocalChart(qubit, [0.02], 10 ** 4)
    assert_allclose(chart.parameter([1.0]), [0.03])
    assert_allclose(chart.state([1.0]).amplitudes, qubit.amplitudes([0.03]))


def test_linearized_qubit_is_exact(qubit):
    lin = linearize_at(qubit, [0.02])
    assert lin.coefficients.shape == (1, 1)
    assert abs(lin.coefficients[0, 0]) == pytest.approx(1.0)
    for u in (1e-3, -0.05):
        assert bures_distance_sq(lin.state([u]), qubit.state([0.02 + u])) < 1e-12


def test_linearized_full_qudit_coefficients(full_qutrit):
    lin = linearize_at(full_qutrit, np.zeros(4))
    assert_allclose(np.abs(lin.coefficients), [[1, 1, 0, 0], [0, 0, 1, 1]], atol=1e-12)
    assert lin.D.shape == (4, 4)
    assert real_rank(lin.coefficients) == 4


def test_linearize_rejects_flat_model():
    model = PureStateModel(dim=2, param_dim=1, domain=(-1.0, 1.0),
                           state_fn=lambda t: np.array([1.0, 0.0]),
                           derivative_fn=lambda t: np.zeros((1, 2)))
    with pytest.raises(IdentifiabilityError):
        linearize_at(model, [0.0])
