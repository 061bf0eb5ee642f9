import io
import math

import numpy as np
import pytest

from dnull.common.exceptions import ConfigurationError, StrategyModelMismatchError
from dnull.db.tables import CSV_COLUMNS, RiskRow
from dnull.db.utils import emit, load_report, write_csv
from dnull.quantum.models import qubit_rotation_model
from dnull.workchains.experiment import TrialResult, TwoStageWorkChain
from dnull.workchains.strategies import STRATEGY_REGISTRY, get_strategy
from dnull.workchains.submit import ExperimentConfig, run_experiment, run_trials
from dnull.workchains.utils import prior_ks, scaling_fit, summarize, trial_rng
from dnull.workflows import settings

QUBIT = {"model": "qubit_rotation", "strategy": "displaced_qubit", "n_grid": [1000, 4000],
         "trials": 20, "true_parameter": 0.05, "seed": 11}


def csv_text(report):
    buffer = io.StringIO()
    write_csv(report, buffer)
    return buffer.getvalue()


def make_row(n, risk):
    return RiskRow(n=n, trials=1, loss_name="squared_error", risk=risk, stderr=0.0,
                   n_risk=n * risk, ks_stat=0.0, oob_rate=0.0)


@pytest.mark.parametrize("change", [
    {"colour": "red"},
    {"epsilon": 0.1},
    {"n_grid": [4000, 1000]},
    {"trials": 0},
    {"sign_rule": "median"},
    {"format": "xml"},
    {"true_parameter": [0.1, 0.2]},
    {"true_parameter": "center"},
    {"strategy": "nonexistent"},
    {"model": "nonexistent"},
    {"workers": 0},
])
def test_config_rejects(change):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({**QUBIT, **change})


def test_config_requires_model():
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({"strategy": "displaced_qubit"})


def test_strategy_model_mismatch():
    with pytest.raises(StrategyModelMismatchError):
        ExperimentConfig.from_dict({**QUBIT, "model": "local_qudit:2", "true_parameter": "prior"})
    with pytest.raises(StrategyModelMismatchError):
        ExperimentConfig.from_dict({**QUBIT, "strategy": "bures"})
    with pytest.raises(StrategyModelMismatchError):
        ExperimentConfig.from_dict({**QUBIT, "model": "local_qudit:3", "strategy": "qcrb",
                                    "true_parameter": "prior"})


def test_weight_shape_is_checked():
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({"model": "local_qudit:2", "strategy": "general_holevo",
                                    "weight": [[1.0]]})


def test_config_dict_round_trip():
    config = ExperimentConfig.from_dict({**QUBIT, "weight": None})
    assert ExperimentConfig.from_dict(config.as_dict()) == config
    assert config.as_dict()["n_grid"] == [1000, 4000]


def test_runs_are_deterministic():
    assert csv_text(run_experiment(QUBIT)) == csv_text(run_experiment(QUBIT))


def test_worker_count_does_not_change_results():
    serial = run_experiment({**QUBIT, "workers": 1})
    parallel = run_experiment({**QUBIT, "workers": 2})
    assert csv_text(serial) == csv_text(parallel)


def test_seed_changes_results():
    assert csv_text(run_experiment(QUBIT)) != csv_text(run_experiment({**QUBIT, "seed": 12}))


def test_empty_grid_gives_header_only():
    assert csv_text(run_experiment({**QUBIT, "n_grid": []})) == ",".join(CSV_COLUMNS) + "\n"


def test_csv_rows():
    lines = csv_text(run_experiment(QUBIT)).splitlines()
    assert len(lines) == 3
    fields = lines[1].split(",")
    assert fields[:3] == ["1000", "20", "squared_error"]
    assert float(fields[5]) == pytest.approx(1000 * float(fields[3]))


def test_json_report_round_trip(tmp_path):
    report = run_experiment(QUBIT)
    path = emit(report, str(tmp_path / "report.json"), "json")
    assert load_report(path).as_dict() == report.as_dict()


def test_emit_rejects_unknown_format(tmp_path):
    with pytest.raises(ConfigurationError):
        emit(run_experiment({**QUBIT, "n_grid": []}), str(tmp_path / "report.xml"), "xml")


def test_scaling_fit_is_exact_for_power_law():
    fit = scaling_fit([make_row(n, 0.25 / n) for n in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6)])
    assert fit.slope == pytest.approx(-1.0)
    assert fit.intercept == pytest.approx(math.log(0.25))
    assert fit.slope_low == pytest.approx(-1.0)


def test_scaling_fit_needs_three_points():
    with pytest.raises(ValueError):
        scaling_fit([make_row(10, 0.1), make_row(100, 0.01)])


def test_report_includes_scaling_for_three_sizes():
    report = run_experiment({**QUBIT, "n_grid": [1000, 2000, 4000], "trials": 5})
    assert report.scaling is not None
    assert run_experiment(QUBIT).scaling is None


def test_summarize():
    results = [TrialResult(theta=np.zeros(1), theta_tilde=np.zeros(1), theta_hat=np.zeros(1),
                           loss=loss, error=np.array([e]), in_confidence=inside,
                           limit_covariance=np.eye(1), extras={"coupling": loss})
               for loss, e, inside in ((1.0, -1.0, True), (2.0, 0.0, True), (3.0, 1.0, False))]
    row = summarize(100, results, "squared_error")
    assert row.risk == pytest.approx(2.0)
    assert row.stderr == pytest.approx(1.0 / math.sqrt(3))
    assert row.n_risk == pytest.approx(200.0)
    assert row.oob_rate == pytest.approx(1.0 / 3)
    assert row.covariance == pytest.approx([[1.0]])
    assert row.limit_covariance == [[1.0]]
    assert row.extras == {"coupling": pytest.approx(2.0)}


def test_summarize_without_limit_covariance():
    results = [TrialResult(theta=np.zeros(1), theta_tilde=np.zeros(1), theta_hat=np.zeros(1),
                           loss=1.0, error=np.zeros(1), in_confidence=True)]
    row = summarize(10, results, "squared_error")
    assert math.isnan(row.ks_stat)
    assert row.stderr == 0.0


def test_trial_rng_depends_only_on_its_arguments():
    first = trial_rng(1, 1000, 3).random(4)
    assert np.array_equal(first, trial_rng(1, 1000, 3).random(4))
    assert not np.array_equal(first, trial_rng(1, 1000, 4).random(4))
    assert not np.array_equal(first, trial_rng(1, 2000, 3).random(4))


def test_uniform_prior_draws():
    assert prior_ks(qubit_rotation_model(), 10 ** 5, seed=5) < 0.01


def test_workchain_reports_success():
    config = ExperimentConfig.from_dict(QUBIT)
    strategy = get_strategy(config.strategy, qubit_rotation_model(), config)
    chain = TwoStageWorkChain(strategy, config.two_stage(1000), 0, config.true_parameter)
    result = chain.run()
    assert chain.exit_status == 0
    assert result.theta == pytest.approx([0.05])
    assert abs(result.theta_hat[0] - 0.05) < 0.1


def test_naive_null_records_every_sign_rule():
    config = ExperimentConfig.from_dict({**QUBIT, "strategy": "naive_null", "true_parameter": "prior"})
    results = run_trials(config, 1000, [0, 1])
    for result in results:
        assert set(result.extras) == {"n_loss_plus", "n_loss_minus", "n_loss_posterior_mean"}
        assert result.limit_covariance is None


@pytest.mark.parametrize("model, strategy", [
    ("qubit_rotation", "displaced_qubit"),
    ("qubit_rotation", "naive_null"),
    ("local_qudit:2", "bures"),
    ("local_qudit:2", "general_holevo"),
    ("local_qudit:2", "matsumoto"),
    ("qutrit_real", "qcrb"),
])
def test_every_strategy_runs(model, strategy):
    assert strategy in STRATEGY_REGISTRY
    report = run_experiment({"model": model, "strategy": strategy, "n_grid": [2000],
                             "trials": 3, "seed": 3})
    row = report.rows[0]
    assert row.trials == 3
    assert np.isfinite(row.risk) and row.risk >= 0
    assert 0.0 <= row.oob_rate <= 1.0


def test_holevo_restarts_default_and_override():
    general = {"model": "qutrit_real", "strategy": "general_holevo", "n_grid": [1000]}
    assert ExperimentConfig.from_dict(general).holevo_restarts == settings.HOLEVO_RESTARTS == 20
    assert ExperimentConfig.from_dict({**general, "holevo_restarts": 5}).holevo_restarts == 5
    assert settings.load_protocol("holevo_qubit")["holevo_restarts"] == 20
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({**general, "holevo_restarts": 0})
