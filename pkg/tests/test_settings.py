import pytest

from dnull.common.exceptions import ConfigurationError
from dnull.workflows import settings


def test_protocol_drops_name():
    protocol = settings.load_protocol("qubit_optimality")
    assert "name" not in protocol
    assert protocol["strategy"] == "displaced_qubit"
    assert protocol["seed"] == 2024


def test_unknown_protocol():
    with pytest.raises(ConfigurationError, match="available"):
        settings.load_protocol("missing")


def test_precedence(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("trials: 7\nseed: 3\n", encoding="utf8")
    config = settings.load_config(path=str(path), protocol="qubit_optimality",
                                  overrides={"seed": 11, "out": None})
    assert config["trials"] == 7
    assert config["seed"] == 11
    assert config["model"] == "qubit_rotation"
    assert "out" not in config


def test_json_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"model": "qutrit_real", "n_grid": [100, 200]}', encoding="utf8")
    assert settings.load_config(path=str(path)) == {"model": "qutrit_real", "n_grid": [100, 200]}


@pytest.mark.parametrize("content", ["[1, 2]", "model: [unclosed"])
def test_bad_config_files(tmp_path, content):
    path = tmp_path / "config.yaml"
    path.write_text(content, encoding="utf8")
    with pytest.raises(ConfigurationError):
        settings.read_yaml(str(path))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError, match="cannot read"):
        settings.read_yaml(str(tmp_path / "absent.yaml"))


def test_empty_file_is_empty_config(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("", encoding="utf8")
    assert settings.read_yaml(str(path)) == {}
