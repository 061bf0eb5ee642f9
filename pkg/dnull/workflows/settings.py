import os
import yaml
from dnull.common.exceptions import ConfigurationError

this_directory = os.path.abspath(os.path.dirname(__file__))
dnull_directory = os.path.split(this_directory)[0]

files_path = os.path.join(dnull_directory, 'files')
protocol_path = os.path.join(files_path, 'protocol.yaml')

TOL_CONSTRUCTION = 1e-12
TOL_ALGEBRA = 1e-10
TOL_ORTHONORMAL = 1e-10
TOL_SLD = 1e-8
TOL_COMPAT = 1e-8
TOL_RANK = 1e-8
TOL_NULL_OUTCOME = 1e-10
TOL_OVERLAP = 1e-14
PROB_THRESHOLD = 1e-14

FD_STEP = 1e-5

HOLEVO_RESTARTS = 20
HOLEVO_MAX_ITER = 2000
HOLEVO_WINDOW = 50
HOLEVO_RTOL = 1e-10
HOLEVO_SPREAD_TOL = 1e-5
HOLEVO_ANCILLA_TOL = 1e-10
# nuclear-norm smoothing levels, relative to the starting objective value
HOLEVO_SMOOTHING = (1e-2, 1e-4, 1e-6, 1e-8, 1e-10)

EPSILON = 0.05
OUTPUT_FORMAT = "csv"
FLOAT_FORMAT = ".17g"

PRELIM_GRID_BUDGET = 4096


def read_yaml(path):
    """Read a YAML (or JSON) file into a dict"""
    try:
        with open(path, 'r', encoding='utf8') as fhandle:
            content = yaml.safe_load(fhandle)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigurationError(f"{path} must contain a mapping")
    return content


def load_protocol(name):
    """Return a named experiment preset from protocol.yaml"""
    protocols = read_yaml(protocol_path)
    if name not in protocols:
        raise ConfigurationError(
            f"unknown protocol '{name}', available: {', '.join(sorted(protocols))}"
        )
    protocol = dict(protocols[name])
    protocol.pop('name', None)
    return protocol


def load_config(path=None, protocol=None, overrides=None):
    """Merge protocol preset < config file < overrides"""
    config = {}
    if protocol:
        config.update(load_protocol(protocol))
    if path:
        config.update(read_yaml(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            config[key] = value
    return config
