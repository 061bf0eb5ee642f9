"""Command line entry point: simulate, fisher and holevo subcommands."""
import argparse
import json
import logging
import sys

import numpy as np

from dnull.common.exceptions import ConfigurationError, DimensionMismatchError, DNullError
from dnull.db.utils import emit, write_csv, write_json
from dnull.gaussian.holevo import GaussianShiftModel, holevo_bound_gaussian
from dnull.measurements.bases import (DisplacementSchedule, displaced_bases_bures, null_basis,
                                      qcrb_basis)
from dnull.quantum.information import fisher_report, sld_eigenbasis
from dnull.quantum.models import get_model, linearize_at
from dnull.workchains.submit import ExperimentConfig, run_experiment
from dnull.workflows import settings

logger = logging.getLogger(__name__)


def _parameter(model, values):
    if values is None:
        return model.center
    try:
        return model.as_parameter(values)
    except DimensionMismatchError as exc:
        raise ConfigurationError(str(exc)) from exc


def simulate(args):
    """Run a Monte Carlo risk experiment and emit its report"""
    if not args.config and not args.protocol:
        raise ConfigurationError("simulate needs --config or --protocol")
    overrides = {
        "n_grid": args.n,
        "trials": args.trials,
        "seed": args.seed,
        "out": args.out,
        "format": args.format,
        "workers": args.workers,
    }
    values = settings.load_config(path=args.config, protocol=args.protocol, overrides=overrides)
    config = ExperimentConfig.from_dict(values)
    report = run_experiment(config)
    if config.out:
        emit(report, config.out, config.format)
    elif config.format == "json":
        write_json(report, sys.stdout)
    else:
        write_csv(report, sys.stdout)
    return 0


def fisher(args):
    """QFI, CFI of the chosen basis and compatibility at theta"""
    model = get_model(args.model)
    theta = _parameter(model, args.theta)
    if args.basis == "sld":
        basis = sld_eigenbasis(model, theta)
    elif args.basis == "null":
        basis = null_basis(model, theta)
    else:
        schedule = DisplacementSchedule(args.epsilon, args.n)
        if model.param_dim == 2 * (model.dim - 1):
            basis, _ = displaced_bases_bures(null_basis(model, theta), schedule)
        else:
            basis = qcrb_basis(linearize_at(model, theta), np.ones(model.dim - 1), schedule)
    content = fisher_report(model, theta, basis).as_dict()
    content.update({"model": model.name, "theta": theta.tolist(), "basis": args.basis})
    json.dump(content, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def holevo(args):
    """Holevo bound of the Gaussian shift model linearized at theta"""
    model = get_model(args.model)
    theta = _parameter(model, args.theta)
    try:
        weight = None if args.weight is None else np.asarray(json.loads(args.weight), dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid weight matrix: {exc}") from exc
    lin = linearize_at(model, theta)
    try:
        gaussian = GaussianShiftModel.from_linearized(lin, weight)
    except DNullError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"invalid weight matrix: {exc}") from exc
    solution = holevo_bound_gaussian(gaussian, restarts=args.restarts, seed=args.seed)
    content = solution.as_dict()
    content.update({
        "model": model.name,
        "theta": theta.tolist(),
        "fisher": gaussian.fisher.tolist(),
        "qcrb": float(np.trace(gaussian.W @ np.linalg.inv(gaussian.fisher))),
        "achievable": gaussian.achievable,
    })
    json.dump(content, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="dnull", description="Displaced-null measurement experiments")
    parser.add_argument("--verbose", action="store_true")
    subparsers = parser.add_subparsers(dest="command", required=True)

    sim = subparsers.add_parser("simulate", help="Monte Carlo risk over an n grid")
    sim.add_argument("--config", type=str)
    sim.add_argument("--protocol", type=str)
    sim.add_argument("--n", type=int, nargs="+")
    sim.add_argument("--trials", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", type=str)
    sim.add_argument("--format", type=str, choices=["csv", "json"])
    sim.add_argument("--workers", type=int)
    sim.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)
    sim.set_defaults(handler=simulate)

    fish = subparsers.add_parser("fisher", help="Fisher information report")
    fish.add_argument("--model", type=str, required=True)
    fish.add_argument("--theta", type=float, nargs="+")
    fish.add_argument("--basis", type=str, choices=["displaced", "null", "sld"], default="displaced")
    fish.add_argument("--epsilon", type=float, default=settings.EPSILON)
    fish.add_argument("--n", type=int, default=10 ** 4)
    fish.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)
    fish.set_defaults(handler=fisher)

    hol = subparsers.add_parser("holevo", help="Holevo bound of the local Gaussian model")
    hol.add_argument("--model", type=str, required=True)
    hol.add_argument("--weight", type=str)
    hol.add_argument("--theta", type=float, nargs="+")
    hol.add_argument("--restarts", type=int, default=settings.HOLEVO_RESTARTS)
    hol.add_argument("--seed", type=int, default=0)
    hol.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)
    hol.set_defaults(handler=holevo)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except DNullError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
