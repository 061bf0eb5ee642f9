"""Naive null-measurement estimator, kept to exhibit its super-standard Bayes risk."""
from __future__ import annotations

import math

import numpy as np

from dnull.common.exceptions import ConfigurationError
from dnull.estimators.displaced import EstimateRecord, empirical_frequencies
from dnull.estimators.posterior import posterior_mean_sign

SIGN_RULES = ("plus", "minus", "posterior_mean")


def estimate_naive_null(theta_tilde, counts, schedule, sign_rule="plus",
                        prelim_count=None, n_prelim=None):
    """|theta - theta_tilde| = arcsin(sqrt(p)) from the null basis at theta_tilde, sign by rule"""
    if sign_rule not in SIGN_RULES:
        raise ConfigurationError(f"unknown sign rule '{sign_rule}', choose from {SIGN_RULES}")
    theta_tilde = float(np.atleast_1d(theta_tilde)[0])
    p_hat = min(max(1.0 - empirical_frequencies(counts)[0], 0.0), 1.0)
    distance = math.asin(math.sqrt(p_hat))
    if sign_rule == "plus":
        sign = 1.0
    elif sign_rule == "minus":
        sign = -1.0
    else:
        if prelim_count is None or n_prelim is None:
            raise ConfigurationError("posterior_mean sign rule needs the preliminary count and size")
        sign = posterior_mean_sign(prelim_count, n_prelim, theta_tilde, distance) if distance else 0.0
    u_hat = math.sqrt(schedule.n) * sign * distance
    return EstimateRecord.from_local(theta_tilde, u_hat, schedule.n, counts)
