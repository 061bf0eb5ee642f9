"""Posterior of the qubit angle after the sigma_x preliminary stage (uniform prior)."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

LOWER = -math.pi / 8
UPPER = math.pi / 8


def _log_kernel(k, n_prelim, theta):
    shifted = np.asarray(theta, dtype=float) - math.pi / 4
    with np.errstate(divide='ignore'):
        log_sin = np.log(np.abs(np.sin(shifted)))
        log_cos = np.log(np.cos(shifted))
    first = 2 * k * log_sin if k > 0 else 0.0
    second = 2 * (n_prelim - k) * log_cos if n_prelim > k else 0.0
    return first + second


def posterior_mode(k, n_prelim):
    """Mode pi/4 - arcsin(sqrt(k/n)) clamped to the domain"""
    return float(np.clip(math.pi / 4 - math.asin(math.sqrt(k / n_prelim)), LOWER, UPPER))


@lru_cache(maxsize=4096)
def _normalizer(k, n_prelim):
    """(log of the kernel at the mode, integral of the rescaled kernel)"""
    mode = posterior_mode(k, n_prelim)
    peak = float(_log_kernel(k, n_prelim, mode))
    width = 1.0 / math.sqrt(max(n_prelim, 1))
    points = sorted({mode + s * width for s in (-8, -2, 0, 2, 8)
                     if LOWER < mode + s * width < UPPER})
    integral, _ = integrate.quad(lambda t: math.exp(_log_kernel(k, n_prelim, t) - peak),
                                 LOWER, UPPER, points=points or None, limit=500,
                                 epsabs=0.0, epsrel=1e-10)
    return peak, integral


def posterior_density(k, n_prelim, theta):
    """Posterior density of theta given k outcomes '1' out of n_prelim sigma_x shots"""
    if not 0 <= k <= n_prelim:
        raise ValueError(f"count {k} outside [0, {n_prelim}]")
    peak, integral = _normalizer(int(k), int(n_prelim))
    theta = np.asarray(theta, dtype=float)
    inside = (theta > LOWER) & (theta < UPPER)
    density = np.where(inside, np.exp(_log_kernel(k, n_prelim, theta) - peak) / integral, 0.0)
    return float(density) if density.ndim == 0 else density


def posterior_mean_sign(k, n_prelim, theta_tilde, distance):
    """Posterior weight of theta_tilde + distance against theta_tilde - distance"""
    plus = posterior_density(k, n_prelim, theta_tilde + distance)
    minus = posterior_density(k, n_prelim, theta_tilde - distance)
    total = plus + minus
    if total == 0:
        return 0.0
    return (plus - minus) / total


def posterior_two_sided_mass(k, n_prelim, tau, center=None):
    """Integral over r >= tau of min(pi(c + r), pi(c - r)), c the preliminary estimate"""
    center = posterior_mode(k, n_prelim) if center is None else center
    upper = max(UPPER - center, center - LOWER)
    if tau >= upper:
        return 0.0
    width = 1.0 / math.sqrt(max(n_prelim, 1))
    points = [r for r in (tau + width, tau + 4 * width) if r < upper]
    value, _ = integrate.quad(
        lambda r: min(posterior_density(k, n_prelim, center + r),
                      posterior_density(k, n_prelim, center - r)),
        tau, upper, points=points or None, limit=500)
    return value
