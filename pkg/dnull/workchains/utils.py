"""Seeding, losses and risk statistics shared by the experiment driver."""
import math

import numpy as np
from scipy import stats

from dnull.db.tables import RiskRow, ScalingFit


def trial_rng(seed, n, trial_index):
    """Generator for one trial, independent of how trials are scheduled"""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(n), int(trial_index)]))


def squared_error(theta_hat, theta):
    diff = np.atleast_1d(theta_hat) - np.atleast_1d(theta)
    return float(diff @ diff)


def weighted_quadratic(theta_hat, theta, weight):
    diff = np.atleast_1d(theta_hat) - np.atleast_1d(theta)
    return float(diff @ np.asarray(weight, dtype=float) @ diff)


def ks_normality(errors, covariances):
    """KS statistic of errors whitened by the given limit covariances, pooled over coordinates"""
    pooled = []
    for error, cov in zip(errors, covariances):
        root = np.linalg.cholesky(np.atleast_2d(cov))
        pooled.append(np.linalg.solve(root, np.atleast_1d(error)))
    return float(stats.kstest(np.concatenate(pooled), 'norm').statistic)


def prior_ks(model, draws, seed=0):
    """KS statistic of uniform prior draws against the uniform CDF, per coordinate (max)"""
    rng = np.random.default_rng(seed)
    samples = np.array([model.sample_uniform(rng) for _ in range(int(draws))])
    width = model.upper - model.lower
    return max(float(stats.kstest(samples[:, j], 'uniform', args=(model.lower[j], width[j])).statistic)
               for j in range(model.param_dim))


def _mean(values):
    return math.fsum(values) / len(values)


def summarize(n, results, loss_name):
    """Aggregate trial results for one sample size into a RiskRow"""
    losses = [r.loss for r in results]
    trials = len(losses)
    risk = _mean(losses)
    if trials > 1:
        std = math.sqrt(math.fsum((x - risk) ** 2 for x in losses) / (trials - 1))
    else:
        std = 0.0
    errors = np.array([r.error for r in results])
    if any(r.limit_covariance is None for r in results):
        ks_stat, limit = float('nan'), None
    else:
        ks_stat = ks_normality(errors, [r.limit_covariance for r in results])
        limit = np.mean([np.atleast_2d(r.limit_covariance) for r in results], axis=0).tolist()
    covariance = (np.atleast_2d(np.cov(errors.T, ddof=1)).tolist() if trials > 1
                  else np.zeros((errors.shape[1], errors.shape[1])).tolist())
    extras = {key: _mean([r.extras[key] for r in results]) for key in results[0].extras}
    return RiskRow(
        n=int(n),
        trials=trials,
        loss_name=loss_name,
        risk=risk,
        stderr=std / math.sqrt(trials),
        n_risk=n * risk,
        ks_stat=ks_stat,
        oob_rate=_mean([0.0 if r.in_confidence else 1.0 for r in results]),
        covariance=covariance,
        limit_covariance=limit,
        extras=extras,
    )


def scaling_fit(rows, confidence=0.95):
    """Least squares of log(risk) on log(n) with a t-interval on the slope"""
    if len(rows) < 3:
        raise ValueError(f"scaling fit needs at least 3 sample sizes, got {len(rows)}")
    log_n = np.log([row.n for row in rows])
    log_risk = np.log([row.risk for row in rows])
    fit = stats.linregress(log_n, log_risk)
    half_width = stats.t.ppf(0.5 + confidence / 2, len(rows) - 2) * fit.stderr
    return ScalingFit(slope=float(fit.slope), intercept=float(fit.intercept),
                      slope_low=float(fit.slope - half_width), slope_high=float(fit.slope + half_width),
                      confidence=confidence)
