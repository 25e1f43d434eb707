"""Small statistics helpers: proportions, batch means, autocorrelation, chi-square."""

import math

import numpy as np
from scipy import stats as _st


def wilson_interval(successes: int, trials: int, z: float = 3.0):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    den = 1 + z * z / trials
    mid = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / max(trials, 1))


def batch_means_stderr(values, n_batches: int = 20) -> float:
    """Standard error of the mean of a correlated series by non-overlapping batches."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2 * n_batches:
        return float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    m = len(v) // n_batches
    means = v[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def integrated_autocorr_time(values, c: float = 5.0, absolute: bool = False) -> float:
    """Integrated autocorrelation time with a self-consistent window
    (smallest ``M >= c * tau(M)``); at least 1, and 1 for a constant series.

    ``absolute=True`` sums ``|rho_k|``, which bounds the decorrelation lag of
    a nearly periodic chain whose alternating correlations cancel in the sum.
    """
    v = np.asarray(values, dtype=float)
    v = v - v.mean()
    n = len(v)
    if n < 2 or not np.any(v):
        return 1.0
    f = np.fft.rfft(v, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n]
    acf /= acf[0]
    tau = 1.0
    for m in range(1, n):
        tau += 2 * (abs(acf[m]) if absolute else acf[m])
        if m >= c * tau:
            break
    return max(tau, 1.0)


def chi_square(observed, expected_probs, min_expected: float = 5.0):
    """Pearson chi-square of counts against probabilities.

    Cells whose expected count falls below ``min_expected`` are pooled into
    one cell.  Returns ``(statistic, dof, p_value)``.
    """
    obs = np.asarray(observed, dtype=float)
    p = np.asarray(expected_probs, dtype=float)
    exp = p / p.sum() * obs.sum()
    small = exp < min_expected
    if small.any():
        obs = np.append(obs[~small], obs[small].sum())
        exp = np.append(exp[~small], exp[small].sum())
        if exp[-1] == 0:
            obs, exp = obs[:-1], exp[:-1]
    if len(obs) < 2:
        return 0.0, 0, 1.0
    res = _st.chisquare(obs, exp)
    return float(res.statistic), len(obs) - 1, float(res.pvalue)
