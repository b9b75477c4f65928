"""Independent numerical oracles used by the tests (no package code involved)."""

import numpy as np


def quad_moments(logdensity, lo, hi, n=200001):
    """Mean and variance of an unnormalized 1-D density by trapezoid quadrature.

    A first pass on [lo, hi] locates the mass; a second pass refines on
    mean +/- 15 sd.
    """
    for _ in range(2):
        x = np.linspace(lo, hi, n)
        lp = logdensity(x)
        w = np.exp(lp - lp.max())
        z = np.trapezoid(w, x)
        mean = np.trapezoid(x * w, x) / z
        var = np.trapezoid((x - mean) ** 2 * w, x) / z
        sd = np.sqrt(var)
        lo, hi = mean - 15 * sd, mean + 15 * sd
    return mean, var


def normal_logpdf(x, mean, var):
    return -0.5 * (np.log(2 * np.pi * var) + (x - mean) ** 2 / var)


def kolmogorov_cdf_bruteforce(lam, terms=10000):
    k = np.arange(1, terms + 1)
    return 1 - 2 * np.sum((-1.0) ** (k - 1) * np.exp(-2 * k * k * lam * lam))


def quad_cdf(logdensity, lo, hi, n=200001):
    """CDF of an unnormalized 1-D density by cumulative trapezoid, linear between nodes."""
    x = np.linspace(lo, hi, n)
    lp = logdensity(x)
    w = np.exp(lp - lp.max())
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(x))])
    cum /= cum[-1]
    return lambda t: np.interp(t, x, cum)
