"""Chain and distribution diagnostics: IAT, thinning, KS tests, HPD calibration."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .core import CategoricalDist, GaussianDist

MIN_CHAIN_LENGTH = 50
SOKAL_WINDOW = 5.0
DEFAULT_ALPHAS = np.round(np.linspace(0.0, 1.0, 21), 10)
HPD_GRID_POINTS = 4096


class ChainTooShortError(ValueError):
    pass


class DegenerateChainError(ValueError):
    """The chain has zero variance, so its autocorrelation is undefined."""


@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float
    n1: int
    n2: int | None

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass(frozen=True)
class CalibrationCurve:
    alphas: np.ndarray
    coverage: np.ndarray

    def mad(self) -> float:
        """Mean absolute deviation from the diagonal over the alpha grid."""
        return float(np.mean(np.abs(self.coverage - self.alphas)))

    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.coverage - self.alphas)))

    def to_dict(self) -> dict:
        return {"alphas": [float(a) for a in self.alphas], "coverage": [float(c) for c in self.coverage]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# Autocorrelation
# ---------------------------------------------------------------------------


def autocorrelation(chain) -> np.ndarray:
    """Normalized autocorrelation function at lags 0..n-1 (FFT, biased estimator)."""
    x = np.asarray(chain, dtype=float).reshape(-1)
    n = x.size
    x = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    if acov[0] <= 0:
        raise DegenerateChainError("chain has zero variance")
    return acov / acov[0]


def integrated_autocorrelation_time(chain, window: float = SOKAL_WINDOW) -> float:
    """Integrated autocorrelation time with Sokal's self-consistent window.

    ``tau(M) = 1 + 2 * sum_{k=1..M} rho(k)``, with ``M`` the smallest lag
    satisfying ``M >= window * tau(M)``. Clamped below at 1.

    Raises
    ------
    ChainTooShortError
        Fewer than 50 samples.
    DegenerateChainError
        Constant chain.
    """
    x = np.asarray(chain, dtype=float).reshape(-1)
    if x.size < MIN_CHAIN_LENGTH:
        raise ChainTooShortError(f"chain too short ({x.size} < {MIN_CHAIN_LENGTH})")
    rho = autocorrelation(x)
    taus = 2.0 * np.cumsum(rho) - 1.0
    lags = np.arange(x.size)
    ok = np.flatnonzero(lags >= window * taus)
    tau = taus[ok[0]] if ok.size else taus[-1]
    return max(1.0, float(tau))


def thin(chain, stride: int) -> np.ndarray:
    return np.asarray(chain)[:: max(1, int(stride))]


def thin_by_iat(chain, iat: float | None = None) -> np.ndarray:
    """Keep every ceil(IAT)-th element; ``iat`` overrides the estimate."""
    if iat is None:
        iat = integrated_autocorrelation_time(chain)
    return thin(chain, math.ceil(iat))


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------


def kolmogorov_sf(lam: float, terms: int = 100) -> float:
    """P(K > lam) for the limiting Kolmogorov distribution."""
    if lam <= 0.2:
        # Series is slow to converge here; the tail probability is 1 to machine precision.
        return 1.0
    k = np.arange(1, terms + 1)
    total = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k * k * lam * lam))
    return float(min(1.0, max(0.0, total)))


def ks_two_sample(a, b) -> KSResult:
    """Two-sample KS test; asymptotic p-value with effective size n1*n2/(n1+n2)."""
    a = np.sort(np.asarray(a, dtype=float).reshape(-1))
    b = np.sort(np.asarray(b, dtype=float).reshape(-1))
    if a.size == 0 or b.size == 0:
        raise ValueError("KS test needs two non-empty samples")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    stat = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = a.size * b.size / (a.size + b.size)
    return KSResult(stat, kolmogorov_sf(math.sqrt(n_eff) * stat), int(a.size), int(b.size))


def ks_one_sample(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> KSResult:
    """KS test of samples against a continuous reference CDF (``n2`` is None)."""
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    if x.size == 0:
        raise ValueError("KS test needs a non-empty sample")
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    stat = float(max(upper.max(), lower.max()))
    return KSResult(stat, kolmogorov_sf(math.sqrt(n) * stat), n, None)


def grid_cdf(logdensity: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, n: int = 20001):
    """CDF of an unnormalized density by cumulative trapezoid on [lo, hi]."""
    grid = np.linspace(lo, hi, n)
    logp = np.asarray(logdensity(grid), dtype=float)
    p = np.exp(logp - logp.max())
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(grid))])
    cum /= cum[-1]
    return lambda x: np.interp(x, grid, cum, left=0.0, right=1.0)


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------


def tv_distance(p, q) -> float:
    """Total variation between two categorical distributions."""
    p = p.probs if isinstance(p, CategoricalDist) else np.asarray(p, dtype=float)
    q = q.probs if isinstance(q, CategoricalDist) else np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p - q).sum())


def binned_tv_distance(samples, cdf: Callable[[np.ndarray], np.ndarray], edges) -> float:
    """TV between the binned empirical law of ``samples`` and a reference CDF.

    The two tails outside ``edges`` count as one bin each.
    """
    samples = np.asarray(samples, dtype=float)
    edges = np.asarray(edges, dtype=float)
    counts = np.histogram(samples, bins=edges)[0]
    below = np.sum(samples < edges[0])
    above = np.sum(samples > edges[-1])
    emp = np.concatenate([[below], counts, [above]]) / samples.size
    c = np.asarray(cdf(edges), dtype=float)
    ref = np.concatenate([[c[0]], np.diff(c), [1.0 - c[-1]]])
    return tv_distance(emp, ref)


# ---------------------------------------------------------------------------
# HPD calibration
# ---------------------------------------------------------------------------


def gaussian_hpd_interval(dist: GaussianDist, alpha: float) -> tuple[float, float]:
    from scipy.special import ndtri

    if alpha <= 0:
        return (dist.mean, dist.mean)
    if alpha >= 1:
        return (-math.inf, math.inf)
    z = float(ndtri(0.5 + alpha / 2.0))
    return (dist.mean - z * dist.sd, dist.mean + z * dist.sd)


def _hpd_threshold(density: np.ndarray, dx: float, alpha: float, tol: float = 1e-4) -> float:
    """Density level whose super-level set holds mass alpha (bisection)."""
    total = density.sum() * dx
    lo, hi = 0.0, float(density.max())
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        mass = density[density >= mid].sum() * dx / total
        if abs(mass - alpha) <= tol:
            return mid
        if mass > alpha:
            lo = mid
        else:
            hi = mid
    return lo


def calibration_curve(target, samples, alphas=DEFAULT_ALPHAS) -> CalibrationCurve:
    """Fraction of samples inside the alpha-HPD region of ``target``, per alpha.

    Parameters
    ----------
    target : GaussianDist, CategoricalDist or callable
        Gaussian targets use the exact interval ``mean +/- z * sd``.
        Categorical targets use the greedy highest-probability class set.
        Any other callable is treated as a 1-D density, evaluated on a grid of
        4096 points spanning the sample range +/- 4 sample sd.
    samples : array
    alphas : array
        Grid in [0, 1]; coverage at 0 and 1 is 0 and 1 by construction.
    """
    samples = np.asarray(samples).reshape(-1)
    alphas = np.asarray(alphas, dtype=float)
    if samples.size == 0:
        raise ValueError("no samples")
    coverage = np.empty(alphas.size)

    if isinstance(target, CategoricalDist):
        order = np.argsort(-target.probs, kind="stable")
        cum = np.cumsum(target.probs[order])
        for i, a in enumerate(alphas):
            if a <= 0:
                coverage[i] = 0.0
                continue
            k = int(np.searchsorted(cum, a - 1e-12) + 1)
            inside = order[: min(k, order.size)] + 1
            coverage[i] = np.isin(samples, inside).mean()
    elif isinstance(target, GaussianDist):
        x = samples.astype(float)
        for i, a in enumerate(alphas):
            lo, hi = gaussian_hpd_interval(target, a)
            coverage[i] = 0.0 if a <= 0 else np.mean((x >= lo) & (x <= hi))
    elif callable(target):
        x = samples.astype(float)
        sd = float(x.std()) or 1.0
        grid = np.linspace(x.min() - 4 * sd, x.max() + 4 * sd, HPD_GRID_POINTS)
        try:
            density = np.asarray(target(grid), dtype=float)
        except Exception as exc:  # noqa: BLE001
            raise ValueError("target density could not be evaluated") from exc
        if density.shape != grid.shape or not np.all(np.isfinite(density)) or density.max() <= 0:
            raise ValueError("target density could not be evaluated on the grid")
        at_samples = np.asarray(target(x), dtype=float)
        dx = grid[1] - grid[0]
        for i, a in enumerate(alphas):
            if a <= 0:
                coverage[i] = 0.0
            elif a >= 1:
                coverage[i] = 1.0
            else:
                coverage[i] = np.mean(at_samples >= _hpd_threshold(density, dx, a))
    else:
        raise ValueError(f"cannot build HPD regions for {type(target).__name__}")

    coverage[alphas <= 0] = 0.0
    coverage[alphas >= 1] = 1.0
    return CalibrationCurve(alphas, np.maximum.accumulate(coverage))


def sign_test_pvalue(successes: int, trials: int) -> float:
    """One-sided P(X >= successes) for X ~ Binomial(trials, 1/2)."""
    return float(sum(math.comb(trials, k) for k in range(successes, trials + 1)) / 2**trials)
