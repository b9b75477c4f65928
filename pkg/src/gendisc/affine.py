"""Closed-form pieces of the homoskedastic affine model.

Both approaches share ``theta = (beta1, beta0, sigma2)``:

* generative:      y | x ~ N(beta1 * x + beta0, sigma2)
* discriminative:  x | y ~ N(beta1 * y + beta0, sigma2)

Under the independent Gaussian x inverse-gamma prior the two Gibbs conditionals
for theta are conjugate; the approaches differ only in which column plays the
regressor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    AugmentedDataset,
    Approach,
    DegenerateConditionalError,
    GaussianDist,
    InvGammaDist,
    LabelKind,
    LabeledDataset,
    MultiObservationError,
    NIGPrior,
    SeededRng,
)

DET_GUARD = 1e-300


@dataclass(frozen=True)
class AffineDGP:
    slope: float
    intercept: float
    noise_sd: float

    def __post_init__(self):
        if not self.noise_sd > 0:
            raise ValueError(f"noise_sd must be > 0, got {self.noise_sd}")

    def sample(self, xs, rng: SeededRng) -> np.ndarray:
        return simulate_dgp(self, xs, rng)

    def loglik(self, y, x):
        return -0.5 * (
            math.log(2 * math.pi * self.noise_sd**2)
            + (np.asarray(y) - self.slope * np.asarray(x) - self.intercept) ** 2 / self.noise_sd**2
        )


@dataclass(frozen=True)
class AffineTheta:
    beta1: float
    beta0: float
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (float(self.beta1), float(self.beta0), float(self.sigma2))


def simulate_dgp(dgp: AffineDGP, xs, rng: SeededRng) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    eps = rng.gen.standard_normal(xs.shape)
    return dgp.slope * xs + dgp.intercept + dgp.noise_sd * eps


# ---------------------------------------------------------------------------
# Label posteriors
# ---------------------------------------------------------------------------


def _invert(slope: float, intercept: float, noise_var: float, prior: GaussianDist, ys) -> GaussianDist:
    ys = np.asarray(ys, dtype=float).reshape(-1)
    precision = ys.size * slope**2 / noise_var + 1.0 / prior.variance
    weighted = slope * np.sum(ys - intercept) / noise_var + prior.mean / prior.variance
    return GaussianDist(weighted / precision, 1.0 / precision)


def true_posterior(dgp: AffineDGP, prior_x0: GaussianDist, y0: float) -> GaussianDist:
    """Exact label posterior under the (normally unknown) affine DGP."""
    if dgp.slope == 0:
        return prior_x0
    return _invert(dgp.slope, dgp.intercept, dgp.noise_sd**2, prior_x0, [y0])


def gen_x0_posterior(theta: AffineTheta, prior_x0: GaussianDist, y0: float) -> GaussianDist:
    if theta.beta1 == 0:
        return prior_x0
    return _invert(theta.beta1, theta.beta0, theta.sigma2, prior_x0, [y0])


def gen_x0_posterior_multi(theta: AffineTheta, prior_x0: GaussianDist, ys: Sequence[float]) -> GaussianDist:
    """Posterior of one label given N0 observations it generated."""
    ys = np.asarray(ys, dtype=float).reshape(-1)
    if ys.size == 0:
        raise ValueError("no observations")
    if theta.beta1 == 0:
        return prior_x0
    return _invert(theta.beta1, theta.beta0, theta.sigma2, prior_x0, ys)


def disc_x0_posterior(theta: AffineTheta, y0) -> GaussianDist:
    y = np.asarray(y0, dtype=float).reshape(-1)
    if y.size != 1:
        raise MultiObservationError()
    return GaussianDist(theta.beta1 * float(y[0]) + theta.beta0, theta.sigma2)


def unlabeled_posterior(
    theta: AffineTheta, label_prior: GaussianDist, y_j: float, approach: Approach
) -> GaussianDist:
    if Approach.parse(approach) is Approach.GENERATIVE:
        return gen_x0_posterior(theta, label_prior, y_j)
    return disc_x0_posterior(theta, y_j)


def _sample_labels(theta: AffineTheta, prior: GaussianDist, ys: np.ndarray, approach: Approach, rng: SeededRng):
    """Vectorized independent draws of p(x_j | y_j, theta), one per row of ``ys``."""
    ys = np.asarray(ys, dtype=float).reshape(-1)
    z = rng.gen.standard_normal(ys.size)
    if approach is Approach.GENERATIVE:
        b1, b0, s2 = theta.beta1, theta.beta0, theta.sigma2
        precision = b1 * b1 / s2 + 1.0 / prior.variance
        means = (b1 * (ys - b0) / s2 + prior.mean / prior.variance) / precision
        return means + z / math.sqrt(precision)
    return theta.beta1 * ys + theta.beta0 + math.sqrt(theta.sigma2) * z


# ---------------------------------------------------------------------------
# Gibbs conditionals for theta
# ---------------------------------------------------------------------------


def _columns(xs: np.ndarray, ys: np.ndarray, approach: Approach) -> tuple[np.ndarray, np.ndarray]:
    """(regressor, response) for the chosen approach."""
    y = ys[:, 0]
    if approach is Approach.GENERATIVE:
        return xs, y
    return y, xs


def _check_data(data: LabeledDataset | AugmentedDataset) -> None:
    if data.kind is not LabelKind.CONTINUOUS or data.dim != 1:
        raise ValueError("affine model needs continuous labels and scalar observations")


def _inv2(m: np.ndarray) -> np.ndarray:
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    det = a * d - b * c
    if not abs(det) > DET_GUARD:
        raise DegenerateConditionalError(f"2x2 determinant {det!r} below guard")
    return np.array([[d, -b], [-c, a]]) / det


def beta_conditional(
    data: LabeledDataset | AugmentedDataset, sigma2: float, prior: NIGPrior, approach: Approach
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of p(beta | sigma2, D) for ``beta = (beta1, beta0)``."""
    _check_data(data)
    approach = Approach.parse(approach)
    s_mm = s_m = n = s_mr = s_r = 0.0
    for xs, ys in data.parts():
        m, r = _columns(xs, ys, approach)
        s_mm += float(m @ m)
        s_m += float(m.sum())
        s_mr += float(m @ r)
        s_r += float(r.sum())
        n += m.size
    prior_prec = _inv2(prior.beta_cov)
    precision = np.array([[s_mm, s_m], [s_m, n]]) / sigma2 + prior_prec
    cov = _inv2(precision)
    cov = 0.5 * (cov + cov.T)
    mean = cov @ (np.array([s_mr, s_r]) / sigma2 + prior_prec @ prior.beta_mean)
    return mean, cov


def _chol2(cov: np.ndarray) -> np.ndarray:
    a = cov[0, 0]
    if not a > 0:
        raise DegenerateConditionalError("non-positive conditional variance")
    l11 = math.sqrt(a)
    l21 = cov[1, 0] / l11
    rest = cov[1, 1] - l21 * l21
    if not rest > 0:
        raise DegenerateConditionalError("conditional covariance not positive definite")
    return np.array([[l11, 0.0], [l21, math.sqrt(rest)]])


def sample_beta(
    data: LabeledDataset | AugmentedDataset,
    sigma2: float,
    prior: NIGPrior,
    approach: Approach,
    rng: SeededRng,
) -> np.ndarray:
    """One draw of ``(beta1, beta0)`` from its Gaussian full conditional."""
    mean, cov = beta_conditional(data, sigma2, prior, approach)
    return mean + _chol2(cov) @ rng.gen.standard_normal(2)


def residual_sum_of_squares(data, beta, approach: Approach) -> float:
    approach = Approach.parse(approach)
    b1, b0 = float(beta[0]), float(beta[1])
    total = 0.0
    for xs, ys in data.parts():
        m, r = _columns(xs, ys, approach)
        res = r - b1 * m - b0
        total += float(res @ res)
    return total


def sigma2_conditional(
    data: LabeledDataset | AugmentedDataset, beta, prior: NIGPrior, approach: Approach
) -> InvGammaDist:
    _check_data(data)
    rss = residual_sum_of_squares(data, beta, approach)
    return InvGammaDist(prior.shape + len(data) / 2.0, prior.scale + rss / 2.0)


def sample_sigma2(
    data: LabeledDataset | AugmentedDataset,
    beta,
    prior: NIGPrior,
    approach: Approach,
    rng: SeededRng,
) -> float:
    post = sigma2_conditional(data, beta, prior, approach)
    return float(post.scale / rng.gen.gamma(post.shape, 1.0))


# ---------------------------------------------------------------------------
# Gibbs engine adapter
# ---------------------------------------------------------------------------


class AffineModel:
    """Affine homoskedastic model plugged into the generic Gibbs engine.

    ``initial_theta`` draws sigma2 from its prior and beta from
    p(beta | sigma2, D), and each theta update samples sigma2 given the
    previous beta and then beta given the new sigma2, both on the augmented set.
    """

    label_kind = LabelKind.CONTINUOUS
    theta_names = ("beta1", "beta0", "sigma2")

    def __init__(self, approach: Approach | str, prior: NIGPrior | None = None):
        self.approach = Approach.parse(approach)
        self.prior = prior if prior is not None else NIGPrior()

    def __repr__(self) -> str:
        return f"AffineModel({self.approach.value})"

    def initial_theta(self, labeled: LabeledDataset, rng: SeededRng) -> AffineTheta:
        sigma2 = float(self.prior.sigma2_prior.sample(rng))
        beta = sample_beta(labeled, sigma2, self.prior, self.approach, rng)
        return AffineTheta(float(beta[0]), float(beta[1]), sigma2)

    def sample_label_given_theta(self, theta: AffineTheta, prior: GaussianDist, observations, rng: SeededRng) -> float:
        obs = np.asarray(observations, dtype=float).reshape(-1)
        if self.approach is Approach.GENERATIVE:
            post = gen_x0_posterior_multi(theta, prior, obs)
        else:
            post = disc_x0_posterior(theta, obs)
        return float(post.mean + post.sd * rng.gen.standard_normal())

    def sample_labels_given_theta(self, theta: AffineTheta, prior: GaussianDist, observations, rng: SeededRng):
        return _sample_labels(theta, prior, observations, self.approach, rng)

    def sample_theta_given_data(self, theta: AffineTheta, data, rng: SeededRng) -> AffineTheta:
        beta_prev = (theta.beta1, theta.beta0)
        sigma2 = sample_sigma2(data, beta_prev, self.prior, self.approach, rng)
        beta = sample_beta(data, sigma2, self.prior, self.approach, rng)
        return AffineTheta(float(beta[0]), float(beta[1]), sigma2)

    def theta_vector(self, theta: AffineTheta) -> tuple[float, ...]:
        return theta.as_tuple()


def theta_draws(model: AffineModel, labeled: LabeledDataset, n: int, rng: SeededRng, burn_in: int = 200) -> np.ndarray:
    """Gibbs draws from p(theta | D) alone, as an (n, 3) array."""
    theta = model.initial_theta(labeled, rng)
    for _ in range(burn_in):
        theta = model.sample_theta_given_data(theta, labeled, rng)
    out = np.empty((n, 3))
    for i in range(n):
        theta = model.sample_theta_given_data(theta, labeled, rng)
        out[i] = theta.as_tuple()
    return out


class GenerativeAffinePredictor:
    """Samples the generative ppd for a fresh observation given draws of p(theta | D).

    The ppd is prior x marginal likelihood averaged over p(theta | D); given a
    pool of theta draws it is a mixture whose component weights are the
    per-theta evidences N(y; b1*mu + b0, b1^2 * var + s2).
    """

    def __init__(self, thetas: np.ndarray, prior_x0: GaussianDist, chunk: int = 512):
        self.thetas = np.asarray(thetas, dtype=float)
        self.prior = prior_x0
        self.chunk = chunk

    def __call__(self, ys, rng: SeededRng) -> np.ndarray:
        ys = np.asarray(ys, dtype=float).reshape(-1)
        b1, b0, s2 = self.thetas.T
        mu, v = self.prior.mean, self.prior.variance
        ev_mean = b1 * mu + b0
        ev_var = b1 * b1 * v + s2
        out = np.empty(ys.size)
        for start in range(0, ys.size, self.chunk):
            y = ys[start : start + self.chunk, None]
            logw = -0.5 * (np.log(ev_var) + (y - ev_mean) ** 2 / ev_var)
            logw -= logw.max(axis=1, keepdims=True)
            w = np.exp(logw)
            cum = np.cumsum(w, axis=1)
            u = rng.gen.random(y.shape[0]) * cum[:, -1]
            idx = np.minimum((cum < u[:, None]).sum(axis=1), len(self.thetas) - 1)
            tb1, tb0, ts2 = b1[idx], b0[idx], s2[idx]
            precision = tb1 * tb1 / ts2 + 1.0 / v
            means = (tb1 * (y[:, 0] - tb0) / ts2 + mu / v) / precision
            out[start : start + y.shape[0]] = means + rng.gen.standard_normal(y.shape[0]) / np.sqrt(precision)
        return out


class DiscriminativeAffinePredictor:
    """Samples the discriminative ppd: theta ~ p(theta | D), then x ~ N(b1*y + b0, s2)."""

    def __init__(self, thetas: np.ndarray):
        self.thetas = np.asarray(thetas, dtype=float)

    def __call__(self, ys, rng: SeededRng) -> np.ndarray:
        ys = np.asarray(ys, dtype=float).reshape(-1)
        idx = rng.gen.integers(0, len(self.thetas), size=ys.size)
        b1, b0, s2 = self.thetas[idx].T
        return b1 * ys + b0 + np.sqrt(s2) * rng.gen.standard_normal(ys.size)
