"""Three-class planar classification testbed.

Observations are 2-D with class-conditional law ``N(r * (cos(2 pi c/3),
sin(2 pi c/3)), I)``. Two models are provided:

* discriminative: multinomial logistic regression sampled with random-walk
  Metropolis-Hastings under an isotropic Gaussian prior;
* generative: Gaussian classes with identity covariance and a conjugate
  Gaussian prior on each class mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.optimize import minimize

from .core import (
    Approach,
    AugmentedDataset,
    CategoricalDist,
    LabelKind,
    LabeledDataset,
    MultiObservationError,
    SeededRng,
    normalize_log_weights,
    sample_categorical_rows,
)

NUM_CLASSES = 3
DEFAULT_PRIOR_SD = 10.0
DEFAULT_PROPOSAL_SD = 0.05
TARGET_ACCEPTANCE = 0.3


@dataclass(frozen=True)
class RadialGaussianDGP:
    radius: float
    num_classes: int = NUM_CLASSES

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be >= 0")
        if self.num_classes < 2:
            raise ValueError("need at least two classes")

    def class_means(self) -> np.ndarray:
        c = np.arange(1, self.num_classes + 1)
        angle = 2 * np.pi * c / self.num_classes
        return self.radius * np.column_stack([np.cos(angle), np.sin(angle)])

    def sample(self, xs, rng: SeededRng) -> np.ndarray:
        xs = np.asarray(xs, dtype=int).reshape(-1)
        return self.class_means()[xs - 1] + rng.gen.standard_normal((xs.size, 2))


def simulate_class_data(dgp: RadialGaussianDGP, class_dist: CategoricalDist, n: int, rng: SeededRng) -> LabeledDataset:
    if n < 0:
        raise ValueError("n must be >= 0")
    if class_dist.num_classes != dgp.num_classes:
        raise ValueError("class distribution and DGP disagree on the number of classes")
    xs = class_dist.sample(rng, size=n)
    ys = dgp.sample(xs, rng)
    return LabeledDataset(xs, ys.reshape(n, 2), LabelKind.CATEGORICAL)


# ---------------------------------------------------------------------------
# Multinomial logistic model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogisticTheta:
    """Per-class weight vectors (C, 2) and biases (C,)."""

    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1, 2)
        b = np.array(self.biases, dtype=float).reshape(-1)
        if w.shape[0] != b.size:
            raise ValueError("one bias per class weight vector")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def num_classes(self) -> int:
        return int(self.biases.size)

    @property
    def vector(self) -> np.ndarray:
        return np.column_stack([self.weights, self.biases]).reshape(-1)

    @classmethod
    def from_vector(cls, vec) -> "LogisticTheta":
        blocks = np.asarray(vec, dtype=float).reshape(-1, 3)
        return cls(blocks[:, :2], blocks[:, 2])

    @classmethod
    def zeros(cls, num_classes: int = NUM_CLASSES) -> "LogisticTheta":
        return cls(np.zeros((num_classes, 2)), np.zeros(num_classes))


def _row_logsumexp(a: np.ndarray) -> np.ndarray:
    m = a.max(axis=1)
    return m + np.log(np.exp(a - m[:, None]).sum(axis=1))


def _logits(vec: np.ndarray, ys: np.ndarray) -> np.ndarray:
    blocks = vec.reshape(-1, 3)
    return ys @ blocks[:, :2].T + blocks[:, 2]


def logistic_log_probs(theta: LogisticTheta, ys) -> np.ndarray:
    """(n, C) log class probabilities."""
    ys = np.asarray(ys, dtype=float).reshape(-1, 2)
    logits = _logits(theta.vector, ys)
    return logits - _row_logsumexp(logits)[:, None]


def logistic_probs(theta: LogisticTheta, y) -> CategoricalDist:
    return CategoricalDist(np.exp(logistic_log_probs(theta, np.reshape(y, (1, 2)))[0]))


def _parts(data) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    if isinstance(data, (LabeledDataset, AugmentedDataset)):
        yield from data.parts()
    else:
        yield from data


def logistic_log_posterior(vec, data, prior_sd: float) -> float:
    """Unnormalized log p(theta | D) for a flat parameter vector."""
    vec = np.asarray(vec, dtype=float)
    total = -0.5 * float(vec @ vec) / prior_sd**2
    for xs, ys in _parts(data):
        logits = _logits(vec, ys)
        total += float(logits[np.arange(xs.size), xs - 1].sum() - _row_logsumexp(logits).sum())
    return total


def _neg_log_posterior_and_grad(vec, xs, ys, prior_sd):
    logits = _logits(vec, ys)
    lse = _row_logsumexp(logits)
    value = -(logits[np.arange(xs.size), xs - 1].sum() - lse.sum()) + 0.5 * vec @ vec / prior_sd**2
    resid = np.exp(logits - lse[:, None])
    resid[np.arange(xs.size), xs - 1] -= 1.0
    design = np.column_stack([ys, np.ones(xs.size)])
    grad = (resid.T @ design).reshape(-1) + vec / prior_sd**2
    return value, grad


def logistic_map(labeled: LabeledDataset, prior_sd: float = DEFAULT_PRIOR_SD, num_classes: int = NUM_CLASSES) -> np.ndarray:
    """Maximum a posteriori parameter vector (used to start chains)."""
    x0 = np.zeros(num_classes * 3)
    if len(labeled) == 0:
        return x0
    res = minimize(
        _neg_log_posterior_and_grad,
        x0,
        args=(labeled.xs, labeled.ys, prior_sd),
        jac=True,
        method="L-BFGS-B",
    )
    return res.x


def mh_log_accept_ratio(current, proposal, data, prior_sd: float) -> float:
    """log of the MH acceptance ratio for a symmetric proposal."""
    return logistic_log_posterior(proposal, data, prior_sd) - logistic_log_posterior(current, data, prior_sd)


@dataclass(frozen=True)
class MHConfig:
    """Random-walk Metropolis-Hastings settings.

    ``proposal_sd`` is the starting scale; a discarded pilot phase of
    ``pilot_steps`` rescales it towards 30% acceptance, after which it is
    frozen. Set ``pilot_steps=0`` to sample with ``proposal_sd`` as given.
    """

    steps: int = 5000
    proposal_sd: float = DEFAULT_PROPOSAL_SD
    seed: int = 0
    stream: int = 0
    burn_in: int = 0
    thin: int = 1
    pilot_steps: int = 1000
    start: str = "map"

    def __post_init__(self):
        if not self.proposal_sd > 0:
            raise ValueError("proposal_sd must be > 0")
        if self.steps < 1 or self.thin < 1 or self.burn_in < 0 or self.pilot_steps < 0:
            raise ValueError("invalid MH chain lengths")
        if self.burn_in >= self.steps:
            raise ValueError("burn_in must be < steps")
        if self.start not in ("map", "zero"):
            raise ValueError("start must be 'map' or 'zero'")


@dataclass
class MHChain:
    thetas: np.ndarray  # (n, 3C) flat parameter vectors
    acceptance_rate: float
    proposal_sd: float

    def __len__(self) -> int:
        return int(self.thetas.shape[0])

    def __iter__(self) -> Iterator[LogisticTheta]:
        for vec in self.thetas:
            yield LogisticTheta.from_vector(vec)


def _rw_metropolis(vec, logp, data, prior_sd, sd, n_steps, rng: SeededRng, keep: Callable | None = None):
    d = vec.size
    steps = rng.gen.standard_normal((n_steps, d)) * sd
    log_u = np.log(rng.gen.random(n_steps))
    accepted = 0
    for i in range(n_steps):
        prop = vec + steps[i]
        logp_prop = logistic_log_posterior(prop, data, prior_sd)
        if log_u[i] < logp_prop - logp:
            vec, logp = prop, logp_prop
            accepted += 1
        if keep is not None:
            keep(i, vec)
    return vec, logp, accepted


def tune_proposal_sd(vec, data, prior_sd, start_sd, n_steps, rng: SeededRng, batches: int = 10):
    """Pilot phase: rescale the proposal towards the target acceptance rate."""
    sd = start_sd
    logp = logistic_log_posterior(vec, data, prior_sd)
    if n_steps <= 0:
        return vec, sd
    per = max(1, n_steps // batches)
    for _ in range(batches):
        vec, logp, acc = _rw_metropolis(vec, logp, data, prior_sd, sd, per, rng)
        sd *= math.exp(3.0 * (acc / per - TARGET_ACCEPTANCE))
    return vec, sd


def mh_sample_theta(labeled: LabeledDataset, prior_sd: float = DEFAULT_PRIOR_SD, cfg: MHConfig | None = None,
                    num_classes: int = NUM_CLASSES) -> MHChain:
    """Random-walk MH targeting p(theta | D) for the logistic classifier.

    The prior is an independent ``N(0, prior_sd^2)`` on every coordinate, so an
    empty dataset yields draws from the prior.
    """
    cfg = cfg or MHConfig()
    if labeled.kind is not LabelKind.CATEGORICAL or (len(labeled) and labeled.dim != 2):
        raise ValueError("logistic model needs categorical labels and 2-D observations")
    rng = SeededRng(cfg.seed, cfg.stream)
    vec = logistic_map(labeled, prior_sd, num_classes) if cfg.start == "map" else np.zeros(num_classes * 3)
    vec, sd = tune_proposal_sd(vec, labeled, prior_sd, cfg.proposal_sd, cfg.pilot_steps, rng)
    n_keep = len(range(cfg.burn_in, cfg.steps, cfg.thin))
    out = np.empty((n_keep, vec.size))
    counter = [0]

    def keep(i, v):
        if i >= cfg.burn_in and (i - cfg.burn_in) % cfg.thin == 0:
            out[counter[0]] = v
            counter[0] += 1

    logp = logistic_log_posterior(vec, labeled, prior_sd)
    _, _, accepted = _rw_metropolis(vec, logp, labeled, prior_sd, sd, cfg.steps, rng, keep)
    return MHChain(out, accepted / cfg.steps, sd)


class LogisticModel:
    """Discriminative classifier for the Gibbs engine; theta moves by a few MH steps."""

    approach = Approach.DISCRIMINATIVE
    label_kind = LabelKind.CATEGORICAL

    def __init__(self, num_classes: int = NUM_CLASSES, prior_sd: float = DEFAULT_PRIOR_SD,
                 proposal_sd: float = DEFAULT_PROPOSAL_SD, mh_steps: int = 5):
        if not proposal_sd > 0:
            raise ValueError("proposal_sd must be > 0")
        self.num_classes = num_classes
        self.prior_sd = prior_sd
        self.proposal_sd = proposal_sd
        self.mh_steps = mh_steps
        self.theta_names = tuple(f"{name}_{c}" for c in range(1, num_classes + 1) for name in ("w1", "w2", "b"))

    def __repr__(self) -> str:
        return "LogisticModel()"

    def initial_theta(self, labeled, rng: SeededRng) -> LogisticTheta:
        return LogisticTheta.from_vector(logistic_map(labeled, self.prior_sd, self.num_classes))

    def sample_label_given_theta(self, theta: LogisticTheta, prior, observations, rng: SeededRng) -> int:
        obs = np.asarray(observations, dtype=float).reshape(-1, 2)
        if obs.shape[0] != 1:
            raise MultiObservationError()
        return int(self.sample_labels_given_theta(theta, prior, obs, rng)[0])

    def sample_labels_given_theta(self, theta: LogisticTheta, prior, observations, rng: SeededRng) -> np.ndarray:
        return sample_categorical_rows(np.exp(logistic_log_probs(theta, observations)), rng)

    def sample_theta_given_data(self, theta: LogisticTheta, data, rng: SeededRng) -> LogisticTheta:
        vec = theta.vector
        logp = logistic_log_posterior(vec, data, self.prior_sd)
        vec, _, _ = _rw_metropolis(vec, logp, data, self.prior_sd, self.proposal_sd, self.mh_steps, rng)
        return LogisticTheta.from_vector(vec)

    def theta_vector(self, theta: LogisticTheta):
        return tuple(theta.vector)


# ---------------------------------------------------------------------------
# Gaussian-class generative model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussClassTheta:
    means: np.ndarray  # (C, 2)

    def __post_init__(self):
        m = np.array(self.means, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(m)):
            raise ValueError("class means must be finite")
        object.__setattr__(self, "means", m)

    @property
    def num_classes(self) -> int:
        return int(self.means.shape[0])


def class_sufficient_stats(data, num_classes: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-class counts (C,) and observation sums (C, 2) over all parts."""
    counts = np.zeros(num_classes)
    sums = np.zeros((num_classes, 2))
    for xs, ys in _parts(data):
        idx = np.asarray(xs, dtype=int) - 1
        counts += np.bincount(idx, minlength=num_classes)[:num_classes]
        for j in range(2):
            sums[:, j] += np.bincount(idx, weights=ys[:, j], minlength=num_classes)[:num_classes]
    return counts, sums


def class_mean_posterior(data, prior_mean_sd: float, num_classes: int = NUM_CLASSES) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means (C, 2) and isotropic variances (C,) of the class means."""
    counts, sums = class_sufficient_stats(data, num_classes)
    precision = counts + 1.0 / prior_mean_sd**2
    return sums / precision[:, None], 1.0 / precision


def gauss_class_posterior_means(data, prior_mean_sd: float, rng: SeededRng, num_classes: int = NUM_CLASSES) -> GaussClassTheta:
    """Draw every class mean from its conjugate Gaussian conditional."""
    mean, var = class_mean_posterior(data, prior_mean_sd, num_classes)
    return GaussClassTheta(mean + np.sqrt(var)[:, None] * rng.gen.standard_normal(mean.shape))


def gauss_class_log_likelihood(theta: GaussClassTheta, ys) -> np.ndarray:
    """(n, C) log N(y_n; mu_c, I)."""
    ys = np.asarray(ys, dtype=float).reshape(-1, 2)
    diff = ys[:, None, :] - theta.means[None, :, :]
    return -0.5 * np.sum(diff * diff, axis=2) - math.log(2 * math.pi)


def gauss_class_label_probs(theta: GaussClassTheta, label_prior: CategoricalDist, ys) -> np.ndarray:
    with np.errstate(divide="ignore"):
        log_prior = np.log(label_prior.probs)
    return normalize_log_weights(gauss_class_log_likelihood(theta, ys) + log_prior, axis=1)


def gauss_class_label_posterior(theta: GaussClassTheta, label_prior: CategoricalDist, y) -> CategoricalDist:
    return CategoricalDist(gauss_class_label_probs(theta, label_prior, np.reshape(y, (1, 2)))[0])


class GaussClassModel:
    """Generative classifier for the Gibbs engine (conjugate mean updates)."""

    approach = Approach.GENERATIVE
    label_kind = LabelKind.CATEGORICAL

    def __init__(self, num_classes: int = NUM_CLASSES, prior_mean_sd: float = 10.0):
        self.num_classes = num_classes
        self.prior_mean_sd = prior_mean_sd
        self.theta_names = tuple(f"mu{c}_{j}" for c in range(1, num_classes + 1) for j in (1, 2))

    def __repr__(self) -> str:
        return "GaussClassModel()"

    def initial_theta(self, labeled, rng: SeededRng) -> GaussClassTheta:
        return gauss_class_posterior_means(labeled, self.prior_mean_sd, rng, self.num_classes)

    def sample_label_given_theta(self, theta: GaussClassTheta, prior: CategoricalDist, observations, rng: SeededRng) -> int:
        obs = np.asarray(observations, dtype=float).reshape(-1, 2)
        with np.errstate(divide="ignore"):
            logw = gauss_class_log_likelihood(theta, obs).sum(axis=0) + np.log(prior.probs)
        return int(sample_categorical_rows(normalize_log_weights(logw)[None, :], rng)[0])

    def sample_labels_given_theta(self, theta: GaussClassTheta, prior: CategoricalDist, observations, rng: SeededRng):
        return sample_categorical_rows(gauss_class_label_probs(theta, prior, observations), rng)

    def sample_theta_given_data(self, theta, data, rng: SeededRng) -> GaussClassTheta:
        return gauss_class_posterior_means(data, self.prior_mean_sd, rng, self.num_classes)

    def theta_vector(self, theta: GaussClassTheta):
        return tuple(theta.means.reshape(-1))


# ---------------------------------------------------------------------------
# Posterior predictive samplers and the implicit prior
# ---------------------------------------------------------------------------


class DiscriminativeClassifierPredictor:
    """x ~ Categorical(Pr_theta(X | y)) with theta drawn from an MH chain."""

    def __init__(self, chain: MHChain | np.ndarray):
        self.thetas = chain.thetas if isinstance(chain, MHChain) else np.asarray(chain, dtype=float)

    def probs(self, ys, rng: SeededRng) -> np.ndarray:
        ys = np.asarray(ys, dtype=float).reshape(-1, 2)
        idx = rng.gen.integers(0, len(self.thetas), size=ys.shape[0])
        blocks = self.thetas[idx].reshape(ys.shape[0], -1, 3)
        logits = np.einsum("nj,ncj->nc", ys, blocks[:, :, :2]) + blocks[:, :, 2]
        return normalize_log_weights(logits, axis=1)

    def __call__(self, ys, rng: SeededRng) -> np.ndarray:
        return sample_categorical_rows(self.probs(ys, rng), rng)


class GenerativeClassifierPredictor:
    """Exact generative ppd: prior x class-mean-marginalized likelihood.

    With mu_c | D ~ N(m_c, v_c I) the marginal likelihood is N(y; m_c, (1 + v_c) I).
    """

    def __init__(self, labeled: LabeledDataset, label_prior: CategoricalDist, prior_mean_sd: float = 10.0):
        self.label_prior = label_prior
        self.means, self.vars = class_mean_posterior(labeled, prior_mean_sd, label_prior.num_classes)

    def probs(self, ys) -> np.ndarray:
        ys = np.asarray(ys, dtype=float).reshape(-1, 2)
        s2 = 1.0 + self.vars
        diff = ys[:, None, :] - self.means[None, :, :]
        with np.errstate(divide="ignore"):
            logw = -0.5 * np.sum(diff * diff, axis=2) / s2 - np.log(s2) + np.log(self.label_prior.probs)
        return normalize_log_weights(logw, axis=1)

    def __call__(self, ys, rng: SeededRng) -> np.ndarray:
        return sample_categorical_rows(self.probs(ys), rng)


def estimate_implicit_prior(predictor, dgp, prior_x0, n_outer: int, rng: SeededRng) -> np.ndarray:
    """Monte Carlo draws from p(x0 | D) by the two-step scheme.

    Draw ``x ~ prior_x0`` and ``y ~ DGP(. | x)``, then ``x0`` from the
    predictor's posterior predictive at ``y``. The returned samples estimate
    the x0-marginal the predictor implicitly uses as its prior. Requires the
    DGP itself, which is only available in synthetic studies.

    Parameters
    ----------
    predictor : callable
        ``predictor(ys, rng) -> x0 samples``, one per observation.
    dgp : AffineDGP or RadialGaussianDGP
        Anything with ``sample(xs, rng)``.
    prior_x0 : GaussianDist or CategoricalDist
    n_outer : int
    rng : SeededRng
    """
    xs = prior_x0.sample(rng, size=n_outer)
    ys = dgp.sample(xs, rng)
    return np.asarray(predictor(ys, rng))


def predict_mode(label_samples: np.ndarray, num_classes: int = NUM_CLASSES) -> np.ndarray:
    """Most frequent sampled class per column of an (n_samples, n_targets) array."""
    counts = np.stack([(label_samples == c).sum(axis=0) for c in range(1, num_classes + 1)])
    return counts.argmax(axis=0) + 1
