"""Gibbs sampling from the posterior predictive, supervised or semi-supervised.

Each step alternates between the labels and the model parameters:

1. ``x0 ~ p(x0 | y0, theta)`` (a bundle of repeated observations is allowed
   for generative models),
2. ``x~_j ~ p(x~_j | y~_j, theta)`` for every unlabeled observation,
3. ``theta ~ p(theta | D+)`` where ``D+`` is ``D`` plus the pairs just imputed.

The engine is agnostic to the model; anything implementing
:class:`ConditionalModel` can be plugged in.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Iterator, Protocol, Sequence

import numpy as np

from .core import (
    Approach,
    CategoricalDist,
    DegenerateConditionalError,
    GaussianDist,
    LabelKind,
    LabeledDataset,
    MultiObservationError,
    SeededRng,
    UnlabeledSet,
    as_observation_bundle,
    prior_kind,
)

log = logging.getLogger(__name__)


class ConditionalModel(Protocol):
    approach: Approach
    label_kind: LabelKind
    theta_names: Sequence[str]

    def initial_theta(self, labeled: LabeledDataset, rng: SeededRng) -> Any: ...

    def sample_label_given_theta(self, theta, prior, observations: np.ndarray, rng: SeededRng): ...

    def sample_labels_given_theta(self, theta, prior, observations: np.ndarray, rng: SeededRng) -> np.ndarray: ...

    def sample_theta_given_data(self, theta, data, rng: SeededRng) -> Any: ...

    def theta_vector(self, theta) -> Sequence[float]: ...


@dataclass(frozen=True)
class GibbsConfig:
    steps: int
    burn_in: int | None = None
    thin: int = 1
    seed: int = 0
    stream: int = 0
    record_theta: bool = True
    trace: bool = False
    max_resample: int = 100

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be a positive integer")
        burn = self.resolved_burn_in
        if not 0 <= burn < self.steps:
            raise ValueError(f"burn_in={burn} must satisfy 0 <= burn_in < steps={self.steps}")
        if self.thin < 1:
            raise ValueError("thin must be a positive integer")
        if (self.steps - burn) // self.thin < 1:
            raise ValueError("configuration retains no samples")

    @property
    def resolved_burn_in(self) -> int:
        if self.burn_in is None:
            return max(200, self.steps // 10)
        return int(self.burn_in)

    def rng(self) -> SeededRng:
        return SeededRng(self.seed, self.stream)


@dataclass(frozen=True)
class ChainRecord:
    step: int
    x0: float | int
    latent_labels: tuple
    theta: tuple | None


@dataclass
class TraceEntry:
    """What the theta draw at ``step`` conditioned on, beyond D itself."""

    step: int
    extra_xs: np.ndarray
    extra_ys: np.ndarray


@dataclass
class Chain:
    """Retained Gibbs output, stored column-wise.

    Iterating yields :class:`ChainRecord` objects; the array attributes are the
    efficient access path.
    """

    steps: np.ndarray
    x0: np.ndarray
    latent: np.ndarray
    theta: np.ndarray | None
    theta_names: tuple[str, ...] = ()
    n_resampled: int = 0
    trace: list[TraceEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.steps.size)

    def __getitem__(self, i: int) -> ChainRecord:
        theta = None if self.theta is None else tuple(float(v) for v in self.theta[i])
        x0 = self.x0[i].item()
        return ChainRecord(int(self.steps[i]), x0, tuple(v.item() for v in self.latent[i]), theta)

    def __iter__(self) -> Iterator[ChainRecord]:
        for i in range(len(self)):
            yield self[i]

    @property
    def records(self) -> list[ChainRecord]:
        return list(self)


def _check_prior(model: ConditionalModel, prior) -> None:
    if prior_kind(prior) is not model.label_kind:
        raise ValueError(f"{model!r} needs a {model.label_kind.value} label prior, got {type(prior).__name__}")


def _draw_theta(model, theta, data, rng, counter: list[int], limit: int):
    for _ in range(limit + 1):
        try:
            return model.sample_theta_given_data(theta, data, rng)
        except DegenerateConditionalError:
            counter[0] += 1
            log.debug("degenerate theta conditional, resampling")
    raise DegenerateConditionalError(f"theta conditional degenerate after {limit} resamples")


def run_chain(
    model: ConditionalModel,
    y0,
    labeled: LabeledDataset,
    unlabeled: UnlabeledSet | None,
    prior_x0: GaussianDist | CategoricalDist,
    cfg: GibbsConfig,
) -> Chain:
    """Sample p(x0 | y0, D[, unlabeled]) with the Gibbs scheme.

    Parameters
    ----------
    model : ConditionalModel
        Generative or discriminative model providing the conditionals.
    y0 : float, array
        Observation of the label of interest. A bundle of N0 observations
        sharing the same label is allowed for generative models only.
    labeled : LabeledDataset
        Supervised pairs ``D``; may be empty.
    unlabeled : UnlabeledSet or None
        Unlabeled observations with their label prior. For discriminative
        models these carry no information on theta; they are still imputed so
        the claim can be checked empirically.
    prior_x0 : GaussianDist or CategoricalDist
        Prior of the label of interest.
    cfg : GibbsConfig

    Returns
    -------
    Chain
        Post-burn-in, thinned records of ``(x0, latent labels, theta)``.
    """
    _check_prior(model, prior_x0)
    if labeled.kind is not model.label_kind:
        raise ValueError("labeled dataset kind does not match the model")
    bundle = as_observation_bundle(y0, labeled.dim)
    if bundle.shape[0] > 1 and model.approach is Approach.DISCRIMINATIVE:
        raise MultiObservationError()
    if unlabeled is not None and len(unlabeled):
        unlabeled.check_compatible(labeled)
        u_obs = unlabeled.observations
        u_prior = unlabeled.label_prior
    else:
        u_obs = np.zeros((0, labeled.dim))
        u_prior = None
    n_obs, n_lat = bundle.shape[0], u_obs.shape[0]
    aug_ys = np.concatenate([bundle, u_obs], axis=0)
    label_dtype = int if model.label_kind is LabelKind.CATEGORICAL else float

    rng = cfg.rng()
    burn = cfg.resolved_burn_in
    n_keep = len(range(burn, cfg.steps, cfg.thin))
    steps = np.empty(n_keep, dtype=int)
    x0s = np.empty(n_keep, dtype=label_dtype)
    latent = np.empty((n_keep, n_lat), dtype=label_dtype)
    thetas = None
    counter = [0]
    trace: list[TraceEntry] = []

    theta = model.initial_theta(labeled, rng)
    if cfg.record_theta:
        thetas = np.empty((n_keep, len(model.theta_vector(theta))))
    aug_xs = np.empty(n_obs + n_lat, dtype=label_dtype)
    k = 0
    for t in range(1, cfg.steps + 1):
        x0 = model.sample_label_given_theta(theta, prior_x0, bundle, rng)
        aug_xs[:n_obs] = x0
        if n_lat:
            aug_xs[n_obs:] = model.sample_labels_given_theta(theta, u_prior, u_obs, rng)
        data = labeled.augmented(aug_xs, aug_ys)
        theta = _draw_theta(model, theta, data, rng, counter, cfg.max_resample)
        if t > burn and (t - burn - 1) % cfg.thin == 0:
            steps[k] = t
            x0s[k] = x0
            latent[k] = aug_xs[n_obs:]
            if thetas is not None:
                thetas[k] = model.theta_vector(theta)
            if cfg.trace:
                trace.append(TraceEntry(t, aug_xs.copy(), aug_ys))
            k += 1
    return Chain(steps, x0s, latent, thetas, tuple(model.theta_names), counter[0], trace)


def run_parallel_inference(
    model: ConditionalModel,
    targets,
    labeled: LabeledDataset,
    prior: GaussianDist | CategoricalDist,
    cfg: GibbsConfig,
) -> np.ndarray:
    """Joint label inference for a whole test set.

    Generative models run a single chain where every target is a latent
    label and all of them augment the data at each step. Discriminative
    models factorize: one theta chain on D alone, each target's label drawn
    from p(x | y, theta) at every step.

    Returns an array of shape (n_retained, n_targets).
    """
    _check_prior(model, prior)
    obs = np.asarray(targets, dtype=float)
    obs = obs.reshape(-1, labeled.dim) if obs.ndim < 2 else obs
    if obs.shape[0] == 0:
        raise ValueError("no targets")
    if model.approach is Approach.GENERATIVE:
        rest = UnlabeledSet(obs[1:], prior)
        chain = run_chain(model, obs[:1], labeled, rest, prior, cfg)
        return np.column_stack([chain.x0, chain.latent])

    rng = cfg.rng()
    burn = cfg.resolved_burn_in
    n_keep = len(range(burn, cfg.steps, cfg.thin))
    dtype = int if model.label_kind is LabelKind.CATEGORICAL else float
    out = np.empty((n_keep, obs.shape[0]), dtype=dtype)
    counter = [0]
    theta = model.initial_theta(labeled, rng)
    k = 0
    for t in range(1, cfg.steps + 1):
        labels = model.sample_labels_given_theta(theta, prior, obs, rng)
        theta = _draw_theta(model, theta, labeled, rng, counter, cfg.max_resample)
        if t > burn and (t - burn - 1) % cfg.thin == 0:
            out[k] = labels
            k += 1
    return out
