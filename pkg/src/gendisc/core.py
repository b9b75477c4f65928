"""Domain types shared by every sampler: distributions, priors, datasets, rng.

All distributions are immutable. Labels come in two kinds (continuous reals or
class indices starting at 1) and datasets carry their kind so that operations
can reject mismatched inputs instead of silently misbehaving.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.special import logsumexp

# Variances at or below this are treated as degenerate.
VARIANCE_FLOOR = 1e-12
_PROB_ATOL = 1e-12


class ModelContractError(Exception):
    """A request the chosen modeling approach cannot honour by construction."""


class DegenerateConditionalError(ArithmeticError):
    """A conditional covariance became numerically singular."""


class MultiObservationError(ModelContractError):
    def __init__(self, message: str = "discriminative multi-observation posterior intractable"):
        super().__init__(message)


class Approach(enum.Enum):
    GENERATIVE = "generative"
    DISCRIMINATIVE = "discriminative"

    @classmethod
    def parse(cls, value: "Approach | str") -> "Approach":
        if isinstance(value, Approach):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if member.value == key or member.value[0] == key:
                return member
        raise ValueError(f"unknown approach {value!r}")


class LabelKind(enum.Enum):
    CONTINUOUS = "continuous"
    CATEGORICAL = "categorical"


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


class SeededRng:
    """A reproducible random stream identified by ``(seed, stream)``.

    Backed by numpy's PCG64 seeded through a ``SeedSequence`` whose spawn key
    is the stream path, so distinct stream ids give independent sequences and
    identical ids replay identical draws.
    """

    def __init__(self, seed: int, stream: int = 0, *, _path: tuple[int, ...] | None = None):
        seed = int(seed)
        stream = int(stream)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        if not 0 <= stream < 2**64:
            raise ValueError(f"stream must be an unsigned 64-bit integer, got {stream}")
        self.seed = seed
        self.stream = stream
        self._path = (stream,) if _path is None else _path
        sequence = np.random.SeedSequence(entropy=seed, spawn_key=self._path)
        self.gen = np.random.Generator(np.random.PCG64(sequence))

    def child(self, index: int) -> "SeededRng":
        """Independent sub-stream; depends only on (seed, stream path, index)."""
        return SeededRng(self.seed, self.stream, _path=self._path + (int(index),))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, path={self._path})"


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianDist:
    mean: float
    variance: float

    def __post_init__(self):
        mean = float(self.mean)
        variance = float(self.variance)
        if not math.isfinite(mean):
            raise ValueError(f"Gaussian mean must be finite, got {mean}")
        if not math.isfinite(variance) or variance <= VARIANCE_FLOOR:
            raise ValueError(f"Gaussian variance must be > {VARIANCE_FLOOR:g}, got {variance}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", variance)

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return -0.5 * (np.log(2 * np.pi * self.variance) + (x - self.mean) ** 2 / self.variance)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        from scipy.special import ndtr

        return ndtr((np.asarray(x, dtype=float) - self.mean) / self.sd)

    def sample(self, rng: SeededRng, size=None):
        return rng.gen.normal(self.mean, self.sd, size=size)


@dataclass(frozen=True)
class InvGammaDist:
    """Inverse-gamma with shape ``lambda`` and scale ``eta``."""

    shape: float
    scale: float

    def __post_init__(self):
        shape, scale = float(self.shape), float(self.scale)
        if not (shape > 0 and math.isfinite(shape)):
            raise ValueError(f"inverse-gamma shape must be > 0, got {shape}")
        if not (scale > 0 and math.isfinite(scale)):
            raise ValueError(f"inverse-gamma scale must be > 0, got {scale}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "scale", scale)

    @property
    def mean(self) -> float:
        if self.shape <= 1:
            return math.inf
        return self.scale / (self.shape - 1)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return (
            self.shape * math.log(self.scale)
            - math.lgamma(self.shape)
            - (self.shape + 1) * np.log(x)
            - self.scale / x
        )

    def sample(self, rng: SeededRng, size=None):
        # Gamma-then-reciprocal.
        return self.scale / rng.gen.gamma(self.shape, 1.0, size=size)


@dataclass(frozen=True)
class CategoricalDist:
    """Distribution over classes ``1..C``; probabilities renormalized on construction."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size == 0:
            raise ValueError("categorical distribution needs at least one class")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("categorical probabilities must be finite and non-negative")
        total = p.sum()
        if total <= 0:
            raise ValueError("categorical probabilities sum to zero")
        if abs(total - 1.0) > _PROB_ATOL:
            p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_logits(cls, logits) -> "CategoricalDist":
        logits = np.asarray(logits, dtype=float)
        return cls(np.exp(logits - logsumexp(logits)))

    @property
    def num_classes(self) -> int:
        return int(self.probs.size)

    def logpmf(self, c):
        c = np.asarray(c, dtype=int)
        with np.errstate(divide="ignore"):
            return np.log(self.probs)[c - 1]

    def sample(self, rng: SeededRng, size=None):
        return rng.gen.choice(self.num_classes, size=size, p=self.probs) + 1

    def __eq__(self, other):
        if not isinstance(other, CategoricalDist):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(np.all(self.probs == other.probs))

    def __hash__(self):
        return hash(self.probs.tobytes())


def gaussian_sample(dist: GaussianDist, rng: SeededRng) -> float:
    return float(rng.gen.normal(dist.mean, dist.sd))


def categorical_sample(dist: CategoricalDist, rng: SeededRng) -> int:
    """Draw a class index in ``1..C``."""
    return int(rng.gen.choice(dist.num_classes, p=dist.probs)) + 1


def sample_categorical_rows(probs: np.ndarray, rng: SeededRng) -> np.ndarray:
    """One class index (1-based) per row of a (n, C) probability matrix."""
    probs = np.asarray(probs, dtype=float)
    if probs.shape[0] == 0:
        return np.zeros(0, dtype=int)
    cum = np.cumsum(probs, axis=1)
    u = rng.gen.random(probs.shape[0]) * cum[:, -1]
    idx = (cum < u[:, None]).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1) + 1


def normalize_log_weights(logw: np.ndarray, axis: int = -1) -> np.ndarray:
    logw = np.asarray(logw, dtype=float)
    return np.exp(logw - logsumexp(logw, axis=axis, keepdims=True))


@dataclass(frozen=True)
class NIGPrior:
    """Independent Gaussian x inverse-gamma prior over (beta1, beta0) and sigma^2."""

    beta_mean: np.ndarray = field(default_factory=lambda: np.zeros(2))
    beta_cov: np.ndarray = field(default_factory=lambda: 10.0 * np.eye(2))
    shape: float = 2.0
    scale: float = 1.0

    def __post_init__(self):
        mean = np.array(self.beta_mean, dtype=float).reshape(-1)
        cov = np.array(self.beta_cov, dtype=float)
        if mean.shape != (2,):
            raise ValueError("beta_mean must be a 2-vector")
        if cov.shape != (2, 2):
            raise ValueError("beta_cov must be 2x2")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ValueError("beta_cov must be symmetric")
        if np.any(np.linalg.eigvalsh(cov) <= 0):
            raise ValueError("beta_cov must be positive definite")
        InvGammaDist(self.shape, self.scale)  # validates
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "beta_mean", mean)
        object.__setattr__(self, "beta_cov", cov)
        object.__setattr__(self, "shape", float(self.shape))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def sigma2_prior(self) -> InvGammaDist:
        return InvGammaDist(self.shape, self.scale)


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


def _as_observations(ys, dim: int | None = None) -> np.ndarray:
    arr = np.array(ys, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(-1, dim)
    if arr.ndim != 2:
        raise ValueError("observations must be a scalar, a vector or an (n, d) array")
    if dim is not None and arr.shape[0] and arr.shape[1] != dim:
        raise ValueError(f"observation dimension {arr.shape[1]} != expected {dim}")
    return arr


@dataclass(frozen=True)
class LabeledDataset:
    """Supervised pairs ``(x_i, y_i)``; ``ys`` is always an (n, d) array."""

    xs: np.ndarray
    ys: np.ndarray
    kind: LabelKind = LabelKind.CONTINUOUS

    def __post_init__(self):
        kind = LabelKind(self.kind)
        if kind is LabelKind.CATEGORICAL:
            xs = np.array(self.xs, dtype=int).reshape(-1)
            if xs.size and xs.min() < 1:
                raise ValueError("class labels start at 1")
        else:
            xs = np.array(self.xs, dtype=float).reshape(-1)
        ys = np.array(self.ys, dtype=float)
        if ys.ndim == 1:
            ys = ys.reshape(-1, 1) if ys.size == xs.size else ys.reshape(xs.size, -1)
        if ys.ndim != 2 or ys.shape[0] != xs.size:
            raise ValueError(f"{xs.size} labels but observations of shape {ys.shape}")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "kind", kind)

    @classmethod
    def empty(cls, dim: int = 1, kind: LabelKind = LabelKind.CONTINUOUS) -> "LabeledDataset":
        return cls(np.zeros(0), np.zeros((0, dim)), kind)

    def __len__(self) -> int:
        return int(self.xs.size)

    @property
    def dim(self) -> int:
        return int(self.ys.shape[1])

    def parts(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        yield self.xs, self.ys

    def augmented(self, xs, ys) -> "AugmentedDataset":
        return AugmentedDataset(self, xs, ys)


class AugmentedDataset:
    """A labeled dataset plus an appended buffer of imputed pairs.

    The base dataset is referenced, never copied; consumers iterate ``parts()``.
    """

    __slots__ = ("base", "extra_xs", "extra_ys")

    def __init__(self, base: LabeledDataset, xs, ys):
        self.base = base
        dtype = int if base.kind is LabelKind.CATEGORICAL else float
        self.extra_xs = np.asarray(xs, dtype=dtype).reshape(-1)
        self.extra_ys = np.asarray(ys, dtype=float).reshape(self.extra_xs.size, base.dim)

    @property
    def kind(self) -> LabelKind:
        return self.base.kind

    @property
    def dim(self) -> int:
        return self.base.dim

    def __len__(self) -> int:
        return len(self.base) + int(self.extra_xs.size)

    def parts(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        if len(self.base):
            yield self.base.xs, self.base.ys
        if self.extra_xs.size:
            yield self.extra_xs, self.extra_ys


@dataclass(frozen=True)
class UnlabeledSet:
    """Observations whose labels are unknown, sharing a single label prior."""

    observations: np.ndarray
    label_prior: GaussianDist | CategoricalDist

    def __post_init__(self):
        obs = np.array(self.observations, dtype=float)
        if obs.ndim == 1:
            obs = obs.reshape(-1, 1)
        if obs.ndim != 2:
            raise ValueError("unlabeled observations must be an (m, d) array")
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)

    @classmethod
    def empty(cls, label_prior, dim: int = 1) -> "UnlabeledSet":
        return cls(np.zeros((0, dim)), label_prior)

    def __len__(self) -> int:
        return int(self.observations.shape[0])

    @property
    def kind(self) -> LabelKind:
        if isinstance(self.label_prior, CategoricalDist):
            return LabelKind.CATEGORICAL
        return LabelKind.CONTINUOUS

    def check_compatible(self, labeled: LabeledDataset) -> None:
        if self.kind is not labeled.kind:
            raise ValueError(
                f"unlabeled label prior is {self.kind.value} but labeled data is {labeled.kind.value}"
            )
        if len(self) and self.observations.shape[1] != labeled.dim:
            raise ValueError("unlabeled and labeled observations differ in dimension")


def prior_kind(prior: GaussianDist | CategoricalDist) -> LabelKind:
    return LabelKind.CATEGORICAL if isinstance(prior, CategoricalDist) else LabelKind.CONTINUOUS


def as_observation_bundle(y0, dim: int) -> np.ndarray:
    """Normalize one observation or a bundle of repeated observations to (N0, d)."""
    bundle = _as_observations(y0, dim)
    if bundle.shape[0] == 0:
        raise ValueError("no observations")
    return bundle


def empirical_categorical(samples: Sequence[int], num_classes: int) -> CategoricalDist:
    counts = np.bincount(np.asarray(samples, dtype=int) - 1, minlength=num_classes)
    return CategoricalDist(counts[:num_classes])
