"""Experiment runners behind the CLI commands.

Each runner takes an :class:`ExperimentConfig`, is deterministic given its
seed, and returns plain data (dicts of numbers and arrays). Writing files is
left to :mod:`gendisc.cli`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.stats import binom

from .affine import (
    AffineDGP,
    AffineModel,
    DiscriminativeAffinePredictor,
    GenerativeAffinePredictor,
    simulate_dgp,
    theta_draws,
    true_posterior,
)
from .classify import (
    DiscriminativeClassifierPredictor,
    GaussClassModel,
    GenerativeClassifierPredictor,
    LogisticModel,
    MHConfig,
    RadialGaussianDGP,
    estimate_implicit_prior,
    logistic_map,
    mh_sample_theta,
    predict_mode,
    simulate_class_data,
    tune_proposal_sd,
)
from .core import (
    Approach,
    CategoricalDist,
    GaussianDist,
    LabelKind,
    LabeledDataset,
    MultiObservationError,
    NIGPrior,
    SeededRng,
    UnlabeledSet,
    empirical_categorical,
)
from .diagnostics import (
    binned_tv_distance,
    calibration_curve,
    integrated_autocorrelation_time,
    ks_one_sample,
    ks_two_sample,
    thin_by_iat,
    tv_distance,
)
from .gibbs import Chain, GibbsConfig, run_chain, run_parallel_inference


KS_LEVEL = 0.05


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Flat configuration shared by every command; all fields have defaults.

    The MH proposal scale, burn-in and chain lengths are free choices (no
    canonical values exist); ``proposal_sd`` is only the pilot's starting
    point.
    """

    experiment: str = "affine-demo"
    seed: int = 0
    out: str = "results"
    # affine DGP: y = slope * x + intercept + N(0, noise_sd^2)
    slope: float = 1.0
    intercept: float = 0.0
    noise_sd: float = 1.0
    # label prior of x0 (and of unlabeled labels)
    prior_mean: float = 0.0
    prior_sd: float = 1.0
    # label distribution of the training set
    data_mean: float = 3.0
    data_sd: float = 1.0
    # normal-inverse-gamma prior on the affine theta
    beta_prior_var: float = 10.0
    sigma2_shape: float = 2.0
    sigma2_scale: float = 1.0
    # sizes
    n_labeled: int = 1000
    n_unlabeled: int = 40
    n0_values: list = field(default_factory=lambda: [1, 5, 25])
    n_outer: int = 5000
    n_theta: int = 1000
    x0: float = 0.5
    far_x0: float = -2.0
    # sampler
    steps: int = 3000
    burn_in: int = 300
    thin: int = 1
    proposal_sd: float = 0.05
    mh_steps: int = 5
    # semi-supervised study
    semi_n_labeled: int = 10
    semi_data_mean: float = 0.0
    semi_data_sd: float = 0.5
    semi_prior_mean: float = 3.0
    semi_steps: int = 12000
    # multi-observation study
    approach: str = "generative"
    coverage_seeds: int = 100
    # classification
    radius: float = 3.0
    logistic_prior_sd: float = 10.0
    class_prior_sd: float = 10.0
    n_train: int = 5000
    n_test: int = 5000
    n_train_small: int = 60
    runs: int = 10
    scenario_steps: int = 300
    scenario_burn_in: int = 100
    # implicit-prior sweep
    noise_grid: list = field(default_factory=lambda: [0.2, 1.0, 5.0])
    radius_grid: list = field(default_factory=lambda: [8.0, 3.0, 0.5])
    sweep_seeds: int = 5
    sweep_n_labeled: int = 600
    sweep_n_regression: int = 30000
    sweep_data_mean: float = 2.0
    sweep_data_sd: float = 0.5

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        positive = ("noise_sd", "prior_sd", "data_sd", "beta_prior_var", "sigma2_shape", "sigma2_scale",
                    "semi_data_sd", "logistic_prior_sd", "class_prior_sd", "sweep_data_sd", "proposal_sd")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        counts = ("n_labeled", "n_outer", "n_theta", "steps", "thin", "mh_steps", "semi_n_labeled",
                  "semi_steps", "coverage_seeds", "n_train", "n_test", "n_train_small", "runs",
                  "scenario_steps", "sweep_seeds", "sweep_n_labeled", "sweep_n_regression")
        for name in counts:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.n_unlabeled < 0 or self.burn_in < 0 or self.scenario_burn_in < 0:
            raise ConfigError("sizes must be >= 0")
        if self.burn_in >= self.steps:
            raise ConfigError("burn_in must be < steps")
        if self.scenario_burn_in >= self.scenario_steps:
            raise ConfigError("scenario_burn_in must be < scenario_steps")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.radius < 0:
            raise ConfigError("radius must be >= 0")
        try:
            Approach.parse(self.approach)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.n0_values or any(int(n) < 1 for n in self.n0_values):
            raise ConfigError("n0_values must be positive integers")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "ExperimentConfig":
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            name = key.replace("-", "_")
            if name not in fields:
                raise ConfigError(f"unknown config key: {key}")
            kwargs[name] = _coerce(name, value, cls.__dataclass_fields__[name])
        return cls(**kwargs)

    def replace(self, **changes) -> "ExperimentConfig":
        return self.from_mapping({**self.to_dict(), **changes})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def nig_prior(self) -> NIGPrior:
        return NIGPrior(np.zeros(2), self.beta_prior_var * np.eye(2), self.sigma2_shape, self.sigma2_scale)

    def affine_dgp(self, noise_sd: float | None = None) -> AffineDGP:
        return AffineDGP(self.slope, self.intercept, self.noise_sd if noise_sd is None else noise_sd)

    def label_prior(self) -> GaussianDist:
        return GaussianDist(self.prior_mean, self.prior_sd**2)

    def gibbs(self, stream: int, seed: int | None = None, steps: int | None = None,
              burn_in: int | None = None) -> GibbsConfig:
        return GibbsConfig(
            steps=self.steps if steps is None else steps,
            burn_in=self.burn_in if burn_in is None else burn_in,
            thin=self.thin,
            seed=self.seed if seed is None else seed,
            stream=stream,
        )


def _coerce(name: str, value, f: dataclasses.Field):
    default = f.default_factory() if f.default is dataclasses.MISSING else f.default
    try:
        if isinstance(default, bool):
            if isinstance(value, str):
                return value.lower() in ("1", "true", "yes")
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, list):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v]
            return [type(default[0])(v) for v in value]
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {name}: {value!r}") from None


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def gaussian_dataset(dgp: AffineDGP, label_dist: GaussianDist, n: int, rng: SeededRng) -> LabeledDataset:
    xs = label_dist.sample(rng, size=n)
    return LabeledDataset(xs, simulate_dgp(dgp, xs, rng), LabelKind.CONTINUOUS)


def histogram_series(samples, bins: int = 60, lo: float | None = None, hi: float | None = None):
    samples = np.asarray(samples, dtype=float)
    lo = float(samples.min()) if lo is None else lo
    hi = float(samples.max()) if hi is None else hi
    density, edges = np.histogram(samples, bins=bins, range=(lo, hi), density=True)
    return 0.5 * (edges[1:] + edges[:-1]), density


def mass_within(samples, center: float, half_width: float) -> float:
    samples = np.asarray(samples, dtype=float)
    return float(np.mean(np.abs(samples - center) <= half_width))


def chain_iat(chain: Chain) -> float:
    """Largest IAT over the x0 column and every theta coordinate."""
    cols = [chain.x0] + ([] if chain.theta is None else list(chain.theta.T))
    return max(integrated_autocorrelation_time(c) for c in cols)


# ---------------------------------------------------------------------------
# Affine demo: prior match/mismatch, implicit prior, out-of-support
# ---------------------------------------------------------------------------


def affine_demo(cfg: ExperimentConfig) -> dict:
    """Generative and discriminative ppds under matched and mismatched label priors.

    In the matched setting the training labels follow the label prior; in the
    mismatched one they follow ``N(data_mean, data_sd^2)``. The discriminative
    ppd is compared with the exact posterior under the label prior and with
    the posterior under the training-label distribution.
    """
    dgp = cfg.affine_dgp()
    prior = cfg.label_prior()
    data_dist = GaussianDist(cfg.data_mean, cfg.data_sd**2)
    root = SeededRng(cfg.seed)
    y0 = float(simulate_dgp(dgp, [cfg.x0], root.child(0))[0])
    y_far = float(simulate_dgp(dgp, [cfg.far_x0], root.child(1))[0])
    settings = {"matched": prior, "mismatched": data_dist}
    out: dict[str, Any] = {"y0": y0, "x0": cfg.x0, "true_posterior": true_posterior(dgp, prior, y0), "settings": {}}
    for s_idx, (name, dist) in enumerate(settings.items()):
        data = gaussian_dataset(dgp, dist, cfg.n_labeled, root.child(10 + s_idx))
        shifted = true_posterior(dgp, dist, y0)
        res: dict[str, Any] = {"data_posterior": shifted, "chains": {}, "ks": {}, "implicit_prior": {}, "out_of_support": {}}
        target = out["true_posterior"]
        far_target = true_posterior(dgp, prior, y_far)
        for a_idx, approach in enumerate(Approach):
            model = AffineModel(approach, cfg.nig_prior())
            stream = 100 * (s_idx + 1) + a_idx
            chain = run_chain(model, y0, data, None, prior, cfg.gibbs(stream))
            res["chains"][approach.value] = chain
            res["ks"][approach.value] = {
                "vs_true_posterior": ks_one_sample(chain.x0, target.cdf),
                "vs_data_posterior": ks_one_sample(chain.x0, shifted.cdf),
            }
            far = run_chain(model, y_far, data, None, prior, cfg.gibbs(stream + 50))
            res["out_of_support"][approach.value] = {
                "mass_near_x0": mass_within(far.x0, cfg.far_x0, 3 * far_target.sd),
                "ppd_mean": float(far.x0.mean()),
            }
            thetas = theta_draws(model, data, cfg.n_theta, root.child(1000 + stream))
            predictor = (GenerativeAffinePredictor(thetas, prior) if approach is Approach.GENERATIVE
                         else DiscriminativeAffinePredictor(thetas))
            res["implicit_prior"][approach.value] = estimate_implicit_prior(
                predictor, dgp, prior, cfg.n_outer, root.child(2000 + stream))
        res["true_mass_near_far_x0"] = float(far_target.cdf(cfg.far_x0 + 3 * far_target.sd)
                                             - far_target.cdf(cfg.far_x0 - 3 * far_target.sd))
        out["settings"][name] = res
    out["y_far"] = y_far
    return out


# ---------------------------------------------------------------------------
# Semi-supervised study
# ---------------------------------------------------------------------------


def semi_supervised(cfg: ExperimentConfig, seed: int | None = None, n_unlabeled: int | None = None) -> dict:
    """Supervised vs semi-supervised ppds for one seed.

    The few labeled pairs have labels drawn around ``semi_data_mean`` while
    the label of interest and the unlabeled labels share the prior
    ``N(semi_prior_mean, prior_sd^2)``, so unlabeled observations cover a
    region the labeled ones do not.
    """
    seed = cfg.seed if seed is None else seed
    n_u = cfg.n_unlabeled if n_unlabeled is None else n_unlabeled
    dgp = cfg.affine_dgp()
    prior = GaussianDist(cfg.semi_prior_mean, cfg.prior_sd**2)
    rng = SeededRng(seed)
    data = gaussian_dataset(dgp, GaussianDist(cfg.semi_data_mean, cfg.semi_data_sd**2), cfg.semi_n_labeled, rng.child(0))
    x_u = prior.sample(rng.child(1), size=n_u)
    unlabeled = UnlabeledSet(simulate_dgp(dgp, x_u, rng.child(2)).reshape(n_u, 1), prior)
    x0 = float(prior.sample(rng.child(3)))
    y0 = float(simulate_dgp(dgp, [x0], rng.child(4))[0])
    target = true_posterior(dgp, prior, y0)
    burn = max(1, cfg.semi_steps // 10)
    out: dict[str, Any] = {"seed": seed, "x0": x0, "y0": y0, "true_posterior": target, "chains": {}, "calibration": {}}
    for a_idx, approach in enumerate(Approach):
        model = AffineModel(approach, cfg.nig_prior())
        for mode, u in (("supervised", None), ("semi_supervised", unlabeled)):
            # same stream for both modes: with no unlabeled data the two chains coincide
            gc = GibbsConfig(cfg.semi_steps, burn_in=burn, seed=seed, stream=10 + a_idx)
            chain = run_chain(model, y0, data, u, prior, gc)
            out["chains"][(approach.value, mode)] = chain
            out["calibration"][(approach.value, mode)] = calibration_curve(target, chain.x0)
    sup = out["chains"][("discriminative", "supervised")]
    semi = out["chains"][("discriminative", "semi_supervised")]
    iats = (chain_iat(sup), chain_iat(semi))
    out["discriminative_iat"] = iats
    out["discriminative_ks"] = ks_two_sample(thin_by_iat(sup.x0, iats[0]), thin_by_iat(semi.x0, iats[1]))
    out["generative_mad"] = {
        mode: out["calibration"][("generative", mode)].mad() for mode in ("supervised", "semi_supervised")
    }
    return out


# ---------------------------------------------------------------------------
# Multiple observations
# ---------------------------------------------------------------------------


def multi_obs(cfg: ExperimentConfig, seed: int | None = None, n0_values=None) -> list[dict]:
    """Generative ppd summaries for bundles of N0 observations of one label.

    Raises
    ------
    MultiObservationError
        If ``cfg.approach`` is discriminative.
    """
    seed = cfg.seed if seed is None else seed
    approach = Approach.parse(cfg.approach)
    n0_values = cfg.n0_values if n0_values is None else n0_values
    if approach is Approach.DISCRIMINATIVE and max(n0_values) > 1:
        raise MultiObservationError()
    dgp = cfg.affine_dgp()
    prior = cfg.label_prior()
    rng = SeededRng(seed)
    data = gaussian_dataset(dgp, prior, cfg.n_labeled, rng.child(0))
    model = AffineModel(approach, cfg.nig_prior())
    rows = []
    bundle_all = simulate_dgp(dgp, np.full(max(n0_values), cfg.x0), rng.child(1))
    for i, n0 in enumerate(n0_values):
        chain = run_chain(model, bundle_all[:n0].reshape(n0, 1), data, None, prior, cfg.gibbs(20 + i, seed=seed))
        exact = _true_multi_posterior(dgp, prior, bundle_all[:n0])
        rows.append({
            "n0": int(n0),
            "ppd_mean": float(chain.x0.mean()),
            "ppd_sd": float(chain.x0.std(ddof=1)),
            "true_mean": exact.mean,
            "true_sd": exact.sd,
        })
    return rows


def _true_multi_posterior(dgp: AffineDGP, prior: GaussianDist, ys) -> GaussianDist:
    from .affine import AffineTheta, gen_x0_posterior_multi

    return gen_x0_posterior_multi(AffineTheta(dgp.slope, dgp.intercept, dgp.noise_sd**2), prior, ys)


def multi_obs_coverage(cfg: ExperimentConfig, n0: int = 25, n_seeds: int | None = None) -> dict:
    """Fraction of seeds with |ppd mean - x0| < 3 ppd sd at bundle size n0."""
    n_seeds = cfg.coverage_seeds if n_seeds is None else n_seeds
    hits = 0
    for k in range(n_seeds):
        row = multi_obs(cfg, seed=cfg.seed + k, n0_values=[n0])[0]
        hits += abs(row["ppd_mean"] - cfg.x0) < 3 * row["ppd_sd"]
    return {"n0": n0, "seeds": n_seeds, "covered": hits, "rate": hits / n_seeds}


# ---------------------------------------------------------------------------
# Classification scenarios
# ---------------------------------------------------------------------------

UNIFORM3 = CategoricalDist(np.full(3, 1 / 3))
DECREASING3 = CategoricalDist(np.array([3.0, 2.0, 1.0]) / 6)
INCREASING3 = CategoricalDist(np.array([1.0, 2.0, 3.0]) / 6)

SCENARIOS = {
    # name: (test-label prior, training-label distribution, training size attribute)
    "identical_priors": (UNIFORM3, UNIFORM3, "n_train"),
    "imbalanced": (DECREASING3, INCREASING3, "n_train"),
    "few_labels": (UNIFORM3, UNIFORM3, "n_train_small"),
}


def scenario_run(cfg: ExperimentConfig, scenario: str, run: int) -> dict:
    """Accuracy of both approaches for one run of one scenario."""
    test_prior, train_dist, size_attr = SCENARIOS[scenario]
    dgp = RadialGaussianDGP(cfg.radius)
    rng = SeededRng(cfg.seed, list(SCENARIOS).index(scenario)).child(run)
    train = simulate_class_data(dgp, train_dist, getattr(cfg, size_attr), rng.child(0))
    test = simulate_class_data(dgp, test_prior, cfg.n_test, rng.child(1))
    stream_base = 1000 * (list(SCENARIOS).index(scenario) + 1) + 10 * run
    gcfg = cfg.gibbs(stream_base, steps=cfg.scenario_steps, burn_in=cfg.scenario_burn_in)

    gen = run_parallel_inference(GaussClassModel(prior_mean_sd=cfg.class_prior_sd), test.ys, train, test_prior, gcfg)

    start = logistic_map(train, cfg.logistic_prior_sd)
    _, sd = tune_proposal_sd(start, train, cfg.logistic_prior_sd, cfg.proposal_sd, 1000, rng.child(2))
    disc_model = LogisticModel(prior_sd=cfg.logistic_prior_sd, proposal_sd=sd, mh_steps=cfg.mh_steps)
    disc = run_parallel_inference(disc_model, test.ys, train, test_prior, dataclasses.replace(gcfg, stream=stream_base + 1))
    return {
        "generative": float(np.mean(predict_mode(gen) == test.xs)),
        "discriminative": float(np.mean(predict_mode(disc) == test.xs)),
    }


def run_scenarios(cfg: ExperimentConfig) -> dict:
    """Per scenario: per-run accuracies and their mean and sd for both approaches."""
    out = {}
    for name in SCENARIOS:
        runs = [scenario_run(cfg, name, r) for r in range(cfg.runs)]
        entry = {"runs": runs}
        for approach in ("generative", "discriminative"):
            acc = np.array([r[approach] for r in runs])
            entry[approach] = {"mean": float(acc.mean()), "sd": float(acc.std(ddof=1)) if acc.size > 1 else 0.0}
        entry["generative_wins"] = int(sum(r["generative"] > r["discriminative"] for r in runs))
        out[name] = entry
    return out


# ---------------------------------------------------------------------------
# Implicit prior sweep over aleatoric noise
# ---------------------------------------------------------------------------


def implicit_prior_regression(cfg: ExperimentConfig, noise_sd: float, seed: int) -> dict:
    """Two-step estimates of p(x0 | D) for the affine models at one noise level.

    Training labels follow ``N(sweep_data_mean, sweep_data_sd^2)``; the label
    prior is ``N(prior_mean, prior_sd^2)``. Observations come from the true
    DGP, so the generative estimate equals the prior only once theta has
    concentrated; ``sweep_n_regression`` is large for that reason.
    """
    dgp = cfg.affine_dgp(noise_sd)
    prior = cfg.label_prior()
    data_dist = GaussianDist(cfg.sweep_data_mean, cfg.sweep_data_sd**2)
    rng = SeededRng(seed, 7)
    data = gaussian_dataset(dgp, data_dist, cfg.sweep_n_regression, rng.child(0))
    edges = np.linspace(min(prior.mean - 4 * prior.sd, data_dist.mean - 4 * data_dist.sd),
                        max(prior.mean + 4 * prior.sd, data_dist.mean + 4 * data_dist.sd), 41)
    out = {}
    for a_idx, approach in enumerate(Approach):
        model = AffineModel(approach, cfg.nig_prior())
        thetas = theta_draws(model, data, cfg.n_theta, rng.child(10 + a_idx))
        predictor = (GenerativeAffinePredictor(thetas, prior) if approach is Approach.GENERATIVE
                     else DiscriminativeAffinePredictor(thetas))
        samples = estimate_implicit_prior(predictor, dgp, prior, cfg.n_outer, rng.child(20 + a_idx))
        out[approach.value] = {
            "samples": samples,
            "tv_to_data": binned_tv_distance(samples, data_dist.cdf, edges),
            "tv_to_prior": binned_tv_distance(samples, prior.cdf, edges),
            "ks_vs_prior": ks_one_sample(samples, prior.cdf),
        }
    return out


def implicit_prior_classification(cfg: ExperimentConfig, radius: float, seed: int) -> dict:
    """Two-step estimates of Pr(x0 | D) for both classifiers at one radius.

    The label prior decreases with the class index while the training labels
    increase with it.
    """
    dgp = RadialGaussianDGP(radius)
    prior, data_dist = DECREASING3, INCREASING3
    rng = SeededRng(seed, 8)
    data = simulate_class_data(dgp, data_dist, cfg.sweep_n_labeled, rng.child(0))
    chain = mh_sample_theta(data, cfg.logistic_prior_sd, MHConfig(
        steps=cfg.n_theta * 5, thin=5, proposal_sd=cfg.proposal_sd, seed=seed, stream=9))
    predictors = {
        "generative": GenerativeClassifierPredictor(data, prior, cfg.class_prior_sd),
        "discriminative": DiscriminativeClassifierPredictor(chain),
    }
    out = {}
    for a_idx, (name, predictor) in enumerate(predictors.items()):
        samples = estimate_implicit_prior(predictor, dgp, prior, cfg.n_outer, rng.child(20 + a_idx))
        est = empirical_categorical(samples, 3)
        out[name] = {
            "probs": est.probs,
            "tv_to_data": tv_distance(est, data_dist),
            "tv_to_prior": tv_distance(est, prior),
        }
    out["acceptance_rate"] = chain.acceptance_rate
    return out


def implicit_prior_sweep(cfg: ExperimentConfig) -> dict:
    """Discriminative TV to the training-label law across the noise grids, per seed."""
    regression, classification = [], []
    for k in range(cfg.sweep_seeds):
        seed = cfg.seed + k
        for noise in cfg.noise_grid:
            r = implicit_prior_regression(cfg, noise, seed)
            regression.append({
                "seed": seed, "noise_sd": noise,
                "disc_tv_to_data": r["discriminative"]["tv_to_data"],
                "disc_tv_to_prior": r["discriminative"]["tv_to_prior"],
                "gen_tv_to_prior": r["generative"]["tv_to_prior"],
                "gen_ks_vs_prior_p": r["generative"]["ks_vs_prior"].p_value,
                "gen_ks_vs_prior_stat": r["generative"]["ks_vs_prior"].statistic,
            })
        for radius in cfg.radius_grid:
            c = implicit_prior_classification(cfg, radius, seed)
            classification.append({
                "seed": seed, "radius": radius,
                "disc_tv_to_data": c["discriminative"]["tv_to_data"],
                "disc_tv_to_prior": c["discriminative"]["tv_to_prior"],
                "gen_tv_to_prior": c["generative"]["tv_to_prior"],
                "gen_tv_to_data": c["generative"]["tv_to_data"],
            })
    rejections = sum(r["gen_ks_vs_prior_p"] < KS_LEVEL for r in regression)
    return {
        "regression": regression,
        "classification": classification,
        "regression_monotone_seeds": _monotone_seeds(regression, "noise_sd", cfg.noise_grid),
        "classification_monotone_seeds": _monotone_seeds(classification, "radius", cfg.radius_grid),
        "generative_ks_rejections": rejections,
        "generative_ks_tests": len(regression),
        "generative_ks_size_pvalue": rejection_count_pvalue(rejections, len(regression), KS_LEVEL),
    }


def rejection_count_pvalue(rejections: int, tests: int, level: float) -> float:
    """P(X >= rejections) for X ~ Binomial(tests, level): are the rejections more than chance?"""
    return float(binom.sf(rejections - 1, tests, level))


def _monotone_seeds(rows, key, grid) -> int:
    """Seeds whose discriminative TV to the training law strictly decreases along the grid."""
    count = 0
    for seed in sorted({r["seed"] for r in rows}):
        by = {r[key]: r["disc_tv_to_data"] for r in rows if r["seed"] == seed}
        tv = [by[g] for g in grid]
        count += all(a > b for a, b in zip(tv, tv[1:]))
    return count


def sign_test_summary(successes: int, trials: int) -> dict:
    from .diagnostics import sign_test_pvalue

    return {"successes": successes, "trials": trials, "p_value": sign_test_pvalue(successes, trials)}


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "affine_demo",
    "semi_supervised",
    "multi_obs",
    "multi_obs_coverage",
    "SCENARIOS",
    "run_scenarios",
    "scenario_run",
    "implicit_prior_sweep",
    "implicit_prior_regression",
    "implicit_prior_classification",
    "rejection_count_pvalue",
    "histogram_series",
]
