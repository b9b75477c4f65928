"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""

import time

import numpy as np
import pytest

from gendisc.affine import (
    AffineDGP,
    AffineModel,
    AffineTheta,
    gen_x0_posterior,
    gen_x0_posterior_multi,
    true_posterior,
    unlabeled_posterior,
)
from gendisc.cli import EXIT_OK, main
from gendisc.core import Approach, GaussianDist, SeededRng
from gendisc.diagnostics import (
    calibration_curve,
    integrated_autocorrelation_time,
    ks_one_sample,
    ks_two_sample,
    sign_test_pvalue,
)
from gendisc.experiments import (
    ExperimentConfig,
    affine_demo,
    gaussian_dataset,
    implicit_prior_sweep,
    run_scenarios,
    semi_supervised,
)
from gendisc.gibbs import GibbsConfig, run_chain
from cli_configs import SMALL
from oracles import normal_logpdf, quad_cdf, quad_moments

pytestmark = pytest.mark.acceptance


def _rel_err(dist, logdensity):
    mean, var = quad_moments(logdensity, -200.0, 200.0, n=50001)
    return abs(dist.mean - mean) / max(abs(mean), np.sqrt(var)), abs(dist.variance - var) / var


def test_criterion_1_closed_forms_match_quadrature(record_criterion):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        beta1 = rng.choice([-1, 1]) * rng.uniform(0.3, 3.0)
        beta0, sigma2 = rng.uniform(-3, 3), rng.uniform(0.1, 4.0)
        prior = GaussianDist(rng.uniform(-3, 3), rng.uniform(0.5, 4.0))
        theta = AffineTheta(beta1, beta0, sigma2)
        y0 = rng.uniform(-10, 10)
        ys = rng.uniform(-10, 10, size=rng.integers(2, 26))

        def single(x):
            return normal_logpdf(x, prior.mean, prior.variance) + normal_logpdf(y0, beta1 * x + beta0, sigma2)

        def multi(x):
            return normal_logpdf(x, prior.mean, prior.variance) + sum(
                normal_logpdf(y, beta1 * x + beta0, sigma2) for y in ys)

        dgp = AffineDGP(beta1, beta0, np.sqrt(sigma2))
        checks = [
            (gen_x0_posterior(theta, prior, y0), single),
            (gen_x0_posterior_multi(theta, prior, ys), multi),
            (unlabeled_posterior(theta, prior, y0, Approach.GENERATIVE), single),
            (true_posterior(dgp, prior, y0), single),
        ]
        for dist, logdensity in checks:
            worst = max(worst, *_rel_err(dist, logdensity))
    elapsed = time.perf_counter() - start
    passed = worst < 1e-6 and elapsed < 10
    record_criterion(1, passed, f"max relative error {worst:.2e} over 400 checks in {elapsed:.1f} s")
    assert passed


def test_criterion_2_gibbs_stationarity(record_criterion):
    cfg = ExperimentConfig()
    dgp, prior = cfg.affine_dgp(), cfg.label_prior()
    rng = SeededRng(5)
    data = gaussian_dataset(dgp, prior, 1000, rng.child(0))
    y0 = float(dgp.sample([0.5], rng.child(1))[0])
    start = time.perf_counter()
    chain = run_chain(AffineModel(Approach.GENERATIVE, cfg.nig_prior()), y0, data, None, prior,
                      GibbsConfig(5000, burn_in=500, seed=5))
    elapsed = time.perf_counter() - start
    stat = ks_one_sample(chain.x0, true_posterior(dgp, prior, y0).cdf).statistic
    passed = stat < 0.05 and elapsed < 30
    record_criterion(2, passed, f"KS statistic {stat:.4f} on {len(chain)} draws in {elapsed:.1f} s")
    assert passed


def test_criterion_3_implicit_prior(record_criterion):
    cfg = ExperimentConfig()
    res = implicit_prior_sweep(cfg)
    seeds = cfg.sweep_seeds
    p_reg = sign_test_pvalue(res["regression_monotone_seeds"], seeds)
    p_cls = sign_test_pvalue(res["classification_monotone_seeds"], seeds)
    size_p = res["generative_ks_size_pvalue"]
    passed = p_reg < 0.05 and p_cls < 0.05 and size_p >= 0.05
    record_criterion(3, passed, (
        f"monotone seeds regression {res['regression_monotone_seeds']}/{seeds} (p={p_reg:.3f}), "
        f"classification {res['classification_monotone_seeds']}/{seeds} (p={p_cls:.3f}); "
        f"generative KS rejections {res['generative_ks_rejections']}/{res['generative_ks_tests']} "
        f"(binomial p={size_p:.2f})"))
    assert passed


def test_criterion_4_prior_mismatch(record_criterion):
    cfg = ExperimentConfig()
    res = affine_demo(cfg)
    dgp, prior, y0 = cfg.affine_dgp(), cfg.label_prior(), res["y0"]
    target = true_posterior(dgp, prior, y0).cdf
    data_dist = GaussianDist(cfg.data_mean, cfg.data_sd**2)
    # posterior weighted by the training-label law instead of the label prior
    wrong = quad_cdf(lambda x: normal_logpdf(x, data_dist.mean, data_dist.variance)
                     + normal_logpdf(y0, dgp.slope * x + dgp.intercept, dgp.noise_sd**2), -30.0, 30.0)
    disc = res["settings"]["mismatched"]["chains"]["discriminative"].x0
    d_wrong = ks_one_sample(disc, wrong).statistic
    d_true_p = ks_one_sample(disc, target).p_value
    g_stats = [ks_one_sample(res["settings"][s]["chains"]["generative"].x0, target).statistic
               for s in ("matched", "mismatched")]
    passed = d_wrong < 0.05 and d_true_p < 1e-3 and max(g_stats) < 0.05
    record_criterion(4, passed, (f"D vs data-weighted KS {d_wrong:.4f}, D vs true p={d_true_p:.1e}, "
                                 f"G vs true KS {g_stats[0]:.4f}/{g_stats[1]:.4f}"))
    assert passed


def test_criterion_5_semi_supervised(record_criterion):
    cfg = ExperimentConfig()
    ks_accept = mad_better = 0
    for seed in range(20):
        res = semi_supervised(cfg, seed=seed)
        ks_accept += res["discriminative_ks"].p_value >= 0.05
        mad = res["generative_mad"]
        mad_better += mad["semi_supervised"] < mad["supervised"]
    sign_p = sign_test_pvalue(mad_better, 20)
    passed = ks_accept >= 18 and mad_better >= 15 and sign_p < 0.05
    record_criterion(5, passed, (f"D KS not rejected {ks_accept}/20; G MAD improved {mad_better}/20 "
                                 f"(sign test p={sign_p:.1e})"))
    assert passed


def test_criterion_6_scenarios(record_criterion):
    start = time.perf_counter()
    res = run_scenarios(ExperimentConfig())
    elapsed = time.perf_counter() - start
    gap = abs(res["identical_priors"]["generative"]["mean"] - res["identical_priors"]["discriminative"]["mean"])
    wins2, wins3 = res["imbalanced"]["generative_wins"], res["few_labels"]["generative_wins"]
    passed = wins2 >= 9 and wins3 >= 8 and gap < 0.05 and elapsed < 120
    record_criterion(6, passed, f"S1 gap {gap:.4f}; S2 wins {wins2}/10; S3 wins {wins3}/10; {elapsed:.0f} s")
    assert passed


def test_criterion_7_diagnostics(record_criterion):
    rng = np.random.default_rng(7)
    noise = rng.normal(size=10**5)
    x = np.empty_like(noise)
    x[0] = noise[0] / np.sqrt(1 - 0.81)
    for t in range(1, x.size):
        x[t] = 0.9 * x[t - 1] + noise[t]
    iat = integrated_autocorrelation_time(x)
    rejections = sum(ks_two_sample(rng.normal(size=1000), rng.normal(size=1000)).p_value < 0.05
                     for _ in range(200))
    target = GaussianDist(0.0, 1.0)
    dev = calibration_curve(target, target.sample(SeededRng(7), size=10**5)).max_deviation()
    passed = abs(iat - 19) <= 0.3 * 19 and abs(rejections / 200 - 0.05) <= 0.02 and dev < 0.01
    record_criterion(7, passed, f"IAT {iat:.1f}; KS size {rejections / 200:.3f}; calibration max deviation {dev:.4f}")
    assert passed


def test_criterion_8_determinism(record_criterion, tmp_path):
    identical = []
    for command, overrides in SMALL.items():
        args = [command, "--out", str(tmp_path), "--seed", "8", *overrides]
        outputs = []
        for _ in range(2):
            assert main(args) == EXIT_OK
            outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / command).iterdir())})
        identical.append(outputs[0] == outputs[1] and len(outputs[0]) > 0)
    passed = all(identical)
    record_criterion(8, passed, f"{sum(identical)}/{len(identical)} commands byte-identical on re-run")
    assert passed
