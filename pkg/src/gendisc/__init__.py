"""Posterior predictive sampling for generative and discriminative Bayesian models."""

__version__ = "v0.1.0"
