"""Command-line experiment runner.

Usage::

    gendisc COMMAND [--config PATH] [--seed U64] [--out DIR] [--key=value ...]

Commands: affine-demo, semi-supervised, multi-obs, scenarios, implicit-prior.
Exit codes: 0 success, 2 configuration error, 3 model-contract error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from . import io
from .core import GaussianDist, ModelContractError
from .experiments import (
    ConfigError,
    ExperimentConfig,
    affine_demo,
    histogram_series,
    implicit_prior_sweep,
    multi_obs,
    multi_obs_coverage,
    run_scenarios,
    semi_supervised,
)

log = logging.getLogger("gendisc")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONTRACT = 3


def _gauss(d: GaussianDist) -> dict:
    return {"mean": d.mean, "variance": d.variance}


def _ks(r) -> dict:
    return {"statistic": r.statistic, "p_value": r.p_value}


def _density_series(dist: GaussianDist, lo: float, hi: float, n: int = 200):
    xs = np.linspace(lo, hi, n)
    return xs, dist.pdf(xs)


def cmd_affine_demo(cfg: ExperimentConfig, out: Path) -> list[Path]:
    res = affine_demo(cfg)
    conf = cfg.to_dict()
    files = []
    summary = {"x0": res["x0"], "y0": res["y0"], "y_far": res["y_far"],
               "true_posterior": _gauss(res["true_posterior"]), "settings": {}}
    ppd_series, prior_series = {}, {}
    target = res["true_posterior"]
    lo, hi = target.mean - 6 * target.sd, target.mean + 6 * target.sd
    ppd_series["true_posterior"] = _density_series(target, lo, hi)
    for name, s in res["settings"].items():
        entry = {"data_posterior": _gauss(s["data_posterior"]), "ks": {}, "out_of_support": s["out_of_support"],
                 "true_mass_near_far_x0": s["true_mass_near_far_x0"], "implicit_prior": {}}
        ppd_series[f"{name}/data_posterior"] = _density_series(s["data_posterior"], lo, hi)
        for approach, chain in s["chains"].items():
            files.append(io.write_chain(out / f"chain_{name}_{approach}.csv", chain, conf))
            entry["ks"][approach] = {k: _ks(v) for k, v in s["ks"][approach].items()}
            ppd_series[f"{name}/{approach}"] = histogram_series(chain.x0, lo=lo, hi=hi)
            samples = s["implicit_prior"][approach]
            prior_series[f"{name}/{approach}"] = histogram_series(samples, lo=-5.0, hi=8.0)
            entry["implicit_prior"][approach] = {"mean": float(samples.mean()), "sd": float(samples.std(ddof=1))}
        summary["settings"][name] = entry
    prior_series["label_prior"] = _density_series(cfg.label_prior(), -5.0, 8.0)
    prior_series["data_distribution"] = _density_series(GaussianDist(cfg.data_mean, cfg.data_sd**2), -5.0, 8.0)
    files.append(io.write_tidy(out / "ppd_density.csv", ppd_series, conf))
    files.append(io.write_tidy(out / "implicit_prior.csv", prior_series, conf))
    files.append(io.write_json(out / "summary.json", summary, conf))
    return files


def cmd_semi_supervised(cfg: ExperimentConfig, out: Path) -> list[Path]:
    res = semi_supervised(cfg)
    conf = cfg.to_dict()
    files = []
    for (approach, mode), chain in res["chains"].items():
        files.append(io.write_chain(out / f"chain_{approach}_{mode}.csv", chain, conf))
    curves = {f"{a}/{m}": (c.alphas, c.coverage) for (a, m), c in res["calibration"].items()}
    files.append(io.write_tidy(out / "calibration.csv", curves, conf))
    summary = {
        "x0": res["x0"], "y0": res["y0"], "true_posterior": _gauss(res["true_posterior"]),
        "calibration_mad": {f"{a}/{m}": c.mad() for (a, m), c in res["calibration"].items()},
        "discriminative_ks": _ks(res["discriminative_ks"]),
        "discriminative_iat": list(res["discriminative_iat"]),
    }
    files.append(io.write_json(out / "summary.json", summary, conf))
    return files


def cmd_multi_obs(cfg: ExperimentConfig, out: Path) -> list[Path]:
    rows = multi_obs(cfg)
    conf = cfg.to_dict()
    header = ["n0", "ppd_mean", "ppd_sd", "true_mean", "true_sd"]
    files = [io.write_rows(out / "posterior_sd.csv", header, ([r[h] for h in header] for r in rows), conf)]
    cover = multi_obs_coverage(cfg, n0=max(cfg.n0_values))
    files.append(io.write_json(out / "summary.json", {"table": rows, "coverage": cover}, conf))
    return files


def cmd_scenarios(cfg: ExperimentConfig, out: Path) -> list[Path]:
    res = run_scenarios(cfg)
    conf = cfg.to_dict()
    note = {"substitution": "synthetic three-class Gaussian data with a conjugate Gaussian-class generative "
                            "model and a logistic discriminative model (desk scale)"}
    table = []
    for name, entry in res.items():
        for approach in ("generative", "discriminative"):
            table.append([name, approach, entry[approach]["mean"], entry[approach]["sd"]])
    files = [io.write_rows(out / "accuracy.csv", ["scenario", "approach", "mean", "sd"], table, conf, note)]
    run_rows = ([name, i, r["generative"], r["discriminative"]]
                for name, entry in res.items() for i, r in enumerate(entry["runs"]))
    files.append(io.write_rows(out / "accuracy_runs.csv", ["scenario", "run", "generative", "discriminative"],
                               run_rows, conf, note))
    files.append(io.write_json(out / "accuracy.json", res, conf, note))
    return files


def cmd_implicit_prior(cfg: ExperimentConfig, out: Path) -> list[Path]:
    res = implicit_prior_sweep(cfg)
    conf = cfg.to_dict()
    files = []
    for key in ("regression", "classification"):
        rows = res[key]
        header = list(rows[0])
        files.append(io.write_rows(out / f"{key}.csv", header, ([r[h] for h in header] for r in rows), conf))
    summary = {
        "regression_monotone_seeds": res["regression_monotone_seeds"],
        "classification_monotone_seeds": res["classification_monotone_seeds"],
        "seeds": cfg.sweep_seeds,
        "generative_ks_rejections": res["generative_ks_rejections"],
        "generative_ks_tests": res["generative_ks_tests"],
        "generative_ks_size_pvalue": res["generative_ks_size_pvalue"],
    }
    files.append(io.write_json(out / "summary.json", summary, conf))
    return files


COMMANDS: dict[str, Callable[[ExperimentConfig, Path], list[Path]]] = {
    "affine-demo": cmd_affine_demo,
    "semi-supervised": cmd_semi_supervised,
    "multi-obs": cmd_multi_obs,
    "scenarios": cmd_scenarios,
    "implicit-prior": cmd_implicit_prior,
}


def _parse_overrides(extra: list[str]) -> dict:
    overrides = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument: {tok}")
        if "=" in tok:
            key, value = tok[2:].split("=", 1)
        elif i + 1 < len(extra) and not extra[i + 1].startswith("--"):
            key, value = tok[2:], extra[i + 1]
            i += 1
        else:
            raise ConfigError(f"missing value for {tok}")
        overrides[key] = _literal(value)
        i += 1
    return overrides


def _literal(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def resolve_config(command: str, config_path: str | None, seed: int | None, out: str | None,
                   overrides: dict) -> ExperimentConfig:
    mapping: dict = {}
    if config_path:
        try:
            mapping = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(mapping, dict):
            raise ConfigError("config file must hold a flat JSON object")
    mapping.update(overrides)
    mapping["experiment"] = command
    if seed is not None:
        mapping["seed"] = seed
    if out is not None:
        mapping["out"] = out
    return ExperimentConfig.from_mapping(mapping)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gendisc", description="Generative vs discriminative posterior predictive experiments.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="flat JSON config file")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args.command, args.config, args.seed, args.out, _parse_overrides(extra))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out) / args.command
    out.mkdir(parents=True, exist_ok=True)
    try:
        files = COMMANDS[args.command](cfg, out)
    except ModelContractError as exc:
        print(f"model contract error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
