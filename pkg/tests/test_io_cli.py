import json
from pathlib import Path

import numpy as np
import pytest

from gendisc import __version__, io
from gendisc.cli import EXIT_CONFIG, EXIT_CONTRACT, EXIT_OK, _parse_overrides, main, resolve_config
from gendisc.core import LabelKind, LabeledDataset
from gendisc.experiments import ConfigError, ExperimentConfig, multi_obs, multi_obs_coverage
from gendisc.gibbs import Chain
from cli_configs import SMALL


def snapshot(directory: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


class TestDatasetIO:
    def test_continuous_roundtrip(self, tmp_path):
        data = LabeledDataset(np.array([0.1, -2.5, 1 / 3]), np.array([[1.0], [2.0], [np.pi]]))
        back = io.read_dataset(io.write_dataset(tmp_path / "d.csv", data))
        np.testing.assert_array_equal(back.xs, data.xs)
        np.testing.assert_array_equal(back.ys, data.ys)

    def test_categorical_roundtrip(self, tmp_path):
        data = LabeledDataset([1, 3, 2], np.array([[0.5, -1.0], [1e-17, 2.0], [3.0, 4.0]]), LabelKind.CATEGORICAL)
        back = io.read_dataset(io.write_dataset(tmp_path / "c.csv", data), LabelKind.CATEGORICAL)
        np.testing.assert_array_equal(back.xs, data.xs)
        np.testing.assert_array_equal(back.ys, data.ys)

    def test_observations_roundtrip(self, tmp_path):
        ys = np.random.default_rng(0).normal(size=(7, 2))
        np.testing.assert_array_equal(io.read_observations(io.write_observations(tmp_path / "o.csv", ys)), ys)

    def test_empty_file(self, tmp_path):
        (tmp_path / "e.csv").write_text("")
        with pytest.raises(ValueError):
            io.read_dataset(tmp_path / "e.csv")


class TestChainAndSidecar:
    def make_chain(self):
        return Chain(steps=np.array([5, 6]), x0=np.array([0.1, 0.2]), latent=np.array([[1.0], [2.0]]),
                     theta=np.array([[1.0, 0.0, 1.0], [1.1, 0.1, 0.9]]), theta_names=("beta1", "beta0", "sigma2"),
                     n_resampled=0)

    def test_chain_columns(self, tmp_path):
        path = io.write_chain(tmp_path / "chain.csv", self.make_chain(), {"seed": 1})
        lines = path.read_text().splitlines()
        assert lines[0] == "step,x0,xtilde_1,theta_1,theta_2,theta_3"
        assert lines[1] == "5,0.1,1.0,1.0,0.0,1.0"

    def test_sidecar_contents(self, tmp_path):
        path = io.write_chain(tmp_path / "chain.csv", self.make_chain(), {"seed": 1})
        meta = json.loads(Path(str(path) + ".meta.json").read_text())
        assert meta["config"] == {"seed": 1}
        assert meta["version"] == __version__
        assert meta["file"] == "chain.csv"
        assert meta["theta_names"] == ["beta1", "beta0", "sigma2"]

    def test_tidy_columns(self, tmp_path):
        path = io.write_tidy(tmp_path / "t.csv", {"a": ([0.0, 1.0], [2.0, 3.0])})
        assert path.read_text() == "series,x,y\na,0.0,2.0\na,1.0,3.0\n"

    def test_json_is_canonical(self, tmp_path):
        path = io.write_json(tmp_path / "j.json", {"b": np.float64(0.1), "a": np.arange(2)})
        assert json.loads(path.read_text()) == {"a": [0, 1], "b": 0.1}
        assert path.read_text().index('"a"') < path.read_text().index('"b"')


class TestConfig:
    def test_every_field_has_default(self):
        ExperimentConfig()

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="bogus_key"):
            ExperimentConfig.from_mapping({"bogus_key": 1})

    def test_overrides(self):
        assert _parse_overrides(["--steps=10", "--radius", "2.5", "--approach=d"]) == {
            "steps": 10, "radius": 2.5, "approach": "d"}
        with pytest.raises(ConfigError):
            _parse_overrides(["--steps"])

    def test_file_then_overrides_then_flags(self, tmp_path):
        cfg_file = tmp_path / "c.json"
        cfg_file.write_text(json.dumps({"steps": 500, "seed": 4, "radius": 1.0}))
        cfg = resolve_config("scenarios", str(cfg_file), 9, "x", {"radius": 2.0})
        assert (cfg.steps, cfg.seed, cfg.radius, cfg.out, cfg.experiment) == (500, 9, 2.0, "x", "scenarios")

    def test_invalid_values(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(burn_in=5000, steps=100)
        with pytest.raises(ConfigError):
            ExperimentConfig(approach="neither")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"steps": 2.5})


class TestCliExitCodes:
    def test_unknown_key_exit(self, tmp_path, capsys):
        assert main(["scenarios", "--out", str(tmp_path), "--nonsense=1"]) == EXIT_CONFIG
        assert "nonsense" in capsys.readouterr().err

    def test_unreadable_config_exit(self, tmp_path):
        (tmp_path / "bad.json").write_text("{not json")
        assert main(["scenarios", "--config", str(tmp_path / "bad.json")]) == EXIT_CONFIG

    def test_discriminative_multi_obs_exit(self, tmp_path, capsys):
        rc = main(["multi-obs", "--out", str(tmp_path), "--approach=discriminative"])
        assert rc == EXIT_CONTRACT
        assert "multi-observation" in capsys.readouterr().err

    def test_version(self, capsys):
        with pytest.raises(SystemExit):
            main(["--version"])
        assert __version__ in capsys.readouterr().out


class TestCliCommands:
    @pytest.mark.parametrize("command", sorted(SMALL))
    def test_rerun_is_byte_identical(self, tmp_path, command, capsys):
        args = [command, "--out", str(tmp_path), "--seed", "11", *SMALL[command]]
        assert main(args) == EXIT_OK
        first = snapshot(tmp_path / command)
        assert main(args) == EXIT_OK
        assert snapshot(tmp_path / command) == first
        assert any(name.endswith(".meta.json") for name in first)
        printed = capsys.readouterr().out.split()
        assert all(Path(p).exists() for p in printed)

    def test_every_output_has_sidecar(self, tmp_path):
        assert main(["scenarios", "--out", str(tmp_path), *SMALL["scenarios"]]) == EXIT_OK
        files = snapshot(tmp_path / "scenarios")
        for name in files:
            if not name.endswith(".meta.json"):
                meta = json.loads(files[name + ".meta.json"])
                assert meta["config"]["runs"] == 2 and "substitution" in meta

    def test_seed_changes_output(self, tmp_path):
        for seed in ("1", "2"):
            assert main(["multi-obs", "--out", str(tmp_path / seed), "--seed", seed, *SMALL["multi-obs"]]) == 0
        assert (tmp_path / "1/multi-obs/posterior_sd.csv").read_bytes() != (tmp_path / "2/multi-obs/posterior_sd.csv").read_bytes()

    def test_no_unlabeled_reduces_to_supervised(self, tmp_path):
        args = ["semi-supervised", "--out", str(tmp_path), "--semi_steps=600", "--n_unlabeled=0"]
        assert main(args) == EXIT_OK
        out = tmp_path / "semi-supervised"
        for approach in ("generative", "discriminative"):
            assert (out / f"chain_{approach}_supervised.csv").read_bytes() == \
                (out / f"chain_{approach}_semi_supervised.csv").read_bytes()


class TestMultiObservation:
    def test_posterior_sd_decreasing(self):
        rows = multi_obs(ExperimentConfig(steps=1000, burn_in=200), seed=0, n0_values=[1, 5, 25])
        sds = [r["ppd_sd"] for r in rows]
        assert sds[0] > sds[1] > sds[2]
        true_sds = [r["true_sd"] for r in rows]
        np.testing.assert_allclose(sds, true_sds, rtol=0.15)

    def test_recovery_coverage(self):
        cover = multi_obs_coverage(ExperimentConfig(steps=600, burn_in=200), n0=25, n_seeds=100)
        assert cover["rate"] >= 0.95
