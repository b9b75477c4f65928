"""Small but complete configurations for exercising every CLI command quickly."""

SMALL = {
    "affine-demo": ["--steps=400", "--burn_in=100", "--n_labeled=200", "--n_outer=500", "--n_theta=200"],
    "semi-supervised": ["--semi_steps=600", "--n_unlabeled=5"],
    "multi-obs": ["--steps=400", "--burn_in=100", "--coverage_seeds=5"],
    "scenarios": ["--runs=2", "--n_train=200", "--n_test=200", "--n_train_small=30", "--scenario_steps=60",
                  "--scenario_burn_in=20"],
    "implicit-prior": ["--sweep_seeds=2", "--n_outer=500", "--n_theta=100", "--sweep_n_regression=500",
                       "--sweep_n_labeled=100"],
}
