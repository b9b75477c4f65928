"""CSV and JSON serialization for datasets, chains, tables and plot data.

Every writer emits a ``<file>.meta.json`` sidecar holding the resolved
configuration and the package version. Numbers are written with ``repr``
so output bytes depend only on the values.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .core import LabelKind, LabeledDataset
from .gibbs import Chain


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_sidecar(path: Path, config: Mapping[str, Any], extra: Mapping[str, Any] | None = None) -> Path:
    meta = {"config": dict(config), "version": __version__, "file": Path(path).name}
    if extra:
        meta.update(extra)
    side = Path(str(path) + ".meta.json")
    side.write_text(dumps(meta))
    return side


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence], config=None, extra=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    if config is not None:
        write_sidecar(path, config, extra)
    return path


def write_json(path, obj, config=None, extra=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    if config is not None:
        write_sidecar(path, config, extra)
    return path


def write_tidy(path, series: Mapping[str, tuple[Sequence, Sequence]], config=None, extra=None) -> Path:
    """Plot data as ``series,x,y`` rows; ``series`` maps a name to (xs, ys)."""
    rows = ((name, x, y) for name, (xs, ys) in series.items() for x, y in zip(xs, ys))
    return write_rows(path, ("series", "x", "y"), rows, config, extra)


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


def write_dataset(path, data: LabeledDataset, config=None) -> Path:
    header = ["x"] + [f"y{i}" for i in range(1, data.dim + 1)]
    rows = ([x, *y] for x, y in zip(data.xs, data.ys))
    return write_rows(path, header, rows, config)


def read_dataset(path, kind: LabelKind = LabelKind.CONTINUOUS) -> LabeledDataset:
    arr = _read_numeric(path)
    xs = arr[:, 0].astype(int) if kind is LabelKind.CATEGORICAL else arr[:, 0]
    return LabeledDataset(xs, arr[:, 1:], kind)


def write_observations(path, ys, config=None) -> Path:
    ys = np.asarray(ys, dtype=float)
    ys = ys.reshape(ys.shape[0], -1)
    return write_rows(path, [f"y{i}" for i in range(1, ys.shape[1] + 1)], ys, config)


def read_observations(path) -> np.ndarray:
    return _read_numeric(path)


def _read_numeric(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    body = [[float(v) for v in r] for r in rows[1:] if r]
    return np.asarray(body, dtype=float).reshape(len(body), len(rows[0]))


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------


def chain_header(chain: Chain) -> list[str]:
    header = ["step", "x0"] + [f"xtilde_{j}" for j in range(1, chain.latent.shape[1] + 1)]
    if chain.theta is not None:
        header += [f"theta_{k}" for k in range(1, chain.theta.shape[1] + 1)]
    return header


def write_chain(path, chain: Chain, config=None) -> Path:
    def rows():
        for i in range(len(chain)):
            row = [chain.steps[i], chain.x0[i], *chain.latent[i]]
            if chain.theta is not None:
                row += list(chain.theta[i])
            yield row

    extra = {"theta_names": list(chain.theta_names)} if chain.theta is not None else None
    return write_rows(path, chain_header(chain), rows(), config, extra)
