"""Shared CSV loading and schema validation."""

import numpy as np

import matplotlib

matplotlib.use("Agg")

TIMESERIES_REQUIRED = ("step", "t", "inv_kappa23_fiber")
SNAPSHOT_REQUIRED = ("theta", "K", "gamma2", "length_from_pi2")


class SchemaError(ValueError):
    """Input CSV does not carry the documented columns."""


def load_csv(path, required):
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if data.dtype.names is None:
        raise SchemaError(f"{path}: no header row")
    missing = [col for col in required if col not in data.dtype.names]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    data = np.atleast_1d(data)
    return {name: np.asarray(data[name]) for name in data.dtype.names}


def save(fig, out_path):
    # Date-free metadata keeps output bytes deterministic for fixed inputs
    fig.savefig(out_path, dpi=150, metadata={"Software": "cp2flow-plots"})
