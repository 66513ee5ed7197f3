"""Persistence: timeseries and snapshot CSVs, checkpoints, run manifests.

All numeric CSV output uses 17-significant-digit decimal formatting, which
round-trips binary doubles exactly, so downstream analysis reproduces
internal values bit for bit.  Completed files are written atomically
(temp file then rename); the streaming timeseries is renamed into place on
close.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from .flow import FlowState
from .geometry import ProfileABC, abc_to_rfg
from .grid import StaggeredGrid

TIMESERIES_COLUMNS = (
    "step",
    "t",
    "dt",
    "inv_kappa23_fiber",
    "g_fiber",
    "min_g",
    "max_abs_B",
    "max_abs_C",
)

SNAPSHOT_COLUMNS = (
    "theta",
    "A",
    "B",
    "C",
    "rho",
    "f",
    "g",
    "K",
    "gamma2",
    "length_from_pi2",
)

_CHECKPOINT_MAGIC = "cp2flow-checkpoint v1"


class CheckpointError(ValueError):
    """Malformed or inconsistent checkpoint file."""


def fmt(x):
    """Round-trip-exact decimal rendering of a float."""
    return format(float(x), ".17g")


def _atomic_write_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


class TimeseriesWriter:
    """Streaming CSV writer for scalar monitors; one instance per run."""

    def __init__(self, path):
        self.path = str(path)
        self._tmp = self.path + ".tmp"
        self._fh = open(self._tmp, "w")
        self._fh.write(",".join(TIMESERIES_COLUMNS) + "\n")
        self.rows_written = 0

    def write(self, row):
        self._fh.write(
            ",".join(
                (
                    str(row.step_index),
                    fmt(row.t),
                    fmt(row.dt),
                    fmt(row.inv_kappa23_fiber),
                    fmt(row.g_fiber),
                    fmt(row.min_g),
                    fmt(row.max_abs_b),
                    fmt(row.max_abs_c),
                )
            )
            + "\n"
        )
        self.rows_written += 1

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None
            os.replace(self._tmp, self.path)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_timeseries(path):
    """Timeseries CSV back as a dict of column -> array."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    return {name: np.asarray(data[name]) for name in data.dtype.names}


def write_snapshot(path, profile, diagnostics):
    """Full profile snapshot: regularized fields, raw profiles, and the
    derived diagnostic columns, one row per cell."""
    rfg = abc_to_rfg(profile)
    cols = (
        profile.grid.theta,
        profile.a,
        profile.b,
        profile.c,
        rfg.rho,
        rfg.f,
        rfg.g,
        diagnostics.kahler,
        diagnostics.gamma2,
        diagnostics.length_from_right,
    )
    lines = [",".join(SNAPSHOT_COLUMNS)]
    for i in range(profile.grid.n_cells):
        lines.append(",".join(fmt(col[i]) for col in cols))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_snapshot(path):
    """Snapshot CSV back as a dict of column -> array."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.asarray(data[name]) for name in data.dtype.names}


@dataclass
class Checkpoint:
    """Full-precision restart state."""

    t: float
    step_index: int
    n_cells: int
    epsilon: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def to_state(self):
        grid = StaggeredGrid(self.n_cells)
        return FlowState(
            t=self.t,
            step_index=self.step_index,
            profile=ProfileABC(grid, self.a.copy(), self.b.copy(), self.c.copy()),
        )


def write_checkpoint(path, state, epsilon):
    """Self-describing text checkpoint: scalars then one value per line per
    array, everything in round-trip decimal.  Restoring and re-saving is
    byte-identical."""
    p = state.profile
    lines = [
        _CHECKPOINT_MAGIC,
        f"t {fmt(state.t)}",
        f"step_index {state.step_index}",
        f"n_cells {p.grid.n_cells}",
        f"epsilon {fmt(epsilon)}",
    ]
    for name, arr in (("a", p.a), ("b", p.b), ("c", p.c)):
        lines.append(f"array {name} {len(arr)}")
        lines.extend(fmt(v) for v in arr)
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_checkpoint(path):
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from exc
    if not lines or lines[0] != _CHECKPOINT_MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic line)")

    def scalar(idx, key, conv):
        parts = lines[idx].split()
        if len(parts) != 2 or parts[0] != key:
            raise CheckpointError(f"expected '{key} <value>' on line {idx + 1}")
        try:
            return conv(parts[1])
        except ValueError as exc:
            raise CheckpointError(f"bad value for {key}: {parts[1]!r}") from exc

    try:
        t = scalar(1, "t", float)
        step_index = scalar(2, "step_index", int)
        n_cells = scalar(3, "n_cells", int)
        epsilon = scalar(4, "epsilon", float)
        arrays = {}
        idx = 5
        for name in ("a", "b", "c"):
            parts = lines[idx].split()
            if len(parts) != 3 or parts[0] != "array" or parts[1] != name:
                raise CheckpointError(f"expected 'array {name} <n>' on line {idx + 1}")
            n = int(parts[2])
            if n != n_cells:
                raise CheckpointError(f"array {name} length {n} != n_cells {n_cells}")
            vals = lines[idx + 1 : idx + 1 + n]
            if len(vals) != n:
                raise CheckpointError(f"array {name} truncated")
            arrays[name] = np.array([float(v) for v in vals])
            idx += 1 + n
    except (IndexError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint: {exc}") from exc
    return Checkpoint(t, step_index, n_cells, epsilon, arrays["a"], arrays["b"], arrays["c"])


def write_manifest(path, manifest):
    _atomic_write_text(path, json.dumps(manifest, indent=2) + "\n")


def read_manifest(path):
    with open(path) as fh:
        return json.load(fh)
