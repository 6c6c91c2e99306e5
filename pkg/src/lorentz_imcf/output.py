"""Trajectory and snapshot CSV files.

Numbers are written with 17 significant digits, enough to recover every
double exactly, so a stored file reproduces the in-memory run bit for bit.
"""

from __future__ import annotations

import csv
import math
import os

import numpy as np

from .errors import ConfigError, MonitorFailure
from .flow import GraphState
from .monitors import TrajectoryRecord, node_fields

HEADER = TrajectoryRecord.columns()
SNAPSHOT_FIELDS = ["u", "u_rescaled", "v", "H", "grad_phi"]


def fmt(x):
    return format(float(x), ".17g")


def _open(path):
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from None


def emit_csv(records, path):
    """Write trajectory rows; times must be strictly increasing."""
    times = [r.t for r in records]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("trajectory rows must be strictly increasing in t")
    with _open(path) as fh:
        fh.write(",".join(HEADER) + "\n")
        for r in records:
            fh.write(",".join(fmt(x) for x in r.values()) + "\n")
    return path


def read_trajectory(path):
    """Records from a trajectory CSV.

    A file that is missing is a configuration problem; one whose contents
    are malformed (wrong header, non-numeric or non-finite values, times out
    of order) is reported as a monitor failure.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read trajectory {path}: {exc.strerror}") from None
    if not rows or rows[0] != HEADER:
        raise MonitorFailure(f"{path}: header does not match the trajectory format")
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(HEADER):
            raise MonitorFailure(f"{path} line {lineno}: expected {len(HEADER)} fields")
        try:
            vals = [float(x) for x in row]
        except ValueError:
            raise MonitorFailure(f"{path} line {lineno}: non-numeric value") from None
        if not all(math.isfinite(v) for v in vals):
            raise MonitorFailure(f"{path} line {lineno}: non-finite value")
        rec = TrajectoryRecord(*vals)
        if records and rec.t <= records[-1].t:
            raise MonitorFailure(f"{path} line {lineno}: time does not increase")
        records.append(rec)
    if not records:
        raise MonitorFailure(f"{path}: no data rows")
    return records


def emit_snapshot(state: GraphState, grid, path):
    """Per-node CSV: t, coordinates, then u, u_rescaled, v, H, grad_phi."""
    f = node_fields(state, grid)
    coords = grid.coordinates()
    columns = {"t": np.full(grid.interior_shape, state.t), **coords}
    for name in SNAPSHOT_FIELDS:
        columns[name] = getattr(f, name)
    names = list(columns)
    flat = [np.asarray(columns[k], dtype=float).ravel() for k in names]
    with _open(path) as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*flat):
            fh.write(",".join(fmt(x) for x in row) + "\n")
    return path


def load_snapshot(path, grid, c, mode="raw"):
    """Rebuild a :class:`GraphState` from a snapshot written for ``grid``."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.size != int(np.prod(grid.interior_shape)):
        raise ValueError(f"snapshot has {data.size} nodes, grid has "
                         f"{int(np.prod(grid.interior_shape))}")
    column = "u" if mode == "raw" else "u_rescaled"
    u = np.asarray(data[column], dtype=float).reshape(grid.interior_shape)
    return GraphState(float(np.atleast_1d(data["t"])[0]), u, c, mode)
