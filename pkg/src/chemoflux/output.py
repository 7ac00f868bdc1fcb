"""Files written by a run: the sampled time series, a JSON summary and field
snapshots (binary with a text header, plus a gnuplot-readable text copy)."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Grid

SERIES_COLUMNS = (
    "t", "phi_energy", "dissipation", "l2_dev", "rhs_bound", "lemma31_residual",
    "lemma32_v_ok", "lemma32_w_ok", "linf_dev_u", "linf_dev_v", "linf_dev_w",
    "dt", "mass_drift",
)
SUMMARY_KEYS = (
    "stopping_reason", "final_linf_dev_u", "final_linf_dev_v", "final_linf_dev_w",
    "decay_rate_fit", "phi_energy_initial", "phi_energy_final",
    "cumulative_l2_time_integral", "condition_report", "constant_convention",
)


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    return repr(float(value))


def write_series(path, reports) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_COLUMNS)
        for report in reports:
            row = report.as_dict()
            writer.writerow([_cell(row[c]) for c in SERIES_COLUMNS])
    return path


def read_series(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {c: np.array([float(r[c]) for r in rows]) for c in SERIES_COLUMNS}


def json_safe(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(json_safe(obj), indent=2, sort_keys=True)


def write_summary(path, summary: dict) -> Path:
    missing = [k for k in SUMMARY_KEYS if k not in summary]
    if missing:
        raise ValueError(f"summary lacks keys {missing}")
    path = Path(path)
    path.write_text(dumps(summary) + "\n")
    return path


@dataclass
class Snapshot:
    grid: Grid
    t: float
    values: np.ndarray


def snapshot_name(step: int) -> str:
    return f"u_{step}.dat"


def write_snapshot(path, grid: Grid, values, t: float) -> Path:
    """Four text header lines, then little-endian float64 in row-major order."""
    path = Path(path)
    values = np.ascontiguousarray(grid.check(values), dtype="<f8")
    header = (
        f"dimension {grid.n}\n"
        f"extents {' '.join(repr(e) for e in grid.extent)}\n"
        f"cells {' '.join(str(c) for c in grid.cells)}\n"
        f"time {float(t)!r}\n"
    )
    with path.open("wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(values.tobytes(order="C"))
    return path


def read_snapshot(path) -> Snapshot:
    path = Path(path)
    with path.open("rb") as fh:
        lines = [fh.readline().decode("ascii").split() for _ in range(4)]
        payload = fh.read()
    try:
        tags = [line[0] for line in lines]
        if tags != ["dimension", "extents", "cells", "time"]:
            raise ValueError(f"unexpected header tags {tags}")
        dim = int(lines[0][1])
        extent = tuple(float(x) for x in lines[1][1:])
        cells = tuple(int(x) for x in lines[2][1:])
        t = float(lines[3][1])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed snapshot header ({exc})") from exc
    grid = Grid(extent, cells)
    if grid.n != dim:
        raise ValueError(f"{path}: dimension {dim} does not match {len(cells)} cell counts")
    values = np.frombuffer(payload, dtype="<f8")
    if values.size != grid.size:
        raise ValueError(f"{path}: expected {grid.size} values, found {values.size}")
    return Snapshot(grid, t, values.reshape(grid.shape).astype(float))


def write_gnuplot(path, grid: Grid, values, t: float) -> Path:
    """Columns ``x value`` (1D) or ``x y value`` with blank lines between rows
    (2D, usable with ``splot``)."""
    path = Path(path)
    values = grid.check(values)
    lines = [f"# t = {float(t)!r}"]
    centers = grid.centers()
    if grid.n == 1:
        lines += [f"{x:.17g} {f:.17g}" for x, f in zip(centers[0], values)]
    else:
        for i, x in enumerate(centers[0]):
            lines += [f"{x:.17g} {y:.17g} {values[i, j]:.17g}" for j, y in enumerate(centers[1])]
            lines.append("")
    path.write_text("\n".join(lines) + "\n")
    return path


class SnapshotWriter:
    """Stepper hook saving ``u`` every ``every`` steps (0: never from the hook)."""

    def __init__(self, directory, every: int = 0):
        self.directory = Path(directory)
        self.every = every
        self.written: list[Path] = []

    def save(self, state):
        path = self.directory / snapshot_name(state.steps)
        if path in self.written:
            return
        write_snapshot(path, state.grid, state.u, state.t)
        write_gnuplot(path.with_suffix(".txt"), state.grid, state.u, state.t)
        self.written.append(path)

    def __call__(self, state):
        if self.every and state.steps % self.every == 0:
            self.save(state)
