"""Run configuration: an INI-style ``key = value`` file with sections.

Every key is listed in ``SCHEMA`` together with its default (``REQUIRED``
marks keys without one). Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conditions import DISCRETE, EXACT
from .diagnostics import CONVENTIONS
from .errors import ConfigError
from .grid import MAX_CELLS, MIN_CELLS, Grid
from .model import ModelParams
from .stepper import StepControl

REQUIRED = object()
PROFILES = ("constant", "cosine", "gaussian", "two-bump", "file")

SCHEMA = {
    "model": {
        "m": REQUIRED, "p": REQUIRED, "q": REQUIRED,
        "chi": REQUIRED, "xi": REQUIRED, "alpha": REQUIRED,
        "beta": REQUIRED, "gamma": REQUIRED, "delta": REQUIRED,
    },
    "grid": {
        "dim": None,            # inferred from the number of extents
        "extent": REQUIRED,     # comma separated, one per axis
        "cells": REQUIRED,      # comma separated, or one value for all axes
    },
    "initial": {
        "profile": REQUIRED,    # constant | cosine | gaussian | two-bump | file
        "offset": "1.0",
        "amplitude": "0.5",
        "width": "0.1",         # gaussian width as a fraction of the extent
        "center": "0.5",        # gaussian centre as a fraction of the extent
        "file": "",
    },
    "control": {
        "dt_init": "1e-3",
        "dt_min": "1e-12",
        "dt_max": "1e-2",
        "cfl_safety": "0.4",
        "t_end": "10.0",
        "convergence_tol": "1e-6",
        "max_steps": "",
    },
    "numerics": {
        "elliptic_tol": "1e-10",
        "quad_tol": "1e-10",
        "constant_convention": "squared",
        "constant_provenance": EXACT,
        "ps_trials": "200",
        "sample_cadence": "",   # empty: every step up to 10^4 steps
        "seed": "0",
    },
    "output": {
        "directory": "chemoflux-out",
        "snapshot_every": "0",  # 0: initial and final snapshot only
    },
}


def describe_defaults() -> str:
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, default in keys.items():
            shown = "(required)" if default is REQUIRED else ("(inferred)" if default is None else default or "(unset)")
            lines.append(f"  {key} = {shown}")
    return "\n".join(lines)


@dataclass
class InitialSpec:
    profile: str
    offset: float = 1.0
    amplitude: float = 0.5
    width: float = 0.1
    center: float = 0.5
    file: str = ""


@dataclass
class RunConfig:
    params: ModelParams
    grid: Grid
    initial: InitialSpec
    control: StepControl
    elliptic_tol: float = 1e-10
    quad_tol: float = 1e-10
    constant_convention: str = "squared"
    constant_provenance: str = EXACT
    ps_trials: int = 200
    seed: int = 0
    output_dir: Path = field(default_factory=lambda: Path("chemoflux-out"))
    snapshot_every: int = 0
    base_dir: Path = field(default_factory=Path.cwd)

    def initial_density(self) -> np.ndarray:
        return initial_profile(self.initial, self.grid, self.base_dir)


def _gaussian(grid: Grid, center, width):
    r2 = sum(((x - center * L) / (width * L)) ** 2 for x, L in zip(grid.mesh(), grid.extent))
    return np.exp(-0.5 * r2)


def initial_profile(spec: InitialSpec, grid: Grid, base_dir=Path(".")) -> np.ndarray:
    """Named initial densities; the cosine profile is tensorized over axes."""
    if spec.profile == "constant":
        return np.full(grid.shape, spec.offset)
    if spec.profile == "cosine":
        modes = np.ones(grid.shape)
        for x, L in zip(grid.mesh(), grid.extent):
            modes = modes * np.cos(np.pi * x / L)
        return spec.offset + spec.amplitude * modes
    if spec.profile == "gaussian":
        return np.maximum(spec.offset + spec.amplitude * _gaussian(grid, spec.center, spec.width), 0.0)
    if spec.profile == "two-bump":
        bumps = _gaussian(grid, 0.25, spec.width) + 0.5 * _gaussian(grid, 0.7, spec.width)
        return np.maximum(spec.offset + spec.amplitude * bumps, 0.0)
    if spec.profile == "file":
        from .output import read_snapshot

        path = Path(spec.file)
        if not path.is_absolute():
            path = Path(base_dir) / path
        snap = read_snapshot(path)
        if snap.grid.cells != grid.cells:
            raise ConfigError(f"snapshot {path} has cells {snap.grid.cells}, grid has {grid.cells}")
        return snap.values
    raise ConfigError(f"unknown profile {spec.profile!r}")


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def parse_config(text: str, base_dir=None) -> RunConfig:
    """Strict parse of a configuration file's text into a ``RunConfig``.

    Raises ``ConfigError`` listing every problem found.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc}") from exc

    problems = []
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        for key in parser[section]:
            if key not in SCHEMA[section]:
                problems.append(f"unknown key {key!r} in [{section}]")
    for section, keys in SCHEMA.items():
        for key, default in keys.items():
            if parser.has_option(section, key):
                values[(section, key)] = parser.get(section, key).strip()
            elif default is REQUIRED:
                problems.append(f"missing required key {key!r} in [{section}]")
            else:
                values[(section, key)] = default
    if any(problem.startswith("missing") for problem in problems):
        raise ConfigError(problems)

    def number(section, key, kind=float):
        raw = values[(section, key)]
        try:
            value = kind(raw)
        except (TypeError, ValueError):
            problems.append(f"{key} = {raw!r} is not a valid {kind.__name__}")
            return math.nan if kind is float else 0
        if kind is float and not math.isfinite(value):
            problems.append(f"{key} must be finite")
        return value

    def optional_int(section, key):
        raw = values[(section, key)]
        return None if raw in ("", None) else number(section, key, int)

    model = {k: number("model", k) for k in SCHEMA["model"]}

    try:
        extent = _floats(values[("grid", "extent")])
        cells = [int(c) for c in _floats(values[("grid", "cells")])]
    except ValueError:
        problems.append("grid extent/cells must be numeric lists")
        extent, cells = [1.0], [MIN_CELLS]
    if len(cells) == 1 and len(extent) > 1:
        cells = cells * len(extent)
    dim_raw = values[("grid", "dim")]
    dim = len(extent) if dim_raw is None else number("grid", "dim", int)
    if dim not in (1, 2):
        problems.append("grid dim must be 1 or 2")
    if len(extent) != dim or len(cells) != dim:
        problems.append(f"grid dim = {dim} needs {dim} extent(s) and cell count(s)")
    if any(not e > 0 for e in extent):
        problems.append("grid extent must be > 0")
    if any(c < MIN_CELLS or c > MAX_CELLS for c in cells):
        problems.append(f"cells must lie in [{MIN_CELLS}, {MAX_CELLS}]")

    params = None
    try:
        params = ModelParams(**model, n=dim if dim in (1, 2) else 1)
    except ValueError as exc:
        problems.extend(str(exc).split("; "))

    profile = values[("initial", "profile")]
    if profile not in PROFILES:
        problems.append(f"profile must be one of {', '.join(PROFILES)}")
    initial = InitialSpec(
        profile,
        number("initial", "offset"),
        number("initial", "amplitude"),
        number("initial", "width"),
        number("initial", "center"),
        values[("initial", "file")],
    )
    if profile == "file" and not initial.file:
        problems.append("profile = file needs a file key")
    if initial.width <= 0:
        problems.append("width must be > 0")

    control = None
    control_args = dict(
        dt_init=number("control", "dt_init"),
        dt_min=number("control", "dt_min"),
        dt_max=number("control", "dt_max"),
        cfl_safety=number("control", "cfl_safety"),
        t_end=number("control", "t_end"),
        convergence_tol=number("control", "convergence_tol"),
        max_steps=optional_int("control", "max_steps"),
        sample_every=optional_int("numerics", "sample_cadence"),
    )
    try:
        control = StepControl(**control_args)
    except (ValueError, TypeError) as exc:
        problems.extend(str(exc).split("; "))

    elliptic_tol = number("numerics", "elliptic_tol")
    quad_tol = number("numerics", "quad_tol")
    for name, value in (("elliptic_tol", elliptic_tol), ("quad_tol", quad_tol)):
        if not value > 0:
            problems.append(f"{name} must be > 0")
    convention = values[("numerics", "constant_convention")]
    if convention not in CONVENTIONS:
        problems.append(f"constant_convention must be one of {', '.join(CONVENTIONS)}")
    provenance = values[("numerics", "constant_provenance")]
    if provenance not in (EXACT, DISCRETE):
        problems.append(f"constant_provenance must be {EXACT} or {DISCRETE}")
    ps_trials = number("numerics", "ps_trials", int)
    if ps_trials < 1:
        problems.append("ps_trials must be >= 1")
    seed = number("numerics", "seed", int)
    snapshot_every = number("output", "snapshot_every", int)
    if snapshot_every < 0:
        problems.append("snapshot_every must be >= 0")

    grid = None
    if not problems:
        grid = Grid(tuple(extent), tuple(cells))
    if problems:
        raise ConfigError(problems)

    base = Path(base_dir) if base_dir is not None else Path.cwd()
    config = RunConfig(
        params=params, grid=grid, initial=initial, control=control,
        elliptic_tol=elliptic_tol, quad_tol=quad_tol,
        constant_convention=convention, constant_provenance=provenance,
        ps_trials=ps_trials, seed=seed,
        output_dir=Path(values[("output", "directory")]),
        snapshot_every=snapshot_every, base_dir=base,
    )
    u0 = config.initial_density()
    if not np.all(np.isfinite(u0)):
        problems.append("initial density must be finite")
    elif np.min(u0) < 0:
        problems.append("initial density must be >= 0 everywhere")
    elif not np.any(u0 > 0):
        problems.append("initial density must not vanish identically")
    if problems:
        raise ConfigError(problems)
    return config


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)
