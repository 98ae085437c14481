"""File formats: trace CSV, model JSON, GA configuration JSON.

Floating-point values are written with Python's shortest round-trip
representation and JSON keys in a fixed order, so write -> read -> write
is byte-identical.  All writes go through a temporary file in the target
directory followed by an atomic rename.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .ga import GAConfig
from .model import (
    DEFAULT_RANGES,
    PARAMETER_NAMES,
    NetworkModel,
    NeuronParameters,
    ParameterRanges,
    TraceMatrix,
)

TIME_COLUMN = "t_ms"


def fmt_float(x: float) -> str:
    return repr(float(x))


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_to_csv(trace: TraceMatrix) -> str:
    header = TIME_COLUMN + "," + ",".join(f"v{j}" for j in range(trace.n))
    lines = [header]
    for t in range(trace.steps):
        row = [fmt_float(t * trace.dt)]
        row.extend(fmt_float(x) for x in trace.r[t])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_trace_csv(path: str, trace: TraceMatrix) -> None:
    atomic_write_text(path, trace_to_csv(trace))


def read_trace_csv(path: str) -> TraceMatrix:
    """Parse a trace CSV; dt is taken from the time column and validated."""
    with open(path) as f:
        lines = [line.strip() for line in f if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty trace file")
    header = lines[0].split(",")
    if header[0] != TIME_COLUMN or len(header) < 2:
        raise ValueError(f"{path}: expected header '{TIME_COLUMN},v0,...', got {lines[0]!r}")
    n = len(header) - 1
    if header[1:] != [f"v{j}" for j in range(n)]:
        raise ValueError(f"{path}: voltage columns must be named v0..v{n - 1}")
    if len(lines) < 3:
        raise ValueError(f"{path}: need at least 2 sample rows")

    data = np.array(
        [[float(x) for x in line.split(",")] for line in lines[1:]], dtype=float
    )
    if data.shape[1] != n + 1:
        raise ValueError(f"{path}: ragged rows")
    t = data[:, 0]
    dt = t[1] - t[0]
    if dt <= 0:
        raise ValueError(f"{path}: time column must be strictly increasing")
    expected = np.arange(len(t)) * dt
    if np.max(np.abs(t - expected)) > 1e-9 * max(1.0, abs(t[-1])):
        raise ValueError(f"{path}: time column is not uniformly spaced")
    return TraceMatrix.from_recorded(data[:, 1:], dt=float(dt))


def model_to_json(model: NetworkModel) -> str:
    doc = {
        "dt_ms": model.dt,
        "neurons": [
            {name: getattr(p, name) for name in PARAMETER_NAMES} for p in model.params
        ],
        "weights": [list(row) for row in model.weights],
    }
    return json.dumps(doc, indent=2) + "\n"


def write_model_json(path: str, model: NetworkModel) -> None:
    atomic_write_text(path, model_to_json(model))


def read_model_json(path: str, ranges: ParameterRanges = DEFAULT_RANGES) -> NetworkModel:
    """Load and validate a model file; parameters must lie in their ranges."""
    with open(path) as f:
        doc = json.load(f)
    try:
        dt = float(doc["dt_ms"])
        neurons = doc["neurons"]
        weights = np.array(doc["weights"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed model file ({exc})") from exc
    params = []
    for k, entry in enumerate(neurons):
        try:
            p = NeuronParameters(**{name: float(entry[name]) for name in PARAMETER_NAMES})
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}: malformed neuron entry {k} ({exc})") from exc
        ranges.validate(p, context=f"{path}: neuron {k}")
        params.append(p)
    if weights.ndim != 2 or weights.shape != (len(params), len(params)):
        raise ValueError(
            f"{path}: weights must be {len(params)}x{len(params)}, got {weights.shape}"
        )
    if dt <= 0:
        raise ValueError(f"{path}: dt_ms must be positive")
    return NetworkModel(params=params, weights=weights, dt=dt)


@dataclass
class ReconstructionSettings:
    """GA configuration plus the u0 handling strategy."""

    ga: GAConfig
    fix_u0: bool = False
    warmup_steps: int = 200


def load_ga_config(path: str) -> ReconstructionSettings:
    with open(path) as f:
        doc = json.load(f)
    known = {
        "population",
        "generations",
        "crossover_rate",
        "mutation_rate",
        "seed",
        "ranges",
        "fix_u0",
        "warmup_steps",
    }
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}")

    ranges = DEFAULT_RANGES
    if "ranges" in doc:
        overrides = doc["ranges"]
        bad = set(overrides) - set(PARAMETER_NAMES)
        if bad:
            raise ValueError(f"{path}: unknown range keys {sorted(bad)}")
        merged = {
            name: tuple(overrides.get(name, getattr(DEFAULT_RANGES, name)))
            for name in PARAMETER_NAMES
        }
        ranges = ParameterRanges(**merged)

    cfg = GAConfig(
        population=int(doc.get("population", 1000)),
        generations=int(doc.get("generations", 100)),
        crossover_rate=float(doc.get("crossover_rate", 0.5)),
        mutation_rate=float(doc.get("mutation_rate", 0.5)),
        seed=int(doc.get("seed", 0)),
        ranges=ranges,
    )
    return ReconstructionSettings(
        ga=cfg,
        fix_u0=bool(doc.get("fix_u0", False)),
        warmup_steps=int(doc.get("warmup_steps", 200)),
    )
