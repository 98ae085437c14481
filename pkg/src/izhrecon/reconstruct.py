"""Full-network reconstruction from recorded membrane potentials.

Each neuron is handled independently: a genetic algorithm searches its five
cell parameters, and every candidate is scored by rebuilding the recovery
variable, fitting the incoming weight row by least squares, and taking the
mean squared residual as the (inverse) fitness.  With the true parameters
the residual vanishes on clean data, so the residual doubles as both the
GA objective and the weight estimator.
"""
from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

import numpy as np

from . import ga
from .model import (
    NetworkModel,
    NeuronParameters,
    SimulationConfig,
    TraceMatrix,
    recover_u_trace,
    simulate,
)
from .weights import (
    InsufficientDataError,
    SingularSystemError,
    assemble_system,
    solve_normal_equations,
)

# Worst-rank fitness assigned when a candidate's system cannot be solved.
# Finite on purpose: rank selection requires finite errors.
FAILED_FITNESS = 1e30

DEFAULT_WARMUP_STEPS = 200


def fitness(
    candidate: NeuronParameters,
    trace: TraceMatrix,
    i: int,
    warmup: int = 0,
) -> tuple[float, np.ndarray | None]:
    """Score a candidate parameter set for neuron i.

    Returns (mse, fitted weight row).  Insufficient data or a singular
    system yields (FAILED_FITNESS, None) instead of raising, so a GA run
    never aborts on a bad candidate.  warmup > 0 drops that many leading
    transitions from the fit (used with the fixed-u0 strategy).
    """
    rec = recover_u_trace(trace, i, candidate)
    if warmup > 0:
        rec = dataclasses.replace(rec, usable=rec.usable.copy())
        rec.usable[:warmup] = False
    try:
        system = assemble_system(trace, rec, i, trace.dt)
        report = solve_normal_equations(system)
    except (InsufficientDataError, SingularSystemError):
        return FAILED_FITNESS, None
    return report.mse, report.w


@dataclass
class NeuronResult:
    index: int
    params: NeuronParameters
    weight_row: np.ndarray | None
    mse: float
    history: ga.EvolutionHistory | None
    usable_transitions: int

    @property
    def ok(self) -> bool:
        return self.weight_row is not None and self.mse < FAILED_FITNESS


@dataclass
class ReconstructionReport:
    neurons: list[NeuronResult]
    wall_clock_s: float

    @property
    def ok(self) -> bool:
        return all(res.ok for res in self.neurons)


def _usable_count(trace: TraceMatrix, i: int) -> int:
    spk = trace.spike[:, i]
    return int(np.count_nonzero(~(spk[:-1] | spk[1:])))


def reconstruct_neuron(
    trace: TraceMatrix,
    i: int,
    cfg: ga.GAConfig,
    fix_u0: bool = False,
    warmup_steps: int = DEFAULT_WARMUP_STEPS,
) -> NeuronResult:
    """Run the GA for neuron i and refit its weight row at the optimum.

    With fix_u0 the recovery variable starts at 0, the first warmup_steps
    transitions are excluded while it settles, and the fifth gene is
    ignored; the search then covers only (a, b, c, d).
    """
    warmup = warmup_steps if fix_u0 else 0

    def error_fn(genome: ga.Genome) -> float:
        candidate = ga.decode(genome, cfg.ranges)
        if fix_u0:
            candidate = dataclasses.replace(candidate, u0=0.0)
        return fitness(candidate, trace, i, warmup=warmup)[0]

    best_genome, history = ga.evolve(cfg, error_fn, stream_key=(i,))
    best = ga.decode(best_genome, cfg.ranges)
    if fix_u0:
        best = dataclasses.replace(best, u0=0.0)
        history = dataclasses.replace(
            history,
            best_params=[dataclasses.replace(p, u0=0.0) for p in history.best_params],
        )
    mse, row = fitness(best, trace, i, warmup=warmup)
    return NeuronResult(
        index=i,
        params=best,
        weight_row=row,
        mse=mse,
        history=history,
        usable_transitions=_usable_count(trace, i),
    )


def reconstruct_network(
    trace: TraceMatrix,
    cfg: ga.GAConfig,
    fix_u0: bool = False,
    warmup_steps: int = DEFAULT_WARMUP_STEPS,
) -> tuple[NetworkModel, ReconstructionReport]:
    """Reconstruct every neuron independently and assemble the full model.

    A failed neuron (unsolvable weight system at the GA optimum) gets a
    zero weight row and is flagged in the report; the others proceed.
    """
    start = time.perf_counter()
    results = [
        reconstruct_neuron(trace, i, cfg, fix_u0=fix_u0, warmup_steps=warmup_steps)
        for i in range(trace.n)
    ]
    n = trace.n
    W = np.zeros((n, n))
    for res in results:
        if res.weight_row is not None:
            W[res.index] = res.weight_row
    model = NetworkModel(params=[res.params for res in results], weights=W, dt=trace.dt)
    report = ReconstructionReport(neurons=results, wall_clock_s=time.perf_counter() - start)
    return model, report


def solve_weights_known_params(
    trace: TraceMatrix, params: list[NeuronParameters]
) -> np.ndarray:
    """Least-squares weight matrix with the generating parameters given.

    No GA involved; raises on insufficient data or a singular system.
    """
    if len(params) != trace.n:
        raise ValueError(f"expected {trace.n} parameter sets, got {len(params)}")
    n = trace.n
    W = np.empty((n, n))
    for i in range(n):
        rec = recover_u_trace(trace, i, params[i])
        system = assemble_system(trace, rec, i, trace.dt)
        W[i] = solve_normal_equations(system).w
    return W


def error_surface(
    trace: TraceMatrix,
    i: int,
    a_values: np.ndarray,
    b_values: np.ndarray,
    c: float,
    d: float,
    u0: float,
) -> np.ndarray:
    """Fitness landscape over an (a, b) lattice with c, d, u0 held fixed."""
    surface = np.empty((len(a_values), len(b_values)))
    for ai, a in enumerate(a_values):
        for bi, b in enumerate(b_values):
            candidate = NeuronParameters(a=float(a), b=float(b), c=c, d=d, u0=u0)
            surface[ai, bi] = fitness(candidate, trace, i)[0]
    return surface


@dataclass
class ComparisonMetrics:
    max_abs_weight_error: float
    param_errors: dict[str, float]  # worst absolute error per parameter
    trajectory_mse: float | None    # None when the horizon is zero


def evaluate_model(
    truth: NetworkModel, recon: NetworkModel, horizon: int
) -> ComparisonMetrics:
    """Compare a reconstructed model against the generating one.

    Both models are resimulated from their own initial conditions
    (v = c, u = u0) for `horizon` steps and the recorded traces compared
    pointwise; horizon 0 skips the resimulation.
    """
    if truth.n != recon.n:
        raise ValueError(f"neuron counts differ: {truth.n} vs {recon.n}")
    if truth.dt != recon.dt:
        raise ValueError(f"time steps differ: {truth.dt} vs {recon.dt}")

    weight_err = float(np.max(np.abs(truth.weights - recon.weights)))
    param_errors = {
        name: max(
            abs(getattr(p, name) - getattr(q, name))
            for p, q in zip(truth.params, recon.params)
        )
        for name in ("a", "b", "c", "d", "u0")
    }

    trajectory_mse = None
    if horizon > 0:
        if horizon < 2:
            raise ValueError("horizon must be 0 or at least 2")
        cfg = SimulationConfig(dt=truth.dt, steps=horizon)
        r_truth = simulate(truth.params, truth.weights, cfg).r
        r_recon = simulate(recon.params, recon.weights, cfg).r
        diff = r_truth - r_recon
        trajectory_mse = float(np.einsum("ti,ti->", diff, diff)) / diff.size

    return ComparisonMetrics(
        max_abs_weight_error=weight_err,
        param_errors=param_errors,
        trajectory_mse=trajectory_mse,
    )
