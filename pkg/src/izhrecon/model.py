"""Discrete-time Izhikevich network dynamics.

Each neuron carries a fast membrane potential v (mV) and a slow recovery
variable u, advanced with a forward-Euler step of size dt (ms):

    v' = v + dt * (0.04*v*v + 5.0*v + 140.0 - u + I)
    u' = u + dt * (a * (b*v - u))

A step begins with the after-spike rule: whenever v >= 30 the sample is
recorded as exactly 30.0 (the raw Euler overshoot is discarded), then
v <- c and u <- u + d before the Euler update.  Input currents couple the
*recorded* potentials, I_i = sum_j w[i, j] * r_j, so a spiking presynaptic
neuron contributes 30 * w for that step.  Recovery of u from a recorded
trace (`recover_u_trace`) replays the identical arithmetic, which keeps the
round trip exact on clean data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPIKE_VALUE = 30.0


class SimulationOverflowError(RuntimeError):
    """Euler update produced a non-finite value."""

    def __init__(self, step: int, neuron: int, v: float, u: float):
        self.step = step
        self.neuron = neuron
        super().__init__(
            f"non-finite state at step {step}, neuron {neuron}: v={v!r}, u={u!r}"
        )


@dataclass(frozen=True)
class NeuronParameters:
    """The five per-neuron unknowns of the reconstruction problem."""

    a: float   # recovery time scale
    b: float   # coupling of u to v
    c: float   # after-spike reset potential (mV)
    d: float   # after-spike increment of u
    u0: float  # recovery variable at t = 0

    def astuple(self) -> tuple[float, float, float, float, float]:
        return (self.a, self.b, self.c, self.d, self.u0)


PARAMETER_NAMES = ("a", "b", "c", "d", "u0")

# Intrinsically bursting cortical cell; the reference parameter set used
# throughout the experiments.
INTRINSICALLY_BURSTING = NeuronParameters(a=0.02, b=0.2, c=-55.0, d=4.0, u0=-11.0)


@dataclass(frozen=True)
class ParameterRanges:
    """Per-parameter search/validation intervals (lo, hi).

    Degenerate intervals (lo == hi) are allowed; they pin a parameter to a
    known value and collapse the search along that axis.
    """

    a: tuple[float, float] = (0.01, 0.1)
    b: tuple[float, float] = (0.05, 0.3)
    c: tuple[float, float] = (-65.0, -50.0)
    d: tuple[float, float] = (0.05, 8.0)
    u0: tuple[float, float] = (-15.0, 15.0)

    def __post_init__(self):
        for name in PARAMETER_NAMES:
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"range for {name} must satisfy lo <= hi, got ({lo}, {hi})")

    def astuples(self) -> tuple[tuple[float, float], ...]:
        return tuple(getattr(self, name) for name in PARAMETER_NAMES)

    def contains(self, p: NeuronParameters) -> bool:
        return all(
            lo <= x <= hi for x, (lo, hi) in zip(p.astuple(), self.astuples())
        )

    def validate(self, p: NeuronParameters, context: str = "parameters") -> None:
        for name, x, (lo, hi) in zip(PARAMETER_NAMES, p.astuple(), self.astuples()):
            if not lo <= x <= hi:
                raise ValueError(f"{context}: {name}={x} outside [{lo}, {hi}]")


DEFAULT_RANGES = ParameterRanges()


@dataclass(frozen=True)
class NeuronState:
    v: float
    u: float


@dataclass(frozen=True)
class SimulationConfig:
    dt: float = 0.5
    steps: int = 1000
    spike_threshold: float = SPIKE_VALUE
    allow_self_connections: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps < 2:
            raise ValueError(f"steps must be >= 2, got {self.steps}")
        if self.spike_threshold != SPIKE_VALUE:
            raise ValueError("spike threshold is fixed at 30 mV")


@dataclass
class TraceMatrix:
    """Recorded membrane samples for all neurons.

    r[t, j] is the recorded potential of neuron j at step t, clamped to
    exactly 30.0 at spike steps; spike[t, j] is True iff r[t, j] == 30.0.
    """

    r: np.ndarray       # (T, n) float
    spike: np.ndarray   # (T, n) bool
    dt: float

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.spike = np.asarray(self.spike, dtype=bool)
        if self.r.ndim != 2 or self.r.shape != self.spike.shape:
            raise ValueError("r and spike must be matching (T, n) arrays")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if np.any(self.r > SPIKE_VALUE):
            raise ValueError("recorded samples must not exceed the 30 mV clamp")
        if not np.array_equal(self.spike, self.r == SPIKE_VALUE):
            raise ValueError("spike flags must mark exactly the samples equal to 30")

    @classmethod
    def from_recorded(cls, r: np.ndarray, dt: float) -> "TraceMatrix":
        r = np.asarray(r, dtype=float)
        return cls(r=r, spike=(r == SPIKE_VALUE), dt=dt)

    @property
    def n(self) -> int:
        return self.r.shape[1]

    @property
    def steps(self) -> int:
        return self.r.shape[0]

    def spike_counts(self) -> np.ndarray:
        return self.spike.sum(axis=0)


@dataclass
class RecoveredTrace:
    """Recovery-variable series rebuilt from a recorded trace.

    usable[t] flags the transition t -> t+1 as fit-worthy; it is False
    exactly when the neuron spikes at step t or t+1 (those transitions cross
    the after-spike discontinuity).
    """

    u: np.ndarray       # (T,)
    usable: np.ndarray  # (T-1,) bool


@dataclass
class SimulationInternals:
    """Pre-reset state series kept by the simulator, for oracle tests."""

    v: np.ndarray  # (T, n) raw potentials before clamping/reset
    u: np.ndarray  # (T, n) recovery variable before the +d reset increment


@dataclass
class NetworkModel:
    """A full generative model: per-neuron parameters plus weight matrix."""

    params: list[NeuronParameters]
    weights: np.ndarray  # (n, n), weights[i, j] couples presynaptic j into i
    dt: float = 0.5

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        n = len(self.params)
        if self.weights.shape != (n, n):
            raise ValueError(
                f"weight matrix shape {self.weights.shape} does not match {n} neurons"
            )
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weight matrix must be finite")

    @property
    def n(self) -> int:
        return len(self.params)


def euler_step(state: NeuronState, p: NeuronParameters, current: float, dt: float) -> NeuronState:
    """One forward-Euler update of (v, u); no threshold or reset logic."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    v, u = state.v, state.u
    v_next = v + dt * (0.04 * v * v + 5.0 * v + 140.0 - u + current)
    u_next = u + dt * (p.a * (p.b * v - u))
    if not (np.isfinite(v_next) and np.isfinite(u_next)):
        raise SimulationOverflowError(step=-1, neuron=-1, v=v_next, u=u_next)
    return NeuronState(v=v_next, u=u_next)


def apply_reset(state: NeuronState, p: NeuronParameters) -> tuple[NeuronState, bool]:
    """After-spike rule: at or above threshold, v <- c and u <- u + d."""
    if state.v >= SPIKE_VALUE:
        return NeuronState(v=p.c, u=state.u + p.d), True
    return state, False


def input_current(weights_row: np.ndarray, samples: np.ndarray) -> float:
    """Input current from recorded potentials: sum_j w_j * r_j."""
    weights_row = np.asarray(weights_row, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if weights_row.shape != samples.shape or weights_row.ndim != 1:
        raise ValueError(
            f"weights row {weights_row.shape} and samples {samples.shape} must be equal-length vectors"
        )
    # einsum keeps the reduction order fixed regardless of BLAS threading
    return float(np.einsum("j,j->", weights_row, samples))


def simulate(
    params: list[NeuronParameters],
    weights: np.ndarray,
    cfg: SimulationConfig,
    internals: bool = False,
) -> TraceMatrix | tuple[TraceMatrix, SimulationInternals]:
    """Run the network for cfg.steps and return the recorded trace.

    Initial state is v = c, u = u0.  Per step: record (clamping spikes to
    30.0 and applying the reset), compute input currents from the recorded
    samples, then Euler-step every neuron.  With internals=True the raw
    pre-reset state series is returned alongside, which reconstruction
    tests use as an oracle.
    """
    n = len(params)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n, n):
        raise ValueError(f"weight matrix shape {weights.shape} does not match {n} neurons")

    a = np.array([p.a for p in params])
    b = np.array([p.b for p in params])
    c = np.array([p.c for p in params])
    d = np.array([p.d for p in params])

    v = c.copy()
    u = np.array([p.u0 for p in params])

    T = cfg.steps
    dt = cfg.dt
    r = np.empty((T, n))
    spike = np.empty((T, n), dtype=bool)
    v_pre = np.empty((T, n))
    u_pre = np.empty((T, n))

    for t in range(T):
        v_pre[t] = v
        u_pre[t] = u
        fired = v >= SPIKE_VALUE
        spike[t] = fired
        r[t] = np.where(fired, SPIKE_VALUE, v)
        v = np.where(fired, c, v)
        u = np.where(fired, u + d, u)
        if t == T - 1:
            break
        current = np.einsum("ij,j->i", weights, r[t])
        with np.errstate(over="ignore", invalid="ignore"):  # finiteness checked below
            v_next = v + dt * (0.04 * v * v + 5.0 * v + 140.0 - u + current)
            u_next = u + dt * (a * (b * v - u))
        bad = ~(np.isfinite(v_next) & np.isfinite(u_next))
        if np.any(bad):
            j = int(np.argmax(bad))
            raise SimulationOverflowError(step=t + 1, neuron=j, v=v_next[j], u=u_next[j])
        v, u = v_next, u_next

    trace = TraceMatrix(r=r, spike=spike, dt=dt)
    if internals:
        return trace, SimulationInternals(v=v_pre, u=u_pre)
    return trace


def recover_u_trace(trace: TraceMatrix, i: int, p: NeuronParameters) -> RecoveredTrace:
    """Rebuild neuron i's recovery variable from its recorded potentials.

    Mirrors the simulator's step order: at a flagged spike step the
    effective potential is the reset value c and u takes the +d increment
    first; otherwise the recorded sample is used directly.  Transitions
    touching a spike step are marked unusable for least squares.
    """
    T = trace.steps
    r_col = trace.r[:, i].tolist()
    spk = trace.spike[:, i]
    spk_list = spk.tolist()

    a, b, c, d, dt = p.a, p.b, p.c, p.d, trace.dt
    u = [0.0] * T
    u_t = p.u0
    u[0] = u_t
    for t in range(T - 1):
        if spk_list[t]:
            u_t = u_t + d
            v_eff = c
        else:
            v_eff = r_col[t]
        u_t = u_t + dt * (a * (b * v_eff - u_t))
        u[t + 1] = u_t

    usable = ~(spk[:-1] | spk[1:])
    return RecoveredTrace(u=np.array(u), usable=usable)


def random_weights(
    n: int,
    rng: np.random.Generator,
    weight_range: tuple[float, float],
    allow_self_connections: bool = True,
) -> np.ndarray:
    lo, hi = weight_range
    if lo > hi:
        raise ValueError(f"invalid weight range ({lo}, {hi})")
    w = rng.uniform(lo, hi, size=(n, n)) if lo < hi else np.full((n, n), float(lo))
    if not allow_self_connections:
        np.fill_diagonal(w, 0.0)
    return w


# With potentials coupled directly (I = sum v_j w_ij) and v < 0 at rest,
# negative weights are the excitatory direction; the default draw is biased
# that way so that generated networks actually spike.  A zero-mean draw
# leaves roughly half the neurons without net drive and the spike
# requirement below unreachable at any scale.
DEFAULT_WEIGHT_RANGE = (-0.1, 0.02)


def random_network(
    n: int,
    steps: int,
    seed: int,
    dt: float = 0.5,
    weight_range: tuple[float, float] = DEFAULT_WEIGHT_RANGE,
    params: list[NeuronParameters] | None = None,
    allow_self_connections: bool = True,
    min_spikes: int = 2,
    max_tries: int = 100,
) -> tuple[NetworkModel, TraceMatrix]:
    """Draw a random network whose trace contains min_spikes spikes per neuron.

    Parameters default to the intrinsically bursting reference set for every
    neuron; only the weights are drawn.  Silent neurons leave c and d
    unidentifiable, so the draw is retried (fresh weights from the same
    stream) until every neuron fires at least min_spikes times.  A
    degenerate range (lo == hi) has nothing to retry and is simulated once,
    whatever its spike counts.

    Raises RuntimeError when no spiking network is found within max_tries.
    """
    if params is None:
        params = [INTRINSICALLY_BURSTING] * n
    if len(params) != n:
        raise ValueError(f"expected {n} parameter sets, got {len(params)}")
    cfg = SimulationConfig(dt=dt, steps=steps, allow_self_connections=allow_self_connections)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    lo, hi = weight_range

    tries = max_tries if lo < hi else 1
    for _ in range(tries):
        w = random_weights(n, rng, weight_range, allow_self_connections)
        trace = simulate(params, w, cfg)
        if lo == hi or np.all(trace.spike_counts() >= min_spikes):
            return NetworkModel(params=list(params), weights=w, dt=dt), trace
    raise RuntimeError(
        f"no network with >= {min_spikes} spikes per neuron found in {max_tries} tries "
        f"(n={n}, steps={steps}, weight_range={weight_range})"
    )
