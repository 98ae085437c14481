"""Izhikevich network simulation and full-model reconstruction from traces."""

from .model import (
    DEFAULT_RANGES,
    DEFAULT_WEIGHT_RANGE,
    INTRINSICALLY_BURSTING,
    PARAMETER_NAMES,
    SPIKE_VALUE,
    NetworkModel,
    NeuronParameters,
    NeuronState,
    ParameterRanges,
    RecoveredTrace,
    SimulationConfig,
    SimulationOverflowError,
    TraceMatrix,
    apply_reset,
    euler_step,
    input_current,
    random_network,
    random_weights,
    recover_u_trace,
    simulate,
)

__all__ = [
    "DEFAULT_RANGES",
    "DEFAULT_WEIGHT_RANGE",
    "INTRINSICALLY_BURSTING",
    "PARAMETER_NAMES",
    "SPIKE_VALUE",
    "NetworkModel",
    "NeuronParameters",
    "NeuronState",
    "ParameterRanges",
    "RecoveredTrace",
    "SimulationConfig",
    "SimulationOverflowError",
    "TraceMatrix",
    "apply_reset",
    "euler_step",
    "input_current",
    "random_network",
    "random_weights",
    "recover_u_trace",
    "simulate",
]
