#!/usr/bin/env python3
"""Recover the full synaptic weight matrix from traces alone.

With the cell parameters known, each neuron's incoming weights solve a
per-neuron least-squares system built from its usable transitions (those
not touching one of its own spike samples).  On clean simulated data the
recovery is exact to near machine precision, and it works all the way down
to the minimal window of n+1 samples.
"""
import numpy as np

from izhrecon import SimulationConfig, random_network, simulate
from izhrecon.reconstruct import solve_weights_known_params

net, trace = random_network(10, steps=1000, seed=1)
print(f"network: {net.n} neurons, {trace.steps} samples, "
      f"{int(trace.spike.sum())} spikes total")

W = solve_weights_known_params(trace, net.params)
err = np.abs(W - net.weights)
print(f"max abs weight error:  {err.max():.3e}")
print(f"mean abs weight error: {err.mean():.3e}")

print("\ntrue vs recovered, first incoming row:")
for j in range(net.n):
    print(f"  w[0,{j}]  {net.weights[0, j]:+.6f}  ->  {W[0, j]:+.6f}")

# the identifiability floor: n+1 spike-free samples already determine the
# weights; one sample fewer does not
rng = np.random.default_rng(5)
small_n = 5
from izhrecon import NeuronParameters

params = [
    NeuronParameters(
        a=rng.uniform(0.01, 0.1),
        b=rng.uniform(0.05, 0.3),
        c=rng.uniform(-65, -50),
        d=rng.uniform(0.05, 8),
        u0=rng.uniform(-15, 15),
    )
    for _ in range(small_n)
]
weights = rng.uniform(-0.01, 0.01, size=(small_n, small_n))
window = simulate(params, weights, SimulationConfig(steps=small_n + 1))
W_min = solve_weights_known_params(window, params)
print(f"\nminimal window ({small_n + 1} samples, {small_n} neurons): "
      f"max error {np.max(np.abs(W_min - weights)):.3e}")
try:
    solve_weights_known_params(simulate(params, weights, SimulationConfig(steps=small_n)), params)
except Exception as exc:
    print(f"one sample fewer: {exc}")
