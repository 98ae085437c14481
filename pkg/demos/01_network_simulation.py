#!/usr/bin/env python3
"""Simulate a small Izhikevich network and look at the recorded traces.

Every neuron here is the intrinsically bursting reference cell
(a=0.02, b=0.2, c=-55, d=4, u0=-11).  Weights couple the recorded
potentials directly (I_i = sum_j w_ij * v_j), and since v is negative at
rest, negative weights are the excitatory direction.  Spike samples are
clamped to exactly 30 mV in the recording, which is what the
reconstruction stage later keys on.
"""
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from izhrecon import (
    INTRINSICALLY_BURSTING,
    SimulationConfig,
    random_network,
    simulate,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

print("reference cell:", INTRINSICALLY_BURSTING)

# an isolated reference cell settles without input ...
lone = simulate([INTRINSICALLY_BURSTING], np.zeros((1, 1)), SimulationConfig(steps=1000))
print(f"isolated cell: {int(lone.spike_counts()[0])} spikes, "
      f"v drifts to {lone.r[-1, 0]:.1f} mV")

# ... while a randomly coupled network is busy
net, trace = random_network(6, steps=1000, seed=7)
counts = trace.spike_counts()
print("coupled network spike counts:", counts.tolist())
print(f"recorded samples lie in [{trace.r.min():.1f}, {trace.r.max():.1f}] mV "
      f"(spikes clamped to exactly 30)")

t = np.arange(trace.steps) * trace.dt
fig, axes = plt.subplots(3, 1, figsize=(9, 7), sharex=True)
axes[0].plot(t, lone.r[:, 0], lw=0.8)
axes[0].set_title("isolated reference cell (no input)")
for j in range(3):
    axes[1].plot(t, trace.r[:, j], lw=0.8, label=f"neuron {j}")
axes[1].legend(loc="lower right", fontsize=8)
axes[1].set_title("coupled network, first three neurons")
axes[2].eventplot(
    [np.flatnonzero(trace.spike[:, j]) * trace.dt for j in range(trace.n)],
    linelengths=0.8,
)
axes[2].set_title("spike raster")
axes[2].set_xlabel("time (ms)")
fig.tight_layout()
path = os.path.join(OUT, "01_traces.png")
fig.savefig(path, dpi=120)
print("figure saved to", path)
