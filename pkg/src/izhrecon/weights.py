"""Per-neuron least-squares estimation of incoming synaptic weights.

For every usable transition t -> t+1 of postsynaptic neuron i, the Euler
update predicts

    r_i^{t+1} = r_i^t + dt*(0.04*(r_i^t)^2 + 5*r_i^t + 140 - u_i^t) + dt * sum_j r_j^t w_ij,

so the unknown weight row solves the overdetermined system A w = b with
A[t, j] = dt * r_j^t and b[t] the measured increment minus the weight-free
part of the prediction.  Setting the derivative of the squared error to
zero yields the normal equations (A^T A) w = A^T b, solved here by Gaussian
elimination with partial pivoting.  Transitions adjacent to a spike of
neuron i are excluded: the after-spike reset is a discontinuity the Euler
form does not describe.  Presynaptic spikes stay in; their recorded value
of 30 is exactly what drove the simulation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import RecoveredTrace, TraceMatrix

# A pivot this far below the largest initial pivot candidate signals rank
# deficiency (duplicated traces, too-short windows).
PIVOT_RTOL = 1e-12


class InsufficientDataError(ValueError):
    """Fewer usable transitions than unknowns."""

    def __init__(self, rows: int, unknowns: int):
        self.rows = rows
        self.unknowns = unknowns
        super().__init__(
            f"{rows} usable transitions for {unknowns} unknown weights; "
            f"need at least {unknowns + 1} spike-free samples"
        )


class SingularSystemError(RuntimeError):
    """Elimination hit a (near-)zero pivot; the normal matrix is rank deficient."""

    def __init__(self, pivot_index: int, pivot: float, tolerance: float):
        self.pivot_index = pivot_index
        self.pivot = pivot
        self.tolerance = tolerance
        super().__init__(
            f"singular system: pivot {pivot:.3e} at column {pivot_index} "
            f"below tolerance {tolerance:.3e}"
        )


@dataclass
class LinearSystem:
    """Design matrix and targets for one postsynaptic neuron."""

    A: np.ndarray  # (M, n)
    b: np.ndarray  # (M,)

    @property
    def rows(self) -> int:
        return self.A.shape[0]

    @property
    def unknowns(self) -> int:
        return self.A.shape[1]


@dataclass
class SolveReport:
    w: np.ndarray
    mse: float
    condition_hint: float  # ratio of largest to smallest elimination pivot


def assemble_system(trace: TraceMatrix, rec: RecoveredTrace, i: int, dt: float) -> LinearSystem:
    """Build the least-squares system for neuron i from its recovered u series.

    One row per usable transition; raises InsufficientDataError when fewer
    rows than unknowns remain.
    """
    usable = rec.usable
    n = trace.n
    M = int(np.count_nonzero(usable))
    if M < n:
        raise InsufficientDataError(rows=M, unknowns=n)

    A = dt * trace.r[:-1][usable]
    r_i = trace.r[:, i]
    drive = 0.04 * r_i * r_i + 5.0 * r_i + 140.0
    b = (r_i[1:] - r_i[:-1] - dt * (drive[:-1] - rec.u[:-1]))[usable]
    return LinearSystem(A=A, b=b)


def residual_mse(sys: LinearSystem, w: np.ndarray) -> float:
    """Mean squared residual of A w - b."""
    w = np.asarray(w, dtype=float)
    if w.shape != (sys.unknowns,):
        raise ValueError(f"weights shape {w.shape} does not match {sys.unknowns} unknowns")
    res = np.einsum("tj,j->t", sys.A, w) - sys.b
    return float(np.einsum("t,t->", res, res)) / sys.rows


def solve_normal_equations(sys: LinearSystem) -> SolveReport:
    """Solve (A^T A) w = A^T b by Gaussian elimination with partial pivoting."""
    if sys.rows < sys.unknowns:
        raise InsufficientDataError(rows=sys.rows, unknowns=sys.unknowns)
    # einsum, not BLAS matmul: keeps the reduction order independent of the
    # thread count so repeated runs are bit-identical
    G = np.einsum("ti,tj->ij", sys.A, sys.A)
    h = np.einsum("ti,t->i", sys.A, sys.b)
    w, condition_hint = gauss_solve(G, h)
    return SolveReport(w=w, mse=residual_mse(sys, w), condition_hint=condition_hint)


def gauss_solve(G: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve the square system G x = h; returns (x, pivot ratio).

    Partial pivoting by column maximum; a pivot below PIVOT_RTOL times the
    largest initial pivot candidate raises SingularSystemError.
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    if G.shape != (n, n):
        raise ValueError(f"matrix shape {G.shape} does not match rhs length {n}")

    M = np.hstack([G, h[:, None]])
    tol = PIVOT_RTOL * float(np.max(np.abs(G))) if n else 0.0
    pivots = np.empty(n)
    for k in range(n):
        p_row = k + int(np.argmax(np.abs(M[k:, k])))
        pivot = M[p_row, k]
        if abs(pivot) <= tol:
            raise SingularSystemError(pivot_index=k, pivot=abs(pivot), tolerance=tol)
        if p_row != k:
            M[[k, p_row]] = M[[p_row, k]]
        pivots[k] = abs(pivot)
        factors = M[k + 1 :, k] / pivot
        M[k + 1 :, k:] -= factors[:, None] * M[k, k:]

    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        acc = float(np.einsum("j,j->", M[k, k + 1 : n], x[k + 1 :]))
        x[k] = (M[k, n] - acc) / M[k, k]
    condition_hint = float(pivots.max() / pivots.min()) if n else 1.0
    return x, condition_hint
