"""CVaR cost functions over sampled cost distributions.

CVaR_alpha of a sample is the mean of its lowest ceil(alpha*K) values; alpha=1
recovers the plain sample mean. The tail count uses the ceiling so that every
alpha > 0 keeps at least one value. Whether the tail should round up or down
is a convention; it is exposed here as ``cvar_tail_count`` so the choice is
inspectable.
"""

from __future__ import annotations

import math

import numpy as np

from .circuit import AnsatzSpec, build_statevector, sample_bitstrings
from .qubo import QuboInstance, _bit_block


def cvar_tail_count(n_samples: int, alpha: float) -> int:
    """Number of lowest-cost samples kept by CVaR_alpha: ceil(alpha * K).

    A 1e-9 slack guards against float products landing epsilon above an
    integer; the count is clamped to [1, K].
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    m = math.ceil(alpha * n_samples - 1e-9)
    return min(max(m, 1), n_samples)


def cvar(costs: np.ndarray, alpha: float) -> float:
    """Mean of the lowest ceil(alpha*K) of K sampled costs."""
    values = np.asarray(costs, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot take CVaR of an empty sample")
    m = cvar_tail_count(values.size, alpha)
    if m == values.size:
        return float(values.mean())
    return float(np.partition(values, m - 1)[:m].mean())


def cost_estimate(
    spec: AnsatzSpec,
    params: np.ndarray,
    q: QuboInstance,
    alpha: float,
    shots: int,
    rng: np.random.Generator,
    cost_table: np.ndarray | None = None,
) -> float:
    """One objective evaluation: build, sample, price, CVaR.

    Builds the ansatz state for ``params``, samples ``shots`` bitstrings,
    maps each to its QUBO cost, and returns the CVaR_alpha of the sample.
    One invocation corresponds to one quantum circuit evaluated when counting
    optimizer calls. ``cost_table`` (costs of all 2^N bitstrings by basis
    index, e.g. from qubo.all_costs) turns pricing into a lookup; without it
    the sampled bitstrings are evaluated directly.
    """
    state = build_statevector(spec, params)
    samples = sample_bitstrings(state, shots, rng)
    if cost_table is not None:
        costs = cost_table[samples]
    else:
        uniq, inverse = np.unique(samples, return_inverse=True)
        bits = _bit_block(uniq, q.dimension)
        costs = np.einsum("ij,jk,ik->i", bits, q.matrix, bits)[inverse]
    return cvar(costs, alpha)
