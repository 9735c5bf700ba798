"""Statevector simulation of the RealAmplitudes ansatz.

The ansatz on N qubits with r repetitions applies r+1 layers of per-qubit RY
rotations, with a reverse-linear CNOT entangler between consecutive layers:
CNOT(control=i, target=i+1) applied in the order i = N-2, N-3, ..., 0. The
gate order inside the entangler matters for CNOT chains and is fixed here.
Parameter layout: angle ``params[l*N + i]`` drives the layer-l RY on qubit i.

Basis convention: amplitude index = sum(x_i * 2**i), i.e. qubit 0 is the
LEAST significant bit of the index. This differs from some frameworks that
put qubit 0 in the most significant position; all bitstring/index conversions
go through :mod:`vqabench.qubo` helpers, which share the convention.

RY(theta) has rows (cos t/2, -sin t/2) and (sin t/2, cos t/2), so every state
reachable by the ansatz has real amplitudes; this is asserted after each
build. States are dense float-complex arrays of 2^N amplitudes; memory bounds
building at N <= 24.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qubo import QuboInstance, bits_to_index

MAX_QUBITS = 24


@dataclass(frozen=True)
class AnsatzSpec:
    """Shape of the ansatz: qubit count and repetition count."""

    n_qubits: int
    reps: int

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.reps < 0:
            raise ValueError(f"reps must be >= 0, got {self.reps}")

    @property
    def num_parameters(self) -> int:
        return self.n_qubits * (self.reps + 1)


def _apply_ry(state: np.ndarray, qubit: int, angle: float) -> None:
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    psi = state.reshape(-1, 2, 1 << qubit)
    a0 = psi[:, 0, :].copy()
    psi[:, 0, :] = c * a0 - s * psi[:, 1, :]
    psi[:, 1, :] = s * a0 + c * psi[:, 1, :]


def _apply_cnot(state: np.ndarray, control: int, target: int, n: int) -> None:
    # Reshape so axis a holds bit n-1-a, then swap the target-bit halves of
    # the control=1 subspace.
    psi = state.reshape((2,) * n)
    ac, at = n - 1 - control, n - 1 - target
    lo: list = [slice(None)] * n
    hi: list = [slice(None)] * n
    lo[ac] = hi[ac] = 1
    lo[at], hi[at] = 0, 1
    tmp = psi[tuple(lo)].copy()
    psi[tuple(lo)] = psi[tuple(hi)]
    psi[tuple(hi)] = tmp


def build_statevector(spec: AnsatzSpec, params: np.ndarray) -> np.ndarray:
    """Statevector prepared by the ansatz from |0...0> for one angle vector."""
    n = spec.n_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"n_qubits {n} exceeds the simulator bound {MAX_QUBITS}")
    theta = np.asarray(params, dtype=np.float64)
    if theta.shape != (spec.num_parameters,):
        raise ValueError(
            f"expected {spec.num_parameters} parameters for {spec}, got shape {theta.shape}"
        )
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameters must be finite")

    state = np.zeros(1 << n, dtype=np.complex128)
    state[0] = 1.0
    for layer in range(spec.reps + 1):
        if layer > 0:
            for i in range(n - 2, -1, -1):
                _apply_cnot(state, control=i, target=i + 1, n=n)
        for i in range(n):
            _apply_ry(state, qubit=i, angle=float(theta[layer * n + i]))

    assert abs(float(np.sum(np.abs(state) ** 2)) - 1.0) < 1e-10, "norm drifted"
    assert float(np.max(np.abs(state.imag))) < 1e-12, "RY/CNOT state grew imaginary parts"
    return state


def exact_probabilities(state: np.ndarray) -> np.ndarray:
    """Born-rule outcome probabilities, indexed by basis index."""
    p = np.abs(state) ** 2
    total = float(p.sum())
    assert abs(total - 1.0) < 1e-10, f"state not normalized: sum p = {total}"
    return p


def sample_bitstrings(state: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw measurement outcomes from a state as an array of basis indices.

    Identical (state, shots, generator state) yields identical samples; use
    index_to_bits for the tuple form of an outcome.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p = exact_probabilities(state)
    return rng.choice(len(p), size=shots, p=p / p.sum())


def exact_p_min(state: np.ndarray, q: QuboInstance) -> float:
    """Exact probability of measuring a global-minimum bitstring.

    Computed from the statevector, not estimated from shots, so the success
    probability of an output circuit carries no sampling noise.
    """
    if q.minimizers is None:
        raise ValueError("minimizers not populated; run brute_force_minimum first")
    if len(state) != (1 << q.dimension):
        raise ValueError(
            f"state dimension {len(state)} does not match 2^{q.dimension}"
        )
    p = exact_probabilities(state)
    indices = np.fromiter((bits_to_index(m) for m in q.minimizers), dtype=np.int64)
    # Rescale by the realized total mass: removes ~1e-16 normalization drift,
    # and a fully degenerate instance (every bitstring minimal) gives exactly 1.
    value = float(p[indices].sum()) / float(p.sum())
    assert -1e-12 <= value <= 1.0 + 1e-12
    return min(max(value, 0.0), 1.0)
