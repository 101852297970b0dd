"""Dense complex statevector core for small qubit registers.

Conventions used throughout the package:

* Amplitude indices are most-significant-bit first: bit k of the index
  (counting from the MSB) belongs to qubit k, so the first qubit of a
  register is the leftmost symbol in ket notation.
* Every operation is pure. Inputs are never mutated and results are fresh
  ``StateVector`` values, so independent measurement branches can be
  explored concurrently without locking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

NORM_TOL = 1e-10
UNITARY_TOL = 1e-12
ZERO_PROB_CUTOFF = 1e-14

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# A qubit index is a plain int in [0, n_qubits); a single-qubit operator is a
# unitary (2, 2) complex ndarray.
QubitIndex = int
SingleQubitOp = np.ndarray


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on ``n_qubits`` qubits, amplitudes MSB-first."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes for "
                f"{self.n_qubits} qubit(s), got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")


def make_state(
    n_qubits: int,
    amplitudes: Sequence[complex] | np.ndarray,
    *,
    normalize: bool = False,
) -> StateVector:
    """Build a validated state from raw amplitudes.

    With ``normalize=True`` the vector is rescaled to unit norm instead of
    being rejected when its norm is off.
    """
    amps = np.array(amplitudes, dtype=complex).reshape(-1)
    if amps.shape != (1 << n_qubits,):
        raise ValueError(
            f"expected {1 << n_qubits} amplitudes for {n_qubits} qubit(s), got {amps.size}"
        )
    norm = np.linalg.norm(amps)
    if norm < 1e-12:
        raise ValueError("zero vector cannot represent a state")
    if normalize:
        amps = amps / norm
    return StateVector(n_qubits, amps)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product; ``a``'s qubits come first (most significant)."""
    return StateVector(a.n_qubits + b.n_qubits, np.kron(a.amplitudes, b.amplitudes))


def apply_single(state: StateVector, q: QubitIndex, op: SingleQubitOp) -> StateVector:
    """Apply a unitary 2x2 operator to qubit ``q``."""
    n = state.n_qubits
    if not 0 <= q < n:
        raise ValueError(f"qubit index {q} out of range for {n}-qubit state")
    mat = np.asarray(op, dtype=complex)
    if mat.shape != (2, 2):
        raise ValueError(f"single-qubit operator must be 2x2, got {mat.shape}")
    if np.max(np.abs(mat @ mat.conj().T - IDENTITY)) > UNITARY_TOL:
        raise ValueError("operator is not unitary")
    psi = state.amplitudes.reshape((2,) * n)
    out = np.tensordot(mat, psi, axes=([1], [q]))
    out = np.moveaxis(out, 0, q)
    return StateVector(n, out.reshape(-1))


def _checked_subset(n_qubits: int, qubits: Sequence[QubitIndex]) -> list[int]:
    qs = [int(q) for q in qubits]
    if any(q < 0 or q >= n_qubits for q in qs):
        raise ValueError(f"qubit indices {qs} out of range for {n_qubits} qubits")
    if len(set(qs)) != len(qs):
        raise ValueError(f"duplicate qubit indices in {qs}")
    return qs


def _subset_matrix(state: StateVector, qubits: list[int]) -> np.ndarray:
    """Amplitudes as a (2^k, 2^(n-k)) matrix, subset axes first in given order."""
    k = len(qubits)
    psi = state.amplitudes.reshape((2,) * state.n_qubits)
    psi = np.moveaxis(psi, qubits, range(k))
    return psi.reshape(1 << k, -1)


def project_subset(
    state: StateVector,
    qubits: Sequence[QubitIndex],
    basis_vector: StateVector,
) -> tuple[float, StateVector | None]:
    """Project a qubit subset onto one basis vector.

    Returns the outcome probability and the renormalized residual state on
    the remaining qubits (measured qubits are removed; the rest keep their
    relative order). The residual is None for a dead branch, i.e. when the
    probability falls below ``ZERO_PROB_CUTOFF``.
    """
    qs = _checked_subset(state.n_qubits, qubits)
    if basis_vector.n_qubits != len(qs):
        raise ValueError(
            f"basis vector covers {basis_vector.n_qubits} qubit(s), subset has {len(qs)}"
        )
    mat = _subset_matrix(state, qs)
    resid = basis_vector.amplitudes.conj() @ mat
    prob = float(np.vdot(resid, resid).real)
    if prob < ZERO_PROB_CUTOFF:
        return prob, None
    return prob, StateVector(state.n_qubits - len(qs), resid / np.sqrt(prob))


def outcome_probabilities(
    state: StateVector,
    qubits: Sequence[QubitIndex],
    basis: Sequence[StateVector],
) -> list[float]:
    """Probabilities of every outcome of a joint measurement on a subset.

    ``basis`` must be a complete orthonormal basis of the subset's space;
    the returned probabilities sum to 1 within ``NORM_TOL``.
    """
    qs = _checked_subset(state.n_qubits, qubits)
    k = len(qs)
    if len(basis) != 1 << k:
        raise ValueError(f"basis has {len(basis)} vectors, expected {1 << k}")
    if any(b.n_qubits != k for b in basis):
        raise ValueError("basis vector dimension does not match subset size")
    bmat = np.stack([b.amplitudes for b in basis])
    gram = bmat @ bmat.conj().T
    if np.max(np.abs(gram - np.eye(1 << k))) > NORM_TOL:
        raise ValueError("basis is not orthonormal")
    amps = bmat.conj() @ _subset_matrix(state, qs)
    probs = np.einsum("ij,ij->i", amps, amps.conj()).real
    total = float(probs.sum())
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"outcome probabilities sum to {total}, not 1")
    return [float(p) for p in probs]
