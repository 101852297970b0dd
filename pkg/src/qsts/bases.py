"""Measurement bases: Bell pairs, the x eigenbasis, and the generalized
multi-qubit GHZ family, with the label bookkeeping the sharing protocol
publishes as classical bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .statevec import StateVector

PLUS = 1
MINUS = -1

_SQRT2_INV = 1.0 / np.sqrt(2.0)


def sign_str(sign: int) -> str:
    return "+" if sign > 0 else "-"


def sign_bit(sign: int) -> int:
    """Wire encoding of a sign: + is 0, - is 1."""
    return 0 if sign > 0 else 1


@dataclass(frozen=True)
class GhzOutcome:
    """Result label of a generalized GHZ joint measurement.

    ``label_bits`` are the bits naming the basis vector
    (|0 b> +/- |1 b-complement>)/sqrt(2); ``sign`` is +1 or -1. The published
    classical bits are the last label bit (V) and the sign (P).
    """

    label_bits: tuple[int, ...]
    sign: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "label_bits", tuple(int(b) for b in self.label_bits))
        if len(self.label_bits) < 1:
            raise ValueError("at least one label bit is required")
        if any(b not in (0, 1) for b in self.label_bits):
            raise ValueError(f"label bits must be 0/1, got {self.label_bits}")
        if self.sign not in (PLUS, MINUS):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def v_value(self) -> int:
        return self.label_bits[-1]

    @property
    def p_value(self) -> int:
        return self.sign

    @property
    def label(self) -> str:
        return "G" + "".join(str(b) for b in self.label_bits) + sign_str(self.sign)

    def to_dict(self) -> dict:
        return {"label_bits": list(self.label_bits), "sign": sign_str(self.sign)}


@dataclass(frozen=True)
class XOutcome:
    """Outcome of a single-qubit measurement along x: the |+x> or |-x> branch."""

    sign: int

    def __post_init__(self) -> None:
        if self.sign not in (PLUS, MINUS):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")


_BELL = {
    "phi+": (0b00, 0b11, PLUS),
    "phi-": (0b00, 0b11, MINUS),
    "psi+": (0b01, 0b10, PLUS),
    "psi-": (0b01, 0b10, MINUS),
}


def bell_state(kind: str) -> StateVector:
    """One of the four Bell states: phi+/- = (|00> +/- |11>)/sqrt(2),
    psi+/- = (|01> +/- |10>)/sqrt(2)."""
    try:
        first, second, sign = _BELL[kind]
    except KeyError:
        raise ValueError(f"unknown Bell state {kind!r}, expected one of {sorted(_BELL)}")
    amps = np.zeros(4, dtype=complex)
    amps[first] = _SQRT2_INV
    amps[second] = sign * _SQRT2_INV
    return StateVector(2, amps)


def ghz_basis_vector(outcome: GhzOutcome) -> StateVector:
    """The basis vector (|0 b> + sign * |1 b-complement>)/sqrt(2) on N+1 qubits."""
    n = len(outcome.label_bits)
    label = 0
    for b in outcome.label_bits:
        label = (label << 1) | b
    amps = np.zeros(1 << (n + 1), dtype=complex)
    amps[label] = _SQRT2_INV
    amps[(1 << n) + ((1 << n) - 1 - label)] = outcome.sign * _SQRT2_INV
    return StateVector(n + 1, amps)


@lru_cache(maxsize=None)
def _family(n_label_bits: int) -> tuple[tuple[GhzOutcome, StateVector], ...]:
    entries = []
    for bits in product((0, 1), repeat=n_label_bits):
        for sign in (PLUS, MINUS):
            outcome = GhzOutcome(bits, sign)
            entries.append((outcome, ghz_basis_vector(outcome)))
    return tuple(entries)


def ghz_basis_family(n_label_bits: int) -> list[tuple[GhzOutcome, StateVector]]:
    """Complete orthonormal GHZ basis of the (n_label_bits+1)-qubit space.

    Enumeration order is fixed: label bits lexicographic, + before - for each
    label, so branch orderings are reproducible.
    """
    if n_label_bits < 1:
        raise ValueError("n_label_bits must be at least 1")
    return list(_family(n_label_bits))


def x_basis() -> list[tuple[XOutcome, StateVector]]:
    """The sigma_x eigenbasis, |+x> then |-x>."""
    plus = StateVector(1, np.array([_SQRT2_INV, _SQRT2_INV]))
    minus = StateVector(1, np.array([_SQRT2_INV, -_SQRT2_INV]))
    return [(XOutcome(PLUS), plus), (XOutcome(MINUS), minus)]


def outcome_v(outcome: GhzOutcome) -> int:
    """Published bit value of a GHZ outcome: the last label bit."""
    return outcome.label_bits[-1]


def outcome_p(outcome: GhzOutcome) -> int:
    """Published sign of a GHZ outcome, +1 or -1."""
    return outcome.sign
