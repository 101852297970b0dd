"""Multiparty sharing of an arbitrary two-qubit state over 2N EPR pairs.

The sender (Alice) holds the two secret particles x, y plus one half of every
EPR pair; agent i holds particles b_i and d_i. Alice performs two joint
GHZ-basis measurements, the N-1 controllers measure their particles along x,
and the receiver (Charlie, holding b_N and d_N) repairs the residual state
with a pair of Pauli operators chosen from the published classical bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .bases import (
    MINUS,
    GhzOutcome,
    XOutcome,
    bell_state,
    ghz_basis_family,
    sign_bit,
    sign_str,
    x_basis,
)
from .statevec import (
    NORM_TOL,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    IDENTITY,
    ZERO_PROB_CUTOFF,
    StateVector,
    apply_single,
    project_subset,
    tensor,
)

DEFAULT_QUBIT_CAP = 26

# Receiver repair operators, indexed 0..3: identity, sigma_z, sigma_x, i*sigma_y.
CORRECTION_OPS = (IDENTITY, SIGMA_Z, SIGMA_X, 1j * SIGMA_Y)
CORRECTION_LABELS = ("U0", "U1", "U2", "U3")


class CapExceededError(ValueError):
    """A configured resource cap (qubits or branch count) would be exceeded."""


@dataclass(frozen=True)
class SecretState:
    """The unknown two-qubit state alpha|00> + beta|01> + gamma|10> + delta|11>."""

    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        total = sum(abs(a) ** 2 for a in self._amps())
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"secret amplitudes have squared norm {total}, not 1")

    def _amps(self) -> tuple[complex, complex, complex, complex]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array(self._amps(), dtype=complex)

    def as_state(self) -> StateVector:
        return StateVector(2, self.amplitudes)

    def to_dict(self) -> dict:
        return {
            name: [value.real, value.imag]
            for name, value in zip(("alpha", "beta", "gamma", "delta"), self._amps())
        }


@dataclass(frozen=True)
class ParticleRegistry:
    """Maps role-based particle names to qubit indices of the current state.

    Names appear in the fixed order x, y, a1, b1, ..., aN, bN, c1, d1, ...,
    cN, dN; a particle's index is its position. Measuring removes particles,
    so a shrunk registry (via :meth:`without`) tracks the relabeled indices.
    """

    n_agents: int
    names: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(self.names))
        if len(set(self.names)) != len(self.names):
            raise ValueError("particle names must be unique")

    @classmethod
    def for_agents(cls, n_agents: int) -> ParticleRegistry:
        if n_agents < 2:
            raise ValueError(f"at least 2 agents are required, got {n_agents}")
        names = ["x", "y"]
        for i in range(1, n_agents + 1):
            names += [f"a{i}", f"b{i}"]
        for i in range(1, n_agents + 1):
            names += [f"c{i}", f"d{i}"]
        return cls(n_agents, tuple(names))

    @property
    def n_qubits(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"particle {name!r} is not present (unknown or already measured)")

    def indices(self, names: Sequence[str]) -> list[int]:
        return [self.index(name) for name in names]

    def without(self, names: Sequence[str]) -> ParticleRegistry:
        gone = set(names)
        missing = gone - set(self.names)
        if missing:
            raise ValueError(f"cannot remove absent particles {sorted(missing)}")
        return ParticleRegistry(self.n_agents, tuple(n for n in self.names if n not in gone))


@dataclass(frozen=True)
class PauliCorrection:
    """Receiver repair pair: ``first`` acts on b_N, ``second`` on d_N (0..3)."""

    first: int
    second: int

    def __post_init__(self) -> None:
        if self.first not in range(4) or self.second not in range(4):
            raise ValueError(f"correction indices must be in 0..3, got {self}")

    @property
    def labels(self) -> tuple[str, str]:
        return (CORRECTION_LABELS[self.first], CORRECTION_LABELS[self.second])

    def to_dict(self) -> dict:
        return {"first": self.labels[0], "second": self.labels[1]}


@dataclass(frozen=True)
class ClassicalMessage:
    """Two published classical bits from one participant."""

    sender: str
    payload_bits: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "payload_bits", tuple(int(b) for b in self.payload_bits))

    def to_dict(self) -> dict:
        return {"sender": self.sender, "payload_bits": list(self.payload_bits)}


@dataclass(frozen=True)
class ProtocolTranscript:
    """Full record of one protocol execution branch."""

    secret: SecretState
    n_agents: int
    alice_outcome_1: GhzOutcome
    alice_outcome_2: GhzOutcome
    controller_outcomes: tuple[tuple[XOutcome, XOutcome], ...]
    t: int
    q: int
    correction: PauliCorrection
    messages: tuple[ClassicalMessage, ...]
    branch_probability: float
    final_fidelity: float

    def __post_init__(self) -> None:
        if len(self.controller_outcomes) != self.n_agents - 1:
            raise ValueError("one outcome pair per controller is required")
        if self.t != sum(1 for b, _ in self.controller_outcomes if b.sign == MINUS):
            raise ValueError("parity t does not match the b-side minus count")
        if self.q != sum(1 for _, d in self.controller_outcomes if d.sign == MINUS):
            raise ValueError("parity q does not match the d-side minus count")
        if not 0.0 < self.branch_probability <= 1.0 + NORM_TOL:
            raise ValueError(f"branch probability {self.branch_probability} out of range")
        if not -NORM_TOL <= self.final_fidelity <= 1.0 + NORM_TOL:
            raise ValueError(f"fidelity {self.final_fidelity} out of range")
        bits = sum(len(m.payload_bits) for m in self.messages)
        if bits != 2 * (self.n_agents + 1):
            raise ValueError(f"expected {2 * (self.n_agents + 1)} published bits, got {bits}")

    def outcome_key(self) -> str:
        """Compact branch identifier, e.g. ``G00+|G01-|+-``."""
        pairs = "".join(sign_str(b.sign) + sign_str(d.sign) for b, d in self.controller_outcomes)
        return f"{self.alice_outcome_1.label}|{self.alice_outcome_2.label}|{pairs}"

    def to_dict(self) -> dict:
        return {
            "secret": self.secret.to_dict(),
            "n_agents": self.n_agents,
            "alice_outcome_1": self.alice_outcome_1.to_dict(),
            "alice_outcome_2": self.alice_outcome_2.to_dict(),
            "controller_outcomes": [
                [sign_str(b.sign), sign_str(d.sign)] for b, d in self.controller_outcomes
            ],
            "t": self.t,
            "q": self.q,
            "correction": self.correction.to_dict(),
            "messages": [m.to_dict() for m in self.messages],
            "branch_probability": self.branch_probability,
            "final_fidelity": self.final_fidelity,
        }


# A selector picks one outcome index given the stage name, the candidate
# outcomes and their probabilities; it is how forced, enumerated and sampled
# executions share one protocol engine.
Selector = Callable[[str, Sequence[object], np.ndarray], int]


def random_selector(rng: np.random.Generator) -> Selector:
    """Selector sampling each measurement from its true distribution."""

    def pick(stage: str, outcomes: Sequence[object], probs: np.ndarray) -> int:
        edges = np.cumsum(probs)
        idx = int(np.searchsorted(edges, rng.random() * edges[-1]))
        return min(idx, len(outcomes) - 1)

    return pick


def forced_selector(plan: dict[str, object]) -> Selector:
    """Selector forcing the outcome recorded in ``plan`` for each stage.

    Stage names are ``alice_1``, ``alice_2`` and ``controller_i``; controller
    outcomes are (XOutcome, XOutcome) pairs.
    """

    def pick(stage: str, outcomes: Sequence[object], probs: np.ndarray) -> int:
        if stage not in plan:
            raise ValueError(f"no forced outcome for stage {stage!r}")
        wanted = plan[stage]
        for idx, outcome in enumerate(outcomes):
            if outcome == wanted:
                if probs[idx] < ZERO_PROB_CUTOFF:
                    raise ValueError(f"forced outcome for {stage!r} has zero probability")
                return idx
        raise ValueError(f"{wanted!r} is not a valid outcome for stage {stage!r}")

    return pick


def build_initial_state(
    secret: SecretState,
    n_agents: int,
    *,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> tuple[StateVector, ParticleRegistry]:
    """Secret state tensored with the 2N shared EPR pairs (all phi+)."""
    registry = ParticleRegistry.for_agents(n_agents)
    if registry.n_qubits > qubit_cap:
        raise CapExceededError(
            f"{registry.n_qubits} qubits needed for {n_agents} agents exceeds cap {qubit_cap}"
        )
    epr = bell_state("phi+")
    state = secret.as_state()
    for _ in range(2 * n_agents):
        state = tensor(state, epr)
    return state, registry


def _ghz_split(state: StateVector, qubit_indices: list[int]):
    """Joint GHZ measurement data for a qubit subset, all outcomes at once.

    Returns ``(probs, residual)`` with ``probs`` in ``ghz_basis_family``
    order and ``residual(i)`` the normalized post-measurement state for
    outcome i (None for a dead branch). Exploits the two-term structure of
    each GHZ vector, so the cost is linear in the state size.
    """
    n, k = state.n_qubits, len(qubit_indices)
    psi = np.moveaxis(state.amplitudes.reshape((2,) * n), qubit_indices, range(k))
    mat = psi.reshape(1 << k, -1)
    half = 1 << (k - 1)
    m0 = mat[:half]
    m1c = mat[half:][::-1]  # row b of the upper block is |1, complement(b)>
    n0 = np.einsum("br,br->b", m0, m0.conj()).real
    n1 = np.einsum("br,br->b", m1c, m1c.conj()).real
    cross = np.einsum("br,br->b", m0, m1c.conj()).real
    probs = np.empty(1 << k)
    probs[0::2] = (n0 + n1) / 2.0 + cross
    probs[1::2] = (n0 + n1) / 2.0 - cross
    np.maximum(probs, 0.0, out=probs)

    def residual(index: int) -> StateVector | None:
        prob = probs[index]
        if prob < ZERO_PROB_CUTOFF:
            return None
        label, parity = divmod(index, 2)
        row = m0[label] + m1c[label] if parity == 0 else m0[label] - m1c[label]
        return StateVector(n - k, row / np.sqrt(2.0 * prob))

    return probs, residual


def _alice_targets(registry: ParticleRegistry, which: int) -> list[str]:
    if which == 1:
        return ["x"] + [f"a{i}" for i in range(1, registry.n_agents + 1)]
    if which == 2:
        if "x" in registry:
            raise ValueError("joint measurement 1 must precede joint measurement 2")
        return ["y"] + [f"c{i}" for i in range(1, registry.n_agents + 1)]
    raise ValueError(f"which must be 1 or 2, got {which}")


def alice_branches(
    state: StateVector,
    registry: ParticleRegistry,
    which: int,
) -> list[tuple[GhzOutcome, float, StateVector | None, ParticleRegistry]]:
    """All branches of one of Alice's joint GHZ measurements, in family order."""
    names = _alice_targets(registry, which)
    probs, residual = _ghz_split(state, registry.indices(names))
    shrunk = registry.without(names)
    outcomes = [o for o, _ in ghz_basis_family(registry.n_agents)]
    return [
        (outcome, float(probs[i]), residual(i), shrunk)
        for i, outcome in enumerate(outcomes)
    ]


def alice_measure(
    state: StateVector,
    registry: ParticleRegistry,
    which: int,
    selector: Selector,
) -> tuple[GhzOutcome, float, StateVector, ParticleRegistry]:
    """One of Alice's joint GHZ measurements (1: x with all a_i, 2: y with all c_i).

    Returns the outcome, its probability, the residual state with the
    measured particles removed, and the correspondingly shrunk registry.
    """
    names = _alice_targets(registry, which)
    probs, residual = _ghz_split(state, registry.indices(names))
    outcomes = [o for o, _ in ghz_basis_family(registry.n_agents)]
    idx = selector(f"alice_{which}", outcomes, probs)
    post = residual(idx)
    if post is None:
        raise ValueError(f"selector picked a zero-probability branch for alice_{which}")
    return outcomes[idx], float(probs[idx]), post, registry.without(names)


@lru_cache(maxsize=1)
def _x_pair_basis() -> tuple[tuple[tuple[XOutcome, XOutcome], StateVector], ...]:
    singles = x_basis()
    return tuple(
        ((ob, od), tensor(vb, vd)) for ob, vb in singles for od, vd in singles
    )


def controller_branches(
    state: StateVector,
    registry: ParticleRegistry,
    controller_index: int,
) -> list[tuple[tuple[XOutcome, XOutcome], float, StateVector | None, ParticleRegistry]]:
    """All four x-basis sign branches of one controller's product measurement."""
    n_agents = registry.n_agents
    if not 1 <= controller_index <= n_agents - 1:
        raise ValueError(
            f"controller index must be in 1..{n_agents - 1}, got {controller_index}"
        )
    if "x" in registry or "y" in registry:
        raise ValueError("controllers measure only after both joint measurements")
    names = [f"b{controller_index}", f"d{controller_index}"]
    idxs = registry.indices(names)
    shrunk = registry.without(names)
    branches = []
    for pair, vec in _x_pair_basis():
        prob, post = project_subset(state, idxs, vec)
        branches.append((pair, float(prob), post, shrunk))
    return branches


def controller_measure(
    state: StateVector,
    registry: ParticleRegistry,
    controller_index: int,
    selector: Selector,
) -> tuple[tuple[XOutcome, XOutcome], float, StateVector, ParticleRegistry]:
    """Controller i's product measurement along x on particles b_i and d_i."""
    branches = controller_branches(state, registry, controller_index)
    outcomes = [pair for pair, _, _, _ in branches]
    probs = np.array([p for _, p, _, _ in branches])
    idx = selector(f"controller_{controller_index}", outcomes, probs)
    pair, prob, post, shrunk = branches[idx]
    if post is None:
        raise ValueError(
            f"selector picked a zero-probability branch for controller_{controller_index}"
        )
    return pair, prob, post, shrunk


_OP_INDEX = {(0, 1): 0, (0, -1): 1, (1, 1): 2, (1, -1): 3}


def correction_for(v1: int, v2: int, s1: int, s2: int) -> PauliCorrection:
    """Receiver repair pair from the published values and combined signs.

    ``s1`` is the sign of joint measurement 1 multiplied by (-1)^t, where t
    counts the controllers' minus results on the b side; ``s2`` likewise with
    (-1)^q on the d side. Each side maps independently: (0,+) identity,
    (0,-) sigma_z, (1,+) sigma_x, (1,-) i*sigma_y.
    """
    if v1 not in (0, 1) or v2 not in (0, 1):
        raise ValueError(f"bit values must be 0/1, got {(v1, v2)}")
    if s1 not in (1, -1) or s2 not in (1, -1):
        raise ValueError(f"signs must be +1/-1, got {(s1, s2)}")
    return PauliCorrection(_OP_INDEX[(v1, s1)], _OP_INDEX[(v2, s2)])


def charlie_reconstruct(state: StateVector, correction: PauliCorrection) -> StateVector:
    """Apply the repair pair to the receiver's two particles (b_N then d_N)."""
    if state.n_qubits != 2:
        raise ValueError(f"receiver state must have 2 qubits, got {state.n_qubits}")
    out = apply_single(state, 0, CORRECTION_OPS[correction.first])
    return apply_single(out, 1, CORRECTION_OPS[correction.second])


def _messages(
    alice_1: GhzOutcome,
    alice_2: GhzOutcome,
    controller_pairs: Sequence[tuple[XOutcome, XOutcome]],
) -> tuple[ClassicalMessage, ...]:
    msgs = [
        ClassicalMessage("alice", (alice_1.v_value, sign_bit(alice_1.sign))),
        ClassicalMessage("alice", (alice_2.v_value, sign_bit(alice_2.sign))),
    ]
    for i, (b, d) in enumerate(controller_pairs, start=1):
        msgs.append(ClassicalMessage(f"bob_{i}", (sign_bit(b.sign), sign_bit(d.sign))))
    return tuple(msgs)


def complete_branch(
    secret: SecretState,
    n_agents: int,
    alice_1: GhzOutcome,
    alice_2: GhzOutcome,
    controller_pairs: Sequence[tuple[XOutcome, XOutcome]],
    branch_probability: float,
    receiver_state: StateVector,
) -> ProtocolTranscript:
    """Correction, reconstruction fidelity and message accounting for a fully
    measured branch."""
    pairs = tuple(controller_pairs)
    t = sum(1 for b, _ in pairs if b.sign == MINUS)
    q = sum(1 for _, d in pairs if d.sign == MINUS)
    s1 = alice_1.sign * (-1 if t % 2 else 1)
    s2 = alice_2.sign * (-1 if q % 2 else 1)
    correction = correction_for(alice_1.v_value, alice_2.v_value, s1, s2)
    final = charlie_reconstruct(receiver_state, correction)
    fidelity = float(abs(np.vdot(secret.amplitudes, final.amplitudes)) ** 2)
    return ProtocolTranscript(
        secret=secret,
        n_agents=n_agents,
        alice_outcome_1=alice_1,
        alice_outcome_2=alice_2,
        controller_outcomes=pairs,
        t=t,
        q=q,
        correction=correction,
        messages=_messages(alice_1, alice_2, pairs),
        branch_probability=float(branch_probability),
        final_fidelity=fidelity,
    )


def run_measurement_phase(
    state: StateVector,
    registry: ParticleRegistry,
    secret: SecretState,
    selector: Selector,
) -> ProtocolTranscript:
    """Run all measurements and the receiver's repair on a prepared state."""
    n_agents = registry.n_agents
    o1, p1, state, registry = alice_measure(state, registry, 1, selector)
    o2, p2, state, registry = alice_measure(state, registry, 2, selector)
    probability = p1 * p2
    pairs = []
    for i in range(1, n_agents):
        pair, pc, state, registry = controller_measure(state, registry, i, selector)
        pairs.append(pair)
        probability *= pc
    return complete_branch(secret, n_agents, o1, o2, pairs, probability, state)


def run_protocol(
    secret: SecretState,
    n_agents: int,
    selector: Selector,
    *,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> ProtocolTranscript:
    """Execute the full sharing protocol once and return its transcript."""
    state, registry = build_initial_state(secret, n_agents, qubit_cap=qubit_cap)
    return run_measurement_phase(state, registry, secret, selector)


class EfficiencyReport(NamedTuple):
    qubits_used: int
    qubits_carrying_information: int
    ratio: float


def efficiency_report(transcript: ProtocolTranscript) -> EfficiencyReport:
    """Entangled-qubit usage of a run: all 4N EPR qubits carry information."""
    used = 4 * transcript.n_agents
    return EfficiencyReport(used, used, 1.0)
