"""Two-party protocol engine: remote preparation, remote measurement, teleport baseline.

Remote preparation of a known qubit: Alice measures her half of a shared
Bell pair in the qubit basis of the target state and sends the single
outcome bit (PSI_PERP -> 0, PSI -> 1). Bob undoes the rotation attached to
the shared Bell state; on bit 0 he then holds the target, on bit 1 he holds
its orthogonal complement. For targets restricted to the polar great circle
(real amplitudes) or the equatorial great circle (equal magnitudes) a fixed
single-qubit gate converts the complement back to the target, so delivery
is certain. For an arbitrary target the bit-1 branch cannot be fixed: no
unitary maps every state to its complement (that map is anti-unitary), so
delivery succeeds exactly half the time.

Remote measurement statistics, by contrast, are always reproducible: on
the complement branch Bob measures along the reversed apparatus direction
-b, which restores the statistics of measuring b on the target.

The teleport baseline sends a genuinely unknown qubit at the cost of a
Bell-state measurement and two classical bits, wire-encoded as
(x_fix, z_fix); Bob applies X^x then Z^z.

All classical communication passes through an in-process channel that
counts bits on the wire, so the one-bit and two-bit costs are measured
identically.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import BELL_ROTATIONS, qubit_basis
from .measurement import (
    AliceOutcome,
    MeasurementOutcome,
    ObservableStats,
    measure_particle1,
    observable_probs,
    project_particle1,
    sample_outcome,
)
from .qstate import (
    BellLabel,
    BlochVector,
    DensityMatrix2,
    PauliOp,
    PureQubit,
    PAULI_I,
    PAULI_IY,
    PAULI_X,
    PAULI_Z,
    apply_pauli,
    bell_state,
    bloch_of,
    fidelity,
)

# Tolerance for family membership checks on the target state. Loose enough
# to accept angles given to 7 significant digits on the command line; a
# family deviation of size eps costs only O(eps^2) in delivered fidelity,
# so exact delivery at EXACT_DELIVERY_TOL is unaffected.
FAMILY_TOL = 1e-6
EXACT_DELIVERY_TOL = 1e-9


class StateFamily(str, Enum):
    POLAR = "polar"
    EQUATORIAL = "equatorial"
    ARBITRARY = "arbitrary"


class FamilyMismatchError(ValueError):
    """Target state violates the declared family constraint."""


def require_family(family: StateFamily, target: PureQubit) -> None:
    """Reject targets outside the declared family (checked before any run)."""
    family = StateFamily(family)
    if family is StateFamily.POLAR:
        if abs(target.beta.imag) > FAMILY_TOL:
            raise FamilyMismatchError(
                f"family 'polar' requires real amplitudes (|Im beta| <= {FAMILY_TOL}); "
                f"got Im beta = {target.beta.imag}"
            )
    elif family is StateFamily.EQUATORIAL:
        if abs(target.theta - math.pi / 2.0) > FAMILY_TOL:
            raise FamilyMismatchError(
                f"family 'equatorial' requires theta = pi/2 within {FAMILY_TOL}; "
                f"got theta = {target.theta}"
            )


class ClassicalChannel:
    """One-way in-process bit queue; transcripts count bits at the channel."""

    def __init__(self):
        self._queue: deque[int] = deque()
        self.bits_sent = 0

    def send_bits(self, bits) -> None:
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"classical channel carries bits, got {b!r}")
            self._queue.append(int(b))
            self.bits_sent += 1

    def receive_bits(self, n: int) -> tuple[int, ...]:
        if len(self._queue) < n:
            raise RuntimeError(f"channel holds {len(self._queue)} bit(s), wanted {n}")
        return tuple(self._queue.popleft() for _ in range(n))


@dataclass(frozen=True)
class CorrectionRule:
    """Bob's recipe after receiving the classical bit.

    ``undo_rotation`` reverses the gate attached to the shared Bell state
    (inverse up to a global phase, which canonicalization absorbs);
    ``family_fix`` is the extra gate for the complement branch, None when
    nothing more is needed. ``deliverable`` is False only on the
    complement branch of an arbitrary target, where no fix exists.
    """

    undo_rotation: PauliOp
    family_fix: PauliOp | None
    deliverable: bool


# iY maps alpha|1> - beta|0> to alpha|0> + beta|1> for real amplitudes;
# derived by requiring fidelity 1 over the whole polar circle.
_POLAR_FIX = PAULI_IY
_EQUATORIAL_FIX = PAULI_Z

# Each rotation in BELL_ROTATIONS is its own inverse up to global phase.
_UNDO = {label: op for label, op in BELL_ROTATIONS.items()}


def correction_for(shared: BellLabel, cbit: int, family: StateFamily) -> CorrectionRule:
    """Correction table: undo the Bell rotation, then fix the complement branch."""
    if cbit not in (0, 1):
        raise ValueError(f"cbit must be 0 or 1, got {cbit!r}")
    undo = _UNDO[BellLabel(shared)]
    if cbit == 0:
        return CorrectionRule(undo_rotation=undo, family_fix=None, deliverable=True)
    family = StateFamily(family)
    if family is StateFamily.EQUATORIAL:
        return CorrectionRule(undo, _EQUATORIAL_FIX, deliverable=True)
    if family is StateFamily.POLAR:
        return CorrectionRule(undo, _POLAR_FIX, deliverable=True)
    return CorrectionRule(undo, None, deliverable=False)


@dataclass(frozen=True)
class BellMeasurementOutcome:
    """Result of the Bell-state measurement inside the teleport baseline."""

    label: BellLabel
    probability: float
    post_state_bob: PureQubit

    @property
    def cbits(self) -> tuple[int, int]:
        return _TELEPORT_WIRE_BITS[self.label]


@dataclass(frozen=True)
class ProtocolTranscript:
    target: PureQubit
    shared: BellLabel
    alice_outcome: MeasurementOutcome | BellMeasurementOutcome
    cbits_sent: int
    bob_final: PureQubit
    fidelity_to_target: float
    exact_delivery: bool

    def __post_init__(self):
        if self.cbits_sent not in (1, 2):
            raise ValueError(f"transcript carries {self.cbits_sent} cbits")
        expected = self.fidelity_to_target > 1.0 - EXACT_DELIVERY_TOL
        if self.exact_delivery != expected:
            raise ValueError("exact_delivery flag inconsistent with fidelity")


def _finish_rsp(
    target: PureQubit,
    shared: BellLabel,
    family: StateFamily,
    outcome: MeasurementOutcome,
) -> ProtocolTranscript:
    channel = ClassicalChannel()
    channel.send_bits((outcome.cbit,))
    (cbit,) = channel.receive_bits(1)

    rule = correction_for(shared, cbit, family)
    bob = apply_pauli(rule.undo_rotation, outcome.post_state_bob)
    if rule.family_fix is not None:
        bob = apply_pauli(rule.family_fix, bob)
    fid = fidelity(bob, target)
    return ProtocolTranscript(
        target=target,
        shared=shared,
        alice_outcome=outcome,
        cbits_sent=channel.bits_sent,
        bob_final=bob,
        fidelity_to_target=fid,
        exact_delivery=fid > 1.0 - EXACT_DELIVERY_TOL,
    )


def rsp_branch(
    target: PureQubit,
    shared: BellLabel,
    family: StateFamily,
    which: AliceOutcome,
) -> ProtocolTranscript:
    """Run one forced branch of the remote-preparation protocol (no sampling)."""
    require_family(family, target)
    outcome = project_particle1(bell_state(shared), qubit_basis(target), which)
    return _finish_rsp(target, shared, family, outcome)


def rsp_run(
    target: PureQubit,
    shared: BellLabel,
    family: StateFamily,
    rng: np.random.Generator,
) -> ProtocolTranscript:
    """One full sampled protocol run: measure, send one bit, correct."""
    require_family(family, target)
    outcome = measure_particle1(bell_state(shared), qubit_basis(target), rng)
    return _finish_rsp(target, shared, family, outcome)


def bob_premessage_density(target: PureQubit, shared: BellLabel) -> DensityMatrix2:
    """Bob's state before the classical bit arrives: the outcome-weighted mixture.

    No-signaling: this is the maximally mixed state regardless of target.
    """
    state = bell_state(shared)
    basis = qubit_basis(target)
    rho = np.zeros((2, 2), dtype=complex)
    for which in (AliceOutcome.PSI, AliceOutcome.PSI_PERP):
        out = project_particle1(state, basis, which)
        v = out.post_state_bob.vector
        rho += out.probability * np.outer(v, v.conj())
    return DensityMatrix2(rho)


@dataclass(frozen=True)
class RemoteMeasurementRecord:
    b: BlochVector
    cbit_received: int
    apparatus_flipped: bool
    outcome: str

    def __post_init__(self):
        if self.apparatus_flipped != (self.cbit_received == 1):
            raise ValueError("apparatus must be flipped exactly on the complement branch")


@dataclass(frozen=True)
class RemoteMeasurementAggregate:
    b: BlochVector
    trials: int
    plus_count: int
    minus_count: int
    branch_counts: tuple[int, int]  # (cbit 0, cbit 1)
    cbits_total: int
    p_plus_empirical: float
    p_plus_analytic: float
    records: tuple[RemoteMeasurementRecord, ...] | None = None


def analytic_remote_p_plus(target: PureQubit, b: BlochVector) -> float:
    """Closed-form probability of outcome '+': (1 + b.n)/2 for target Bloch n."""
    return 0.5 * (1.0 + b.dot(bloch_of(target)))


def remote_measurement_branch_stats(
    target: PureQubit, shared: BellLabel, b: BlochVector
) -> tuple[ObservableStats, ObservableStats]:
    """Per-branch outcome statistics after Bob's undo rotation.

    Branch 0 (cbit 0): Bob holds the target and measures along b.
    Branch 1 (cbit 1): Bob holds the complement and measures along -b;
    reversing the apparatus restores the branch-0 statistics without Bob
    ever learning the state.
    """
    state = bell_state(shared)
    basis = qubit_basis(target)
    undo = _UNDO[BellLabel(shared)]
    stats = {}
    for which in (AliceOutcome.PSI_PERP, AliceOutcome.PSI):
        out = project_particle1(state, basis, which)
        held = apply_pauli(undo, out.post_state_bob)
        rho = DensityMatrix2.from_pure(held)
        direction = b if out.cbit == 0 else b.negated()
        stats[out.cbit] = observable_probs(direction, rho)
    return stats[0], stats[1]


def simulate_remote_measurement(
    target: PureQubit,
    shared: BellLabel,
    b: BlochVector,
    trials: int,
    rng: np.random.Generator,
    keep_records: bool = False,
) -> RemoteMeasurementAggregate:
    """Monte Carlo remote measurement: one ebit + one cbit per trial.

    Each trial consumes two uniform draws (Alice's branch, Bob's outcome),
    so the stream layout is identical whether trials are simulated one at
    a time or in a batch.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    state = bell_state(shared)
    basis = qubit_basis(target)
    # Both branches are state-independent across trials; precompute them.
    p_psi = project_particle1(state, basis, AliceOutcome.PSI).probability
    stats0, stats1 = remote_measurement_branch_stats(target, shared, b)

    draws = rng.random((trials, 2))
    on_psi = draws[:, 0] < p_psi  # cbit 1: Bob holds the complement
    plus = np.where(on_psi, draws[:, 1] < stats1.p_plus, draws[:, 1] < stats0.p_plus)
    plus_count = int(np.count_nonzero(plus))
    branch1 = int(np.count_nonzero(on_psi))

    records = None
    if keep_records:
        records = tuple(
            RemoteMeasurementRecord(
                b=b,
                cbit_received=int(flip),
                apparatus_flipped=bool(flip),
                outcome="+" if up else "-",
            )
            for flip, up in zip(on_psi, plus)
        )
    return RemoteMeasurementAggregate(
        b=b,
        trials=trials,
        plus_count=plus_count,
        minus_count=trials - plus_count,
        branch_counts=(trials - branch1, branch1),
        cbits_total=trials,
        p_plus_empirical=plus_count / trials,
        p_plus_analytic=analytic_remote_p_plus(target, b),
        records=records,
    )


def remote_measurement_trial(
    target: PureQubit,
    shared: BellLabel,
    b: BlochVector,
    rng: np.random.Generator,
) -> RemoteMeasurementRecord:
    """One fully assembled remote-measurement trial (used for record-level tests)."""
    require_family(StateFamily.ARBITRARY, target)
    outcome = measure_particle1(bell_state(shared), qubit_basis(target), rng)
    channel = ClassicalChannel()
    channel.send_bits((outcome.cbit,))
    (cbit,) = channel.receive_bits(1)
    held = apply_pauli(_UNDO[BellLabel(shared)], outcome.post_state_bob)
    flipped = cbit == 1
    direction = b.negated() if flipped else b
    stats = observable_probs(direction, DensityMatrix2.from_pure(held))
    return RemoteMeasurementRecord(
        b=b,
        cbit_received=cbit,
        apparatus_flipped=flipped,
        outcome=sample_outcome(stats, rng),
    )


# Teleport wire format: two bits (x_fix, z_fix); Bob applies X^x then Z^z,
# i.e. the combined gate Z^z X^x.
_TELEPORT_WIRE_BITS = {
    BellLabel.PSI_MINUS: (0, 0),
    BellLabel.PSI_PLUS: (0, 1),
    BellLabel.PHI_MINUS: (1, 0),
    BellLabel.PHI_PLUS: (1, 1),
}

_TELEPORT_CORRECTIONS = {
    (0, 0): PAULI_I,
    (0, 1): PAULI_Z,
    (1, 0): PAULI_X,
    (1, 1): PAULI_IY,  # Z X
}

# Sampling order for the four equiprobable outcomes (fixed for determinism).
TELEPORT_OUTCOME_ORDER = (
    BellLabel.PSI_MINUS,
    BellLabel.PSI_PLUS,
    BellLabel.PHI_MINUS,
    BellLabel.PHI_PLUS,
)


def _teleport_branches(target: PureQubit) -> dict[BellLabel, BellMeasurementOutcome]:
    """Project (message, Alice) onto each Bell state; Bob's residual per branch."""
    joint = np.kron(target.vector, bell_state(BellLabel.PSI_MINUS).amplitudes)
    joint = joint.reshape(2, 2, 2)  # (message, alice, bob)
    branches = {}
    for label in TELEPORT_OUTCOME_ORDER:
        bra = bell_state(label).amplitudes.reshape(2, 2).conj()
        residual = np.einsum("ma,mab->b", bra, joint)
        probability = float(np.vdot(residual, residual).real)
        branches[label] = BellMeasurementOutcome(
            label=label,
            probability=probability,
            post_state_bob=PureQubit.from_vector(residual),
        )
    return branches


def teleport_branch_probabilities(target: PureQubit) -> dict[BellLabel, float]:
    """Analytic Bell-measurement outcome probabilities (1/4 each)."""
    return {label: out.probability for label, out in _teleport_branches(target).items()}


def _finish_teleport(target: PureQubit, outcome: BellMeasurementOutcome) -> ProtocolTranscript:
    channel = ClassicalChannel()
    channel.send_bits(outcome.cbits)
    bits = channel.receive_bits(2)
    bob = apply_pauli(_TELEPORT_CORRECTIONS[bits], outcome.post_state_bob)
    fid = fidelity(bob, target)
    return ProtocolTranscript(
        target=target,
        shared=BellLabel.PSI_MINUS,
        alice_outcome=outcome,
        cbits_sent=channel.bits_sent,
        bob_final=bob,
        fidelity_to_target=fid,
        exact_delivery=fid > 1.0 - EXACT_DELIVERY_TOL,
    )


def teleport_branch(target: PureQubit, label: BellLabel) -> ProtocolTranscript:
    """Run one forced branch of the teleport baseline (no sampling)."""
    return _finish_teleport(target, _teleport_branches(target)[label])


def teleport_baseline(target: PureQubit, rng: np.random.Generator) -> ProtocolTranscript:
    """Standard teleportation over the singlet: Bell measurement plus two cbits."""
    branches = _teleport_branches(target)
    u = rng.random()
    cumulative = 0.0
    chosen = TELEPORT_OUTCOME_ORDER[-1]
    for label in TELEPORT_OUTCOME_ORDER:
        cumulative += branches[label].probability
        if u < cumulative:
            chosen = label
            break
    return _finish_teleport(target, branches[chosen])
