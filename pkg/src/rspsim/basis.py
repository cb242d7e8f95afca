"""Change of basis to the measurement basis built from a known qubit.

Given the state Alice wants to prepare on Bob's side, the natural
measurement basis for her half of the entangled pair is {|psi>, |psi_perp>}
with |psi_perp> = -beta*|0> + alpha|1>. Every maximally entangled state
then splits into the two product terms |psi>(R|psi_perp>) and
|psi_perp>(R|psi>) for a single fixed rotation R on Bob's particle.

The rotation attached to each Bell state is fixed, but the relative sign
between the two terms and the overall phase are solved numerically against
the standard Bell amplitudes rather than hard-coded: conventions for these
signs vary, and the decomposition must reconstruct the shared state to
machine precision for every choice of basis state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qstate import (
    ATOL,
    BellLabel,
    PauliOp,
    PureQubit,
    PAULI_I,
    PAULI_IY,
    PAULI_X,
    PAULI_Z,
    bell_state,
    fidelity,
)

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class ReconstructionError(RuntimeError):
    """No sign/phase combination reproduces the target Bell state."""


@dataclass(frozen=True, eq=False)
class QubitBasis:
    """Orthonormal pair {psi, psi_perp} used by Alice's projective measurement.

    ``psi_perp_raw`` keeps the un-canonicalized amplitudes
    (-beta*, alpha); the decomposition identities below hold literally for
    this representation, while ``psi_perp`` is the canonical view handed to
    protocol outputs.
    """

    psi: PureQubit
    psi_perp: PureQubit
    psi_perp_raw: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.psi_perp_raw, dtype=complex).reshape(2)
        raw.setflags(write=False)
        object.__setattr__(self, "psi_perp_raw", raw)
        if fidelity(self.psi, self.psi_perp) > ATOL:
            raise ValueError("basis states must be orthogonal")


def qubit_basis(psi: PureQubit) -> QubitBasis:
    """Build the orthonormal basis {psi, -beta*|0> + alpha|1>}."""
    raw = np.array([-psi.beta.conjugate(), psi.alpha], dtype=complex)
    return QubitBasis(psi=psi, psi_perp=PureQubit.from_vector(raw), psi_perp_raw=raw)


@dataclass(frozen=True, eq=False)
class BellDecomposition:
    """One Bell state written in the qubit basis of particle 1.

    Reconstruction: ``overall_phase / sqrt(2) * (|psi> (x) R|psi_perp>
    + relative_sign * |psi_perp> (x) R|psi>)`` equals the standard
    amplitudes of ``label``, where R = ``rotation`` acts on particle 2 and
    psi_perp is taken in raw form.
    """

    label: BellLabel
    rotation: PauliOp
    relative_sign: int
    overall_phase: complex


# Rotation appearing on Bob's particle for each shared Bell state. The
# entry for PSI_MINUS is the identity: the singlet keeps the same two-term
# form in every basis.
BELL_ROTATIONS: dict[BellLabel, PauliOp] = {
    BellLabel.PSI_MINUS: PAULI_I,
    BellLabel.PSI_PLUS: PAULI_Z,
    BellLabel.PHI_PLUS: PAULI_IY,
    BellLabel.PHI_MINUS: PAULI_X,
}


def reconstruction(decomp: BellDecomposition, basis: QubitBasis) -> np.ndarray:
    """Rebuild the 4 joint amplitudes described by a decomposition."""
    r = decomp.rotation.matrix
    psi = basis.psi.vector
    perp = basis.psi_perp_raw
    vec = np.kron(psi, r @ perp) + decomp.relative_sign * np.kron(perp, r @ psi)
    return decomp.overall_phase * _INV_SQRT2 * vec


def reconstruction_error(decomp: BellDecomposition, basis: QubitBasis) -> float:
    """Max amplitude deviation between the reconstruction and the Bell state."""
    target = bell_state(decomp.label).amplitudes
    return float(np.max(np.abs(reconstruction(decomp, basis) - target)))


def decompose_bell(label: BellLabel, psi: PureQubit) -> BellDecomposition:
    """Express a Bell state in the qubit basis of ``psi``.

    The rotation is fixed per label; the relative sign and overall phase
    are solved so that the reconstruction matches the standard Bell
    amplitudes exactly. Raises ReconstructionError if no combination
    works (which indicates a corrupted rotation table).
    """
    label = BellLabel(label)
    rotation = BELL_ROTATIONS[label]
    basis = qubit_basis(psi)
    target = bell_state(label).amplitudes
    r = rotation.matrix
    for sign in (-1, +1):
        vec = _INV_SQRT2 * (
            np.kron(basis.psi.vector, r @ basis.psi_perp_raw)
            + sign * np.kron(basis.psi_perp_raw, r @ basis.psi.vector)
        )
        phase = complex(np.vdot(vec, target))
        if abs(abs(phase) - 1.0) > ATOL:
            continue
        if np.max(np.abs(phase * vec - target)) <= ATOL:
            return BellDecomposition(
                label=label, rotation=rotation, relative_sign=sign, overall_phase=phase
            )
    raise ReconstructionError(
        f"cannot express {label.value} over rotation {rotation.label!r} "
        "in the qubit basis"
    )
