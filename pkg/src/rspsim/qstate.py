"""Exact complex linear algebra for one and two qubits.

Single-qubit pure states are stored in a canonical global phase: the |0>
amplitude is real and non-negative, and a state sitting exactly at the
south pole (zero |0> amplitude) is stored as beta = 1. Equality of states
is always phase-blind: two states are "the same" when their fidelity is 1
within tolerance, never by component comparison.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

# Tolerance for analytic identities on 64-bit floats (all computations
# here are a handful of flops, so this catches sign errors).
ATOL = 1e-12

# Below this magnitude the |0> amplitude is treated as exactly zero when
# canonicalizing the global phase.
_SOUTH_POLE_TOL = 1e-12

Amplitude = complex


class BellLabel(str, Enum):
    """The four maximally entangled two-qubit states."""

    PSI_MINUS = "psi-minus"
    PSI_PLUS = "psi-plus"
    PHI_PLUS = "phi-plus"
    PHI_MINUS = "phi-minus"


@dataclass(frozen=True, eq=False)
class PauliOp:
    """A labelled 2x2 unitary from the Pauli family (including iY = ZX)."""

    label: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("PauliOp matrix must be 2x2")
        if np.max(np.abs(m @ m.conj().T - np.eye(2))) > ATOL:
            raise ValueError(f"PauliOp {self.label!r} matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __repr__(self) -> str:
        return f"PauliOp({self.label})"


PAULI_I = PauliOp("I", np.eye(2, dtype=complex))
PAULI_X = PauliOp("X", np.array([[0, 1], [1, 0]], dtype=complex))
PAULI_Y = PauliOp("Y", np.array([[0, -1j], [1j, 0]], dtype=complex))
PAULI_Z = PauliOp("Z", np.array([[1, 0], [0, -1]], dtype=complex))
PAULI_IY = PauliOp("iY", np.array([[0, 1], [-1, 0]], dtype=complex))

PAULI_BY_LABEL = {p.label: p for p in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, PAULI_IY)}


def _require_finite(*values: complex) -> None:
    for v in values:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError("amplitudes must be finite")


@dataclass(frozen=True)
class PureQubit:
    """Normalized single-qubit pure state alpha|0> + beta|1>, alpha real >= 0."""

    alpha: float
    beta: complex

    def __post_init__(self):
        _require_finite(complex(self.alpha), complex(self.beta))
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative (canonical global phase)")
        norm_sq = self.alpha * self.alpha + abs(self.beta) ** 2
        if abs(norm_sq - 1.0) > ATOL:
            raise ValueError(f"state not normalized: |alpha|^2+|beta|^2 = {norm_sq}")
        object.__setattr__(self, "beta", complex(self.beta))

    @classmethod
    def from_vector(cls, vec) -> "PureQubit":
        """Canonicalize an arbitrary (not necessarily normalized) 2-vector."""
        a0, a1 = complex(vec[0]), complex(vec[1])
        _require_finite(a0, a1)
        norm = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
        if norm == 0.0:
            raise ValueError("cannot canonicalize the zero vector")
        a0, a1 = a0 / norm, a1 / norm
        mag = abs(a0)
        if mag <= _SOUTH_POLE_TOL:
            # South pole: absorb the remaining phase into beta = 1.
            return cls(0.0, 1.0 + 0.0j)
        phase = a0.conjugate() / mag
        return cls(mag, a1 * phase)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    @property
    def theta(self) -> float:
        """Polar angle in [0, pi]."""
        return 2.0 * math.atan2(abs(self.beta), self.alpha)

    @property
    def phi(self) -> float:
        """Azimuthal angle in [0, 2*pi); 0 when beta vanishes."""
        if abs(self.beta) == 0.0:
            return 0.0
        return cmath.phase(self.beta) % (2.0 * math.pi)


def make_qubit(theta: float, phi: float) -> PureQubit:
    """State with |0> amplitude cos(theta/2) and |1> amplitude sin(theta/2)e^{i phi}.

    Out-of-range angles are reduced modulo the natural period of the
    sphere parametrization; NaN/Inf are rejected.
    """
    if not (math.isfinite(theta) and math.isfinite(phi)):
        raise ValueError("theta and phi must be finite")
    theta = theta % (2.0 * math.pi)
    if theta > math.pi:
        theta = 2.0 * math.pi - theta
        phi = phi + math.pi
    phi = phi % (2.0 * math.pi)
    return PureQubit.from_vector(
        [math.cos(theta / 2.0), math.sin(theta / 2.0) * cmath.exp(1j * phi)]
    )


def complement(q: PureQubit) -> PureQubit:
    """The orthogonal state (Bloch antipode): alpha|1> - beta*|0>, canonicalized."""
    return PureQubit.from_vector([-q.beta.conjugate(), q.alpha])


def overlap(a: PureQubit, b: PureQubit) -> complex:
    """Inner product <a|b>."""
    return complex(np.vdot(a.vector, b.vector))


def fidelity(a: PureQubit, b: PureQubit) -> float:
    """Squared magnitude of the inner product; symmetric and phase-invariant."""
    return abs(overlap(a, b)) ** 2


@dataclass(frozen=True)
class BlochVector:
    """Unit vector on the sphere; doubles as a measurement direction."""

    nx: float
    ny: float
    nz: float

    def __post_init__(self):
        _require_finite(complex(self.nx), complex(self.ny), complex(self.nz))
        norm_sq = self.nx**2 + self.ny**2 + self.nz**2
        if abs(norm_sq - 1.0) > ATOL:
            raise ValueError(f"Bloch vector not unit length: |n|^2 = {norm_sq}")

    def dot(self, other: "BlochVector") -> float:
        return self.nx * other.nx + self.ny * other.ny + self.nz * other.nz

    def negated(self) -> "BlochVector":
        return BlochVector(-self.nx, -self.ny, -self.nz)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.nx, self.ny, self.nz)


def bloch_of(q: PureQubit) -> BlochVector:
    """Bloch coordinates (sin t cos p, sin t sin p, cos t) of a pure state."""
    prod = q.alpha * q.beta  # alpha is real, so conj(alpha)*beta == alpha*beta
    return BlochVector(
        2.0 * prod.real,
        2.0 * prod.imag,
        q.alpha * q.alpha - abs(q.beta) ** 2,
    )


class DensityMatrix2:
    """2x2 density matrix: Hermitian, trace one, positive semidefinite."""

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("density matrix must be 2x2")
        if np.max(np.abs(m - m.conj().T)) > ATOL:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > ATOL or abs(np.trace(m).imag) > ATOL:
            raise ValueError("density matrix must have unit trace")
        eigs = np.linalg.eigvalsh(m)
        if eigs[0] < -ATOL or eigs[-1] > 1.0 + ATOL:
            raise ValueError(f"density matrix eigenvalues out of [0, 1]: {eigs}")
        m.setflags(write=False)
        self._matrix = m

    @classmethod
    def from_pure(cls, q: PureQubit) -> "DensityMatrix2":
        v = q.vector
        return cls(np.outer(v, v.conj()))

    @classmethod
    def from_bloch(cls, n: BlochVector) -> "DensityMatrix2":
        return cls(
            0.5
            * np.array(
                [
                    [1.0 + n.nz, n.nx - 1j * n.ny],
                    [n.nx + 1j * n.ny, 1.0 - n.nz],
                ]
            )
        )

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix2":
        return cls(0.5 * np.eye(2))

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def bloch_components(self) -> tuple[float, float, float]:
        """(nx, ny, nz); not necessarily unit length for mixed states."""
        m = self._matrix
        return (
            float(2.0 * m[1, 0].real),
            float(2.0 * m[1, 0].imag),
            float((m[0, 0] - m[1, 1]).real),
        )

    def purity(self) -> float:
        return float(np.trace(self._matrix @ self._matrix).real)

    def __repr__(self) -> str:
        return f"DensityMatrix2({np.array2string(self._matrix, precision=6)})"


class TwoQubitState:
    """Normalized joint pure state of particle 1 (Alice) and particle 2 (Bob).

    Amplitudes are ordered |00>, |01>, |10>, |11> with particle 1 first.
    """

    def __init__(self, amplitudes):
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if a.shape != (4,):
            raise ValueError("two-qubit state needs exactly 4 amplitudes")
        _require_finite(*(complex(x) for x in a))
        norm_sq = float(np.vdot(a, a).real)
        if abs(norm_sq - 1.0) > ATOL:
            raise ValueError(f"two-qubit state not normalized: sum |a|^2 = {norm_sq}")
        a.setflags(write=False)
        self._amplitudes = a

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    def reduced_density(self, particle: int) -> DensityMatrix2:
        """Partial trace over the other particle (particle is 1 or 2)."""
        if particle not in (1, 2):
            raise ValueError("particle must be 1 or 2")
        m = self._amplitudes.reshape(2, 2)
        if particle == 1:
            rho = m @ m.conj().T
        else:
            rho = m.T @ m.conj()
        return DensityMatrix2(rho)

    def __repr__(self) -> str:
        return f"TwoQubitState({np.array2string(self._amplitudes, precision=6)})"


_INV_SQRT2 = 1.0 / math.sqrt(2.0)

_BELL_AMPLITUDES = {
    BellLabel.PSI_MINUS: (0.0, _INV_SQRT2, -_INV_SQRT2, 0.0),
    BellLabel.PSI_PLUS: (0.0, _INV_SQRT2, _INV_SQRT2, 0.0),
    BellLabel.PHI_PLUS: (_INV_SQRT2, 0.0, 0.0, _INV_SQRT2),
    BellLabel.PHI_MINUS: (_INV_SQRT2, 0.0, 0.0, -_INV_SQRT2),
}


def bell_state(label: BellLabel) -> TwoQubitState:
    """One of the four standard maximally entangled states."""
    return TwoQubitState(_BELL_AMPLITUDES[BellLabel(label)])


def apply_pauli(op: PauliOp, q: PureQubit) -> PureQubit:
    """Apply a 2x2 unitary and re-canonicalize the global phase."""
    return PureQubit.from_vector(op.matrix @ q.vector)
