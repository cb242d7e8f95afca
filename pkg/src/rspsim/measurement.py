"""Projective measurement of Alice's particle and single-qubit observable statistics.

Alice measures particle 1 in the qubit basis; both outcomes always carry
probability 1/2 when the shared state is maximally entangled. The classical
bit sent over the wire encodes the outcome as PSI_PERP -> 0 ("Bob already
holds the target, do nothing" for the singlet) and PSI -> 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import QubitBasis
from .qstate import ATOL, BlochVector, DensityMatrix2, PureQubit, TwoQubitState

# Below this probability a branch is considered impossible and collapse is
# refused: all protocol paths here have probability exactly 1/2, so hitting
# this indicates a caller bug rather than an unlucky draw.
ZERO_PROB_TOL = 1e-15


class ZeroProbabilityError(ValueError):
    """Collapse requested onto a branch of (numerically) zero probability."""


class AliceOutcome(Enum):
    PSI = "psi"
    PSI_PERP = "psi-perp"

    @property
    def cbit(self) -> int:
        return 1 if self is AliceOutcome.PSI else 0


@dataclass(frozen=True)
class MeasurementOutcome:
    which: AliceOutcome
    probability: float
    post_state_bob: PureQubit

    @property
    def cbit(self) -> int:
        return self.which.cbit


def _branch(state: TwoQubitState, basis: QubitBasis, which: AliceOutcome):
    bra = basis.psi.vector if which is AliceOutcome.PSI else basis.psi_perp_raw
    residual = bra.conj() @ state.amplitudes.reshape(2, 2)
    probability = float(np.vdot(residual, residual).real)
    return residual, probability


def project_particle1(
    state: TwoQubitState, basis: QubitBasis, which: AliceOutcome
) -> MeasurementOutcome:
    """Project particle 1 onto one basis state and collapse particle 2.

    The outcome probability is the squared norm of the residual vector on
    particle 2; the post-measurement state of Bob is that residual,
    renormalized and canonicalized.
    """
    residual, probability = _branch(state, basis, which)
    if probability < ZERO_PROB_TOL:
        raise ZeroProbabilityError(
            f"branch {which.value} has probability {probability}; collapse undefined"
        )
    return MeasurementOutcome(
        which=which,
        probability=probability,
        post_state_bob=PureQubit.from_vector(residual),
    )


def measure_particle1(
    state: TwoQubitState, basis: QubitBasis, rng: np.random.Generator
) -> MeasurementOutcome:
    """Sample Alice's outcome by the Born rule, then collapse.

    Consumes exactly one uniform draw: outcome PSI when the draw falls
    below the PSI branch probability.
    """
    _, p_psi = _branch(state, basis, AliceOutcome.PSI)
    which = AliceOutcome.PSI if rng.random() < p_psi else AliceOutcome.PSI_PERP
    return project_particle1(state, basis, which)


@dataclass(frozen=True)
class ObservableStats:
    """Outcome probabilities for measuring a spin component b.sigma."""

    p_plus: float
    p_minus: float

    def __post_init__(self):
        if not (0.0 <= self.p_plus <= 1.0 and 0.0 <= self.p_minus <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(self.p_plus + self.p_minus - 1.0) > ATOL:
            raise ValueError("outcome probabilities must sum to 1")


def observable_probs(b: BlochVector, rho: DensityMatrix2) -> ObservableStats:
    """Born probabilities tr(P_+- rho) with P_+- = (1 +- b.sigma)/2.

    Computed through the Bloch representation of rho, so that negating
    both b and the state's Bloch vector reproduces bit-identical
    probabilities (the apparatus-flip identity is exact).
    """
    nx, ny, nz = rho.bloch_components()
    d = b.nx * nx + b.ny * ny + b.nz * nz
    p_plus = min(1.0, max(0.0, 0.5 * (1.0 + d)))
    p_minus = min(1.0, max(0.0, 0.5 * (1.0 - d)))
    return ObservableStats(p_plus=p_plus, p_minus=p_minus)


def sample_outcome(stats: ObservableStats, rng: np.random.Generator) -> str:
    """Draw '+' or '-': one uniform draw compared against p_plus."""
    return "+" if rng.random() < stats.p_plus else "-"
