"""Remote preparation and measurement of a known qubit over one Bell pair and one cbit.

The library simulates a two-party protocol in which Alice, who knows the
state she wants Bob to hold, measures her half of a shared maximally
entangled pair in the basis built from that state and sends a single
classical bit. States on the polar or equatorial great circle arrive with
certainty; arbitrary states arrive half the time, yet any spin measurement
on them can still be simulated remotely with full efficiency. A standard
two-cbit teleportation baseline is included for cost comparison.
"""

from .qstate import (
    ATOL,
    Amplitude,
    BellLabel,
    BlochVector,
    DensityMatrix2,
    PAULI_I,
    PAULI_IY,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    PauliOp,
    PureQubit,
    TwoQubitState,
    apply_pauli,
    bell_state,
    bloch_of,
    complement,
    fidelity,
    make_qubit,
    overlap,
)
from .basis import (
    BellDecomposition,
    QubitBasis,
    ReconstructionError,
    decompose_bell,
    qubit_basis,
    reconstruction,
    reconstruction_error,
)
from .measurement import (
    AliceOutcome,
    MeasurementOutcome,
    ObservableStats,
    ZeroProbabilityError,
    measure_particle1,
    observable_probs,
    project_particle1,
    sample_outcome,
)
from .protocol import (
    BellMeasurementOutcome,
    ClassicalChannel,
    CorrectionRule,
    FamilyMismatchError,
    ProtocolTranscript,
    RemoteMeasurementAggregate,
    RemoteMeasurementRecord,
    StateFamily,
    analytic_remote_p_plus,
    bob_premessage_density,
    correction_for,
    remote_measurement_branch_stats,
    remote_measurement_trial,
    require_family,
    rsp_branch,
    rsp_run,
    simulate_remote_measurement,
    teleport_baseline,
    teleport_branch,
    teleport_branch_probabilities,
)
from .stats import (
    FrequencyCheck,
    TrialAggregate,
    TrialConfig,
    analytic_references,
    analytic_run,
    run_trials,
    three_sigma_bound,
)

__version__ = "0.1.0"

__all__ = [
    "ATOL",
    "AliceOutcome",
    "Amplitude",
    "BellDecomposition",
    "BellLabel",
    "BellMeasurementOutcome",
    "BlochVector",
    "ClassicalChannel",
    "CorrectionRule",
    "DensityMatrix2",
    "FamilyMismatchError",
    "FrequencyCheck",
    "MeasurementOutcome",
    "ObservableStats",
    "PAULI_I",
    "PAULI_IY",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "PauliOp",
    "ProtocolTranscript",
    "PureQubit",
    "QubitBasis",
    "ReconstructionError",
    "RemoteMeasurementAggregate",
    "RemoteMeasurementRecord",
    "StateFamily",
    "TrialAggregate",
    "TrialConfig",
    "TwoQubitState",
    "ZeroProbabilityError",
    "analytic_references",
    "analytic_remote_p_plus",
    "analytic_run",
    "apply_pauli",
    "bell_state",
    "bloch_of",
    "bob_premessage_density",
    "complement",
    "correction_for",
    "decompose_bell",
    "fidelity",
    "make_qubit",
    "measure_particle1",
    "observable_probs",
    "overlap",
    "project_particle1",
    "qubit_basis",
    "reconstruction",
    "reconstruction_error",
    "remote_measurement_branch_stats",
    "remote_measurement_trial",
    "require_family",
    "rsp_branch",
    "rsp_run",
    "run_trials",
    "sample_outcome",
    "simulate_remote_measurement",
    "teleport_baseline",
    "teleport_branch",
    "teleport_branch_probabilities",
    "three_sigma_bound",
]
