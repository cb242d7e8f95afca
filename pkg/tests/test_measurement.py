import math

import numpy as np
import pytest
from hypothesis import given, settings

from rspsim import (
    ATOL,
    AliceOutcome,
    BellLabel,
    BlochVector,
    DensityMatrix2,
    ObservableStats,
    PAULI_IY,
    ZeroProbabilityError,
    apply_pauli,
    bell_state,
    bloch_of,
    complement,
    fidelity,
    make_qubit,
    measure_particle1,
    observable_probs,
    project_particle1,
    qubit_basis,
    sample_outcome,
    TwoQubitState,
)
from conftest import ALL_BELL_LABELS, qubits, random_direction, random_qubit


def test_singlet_perp_outcome_gives_target():
    psi = make_qubit(1.1, 0.6)
    out = project_particle1(bell_state(BellLabel.PSI_MINUS), qubit_basis(psi),
                            AliceOutcome.PSI_PERP)
    assert out.probability == pytest.approx(0.5, abs=ATOL)
    assert out.cbit == 0
    assert fidelity(out.post_state_bob, psi) == pytest.approx(1.0, abs=ATOL)


def test_singlet_psi_outcome_gives_complement():
    psi = make_qubit(1.1, 0.6)
    out = project_particle1(bell_state(BellLabel.PSI_MINUS), qubit_basis(psi),
                            AliceOutcome.PSI)
    assert out.probability == pytest.approx(0.5, abs=ATOL)
    assert out.cbit == 1
    assert fidelity(out.post_state_bob, complement(psi)) == pytest.approx(1.0, abs=ATOL)


def test_singlet_anticorrelation_in_computational_basis():
    out = project_particle1(bell_state(BellLabel.PSI_MINUS),
                            qubit_basis(make_qubit(0, 0)), AliceOutcome.PSI)
    assert out.probability == pytest.approx(0.5, abs=ATOL)
    assert fidelity(out.post_state_bob, make_qubit(math.pi, 0)) == pytest.approx(
        1.0, abs=ATOL
    )


def test_phi_plus_psi_outcome_carries_rotation():
    psi = make_qubit(0.8, 2.1)
    basis = qubit_basis(psi)
    out = project_particle1(bell_state(BellLabel.PHI_PLUS), basis, AliceOutcome.PSI)
    assert out.probability == pytest.approx(0.5, abs=ATOL)
    expected = apply_pauli(PAULI_IY, basis.psi_perp)
    assert fidelity(out.post_state_bob, expected) == pytest.approx(1.0, abs=ATOL)


@pytest.mark.parametrize("label", ALL_BELL_LABELS)
@settings(max_examples=60)
@given(qubits)
def test_both_outcomes_probability_half(label, psi):
    basis = qubit_basis(psi)
    state = bell_state(label)
    p = [project_particle1(state, basis, w).probability
         for w in (AliceOutcome.PSI, AliceOutcome.PSI_PERP)]
    assert p[0] == pytest.approx(0.5, abs=ATOL)
    assert p[1] == pytest.approx(0.5, abs=ATOL)
    assert p[0] + p[1] == pytest.approx(1.0, abs=ATOL)


def test_zero_probability_branch_raises():
    product = TwoQubitState([1.0, 0.0, 0.0, 0.0])  # |00>
    with pytest.raises(ZeroProbabilityError):
        project_particle1(product, qubit_basis(make_qubit(0, 0)), AliceOutcome.PSI_PERP)


def test_measure_particle1_draw_convention():
    # One uniform per measurement; PSI wins when the draw is below p(PSI).
    basis = qubit_basis(make_qubit(0.7, 0.2))
    state = bell_state(BellLabel.PSI_MINUS)
    rng = np.random.default_rng(5)
    got = [measure_particle1(state, basis, rng).cbit for _ in range(64)]
    ref_rng = np.random.default_rng(5)
    p_psi = project_particle1(state, basis, AliceOutcome.PSI).probability
    expected = [1 if ref_rng.random() < p_psi else 0 for _ in range(64)]
    assert got == expected


def test_collapse_consistency_mixture_is_maximally_mixed():
    rng = np.random.default_rng(11)
    for label in ALL_BELL_LABELS:
        psi = random_qubit(rng)
        basis = qubit_basis(psi)
        state = bell_state(label)
        mix = np.zeros((2, 2), dtype=complex)
        for which in AliceOutcome:
            out = project_particle1(state, basis, which)
            v = out.post_state_bob.vector
            mix += out.probability * np.outer(v, v.conj())
        assert np.max(np.abs(mix - 0.5 * np.eye(2))) < ATOL


def test_observable_probs_eigenstate():
    q = make_qubit(0.9, 1.8)
    stats = observable_probs(bloch_of(q), DensityMatrix2.from_pure(q))
    assert stats.p_plus == pytest.approx(1.0, abs=ATOL)
    assert stats.p_minus == pytest.approx(0.0, abs=ATOL)


def test_observable_probs_unbiased_when_orthogonal():
    stats = observable_probs(BlochVector(1, 0, 0),
                             DensityMatrix2.from_pure(make_qubit(0, 0)))
    assert stats.p_plus == pytest.approx(0.5, abs=ATOL)
    assert stats.p_minus == pytest.approx(0.5, abs=ATOL)


def test_observable_probs_frozen_value():
    # Direct dot product: b.n = cos(pi/3) = 1/2, so p_plus = 3/4.
    stats = observable_probs(BlochVector(0, 0, 1),
                             DensityMatrix2.from_pure(make_qubit(math.pi / 3, 0)))
    assert stats.p_plus == pytest.approx(0.75, abs=ATOL)


def test_observable_probs_matches_trace_formula():
    # Dual route: tr(P_+ rho) with explicit projector matrices.
    rng = np.random.default_rng(3)
    for _ in range(100):
        q, b = random_qubit(rng), random_direction(rng)
        rho = DensityMatrix2.from_pure(q)
        sigma = (b.nx * np.array([[0, 1], [1, 0]])
                 + b.ny * np.array([[0, -1j], [1j, 0]])
                 + b.nz * np.array([[1, 0], [0, -1]]))
        p_plus = np.trace(0.5 * (np.eye(2) + sigma) @ rho.matrix).real
        assert observable_probs(b, rho).p_plus == pytest.approx(p_plus, abs=ATOL)


def test_complement_relation_on_observables():
    rng = np.random.default_rng(17)
    for _ in range(200):
        q, b = random_qubit(rng), random_direction(rng)
        rho = DensityMatrix2.from_pure(q)
        rho_perp = DensityMatrix2.from_pure(complement(q))
        assert observable_probs(b, rho_perp).p_plus == pytest.approx(
            observable_probs(b, rho).p_minus, abs=ATOL
        )


def test_apparatus_flip_identity_is_exact():
    # Flip both the state and the apparatus: bit-identical probabilities.
    rng = np.random.default_rng(23)
    for _ in range(200):
        n, b = random_direction(rng), random_direction(rng)
        rho = DensityMatrix2.from_bloch(n)
        rho_perp = DensityMatrix2.from_bloch(n.negated())
        assert observable_probs(b.negated(), rho_perp) == observable_probs(b, rho)


def test_observable_stats_validation():
    with pytest.raises(ValueError):
        ObservableStats(0.7, 0.7)
    with pytest.raises(ValueError):
        ObservableStats(1.2, -0.2)


def test_sample_outcome_degenerate_stats():
    rng = np.random.default_rng(0)
    assert all(sample_outcome(ObservableStats(1.0, 0.0), rng) == "+" for _ in range(50))
    assert all(sample_outcome(ObservableStats(0.0, 1.0), rng) == "-" for _ in range(50))


def test_sample_outcome_frequency_within_three_sigma():
    # Binomial standard error: 3*sqrt(0.75*0.25/1e5).
    stats = ObservableStats(0.75, 0.25)
    rng = np.random.default_rng(1234)
    n = 10**5
    plus = sum(sample_outcome(stats, rng) == "+" for _ in range(n))
    assert abs(plus / n - 0.75) < 0.004107919181288746
