import math

import numpy as np
import pytest

from nsgate.algebra.permutations import gellmann_matrix
from nsgate.algebra.tensor import INTEGRATED_TOL, STRUCTURAL_TOL, hermitian_expm, is_hermitian
from nsgate.gates.pulses import PulseShape, PulseSpec
from nsgate.gates.two_qubit import (
    CNOT,
    control_factor,
    ns_pair_ket,
    ns_two_qubit_h0_h1,
    target_factor,
    two_qubit_hamiltonian,
    two_qubit_report,
    verify_cnot,
)


def test_block_factors_restrict_to_gellmann_forms(basis):
    np.testing.assert_allclose(
        basis.restrict(control_factor()), np.kron(gellmann_matrix(4) / math.sqrt(6), np.eye(3)), atol=1e-12
    )
    expected = math.sqrt(3) * (gellmann_matrix(1) - gellmann_matrix(4))
    np.testing.assert_allclose(basis.restrict(target_factor()), np.kron(expected, np.eye(3)), atol=1e-12)


def test_two_qubit_hamiltonian_is_hermitian():
    h = two_qubit_hamiltonian()
    assert h.shape == (256, 256)
    assert is_hermitian(h)


def test_h0_reflects_the_bright_pair():
    h0, _ = ns_two_qubit_h0_h1()
    bright = (ns_pair_ket(2, 1) - ns_pair_ket(2, 2)) / math.sqrt(2)
    top = ns_pair_ket(3, 3)
    expected = np.eye(9) - 2 * (np.outer(bright, bright) + np.outer(top, top))
    np.testing.assert_allclose(hermitian_expm(h0, math.pi), expected, atol=1e-12)


def test_report_passes(basis):
    report = two_qubit_report(basis)
    assert report.passed
    assert report.restriction_residual <= STRUCTURAL_TOL
    assert report.commutator_norm <= STRUCTURAL_TOL
    assert report.computational_block_norm <= STRUCTURAL_TOL
    assert report.factorization_residual <= INTEGRATED_TOL
    mapping = report.to_mapping()
    assert mapping["passed"] is True
    assert set(mapping["gate"]) == {"logical_block", "leakage", "target_distance"}


def test_cnot_on_the_computational_pairs(basis):
    gate = verify_cnot(basis)
    assert gate.target_distance <= INTEGRATED_TOL
    assert gate.leakage <= 1e-10
    phase = gate.logical_block[0, 0]
    assert abs(phase) == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(gate.logical_block / phase, CNOT, atol=1e-8)


def test_cnot_is_independent_of_the_envelope(basis):
    square = verify_cnot(basis)
    gaussian = verify_cnot(basis, PulseSpec.pi_pulse(PulseShape.TRUNCATED_GAUSSIAN, duration=4.0))
    assert gaussian.leakage <= 1e-10
    np.testing.assert_allclose(gaussian.logical_block, square.logical_block, atol=1e-10)
