import math

import numpy as np
import pytest

from nsgate.algebra.tensor import INTEGRATED_TOL, STRUCTURAL_TOL, SIGMA_Z, is_hermitian
from nsgate.errors import InvalidPulseError, InvalidRegisterError
from nsgate.gates.holonomy import (
    LambdaCouplings,
    axis_gate,
    computational_block_norm,
    dynamical_phase_along_path,
    evolve_pulse,
    extract_gate,
    lambda_hamiltonian,
    lambda_system_gate,
    logical_basis,
    one_qubit_gate,
    one_qubit_hamiltonian,
    restricted_equality_residual,
)
from nsgate.gates.pulses import PulseShape, PulseSpec


def test_couplings_are_normalized():
    c = LambdaCouplings(3.0, 0.0, 4.0)
    assert (c.j1, c.j2, c.j4) == pytest.approx((0.6, 0.0, 0.8))
    with pytest.raises(InvalidRegisterError):
        LambdaCouplings(0.0, 0.0, 0.0)


def test_couplings_from_axis():
    theta, phi = 1.1, 0.4
    c = LambdaCouplings.from_axis(theta, phi)
    assert c.theta == pytest.approx(theta)
    assert c.phi == pytest.approx(phi)
    expected = [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    np.testing.assert_allclose(c.axis, expected, atol=1e-14)
    assert c.omega0 / c.j4 == pytest.approx(-math.tan(theta / 2) * complex(math.cos(phi), math.sin(phi)))


def test_couplings_from_vector():
    n = np.array([0.3, -0.5, 0.8])
    c = LambdaCouplings.from_vector(n)
    np.testing.assert_allclose(c.axis, n / np.linalg.norm(n), atol=1e-14)
    with pytest.raises(InvalidRegisterError):
        LambdaCouplings.from_vector([0.0, 0.0, 0.0])


def test_hamiltonian_is_hermitian_and_avoids_computational_block(basis, rng):
    for _ in range(5):
        c = LambdaCouplings(*rng.normal(size=3))
        h = one_qubit_hamiltonian(c)
        assert is_hermitian(h)
        assert computational_block_norm(h, basis) <= STRUCTURAL_TOL
        assert restricted_equality_residual(c, basis) <= STRUCTURAL_TOL


def test_pauli_z_gate_from_lambda4():
    result = one_qubit_gate(LambdaCouplings(0.0, 0.0, 1.0))
    assert result.target_distance <= INTEGRATED_TOL
    assert result.leakage <= 1e-10
    assert result.unitarity_defect <= 1e-10
    assert abs(np.trace(result.logical_block)) <= INTEGRATED_TOL
    d = result.logical_block[0, 0]
    np.testing.assert_allclose(result.logical_block / d, SIGMA_Z, atol=1e-10)


@pytest.mark.parametrize("theta,phi", [(0.0, 0.0), (math.pi / 2, 0.0), (math.pi / 3, 1.2), (math.pi, 2.5)])
def test_one_qubit_gate_is_n_dot_sigma(theta, phi):
    c = LambdaCouplings.from_axis(theta, phi)
    result = one_qubit_gate(c)
    assert result.target_distance <= INTEGRATED_TOL
    assert result.leakage <= 1e-10
    assert np.trace(axis_gate(c.axis)) == pytest.approx(0.0, abs=1e-14)


def test_gate_is_independent_of_nf_spectator():
    c = LambdaCouplings.from_axis(0.7, 2.0)
    blocks = [one_qubit_gate(c, nf_index=j).logical_block for j in (1, 2, 3)]
    np.testing.assert_allclose(blocks[1], blocks[0], atol=1e-10)
    np.testing.assert_allclose(blocks[2], blocks[0], atol=1e-10)


def test_no_dynamical_phase_on_the_logical_states(basis):
    c = LambdaCouplings.from_axis(1.3, 0.9)
    for pulse in (PulseSpec.pi_pulse(), PulseSpec.pi_pulse(PulseShape.TRUNCATED_GAUSSIAN)):
        assert dynamical_phase_along_path(one_qubit_hamiltonian(c), pulse, logical_basis(basis)) <= STRUCTURAL_TOL


def test_envelope_shape_does_not_change_the_gate():
    h = one_qubit_hamiltonian(LambdaCouplings.from_axis(1.1, 0.4))
    square = evolve_pulse(h, PulseSpec.pi_pulse())
    gaussian = evolve_pulse(h, PulseSpec.pi_pulse(PulseShape.TRUNCATED_GAUSSIAN, duration=math.pi), slices=64)
    np.testing.assert_allclose(gaussian, square, atol=1e-10)


def test_evolve_rejects_wrong_area():
    h = one_qubit_hamiltonian(LambdaCouplings(0.0, 0.0, 1.0))
    with pytest.raises(InvalidPulseError):
        evolve_pulse(h, PulseSpec(PulseShape.SQUARE, 1.0, 1.0))


def test_lambda_system_matches_the_encoded_gate():
    c = LambdaCouplings.from_axis(2.0, 5.0)
    bare = lambda_system_gate(c)
    assert bare.target_distance <= INTEGRATED_TOL
    np.testing.assert_allclose(bare.logical_block, one_qubit_gate(c).logical_block, atol=1e-8)
    with pytest.raises(InvalidRegisterError):
        lambda_hamiltonian(0.0, 0.0)


def test_leakage_on_a_dense_axis_grid():
    worst = 0.0
    for theta in np.linspace(0.0, math.pi, 12):
        for phi in np.linspace(0.0, 2 * math.pi, 12, endpoint=False):
            worst = max(worst, one_qubit_gate(LambdaCouplings.from_axis(theta, phi)).leakage)
    assert worst <= 1e-10


def test_leakage_measures_the_escaped_amplitude():
    angle = 0.3
    u = np.eye(3, dtype=complex)
    u[0, 0] = u[2, 2] = math.cos(angle)
    u[2, 0] = math.sin(angle)
    u[0, 2] = -math.sin(angle)
    ground = list(np.eye(3, dtype=complex)[:2])
    result = extract_gate(u, ground, np.eye(2))
    assert result.leakage == pytest.approx(math.sin(angle), abs=1e-14)
    assert extract_gate(np.eye(3), ground, np.eye(2)).leakage == 0.0
