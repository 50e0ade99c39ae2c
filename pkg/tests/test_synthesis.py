import math

import numpy as np
import pytest

from nsgate.algebra.tensor import SIGMA_Z, hermitian_expm, phase_invariant_distance
from nsgate.errors import ConfigError, DimensionMismatchError
from nsgate.gates.synthesis import (
    NAMED_TARGETS,
    euler_target,
    parse_target,
    random_euler_angles,
    reflection_axis,
    rz,
    simulate_target,
    synthesize_su2,
    two_reflection_product,
)


def test_quarter_turn_about_z():
    n1, n2 = synthesize_su2(hermitian_expm(SIGMA_Z, math.pi / 4))
    np.testing.assert_allclose(n1, [1.0, 0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(n2, [math.cos(math.pi / 4), -math.sin(math.pi / 4), 0.0], atol=1e-12)
    assert phase_invariant_distance(rz(math.pi / 2), two_reflection_product(n1, n2)) <= 1e-12


def test_identity_uses_a_repeated_axis():
    n1, n2 = synthesize_su2(np.eye(2))
    np.testing.assert_allclose(n1, n2)


@pytest.mark.parametrize("name", sorted(NAMED_TARGETS))
def test_named_targets_factor_into_two_reflections(name):
    target = NAMED_TARGETS[name]
    n1, n2 = synthesize_su2(target)
    assert np.linalg.norm(n1) == pytest.approx(1.0)
    assert np.linalg.norm(n2) == pytest.approx(1.0)
    assert phase_invariant_distance(target, two_reflection_product(n1, n2)) <= 1e-12


def test_random_targets_factor_into_two_reflections():
    rng = np.random.default_rng(11)
    for _ in range(50):
        target = euler_target(*random_euler_angles(rng))
        n1, n2 = synthesize_su2(target)
        assert phase_invariant_distance(target, two_reflection_product(n1, n2)) <= 1e-12


def test_reflection_axis_has_canonical_sign():
    np.testing.assert_allclose(reflection_axis(NAMED_TARGETS["pauli-z"]), [0.0, 0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(reflection_axis(NAMED_TARGETS["pauli-x"]), [1.0, 0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(reflection_axis(-NAMED_TARGETS["hadamard"]), [1 / math.sqrt(2), 0.0, 1 / math.sqrt(2)], atol=1e-12)
    with pytest.raises(ConfigError):
        reflection_axis(NAMED_TARGETS["s"])


def test_parse_target():
    name, matrix = parse_target(" Hadamard ")
    assert name == "hadamard"
    np.testing.assert_allclose(matrix @ matrix, np.eye(2), atol=1e-15)
    _, euler = parse_target("euler:0.1,0.2,0.3")
    np.testing.assert_allclose(euler, euler_target(0.1, 0.2, 0.3))
    for bad in ("toffoli", "euler:1,2", "euler:a,b,c", "euler:1,2,nan"):
        with pytest.raises(ConfigError):
            parse_target(bad)


def test_non_unitary_target_is_rejected():
    with pytest.raises(DimensionMismatchError):
        synthesize_su2(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(DimensionMismatchError):
        synthesize_su2(np.eye(3))


@pytest.mark.parametrize("target", ["hadamard", "t", "pauli-y", "euler:0.4,1.9,-2.2"])
def test_simulated_gate_on_the_register(target):
    simulation = simulate_target(target)
    assert simulation.result.target_distance <= 1e-7
    assert simulation.result.leakage <= 1e-10
    report = simulation.to_mapping()
    assert report["pulse_order"] == ["n2", "n1"]
    assert len(report["couplings"]) == 2
