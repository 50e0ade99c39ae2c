"""SU(2) targets from two holonomic reflections.

Any target U ≅ cos α·I - i·sin α·(m·σ) equals (n₁·σ)(n₂·σ) once n₁·n₂ = cos α and
n₁ × n₂ = -sin α·m. The n₂ pulse runs first.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import numpy.typing as npt

from ..algebra.collective import CodeBasis, four_qubit_code_basis
from ..algebra.tensor import PAULIS, SIGMA_X, SIGMA_Y, SIGMA_Z, ComplexMatrix, as_matrix, hermitian_expm, unitarity_defect
from ..errors import ConfigError, DimensionMismatchError
from .holonomy import GateResult, LambdaCouplings, axis_gate, evolve_pulse, extract_gate, logical_basis, one_qubit_hamiltonian
from .pulses import PulseSpec

logger = logging.getLogger(__name__)

_AXIS_TOL = 1e-12
_UNITARY_TOL = 1e-8

Axis = np.ndarray


def rz(angle: float) -> ComplexMatrix:
    return hermitian_expm(SIGMA_Z, angle / 2)


def ry(angle: float) -> ComplexMatrix:
    return hermitian_expm(SIGMA_Y, angle / 2)


def euler_target(a: float, b: float, c: float) -> ComplexMatrix:
    """R_z(a)·R_y(b)·R_z(c) with R_α(θ) = e^{-iθσ_α/2}."""
    return rz(a) @ ry(b) @ rz(c)


NAMED_TARGETS: Dict[str, ComplexMatrix] = {
    "identity": np.eye(2, dtype=complex),
    "pauli-x": SIGMA_X,
    "pauli-y": SIGMA_Y,
    "pauli-z": SIGMA_Z,
    "hadamard": (SIGMA_X + SIGMA_Z) / math.sqrt(2),
    "s": np.diag([1, 1j]).astype(complex),
    "t": np.diag([1, cmath.exp(1j * math.pi / 4)]).astype(complex),
}


def parse_target(spec: str) -> Tuple[str, ComplexMatrix]:
    """Resolve a gate name or ``euler:a,b,c`` (radians) into a 2×2 unitary."""
    key = spec.strip().lower()
    if key in NAMED_TARGETS:
        return key, NAMED_TARGETS[key]
    if key.startswith("euler:"):
        parts = key[len("euler:") :].split(",")
        try:
            angles = [float(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"Euler angles must be numbers: {spec!r}") from exc
        if len(angles) != 3 or not all(math.isfinite(x) for x in angles):
            raise ConfigError(f"expected three finite Euler angles in {spec!r}")
        return key, euler_target(*angles)
    raise ConfigError(f"unknown gate target {spec!r}; use one of {sorted(NAMED_TARGETS)} or euler:a,b,c")


def to_special_unitary(target: npt.ArrayLike) -> ComplexMatrix:
    u = as_matrix(target)
    if u.shape != (2, 2):
        raise DimensionMismatchError(f"SU(2) target must be 2×2, got {u.shape}")
    if unitarity_defect(u) > _UNITARY_TOL:
        raise DimensionMismatchError(f"target is not unitary: defect {unitarity_defect(u):.3e}")
    return u / np.sqrt(np.linalg.det(u))


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def synthesize_su2(target: npt.ArrayLike) -> Tuple[Axis, Axis]:
    u = to_special_unitary(target)
    cos_alpha = float(np.real(np.trace(u)) / 2)
    # sin α·m_k = Re(i·Tr(σ_k U)/2)
    rotation = np.array([float(np.real(1j * np.trace(p @ u) / 2)) for p in PAULIS])
    sin_alpha = float(np.linalg.norm(rotation))
    if sin_alpha < _AXIS_TOL:
        z = np.array([0.0, 0.0, 1.0])
        return z, z.copy()
    m = rotation / sin_alpha
    reference = np.cross(np.array([0.0, 0.0, 1.0]), m)
    n1 = np.array([1.0, 0.0, 0.0]) if np.linalg.norm(reference) < 1e-9 else _unit(reference)
    n2 = cos_alpha * n1 - sin_alpha * np.cross(m, n1)
    return n1, _unit(n2)


def reflection_axis(target: npt.ArrayLike) -> Axis:
    """Axis n with target ≅ n·σ, for targets reachable by a single pulse."""
    u = to_special_unitary(target)
    if abs(np.trace(u)) > _UNITARY_TOL:
        raise ConfigError("target is not a single reflection n·σ (non-zero trace after phase removal)")
    # u = ∓i·(n·σ) once the determinant is normalized; the sign is a global phase
    n = _unit(np.array([float(np.real(1j * np.trace(p @ u) / 2)) for p in PAULIS]))
    # n and -n give the same gate; fix the sign on the first clearly non-zero of (z, x, y)
    for k in (2, 0, 1):
        if abs(n[k]) > 1e-9:
            return n if n[k] > 0 else -n
    return n


@dataclass(frozen=True)
class GateSimulation:
    target_name: str
    target: ComplexMatrix = field(repr=False)
    n1: Axis = field(repr=False)
    n2: Axis = field(repr=False)
    result: GateResult

    @property
    def couplings(self) -> Tuple[LambdaCouplings, LambdaCouplings]:
        """Couplings in pulse order: the n₂ pulse, then the n₁ pulse."""
        return LambdaCouplings.from_vector(self.n2), LambdaCouplings.from_vector(self.n1)

    def to_mapping(self) -> Dict[str, Any]:
        first, second = self.couplings
        return {
            "target": self.target_name,
            "axes": {"n1": self.n1.round(12).tolist(), "n2": self.n2.round(12).tolist()},
            "pulse_order": ["n2", "n1"],
            "couplings": [first.to_mapping(), second.to_mapping()],
            **self.result.to_mapping(),
        }


def simulate_target(
    target: str | npt.ArrayLike,
    basis: Optional[CodeBasis] = None,
    pulse: Optional[PulseSpec] = None,
    nf_index: int = 1,
) -> GateSimulation:
    """Synthesize a target and run both pulses on the 16-dim register."""
    if isinstance(target, str):
        name, matrix = parse_target(target)
    else:
        name, matrix = "custom", as_matrix(target)
    basis = basis or four_qubit_code_basis()
    pulse = pulse or PulseSpec.pi_pulse()
    n1, n2 = synthesize_su2(matrix)
    first = evolve_pulse(one_qubit_hamiltonian(LambdaCouplings.from_vector(n2)), pulse)
    second = evolve_pulse(one_qubit_hamiltonian(LambdaCouplings.from_vector(n1)), pulse)
    result = extract_gate(second @ first, logical_basis(basis, nf_index), matrix)
    logger.debug("target %s: distance %.3e leakage %.3e", name, result.target_distance, result.leakage)
    return GateSimulation(target_name=name, target=matrix, n1=n1, n2=n2, result=result)


def random_euler_angles(rng: np.random.Generator) -> Tuple[float, float, float]:
    """Euler angles whose R_z R_y R_z product is Haar distributed."""
    a, c = rng.uniform(0.0, 2 * math.pi, size=2)
    b = math.acos(1.0 - 2.0 * rng.uniform())
    return float(a), float(b), float(c)


def two_reflection_product(n1: Axis, n2: Axis) -> ComplexMatrix:
    return axis_gate(n1) @ axis_gate(n2)
