"""One-qubit holonomic gates on the four-qubit noiseless subsystem.

A gate is the π-area loop of H(t) = Ω(t)·H₀ with H₀ built from qubit permutations. On
the code it acts as [(J₁ - iJ₂)|3⟩⟨1| + J₄|3⟩⟨2| + h.c.] ⊗ I_NF, a Λ system whose dark
state stays put while the bright state picks up a sign. The logical gate on span{|1⟩, |2⟩}
is therefore n·σ.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg

from ..algebra.collective import CODE_DIM, CodeBasis, four_qubit_code_basis
from ..algebra.permutations import gellmann_combination, gellmann_matrix
from ..algebra.tensor import (
    PAULIS,
    ComplexMatrix,
    StateVector,
    dagger,
    hermitian_eigh,
    kron,
    phase_invariant_distance,
    propagator,
    require_hermitian,
    unitarity_defect,
)
from ..errors import InvalidRegisterError
from .pulses import PulseSpec

logger = logging.getLogger(__name__)

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class LambdaCouplings:
    """Real couplings (J₁, J₂, J₄), normalized to unit length on construction."""

    j1: float
    j2: float
    j4: float

    def __post_init__(self) -> None:
        norm = math.sqrt(self.j1**2 + self.j2**2 + self.j4**2)
        if not math.isfinite(norm) or norm < _NORM_TOL:
            raise InvalidRegisterError(f"couplings ({self.j1}, {self.j2}, {self.j4}) cannot be normalized")
        object.__setattr__(self, "j1", self.j1 / norm)
        object.__setattr__(self, "j2", self.j2 / norm)
        object.__setattr__(self, "j4", self.j4 / norm)

    @classmethod
    def from_axis(cls, theta: float, phi: float) -> "LambdaCouplings":
        """Couplings with (J₁ - iJ₂)/J₄ = -tan(θ/2)·e^{iφ}."""
        half = theta / 2
        return cls(-math.sin(half) * math.cos(phi), math.sin(half) * math.sin(phi), math.cos(half))

    @classmethod
    def from_vector(cls, n: Sequence[float]) -> "LambdaCouplings":
        vec = np.asarray(n, dtype=float)
        norm = float(np.linalg.norm(vec))
        if vec.shape != (3,) or norm < _NORM_TOL:
            raise InvalidRegisterError(f"not a Bloch axis: {n}")
        vec = vec / norm
        theta = math.acos(min(1.0, max(-1.0, float(vec[2]))))
        phi = math.atan2(float(vec[1]), float(vec[0])) % (2 * math.pi)
        return cls.from_axis(theta, phi)

    @property
    def omega0(self) -> complex:
        return complex(self.j1, -self.j2)

    @property
    def theta(self) -> float:
        return 2 * math.atan2(abs(self.omega0), abs(self.j4))

    @property
    def phi(self) -> float:
        sign = -1.0 if self.j4 < 0 else 1.0
        if abs(self.omega0) < _NORM_TOL:
            return 0.0
        return cmath.phase(-self.omega0 * sign) % (2 * math.pi)

    @property
    def axis(self) -> np.ndarray:
        theta, phi = self.theta, self.phi
        return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])

    def to_mapping(self) -> Dict[str, float]:
        return {"j1": self.j1, "j2": self.j2, "j4": self.j4, "theta": self.theta, "phi": self.phi}


def axis_gate(n: Sequence[float]) -> ComplexMatrix:
    """n·σ for a unit vector n."""
    vec = np.asarray(n, dtype=float)
    return sum(component * pauli for component, pauli in zip(vec, PAULIS))


def one_qubit_hamiltonian(c: LambdaCouplings) -> ComplexMatrix:
    """Permutation form J₁·λ₁ + J₂·λ₂ + J₄·λ₄ on the full 16-dim register (Ω factored out)."""
    total = c.j1 * gellmann_combination(1) + c.j2 * gellmann_combination(2) + c.j4 * gellmann_combination(4)
    return require_hermitian(total)


def lambda_form(c: LambdaCouplings, basis: Optional[CodeBasis] = None) -> ComplexMatrix:
    """[(J₁ - iJ₂)|3⟩⟨1| + J₄|3⟩⟨2| + h.c.] ⊗ I_NF embedded in the register."""
    basis = basis or four_qubit_code_basis()
    ns = c.j1 * gellmann_matrix(1) + c.j2 * gellmann_matrix(2) + c.j4 * gellmann_matrix(4)
    v = basis.isometry
    return v @ kron(ns, np.eye(CODE_DIM)) @ dagger(v)


def evolve_pulse(h_normalized: npt.ArrayLike, pulse: PulseSpec, slices: Optional[int] = None) -> ComplexMatrix:
    """U = e^{-i∫Ω dt·H₀}.

    With ``slices`` the envelope is cut into that many pieces and the slice propagators
    are multiplied, which exercises the envelope instead of only its total area.

    Raises:
        InvalidPulseError: the pulse area is not π.
    """
    pulse.require_pi_area()
    eigvals, eigvecs = hermitian_eigh(h_normalized)
    if slices is None:
        return propagator(eigvals, eigvecs, math.pi)
    u = np.eye(eigvecs.shape[0], dtype=complex)
    for area in pulse.slice_areas(slices):
        u = propagator(eigvals, eigvecs, area) @ u
    return u


@dataclass(frozen=True)
class GateResult:
    logical_block: ComplexMatrix = field(repr=False)
    leakage: float
    target_distance: float

    @property
    def unitarity_defect(self) -> float:
        return unitarity_defect(self.logical_block)

    def to_mapping(self) -> Dict[str, Any]:
        block = self.logical_block
        return {
            "logical_block": {"re": block.real.round(12).tolist(), "im": block.imag.round(12).tolist()},
            "leakage": self.leakage,
            "target_distance": self.target_distance,
        }


def _columns(states: Sequence[StateVector] | np.ndarray) -> ComplexMatrix:
    arr = np.asarray(states, dtype=complex)
    if arr.ndim != 2:
        raise InvalidRegisterError(f"computational basis must be a list of vectors, got shape {arr.shape}")
    return arr.T


def extract_gate(u: npt.ArrayLike, computational_basis: Sequence[StateVector], target: npt.ArrayLike) -> GateResult:
    b = _columns(computational_basis)
    ub = np.asarray(u, dtype=complex) @ b
    block = dagger(b) @ ub
    # ‖(I - BB†)UB‖₂: the part of the image that left span(B)
    leakage = float(linalg.svdvals(ub - b @ block).max())
    return GateResult(logical_block=block, leakage=leakage, target_distance=phase_invariant_distance(target, block))


def logical_basis(basis: Optional[CodeBasis] = None, nf_index: int = 1) -> Tuple[StateVector, StateVector]:
    """The encoded |1⟩, |2⟩ with a fixed NF spectator."""
    basis = basis or four_qubit_code_basis()
    return basis.vector(1, nf_index), basis.vector(2, nf_index)


def one_qubit_gate(c: LambdaCouplings, pulse: Optional[PulseSpec] = None, nf_index: int = 1) -> GateResult:
    pulse = pulse or PulseSpec.pi_pulse()
    u = evolve_pulse(one_qubit_hamiltonian(c), pulse)
    return extract_gate(u, logical_basis(nf_index=nf_index), axis_gate(c.axis))


def dynamical_phase_along_path(
    h_normalized: npt.ArrayLike, pulse: PulseSpec, basis: Sequence[StateVector], samples: int = 50
) -> float:
    """max_t max_{j,k} |⟨ψ_j(t)|H(t)|ψ_k(t)⟩| with ψ_j(t) = U(t, 0)|basis_j⟩."""
    if samples < 2:
        raise InvalidRegisterError(f"need at least two sample times, got {samples}")
    h = np.asarray(h_normalized, dtype=complex)
    eigvals, eigvecs = hermitian_eigh(h)
    b = _columns(basis)
    worst = 0.0
    for t in np.linspace(0.0, pulse.duration, samples):
        psi = propagator(eigvals, eigvecs, pulse.cumulative_area(t)) @ b
        overlaps = dagger(psi) @ (pulse.envelope(t) * h) @ psi
        worst = max(worst, float(np.abs(overlaps).max()))
    return worst


LAMBDA_DIM = 3


def lambda_hamiltonian(omega0: complex, omega1: complex) -> ComplexMatrix:
    """ω₀|e⟩⟨g₀| + ω₁|e⟩⟨g₁| + h.c. on (|g₀⟩, |g₁⟩, |e⟩), rescaled to |ω₀|² + |ω₁|² = 1."""
    norm = math.sqrt(abs(omega0) ** 2 + abs(omega1) ** 2)
    if norm < _NORM_TOL:
        raise InvalidRegisterError("Λ-system couplings cannot both vanish")
    h = np.zeros((LAMBDA_DIM, LAMBDA_DIM), dtype=complex)
    h[2, 0] = omega0 / norm
    h[2, 1] = omega1 / norm
    return h + dagger(h)


def lambda_system_gate(c: LambdaCouplings, pulse: Optional[PulseSpec] = None) -> GateResult:
    """The bare three-level primitive with ω₀ = J₁ - iJ₂ and ω₁ = J₄."""
    pulse = pulse or PulseSpec.pi_pulse()
    u = evolve_pulse(lambda_hamiltonian(c.omega0, c.j4), pulse)
    ground = np.eye(LAMBDA_DIM, dtype=complex)[:2]
    return extract_gate(u, list(ground), axis_gate(c.axis))


def restricted_equality_residual(c: LambdaCouplings, basis: Optional[CodeBasis] = None) -> float:
    basis = basis or four_qubit_code_basis()
    diff = basis.restrict(one_qubit_hamiltonian(c)) - basis.restrict(lambda_form(c, basis))
    return float(np.linalg.norm(diff))


def computational_block_norm(h: npt.ArrayLike, basis: Optional[CodeBasis] = None) -> float:
    """‖P_M H P_M‖_F for M = span{|1⟩, |2⟩} ⊗ NF."""
    basis = basis or four_qubit_code_basis()
    p = basis.ns_projector((1, 2))
    return float(np.linalg.norm(p @ np.asarray(h, dtype=complex) @ p))
