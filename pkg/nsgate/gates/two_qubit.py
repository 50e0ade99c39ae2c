"""Holonomic CNOT between two noiseless qubits held in two four-qubit blocks L and L′."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..algebra.collective import CODE_DIM, CODE_QUBITS, CodeBasis, four_qubit_code_basis
from ..algebra.permutations import CycleConvention, permutation_term
from ..algebra.tensor import (
    INTEGRATED_TOL,
    STRUCTURAL_TOL,
    ComplexMatrix,
    StateVector,
    commutator,
    dagger,
    frobenius,
    hermitian_expm,
    kron,
)
from ..errors import VerificationError
from .holonomy import GateResult, evolve_pulse, extract_gate
from .pulses import PulseSpec

logger = logging.getLogger(__name__)

NS_PAIR_DIM = CODE_DIM * CODE_DIM
COMPUTATIONAL_PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def _perm_sum(terms: List[tuple]) -> ComplexMatrix:
    total = np.zeros((2**CODE_QUBITS, 2**CODE_QUBITS), dtype=complex)
    for coeff, factors in terms:
        total += coeff * permutation_term(factors, CODE_QUBITS, CycleConvention.LEFT_TO_RIGHT)
    return total


def _lambda4_terms() -> List[tuple]:
    return [(1, ((1, 3),)), (-1, ((2, 3),)), (-3, ((1, 4),)), (3, ((2, 4),))]


def control_factor() -> ComplexMatrix:
    """(P₁₃ - P₂₃ - 3P₁₄ + 3P₂₄)/12 on block L."""
    return _perm_sum(_lambda4_terms()) / 12


def target_factor() -> ComplexMatrix:
    """P₂₃ - P₁₃ - (P₁₃ - P₂₃ - 3P₁₄ + 3P₂₄)/(2√2) on block L′."""
    return _perm_sum([(1, ((2, 3),)), (-1, ((1, 3),))]) - _perm_sum(_lambda4_terms()) / (2 * math.sqrt(2))


def two_qubit_hamiltonian() -> ComplexMatrix:
    """256×256 product of the block factors; qubits 1–4 form L, qubits 5–8 form L′."""
    return kron(control_factor(), target_factor())


def ns_pair_ket(a: int, b: int) -> np.ndarray:
    out = np.zeros(NS_PAIR_DIM, dtype=complex)
    out[(a - 1) * CODE_DIM + (b - 1)] = 1.0
    return out


def ns_two_qubit_h0_h1() -> tuple[ComplexMatrix, ComplexMatrix]:
    """H₀ and H₁ on NS_L ⊗ NS_L′ in the |ab⟩ ordering."""
    r = 1 / math.sqrt(2)

    def op(bra_terms: List[tuple]) -> ComplexMatrix:
        h = sum(coeff * np.outer(ns_pair_ket(*ket), ns_pair_ket(*bra)) for coeff, ket, bra in bra_terms)
        return h + dagger(h)

    h0 = op([(r, (3, 3), (2, 1)), (-r, (3, 3), (2, 2))])
    h1 = op([(r, (3, 1), (2, 3)), (-r, (3, 2), (2, 3))])
    return h0, h1


def pair_isometry(basis: CodeBasis) -> ComplexMatrix:
    """256×81 isometry with columns ordered (NS_L, NS_L′, NF_L, NF_L′)."""
    v = basis.vectors  # (ns, nf, 16)
    full = np.einsum("ajx,bky->abjkxy", v, v).reshape(CODE_DIM**4, 2 ** (2 * CODE_QUBITS))
    return full.T


def restrict_pair(op: ComplexMatrix, basis: CodeBasis) -> ComplexMatrix:
    v = pair_isometry(basis)
    return dagger(v) @ op @ v


def computational_pair_states(basis: CodeBasis, nf: tuple[int, int] = (1, 1)) -> List[StateVector]:
    return [kron(basis.vector(a, nf[0]), basis.vector(b, nf[1])) for a, b in COMPUTATIONAL_PAIRS]


@dataclass(frozen=True)
class TwoQubitReport:
    restriction_residual: float
    commutator_norm: float
    computational_block_norm: float
    h1_identity_residual: float
    factorization_residual: float
    reflection_residual: float
    gate: GateResult = field(repr=False)

    @property
    def passed(self) -> bool:
        return (
            self.restriction_residual <= STRUCTURAL_TOL
            and self.commutator_norm <= STRUCTURAL_TOL
            and self.computational_block_norm <= STRUCTURAL_TOL
            and self.h1_identity_residual <= 1e-10
            and self.factorization_residual <= INTEGRATED_TOL
            and self.reflection_residual <= INTEGRATED_TOL
            and self.gate.target_distance <= INTEGRATED_TOL
            and self.gate.leakage <= 1e-10
        )

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "restriction_residual": self.restriction_residual,
            "commutator_norm": self.commutator_norm,
            "computational_block_norm": self.computational_block_norm,
            "h1_identity_residual": self.h1_identity_residual,
            "factorization_residual": self.factorization_residual,
            "reflection_residual": self.reflection_residual,
            "gate": self.gate.to_mapping(),
            "passed": self.passed,
        }


def two_qubit_report(basis: Optional[CodeBasis] = None, pulse: Optional[PulseSpec] = None) -> TwoQubitReport:
    basis = basis or four_qubit_code_basis()
    pulse = pulse or PulseSpec.pi_pulse()
    h = two_qubit_hamiltonian()
    h0, h1 = ns_two_qubit_h0_h1()
    nf_identity = np.eye(NS_PAIR_DIM)
    restricted = restrict_pair(h, basis)
    restriction_residual = frobenius(restricted - kron(h0 + h1, nf_identity))

    comp = [ns_pair_ket(a, b) for a, b in COMPUTATIONAL_PAIRS]
    p_m = sum(np.outer(k, k) for k in comp)
    block_norm = frobenius(p_m @ (h0 + h1) @ p_m)

    u0 = hermitian_expm(h0, math.pi)
    u1 = hermitian_expm(h1, math.pi)
    idx = [(a - 1) * CODE_DIM + (b - 1) for a, b in COMPUTATIONAL_PAIRS]
    h1_identity = frobenius(u1[np.ix_(idx, idx)] - np.eye(len(idx)))

    bright = (ns_pair_ket(2, 1) - ns_pair_ket(2, 2)) / math.sqrt(2)
    top = ns_pair_ket(3, 3)
    reflection = np.eye(NS_PAIR_DIM) - 2 * (np.outer(bright, bright) + np.outer(top, top))
    reflection_residual = frobenius(u0 - reflection)

    # Ω(t) only rescales H, so the π-area loop is e^{-iπH} for every envelope.
    u = evolve_pulse(h, pulse)
    factorization = frobenius(restrict_pair(u, basis) - kron(u0 @ u1, nf_identity))
    gate = extract_gate(u, computational_pair_states(basis), CNOT)
    report = TwoQubitReport(
        restriction_residual=restriction_residual,
        commutator_norm=frobenius(commutator(h0, h1)),
        computational_block_norm=block_norm,
        h1_identity_residual=h1_identity,
        factorization_residual=factorization,
        reflection_residual=reflection_residual,
        gate=gate,
    )
    logger.debug("two-qubit report: %s", {k: v for k, v in report.to_mapping().items() if k != "gate"})
    return report


def verify_cnot(basis: Optional[CodeBasis] = None, pulse: Optional[PulseSpec] = None) -> GateResult:
    """Extract the logical CNOT and fail loudly if any two-qubit identity is off.

    Raises:
        VerificationError: a residual or the CNOT distance exceeds its tolerance.
    """
    report = two_qubit_report(basis, pulse)
    if not report.passed:
        raise VerificationError(f"two-qubit gate check failed: {report.to_mapping()}")
    return report.gate
