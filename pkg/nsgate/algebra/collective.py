"""Collective error operators, total-spin sectors and the four-qubit C^3 ⊗ C^3 code.

Conventions: qubit 1 is the leftmost tensor factor and the leftmost character of a ket
string; |0⟩ is spin up, so σ_z|0⟩ = +|0⟩ and σ⁺|1⟩ = |0⟩. Collective operators are
σ-normalized, E_α = Σ_p σ_p^α, which makes E_z = 2·J_z and E_± = J_±.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg

from ..errors import DegeneracyError, InvalidRegisterError, StructureViolationError
from .tensor import (
    IDENTITY_2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    STRUCTURAL_TOL,
    ComplexMatrix,
    DensityMatrix,
    StateVector,
    dagger,
    frobenius,
    kron,
    partial_trace,
)

logger = logging.getLogger(__name__)

MAX_DECOMPOSITION_QUBITS = 8

_AXES: Dict[str, np.ndarray] = {
    "x": SIGMA_X,
    "y": SIGMA_Y,
    "z": SIGMA_Z,
    "+": SIGMA_PLUS,
    "-": SIGMA_MINUS,
    "−": SIGMA_MINUS,
}


def pauli_on_qubit(axis: str, p: int, n: int) -> ComplexMatrix:
    if axis not in _AXES:
        raise InvalidRegisterError(f"unknown Pauli axis {axis!r}")
    if n < 1 or not 1 <= p <= n:
        raise InvalidRegisterError(f"qubit {p} out of range for a {n}-qubit register")
    factors = [IDENTITY_2] * n
    factors[p - 1] = _AXES[axis]
    return kron(*factors)


def weighted_pauli_sum(axis: str, weights: Sequence[float]) -> ComplexMatrix:
    """Σ_p w_p σ_p^axis over a register of len(weights) qubits."""
    n = len(weights)
    if n < 1:
        raise InvalidRegisterError("register must hold at least one qubit")
    total = np.zeros((2**n, 2**n), dtype=complex)
    for p, w in enumerate(weights, start=1):
        total += w * pauli_on_qubit(axis, p, n)
    return total


@dataclass(frozen=True)
class CollectiveErrorOps:
    n_qubits: int
    e_plus: ComplexMatrix = field(repr=False)
    e_minus: ComplexMatrix = field(repr=False)
    e_z: ComplexMatrix = field(repr=False)

    @property
    def e_x(self) -> ComplexMatrix:
        return self.e_plus + self.e_minus

    @property
    def e_y(self) -> ComplexMatrix:
        return -1j * (self.e_plus - self.e_minus)

    @property
    def casimir(self) -> ComplexMatrix:
        """E_x² + E_y² + E_z² = 4·J², eigenvalue 4J(J+1) on sector J."""
        return self.e_x @ self.e_x + self.e_y @ self.e_y + self.e_z @ self.e_z

    def as_dict(self) -> Dict[str, ComplexMatrix]:
        return {"+": self.e_plus, "-": self.e_minus, "z": self.e_z}


def collective_error_ops(n: int) -> CollectiveErrorOps:
    weights = [1.0] * n
    return CollectiveErrorOps(
        n_qubits=n,
        e_plus=weighted_pauli_sum("+", weights),
        e_minus=weighted_pauli_sum("-", weights),
        e_z=weighted_pauli_sum("z", weights),
    )


def _integer_spin(n: int, j: float) -> int:
    if n < 1 or n % 2:
        raise InvalidRegisterError(f"only even registers are supported, got n={n}")
    if not float(j).is_integer() or not 0 <= j <= n // 2:
        raise InvalidRegisterError(f"total spin {j} not in 0..{n // 2} for n={n}")
    return int(j)


def multiplicity(n: int, j: float) -> int:
    """n_J = (2J+1)·N! / ((N/2+1+J)!·(N/2-J)!), the dimension of the noiseless factor."""
    spin = _integer_spin(n, j)
    half = n // 2
    numerator = (2 * spin + 1) * math.factorial(n)
    denominator = math.factorial(half + 1 + spin) * math.factorial(half - spin)
    return numerator // denominator


@dataclass(frozen=True)
class IrrepSector:
    total_spin: int
    ns_dim: int
    nf_dim: int
    isometry: ComplexMatrix = field(repr=False)

    @property
    def projector(self) -> ComplexMatrix:
        return self.isometry @ dagger(self.isometry)

    @property
    def is_decoherence_free(self) -> bool:
        return self.nf_dim == 1


def decompose_total_spin(n: int, tol: float = 1e-8) -> List[IrrepSector]:
    """Brute-force decomposition (C^2)^{⊗n} ≅ ⊕_J C^{n_J} ⊗ C^{2J+1}.

    For each J the Casimir is diagonalized inside the E_z-eigenspace of weight m = J;
    its 4J(J+1) eigenvectors are the highest-weight states, one per NS copy. Lowering
    them with E_- fixes the NS labels consistently across m, so each sector's
    isometry has columns in the factorized (NS, NF) order with m descending.
    """
    if n > MAX_DECOMPOSITION_QUBITS:
        raise InvalidRegisterError(f"decomposition limited to {MAX_DECOMPOSITION_QUBITS} qubits, got {n}")
    _integer_spin(n, 0)
    ops = collective_error_ops(n)
    casimir = ops.casimir
    dim = 2**n
    allowed = np.array([4.0 * s * (s + 1) for s in range(n // 2 + 1)])
    weights = np.array([bin(x).count("1") for x in range(dim)])

    sectors: List[IrrepSector] = []
    for spin in range(n // 2, -1, -1):
        idx = np.flatnonzero(weights == n // 2 - spin)
        eigvals, eigvecs = linalg.eigh(casimir[np.ix_(idx, idx)])
        gaps = np.min(np.abs(eigvals[:, None] - allowed[None, :]), axis=1)
        if np.any(gaps > tol):
            raise DegeneracyError(f"Casimir spectrum not resolved at J={spin}: max gap {gaps.max():.3e}")
        chosen = np.flatnonzero(np.abs(eigvals - 4.0 * spin * (spin + 1)) <= tol)
        ns_dim = int(chosen.size)
        if ns_dim != multiplicity(n, spin):
            raise DegeneracyError(f"found {ns_dim} copies of J={spin}, expected {multiplicity(n, spin)}")

        nf_dim = 2 * spin + 1
        isometry = np.zeros((dim, ns_dim * nf_dim), dtype=complex)
        for a, col in enumerate(chosen):
            vec = np.zeros(dim, dtype=complex)
            vec[idx] = eigvecs[:, col]
            m = spin
            for k in range(nf_dim):
                isometry[:, a * nf_dim + k] = vec
                if k + 1 < nf_dim:
                    vec = ops.e_minus @ vec / math.sqrt(spin * (spin + 1) - m * (m - 1))
                    m -= 1
        residual = frobenius(dagger(isometry) @ isometry - np.eye(isometry.shape[1]))
        if residual > STRUCTURAL_TOL:
            raise DegeneracyError(f"sector J={spin} isometry not orthonormal: {residual:.3e}")
        sectors.append(IrrepSector(total_spin=spin, ns_dim=ns_dim, nf_dim=nf_dim, isometry=isometry))
        logger.debug("n=%d J=%d: n_J=%d d_J=%d", n, spin, ns_dim, nf_dim)

    sectors.sort(key=lambda s: s.total_spin)
    total = sum(s.ns_dim * s.nf_dim for s in sectors)
    if total != dim:
        raise DegeneracyError(f"sectors span {total} dimensions, register has {dim}")
    return sectors


# |i⟩|j⟩_4 = (1/norm) Σ coeff·|bits⟩, copied from the four-qubit code table.
CODE_VECTOR_TABLE: Dict[Tuple[int, int], Tuple[float, Mapping[str, float]]] = {
    (1, 1): (math.sqrt(6), {"0010": 2, "0100": -1, "1000": -1}),
    (1, 2): (2 * math.sqrt(3), {"0011": 2, "0101": -1, "1001": -1, "0110": 1, "1010": 1, "1100": -2}),
    (1, 3): (math.sqrt(6), {"0111": 1, "1011": 1, "1101": -2}),
    (2, 1): (2 * math.sqrt(3), {"0001": 3, "0010": -1, "0100": -1, "1000": -1}),
    (2, 2): (math.sqrt(6), {"0011": 1, "0101": 1, "1001": 1, "0110": -1, "1010": -1, "1100": -1}),
    (2, 3): (2 * math.sqrt(3), {"0111": 1, "1011": 1, "1101": 1, "1110": -3}),
    (3, 1): (math.sqrt(2), {"0100": 1, "1000": -1}),
    (3, 2): (2.0, {"0101": 1, "1001": -1, "0110": 1, "1010": -1}),
    (3, 3): (math.sqrt(2), {"0111": 1, "1011": -1}),
}

CODE_QUBITS = 4
CODE_DIM = 3


@dataclass(frozen=True)
class CodeBasis:
    """The nine |i⟩|j⟩_4 states; i labels the noiseless factor, j the noiseful one."""

    vectors: np.ndarray = field(repr=False)

    @property
    def labels(self) -> List[Tuple[int, int]]:
        return [(i, j) for i in range(1, CODE_DIM + 1) for j in range(1, CODE_DIM + 1)]

    def vector(self, i: int, j: int) -> StateVector:
        return self.vectors[i - 1, j - 1]

    @property
    def isometry(self) -> ComplexMatrix:
        """16×9 matrix whose column (i-1)·3 + (j-1) is |i⟩|j⟩_4."""
        return self.vectors.reshape(CODE_DIM * CODE_DIM, -1).T

    @property
    def projector(self) -> ComplexMatrix:
        v = self.isometry
        return v @ dagger(v)

    def ns_projector(self, ns_indices: Sequence[int] = (1, 2)) -> ComplexMatrix:
        cols = np.stack([self.vector(i, j) for i in ns_indices for j in range(1, CODE_DIM + 1)], axis=1)
        return cols @ dagger(cols)

    def gram_residual(self) -> float:
        v = self.isometry
        return frobenius(dagger(v) @ v - np.eye(v.shape[1]))

    def restrict(self, op: npt.ArrayLike) -> ComplexMatrix:
        v = self.isometry
        return dagger(v) @ np.asarray(op, dtype=complex) @ v

    def embed(self, ns_state: npt.ArrayLike, nf_index: int = 1) -> StateVector:
        amps = np.asarray(ns_state, dtype=complex)
        if amps.shape != (CODE_DIM,):
            raise InvalidRegisterError(f"NS state must have {CODE_DIM} amplitudes, got {amps.shape}")
        if not 1 <= nf_index <= CODE_DIM:
            raise InvalidRegisterError(f"NF index {nf_index} out of range")
        return np.tensordot(amps, self.vectors[:, nf_index - 1], axes=1)

    def with_vector(self, i: int, j: int, vec: npt.ArrayLike) -> "CodeBasis":
        vectors = self.vectors.copy()
        vectors[i - 1, j - 1] = np.asarray(vec, dtype=complex)
        return CodeBasis(vectors=vectors)


def four_qubit_code_basis() -> CodeBasis:
    vectors = np.zeros((CODE_DIM, CODE_DIM, 2**CODE_QUBITS), dtype=complex)
    for (i, j), (norm, terms) in CODE_VECTOR_TABLE.items():
        for bits, coeff in terms.items():
            vectors[i - 1, j - 1, int(bits, 2)] = coeff / norm
    return CodeBasis(vectors=vectors)


@dataclass(frozen=True)
class NsStructure:
    s_plus: ComplexMatrix
    s_minus: ComplexMatrix
    s_z: ComplexMatrix
    residual: float

    def as_dict(self) -> Dict[str, ComplexMatrix]:
        return {"+": self.s_plus, "-": self.s_minus, "z": self.s_z}


def verify_ns_structure(basis: CodeBasis, ops: CollectiveErrorOps, tol: float = STRUCTURAL_TOL) -> NsStructure:
    """Check E_α = I_NS ⊗ S_α on the code and return the extracted S_α.

    Raises:
        StructureViolationError: an error operator leaks out of the code, couples
            different NS labels, or acts differently on different NS labels. The
            offending element is reported as a 1-based (i, j, i', j') tuple.
    """
    if ops.n_qubits != CODE_QUBITS:
        raise InvalidRegisterError(f"code structure needs {CODE_QUBITS}-qubit operators")
    v = basis.isometry
    outside = np.eye(v.shape[0]) - v @ dagger(v)
    extracted: Dict[str, ComplexMatrix] = {}
    worst = 0.0
    for name, op in ops.as_dict().items():
        leak = frobenius(outside @ op @ v)
        if leak > tol:
            raise StructureViolationError(f"E_{name} maps the code out of itself", None, leak)
        block = basis.restrict(op).reshape(CODE_DIM, CODE_DIM, CODE_DIM, CODE_DIM)
        for i in range(CODE_DIM):
            for k in range(CODE_DIM):
                if i == k:
                    continue
                sub = np.abs(block[i, :, k, :])
                if sub.max() > tol:
                    j, jj = np.unravel_index(int(np.argmax(sub)), sub.shape)
                    raise StructureViolationError(
                        f"E_{name} couples NS labels {i + 1} and {k + 1}", (i + 1, j + 1, k + 1, jj + 1), float(sub.max())
                    )
        diag_blocks = [block[i, :, i, :] for i in range(CODE_DIM)]
        for i in range(1, CODE_DIM):
            diff = np.abs(diag_blocks[i] - diag_blocks[0])
            if diff.max() > tol:
                j, jj = np.unravel_index(int(np.argmax(diff)), diff.shape)
                raise StructureViolationError(
                    f"E_{name} acts differently on NS label {i + 1}", (i + 1, j + 1, i + 1, jj + 1), float(diff.max())
                )
            worst = max(worst, float(diff.max()))
        extracted[name] = sum(diag_blocks) / CODE_DIM
    logger.debug("NS structure verified, block spread %.3e", worst)
    return NsStructure(s_plus=extracted["+"], s_minus=extracted["-"], s_z=extracted["z"], residual=worst)


def ns_reduce(rho: npt.ArrayLike, basis: CodeBasis) -> DensityMatrix:
    """Project onto the code, factor as (NS, NF) and trace out NF.

    Accepts a single 16×16 state or a stack of shape (..., 16, 16). The result keeps the
    weight found inside the code; leakage is not renormalized.
    """
    arr = np.asarray(rho, dtype=complex)
    v = basis.isometry
    inner = dagger(v) @ arr @ v
    if inner.ndim == 2:
        return partial_trace(inner, [CODE_DIM, CODE_DIM], keep=[0])
    shaped = inner.reshape(inner.shape[:-2] + (CODE_DIM, CODE_DIM, CODE_DIM, CODE_DIM))
    return np.einsum("...ijkj->...ik", shaped)
