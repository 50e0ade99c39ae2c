"""Qubit permutation operators and the Gell-Mann identities on the four-qubit code."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..errors import InvalidRegisterError, StructureViolationError
from .collective import CODE_DIM, CODE_QUBITS, CodeBasis, CollectiveErrorOps, multiplicity
from .tensor import STRUCTURAL_TOL, ComplexMatrix, commutator, dagger, frobenius, kron

logger = logging.getLogger(__name__)


class CycleConvention(str, Enum):
    # P_{a b c ...} = P_ab · P_bc · ...
    LEFT_TO_RIGHT = "left-to-right"
    # P_{a b c ...} = ... · P_bc · P_ab
    RIGHT_TO_LEFT = "right-to-left"


@dataclass(frozen=True)
class PermutationOp:
    indices: Tuple[int, ...]
    n: int
    matrix: ComplexMatrix = field(repr=False)
    convention: CycleConvention | None = None


def _check_indices(indices: Sequence[int], n: int) -> Tuple[int, ...]:
    idx = tuple(int(i) for i in indices)
    if len(set(idx)) != len(idx):
        raise InvalidRegisterError(f"repeated qubit in {idx}")
    if any(not 1 <= i <= n for i in idx):
        raise InvalidRegisterError(f"qubits {idx} out of range for a {n}-qubit register")
    return idx


def permutation_matrix(order: Sequence[int], n: int) -> ComplexMatrix:
    """Operator sending ⊗_p |α_p⟩ to ⊗_p |α_{order[p]}⟩ (0-based ``order``)."""
    dim = 2**n
    tensor = np.eye(dim, dtype=complex).reshape([2] * n + [dim])
    return np.transpose(tensor, list(order) + [n]).reshape(dim, dim)


def transposition(p: int, q: int, n: int) -> PermutationOp:
    """P_pq|x⟩_p|y⟩_q = |y⟩_p|x⟩_q, equal to ½(I + σ_p·σ_q)."""
    if p == q:
        raise InvalidRegisterError(f"transposition needs two distinct qubits, got {p} twice")
    idx = _check_indices((p, q), n)
    order = list(range(n))
    order[p - 1], order[q - 1] = order[q - 1], order[p - 1]
    return PermutationOp(indices=idx, n=n, matrix=permutation_matrix(order, n))


def cycle(indices: Sequence[int], n: int, convention: CycleConvention = CycleConvention.LEFT_TO_RIGHT) -> PermutationOp:
    idx = _check_indices(indices, n)
    if len(idx) < 3:
        raise InvalidRegisterError(f"a cycle needs at least three qubits, got {idx}")
    swaps = [transposition(a, b, n).matrix for a, b in zip(idx, idx[1:])]
    if convention == CycleConvention.RIGHT_TO_LEFT:
        swaps.reverse()
    matrix = swaps[0]
    for swap in swaps[1:]:
        matrix = matrix @ swap
    return PermutationOp(indices=idx, n=n, matrix=matrix, convention=CycleConvention(convention))


def permutation_term(factors: Iterable[Sequence[int]], n: int, convention: CycleConvention) -> ComplexMatrix:
    """Product of transpositions and cycles; an empty product is the identity."""
    out = np.eye(2**n, dtype=complex)
    for factor in factors:
        op = transposition(factor[0], factor[1], n) if len(factor) == 2 else cycle(factor, n, convention)
        out = out @ op.matrix
    return out


def collective_commutator_norm(op: ComplexMatrix, ops: CollectiveErrorOps) -> float:
    return max(frobenius(commutator(op, e)) for e in ops.as_dict().values())


def permutation_span_dimension(n: int) -> int:
    """Dimension of the span of all N! permutation operators (the commutant)."""
    if n < 1 or n > 6:
        raise InvalidRegisterError(f"span dimension limited to 1..6 qubits, got {n}")
    stack = np.stack([permutation_matrix(order, n).ravel() for order in itertools.permutations(range(n))])
    return int(np.linalg.matrix_rank(stack))


def commutant_dimension(n: int) -> int:
    """Σ_J n_J², what ``permutation_span_dimension`` must reproduce."""
    return sum(multiplicity(n, j) ** 2 for j in range(n // 2 + 1))


Term = Tuple[float, Tuple[Tuple[int, ...], ...]]

_S2, _S3, _S6 = math.sqrt(2), math.sqrt(3), math.sqrt(6)

# λ_i ⊗ I_NF = prefactor · Σ coeff · (product of permutation factors) on the code.
GELLMANN_TABLE: Dict[int, Tuple[complex, List[Term]]] = {
    1: (1 / _S3, [(1, ((2, 3),)), (-1, ((1, 3),))]),
    2: (1j / _S3, [(1, ((2, 3), (1, 3))), (-1, ((1, 3), (2, 3)))]),
    3: (1 / 3, [(1, ((1, 3),)), (1, ((2, 3),)), (-2, ((1, 2),))]),
    4: (1 / (2 * _S6), [(1, ((1, 3),)), (-1, ((2, 3),)), (-3, ((1, 4),)), (3, ((2, 4),))]),
    5: (
        1j / (2 * _S6),
        [
            (2, ((3, 2, 1),)),
            (-2, ((2, 3, 1),)),
            (1, ((3, 4, 2),)),
            (-1, ((4, 3, 2),)),
            (-1, ((3, 4, 1),)),
            (1, ((4, 3, 1),)),
            (4, ((2, 4, 1),)),
            (-4, ((4, 2, 1),)),
        ],
    ),
    6: (
        1 / (6 * _S2),
        [
            (2, ((1, 3),)),
            (2, ((2, 3),)),
            (-4, ((1, 2),)),
            (3, ((2, 3, 4, 1),)),
            (3, ((3, 4, 2, 1),)),
            (3, ((4, 3, 2, 1),)),
            (3, ((2, 4, 3, 1),)),
            (-6, ((3, 2, 4, 1),)),
            (-6, ((4, 2, 3, 1),)),
        ],
    ),
    7: (1j / (2 * _S2), [(1, ((3, 4, 1),)), (1, ((3, 4, 2),)), (-1, ((4, 3, 2),)), (-1, ((4, 3, 1),))]),
    8: (1 / _S3, [(1, ()), (-1, ((1, 2),)), (-1, ((1, 3),)), (-1, ((2, 3),))]),
}

# λ6 with its overall sign flipped; the battery reports how far it misses.
FLIPPED_PREFACTORS: Dict[int, complex] = {i: pre for i, (pre, _) in GELLMANN_TABLE.items()}
FLIPPED_PREFACTORS[6] = -1 / (6 * _S2)


def gellmann_matrix(i: int) -> ComplexMatrix:
    """λ_i on the NS factor, basis order (|1⟩, |2⟩, |3⟩), in the code table's ket-bra form."""
    lam = np.zeros((CODE_DIM, CODE_DIM), dtype=complex)

    def put(a: int, b: int, value: complex) -> None:
        lam[a - 1, b - 1] = value

    if i == 1:
        put(3, 1, 1), put(1, 3, 1)
    elif i == 2:
        put(3, 1, -1j), put(1, 3, 1j)
    elif i == 3:
        put(3, 3, 1), put(1, 1, -1)
    elif i == 4:
        put(3, 2, 1), put(2, 3, 1)
    elif i == 5:
        put(3, 2, -1j), put(2, 3, 1j)
    elif i == 6:
        put(1, 2, 1), put(2, 1, 1)
    elif i == 7:
        put(1, 2, -1j), put(2, 1, 1j)
    elif i == 8:
        put(3, 3, 1 / _S3), put(1, 1, 1 / _S3), put(2, 2, -2 / _S3)
    else:
        raise InvalidRegisterError(f"Gell-Mann index must be 1..8, got {i}")
    return lam


def gellmann_combination(
    i: int, convention: CycleConvention = CycleConvention.LEFT_TO_RIGHT, prefactor: complex | None = None
) -> ComplexMatrix:
    """The permutation-operator side of the λ_i identity on the full 16-dim register."""
    if i not in GELLMANN_TABLE:
        raise InvalidRegisterError(f"Gell-Mann index must be 1..8, got {i}")
    pre, terms = GELLMANN_TABLE[i]
    total = np.zeros((2**CODE_QUBITS, 2**CODE_QUBITS), dtype=complex)
    for coeff, factors in terms:
        total += coeff * permutation_term(factors, CODE_QUBITS, convention)
    return (pre if prefactor is None else prefactor) * total


@dataclass(frozen=True)
class GellMannRealization:
    index: int
    lhs: ComplexMatrix = field(repr=False)
    rhs: ComplexMatrix = field(repr=False)
    residual: float
    flipped_residual: float
    convention: CycleConvention


def gellmann_realization(
    i: int, basis: CodeBasis, convention: CycleConvention = CycleConvention.LEFT_TO_RIGHT
) -> GellMannRealization:
    target = kron(gellmann_matrix(i), np.eye(CODE_DIM))
    v = basis.isometry
    lhs = v @ target @ dagger(v)
    rhs = gellmann_combination(i, convention)
    residual = frobenius(basis.restrict(rhs) - target)
    flipped = frobenius(basis.restrict(gellmann_combination(i, convention, FLIPPED_PREFACTORS[i])) - target)
    return GellMannRealization(
        index=i, lhs=lhs, rhs=rhs, residual=residual, flipped_residual=flipped, convention=CycleConvention(convention)
    )


@dataclass(frozen=True)
class ConventionResolution:
    convention: CycleConvention
    residuals: Dict[str, Dict[int, float]]


def resolve_cycle_convention(
    basis: CodeBasis, indices: Sequence[int] = (5, 6, 7), tol: float = STRUCTURAL_TOL
) -> ConventionResolution:
    """Pick the composition order under which the multi-body identities hold."""
    residuals: Dict[str, Dict[int, float]] = {}
    chosen: CycleConvention | None = None
    for convention in CycleConvention:
        residuals[convention.value] = {i: gellmann_realization(i, basis, convention).residual for i in indices}
        if chosen is None and all(r <= tol for r in residuals[convention.value].values()):
            chosen = convention
    if chosen is None:
        raise StructureViolationError(f"no cycle convention satisfies λ{tuple(indices)}: {residuals}")
    logger.info("cycle convention resolved to %s", chosen.value)
    return ConventionResolution(convention=chosen, residuals=residuals)
