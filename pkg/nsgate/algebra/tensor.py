"""Dense complex linear algebra on qubit registers.

Operators, kets and density matrices are plain ``numpy`` arrays of dtype ``complex128``.
The aliases below only document intent; nothing wraps the arrays.

Two tolerance tiers are used throughout the package: ``STRUCTURAL_TOL`` for exact
algebraic identities and ``INTEGRATED_TOL`` for quantities that went through an ODE
integration or a matrix square root.
"""

from __future__ import annotations

import logging
from functools import reduce
from typing import Iterable, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg

from ..errors import DimensionMismatchError, NegativeEigenvalueError, NonHermitianError

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
StateVector = npt.NDArray[np.complex128]
DensityMatrix = npt.NDArray[np.complex128]

STRUCTURAL_TOL = 1e-12
INTEGRATED_TOL = 1e-8
DENSITY_HERMITIAN_TOL = 1e-10
DENSITY_EIGEN_TOL = 1e-8
# Eigenvalues below this fraction of the largest are roundoff and drop out of square roots.
SQRT_CUTOFF = 1e-13
# Floor on the Hermiticity scale so a zero operator is not compared against 0.
NORM_FLOOR = 1e-300

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def as_matrix(a: npt.ArrayLike) -> ComplexMatrix:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d operator, got shape {arr.shape}")
    return arr


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes (works on stacks of matrices)."""
    return np.conj(np.swapaxes(a, -1, -2))


def kron(*factors: npt.ArrayLike) -> ComplexMatrix:
    """Tensor product, leftmost factor most significant: (a⊗b)(v⊗w) = (av)⊗(bw)."""
    if not factors:
        raise DimensionMismatchError("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def ket(bits: str) -> StateVector:
    """Computational basis state for a bit string; qubit 1 is the leftmost character."""
    if not bits or set(bits) - {"0", "1"}:
        raise DimensionMismatchError(f"not a bit string: {bits!r}")
    out = np.zeros(2 ** len(bits), dtype=complex)
    out[int(bits, 2)] = 1.0
    return out


def density(psi: npt.ArrayLike) -> DensityMatrix:
    vec = np.asarray(psi, dtype=complex)
    return np.outer(vec, vec.conj())


def frobenius(a: npt.ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def hermiticity_defect(m: npt.ArrayLike) -> float:
    arr = np.asarray(m, dtype=complex)
    return frobenius(arr - dagger(arr))


def is_hermitian(m: npt.ArrayLike, tol: float = STRUCTURAL_TOL) -> bool:
    arr = np.asarray(m, dtype=complex)
    return hermiticity_defect(arr) <= tol * max(frobenius(arr), NORM_FLOOR)


def require_hermitian(m: npt.ArrayLike, tol: float = STRUCTURAL_TOL) -> ComplexMatrix:
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"operator must be square, got {arr.shape}")
    deviation = hermiticity_defect(arr)
    scale = max(frobenius(arr), NORM_FLOOR)
    if deviation > tol * scale:
        raise NonHermitianError(deviation / scale, tol)
    return arr


def unitarity_defect(u: npt.ArrayLike) -> float:
    arr = as_matrix(u)
    return frobenius(dagger(arr) @ arr - np.eye(arr.shape[1]))


def hermitian_eigh(h: npt.ArrayLike, tol: float = STRUCTURAL_TOL) -> Tuple[np.ndarray, ComplexMatrix]:
    """Eigen-decomposition of a Hermitian operator after checking Hermiticity."""
    arr = require_hermitian(h, tol)
    return linalg.eigh((arr + dagger(arr)) / 2)


def propagator(eigvals: np.ndarray, eigvecs: ComplexMatrix, angle: float) -> ComplexMatrix:
    """e^{-i·angle·h} from a precomputed spectrum of h."""
    phases = np.exp(-1j * angle * eigvals)
    return (eigvecs * phases) @ dagger(eigvecs)


def hermitian_expm(h: npt.ArrayLike, angle: float) -> ComplexMatrix:
    """Return e^{-i·angle·h} for Hermitian ``h``.

    The exponential goes through the eigen-decomposition of ``h`` instead of
    scaling-and-squaring, so the result is unitary up to roundoff.

    Raises:
        NonHermitianError: ``h`` deviates from Hermitian beyond ``STRUCTURAL_TOL``
            relative to its norm.
    """
    eigvals, eigvecs = hermitian_eigh(h)
    return propagator(eigvals, eigvecs, angle)


def partial_trace(rho: npt.ArrayLike, dims: Sequence[int], keep: Iterable[int]) -> ComplexMatrix:
    """Reduced operator on the factors listed in ``keep`` (0-based, any order).

    ``dims`` gives the dimension of every tensor factor, leftmost first. Kept factors
    appear in ascending order in the result. An empty ``keep`` traces over everything
    and returns the 1×1 matrix holding the trace.
    """
    arr = as_matrix(rho)
    dims = [int(d) for d in dims]
    if any(d <= 0 for d in dims):
        raise DimensionMismatchError(f"factor dimensions must be positive: {dims}")
    total = int(np.prod(dims)) if dims else 1
    if arr.shape != (total, total):
        raise DimensionMismatchError(f"operator of shape {arr.shape} does not match factors {dims}")
    kept = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in kept):
        raise DimensionMismatchError(f"keep indices {kept} out of range for {len(dims)} factors")

    n = len(dims)
    rows = list(range(n))
    cols = [k if k not in kept else n + k for k in range(n)]
    out = kept + [n + k for k in kept]
    reduced = np.einsum(arr.reshape(dims + dims), rows + cols, out)
    size = int(np.prod([dims[k] for k in kept])) if kept else 1
    return np.asarray(reduced, dtype=complex).reshape(size, size)


def check_density_matrix(rho: npt.ArrayLike) -> DensityMatrix:
    """Validate a (possibly subnormalized) density matrix and return it as an array."""
    arr = as_matrix(rho)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"density matrix must be square, got {arr.shape}")
    deviation = hermiticity_defect(arr)
    if deviation > DENSITY_HERMITIAN_TOL:
        raise NonHermitianError(deviation, DENSITY_HERMITIAN_TOL)
    trace = np.trace(arr)
    if abs(trace.imag) > DENSITY_HERMITIAN_TOL or not (-DENSITY_HERMITIAN_TOL <= trace.real <= 1 + DENSITY_HERMITIAN_TOL):
        raise DimensionMismatchError(f"density matrix trace {trace:.6g} outside [0, 1]")
    lowest = float(np.min(linalg.eigvalsh((arr + dagger(arr)) / 2)))
    if lowest < -DENSITY_EIGEN_TOL:
        raise NegativeEigenvalueError(lowest, DENSITY_EIGEN_TOL)
    return arr


def psd_sqrt(rho: npt.ArrayLike, tol: float = DENSITY_EIGEN_TOL) -> ComplexMatrix:
    """Square root of a positive-semidefinite operator.

    Eigenvalues below ``SQRT_CUTOFF`` times the largest one are set to zero, which also
    absorbs small negative ones.
    """
    arr = as_matrix(rho)
    eigvals, eigvecs = linalg.eigh((arr + dagger(arr)) / 2)
    if not eigvals.size:
        return arr
    if eigvals[0] < -tol:
        raise NegativeEigenvalueError(float(eigvals[0]), tol)
    floor = SQRT_CUTOFF * max(float(eigvals[-1]), 0.0)
    kept = np.where(eigvals > floor, eigvals, 0.0)
    return (eigvecs * np.sqrt(kept)) @ dagger(eigvecs)


def bures_fidelity(rho_id: npt.ArrayLike, rho_f: npt.ArrayLike, tol: float = DENSITY_EIGEN_TOL) -> float:
    """Bures-Uhlmann fidelity F = Tr sqrt(sqrt(rho_f) rho_id sqrt(rho_f)).

    Evaluated as the trace norm ‖sqrt(rho_id)·sqrt(rho_f)‖₁, which is symmetric in the
    two arguments by construction.

    Subnormalized inputs are accepted as they are, so leakage out of a subspace lowers F
    instead of being renormalized away. For pure ``rho_id`` = |ψ⟩⟨ψ| the value equals
    sqrt(⟨ψ|rho_f|ψ⟩).

    Raises:
        DimensionMismatchError: the operators differ in shape.
        NegativeEigenvalueError: an input has an eigenvalue below ``-tol``.
    """
    a = as_matrix(rho_id)
    b = as_matrix(rho_f)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"fidelity of {a.shape} against {b.shape}")
    return float(linalg.svdvals(psd_sqrt(a, tol) @ psd_sqrt(b, tol)).sum())


def pure_state_fidelity(psi: npt.ArrayLike, rho: npt.ArrayLike) -> float:
    vec = np.asarray(psi, dtype=complex)
    overlap = np.real(np.vdot(vec, as_matrix(rho) @ vec))
    return float(np.sqrt(max(overlap, 0.0)))


def phase_invariant_distance(target: npt.ArrayLike, block: npt.ArrayLike) -> float:
    """1 - |Tr(T^dag B)| / dim, blind to a global phase."""
    t = as_matrix(target)
    b = as_matrix(block)
    if t.shape != b.shape:
        raise DimensionMismatchError(f"cannot compare {t.shape} with {b.shape}")
    return float(1.0 - abs(np.trace(dagger(t) @ b)) / t.shape[0])
