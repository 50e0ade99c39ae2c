"""Every structural and dynamical identity of the construction, as one pass/fail report."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..algebra.collective import (
    CODE_QUBITS,
    CodeBasis,
    collective_error_ops,
    decompose_total_spin,
    four_qubit_code_basis,
    multiplicity,
    verify_ns_structure,
)
from ..algebra.permutations import (
    commutant_dimension,
    gellmann_matrix,
    gellmann_realization,
    permutation_span_dimension,
    resolve_cycle_convention,
)
from ..algebra.tensor import INTEGRATED_TOL, STRUCTURAL_TOL, commutator, frobenius
from ..config import ExperimentConfig
from ..errors import NsgateError
from ..gates.holonomy import (
    LambdaCouplings,
    dynamical_phase_along_path,
    evolve_pulse,
    lambda_system_gate,
    logical_basis,
    one_qubit_gate,
    one_qubit_hamiltonian,
    restricted_equality_residual,
)
from ..gates.pulses import PulseShape, PulseSpec
from ..gates.synthesis import euler_target, random_euler_angles, simulate_target
from ..gates.two_qubit import two_qubit_report
from ..metrics import VERIFY_CHECKS_TOTAL
from .fidelity import FidelityExperiment

logger = logging.getLogger(__name__)

GRID_SIZE = 12
SYNTHESIS_TARGETS = 100
SYNTHESIS_TOL = 1e-7
PROTECTION_TOL = 1e-6
LEAKAGE_TOL = 1e-10


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: Optional[float]
    tolerance: Optional[float]
    detail: str = ""

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    checks: List[Check] = field(default_factory=list)
    cycle_convention: Optional[str] = None
    gellmann_residuals: Dict[int, float] = field(default_factory=dict)
    flipped_lambda6_residual: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "cycle_convention": self.cycle_convention,
            "gellmann_residuals": {str(k): v for k, v in self.gellmann_residuals.items()},
            "flipped_lambda6_residual": self.flipped_lambda6_residual,
            "checks": [c.to_mapping() for c in self.checks],
        }


def _bounded(name: str, value: float, tol: float, detail: str = "") -> Check:
    return Check(name=name, passed=bool(value <= tol), value=float(value), tolerance=tol, detail=detail)


class _Battery:
    def __init__(self, basis: CodeBasis, seed: int, steps: int) -> None:
        self.basis = basis
        self.seed = seed
        self.steps = steps
        self.report = VerificationReport()

    def run(self, name: str, fn: Callable[[], Check | List[Check]]) -> None:
        try:
            outcome = fn()
        except (NsgateError, np.linalg.LinAlgError) as exc:
            outcome = Check(name=name, passed=False, value=None, tolerance=None, detail=str(exc))
        for check in outcome if isinstance(outcome, list) else [outcome]:
            self.report.checks.append(check)
            VERIFY_CHECKS_TOTAL.labels(result="pass" if check.passed else "fail").inc()
            if check.passed:
                logger.debug("check %s passed (%s)", check.name, check.value)
            else:
                logger.warning("check %s failed: value=%s tol=%s %s", check.name, check.value, check.tolerance, check.detail)

    def multiplicities(self) -> Check:
        mismatches: List[str] = []
        for n in (2, 4, 6):
            for sector in decompose_total_spin(n):
                if sector.ns_dim != multiplicity(n, sector.total_spin):
                    mismatches.append(f"n={n} J={sector.total_spin}: {sector.ns_dim}")
        n4 = tuple(s.ns_dim for s in decompose_total_spin(CODE_QUBITS))
        if n4 != (2, 3, 1):
            mismatches.append(f"n=4 multiplicities {n4}")
        return Check("multiplicity_formula", not mismatches, float(len(mismatches)), 0.0, "; ".join(mismatches))

    def orthonormality(self) -> Check:
        return _bounded("basis_orthonormality", self.basis.gram_residual(), STRUCTURAL_TOL)

    def ns_factorization(self) -> List[Check]:
        ops = collective_error_ops(CODE_QUBITS)
        structure = verify_ns_structure(self.basis, ops)
        projector = self.basis.projector
        sector = max(frobenius(commutator(op, projector)) for op in ops.as_dict().values())
        s_z = np.diag([2.0, 0.0, -2.0])
        return [
            _bounded("ns_factorization", structure.residual, STRUCTURAL_TOL),
            _bounded("ns_spin_z", frobenius(structure.s_z - s_z), STRUCTURAL_TOL, "S_z = diag(2, 0, -2)"),
            _bounded("code_sector_preserved", sector, STRUCTURAL_TOL),
        ]

    def gellmann(self) -> List[Check]:
        resolution = resolve_cycle_convention(self.basis)
        convention = resolution.convention
        self.report.cycle_convention = convention.value
        realizations = {i: gellmann_realization(i, self.basis, convention) for i in range(1, 9)}
        self.report.gellmann_residuals = {i: r.residual for i, r in realizations.items()}
        self.report.flipped_lambda6_residual = realizations[6].flipped_residual
        worst = max(r.residual for r in realizations.values())
        restricted = {i: self.basis.restrict(r.rhs) for i, r in realizations.items()}
        lam3 = np.kron(gellmann_matrix(3), np.eye(3))
        structure = frobenius(commutator(restricted[1], restricted[2]) - 2j * lam3)
        return [
            _bounded("gellmann_identities", worst, STRUCTURAL_TOL, f"convention {convention.value}"),
            _bounded("gellmann_commutator", structure, STRUCTURAL_TOL, "[λ1, λ2] = 2iλ3"),
        ]

    def commutant(self) -> Check:
        found, expected = permutation_span_dimension(CODE_QUBITS), commutant_dimension(CODE_QUBITS)
        return Check("commutant_dimension", found == expected, float(found), float(expected))

    def one_qubit(self) -> List[Check]:
        rng = np.random.default_rng(self.seed)
        pulse = PulseSpec.pi_pulse()
        eq5 = 0.0
        certificate = 0.0
        for _ in range(10):
            c = LambdaCouplings(*rng.normal(size=3))
            eq5 = max(eq5, restricted_equality_residual(c, self.basis))
            certificate = max(
                certificate, dynamical_phase_along_path(one_qubit_hamiltonian(c), pulse, logical_basis(self.basis), 50)
            )
        distance = trace = leakage = 0.0
        for theta in np.linspace(0.0, math.pi, GRID_SIZE):
            for phi in np.linspace(0.0, 2 * math.pi, GRID_SIZE, endpoint=False):
                result = one_qubit_gate(LambdaCouplings.from_axis(theta, phi))
                distance = max(distance, result.target_distance)
                trace = max(trace, abs(np.trace(result.logical_block)))
                leakage = max(leakage, result.leakage)
        return [
            _bounded("one_qubit_restriction", eq5, STRUCTURAL_TOL),
            _bounded("parallel_transport", certificate, STRUCTURAL_TOL),
            _bounded("one_qubit_grid_distance", distance, INTEGRATED_TOL),
            _bounded("one_qubit_grid_trace", trace, INTEGRATED_TOL),
            _bounded("one_qubit_grid_leakage", leakage, LEAKAGE_TOL),
        ]

    def pulse_shapes(self) -> List[Check]:
        c = LambdaCouplings.from_axis(1.1, 0.4)
        h = one_qubit_hamiltonian(c)
        square = evolve_pulse(h, PulseSpec.pi_pulse(PulseShape.SQUARE))
        gaussian = evolve_pulse(h, PulseSpec.pi_pulse(PulseShape.TRUNCATED_GAUSSIAN, duration=math.pi), slices=64)
        bare = lambda_system_gate(c)
        code = one_qubit_gate(c)
        return [
            _bounded("pulse_shape_independence", frobenius(square - gaussian), 1e-10),
            _bounded("lambda_system_reference", frobenius(bare.logical_block - code.logical_block), INTEGRATED_TOL),
        ]

    def synthesis(self) -> Check:
        rng = np.random.default_rng(self.seed)
        worst = 0.0
        for _ in range(SYNTHESIS_TARGETS):
            worst = max(worst, simulate_target(euler_target(*random_euler_angles(rng)), self.basis).result.target_distance)
        return _bounded("su2_synthesis", worst, SYNTHESIS_TOL, f"{SYNTHESIS_TARGETS} seeded targets")

    def two_qubit(self) -> List[Check]:
        report = two_qubit_report(self.basis)
        return [
            _bounded("two_qubit_restriction", report.restriction_residual, STRUCTURAL_TOL),
            _bounded("two_qubit_commute", report.commutator_norm, STRUCTURAL_TOL),
            _bounded("two_qubit_vanishing", report.computational_block_norm, STRUCTURAL_TOL),
            _bounded("h1_trivial", report.h1_identity_residual, 1e-10),
            _bounded("two_qubit_factorization", report.factorization_residual, INTEGRATED_TOL),
            _bounded("cnot_distance", report.gate.target_distance, INTEGRATED_TOL),
            _bounded("cnot_leakage", report.gate.leakage, LEAKAGE_TOL),
        ]

    def protection(self) -> Check:
        cfg = ExperimentConfig(g_values=(0.0,), steps=self.steps)
        experiment = FidelityExperiment(cfg, self.basis)
        worst = 0.0
        for nbar in cfg.nbar_values:
            fidelities = experiment.gate_action_fidelities(0.0, nbar)
            worst = max(worst, 1.0 - float(np.mean(fidelities)))
        return _bounded("g0_protection", abs(worst), PROTECTION_TOL, f"{self.steps} steps, nbar ∈ {cfg.nbar_values}")


def run_verification_battery(
    basis: Optional[CodeBasis] = None, seed: int = 20240601, steps: int = 400
) -> VerificationReport:
    battery = _Battery(basis or four_qubit_code_basis(), seed, steps)
    battery.run("multiplicity_formula", battery.multiplicities)
    battery.run("basis_orthonormality", battery.orthonormality)
    battery.run("ns_factorization", battery.ns_factorization)
    battery.run("gellmann_identities", battery.gellmann)
    battery.run("commutant_dimension", battery.commutant)
    battery.run("one_qubit", battery.one_qubit)
    battery.run("pulse_shape_independence", battery.pulse_shapes)
    battery.run("su2_synthesis", battery.synthesis)
    battery.run("two_qubit", battery.two_qubit)
    battery.run("g0_protection", battery.protection)
    report = battery.report
    logger.info(
        "verification battery: %d/%d checks passed, cycle convention %s",
        len(report.checks) - len(report.failed()),
        len(report.checks),
        report.cycle_convention,
    )
    return report
