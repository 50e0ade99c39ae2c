"""Gate fidelity under symmetry-broken noise, swept over g and n̄."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..algebra.collective import CodeBasis, four_qubit_code_basis, ns_reduce
from ..algebra.tensor import StateVector, bures_fidelity, density, pure_state_fidelity
from ..config import ExperimentConfig
from ..errors import ConfigError, ConvergenceError, InsufficientDataError
from ..gates.holonomy import LambdaCouplings, axis_gate, one_qubit_hamiltonian
from ..metrics import SWEEP_POINTS_TOTAL
from ..noise.integrator import integrate_with_report
from ..noise.lindblad import NoiseParams

logger = logging.getLogger(__name__)

N_AXIAL = 6
CSV_COLUMNS = ["g", "nbar", "F_mean"] + [f"F_state{k}" for k in range(1, N_AXIAL + 1)] + ["leakage_mean"]
PLATEAU = 1e-9

_R = 1 / math.sqrt(2)
AXIAL_AMPLITUDES: Tuple[Tuple[complex, complex], ...] = (
    (1, 0),
    (0, 1),
    (_R, _R),
    (_R, -_R),
    (_R, 1j * _R),
    (_R, -1j * _R),
)


def axial_input_states(basis: Optional[CodeBasis] = None, nf_state: int = 1) -> List[StateVector]:
    """±z, ±x, ±y logical states on span{|1⟩, |2⟩} with NF spectator ``nf_state``."""
    basis = basis or four_qubit_code_basis()
    return [basis.embed(np.array([a, b, 0], dtype=complex), nf_state) for a, b in AXIAL_AMPLITUDES]


@dataclass(frozen=True)
class FidelityRow:
    g: float
    nbar: float
    f_states: Tuple[float, ...]
    leakage_mean: float

    @property
    def f_mean(self) -> float:
        return float(np.mean(self.f_states))

    def as_csv_row(self) -> List[str]:
        values = [self.g, self.nbar, self.f_mean, *self.f_states, self.leakage_mean]
        return [f"{v:.12g}" for v in values]


@dataclass
class FidelityCurve:
    rows: List[FidelityRow] = field(default_factory=list)

    def sorted(self) -> "FidelityCurve":
        return FidelityCurve(sorted(self.rows, key=lambda r: (r.nbar, r.g)))

    def for_nbar(self, nbar: float) -> List[FidelityRow]:
        return [r for r in self.rows if math.isclose(r.nbar, nbar)]

    def nbar_values(self) -> List[float]:
        return sorted({r.nbar for r in self.rows})


class FidelityExperiment:
    """Holds the operators shared by every sweep point of one configuration."""

    def __init__(self, cfg: ExperimentConfig, basis: Optional[CodeBasis] = None) -> None:
        self.cfg = cfg
        self.basis = basis or four_qubit_code_basis()
        self.h0 = one_qubit_hamiltonian(LambdaCouplings.from_vector(cfg.reflection_axis()))
        states = axial_input_states(self.basis, cfg.nf_state)
        self.rho0 = np.stack([density(psi) for psi in states])
        self._ideal: Dict[float, np.ndarray] = {}

    def params(self, g: float, nbar: float) -> NoiseParams:
        return NoiseParams(g=g, gamma_phi=self.cfg.gamma_ratio, gamma=self.cfg.gamma_ratio, nbar=nbar)

    def _evolve(self, g: float, nbar: float) -> np.ndarray:
        try:
            result = integrate_with_report(self.rho0, self.h0, self.cfg.pulse, self.params(g, nbar), self.cfg.steps)
        except ConvergenceError as exc:
            raise ConvergenceError(f"sweep point g={g:g}, nbar={nbar:g}: {exc}") from exc
        return ns_reduce(result.rho, self.basis)

    def ideal(self, nbar: float) -> np.ndarray:
        """NS states after the gate under purely collective noise (g = 0)."""
        if nbar not in self._ideal:
            self._ideal[nbar] = self._evolve(0.0, nbar)
        return self._ideal[nbar]

    def point(self, g: float, nbar: float) -> FidelityRow:
        reference = self.ideal(nbar)
        faulty = self._evolve(g, nbar)
        f_states = tuple(bures_fidelity(reference[k], faulty[k]) for k in range(N_AXIAL))
        leakage = float(np.mean(1.0 - np.real(np.trace(faulty, axis1=-2, axis2=-1))))
        SWEEP_POINTS_TOTAL.inc()
        row = FidelityRow(g=g, nbar=nbar, f_states=f_states, leakage_mean=max(leakage, 0.0))
        logger.info("g=%.4g nbar=%g F=%.10f leakage=%.2e", g, nbar, row.f_mean, row.leakage_mean)
        return row

    def gate_action_fidelities(self, g: float, nbar: float) -> Tuple[float, ...]:
        """Per-state fidelity against the closed-form n·σ action instead of the g = 0 run."""
        gate = np.eye(3, dtype=complex)
        gate[:2, :2] = axis_gate(self.cfg.reflection_axis())
        faulty = self._evolve(g, nbar)
        return tuple(
            pure_state_fidelity(gate @ np.array([a, b, 0], dtype=complex), faulty[k])
            for k, (a, b) in enumerate(AXIAL_AMPLITUDES)
        )

    def run(self) -> FidelityCurve:
        points = [(g, nbar) for nbar in self.cfg.nbar_values for g in self.cfg.g_values]
        logger.info("sweep of %d points with %d worker(s)", len(points), self.cfg.workers)
        # References first, so workers never race to fill the cache.
        for nbar in self.cfg.nbar_values:
            self.ideal(nbar)
        if self.cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
                rows = list(pool.map(lambda p: self.point(*p), points))
        else:
            rows = [self.point(g, nbar) for g, nbar in points]
        logger.info("sweep finished")
        return FidelityCurve(rows).sorted()


def gate_fidelity_experiment(cfg: ExperimentConfig, basis: Optional[CodeBasis] = None) -> FidelityCurve:
    return FidelityExperiment(cfg, basis).run()


def write_curve_csv(curve: FidelityCurve, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in curve.sorted().rows:
            writer.writerow(row.as_csv_row())
    return target


def read_curve_csv(path: str | Path) -> FidelityCurve:
    source = Path(path)
    if not source.exists():
        raise ConfigError(f"curve file not found: {path}")
    rows: List[FidelityRow] = []
    with source.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != CSV_COLUMNS:
            raise ConfigError(f"{path} does not have the columns {CSV_COLUMNS}")
        for record in reader:
            try:
                rows.append(
                    FidelityRow(
                        g=float(record["g"]),
                        nbar=float(record["nbar"]),
                        f_states=tuple(float(record[f"F_state{k}"]) for k in range(1, N_AXIAL + 1)),
                        leakage_mean=float(record["leakage_mean"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"malformed row in {path}: {record}") from exc
    return FidelityCurve(rows)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    points: int
    window: Tuple[float, float]
    nbar: float

    def to_mapping(self) -> Dict[str, float]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "points": self.points,
            "window": list(self.window),
            "nbar": self.nbar,
        }


def fit_small_g_slope(
    curve: FidelityCurve | Iterable[FidelityRow] | Sequence[Tuple[float, float]],
    window: Tuple[float, float],
    nbar: float = 0.0,
    min_points: int = 5,
) -> SlopeFit:
    """Least-squares slope a of log₁₀(1 - F) against log₁₀ g, so that 1 - F ∝ g^a.

    ``curve`` may also be plain (g, F) pairs, in which case ``nbar`` is ignored.

    Raises:
        InsufficientDataError: fewer than ``min_points`` usable points, counting only
            g inside the window and F below 1 - 1e-9.
    """
    lo, hi = window
    if isinstance(curve, FidelityCurve):
        pairs = [(r.g, r.f_mean) for r in curve.for_nbar(nbar)]
    else:
        items = list(curve)
        pairs = [(r.g, r.f_mean) if isinstance(r, FidelityRow) else (float(r[0]), float(r[1])) for r in items]
    usable = [(g, f) for g, f in pairs if lo <= g <= hi and g > 0 and f < 1.0 - PLATEAU]
    if len(usable) < min_points:
        raise InsufficientDataError(
            f"{len(usable)} usable points in g ∈ [{lo:g}, {hi:g}] (need {min_points}); curve may sit on the F = 1 plateau"
        )
    x = np.log10([g for g, _ in usable])
    y = np.log10([1.0 - f for _, f in usable])
    slope, intercept = np.polyfit(x, y, 1)
    return SlopeFit(slope=float(slope), intercept=float(intercept), points=len(usable), window=(lo, hi), nbar=nbar)
