"""Fixed-step classical RK4 over the pulse window, with a step-doubling convergence gate."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import numpy.typing as npt

from ..algebra.tensor import DensityMatrix, dagger
from ..errors import ConfigError, ConvergenceError
from ..gates.pulses import PulseSpec
from ..metrics import INTEGRATION_DURATION_SECONDS, INTEGRATIONS_TOTAL
from .lindblad import LindbladGenerator, NoiseParams

logger = logging.getLogger(__name__)

MIN_STEPS = 100
DEFAULT_STEPS = 2000
CONVERGENCE_TOL = 1e-8
TRACE_TOL = 1e-7
HERMITIAN_TOL = 1e-9
POSITIVITY_TOL = 1e-6

Rhs = Callable[[float, np.ndarray], np.ndarray]


def rk4(rhs: Rhs, y0: np.ndarray, t0: float, t1: float, steps: int) -> np.ndarray:
    h = (t1 - t0) / steps
    y = np.array(y0, dtype=complex)
    for i in range(steps):
        t = t0 + h * i
        # the last stage lands on t1 exactly, never a rounding step past it
        t_next = t1 if i == steps - 1 else t0 + h * (i + 1)
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + (h / 2) * k1)
        k3 = rhs(t + h / 2, y + (h / 2) * k2)
        k4 = rhs(t_next, y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


@dataclass(frozen=True)
class IntegrationResult:
    rho: np.ndarray = field(repr=False)
    steps: int
    convergence_error: Optional[float]
    trace_drift: float
    hermiticity: float
    min_eigenvalue: float


def _validate(rho: np.ndarray) -> tuple[float, float, float]:
    traces = np.trace(rho, axis1=-2, axis2=-1)
    drift = float(np.max(np.abs(traces - 1.0)))
    herm = float(np.max(np.linalg.norm(rho - dagger(rho), axis=(-2, -1))))
    lowest = float(np.min(np.linalg.eigvalsh((rho + dagger(rho)) / 2)))
    if drift > TRACE_TOL:
        raise ConvergenceError(f"trace drifted by {drift:.3e}")
    if herm > HERMITIAN_TOL:
        raise ConvergenceError(f"state lost Hermiticity: {herm:.3e}")
    if lowest < -POSITIVITY_TOL:
        raise ConvergenceError(f"state has eigenvalue {lowest:.3e}")
    return drift, herm, lowest


def integrate_with_report(
    rho0: npt.ArrayLike,
    h_normalized: npt.ArrayLike,
    pulse: PulseSpec,
    params: NoiseParams,
    steps: int = DEFAULT_STEPS,
    check_convergence: bool = True,
    generator: Optional[LindbladGenerator] = None,
) -> IntegrationResult:
    """Integrate over [0, τ] and check the end state.

    With ``check_convergence`` the run is repeated at 2·steps and the two end states must
    agree to ``CONVERGENCE_TOL`` in Frobenius norm; the finer one is returned. ``rho0`` may
    be a stack of states, which are integrated together.

    Raises:
        ConfigError: fewer than ``MIN_STEPS`` steps.
        ConvergenceError: the step-doubling gate or a state-validity check failed.
    """
    if steps < MIN_STEPS:
        raise ConfigError(f"at least {MIN_STEPS} integration steps are required, got {steps}")
    gen = generator or LindbladGenerator(h_normalized, pulse, params)
    start = np.asarray(rho0, dtype=complex)
    with INTEGRATION_DURATION_SECONDS.time():
        rho = rk4(gen, start, 0.0, pulse.duration, steps)
        error = None
        if check_convergence:
            fine = rk4(gen, start, 0.0, pulse.duration, 2 * steps)
            error = float(np.max(np.linalg.norm(fine - rho, axis=(-2, -1))))
            rho = fine
    INTEGRATIONS_TOTAL.inc()
    if error is not None and error > CONVERGENCE_TOL:
        logger.warning("step doubling at %d steps moved the state by %.3e (g=%s)", steps, error, params.g)
        raise ConvergenceError(f"{steps} steps not converged: ‖ρ_n - ρ_2n‖ = {error:.3e}; increase steps")
    drift, herm, lowest = _validate(rho)
    logger.debug("integrated %d steps at g=%s nbar=%s: drift %.1e", steps, params.g, params.nbar, drift)
    return IntegrationResult(
        rho=rho,
        steps=2 * steps if check_convergence else steps,
        convergence_error=error,
        trace_drift=drift,
        hermiticity=herm,
        min_eigenvalue=lowest,
    )


def integrate(
    rho0: npt.ArrayLike,
    h_normalized: npt.ArrayLike,
    pulse: PulseSpec,
    params: NoiseParams,
    steps: int = DEFAULT_STEPS,
) -> DensityMatrix:
    return integrate_with_report(rho0, h_normalized, pulse, params, steps).rho


def convergence_ratio(
    rho0: npt.ArrayLike, h_normalized: npt.ArrayLike, pulse: PulseSpec, params: NoiseParams, steps: int
) -> float:
    """err(steps)/err(2·steps) against an 8·steps reference; ≈16 for a fourth-order scheme."""
    gen = LindbladGenerator(h_normalized, pulse, params)
    start = np.asarray(rho0, dtype=complex)
    reference = rk4(gen, start, 0.0, pulse.duration, 8 * steps)
    coarse = np.linalg.norm(rk4(gen, start, 0.0, pulse.duration, steps) - reference)
    fine = np.linalg.norm(rk4(gen, start, 0.0, pulse.duration, 2 * steps) - reference)
    if fine == 0:
        return math.inf
    return float(coarse / fine)
