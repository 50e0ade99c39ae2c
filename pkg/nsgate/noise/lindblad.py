"""Symmetry-broken collective decoherence.

ρ̇ = -i[Ω(t)H₀, ρ] + Γ·D[E′_z]ρ + γ(n̄+1)·D[E′_-]ρ + γn̄·D[E′_+]ρ with
D[L]ρ = LρL† - ½{L†L, ρ} and E′_α = Σ_p e^{-pg} σ_p^α.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from ..algebra.collective import CODE_QUBITS, weighted_pauli_sum
from ..algebra.tensor import ComplexMatrix, dagger, require_hermitian
from ..errors import ConfigError
from ..gates.pulses import PulseSpec


@dataclass(frozen=True)
class NoiseParams:
    """Rates in units of Ω. ``g`` = 0 is fully collective noise."""

    g: float = 0.0
    gamma_phi: float = 0.1
    gamma: float = 0.1
    nbar: float = 0.0

    def __post_init__(self) -> None:
        for name in ("g", "gamma_phi", "gamma", "nbar"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"noise parameter {name} must be finite and non-negative, got {value}")

    def with_g(self, g: float) -> "NoiseParams":
        return NoiseParams(g=g, gamma_phi=self.gamma_phi, gamma=self.gamma, nbar=self.nbar)

    def to_mapping(self) -> Dict[str, float]:
        return {"g": self.g, "gamma_phi": self.gamma_phi, "gamma": self.gamma, "nbar": self.nbar}


@dataclass(frozen=True)
class BrokenErrorOps:
    g: float
    weights: Tuple[float, ...]
    e_plus_b: ComplexMatrix = field(repr=False)
    e_minus_b: ComplexMatrix = field(repr=False)
    e_z_b: ComplexMatrix = field(repr=False)


def broken_error_ops(g: float, n: int = CODE_QUBITS) -> BrokenErrorOps:
    if not math.isfinite(g) or g < 0:
        raise ConfigError(f"symmetry-breaking exponent must be finite and non-negative, got {g}")
    weights = tuple(math.exp(-p * g) for p in range(1, n + 1))
    return BrokenErrorOps(
        g=g,
        weights=weights,
        e_plus_b=weighted_pauli_sum("+", weights),
        e_minus_b=weighted_pauli_sum("-", weights),
        e_z_b=weighted_pauli_sum("z", weights),
    )


class LindbladGenerator:
    """Right-hand side of the master equation for a fixed H₀, pulse and noise model.

    Dissipators are folded into H_eff = Ω(t)H₀ - (i/2)Σ c·L†L so one evaluation costs two
    products with H_eff plus one batched sandwich over the jump operators. States may be
    a single matrix or a stack of shape (..., d, d).
    """

    def __init__(self, h_normalized: npt.ArrayLike, pulse: PulseSpec, params: NoiseParams) -> None:
        self.h = require_hermitian(h_normalized)
        self.pulse = pulse
        self.params = params
        ops = broken_error_ops(params.g, int(round(math.log2(self.h.shape[0]))))
        channels: List[Tuple[float, ComplexMatrix]] = [
            (params.gamma_phi, ops.e_z_b),
            (params.gamma * (params.nbar + 1), ops.e_minus_b),
            (params.gamma * params.nbar, ops.e_plus_b),
        ]
        active = [(rate, op) for rate, op in channels if rate > 0]
        dim = self.h.shape[0]
        self.decay = np.zeros((dim, dim), dtype=complex)
        for rate, op in active:
            self.decay += rate * dagger(op) @ op
        if active:
            self.jumps = np.stack([math.sqrt(rate) * op for rate, op in active])
        else:
            self.jumps = np.zeros((0, dim, dim), dtype=complex)
        self.jumps_dag = dagger(self.jumps)

    def effective_hamiltonian(self, t: float) -> ComplexMatrix:
        return self.pulse.envelope(t) * self.h - 0.5j * self.decay

    def __call__(self, t: float, rho: np.ndarray) -> np.ndarray:
        h_eff = self.effective_hamiltonian(t)
        out = -1j * (h_eff @ rho - rho @ dagger(h_eff))
        if self.jumps.shape[0]:
            jumps = self.jumps.reshape((-1,) + (1,) * (rho.ndim - 2) + self.jumps.shape[1:])
            jumps_dag = self.jumps_dag.reshape(jumps.shape)
            out = out + np.sum(jumps @ rho @ jumps_dag, axis=0)
        return out

    def describe(self) -> Dict[str, Any]:
        return {"params": self.params.to_mapping(), "pulse": self.pulse.to_mapping(), "channels": int(self.jumps.shape[0])}


def lindblad_rhs(
    rho: npt.ArrayLike,
    t: float,
    h_s: npt.ArrayLike,
    pulse: PulseSpec,
    params: NoiseParams,
    generator: Optional[LindbladGenerator] = None,
) -> np.ndarray:
    """dρ/dt at time t; pass a prebuilt ``generator`` to skip operator construction."""
    gen = generator or LindbladGenerator(h_s, pulse, params)
    return gen(t, np.asarray(rho, dtype=complex))
