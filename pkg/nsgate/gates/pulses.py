"""Pulse envelopes Ω(t) with the holonomic area contract ∫Ω dt = π."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
from scipy import integrate, special

from ..errors import InvalidPulseError

AREA_TOL = 1e-10
# Truncation at ±3σ about the centre, so τ = 6σ.
GAUSSIAN_HALF_WIDTH = 3.0
# Relative slack on the window edges; stage times computed as t0 + h·i can overshoot τ by an ulp.
EDGE_SLACK = 1e-12


class PulseShape(str, Enum):
    SQUARE = "square"
    TRUNCATED_GAUSSIAN = "truncated-gaussian"


def _gaussian_mass() -> float:
    """∫ e^{-x²/2} dx over [-3, 3]."""
    return math.sqrt(2 * math.pi) * special.erf(GAUSSIAN_HALF_WIDTH / math.sqrt(2))


@dataclass(frozen=True)
class PulseSpec:
    """Envelope of a single pulse on [0, duration].

    ``amplitude`` is the constant height of a square pulse and the peak of a truncated
    gaussian. Rates elsewhere in the package are in units of Ω = 1.
    """

    shape: PulseShape
    amplitude: float
    duration: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", PulseShape(self.shape))
        for name in ("amplitude", "duration"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InvalidPulseError(f"pulse {name} must be positive and finite, got {value}")

    @classmethod
    def pi_pulse(
        cls, shape: PulseShape | str = PulseShape.SQUARE, amplitude: Optional[float] = None, duration: Optional[float] = None
    ) -> "PulseSpec":
        """Build a π-area pulse from whichever of amplitude or duration is given."""
        shape = PulseShape(shape)
        if amplitude is not None and duration is not None:
            spec = cls(shape, float(amplitude), float(duration))
            spec.require_pi_area()
            return spec
        if amplitude is None and duration is None:
            amplitude = 1.0
        if shape == PulseShape.SQUARE:
            if duration is None:
                return cls(shape, float(amplitude), math.pi / _positive(amplitude, "amplitude"))
            return cls(shape, math.pi / _positive(duration, "duration"), float(duration))
        mass = _gaussian_mass()
        if duration is None:
            sigma = math.pi / (_positive(amplitude, "amplitude") * mass)
            return cls(shape, float(amplitude), 2 * GAUSSIAN_HALF_WIDTH * sigma)
        sigma = _positive(duration, "duration") / (2 * GAUSSIAN_HALF_WIDTH)
        return cls(shape, math.pi / (sigma * mass), float(duration))

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "PulseSpec":
        try:
            shape = PulseShape(data.get("shape", PulseShape.SQUARE.value))
        except ValueError as exc:
            raise InvalidPulseError(f"unknown pulse shape {data.get('shape')!r}") from exc
        return cls.pi_pulse(shape, data.get("amplitude"), data.get("duration"))

    def to_mapping(self) -> Dict[str, Any]:
        return {"shape": self.shape.value, "amplitude": self.amplitude, "duration": self.duration}

    @property
    def sigma(self) -> float:
        return self.duration / (2 * GAUSSIAN_HALF_WIDTH)

    def envelope(self, t: float | np.ndarray) -> float | np.ndarray:
        t_arr = np.asarray(t, dtype=float)
        edge = EDGE_SLACK * self.duration
        inside = (t_arr >= -edge) & (t_arr <= self.duration + edge)
        t_arr = np.clip(t_arr, 0.0, self.duration)
        if self.shape == PulseShape.SQUARE:
            out = np.where(inside, self.amplitude, 0.0)
        else:
            centre = self.duration / 2
            out = np.where(inside, self.amplitude * np.exp(-((t_arr - centre) ** 2) / (2 * self.sigma**2)), 0.0)
        return float(out) if out.ndim == 0 else out

    def cumulative_area(self, t: float) -> float:
        """∫_0^t Ω(t') dt' in closed form."""
        t = min(max(float(t), 0.0), self.duration)
        if self.shape == PulseShape.SQUARE:
            return self.amplitude * t
        root = self.sigma * math.sqrt(2)
        centre = self.duration / 2
        scale = self.amplitude * self.sigma * math.sqrt(math.pi / 2)
        return scale * (special.erf((t - centre) / root) + special.erf(centre / root))

    @property
    def area(self) -> float:
        """Pulse area by adaptive quadrature of the envelope."""
        value, _ = integrate.quad(self.envelope, 0.0, self.duration, epsabs=1e-13, epsrel=1e-13, limit=200)
        return float(value)

    def require_pi_area(self, tol: float = AREA_TOL) -> None:
        area = self.area
        if abs(area - math.pi) > tol:
            raise InvalidPulseError(f"pulse area {area:.12f} differs from π by {abs(area - math.pi):.3e}")

    def slice_areas(self, slices: int) -> List[float]:
        if slices < 1:
            raise InvalidPulseError(f"need at least one slice, got {slices}")
        edges = np.linspace(0.0, self.duration, slices + 1)
        return [
            float(integrate.quad(self.envelope, a, b, epsabs=1e-14, epsrel=1e-13)[0]) for a, b in zip(edges, edges[1:])
        ]


def _positive(value: Optional[float], name: str) -> float:
    if value is None or not math.isfinite(value) or value <= 0:
        raise InvalidPulseError(f"pulse {name} must be positive and finite, got {value}")
    return float(value)
