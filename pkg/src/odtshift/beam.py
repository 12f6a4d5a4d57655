"""Focused Gaussian beam geometry and intensity field.

Axial coordinate is x; the beam propagates along x with its focus at
``focus_m``. y and z span the transverse plane. Fundamental TEM00 mode,
linear polarization along the quantization axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BeamGeometry:
    """A focused Gaussian beam: power, waist, wavelength, focus position."""

    power_w: float
    waist_m: float
    wavelength_m: float
    focus_m: float = 0.0

    def __post_init__(self) -> None:
        if self.power_w < 0:
            raise ValueError(f"beam power must be >= 0, got {self.power_w}")
        if self.waist_m <= 0:
            raise ValueError(f"beam waist must be > 0, got {self.waist_m}")
        if self.wavelength_m <= 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength_m}")

    @property
    def rayleigh_m(self) -> float:
        return math.pi * self.waist_m**2 / self.wavelength_m

    def spot_radius(self, x):
        """1/e^2 intensity radius at axial position x (m)."""
        xi = (np.asarray(x, dtype=float) - self.focus_m) / self.rayleigh_m
        return self.waist_m * np.sqrt(1.0 + xi * xi)

    def peak_intensity(self) -> float:
        """On-axis intensity at the focus, W/m^2."""
        return 2.0 * self.power_w / (math.pi * self.waist_m**2)

    def intensity(self, x, y, z):
        """Intensity at (x, y, z) in W/m^2. Accepts scalars or arrays."""
        w = self.spot_radius(x)
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        out = (2.0 * self.power_w / (math.pi * w * w)) * np.exp(
            -2.0 * (y * y + z * z) / (w * w))
        if out.ndim == 0:
            return float(out)
        return out
