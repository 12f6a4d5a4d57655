"""Trap potential and equipotential surfaces of a single-beam dipole trap.

The potential is the light shift of the trapped level times Planck's
constant, evaluated on the beam's intensity field. Equipotential surfaces
of a focused Gaussian are closed figures of revolution around the beam
axis (cigars near the bottom of the well, necking down at the focus for
levels shallower than depth/e); their generating radius has the closed
form

    r(x)^2 = (w(x)^2 / 2) * ln(U_axis(x) / U_level)

valid wherever the on-axis potential is deeper than the level. Surface
areas integrate 2*pi*r*sqrt(1 + r'^2), rewritten in the squared radius
rho = r^2 as 2*pi*sqrt(rho + rho'^2/4), which stays finite at the tips
where r' diverges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import simpson

from .atomic_data import CONSTANTS, Catalog, HyperfineState
from .beam import BeamGeometry
from .stark import shift_coefficient


@dataclass(frozen=True)
class TrapPotential:
    """Dipole potential seen by one hyperfine level in one beam.

    With state.mF unset the level coefficient is the uniform average over
    sublevels; for the trapped ground levels the spread is < 1e-6 anyway.
    Equipotential machinery assumes an attractive (negative-shift) level.
    """

    catalog: Catalog
    beam: BeamGeometry
    state: HyperfineState

    @cached_property
    def coefficient_hz_per_intensity(self) -> float:
        omega_trap = 2.0 * math.pi * CONSTANTS.c / self.beam.wavelength_m
        return shift_coefficient(self.catalog, self.state, omega_trap)

    def shift_hz(self, x, y, z):
        return self.coefficient_hz_per_intensity * self.beam.intensity(x, y, z)

    def energy_j(self, x, y, z):
        return CONSTANTS.h * self.shift_hz(x, y, z)

    def depth_j(self) -> float:
        """Magnitude of the potential at the focus, J."""
        return abs(CONSTANTS.h * self.coefficient_hz_per_intensity
                   * self.beam.peak_intensity())


def trap_depth(pot: TrapPotential) -> float:
    """Trap depth in millikelvin."""
    return pot.depth_j() / CONSTANTS.kB * 1e3


def _axial_support(pot: TrapPotential, u: float) -> float:
    # half-length of the region where the on-axis well is deeper than u
    return pot.beam.rayleigh_m * math.sqrt(pot.depth_j() / u - 1.0)


def _squared_radius(pot: TrapPotential, u: float, num: int):
    depth = pot.depth_j()
    x_half = _axial_support(pot, u)
    offsets = np.linspace(-x_half, x_half, num)
    xs = pot.beam.focus_m + offsets
    xi = offsets / pot.beam.rayleigh_m
    w2 = pot.beam.waist_m**2 * (1.0 + xi * xi)
    # endpoints give ln(1) = 0 up to rounding; clip the stray negatives
    rho = 0.5 * w2 * np.log((depth / u) / (1.0 + xi * xi))
    return xs, np.maximum(rho, 0.0)


def _check_level(pot: TrapPotential, u: float) -> float:
    depth = pot.depth_j()
    if u <= 0:
        raise ValueError("equipotential level must be nonzero")
    if u > depth:
        raise ValueError(
            f"level {u:.4e} J lies below the trap minimum (depth {depth:.4e} J)")
    return depth


def equipotential_profile(pot: TrapPotential, level_j: float, num: int = 1001):
    """Generating curve (x, r) of the closed surface at |level_j|.

    Returns (xs, rs) arrays spanning the axial support, r = 0 at both
    ends. The level exactly at the trap depth degenerates to the single
    point at the focus.
    """
    u = abs(level_j)
    depth = _check_level(pot, u)
    if u == depth:
        return np.array([pot.beam.focus_m]), np.array([0.0])
    xs, rho = _squared_radius(pot, u, num)
    return xs, np.sqrt(rho)


def equipotential_area(pot: TrapPotential, temperature_k: float,
                       num: int = 2001, refine: bool = True,
                       rel_tol: float = 1e-3) -> float:
    """Area (m^2) of the surface where the well depth equals kB*T.

    Simpson quadrature on the squared-radius form with centered-difference
    derivatives; with refine the grid doubles until successive values
    agree to rel_tol.
    """
    if temperature_k <= 0:
        raise ValueError(f"temperature must be positive, got {temperature_k}")
    u = CONSTANTS.kB * temperature_k
    depth = pot.depth_j()
    if u >= depth:
        raise ValueError(
            f"kB*T = {u:.4e} J is deeper than the trap (depth {depth:.4e} J)")

    def one_pass(n: int) -> float:
        xs, rho = _squared_radius(pot, u, n)
        drho = np.gradient(rho, xs)
        integrand = 2.0 * math.pi * np.sqrt(rho + 0.25 * drho * drho)
        return float(simpson(integrand, x=xs))

    if num % 2 == 0:
        num += 1
    area = one_pass(num)
    if not refine:
        return area
    for _ in range(12):
        num = 2 * num - 1
        finer = one_pass(num)
        if abs(finer - area) <= rel_tol * abs(finer):
            return finer
        area = finer
    raise RuntimeError("equipotential area quadrature did not converge")
