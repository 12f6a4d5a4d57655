"""AC Stark shifts of hyperfine sublevels in a far-detuned light field.

Every catalog line connected to the requested level contributes one term:
the co- and counter-rotating resonance factor, the line strength, and the
angular weight that distributes the J-level coupling over (F, mF). Shifts
are returned in ordinary Hz (cycles, not angular frequency); negative
means the level is pulled down, so ground levels in a red-detuned beam
come out negative.

Wavelengths enter the line-strength factor in Angstroms; with that
convention the factor for a transition equals its partial decay rate in
rad/s, which is how the conversion constant was calibrated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .angular import wigner3j, wigner6j
from .atomic_data import CONSTANTS, Catalog, CatalogError, HyperfineState, Transition
from .beam import BeamGeometry

# Denominator guard: a trap beam within ~1 GHz of a catalog line is not
# far-detuned and the perturbative shift is meaningless there.
DEFAULT_RESONANCE_EPSILON = 2 * math.pi * 1e9


class ResonanceError(ValueError):
    """Trap light too close to a catalog line for a perturbative shift."""


def alpha_factor(omega_line: float, omega_trap: float,
                 epsilon: float = DEFAULT_RESONANCE_EPSILON) -> float:
    """Sum of co- and counter-rotating resonance denominators, s/rad.

    1/(omega_line + omega_trap) + 1/(omega_line - omega_trap), raising
    ResonanceError when either denominator magnitude falls below epsilon.
    """
    plus = omega_line + omega_trap
    minus = omega_line - omega_trap
    if abs(minus) < epsilon or abs(plus) < epsilon:
        raise ResonanceError(
            f"trap laser resonant with catalog line: |detuning| "
            f"{min(abs(minus), abs(plus)):.3e} rad/s < epsilon {epsilon:.3e}")
    return 1.0 / plus + 1.0 / minus


def beta_factor(transition: Transition) -> float:
    """Line-strength factor of one catalog row, rad/s.

    (2J_lower+1)/(2J_upper+1) * K * D^2 / lambda^3 with the wavelength in
    Angstroms; equal to the partial decay rate of the line.
    """
    lam_angstrom = transition.wavelength_nm * 10.0
    g_ratio = (transition.lower.J.twice_value + 1) / (transition.upper.J.twice_value + 1)
    return (g_ratio * CONSTANTS.beta_conversion
            * transition.dipole_au**2 / lam_angstrom**3)


@dataclass(frozen=True)
class ShiftResult:
    """Light shift of one state at one point in the beam."""

    state: HyperfineState
    position_m: tuple
    intensity_w_m2: float
    shift_hz: float


@lru_cache(maxsize=None)
def _coefficient_single_mf(catalog: Catalog, state: HyperfineState,
                           omega_trap: float, epsilon: float) -> float:
    nuc = float(catalog.nuclear_spin)
    f_state = float(state.F)
    m = float(state.mF)
    prefactor = 3.0 * math.pi * CONSTANTS.c**2 / (2.0 * CONSTANTS.hbar)

    total = 0.0
    matched = False
    for t in catalog.transitions:
        if t.lower == state.level:
            sign = -1.0
        elif t.upper == state.level:
            sign = +1.0
        else:
            continue
        matched = True
        # pi coupling keeps mF, so rows whose partner F cannot hold this
        # mF contribute nothing (stretched states against lower-F rows)
        if abs(state.mF.twice_value) > min(t.lower.F.twice_value,
                                           t.upper.F.twice_value):
            continue
        f_lo = float(t.lower.F)
        f_up = float(t.upper.F)
        weight = ((t.lower.F.twice_value + 1) * (t.upper.F.twice_value + 1)
                  * wigner6j(float(t.lower.J), float(t.upper.J), 1.0,
                             f_up, f_lo, nuc) ** 2
                  * wigner3j(f_up, 1.0, f_lo, m, 0.0, -m) ** 2)
        if weight == 0.0:
            continue
        total += (sign
                  * alpha_factor(t.omega, omega_trap, epsilon)
                  * beta_factor(t)
                  * (t.upper.J.twice_value + 1)
                  * weight
                  / t.omega**3)
    if not matched:
        raise CatalogError(f"no catalog lines involve {state.level}")
    return prefactor * total / (2.0 * math.pi)


def shift_coefficient(catalog: Catalog, state: HyperfineState, omega_trap: float,
                      epsilon: float = DEFAULT_RESONANCE_EPSILON) -> float:
    """Shift per unit intensity for one state, Hz/(W/m^2).

    With mF unset the coefficient is averaged over the 2F+1 sublevels
    (uniform population), which for ground levels differs from any single
    sublevel by well under a part in 10^6.
    """
    if state.mF is None:
        subs = list(state.sublevels())
        return math.fsum(
            _coefficient_single_mf(catalog, s, omega_trap, epsilon) for s in subs
        ) / len(subs)
    return _coefficient_single_mf(catalog, state, omega_trap, epsilon)


def light_shift(catalog: Catalog, beam: BeamGeometry, state: HyperfineState,
                x: float, y: float, z: float,
                epsilon: float = DEFAULT_RESONANCE_EPSILON) -> ShiftResult:
    """Light shift of one state at one point, Hz."""
    omega_trap = 2.0 * math.pi * CONSTANTS.c / beam.wavelength_m
    coeff = shift_coefficient(catalog, state, omega_trap, epsilon)
    intensity = float(beam.intensity(x, y, z))
    return ShiftResult(state=state, position_m=(x, y, z),
                       intensity_w_m2=intensity, shift_hz=coeff * intensity)


def shift_profile(catalog: Catalog, beam: BeamGeometry, state: HyperfineState,
                  axis: str, coords,
                  epsilon: float = DEFAULT_RESONANCE_EPSILON) -> list:
    """Light shift sampled along one axis through the focus.

    axis "x" walks the beam axis at y = z = 0; "y" and "z" walk a
    transverse line through the focal plane. coords are absolute
    positions (m) along the chosen axis.
    """
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    out = []
    for c in coords:
        if axis == "x":
            pos = (float(c), 0.0, 0.0)
        elif axis == "y":
            pos = (beam.focus_m, float(c), 0.0)
        else:
            pos = (beam.focus_m, 0.0, float(c))
        out.append(light_shift(catalog, beam, state, *pos, epsilon=epsilon))
    return out
