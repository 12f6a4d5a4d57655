"""Effective absorption cross-sections of a probe inside trap light.

The table built here resolves the probe manifold into Zeeman components:
one entry per (lower mF, photon component dm, upper mF') with a relative
coupling from the usual 6j/3j contraction, scaled so the stretched
sigma+/- component of the reference (cycling) line is exactly
3*lambda^2/(2*pi).

At a point in the trap each component is detuned by the differential
light shift of its two levels; a Lorentzian of width
gamma_line + gamma_probe (two Lorentzians convolve to the sum of widths)
turns that into a suppression factor. Polarization enters as fixed
weights over dm: pure pi/sigma models take one component at weight 1,
the isotropic model takes all three at 1/3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angular import wigner3j, wigner6j
from .atomic_data import (
    CONSTANTS,
    Catalog,
    CatalogError,
    HalfInt,
    HyperfineState,
)
from .beam import BeamGeometry
from .stark import shift_coefficient

_POLARIZATION_WEIGHTS = {
    "pi": {0: 1.0},
    "sigma_plus": {+1: 1.0},
    "sigma_minus": {-1: 1.0},
    "isotropic": {-1: 1.0 / 3.0, 0: 1.0 / 3.0, +1: 1.0 / 3.0},
}


@dataclass(frozen=True)
class ProbeConfig:
    """Imaging probe: angular frequency, own linewidth, polarization model."""

    omega_rad_s: float
    linewidth_rad_s: float
    polarization_model: str

    def __post_init__(self) -> None:
        if self.omega_rad_s <= 0:
            raise ValueError(f"probe frequency must be > 0, got {self.omega_rad_s}")
        if self.linewidth_rad_s < 0:
            raise ValueError(
                f"probe linewidth must be >= 0, got {self.linewidth_rad_s}")
        if self.polarization_model not in _POLARIZATION_WEIGHTS:
            raise ValueError(
                f"unknown polarization model {self.polarization_model!r}; "
                f"expected one of {sorted(_POLARIZATION_WEIGHTS)}")


def resonant_probe(catalog: Catalog, f_lower, f_upper,
                   polarization: str = "isotropic",
                   linewidth_rad_s: float = 0.0,
                   lower_term: str = "5S1/2",
                   upper_term: str = "5P3/2") -> ProbeConfig:
    """Probe tuned to the unshifted F -> F' line of the catalog."""
    tf_lo = HalfInt.of(f_lower).twice_value
    tf_up = HalfInt.of(f_upper).twice_value
    for t in catalog.transitions:
        if (t.lower.term == lower_term and t.upper.term == upper_term
                and t.lower.F.twice_value == tf_lo
                and t.upper.F.twice_value == tf_up):
            return ProbeConfig(omega_rad_s=t.omega, linewidth_rad_s=linewidth_rad_s,
                               polarization_model=polarization)
    raise CatalogError(
        f"no {lower_term} F={f_lower} -> {upper_term} F'={f_upper} line in catalog")


@dataclass(frozen=True)
class CrossSectionEntry:
    """One Zeeman component of one probe line."""

    lower: HyperfineState
    upper: HyperfineState
    dm: int  # mF' - mF, the photon spherical component
    weight: float
    sigma_m2: float
    omega_line: float
    gamma_line: float


@dataclass(frozen=True)
class CrossSectionTable:
    entries: tuple
    sigma0_m2: float
    polarization_model: str

    def entries_for(self, f_level, m_level=None) -> tuple:
        tf = HalfInt.of(f_level).twice_value
        tm = None if m_level is None else HalfInt.of(m_level).twice_value
        return tuple(
            e for e in self.entries
            if e.lower.F.twice_value == tf
            and (tm is None or e.lower.mF.twice_value == tm)
        )


def _coupling(transition, nuclear_spin: HalfInt, m_lower: HalfInt, dm: int) -> float:
    f_lo = float(transition.lower.F)
    f_up = float(transition.upper.F)
    m_lo = float(m_lower)
    m_up = m_lo + dm
    if abs(m_up) > f_up:
        return 0.0
    six = wigner6j(float(transition.lower.J), float(transition.upper.J), 1.0,
                   f_up, f_lo, float(nuclear_spin))
    three = wigner3j(f_up, 1.0, f_lo, m_up, -float(dm), -m_lo)
    return ((transition.lower.F.twice_value + 1)
            * (transition.upper.F.twice_value + 1) * six**2 * three**2)


def base_cross_sections(catalog: Catalog, probe: ProbeConfig,
                        lower_term: str = "5S1/2",
                        upper_term: str = "5P3/2") -> CrossSectionTable:
    """Zeeman-resolved cross-section table for one probe manifold.

    Every line of the manifold must carry a linewidth. Entries with zero
    polarization weight or zero coupling are dropped.
    """
    rows = [t for t in catalog.transitions
            if t.lower.term == lower_term and t.upper.term == upper_term]
    if not rows:
        raise CatalogError(f"no {lower_term} -> {upper_term} lines in catalog")
    for t in rows:
        if t.linewidth_mhz is None:
            raise CatalogError(
                f"line {t.lower} -> {t.upper} has no linewidth; "
                "cross-sections need one")

    # reference line: highest-F pair, i.e. the cycling line of the manifold
    ref = max(rows, key=lambda t: (t.lower.F.twice_value, t.upper.F.twice_value))
    sigma0 = 3.0 * (ref.wavelength_nm * 1e-9) ** 2 / (2.0 * math.pi)
    stretched = _coupling(ref, catalog.nuclear_spin, ref.lower.F, +1)

    weights = _POLARIZATION_WEIGHTS[probe.polarization_model]
    entries = []
    for t in rows:
        for lo in t.lower.sublevels():
            for dm, weight in sorted(weights.items()):
                u = _coupling(t, catalog.nuclear_spin, lo.mF, dm)
                if u == 0.0:
                    continue
                upper = HyperfineState(
                    t.upper.term, t.upper.J, t.upper.F,
                    HalfInt(lo.mF.twice_value + 2 * dm))
                entries.append(CrossSectionEntry(
                    lower=lo, upper=upper, dm=dm, weight=weight,
                    sigma_m2=sigma0 * u / stretched,
                    omega_line=t.omega, gamma_line=t.gamma))
    return CrossSectionTable(entries=tuple(entries), sigma0_m2=sigma0,
                             polarization_model=probe.polarization_model)


def naive_sigma0(table: CrossSectionTable, probe: ProbeConfig, f_level) -> float:
    """mF-averaged cross-section of one F level with no trap light, m^2.

    This is the single number a shift-blind atom counter divides by; it
    needs no beam because zero intensity leaves every line at its bare
    detuning from the probe.
    """
    entries = table.entries_for(f_level)
    if not entries:
        raise CatalogError(f"no cross-section entries for F={f_level}")
    acc = 0.0
    for e in entries:
        det = probe.omega_rad_s - e.omega_line
        width = e.gamma_line + probe.linewidth_rad_s
        acc += e.weight * e.sigma_m2 / (1.0 + 4.0 * (det / width) ** 2)
    return acc / (HalfInt.of(f_level).twice_value + 1)


def _sum_over_entries(catalog: Catalog, probe: ProbeConfig, entries,
                      omega_trap: float, intensity):
    acc = np.zeros_like(np.asarray(intensity, dtype=float))
    for e in entries:
        c_lo = shift_coefficient(catalog, e.lower, omega_trap)
        c_up = shift_coefficient(catalog, e.upper, omega_trap)
        det = (probe.omega_rad_s - e.omega_line
               - 2.0 * math.pi * (c_up - c_lo) * intensity)
        width = e.gamma_line + probe.linewidth_rad_s
        acc = acc + e.weight * e.sigma_m2 / (1.0 + 4.0 * (det / width) ** 2)
    return acc


def sigma_eff_vs_intensity(catalog: Catalog, table: CrossSectionTable,
                           probe: ProbeConfig, f_level, omega_trap: float,
                           intensity):
    """mF-averaged cross-section as a pure function of trap intensity.

    The position dependence of sigma_eff enters only through the local
    intensity, so callers integrating over space can tabulate this once
    and interpolate.
    """
    entries = table.entries_for(f_level)
    if not entries:
        raise CatalogError(f"no cross-section entries for F={f_level}")
    acc = _sum_over_entries(catalog, probe, entries, omega_trap, intensity)
    acc = acc / (HalfInt.of(f_level).twice_value + 1)
    return float(acc) if acc.ndim == 0 else acc


def _accumulate(catalog: Catalog, beam: BeamGeometry, probe: ProbeConfig,
                entries, x, y, z):
    omega_trap = 2.0 * math.pi * CONSTANTS.c / beam.wavelength_m
    return _sum_over_entries(catalog, probe, entries, omega_trap,
                             beam.intensity(x, y, z))


def sigma_eff(catalog: Catalog, beam: BeamGeometry, table: CrossSectionTable,
              probe: ProbeConfig, f_level, m_level, x, y, z):
    """Effective cross-section of one sublevel at one point, m^2.

    x, y, z may be arrays (broadcast together); the result follows suit.
    """
    entries = table.entries_for(f_level, m_level)
    if not entries:
        raise CatalogError(
            f"no cross-section entries for F={f_level}, mF={m_level}")
    acc = _accumulate(catalog, beam, probe, entries, x, y, z)
    return float(acc) if acc.ndim == 0 else acc


def sigma_eff_averaged(catalog: Catalog, beam: BeamGeometry,
                       table: CrossSectionTable, probe: ProbeConfig,
                       f_level, x, y, z):
    """Cross-section averaged over uniformly populated mF of one F level."""
    entries = table.entries_for(f_level)
    if not entries:
        raise CatalogError(f"no cross-section entries for F={f_level}")
    acc = _accumulate(catalog, beam, probe, entries, x, y, z)
    acc = acc / (HalfInt.of(f_level).twice_value + 1)
    return float(acc) if acc.ndim == 0 else acc