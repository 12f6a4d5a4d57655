"""Light-shift engine tests.

Reference values for the bundled Rb-87 catalog were computed with an
independent script (50-digit mpmath where it matters) and frozen here.
"""
import math
import random

import pytest

from odtshift.atomic_data import (
    CONSTANTS,
    CatalogError,
    HyperfineState,
    bundled_catalog,
    parse_catalog,
)
from odtshift.beam import BeamGeometry
from odtshift.stark import (
    ResonanceError,
    alpha_factor,
    beta_factor,
    light_shift,
    shift_coefficient,
    shift_profile,
)

W0 = 17e-6
LAM = 1064e-9
OMEGA_TRAP = 2 * math.pi * CONSTANTS.c / LAM


@pytest.fixture(scope="module")
def catalog():
    return bundled_catalog()


@pytest.fixture
def beam():
    return BeamGeometry(power_w=1.0, waist_m=W0, wavelength_m=LAM)


def cycling_row(catalog):
    for t in catalog.transitions:
        if (str(t.lower.F), str(t.upper.F)) == ("2", "3") and t.upper.term == "5P3/2":
            return t
    raise AssertionError("cycling row missing from bundled catalog")


class TestAlphaFactor:
    def test_algebraic_example(self):
        # at omega_line = 2 omega_trap: 1/(3w) + 1/w = 4/(3w)
        w = 1.7e15
        assert alpha_factor(2 * w, w) == pytest.approx(4 / (3 * w), rel=1e-14)

    def test_d2_versus_1064(self, catalog):
        t = cycling_row(catalog)
        assert alpha_factor(t.omega, OMEGA_TRAP) == pytest.approx(
            1.7921874314527264e-15, rel=1e-12)

    def test_static_limit(self):
        w = 2.4e15
        assert alpha_factor(w, 0.0) == pytest.approx(2 / w, rel=1e-14)

    def test_resonant_raises(self):
        w = 2.4e15
        with pytest.raises(ResonanceError, match="resonant"):
            alpha_factor(w, w + 1.0)

    def test_epsilon_configurable(self):
        w = 2.4e15
        det = 5e9
        with pytest.raises(ResonanceError):
            alpha_factor(w, w - det, epsilon=1e10)
        assert alpha_factor(w, w - det, epsilon=1e9) > 0


class TestBetaFactor:
    def test_cycling_row_value(self, catalog):
        # with the Angstrom wavelength convention this is the partial
        # decay rate of the line, so it should land on the D2 linewidth
        b = beta_factor(cycling_row(catalog))
        assert b == pytest.approx(3.81165834e7, rel=1e-8)
        assert abs(b - 2 * math.pi * 6.0666e6) / (2 * math.pi * 6.0666e6) < 1e-3

    def test_quadratic_in_dipole(self, catalog):
        t = cycling_row(catalog)
        doubled = type(t)(
            lower=t.lower, upper=t.upper, wavelength_nm=t.wavelength_nm,
            dipole_au=2 * t.dipole_au, linewidth_mhz=t.linewidth_mhz)
        assert beta_factor(doubled) == pytest.approx(4 * beta_factor(t), rel=1e-12)

    def test_zero_dipole(self, catalog):
        t = cycling_row(catalog)
        dark = type(t)(
            lower=t.lower, upper=t.upper, wavelength_nm=t.wavelength_nm,
            dipole_au=0.0, linewidth_mhz=t.linewidth_mhz)
        assert beta_factor(dark) == 0.0


class TestShiftCoefficient:
    def test_ground_f2_frozen_value(self, catalog):
        state = HyperfineState("5S1/2", 0.5, 2, 0)
        c = shift_coefficient(catalog, state, OMEGA_TRAP)
        assert c == pytest.approx(-3.188319211601e-3, rel=1e-9)

    def test_ground_mf_degeneracy(self, catalog):
        for f in (1, 2):
            vals = [
                shift_coefficient(catalog, s, OMEGA_TRAP)
                for s in HyperfineState("5S1/2", 0.5, f).sublevels()
            ]
            spread = (max(vals) - min(vals)) / abs(vals[0])
            assert spread < 1e-6

    def test_excited_f3_splits(self, catalog):
        vals = [
            shift_coefficient(catalog, s, OMEGA_TRAP)
            for s in HyperfineState("5P3/2", 1.5, 3).sublevels()
        ]
        spread = (max(vals) - min(vals)) / abs(vals[0])
        assert spread > 1e-3

    def test_unknown_state(self, catalog):
        with pytest.raises(CatalogError):
            shift_coefficient(catalog, HyperfineState("7S1/2", 0.5, 2, 0), OMEGA_TRAP)


class TestLightShift:
    def test_focus_anchor(self, catalog, beam):
        state = HyperfineState("5S1/2", 0.5, 2, 0)
        res = light_shift(catalog, beam, state, 0.0, 0.0, 0.0)
        assert res.shift_hz == pytest.approx(-7.023346e6, rel=1e-4)
        assert res.shift_hz == pytest.approx(-7.01e6, rel=0.03)

    def test_linear_in_power(self, catalog, beam):
        state = HyperfineState("5S1/2", 0.5, 2, 0)
        double = BeamGeometry(power_w=2.0, waist_m=W0, wavelength_m=LAM)
        a = light_shift(catalog, beam, state, 0.0, 1e-5, 0.0).shift_hz
        b = light_shift(catalog, double, state, 0.0, 1e-5, 0.0).shift_hz
        assert b == pytest.approx(2 * a, rel=1e-12)

    def test_factorizes_into_coeff_times_intensity(self, catalog, beam):
        state = HyperfineState("5S1/2", 0.5, 1, -1)
        rng = random.Random(20260819)
        for _ in range(25):
            x = rng.uniform(-2e-3, 2e-3)
            y = rng.uniform(-3e-5, 3e-5)
            z = rng.uniform(-3e-5, 3e-5)
            got = light_shift(catalog, beam, state, x, y, z).shift_hz
            want = shift_coefficient(catalog, state, OMEGA_TRAP) * beam.intensity(x, y, z)
            assert got == pytest.approx(want, rel=1e-12)

    def test_zero_power_zero_shift(self, catalog):
        dark = BeamGeometry(power_w=0.0, waist_m=W0, wavelength_m=LAM)
        state = HyperfineState("5S1/2", 0.5, 2, 0)
        assert light_shift(catalog, dark, state, 0.0, 0.0, 0.0).shift_hz == 0.0

    def test_excited_f3_per_sublevel_frozen(self, catalog, beam):
        # MHz at 1 W, 17 um waist; mF = -3..3
        want = [6.1796, 11.9736, 15.4501, 16.6089, 15.4501, 11.9736, 6.1796]
        for s, w in zip(HyperfineState("5P3/2", 1.5, 3).sublevels(), want):
            got = light_shift(catalog, beam, s, 0.0, 0.0, 0.0).shift_hz / 1e6
            assert got == pytest.approx(w, rel=1e-3)

    def test_excited_f1_per_sublevel_frozen(self, catalog, beam):
        want = [14.2911, 7.3384, 14.2911]
        for s, w in zip(HyperfineState("5P3/2", 1.5, 1).sublevels(), want):
            got = light_shift(catalog, beam, s, 0.0, 0.0, 0.0).shift_hz / 1e6
            assert got == pytest.approx(w, rel=1e-3)

    def test_result_carries_inputs(self, catalog, beam):
        state = HyperfineState("5S1/2", 0.5, 2, 0)
        res = light_shift(catalog, beam, state, 1e-4, 2e-6, -3e-6)
        assert res.state == state
        assert res.position_m == (1e-4, 2e-6, -3e-6)

    def test_resonant_trap_raises(self, beam):
        text = (
            "atom Rb87 nuclear_2I 3\n"
            "5S1/2 1 4 5P3/2 3 6 1064.0 4.22752 6.0666\n"
        )
        cat = parse_catalog(text)
        state = HyperfineState("5S1/2", 0.5, 2, 0)
        with pytest.raises(ResonanceError):
            light_shift(cat, beam, state, 0.0, 0.0, 0.0)


class TestShiftProfile:
    def test_radial_profile_even_and_gaussian(self, catalog, beam):
        state = HyperfineState("5S1/2", 0.5, 2, 0)
        zs = [-W0, -W0 / 2, 0.0, W0 / 2, W0]
        prof = shift_profile(catalog, beam, state, "z", zs)
        shifts = [p.shift_hz for p in prof]
        assert shifts[0] == pytest.approx(shifts[4], rel=1e-12)
        assert shifts[1] == pytest.approx(shifts[3], rel=1e-12)
        assert shifts[2] == min(shifts)  # deepest at focus (negative)
        assert shifts[0] == pytest.approx(shifts[2] * math.exp(-2), rel=1e-12)

    def test_axial_profile_lorentzian(self, catalog, beam):
        state = HyperfineState("5S1/2", 0.5, 2, 0)
        xr = beam.rayleigh_m
        prof = shift_profile(catalog, beam, state, "x", [0.0, xr])
        assert prof[1].shift_hz == pytest.approx(prof[0].shift_hz / 2, rel=1e-12)

    def test_transverse_axes_pass_through_focus(self, catalog):
        b = BeamGeometry(power_w=1.0, waist_m=W0, wavelength_m=LAM, focus_m=8e-3)
        state = HyperfineState("5S1/2", 0.5, 2, 0)
        prof = shift_profile(catalog, b, state, "y", [0.0])
        anchor = light_shift(catalog, b, state, 8e-3, 0.0, 0.0)
        assert prof[0].shift_hz == anchor.shift_hz

    def test_bad_axis(self, catalog, beam):
        state = HyperfineState("5S1/2", 0.5, 2, 0)
        with pytest.raises(ValueError):
            shift_profile(catalog, beam, state, "r", [0.0])
