"""Wigner symbol tests: spot values, symmetries, orthogonality, and a full
sweep against the independent big-integer oracle in _wigner_oracle."""
import math
import random
from concurrent.futures import ThreadPoolExecutor

import pytest

from odtshift.angular import AngularMomentumError, HalfInt, wigner3j, wigner6j

from _wigner_oracle import contraction_6j, oracle_3j, oracle_6j, sweep_against_oracle


def _w3t(tj1, tj2, tj3, tm1, tm2, tm3):
    # twice-integer front end used by the sweep
    return wigner3j(tj1 / 2, tj2 / 2, tj3 / 2, tm1 / 2, tm2 / 2, tm3 / 2)


def _w6t(ta, tb, tc, td, te, tf):
    return wigner6j(ta / 2, tb / 2, tc / 2, td / 2, te / 2, tf / 2)


class TestHalfInt:
    def test_of_accepts_ints_halves_and_fractions(self):
        assert HalfInt.of(2).twice_value == 4
        assert HalfInt.of(1.5).twice_value == 3
        assert HalfInt.of(HalfInt(3)).twice_value == 3
        assert float(HalfInt(3)) == 1.5

    def test_of_rejects_non_half_integers(self):
        with pytest.raises(AngularMomentumError):
            HalfInt.of(0.3)

    def test_str(self):
        assert str(HalfInt(3)) == "3/2"
        assert str(HalfInt(4)) == "2"


class TestSpotValues:
    def test_trivial_000(self):
        assert wigner3j(0, 0, 0, 0, 0, 0) == 1.0

    def test_j_j_zero_closed_form(self):
        # (j j 0; m -m 0) = (-1)^(j-m)/sqrt(2j+1)
        assert wigner3j(1, 1, 0, 1, -1, 0) == pytest.approx(1 / math.sqrt(3), rel=1e-15)
        assert wigner3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / math.sqrt(3), rel=1e-15)

    def test_odd_parity_all_m_zero(self):
        assert wigner3j(1, 1, 1, 0, 0, 0) == 0.0

    def test_211_000(self):
        # sqrt(30)/15, positive
        assert wigner3j(2, 1, 1, 0, 0, 0) == pytest.approx(math.sqrt(30) / 15, rel=1e-15)

    def test_6j_all_ones(self):
        assert wigner6j(1, 1, 1, 1, 1, 1) == pytest.approx(1 / 6, rel=1e-15)

    def test_6j_half_integer(self):
        assert wigner6j(0.5, 0.5, 1, 0.5, 0.5, 1) == pytest.approx(1 / 6, rel=1e-15)

    def test_6j_triangle_violation_is_zero(self):
        assert wigner6j(1, 1, 3, 1, 1, 1) == 0.0


class TestSelectionRules:
    def test_m_sum_nonzero(self):
        assert wigner3j(1, 1, 1, 1, 0, 0) == 0.0

    def test_triangle_violation(self):
        assert wigner3j(1, 1, 3, 0, 0, 0) == 0.0

    def test_half_integer_triad_sum_is_zero(self):
        # three spin-1/2 cannot couple to zero: every valid m choice breaks
        # the m-sum rule, and the 6j triad check catches it directly
        assert wigner3j(0.5, 0.5, 0.5, 0.5, -0.5, 0.5) == 0.0
        assert wigner6j(0.5, 0.5, 0.5, 0.5, 0.5, 0.5) == 0.0


class TestDomainErrors:
    def test_m_exceeds_j(self):
        with pytest.raises(AngularMomentumError):
            wigner3j(1, 1, 1, 2, -1, -1)

    def test_jm_parity_mismatch(self):
        with pytest.raises(AngularMomentumError):
            wigner3j(1, 1, 1, 0.5, 0, -0.5)

    def test_negative_j(self):
        with pytest.raises(AngularMomentumError):
            wigner3j(-1, 1, 1, 0, 0, 0)
        with pytest.raises(AngularMomentumError):
            wigner6j(-0.5, 0.5, 1, 0.5, 0.5, 1)

    def test_non_half_integer(self):
        with pytest.raises(AngularMomentumError):
            wigner3j(0.3, 1, 1, 0, 0, 0)


class TestSymmetries:
    def _random_valid_3j(self, rng):
        while True:
            tj1 = rng.randint(0, 10)
            tj2 = rng.randint(0, 10)
            tj3 = rng.randint(abs(tj1 - tj2), tj1 + tj2)
            if (tj1 + tj2 + tj3) % 2:
                continue
            tm1 = rng.randrange(-tj1, tj1 + 1, 2) if tj1 else 0
            tm2 = rng.randrange(-tj2, tj2 + 1, 2) if tj2 else 0
            tm3 = -tm1 - tm2
            if abs(tm3) <= tj3:
                return tj1, tj2, tj3, tm1, tm2, tm3

    def test_3j_column_permutations(self):
        rng = random.Random(421)
        for _ in range(200):
            tj1, tj2, tj3, tm1, tm2, tm3 = self._random_valid_3j(rng)
            v = _w3t(tj1, tj2, tj3, tm1, tm2, tm3)
            even = _w3t(tj2, tj3, tj1, tm2, tm3, tm1)
            odd = _w3t(tj2, tj1, tj3, tm2, tm1, tm3)
            flip = _w3t(tj1, tj2, tj3, -tm1, -tm2, -tm3)
            ph = -1.0 if ((tj1 + tj2 + tj3) // 2) % 2 else 1.0
            assert even == pytest.approx(v, abs=1e-15)
            assert odd == pytest.approx(ph * v, abs=1e-15)
            assert flip == pytest.approx(ph * v, abs=1e-15)

    def test_6j_column_and_row_symmetries(self):
        rng = random.Random(137)
        found = 0
        while found < 100:
            tjs = [rng.randint(0, 8) for _ in range(6)]
            v = _w6t(*tjs)
            if v == 0.0:
                continue
            found += 1
            ta, tb, tc, td, te, tf = tjs
            assert _w6t(tb, ta, tc, te, td, tf) == pytest.approx(v, rel=1e-13)
            assert _w6t(tc, tb, ta, tf, te, td) == pytest.approx(v, rel=1e-13)
            # swap upper/lower in first two columns
            assert _w6t(td, te, tc, ta, tb, tf) == pytest.approx(v, rel=1e-13)


class TestOracleSweep:
    def test_full_sweep_matches_oracle(self):
        worst3, n3, worst6, n6 = sweep_against_oracle(_w3t, _w6t, tjmax=12)
        assert n3 > 10000 and n6 > 10000
        assert worst3 < 1e-13, f"3j worst rel err {worst3:.3e} over {n3} args"
        assert worst6 < 1e-13, f"6j worst rel err {worst6:.3e} over {n6} args"

    def test_derived_spot_values_match_oracle(self):
        assert wigner3j(2, 1, 1, 0, 0, 0) == pytest.approx(
            oracle_3j(4, 2, 2, 0, 0, 0), rel=1e-15)
        assert wigner6j(1, 1, 1, 1, 1, 1) == pytest.approx(
            oracle_6j(2, 2, 2, 2, 2, 2), rel=1e-15)


class TestContraction:
    def test_6j_equals_four_3j_contraction(self):
        cases = [
            (2, 2, 2, 2, 2, 2),
            (1, 1, 2, 1, 1, 2),
            (2, 4, 6, 4, 2, 4),
            (3, 3, 2, 3, 3, 2),
            (4, 4, 4, 4, 4, 4),
            (1, 3, 2, 3, 1, 2),
            (6, 4, 2, 4, 6, 2),
        ]
        for tjs in cases:
            assert _w6t(*tjs) == pytest.approx(contraction_6j(*tjs), abs=1e-12)


class TestOrthogonality:
    def test_3j_diagonal_sums(self):
        # sum over m1 (m2 fixed by m-sum) of (2j3+1) 3j^2 = 1
        for tj1 in range(0, 13):
            for tj2 in range(0, 13):
                for tj3 in range(abs(tj1 - tj2), min(12, tj1 + tj2) + 1, 2):
                    for tm3 in range(-tj3, tj3 + 1, 2):
                        acc = 0.0
                        for tm1 in range(-tj1, tj1 + 1, 2):
                            tm2 = -tm3 - tm1
                            if abs(tm2) > tj2:
                                continue
                            acc += (tj3 + 1) * _w3t(tj1, tj2, tj3, tm1, tm2, tm3) ** 2
                        assert abs(acc - 1.0) < 1e-12, (tj1, tj2, tj3, tm3)

    def test_3j_off_diagonal_sums(self):
        # different j3, same m3: the cross sum must vanish
        rng = random.Random(99)
        checked = 0
        while checked < 300:
            tj1 = rng.randint(0, 12)
            tj2 = rng.randint(0, 12)
            choices = list(range(abs(tj1 - tj2), min(12, tj1 + tj2) + 1, 2))
            if len(choices) < 2:
                continue
            tj3, tj3p = rng.sample(choices, 2)
            lo = min(tj3, tj3p)
            tm3 = rng.randrange(-lo, lo + 1, 2) if lo else 0
            acc = 0.0
            for tm1 in range(-tj1, tj1 + 1, 2):
                tm2 = -tm3 - tm1
                if abs(tm2) > tj2:
                    continue
                acc += (tj3 + 1) * _w3t(tj1, tj2, tj3, tm1, tm2, tm3) \
                    * _w3t(tj1, tj2, tj3p, tm1, tm2, tm3)
            assert abs(acc) < 1e-12
            checked += 1


class TestPurityAndThreads:
    def test_repeat_calls_identical(self):
        a = wigner3j(2, 1, 2, 1, 0, -1)
        for _ in range(3):
            assert wigner3j(2, 1, 2, 1, 0, -1) == a

    def test_threaded_equals_serial(self):
        args = []
        rng = random.Random(5)
        for _ in range(400):
            tj1 = rng.randint(0, 8)
            tj2 = rng.randint(0, 8)
            tj3 = rng.randint(0, 8)
            tm1 = rng.randrange(-tj1, tj1 + 1, 2) if tj1 else 0
            tm2 = rng.randrange(-tj2, tj2 + 1, 2) if tj2 else 0
            args.append((tj1, tj2, tj3, tm1, tm2, -tm1 - tm2))
        ok = [a for a in args if abs(a[5]) <= a[2] and (a[2] - a[5]) % 2 == 0]
        serial = [_w3t(*a) for a in ok]
        with ThreadPoolExecutor(max_workers=8) as pool:
            threaded = list(pool.map(lambda a: _w3t(*a), ok))
        assert threaded == serial
