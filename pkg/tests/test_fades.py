"""Tests for singular-fade enumeration, counting, and collision constraints."""

from fractions import Fraction

import numpy as np
import pytest

from plnc import (
    FadeState,
    build_constellation,
    build_pam,
    build_psk,
    build_qam,
    constraints_for_fade,
    coprime_partner_counts,
    count_pam,
    count_psk,
    count_qam,
    count_qam_upper_bound,
    effective_constellation,
    enumerate_singular_fades,
    is_singular_fade,
    scaled_delta_plus,
)
from plnc.fades import group_complex
from plnc.gaussian import GaussianInt, gr_reduce

# closed-form counts, frozen independently of the enumeration code
PAM_COUNTS = {2: 2, 4: 14, 8: 70}
QAM_COUNTS = {4: 12, 16: 388, 64: 8324}
QAM_BOUNDS = {4: 12, 16: 532, 64: 12324}
PSK_COUNTS = {2: 2, 4: 12, 16: 912, 64: 63552}

# per-element coprime partner counts for 16-QAM, in scaled-difference order
QAM16_PARTNER_SEQUENCE = (11, 6, 6, 10, 10, 6, 10, 5, 5, 11, 11, 5)


class TestClosedFormCounts:
    @pytest.mark.parametrize("m,expected", sorted(PAM_COUNTS.items()))
    def test_pam(self, m: int, expected: int) -> None:
        assert count_pam(m) == expected

    @pytest.mark.parametrize("M,expected", sorted(QAM_COUNTS.items()))
    def test_qam(self, M: int, expected: int) -> None:
        assert count_qam(M) == expected

    @pytest.mark.parametrize("M,expected", sorted(PSK_COUNTS.items()))
    def test_psk(self, M: int, expected: int) -> None:
        assert count_psk(M) == expected

    @pytest.mark.parametrize("M,expected", sorted(QAM_BOUNDS.items()))
    def test_qam_upper_bound(self, M: int, expected: int) -> None:
        assert count_qam_upper_bound(M) == expected

    def test_bound_dominates_count(self) -> None:
        for M in (4, 16, 64):
            assert count_qam(M) <= count_qam_upper_bound(M)
        assert count_qam(4) == count_qam_upper_bound(4)


class TestEnumeration:
    @pytest.mark.parametrize("kind,M", [("pam", 2), ("pam", 4), ("pam", 8),
                                        ("qam", 4), ("qam", 16),
                                        ("psk", 2), ("psk", 4), ("psk", 8), ("psk", 16)])
    def test_matches_closed_form(self, kind: str, M: int) -> None:
        c = build_constellation(kind, M)
        n = len(enumerate_singular_fades(c))
        formula = {"pam": count_pam, "qam": count_qam, "psk": count_psk}[kind]
        assert n == formula(M)

    def test_pam4_exact_values(self) -> None:
        fades = enumerate_singular_fades(build_pam(4))
        got = sorted(f.exact.real for f in fades)
        magnitudes = [Fraction(1, 3), Fraction(1, 2), Fraction(2, 3),
                      Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)]
        assert got == sorted([m for m in magnitudes] + [-m for m in magnitudes])

    def test_all_enumerated_are_singular(self) -> None:
        for c in (build_pam(4), build_qam(4), build_psk(8)):
            for f in enumerate_singular_fades(c):
                assert is_singular_fade(c, f.approx)

    def test_sorted_and_distinct(self) -> None:
        fades = enumerate_singular_fades(build_qam(16))
        keys = [f.sort_key() for f in fades]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)

    def test_qam_set_closed_under_symmetries(self) -> None:
        # the ratio set is closed under inversion and unit rotation
        fades = enumerate_singular_fades(build_qam(4))
        exact = {(f.exact.real, f.exact.imag) for f in fades}

        def key(r):
            return (r.real, r.imag)

        for f in fades:
            assert key(f.exact.reciprocal()) in exact
            assert key(f.exact.times_unit(GaussianInt(0, 1))) in exact
            assert key(-f.exact) in exact

    def test_unit_fade_always_present(self) -> None:
        one = (Fraction(1), Fraction(0))
        for c in (build_pam(4), build_qam(16)):
            assert one in {(f.exact.real, f.exact.imag) for f in enumerate_singular_fades(c)}
        psk = enumerate_singular_fades(build_psk(8))
        assert any(abs(f.approx - 1) < 1e-9 for f in psk)


class TestCoprimePairs:
    def test_scaled_differences(self) -> None:
        sdp = scaled_delta_plus(build_qam(16))
        assert [str(x) for x in sdp] == ["1", "1+1j", "2", "1+2j", "2+1j", "2+2j",
                                         "3", "1+3j", "3+1j", "2+3j", "3+2j", "3+3j"]

    def test_partner_counts_sequence(self) -> None:
        counts = tuple(n for _, n in coprime_partner_counts(build_qam(16)))
        assert counts == QAM16_PARTNER_SEQUENCE

    def test_partner_counts_sum_is_twice_pair_count(self) -> None:
        # each unordered coprime pair is seen from both endpoints
        assert sum(QAM16_PARTNER_SEQUENCE) == 2 * 48


class TestIsSingularFade:
    def test_unit_fade(self) -> None:
        assert is_singular_fade(build_qam(16), 1.0)
        assert is_singular_fade(build_psk(16), 1.0)

    def test_generic_fade_is_regular(self) -> None:
        assert not is_singular_fade(build_qam(16), 0.917 + 0.133j)
        assert not is_singular_fade(build_pam(4), 1.01)

    def test_zero_fade(self) -> None:
        # z = 0 collapses the effective constellation onto one user's set
        assert is_singular_fade(build_qam(4), 0.0)


class TestConstraints:
    def test_pam4_unit_fade_structure(self) -> None:
        cs = constraints_for_fade(build_pam(4), 1.0)
        assert sorted(len(g) for g in cs.groups) == [2, 2, 3, 3, 4]
        assert cs.cell_count() == 14
        eff = effective_constellation(build_pam(4), 1.0)
        assert len(np.unique(np.round(eff, 9))) == 7

    def test_qam4_half_unit_fade_structure(self) -> None:
        z = 0.5 + 0.5j
        cs = constraints_for_fade(build_qam(4), z)
        assert [len(g) for g in cs.groups] == [2, 2, 2, 2]
        eff = effective_constellation(build_qam(4), z)
        distinct = {(round(v.real, 9), round(v.imag, 9)) for v in eff}
        assert len(distinct) == 12

    def test_groups_are_real_collisions(self) -> None:
        c = build_qam(16)
        for f in enumerate_singular_fades(c)[:40]:
            cs = constraints_for_fade(c, f)
            z = f.approx
            for group in cs.groups:
                vals = [complex(c.points[k]) + z * complex(c.points[l]) for k, l in group]
                assert max(abs(v - vals[0]) for v in vals) < 1e-6

    def test_exact_and_float_paths_agree(self) -> None:
        c = build_qam(4)
        exact = gr_reduce(GaussianInt(1, 1), GaussianInt(2, 0))
        by_exact = constraints_for_fade(c, exact)
        by_float = constraints_for_fade(c, 0.5 + 0.5j)
        assert by_exact.groups == by_float.groups

    def test_regular_fade_has_no_groups(self) -> None:
        cs = constraints_for_fade(build_qam(4), 0.917 + 0.133j)
        assert cs.groups == ()


class TestFadeState:
    def test_exact_round_trip(self) -> None:
        f = FadeState.from_exact(gr_reduce(GaussianInt(1, 1), GaussianInt(2, 0)))
        assert f.is_exact
        again = FadeState.from_json_obj(f.to_json_obj())
        assert again == f
        assert again.exact == f.exact

    def test_float_round_trip(self) -> None:
        f = FadeState.from_complex(0.3 - 1.7j)
        assert not f.is_exact
        again = FadeState.from_json_obj(f.to_json_obj())
        assert again == f

    def test_approx_matches_exact(self) -> None:
        f = FadeState.from_exact(gr_reduce(GaussianInt(1, 1), GaussianInt(2, 0)))
        assert f.approx == pytest.approx(0.5 + 0.5j)


class TestGroupComplex:
    def test_merges_within_tolerance(self) -> None:
        vals = np.array([1.0, 1.0 + 4e-10, 2.0, 2.0 - 3e-10, 5.0])
        assert group_complex(vals).tolist() == [0, 0, 1, 1, 2]

    def test_imaginary_separation(self) -> None:
        vals = np.array([1.0 + 1.0j, 1.0 + 2.0j, 1.0 + 1.0j + 1e-12j])
        ids = group_complex(vals)
        assert ids[0] == ids[2] != ids[1]
