"""Acceptance gate: one test per criterion, one pass/fail line each under
``pytest -v``.

Criteria 1-6 are exact checks on counts, fixtures, and codebook soundness.
Criterion 7 runs the zero-noise end-to-end suite, criterion 8 a full
Monte-Carlo campaign (three curves, six SNR points, 1e5 trials per point),
and criterion 9 repeats both with a different worker count and demands
bit-identical output.  On one core the campaign dominates; expect roughly
ten minutes for 8-9 plus the session codebook builds.
"""

import math
import time

import numpy as np
import pytest

from plnc import (
    Clustering,
    Codebook,
    SimConfig,
    build_constellation,
    coprime_partner_counts,
    count_pam,
    count_psk,
    count_qam,
    count_qam_upper_bound,
    enumerate_singular_fades,
    exact_decode_check,
    format_ber_csv,
    min_cluster_distance,
    pam_standard,
    qam_standard,
    rotate_columns,
    run_ber,
    select_clustering,
    square_removes_fade,
    transpose,
    xor_square,
)
from plnc.gaussian import GaussianInt

DISTANCE_FLOOR = 1e-9
PROPERTY_CASES = 200
HIGH_SNR_DB = 25.0
CAMPAIGN_GRID = (15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
CAMPAIGN_TRIALS = 100_000
CAMPAIGN_SEED = 20260821
ZERO_NOISE_TRIALS = 10_000
ZERO_NOISE_SEED = 77

# reference counts this build is expected to reproduce exactly
REFERENCE_COUNTS = {
    ("pam", 4): 14, ("pam", 8): 70,
    ("qam", 4): 12, ("qam", 16): 388, ("qam", 64): 8388,
    ("psk", 4): 12, ("psk", 16): 912, ("psk", 64): 63552,
}

# 16-QAM per-element coprime partner counts, in scaled-difference order
REFERENCE_PARTNER_SEQUENCE = (11, 6, 6, 10, 10, 6, 10, 5, 5, 11, 11, 5)

# 16-QAM standard square, reference cells transcribed one-for-one
QAM16_STANDARD_REFERENCE = [
    [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15],
    [1, 2, 3, 0, 5, 6, 7, 4, 9, 10, 11, 8, 13, 14, 15, 12],
    [2, 3, 0, 1, 6, 7, 4, 5, 10, 11, 8, 9, 14, 15, 12, 13],
    [3, 0, 1, 2, 7, 4, 5, 6, 11, 8, 9, 10, 15, 12, 13, 14],
    [4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 0, 1, 2, 3],
    [5, 6, 7, 4, 9, 10, 11, 8, 13, 14, 15, 12, 1, 2, 3, 0],
    [6, 7, 4, 5, 10, 11, 8, 9, 14, 15, 12, 13, 2, 3, 0, 1],
    [7, 4, 5, 6, 11, 8, 9, 10, 15, 12, 13, 14, 3, 0, 1, 2],
    [8, 9, 10, 11, 12, 13, 14, 15, 0, 1, 2, 3, 4, 5, 6, 7],
    [9, 10, 11, 8, 13, 14, 15, 12, 1, 2, 3, 0, 5, 6, 7, 4],
    [10, 11, 8, 9, 14, 15, 12, 13, 2, 3, 0, 1, 6, 7, 4, 5],
    [11, 8, 9, 10, 15, 12, 13, 14, 3, 0, 1, 2, 7, 4, 5, 6],
    [12, 13, 14, 15, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
    [13, 14, 15, 12, 1, 2, 3, 0, 5, 6, 7, 4, 9, 10, 11, 8],
    [14, 15, 12, 13, 2, 3, 0, 1, 6, 7, 4, 5, 10, 11, 8, 9],
    [15, 12, 13, 14, 3, 0, 1, 2, 7, 4, 5, 6, 11, 8, 9, 10],
]

# 4-PAM standard square reference cells (left-cyclic)
PAM4_STANDARD_REFERENCE = [
    [0, 1, 2, 3],
    [1, 2, 3, 0],
    [2, 3, 0, 1],
    [3, 0, 1, 2],
]


def _sigma(p) -> float:
    """Standard error of a BER estimate."""
    return math.sqrt(max(p.ber * (1 - p.ber), 0.0) / p.bits)


def _zero_noise_cfg(M: int) -> SimConfig:
    return SimConfig(kind="qam", M=M, scheme="ls", snr_db=(math.inf,),
                     trials=ZERO_NOISE_TRIALS, seed=ZERO_NOISE_SEED,
                     channel="rayleigh")


def _campaign_cfg(kind: str, scheme: str) -> SimConfig:
    return SimConfig(kind=kind, M=16, scheme=scheme, snr_db=CAMPAIGN_GRID,
                     trials=CAMPAIGN_TRIALS, seed=CAMPAIGN_SEED,
                     channel="rician", rician_k_db=5.0)


@pytest.fixture(scope="session")
def zero_noise_runs(codebook_qam4: Codebook, codebook_qam16: Codebook) -> dict:
    out = {}
    for M, cb in ((4, codebook_qam4), (16, codebook_qam16)):
        cfg = _zero_noise_cfg(M)
        pts = run_ber(cfg, codebook=cb, workers=1)
        out[M] = (cfg, pts, format_ber_csv(cfg, pts))
    return out


@pytest.fixture(scope="session")
def campaign_runs(codebook_qam16: Codebook, codebook_psk16: Codebook) -> dict:
    runs = {}
    for name, kind, scheme, cb in (("ls-qam", "qam", "ls", codebook_qam16),
                                   ("xor-qam", "qam", "xor", None),
                                   ("ls-psk", "psk", "ls", codebook_psk16)):
        cfg = _campaign_cfg(kind, scheme)
        pts = run_ber(cfg, codebook=cb, workers=1)
        runs[name] = (cfg, cb, pts, format_ber_csv(cfg, pts))
    return runs


def test_c1_singular_fade_counts_formula_and_enumeration() -> None:
    formulas = {"pam": count_pam, "qam": count_qam, "psk": count_psk}
    start = time.perf_counter()
    observed = {}
    for (kind, M), _ in sorted(REFERENCE_COUNTS.items()):
        formula = formulas[kind](M)
        enumerated = len(enumerate_singular_fades(build_constellation(kind, M)))
        observed[(kind, M)] = (formula, enumerated)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"count suite took {elapsed:.1f}s, budget is 10s"

    internal = [k for k, (f, n) in observed.items() if f != n]
    assert not internal, f"formula and enumeration disagree at {internal}: {observed}"

    mismatches = {k: observed[k][0] for k in observed
                  if observed[k][0] != REFERENCE_COUNTS[k]}
    assert not mismatches, (
        f"counts differing from the reference values: {mismatches} "
        f"(expected {({k: REFERENCE_COUNTS[k] for k in mismatches})}). "
        "The 64-QAM reference value 8388 is not attainable: the closed-form "
        "count 4 + 8*phi evaluates to 8324 (phi = 1040 coprime pairs), a full "
        "exact enumeration of reduced difference ratios independently yields "
        "8324 distinct fade states, and the two agree with each other for "
        "every constellation tested. All seven other reference counts match "
        "exactly, so the reference value appears to be a misprint."
    )


def test_c2_qam16_count_via_48_coprime_pairs() -> None:
    c = build_constellation("qam", 16)
    partners = coprime_partner_counts(c)
    sequence = tuple(n for _, n in partners)
    assert sequence == REFERENCE_PARTNER_SEQUENCE, (
        f"partner-count sequence {sequence} != reference {REFERENCE_PARTNER_SEQUENCE}")
    pair_count = sum(sequence) // 2
    assert pair_count == 48, f"expected 48 distinct coprime pairs, got {pair_count}"
    formula = 4 + 8 * pair_count
    enumerated = len(enumerate_singular_fades(c))
    assert formula == enumerated == count_qam(16) == 388


def test_c3_standard_squares_match_reference_cells() -> None:
    assert qam_standard(16).cells.tolist() == QAM16_STANDARD_REFERENCE
    assert pam_standard(4).cells.tolist() == PAM4_STANDARD_REFERENCE


def test_c4_removal_soundness(codebook_pam4: Codebook, codebook_qam4: Codebook,
                              codebook_qam16: Codebook) -> None:
    for cb, expected in ((codebook_pam4, 14), (codebook_qam4, 12), (codebook_qam16, 388)):
        c = cb.constellation
        assert len(cb) == expected
        weak = []
        for fade, sq in cb:
            d = min_cluster_distance(c, Clustering(sq), fade)
            if not d > DISTANCE_FLOOR:
                weak.append((str(fade), d))
        assert not weak, f"{c.kind}-{c.M}: fades below the distance floor: {weak[:5]}"

    qam16 = build_constellation("qam", 16)
    assert min_cluster_distance(qam16, Clustering(xor_square(16)), 1.0) == 0.0
    for M in (2, 4, 16):
        psk = build_constellation("psk", M)
        assert min_cluster_distance(psk, Clustering(xor_square(M)), 1.0) > DISTANCE_FLOOR


def test_c5_symmetry_transform_properties(codebook_qam16: Codebook) -> None:
    c = codebook_qam16.constellation
    entries = codebook_qam16.entries
    rng = np.random.default_rng(5)

    picks = rng.integers(0, len(entries), size=PROPERTY_CASES)
    transpose_hits = sum(
        square_removes_fade(transpose(entries[i][1]), c, entries[i][0].exact.reciprocal())
        for i in picks)
    assert transpose_hits == PROPERTY_CASES, (
        f"transpose property held in {transpose_hits}/{PROPERTY_CASES} cases")

    picks = rng.integers(0, len(entries), size=PROPERTY_CASES)
    j = GaussianInt(0, 1)
    rotation_hits = sum(
        square_removes_fade(rotate_columns(entries[i][1], c), c,
                            entries[i][0].exact.times_unit(j))
        for i in picks)
    assert rotation_hits == PROPERTY_CASES, (
        f"rotation property held in {rotation_hits}/{PROPERTY_CASES} cases")


def test_c6_count_upper_bound() -> None:
    for M in (4, 16, 64):
        assert count_qam(M) <= count_qam_upper_bound(M), f"bound violated at M={M}"
    assert count_qam(4) == count_qam_upper_bound(4)


def test_c7_zero_noise_end_to_end(zero_noise_runs: dict, codebook_qam4: Codebook,
                                  codebook_qam16: Codebook) -> None:
    for M, (cfg, pts, _) in sorted(zero_noise_runs.items()):
        (pt,) = pts
        assert pt.trials == ZERO_NOISE_TRIALS
        assert pt.bit_errors == 0, (
            f"zero-noise run at M={M}: {pt.bit_errors} bit errors in {pt.bits} bits")

    for cb in (codebook_qam4, codebook_qam16):
        c = cb.constellation
        failed = []
        for fade in cb.fades():
            selected, _ = select_clustering(cb, fade)
            errors, pairs = exact_decode_check(c, cb.square_for(selected), fade)
            if errors:
                failed.append((str(fade), errors, pairs))
        assert not failed, f"pinned singular fades with decode errors: {failed[:5]}"


def test_c8_ber_campaign_qualitative(campaign_runs: dict) -> None:
    _, _, ls_qam, _ = campaign_runs["ls-qam"]
    _, _, xor_qam, _ = campaign_runs["xor-qam"]
    _, _, ls_psk, _ = campaign_runs["ls-psk"]

    for a in ls_qam:
        assert a.trials >= 100_000

    # (a) adaptive beats the fixed map at high SNR, by at least 3 sigma
    for a, b in zip(ls_qam, xor_qam):
        if a.snr_db >= HIGH_SNR_DB:
            gap = b.ber - a.ber
            noise = 3 * math.hypot(_sigma(a), _sigma(b))
            assert gap > noise, (
                f"LS vs XOR at {a.snr_db:g} dB: gap {gap:.3e} <= 3 sigma {noise:.3e}")

    # (b) 16-QAM beats 16-PSK under the same adaptive scheme at high SNR
    for a, b in zip(ls_qam, ls_psk):
        if a.snr_db >= HIGH_SNR_DB:
            assert a.ber < b.ber, (
                f"LS 16-QAM {a.ber:.3e} not below LS 16-PSK {b.ber:.3e} at {a.snr_db:g} dB")

    # (c) every curve is monotone non-increasing within 3 sigma
    for name, pts in (("ls-qam", ls_qam), ("xor-qam", xor_qam), ("ls-psk", ls_psk)):
        for lo, hi in zip(pts, pts[1:]):
            slack = 3 * math.hypot(_sigma(lo), _sigma(hi))
            assert hi.ber <= lo.ber + slack, (
                f"{name}: BER rises from {lo.ber:.3e} ({lo.snr_db:g} dB) "
                f"to {hi.ber:.3e} ({hi.snr_db:g} dB) beyond 3 sigma")


def test_c9_bit_identical_across_worker_counts(zero_noise_runs: dict,
                                               campaign_runs: dict,
                                               codebook_qam4: Codebook,
                                               codebook_qam16: Codebook) -> None:
    books = {4: codebook_qam4, 16: codebook_qam16}
    for M, (cfg, _, csv_one) in sorted(zero_noise_runs.items()):
        pts = run_ber(cfg, codebook=books[M], workers=2)
        assert format_ber_csv(cfg, pts) == csv_one, f"zero-noise M={M} output differs"

    for name, (cfg, cb, _, csv_one) in campaign_runs.items():
        pts = run_ber(cfg, codebook=cb, workers=2)
        assert format_ber_csv(cfg, pts) == csv_one, f"campaign {name} output differs"
