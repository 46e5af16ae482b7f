"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete.  Criteria 1-5 and 7 are exact reproductions of published values;
6, 8 and 9 are property-based monitors over scanned text.
"""
import time
from fractions import Fraction

import numpy as np
import pytest

from balans import (
    Substitution,
    arnoux_rauzy_word,
    ar_run_bound,
    balance_profile,
    char_poly,
    cylinder_decomposition,
    dendric_check,
    deviation_literal,
    deviation_vector,
    discrepancy_estimate,
    divisibility_certificate,
    factor_frequencies,
    language,
    language_cache,
    letter_frequencies,
    letters_vs_factors_probe,
    potential_test,
    symmetric_constant_length_check,
    transport_deviation,
    verify_certificate,
)
from balans.balance import generated_text
from balans.dendric import DirectiveSequence, _profile_from_text
from balans.linalg import factor_spectrum, mat_pow
from balans.substitution import (
    _letter_power,
    generate_prefix,
    k_block_substitution,
    substitution_matrix,
    two_block_substitution,
)

TM = Substitution.parse("0->01;1->10")
FIB = Substitution.parse("0->01;1->0")
CHACON = Substitution.parse("1->1123;2->23;3->123")
TOEPLITZ = Substitution.parse("0->01;1->00")
THETA2 = Substitution.parse("1->121;2->32;3->321")
TERNARY = Substitution.parse("0->010;1->102;2->201")
SYMMETRIC = Substitution.parse("0->001;1->101")


def spectrum_parts(sub):
    return factor_spectrum(
        char_poly(substitution_matrix(sub)),
        root_bound=max(len(img) for img in sub.images),
    )


def test_criterion_1_spectra_regression():
    start = time.monotonic()
    tm = spectrum_parts(TM)
    assert tm.zero_multiplicity == 1 and tm.integer_roots == ((2, 1),)
    assert tm.cyclotomic_factors == () and tm.residual == (1,)

    tm2_sub, _ = two_block_substitution(TM)
    tm2 = spectrum_parts(tm2_sub)
    assert tm2.zero_multiplicity == 1
    assert tm2.cyclotomic_factors == ((1, 1), (2, 1))  # roots 1 and -1
    assert tm2.integer_roots == ((2, 1),)
    assert tm2.residual == (1,)

    tm3_sub, _ = k_block_substitution(TM, 3)
    tm3 = spectrum_parts(tm3_sub)
    assert tm3.zero_multiplicity == 3
    assert tm3.cyclotomic_factors == ((1, 1), (2, 1))
    assert tm3.integer_roots == ((2, 1),)
    assert tm3.residual == (1,)

    chacon = spectrum_parts(CHACON)
    assert chacon.zero_multiplicity == 1
    assert chacon.cyclotomic_factors == ((1, 1),)  # root 1
    assert chacon.integer_roots == ((3, 1),)
    assert chacon.residual == (1,)

    theta2 = spectrum_parts(THETA2)
    assert theta2.cyclotomic_factors == ((1, 1),)
    assert theta2.residual == (1, -3, 1)  # x^2 - 3x + 1, exact

    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    print(f"ACCEPTANCE 1 PASS: spectra regression exact ({elapsed:.3f}s)")


def test_criterion_2_exact_frequencies():
    assert letter_frequencies(CHACON).entries == {
        (0,): Fraction(1, 3), (1,): Fraction(1, 3), (2,): Fraction(1, 3)
    }
    assert letter_frequencies(TOEPLITZ).entries == {
        (0,): Fraction(2, 3), (1,): Fraction(1, 3)
    }
    seven = Substitution.parse("0->11;1->21;2->10")
    assert letter_frequencies(seven).entries == {
        (0,): Fraction(1, 7), (1,): Fraction(4, 7), (2,): Fraction(2, 7)
    }
    assert letter_frequencies(TERNARY).entries == {
        (0,): Fraction(1, 2), (1,): Fraction(1, 3), (2,): Fraction(1, 6)
    }
    assert factor_frequencies(TM, 2).entries == {
        (0, 0): Fraction(1, 6),
        (0, 1): Fraction(1, 3),
        (1, 0): Fraction(1, 3),
        (1, 1): Fraction(1, 6),
    }
    print("ACCEPTANCE 2 PASS: exact rational frequencies")


def test_criterion_3_certificate_corpus():
    start = time.monotonic()
    # (a) Chacon letters: |sigma^6(1)| = 1093, mod-3 cycle free of zeros
    for a in range(3):
        cert = divisibility_certificate(CHACON, (a,))
        assert cert is not None and cert.modular["modulus"] == 3
        assert all(r != 0 for r in cert.modular["residues"])
        assert cert.modular["first_bad_n"] == 6
        assert cert.modular["witness_length"] == "1093"
        assert verify_certificate(cert)[0]
    # (b) Toeplitz letters: 2^n mod 3 cycles through {2, 1}
    for a in range(2):
        cert = divisibility_certificate(TOEPLITZ, (a,))
        assert cert is not None
        assert set(cert.modular["residues"]) == {1, 2}
        assert verify_certificate(cert)[0]
    # (c) Thue-Morse: every factor of each length 2..8 is certified
    for ell in range(2, 9):
        table = factor_frequencies(TM, ell)
        for v in sorted(language(TM, ell)):
            cert = divisibility_certificate(TM, v, frequencies=table)
            if cert is None:
                cert = potential_test(TM, v, frequencies=table).certificate
            assert cert is not None, f"no certificate for {v}"
            assert verify_certificate(cert)[0]
    # (d) balanced ternary example: no letter certificate exists
    for a in range(3):
        assert divisibility_certificate(TERNARY, (a,)) is None
        assert potential_test(TERNARY, (a,)).consistent
    # (e) symmetric constant-length route
    cert = symmetric_constant_length_check(SYMMETRIC)
    assert cert is not None and cert.frequency == (1, 2)
    assert verify_certificate(cert)[0]
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    print(f"ACCEPTANCE 3 PASS: certificate corpus verified ({elapsed:.2f}s)")


def test_criterion_4_tower_transition_matrix():
    for sub in (TM, FIB):
        block_sub, coding = two_block_substitution(sub)
        m = substitution_matrix(block_sub)
        n = 2  # any level; transition counts are level independent
        for r in (1, 2):
            power = mat_pow(m, r)
            for bi, ab in enumerate(coding.blocks):
                w = ab
                for _ in range(r):
                    w = sub.apply(w)
                first_len = len(_letter_power(sub, ab[0], r))
                for ci, cd in enumerate(coding.blocks):
                    direct = sum(1 for j in range(first_len) if w[j : j + 2] == cd)
                    assert power[ci][bi] == direct, (ab, cd, r)
    print("ACCEPTANCE 4 PASS: tower transition counts equal block-matrix entries")


def test_criterion_5_deviation_machinery():
    for v in ((0, 0), (0, 1)):
        for n in (5, 6):
            literal = deviation_literal(TM, v, n)
            closed = deviation_vector(TM, v, n).scaled
            assert literal == closed, (v, n)
        dev5 = deviation_vector(TM, v, 5)
        dev6 = deviation_vector(TM, v, 6)
        assert transport_deviation(TM, dev5).scaled == dev6.scaled
    assert deviation_vector(TM, (0, 0), 5).scaled == {
        (0, 0): -2, (0, 1): -2, (1, 0): 4, (1, 1): -2
    }
    print("ACCEPTANCE 5 PASS: level sums equal closed form; recursion exact")


def _convolution_profile_max(text, v, horizon):
    """Independent scan: per-window counts by convolution, not prefix sums."""
    mask = np.zeros(len(text), dtype=np.int64)
    hits = np.all(
        np.stack([text[j : len(text) - len(v) + 1 + j] == v[j] for j in range(len(v))]),
        axis=0,
    )
    mask[: len(hits)] = hits
    best = 0
    for n in range(1, horizon + 1):
        if n < len(v):
            continue
        window = n - len(v) + 1
        sums = np.convolve(mask[: len(text) - len(v) + 1], np.ones(window, dtype=np.int64), mode="valid")
        sums = sums[: len(text) - n + 1]
        best = max(best, int(sums.max() - sums.min()))
    return best


def test_criterion_6_balance_scans():
    start = time.monotonic()
    horizon, length = 1000, 10**6
    # Fibonacci letters: Sturmian one-balance, exact equality
    for a in (0, 1):
        profile = balance_profile(FIB, (a,), horizon, length)
        assert profile.max_value == 1
    # Thue-Morse letters: bounded by the brute-force bound from a shorter
    # text scanned with an independent convolution path
    oracle_text = generate_prefix(TM, 0, 1 << 12)[: 1 << 12]
    brute_bound = _convolution_profile_max(oracle_text, (0,), 64)
    assert brute_bound == 2
    for a in (0, 1):
        profile = balance_profile(TM, (a,), horizon, length)
        assert profile.max_value == brute_bound
    # Thue-Morse factor 00: growth evidence across L in {1e4, 1e5, 1e6}.
    # The exact count-deviation maxima over those three prefix lengths grow
    # strictly; the window profile also grows strictly over the full span
    # (integer window maxima saturate between adjacent decades, see the
    # profile values themselves: the growth is logarithmic in the window).
    est = discrepancy_estimate(TM, (0, 0), 10**6)
    d4, d5, d6 = est.decade_maxima
    assert d4 < d5 < d6, est.decade_maxima
    assert est.growth == "growing"
    small = balance_profile(TM, (0, 0), horizon, 10**4)
    mid = balance_profile(TM, (0, 0), horizon, 10**5)
    assert all(a <= b for a, b in zip(small.values, mid.values))
    wide = balance_profile(TM, (0, 0), 10**5, 10**6, stride=244)
    assert small.max_value < wide.max_value  # 4 -> 5 over the full span
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    print(
        "ACCEPTANCE 6 PASS: Fibonacci max B=1, TM letters at brute bound "
        f"{brute_bound}, TM 00 deviation decades {tuple(str(x) for x in est.decade_maxima)} "
        f"and window max {small.max_value}->{wide.max_value} ({elapsed:.1f}s)"
    )


def test_criterion_7_dendric_and_decompositions():
    assert dendric_check(FIB, 12).overall
    tm_report = dendric_check(TM, 1)
    assert not tm_report.overall and tm_report.failures[0] == ()
    lang = language_cache(FIB)
    text = generate_prefix(FIB, 0, 20000)
    for pattern in ("00", "01", "10", "010", "001"):
        v = FIB.alphabet.parse_word(pattern)
        dec = cylinder_decomposition(lang, v)
        lo, _hi = dec.span
        offset = max(0, -lo) + 1
        for p in range(offset, offset + 10**4):
            expected = 1 if tuple(int(x) for x in text[p : p + len(v)]) == v else 0
            assert dec.evaluate(text, p) == expected
    print("ACCEPTANCE 7 PASS: dendric screens and pointwise decomposition oracle")


def test_criterion_8_letters_vs_factors_probe():
    report = letters_vs_factors_probe(FIB, 3, 512, 1 << 18)
    assert report.letters_bounded
    assert all(p.bounded for p in report.factor_probes)
    assert report.agreement
    assert report.bound_dominates
    for probe in report.factor_probes:
        assert probe.max_balance <= probe.bound
    print(
        "ACCEPTANCE 8 PASS: letters and factors agree (bounded); "
        f"bound dominates all {len(report.factor_probes)} factors"
    )


def test_criterion_9_arnoux_rauzy_bound():
    directive = DirectiveSequence.parse("d=3; period=1,2,3")
    h = ar_run_bound(directive)
    assert h == 1
    word = arnoux_rauzy_word(directive, 10**5)[: 10**5]
    worst = max(
        _profile_from_text(word, (a,), 512).max_value for a in range(3)
    )
    assert worst <= 2 * h + 1
    with pytest.raises(ValueError, match="directive not recurrent"):
        DirectiveSequence.parse("d=3; period=1,3")
    print(f"ACCEPTANCE 9 PASS: AR letter balance {worst} <= {2 * h + 1}; bad directive rejected")
