"""Imbalance certificates: emission, serialization and independent checking.

A certificate is a finite witness that balancedness fails on a pattern.  Two
families are produced: divisibility certificates (the denominator of the
pattern frequency misses the residues of iterated image lengths of a return
word, or of a letter sitting in a removable triple) and potential
certificates (a signed cycle of two-letter blocks whose scaled deviations do
not sum to zero).  Spectral necessary conditions give a third,
pattern-independent kind.  Every certificate can be re-checked from scratch
by verify_certificate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .balance import (
    FrequencyTable,
    admissible_level,
    deviation_vector,
    factor_frequencies,
)
from .substitution import (
    Substitution,
    is_primitive,
    language_cache,
    return_words,
    substitution_matrix,
    two_block_substitution,
)
from .words import Word

SCHEMA_VERSION = 1

KIND_RETURN_WORD = "divisibility-return-word"
KIND_TRIPLE = "divisibility-triple"
KIND_POTENTIAL = "potential-inconsistency"
KIND_SPECTRAL = "spectral-necessary"


@dataclass(frozen=True)
class ImbalanceCertificate:
    substitution: str
    pattern: str  # formatted pattern, empty for spectral certificates
    kind: str
    witness: dict
    level: int
    frequency: tuple[int, int] | None = None  # (p, q)
    modular: dict | None = None  # {"modulus", "rho", "pi", "residues", "first_bad_n"}
    cycle: dict | None = None  # {"blocks": [[block, sign], ...], "qphi_sum": int}
    version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        doc = {
            "version": self.version,
            "substitution": self.substitution,
            "pattern": self.pattern,
            "kind": self.kind,
            "witness": self.witness,
            "level": self.level,
        }
        if self.frequency is not None:
            doc["frequency"] = {"p": self.frequency[0], "q": self.frequency[1]}
        if self.modular is not None:
            doc["modular"] = self.modular
        if self.cycle is not None:
            doc["cycle"] = self.cycle
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def from_dict(doc: dict) -> "ImbalanceCertificate":
        freq = doc.get("frequency")
        return ImbalanceCertificate(
            substitution=doc["substitution"],
            pattern=doc.get("pattern", ""),
            kind=doc["kind"],
            witness=doc.get("witness", {}),
            level=doc.get("level", 0),
            frequency=(freq["p"], freq["q"]) if freq else None,
            modular=doc.get("modular"),
            cycle=doc.get("cycle"),
            version=doc.get("version", SCHEMA_VERSION),
        )

    @staticmethod
    def from_json(text: str) -> "ImbalanceCertificate":
        return ImbalanceCertificate.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# divisibility certificates

def _rational_frequency(
    sub: Substitution, v: Word, frequencies: FrequencyTable | None
) -> Fraction:
    if frequencies is None:
        frequencies = factor_frequencies(sub, len(v))
    return frequencies.rational(v)


def divisibility_certificate(
    sub: Substitution,
    v: Sequence[int],
    frequencies: FrequencyTable | None = None,
) -> ImbalanceCertificate | None:
    """Search return words and removable triples for a divisibility failure.

    Balancedness on v with frequency p/q forces q to divide the iterated
    image length of every return word to a letter, and of every letter a
    with bac and bc both in the language.  A nonzero residue anywhere on the
    eventual cycle of lengths mod q refutes that for infinitely many levels.
    Returns None when every witness is divisible (inconclusive).
    """
    v = tuple(int(a) for a in v)
    lang = language_cache(sub)
    if not lang.contains(v):
        raise ValueError("pattern not in language")
    mu = _rational_frequency(sub, v, frequencies)
    q = mu.denominator
    if q == 1:
        return None
    matrix = substitution_matrix(sub)
    period = linalg.power_mod_period(matrix, q)
    threshold = admissible_level(sub, v)
    d = len(sub.alphabet)

    def finish(kind: str, witness: dict, weights: Sequence[int]):
        residues = linalg.residue_cycle(period, weights)
        if all(r == 0 for r in residues):
            return None
        bad_n = linalg.first_nonzero_exponent(period, residues, threshold)
        modular = {
            "modulus": q,
            "rho": period.preperiod,
            "pi": period.period,
            "residues": list(residues),
            "first_bad_n": bad_n,
        }
        length = sum(
            x * w for x, w in zip(linalg.column_sums(linalg.mat_pow(matrix, bad_n)), weights)
        ) if bad_n is not None and bad_n <= 64 else None
        if length is not None:
            modular["witness_length"] = str(length)
        return ImbalanceCertificate(
            substitution=str(sub),
            pattern=sub.alphabet.format_word(v),
            kind=kind,
            witness=witness,
            level=threshold,
            frequency=(mu.numerator, q),
            modular=modular,
        )

    for a in range(d):
        if (a,) not in lang.factors(1):
            continue
        rset = return_words(sub, a)
        for w in sorted(rset.words, key=lambda u: (len(u), u)):
            weights = [0] * d
            for x in w:
                weights[x] += 1
            cert = finish(
                KIND_RETURN_WORD,
                {
                    "letter": sub.alphabet.name(a),
                    "return_word": sub.alphabet.format_word(w),
                },
                weights,
            )
            if cert is not None:
                return cert
    pairs = lang.factors(2)
    for b, a, c in sorted(lang.factors(3)):
        if (b, c) in pairs:
            weights = [0] * d
            weights[a] = 1
            cert = finish(
                KIND_TRIPLE,
                {
                    "triple": [
                        sub.alphabet.name(b),
                        sub.alphabet.name(a),
                        sub.alphabet.name(c),
                    ]
                },
                weights,
            )
            if cert is not None:
                return cert
    return None


def symmetric_constant_length_check(
    sub: Substitution,
) -> ImbalanceCertificate | None:
    """Divisibility check specialised to symmetric constant-length inputs.

    Such substitutions have uniform letter frequencies 1/d; the ordinary
    divisibility search with q = d then decides the letter case.
    """
    ell = sub.constant_length
    matrix = substitution_matrix(sub)
    if ell is None or matrix != linalg.transpose(matrix):
        raise ValueError("not constant-length symmetric")
    freqs = letter_frequency_table_uniform(sub)
    for a in range(len(sub.alphabet)):
        cert = divisibility_certificate(sub, (a,), frequencies=freqs)
        if cert is not None:
            return cert
    return None


def letter_frequency_table_uniform(sub: Substitution) -> FrequencyTable:
    d = len(sub.alphabet)
    entries = {(a,): Fraction(1, d) for a in range(d)}
    ell = sub.constant_length
    return FrequencyTable(order=1, entries=entries, exact=True, perron_value=float(ell))


# ---------------------------------------------------------------------------
# potential test

@dataclass(frozen=True)
class PotentialResult:
    consistent: bool
    level: int
    potentials: dict | None = None  # letter name -> int, up to a constant
    certificate: ImbalanceCertificate | None = None


def potential_test(
    sub: Substitution,
    v: Sequence[int],
    level: int | None = None,
    frequencies: FrequencyTable | None = None,
) -> PotentialResult:
    """Decide whether the scaled deviation vector is a potential difference.

    Edge ab carries weight q*alpha(ab) - p*height(a); consistency means the
    weights are F(b) - F(a) for letter values F, checked by spanning-tree
    assignment plus verification of every edge.  An inconsistent edge closes
    a signed cycle with nonzero weight sum, which certifies imbalance.
    """
    v = tuple(int(a) for a in v)
    threshold = admissible_level(sub, v)
    if level is None:
        level = threshold
    if level < threshold:
        raise ValueError(f"level below threshold {threshold}")
    dev = deviation_vector(sub, v, level, frequencies=frequencies)
    pairs = sorted(dev.scaled)
    letters = sorted({a for pair in pairs for a in pair})
    adjacency: dict[int, list[tuple[int, Word, int]]] = {a: [] for a in letters}
    for a, b in pairs:
        adjacency[a].append((b, (a, b), 1))
        adjacency[b].append((a, (a, b), -1))
    root = letters[0]
    potential = {root: 0}
    parent_step: dict[int, tuple[int, Word, int]] = {}
    queue = [root]
    while queue:
        x = queue.pop(0)
        for y, block, sign in adjacency[x]:
            if y not in potential:
                potential[y] = potential[x] + sign * dev.scaled[block]
                parent_step[y] = (x, block, sign)
                queue.append(y)
    if set(potential) != set(letters):
        raise ValueError("two-block graph is not connected")
    for a, b in pairs:
        if potential[b] - potential[a] != dev.scaled[(a, b)]:
            blocks = _inconsistent_cycle(parent_step, (a, b))
            total = sum(sign * dev.scaled[blk] for blk, sign in blocks)
            cert = ImbalanceCertificate(
                substitution=str(sub),
                pattern=sub.alphabet.format_word(v),
                kind=KIND_POTENTIAL,
                witness={"edge": sub.alphabet.format_word((a, b))},
                level=level,
                frequency=(dev.p, dev.q),
                cycle={
                    "blocks": [
                        [sub.alphabet.format_word(blk), sign] for blk, sign in blocks
                    ],
                    "qphi_sum": total,
                },
            )
            return PotentialResult(consistent=False, level=level, certificate=cert)
    named = {sub.alphabet.name(a): val for a, val in sorted(potential.items())}
    return PotentialResult(consistent=True, level=level, potentials=named)


def _inconsistent_cycle(
    parent_step: dict[int, tuple[int, Word, int]], edge: Word
) -> list[tuple[Word, int]]:
    """Signed closed chain: the violating edge plus the tree path back."""
    a, b = edge

    def root_path(x) -> list[int]:
        path = [x]
        while path[-1] in parent_step:
            path.append(parent_step[path[-1]][0])
        return path

    pa, pb = root_path(a), root_path(b)
    common = set(pa) & set(pb)
    lca = next(x for x in pa if x in common)
    blocks: list[tuple[Word, int]] = [(edge, 1)]
    x = b
    while x != lca:  # walk b -> lca against the assignment direction
        _, block, sign = parent_step[x]
        blocks.append((block, -sign))
        x = parent_step[x][0]
    ascent = []
    x = a
    while x != lca:  # walk a -> lca, then reverse it to go lca -> a
        _, block, sign = parent_step[x]
        ascent.append((block, sign))
        x = parent_step[x][0]
    blocks.extend(reversed(ascent))
    return blocks


# ---------------------------------------------------------------------------
# spectral necessary conditions

@dataclass(frozen=True)
class SpectralBalanceReport:
    letters_class: linalg.MatrixClass
    factors_class: linalg.MatrixClass
    letters_verdict: str
    factors_verdict: str
    letters_certificate: ImbalanceCertificate | None
    factors_certificate: ImbalanceCertificate | None


_VERDICT = {
    linalg.MatrixClass.PISOT: "balanced-certified",
    linalg.MatrixClass.SECOND_EIGENVALUE_OUTSIDE: "unbalanced-certified",
    linalg.MatrixClass.UNIT_MODULUS_NON_ROOT_OF_UNITY: "unbalanced-certified",
    linalg.MatrixClass.ROOT_OF_UNITY_PRESENT: "inconclusive",
}


def spectral_balance_report(sub: Substitution) -> SpectralBalanceReport:
    """Classify balancedness on letters and on factors from the spectra.

    Pisot certifies balancedness; a non-root-of-unity eigenvalue on or
    outside the unit circle certifies imbalance; a root of unity leaves the
    matrix test inconclusive.
    """
    ok, _ = is_primitive(sub)
    if not ok:
        raise ValueError("spectral report requires primitivity")
    letters_class = linalg.pisot_classify(substitution_matrix(sub))
    block_sub, _ = two_block_substitution(sub)
    factors_class = linalg.pisot_classify(substitution_matrix(block_sub))

    def cert(scope: str, cls: linalg.MatrixClass, matrix_sub: Substitution):
        if _VERDICT[cls] != "unbalanced-certified":
            return None
        return ImbalanceCertificate(
            substitution=str(sub),
            pattern="",
            kind=KIND_SPECTRAL,
            witness={
                "scope": scope,
                "classification": cls.value,
                "char_poly": list(linalg.char_poly(substitution_matrix(matrix_sub))),
            },
            level=0,
        )

    return SpectralBalanceReport(
        letters_class=letters_class,
        factors_class=factors_class,
        letters_verdict=_VERDICT[letters_class],
        factors_verdict=_VERDICT[factors_class],
        letters_certificate=cert("letters", letters_class, sub),
        factors_certificate=cert("factors", factors_class, block_sub),
    )


# ---------------------------------------------------------------------------
# verification

def verify_certificate(
    cert: ImbalanceCertificate | dict, sub: Substitution | None = None
) -> tuple[bool, str]:
    """Re-derive a certificate's arithmetic from scratch.

    Certificates are self-contained: the substitution text they embed is
    reparsed, frequencies, residues and cycle sums are recomputed, and the
    witness membership conditions are rechecked.  Returns (ok, reason).
    """
    try:
        if isinstance(cert, dict):
            cert = ImbalanceCertificate.from_dict(cert)
        embedded = Substitution.parse(cert.substitution)
        if sub is not None and str(sub) != str(embedded):
            return False, "certificate was produced for a different substitution"
        sub = embedded
        if cert.kind == KIND_SPECTRAL:
            return _verify_spectral(cert, sub)
        v = sub.alphabet.parse_word(cert.pattern)
        if not language_cache(sub).contains(v):
            return False, "pattern not in language"
        if cert.frequency is None:
            return False, "missing frequency"
        p, q = cert.frequency
        mu = factor_frequencies(sub, len(v)).rational(v)
        if (mu.numerator, mu.denominator) != (p, q):
            return False, "frequency mismatch"
        if cert.kind in (KIND_RETURN_WORD, KIND_TRIPLE):
            return _verify_divisibility(cert, sub, v, q)
        if cert.kind == KIND_POTENTIAL:
            return _verify_potential(cert, sub, v)
        return False, f"unknown certificate kind: {cert.kind}"
    except (ValueError, KeyError, TypeError) as exc:
        return False, f"malformed certificate: {exc}"


def _verify_divisibility(cert, sub, v, q) -> tuple[bool, str]:
    lang = language_cache(sub)
    d = len(sub.alphabet)
    weights = [0] * d
    if cert.kind == KIND_RETURN_WORD:
        a = sub.alphabet.index(cert.witness["letter"])
        w = sub.alphabet.parse_word(cert.witness["return_word"])
        if not w or w[0] != a:
            return False, "witness is not a return word to its letter"
        if not lang.contains(w + (a,)):
            return False, "witness return word does not recur in the language"
        if sum(1 for x in w + (a,) if x == a) != 2:
            return False, "witness is not a first return word"
        for x in w:
            weights[x] += 1
    else:
        b, a, c = (sub.alphabet.index(s) for s in cert.witness["triple"])
        if (b, a, c) not in lang.factors(3) or (b, c) not in lang.factors(2):
            return False, "triple witness not admissible"
        weights[a] = 1
    period = linalg.power_mod_period(substitution_matrix(sub), q)
    residues = linalg.residue_cycle(period, weights)
    modular = cert.modular or {}
    if modular.get("rho") != period.preperiod or modular.get("pi") != period.period:
        return False, "modular cycle shape mismatch"
    if list(residues) != list(modular.get("residues", [])):
        return False, "residue cycle mismatch"
    if modular.get("modulus") != q:
        return False, "modulus mismatch"
    if all(r == 0 for r in residues):
        return False, "all residues vanish; no divisibility failure"
    return True, "divisibility failure confirmed"


def _verify_potential(cert, sub, v) -> tuple[bool, str]:
    cycle = cert.cycle or {}
    blocks = [
        (sub.alphabet.parse_word(name), sign) for name, sign in cycle.get("blocks", [])
    ]
    if not blocks:
        return False, "empty cycle"
    lang = language_cache(sub)
    for blk, sign in blocks:
        if len(blk) != 2 or blk not in lang.factors(2):
            return False, "cycle block not in language"
        if sign not in (1, -1):
            return False, "invalid sign"
    # chain must be closed: each signed block moves between its letters
    start = blocks[0][0][0] if blocks[0][1] == 1 else blocks[0][0][1]
    cur = start
    for blk, sign in blocks:
        tail, head = blk if sign == 1 else (blk[1], blk[0])
        if cur != tail:
            return False, "cycle chain is not connected"
        cur = head
    if cur != start:
        return False, "cycle chain is not closed"
    threshold = admissible_level(sub, v)
    if cert.level < threshold:
        return False, f"level below threshold {threshold}"
    dev = deviation_vector(sub, v, cert.level)
    total = sum(sign * dev.scaled[blk] for blk, sign in blocks)
    if total != cycle.get("qphi_sum"):
        return False, "cycle sum mismatch"
    if total == 0:
        return False, "cycle sum vanishes; no inconsistency"
    return True, "potential inconsistency confirmed"


def _verify_spectral(cert, sub) -> tuple[bool, str]:
    scope = cert.witness.get("scope")
    if scope == "letters":
        matrix_sub = sub
    elif scope == "factors":
        matrix_sub, _ = two_block_substitution(sub)
    else:
        return False, "unknown spectral scope"
    cls = linalg.pisot_classify(substitution_matrix(matrix_sub))
    if cls.value != cert.witness.get("classification"):
        return False, "classification mismatch"
    if _VERDICT[cls] != "unbalanced-certified":
        return False, "classification does not certify imbalance"
    stored = cert.witness.get("char_poly")
    actual = list(linalg.char_poly(substitution_matrix(matrix_sub)))
    if stored != actual:
        return False, "characteristic polynomial mismatch"
    return True, "spectral violation confirmed"
