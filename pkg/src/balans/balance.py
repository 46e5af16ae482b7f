"""Frequencies, balance profiles, discrepancy and tower-level statistics.

Frequencies come from renormalized Perron eigenvectors, exact rationals when
the Perron value is an integer.  Balance profiles scan sliding windows of a
generated fixed-point prefix with a prefix-count array; everything feeding a
certificate stays in exact integer arithmetic.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .substitution import (
    Substitution,
    _letter_power,
    generate_prefix,
    k_block_substitution,
    language_cache,
    substitution_matrix,
)
from .words import Word, count_occurrences, occurrence_mask


@dataclass(frozen=True)
class FrequencyTable:
    """Frequencies of all factors of one length, summing to 1."""

    order: int
    entries: dict  # Word -> Fraction (exact) or float
    exact: bool
    perron_value: float

    def get(self, w: Sequence[int]):
        key = tuple(int(a) for a in w)
        try:
            return self.entries[key]
        except KeyError:
            raise ValueError(f"pattern not in language: {key}") from None

    def rational(self, w: Sequence[int]) -> Fraction:
        if not self.exact:
            raise ValueError("requires rational frequency")
        return self.get(w)


def letter_frequencies(sub: Substitution) -> FrequencyTable:
    report = linalg.perron_data(substitution_matrix(sub))
    entries = {(a,): report.perron_vector[a] for a in range(len(sub.alphabet))}
    return FrequencyTable(
        order=1,
        entries=entries,
        exact=report.vector_exact,
        perron_value=report.perron_value,
    )


def factor_frequencies(sub: Substitution, k: int) -> FrequencyTable:
    """Frequencies of length-k factors via the k-block incidence matrix."""
    if k < 1:
        raise ValueError("factor length must be positive")
    if k == 1:
        return letter_frequencies(sub)
    block_sub, coding = k_block_substitution(sub, k)
    report = linalg.perron_data(substitution_matrix(block_sub))
    entries = {
        coding.decode(i): report.perron_vector[i] for i in range(len(coding.blocks))
    }
    return FrequencyTable(
        order=k,
        entries=entries,
        exact=report.vector_exact,
        perron_value=report.perron_value,
    )


def frequency_of(sub: Substitution, v: Sequence[int]) -> Fraction | float:
    return factor_frequencies(sub, len(v)).get(v)


# ---------------------------------------------------------------------------
# generated text, shared per substitution

_TEXT_CACHE: dict[Substitution, np.ndarray] = {}
_TEXT_LOCK = threading.Lock()


def generated_text(sub: Substitution, min_length: int) -> np.ndarray:
    """A fixed-point prefix of at least the requested length, cached.

    The prolongable letter is chosen deterministically, so longer requests
    extend earlier ones and slices are reproducible.
    """
    with _TEXT_LOCK:
        text = _TEXT_CACHE.get(sub)
        if text is None or len(text) < min_length:
            text = generate_prefix(sub, None, min_length=min_length)
            _TEXT_CACHE[sub] = text
        return text


# ---------------------------------------------------------------------------
# balance profiles

@dataclass(frozen=True)
class BalanceProfile:
    """Max-min occurrence spread of one pattern over window lengths 1..N."""

    pattern: Word
    horizon: int
    generated_length: int
    stride: int
    values: tuple[int, ...]

    @property
    def max_value(self) -> int:
        return max(self.values) if self.values else 0


def balance_profile(
    sub: Substitution,
    v: Sequence[int],
    horizon: int,
    length: int,
    stride: int = 1,
) -> BalanceProfile:
    """Scan all windows of each length n <= horizon in a generated prefix.

    Values are exact for the scanned text and lower bounds for the subshift;
    they never decrease when the text grows.
    """
    v = tuple(int(a) for a in v)
    if not language_cache(sub).contains(v):
        raise ValueError("pattern not in language")
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if length < horizon + len(v):
        raise ValueError("generated length too small for the horizon")
    text = generated_text(sub, length)[:length]
    return _profile_from_text(text, v, horizon, stride)


def _profile_from_text(
    text: np.ndarray, v: Word, horizon: int, stride: int = 1
) -> BalanceProfile:
    m = len(v)
    mask = occurrence_mask(text, v)
    prefix = np.zeros(len(mask) + 1, dtype=np.int64)
    np.cumsum(mask, out=prefix[1:])
    values = []
    size = len(text)
    for n in range(1, horizon + 1):
        if n < m:
            values.append(0)
            continue
        lag = n - m + 1
        width = size - n + 1
        if width <= 0:
            values.append(0)
            continue
        upper = prefix[lag : lag + width : stride]
        lower = prefix[0:width:stride]
        diff = upper - lower
        values.append(int(diff.max() - diff.min()))
    return BalanceProfile(
        pattern=v,
        horizon=horizon,
        generated_length=size,
        stride=stride,
        values=tuple(values),
    )


# ---------------------------------------------------------------------------
# discrepancy

@dataclass(frozen=True)
class DiscrepancyEstimate:
    """Running sup of |count(prefix_n) - n mu| over one-sided prefixes."""

    pattern: Word
    frequency: Fraction | float
    exact: bool
    running_max: Fraction | float
    decade_maxima: tuple
    growth: str  # "growing" | "apparently-bounded"


def discrepancy_estimate(
    sub: Substitution, v: Sequence[int], length: int
) -> DiscrepancyEstimate:
    v = tuple(int(a) for a in v)
    if not language_cache(sub).contains(v):
        raise ValueError("pattern not in language")
    mu = frequency_of(sub, v)
    text = generated_text(sub, length)[:length]
    m = len(v)
    mask = occurrence_mask(text, v)
    # counts[n] = occurrences fully inside the length-n prefix
    counts = np.zeros(length + 1, dtype=np.int64)
    np.cumsum(mask, out=counts[m : m + len(mask)])
    n_values = np.arange(length + 1, dtype=np.int64)
    checkpoints = sorted({max(1, length // 100), max(1, length // 10), length})
    if isinstance(mu, Fraction):
        scaled = np.abs(mu.denominator * counts - mu.numerator * n_values)
        decade = tuple(
            Fraction(int(scaled[: c + 1].max()), mu.denominator) for c in checkpoints
        )
        running = Fraction(int(scaled.max()), mu.denominator)
        exact = True
    else:
        dev = np.abs(counts - mu * n_values)
        decade = tuple(float(dev[: c + 1].max()) for c in checkpoints)
        running = float(dev.max())
        exact = False
    # bounded deviations still creep toward their sup, so demand a real
    # margin per decade before flagging growth (monitoring heuristic)
    growing = (
        len(decade) == 3
        and decade[1] * 20 >= decade[0] * 21
        and decade[2] * 20 >= decade[1] * 21
    )
    return DiscrepancyEstimate(
        pattern=v,
        frequency=mu,
        exact=exact,
        running_max=running,
        decade_maxima=decade,
        growth="growing" if growing else "apparently-bounded",
    )


# ---------------------------------------------------------------------------
# tower statistics and scaled deviation vectors

@dataclass(frozen=True)
class TowerStats:
    """Per-tower pattern counts at one partition level."""

    pattern: Word
    level: int
    heights: tuple[int, ...]  # per letter, equals the n-th iterated image length
    alpha: dict  # pair -> number of start positions of the pattern below the height


def tower_stats(sub: Substitution, v: Sequence[int], n: int) -> TowerStats:
    """Count pattern starts inside the first |sub^n(a)| positions of sub^n(ab).

    Requires every letter image at level n to be at least as long as the
    pattern, so each tower level determines the pattern.
    """
    v = tuple(int(a) for a in v)
    if not v:
        raise ValueError("empty pattern")
    heights = sub.image_lengths(n)
    if min(heights) < len(v):
        raise ValueError("level does not resolve pattern")
    alpha: dict[Word, int] = {}
    m = len(v)
    for a, b in language_cache(sub).pairs():
        u = _letter_power(sub, a, n) + _letter_power(sub, b, n)
        window = u[: heights[a] + m - 1]
        alpha[(a, b)] = count_occurrences(window, v)
    return TowerStats(pattern=v, level=n, heights=heights, alpha=alpha)


def constancy_level(sub: Substitution, v: Sequence[int]) -> int:
    """Smallest level (at least 1) whose letter images all cover the pattern."""
    n = 1
    while min(sub.image_lengths(n)) < len(v):
        n += 1
    return n


def admissible_level(sub: Substitution, v: Sequence[int]) -> int:
    """Smallest level at which the potential test is sound: constancy + |L2|."""
    return constancy_level(sub, v) + len(language_cache(sub).factors(2))


@dataclass(frozen=True)
class DeviationVector:
    """Integer-scaled per-tower deviation of pattern counts from expectation.

    For frequency p/q the entry of a pair ab is q*alpha(ab) - p*height(a);
    a vertex potential for these edge weights exists on every balanced
    pattern.
    """

    pattern: Word
    p: int
    q: int
    level: int
    scaled: dict  # pair -> int


def deviation_vector(
    sub: Substitution,
    v: Sequence[int],
    n: int,
    frequencies: FrequencyTable | None = None,
) -> DeviationVector:
    v = tuple(int(a) for a in v)
    if frequencies is None:
        frequencies = factor_frequencies(sub, len(v))
    mu = frequencies.rational(v)
    stats = tower_stats(sub, v, n)
    scaled = {
        pair: mu.denominator * alpha - mu.numerator * stats.heights[pair[0]]
        for pair, alpha in stats.alpha.items()
    }
    return DeviationVector(
        pattern=v, p=mu.numerator, q=mu.denominator, level=n, scaled=scaled
    )


def deviation_literal(
    sub: Substitution,
    v: Sequence[int],
    n: int,
    frequencies: FrequencyTable | None = None,
) -> dict:
    """Same quantity as deviation_vector, summed level by level.

    Walks every tower level, adds q-p on levels starting with the pattern and
    -p elsewhere.  Kept deliberately independent of the closed form.
    """
    v = tuple(int(a) for a in v)
    if frequencies is None:
        frequencies = factor_frequencies(sub, len(v))
    mu = frequencies.rational(v)
    p, q = mu.numerator, mu.denominator
    heights = sub.image_lengths(n)
    if min(heights) < len(v):
        raise ValueError("level does not resolve pattern")
    out: dict[Word, int] = {}
    for a, b in language_cache(sub).pairs():
        u = _letter_power(sub, a, n) + _letter_power(sub, b, n)
        total = 0
        for j in range(heights[a]):
            occupies = u[j : j + len(v)] == v
            total += (q - p) if occupies else -p
        out[(a, b)] = total
    return out


def transport_deviation(sub: Substitution, dev: DeviationVector) -> DeviationVector:
    """Push a deviation vector one level up along the two-block recoding.

    The level n+1 entry of a pair is the sum of the level n entries over the
    letters of its two-block image; in matrix form this is the transpose of
    the two-block incidence matrix acting on the vector.
    """
    block_sub, coding = k_block_substitution(sub, 2)
    scaled = {}
    for i, blk in enumerate(coding.blocks):
        scaled[blk] = sum(
            dev.scaled[coding.decode(j)] for j in block_sub.images[i]
        )
    return DeviationVector(
        pattern=dev.pattern, p=dev.p, q=dev.q, level=dev.level + 1, scaled=scaled
    )
