"""Alphabets, finite words, occurrence counting.

Symbols are small integers everywhere inside the library; an Alphabet
translates between user-facing symbol names and indices 0..d-1.  Words are
plain tuples of ints, long generated texts are numpy int arrays.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

Word = tuple[int, ...]

_RESERVED = set("[],;")


class Alphabet:
    """An ordered set of distinct symbol names."""

    __slots__ = ("letters", "_index")

    def __init__(self, letters: Iterable[str]):
        self.letters: tuple[str, ...] = tuple(str(s) for s in letters)
        if not self.letters:
            raise ValueError("alphabet is empty")
        for s in self.letters:
            if not s or any(c.isspace() for c in s) or any(c in _RESERVED for c in s) or "->" in s:
                raise ValueError(f"invalid symbol name: {s!r}")
        self._index = {s: i for i, s in enumerate(self.letters)}
        if len(self._index) != len(self.letters):
            raise ValueError("duplicate symbols in alphabet")

    def __len__(self) -> int:
        return len(self.letters)

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def __repr__(self) -> str:
        return f"Alphabet({list(self.letters)!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValueError(f"unknown symbol: {name!r}") from None

    def name(self, i: int) -> str:
        return self.letters[i]

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.letters)

    def parse_word(self, text: str) -> Word:
        """Parse a word.

        Plain form concatenates single-character symbols (``0110``); the
        bracket form lists symbol names (``[00,01]``) and is required when
        any symbol name has more than one character.
        """
        text = text.strip()
        if text.startswith("["):
            if not text.endswith("]"):
                raise ValueError(f"unterminated symbol list: {text!r}")
            inner = text[1:-1].strip()
            if not inner:
                return ()
            return tuple(self.index(part.strip()) for part in inner.split(","))
        return tuple(self.index(c) for c in text)

    def format_word(self, w: Sequence[int]) -> str:
        names = [self.name(int(a)) for a in w]
        if self.single_char:
            return "".join(names)
        return "[" + ",".join(names) + "]"


def count_occurrences(w: Sequence[int], v: Sequence[int]) -> int:
    """Number of (possibly overlapping) occurrences of v in w."""
    if len(v) == 0:
        raise ValueError("empty pattern")
    if isinstance(w, np.ndarray):
        return int(occurrence_mask(w, v).sum())
    return _kmp_count(w, tuple(v))


def occurrence_mask(text: np.ndarray, v: Sequence[int]) -> np.ndarray:
    """Boolean array, entry i true iff v occurs in text at position i."""
    v = tuple(int(a) for a in v)
    m = len(v)
    if m == 0:
        raise ValueError("empty pattern")
    n = len(text)
    if n < m:
        return np.zeros(0, dtype=bool)
    mask = text[: n - m + 1] == v[0]
    for j in range(1, m):
        mask = mask & (text[j : n - m + 1 + j] == v[j])
    return mask


def _kmp_count(text: Sequence[int], pat: Word) -> int:
    # prefix-function scan, linear in len(text) + len(pat)
    m = len(pat)
    fail = [0] * m
    k = 0
    for i in range(1, m):
        while k and pat[i] != pat[k]:
            k = fail[k - 1]
        if pat[i] == pat[k]:
            k += 1
        fail[i] = k
    count = 0
    k = 0
    for x in text:
        while k and x != pat[k]:
            k = fail[k - 1]
        if x == pat[k]:
            k += 1
            if k == m:
                count += 1
                k = fail[k - 1]
    return count


def factors_of(w: Sequence[int], n: int) -> set[Word]:
    """All distinct length-n factors of w."""
    if n < 1:
        raise ValueError("factor length must be positive")
    if n > len(w):
        raise ValueError("window exceeds word")
    return {tuple(int(a) for a in w[i : i + n]) for i in range(len(w) - n + 1)}


def abelianize(w: Sequence[int], size: int) -> tuple[int, ...]:
    """Letter-count vector of w over an alphabet of the given size."""
    if isinstance(w, np.ndarray):
        counts = np.bincount(w, minlength=size)
        return tuple(int(c) for c in counts)
    counts = [0] * size
    for a in w:
        counts[a] += 1
    return tuple(counts)
