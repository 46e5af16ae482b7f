"""Substitutions as free-monoid morphisms.

Covers iteration, primitivity, language computation by pair closure, block
recodings on length-k factors, fixed-point prefix generation and first
return words.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import linalg
from .words import Alphabet, Word, abelianize, factors_of


@dataclass(frozen=True)
class Substitution:
    """A non-erasing morphism, stored as one image word per letter."""

    alphabet: Alphabet
    images: tuple[Word, ...]

    def __post_init__(self):
        d = len(self.alphabet)
        if len(self.images) != d:
            raise ValueError("one image required per letter")
        for img in self.images:
            if len(img) == 0:
                raise ValueError("erasing substitution: empty image")
            if any(not 0 <= a < d for a in img):
                raise ValueError("image uses a foreign symbol")

    # -- construction -------------------------------------------------------

    @staticmethod
    def parse(text: str) -> "Substitution":
        """Parse ``a->w`` clauses joined by ``;`` or the JSON object form."""
        text = text.strip()
        if text.startswith("{"):
            return Substitution._parse_json(json.loads(text))
        clauses = [c.strip() for c in text.split(";") if c.strip()]
        if not clauses:
            raise ValueError("empty substitution spec")
        lhs_names = []
        rhs_texts = []
        for clause in clauses:
            if "->" not in clause:
                raise ValueError(f"clause without '->': {clause!r}")
            lhs, rhs = clause.split("->", 1)
            lhs = lhs.strip()
            if lhs.startswith("["):
                lhs = lhs[1:-1].strip()
            lhs_names.append(lhs)
            rhs_texts.append(rhs.strip())
        alphabet = Alphabet(lhs_names)
        images = tuple(alphabet.parse_word(rhs) for rhs in rhs_texts)
        return Substitution(alphabet, images)

    @staticmethod
    def _parse_json(doc: dict) -> "Substitution":
        alphabet = Alphabet(doc["alphabet"])
        images = []
        image_doc = doc["images"]
        for name in alphabet.letters:
            if name not in image_doc:
                raise ValueError(f"missing image for symbol {name!r}")
            img = image_doc[name]
            if isinstance(img, str):
                images.append(alphabet.parse_word(img))
            else:
                images.append(tuple(alphabet.index(s) for s in img))
        return Substitution(alphabet, tuple(images))

    def __str__(self) -> str:
        parts = []
        for i, img in enumerate(self.images):
            lhs = self.alphabet.name(i)
            if not self.alphabet.single_char:
                lhs = f"[{lhs}]"
            parts.append(f"{lhs}->{self.alphabet.format_word(img)}")
        return ";".join(parts)

    # -- basic morphism operations ------------------------------------------

    def apply(self, w: Sequence[int]) -> Word:
        images = self.images
        d = len(images)
        out: list[int] = []
        for a in w:
            if not 0 <= a < d:
                raise ValueError(f"foreign symbol index: {a}")
            out.extend(images[a])
        return tuple(out)

    def letter_image(self, a: int, n: int = 1) -> Word:
        return _letter_power(self, a, n)

    def image_lengths(self, n: int = 1) -> tuple[int, ...]:
        """Lengths of the n-th iterated letter images, computed exactly."""
        lengths = tuple(len(img) for img in self.images)
        if n == 0:
            return tuple(1 for _ in self.images)
        cur = lengths
        for _ in range(n - 1):
            cur = tuple(sum(cur[b] for b in self.images[a]) for a in range(len(cur)))
        return cur

    @property
    def constant_length(self) -> int | None:
        lens = {len(img) for img in self.images}
        return lens.pop() if len(lens) == 1 else None


def substitution_matrix(sub: Substitution) -> linalg.Matrix:
    """Incidence matrix with entry (a, b) counting a inside the image of b."""
    d = len(sub.alphabet)
    cols = [abelianize(img, d) for img in sub.images]
    return tuple(tuple(cols[b][a] for b in range(d)) for a in range(d))


def is_primitive(sub: Substitution) -> tuple[bool, int | None]:
    """Primitivity with the smallest witness exponent k (M^k positive)."""
    k = linalg.primitivity_exponent(substitution_matrix(sub))
    return (k is not None), k


@lru_cache(maxsize=None)
def _letter_power(sub: Substitution, a: int, n: int) -> Word:
    if n == 0:
        return (a,)
    if n == 1:
        return sub.images[a]
    half = _letter_power(sub, a, n - 1)
    return sub.apply(half)


# ---------------------------------------------------------------------------
# language

class LanguageCache:
    """Factor sets of the subshift generated by a primitive substitution.

    Length-2 factors come from a pair-closure fixpoint; longer factors are
    windows of iterated images of those pairs, at the first level whose
    letter images are long enough to cover any window.
    """

    def __init__(self, sub: Substitution):
        ok, _ = is_primitive(sub)
        if not ok:
            raise ValueError("language requires primitivity")
        self.sub = sub
        self.stabilization_witness: dict[int, int] = {}
        self._by_length: dict[int, frozenset[Word]] = {}
        self._lock = threading.RLock()

    def factors(self, n: int) -> frozenset[Word]:
        if n < 0:
            raise ValueError("factor length must be nonnegative")
        if n == 0:
            return frozenset({()})
        with self._lock:
            if n not in self._by_length:
                self._by_length[n] = self._compute(n)
            return self._by_length[n]

    def _compute(self, n: int) -> frozenset[Word]:
        if n == 2:
            return self._pair_closure()
        if n == 1:
            return frozenset({(a,) for pair in self.factors(2) for a in pair})
        m = self._covering_level(n)
        self.stabilization_witness[n] = m
        out: set[Word] = set()
        for a, b in sorted(self.factors(2)):
            u = _letter_power(self.sub, a, m) + _letter_power(self.sub, b, m)
            out |= factors_of(u, n)
        return frozenset(out)

    def _covering_level(self, n: int) -> int:
        m = 0
        cap = 4 * n * len(self.sub.alphabet) + 64
        while min(self.sub.image_lengths(m)) < n:
            m += 1
            if m > cap:
                raise ValueError("letter images do not grow; subshift is periodic")
        return m

    def _pair_closure(self) -> frozenset[Word]:
        sub = self.sub
        k = self._covering_level(2)
        pairs: set[Word] = set()
        for a in range(len(sub.alphabet)):
            w = _letter_power(sub, a, k)
            pairs |= factors_of(w, 2) if len(w) >= 2 else set()
            img = sub.images[a]
            if len(img) >= 2:
                pairs |= factors_of(img, 2)
        rounds = 0
        while True:
            rounds += 1
            new = set(pairs)
            for a, b in pairs:
                u = sub.images[a] + sub.images[b]
                for j in range(len(sub.images[a])):
                    new.add((u[j], u[j + 1]))
            if new == pairs:
                break
            pairs = new
        self.stabilization_witness[2] = rounds
        return frozenset(pairs)

    def pairs(self) -> list[Word]:
        return sorted(self.factors(2))

    def contains(self, w: Sequence[int]) -> bool:
        w = tuple(int(a) for a in w)
        return w in self.factors(len(w))


@lru_cache(maxsize=None)
def language_cache(sub: Substitution) -> LanguageCache:
    return LanguageCache(sub)


def language(sub: Substitution, n: int) -> frozenset[Word]:
    """The set of length-n factors of the subshift of sub."""
    return language_cache(sub).factors(n)


# ---------------------------------------------------------------------------
# block recodings

@dataclass(frozen=True)
class BlockCoding:
    """Bijection between length-k factors and a block alphabet."""

    order: int
    alphabet: Alphabet
    blocks: tuple[Word, ...]  # decode table, sorted
    _index: dict = field(repr=False, hash=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {blk: i for i, blk in enumerate(self.blocks)}
        )

    def decode(self, i: int) -> Word:
        return self.blocks[i]

    def block_index(self, block: Sequence[int]) -> int:
        blk = tuple(int(a) for a in block)
        try:
            return self._index[blk]
        except KeyError:
            raise ValueError(f"block not in language: {blk}") from None

    def encode_word(self, w: Sequence[int]) -> Word:
        """Overlapping block coding of w; |result| = |w| - k + 1."""
        k = self.order
        if len(w) < k:
            raise ValueError("word shorter than block order")
        return tuple(self.block_index(w[i : i + k]) for i in range(len(w) - k + 1))

    def decode_word(self, bw: Sequence[int]) -> Word:
        if not bw:
            return ()
        out = [self.blocks[b][0] for b in bw[:-1]]
        out.extend(self.blocks[bw[-1]])
        return tuple(out)


@lru_cache(maxsize=None)
def k_block_substitution(sub: Substitution, k: int) -> tuple[Substitution, BlockCoding]:
    """Induced substitution on length-k factors.

    The image of a block w is the sequence of the first |sub(w[0])| length-k
    windows of sub(w); for k = 2 this is the classical two-block recoding on
    the pair alphabet.
    """
    if k < 2:
        raise ValueError("block order must be at least 2")
    lang = language_cache(sub)
    blocks = sorted(lang.factors(k))
    names = [sub.alphabet.format_word(b) for b in blocks]
    block_alphabet = Alphabet(
        names if all("," not in n and "[" not in n for n in names) else
        [n.strip("[]").replace(",", "+") for n in names]
    )
    coding = BlockCoding(order=k, alphabet=block_alphabet, blocks=tuple(blocks))
    images = []
    for blk in blocks:
        u = sub.apply(blk)
        width = len(sub.images[blk[0]])
        images.append(tuple(coding.block_index(u[j : j + k]) for j in range(width)))
    block_sub = Substitution(block_alphabet, tuple(images))
    ok, _ = is_primitive(block_sub)
    if not ok:
        raise ValueError("block substitution is not primitive")
    return block_sub, coding


def two_block_substitution(sub: Substitution) -> tuple[Substitution, BlockCoding]:
    return k_block_substitution(sub, 2)


# ---------------------------------------------------------------------------
# fixed-point prefixes

def prolongable_letter(sub: Substitution) -> tuple[int, int]:
    """A letter a and power p with sub^p(a) a strict prefix extension of a.

    Works through cycles of the first-letter map; primitivity guarantees the
    image eventually grows, so any letter on a cycle qualifies.
    """
    d = len(sub.alphabet)
    first = [img[0] for img in sub.images]
    cap = max(2, d * max(len(img) for img in sub.images))
    for a in range(d):
        seen = {a: 0}
        x = a
        for p in range(1, cap + 1):
            x = first[x]
            if x == a:
                if len(_letter_power(sub, a, p)) >= 2:
                    return a, p
                break
            if x in seen:
                break
            seen[x] = p
    raise ValueError("no right-prolongable letter")


def generate_prefix(
    sub: Substitution, letter: int | None = None, min_length: int = 1
) -> np.ndarray:
    """A prefix of a one-sided fixed point, as an int array of length >= min_length.

    With letter given, the fixed point of sub^p starting from that letter is
    used (error when no power of the image extends it); otherwise the first
    prolongable letter is picked deterministically.
    """
    ok, _ = is_primitive(sub)
    if not ok:
        raise ValueError("prefix generation requires primitivity")
    if letter is None:
        a, p = prolongable_letter(sub)
    else:
        a, p = _prolongation_power(sub, letter)
    images_p = [_letter_power(sub, b, p) for b in range(len(sub.alphabet))]
    word: list[int] = list(images_p[a])
    if len(word) < 2:
        raise ValueError("no right-prolongable letter")
    while len(word) < min_length:
        grown: list[int] = []
        for b in word:
            grown.extend(images_p[b])
            if len(grown) >= min_length and len(grown) > len(word):
                break
        word = grown
    return np.asarray(word, dtype=np.int64)


def _prolongation_power(sub: Substitution, a: int) -> tuple[int, int]:
    first = [img[0] for img in sub.images]
    x = a
    cap = max(2, len(sub.alphabet) * max(len(img) for img in sub.images))
    for p in range(1, cap + 1):
        x = first[x]
        if x == a:
            if len(_letter_power(sub, a, p)) >= 2:
                return a, p
            raise ValueError("no right-prolongable letter")
    raise ValueError("no right-prolongable letter")


# ---------------------------------------------------------------------------
# return words

@dataclass(frozen=True)
class ReturnWordSet:
    base: Word
    words: frozenset[Word]


def return_words(sub: Substitution, a: int, cap: int = 1 << 22) -> ReturnWordSet:
    """First return words to the letter a.

    Scans gaps between consecutive occurrences of a in generated text, and
    stops once the collected set is identical over two successive
    substitution iterates with a comfortable scanned length.  The cap bounds
    the scanned length defensively.
    """
    lang = language_cache(sub)
    if (a,) not in lang.factors(1):
        raise ValueError("letter does not occur in the language")
    previous: frozenset[Word] | None = None
    for m in range(1, 64):
        target = 4 * max(sub.image_lengths(m))
        if target > cap:
            raise ValueError("return-word scan did not stabilize")
        text = generate_prefix(sub, None, min_length=target)
        positions = np.flatnonzero(text == a)
        found = frozenset(
            tuple(int(x) for x in text[positions[i] : positions[i + 1]])
            for i in range(len(positions) - 1)
        )
        if previous is not None and found == previous and len(found) > 0:
            return ReturnWordSet(base=(a,), words=found)
        previous = found
    raise ValueError("return-word scan did not stabilize")
