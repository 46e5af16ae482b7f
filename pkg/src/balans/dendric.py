"""Extension graphs, dendricity, Arnoux-Rauzy words, cylinder decompositions.

The decomposition machinery expresses the indicator of a cylinder as an
integer combination of shifted letter indicators, following a leaf-peeling
solve on bipartite extension trees.  Everything here works against any
object exposing factors(n), so substitution languages and Arnoux-Rauzy
prefix languages plug in interchangeably.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .balance import BalanceProfile, _profile_from_text, generated_text
from .substitution import Substitution, language_cache
from .words import Alphabet, Word, factors_of


def worker_count(tasks: int) -> int:
    """Worker cap for embarrassingly parallel scans; BALANS_THREADS wins."""
    limit = os.cpu_count() or 1
    env = os.environ.get("BALANS_THREADS")
    if env:
        try:
            limit = max(1, int(env))
        except ValueError:
            raise ValueError(f"BALANS_THREADS is not an integer: {env!r}") from None
    return max(1, min(limit, tasks))


# ---------------------------------------------------------------------------
# extension graphs

@dataclass(frozen=True)
class ExtensionGraph:
    center: Word
    left: tuple[int, ...]
    right: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def is_tree(self) -> bool:
        return self.tree_defect() is None

    def tree_defect(self) -> str | None:
        """None for a tree, otherwise "disconnected" or "has-cycle"."""
        vertices = [("L", a) for a in self.left] + [("R", b) for b in self.right]
        if not vertices:
            return "disconnected"
        adjacency = {v: [] for v in vertices}
        for a, b in self.edges:
            adjacency[("L", a)].append(("R", b))
            adjacency[("R", b)].append(("L", a))
        seen = {vertices[0]}
        stack = [vertices[0]]
        while stack:
            x = stack.pop()
            for y in adjacency[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != len(vertices):
            return "disconnected"
        if len(self.edges) != len(vertices) - 1:
            return "has-cycle"
        return None


def extension_graph(lang, w: Sequence[int]) -> ExtensionGraph:
    """Bipartite graph of left and right letter extensions of w."""
    w = tuple(int(a) for a in w)
    if len(w) > 0 and w not in lang.factors(len(w)):
        raise ValueError("pattern not in language")
    extended = lang.factors(len(w) + 2)
    edges = sorted(
        (u[0], u[-1]) for u in extended if u[1:-1] == w
    )
    left = tuple(sorted({a for a, _ in edges}))
    right = tuple(sorted({b for _, b in edges}))
    return ExtensionGraph(center=w, left=left, right=right, edges=tuple(edges))


@dataclass(frozen=True)
class DendricReport:
    max_length: int
    overall: bool
    verdicts: dict  # Word -> "tree" | "not-tree(disconnected)" | "not-tree(has-cycle)"
    failures: tuple[Word, ...]


def dendric_check(source, max_len: int) -> DendricReport:
    """Screen every factor up to max_len for tree extension graphs.

    This is a finite-length screen, not a proof of dendricity.
    """
    lang = language_cache(source) if isinstance(source, Substitution) else source
    verdicts: dict[Word, str] = {}
    failures: list[Word] = []
    for n in range(0, max_len + 1):
        for w in sorted(lang.factors(n)):
            defect = extension_graph(lang, w).tree_defect()
            verdicts[w] = "tree" if defect is None else f"not-tree({defect})"
            if defect is not None:
                failures.append(w)
    return DendricReport(
        max_length=max_len,
        overall=not failures,
        verdicts=verdicts,
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# Arnoux-Rauzy words

@dataclass(frozen=True)
class DirectiveSequence:
    """Eventually periodic directive data: finite prefix plus repeated period."""

    size: int
    prefix: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("directive alphabet needs at least two letters")
        if not self.period:
            raise ValueError("directive period is empty")
        for i in self.prefix + self.period:
            if not 1 <= i <= self.size:
                raise ValueError(f"directive index out of range: {i}")
        if set(self.period) != set(range(1, self.size + 1)):
            raise ValueError("directive not recurrent")

    @staticmethod
    def parse(text: str) -> "DirectiveSequence":
        size = None
        prefix: tuple[int, ...] = ()
        period: tuple[int, ...] = ()
        for part in text.split(";"):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise ValueError(f"bad directive clause: {part!r}")
            key, value = (s.strip() for s in part.split("=", 1))
            if key == "d":
                size = int(value)
            elif key == "prefix":
                prefix = tuple(int(s) for s in value.split(",") if s.strip())
            elif key == "period":
                period = tuple(int(s) for s in value.split(",") if s.strip())
            else:
                raise ValueError(f"unknown directive key: {key!r}")
        if size is None:
            raise ValueError("directive needs d=<alphabet size>")
        return DirectiveSequence(size=size, prefix=prefix, period=period)

    def __str__(self) -> str:
        parts = [f"d={self.size}"]
        if self.prefix:
            parts.append("prefix=" + ",".join(map(str, self.prefix)))
        parts.append("period=" + ",".join(map(str, self.period)))
        return "; ".join(parts)

    def index(self, n: int) -> int:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.period[(n - len(self.prefix)) % len(self.period)]


def ar_substitution(i: int, d: int) -> Substitution:
    """Elementary episturmian substitution: i stays, every other j maps to j i."""
    alphabet = Alphabet([str(k) for k in range(1, d + 1)])
    images = tuple(
        (j,) if j == i - 1 else (j, i - 1) for j in range(d)
    )
    return Substitution(alphabet, images)


def arnoux_rauzy_word(directive: DirectiveSequence, min_length: int) -> np.ndarray:
    """Prefix of the directive word limit, length at least min_length.

    Composes the elementary substitutions left to right; successive depths
    extend each other because every elementary image of letter 1 starts
    with 1.
    """
    subs = [ar_substitution(i, directive.size) for i in range(1, directive.size + 1)]
    depth = len(directive.prefix) + len(directive.period)
    while True:
        word: Sequence[int] = (0,)
        for n in range(depth - 1, -1, -1):
            word = subs[directive.index(n) - 1].apply(word)
        if len(word) >= min_length:
            return np.asarray(word, dtype=np.int64)
        depth += len(directive.period)


class ArnouxRauzyLanguage:
    """Factor sets harvested from stabilized prefixes of the directive word."""

    def __init__(self, directive: DirectiveSequence):
        self.directive = directive
        self._by_length: dict[int, frozenset[Word]] = {}

    def factors(self, n: int) -> frozenset[Word]:
        if n == 0:
            return frozenset({()})
        if n not in self._by_length:
            length = max(1024, 64 * n)
            previous = None
            while True:
                text = arnoux_rauzy_word(self.directive, length)
                found = frozenset(factors_of(text, n)) if len(text) >= n else frozenset()
                if previous is not None and found == previous:
                    break
                previous = found
                length *= 4
            self._by_length[n] = previous
        return self._by_length[n]


def ar_run_bound(directive: DirectiveSequence) -> int:
    """Least h such that no h+1 consecutive directive indices coincide."""
    if directive.size != 3:
        raise ValueError("bound proved for three letters only")
    seq = directive.prefix + directive.period * 2
    best = run = 1
    for prev, cur in zip(seq, seq[1:]):
        run = run + 1 if prev == cur else 1
        best = max(best, run)
    return best


# ---------------------------------------------------------------------------
# bipartite tree solving

def tree_edge_solve(
    left_values: dict,
    right_values: dict,
    edges: Sequence[tuple],
    is_zero: Callable | None = None,
):
    """Solve for edge values on a bipartite tree from its vertex sums.

    Each vertex value must equal the sum of its incident edge values; on a
    tree the solution is unique and found by peeling leaves.  Values may
    live in any abelian group (anything with + and -); is_zero decides
    whether the final residual vanishes.
    """
    if is_zero is None:
        is_zero = lambda value: value == 0  # noqa: E731
    vertices = [("L", a) for a in left_values] + [("R", b) for b in right_values]
    values = {("L", a): v for a, v in left_values.items()}
    values.update({("R", b): v for b, v in right_values.items()})
    incident: dict = {v: set() for v in vertices}
    for a, b in edges:
        incident[("L", a)].add((a, b))
        incident[("R", b)].add((a, b))
    if len(edges) != len(vertices) - 1:
        raise ValueError("not a tree")
    solved: dict = {}
    leaves = [v for v in vertices if len(incident[v]) == 1]
    alive = set(vertices)
    while leaves:
        leaf = leaves.pop()
        if leaf not in alive or not incident[leaf]:
            continue
        edge = next(iter(incident[leaf]))
        solved[edge] = values[leaf]
        other = ("R", edge[1]) if leaf[0] == "L" else ("L", edge[0])
        values[other] = values[other] - solved[edge]
        incident[other].discard(edge)
        incident[leaf].discard(edge)
        alive.discard(leaf)
        if len(incident[other]) == 1:
            leaves.append(other)
        elif len(incident[other]) == 0:
            if len(alive) > 1:
                raise ValueError("not a tree")
    if len(solved) != len(edges):
        raise ValueError("not a tree")
    last = next(iter(alive))
    if not is_zero(values[last]):
        raise ValueError("inconsistent totals (sum over X != sum over Y)")
    return solved


# ---------------------------------------------------------------------------
# cylinder decompositions

@dataclass(eq=True)
class Decomposition:
    """Integer combination of shifted letter indicators.

    A term (letter, shift) with coefficient c contributes c whenever the
    text carries that letter at position p + shift; the combination equals
    the indicator of the pattern starting at p.
    """

    pattern: Word
    terms: dict

    def __post_init__(self):
        self.terms = {k: c for k, c in self.terms.items() if c != 0}

    def items(self):
        return sorted(self.terms.items())

    def shifted(self, delta: int) -> "Decomposition":
        return Decomposition(
            pattern=self.pattern,
            terms={(a, k + delta): c for (a, k), c in self.terms.items()},
        )

    def renamed(self, pattern: Word) -> "Decomposition":
        return Decomposition(pattern=pattern, terms=dict(self.terms))

    def __add__(self, other: "Decomposition") -> "Decomposition":
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0) + c
        return Decomposition(pattern=self.pattern, terms=terms)

    def __sub__(self, other: "Decomposition") -> "Decomposition":
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0) - c
        return Decomposition(pattern=self.pattern, terms=terms)

    @property
    def span(self) -> tuple[int, int]:
        if not self.terms:
            return (0, 0)
        shifts = [k for _, k in self.terms]
        return (min(shifts), max(shifts))

    def weight(self, letters: int) -> int:
        """max over letters of the absolute coefficient mass of that letter."""
        per_letter = [0] * letters
        for (a, _k), c in self.terms.items():
            per_letter[a] += abs(c)
        return max(per_letter) if per_letter else 0

    def evaluate(self, text: Sequence[int], pos: int) -> int:
        total = 0
        for (a, k), c in self.terms.items():
            j = pos + k
            if not 0 <= j < len(text):
                raise IndexError("evaluation window leaves the text")
            if int(text[j]) == a:
                total += c
        return total

    def to_json_terms(self, alphabet: Alphabet) -> list[dict]:
        return [
            {"letter": alphabet.name(a), "shift": k, "coeff": c}
            for (a, k), c in self.items()
        ]


def _combo_is_zero(lang, dec: Decomposition) -> bool:
    """Exact test that a combination vanishes on the whole subshift."""
    if not dec.terms:
        return True
    lo, hi = dec.span
    width = hi - lo + 1
    for w in lang.factors(width):
        if dec.evaluate(w, -lo) != 0:
            return False
    return True


def verify_decomposition(lang, v: Sequence[int], dec: Decomposition) -> bool:
    """Exact language-wide check that the combination equals the indicator."""
    v = tuple(int(a) for a in v)
    lo, hi = dec.span
    lo = min(lo, 0)
    hi = max(hi, len(v) - 1)
    for w in lang.factors(hi - lo + 1):
        expected = 1 if w[-lo : -lo + len(v)] == v else 0
        if dec.evaluate(w, -lo) != expected:
            return False
    return True


def cylinder_decomposition(
    lang, v: Sequence[int], _memo: dict | None = None
) -> Decomposition:
    """Indicator of the cylinder of v as shifted letter indicators.

    Recursive construction on the pattern length: unique left or right
    extensions shift or reuse shorter decompositions, and the remaining case
    solves for the edge values of the extension tree of the inner word.
    Requires the screened graphs to be trees; the offending graph is carried
    by the error otherwise.
    """
    v = tuple(int(a) for a in v)
    if not v:
        raise ValueError("empty pattern")
    if v not in lang.factors(len(v)):
        raise ValueError("pattern not in language")
    memo: dict[Word, Decomposition] = {} if _memo is None else _memo
    return _decompose(lang, v, memo)


def _decompose(lang, v: Word, memo: dict) -> Decomposition:
    if v in memo:
        return memo[v]
    if len(v) == 1:
        result = Decomposition(pattern=v, terms={(v[0], 0): 1})
        memo[v] = result
        return result
    tail, head, inner = v[1:], v[:-1], v[1:-1]
    left_of_tail = sorted({a for (a, b) in _extension_edges(lang, tail)})
    if len(left_of_tail) == 1:
        result = _decompose(lang, tail, memo).shifted(1).renamed(v)
        memo[v] = result
        return result
    right_of_head = sorted({b for (a, b) in _extension_edges(lang, head)})
    if len(right_of_head) == 1:
        result = _decompose(lang, head, memo).renamed(v)
        memo[v] = result
        return result
    graph = extension_graph(lang, inner)
    defect = graph.tree_defect()
    if defect is not None:
        raise ValueError(
            f"extension graph of {inner} is not a tree ({defect}); "
            "decomposition needs a dendric language"
        )
    if len(graph.left) < 2 or len(graph.right) < 2:
        raise ValueError("extension tree has a singleton side outside shortcut cases")
    left_values = {
        a: _decompose(lang, (a,) + inner, memo) for a in graph.left
    }
    right_values = {
        b: _decompose(lang, inner + (b,), memo).shifted(1) for b in graph.right
    }
    solved = tree_edge_solve(
        left_values,
        right_values,
        graph.edges,
        is_zero=lambda dec: _combo_is_zero(lang, dec),
    )
    result = solved[(v[0], v[-1])].renamed(v)
    memo[v] = result
    return result


def _extension_edges(lang, w: Word) -> tuple[tuple[int, int], ...]:
    return extension_graph(lang, w).edges


# ---------------------------------------------------------------------------
# letters vs factors probe

@dataclass(frozen=True)
class FactorProbe:
    pattern: Word
    max_balance: int
    weight: int
    bound: int
    bounded: bool


@dataclass(frozen=True)
class ProbeReport:
    """Empirical companion to the letters-factors equivalence on dendric shifts."""

    horizon: int
    generated_length: int
    letter_bound: int
    letters_bounded: bool
    factor_probes: tuple[FactorProbe, ...]
    agreement: bool
    bound_dominates: bool


def _apparently_bounded(profile: BalanceProfile) -> bool:
    quarter = max(1, profile.horizon // 4)
    return max(profile.values) == max(profile.values[:quarter])


def letters_vs_factors_probe(
    sub: Substitution, max_factor_len: int, horizon: int, length: int
) -> ProbeReport:
    """Compare boundedness of letter and factor balance on scanned text.

    Refuses non-dendric-screened sources.  For each factor the decomposition
    weight times the alphabet size times the observed letter bound gives the
    theorem-shaped ceiling reported alongside the observed values.
    """
    lang = language_cache(sub)
    screen = dendric_check(lang, max_factor_len)
    if not screen.overall:
        raise ValueError(
            f"source fails the dendric screen at {screen.failures[0]!r}"
        )
    d = len(sub.alphabet)
    text = generated_text(sub, length)[:length]
    letters = [(a,) for a in range(d)]
    patterns = list(letters)
    for n in range(2, max_factor_len + 1):
        patterns.extend(sorted(lang.factors(n)))

    def scan(v: Word) -> BalanceProfile:
        return _profile_from_text(text, v, horizon)

    with ThreadPoolExecutor(max_workers=worker_count(len(patterns))) as pool:
        profiles = dict(zip(patterns, pool.map(scan, patterns)))
    letter_bound = max(profiles[v].max_value for v in letters)
    letters_bounded = all(_apparently_bounded(profiles[v]) for v in letters)
    memo: dict[Word, Decomposition] = {}
    probes = []
    for v in patterns[d:]:
        dec = cylinder_decomposition(lang, v, memo)
        weight = dec.weight(d)
        bound = d * weight * letter_bound
        probes.append(
            FactorProbe(
                pattern=v,
                max_balance=profiles[v].max_value,
                weight=weight,
                bound=bound,
                bounded=_apparently_bounded(profiles[v]),
            )
        )
    factors_bounded = all(p.bounded for p in probes)
    return ProbeReport(
        horizon=horizon,
        generated_length=len(text),
        letter_bound=letter_bound,
        letters_bounded=letters_bounded,
        factor_probes=tuple(probes),
        agreement=letters_bounded == factors_bounded,
        bound_dominates=all(p.max_balance <= p.bound for p in probes),
    )
