"""Exact integer and rational linear algebra for incidence matrices.

Matrices are tuples of row tuples of Python ints, entry (a, b) counting the
letter a inside the image of b.  Characteristic polynomials are computed
exactly, roots are split into an exact part (zeros, roots of unity via
cyclotomic factors, remaining integer roots) and a residual part located
numerically with certified-radius intervals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

Matrix = tuple[tuple[int, ...], ...]
Poly = tuple[int, ...]  # coefficients, constant term first, no trailing zeros


class SpectralAmbiguityError(ValueError):
    """A root modulus could not be separated from 1 by exact means."""


# ---------------------------------------------------------------------------
# matrices

def identity(d: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = tuple(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def mat_pow(a: Matrix, n: int) -> Matrix:
    result = identity(len(a))
    base = a
    while n:
        if n & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        n >>= 1
    return result


def mat_vec(a: Matrix, v: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def mat_mod(a: Matrix, q: int) -> Matrix:
    return tuple(tuple(x % q for x in row) for row in a)


def column_sums(a: Matrix) -> tuple[int, ...]:
    return tuple(sum(col) for col in zip(*a))


def primitivity_exponent(a: Matrix) -> int | None:
    """Smallest k with a^k entrywise positive, or None.

    The search is capped by the Wielandt bound (d-1)^2 + 1; powers are taken
    over boolean row bitsets, so only reachability matters.
    """
    d = len(a)
    rows = [sum(1 << j for j, x in enumerate(row) if x > 0) for row in a]
    full = (1 << d) - 1
    cap = (d - 1) * (d - 1) + 1
    cur = rows
    for k in range(1, cap + 1):
        if all(r == full for r in cur):
            return k
        if k == cap:
            break
        cur = [
            _or_reduce(rows, cur[i], d) for i in range(d)
        ]
    return None


def _or_reduce(rows: list[int], mask: int, d: int) -> int:
    acc = 0
    for j in range(d):
        if mask >> j & 1:
            acc |= rows[j]
    return acc


def char_poly(a: Matrix) -> Poly:
    """Monic characteristic polynomial, by the Faddeev-LeVerrier recursion."""
    d = len(a)
    coeffs = [0] * (d + 1)
    coeffs[d] = 1
    n = identity(d)
    mk = a
    for k in range(1, d + 1):
        if k > 1:
            mk = mat_mul(a, n)
        tr = sum(mk[i][i] for i in range(d))
        assert tr % k == 0
        c = -(tr // k)
        coeffs[d - k] = c
        n = tuple(
            tuple(mk[i][j] + (c if i == j else 0) for j in range(d)) for i in range(d)
        )
    return tuple(coeffs)


def poly_eval_matrix(p: Poly, a: Matrix) -> Matrix:
    d = len(a)
    acc = tuple(tuple(0 for _ in range(d)) for _ in range(d))
    for c in reversed(p):
        acc = mat_mul(acc, a)
        acc = tuple(
            tuple(acc[i][j] + (c if i == j else 0) for j in range(d)) for i in range(d)
        )
    return acc


# ---------------------------------------------------------------------------
# integer polynomials

def poly_trim(p: Sequence[int]) -> Poly:
    coeffs = list(p)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def poly_degree(p: Poly) -> int:
    return len(p) - 1


def poly_mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [0] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x:
            for j, y in enumerate(q):
                out[i + j] += x * y
    return poly_trim(out)


def poly_eval(p: Poly, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_div_exact(p: Poly, monic: Poly) -> Poly | None:
    """Quotient p / monic when the division over Z is exact, else None."""
    if not monic or monic[-1] != 1:
        raise ValueError("divisor must be monic")
    if len(p) < len(monic):
        return None
    rem = list(p)
    out = [0] * (len(p) - len(monic) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = rem[i + len(monic) - 1]
        out[i] = c
        if c:
            for j, y in enumerate(monic):
                rem[i + j] -= c * y
    if any(rem[: len(monic) - 1]):
        return None
    return poly_trim(out)


def reciprocal(p: Poly) -> Poly:
    return poly_trim(tuple(reversed(p)))


def poly_content(p: Poly) -> int:
    g = 0
    for c in p:
        g = math.gcd(g, c)
    return g or 1


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Primitive gcd over Z with positive leading coefficient."""
    a = [Fraction(c) for c in p]
    b = [Fraction(c) for c in q]

    def frac_trim(v):
        while v and v[-1] == 0:
            v.pop()
        return v

    a, b = frac_trim(a), frac_trim(b)
    while b:
        # remainder of a by b over Q
        r = a[:]
        for i in range(len(r) - len(b), -1, -1):
            c = r[i + len(b) - 1] / b[-1]
            if c:
                for j, y in enumerate(b):
                    r[i + j] -= c * y
        a, b = b, frac_trim(r[: len(b) - 1])
    if not a:
        return ()
    denom = math.lcm(*(f.denominator for f in a))
    ints = poly_trim(tuple(int(f * denom) for f in a))
    cont = poly_content(ints)
    ints = tuple(c // cont for c in ints)
    if ints[-1] < 0:
        ints = tuple(-c for c in ints)
    return ints


def euler_phi(m: int) -> int:
    result = m
    n = m
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1
    if n > 1:
        result -= result // n
    return result


@lru_cache(maxsize=None)
def cyclotomic(m: int) -> Poly:
    """The m-th cyclotomic polynomial, exact integer coefficients."""
    if m == 1:
        return (-1, 1)
    num = tuple([-1] + [0] * (m - 1) + [1])  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            q = poly_div_exact(num, cyclotomic(d))
            assert q is not None
            num = q
    return num


# ---------------------------------------------------------------------------
# spectrum factorisation

@dataclass(frozen=True)
class SpectrumFactors:
    """Exact multiplicative split of a monic integer polynomial."""

    char: Poly
    zero_multiplicity: int
    cyclotomic_factors: tuple[tuple[int, int], ...]  # (index m, multiplicity)
    integer_roots: tuple[tuple[int, int], ...]  # (root, multiplicity), |root| >= 2
    residual: Poly  # monic, no integer roots, no cyclotomic factor

    @property
    def unit_root_count(self) -> int:
        return sum(euler_phi(m) * mult for m, mult in self.cyclotomic_factors)


def factor_spectrum(p: Poly, root_bound: int | None = None) -> SpectrumFactors:
    if not p or p[-1] != 1:
        raise ValueError("expected a monic polynomial")
    original = p
    zero_mult = 0
    while p[0] == 0:
        p = p[1:]
        zero_mult += 1
    d0 = poly_degree(original)
    cyc: list[tuple[int, int]] = []
    for m in _cyclotomic_candidates(d0):
        phi = cyclotomic(m)
        mult = 0
        while poly_degree(p) >= poly_degree(phi):
            q = poly_div_exact(p, phi)
            if q is None:
                break
            p = q
            mult += 1
        if mult:
            cyc.append((m, mult))
    bound = root_bound if root_bound is not None else 1 + max(abs(c) for c in p)
    ints: list[tuple[int, int]] = []
    for r in sorted(range(-bound, bound + 1), key=lambda x: (-abs(x), -x)):
        if abs(r) < 2 or poly_degree(p) < 1:
            continue
        if p[0] % r != 0:
            continue
        mult = 0
        while poly_degree(p) >= 1 and poly_eval(p, r) == 0:
            q = poly_div_exact(p, (-r, 1))
            assert q is not None
            p = q
            mult += 1
        if mult:
            ints.append((r, mult))
    return SpectrumFactors(
        char=original,
        zero_multiplicity=zero_mult,
        cyclotomic_factors=tuple(sorted(cyc)),
        integer_roots=tuple(sorted(ints, reverse=True)),
        residual=p,
    )


def _cyclotomic_candidates(d: int) -> list[int]:
    # phi(m) >= sqrt(m/2), so phi(m) <= d forces m <= 2 d^2 + 1
    return [m for m in range(1, 2 * d * d + 2) if euler_phi(m) <= d]


# ---------------------------------------------------------------------------
# residual roots with certified radii

def residual_roots(p: Poly, dps: int = 30) -> list[tuple[complex, float]]:
    """Roots of p as (approximation, radius) pairs."""
    if poly_degree(p) < 1:
        return []
    with mpmath.workdps(dps):
        roots, err = mpmath.polyroots(
            list(reversed(p)), maxsteps=200, extraprec=80, error=True
        )
        radius = max(float(err) * 16.0, 10.0 ** (5 - dps))
        return [(complex(r), radius) for r in roots]


_DPS_LADDER = (30, 60, 120, 240)


def _classify_moduli(p: Poly) -> tuple[list[tuple[complex, float]], list[str]]:
    """Locate residual roots and classify each modulus against 1.

    Returns the root list and per-root verdicts in {"lt", "gt", "straddle"}.
    """
    for dps in _DPS_LADDER:
        pairs = residual_roots(p, dps)
        verdicts = []
        for z, rad in pairs:
            mod = abs(z)
            if mod + rad < 1.0:
                verdicts.append("lt")
            elif mod - rad > 1.0:
                verdicts.append("gt")
            else:
                verdicts.append("straddle")
        if "straddle" not in verdicts:
            return pairs, verdicts
    return pairs, verdicts


# ---------------------------------------------------------------------------
# Perron data

@dataclass(frozen=True)
class SpectrumReport:
    """Perron value and eigenvector plus the exact spectrum split."""

    char: Poly
    factors: SpectrumFactors
    perron_value: float
    perron_exact: int | None  # exact integer Perron value when available
    perron_vector: tuple  # Fractions when exact, floats otherwise
    vector_exact: bool
    residual_bound: float | None  # float path only: max |Mx - perron x|
    other_root_moduli: tuple[float, ...]

    @property
    def frequencies_certified_rational(self) -> bool:
        return self.vector_exact


def _perron_value(M: Matrix, facts: SpectrumFactors) -> tuple[float, int | None]:
    candidates: list[tuple[float, int | None]] = []
    if facts.integer_roots:
        r = max(r for r, _ in facts.integer_roots)
        if r > 0:
            candidates.append((float(r), r))
    if facts.cyclotomic_factors and any(m == 1 for m, _ in facts.cyclotomic_factors):
        candidates.append((1.0, 1))
    best_residual = None
    if poly_degree(facts.residual) >= 1:
        pairs = residual_roots(facts.residual, 60)
        z, rad = max(pairs, key=lambda zr: abs(zr[0]))
        if abs(z.imag) > rad or z.real <= 0:
            raise SpectralAmbiguityError("dominant residual root is not positive real")
        best_residual = (z.real, rad)
        candidates.append((z.real, None))
    if not candidates:
        raise ValueError("matrix has no positive eigenvalue")
    value, exact = max(candidates, key=lambda ve: ve[0])
    if exact is not None and best_residual is not None:
        if not value > best_residual[0] + best_residual[1]:
            raise SpectralAmbiguityError(
                "cannot separate integer and residual dominant roots"
            )
    return value, exact


def _rational_kernel_vector(M: Matrix, lam: int) -> tuple[Fraction, ...]:
    """Normalized kernel vector of (M - lam I), exact Gaussian elimination."""
    d = len(M)
    rows = [
        [Fraction(M[i][j] - (lam if i == j else 0)) for j in range(d)]
        for i in range(d)
    ]
    pivots: list[int] = []
    r = 0
    for c in range(d):
        pivot = next((i for i in range(r, d) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for i in range(d):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(d) if c not in pivots]
    if len(free) != 1:
        raise ValueError("Perron eigenvalue is not simple")
    x = [Fraction(0)] * d
    x[free[0]] = Fraction(1)
    for row, c in zip(rows, pivots):
        x[c] = -sum(row[j] * x[j] for j in free)
    total = sum(x)
    if total == 0:
        raise ValueError("degenerate kernel vector")
    x = [v / total for v in x]
    if any(v <= 0 for v in x):
        raise ValueError("Perron eigenvector is not positive")
    return tuple(x)


@lru_cache(maxsize=None)
def perron_data(M: Matrix) -> SpectrumReport:
    """Perron eigenvalue and normalized eigenvector of a primitive matrix."""
    if primitivity_exponent(M) is None:
        raise ValueError("matrix is not primitive")
    p = char_poly(M)
    facts = factor_spectrum(p, root_bound=max(column_sums(M)))
    value, exact = _perron_value(M, facts)
    others = _other_root_moduli(facts, value, exact)
    if exact is not None:
        vec = _rational_kernel_vector(M, exact)
        return SpectrumReport(
            char=p,
            factors=facts,
            perron_value=float(exact),
            perron_exact=exact,
            perron_vector=vec,
            vector_exact=True,
            residual_bound=None,
            other_root_moduli=others,
        )
    arr = np.array(M, dtype=float)
    vals, vecs = np.linalg.eig(arr)
    idx = int(np.argmin(np.abs(vals - value)))
    vec = np.real(vecs[:, idx])
    if vec.sum() < 0:
        vec = -vec
    vec = vec / vec.sum()
    if np.any(vec <= 0):
        raise ValueError("Perron eigenvector is not positive")
    resid = float(np.max(np.abs(arr @ vec - value * vec)))
    if resid >= 1e-12:
        raise SpectralAmbiguityError(f"eigenvector residual too large: {resid:g}")
    return SpectrumReport(
        char=p,
        factors=facts,
        perron_value=float(value),
        perron_exact=None,
        perron_vector=tuple(float(x) for x in vec),
        vector_exact=False,
        residual_bound=resid,
        other_root_moduli=others,
    )


def _other_root_moduli(
    facts: SpectrumFactors, value: float, exact: int | None
) -> tuple[float, ...]:
    moduli: list[float] = [0.0] * facts.zero_multiplicity
    moduli += [1.0] * facts.unit_root_count
    used_perron = False
    for r, mult in facts.integer_roots:
        for _ in range(mult):
            if exact == r and not used_perron:
                used_perron = True
                continue
            moduli.append(float(abs(r)))
    if poly_degree(facts.residual) >= 1:
        for z, _rad in residual_roots(facts.residual, 60):
            if exact is None and not used_perron and abs(abs(z) - value) < 1e-9 and abs(z.imag) < 1e-9 and z.real > 0:
                used_perron = True
                continue
            moduli.append(abs(z))
    return tuple(sorted(moduli, reverse=True))


# ---------------------------------------------------------------------------
# Pisot / root-of-unity classification

class MatrixClass(Enum):
    PISOT = "pisot"
    SECOND_EIGENVALUE_OUTSIDE = "second-eigenvalue-outside"
    UNIT_MODULUS_NON_ROOT_OF_UNITY = "unit-modulus-non-root-of-unity"
    ROOT_OF_UNITY_PRESENT = "root-of-unity-present"


def pisot_classify(M: Matrix) -> MatrixClass:
    """Classify the non-Perron spectrum of a primitive matrix.

    Pisot means every non-Perron root has modulus strictly below 1.  A
    certified non-Perron root of modulus above 1, or a certified unit-modulus
    root that is not a root of unity, each refute balancedness; a root of
    unity in the spectrum leaves the question open.  Boundary cases that
    survive the exact cyclotomic split raise SpectralAmbiguityError.
    """
    if primitivity_exponent(M) is None:
        raise ValueError("matrix is not primitive")
    p = char_poly(M)
    facts = factor_spectrum(p, root_bound=max(column_sums(M)))
    value, exact = _perron_value(M, facts)
    has_unity = bool(facts.cyclotomic_factors) and not (
        exact == 1 and facts.cyclotomic_factors == ((1, 1),)
    )
    # integer roots other than the Perron value
    for r, mult in facts.integer_roots:
        copies = mult - (1 if exact == r else 0)
        if copies > 0 and abs(r) > 1:
            return MatrixClass.SECOND_EIGENVALUE_OUTSIDE
    if poly_degree(facts.residual) >= 1:
        pairs, verdicts = _classify_moduli(facts.residual)
        perron_idx = None
        if exact is None:
            perron_idx = max(range(len(pairs)), key=lambda i: abs(pairs[i][0]))
        for i, (z, rad) in enumerate(pairs):
            if i == perron_idx:
                continue
            if verdicts[i] == "gt":
                return MatrixClass.SECOND_EIGENVALUE_OUTSIDE
        straddlers = [
            i for i, v in enumerate(verdicts) if v == "straddle" and i != perron_idx
        ]
        if straddlers:
            return _resolve_straddlers(facts.residual, pairs, verdicts, perron_idx)
    return MatrixClass.ROOT_OF_UNITY_PRESENT if has_unity else MatrixClass.PISOT


def _resolve_straddlers(residual, pairs, verdicts, perron_idx) -> MatrixClass:
    """Exact fallback when numeric intervals touch the unit circle.

    Roots of h = gcd(q, q*) are closed under inversion; by Kronecker's
    theorem a nontrivial cyclotomic-free h has a root of modulus above 1.
    """
    h = poly_gcd(residual, reciprocal(residual))
    if poly_degree(h) < 1:
        raise SpectralAmbiguityError("modulus-1 ambiguity")
    perron_in_h = False
    if perron_idx is not None:
        z, rad = pairs[perron_idx]
        h_roots = residual_roots(h, 120)
        perron_in_h = any(abs(z - w) <= rad + r2 + 1e-30 for w, r2 in h_roots)
    if not perron_in_h:
        return MatrixClass.SECOND_EIGENVALUE_OUTSIDE
    h_roots = residual_roots(h, 120)
    outside = [w for w, r in h_roots if abs(w) - r > 1.0]
    z, rad = pairs[perron_idx]
    non_perron_outside = [w for w in outside if abs(w - z) > rad + 1e-20]
    if non_perron_outside:
        return MatrixClass.SECOND_EIGENVALUE_OUTSIDE
    undecided = [
        (w, r)
        for w, r in h_roots
        if abs(w) - r <= 1.0 <= abs(w) + r
    ]
    # off-circle roots of h pair up under inversion, so an odd count of
    # undecided roots forces at least one root exactly on the circle
    if len(undecided) % 2 == 1:
        return MatrixClass.UNIT_MODULUS_NON_ROOT_OF_UNITY
    raise SpectralAmbiguityError("modulus-1 ambiguity")


# ---------------------------------------------------------------------------
# powers modulo q

@dataclass(frozen=True)
class ModularPeriod:
    """Eventual cycle of the sequence M^n mod q."""

    modulus: int
    preperiod: int
    period: int
    cycle: tuple[Matrix, ...]  # matrices at exponents preperiod .. preperiod+period-1

    def matrix_at(self, n: int) -> Matrix:
        if n < self.preperiod:
            raise ValueError("exponent inside the preperiod")
        return self.cycle[(n - self.preperiod) % self.period]


def power_mod_period(M: Matrix, q: int) -> ModularPeriod:
    """Preperiod and period of (M^n mod q), by hash-based cycle detection."""
    if q < 2:
        raise ValueError("modulus must be at least 2")
    seen: dict[Matrix, int] = {}
    seq: list[Matrix] = []
    a = mat_mod(identity(len(M)), q)
    m = mat_mod(M, q)
    n = 0
    while a not in seen:
        seen[a] = n
        seq.append(a)
        a = mat_mul(a, m)
        a = mat_mod(a, q)
        n += 1
    rho = seen[a]
    pi = n - rho
    return ModularPeriod(modulus=q, preperiod=rho, period=pi, cycle=tuple(seq[rho:]))


def residue_cycle(mp: ModularPeriod, weights: Sequence[int]) -> tuple[int, ...]:
    """Residues of 1^T M^n w mod q along the eventual cycle."""
    out = []
    for c in mp.cycle:
        total = sum(sum(row[j] * weights[j] for j in range(len(weights))) for row in c)
        out.append(total % mp.modulus)
    return tuple(out)


def first_nonzero_exponent(
    mp: ModularPeriod, residues: Sequence[int], min_exponent: int
) -> int | None:
    """Smallest n >= min_exponent with a nonzero residue, None if all vanish."""
    start = max(min_exponent, mp.preperiod)
    for n in range(start, start + mp.period):
        if residues[(n - mp.preperiod) % mp.period] != 0:
            return n
    return None
