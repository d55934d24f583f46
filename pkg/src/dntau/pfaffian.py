"""Pfaffians over commutative coefficient rings, plus the Schur-Pfaffian and
de Bruijn identity verifiers.

Entries may be GaussianRational or Series (anything with +, -, * and
is_zero); the Pfaffian is computed by minor expansion along the last index
with memoization over index subsets, which minimizes ring multiplications
when entries are large series.  Plain recursion is refused above size 12;
the memoized path handles the sizes used here (<= ~16; beyond that the
subset table explodes and a structure-specific method is required).
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .exact import GR_ONE, GR_ZERO, GaussianRational, grat
from .series import Ring, Series


class SkewMatrix:
    """Skew-symmetric matrix given by its upper-triangular entries."""

    def __init__(self, size: int, upper: Dict[Tuple[int, int], object], zero=GR_ZERO):
        if size % 2:
            raise ValueError("Pfaffian requires even size")
        for (i, j) in upper:
            if not (0 <= i < j < size):
                raise ValueError(f"entry ({i},{j}) is not upper-triangular")
        self.size = size
        self.upper = upper
        self.zero = zero

    def entry(self, i: int, j: int):
        if i == j:
            return self.zero
        if i < j:
            return self.upper.get((i, j), self.zero)
        v = self.upper.get((j, i))
        return self.zero if v is None else -v

    def swap(self, i: int, j: int) -> "SkewMatrix":
        """Simultaneous row/column swap (a congruence by a transposition)."""
        perm = list(range(self.size))
        perm[i], perm[j] = perm[j], perm[i]
        out = {}
        for (a, b), v in self.upper.items():
            a2, b2 = perm[a], perm[b]
            if a2 < b2:
                out[(a2, b2)] = v
            else:
                out[(b2, a2)] = -v
        return SkewMatrix(self.size, out, self.zero)


def pfaffian(m: SkewMatrix, method: str = "auto"):
    """Pfaffian by minor expansion along the last index.

    method: 'memo' (subset memoization), 'recursive' (refused above size 12),
    or 'auto'.
    """
    if method == "auto":
        method = "recursive" if m.size <= 8 else "memo"
    if method == "recursive" and m.size > 12:
        raise ValueError("plain recursion refused above size 12; use the memoized path")
    if m.size > 24:
        raise ValueError("subset-memoized expansion is impractical above size 24")
    if m.size == 0:
        return GR_ONE

    cache: Dict[Tuple[int, ...], object] = {}

    def pf(idx: Tuple[int, ...]):
        if not idx:
            return None  # sentinel for "scalar 1"
        if len(idx) == 2:
            return m.entry(idx[0], idx[1])
        if method == "memo" and idx in cache:
            return cache[idx]
        last = idx[-1]
        total = None
        for pos in range(len(idx) - 1):
            a = m.entry(idx[pos], last)
            if hasattr(a, "is_zero") and a.is_zero():
                continue
            rest = idx[:pos] + idx[pos + 1:-1]
            sub = pf(rest)
            term = a if sub is None else a * sub
            if pos % 2:
                term = -term
            total = term if total is None else total + term
        if total is None:
            total = m.zero
        if method == "memo":
            cache[idx] = total
        return total

    out = pf(tuple(range(m.size)))
    return GR_ONE if out is None else out


def det_exact(rows: List[List[GaussianRational]]) -> GaussianRational:
    """Exact determinant over Q(i) by fraction-full Gaussian elimination."""
    n = len(rows)
    a = [row[:] for row in rows]
    det = GR_ONE
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not a[r][col].is_zero():
                piv = r
                break
        if piv is None:
            return GR_ZERO
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det = det * a[col][col]
        inv = a[col][col].inverse()
        for r in range(col + 1, n):
            if a[r][col].is_zero():
                continue
            f = a[r][col] * inv
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def pf_squared_equals_det(m: SkewMatrix) -> bool:
    rows = [[m.entry(i, j) if isinstance(m.entry(i, j), GaussianRational)
             else GaussianRational.of(m.entry(i, j))
             for j in range(m.size)] for i in range(m.size)]
    p = pfaffian(m)
    return p * p == det_exact(rows)


# ---------------------------------------------------------------------------
# Schur Pfaffian:  Pf((x_i-x_j)/(x_i+x_j)) = prod_{i<j} (x_i-x_j)/(x_i+x_j)
# ---------------------------------------------------------------------------

def verify_schur_pfaffian(n: int) -> dict:
    """Exact polynomial identity after clearing all (x_i+x_j) denominators.

    Clearing D = prod_{i<j}(x_i+x_j) against the matching-sum expansion of
    the Pfaffian turns both sides into honest polynomials:
        sum_M sign(M) prod_{(i,j) in M}(x_i-x_j) prod_{(i,j) not in M}(x_i+x_j)
        = prod_{i<j}(x_i-x_j).
    """
    if n < 1 or n > 3:
        raise ValueError("verify_schur_pfaffian supports 1 <= n <= 3")
    nv = 2 * n
    R = Ring([(f"x{i}", 1, 1) for i in range(nv)])
    xs = [Series.monomial(R, {f"x{i}": 1}) for i in range(nv)]
    pairs = list(combinations(range(nv), 2))

    lhs = Series.zero(R)
    for matching, sign in _matchings_with_sign(nv):
        term = Series.const(R, grat(sign))
        mset = set(matching)
        for (i, j) in pairs:
            factor = xs[i] - xs[j] if (i, j) in mset else xs[i] + xs[j]
            term = term * factor
        lhs = lhs + term
    rhs = Series.one(R)
    for (i, j) in pairs:
        rhs = rhs * (xs[i] - xs[j])
    ok = lhs == rhs
    return {"check": "schur_pfaffian", "n": n, "pass": bool(ok)}


def _matchings_with_sign(nv: int):
    """All perfect matchings of {0..nv-1} with the Pfaffian sign."""
    def rec(items: Tuple[int, ...]):
        if not items:
            yield (), 1
            return
        first = items[0]
        for pos in range(1, len(items)):
            partner = items[pos]
            rest = items[1:pos] + items[pos + 1:]
            for sub, sgn in rec(rest):
                yield ((first, partner),) + sub, sgn * ((-1) ** (pos - 1))
    yield from rec(tuple(range(nv)))


# ---------------------------------------------------------------------------
# de Bruijn: Pf(A) = "integral" of Pf(R) prod phi_i, with integration realized
# as an exact linear functional on polynomials (formal moment map)
# ---------------------------------------------------------------------------

def default_moments(i: int, upto: int) -> List[mpq]:
    """Deterministic exact moment table for contour i: mu_k = (k+1)/(k+i+2)."""
    return [mpq(k + 1, k + i + 2) for k in range(upto + 1)]


def _apply_moments(poly: Series, var_moments: Dict[str, List[mpq]]) -> GaussianRational:
    """Apply the product of per-variable moment functionals x^k -> mu[k].

    Every integration variable contributes its mu[e] factor, including e=0
    (the zeroth moment is not 1 in general).
    """
    out = GaussianRational(0)
    ring = poly.ring
    for e, c in poly.terms.items():
        f = c
        for name, k in zip(ring.names, e):
            f = f * grat(var_moments[name][k])
        out = out + f
    return out


def verify_de_bruijn(n: int,
                     kernel: Optional[Series] = None,
                     test_degrees: Optional[Sequence[int]] = None,
                     moments: Optional[Dict[int, List[mpq]]] = None) -> dict:
    """Check Pf(A_{ij}) = Lambda_1 ... Lambda_2n [Pf(R) prod phi_i] exactly.

    kernel: antisymmetric polynomial R(x, y) in a 2-variable ring named
    ("x", "y"); defaults to x - y.  phi_i = x^{d_i} monomial test functions.
    moments: per-index moment tables; defaults to a deterministic table.
    """
    if n < 1 or n > 2:
        raise ValueError("verify_de_bruijn supports 2n <= 4")
    nv = 2 * n
    KR = Ring([("x", 1, 1), ("y", 1, 1)])
    if kernel is None:
        kernel = Series.monomial(KR, {"x": 1}) - Series.monomial(KR, {"y": 1})
    flipped = kernel.inject(KR, {"x": "y", "y": "x"})
    if flipped != -kernel:
        raise ValueError("kernel is not antisymmetric")
    if test_degrees is None:
        test_degrees = [i % 3 for i in range(nv)]
    deg_R = max((e[0] + e[1] for e in kernel.terms), default=0)
    upto = deg_R * n + max(test_degrees) + 2
    if moments is None:
        moments = {i: default_moments(i, upto) for i in range(nv)}

    # LHS: pairwise double moments
    upper = {}
    R2 = Ring([("x", 1, 1), ("y", 1, 1)])
    for i, j in combinations(range(nv), 2):
        integrand = kernel.mul_monomial({"x": test_degrees[i], "y": test_degrees[j]})
        upper[(i, j)] = _apply_moments(integrand, {"x": moments[i], "y": moments[j]})
    lhs = pfaffian(SkewMatrix(nv, upper))

    # RHS: expand Pf(R(x_i, x_j)) prod x_i^{d_i} and apply the product functional
    RN = Ring([(f"x{i}", 1, 1) for i in range(nv)])
    rhs_val = GaussianRational(0)
    for matching, sign in _matchings_with_sign(nv):
        term = Series.const(RN, grat(sign))
        for (i, j) in matching:
            term = term * kernel.inject(RN, {"x": f"x{i}", "y": f"x{j}"})
        term = term.mul_monomial({f"x{i}": test_degrees[i] for i in range(nv)
                                  if test_degrees[i]})
        rhs_val = rhs_val + _apply_moments(
            term, {f"x{i}": moments[i] for i in range(nv)})
    ok = lhs == rhs_val
    return {"check": "de_bruijn", "n": n, "pass": bool(ok),
            "lhs": lhs.to_json(), "rhs": rhs_val.to_json()}
