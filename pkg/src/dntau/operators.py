"""Kac-Schwarz operators a, b, c, g, A on pairs of z-series; wave function
and Grassmannian basis construction.

Conventions.  A wave pair (f1, f2) models the vector f1*e1 + i*f2*e2; the
fixed factor i in front of the second component is carried by consumers.
All operators act componentwise.  Component operators are first-order
expressions c * z^p * (z d/dz)^k applied by repeated action, never composed
symbolically.

Truncation-margin accounting: a component series carries an explicit trust
order M, meaning coefficients of z^e for e >= -M are exact.  Applying an
operator whose terms raise degree by at most p_max shrinks the window to
M - p_max (z-multiplication consults coefficients below the window), while
degree-lowering terms enlarge it.  Each application enforces and records
the loss; callers over-allocate and the module asserts sufficiency.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from gmpy2 import mpq

from .exact import (GR_I, GR_ONE, GaussianRational, double_factorial,
                    factorial, grat)
from .series import Ring, Series


@dataclass(frozen=True)
class Params:
    """Singularity parameters: D_N with Coxeter number h = 2N-2."""
    N: int

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("need N >= 2 so that h = 2N-2 is a positive even integer")

    @property
    def h(self) -> int:
        return 2 * self.N - 2

    @property
    def h1(self) -> int:
        return self.h

    @property
    def h2(self) -> int:
        return 2


ZRING = Ring([("z", 1, -1)])


def zmono(e: int, c=GR_ONE) -> Series:
    return Series(ZRING, {(e,): GaussianRational.of(c)})


class MarginError(ValueError):
    """Requested operation needs a deeper truncation; reports the margin."""

    def __init__(self, needed: int, have: int):
        super().__init__(f"insufficient truncation margin: need order >= {needed}, have {have}")
        self.needed = needed
        self.have = have


@dataclass(frozen=True)
class Component:
    """A single z-series with trust order M (exponents >= -M exact)."""
    series: Series
    order: int

    def truncated(self) -> "Component":
        return Component(self.series.filter(lambda e: e[0] >= -self.order), self.order)

    def coeff(self, e: int) -> GaussianRational:
        if e < -self.order:
            raise MarginError(-e, self.order)
        return self.series.terms.get((e,), GaussianRational(0))


class DiffOp:
    """Sum of terms c * z^p * (z d/dz)^k acting on z-series."""

    __slots__ = ("terms", "p_max")

    def __init__(self, terms: Sequence[Tuple[GaussianRational, int, int]]):
        self.terms = tuple(terms)
        self.p_max = max(p for _, p, _ in terms)

    def apply(self, comp: Component) -> Component:
        out: Dict[Tuple[int, ...], GaussianRational] = {}
        for (e,), x in comp.series.terms.items():
            for c, p, k in self.terms:
                v = x * c * (e ** k if k else 1)
                if v.is_zero():
                    continue
                key = (e + p,)
                cur = out.get(key)
                s = v if cur is None else cur + v
                if s.is_zero():
                    out.pop(key, None)
                else:
                    out[key] = s
        new_order = comp.order - self.p_max
        if new_order < 0:
            raise MarginError(self.p_max, comp.order)
        return Component(Series(ZRING, out, _checked=True), new_order).truncated()


def op_a(p: Params, comp: int) -> DiffOp:
    h = p.h
    if comp == 1:
        return DiffOp([(grat(0, -1), 1, 0),
                       (grat(mpq(1, h)), -h, 1),
                       (grat(mpq(-1, 2)), -h, 0)])
    return DiffOp([(grat(mpq(1, 2)), -2, 1), (grat(mpq(-1, 2)), -2, 0)])


def op_b(p: Params, comp: int) -> DiffOp:
    return DiffOp([(GR_ONE, p.h if comp == 1 else 2, 0)])


def apply_a_inv(p: Params, comp: int, v: Component) -> Component:
    """Inverse of the component operator a.

    Component 2 acts monomial-wise: a2^-1 z^{2m} = (2/(2m+1)) z^{2m+2}.
    Component 1 is the z^-1-adic fixed point of g = i z^-1 (f - D g) with
    D the degree-lowering part of a1; each pass pushes the correction
    deeper by h+1, so iteration terminates on the trust window.
    """
    h = p.h
    if comp == 2:
        out = {}
        for (e,), c in v.series.terms.items():
            if e % 2:
                raise ValueError("a2^-1 is defined on even powers only")
            m = e // 2
            out[(e + 2,)] = c * grat(mpq(2, 2 * m + 1))
        return Component(Series(ZRING, out, _checked=True), v.order + 2).truncated()
    D = DiffOp([(grat(mpq(1, h)), -h, 1), (grat(mpq(-1, 2)), -h, 0)])
    mul_inv = DiffOp([(GR_I, -1, 0)])        # (-i z)^-1 = i z^-1
    g = mul_inv.apply(Component(v.series, v.order + h))   # i z^-1 f, no real loss
    g = Component(g.series, v.order + 1).truncated()
    while True:
        nxt = mul_inv.apply(Component(v.series - D.apply(Component(g.series, g.order + h + 1)).series,
                                      v.order))
        nxt = Component(nxt.series, v.order + 1).truncated()
        if nxt.series == g.series:
            return nxt
        g = nxt


def apply_c(p: Params, comp: int, v: Component) -> Component:
    """c = b - (i a)^h, the Kac-Schwarz operator generating negative vectors."""
    h = p.h
    a = op_a(p, comp)
    w = v
    for _ in range(h):
        w = a.apply(w)
    ia_h = Component(w.series.scale(GR_I ** h), w.order)
    bv = op_b(p, comp).apply(v)
    order = min(bv.order, ia_h.order)
    return Component(bv.series - ia_h.series, order).truncated()


def apply_g(p: Params, v: Component) -> Component:
    """g = -i^h a2^{h+1}/(h+1) on a component-2 series."""
    h = p.h
    a2 = op_a(p, 2)
    w = v
    for _ in range(h + 1):
        w = a2.apply(w)
    return Component(w.series.scale(-(GR_I ** h) * grat(mpq(1, h + 1))), w.order)


def apply_A(p: Params, comp: int, v: Component) -> Component:
    """A = b a + 1/2 - i^h a^{h+1} (componentwise)."""
    h = p.h
    a = op_a(p, comp)
    b = op_b(p, comp)
    av = a.apply(v)
    bav = b.apply(av)
    w = av
    for _ in range(h):
        w = a.apply(w)
    pw = Component(w.series.scale(GR_I ** h), w.order)
    order = min(bav.order, v.order, pw.order)
    s = bav.series + v.series.scale(grat(mpq(1, 2))) - pw.series
    return Component(s, order).truncated()


@dataclass(frozen=True)
class WavePair:
    """Vector f1 e1 + i f2 e2 of V = C((z^-1))^2, with per-component trust."""
    comp1: Component
    comp2: Component

    def scale(self, c: GaussianRational) -> "WavePair":
        return WavePair(Component(self.comp1.series.scale(c), self.comp1.order),
                        Component(self.comp2.series.scale(c), self.comp2.order))


def apply_op(p: Params, tokens: Union[str, Sequence[str]], v: WavePair) -> WavePair:
    """Apply an operator word over {a, a^-1, b, c, g, A} to a wave pair.

    Tokens compose as operators: the word "a b" acts as a(b(v)).  g acts on
    the second component only (identity on the first).
    """
    if isinstance(tokens, str):
        tokens = tokens.split()
    c1, c2 = v.comp1, v.comp2
    for tok in reversed(list(tokens)):
        if tok == "a":
            c1, c2 = op_a(p, 1).apply(c1), op_a(p, 2).apply(c2)
        elif tok in ("a^-1", "ainv"):
            c1, c2 = apply_a_inv(p, 1, c1), apply_a_inv(p, 2, c2)
        elif tok == "b":
            c1, c2 = op_b(p, 1).apply(c1), op_b(p, 2).apply(c2)
        elif tok == "c":
            c1, c2 = apply_c(p, 1, c1), apply_c(p, 2, c2)
        elif tok == "g":
            c2 = apply_g(p, c2)
        elif tok == "A":
            c1, c2 = apply_A(p, 1, c1), apply_A(p, 2, c2)
        else:
            raise ValueError(f"unknown operator token {tok!r}")
    return WavePair(c1, c2)


# ---------------------------------------------------------------------------
# wave function
# ---------------------------------------------------------------------------

def _probe_diagonal(p: Params, comp: int, depth: int) -> None:
    """Assert A z^-n = d_n z^-n + lower order, d_n = n (comp 1), -n/2 (comp 2).

    Only the absence of degree-raising terms is guaranteed structurally; the
    diagonal is probed at runtime instead of hard-coded, so an operator-
    implementation bug surfaces here rather than as a silent wrong recursion.
    """
    for n in range(0, depth + 1, max(1, depth // 6)):
        v = Component(zmono(-n), n + 2 * p.h * (p.h + 1) + 4)
        image = apply_A(p, comp, v)
        expect = grat(n) if comp == 1 else grat(mpq(-n, 2))
        for (e,), c in image.series.terms.items():
            if e > -n:
                raise ValueError(f"A has a degree-raising term on component {comp}: "
                                 f"z^-{n} -> z^{e}")
            if e == -n and c != expect:
                raise ValueError(f"diagonal probe mismatch on component {comp} at n={n}: "
                                 f"{c} != {expect}")


def solve_wave(p: Params, order: int) -> WavePair:
    """Unique normalized solution of the quantum spectral curve A Psi = 0.

    Peels the graded-diagonal part D off A and solves degree by degree;
    A - D strictly lowers degree, so coefficients are determined by a
    recursion which is exact (no margin loss: intermediates are finite
    Laurent polynomials).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    _probe_diagonal(p, 1, min(order, 8))
    _probe_diagonal(p, 2, min(order, 8))
    comps = []
    for comp in (1, 2):
        psi = dict({(0,): GR_ONE})
        big = order + p.h * (p.h + 1) + 4
        for n in range(1, order + 1):
            cur = Component(Series(ZRING, dict(psi), _checked=True), big)
            r = apply_A(p, comp, cur).series.terms.get((-n,))
            if r is None:
                continue
            # diagonal eigenvalue: n on component 1, -n/2 on component 2
            cn = -r * grat(mpq(1, n)) if comp == 1 else r * grat(mpq(2, n))
            if not cn.is_zero():
                psi[(-n,)] = cn
        comps.append(Component(Series(ZRING, psi, _checked=True), order))
    return WavePair(comps[0], comps[1])


def psi2_closed_form(p: Params, m: int, order: int) -> Component:
    """Psi_m^(2) = e^g (2m-1)!!/(2 i z^2)^m, written out termwise.

    The k-th correction is (i^h/((h+1)(2z^2)^{h+1}))^k (2(m+hk+k)-1)!!/k!
    relative to the leading monomial; negative m uses the signed double
    factorial convention.
    """
    h = p.h
    base = (GR_I ** h) * grat(mpq(1, (h + 1) * 2 ** (h + 1)))
    lead = (GaussianRational(0, 2) ** (-m)) if m < 0 else (GaussianRational(0, 2).inverse() ** m)
    out: Dict[Tuple[int, ...], GaussianRational] = {}
    k = 0
    while -2 * m - (2 * h + 2) * k >= -order:
        c = lead * (base ** k) * grat(double_factorial(2 * (m + h * k + k) - 1) * mpq(1, factorial(k)))
        if not c.is_zero():
            out[(-2 * m - (2 * h + 2) * k,)] = c
        k += 1
    return Component(Series(ZRING, out, _checked=True), order)


def gaussian_oracle(p: Params, order: int) -> WavePair:
    """Independent perturbative-Gaussian construction of the wave function.

    Component 1: Wick expansion of the Gaussian integral in the bookkeeping
    variable alpha with alpha^2 = i z^{-h-1}/h and moments <y^{2n}> = (2n-1)!!.
    Component 2: the all-orders closed form.  Must agree with solve_wave
    coefficient-for-coefficient.
    """
    from .series import series_exp
    h = p.h
    alpha_cap = 2 * (order // (h + 1)) + 2
    R = Ring([("al", 1, 1), ("y", 1, 0)], weight_cap=alpha_cap)
    arg = Series.zero(R)
    binom_row = [mpq(factorial(2 * h + 1), factorial(j) * factorial(2 * h + 2 - j))
                 for j in range(0, 2 * h + 3)]
    for j in range(3, 2 * h + 3):
        c = grat(mpq(-2, h) * binom_row[j] * mpq(1, 2 ** j))
        arg = arg + Series.monomial(R, {"al": j - 2, "y": j}, c)
    expanded = series_exp(arg)
    by_alpha: Dict[int, GaussianRational] = {}
    for (ea, ey), c in expanded.terms.items():
        if ey % 2:
            continue
        v = c * grat(double_factorial(ey - 1))
        by_alpha[ea] = by_alpha[ea] + v if ea in by_alpha else v
    terms: Dict[Tuple[int, ...], GaussianRational] = {}
    alpha_sq = GR_I * grat(mpq(1, h))
    for ea, c in by_alpha.items():
        if ea % 2:
            if not c.is_zero():
                raise RuntimeError("odd alpha power survived Gaussian integration")
            continue
        j = ea // 2
        e = -(h + 1) * j
        if e < -order:
            continue
        v = c * (alpha_sq ** j)
        if not v.is_zero():
            terms[(e,)] = terms[(e,)] + v if (e,) in terms else v
    comp1 = Component(Series(ZRING, terms, _checked=True), order)
    return WavePair(comp1, psi2_closed_form(p, 0, order))


@dataclass(frozen=True)
class GrBasis:
    """Basis of the Grassmannian point: Psi_k for |k| <= K, Phi_k for k >= 1."""
    params: Params
    K: int
    psis: Dict[int, WavePair]
    phis: Dict[int, WavePair]

    def psi(self, k: int) -> WavePair:
        return self.psis[k]


def phi_vector(k: int, order: int) -> WavePair:
    """Phi_k = i z^{2k-1} e2 (the i carried by the wave-pair convention)."""
    return WavePair(Component(Series.zero(ZRING), order),
                    Component(zmono(2 * k - 1), order))


def build_basis(p: Params, K: int, order: int) -> GrBasis:
    """Psi_k = (i a)^k Psi for k > 0; Psi_{-k-1} = -2i/(2k+1) c Psi_{-k}.

    The wave function is solved deep enough that every member keeps trust
    order >= ``order``; a MarginError reports the required depth otherwise.
    """
    h = p.h
    need = order + max(K * h, 2 * K) + 2 * K + 4
    psi = solve_wave(p, need)
    psis: Dict[int, WavePair] = {0: psi}
    cur = psi
    for k in range(1, K + 1):
        nxt = apply_op(p, "a", cur)
        cur = WavePair(Component(nxt.comp1.series.scale(GR_I), nxt.comp1.order),
                       Component(nxt.comp2.series.scale(GR_I), nxt.comp2.order))
        psis[k] = cur
    cur = psi
    for k in range(0, K):
        c1 = apply_c(p, 1, cur.comp1)
        c2 = apply_c(p, 2, cur.comp2)
        s = grat(0, mpq(-2, 2 * k + 1))
        cur = WavePair(Component(c1.series.scale(s), c1.order),
                       Component(c2.series.scale(s), c2.order))
        psis[-k - 1] = cur
    for k, w in psis.items():
        if min(w.comp1.order, w.comp2.order) < order:
            raise MarginError(order, min(w.comp1.order, w.comp2.order))
    phis = {k: phi_vector(k, order) for k in range(1, K + 1)}
    return GrBasis(p, K, psis, phis)
