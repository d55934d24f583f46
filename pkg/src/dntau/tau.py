"""Tau-function assembly and verification.

Miwa form.  With u_{a,i} := z_{a,i}^{-1} the Pfaffian formula reads

    tau(Z1,Z2) = tau(0) * 2^{(N1+N2)/2} i^{-N1^2} * Pf(Phi~) / prod K~_{ij},

with K~(z_i,z_j) = (u_j-u_i)/(u_j+u_i) over same-block pairs and entries
Phi~ = kernel_multiple*K~ + regular (cross entries carry an extra i).  Two
computations of this object are implemented:

* a small-N symbolic route: the Pfaffian is expanded over matchings, all
  (u_i+u_j) denominators are cleared into polynomials, and the Vandermonde
  product divides out exactly (temporary positive z-powers cancel by
  construction; any residue raises);

* the production evaluation route: scaling u = eps*x at exact rational
  points turns every K~ into a constant, the Pfaffian is computed over
  Q(i)[eps]/(eps^{W+1}) by Schur-complement reduction, and the weight
  slices of tau are reconstructed by solving an exact overdetermined
  linear system in the power-sum basis.  Even power sums are carried as
  unknowns and must come out exactly zero.

The t-form tau(t1,t2) follows from p_m^{(a)} = -(m/2) t_{a,m}.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .exact import (GR_I, GR_ONE, GR_ZERO, GaussianRational, factorial, grat)
from .operators import Params, build_basis
from .series import (Ring, Series, exact_div_linear, series_exp, series_log,
                     symmetric_to_powersums)
from .twopoint import TwoPoint, build_twopoint

# ---------------------------------------------------------------------------
# configuration and t-variable ring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MiwaConfig:
    """Miwa variable counts per block and the truncation weight."""
    n1: int
    n2: int
    weight: int

    def __post_init__(self):
        if (self.n1 + self.n2) % 2:
            raise ValueError("N1 + N2 must be even")
        if self.weight < 1:
            raise ValueError("weight must be >= 1")

    def faithful(self) -> bool:
        ok1 = self.n1 == 0 or self.n1 >= self.weight
        ok2 = self.n2 == 0 or self.n2 >= self.weight
        return ok1 and ok2


def odd_times(W: int) -> List[int]:
    return list(range(1, W + 1, 2))


def t_ring(W: int, prefix: str = "t") -> Ring:
    vars_ = []
    for a in (1, 2):
        for m in odd_times(W):
            vars_.append((f"{prefix}{a}_{m}", 1, m))
    return Ring(vars_, weight_cap=W)


@dataclass(frozen=True)
class TauSeries:
    """tau as a weight-truncated polynomial in the odd times t_{a,m}."""
    params: Params
    weight: int
    series: Series

    def coeff(self, mono: Dict[Tuple[int, int], int]) -> GaussianRational:
        """Coefficient of prod t_{a,m}^e for {(a,m): e}."""
        return self.series.coeff({f"t{a}_{m}": e for (a, m), e in mono.items()})

    def block_weights(self, exps) -> Tuple[int, int]:
        ring = self.series.ring
        w1 = w2 = 0
        for name, e in zip(ring.names, exps):
            a, m = name[1:].split("_")
            if e:
                if a == "1":
                    w1 += int(m) * e
                else:
                    w2 += int(m) * e
        return w1, w2


# ---------------------------------------------------------------------------
# two-point data for a given configuration
# ---------------------------------------------------------------------------

def twopoint_suite(p: Params, window: int) -> Dict[Tuple[int, int], TwoPoint]:
    """phi~ regular parts certified through total weight ``window``."""
    K = max(window, 2)
    basis = build_basis(p, K, window + 2)
    return {(1, 1): build_twopoint(basis, 1, 1, window=window),
            (1, 2): build_twopoint(basis, 1, 2, window=window),
            (2, 2): build_twopoint(basis, 2, 2, window=window)}


# ---------------------------------------------------------------------------
# symbolic Miwa route (small configurations; full cancellation assertions)
# ---------------------------------------------------------------------------

def _matchings_with_sign(nv: int):
    def rec(items):
        if not items:
            yield (), 1
            return
        first = items[0]
        for pos in range(1, len(items)):
            rest = items[1:pos] + items[pos + 1:]
            for sub, sgn in rec(rest):
                yield ((first, items[pos]),) + sub, sgn * ((-1) ** (pos - 1))
    yield from rec(tuple(range(nv)))


def miwa_ring(cfg: MiwaConfig, cap: int) -> Ring:
    vars_ = [(f"z1_{i+1}", 1, 1) for i in range(cfg.n1)]
    vars_ += [(f"z2_{j+1}", 1, 1) for j in range(cfg.n2)]
    return Ring(vars_, weight_cap=cap)


def miwa_tau(tps: Dict[Tuple[int, int], TwoPoint], cfg: MiwaConfig) -> Series:
    """Symbolic tau(Z1,Z2) as a series in the z_{a,i}^{-1} (exponents count
    inverse powers).  Practical for N1+N2 <= 8; the evaluation route covers
    larger configurations.
    """
    n = cfg.n1 + cfg.n2
    if n > 8:
        raise ValueError("symbolic Miwa route is limited to N1+N2 <= 8")
    W = cfg.weight
    for tp in tps.values():
        if tp.window < W:
            raise ValueError("two-point windows are narrower than the requested weight")
    labels = [(1, i) for i in range(cfg.n1)] + [(2, j) for j in range(cfg.n2)]
    names = [f"z{a}_{i+1}" for (a, i) in labels]
    block_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)
                   if labels[i][0] == labels[j][0]]
    ring = miwa_ring(cfg, W + len(block_pairs))

    def u(i):
        return Series.monomial(ring, {names[i]: 1})

    def entry_cleared(i, j):
        a, b = labels[i][0], labels[j][0]
        tp = tps[(min(a, b), max(a, b))]
        reg = tp.regular_u_series(ring, names[i], names[j])
        if a == b:
            # (u_j - u_i)/2 + (u_i + u_j) * regular   [K~ pole cleared]
            return (u(j) - u(i)).scale(tp.kernel_multiple) + (u(i) + u(j)) * reg
        return reg.scale(GR_I)

    pref = (GR_I ** (-cfg.n1 * cfg.n1)) * grat(mpq(2) ** ((cfg.n1 + cfg.n2) // 2))
    total = Series.zero(ring)
    for matching, sgn in _matchings_with_sign(n):
        mset = set(matching)
        term = Series.const(ring, grat(sgn))
        for (i, j) in matching:
            term = term * entry_cleared(i, j)
        for (i, j) in block_pairs:
            if (i, j) not in mset:
                term = term * (u(i) + u(j))
        total = total + term
    # divide by prod (u_j - u_i) over same-block pairs; exact, else raises
    for (i, j) in block_pairs:
        total = exact_div_linear(total, names[j], names[i])
    out = total.scale(pref).to_ring(miwa_ring(cfg, W))
    for e in out.terms:
        if any(x < 0 for x in e):
            raise ValueError("positive z-power survived the Pfaffian assembly")
    if out.constant_term() != GR_ONE:
        raise ValueError(f"tau(0) != 1 in Miwa assembly: {out.constant_term()}")
    return out


def miwa_invert(miwa: Series, cfg: MiwaConfig, p: Params) -> TauSeries:
    """Invert the Miwa map: symmetric series -> power sums -> odd times.

    Requires N_a >= W per nonempty block; detects (and refuses) any even
    power-sum dependence, which would signal an upstream bug.
    """
    W = cfg.weight
    if not cfg.faithful():
        raise ValueError("refusing unfaithful inversion: need N_a >= weight per block")
    cur = miwa
    for a, count in ((1, cfg.n1), (2, cfg.n2)):
        if count == 0:
            continue
        block = [f"z{a}_{i+1}" for i in range(count)]
        keep = [v for v in cur.ring.names if v not in block]
        tgt_vars = [(f"q{a}_{m}", 1, m) for m in range(1, W + 1)]
        tgt_vars += [(v, 1, 1) for v in keep if v.startswith("z")]
        tgt_vars += [(v, 1, int(v.split("_")[1])) for v in keep if v.startswith("q")]
        tgt = Ring(tgt_vars, weight_cap=W)
        cur = symmetric_to_powersums(cur, block, [f"q{a}_{m}" for m in range(1, W + 1)],
                                     tgt, W)
    # substitute p_m^{(a)} = -(m/2) t_{a,m}; even power sums must be absent
    tring = t_ring(W)
    out = Series.zero(tring)
    for e, c in cur.terms.items():
        mono: Dict[str, int] = {}
        coef = c
        for name, k in zip(cur.ring.names, e):
            if not k:
                continue
            a, m = name[1:].split("_")
            m = int(m)
            if m % 2 == 0:
                raise ValueError(f"even power sum p_{m} occurs in the Miwa series")
            mono[f"t{a}_{m}"] = k
            coef = coef * (grat(mpq(-m, 2)) ** k)
        out = out + Series.monomial(tring, mono, coef)
    return TauSeries(p, W, out)


# ---------------------------------------------------------------------------
# evaluation engine: eps-polynomials over Q(i), Pfaffian by reduction
# ---------------------------------------------------------------------------

EPoly = List[GaussianRational]


def ep_zero(cap: int) -> EPoly:
    return [GR_ZERO] * (cap + 1)


def ep_const(c: GaussianRational, cap: int) -> EPoly:
    out = ep_zero(cap)
    out[0] = c
    return out


def ep_add(a: EPoly, b: EPoly) -> EPoly:
    return [x + y for x, y in zip(a, b)]


def ep_sub(a: EPoly, b: EPoly) -> EPoly:
    return [x - y for x, y in zip(a, b)]


def ep_scale(a: EPoly, c: GaussianRational) -> EPoly:
    return [x * c for x in a]


def ep_mul(a: EPoly, b: EPoly) -> EPoly:
    cap = len(a) - 1
    out = ep_zero(cap)
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j in range(cap + 1 - i):
            y = b[j]
            if y.is_zero():
                continue
            out[i + j] = out[i + j] + x * y
    return out


def ep_inv(a: EPoly) -> EPoly:
    if a[0].is_zero():
        raise ZeroDivisionError("eps-polynomial with zero constant term")
    cap = len(a) - 1
    inv0 = a[0].inverse()
    out = ep_zero(cap)
    out[0] = inv0
    for n in range(1, cap + 1):
        s = GR_ZERO
        for k in range(1, n + 1):
            if not a[k].is_zero():
                s = s + a[k] * out[n - k]
        out[n] = -(inv0 * s)
    return out


def pfaffian_eps(matrix: List[List[EPoly]], cap: int) -> EPoly:
    """Pfaffian over Q(i)[eps]/(eps^{cap+1}) by Schur-complement reduction.

    Uses Pf([[C,D],[-D^T,E]]) = Pf(C) Pf(E + D^T C^{-1} D) on leading 2x2
    blocks; pivots need a unit (nonzero constant term), found by symmetric
    row/column swaps which each flip the sign.
    """
    n = len(matrix)
    if n % 2:
        raise ValueError("odd size")
    A = [row[:] for row in matrix]
    sign = 1
    pf = ep_const(GR_ONE, cap)
    idx = list(range(n))
    while idx:
        i0 = idx[0]
        piv_pos = None
        for pos in range(1, len(idx)):
            if not A[i0][idx[pos]][0].is_zero():
                piv_pos = pos
                break
        if piv_pos is None:
            # try to swap a usable row into position 0
            found = False
            for pos0 in range(1, len(idx)):
                for pos1 in range(1, len(idx)):
                    if pos1 != pos0 and not A[idx[pos0]][idx[pos1]][0].is_zero():
                        idx[0], idx[pos0] = idx[pos0], idx[0]
                        sign = -sign
                        found = True
                        break
                if found:
                    break
            if not found:
                raise ZeroDivisionError("no unit pivot: constant matrix is singular")
            continue
        if piv_pos != 1:
            idx[1], idx[piv_pos] = idx[piv_pos], idx[1]
            sign = -sign
        i1 = idx[1]
        c = A[i0][i1]
        pf = ep_mul(pf, c)
        cinv = ep_inv(c)
        rest = idx[2:]
        for pa in range(len(rest)):
            ia = rest[pa]
            d0a, d1a = A[i0][ia], A[i1][ia]
            for pb in range(pa + 1, len(rest)):
                ib = rest[pb]
                corr = ep_sub(ep_mul(d1a, A[i0][ib]), ep_mul(d0a, A[i1][ib]))
                corr = ep_mul(corr, cinv)
                upd = ep_add(A[ia][ib], corr)
                A[ia][ib] = upd
                A[ib][ia] = ep_scale(upd, grat(-1))
        idx = rest
    return ep_scale(pf, grat(sign))


# ---------------------------------------------------------------------------
# tau via evaluation + power-sum reconstruction
# ---------------------------------------------------------------------------

def _partitions(n: int, max_part: Optional[int] = None):
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def _sample_block(rng: random.Random, count: int) -> List[mpq]:
    """Distinct positive sample values; small integers keep the exact
    eliminations cheap (heights stay bounded by small minors)."""
    vals: List[mpq] = []
    seen = set()
    while len(vals) < count:
        v = mpq(rng.randint(1, 60 + 4 * count))
        if v in seen:
            continue
        seen.add(v)
        vals.append(v)
    return vals


def tau_eps_at_point(tps: Dict[Tuple[int, int], TwoPoint], cfg: MiwaConfig,
                     xs: Sequence[mpq], ys: Sequence[mpq]) -> EPoly:
    """tau in Miwa variables u = eps*(x, y), as an eps-polynomial.

    Same-block kernels K~ are scale-invariant, hence exact constants; the
    Pfaffian prefactor identity forces the constant slice to equal tau(0)=1,
    which is asserted.
    """
    W = cfg.weight
    n = cfg.n1 + cfg.n2
    labels = [(1, i) for i in range(cfg.n1)] + [(2, j) for j in range(cfg.n2)]
    vals = list(xs) + list(ys)
    mat: List[List[EPoly]] = [[ep_zero(W) for _ in range(n)] for _ in range(n)]
    kappa_prod = GR_ONE
    for i in range(n):
        for j in range(i + 1, n):
            a, b = labels[i][0], labels[j][0]
            tp = tps[(min(a, b), max(a, b))]
            reg = tp.eps_poly(vals[i], vals[j], W)
            if a == b:
                kap = grat(mpq(vals[j] - vals[i]) / mpq(vals[j] + vals[i]))
                kappa_prod = kappa_prod * kap
                ent = ep_add(ep_const(kap * tp.kernel_multiple, W), reg)
            else:
                ent = ep_scale(reg, GR_I)
            mat[i][j] = ent
            mat[j][i] = ep_scale(ent, grat(-1))
    pf = pfaffian_eps(mat, W)
    pref = (GR_I ** (-cfg.n1 * cfg.n1)) * grat(mpq(2) ** (n // 2)) / kappa_prod
    out = ep_scale(pf, pref)
    if out[0] != GR_ONE:
        raise ValueError(f"tau(0) != 1 at evaluation point: {out[0]}")
    return out


def _solve_exact(rows: List[List[mpq]], rhs: List[GaussianRational]
                 ) -> Optional[List[GaussianRational]]:
    """Solve a square rational system with Gaussian elimination; None if singular."""
    sols = _solve_many(rows, [rhs])
    return None if sols is None else sols[0]


def _solve_many(rows: List[List[mpq]], rhs_list: List[List[GaussianRational]]
                ) -> Optional[List[List[GaussianRational]]]:
    """Solve A x = b for many right-hand sides with one elimination pass."""
    n = len(rows)
    a = [row[:] for row in rows]
    bs = [rhs[:] for rhs in rhs_list]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if a[r][col]:
                piv = r
                break
        if piv is None:
            return None
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            for b in bs:
                b[col], b[piv] = b[piv], b[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        ginv = grat(inv)
        for b in bs:
            b[col] = b[col] * ginv
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                gf = grat(f)
                for b in bs:
                    if not b[col].is_zero():
                        b[r] = b[r] - b[col] * gf
    return bs


def tau_series(p: Params, cfg: MiwaConfig,
               tps: Optional[Dict[Tuple[int, int], TwoPoint]] = None,
               seed: int = 11, extra_rows: int = 4) -> TauSeries:
    """tau(t1,t2) to weight W through the Miwa-Pfaffian evaluation engine.

    The weight-w slice is sum_{lam,mu} c_{lam,mu} p_lam(x) p_mu(y), a tensor
    system over the two blocks; evaluating on an (x-point) x (y-point) grid
    lets two stages of small exact solves recover the coefficients: first
    the lambda-profiles at each y-point, then c along the y-direction.  All
    partitions (even parts included) enter the ansatz; even-part
    coefficients must come out exactly zero, and surplus grid rows must
    reproduce their tau slices exactly, otherwise this raises.
    """
    W = cfg.weight
    if not cfg.faithful():
        raise ValueError("refusing unfaithful configuration: need N_a >= weight per block")
    if tps is None:
        tps = twopoint_suite(p, W)
    from .series import powersum_values

    lam_all = ([lam for w1 in range(0, W + 1) for lam in _partitions(w1)]
               if cfg.n1 else [()])
    mu_by_wt = {r: (list(_partitions(r)) if cfg.n2 or r == 0 else [])
                for r in range(0, W + 1)}
    lams_by_wt = {w: [lam for lam in lam_all
                      if sum(lam) <= w and mu_by_wt[w - sum(lam)]]
                  for w in range(1, W + 1)}
    n_i = (max(len(v) for v in lams_by_wt.values()) + extra_rows) if cfg.n1 else 1
    n_j = (max(len(v) for v in mu_by_wt.values()) + extra_rows) if cfg.n2 else 1
    rng = random.Random(seed)
    Xs = [_sample_block(rng, cfg.n1) for _ in range(n_i)]
    Ys = [_sample_block(rng, cfg.n2) for _ in range(n_j)]
    PX = [powersum_values(x, W) if cfg.n1 else [] for x in Xs]
    PY = [powersum_values(y, W) if cfg.n2 else [] for y in Ys]

    values = [[tau_eps_at_point(tps, cfg, Xs[i], Ys[j]) for j in range(n_j)]
              for i in range(n_i)]

    def p_of(plist: List[mpq], lam: Tuple[int, ...]) -> mpq:
        out = mpq(1)
        for part in lam:
            out *= plist[part - 1]
        return out

    tring = t_ring(W)
    out = Series.zero(tring)
    for w in range(1, W + 1):
        lams = lams_by_wt[w]
        k = len(lams)
        rows = [[p_of(PX[i], lam) for lam in lams] for i in range(n_i)]
        rhs_cols = [[values[i][j][w] for i in range(n_i)] for j in range(n_j)]
        # stage A: lambda-profiles a_{lam}^{(j)} = sum_mu c_{lam,mu} p_mu(Y_j)
        sq = [rows[i][:] for i in range(k)]
        profiles = _solve_many(sq, [col[:k] for col in rhs_cols])
        if profiles is None:
            raise RuntimeError(f"x-side power-sum matrix singular at weight {w}")
        for j in range(n_j):
            for i in range(k, n_i):
                acc = GR_ZERO
                for c, entry in zip(profiles[j], rows[i]):
                    acc = acc + c * grat(entry)
                if acc != values[i][j][w]:
                    raise ValueError(f"x-side overdetermination failed at weight {w}")
        # stage B: resolve each profile along the y-direction
        for li, lam in enumerate(lams):
            r = w - sum(lam)
            mus = mu_by_wt[r]
            kb = len(mus)
            brows = [[p_of(PY[j], mu) for mu in mus] for j in range(n_j)]
            bsol = _solve_many([brows[j][:] for j in range(kb)],
                               [[profiles[j][li] for j in range(kb)]])
            if bsol is None:
                raise RuntimeError(f"y-side power-sum matrix singular at weight {w}")
            csol = bsol[0]
            for j in range(kb, n_j):
                acc = GR_ZERO
                for c, entry in zip(csol, brows[j]):
                    acc = acc + c * grat(entry)
                if acc != profiles[j][li]:
                    raise ValueError(f"y-side overdetermination failed at weight {w}")
            for mu, c in zip(mus, csol):
                if c.is_zero():
                    continue
                if any(x % 2 == 0 for x in lam) or any(x % 2 == 0 for x in mu):
                    raise ValueError(f"even power sum detected at weight {w}: {(lam, mu)}")
                mono: Dict[str, int] = {}
                coef = c
                for part in lam:
                    mono[f"t1_{part}"] = mono.get(f"t1_{part}", 0) + 1
                    coef = coef * grat(mpq(-part, 2))
                for part in mu:
                    mono[f"t2_{part}"] = mono.get(f"t2_{part}", 0) + 1
                    coef = coef * grat(mpq(-part, 2))
                out = out + Series.monomial(tring, mono, coef)
    out = out + Series.one(tring)
    return TauSeries(p, W, out)


# ---------------------------------------------------------------------------
# verifiers: symmetry, rationality, Hirota, string equation
# ---------------------------------------------------------------------------

def verify_symmetry(tau: TauSeries) -> dict:
    """tau(t1, t2) = tau(t1, -t2): every odd total t2-degree term vanishes."""
    bad = []
    ring = tau.series.ring
    for e, c in tau.series.terms.items():
        deg2 = sum(k for name, k in zip(ring.names, e) if name.startswith("t2"))
        if deg2 % 2:
            bad.append((e, c))
    return {"check": "symmetry", "h": tau.params.h, "weight": tau.weight,
            "pass": not bad,
            "residual_max_monomial": None if not bad else repr(bad[0])}


def verify_rationality(tau: TauSeries) -> dict:
    """tau(i Z1, Z2) rational: c * (-i)^{block-1 weight} must be real for
    every retained monomial, reflecting the rationality of the underlying
    enumerative invariants."""
    bad = []
    for e, c in tau.series.terms.items():
        w1, _ = tau.block_weights(e)
        v = c * ((-GR_I) ** w1)
        if not v.is_rational():
            bad.append((e, c))
    return {"check": "rationality", "h": tau.params.h, "weight": tau.weight,
            "pass": not bad,
            "residual_max_monomial": None if not bad else repr(bad[0])}


def _double_ring(W: int, window: int) -> Ring:
    vars_ = []
    for pref in ("t", "s"):
        for a in (1, 2):
            for m in odd_times(W):
                vars_.append((f"{pref}{a}_{m}", 1, m))
    return Ring(vars_, weight_cap=window)


def _vertex_product(tau: TauSeries, a: int, window: int, pref_t: str, pref_s: str,
                    ring: Ring) -> Dict[int, Series]:
    """z-degree slices of  Gamma_a(t,z) tau(t) * Gamma_a(s,-z) tau(s)."""
    W = tau.weight
    slices_t = _gamma_slices(tau, a, window, pref_t, ring)
    slices_s = _gamma_slices(tau, a, window, pref_s, ring)
    out: Dict[int, Series] = {}
    for d1, f in slices_t.items():
        for d2, g in slices_s.items():
            d = d1 + d2
            term = (f * g).scale(grat((-1) ** (d2 % 2)))
            if term.is_zero():
                continue
            out[d] = out[d] + term if d in out else term
    return out


def _gamma_slices(tau: TauSeries, a: int, window: int, prefix: str, ring: Ring
                  ) -> Dict[int, Series]:
    """Gamma_a(t,z) tau = exp(sum t_{a,m} z^m) tau(.., t_{a,m} - 2 z^-m/m, ..)
    collected by z-degree; t-variables renamed with ``prefix``."""
    W = tau.weight
    shift: Dict[int, Series] = {}
    src = tau.series.ring
    for e, c in tau.series.terms.items():
        expansions = [(0, {}, c)]
        for name, k in zip(src.names, e):
            if not k:
                continue
            aa, m = name[1:].split("_")
            aa, m = int(aa), int(m)
            tname = f"{prefix}{aa}_{m}"
            new = []
            for (zdeg, mono, coef) in expansions:
                if aa != a:
                    mono2 = dict(mono)
                    mono2[tname] = mono2.get(tname, 0) + k
                    new.append((zdeg, mono2, coef))
                    continue
                for j in range(k + 1):
                    binom = factorial(k) // (factorial(j) * factorial(k - j))
                    cc = coef * grat(binom) * (grat(mpq(-2, m)) ** (k - j))
                    mono2 = dict(mono)
                    if j:
                        mono2[tname] = mono2.get(tname, 0) + j
                    new.append((zdeg - m * (k - j), mono2, cc))
            expansions = new
        for zdeg, mono, coef in expansions:
            s = Series.monomial(ring, mono, coef)
            if s.is_zero():
                continue
            shift[zdeg] = shift[zdeg] + s if zdeg in shift else s

    expo: Dict[int, Series] = {0: Series.one(ring)}
    def extend(expo, m):
        tname = f"{prefix}{a}_{m}"
        out: Dict[int, Series] = {}
        for d, f in expo.items():
            term = f
            j = 0
            while d + m * j <= window:
                if not term.is_zero():
                    out[d + m * j] = out.get(d + m * j, Series.zero(ring)) + term
                j += 1
                term = (term * Series.monomial(ring, {tname: 1})).scale(
                    grat(mpq(1, j)))
        return out
    for m in odd_times(W):
        expo = extend(expo, m)

    out: Dict[int, Series] = {}
    for d1, f in expo.items():
        for d2, g in shift.items():
            d = d1 + d2
            term = f * g
            if term.is_zero():
                continue
            out[d] = out[d] + term if d in out else term
    return out


def verify_hirota(tau: TauSeries, m: int, window: Optional[int] = None) -> dict:
    """Hirota residual Omega_m(tau (x) tau) on the trusted window.

    Res_z dz/z [z^{hm} Gamma_1 tau (x) Gamma_1(-z) tau
                - z^{2m} Gamma_2 tau (x) Gamma_2(-z) tau]:
    every coefficient of combined (t,t')-weight <= window must vanish.
    """
    p, W = tau.params, tau.weight
    h = p.h
    if window is None:
        window = W - h * (m + 1)
    if window < 0:
        raise ValueError(f"weight {W} too small for Hirota m={m}")
    ring = _double_ring(W, window)
    x1 = _vertex_product(tau, 1, window, "t", "s", ring)
    x2 = _vertex_product(tau, 2, window, "t", "s", ring)
    res = (x1.get(-h * m, Series.zero(ring))
           - x2.get(-2 * m, Series.zero(ring)))
    offending = res.sorted_terms()
    return {"check": "hirota", "h": h, "m": m, "weight": W, "window": window,
            "pass": res.is_zero(),
            "residual_max_monomial": None if res.is_zero() else repr(offending[0])}


def _jj_sum(tau: TauSeries, a: int) -> Series:
    """sum_{m in Z_odd} :J^a_m J^a_{-m-h_a}: tau  (expanded normal-ordered form:
    quadratic creation part + 4 sum (m+h_a) t_{a,m+h_a} d/dt_{a,m})."""
    p, W = tau.params, tau.weight
    ha = p.h1 if a == 1 else p.h2
    ring = tau.series.ring
    out = Series.zero(ring)
    for n in range(1, ha, 2):
        mono = {f"t{a}_{n}": 1}
        key = f"t{a}_{ha - n}"
        mono[key] = mono.get(key, 0) + 1
        out = out + (tau.series.mul_monomial(mono)).scale(grat(n * (ha - n)))
    for m in odd_times(W):
        if m + ha > W:
            continue
        d = tau.series.derivative(f"t{a}_{m}")
        out = out + d.mul_monomial({f"t{a}_{m + ha}": 1}).scale(grat(4 * (m + ha)))
    return out


def string_operator_applied(tau: TauSeries) -> Series:
    """Expanded L_{-1} tau with sqrt(hbar) = rho_1 (so the first term is
    -i d/dt_{1,1}), per the variable-dictionary normalization."""
    p = tau.params
    s1 = grat(mpq(1, 4 * p.h1))
    s2 = grat(mpq(1, 4 * p.h2))
    d = tau.series.derivative("t1_1").scale(-GR_I)
    return d + _jj_sum(tau, 1).scale(s1) + _jj_sum(tau, 2).scale(s2)


def verify_string(tau: TauSeries) -> dict:
    """L_{-1} tau = 0 on weight <= W - h, plus an exact fit of the scalars
    sigma_a multiplying the :JJ: sums in the raw string-equation form."""
    p, W = tau.params, tau.weight
    h = p.h
    window = W - h
    ring = tau.series.ring
    cut = lambda f: f.filter(lambda e: ring.weight_scaled(e) <= window * ring.wden)

    r0 = cut(tau.series.derivative("t1_1").scale(-GR_I))
    r1 = cut(_jj_sum(tau, 1))
    r2 = cut(_jj_sum(tau, 2))

    sigma = {}
    for name, rs, other in (("sigma1", r1, r2), ("sigma2", r2, r1)):
        val = None
        for e, c in rs.sorted_terms():
            if other.terms.get(e) is None and not c.is_zero():
                val = -(r0.terms.get(e, GR_ZERO)) / c
                break
        if val is None:
            return {"check": "string", "pass": False,
                    "error": "could not decouple sigma fit"}
        sigma[name] = val

    resid = r0 + r1.scale(sigma["sigma1"]) + r2.scale(sigma["sigma2"])
    resid_expanded = cut(string_operator_applied(tau))
    ok = resid.is_zero() and resid_expanded.is_zero()
    report = {"check": "string", "h": h, "weight": W, "window": window,
              "pass": bool(ok),
              "sigma1": sigma["sigma1"].to_json(), "sigma2": sigma["sigma2"].to_json(),
              "sigma_expected": f"1/(4*h_a) = 1/{4 * p.h1}, 1/{4 * p.h2}"}
    if not ok:
        bad = (resid if not resid.is_zero() else resid_expanded).sorted_terms()[0]
        report["residual_max_monomial"] = repr(bad)
    return report


def log_tau(tau: TauSeries) -> Series:
    return series_log(tau.series)


def rescale_hbar(tau: TauSeries, hbar, prec: int = 512) -> dict:
    """Numeric coefficient table of the descendant potential at general hbar:
    t_{a,m} scales by (sqrt(hbar)/rho_1)^{mh/(h_a(h+1)) - 1}."""
    import mpmath

    from .exact import BigComplex, big_exp_i_pi
    p = tau.params
    h = p.h
    with mpmath.workprec(prec):
        hb = BigComplex.of(hbar, prec)
        rho1 = big_exp_i_pi(mpq(1, h), prec) * BigComplex(0, -1, prec)  # -i xi^{m_1}
        ratio = hb.sqrt() / rho1
        table = []
        ring = tau.series.ring
        for e, c in tau.series.sorted_terms():
            expo = mpq(0)
            mono = {}
            for name, k in zip(ring.names, e):
                if not k:
                    continue
                a, m = name[1:].split("_")
                a, m = int(a), int(m)
                ha = h if a == 1 else 2
                expo += k * (mpq(m * h, ha * (h + 1)) - 1)
                mono[name] = k
            factor = ratio ** BigComplex(expo, 0, prec)
            val = BigComplex(c, prec=prec) * factor
            table.append({"monomial": mono, "value": val.to_json()})
    return {"check": "rescale_hbar", "h": h, "weight": tau.weight,
            "hbar": BigComplex.of(hbar, prec).to_json(), "coefficients": table}
