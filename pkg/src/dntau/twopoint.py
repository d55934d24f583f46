"""Two-point functions phi~_{a,b} of the Grassmannian basis.

Each phi~_{a,b}(z,w) splits as kernel_multiple * (z-w)/(z+w) plus a genuine
double power series in z^-1, w^-1 (the regular part).  The basis expansions

    phi_{1,b}(z,w)  = sum_k r_k Psi_{-k}^(1)(z) Psi_k^(b)(w)      (|z|>|w|)
    phi_{2,2}(w,z)  = sum_k r_k Psi_{-k}^(2)(z) Psi_k^(2)(w)
                      - sum_k (z/w)^{2k+1}                        (|w|>|z|)

are assembled in the appropriate region ring, the expanded kernel multiple
is subtracted, and every surviving mixed or positive power inside the
trusted bidegree window must cancel exactly -- a failure signals an
inconsistent basis and raises.  r_m = (-1)^m theta(m) with theta(0) = 1/2.

The independent closed form phi~_{2,2} = (1/2) e^{g_z+g_w} (z-w)/(z+w)
is expanded termwise over the region kernel; the two constructions are
mutual oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from gmpy2 import mpq

from .exact import GR_HALF, GR_I, GR_ONE, GaussianRational, grat
from .operators import Component, GrBasis, Params, apply_g
from .series import Ring, Series

ZW = ("z", "w")


def r_coeff(m: int) -> GaussianRational:
    """r_m = (-1)^m theta(m):  1/2 at m=0, else (-1)^m."""
    if m < 0:
        return GaussianRational(0)
    if m == 0:
        return GR_HALF
    return grat((-1) ** m)


def kernel_region_series(ring: Ring, big: str, small: str, ratio_order: int) -> Series:
    """K(big, small) = 2 sum_{m>=0} r_m (small/big)^m in the region ring."""
    out = Series.zero(ring)
    for m in range(0, ratio_order + 1):
        c = r_coeff(m) * 2
        out = out + Series.monomial(ring, {big: -m, small: m}, c)
    return out


@dataclass(frozen=True)
class TwoPoint:
    """Split form of phi~_{a,b}: kernel multiple of (z-w)/(z+w) plus regular."""
    a: int
    b: int
    kernel_multiple: GaussianRational
    regular: Series              # double power series in z^-1, w^-1
    window: int                  # certified total weight (alpha+beta bound)

    def regular_coeff(self, alpha: int, beta: int) -> GaussianRational:
        if alpha + beta > self.window:
            raise ValueError(f"({alpha},{beta}) outside certified window {self.window}")
        return self.regular.coeff({"z": -alpha, "w": -beta})

    def regular_u_series(self, ring: Ring, u_z: str, u_w: str) -> Series:
        """Regular part rewritten in u-variables (u = z^-1): z^-a w^-b -> u_z^a u_w^b."""
        iz, iw = ring.index(u_z), ring.index(u_w)
        out = {}
        zero = [0] * ring.nvars()
        for (ez, ew), c in self.regular.terms.items():
            ee = zero[:]
            ee[iz], ee[iw] = -ez, -ew
            ee = tuple(ee)
            if ring.admits(ee):
                out[ee] = out[ee] + c if ee in out else c
        return Series(ring, out)

    def eps_poly(self, x: mpq, y: mpq, cap: int) -> List[GaussianRational]:
        """Coefficients of phi~ regular part at (z^-1, w^-1) = (eps x, eps y).

        Entry [w] is the epsilon^w coefficient; cap <= window enforced.
        """
        if cap > self.window:
            raise ValueError("requested epsilon order beyond certified window")
        out = [GaussianRational(0)] * (cap + 1)
        xp = {0: mpq(1)}
        yp = {0: mpq(1)}
        for (ez, ew), c in self.regular.terms.items():
            alpha, beta = -ez, -ew
            wgt = alpha + beta
            if wgt > cap:
                continue
            if alpha not in xp:
                xp[alpha] = mpq(x) ** alpha
            if beta not in yp:
                yp[beta] = mpq(y) ** beta
            out[wgt] = out[wgt] + c * grat(xp[alpha] * yp[beta])
        return out


def _inject_pair(comp_big: Component, comp_small: Component, ring: Ring,
                 big: str, small: str) -> Series:
    sb = comp_big.series.inject(ring, {"z": big})
    ss = comp_small.series.inject(ring, {"z": small})
    return sb * ss


def _assert_cancellation(f: Series, window: int, what: str) -> None:
    """Inside the trusted window, no monomial may keep a positive exponent."""
    for (e1, e2), c in f.terms.items():
        if (e1 > 0 or e2 > 0) and (-min(e1, 0) - min(e2, 0)) + max(e1, 0) + max(e2, 0) <= window:
            raise ValueError(f"kernel cancellation failure in {what} at exponents "
                             f"({e1},{e2}): {c}")


def build_twopoint(basis: GrBasis, a: int, b: int,
                   window: Optional[int] = None) -> TwoPoint:
    """Assemble phi~_{a,b} from the Grassmannian basis, in split form.

    The trusted window is min over the depth constraints: basis depth K
    bounds which summands can contribute to a coefficient, and the trust
    orders of the members bound the usable bidegree.
    """
    if (a, b) not in ((1, 1), (1, 2), (2, 2)):
        raise ValueError("labels must satisfy 1 <= a <= b <= 2")
    p = basis.params
    K = basis.K
    if a == 1:
        comp = {1: (lambda k: basis.psi(k).comp1), 2: (lambda k: basis.psi(k).comp2)}
        order = min(min(comp[1](-k).order for k in range(K + 1)),
                    min(comp[b](k).order for k in range(K + 1)))
        win = min(K, order) if window is None else window
        if win > min(K, order):
            raise ValueError(f"requested window {win} exceeds certified {min(K, order)}")
        ring = Ring([("z", 1, -1), ("w", 1, -1)], weight_cap=win,
                    region=("z", "w", K))
        acc = Series.zero(ring)
        for k in range(0, K + 1):
            rk = r_coeff(k)
            zs = comp[1](-k).series.inject(ring, {"z": "z"})
            ws = comp[b](k).series.inject(ring, {"z": "w"})
            acc = acc + (zs * ws).scale(rk)
        if b == 1:
            acc = acc - kernel_region_series(ring, "z", "w", K).scale(GR_HALF)
            kmult = GR_HALF
        else:
            kmult = GaussianRational(0)
        _assert_cancellation(acc, win, f"phi({a},{b})")
        regular = acc.nonpositive_part().to_ring(
            Ring([("z", 1, -1), ("w", 1, -1)], weight_cap=win))
        return TwoPoint(a, b, kmult, regular, win)

    # (2,2): assembled as phi_{2,2}(w,z) in the region |w| > |z|
    order = min(min(basis.psi(-k).comp2.order for k in range(K + 1)),
                min(basis.psi(k).comp2.order for k in range(K + 1)))
    win = min(2 * K, order) if window is None else window
    if win > min(2 * K, order):
        raise ValueError(f"requested window {win} exceeds certified {min(2 * K, order)}")
    ring = Ring([("w", 1, -1), ("z", 1, -1)], weight_cap=win,
                region=("w", "z", 2 * K + 1))
    acc = Series.zero(ring)
    for k in range(0, K + 1):
        zs = basis.psi(-k).comp2.series.inject(ring, {"z": "z"})
        ws = basis.psi(k).comp2.series.inject(ring, {"z": "w"})
        acc = acc + (zs * ws).scale(r_coeff(k))
    for k in range(0, K + 1):
        acc = acc - Series.monomial(ring, {"z": 2 * k + 1, "w": -(2 * k + 1)})
    _check_even_total_degree(acc, win)
    acc = acc - kernel_region_series(ring, "w", "z", 2 * K + 1).scale(GR_HALF)
    _assert_cancellation(acc, win, "phi(2,2)")
    target = Ring([("z", 1, -1), ("w", 1, -1)], weight_cap=win)
    # relabel (first arg w, second z) -> canonical (z, w)
    regular = acc.nonpositive_part().inject(target, {"w": "z", "z": "w"})
    return TwoPoint(2, 2, GR_HALF, regular, win)


def _check_even_total_degree(f: Series, window: int) -> None:
    """phi_{2,2}(-w,-z) = phi_{2,2}(w,z): every monomial has even total degree."""
    for e, c in f.terms.items():
        if sum(e) % 2 and -sum(e) <= window:
            raise ValueError(f"(2,2) argument-exchange symmetry violated at {e}")


def closed_form_phi22(p: Params, order: int) -> TwoPoint:
    """phi~_{2,2} = (1/2) e^{g_z+g_w} (z-w)/(z+w), expanded termwise.

    g acts on each variable through a2^{h+1}, lowering degree by 2h+2, so
    the exponential is finite on the truncation; by the kernel-regularity
    lemma the non-kernel part is a genuine double power series, and that is
    asserted.  Must equal build_twopoint(2,2) on the shared window.
    """
    win = order
    ring = Ring([("z", 1, -1), ("w", 1, -1)], weight_cap=win,
                region=("z", "w", win + 1))
    K = kernel_region_series(ring, "z", "w", win + 1)
    total = Series.zero(ring)
    term = K
    n = 0
    from .exact import factorial
    while not term.is_zero():
        if n > 0:
            total = total + term.scale(grat(mpq(1, factorial(n))))
        n += 1
        term = _apply_gz_plus_gw(p, term, ring)
    regular_region = total.scale(GR_HALF)
    _assert_cancellation(regular_region, win, "closed-form phi(2,2)")
    target = Ring([("z", 1, -1), ("w", 1, -1)], weight_cap=win)
    regular = regular_region.nonpositive_part().to_ring(target)
    return TwoPoint(2, 2, GR_HALF, regular, win)


def _apply_gz_plus_gw(p: Params, f: Series, ring: Ring) -> Series:
    """(g_z + g_w) f with g = -i^h a2^{h+1}/(h+1) acting per variable."""
    h = p.h
    pref = -(GR_I ** h) * grat(mpq(1, h + 1))
    out = Series.zero(ring)
    for var_idx in (0, 1):
        cur = dict(f.terms)
        for _ in range(h + 1):
            nxt: Dict[Tuple[int, int], GaussianRational] = {}
            for e, c in cur.items():
                n = e[var_idx]
                v = c * grat(mpq(n - 1, 2))
                if v.is_zero():
                    continue
                ee = (e[0] - 2, e[1]) if var_idx == 0 else (e[0], e[1] - 2)
                if not ring.admits(ee):
                    continue
                nxt[ee] = nxt[ee] + v if ee in nxt else v
            cur = {k: v for k, v in nxt.items() if not v.is_zero()}
        out = out + Series(ring, cur, _checked=True).scale(pref)
    return out


def kernel_reg_identity(p: Params, order: int) -> dict:
    """(g_z+g_w) K(z,w) is a polynomial in z^-2, w^-2 (no pole at z = -w):
    within the window the region expansion has no mixed ratio terms."""
    ring = Ring([("z", 1, -1), ("w", 1, -1)], weight_cap=order,
                region=("z", "w", order + 1))
    K = kernel_region_series(ring, "z", "w", order + 1)
    g = _apply_gz_plus_gw(p, K, ring)
    bad = [e for e in g.terms
           if (e[0] > 0 or e[1] > 0) and -min(e[0], 0) - min(e[1], 0) <= order]
    evens = all(e[0] % 2 == 0 and e[1] % 2 == 0 for e in g.terms
                if e[0] <= 0 and e[1] <= 0)
    return {"check": "kernel_regularity", "h": p.h, "order": order,
            "pass": not bad and evens}
