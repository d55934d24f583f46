"""Sparse truncated multivariate Laurent series over the Gaussian rationals.

A :class:`Ring` fixes the variable block: names, per-variable exponent
lattices (exponents are stored as integer multiples of 1/L), a grading
(weight per unit exponent), and the truncation data.  A :class:`Series` is a
plain dict from lattice-integer exponent vectors to nonzero
:class:`~dntau.exact.GaussianRational` coefficients.

Truncation semantics: ring operations are exact modulo the truncation ideal:
the truncated product equals the truncation of the true product.  Three
truncation mechanisms compose:

* ``weight_cap``   -- keep monomials of weight <= cap (graded series);
* ``floors``       -- per-variable minimum exponent (z^-1-adic order bound);
* ``region``       -- for two-variable expansions carried out in an ordered
  region |big| > |small|, a bound on the exponent of the small variable,
  which is what bounds geometric tails like (w/z)^m of weight zero.

Series whose rings differ (even only in truncation) never mix silently; use
:meth:`Series.to_ring` to move between compatible rings.
"""

from __future__ import annotations

import hashlib
import json
from math import gcd
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .exact import GR_ONE, GR_ZERO, GaussianRational, MPQ_T, factorial

Exps = Tuple[int, ...]


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class Ring:
    """Immutable descriptor of a series ring: variables, grading, truncation."""

    __slots__ = ("names", "lattices", "weights", "wnum", "wden", "cap_scaled",
                 "floors", "region", "_index")

    def __init__(self, variables: Sequence[Tuple[str, int, object]],
                 weight_cap=None,
                 floors: Optional[Dict[str, object]] = None,
                 region: Optional[Tuple[str, str, int]] = None):
        names = tuple(v[0] for v in variables)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        lattices = tuple(int(v[1]) for v in variables)
        weights = tuple(mpq(v[2]) for v in variables)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "lattices", lattices)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

        den = 1
        steps = [w / L for w, L in zip(weights, lattices)]
        for s in steps:
            den = _lcm(den, int(s.denominator))
        if weight_cap is not None:
            den = _lcm(den, int(mpq(weight_cap).denominator))
        object.__setattr__(self, "wden", den)
        object.__setattr__(self, "wnum", tuple(int(s * den) for s in steps))
        object.__setattr__(self, "cap_scaled",
                           None if weight_cap is None else int(mpq(weight_cap) * den))

        fl = None
        if floors:
            fl = [None] * len(names)
            for n, bound in floors.items():
                i = self._index[n]
                b = mpq(bound) * lattices[i]
                if b.denominator != 1:
                    raise ValueError(f"floor for {n} not on lattice 1/{lattices[i]}")
                fl[i] = int(b)
            fl = tuple(fl)
        object.__setattr__(self, "floors", fl)

        reg = None
        if region is not None:
            big, small, ratio_cap = region
            reg = (self._index[big], self._index[small], int(ratio_cap))
        object.__setattr__(self, "region", reg)

    def __setattr__(self, *a):
        raise AttributeError("Ring is immutable")

    # -- structural helpers -------------------------------------------------

    def index(self, name: str) -> int:
        return self._index[name]

    def nvars(self) -> int:
        return len(self.names)

    def zero_exps(self) -> Exps:
        return (0,) * len(self.names)

    def weight_scaled(self, exps: Exps) -> int:
        return sum(e * w for e, w in zip(exps, self.wnum))

    def weight(self, exps: Exps) -> mpq:
        return mpq(self.weight_scaled(exps), self.wden)

    def admits(self, exps: Exps) -> bool:
        if self.cap_scaled is not None and self.weight_scaled(exps) > self.cap_scaled:
            return False
        if self.floors is not None:
            for e, f in zip(exps, self.floors):
                if f is not None and e < f:
                    return False
        if self.region is not None and exps[self.region[1]] > self.region[2]:
            return False
        return True

    def same_vars(self, other: "Ring") -> bool:
        return (self.names == other.names and self.lattices == other.lattices
                and self.weights == other.weights)

    def compatible(self, other: "Ring") -> bool:
        return (self.same_vars(other) and self.cap_scaled == other.cap_scaled
                and self.floors == other.floors and self.region == other.region)

    def with_truncation(self, weight_cap=None, floors=None, region=None) -> "Ring":
        """A ring over the same variables with different truncation data."""
        regspec = None
        if region is not None:
            regspec = region
        elif self.region is not None:
            b, s, c = self.region
            regspec = (self.names[b], self.names[s], c)
        flspec = floors
        if flspec is None and self.floors is not None:
            flspec = {self.names[i]: mpq(f, self.lattices[i])
                      for i, f in enumerate(self.floors) if f is not None}
        return Ring(list(zip(self.names, self.lattices, self.weights)),
                    weight_cap=weight_cap, floors=flspec, region=regspec)

    def exps_of(self, mono: Dict[str, object]) -> Exps:
        """Lattice-integer exponent vector from {name: true exponent}."""
        out = [0] * len(self.names)
        for n, e in mono.items():
            i = self._index[n]
            v = mpq(e) * self.lattices[i]
            if v.denominator != 1:
                raise ValueError(f"exponent {e} of {n} not on lattice 1/{self.lattices[i]}")
            out[i] = int(v)
        return tuple(out)

    def __repr__(self):
        return f"Ring({','.join(self.names)}; cap={self.cap_scaled}/{self.wden})"


class Series:
    """Sparse series: exponent-vector -> coefficient, over a fixed Ring."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: Optional[Dict[Exps, GaussianRational]] = None,
                 _checked: bool = False):
        self.ring = ring
        if terms is None:
            terms = {}
        if not _checked:
            terms = {e: c for e, c in terms.items() if not c.is_zero() and ring.admits(e)}
        self.terms = terms

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(ring: Ring) -> "Series":
        return Series(ring, {}, _checked=True)

    @staticmethod
    def const(ring: Ring, c) -> "Series":
        c = GaussianRational.of(c)
        if c.is_zero():
            return Series.zero(ring)
        return Series(ring, {ring.zero_exps(): c})

    @staticmethod
    def one(ring: Ring) -> "Series":
        return Series.const(ring, GR_ONE)

    @staticmethod
    def monomial(ring: Ring, mono: Dict[str, object], c=GR_ONE) -> "Series":
        return Series(ring, {ring.exps_of(mono): GaussianRational.of(c)})

    # -- inspection ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, mono: Dict[str, object]) -> GaussianRational:
        return self.terms.get(self.ring.exps_of(mono), GR_ZERO)

    def constant_term(self) -> GaussianRational:
        return self.terms.get(self.ring.zero_exps(), GR_ZERO)

    def sorted_terms(self) -> List[Tuple[Exps, GaussianRational]]:
        """Graded-lexicographic order on the lattice integers (fixed, reproducible)."""
        ws = self.ring.weight_scaled
        return sorted(self.terms.items(), key=lambda t: (ws(t[0]), t[0]))

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.ring.compatible(other.ring) and self.terms == other.terms

    def __repr__(self):
        parts = []
        for e, c in self.sorted_terms()[:12]:
            mono = "*".join(f"{n}^{mpq(x, L)}" for n, L, x in
                            zip(self.ring.names, self.ring.lattices, e) if x)
            parts.append(f"({c})" + ("*" + mono if mono else ""))
        s = " + ".join(parts) if parts else "0"
        if len(self.terms) > 12:
            s += f" + ... ({len(self.terms)} terms)"
        return s

    # -- linear structure --------------------------------------------------------

    def _binary_check(self, other: "Series"):
        if not self.ring.compatible(other.ring):
            raise ValueError("incompatible rings (variables/lattice/truncation differ)")

    def __add__(self, other: "Series") -> "Series":
        self._binary_check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            cur = out.get(e)
            s = c if cur is None else cur + c
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
        return Series(self.ring, out, _checked=True)

    def __neg__(self) -> "Series":
        return Series(self.ring, {e: -c for e, c in self.terms.items()}, _checked=True)

    def __sub__(self, other: "Series") -> "Series":
        return self + (-other)

    def scale(self, c) -> "Series":
        c = GaussianRational.of(c)
        if c.is_zero():
            return Series.zero(self.ring)
        return Series(self.ring, {e: x * c for e, x in self.terms.items()}, _checked=True)

    # -- multiplication ------------------------------------------------------------

    def __mul__(self, other: "Series") -> "Series":
        self._binary_check(other)
        ring = self.ring
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        if not a or not b:
            return Series.zero(ring)
        cap = ring.cap_scaled
        ws = ring.weight_scaled
        floors = ring.floors
        region = ring.region
        bw = [(e, c, ws(e)) for e, c in b.items()]
        out: Dict[Exps, GaussianRational] = {}
        for e1, c1 in a.items():
            w1 = ws(e1)
            for e2, c2, w2 in bw:
                if cap is not None and w1 + w2 > cap:
                    continue
                e = tuple(x + y for x, y in zip(e1, e2))
                if floors is not None:
                    bad = False
                    for x, f in zip(e, floors):
                        if f is not None and x < f:
                            bad = True
                            break
                    if bad:
                        continue
                if region is not None and e[region[1]] > region[2]:
                    continue
                c = c1 * c2
                cur = out.get(e)
                s = c if cur is None else cur + c
                if s.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = s
        return Series(self.ring, out, _checked=True)

    def mul_monomial(self, mono: Dict[str, object], c=GR_ONE) -> "Series":
        ring = self.ring
        de = ring.exps_of(mono)
        c = GaussianRational.of(c)
        out = {}
        for e, x in self.terms.items():
            ee = tuple(a + b for a, b in zip(e, de))
            if ring.admits(ee):
                v = x * c
                if not v.is_zero():
                    out[ee] = v
        return Series(ring, out, _checked=True)

    def __pow__(self, k: int) -> "Series":
        if k < 0:
            raise ValueError("negative powers only via invert_unit")
        out = Series.one(self.ring)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    # -- truncation moves ------------------------------------------------------------

    def to_ring(self, ring: Ring) -> "Series":
        """Re-truncate into ``ring`` (same variables).  Tightening is always
        exact; loosening asserts nothing new would have been admitted."""
        if not self.ring.same_vars(ring):
            raise ValueError("to_ring requires identical variable blocks")
        return Series(ring, dict(self.terms))

    def filter(self, pred: Callable[[Exps], bool]) -> "Series":
        return Series(self.ring, {e: c for e, c in self.terms.items() if pred(e)},
                      _checked=True)

    def nonpositive_part(self) -> "Series":
        return self.filter(lambda e: all(x <= 0 for x in e))

    def max_weight(self) -> Optional[mpq]:
        if not self.terms:
            return None
        return max(self.ring.weight(e) for e in self.terms)

    # -- calculus ---------------------------------------------------------------------

    def derivative(self, name: str) -> "Series":
        """d/d(name); requires lattice 1 for the variable."""
        ring = self.ring
        i = ring.index(name)
        if ring.lattices[i] != 1:
            raise ValueError("derivative needs an integer-lattice variable")
        out = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            ee = list(e)
            ee[i] -= 1
            ee = tuple(ee)
            if ring.admits(ee):
                v = c * e[i]
                if not v.is_zero():
                    out[ee] = out[ee] + v if ee in out else v
        return Series(ring, out, _checked=True)

    def subs_scale(self, name: str, c: GaussianRational) -> "Series":
        """Substitute var := c * var (c a nonzero exact scalar)."""
        ring = self.ring
        i = ring.index(name)
        if ring.lattices[i] != 1:
            raise ValueError("subs_scale needs an integer-lattice variable")
        out = {}
        for e, x in self.terms.items():
            v = x * (c ** e[i])
            if not v.is_zero():
                out[e] = v
        return Series(ring, out, _checked=True)

    # -- variable injection --------------------------------------------------------------

    def inject(self, ring: Ring, var_map: Dict[str, str]) -> "Series":
        """Re-express in a larger ring, renaming variables via ``var_map``.

        Lattices of mapped variables must agree; unmapped target variables
        get exponent zero.  Truncation of the target ring applies.
        """
        src = self.ring
        pos = []
        for i, n in enumerate(src.names):
            tgt = var_map.get(n, n)
            j = ring.index(tgt)
            if ring.lattices[j] != src.lattices[i]:
                raise ValueError(f"lattice mismatch injecting {n} -> {tgt}")
            pos.append(j)
        out = {}
        zero = [0] * ring.nvars()
        for e, c in self.terms.items():
            ee = zero[:]
            for i, x in enumerate(e):
                ee[pos[i]] += x
            ee = tuple(ee)
            if ring.admits(ee):
                out[ee] = out[ee] + c if ee in out else c
        return Series(ring, {e: c for e, c in out.items() if not c.is_zero()},
                      _checked=True)

    # -- serialization --------------------------------------------------------------------

    def to_json(self):
        ring = self.ring
        return {
            "vars": [{"name": n, "lattice": L, "weight": str(w)}
                     for n, L, w in zip(ring.names, ring.lattices, ring.weights)],
            "terms": [{"exps": [str(mpq(x, L)) for x, L in zip(e, ring.lattices)],
                       "coeff": c.to_json()}
                      for e, c in self.sorted_terms()],
        }

    def content_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# exp / log / inversion
# ---------------------------------------------------------------------------

def _check_small(f: Series, allow_ratio: bool) -> None:
    """A 'small' series dies under iterated multiplication within truncation:
    every term has weight > 0, or weight 0 with positive region ratio grade."""
    ring = f.ring
    if ring.cap_scaled is None:
        raise ValueError("exp/log/invert need a finite weight cap")
    for e in f.terms:
        w = ring.weight_scaled(e)
        if w > 0:
            continue
        if (allow_ratio and w == 0 and ring.region is not None
                and e[ring.region[1]] > 0):
            continue
        raise ValueError("argument has a non-small term (constant-term violation)")


def series_exp(f: Series) -> Series:
    """exp(f) for f with zero constant term (nilpotent modulo truncation)."""
    _check_small(f, allow_ratio=True)
    out = Series.one(f.ring)
    term = Series.one(f.ring)
    n = 0
    while True:
        n += 1
        term = term * f
        if term.is_zero():
            return out
        out = out + term.scale(GaussianRational(mpq(1, factorial(n))))
        if n > 10000:
            raise RuntimeError("series_exp failed to terminate")


def series_log(f: Series) -> Series:
    """log(f) for f with constant term 1."""
    if f.constant_term() != GR_ONE:
        raise ValueError("series_log needs constant term 1")
    g = f - Series.one(f.ring)
    _check_small(g, allow_ratio=True)
    out = Series.zero(f.ring)
    term = Series.one(f.ring)
    n = 0
    while True:
        n += 1
        term = term * g
        if term.is_zero():
            return out
        out = out + term.scale(GaussianRational(mpq((-1) ** (n + 1), n)))
        if n > 10000:
            raise RuntimeError("series_log failed to terminate")


def invert_unit(f: Series) -> Series:
    """1/f for f = c*(1 + small); refuses zero constant term."""
    c = f.constant_term()
    if c.is_zero():
        raise ValueError("invert_unit needs a nonzero constant term")
    g = f.scale(c.inverse()) - Series.one(f.ring)
    _check_small(g, allow_ratio=True)
    out = Series.one(f.ring)
    term = Series.one(f.ring)
    n = 0
    while True:
        n += 1
        term = term * g
        if term.is_zero():
            return out.scale(c.inverse())
        out = out + term.scale(GaussianRational((-1) ** n))
        if n > 10000:
            raise RuntimeError("invert_unit failed to terminate")


# ---------------------------------------------------------------------------
# exact division by a difference of variables (used to clear Vandermonde-type
# denominators without region expansions)
# ---------------------------------------------------------------------------

def exact_div_linear(f: Series, name_i: str, name_j: str) -> Series:
    """Exact quotient f / (x_i - x_j); raises if not divisible.

    f must be polynomial in x_i (nonnegative lattice exponents); standard
    synthetic division viewing f in the variable x_i.
    """
    ring = f.ring
    i, j = ring.index(name_i), ring.index(name_j)
    if ring.lattices[i] != ring.lattices[j]:
        raise ValueError("divisor variables on different lattices")
    bydeg: Dict[int, Dict[Exps, GaussianRational]] = {}
    for e, c in f.terms.items():
        if e[i] < 0:
            raise ValueError("exact_div_linear needs polynomial dependence on x_i")
        bydeg.setdefault(e[i], {})[e] = c
    if not bydeg:
        return Series.zero(ring)
    d = max(bydeg)
    # f = (x_i - x_j) q + r; q_k built top-down: q_{k-1} = f_k + x_j * q_k
    out: Dict[Exps, GaussianRational] = {}
    carry: Dict[Exps, GaussianRational] = {}   # q_k terms, exponent of x_i stripped
    for k in range(d, 0, -1):
        level = dict(carry)
        for e, c in bydeg.get(k, {}).items():
            ee = list(e)
            ee[i] = 0
            ee = tuple(ee)
            level[ee] = level[ee] + c if ee in level else c
        carry = {}
        for e, c in level.items():
            if c.is_zero():
                continue
            eq = list(e)
            eq[i] = k - 1
            out[tuple(eq)] = c
            ec = list(e)
            ec[j] += 1
            carry[tuple(ec)] = c
    # remainder = f_0 + x_j * q_0  (carry already holds x_j * q_0)
    rem = dict(carry)
    for e, c in bydeg.get(0, {}).items():
        rem[e] = rem[e] + c if e in rem else c
    for e, c in rem.items():
        if not c.is_zero():
            raise ValueError(f"not divisible by ({name_i} - {name_j}); residue at {e}")
    return Series(ring, out)


# ---------------------------------------------------------------------------
# symmetric functions: monomial basis <-> power sums
# ---------------------------------------------------------------------------

Partition = Tuple[int, ...]


def _orbit_size(sorted_exps: Partition, n_vars: int) -> int:
    """Number of distinct arrangements of the positive parts among n_vars slots."""
    mult: Dict[int, int] = {}
    for v in sorted_exps:
        mult[v] = mult.get(v, 0) + 1
    k = len(sorted_exps)
    out = 1
    for j in range(n_vars - k + 1, n_vars + 1):
        out *= j
    for m in mult.values():
        out //= factorial(m)
    return out


def monomial_basis_of(f: Series, block: Sequence[str]) -> Dict[Tuple[Partition, Exps], GaussianRational]:
    """Collect a block-symmetric series into m_lambda coordinates.

    Returns {(partition, residual exponent vector with block slots zeroed):
    coefficient}; raises if f is not symmetric under permutations of the
    block variables (coefficient mismatch or incomplete orbit).
    """
    ring = f.ring
    idx = [ring.index(n) for n in block]
    for i in idx:
        if ring.lattices[i] != 1:
            raise ValueError("symmetric block must be on the integer lattice")
    seen: Dict[Tuple[Partition, Exps], Tuple[GaussianRational, int]] = {}
    for e, c in f.terms.items():
        bex = [e[i] for i in idx]
        if any(x < 0 for x in bex):
            raise ValueError("block exponents must be nonnegative")
        lam = tuple(sorted((x for x in bex if x), reverse=True))
        rest = list(e)
        for i in idx:
            rest[i] = 0
        key = (lam, tuple(rest))
        if key in seen:
            c0, cnt = seen[key]
            if c0 != c:
                raise ValueError(f"asymmetry detected in block {block} at {key}")
            seen[key] = (c0, cnt + 1)
        else:
            seen[key] = (c, 1)
    out = {}
    for key, (c, cnt) in seen.items():
        if cnt != _orbit_size(key[0], len(block)):
            raise ValueError(f"incomplete symmetric orbit at {key}")
        out[key] = c
    return out


def _m_times_p(mcoords: Dict[Partition, GaussianRational], m: int, n_vars: int
               ) -> Dict[Partition, GaussianRational]:
    """Multiply a symmetric function in m_lambda coordinates by p_m."""
    out: Dict[Partition, GaussianRational] = {}
    for lam, c in mcoords.items():
        choices = set(lam) | {0}
        for v in choices:
            if v == 0 and len(lam) >= n_vars:
                continue
            new = list(lam)
            if v == 0:
                new.append(m)
            else:
                new.remove(v)
                new.append(v + m)
            newt = tuple(sorted(new, reverse=True))
            mult_target = newt.count(v + m)
            cc = c * mult_target
            out[newt] = out[newt] + cc if newt in out else cc
    return {k: v for k, v in out.items() if not v.is_zero()}


def p_in_monomial_basis(lam: Partition, n_vars: int) -> Dict[Partition, GaussianRational]:
    """p_lambda expanded in the m_mu basis of n_vars variables."""
    coords: Dict[Partition, GaussianRational] = {(): GR_ONE}
    for part in lam:
        coords = _m_times_p(coords, part, n_vars)
    return coords


def symmetric_to_powersums(f: Series, block: Sequence[str], p_names: Sequence[str],
                           target_ring: Ring, weight_bound: int) -> Series:
    """Rewrite a block-symmetric series in power sums p_1..p_W of the block.

    ``p_names[m-1]`` names p_{m} in ``target_ring``; non-block variables must
    exist in ``target_ring`` under their own names.  Requires
    len(block) >= weight_bound so the p's are algebraically independent
    (faithful regime); refuses otherwise.
    """
    if len(block) < weight_bound:
        raise ValueError("need at least W block variables for a faithful inversion")
    ring = f.ring
    n_vars = len(block)
    coords = monomial_basis_of(f, block)
    # group by residual exponents
    grouped: Dict[Exps, Dict[Partition, GaussianRational]] = {}
    for (lam, rest), c in coords.items():
        if sum(lam) > weight_bound:
            continue
        grouped.setdefault(rest, {})[lam] = c
    out = Series.zero(target_ring)
    src_names = ring.names
    for rest, mpart in grouped.items():
        work = dict(mpart)
        while work:
            # p_lambda = mult! * m_lambda + coarser partitions (fewer parts),
            # so eliminating finest-first terminates.
            lam = max(work, key=lambda t: (len(t), t))
            c = work.pop(lam)
            if c.is_zero():
                continue
            mult = GR_ONE
            for v in set(lam):
                mult = mult * factorial(lam.count(v))
            coef = c / mult
            expansion = p_in_monomial_basis(lam, n_vars)
            for mu, pc in expansion.items():
                if mu == lam:
                    continue
                delta = -(coef * pc)
                if mu in work:
                    s = work[mu] + delta
                    if s.is_zero():
                        del work[mu]
                    else:
                        work[mu] = s
                elif not delta.is_zero():
                    work[mu] = delta
            mono: Dict[str, object] = {}
            for part in lam:
                nm = p_names[part - 1]
                mono[nm] = mono.get(nm, 0) + 1
            for i, x in enumerate(rest):
                if x:
                    mono[src_names[i]] = mpq(x, ring.lattices[i])
            out = out + Series.monomial(target_ring, mono, coef)
    return out


def powersum_values(xs: Sequence[mpq], upto: int) -> List[mpq]:
    """[p_1(x), ..., p_upto(x)] as exact rationals."""
    out = []
    powers = [mpq(x) for x in xs]
    for m in range(1, upto + 1):
        out.append(sum(powers, mpq(0)))
        if m < upto:
            powers = [p * mpq(x) for p, x in zip(powers, xs)]
    return out
