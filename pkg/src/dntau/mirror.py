"""Mirror dictionaries and correlator extraction.

Chains together, at explicit precision: the unique tau-function in the odd
times, the Kac-Wakimoto/BKP variable dictionaries into Saito-Givental and
FJRW descendant variables (with sqrt(hbar) = rho_1), and the generating-
function combinatorics turning log tau coefficients into correlators.
Selection rules (dimension and Euler-characteristic constraints) are
enforced exactly in rational arithmetic; the genus is recovered from the
dimension constraint, which determines it uniquely since D < 3.

All cyclotomic constants (xi = e^{i pi/h}, rho_i = -i xi^{m_i}, c) stay on
the numeric BigComplex side; tau itself is exact over Q(i).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
from gmpy2 import mpq

from .exact import BigComplex, GaussianRational, factorial, grat
from .operators import Params
from .series import Series
from .tau import TauSeries, log_tau


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

class MirrorConstants:
    """Numeric dictionary constants for D_N mirror symmetry at given precision."""

    def __init__(self, p: Params, prec: int = 512):
        self.params = p
        self.prec = prec
        N, h = p.N, p.h
        with mpmath.workprec(prec):
            self.xi = mpmath.exp(mpmath.mpc(0, 1) * mpmath.pi / h)
            self.eta = mpmath.exp(mpmath.mpc(0, 2) * mpmath.pi / h)
            self.rho = {i: -mpmath.mpc(0, 1) * self.xi ** self.exponent(i)
                        for i in range(1, N + 1)}
            self.c = (mpmath.mpc(0, 1) / mpmath.sqrt(2 * h)
                      * mpmath.mpf(2) ** (-mpmath.mpf(N - 2) / h))
            self.hbar_sg = self.rho[1] ** 2
            self.hbar_fjrw = self.rho[1] ** 2 / self.c ** 2

    def exponent(self, i: int) -> int:
        """Coxeter exponents m_i: 2i-1 for i <= N-1, and m_N = N-1."""
        N = self.params.N
        if not 1 <= i <= N:
            raise ValueError("index out of range")
        return 2 * i - 1 if i <= N - 1 else N - 1

    def involution(self, i: int) -> int:
        N = self.params.N
        return N if i == N else N - i

    def degree(self, label: int) -> mpq:
        """deg e_0 = (N-2)/(2N-2); deg e_{2i-1} = (i-1)/(N-1)."""
        N = self.params.N
        if label == 0:
            return mpq(N - 2, 2 * N - 2)
        if label % 2 == 0:
            raise ValueError("FJRW labels are e_0 or odd e_{2i-1}")
        i = (label + 1) // 2
        if not 1 <= i <= N - 1:
            raise ValueError(f"label e_{label} out of range for N={N}")
        return mpq(i - 1, N - 1)

    def theta(self, label: int) -> Tuple[mpq, mpq]:
        if label == 0:
            return (mpq(0), mpq(0))
        return (mpq(label, self.params.h), mpq(1, 2))

    def conformal_dimension(self) -> mpq:
        return 1 - mpq(2, self.params.h)

    def verify(self, tol: Optional[float] = None) -> dict:
        """rho_N = 1 (both forms of the period lemma), |rho_i| = 1,
        rho_1^2 = -eta, and the involution is an involution."""
        p = self.params
        if tol is None:
            tol = mpmath.mpf(2) ** (-self.prec // 2)
        with mpmath.workprec(self.prec):
            ok_rhoN = abs(self.rho[p.N] - 1) < tol
            ok_mod = all(abs(abs(self.rho[i]) - 1) < tol for i in self.rho)
            ok_sq = abs(self.rho[1] ** 2 + self.eta) < tol
        ok_inv = all(self.involution(self.involution(i)) == i
                     for i in range(1, p.N + 1))
        return {"check": "mirror_constants", "N": p.N, "prec": self.prec,
                "rho_N_is_one": bool(ok_rhoN), "unit_modulus": bool(ok_mod),
                "rho1_squared_is_minus_eta": bool(ok_sq),
                "involution": bool(ok_inv),
                "pass": bool(ok_rhoN and ok_mod and ok_sq and ok_inv)}


# ---------------------------------------------------------------------------
# residue pairing on the local algebra of x1^2 x2 - x2^{N-1} + x3^2
# ---------------------------------------------------------------------------

def _reduce_local(N: int, a: int, b: int, c: int) -> Dict[Tuple[int, int], mpq]:
    """Reduce x1^a x2^b x3^c in the Jacobi ring: x3 = 0, x1 x2 = 0,
    x1^2 = (N-1) x2^{N-2}.  Result in the basis x1^da x2^db (da <= 1)."""
    if c > 0:
        return {}
    coeff = mpq(1)
    while a >= 2:
        a -= 2
        b += N - 2
        coeff *= N - 1
    if a >= 1 and b >= 1:
        return {}
    if b > N - 2:
        return {}
    return {(a, b): coeff}


def residue_pairing(N: int) -> dict:
    """Res(phi_i phi_j) table from N psi_D = Res(psi) [Hess f] on monomials,
    cross-checked against the stated delta-pattern:
    Res(phi_i phi_j) = -delta_{i+j,N}/(2h) (i,j < N), Res(phi_i phi_N) = -delta_{i,N}.
    """
    h = 2 * N - 2
    # [Hess f] = -4 N (N-1) x2^{N-2} in the Jacobi ring
    hess = mpq(-4 * N * (N - 1))

    def res_of(parts: Dict[Tuple[int, int], mpq]) -> mpq:
        # N * (top component) = Res * [Hess]; top component lives at x2^{N-2}
        top = parts.get((0, N - 2), mpq(0))
        return mpq(N) * top / hess

    table = {}
    ok = True
    phis = {i: (0, i - 1) for i in range(1, N)}
    phis[N] = (1, 0)       # phi_N = 2 x1, carried as 2 * x1
    for i in range(1, N + 1):
        for j in range(i, N + 1):
            (a1, b1), (a2, b2) = phis[i], phis[j]
            scale = mpq(2) ** ((i == N) + (j == N))
            parts = _reduce_local(N, a1 + a2, b1 + b2, 0)
            val = res_of({k: v * scale for k, v in parts.items()})
            table[(i, j)] = val
            if i < N and j < N:
                want = mpq(-1, 2 * h) if i + j == N else mpq(0)
            else:
                want = mpq(-1) if (i == N and j == N) else mpq(0)
            ok = ok and val == want
    return {"check": "residue_pairing", "N": N, "pass": bool(ok),
            "table": {f"({i},{j})": str(v) for (i, j), v in table.items()}}


# ---------------------------------------------------------------------------
# selection rules
# ---------------------------------------------------------------------------

def selection_rules(p: Params, insertions: Sequence[Tuple[int, int]], g: int) -> dict:
    """Admissibility of <e_{l_1} psi^{k_1}, ..., e_{l_m} psi^{k_m}>_{g,m}.

    insertions: list of (k, label); labels 0 or odd 2i-1.  Returns the
    dimension and Euler-characteristic verdicts with the violated quantity.
    """
    mc = MirrorConstants(p, prec=64)
    m = len(insertions)
    D = mc.conformal_dimension()
    total = sum((mc.degree(lab) + k for k, lab in insertions), mpq(0))
    dim_rhs = 3 * g - 3 + m + D * (1 - g)
    dim_ok = total == dim_rhs
    th1 = sum((mc.theta(lab)[0] for _, lab in insertions), mpq(0))
    th2 = sum((mc.theta(lab)[1] for _, lab in insertions), mpq(0))
    e1 = mpq(2 * g - 2 + m, p.h) - th1
    e2 = mpq(2 * g - 2 + m, 2) - th2
    euler_ok = e1.denominator == 1 and e2.denominator == 1
    return {"check": "selection_rules", "g": g,
            "insertions": [[k, lab] for k, lab in insertions],
            "dimension_ok": bool(dim_ok),
            "dimension_lhs": str(total), "dimension_rhs": str(dim_rhs),
            "euler_ok": bool(euler_ok),
            "euler_residues": [str(e1), str(e2)],
            "admissible": bool(dim_ok and euler_ok)}


def genus_from_dimension(p: Params, insertions: Sequence[Tuple[int, int]]
                         ) -> Optional[int]:
    """The unique genus allowed by the dimension constraint, if integral >= 0.

    Solving sum(deg + k) = (3-D) g + (m - 3 + D): since D < 3 the genus is
    always unique; returns None when it is not a nonnegative integer.
    """
    mc = MirrorConstants(p, prec=64)
    m = len(insertions)
    D = mc.conformal_dimension()
    total = sum((mc.degree(lab) + k for k, lab in insertions), mpq(0))
    g = (total - m + 3 - D) / (3 - D)
    if g.denominator != 1 or g < 0:
        return None
    return int(g)


# ---------------------------------------------------------------------------
# variable dictionaries
# ---------------------------------------------------------------------------

def sg_slot(p: Params, a: int, m: int) -> Tuple[int, int]:
    """BKP time t_{a,m} (m odd) <-> SG variable t^SG_{k,s}."""
    if m % 2 == 0 or m < 1:
        raise ValueError("times are odd positive")
    l = (m - 1) // 2
    if a == 2:
        return (l, p.N)
    k, s = divmod(l, p.N - 1)
    return (k, s + 1)      # l + 1 = (N-1) k + s with 1 <= s <= N-1


def sg_factor(mc: MirrorConstants, a: int, m: int):
    """Constant in t_{a,m} = factor * t^SG_{k,s} (sqrt(hbar) = rho_1)."""
    p = mc.params
    h = p.h
    k, s = sg_slot(p, a, m)
    with mpmath.workprec(mc.prec):
        if a == 1:
            ms = mc.exponent(s)
            denom = mpmath.mpf(1)
            for r in range(0, k + 1):
                denom *= mpmath.mpf(ms) / h + r
            return mpmath.mpc(0, 1) * mc.rho[s] / (h * mc.rho[1]) / denom
        l = k
        denom = mpmath.mpf(1)
        for r in range(0, l + 1):
            denom *= mpmath.mpf(1) / 2 + r
        return mpmath.mpc(0, 1) * mc.rho[p.N] / mc.rho[1] / denom


def fjrw_slot(p: Params, a: int, m: int) -> Tuple[int, int]:
    """BKP time t_{a,m} <-> FJRW variable t^F_{k,label}."""
    if a == 2:
        return ((m - 1) // 2, 0)
    k, s = sg_slot(p, 1, m)
    return (k, 2 * s - 1)


def fjrw_factor(mc: MirrorConstants, a: int, m: int):
    """Constant in t_{a,m} = factor * t^F_{k,label} (final linear dictionary)."""
    p = mc.params
    h = p.h
    with mpmath.workprec(mc.prec):
        base = mpmath.mpf(2) ** (-mpmath.mpf(1) / h) * mc.xi
        if a == 1:
            k, s = sg_slot(p, 1, m)
            mi = mc.exponent(s)
            denom = mpmath.mpf(1)
            for j in range(0, k + 1):
                denom *= mpmath.mpf(mi) / h + j
            return mpmath.mpc(0, 1) / h * base ** (mi - 1) / denom
        k = (m - 1) // 2
        mN = mc.exponent(p.N)
        denom = mpmath.mpf(1)
        for j in range(0, k + 1):
            denom *= mpmath.mpf(mN) / h + j
        return -mpmath.mpf(1) / h * base ** (mN - 1) / denom


def change_fjrw_sg(mc: MirrorConstants, label: int):
    """t^F_{k,label} = factor * t^SG_{k,s(label)} (the Mir-map rescaling)."""
    p = mc.params
    N = p.N
    with mpmath.workprec(mc.prec):
        if label == 0:
            return -p.h * mpmath.mpc(0, 1) * mpmath.mpf(2) ** (mpq(N - 2, 2 * N - 2))
        i = (label + 1) // 2
        return mpmath.mpf(2) ** (mpq(i - 1, N - 1))


def _transform_series(tau_like: Series, factor_of, prec: int):
    """Numeric coefficient table after the diagonal substitution
    t_{a,m} = factor(a,m) * new variable (one table entry per monomial)."""
    out = []
    ring = tau_like.ring
    with mpmath.workprec(prec):
        for e, c in tau_like.sorted_terms():
            val = mpmath.mpc(mpmath.mpf(c.re.numerator) / mpmath.mpf(c.re.denominator),
                             mpmath.mpf(c.im.numerator) / mpmath.mpf(c.im.denominator))
            mono = {}
            for name, k in zip(ring.names, e):
                if not k:
                    continue
                a, m = name[1:].split("_")
                a, m = int(a), int(m)
                val *= factor_of(a, m) ** k
                mono[(a, m)] = k
            out.append((mono, val))
    return out


def to_sg_variables(tau: TauSeries, prec: int = 512) -> dict:
    """log tau as a numeric series in t^SG; round-trips to the exact series."""
    mc = MirrorConstants(tau.params, prec)
    table = _transform_series(log_tau(tau), lambda a, m: sg_factor(mc, a, m), prec)
    rows = []
    for mono, val in table:
        sg_mono = {}
        for (a, m), k in mono.items():
            slot = sg_slot(tau.params, a, m)
            sg_mono[slot] = sg_mono.get(slot, 0) + k
        rows.append({"monomial": {f"t_sg[{k},{s}]": e for (k, s), e in sg_mono.items()},
                     "value": [mpmath.nstr(val.real, 40), mpmath.nstr(val.imag, 40)]})
    return {"check": "to_sg_variables", "prec": prec, "terms": rows}


def to_fjrw_variables(tau: TauSeries, prec: int = 512) -> dict:
    """log tau as a numeric series in t^FJRW (same contract as the SG table)."""
    mc = MirrorConstants(tau.params, prec)
    table = _transform_series(log_tau(tau), lambda a, m: fjrw_factor(mc, a, m), prec)
    rows = []
    for mono, val in table:
        f_mono = {}
        for (a, m), k in mono.items():
            slot = fjrw_slot(tau.params, a, m)
            f_mono[slot] = f_mono.get(slot, 0) + k
        rows.append({"monomial": {f"t_fjrw[{k},{lab}]": e for (k, lab), e in f_mono.items()},
                     "value": [mpmath.nstr(val.real, 40), mpmath.nstr(val.imag, 40)]})
    return {"check": "to_fjrw_variables", "prec": prec, "terms": rows}


def roundtrip_error(tau: TauSeries, prec: int = 512):
    """SG -> BKP -> SG round trip: apply the dictionary then its inverse and
    compare against the exact coefficients; returns the max |error|."""
    mc = MirrorConstants(tau.params, prec)
    worst = mpmath.mpf(0)
    with mpmath.workprec(prec):
        forward = _transform_series(tau.series, lambda a, m: sg_factor(mc, a, m), prec)
        back = []
        for mono, val in forward:
            v = val
            for (a, m), k in mono.items():
                v /= sg_factor(mc, a, m) ** k
            back.append((mono, v))
        for (mono, v), (e, c) in zip(back, tau.series.sorted_terms()):
            want = mpmath.mpc(mpmath.mpf(c.re.numerator) / mpmath.mpf(c.re.denominator),
                              mpmath.mpf(c.im.numerator) / mpmath.mpf(c.im.denominator))
            err = abs(v - want)
            if err > worst:
                worst = err
    return worst


# ---------------------------------------------------------------------------
# correlator extraction
# ---------------------------------------------------------------------------

def _tau_monomial_for(p: Params, insertions: Sequence[Tuple[int, int]],
                      flavor: str) -> Dict[Tuple[int, int], int]:
    """The t_{a,m} monomial carrying the requested insertions."""
    mono: Dict[Tuple[int, int], int] = {}
    for k, lab in insertions:
        if flavor == "fjrw":
            if lab == 0:
                key = (2, 2 * k + 1)
            else:
                i = (lab + 1) // 2
                key = (1, p.h * k + lab)
        else:                      # SG: lab is the basis index s in 1..N
            if lab == p.N:
                key = (2, 2 * k + 1)
            else:
                key = (1, 2 * ((p.N - 1) * k + lab) - 1)
        mono[key] = mono.get(key, 0) + 1
    return mono


def extract_correlator(tau: TauSeries, g: int,
                       insertions: Sequence[Tuple[int, int]],
                       flavor: str = "fjrw", prec: int = 512,
                       enforce_rules: bool = True) -> dict:
    """<e_{l_1} psi^{k_1}, ..., >_{g,m} from log tau via the dictionaries.

    The monomial coefficient of log tau in the target variables is
    prod_j mult_j! * coeff * hbar^{1-g}; the genus is checked against the
    dimension constraint (unique since D < 3) and inadmissible requests
    return exact zero with the rule citation (unless enforce_rules=False,
    which extracts the raw value; forbidden ones must then vanish).
    """
    p = tau.params
    mc = MirrorConstants(p, prec)
    if flavor not in ("fjrw", "sg"):
        raise ValueError("flavor must be 'fjrw' or 'sg'")
    if flavor == "fjrw":
        rules = selection_rules(p, insertions, g)
        gstar = genus_from_dimension(p, insertions)
        if enforce_rules and (not rules["admissible"] or gstar != g):
            return {"check": "correlator", "flavor": flavor, "g": g,
                    "insertions": list(map(list, insertions)),
                    "value": ["0", "0"], "exact_zero": True,
                    "rule": rules, "pass": True}
    mono = _tau_monomial_for(p, insertions, flavor)
    weight = sum(m * k for (a, m), k in mono.items())
    if weight > tau.weight:
        raise ValueError(f"monomial weight {weight} exceeds tau weight {tau.weight}")
    lt = log_tau(tau)
    coeff = lt.coeff({f"t{a}_{m}": k for (a, m), k in mono.items()})
    with mpmath.workprec(prec):
        val = mpmath.mpc(mpmath.mpf(coeff.re.numerator) / mpmath.mpf(coeff.re.denominator),
                         mpmath.mpf(coeff.im.numerator) / mpmath.mpf(coeff.im.denominator))
        # t_{a,m} = f * t_target, so each occurrence contributes a factor f
        for (a, m), k in mono.items():
            f = (fjrw_factor(mc, a, m) if flavor == "fjrw" else sg_factor(mc, a, m))
            val *= f ** k
        mult = 1
        counts: Dict[Tuple[int, int], int] = {}
        for ins in insertions:
            counts[ins] = counts.get(ins, 0) + 1
        for c in counts.values():
            mult *= factorial(c)
        hbar = mc.hbar_fjrw if flavor == "fjrw" else mc.hbar_sg
        val = val * mult * hbar ** (1 - g)
    return {"check": "correlator", "flavor": flavor, "g": g,
            "insertions": list(map(list, insertions)),
            "value": [mpmath.nstr(val.real, min(50, prec // 8)),
                      mpmath.nstr(val.imag, min(50, prec // 8))],
            "exact_zero": False, "pass": True}


def correlator_value(tau: TauSeries, g: int,
                     insertions: Sequence[Tuple[int, int]],
                     flavor: str = "fjrw", prec: int = 512,
                     enforce_rules: bool = True):
    """mpmath.mpc value of the correlator (convenience wrapper)."""
    rep = extract_correlator(tau, g, insertions, flavor, prec, enforce_rules)
    with mpmath.workprec(prec):
        if rep.get("exact_zero"):
            return mpmath.mpc(0)
        return mpmath.mpc(mpmath.mpf(rep["value"][0]), mpmath.mpf(rep["value"][1]))
