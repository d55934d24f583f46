"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Budgets are asserted where the criterion states one.  The extended checks
(Hirota at W=8 beyond the trusted stated window is covered by the W=8 run
here; the weight-14 four-point correlators) are opt-in via DNTAU_EXTENDED=1
because of their documented runtime.
"""

import os
import time

import mpmath
import pytest
from gmpy2 import mpq

from dntau.asymptotics import verify_ip_relation, verify_l57
from dntau.exact import GR_I, GaussianRational, double_factorial, grat
from dntau.matrixmodel import (int_sing_numeric, quadrature_vs_asymptotics,
                               verify_hciz)
from dntau.mirror import (MirrorConstants, correlator_value,
                          extract_correlator, genus_from_dimension)
from dntau.operators import (Params, apply_A, build_basis, gaussian_oracle,
                             psi2_closed_form, solve_wave)
from dntau.pfaffian import (SkewMatrix, pf_squared_equals_det, pfaffian,
                            verify_de_bruijn, verify_schur_pfaffian)
from dntau.tau import (MiwaConfig, tau_series, twopoint_suite, verify_hirota,
                       verify_rationality, verify_string, verify_symmetry)
from dntau.twopoint import build_twopoint, closed_form_phi22

EXTENDED = bool(os.environ.get("DNTAU_EXTENDED"))


def report(n, ok, msg):
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {msg}"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def tau_w8():
    return tau_series(Params(2), MiwaConfig(8, 8, 8), twopoint_suite(Params(2), 8))


@pytest.fixture(scope="module")
def tau_w6(tau_w8):
    # restriction of the W=8 computation would be circular as a check;
    # recompute independently at W=6
    return tau_series(Params(2), MiwaConfig(6, 6, 6), twopoint_suite(Params(2), 6))


def test_criterion_1_wave_coefficients():
    from dntau.exact import factorial
    t0 = time.time()
    for N in (2, 3, 4):
        p = Params(N)
        h = p.h
        psi = solve_wave(p, max(3 * (h + 1), 8 * (2 * h + 2)))
        alpha_sq = GR_I * grat(mpq(1, h))
        def alpha_coeff(j):
            c = psi.comp1.series.terms.get((-(h + 1) * j,), GaussianRational(0))
            return c / (alpha_sq ** j)
        assert alpha_coeff(1) == grat(mpq((h + 2) * (2 * h + 1), 24))
        assert alpha_coeff(2) == grat(mpq((h + 2) * (2 * h + 1) * (2 * h * h + 53 * h + 50), 1152))
        assert alpha_coeff(3) == grat(mpq(
            -(h + 2) * (2 * h + 1)
            * (556 * h ** 4 - 1972 * h ** 3 - 41853 * h ** 2 - 76492 * h - 36164), 414720))
        base = (GR_I ** h) * grat(mpq(1, (h + 1) * 2 ** (h + 1)))
        for k in range(1, 9):
            want = (base ** k) * grat(
                double_factorial(2 * (h + 1) * k - 1) * mpq(1, factorial(k)))
            got = psi.comp2.series.terms.get((-(2 * h + 2) * k,), GaussianRational(0))
            assert got == want, (N, k)
    dt = time.time() - t0
    report(1, dt < 10, f"wave-function coefficient displays, h in (2,4,6), exact ({dt:.1f}s < 10s)")


def test_criterion_2_oracle_equivalence():
    t0 = time.time()
    for N in (2, 3):
        p = Params(N)
        order = 6 * (p.h + 1)
        a = solve_wave(p, order)
        b = gaussian_oracle(p, order)
        assert a.comp1.series == b.comp1.series
        assert a.comp2.series == b.comp2.series
        basis = build_basis(p, 5, order)
        for m in range(-5, 6):
            got = basis.psi(m).comp2
            want = psi2_closed_form(p, m, got.order)
            assert got.series == want.series.filter(lambda e: e[0] >= -got.order)
    dt = time.time() - t0
    report(2, dt < 30, f"solve_wave == gaussian_oracle and closed-form Psi_m^(2), |m|<=5, h in (2,4) ({dt:.1f}s < 30s)")


def test_criterion_3_eigenvector():
    t0 = time.time()
    for N in (2, 3):
        p = Params(N)
        basis = build_basis(p, 5, 3 * (p.h + 1) + 8)
        for k in range(-5, 6):
            w = basis.psi(k)
            for comp, c in ((1, w.comp1), (2, w.comp2)):
                img = apply_A(p, comp, c)
                want = c.series.scale(grat(-k)).filter(lambda e: e[0] >= -img.order)
                assert img.series == want, (N, k, comp)
    dt = time.time() - t0
    report(3, dt < 30, f"A Psi_k = -k Psi_k for |k| <= 5, both components, h in (2,4) ({dt:.1f}s < 30s)")


def test_criterion_4_twopoint_crosscheck():
    t0 = time.time()
    for N in (2, 3):
        p = Params(N)
        win = 2 * (2 * p.h + 2)
        basis = build_basis(p, win // 2, win + 2)
        built = build_twopoint(basis, 2, 2, window=win)
        closed = closed_form_phi22(p, win)
        assert built.regular == closed.regular.to_ring(built.regular.ring)
        assert built.regular_coeff(0, 0).is_zero()
        b11 = build_twopoint(basis, 1, 1)
        assert b11.regular_coeff(0, 0).is_zero()
    dt = time.time() - t0
    report(4, dt < 60, f"build_twopoint(2,2) == closed form to bidegree 2(2h+2), h in (2,4); phi~_aa regular vanishes at infinity ({dt:.1f}s < 60s)")


def test_criterion_5_hirota(tau_w6, tau_w8):
    t0 = time.time()
    for m in (0, 1):
        rep = verify_hirota(tau_w6, m)
        assert rep["pass"], rep
    for m in (0, 1):
        rep = verify_hirota(tau_w8, m)
        assert rep["pass"], rep
    dt = time.time() - t0
    report(5, dt < 600, f"Hirota m in (0,1) at W=6 and W=8, h=2: all window coefficients exactly 0 ({dt:.1f}s < 600s)")


def test_criterion_6_string(tau_w8):
    t0 = time.time()
    rep = verify_string(tau_w8)
    assert rep["pass"], rep
    s1 = GaussianRational.from_json(rep["sigma1"])
    s2 = GaussianRational.from_json(rep["sigma2"])
    assert s1 == grat(mpq(1, 8)) and s2 == grat(mpq(1, 8))
    dt = time.time() - t0
    report(6, dt < 600, f"expanded L_-1 annihilates tau at W=8, h=2; fitted sigma=(1/8,1/8)=1/(4 h_a) ({dt:.1f}s < 600s)")


def test_criterion_7_symmetry_rationality(tau_w6, tau_w8):
    assert verify_symmetry(tau_w8)["pass"]
    assert verify_rationality(tau_w6)["pass"]
    report(7, True, "tau(t1,t2)=tau(t1,-t2) at W=8 exact; tau(i Z1, Z2) rational at W=6")


def test_criterion_8_steepest_descent():
    t0 = time.time()
    for N in (2, 3):
        rep = verify_l57(Params(N), 3)
        assert rep["pass"], rep
        for comp in (1, 2):
            rep = verify_ip_relation(Params(N), comp, -2, 3, 4)
            assert rep["pass"], rep
    dt = time.time() - t0
    report(8, dt < 120, f"l57 for all pairs through 3 correction orders, h in (2,4); Ip relation p in [-2,3] ({dt:.1f}s < 120s)")


def test_criterion_9_pfaffian_toolchain():
    import random
    for n in (1, 2, 3):
        assert verify_schur_pfaffian(n)["pass"]
    for n in (1, 2):
        assert verify_de_bruijn(n)["pass"]
    rng = random.Random(5)
    for size in (2, 4, 6):
        upper = {(i, j): GaussianRational(mpq(rng.randint(-9, 9), rng.randint(1, 4)),
                                          rng.randint(-3, 3))
                 for i in range(size) for j in range(i + 1, size)}
        assert pf_squared_equals_det(SkewMatrix(size, upper))
    report(9, True, "Schur Pfaffian (n<=3), de Bruijn (2n<=4), Pf^2=det (size<=6), all exact")


def test_criterion_10_numeric_bridges():
    t0 = time.time()
    rep = verify_hciz(2, [1, 2], [3, 5], tol=1e-8)
    assert rep["pass"], rep
    rep = quadrature_vs_asymptotics(Params(2), 3, 2)
    assert rep["pass"], rep
    rep = int_sing_numeric(2, 1, tol=1e-10)
    assert rep["pass"], rep
    with mpmath.workprec(128):
        assert abs(mpmath.mpf(rep["numeric"]) - mpmath.mpf(1) / 6) < 1e-10
    dt = time.time() - t0
    report(10, dt < 60, f"HCIZ N=2 @1e-8, Watson quadrature bound, int_sing = 1/6 @1e-10 ({dt:.1f}s < 60s)")


def test_criterion_11_mirror_correlators():
    t0 = time.time()
    for N in (3, 4):
        p = Params(N)
        assert MirrorConstants(p, prec=448).verify()["pass"]
        tau = tau_series(p, MiwaConfig(4, 4, 4))
        val = correlator_value(tau, 0, [(0, 0), (0, 0), (0, 1)], "fjrw", prec=448)
        with mpmath.workprec(448):
            assert abs(val - mpmath.mpf(-1) / (N - 1)) < mpmath.mpf(10) ** -50
        # selection-rule-forbidden correlators extract to 0 from log tau
        with mpmath.workprec(448):
            for ins in ([(0, 1), (0, 1), (0, 1)], [(0, 0), (0, 0), (0, 0)]):
                if genus_from_dimension(p, ins) == 0:
                    continue
                raw = correlator_value(tau, 0, ins, "fjrw", prec=448,
                                       enforce_rules=False)
                assert abs(raw) < mpmath.mpf(10) ** -50
    dt = time.time() - t0
    report(11, dt < 900, f"<e0,e0,e1> = -1/(N-1) for N in (3,4) at 448 bits, |err|<1e-50; forbidden extract to 0 ({dt:.1f}s)")


@pytest.fixture(scope="module")
def tau4_w14():
    p = Params(4)
    return tau_series(p, MiwaConfig(14, 0, 14), twopoint_suite(p, 14))


@pytest.mark.skipif(not EXTENDED, reason="extended (slow, opt-in): set DNTAU_EXTENDED=1")
def test_criterion_11_extended_four_point(tau4_w14):
    # Stated expected values 1/h and -1/h^2.  This fails honestly: the
    # computed tau (cross-verified by two independent assembly routes, the
    # steepest-descent kernels, the string/Hirota checks, and the unit and
    # dilaton axioms) yields exactly half these values, and an independent
    # flat-coordinate residue computation confirms 1/(2h), -1/(2h^2): the
    # quoted values omit the flat-frame correction of x2^{N-2} (see the
    # axiom test below: the same uncorrected computation at N=3 would give
    # a nonzero four-point with a unit insertion).
    t0 = time.time()
    with mpmath.workprec(512):
        v = correlator_value(tau4_w14, 0, [(0, 3), (0, 3), (0, 3), (0, 5)],
                             "fjrw", prec=512)
        vs = correlator_value(tau4_w14, 0, [(0, 2), (0, 2), (0, 2), (0, 3)],
                              "sg", prec=512)
        ok = (abs(v - mpmath.mpf(1) / 6) < mpmath.mpf(10) ** -50
              and abs(vs + mpmath.mpf(1) / 36) < mpmath.mpf(10) ** -50)
    dt = time.time() - t0
    report("11-extended", ok,
           f"<e3,e3,e3,e5>_0,4 = 1/h and SG 4-point = -1/h^2 at N=4 "
           f"(computed: {mpmath.nstr(v.real, 12)}, {mpmath.nstr(vs.real, 12)}; "
           f"flat-frame values are 1/(2h), -1/(2h^2)) ({dt:.1f}s)")


@pytest.mark.skipif(not EXTENDED, reason="extended (slow, opt-in): set DNTAU_EXTENDED=1")
def test_extended_four_point_flat_frame_values(tau4_w14):
    # The internally consistent values carried by the unique tau-function
    # under the displayed variable dictionaries: half the quoted ones.
    t0 = time.time()
    with mpmath.workprec(512):
        v = correlator_value(tau4_w14, 0, [(0, 3), (0, 3), (0, 3), (0, 5)],
                             "fjrw", prec=512)
        assert abs(v - mpmath.mpf(1) / 12) < mpmath.mpf(10) ** -50, v
        vs = correlator_value(tau4_w14, 0, [(0, 2), (0, 2), (0, 2), (0, 3)],
                              "sg", prec=512)
        assert abs(vs + mpmath.mpf(1) / 72) < mpmath.mpf(10) ** -50, vs
    dt = time.time() - t0
    report("11-extended-flat-frame", True,
           f"four-point values in the flat frame: 1/(2h) and -1/(2h^2) at N=4 ({dt:.1f}s)")


@pytest.mark.skipif(not EXTENDED, reason="extended (slow, opt-in): set DNTAU_EXTENDED=1")
def test_extended_axiom_probes():
    # CohFT axioms on quantities the truncation windows reach: a four-point
    # with a psi-free unit insertion vanishes, and the dilaton equation
    # reproduces the three-point value; both discriminate the flat frame.
    p3 = Params(3)
    tau10 = tau_series(p3, MiwaConfig(10, 0, 10), twopoint_suite(p3, 10))
    with mpmath.workprec(448):
        v = correlator_value(tau10, 0, [(0, 1), (0, 2), (0, 2), (0, 2)], "sg",
                             prec=448, enforce_rules=False)
        assert abs(v) < mpmath.mpf(10) ** -50, v
        tau8 = tau_series(p3, MiwaConfig(8, 8, 8), twopoint_suite(p3, 8))
        vd = correlator_value(tau8, 0, [(1, 1), (0, 0), (0, 0), (0, 1)],
                              "fjrw", prec=448)
        assert abs(vd + mpmath.mpf(1) / 2) < mpmath.mpf(10) ** -50, vd
    report("11-axioms", True,
           "<1,x2,x2,x2> = 0 (unit axiom) and dilaton four-point = -1/(N-1)")
