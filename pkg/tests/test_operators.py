import pytest
from gmpy2 import mpq

from dntau.exact import GR_I, GaussianRational, double_factorial, grat
from dntau.operators import (Component, MarginError, Params, WavePair,
                             apply_A, apply_a_inv, apply_c, apply_op,
                             build_basis, gaussian_oracle, op_a, op_b,
                             phi_vector, psi2_closed_form, solve_wave, zmono)

P2 = Params(2)   # h = 2
P3 = Params(3)   # h = 4


def test_params():
    assert P2.h == 2 and P2.h1 == 2 and P2.h2 == 2
    assert P3.h == 4
    with pytest.raises(ValueError):
        Params(1)


def test_a2_on_monomial():
    # a2 z^n = ((n-1)/2) z^{n-2}
    v = Component(zmono(0), 10)
    out = op_a(P2, 2).apply(v)
    assert out.series.terms == {(-2,): grat(mpq(-1, 2))}


def test_a1_on_constant():
    # a1 z^0 = -i z - (1/2) z^{-h}
    for p in (P2, P3):
        out = op_a(p, 1).apply(Component(zmono(0), 10))
        assert out.series.terms == {(1,): grat(0, -1), (-p.h,): grat(mpq(-1, 2))}


def test_a2_inverse_roundtrip():
    v = Component(zmono(0), 10)
    w = apply_a_inv(P2, 2, v)
    assert w.series.terms == {(2,): grat(2)}
    back = op_a(P2, 2).apply(w)
    assert back.series.terms == {(0,): grat(1)}


def test_a1_inverse_roundtrip():
    for p in (P2, P3):
        f = Component(zmono(0) + zmono(-1, grat(3, 2)), 20)
        g = apply_a_inv(p, 1, f)
        back = op_a(p, 1).apply(g)
        want = f.series.filter(lambda e: e[0] >= -back.order)
        assert back.series == want


def test_margin_accounting():
    v = Component(zmono(0), 0)
    with pytest.raises(MarginError):
        op_b(P2, 1).apply(v)


def test_wave_normalization():
    psi = solve_wave(P2, 8)
    assert psi.comp1.series.terms[(0,)] == 1
    assert psi.comp2.series.terms[(0,)] == 1


def test_wave_coeff_h2_alpha2():
    # coefficient of z^-3 at h=2 equals 5i/12 (alpha^2 = i z^{-h-1}/h)
    psi = solve_wave(P2, 3)
    assert psi.comp1.series.terms[(-3,)] == grat(0, mpq(5, 12))


def wave_alpha_coeff(p, psi, j):
    """Coefficient of alpha^{2j} in Psi^(1), alpha^2 = i z^{-h-1}/h."""
    c = psi.comp1.series.terms.get((-(p.h + 1) * j,), GaussianRational(0))
    return c / ((GR_I * grat(mpq(1, p.h))) ** j)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_wave_alpha_expansion_paper_display(N):
    p = Params(N)
    h = p.h
    psi = solve_wave(p, 3 * (h + 1))
    assert wave_alpha_coeff(p, psi, 1) == grat(mpq((h + 2) * (2 * h + 1), 24))
    assert wave_alpha_coeff(p, psi, 2) == grat(
        mpq((h + 2) * (2 * h + 1) * (2 * h * h + 53 * h + 50), 1152))
    assert wave_alpha_coeff(p, psi, 3) == grat(
        mpq(-(h + 2) * (2 * h + 1)
            * (556 * h ** 4 - 1972 * h ** 3 - 41853 * h ** 2 - 76492 * h - 36164),
            414720))


def test_psi2_first_term_h2():
    # i^h (2h+1)!!/((h+1)(2z^2)^{h+1}): h=2 gives -(5/8) z^-6
    psi = solve_wave(P2, 6)
    assert psi.comp2.series.terms[(-6,)] == grat(mpq(-5, 8))


def test_psi2_second_term_h2():
    # k=2 term of the closed form: +1155/128 z^-12
    psi = solve_wave(P2, 12)
    assert psi.comp2.series.terms[(-12,)] == grat(mpq(1155, 128))


@pytest.mark.parametrize("N", [2, 3])
def test_oracle_equivalence(N):
    p = Params(N)
    order = 6 * (p.h + 1)
    a = solve_wave(p, order)
    b = gaussian_oracle(p, order)
    assert a.comp1.series == b.comp1.series
    assert a.comp2.series == b.comp2.series


@pytest.mark.parametrize("N", [2, 3])
def test_wave_support_membership(N):
    # Psi^(1) in Q[[i z^{-h-1}]] and Psi^(2) in Q[[z^{-2h-2}]]
    p = Params(N)
    psi = solve_wave(p, 4 * (p.h + 1))
    for (e,), c in psi.comp1.series.terms.items():
        assert e % (p.h + 1) == 0
        j = (-e) // (p.h + 1)
        assert (c / (GR_I ** j)).is_rational()
    for (e,), c in psi.comp2.series.terms.items():
        assert e % (2 * p.h + 2) == 0
        assert c.is_rational()


def test_basis_leading_terms():
    basis = build_basis(P2, 3, 8)
    # Psi_1^(1) leading term z
    s1 = basis.psi(1).comp1.series
    assert s1.terms[(1,)] == 1
    assert all(e <= 1 for (e,) in s1.terms)
    # Psi_{-1}^(2) leading term -2i z^2
    s2 = basis.psi(-1).comp2.series
    assert s2.terms[(2,)] == grat(0, -2)


def test_basis_closed_form_psi2():
    for p, K in ((P2, 5), (P3, 5)):
        order = 6 * (p.h + 1)
        basis = build_basis(p, K, order)
        for m in range(-K, K + 1):
            got = basis.psi(m).comp2
            want = psi2_closed_form(p, m, got.order)
            assert got.series == want.series.filter(lambda e: e[0] >= -got.order), (p, m)


def test_psi2_m1_leading():
    # Psi_1^(2) = 1/(2 i z^2) + ...
    w = psi2_closed_form(P2, 1, 8)
    assert w.series.terms[(-2,)] == grat(0, 1) / grat(0, 2) / grat(0, 1)  # = 1/(2i)
    assert w.series.terms[(-2,)] == GaussianRational(0, mpq(-1, 2))


@pytest.mark.parametrize("N", [2, 3])
def test_eigenvector_property(N):
    p = Params(N)
    basis = build_basis(p, 5, 3 * (p.h + 1) + 10)
    for k in range(-5, 6):
        w = basis.psi(k)
        for comp, c in ((1, w.comp1), (2, w.comp2)):
            img = apply_A(p, comp, c)
            want = c.series.scale(grat(-k)).filter(lambda e: e[0] >= -img.order)
            assert img.series == want, (N, k, comp)


def test_phi1_annihilated_by_a():
    phi1 = phi_vector(1, 12)
    out = apply_op(P2, "a", phi1)
    assert out.comp1.series.is_zero()
    assert out.comp2.series.is_zero()


def test_a_ainv_identity():
    psi = solve_wave(P2, 14)
    w = apply_op(P2, "a^-1", WavePair(psi.comp1, psi.comp2))
    back = apply_op(P2, "a", w)
    for got, src in ((back.comp1, psi.comp1), (back.comp2, psi.comp2)):
        want = src.series.filter(lambda e: e[0] >= -got.order)
        assert got.series == want


def test_negative_chain_matches_a_inverse():
    # Psi_{-1} from the c-recursion equals (i a)^{-1} Psi
    psi = solve_wave(P2, 20)
    basis = build_basis(P2, 2, 10)
    via_inv = apply_op(P2, "a^-1", psi)
    via_inv = WavePair(
        Component(via_inv.comp1.series.scale(GR_I.inverse()), via_inv.comp1.order),
        Component(via_inv.comp2.series.scale(GR_I.inverse()), via_inv.comp2.order))
    got = basis.psi(-1)
    for a, b in ((got.comp1, via_inv.comp1), (got.comp2, via_inv.comp2)):
        o = min(a.order, b.order)
        assert a.series.filter(lambda e: e[0] >= -o) == b.series.filter(lambda e: e[0] >= -o)


def test_psi2_closed_form_df_values():
    # leading coefficients are the signed double factorials (2m-1)!!/(2i)^m
    for m in (-3, -1, 2):
        w = psi2_closed_form(P2, m, 20)
        lead = w.series.terms[(-2 * m,)]
        want = grat(double_factorial(2 * m - 1)) * (GaussianRational(0, 2) ** (-m))
        assert lead == want
