import random

import pytest
from gmpy2 import mpq

from dntau.exact import GR_I, GR_ONE, GaussianRational, grat
from dntau.operators import Params
from dntau.pfaffian import SkewMatrix, pfaffian
from dntau.series import Ring, Series
from dntau.tau import (MiwaConfig, TauSeries, ep_add, ep_const, ep_inv,
                       ep_mul, log_tau, miwa_invert, miwa_ring, miwa_tau,
                       pfaffian_eps, rescale_hbar, string_operator_applied,
                       tau_eps_at_point, tau_series, twopoint_suite,
                       verify_hirota, verify_rationality, verify_string,
                       verify_symmetry)

P2 = Params(2)
P3 = Params(3)


@pytest.fixture(scope="module")
def tps2():
    return twopoint_suite(P2, 8)


@pytest.fixture(scope="module")
def tau2_w6(tps2):
    return tau_series(P2, MiwaConfig(6, 6, 6), tps2)


# -- eps-polynomial engine ---------------------------------------------------

def test_ep_inverse():
    cap = 5
    a = [grat(2), grat(1), grat(0, 1), grat(mpq(1, 3)), grat(0), grat(1)]
    inv = ep_inv(a)
    prod = ep_mul(a, inv)
    assert prod[0] == GR_ONE and all(c.is_zero() for c in prod[1:])


def random_eps_skew(n, cap, seed):
    rng = random.Random(seed)
    def poly():
        return [GaussianRational(mpq(rng.randint(-4, 4), rng.randint(1, 3)),
                                 rng.randint(-2, 2)) for _ in range(cap + 1)]
    upper = {(i, j): poly() for i in range(n) for j in range(i + 1, n)}
    # make sure constant matrix is generically invertible
    return upper


@pytest.mark.parametrize("n,seed", [(4, 0), (6, 1), (6, 2), (8, 3)])
def test_pfaffian_eps_matches_subset_expansion(n, seed):
    cap = 3
    upper = random_eps_skew(n, cap, seed)
    mat = [[ep_const(grat(0), cap) for _ in range(n)] for _ in range(n)]
    for (i, j), pol in upper.items():
        mat[i][j] = pol
        mat[j][i] = [-c for c in pol]
    got = pfaffian_eps(mat, cap)

    # oracle: subset-memo pfaffian over the series ring Q(i)[eps]/(eps^4)
    R = Ring([("e", 1, 1)], weight_cap=cap)
    up = {k: Series(R, {(d,): c for d, c in enumerate(pol)})
          for k, pol in upper.items()}
    want = pfaffian(SkewMatrix(n, up, zero=Series.zero(R)), method="memo")
    for d in range(cap + 1):
        assert got[d] == want.terms.get((d,), GaussianRational(0))


# -- evaluation engine vs symbolic route ------------------------------------

def test_tau_eps_constant_slice(tps2):
    cfg = MiwaConfig(2, 2, 4)
    out = tau_eps_at_point(tps2, cfg, [mpq(1, 2), mpq(1, 3)], [mpq(2, 5), mpq(3)])
    assert out[0] == GR_ONE


def test_symbolic_vs_eval_2plus2(tps2):
    cfg = MiwaConfig(2, 2, 2)
    miwa = miwa_tau(tps2, cfg)
    # evaluate the symbolic Miwa series at a point and compare slices
    xs, ys = [mpq(1, 2), mpq(1, 5)], [mpq(2, 3), mpq(1, 7)]
    eps = tau_eps_at_point(tps2, cfg, xs, ys)
    vals = xs + ys
    got = [GaussianRational(0)] * (cfg.weight + 1)
    for e, c in miwa.terms.items():
        w = sum(e)
        v = c
        for x, k in zip(vals, e):
            v = v * grat(x ** k)
        got[w] = got[w] + v
    assert got == eps[: cfg.weight + 1]


def test_tau_series_matches_symbolic_inversion(tps2):
    cfg = MiwaConfig(3, 3, 3)
    sym = miwa_invert(miwa_tau(tps2, cfg), cfg, P2)
    ev = tau_series(P2, cfg, tps2)
    assert sym.series == ev.series


def test_tau_series_4plus4_weight4(tps2):
    cfg = MiwaConfig(4, 4, 4)
    sym = miwa_invert(miwa_tau(tps2, cfg), cfg, P2)
    ev = tau_series(P2, cfg, tps2)
    assert sym.series == ev.series


def test_miwa_roundtrip(tps2):
    # substituting p_m = sum z^-m back into the t-form reproduces the Miwa series
    cfg = MiwaConfig(3, 3, 3)
    miwa = miwa_tau(tps2, cfg)
    tau = miwa_invert(miwa, cfg, P2)
    ring = miwa.ring
    back = Series.zero(ring)
    for e, c in tau.series.terms.items():
        term = Series.const(ring, c)
        for name, k in zip(tau.series.ring.names, e):
            if not k:
                continue
            a, m = name[1:].split("_")
            a, m = int(a), int(m)
            block = [f"z{a}_{i+1}" for i in range(cfg.n1 if a == 1 else cfg.n2)]
            pm = Series.zero(ring)
            for v in block:
                pm = pm + Series.monomial(ring, {v: m})
            factor = pm.scale(grat(mpq(-2, m)))
            for _ in range(k):
                term = term * factor
        back = back + term
    assert back == miwa


def test_tau_normalization(tau2_w6):
    assert tau2_w6.series.constant_term() == GR_ONE


def test_low_weight_vanishing(tau2_w6):
    # string equation forces all weight-1 and weight-2 coefficients to zero
    for mono in ({(1, 1): 1}, {(2, 1): 1}, {(1, 1): 2}, {(2, 1): 2},
                 {(1, 1): 1, (2, 1): 1}):
        assert tau2_w6.coeff(mono).is_zero(), mono


def test_string_anchor_t11_t21sq(tau2_w6):
    # derived from L_{-1} tau = 0 at weight 2: coefficient of t11 t21^2 = -i/8
    assert tau2_w6.coeff({(1, 1): 1, (2, 1): 2}) == grat(0, mpq(-1, 8))


def test_string_anchor_t11_cubed(tau2_w6):
    # h=2 quadratic term t11^2/8 forces coefficient of t11^3 = -i/24
    assert tau2_w6.coeff({(1, 1): 3}) == grat(0, mpq(-1, 24))


def test_string_anchor_other_h():
    # for h >= 4 the same weight-3 coefficients: t11^3 -> 0, t11 t21^2 -> -i/8
    tau = tau_series(P3, MiwaConfig(4, 4, 3))
    assert tau.coeff({(1, 1): 3}).is_zero()
    assert tau.coeff({(1, 1): 1, (2, 1): 2}) == grat(0, mpq(-1, 8))


def test_one_block_reduction_matches(tau2_w6, tps2):
    # N2 = 0: tau(t1, 0) coefficients agree with the two-block computation
    cfg = MiwaConfig(6, 0, 6)
    tau1 = tau_series(P2, cfg, tps2)
    ring = tau1.series.ring
    for e, c in tau1.series.terms.items():
        assert tau2_w6.series.terms.get(e) == c
    for e, c in tau2_w6.series.terms.items():
        w1, w2 = tau2_w6.block_weights(e)
        if w2 == 0:
            assert tau1.series.terms.get(e) == c


def test_one_block_n1_zero(tps2):
    cfg = MiwaConfig(0, 4, 4)
    tau = tau_series(P2, cfg, tps2)
    assert verify_symmetry(tau)["pass"]
    assert verify_rationality(tau)["pass"]


def test_unfaithful_config_refused(tps2):
    with pytest.raises(ValueError):
        tau_series(P2, MiwaConfig(2, 2, 4), tps2)


def test_symmetry_and_rationality(tau2_w6):
    assert verify_symmetry(tau2_w6)["pass"]
    assert verify_rationality(tau2_w6)["pass"]


def test_seed_independence(tps2):
    cfg = MiwaConfig(3, 3, 3)
    a = tau_series(P2, cfg, tps2, seed=5)
    b = tau_series(P2, cfg, tps2, seed=77)
    assert a.series == b.series


# -- Hirota ------------------------------------------------------------------

def test_hirota_m0_small(tau2_w6):
    rep = verify_hirota(tau2_w6, 0)
    assert rep["pass"], rep
    assert rep["window"] == 4


def test_hirota_m1_small(tau2_w6):
    rep = verify_hirota(tau2_w6, 1)
    assert rep["pass"], rep


def test_hirota_detects_corruption(tau2_w6):
    # a quadratic perturbation is tangent to the unreduced hierarchy (m=0
    # stays blind to it at this window) but violates the m=1 reduction
    bad_series = tau2_w6.series + Series.monomial(
        tau2_w6.series.ring, {"t1_1": 2}, grat(mpq(1, 3)))
    bad = TauSeries(P2, tau2_w6.weight, bad_series)
    assert not verify_hirota(bad, 1)["pass"]
    # the t_{1,3}-flow direction is tangent to everything visible at this
    # window: its string-residual image t_{1,5} has weight 5 > W - h
    flow_series = tau2_w6.series + Series.monomial(
        tau2_w6.series.ring, {"t1_3": 1}, grat(mpq(1, 5)))
    flow = TauSeries(P2, tau2_w6.weight, flow_series)
    assert verify_hirota(flow, 1)["pass"]


# -- string -------------------------------------------------------------------

def test_string_small(tau2_w6):
    rep = verify_string(tau2_w6)
    assert rep["pass"], rep
    assert GaussianRational.from_json(rep["sigma1"]) == grat(mpq(1, 8))
    assert GaussianRational.from_json(rep["sigma2"]) == grat(mpq(1, 8))


def test_string_operator_zero(tau2_w6):
    applied = string_operator_applied(tau2_w6)
    W, h = tau2_w6.weight, P2.h
    ring = tau2_w6.series.ring
    resid = applied.filter(lambda e: ring.weight_scaled(e) <= (W - h))
    assert resid.is_zero()


def test_string_detects_corruption(tau2_w6):
    bad_series = tau2_w6.series + Series.monomial(
        tau2_w6.series.ring, {"t1_1": 1, "t1_3": 1}, grat(mpq(1, 5)))
    bad = TauSeries(P2, tau2_w6.weight, bad_series)
    assert not verify_string(bad)["pass"]


def test_string_pins_t13_direction_at_w8(tps2):
    # at W = 8 the window reaches the weight-5 residual monomial t_{1,5},
    # so the string equation detects the t_{1,3}-flow perturbation
    tau = tau_series(P2, MiwaConfig(8, 8, 8), twopoint_suite(P2, 8))
    flow_series = tau.series + Series.monomial(
        tau.series.ring, {"t1_3": 1}, grat(mpq(1, 5)))
    flow = TauSeries(P2, tau.weight, flow_series)
    assert verify_string(tau)["pass"]
    assert not verify_string(flow)["pass"]


# -- hbar rescaling ------------------------------------------------------------

def test_rescale_identity(tau2_w6):
    import mpmath
    # hbar = rho_1^2 = -e^{2 pi i/h}: identity rescaling
    with mpmath.workprec(256):
        h = P2.h
        rho1sq = -mpmath.exp(2j * mpmath.pi / h)
    rep = rescale_hbar(tau2_w6, rho1sq, prec=256)
    for row in rep["coefficients"]:
        mono = {tuple(k.split("_")): v for k, v in row["monomial"].items()}
        name_mono = {(int(a[1:]), int(m)): v for (a, m), v in mono.items()}
        want = tau2_w6.coeff(name_mono)
        got_re = mpmath.mpf(row["value"]["re"])
        got_im = mpmath.mpf(row["value"]["im"])
        assert abs(got_re - mpmath.mpf(want.re.numerator) / mpmath.mpf(want.re.denominator)) < 1e-40
        assert abs(got_im - mpmath.mpf(want.im.numerator) / mpmath.mpf(want.im.denominator)) < 1e-40


def test_rescale_exponents_documented():
    # h=4: t_{1,1} exponent -4/5, t_{2,1} exponent -3/5
    h = 4
    assert mpq(1 * h, h * (h + 1)) - 1 == mpq(-4, 5)
    assert mpq(1 * h, 2 * (h + 1)) - 1 == mpq(-3, 5)
