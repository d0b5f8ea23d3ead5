from fractions import Fraction

import pytest

from cmperiods.arith import FPoly, Fq
from cmperiods.errors import NoDecay, PoleArgument
from cmperiods.infinity import InfElem
from cmperiods.special import carlitz_period, geometric_gamma, omega_series
from cmperiods.tate import Decay, TateMatrix, TateSeries, check_difference_eq, tate_twist

F3 = Fq.get(3, 1, 1)


def tmat_theta_poly(field, coeffs, T, prec):
    """TateMatrix entry (t - theta)-style polynomials from InfElem lists."""
    return TateSeries.poly([InfElem.from_poly(field, c, prec) if isinstance(c, list) else c for c in coeffs], T)


def test_twist_simple():
    # theta*t -> theta^3*t at q=3
    th = InfElem.theta(F3, 40)
    z = InfElem.zero(F3, 40)
    f = TateSeries.poly([z, th], 4)
    tw = tate_twist(f, 1)
    assert tw.coeffs[1].coeffs == {-3: 1}
    # constants are fixed
    c = TateSeries.constant(InfElem.const(F3, 2, 40), 4)
    assert tate_twist(c, 5).coeffs[0].coeffs == {0: 2}


def test_twist_round_trip_and_multiplicative():
    import random

    rng = random.Random(9)
    prec = 30
    mk = lambda: TateSeries(
        [
            InfElem(F3, 1, {k: rng.randrange(3) for k in range(-2, 5)}, prec * 3)
            for _ in range(5)
        ]
    )
    f, g = mk(), mk()
    assert all(
        (a - b).is_zero()
        for a, b in zip(tate_twist(tate_twist(f, 1), -1).coeffs, f.coeffs)
    )
    lhs = tate_twist(f * g, 1)
    rhs = tate_twist(f, 1) * tate_twist(g, 1)
    assert all((a - b).is_zero() for a, b in zip(lhs.coeffs, rhs.coeffs))


def test_eval_theta_geometric():
    # f = sum theta^(-2i) t^i at t=theta: sum theta^(-i) = 1/(1-theta^(-1))
    T = 30
    prec = 70
    coeffs = [InfElem(F3, 1, {2 * i: 1}, prec) for i in range(T)]
    f = TateSeries(coeffs, Decay("linear", 0, 2))
    val = f.eval_theta()
    one = InfElem.const(F3, 1, 25)
    x = InfElem(F3, 1, {1: 1}, 25)
    expect = one / (one - x)
    assert ((val - expect)).residual_val() >= 25


def test_eval_theta_requires_decay():
    f = TateSeries([InfElem.const(F3, 1, 20)] * 4)
    with pytest.raises(NoDecay):
        f.eval_theta()


def test_eval_ring_morphism():
    T = 24
    prec = 60
    a = TateSeries([InfElem(F3, 1, {2 * i: 1}, prec) for i in range(T)], Decay("linear", 0, 2))
    b = TateSeries(
        [InfElem(F3, 1, {3 * i: 2}, prec) for i in range(T)], Decay("linear", 0, 3)
    )
    lhs = (a * b).eval_theta()
    rhs = a.eval_theta() * b.eval_theta()
    assert (lhs - rhs).residual_val() >= 18


def test_omega_functional_equation_q2_q3():
    for qq in (2, 3):
        om = omega_series(qq, 32, 120)
        assert om.check_decay()
        one = InfElem.const(om.field, 1, 150 * qq, om.e)
        tpoly = TateSeries.poly(
            [InfElem.theta(om.field, 150 * qq, om.e).scale(om.field.neg(1)), one], om.T
        )
        phi = TateMatrix([[tpoly]])
        psi = TateMatrix([[om]])
        rep = check_difference_eq(phi, psi, threshold=110)
        assert rep["pass"], rep["min_residual"]


def test_omega_constant_term_and_planted_defect():
    om = omega_series(3, 16, 80)
    # constant term = (-theta)^(-q/(q-1)) = canonical root^(-q)
    c0 = om.coeffs[0]
    assert c0.val() == Fraction(3, 2)
    # planted defect: Omega + 1 must fail loudly
    one_series = TateSeries.constant(InfElem.const(om.field, 1, 80, om.e), om.T)
    bad = om + one_series
    tpoly = TateSeries.poly(
        [InfElem.theta(om.field, 240, om.e).scale(om.field.neg(1)),
         InfElem.const(om.field, 1, 240, om.e)], om.T
    )
    rep = check_difference_eq(TateMatrix([[tpoly]]), TateMatrix([[bad]]), threshold=70)
    assert not rep["pass"]
    assert rep["min_residual"] <= 1


def test_omega_eval_valuation():
    om = omega_series(3, 24, 100)
    v = om.eval_theta().val()
    assert v == Fraction(3, 2)  # q/(q-1) at q=3


def test_carlitz_period_dual_formula():
    for qq in (2, 3, 4):
        pi, rep = carlitz_period(qq, 120, with_report=True)
        assert rep["residual"] >= 110
        assert pi.val() == Fraction(-qq, qq - 1)


def test_gamma_small_argument():
    # x = theta^-8 at q=3: val(x*Gamma(x) - 1) >= 8
    x = InfElem(F3, 1, {8: 1}, 40)
    val, rep = geometric_gamma(x, 30)
    prod = x * val
    one = InfElem.const(F3, 1, 30)
    assert (prod - one).residual_val() >= 8


def test_gamma_pole_char2():
    F2 = Fq.get(2, 1, 1)
    one = FPoly.const(F2, 1)
    with pytest.raises(PoleArgument):
        geometric_gamma((one, one), 20)


def test_gamma_pole_rejects_negative_monic():
    # x = -theta is in -A_+ for q=3
    minus_theta = FPoly(F3, (0, F3.neg(1)))
    with pytest.raises(PoleArgument):
        geometric_gamma((minus_theta, FPoly.const(F3, 1)), 20)


def test_gamma_blocked_vs_direct_enumeration():
    # oracle: direct product over all monic a with deg <= 2 compared with
    # the blocked recursion cut at the same degree (tail factors agree far
    # beyond the comparison window)
    N = 26
    x = InfElem(F3, 1, {7: 1}, N + 30)  # theta^-7
    one = InfElem.const(F3, 1, N + 30)
    direct = one
    for d in range(0, 3):
        for low in range(3**d):
            digits = []
            v = low
            for _ in range(d):
                digits.append(v % 3)
                v //= 3
            coeffs = digits + [1]
            a = InfElem.from_poly(F3, coeffs, N + 30)
            direct = direct * (one + x * a.inverse())
    direct = (x * direct).inverse()
    val, rep = geometric_gamma(x, N)
    # blocks cover degrees 0..blocks; degree >= 3 factors have val >= 7+3*3
    assert (val - direct).residual_val() >= 14
