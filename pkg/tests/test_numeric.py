import random
from fractions import Fraction

import mpmath
import pytest

from awfactor.aw_operator import TEST_VECTOR, AWParams, awp_reference, make_L, t_eigenvalue
from awfactor.errors import DivergentProduct, NonConvergent, SeriesDenominatorZero, ZeroDeformation
from awfactor.numeric import (
    PointFn,
    PrecisionCtx,
    admissible_alphas,
    awp_direct,
    chi_value,
    convergence_study,
    eigen_residual,
    forcing_G,
    lowered_function,
    operator_residual,
    phi_n,
    phi_rs,
    pole_free_alpha,
    qpoch,
    qpoch_inf,
    shifted_points,
    u_poles_hit,
    u_solution,
    y_solution,
)

P = TEST_VECTOR
CTX = PrecisionCtx(60)
HALF = Fraction(1, 2)


def close(x, y, exp=40, ctx=CTX):
    return abs(ctx.mpf(x) - ctx.mpf(y)) <= ctx.mp.mpf(10) ** -exp


# --- q-Pochhammer ----------------------------------------------------------


def test_qpoch_examples():
    assert qpoch(Fraction(3), HALF, 0, CTX) == 1
    assert qpoch(HALF, HALF, 1, CTX) == CTX.mpf(HALF)
    assert qpoch(Fraction(2), HALF, 2, CTX) == 0


def test_qpoch_inf_examples():
    assert qpoch_inf(0, HALF, CTX) == 1
    with pytest.raises(DivergentProduct):
        qpoch_inf(HALF, 1, CTX)
    with pytest.raises(DivergentProduct):
        qpoch_inf(HALF, -1, CTX)


def test_qpoch_inf_stable_across_precisions():
    hi = PrecisionCtx(120)
    a, b = qpoch_inf(HALF, HALF, CTX), qpoch_inf(HALF, HALF, hi)
    assert abs(hi.mpf(a) - b) < hi.mp.mpf(10) ** -40


def test_qpoch_inf_matches_mpmath():
    mp = CTX.mp
    assert abs(qpoch_inf(Fraction(1, 3), Fraction(-2, 5), CTX) - mp.qp(mp.mpf(1) / 3, mp.mpf(-2) / 5)) < mp.mpf(10) ** -45


# --- basic hypergeometric series -------------------------------------------


def test_phi_rs_with_unit_numerator_truncates():
    assert phi_rs([1, Fraction(1, 3)], [Fraction(1, 5)], HALF, Fraction(1, 7), CTX) == 1


def test_phi_rs_matches_mpmath_qhyper():
    mp = CTX.mp
    a, b, c, q, z = Fraction(1, 3), Fraction(-1, 4), Fraction(2, 7), Fraction(3, 5), Fraction(1, 2)
    ours = phi_rs([a, b], [c], q, z, CTX)
    ref = mp.qhyper([CTX.mpf(a), CTX.mpf(b)], [CTX.mpf(c)], CTX.mpf(q), CTX.mpf(z))
    assert abs(ours - ref) < mp.mpf(10) ** -45


def test_phi_rs_reports_tail_bound():
    res = phi_rs([Fraction(1, 3)], [Fraction(1, 5)], HALF, Fraction(1, 3), CTX, with_info=True)
    assert not res.terminated
    assert res.tail_bound <= CTX.tol


def test_phi_rs_rejects_divergent_input():
    with pytest.raises(NonConvergent):
        phi_rs([Fraction(1, 3), Fraction(1, 5)], [Fraction(1, 7)], HALF, Fraction(3), CTX)


def test_four_phi_three_against_exact_reference():
    p = P
    z = Fraction(2)
    q, a = p.q, p.a
    series = phi_rs(
        [1 / q, p.abcd, a * z, a / z], [a * p.b, a * p.c, a * p.d], q, q, CTX
    )
    pref = (1 - a * p.b) * (1 - a * p.c) * (1 - a * p.d) / a
    assert close(series * CTX.mpf(pref), awp_reference(p, 1)(chi_value(z)))


def test_awp_direct_degree_zero():
    assert awp_direct(P, 0, Fraction(3, 2), CTX) == 1


@pytest.mark.parametrize("n", range(1, 7))
def test_awp_direct_matches_exact(n):
    ref = awp_reference(P, n)
    for z in (Fraction(3, 2), Fraction(2), Fraction(5, 2)):
        assert close(awp_direct(P, n, z, CTX), ref(chi_value(z)))


# --- nonhomogeneous solutions ----------------------------------------------


def test_forcing_vanishes_at_t_one_alpha_one():
    assert forcing_G(P, 1, 1, Fraction(2), CTX) == 0


def test_forcing_vanishes_at_inverse_a():
    assert forcing_G(P, Fraction(3, 2), P.q / (P.a * P.b), 1 / P.a, CTX) == 0


def test_u_is_one_at_t_one_alpha_one():
    for z in (Fraction(3, 2), Fraction(2), Fraction(3)):
        assert u_solution(P, 1, 1, z, CTX) == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_u_at_q_power_terminates_to_polynomial(n):
    t = P.q ** (-n)
    q, a = P.q, P.a
    pref = 1
    for x in (a * P.b, a * P.c, a * P.d):
        pref *= qpoch(x, q, n, CTX)
    pref /= CTX.mpf(a) ** n
    for z in (Fraction(3, 2), Fraction(5, 2)):
        val, info = u_solution(P, t, 1, z, CTX, with_info=True)
        assert info.terminated and info.terms == n + 1
        assert close(val * pref, awp_reference(P, n)(chi_value(z)))


@pytest.mark.parametrize("alpha_index", range(4))
def test_u_residual_each_alpha(alpha_index):
    alpha = admissible_alphas(P)[alpha_index]
    t = Fraction(3, 2)
    for z in (Fraction(3, 2), Fraction(2)):
        f = PointFn(lambda w: u_solution(P, t, alpha, w, CTX), CTX)
        res = operator_residual(make_L(P), f, z, t_eigenvalue(P, 0, t), forcing_G(P, t, alpha, z, CTX))
        assert abs(res) <= CTX.mp.mpf(10) ** -40 * max(abs(f(z)), 1)


def test_u_pole_detection():
    alpha = P.q / (P.a * P.b)
    assert u_poles_hit(P, alpha, [Fraction(5, 2)]) == [Fraction(5, 2)]
    with pytest.raises(SeriesDenominatorZero):
        u_solution(P, Fraction(3, 2), alpha, Fraction(5, 2), CTX)
    chosen = pole_free_alpha(P, shifted_points([Fraction(5, 2)], P.q, -1, 4))
    assert chosen != alpha


def test_y_equals_one_at_t_one():
    for z in (Fraction(3, 2), Fraction(2), Fraction(3)):
        assert y_solution(P, 1, z, ctx=CTX) == 1


def test_phi_zero_is_y():
    t = Fraction(999, 1000)
    z = Fraction(3, 2)
    assert phi_n(P, t, 0, z, CTX) == y_solution(P, t, z, ctx=CTX)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_deformed_eigenfunctions(n):
    t = Fraction(99, 100)
    for z in (Fraction(3, 2), Fraction(2)):
        res, mag = eigen_residual(P, t, n, z, CTX)
        assert res <= CTX.mp.mpf(10) ** -40 * max(mag, 1)


@pytest.mark.parametrize("m", [1, 2])
def test_lowered_deformed_functions_are_eigenfunctions(m):
    # a non-polynomial start: lowering y(., t) stays an eigenfunction at each negative level
    t = Fraction(99, 100)
    f = lowered_function(P, t, m, CTX)
    for z in (Fraction(3, 2), Fraction(2)):
        res = operator_residual(make_L(P), f, z, t_eigenvalue(P, -m, t))
        assert abs(res) <= CTX.mp.mpf(10) ** -40 * max(abs(f(z)), 1)
        assert abs(f(z)) > CTX.mp.mpf(10) ** -20


def test_deformation_guards():
    with pytest.raises(ZeroDeformation):
        y_solution(P, 0, Fraction(2), ctx=CTX)
    with pytest.raises(ValueError):
        convergence_study(P, 1, [2], [Fraction(3, 2)], ctx=PrecisionCtx(20))
    with pytest.raises(DivergentProduct):
        u_solution(AWParams.from_strings("3", "1/3", "1/5", "1/7", "1/9"), 2, 1, Fraction(2), CTX)


def test_convergence_short_circuit_at_t_one():
    rows = convergence_study(P, 2, [], [Fraction(3, 2)], ts=[1], ctx=CTX)
    assert rows[0].phi_over_c == rows[0].p_exact == CTX.mpf(awp_reference(P, 2)(chi_value(Fraction(3, 2))))


def test_study_is_reproducible_across_precision():
    zs = [Fraction(3, 2)]
    lo = convergence_study(P, 1, [3], zs, ctx=CTX)[0]
    hi_ctx = PrecisionCtx(90)
    hi = convergence_study(P, 1, [3], zs, ctx=hi_ctx)[0]
    assert abs(hi_ctx.mpf(lo.phi_over_c) - hi.phi_over_c) < hi_ctx.mp.mpf(10) ** -30
    assert mpmath.isfinite(hi.abs_err)


def test_qpoch_splits_at_any_index():
    rng = random.Random(41)
    for _ in range(50):
        s = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        q = Fraction(rng.randint(-8, 8), 9) or HALF
        j, k = rng.randint(0, 6), rng.randint(0, 6)
        lhs = qpoch(s, q, j + k, CTX)
        rhs = qpoch(s, q, j, CTX) * qpoch(s * q**j, q, k, CTX)
        assert abs(lhs - rhs) <= CTX.mp.mpf(10) ** -50 * max(abs(lhs), 1)
