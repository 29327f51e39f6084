"""End-to-end acceptance checks, one group per criterion.

Each test carries ``@pytest.mark.criterion(N)``; the terminal summary prints a
PASS/FAIL line per criterion.
"""

import random
import time
from fractions import Fraction

import pytest

from awfactor.algebra import CHI, ChiPoly, Laurent, RatFun, chi_to_laurent, laurent_to_chi
from awfactor.aw_operator import (
    TEST_VECTOR,
    apply,
    awp_reference,
    eigenvalue,
    make_ABK,
    make_H,
    make_L,
    random_params,
    t_eigenvalue,
)
from awfactor.chain import (
    GenericChain,
    downward_sequence,
    lowering_chain,
    make_FG,
    rodrigues,
    rodrigues_laurent,
    t_chain_data,
    verify_boundary,
    verify_downward_relations,
    verify_factorization,
    verify_generic_chain,
    verify_intertwining,
    verify_upward_recurrence,
)
from awfactor.errors import InitialConditionViolated
from awfactor.numeric import (
    PrecisionCtx,
    admissible_alphas,
    convergence_study,
    operator_residual,
    u_residual,
    y_function,
)

P = TEST_VECTOR
CTX = PrecisionCtx(60)


def _fail_lines(report):
    return [f"{r.equation_id} n={r.n} t={r.t}" for r in report.failures()]


@pytest.mark.criterion(1, title="factorization residuals vanish, n=-5..10, test vector + 3 draws, <10 s")
def test_factorization_system():
    rng = random.Random(20240601)
    params = [P] + [random_params(rng) for _ in range(3)]
    start = time.perf_counter()
    bad = []
    for p in params:
        for n in range(-5, 11):
            rep = verify_factorization(p, n)
            assert len(rep) == 3
            bad += _fail_lines(rep)
    elapsed = time.perf_counter() - start
    assert not bad, bad
    assert elapsed < 10, elapsed


@pytest.mark.criterion(2, title="boundary identities at n=-1")
def test_boundary_identities():
    rep = verify_boundary(P)
    assert not rep.failures(), _fail_lines(rep)
    A, B, _ = make_ABK(P)
    F, G = make_FG(P, -1)
    assert (F + B.q_shift(P.q)).is_zero()
    assert (G + A).is_zero()
    assert t_chain_data(P, -1).mu == 0
    assert (A * RatFun.coerce(1) + G).is_zero()


@pytest.mark.criterion(3, title="Rodrigues chain proportional to the 4phi3 reference, n=0..8, <30 s")
def test_rodrigues_matches_reference():
    start = time.perf_counter()
    for n in range(9):
        r, ref = rodrigues(P, n), awp_reference(P, n)
        c = r.proportionality(ref)
        assert c is not None and c != 0, n
        assert r.degree == ref.degree == n
        assert r == ref * c
    assert time.perf_counter() - start < 30


@pytest.mark.criterion(4, title="eigen-equations for L and H(.;n), n=0..8")
def test_eigen_equations():
    L = make_L(P)
    seq = rodrigues_laurent(P, 8)
    for n in range(9):
        Pn = RatFun(chi_to_laurent(awp_reference(P, n)))
        assert (apply(L, Pn) - Pn * eigenvalue(P, n)).is_zero(), n
        assert apply(make_H(P, n), seq[n]).is_zero(), n


@pytest.mark.criterion(5, title="three-term recurrence n=1..7 and downward relations from P_3")
def test_recurrences():
    seq = rodrigues_laurent(P, 8)
    for n in range(1, 8):
        rep = verify_upward_recurrence(P, seq, n)
        assert len(rep) and not rep.failures(), _fail_lines(rep)
    start = RatFun(chi_to_laurent(awp_reference(P, 3)))
    down = downward_sequence(P, start, 3, 6)
    rep = verify_downward_relations(P, down)
    assert len(rep) and not rep.failures(), _fail_lines(rep)
    # the lowering chain from P_3 reaches the constant level and then vanishes
    assert down[0].is_laurent() and down[0].as_laurent().is_constant() and not down[0].is_zero()
    assert all(down[m].is_zero() for m in down if m < 0)


@pytest.mark.criterion(6, title="intertwining relations, symbolic and on probes, n=0..4")
def test_intertwining():
    for n in range(5):
        rep = verify_intertwining(P, n)
        assert rep.by_id("eq19.1") and rep.by_id("eq19.2")
        assert not rep.failures(), _fail_lines(rep)


@pytest.mark.criterion(7, title="four lowerings of the constant 1 vanish")
def test_null_lowering_chain():
    chain = lowering_chain(P, 4)
    assert len(chain) == 4
    assert all(f.is_zero() for f in chain)


@pytest.mark.criterion(8, title="generic converse accepts the chain, rejects 5 seeded perturbations")
def test_generic_converse():
    chain = GenericChain.from_params(P)
    rep = verify_generic_chain(chain, (-1, 5))
    assert not rep.failures(), _fail_lines(rep)

    rng = random.Random(7)
    rejected = 0
    for _ in range(5):
        which = rng.choice(["f", "g", "mu"])
        n = rng.randint(0, 4)
        delta = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
        power = rng.randint(-2, 2)
        bad = chain.perturbed(which, n, delta, power)
        try:
            rep = verify_generic_chain(bad, (-1, 5))
        except InitialConditionViolated:
            rejected += 1
            continue
        assert rep.failures(), (which, n, delta, power)
        rejected += 1
    assert rejected == 5


@pytest.mark.criterion(9, title="t-deformed factorization, t in {1/2, 3/2, 2}, n=0..3")
def test_t_deformed_factorization():
    for t in (Fraction(1, 2), Fraction(3, 2), Fraction(2)):
        for n in range(4):
            rep = verify_factorization(P, n, t)
            assert len(rep) == 3 and not rep.failures(), _fail_lines(rep)


@pytest.mark.criterion(10, title="nonhomogeneous u and homogeneous y residuals at 60 digits")
def test_nonhomogeneous_solutions():
    mp = CTX.mp
    bound = mp.mpf(10) ** -40
    t = Fraction(3, 2)
    for alpha in admissible_alphas(P):
        for z in (Fraction(3, 2), Fraction(2)):
            res, mag = u_residual(P, t, alpha, z, CTX)
            assert res <= bound * max(mag, 1), (alpha, z, res)
    t = 1 - Fraction(1, 1000)
    y = y_function(P, t, CTX)
    for z in (Fraction(3, 2), Fraction(2)):
        res = abs(operator_residual(make_L(P), y, z, t_eigenvalue(P, 0, t)))
        assert res <= bound * max(abs(y(z)), 1), (z, res)


@pytest.mark.criterion(11, title="Phi_n/c -> P_n monotonically along t=1-10^-k, <1e-3 at k=5, <2 min")
def test_convergence():
    start = time.perf_counter()
    zs = [Fraction(3, 2), Fraction(5, 2)]
    alpha = P.q / (P.a * P.d)
    for n in range(4):
        rows = convergence_study(P, n, range(2, 6), zs, Fraction(2), CTX, eig_exponent=30, alpha=alpha)
        for row in rows:
            assert row.eig_ok, (n, row.t, row.z, row.eig_residual)
        for z in zs:
            errs = [r.abs_err for r in rows if r.z == z]
            assert len(errs) == 4
            assert all(b < a for a, b in zip(errs, errs[1:])), (n, z, errs)
            assert errs[-1] < CTX.mpf(Fraction(1, 1000)), (n, z, errs[-1])
    assert time.perf_counter() - start < 120


# ---------------------------------------------------------------------------
# criterion 12: algebra properties on 1000 seeded cases each

CASES = 1000


def _rand_laurent(rng, span=3, max_terms=4):
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        terms[rng.randint(-span, span)] = Fraction(rng.randint(-9, 9), rng.randint(1, 6))
    return Laurent(terms)


def _rand_ratfun(rng, nonzero=False):
    while True:
        num = _rand_laurent(rng)
        den = _rand_laurent(rng, span=2, max_terms=3)
        if den.is_zero() or (nonzero and num.is_zero()):
            continue
        return RatFun(num, den)


def _rand_q(rng):
    while True:
        q = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
        if q not in (0, 1, -1):
            return q


@pytest.mark.criterion(12, title="algebra property suite, 1000 seeded cases per property")
def test_field_axioms():
    rng = random.Random(12001)
    one, zero = RatFun.coerce(1), RatFun.coerce(0)
    for _ in range(CASES):
        f, g, h = _rand_ratfun(rng), _rand_ratfun(rng), _rand_ratfun(rng)
        assert f + g == g + f
        assert f * g == g * f
        assert (f + g) + h == f + (g + h)
        assert (f * g) * h == f * (g * h)
        assert f * (g + h) == f * g + f * h
        assert f + zero == f and f * one == f
        assert (f - f).is_zero()
        if not f.is_zero():
            assert f / f == one
            assert (g / f) * f == g


@pytest.mark.criterion(12, title="algebra property suite, 1000 seeded cases per property")
def test_q_shift_homomorphism():
    rng = random.Random(12002)
    for _ in range(CASES):
        f, g = _rand_ratfun(rng), _rand_ratfun(rng, nonzero=True)
        q, k = _rand_q(rng), rng.randint(-2, 2)
        assert (f + g).q_shift(q, k) == f.q_shift(q, k) + g.q_shift(q, k)
        assert (f * g).q_shift(q, k) == f.q_shift(q, k) * g.q_shift(q, k)
        assert (f / g).q_shift(q, k) == f.q_shift(q, k) / g.q_shift(q, k)
        assert f.q_shift(q, k).q_shift(q, -k) == f
        assert f.q_shift(q, 0).structurally_equal(f)


@pytest.mark.criterion(12, title="algebra property suite, 1000 seeded cases per property")
def test_chi_round_trips():
    rng = random.Random(12003)
    for _ in range(CASES):
        p = ChiPoly([Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(rng.randint(0, 6))])
        lp = chi_to_laurent(p)
        assert lp.is_symmetric()
        assert laurent_to_chi(lp) == p
        f = _rand_laurent(rng)
        sym = f + f.reflect()
        assert chi_to_laurent(laurent_to_chi(sym)) == sym
        x = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        assert p((x + 1 / x) / 2) == lp.evaluate(x)
    assert laurent_to_chi(CHI) == ChiPoly([0, 1])


@pytest.mark.criterion(12, title="algebra property suite, 1000 seeded cases per property")
def test_canonical_form_idempotent():
    rng = random.Random(12004)
    for _ in range(CASES):
        f = _rand_ratfun(rng)
        g = RatFun(f.num, f.den)
        assert g.structurally_equal(f)
        assert f.normalized().structurally_equal(f)
        common = _rand_laurent(rng, span=2, max_terms=3)
        if not common.is_zero():
            assert RatFun(f.num * common, f.den * common).structurally_equal(f)
