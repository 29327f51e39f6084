"""High-precision numerics: q-Pochhammer symbols, basic hypergeometric series,
the nonhomogeneous solutions of the deformed Askey-Wilson equation and the
deformed eigenfunctions ``Phi_n(z, t)``.

Every public function takes an explicit :class:`PrecisionCtx`, which owns a
private ``mpmath.MPContext``; nothing here touches the global ``mpmath.mp``.
Parameters, deformation values and sample points are exact rationals where
possible so termination and pole conditions are decided exactly.
"""

from __future__ import annotations

import math
import threading
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath

from .algebra import RatFun
from .aw_operator import AWParams, QDiffOp, awp_reference, make_L, t_eigenvalue
from .chain import lowering, raising
from .errors import (
    CoefficientProductZero,
    DenominatorPochhammerZero,
    DivergentProduct,
    InvalidParams,
    NonConvergent,
    SeriesDenominatorZero,
    ZeroDeformation,
)

MIN_DEFORM_DIGITS = 30


@dataclass(frozen=True)
class PrecisionCtx:
    """Working precision and truncation policy.

    ``truncation_tol`` defaults to ``10**-(digits - 10)``.
    """

    digits: int = 60
    truncation_tol: Fraction | None = None
    max_terms: int = 20000
    mp: mpmath.ctx_mp.MPContext = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.digits < 1:
            raise ValueError("digits must be positive")
        ctx = mpmath.MPContext()
        ctx.dps = self.digits
        object.__setattr__(self, "mp", ctx)
        if self.truncation_tol is None:
            object.__setattr__(self, "truncation_tol", Fraction(1, 10 ** (self.digits - 10)) if self.digits > 10 else Fraction(1, 10))

    @property
    def tol(self):
        return self.mpf(self.truncation_tol)

    def mpf(self, x):
        if isinstance(x, Fraction):
            return self.mp.mpf(x.numerator) / x.denominator
        return self.mp.mpf(x)


DEFAULT_CTX = PrecisionCtx()


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def _exact_hit(x, q, limit: int) -> int | None:
    """Smallest ``0 <= k < limit`` with ``x q^k == 1`` for exact ``x`` and ``q``, else None."""
    if not (_is_exact(x) and _is_exact(q)) or x == 0:
        return None
    x, q = Fraction(x), Fraction(q)
    if abs(q) == 1:
        return None
    # |x q^k| = 1 pins k down to one or two candidates
    k0 = math.log(abs(x)) / -math.log(abs(q)) if abs(x) != 1 else 0.0
    for k in {math.floor(k0), math.ceil(k0)}:
        if 0 <= k < limit and x * q**k == 1:
            return k
    return None


# ---------------------------------------------------------------------------
# q-Pochhammer symbols


def qpoch(sigma, q, k: int, ctx: PrecisionCtx = DEFAULT_CTX):
    """Finite product ``prod_{i<k} (1 - sigma q^i)``; ``k = 0`` gives 1."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    mp = ctx.mp
    s, qq = ctx.mpf(sigma), ctx.mpf(q)
    out = mp.mpf(1)
    x = s
    for _ in range(k):
        out *= 1 - x
        x *= qq
    return out


def qpoch_inf(sigma, q, ctx: PrecisionCtx = DEFAULT_CTX):
    """Infinite product ``(sigma; q)_inf`` for ``|q| < 1``.

    Factors are multiplied in until ``|sigma q^i| / (1 - |q|)`` drops below the
    truncation tolerance, which bounds the relative effect of the tail.
    """
    return _qpoch_inf_cached(ctx.mpf(sigma), ctx.mpf(q), ctx)


@lru_cache(maxsize=8192)
def _qpoch_inf_cached(s, qq, ctx: PrecisionCtx):
    mp = ctx.mp
    if abs(qq) >= 1:
        raise DivergentProduct(f"(sigma; q)_inf needs |q| < 1, got q = {qq}")
    out = mp.mpf(1)
    if s == 0:
        return out
    tol = ctx.tol
    scale = 1 / (1 - abs(qq))
    x = s
    for _ in range(ctx.max_terms):
        out *= 1 - x
        x *= qq
        if abs(x) * scale < tol:
            return out
    raise NonConvergent("infinite product did not reach tolerance")


def qpoch_inf_multi(sigmas: Iterable, q, ctx: PrecisionCtx = DEFAULT_CTX):
    out = ctx.mp.mpf(1)
    for s in sigmas:
        out *= qpoch_inf(s, q, ctx)
    return out


# ---------------------------------------------------------------------------
# hypergeometric-type sums


@dataclass(frozen=True)
class SeriesResult:
    value: object
    terms: int
    tail_bound: object
    terminated: bool


def _series(
    nums: Sequence,
    dens: Sequence,
    q,
    step: Callable[[int], object],
    ctx: PrecisionCtx,
    n_terms: int | None = None,
    den_error: type[Exception] = DenominatorPochhammerZero,
    step_bound: Callable[[int], object] | None = None,
) -> SeriesResult:
    """Sum ``sum_k T_k`` with ``T_0 = 1`` and
    ``T_{k+1} / T_k = prod(1 - x q^k) / prod(1 - y q^k) * step(k)`` over ``x in nums``, ``y in dens``.

    Exact numerator parameters that reach ``q^-m`` terminate the sum after
    ``m + 1`` terms; an exact denominator hit before that is an error.

    A nonterminating sum stops once the geometric tail bound falls below the
    truncation tolerance. ``step_bound(k)`` must bound ``|step(j)|`` for all
    ``j >= k``; together with ``|q| < 1`` it bounds every later term ratio by
    ``prod(1 + |x q^k|) / prod(1 - |y q^k|) * step_bound(k)``.
    """
    mp = ctx.mp
    limit = ctx.max_terms if n_terms is None else n_terms
    stop = limit
    for x in nums:
        k = _exact_hit(x, q, limit)
        if k is not None:
            stop = min(stop, k + 1)
    for y in dens:
        k = _exact_hit(y, q, stop)
        if k is not None and k < stop - 1:
            raise den_error(f"denominator factor (1 - {y} q^{k}) vanishes")
    nx = [ctx.mpf(x) for x in nums]
    dy = [ctx.mpf(y) for y in dens]
    qq = ctx.mpf(q)
    tol = ctx.tol
    total = mp.mpf(0)
    term = mp.mpf(1)
    qk = mp.mpf(1)
    can_bound = step_bound is not None and abs(qq) < 1
    terminated = stop < ctx.max_terms
    for k in range(stop):
        total += term
        if k == stop - 1:
            return SeriesResult(total, k + 1, mp.mpf(0), terminated or n_terms is not None)
        num = mp.mpf(1)
        for x in nx:
            num *= 1 - x * qk
        den = mp.mpf(1)
        for y in dy:
            den *= 1 - y * qk
        if den == 0:
            raise den_error(f"denominator vanishes at k = {k}")
        ratio = num / den * step(k)
        new_term = term * ratio
        if new_term == 0:
            return SeriesResult(total, k + 1, mp.mpf(0), True)
        term = new_term
        qk *= qq
        if can_bound and not terminated:
            aq = abs(qk)
            grow = mp.mpf(1)
            for x in nx:
                grow *= 1 + abs(x) * aq
            shrink = mp.mpf(1)
            for y in dy:
                shrink *= 1 - abs(y) * aq
            if shrink > 0:
                rho = grow / shrink * step_bound(k + 1)
                if rho < 1:
                    tail = abs(term) / (1 - rho)
                    if tail < tol * max(1, abs(total)):
                        return SeriesResult(total + term, k + 2, tail, False)
    raise NonConvergent(f"series did not converge within {ctx.max_terms} terms")


def phi_rs(
    numer: Sequence,
    denom: Sequence,
    q,
    z,
    ctx: PrecisionCtx = DEFAULT_CTX,
    n_terms: int | None = None,
    with_info: bool = False,
):
    """Basic hypergeometric series ``r phi s (numer; denom | q; z)``.

    Includes the ``(-1)^((1+s-r)k) q^((1+s-r) k(k-1)/2)`` factor. A terminating
    series (some exact numerator ``q^-n``) is summed to exactly ``n + 1`` terms;
    ``n_terms`` forces a fixed number of terms.
    """
    r, s = len(numer), len(denom)
    e = 1 + s - r
    qq, zz = ctx.mpf(q), ctx.mpf(z)
    sign = -1 if e % 2 else 1

    def step(k):
        out = zz / (1 - qq ** (k + 1))
        if e:
            out *= sign * qq ** (e * k)
        return out

    terminating = n_terms is not None or any(_exact_hit(x, q, ctx.max_terms) is not None for x in numer)
    if not terminating and (abs(qq) >= 1 or e < 0 or (e == 0 and abs(zz) >= 1)):
        raise NonConvergent(f"{r}phi{s} does not converge at |z| = {mpmath.nstr(abs(zz), 5)}")
    aq, az = abs(qq), abs(zz)

    def step_bound(k):
        return az * aq ** (e * k) / (1 - aq ** (k + 1))

    res = _series(numer, list(denom), q, step, ctx, n_terms, step_bound=step_bound if e >= 0 else None)
    return res if with_info else res.value


def _params_mp(p: AWParams, ctx: PrecisionCtx):
    return tuple(ctx.mpf(x) for x in (p.q, p.a, p.b, p.c, p.d))


def awp_direct(p: AWParams, n: int, z, ctx: PrecisionCtx = DEFAULT_CTX):
    """Askey-Wilson polynomial ``P_n(chi(z))`` summed numerically from its 4phi3 form."""
    q, a = p.q, p.a
    ab, ac, ad = a * p.b, a * p.c, a * p.d
    pref = qpoch(ab, q, n, ctx) * qpoch(ac, q, n, ctx) * qpoch(ad, q, n, ctx)
    if pref == 0:
        raise InvalidParams(f"(ab, ac, ad; q)_{n} vanishes")
    pref /= ctx.mpf(a) ** n
    az, a_z = _mul(a, z, ctx), _div(a, z, ctx)
    series = phi_rs([q ** (-n), p.abcd * q ** (n - 1), az, a_z], [ab, ac, ad], q, q, ctx, n_terms=n + 1)
    return pref * series


def _mul(x, z, ctx):
    if _is_exact(x) and _is_exact(z):
        return Fraction(x) * Fraction(z)
    return ctx.mpf(x) * ctx.mpf(z)


def _div(x, z, ctx):
    if _is_exact(x) and _is_exact(z):
        return Fraction(x) / Fraction(z)
    return ctx.mpf(x) / ctx.mpf(z)


# ---------------------------------------------------------------------------
# nonhomogeneous solutions and the deformed eigenfunctions


def admissible_alphas(p: AWParams) -> tuple[Fraction, ...]:
    q, a = p.q, p.a
    return (Fraction(1), q / (a * p.b), q / (a * p.c), q / (a * p.d))


def _check_t(t) -> Fraction:
    t = Fraction(t)
    if t == 0:
        raise ZeroDeformation("deformation parameter t must be nonzero")
    return t


def _check_alpha(p: AWParams, alpha) -> Fraction:
    alpha = Fraction(alpha)
    if alpha not in admissible_alphas(p):
        raise ValueError(f"alpha = {alpha} is not one of 1, q/(ab), q/(ac), q/(ad)")
    return alpha


def _require_q_inside(p: AWParams):
    if abs(p.q) >= 1:
        raise DivergentProduct("infinite q-products need |q| < 1")


def forcing_G(p: AWParams, t, alpha, z, ctx: PrecisionCtx = DEFAULT_CTX):
    """Right-hand side ``G(z, t, alpha)`` of the nonhomogeneous equation."""
    _require_q_inside(p)
    t, alpha = _check_t(t), _check_alpha(p, alpha)
    q, a = p.q, p.a
    num = qpoch_inf_multi([alpha * t, p.abcd * alpha / (t * q)], q, ctx)
    if num == 0:
        return ctx.mp.mpf(0)
    den = ctx.mpf(alpha) * qpoch_inf_multi(
        [a * p.b * alpha, a * p.c * alpha, a * p.d * alpha, alpha * q], q, ctx
    )
    if den == 0:
        raise SeriesDenominatorZero("denominator product of G vanishes")
    return num / den * qpoch_inf_multi([_mul(a, z, ctx), _div(a, z, ctx)], q, ctx)


def u_solution(p: AWParams, t, alpha, z, ctx: PrecisionCtx = DEFAULT_CTX, with_info: bool = False):
    """Solution ``u(z, t, alpha)`` of ``(L - t_lambda(0)) u = G(z, t, alpha)``.

    The denominator parameters are ``(ab alpha, ac alpha, ad alpha, alpha q)``.
    For ``alpha = 1`` the infinite-product prefactor is identically 1.
    """
    _require_q_inside(p)
    t, alpha = _check_t(t), _check_alpha(p, alpha)
    q, a = p.q, p.a
    aaz, aa_z = _mul(a * alpha, z, ctx), _div(a * alpha, z, ctx)
    nums = [alpha * t, p.abcd * alpha / (t * q), aaz, aa_z]
    dens = [a * p.b * alpha, a * p.c * alpha, a * p.d * alpha, alpha * q]
    qq = ctx.mpf(q)
    aq = abs(qq)
    res = _series(nums, dens, q, lambda k: qq, ctx, den_error=SeriesDenominatorZero, step_bound=lambda k: aq)
    value = res.value
    if alpha != 1:
        den = qpoch_inf_multi([aaz, aa_z], q, ctx)
        if den == 0:
            raise SeriesDenominatorZero("prefactor denominator (a alpha z, a alpha/z; q)_inf vanishes")
        value = value * qpoch_inf_multi([_mul(a, z, ctx), _div(a, z, ctx)], q, ctx) / den
    return (value, res) if with_info else value


def u_poles_hit(p: AWParams, alpha, points: Iterable) -> list[Fraction]:
    """Points where ``u(., t, alpha)`` has a pole: ``a alpha z`` or ``a alpha / z`` equal to ``q^-m``."""
    alpha = Fraction(alpha)
    if alpha == 1:
        return []
    aa = p.a * alpha
    bad = []
    for z in points:
        z = Fraction(z)
        if _exact_hit(aa * z, p.q, 10**6) is not None or _exact_hit(aa / z, p.q, 10**6) is not None:
            bad.append(z)
    return bad


def pole_free_alpha(p: AWParams, points: Iterable) -> Fraction:
    """First of ``q/(ab), q/(ac), q/(ad)`` whose ``u`` is regular at every given point."""
    points = list(points)
    for alpha in admissible_alphas(p)[1:]:
        if not u_poles_hit(p, alpha, points):
            return alpha
    raise SeriesDenominatorZero("every admissible alpha puts a pole on the sample lattice")


def shifted_points(zs: Iterable, q, lo: int, hi: int) -> list[Fraction]:
    """All ``q^j z`` with ``lo <= j <= hi``."""
    q = Fraction(q)
    return sorted({Fraction(z) * q**j for z in zs for j in range(lo, hi + 1)})


def y_coefficient(p: AWParams, t, alpha, ctx: PrecisionCtx = DEFAULT_CTX):
    """Weight of ``u(z, t, alpha)`` in the homogeneous combination; zero at ``t = 1``."""
    t, alpha = _check_t(t), _check_alpha(p, alpha)
    if alpha == 1:
        raise ValueError("the combination needs alpha != 1")
    q, a = p.q, p.a
    ab, ac, ad = a * p.b, a * p.c, a * p.d
    top = qpoch_inf_multi([t, p.abcd / (t * q), ab * alpha, ac * alpha, ad * alpha, alpha * q], q, ctx)
    if top == 0:
        return ctx.mp.mpf(0)
    bottom = qpoch_inf_multi([ab, ac, ad, q, alpha * t, p.abcd * alpha / (t * q)], q, ctx)
    if bottom == 0:
        raise CoefficientProductZero("denominator products of the combination vanish")
    return ctx.mpf(alpha) * top / bottom


def y_solution(p: AWParams, t, z, alpha=None, ctx: PrecisionCtx = DEFAULT_CTX):
    """Homogeneous solution ``y(z, t) = u(z, t, 1) - C(t) u(z, t, alpha)`` with ``y(z, 1) = 1``."""
    if alpha is None:
        alpha = p.q / (p.a * p.b)
    coeff = y_coefficient(p, t, alpha, ctx)
    value = u_solution(p, t, 1, z, ctx)
    if coeff != 0:
        value -= coeff * u_solution(p, t, alpha, z, ctx)
    return value


class PointFn:
    """Deterministic evaluator ``z -> value`` at exact rational points, memoized.

    ``depths`` records the q-shift depths through which the evaluator has been
    composed; evaluating at ``z`` touches ``f(q^k z)`` for ``k`` in ``depths``.
    """

    def __init__(self, fn: Callable[[Fraction], object], ctx: PrecisionCtx, depths: Iterable[int] = (0,)):
        self._fn = fn
        self.ctx = ctx
        self.depths = frozenset(depths)
        self._memo: dict[Fraction, object] = {}
        self._lock = threading.Lock()

    def __call__(self, z):
        z = Fraction(z)
        with self._lock:
            if z in self._memo:
                return self._memo[z]
        value = self._fn(z)
        with self._lock:
            return self._memo.setdefault(z, value)


def apply_numeric(op: QDiffOp, f: PointFn) -> PointFn:
    """``(op f)(z) = sum_k c_k(z) f(q^k z)`` with the exact coefficients evaluated at rational ``z``."""
    ctx = f.ctx
    q = op.q
    terms = sorted(op.terms.items())

    def fn(z: Fraction):
        acc = ctx.mp.mpf(0)
        for k, c in terms:
            acc += ctx.mpf(c.evaluate(z)) * f(z * q**k)
        return acc

    depths = {d + k for d in f.depths for k, _ in terms}
    return PointFn(fn, ctx, depths)


def _check_deform_ctx(ctx: PrecisionCtx):
    if ctx.digits < MIN_DEFORM_DIGITS:
        raise ValueError(f"deformation runs need at least {MIN_DEFORM_DIGITS} digits, got {ctx.digits}")


@lru_cache(maxsize=256)
def y_function(p: AWParams, t, ctx: PrecisionCtx = DEFAULT_CTX, alpha=None) -> PointFn:
    _check_deform_ctx(ctx)
    t = _check_t(t)
    return PointFn(lambda z: y_solution(p, t, z, alpha, ctx), ctx)


@lru_cache(maxsize=256)
def phi_function(p: AWParams, t, n: int, ctx: PrecisionCtx = DEFAULT_CTX, alpha=None) -> PointFn:
    """``Phi_n(., t)``: ``n`` deformed raising operators applied to ``y(., t)``."""
    if n < 0:
        raise ValueError("n must be nonnegative; use lowered_function for negative levels")
    t = _check_t(t)
    if n == 0:
        return y_function(p, t, ctx, alpha)
    return apply_numeric(raising(p, n - 1, t), phi_function(p, t, n - 1, ctx, alpha))


def phi_n(p: AWParams, t, n: int, z, ctx: PrecisionCtx = DEFAULT_CTX, alpha=None):
    return phi_function(p, Fraction(t), n, ctx, alpha)(z)


@lru_cache(maxsize=256)
def lowered_function(p: AWParams, t, m: int, ctx: PrecisionCtx = DEFAULT_CTX, alpha=None) -> PointFn:
    """Level ``-m`` obtained by ``m`` deformed lowering steps from ``y(., t)``."""
    t = _check_t(t)
    if m == 0:
        return y_function(p, t, ctx, alpha)
    return apply_numeric(lowering(p, -m, t), lowered_function(p, t, m - 1, ctx, alpha))


def operator_residual(op: QDiffOp, f: PointFn, z, shift_value=0, rhs=None):
    """``(op f)(z) - shift_value * f(z) - rhs`` evaluated numerically."""
    ctx = f.ctx
    z = Fraction(z)
    out = apply_numeric(op, f)(z) - ctx.mpf(shift_value) * f(z)
    if rhs is not None:
        out -= rhs
    return out


def u_residual(p: AWParams, t, alpha, z, ctx: PrecisionCtx = DEFAULT_CTX):
    """Return ``(|(L - t_lambda(0)) u - G|, |u(z)|)`` at ``z``."""
    t = _check_t(t)
    f = PointFn(lambda w: u_solution(p, t, alpha, w, ctx), ctx)
    r = operator_residual(make_L(p), f, z, t_eigenvalue(p, 0, t), forcing_G(p, t, alpha, z, ctx))
    return abs(r), abs(f(z))


def eigen_residual(p: AWParams, t, n: int, z, ctx: PrecisionCtx = DEFAULT_CTX, alpha=None):
    """Return ``(|L Phi_n - t_lambda(n) Phi_n|, |Phi_n(z)|)`` at ``z``."""
    f = phi_function(p, Fraction(t), n, ctx, alpha)
    r = operator_residual(make_L(p), f, z, t_eigenvalue(p, n, t))
    return abs(r), abs(f(z))


# ---------------------------------------------------------------------------
# convergence study t -> 1


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    k: int | None
    t: Fraction
    z: Fraction
    phi_over_c: object
    p_exact: object
    abs_err: object
    eig_residual: object
    eig_bound: object

    @property
    def eig_ok(self) -> bool:
        return self.eig_residual <= self.eig_bound


def chi_value(z: Fraction) -> Fraction:
    z = Fraction(z)
    return (z + 1 / z) / 2


def convergence_study(
    p: AWParams,
    n: int,
    ks: Iterable[int],
    zs: Iterable,
    anchor=Fraction(2),
    ctx: PrecisionCtx = DEFAULT_CTX,
    eig_exponent: int | None = None,
    ts: Iterable | None = None,
    alpha=None,
) -> list[ConvergenceRow]:
    """Anchor-normalized comparison of ``Phi_n(z, t)`` with ``P_n(chi(z))`` along ``t = 1 - 10^-k``.

    ``eig_exponent`` fixes the eigen-residual bound ``10^-eig_exponent * max(|Phi_n|, 1)``;
    by default it is ``digits - 15 - 2n``. ``ts`` replaces the ``k`` schedule by explicit
    ``t`` values (``k`` is then None); ``t = 1`` short-circuits to the exact polynomial.
    ``alpha`` defaults to the first admissible value whose ``u`` has no pole on the points read.
    """
    _check_deform_ctx(ctx)
    mp = ctx.mp
    ref = awp_reference(p, n)
    anchor = Fraction(anchor)
    p_anchor = ref(chi_value(anchor))
    if p_anchor == 0:
        raise ValueError("P_n vanishes at the anchor point")
    if eig_exponent is None:
        eig_exponent = ctx.digits - 15 - 2 * n
    schedule = [(k, 1 - Fraction(1, 10**k)) for k in ks] if ts is None else [(None, Fraction(t)) for t in ts]
    zs = [Fraction(z) for z in zs]
    if alpha is None:
        # Phi_n(z) and its eigen-residual read y on q^j z for -1 <= j <= n + 1
        alpha = pole_free_alpha(p, shifted_points(zs + [anchor], p.q, -1, n + 1))
    rows = []
    for k, t in schedule:
        for z in zs:
            exact = ref(chi_value(z))
            if t == 1:
                val = ctx.mpf(exact)
                rows.append(ConvergenceRow(n, k, t, z, val, val, mp.mpf(0), mp.mpf(0), mp.mpf(0)))
                continue
            phi = phi_function(p, t, n, ctx, alpha)
            c = phi(anchor) / ctx.mpf(p_anchor)
            ratio = phi(z) / c
            p_mp = ctx.mpf(exact)
            res, mag = eigen_residual(p, t, n, z, ctx, alpha)
            bound = mp.mpf(10) ** (-eig_exponent) * max(mag, 1)
            rows.append(ConvergenceRow(n, k, t, z, ratio, p_mp, abs(ratio - p_mp), res, bound))
    return rows
