"""Askey-Wilson parameters, structure functions and q-difference operators.

The Askey-Wilson operator acts on functions of ``z`` through the shift
``E_q f(z) = f(q z)``.  Its coefficients are exact :class:`RatFun` values,
so every operator identity can be checked as an exact-zero residual.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .algebra import ChiPoly, Laurent, RatFun, format_rat, laurent_to_chi, parse_rat
from .errors import InvalidParams, ZeroDeformation


@dataclass(frozen=True)
class AWParams:
    """Exact parameter tuple ``(q, a, b, c, d)``."""

    q: Fraction
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self):
        for name in ("q", "a", "b", "c", "d"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.q in (0, 1, -1):
            raise InvalidParams(f"q must avoid 0, 1, -1 (got {self.q})")
        for name in ("a", "b", "c", "d"):
            if getattr(self, name) == 0:
                raise InvalidParams(f"parameter {name} must be nonzero")

    @classmethod
    def from_strings(cls, q: str, a: str, b: str, c: str, d: str) -> AWParams:
        try:
            values = [parse_rat(x) for x in (q, a, b, c, d)]
        except ValueError as exc:
            raise InvalidParams(str(exc)) from exc
        return cls(*values)

    @property
    def abcd(self) -> Fraction:
        return self.a * self.b * self.c * self.d

    def as_strings(self) -> dict[str, str]:
        return {k: format_rat(getattr(self, k)) for k in ("q", "a", "b", "c", "d")}

    def depth_problems(self, depth: int) -> list[str]:
        """Reasons the parameters cannot support a chain of the given depth."""
        problems = []
        q, a = self.q, self.a
        for k in range(depth):
            qk = q**k
            for name, x in (("ab", a * self.b), ("ac", a * self.c), ("ad", a * self.d)):
                if x * qk == 1:
                    problems.append(f"{name}*q^{k} == 1")
            if eigenvalue(self, k) == eigenvalue(self, k + 1):
                problems.append(f"lambda({k}) == lambda({k + 1})")
        # abcd*q^m == 1 with m <= 2*depth - 2 kills the top chi-coefficient of P_n
        for m in range(max(0, 2 * depth - 1)):
            if self.abcd * q**m == 1:
                problems.append(f"abcd*q^{m} == 1")
        return problems

    def validate(self, depth: int) -> AWParams:
        problems = self.depth_problems(depth)
        if problems:
            raise InvalidParams(f"parameters invalid to depth {depth}: " + "; ".join(problems))
        return self


TEST_VECTOR = AWParams(Fraction(1, 2), Fraction(1, 3), Fraction(1, 5), Fraction(1, 7), Fraction(1, 9))


def random_params(
    rng: random.Random,
    depth: int = 9,
    n_range: tuple[int, int] = (-5, 10),
    max_num: int = 9,
    max_den: int = 9,
) -> AWParams:
    """Draw a random rational parameter set with ``0 < |q| < 1`` valid to ``depth``.

    Draws whose eigenvalues collide anywhere in ``n_range`` (one past the top
    included) are rejected as well.
    """

    def draw(lo_abs: Fraction | None = None) -> Fraction:
        while True:
            x = Fraction(rng.randint(1, max_num), rng.randint(1, max_den))
            if lo_abs is not None and x >= lo_abs:
                continue
            return x if rng.random() < 0.5 else -x

    while True:
        q = draw(lo_abs=Fraction(1))
        try:
            p = AWParams(q, draw(), draw(), draw(), draw())
        except InvalidParams:
            continue
        if p.depth_problems(depth):
            continue
        lo, hi = n_range
        if any(eigenvalue(p, n) == eigenvalue(p, n + 1) for n in range(lo - 1, hi + 2)):
            continue
        return p


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StructCoeffs:
    """Coefficients ``A_{-2}..A_2`` of the quartic ``z^-2 (1-az)(1-bz)(1-cz)(1-dz)``."""

    Am2: Fraction
    Am1: Fraction
    A0: Fraction
    A1: Fraction
    A2: Fraction

    def numerator(self) -> Laurent:
        return Laurent({-2: self.Am2, -1: self.Am1, 0: self.A0, 1: self.A1, 2: self.A2})


def struct_coeffs(p: AWParams) -> StructCoeffs:
    a, b, c, d = p.a, p.b, p.c, p.d
    return StructCoeffs(
        Am2=Fraction(1),
        Am1=-(a + b + c + d),
        A0=a * b + a * c + a * d + b * c + b * d + c * d,
        A1=-(a * b * c + a * b * d + b * c * d + a * c * d),
        A2=a * b * c * d,
    )


def eigenvalue(p: AWParams, n: int) -> Fraction:
    """``lambda(n) = -(1 - q^-n)(1 - abcd q^(n-1))``."""
    q = p.q
    return -(1 - q ** (-n)) * (1 - p.abcd * q ** (n - 1))


def t_eigenvalue(p: AWParams, n: int, t) -> Fraction:
    """Deformed eigenvalue ``-(1 - t q^-n)(1 - abcd t^-1 q^(n-1))``; equals :func:`eigenvalue` at ``t = 1``."""
    t = Fraction(t)
    if t == 0:
        raise ZeroDeformation("deformation parameter t must be nonzero")
    q = p.q
    return -(1 - t * q ** (-n)) * (1 - p.abcd / t * q ** (n - 1))


# ---------------------------------------------------------------------------


def _lattice_den(q: Fraction) -> Laurent:
    # q z - 1/z
    return Laurent({1: q, -1: -1})


@lru_cache(maxsize=None)
def make_ABK(p: AWParams) -> tuple[RatFun, RatFun, RatFun]:
    s = struct_coeffs(p)
    A = RatFun(s.numerator(), _lattice_den(p.q))
    Bnum = Laurent({-2: s.A2, -1: s.A1, 0: s.A0, 1: s.Am1, 2: s.Am2})
    B = RatFun(Bnum, Laurent({1: 1, -1: -p.q}))
    K = RatFun(Laurent({1: 1, -1: -1}))
    return A, B, K


@lru_cache(maxsize=None)
def make_v(p: AWParams) -> RatFun:
    """``v(z) = (1-az)(1-bz)(1-cz)(1-dz) / ((1-z^2)(1-qz^2))``."""
    num = Laurent.const(1)
    for x in (p.a, p.b, p.c, p.d):
        num = num * Laurent({0: 1, 1: -x})
    den = Laurent({0: 1, 2: -1}) * Laurent({0: 1, 2: -p.q})
    return RatFun(num, den)


# ---------------------------------------------------------------------------


class QDiffOp:
    """Finite sum ``sum_k coeff_k(z) E_q^k`` with exact rational-function coefficients."""

    __slots__ = ("q", "terms")

    def __init__(self, q, terms: Mapping[int, object]):
        self.q = Fraction(q)
        clean = {}
        for k, c in terms.items():
            c = RatFun.coerce(c)
            if not c.is_zero():
                clean[int(k)] = c
        self.terms: dict[int, RatFun] = clean

    @classmethod
    def shift(cls, q, k: int = 1) -> QDiffOp:
        return cls(q, {k: 1})

    @classmethod
    def scalar(cls, q, c) -> QDiffOp:
        return cls(q, {0: c})

    @property
    def shifts(self) -> list[int]:
        return sorted(self.terms)

    def coeff(self, k: int) -> RatFun:
        return self.terms.get(k, RatFun.coerce(0))

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: QDiffOp):
        if self.q != other.q:
            raise ValueError("operators over different q cannot be combined")

    def __add__(self, other) -> QDiffOp:
        if not isinstance(other, QDiffOp):
            other = QDiffOp.scalar(self.q, other)
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return QDiffOp(self.q, out)

    __radd__ = __add__

    def __neg__(self) -> QDiffOp:
        return QDiffOp(self.q, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> QDiffOp:
        if not isinstance(other, QDiffOp):
            other = QDiffOp.scalar(self.q, other)
        return self + (-other)

    def __rsub__(self, other) -> QDiffOp:
        return (-self) + other

    def left_mul(self, f) -> QDiffOp:
        """Multiply every coefficient on the left by the function ``f``."""
        f = RatFun.coerce(f)
        return QDiffOp(self.q, {k: f * c for k, c in self.terms.items()})

    def compose(self, other: QDiffOp) -> QDiffOp:
        """``self o other``: ``c_j(z) E^j d_k(z) E^k = c_j(z) d_k(q^j z) E^(j+k)``."""
        self._check(other)
        out: dict[int, RatFun] = {}
        for j, c in self.terms.items():
            for k, d in other.terms.items():
                term = c * d.q_shift(self.q, j)
                out[j + k] = out[j + k] + term if j + k in out else term
        return QDiffOp(self.q, out)

    def __matmul__(self, other: QDiffOp) -> QDiffOp:
        return self.compose(other)

    def __mul__(self, other) -> QDiffOp:
        if isinstance(other, QDiffOp):
            return self.compose(other)
        return QDiffOp(self.q, {k: c * other for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __call__(self, f) -> RatFun:
        return apply(self, f)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QDiffOp):
            return NotImplemented
        return self.q == other.q and (self - other).is_zero()

    def __repr__(self) -> str:
        inner = ", ".join(f"E^{k}: {c!r}" for k, c in sorted(self.terms.items()))
        return f"QDiffOp(q={self.q}, {{{inner}}})"


def apply(op: QDiffOp, f) -> RatFun:
    """Apply ``op`` to a rational function: ``sum_k coeff_k(z) f(q^k z)``."""
    f = RatFun.coerce(f)
    acc = RatFun.coerce(0)
    for k, c in op.terms.items():
        acc = acc + c * f.q_shift(op.q, k)
    return acc


def make_L(p: AWParams) -> QDiffOp:
    """``v(z) E_q - (v(z) + v(1/z)) + v(1/z) E_q^-1``."""
    v = make_v(p)
    vr = v.reflect()
    return QDiffOp(p.q, {1: v, 0: -(v + vr), -1: vr})


def make_H(p: AWParams, n: int, t=1) -> QDiffOp:
    """``A(z)[A(qz) E^2 - (A(qz) + B(qz) + K(qz) lam) E + B(qz)]`` with ``lam`` the (deformed) eigenvalue."""
    A, B, K = make_ABK(p)
    q = p.q
    lam = t_eigenvalue(p, n, t)
    Aq, Bq, Kq = A.q_shift(q), B.q_shift(q), K.q_shift(q)
    inner = QDiffOp(q, {2: Aq, 1: -(Aq + Bq + Kq * lam), 0: Bq})
    return inner.left_mul(A)


# ---------------------------------------------------------------------------


def _qpoch_exact(x: Fraction, q: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= 1 - x * q**i
    return out


@lru_cache(maxsize=None)
def awp_reference(p: AWParams, n: int) -> ChiPoly:
    """Exact expansion of the terminating 4phi3 defining the Askey-Wilson polynomial ``P_n``.

    Each term carries ``(az, a/z; q)_k``, a symmetric Laurent polynomial, so
    the finite sum converts directly into the chi basis.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    q, a = p.q, p.a
    ab, ac, ad = a * p.b, a * p.c, a * p.d
    prefactor = _qpoch_exact(ab, q, n) * _qpoch_exact(ac, q, n) * _qpoch_exact(ad, q, n)
    if prefactor == 0:
        raise InvalidParams(f"(ab, ac, ad; q)_{n} vanishes")
    prefactor /= a**n
    top = q ** (-n)
    second = p.abcd * q ** (n - 1)
    total = Laurent()
    pair = Laurent.const(1)  # (az, a/z; q)_k
    coeff = Fraction(1)  # (q^-n, abcd q^(n-1); q)_k / (ab, ac, ad, q; q)_k * q^k
    for k in range(n + 1):
        total = total + pair * coeff
        if k == n:
            break
        qk = q**k
        coeff *= (1 - top * qk) * (1 - second * qk) * q
        coeff /= (1 - ab * qk) * (1 - ac * qk) * (1 - ad * qk) * (1 - q ** (k + 1))
        aq = a * qk
        # (1 - aq z)(1 - aq/z) = (1 + aq^2) - aq (z + 1/z)
        pair = pair * Laurent({-1: -aq, 0: 1 + aq * aq, 1: -aq})
    return laurent_to_chi(total * prefactor)
