"""Exact Laurent polynomials, rational functions and chi-polynomials over Q.

Everything here is immutable. Coefficients are :class:`fractions.Fraction`.
A :class:`RatFun` is always stored in canonical form: numerator and
denominator are coprime, the denominator is an ordinary polynomial with
constant term 1, and any monomial or scalar unit lives in the numerator.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from fractions import Fraction
from numbers import Rational

from .errors import DivisionByZero, NotSymmetric, PoleAtPoint, ZeroArgument

Rat = Fraction

_RAT_RE = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rat(text: str | int | Fraction) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` into a Fraction. Decimal and float forms are rejected."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    m = _RAT_RE.match(text)
    if m is None:
        raise ValueError(f"not a rational literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rat(x: Fraction | int) -> str:
    return str(Fraction(x))


def _as_rat(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"exact rational expected, got {type(x).__name__}")


# ---------------------------------------------------------------------------
# dense ordinary polynomials (ascending coefficient lists), used for gcd only


def _trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    if len(a) - 1 < db:
        return [], _trim(a)
    quot = [Fraction(0)] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c == 0:
            continue
        c = c / lead
        quot[i - db] = c
        for j in range(db + 1):
            a[i - db + j] -= c * b[j]
    return _trim(quot), _trim(a[:db])


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    """Monic gcd by the Euclidean algorithm; remainders are kept monic to limit growth."""
    if len(a) < len(b):
        a, b = b, a
    while b:
        _, r = _poly_divmod(a, b)
        if r:
            inv = 1 / r[-1]
            r = [c * inv for c in r]
        a, b = b, r
    inv = 1 / a[-1]
    return [c * inv for c in a]


# ---------------------------------------------------------------------------


class Laurent:
    """Sparse Laurent polynomial in ``z``: a map ``exponent -> nonzero coefficient``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | None = None):
        clean: dict[int, Fraction] = {}
        if terms:
            for e, c in terms.items():
                c = _as_rat(c)
                if c != 0:
                    clean[int(e)] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[int, Fraction]) -> Laurent:
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def const(cls, c) -> Laurent:
        return cls({0: c})

    @classmethod
    def monomial(cls, k: int, c=1) -> Laurent:
        return cls({k: c})

    # -- inspection --------------------------------------------------------

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def coeff(self, k: int) -> Fraction:
        return self._terms.get(k, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def min_exp(self) -> int:
        if not self._terms:
            raise ValueError("zero polynomial has no exponents")
        return min(self._terms)

    @property
    def max_exp(self) -> int:
        if not self._terms:
            raise ValueError("zero polynomial has no exponents")
        return max(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or set(self._terms) == {0}

    def is_symmetric(self) -> bool:
        t = self._terms
        return all(t.get(-e) == c for e, c in t.items())

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> Laurent:
        if not isinstance(other, Laurent):
            try:
                other = Laurent.const(other)
            except TypeError:
                return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Laurent._raw(out)

    __radd__ = __add__

    def __neg__(self) -> Laurent:
        return Laurent._raw({e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> Laurent:
        if not isinstance(other, Laurent):
            try:
                other = Laurent.const(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> Laurent:
        return (-self) + other

    def __mul__(self, other) -> Laurent:
        if not isinstance(other, Laurent):
            try:
                s = _as_rat(other)
            except TypeError:
                return NotImplemented
            if s == 0:
                return Laurent._raw({})
            return Laurent._raw({e: c * s for e, c in self._terms.items()})
        out: dict[int, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = e1 + e2
                out[e] = out.get(e, 0) + c1 * c2
        return Laurent._raw({e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Laurent:
        if k < 0:
            if len(self._terms) == 1:
                (e, c), = self._terms.items()
                return Laurent._raw({e * k: c**k})
            raise ValueError("negative power of a non-monomial Laurent polynomial")
        out = Laurent.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def mul_monomial(self, k: int) -> Laurent:
        return Laurent._raw({e + k: c for e, c in self._terms.items()})

    def scale_arg(self, s) -> Laurent:
        """Return ``f(s*z)``."""
        s = _as_rat(s)
        if s == 0:
            raise ZeroArgument("cannot substitute z -> 0*z")
        return Laurent._raw({e: c * s**e for e, c in self._terms.items()})

    def reflect(self) -> Laurent:
        """Return ``f(1/z)``."""
        return Laurent._raw({-e: c for e, c in self._terms.items()})

    def evaluate(self, z0) -> Fraction:
        z0 = _as_rat(z0)
        if z0 == 0 and self._terms and self.min_exp < 0:
            raise ZeroArgument("negative exponent evaluated at z = 0")
        return sum((c * z0**e for e, c in self._terms.items()), Fraction(0))

    # -- comparison / hashing ----------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, Laurent):
            return self._terms == other._terms
        try:
            return self._terms == Laurent.const(other)._terms
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return "Laurent(0)"
        parts = [f"{c}*z^{e}" for e, c in self.items()]
        return "Laurent(" + " + ".join(parts) + ")"

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict[str, str]:
        return {str(e): format_rat(c) for e, c in self.items()}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> Laurent:
        return cls({int(e): parse_rat(c) for e, c in data.items()})

    # -- dense conversion --------------------------------------------------

    def _dense(self) -> tuple[int, list[Fraction]]:
        lo = self.min_exp
        out = [Fraction(0)] * (self.max_exp - lo + 1)
        for e, c in self._terms.items():
            out[e - lo] = c
        return lo, out

    @classmethod
    def _from_dense(cls, shift: int, coeffs: Iterable[Fraction]) -> Laurent:
        return cls._raw({i + shift: c for i, c in enumerate(coeffs) if c})


Z = Laurent.monomial(1)
ONE = Laurent.const(1)
CHI = Laurent({1: Fraction(1, 2), -1: Fraction(1, 2)})


class RatFun:
    """Quotient of Laurent polynomials kept in canonical form."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None):
        num = num if isinstance(num, Laurent) else Laurent.const(num)
        if den is None:
            den = ONE
        elif not isinstance(den, Laurent):
            den = Laurent.const(den)
        n, d = _canonical(num, den)
        self.num = n
        self.den = d
        self._hash = None

    @classmethod
    def _raw(cls, num: Laurent, den: Laurent) -> RatFun:
        obj = cls.__new__(cls)
        obj.num = num
        obj.den = den
        obj._hash = None
        return obj

    @classmethod
    def coerce(cls, x) -> RatFun:
        if isinstance(x, RatFun):
            return x
        if isinstance(x, Laurent):
            return cls._raw(x, ONE)
        return cls._raw(Laurent.const(x), ONE)

    # -- inspection --------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_laurent(self) -> bool:
        return self.den == ONE

    def as_laurent(self) -> Laurent:
        if not self.is_laurent():
            raise ValueError(f"{self!r} is not a Laurent polynomial")
        return self.num

    def normalized(self) -> RatFun:
        """Re-run canonicalization; the identity on any stored RatFun."""
        return RatFun(self.num, self.den)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> RatFun:
        try:
            other = RatFun.coerce(other)
        except TypeError:
            return NotImplemented
        if self.den == other.den:
            return RatFun(self.num + other.num, self.den)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> RatFun:
        return RatFun._raw(-self.num, self.den)

    def __sub__(self, other) -> RatFun:
        try:
            other = RatFun.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> RatFun:
        return (-self) + other

    def __mul__(self, other) -> RatFun:
        if not isinstance(other, (RatFun, Laurent)):
            try:
                s = _as_rat(other)
            except TypeError:
                return NotImplemented
            if s == 0:
                return RatFun._raw(Laurent(), ONE)
            return RatFun._raw(self.num * s, self.den)
        other = RatFun.coerce(other)
        return RatFun(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> RatFun:
        try:
            other = RatFun.coerce(other)
        except TypeError:
            return NotImplemented
        if other.is_zero():
            raise DivisionByZero("division by the zero rational function")
        return RatFun(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> RatFun:
        return RatFun.coerce(other) / self

    def __pow__(self, k: int) -> RatFun:
        if k < 0:
            return RatFun.coerce(1) / (self ** (-k))
        return RatFun(self.num**k, self.den**k)

    def q_shift(self, q, k: int = 1) -> RatFun:
        """Return ``f(q**k * z)``.

        Substitution is a ring automorphism and leaves the constant term of
        the denominator alone, so the canonical form is preserved without a
        fresh gcd.
        """
        if k == 0:
            return self
        s = _as_rat(q) ** k
        return RatFun._raw(self.num.scale_arg(s), self.den.scale_arg(s))

    def reflect(self) -> RatFun:
        """Return ``f(1/z)``."""
        return RatFun(self.num.reflect(), self.den.reflect())

    def evaluate(self, z0) -> Fraction:
        z0 = _as_rat(z0)
        if z0 == 0:
            raise ZeroArgument("rational functions are evaluated at z != 0")
        d = self.den.evaluate(z0)
        if d == 0:
            raise PoleAtPoint(f"pole at z = {z0}")
        return self.num.evaluate(z0) / d

    # -- comparison --------------------------------------------------------

    def __eq__(self, other) -> bool:
        try:
            other = RatFun.coerce(other)
        except TypeError:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def structurally_equal(self, other: RatFun) -> bool:
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __repr__(self) -> str:
        if self.is_laurent():
            return f"RatFun({self.num!r})"
        return f"RatFun({self.num!r} / {self.den!r})"

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, data: Mapping) -> RatFun:
        return cls(Laurent.from_json(data["num"]), Laurent.from_json(data.get("den", {"0": "1"})))


def _canonical(num: Laurent, den: Laurent) -> tuple[Laurent, Laurent]:
    if den.is_zero():
        raise DivisionByZero("zero denominator")
    if num.is_zero():
        return Laurent._raw({}), ONE
    m1, n_dense = num._dense()
    m2, d_dense = den._dense()
    if len(n_dense) > 1 and len(d_dense) > 1:
        g = _poly_gcd(n_dense, d_dense)
        if len(g) > 1:
            n_dense, r1 = _poly_divmod(n_dense, g)
            d_dense, r2 = _poly_divmod(d_dense, g)
            assert not r1 and not r2
    unit = d_dense[0]
    if unit != 1:
        inv = 1 / unit
        n_dense = [c * inv for c in n_dense]
        d_dense = [c * inv for c in d_dense]
    return Laurent._from_dense(m1 - m2, n_dense), Laurent._from_dense(0, d_dense)


def q_shift(f, q, k: int = 1):
    """``f(q**k z)`` for a Laurent polynomial or rational function."""
    if isinstance(f, Laurent):
        return f.scale_arg(_as_rat(q) ** k)
    return RatFun.coerce(f).q_shift(q, k)


def rf_eval(f, z0) -> Fraction:
    return RatFun.coerce(f).evaluate(z0)


# ---------------------------------------------------------------------------


class ChiPoly:
    """Polynomial in ``chi = (z + 1/z)/2`` with ascending coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_as_rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @property
    def degree(self) -> int:
        """Degree; ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x) -> Fraction:
        x = _as_rat(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other: ChiPoly) -> ChiPoly:
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return ChiPoly(x + y for x, y in zip(a, b))

    def __neg__(self) -> ChiPoly:
        return ChiPoly(-c for c in self.coeffs)

    def __sub__(self, other: ChiPoly) -> ChiPoly:
        return self + (-other)

    def __mul__(self, other) -> ChiPoly:
        if isinstance(other, ChiPoly):
            if not self.coeffs or not other.coeffs:
                return ChiPoly()
            out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return ChiPoly(out)
        s = _as_rat(other)
        return ChiPoly(c * s for c in self.coeffs)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChiPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"ChiPoly({[format_rat(c) for c in self.coeffs]})"

    def to_json(self) -> list[str]:
        return [format_rat(c) for c in self.coeffs] or ["0"]

    @classmethod
    def from_json(cls, data: Iterable[str]) -> ChiPoly:
        return cls(parse_rat(c) for c in data)

    def to_laurent(self) -> Laurent:
        return chi_to_laurent(self)

    def proportionality(self, other: ChiPoly) -> Fraction | None:
        """Return ``c`` with ``self == c * other``, or None if no such nonzero ``c`` exists."""
        if self.degree != other.degree or self.is_zero():
            return None
        c = self.leading / other.leading
        if all(a == c * b for a, b in zip(self.coeffs, other.coeffs)):
            return c
        return None


def laurent_to_chi(f: Laurent) -> ChiPoly:
    """Rewrite a symmetric Laurent polynomial as a polynomial in chi."""
    if not f.is_symmetric():
        raise NotSymmetric(f"{f!r} is not invariant under z -> 1/z")
    if f.is_zero():
        return ChiPoly()
    top = f.max_exp
    two_chi = ChiPoly([0, 2])
    # s[k](chi(z)) = z^k + z^-k, with s[0] = 2
    s_prev, s_cur = ChiPoly([2]), two_chi
    out = ChiPoly([f.coeff(0)])
    for k in range(1, top + 1):
        if k > 1:
            s_prev, s_cur = s_cur, two_chi * s_cur - s_prev
        c = f.coeff(k)
        if c:
            out = out + s_cur * c
    return out


def chi_to_laurent(p: ChiPoly) -> Laurent:
    acc = Laurent()
    for c in reversed(p.coeffs):
        acc = acc * CHI + c
    return acc
