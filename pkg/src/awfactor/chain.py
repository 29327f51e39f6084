"""Infeld-Hull factorization chain for the Askey-Wilson operator.

For every level ``n`` the operator ``H(z; n)`` splits as

    H(z; n)   - mu(n) = (A E + G(z; n)) (A E + F(z; n))
    H(z; n+1) - mu(n) = (A E + F(z; n)) (A E + G(z; n))

with explicit rational coefficients.  The closed-form coefficients are
computed here and then checked against the defining system, never trusted.
Every check returns a :class:`Report` of exact residuals.
"""

from __future__ import annotations

import dataclasses
import threading
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .algebra import CHI, ChiPoly, Laurent, RatFun, format_rat, laurent_to_chi, parse_rat
from .aw_operator import (
    AWParams,
    QDiffOp,
    apply,
    make_ABK,
    make_H,
    struct_coeffs,
    t_eigenvalue,
)
from .errors import AsymmetricIntermediate, DegenerateLevel, InitialConditionViolated


# ---------------------------------------------------------------------------
# residual reports


@dataclass(frozen=True)
class Residual:
    equation_id: str
    n: int | None
    t: Fraction | None
    value: RatFun

    @property
    def is_zero(self) -> bool:
        return self.value.is_zero()

    def to_json(self) -> dict:
        return {
            "equation_id": self.equation_id,
            "n": self.n,
            "t": None if self.t is None else format_rat(self.t),
            "residual_is_zero": self.is_zero,
            "residual_terms_if_nonzero": None if self.is_zero else self.value.to_json(),
        }


class Report:
    """Ordered collection of residuals; ``ok`` iff every residual vanishes."""

    def __init__(self, residuals: Iterable[Residual] = ()):
        self.residuals: list[Residual] = list(residuals)
        self.notes: list[str] = []

    def add(self, equation_id: str, n, t, value) -> Residual:
        r = Residual(equation_id, n, None if t is None else Fraction(t), RatFun.coerce(value))
        self.residuals.append(r)
        return r

    def extend(self, other: Report) -> Report:
        self.residuals.extend(other.residuals)
        self.notes.extend(other.notes)
        return self

    @property
    def ok(self) -> bool:
        return all(r.is_zero for r in self.residuals)

    def failures(self) -> list[Residual]:
        return [r for r in self.residuals if not r.is_zero]

    def by_id(self, prefix: str) -> list[Residual]:
        return [r for r in self.residuals if r.equation_id.startswith(prefix)]

    def __iter__(self):
        return iter(self.residuals)

    def __len__(self) -> int:
        return len(self.residuals)

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.residuals]


# ---------------------------------------------------------------------------
# closed-form chain coefficients


@dataclass(frozen=True)
class ChainData:
    n: int
    t: Fraction
    Fm2: Fraction
    Fm1: Fraction
    F0: Fraction
    F1: Fraction
    F2: Fraction
    bm1: Fraction
    b0: Fraction
    b1: Fraction
    mu: Fraction

    FIELDS = ("Fm2", "Fm1", "F0", "F1", "F2", "bm1", "b0", "b1", "mu")

    def replace(self, **changes) -> ChainData:
        return dataclasses.replace(self, **changes)

    def as_strings(self) -> dict[str, object]:
        out: dict[str, object] = {"n": self.n, "t": format_rat(self.t)}
        out.update({k: format_rat(getattr(self, k)) for k in self.FIELDS})
        return out

    def F_numerator(self) -> Laurent:
        return Laurent({-2: self.Fm2, -1: self.Fm1, 0: self.F0, 1: self.F1, 2: self.F2})

    def G_numerator(self, q: Fraction) -> Laurent:
        return Laurent(
            {
                -2: self.Fm2 - self.bm1,
                -1: self.Fm1 - self.b0,
                0: self.F0,
                1: self.F1 + self.b0 * q,
                2: self.F2 + self.b1 * q,
            }
        )


@lru_cache(maxsize=None)
def t_chain_data(p: AWParams, n: int, t=1) -> ChainData:
    """Factorization data at level ``n`` with the eigenvalue deformed by ``t``."""
    t = Fraction(t)
    q = p.q
    l0 = t_eigenvalue(p, n, t)
    l1 = t_eigenvalue(p, n + 1, t)
    if l0 == l1:
        raise DegenerateLevel(n)
    s = struct_coeffs(p)
    A2, A1, A0, Am1 = s.A2, s.A1, s.A0, s.Am1
    q2, q3 = q * q, q * q * q

    bm1 = (l1 - l0) / (1 - q)
    b1 = q * bm1
    Fm2 = (l0 - q * l1) / (q2 - 1) - (q + A2) / (q2 + q)
    F2 = (l0 * q - l1) / (1 - q2) * q2 - (q2 + q * A2) / (q + 1)
    lin = A1 + q * Am1
    bracket = (
        2 * (l0 * q - l1) / (1 - q2) * q2
        + (l1 - l0) / (1 - q) * q2
        - 2 * (q2 + q * A2) / (1 + q)
    )
    b0 = (1 - q) / ((l0 - l1) * q3) * (bracket * lin + (2 * A1 * q2 + 2 * A2 * Am1 * q))
    Fm1 = b0 / 2 - lin / (2 * q)
    F1 = -q * b0 / 2 - lin / 2
    F0 = (q2 - q3 - A0 * (q + q2) + A2 * (q - 1) + q2 * (l0 + l1)) / (q + q2)
    mu = A0 + A1 * Am1 / q + A0 * A2 / q2 + F0 * bm1 + Fm1 * b0 - 2 * Fm2 * F0 - Fm1 * Fm1
    return ChainData(n, t, Fm2, Fm1, F0, F1, F2, bm1, b0, b1, mu)


def chain_data(p: AWParams, n: int) -> ChainData:
    return t_chain_data(p, n, 1)


def _lattice_den(q: Fraction) -> Laurent:
    return Laurent({1: q, -1: -1})


def make_FG(p: AWParams, n: int, t=1, data: ChainData | None = None) -> tuple[RatFun, RatFun]:
    if data is None:
        data = t_chain_data(p, n, t)
    den = _lattice_den(p.q)
    return RatFun(data.F_numerator(), den), RatFun(data.G_numerator(p.q), den)


def raising(p: AWParams, n: int, t=1, data: ChainData | None = None) -> QDiffOp:
    A, _, _ = make_ABK(p)
    F, _ = make_FG(p, n, t, data)
    return QDiffOp(p.q, {1: A, 0: F})


def lowering(p: AWParams, n: int, t=1, data: ChainData | None = None) -> QDiffOp:
    A, _, _ = make_ABK(p)
    _, G = make_FG(p, n, t, data)
    return QDiffOp(p.q, {1: A, 0: G})


# ---------------------------------------------------------------------------
# verification of the factorization itself


def verify_factorization(p: AWParams, n: int, t=1, data: ChainData | None = None) -> Report:
    """Residuals of the three scalar equations equivalent to the operator factorization."""
    t = Fraction(t)
    q = p.q
    A, B, K = make_ABK(p)
    if data is None:
        data = t_chain_data(p, n, t)
    F, G = make_FG(p, n, t, data)
    l0 = t_eigenvalue(p, n, t)
    l1 = t_eigenvalue(p, n + 1, t)
    Aq, Bq, Kq = A.q_shift(q), B.q_shift(q), K.q_shift(q)
    rep = Report()
    rep.add("eq15.1", n, t, F.q_shift(q) + G + (Aq + Bq + Kq * l0))
    rep.add("eq15.2", n, t, F * G - A * Bq + data.mu)
    diff = F - G
    rep.add("eq15.3", n, t, diff.q_shift(q) - diff - Kq * (l1 - l0))
    return rep


def verify_operator_factorization(p: AWParams, n: int, t=1) -> Report:
    """Compare both operator products against ``H - mu`` term by term."""
    data = t_chain_data(p, n, t)
    R = raising(p, n, t)
    Lw = lowering(p, n, t)
    rep = Report()
    lhs0 = make_H(p, n, t) - data.mu
    lhs1 = make_H(p, n + 1, t) - data.mu
    for k, c in (lhs0 - Lw.compose(R)).terms.items() or [(0, RatFun.coerce(0))]:
        rep.add(f"eq14.1:E^{k}", n, t, c)
    for k, c in (lhs1 - R.compose(Lw)).terms.items() or [(0, RatFun.coerce(0))]:
        rep.add(f"eq14.2:E^{k}", n, t, c)
    return rep


DEFAULT_PROBES: tuple[Laurent, ...] = (
    Laurent.const(1),
    Laurent({1: 1, -1: 1}),
    Laurent({2: 1, -2: 1}),
    Laurent({3: 1, -3: 1}),
)


def intertwining_residuals(
    H_lo: QDiffOp,
    H_hi: QDiffOp,
    raise_op: QDiffOp,
    lower_op: QDiffOp,
    n: int,
    t=1,
    probes: Iterable = DEFAULT_PROBES,
) -> Report:
    """Check ``H_hi R = R H_lo`` and ``H_lo L = L H_hi`` symbolically and on probe functions."""
    rep = Report()
    pairs = (
        ("eq19.1", H_hi, raise_op, raise_op, H_lo),
        ("eq19.2", H_lo, lower_op, lower_op, H_hi),
    )
    probes = [RatFun.coerce(f) for f in probes]
    for eq_id, left1, right1, left2, right2 in pairs:
        diff = left1.compose(right1) - left2.compose(right2)
        terms = diff.terms.items() or [(0, RatFun.coerce(0))]
        for k, c in terms:
            rep.add(f"{eq_id}:E^{k}", n, t, c)
        for i, f in enumerate(probes):
            sequential = apply(left1, apply(right1, f)) - apply(left2, apply(right2, f))
            rep.add(f"{eq_id}:probe{i}", n, t, sequential)
            rep.add(f"{eq_id}:probe{i}:agree", n, t, apply(diff, f) - sequential)
    return rep


def verify_intertwining(p: AWParams, n: int, t=1, probes: Iterable = DEFAULT_PROBES) -> Report:
    return intertwining_residuals(
        make_H(p, n, t), make_H(p, n + 1, t), raising(p, n, t), lowering(p, n, t), n, t, probes
    )


def verify_boundary(p: AWParams) -> Report:
    """Identities at level ``-1``: F = -B(qz), G = -A, mu = 0 and the first lowering of 1 vanishes."""
    A, B, _ = make_ABK(p)
    F, G = make_FG(p, -1)
    rep = Report()
    rep.add("eq32.F", -1, 1, F + B.q_shift(p.q))
    rep.add("eq32.G", -1, 1, G + A)
    rep.add("eq32.mu", -1, 1, chain_data(p, -1).mu)
    rep.add("eq31", -1, 1, apply(lowering(p, -1), 1))
    return rep


# ---------------------------------------------------------------------------
# raising chains


class _SequenceCache:
    """Write-once per-parameter store of Rodrigues outputs, guarded by a lock."""

    def __init__(self):
        self._lock = threading.Lock()
        self._data: dict[AWParams, list[Laurent]] = {}

    def get(self, p: AWParams, n: int) -> list[Laurent]:
        with self._lock:
            seq = self._data.setdefault(p, [Laurent.const(1)])
            while len(seq) <= n:
                i = len(seq) - 1
                out = apply(raising(p, i), seq[i])
                if not out.is_laurent() or not out.num.is_symmetric():
                    raise AsymmetricIntermediate(
                        f"raising step {i} -> {i + 1} left the symmetric Laurent class: {out!r}"
                    )
                seq.append(out.num)
            return seq[: n + 1]


_RODRIGUES = _SequenceCache()


def rodrigues_laurent(p: AWParams, n: int) -> list[Laurent]:
    """Raised functions ``[Psi_0 = 1, Psi_1, ..., Psi_n]`` as symmetric Laurent polynomials."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _RODRIGUES.get(p, n)


def rodrigues(p: AWParams, n: int) -> ChiPoly:
    """``prod_{i<n} (A E + F(z; i)) 1`` in the chi basis."""
    return laurent_to_chi(rodrigues_laurent(p, n)[n])


def first_raising_closed_form(p: AWParams) -> ChiPoly:
    """``(2 A2/q - 2) chi - b0(0)/2 + (A1 - q A_{-1})/(2q)``, the image of 1 under the first raising step."""
    s = struct_coeffs(p)
    q = p.q
    b0 = chain_data(p, 0).b0
    return ChiPoly([-b0 / 2 + (s.A1 - q * s.Am1) / (2 * q), 2 * s.A2 / q - 2])


def lowering_chain(
    p: AWParams, n_steps: int, start=1, n0: int = 0, t=1
) -> list[RatFun]:
    """Successive lowerings ``Psi_{n0-1-k} = (A E + G(z; n0-1-k)) Psi_{n0-k}`` for ``k < n_steps``."""
    out = []
    f = RatFun.coerce(start)
    for k in range(n_steps):
        f = apply(lowering(p, n0 - 1 - k, t), f)
        out.append(f)
    return out


def verify_eq21(p: AWParams, n: int) -> Report:
    F, _ = make_FG(p, n)
    _, Gprev = make_FG(p, n - 1)
    rec = recurrence_data(p, n)
    rep = Report()
    rep.add("eq21", n, 1, F - Gprev - (RatFun(CHI) * rec.slope + rec.offset))
    return rep


def verify_eq22(p: AWParams) -> Report:
    rep = Report()
    lhs = apply(raising(p, 0), 1)
    rep.add("eq22", 0, 1, lhs - RatFun(first_raising_closed_form(p).to_laurent()))
    return rep


# ---------------------------------------------------------------------------
# recurrences


@dataclass(frozen=True)
class RecurrenceData:
    n: int
    slope: Fraction
    offset: Fraction
    mu_prev: Fraction
    degenerate_slope: bool


def recurrence_data(p: AWParams, n: int, t=1) -> RecurrenceData:
    """Coefficients of ``Psi_{n+1} + mu(n-1) Psi_{n-1} = (slope chi + offset) Psi_n``.

    For ``t != 1`` the slope is ``2 (A2/t) q^(n-1) - 2 t q^-n``; at ``t = 1`` this is
    the undeformed ``2 A2 q^(n-1) - 2 q^-n``.
    """
    t = Fraction(t)
    q = p.q
    A2 = p.abcd
    cur = t_chain_data(p, n, t)
    prev = t_chain_data(p, n - 1, t)
    slope = 2 * A2 / t * q ** (n - 1) - 2 * t * q ** (-n)
    offset = -(cur.b0 + prev.b0) / 2
    return RecurrenceData(n, slope, offset, prev.mu, slope == 0)


def verify_upward_recurrence(p: AWParams, seq: Mapping[int, object] | list, n: int, t=1) -> Report:
    """``Psi_{n+1} + mu(n-1) Psi_{n-1} - (slope chi + offset) Psi_n`` on a raised sequence."""
    rec = recurrence_data(p, n, t)
    lo, mid, hi = (RatFun.coerce(seq[k]) for k in (n - 1, n, n + 1))
    rep = Report()
    rep.add("eq24", n, t, hi + lo * rec.mu_prev - mid * (RatFun(CHI) * rec.slope + rec.offset))
    return rep


def verify_raising_relations(p: AWParams, seq: Mapping[int, object] | list, n: int, t=1) -> Report:
    """Both difference relations linking ``Psi_n`` and ``Psi_{n+1}`` on a raised sequence."""
    lo, hi = RatFun.coerce(seq[n]), RatFun.coerce(seq[n + 1])
    mu = t_chain_data(p, n, t).mu
    rep = Report()
    rep.add("eq23.1", n, t, hi - apply(raising(p, n, t), lo))
    rep.add("eq23.2", n, t, lo * (-mu) - apply(lowering(p, n, t), hi))
    return rep


def downward_sequence(p: AWParams, start, n0: int, n_steps: int, t=1) -> dict[int, RatFun]:
    """``{n0: start, n0-1: ..., n0-n_steps: ...}`` built by repeated lowering."""
    seq = {n0: RatFun.coerce(start)}
    for k, f in enumerate(lowering_chain(p, n_steps, start, n0, t)):
        seq[n0 - 1 - k] = f
    return seq


def verify_downward_relations(p: AWParams, seq: Mapping[int, RatFun], t=1) -> Report:
    """Difference and recurrence relations on a lowered sequence ``{level: function}``."""
    rep = Report()
    levels = sorted(seq)
    top = levels[-1]
    for n in range(top - 1, levels[0] - 1, -1):
        data = t_chain_data(p, n, t)
        rep.add("eq28.1", n, t, seq[n + 1] * (-data.mu) - apply(raising(p, n, t), seq[n]))
        rep.add("eq28.2", n, t, seq[n] - apply(lowering(p, n, t), seq[n + 1]))
        if n - 1 in seq:
            rec = recurrence_data(p, n, t)
            rhs = seq[n] * (RatFun(CHI) * (-rec.slope) - rec.offset)
            rep.add("eq29", n, t, seq[n + 1] * data.mu + seq[n - 1] - rhs)
    return rep


# ---------------------------------------------------------------------------
# the converse: a generic chain as a source of polynomials


@dataclass
class GenericChain:
    """Caller-supplied solution candidate ``(f(z; n), g(z; n), mu(n))`` of the reduced chain system."""

    q: Fraction
    f: Callable[[int], RatFun]
    g: Callable[[int], RatFun]
    mu: Callable[[int], Fraction]
    levels: tuple[int, int] | None = None

    @classmethod
    def from_params(cls, p: AWParams, t=1) -> GenericChain:
        return cls(
            q=p.q,
            f=lambda n: make_FG(p, n, t)[0],
            g=lambda n: make_FG(p, n, t)[1],
            mu=lambda n: t_chain_data(p, n, t).mu,
        )

    @classmethod
    def from_tables(cls, q, f: Mapping[int, RatFun], g: Mapping[int, RatFun], mu: Mapping[int, Fraction]) -> GenericChain:
        keys = set(f) & set(g) & set(mu)
        levels = (min(keys), max(keys)) if keys else None
        return cls(Fraction(q), f.__getitem__, g.__getitem__, mu.__getitem__, levels)

    @classmethod
    def from_json(cls, data: Mapping) -> GenericChain:
        """Load the chain-file layout written by :meth:`to_json`."""
        q = parse_rat(data["q"])
        f = {int(k): RatFun.from_json(v) for k, v in data["f"].items()}
        g = {int(k): RatFun.from_json(v) for k, v in data["g"].items()}
        mu = {int(k): parse_rat(v) for k, v in data["mu"].items()}
        return cls.from_tables(q, f, g, mu)

    def to_json(self, lo: int, hi: int) -> dict:
        levels = range(lo, hi + 1)
        return {
            "q": format_rat(self.q),
            "f": {str(n): self.f(n).to_json() for n in levels},
            "g": {str(n): self.g(n).to_json() for n in levels},
            "mu": {str(n): format_rat(self.mu(n)) for n in levels},
        }

    def perturbed(self, which: str, n: int, delta, power: int = 0) -> GenericChain:
        """Copy with one coefficient moved: ``which`` in {"f", "g"} adds ``delta z^power/(qz - 1/z)``
        at level ``n``; ``which == "mu"`` adds ``delta`` to ``mu(n)``."""
        delta = Fraction(delta)
        if which == "mu":
            mu0 = self.mu
            return dataclasses.replace(self, mu=lambda k: mu0(k) + (delta if k == n else 0))
        bump = RatFun(Laurent({power: delta}), _lattice_den(self.q))
        base = getattr(self, which)
        new = lambda k: base(k) + bump if k == n else base(k)  # noqa: E731
        return dataclasses.replace(self, **{which: new})


def verify_generic_chain(chain: GenericChain, n_range: tuple[int, int]) -> Report:
    """Check a candidate chain: the reduced system, the polynomial-type condition and
    the factorization of the operator assembled from its ``n = -1`` data."""
    lo, hi = n_range
    mu_init = Fraction(chain.mu(-1))
    if mu_init != 0:
        raise InitialConditionViolated(f"mu(-1) must vanish, got {format_rat(mu_init)}")
    q = chain.q
    rep = Report()
    g_init = chain.g(-1)
    f_init = chain.f(-1)
    u = -g_init
    for n in range(lo, hi + 1):
        fn, gn, fn1, gn1 = chain.f(n), chain.g(n), chain.f(n + 1), chain.g(n + 1)
        mun, mun1 = Fraction(chain.mu(n)), Fraction(chain.mu(n + 1))
        rep.add("eq5.1", n, None, fn1.q_shift(q) + gn1 - fn - gn.q_shift(q))
        rep.add("eq5.2", n, None, fn1 * gn1 - fn * gn - mun + mun1)

        rep.add("eq35", n, None, _chi_affine_defect(fn - chain.g(n - 1)))

        def H(fk: RatFun, gk: RatFun) -> QDiffOp:
            inner = QDiffOp(q, {2: g_init.q_shift(q), 1: -(fk.q_shift(q) + gk), 0: f_init})
            return inner.left_mul(g_init)

        up = QDiffOp(q, {1: u, 0: fn})
        down = QDiffOp(q, {1: u, 0: gn})
        d1 = H(fn, gn) - mun - down.compose(up)
        d2 = H(fn1, gn1) - mun - up.compose(down)
        for tag, d in (("eq36.1", d1), ("eq36.2", d2)):
            terms = d.terms.items() or [(0, RatFun.coerce(0))]
            for k, c in terms:
                rep.add(f"{tag}:E^{k}", n, None, c)
    return rep


def _chi_affine_defect(d: RatFun) -> RatFun:
    """Zero iff ``d`` equals ``c0 chi + c1`` for constants; otherwise a nonzero witness."""
    if not d.is_laurent():
        return d
    lp = d.num
    c1 = lp.coeff(0)
    c0 = 2 * lp.coeff(1)
    return d - (RatFun(CHI) * c0 + c1)
