"""Truncated formal Laurent series with exact rational coefficients.

A series stores its known coefficients below ``trunc``; everything at or
above ``trunc`` is unknown.  ``trunc = math.inf`` marks an exact Laurent
polynomial.  Every operation returns the tightest truncation it can prove.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Generic, Mapping, TypeVar

from .errors import TruncationError

INF = math.inf


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class LaurentSeries:
    __slots__ = ("coeffs", "trunc")

    def __init__(self, coeffs: Mapping[int, Fraction] | None = None, trunc=INF):
        self.trunc = trunc
        self.coeffs: dict[int, Fraction] = {}
        if coeffs:
            for k, c in coeffs.items():
                if c and k < trunc:
                    self.coeffs[int(k)] = _frac(c)

    # -- constructors -------------------------------------------------------
    @classmethod
    def monomial(cls, k: int, c=1, trunc=INF) -> "LaurentSeries":
        return cls({k: c}, trunc)

    @classmethod
    def from_list(cls, coeffs, start: int = 0, trunc=INF) -> "LaurentSeries":
        return cls({start + i: c for i, c in enumerate(coeffs)}, trunc)

    @classmethod
    def zero(cls, trunc=INF) -> "LaurentSeries":
        return cls({}, trunc)

    @classmethod
    def one(cls) -> "LaurentSeries":
        return cls({0: 1})

    @classmethod
    def xi(cls) -> "LaurentSeries":
        return cls({1: 1})

    # -- basic queries ---------------------------------------------------------
    @property
    def ord(self):
        """Lowest exponent with a nonzero coefficient (trunc if none is known)."""
        return min(self.coeffs) if self.coeffs else self.trunc

    def coeff(self, k: int) -> Fraction:
        if k >= self.trunc:
            raise TruncationError(f"coefficient of xi^{k} unknown (trunc {self.trunc})")
        return self.coeffs.get(k, Fraction(0))

    def __getitem__(self, k: int) -> Fraction:
        return self.coeff(k)

    def is_exact(self) -> bool:
        return self.trunc == INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def truncate(self, trunc) -> "LaurentSeries":
        return LaurentSeries(self.coeffs, min(trunc, self.trunc))

    def principal_part(self) -> "LaurentSeries":
        return LaurentSeries({k: c for k, c in self.coeffs.items() if k < 0})

    def regular_part(self) -> "LaurentSeries":
        return LaurentSeries({k: c for k, c in self.coeffs.items() if k >= 0}, self.trunc)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self.trunc == other.trunc and self.coeffs == other.coeffs

    def agrees(self, other: "LaurentSeries", below=None) -> bool:
        """Coefficients agree below min(trunc, trunc, below)."""
        b = min(self.trunc, other.trunc, INF if below is None else below)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeffs.get(k, 0) == other.coeffs.get(k, 0) for k in keys if k < b)

    def __repr__(self) -> str:
        terms = " + ".join(f"({c})x^{k}" for k, c in sorted(self.coeffs.items())) or "0"
        tail = "" if self.trunc == INF else f" + O(x^{self.trunc})"
        return f"LaurentSeries({terms}{tail})"

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries({0: other})
        t = min(self.trunc, other.trunc)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return LaurentSeries(out, t)

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries({k: -c for k, c in self.coeffs.items()}, self.trunc)

    def __sub__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries({0: other})
        return self + (-other)

    def __rsub__(self, other) -> "LaurentSeries":
        return (-self) + other

    def scale(self, c) -> "LaurentSeries":
        c = _frac(c)
        return LaurentSeries({k: v * c for k, v in self.coeffs.items()}, self.trunc)

    def __mul__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return self.scale(other)
        a, b = self.ord, other.ord
        t = min(self.trunc + b, other.trunc + a)
        out: dict[int, Fraction] = {}
        for i, c in self.coeffs.items():
            for j, d in other.coeffs.items():
                k = i + j
                if k < t:
                    out[k] = out.get(k, 0) + c * d
        return LaurentSeries(out, t)

    def __rmul__(self, c) -> "LaurentSeries":
        return self.scale(c)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by xi^k."""
        return LaurentSeries({e + k: c for e, c in self.coeffs.items()}, self.trunc + k)

    def inverse(self) -> "LaurentSeries":
        """1/f for f with a known nonzero leading coefficient."""
        if self.is_zero():
            raise ZeroDivisionError("series has no known nonzero coefficient")
        a = self.ord
        lead = self.coeffs[a]
        if self.trunc == INF and len(self.coeffs) == 1:
            return LaurentSeries({-a: 1 / lead})
        # f = lead xi^a (1 + u), u known below trunc - a
        n = self.trunc - a  # number of known coefficients of the unit part
        if n == INF:
            raise TruncationError("inverse of a non-monomial exact series needs a truncation order")
        unit = [self.coeffs.get(a + i, Fraction(0)) / lead for i in range(n)]
        inv = [Fraction(0)] * n
        inv[0] = Fraction(1)
        for k in range(1, n):
            s = Fraction(0)
            for i in range(1, k + 1):
                if unit[i]:
                    s += unit[i] * inv[k - i]
            inv[k] = -s
        return LaurentSeries({-a + i: c / lead for i, c in enumerate(inv)}, n - a)

    def inverse_to(self, order: int) -> "LaurentSeries":
        """1/f computed below xi^order (exact input allowed)."""
        a = self.ord
        src = self.truncate(order + 2 * a) if self.trunc == INF else self
        return src.inverse().truncate(order)

    def __truediv__(self, other) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            return self * other.inverse()
        return self.scale(1 / _frac(other))

    def __pow__(self, n: int) -> "LaurentSeries":
        if n < 0:
            return self.inverse() ** (-n)
        out = LaurentSeries.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- calculus ---------------------------------------------------------------
    def derivative(self) -> "LaurentSeries":
        return LaurentSeries({k - 1: k * c for k, c in self.coeffs.items() if k}, self.trunc - 1)

    def residue(self) -> Fraction:
        return self.coeff(-1)

    # -- composition ------------------------------------------------------------
    def compose(self, h: "LaurentSeries") -> "LaurentSeries":
        return compose(self, h)

    def to_json(self) -> dict:
        return {
            "ord": None if self.ord == INF else self.ord,
            "trunc": None if self.trunc == INF else self.trunc,
            "coeffs": {str(k): f"{c.numerator}/{c.denominator}" for k, c in sorted(self.coeffs.items())},
        }

    @classmethod
    def from_json(cls, obj) -> "LaurentSeries":
        trunc = INF if obj.get("trunc") is None else int(obj["trunc"])
        return cls({int(k): Fraction(str(v)) for k, v in obj.get("coeffs", {}).items()}, trunc)




# ---------------------------------------------------------------------------


def residue(s: LaurentSeries) -> Fraction:
    return s.residue()


def compose(f: LaurentSeries, h: LaurentSeries) -> LaurentSeries:
    """f(h(xi)) for h with h(0) = 0 and a nonzero linear coefficient.

    Negative powers of f are allowed.  If h is known below xi^T then
    h^n is known below xi^(n + T - 1); the result truncation follows.
    """
    if h.ord != 1:
        raise ValueError("inner series must be a xi + ... with a != 0")
    F = f.trunc
    if f.is_zero():
        return LaurentSeries({}, F)
    lo = f.ord
    if h.trunc == INF:
        monomial = len(h.coeffs) == 1
        if F == INF and lo < 0 and not monomial:
            raise TruncationError("composing a pole with an exact series needs a truncation order")
        if F != INF:
            h = h.truncate(F - lo + 1)
    cap = F
    result = LaurentSeries({}, F)
    pos = [k for k in f.coeffs if k >= 0]
    if pos:
        p = LaurentSeries.one()
        for k in range(0, max(pos) + 1):
            c = f.coeffs.get(k)
            if c:
                result = result + p.scale(c)
            p = (p * h).truncate(cap)
    neg = [k for k in f.coeffs if k < 0]
    if neg:
        hinv = h.inverse()
        p = hinv.truncate(cap + 1)
        for k in range(-1, min(neg) - 1, -1):
            c = f.coeffs.get(k)
            if c:
                result = result + p.scale(c)
            p = (p * hinv).truncate(cap + 1)
    return result


def comp_inverse(h: LaurentSeries, order: int) -> LaurentSeries:
    """k with k(h(xi)) = xi below xi^order."""
    if h.ord != 1:
        raise ValueError("need h = a xi + ..., a != 0")
    a = h.coeffs[1]
    hh = h.truncate(order)
    # Newton-free iteration: k_{n} fixed degree by degree
    k = LaurentSeries({1: 1 / a}, order)
    for deg in range(2, order):
        err = compose(k, hh)  # should be xi
        c = err.coeffs.get(deg, Fraction(0))
        if c:
            k = k + LaurentSeries({deg: -c / a ** deg}, order)
    return k


def exp_derivation(field: LaurentSeries, f: LaurentSeries, order: int) -> LaurentSeries:
    """sum_k (1/k!) l^k(f) below xi^order for l = field(xi) d/dxi with ord(field) >= 2."""
    if field.is_zero():
        return f.truncate(order)
    if field.ord < 2:
        raise ValueError("exp of a derivation with a linear part does not terminate; factor out the scaling")
    term = f.truncate(order)
    total = term
    k = 1
    while not term.is_zero():
        term = (field.truncate(order + 2) * term.derivative()).truncate(order).scale(Fraction(1, k))
        total = total + term
        k += 1
    return total


def log_coordinate(h: LaurentSeries, order: int) -> LaurentSeries:
    """The vector field l in d^1 with exp(l)(xi) = h below xi^order (h = xi + ...)."""
    if h.ord != 1 or h.coeffs[1] != 1:
        raise ValueError("log is defined on xi + a xi^2 + ...")
    xi = LaurentSeries.xi()
    field = LaurentSeries.zero()
    for deg in range(2, order):
        cur = exp_derivation(field, xi, order)
        c = h.coeff(deg) - cur.coeffs.get(deg, Fraction(0))
        if c:
            field = field + LaurentSeries({deg: c})
    return field.truncate(order)


def schwarzian(h: LaurentSeries, order: int) -> LaurentSeries:
    """h'''/h' - (3/2)(h''/h')^2 below xi^order."""
    hh = h.truncate(order + 4) if h.trunc == INF else h
    d1 = hh.derivative()
    if d1.coeffs.get(0, 0) == 0:
        raise ValueError("Schwarzian needs h'(0) != 0")
    d2 = d1.derivative()
    d3 = d2.derivative()
    inv = d1.inverse()
    r = d2 * inv
    s = d3 * inv - (r * r).scale(Fraction(3, 2))
    if s.trunc < order:
        raise TruncationError(f"Schwarzian known only below xi^{s.trunc}")
    return s.truncate(order)


def pullback_form(f: LaurentSeries, h: LaurentSeries) -> LaurentSeries:
    """Coefficient of h*(f(xi)dxi) = f(h(xi)) h'(xi) dxi."""
    return compose(f, h) * h.derivative()


def pullback_field(l: LaurentSeries, h: LaurentSeries, order: int) -> LaurentSeries:
    """l(h(xi)) / h'(xi): the vector field l(eta)d/deta written in xi where eta = h(xi)."""
    hh = h.truncate(order + 2) if h.trunc == INF else h
    return (compose(l, hh) * hh.derivative().inverse()).truncate(order)


# ---------------------------------------------------------------------------
# bidifferentials and q-series


class BiDiffLocal:
    """omega(w,z) = dw dz/(w-z)^2 + sum c_ij w^i z^j dw dz near the diagonal."""

    def __init__(self, regular: Mapping[tuple[int, int], Fraction] | None = None, trunc=INF):
        self.trunc = trunc
        self.regular = {(int(i), int(j)): _frac(c) for (i, j), c in (regular or {}).items() if c and i + j < trunc}

    def to_json(self):
        return {
            "trunc": None if self.trunc == INF else self.trunc,
            "regular": {f"{i},{j}": f"{c.numerator}/{c.denominator}" for (i, j), c in sorted(self.regular.items())},
        }


def projective_connection(b: BiDiffLocal, order: int) -> LaurentSeries:
    """S(z) = 6 sum_{i+j=k} c_ij z^k below z^order."""
    if b.trunc < order:
        raise TruncationError("bidifferential data does not reach the requested order")
    out: dict[int, Fraction] = {}
    for (i, j), c in b.regular.items():
        if i + j < order:
            out[i + j] = out.get(i + j, 0) + 6 * c
    return LaurentSeries(out, order)


def central_charge_term(fields: list[LaurentSeries], connections: list[LaurentSeries]) -> Fraction:
    """b(l) = sum_j Res(l_j S_j dxi_j)."""
    total = Fraction(0)
    for l, s in zip(fields, connections):
        total += (l * s).residue()
    return total


V = TypeVar("V")


class QSeries(Generic[V]):
    """Truncated power series in q with coefficients in a vector space."""

    def __init__(self, coeffs: Mapping[int, V], trunc: int):
        self.coeffs = {k: v for k, v in coeffs.items() if k < trunc}
        self.trunc = trunc

    def __getitem__(self, k: int) -> V:
        if k >= self.trunc:
            raise TruncationError(f"q^{k} is beyond the truncation q^{self.trunc}")
        return self.coeffs[k]

    def map(self, fn: Callable[[V], object]) -> "QSeries":
        return QSeries({k: fn(v) for k, v in self.coeffs.items()}, self.trunc)

    def q_derivative(self, scale: Callable[[V, int], V]) -> "QSeries":
        """q d/dq, with ``scale(v, k)`` returning k * v."""
        return QSeries({k: scale(v, k) for k, v in self.coeffs.items()}, self.trunc)
