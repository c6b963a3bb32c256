"""Fock space vectors, dual functionals and the fermion operator algebra.

Modes are passed as doubled half-integers (odd ints).  ``psi(t)`` empties
slot t/2; ``psibar(t)`` fills slot -t/2.  Both carry the sign
(-1)^(number of occupied slots above the touched one).

Energies: the L0 eigenvalue of a basis vector is d + p(p+1)/2.  psi_nu lowers
it by nu + 1/2 and psibar_nu lowers it by nu - 1/2.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping

from .errors import CutoffError, TruncationError
from .maya import (
    MayaDiagram,
    VACUUM,
    basis_by_energy,
    charges_up_to_energy,
    enumerate_basis,
)

PSI = "psi"
PSIBAR = "psibar"

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------------------------------------------------------------------------
# single modes on basis diagrams


def psi_on(t: int, m: MayaDiagram):
    """psi_{t/2}|m> as (sign, diagram) or None."""
    if not m.is_occupied(t):
        return None
    sign = -1 if m.count_above(t) & 1 else 1
    return sign, m.without(t)


def psibar_on(t: int, m: MayaDiagram):
    """psibar_{t/2}|m> as (sign, diagram) or None."""
    x = -t
    if m.is_occupied(x):
        return None
    sign = -1 if m.count_above(x) & 1 else 1
    return sign, m.with_(x)


def mode_on(kind: str, t: int, m: MayaDiagram):
    return psi_on(t, m) if kind == PSI else psibar_on(t, m)


def energy_shift(kind: str, t: int) -> int:
    """Change of L0 eigenvalue caused by the mode (twice-index t)."""
    return -(t + 1) // 2 if kind == PSI else -(t - 1) // 2


def charge_shift(kind: str) -> int:
    return -1 if kind == PSI else 1


# Right action on bras: <m| psi_nu = +-<m with slot nu filled|, and
# <m| psibar_nu = +-<m with slot -nu emptied|.  As maps of basis labels this
# is the left action of the opposite mode.


def right_mode_on(kind: str, t: int, m: MayaDiagram):
    """<m|A for a single mode A, as (sign, diagram) or None."""
    return psibar_on(-t, m) if kind == PSI else psi_on(-t, m)


# ---------------------------------------------------------------------------
# vectors


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class FockVector:
    """Finite rational combination of Maya basis vectors."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[MayaDiagram, Fraction] | None = None):
        self.terms: dict[MayaDiagram, Fraction] = {}
        if terms:
            for k, c in terms.items():
                if c:
                    self.terms[k] = _frac(c)

    @classmethod
    def basis(cls, m: MayaDiagram, c=ONE) -> "FockVector":
        return cls({m: c})

    @classmethod
    def vacuum(cls) -> "FockVector":
        return cls({VACUUM: ONE})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, FockVector) and self.terms == other.terms

    def __add__(self, other: "FockVector") -> "FockVector":
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, ZERO) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        r = FockVector()
        r.terms = out
        return r

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "FockVector":
        c = _frac(c)
        r = FockVector()
        if c:
            r.terms = {k: v * c for k, v in self.terms.items()}
        return r

    def __rmul__(self, c):
        return self.scale(c)

    def items(self):
        return self.terms.items()

    def charge_parts(self) -> dict[int, "FockVector"]:
        out: dict[int, dict] = {}
        for k, c in self.terms.items():
            out.setdefault(k.charge, {})[k] = c
        return {p: FockVector(t) for p, t in sorted(out.items())}

    def max_energy(self) -> int:
        return max((k.energy for k in self.terms), default=-1)

    def __repr__(self):
        return "FockVector(" + ", ".join(f"{c}*{k!r}" for k, c in sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())) + ")"

    def to_json(self):
        return [
            {"maya": k.to_json(), "coeff": frac_str(c)}
            for k, c in sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())
        ]


def frac_str(c: Fraction) -> str:
    c = _frac(c)
    return f"{c.numerator}/{c.denominator}"


def parse_frac(s) -> Fraction:
    return Fraction(str(s))


def _accumulate(out: dict, key, c):
    v = out.get(key, ZERO) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


class TensorVector:
    """Finite rational combination of tuples of Maya diagrams."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: Mapping[tuple, Fraction] | None = None):
        self.arity = arity
        self.terms: dict[tuple, Fraction] = {}
        if terms:
            for k, c in terms.items():
                if len(k) != arity:
                    raise ValueError("tuple length does not match arity")
                if c:
                    self.terms[tuple(k)] = _frac(c)

    @classmethod
    def basis(cls, key: tuple, c=ONE) -> "TensorVector":
        return cls(len(key), {tuple(key): c})

    @classmethod
    def tensor(cls, *vectors: FockVector) -> "TensorVector":
        terms: dict[tuple, Fraction] = {(): ONE}
        for v in vectors:
            new = {}
            for k, c in terms.items():
                for m, d in v.items():
                    new[k + (m,)] = c * d
            terms = new
        return cls(len(vectors), terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, TensorVector) and self.arity == other.arity and self.terms == other.terms

    def __add__(self, other: "TensorVector") -> "TensorVector":
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        out = dict(self.terms)
        for k, c in other.terms.items():
            _accumulate(out, k, c)
        r = TensorVector(self.arity)
        r.terms = out
        return r

    def scale(self, c) -> "TensorVector":
        c = _frac(c)
        r = TensorVector(self.arity)
        if c:
            r.terms = {k: v * c for k, v in self.terms.items()}
        return r

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def items(self):
        return self.terms.items()

    def max_energy(self) -> int:
        return max((sum(m.energy for m in k) for k in self.terms), default=-1)

    def __repr__(self):
        return f"TensorVector({self.arity}, {self.terms!r})"


def tuple_energy(key: tuple) -> int:
    return sum(m.energy for m in key)


def tuple_charge(key: tuple) -> int:
    return sum(m.charge for m in key)


# ---------------------------------------------------------------------------
# dual functionals


class DualFunctional:
    """A linear functional on N-fold tensors, exact on tuples of total energy <= cutoff.

    ``values`` is sparse: any tuple within the cutoff that is not stored has
    value 0.  ``cutoff = math.inf`` marks a functional that is known exactly
    everywhere (e.g. a single bra).
    """

    __slots__ = ("arity", "cutoff", "values")

    def __init__(self, arity: int, cutoff, values: Mapping[tuple, Fraction] | None = None):
        self.arity = arity
        self.cutoff = cutoff
        self.values: dict[tuple, Fraction] = {}
        if values:
            for k, c in values.items():
                k = tuple(k)
                if len(k) != arity:
                    raise ValueError("tuple length does not match arity")
                if tuple_energy(k) > cutoff:
                    continue
                if c:
                    self.values[k] = _frac(c)

    @classmethod
    def bra(cls, *diagrams: MayaDiagram) -> "DualFunctional":
        return cls(len(diagrams), math.inf, {tuple(diagrams): ONE})

    def __call__(self, key: tuple) -> Fraction:
        if tuple_energy(key) > self.cutoff:
            raise CutoffError(f"tuple of energy {tuple_energy(key)} outside cutoff {self.cutoff}", tuple_energy(key))
        return self.values.get(key, ZERO)

    def value(self, key: tuple) -> Fraction:
        return self(key)

    def pair(self, t: TensorVector) -> Fraction:
        return pair(self, t)

    def __eq__(self, other):
        return (
            isinstance(other, DualFunctional)
            and self.arity == other.arity
            and self.cutoff == other.cutoff
            and self.values == other.values
        )

    def scale(self, c) -> "DualFunctional":
        c = _frac(c)
        return DualFunctional(self.arity, self.cutoff, {k: v * c for k, v in self.values.items()})

    def __add__(self, other: "DualFunctional") -> "DualFunctional":
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        cut = min(self.cutoff, other.cutoff)
        out = {k: v for k, v in self.values.items() if tuple_energy(k) <= cut}
        for k, c in other.values.items():
            if tuple_energy(k) <= cut:
                _accumulate(out, k, c)
        return DualFunctional(self.arity, cut, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def restrict(self, cutoff) -> "DualFunctional":
        if cutoff > self.cutoff:
            raise CutoffError("cannot raise the cutoff of a functional")
        return DualFunctional(self.arity, cutoff, self.values)

    def equal_within(self, other: "DualFunctional", cutoff=None) -> bool:
        cut = min(self.cutoff, other.cutoff) if cutoff is None else cutoff
        a = {k: v for k, v in self.values.items() if tuple_energy(k) <= cut}
        b = {k: v for k, v in other.values.items() if tuple_energy(k) <= cut}
        return a == b

    def normalized(self) -> "DualFunctional":
        """Scale so the first nonzero value in canonical tuple order is 1."""
        if not self.values:
            return self
        first = min(self.values, key=tuple_sort_key)
        return self.scale(1 / self.values[first])

    def support_charges(self) -> set:
        return {tuple(m.charge for m in k) for k in self.values}

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "cutoff": None if self.cutoff == math.inf else self.cutoff,
            "values": [
                {"slots": [m.to_json() for m in k], "value": frac_str(v)}
                for k, v in sorted(self.values.items(), key=lambda kv: tuple_sort_key(kv[0]))
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "DualFunctional":
        cutoff = math.inf if obj.get("cutoff") is None else int(obj["cutoff"])
        values = {
            tuple(MayaDiagram.from_json(s) for s in e["slots"]): parse_frac(e["value"])
            for e in obj["values"]
        }
        return cls(int(obj["arity"]), cutoff, values)

    def __repr__(self):
        return f"DualFunctional(arity={self.arity}, cutoff={self.cutoff}, nonzero={len(self.values)})"


def tuple_sort_key(key: tuple):
    return (tuple_energy(key), tuple(m.sort_key() for m in key))


def pair(phi: DualFunctional, t: TensorVector) -> Fraction:
    """<phi|t>; raises CutoffError when t reaches beyond phi's cutoff."""
    if t.arity != phi.arity:
        raise ValueError("arity mismatch")
    total = ZERO
    for k, c in t.terms.items():
        total += c * phi(k)
    return total


# ---------------------------------------------------------------------------
# fermion actions


def apply_fermion_left(kind: str, t: int, v: FockVector) -> FockVector:
    out: dict = {}
    for m, c in v.terms.items():
        r = mode_on(kind, t, m)
        if r is not None:
            s, m2 = r
            _accumulate(out, m2, c if s > 0 else -c)
    w = FockVector()
    w.terms = out
    return w


def apply_fermion_right(kind: str, t: int, phi: DualFunctional, slot: int = 1) -> DualFunctional:
    """(phi . rho_slot(A))(w) = phi(rho_slot(A) w) for a single mode A.

    The result is exact up to cutoff - shift, where shift is the energy the
    mode adds to a ket.
    """
    shift = energy_shift(kind, t)
    new_cut = phi.cutoff - shift
    if new_cut < 0:
        raise CutoffError("shifted cutoff would be negative; raise the truncation")
    j = slot - 1
    out = {}
    for key, val in phi.values.items():
        # find w with A w_j = +- key_j
        r = right_mode_on(kind, t, key[j])
        if r is None:
            continue
        s, mj = r
        w = key[:j] + (mj,) + key[j + 1:]
        if tuple_energy(w) > new_cut:
            continue
        prefix = sum(m.charge for m in key[:j])
        if prefix & 1:
            s = -s
        out[w] = val if s > 0 else -val
    return DualFunctional(phi.arity, new_cut, out)


def apply_fermion(side: str, kind: str, mode, v, slot: int = 1):
    """Apply a single fermion mode on the left of a ket or the right of a bra."""
    from .maya import to_twice

    t = mode if isinstance(mode, int) else to_twice(mode)
    if side == "left":
        if not isinstance(v, FockVector):
            raise TypeError("left action needs a FockVector")
        return apply_fermion_left(kind, t, v)
    if side == "right":
        if not isinstance(v, DualFunctional):
            raise TypeError("right action needs a DualFunctional")
        return apply_fermion_right(kind, t, v, slot)
    raise ValueError("side must be 'left' or 'right'")


# ---------------------------------------------------------------------------
# operators with parity, and the slot actions rho_j


class Operator:
    """Linear operator on the Fock space with a Z/2 parity."""

    parity = 0

    def on_basis(self, m: MayaDiagram) -> Iterable[tuple[MayaDiagram, Fraction]]:
        raise NotImplementedError

    def apply(self, v: FockVector) -> FockVector:
        out: dict = {}
        for m, c in v.terms.items():
            for m2, d in self.on_basis(m):
                _accumulate(out, m2, c * d)
        w = FockVector()
        w.terms = out
        return w

    def __call__(self, v: FockVector) -> FockVector:
        return self.apply(v)


class ModeOperator(Operator):
    """sum_t c_t A_{t/2} for A = psi or psibar (odd).

    ``bound`` is the first twice-mode whose coefficient is unknown (modes
    at or above it come from beyond a series truncation).  Applying the
    operator raises TruncationError if such a mode could act nontrivially.
    """

    parity = 1

    def __init__(self, kind: str, coeffs: Mapping[int, Fraction], bound=math.inf):
        if kind not in (PSI, PSIBAR):
            raise ValueError("kind must be psi or psibar")
        self.kind = kind
        self.coeffs = {t: _frac(c) for t, c in coeffs.items() if c}
        for t in self.coeffs:
            if t % 2 == 0:
                raise ValueError("modes must be half-integers (odd twice-values)")
            if t >= bound:
                raise ValueError("coefficient stored at or above the truncation bound")
        self.bound = bound
        self._sorted = sorted(self.coeffs.items())

    def check(self, m: MayaDiagram):
        if self.bound == math.inf:
            return
        if self.kind == PSI:
            top = m.max_particle()
            if top is not None and top >= self.bound:
                raise TruncationError(
                    f"psi-smear known below mode {self.bound}/2 but the state has a particle at {top}/2"
                )
        else:
            low = m.min_hole()
            if low is not None and -low >= self.bound:
                raise TruncationError(
                    f"psibar-smear known below mode {self.bound}/2 but the state has a hole at {low}/2"
                )

    def on_basis(self, m: MayaDiagram):
        self.check(m)
        out = []
        kind = self.kind
        for t, c in self._sorted:
            r = psi_on(t, m) if kind == PSI else psibar_on(t, m)
            if r is not None:
                s, m2 = r
                out.append((m2, c if s > 0 else -c))
        return out

    def max_energy_raise(self) -> int:
        return max((energy_shift(self.kind, t) for t in self.coeffs), default=0)

    def __add__(self, other: "ModeOperator") -> "ModeOperator":
        if other.kind != self.kind:
            raise ValueError("cannot add psi and psibar smears")
        c = dict(self.coeffs)
        for t, v in other.coeffs.items():
            c[t] = c.get(t, ZERO) + v
        b = min(self.bound, other.bound)
        return ModeOperator(self.kind, {t: v for t, v in c.items() if t < b}, b)

    def scale(self, a) -> "ModeOperator":
        return ModeOperator(self.kind, {t: v * a for t, v in self.coeffs.items()}, self.bound)

    def __repr__(self):
        return f"ModeOperator({self.kind}, {self.coeffs}, bound={self.bound})"


class EvenOperator(Operator):
    """Even operator given by its action on basis vectors."""

    parity = 0

    def __init__(self, fn: Callable[[MayaDiagram], Iterable[tuple[MayaDiagram, Fraction]]], name: str = ""):
        self.fn = fn
        self.name = name

    def on_basis(self, m):
        return self.fn(m)


def single_mode(kind: str, t: int) -> ModeOperator:
    return ModeOperator(kind, {t: ONE})


def apply_rho(j: int, op: Operator, t: TensorVector) -> TensorVector:
    """rho_j(op): act in slot j (1-based) with the Koszul sign of the prefix charges."""
    if not 1 <= j <= t.arity:
        raise ValueError(f"slot {j} out of range for arity {t.arity}")
    i = j - 1
    out: dict = {}
    for key, c in t.terms.items():
        if op.parity and sum(m.charge for m in key[:i]) & 1:
            c = -c
        for m2, d in op.on_basis(key[i]):
            _accumulate(out, key[:i] + (m2,) + key[i + 1:], c * d)
    r = TensorVector(t.arity)
    r.terms = out
    return r


def apply_rho_key(j: int, op: Operator, key: tuple) -> list[tuple[tuple, Fraction]]:
    """rho_j(op) on a single basis tuple, as a list of (tuple, coefficient)."""
    i = j - 1
    sign = -1 if op.parity and sum(m.charge for m in key[:i]) & 1 else 1
    return [(key[:i] + (m2,) + key[i + 1:], d if sign > 0 else -d) for m2, d in op.on_basis(key[i])]


def dual_rho(j: int, op: Operator, phi: DualFunctional, candidates: Iterable[tuple], new_cutoff) -> DualFunctional:
    """(phi . rho_j(op)) evaluated on the supplied candidate tuples."""
    out = {}
    for key in candidates:
        val = ZERO
        for k2, d in apply_rho_key(j, op, key):
            val += d * phi(k2)
        if val:
            out[key] = val
    return DualFunctional(phi.arity, new_cutoff, out)


# ---------------------------------------------------------------------------
# normal ordering, current and Virasoro modes


def _apply_word(word, m: MayaDiagram):
    """Apply word = [(kind, t), ...] right-to-left to |m>; returns (sign, m') or None."""
    s = 1
    for kind, t in reversed(word):
        r = mode_on(kind, t, m)
        if r is None:
            return None
        s *= r[0]
        m = r[1]
    return s, m


def normal_ordered(a: tuple[str, int], b: tuple[str, int], m: MayaDiagram):
    """:A B: |m> for single modes A=(kind, t), B=(kind, t).

    The product is reversed with a sign when B is a negative mode and A a
    positive one (annihilator to the right).
    """
    (ka, ta), (kb, tb) = a, b
    if tb < 0 and ta > 0:
        r = _apply_word([b, a], m)
        return None if r is None else (-r[0], r[1])
    return _apply_word([a, b], m)


def _mode_window(m: MayaDiagram, n: int) -> range:
    low = min(m.min_hole() or -1, -1) - 2 * abs(n) - 4
    high = max(m.max_particle() or 1, 1) + 2 * abs(n) + 4
    return range(low, high + 1, 2)


@lru_cache(maxsize=200000)
def current_on(n: int, m: MayaDiagram) -> tuple:
    """J_n|m> = sum_{lam+mu=n} :psibar_lam psi_mu: |m>."""
    out: dict = {}
    for tm in _mode_window(m, n):
        tl = 2 * n - tm
        r = normal_ordered((PSIBAR, tl), (PSI, tm), m)
        if r is not None:
            _accumulate(out, r[1], Fraction(r[0]))
    return tuple(out.items())


@lru_cache(maxsize=400000)
def virasoro_on(j: Fraction, n: int, m: MayaDiagram) -> tuple:
    """L_n^(j)|m> = sum_{mu+lam=n} [(1-j)(-mu-1/2) - j(-lam-1/2)] :psi_mu psibar_lam: |m>."""
    j = Fraction(j)
    out: dict = {}
    for tm in _mode_window(m, n):
        tl = 2 * n - tm
        coef = (1 - j) * Fraction(-tm - 1, 2) - j * Fraction(-tl - 1, 2)
        if not coef:
            continue
        r = normal_ordered((PSI, tm), (PSIBAR, tl), m)
        if r is not None:
            _accumulate(out, r[1], coef * r[0])
    return tuple(out.items())


def current_op(n: int) -> EvenOperator:
    return EvenOperator(lambda m: current_on(n, m), f"J_{n}")


def virasoro_op(n: int, j=0) -> EvenOperator:
    jj = Fraction(j)
    return EvenOperator(lambda m: virasoro_on(jj, n, m), f"L_{n}")


def apply_current(n: int, v: FockVector) -> FockVector:
    return current_op(n).apply(v)


def apply_virasoro(j, n: int, v: FockVector) -> FockVector:
    return virasoro_op(n, j).apply(v)


# ---------------------------------------------------------------------------
# smeared operators


def smear(kind: str, s, as_: str | None = None) -> ModeOperator:
    """psi[omega] for a form omega = s(xi) dxi, or psibar[f] for a function f = s(xi).

    omega = sum a_n xi^n dxi -> sum a_n psi_{n+1/2};
    f = sum b_m xi^m -> sum b_m psibar_{m+1/2}.
    """
    if as_ is None:
        as_ = "form" if kind == PSI else "function"
    if (kind, as_) not in ((PSI, "form"), (PSIBAR, "function")):
        raise ValueError("psi smears a one-form and psibar smears a function")
    coeffs = {2 * n + 1: c for n, c in s.coeffs.items()}
    bound = math.inf if s.trunc == math.inf else 2 * s.trunc + 1
    return ModeOperator(kind, coeffs, bound)


class TOperator(Operator):
    """T[l] = sum_n l_{n+1} L_n for a vector field l(xi) d/dxi (even)."""

    parity = 0

    def __init__(self, field):
        self.field = field

    def on_basis(self, m: MayaDiagram):
        e = m.energy
        f = self.field
        if f.trunc != math.inf and f.trunc <= e + 1:
            raise TruncationError(f"vector field known below xi^{f.trunc}, need beyond xi^{e + 1}")
        out: dict = {}
        for k, c in f.coeffs.items():
            n = k - 1
            if n > e:
                continue
            for m2, d in virasoro_on(ZERO, n, m):
                _accumulate(out, m2, c * d)
        return list(out.items())


def apply_T(field, v: FockVector) -> FockVector:
    return TOperator(field).apply(v)


# ---------------------------------------------------------------------------
# commutators of operators (used by property suites)


def commutator(a: Operator, b: Operator, v: FockVector, anti: bool = False) -> FockVector:
    ab = a.apply(b.apply(v))
    ba = b.apply(a.apply(v))
    return ab + ba if anti else ab - ba


def basis_window(max_degree: int, charges: Iterable[int]) -> Iterator[MayaDiagram]:
    for p in charges:
        for d in range(max_degree + 1):
            yield from enumerate_basis(p, d)


def energy_window(max_energy: int, charges: Iterable[int] | None = None) -> list[MayaDiagram]:
    out = []
    for e in range(max_energy + 1):
        out.extend(basis_by_energy(e, charges))
    return out


__all__ = [
    "PSI",
    "PSIBAR",
    "FockVector",
    "TensorVector",
    "DualFunctional",
    "ModeOperator",
    "EvenOperator",
    "TOperator",
    "TruncationError",
    "CutoffError",
    "apply_fermion",
    "apply_rho",
    "apply_current",
    "apply_virasoro",
    "apply_T",
    "smear",
    "pair",
    "charges_up_to_energy",
]
