"""Formal coordinate changes, their Fock-space lift G[h], covariance checks
and preferred elements of the vacuum line."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .errors import TruncationError
from .fock import (
    PSI,
    PSIBAR,
    DualFunctional,
    FockVector,
    Operator,
    TOperator,
    apply_rho_key,
    energy_window,
    frac_str,
    parse_frac,
    smear,
    tuple_charge,
)
from .laurent import (
    INF,
    LaurentSeries,
    comp_inverse,
    compose,
    exp_derivation,
    log_coordinate,
    pullback_field,
    pullback_form,
    schwarzian,
)
from .maya import MayaDiagram, basis_by_energy


class CoordChange:
    """h(xi) = a0 xi + a1 xi^2 + ... with a0 != 0.

    Factored as h = a0 * h1 with h1 = xi + ... (so h = (a0 xi) o h1).
    """

    def __init__(self, series: LaurentSeries):
        if series.ord != 1:
            raise ValueError("a coordinate change needs a nonzero linear coefficient and h(0) = 0")
        if any(k < 1 for k in series.coeffs):
            raise ValueError("a coordinate change is a power series without constant term")
        self.series = series

    @classmethod
    def identity(cls) -> "CoordChange":
        return cls(LaurentSeries.xi())

    @classmethod
    def scaling(cls, a) -> "CoordChange":
        return cls(LaurentSeries({1: a}))

    @classmethod
    def from_coeffs(cls, coeffs, trunc=INF) -> "CoordChange":
        """coeffs[i] is the coefficient of xi^(i+1)."""
        return cls(LaurentSeries({i + 1: c for i, c in enumerate(coeffs)}, trunc))

    @property
    def leading(self) -> Fraction:
        return self.series.coeffs[1]

    @property
    def unipotent(self) -> LaurentSeries:
        """h1 = h / a0."""
        return self.series.scale(1 / self.leading)

    def is_identity(self) -> bool:
        return self.series.coeffs == {1: 1}

    def inverse(self, order: int) -> LaurentSeries:
        return comp_inverse(self.series, order)

    def then(self, outer: "CoordChange") -> "CoordChange":
        """outer o self (first apply self, then outer)."""
        s = self.series
        o = outer.series
        if s.trunc == INF and o.trunc == INF and len(s.coeffs) == 1:
            a = s.coeffs[1]
            return CoordChange(LaurentSeries({k: c * a ** k for k, c in o.coeffs.items()}))
        return CoordChange(compose(o, s))

    def __eq__(self, other):
        return isinstance(other, CoordChange) and self.series == other.series

    def __repr__(self):
        return f"CoordChange({self.series!r})"

    def to_json(self):
        return self.series.to_json()

    @classmethod
    def from_json(cls, obj) -> "CoordChange":
        if isinstance(obj, list):
            return cls.from_coeffs([Fraction(str(c)) for c in obj])
        return cls(LaurentSeries.from_json(obj))


# ---------------------------------------------------------------------------
# exponential and logarithm


def exp_field(field: LaurentSeries, order: int, scale=1) -> CoordChange:
    """exp(l)(xi) below xi^order, for l in d^1, post-composed with xi -> scale*xi.

    A linear part a*xi*d/dxi would exponentiate to e^a, which is not
    rational; the scaling is passed separately instead.
    """
    xi = LaurentSeries.xi()
    h1 = exp_derivation(field, xi, order)
    return CoordChange(h1.scale(Fraction(scale)))


def log_change(h: CoordChange, order: int) -> tuple[Fraction, LaurentSeries]:
    """(a0, l1) with h = a0 * exp(l1)(xi) and l1 in d^1."""
    return h.leading, log_coordinate(h.unipotent, order)


# ---------------------------------------------------------------------------
# G[h] = G[a0 xi] exp(-T[l1]) on the Fock space


class GOperator(Operator):
    """G[h] = exp(-T[l1]) a0^(-L0) (or its inverse) on basis vectors; even,
    energy non-increasing.  The scaling acts first: with the covariance
    G psi[f] G^-1 = psi[h^* f], the lift reverses composition order."""

    parity = 0

    def __init__(self, h: CoordChange, inverse: bool = False):
        self.h = h
        self.inverse = inverse
        self.a = h.leading
        self._field = None
        self._order = 0
        self._cache: dict = {}

    def field(self, energy: int) -> LaurentSeries:
        need = energy + 3
        if self._field is None or self._order < need:
            self._order = max(need, 2 * self._order)
            self._field = log_coordinate(self.h.unipotent, self._order)
        return self._field

    def on_basis(self, m):
        hit = self._cache.get(m)
        if hit is not None:
            return hit
        e = m.energy
        T = TOperator(self.field(e))
        sign = 1 if self.inverse else -1
        v = FockVector.basis(m)
        if not self.inverse:
            v = v.scale(self.a ** (-e))
        total = v
        term = v
        k = 1
        while term:
            term = T.apply(term).scale(Fraction(sign, k))
            total = total + term
            k += 1
        if self.inverse:
            total = FockVector({m2: c * self.a ** m2.energy for m2, c in total.items()})
        out = list(total.items())
        self._cache[m] = out
        return out


def G_apply(h: CoordChange, x, slot: int = 1, inverse: bool = False, cutoff=None, charge_total=None):
    """G[h] (or G[h]^-1) on a FockVector from the left, or on a bra from the right.

    For a bra phi the result is phi o rho_slot(G[h]) on all tuples of energy
    <= cutoff (default: phi's cutoff) and total charge ``charge_total``.
    """
    op = GOperator(h, inverse)
    if isinstance(x, FockVector):
        return op.apply(x)
    from .vacua import enumerate_tuples

    cut = x.cutoff if cutoff is None else cutoff
    if cut == math.inf:
        raise ValueError("a cutoff is needed to tabulate a bra")
    if charge_total is None:
        charge_total = getattr(x, "charge_total", None)
        if charge_total is None:
            charge_total = {tuple_charge(k) for k in x.values}.pop()
    vals = {}
    for key in enumerate_tuples(x.arity, cut, charge_total):
        s = Fraction(0)
        for k2, c in apply_rho_key(slot, op, key):
            s += c * x(k2)
        if s:
            vals[key] = s
    return DualFunctional(x.arity, cut, vals)


# ---------------------------------------------------------------------------
# covariance of smeared operators and of T under G[h]


def _window(max_energy: int, max_charge: int):
    return [m for m in energy_window(max_energy) if abs(m.charge) <= max_charge]


def _vector_diff(a: FockVector, b: FockVector) -> Fraction:
    d = a - b
    return max((abs(c) for _, c in d.items()), default=Fraction(0))


def _retry(fn, order: int):
    while True:
        try:
            return fn(order)
        except TruncationError:
            order *= 2


def conjugate(h: CoordChange, op: Operator, v: FockVector) -> FockVector:
    """G[h] op G[h]^-1 v."""
    return G_apply(h, op.apply(G_apply(h, v, inverse=True)))


def covariance_check(h: CoordChange, form: LaurentSeries, function: LaurentSeries, field: LaurentSeries,
                     max_energy: int = 4, max_charge: int = 2) -> dict:
    """Largest residuals of the three conjugation identities on a window.

    psi:    G psi[f dxi] G^-1   = psi[f(h) h' dxi]
    psibar: G psibar[g] G^-1    = psibar[g(h)]
    T:      G T[l] G^-1         = T[ad(h) l] + (1/6) Res({h; xi} (ad(h) l) dxi)

    with ad(h) l = l(h)/h'.  The key "T_unadjusted" reports the residual
    when the central term uses l itself instead of ad(h) l.
    """
    window = _window(max_energy, max_charge)
    base = max_energy + max_charge + 8
    res = {"psi": Fraction(0), "psibar": Fraction(0), "T": Fraction(0), "T_unadjusted": Fraction(0)}
    hs = h.series

    def trunc_h(order):
        return hs.truncate(order) if hs.trunc == INF else hs

    pole = -min(field.ord, 0) if field.coeffs else 0
    order = base + pole
    moved = pullback_field(field, trunc_h(order + 4), order)
    S = schwarzian(trunc_h(order + 6), order)
    c = (S * moved).residue() / 6
    c_plain = (S * field).residue() / 6
    for m in window:
        v = FockVector.basis(m)
        lhs = conjugate(h, smear(PSI, form), v)
        rhs = _retry(lambda o: smear(PSI, pullback_form(form, trunc_h(o)).truncate(o)).apply(v), base)
        res["psi"] = max(res["psi"], _vector_diff(lhs, rhs))
        lhs = conjugate(h, smear(PSIBAR, function), v)
        rhs = _retry(lambda o: smear(PSIBAR, compose(function, trunc_h(o)).truncate(o)).apply(v), base)
        res["psibar"] = max(res["psibar"], _vector_diff(lhs, rhs))
        lhs = conjugate(h, TOperator(field), v)
        rhs = _retry(lambda o: TOperator(pullback_field(field, trunc_h(o + 2), o)).apply(v), base) + v.scale(c)
        res["T"] = max(res["T"], _vector_diff(lhs, rhs))
        res["T_unadjusted"] = max(res["T_unadjusted"], _vector_diff(lhs, rhs + v.scale(c_plain - c)))
    return res


def composition_check(h1: CoordChange, h2: CoordChange, max_energy: int = 5, max_charge: int = 2) -> Fraction:
    """max |G[h2 o h1] v - G[h1] G[h2] v| on a window (the lift reverses composition)."""
    order = max_energy + 4
    comp = CoordChange(compose(h2.series.truncate(order + 2), h1.series.truncate(order + 2)).truncate(order + 2))
    worst = Fraction(0)
    for m in _window(max_energy, max_charge):
        v = FockVector.basis(m)
        worst = max(worst, _vector_diff(G_apply(comp, v), G_apply(h1, G_apply(h2, v))))
    return worst


# ---------------------------------------------------------------------------
# normalized expansion data and preferred elements


@dataclass
class NormalizedExpansionData:
    """omega_i = sum_n I[n, i] xi^(n-1) dxi (i <= g) and
    omega_Q^(n) = (xi^(-n-1) + sum_m Q[n, m] xi^(m-1)) dxi, known for n, m <= trunc."""

    g: int
    I: dict = field(default_factory=dict)
    Q: dict = field(default_factory=dict)
    trunc: int = 0

    def __post_init__(self):
        if self.g < 0:
            raise ValueError("genus must be nonnegative")
        self.I = {(int(n), int(i)): Fraction(v) for (n, i), v in self.I.items() if v}
        self.Q = {(int(n), int(m)): Fraction(v) for (n, m), v in self.Q.items() if v}
        for (n, i) in self.I:
            if n < 1 or not 1 <= i <= self.g:
                raise ValueError(f"I index {(n, i)} out of range")
        for (n, m) in self.Q:
            if n < 1 or m < 1:
                raise ValueError(f"Q index {(n, m)} out of range")

    def entry_I(self, n: int, i: int) -> Fraction:
        if n > self.trunc:
            raise TruncationError(f"I_{n} beyond the data truncation {self.trunc}")
        return self.I.get((n, i), Fraction(0))

    def entry_Q(self, n: int, m: int) -> Fraction:
        if n > self.trunc or m > self.trunc:
            raise TruncationError(f"q_{n},{m} beyond the data truncation {self.trunc}")
        return self.Q.get((n, m), Fraction(0))

    def to_json(self):
        return {
            "g": self.g,
            "I": {f"{n},{i}": frac_str(v) for (n, i), v in sorted(self.I.items())},
            "Q": {f"{n},{m}": frac_str(v) for (n, m), v in sorted(self.Q.items())},
            "trunc": self.trunc,
        }

    @classmethod
    def from_json(cls, obj) -> "NormalizedExpansionData":
        try:
            g = int(obj["g"])
            trunc = int(obj["trunc"])
            I = {tuple(int(x) for x in k.split(",")): parse_frac(v) for k, v in obj.get("I", {}).items()}
            Q = {tuple(int(x) for x in k.split(",")): parse_frac(v) for k, v in obj.get("Q", {}).items()}
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"malformed expansion data: {exc}") from exc
        return cls(g, I, Q, trunc)


def occupied_slots(m: MayaDiagram, depth: int) -> list[int]:
    """Occupied slots (twice-values) above -depth, in decreasing order."""
    holes = set(m.nus)
    out = [p for p in m.particles()]
    out += [s for s in range(-1, -depth, -2) if s not in holes]
    return sorted(out, reverse=True)


def wedge_value(data: NormalizedExpansionData, m: MayaDiagram, extra_depth: int = 0) -> Fraction:
    """Value of the semi-infinite wedge of the normalized basis on |m>.

    ``extra_depth`` enlarges the finite minor; the value must not change.
    """
    g = data.g
    if m.charge != g - 1:
        return Fraction(0)
    deepest = -min(m.nus) if m.nus else 1
    L = max((deepest + 1) // 2, 2 - g, 1) + extra_depth
    depth = 2 * L + 1
    cols = occupied_slots(m, depth)
    nrows = g + L - 1
    if len(cols) != nrows:
        raise AssertionError("slot count does not match the wedge rank")
    rows = []
    for i in range(1, g + 1):
        rows.append([data.entry_I((s + 1) // 2, i) if s > 0 else Fraction(0) for s in cols])
    for j in range(1, L):
        row = []
        for s in cols:
            if s > 0:
                row.append(data.entry_Q(j, (s + 1) // 2))
            else:
                row.append(Fraction(1) if s == -(2 * j + 1) else Fraction(0))
        rows.append(row)
    return linalg.det(rows)


def preferred_element(data: NormalizedExpansionData, cutoff: int) -> DualFunctional:
    """The wedge ... e(omega_{g+1}) ^ e(omega_g) ^ ... ^ e(omega_1) on charge g-1, energy <= cutoff."""
    vals = {}
    for e in range(cutoff + 1):
        for m in basis_by_energy(e, [data.g - 1]):
            v = wedge_value(data, m)
            if v:
                vals[(m,)] = v
    return DualFunctional(1, cutoff, vals)


class LazyPreferred:
    """The preferred element evaluated on demand (single slot)."""

    arity = 1

    def __init__(self, data: NormalizedExpansionData, cutoff=math.inf):
        self.data = data
        self.charge_total = data.g - 1
        self.cutoff = cutoff

    def __call__(self, key):
        (m,) = key
        return wedge_value(self.data, m)


# ---------------------------------------------------------------------------
# expansion data read off from concrete curves


def p1_normalized_data(comp, i: int, trunc: int) -> NormalizedExpansionData:
    """Genus-0 data at point i of a marked P^1: q_{n,m} of the forms with a single pole there."""
    from .curve import FORM, NodalSpec, principal_object

    curve = NodalSpec([comp], [], [(0, i)])
    Q = {}
    for n in range(1, trunc + 1):
        w = principal_object(curve, FORM, (0, i), -n - 1)
        s = curve.expand_outer(w, 0, trunc)
        for m in range(1, trunc + 1):
            Q[(n, m)] = s.coeff(m - 1)
    return NormalizedExpansionData(0, {}, Q, trunc)


def nodal_normalized_data(comp, plus: int, minus: int, q: int, trunc: int) -> NormalizedExpansionData:
    """Data at q for the irreducible nodal curve obtained by gluing plus to minus.

    omega_1 has simple poles at the two branches with residues -1 at plus and
    +1 at minus.  The forms omega_Q^(n) are taken without residues at the
    branches; other admissible choices differ by multiples of omega_1, which
    do not change the wedge.
    """
    from .curve import FORM, NodalSpec, principal_object, solve_object

    curve = NodalSpec([comp], [], [(0, q), (0, plus), (0, minus)])
    w1 = solve_object(curve, FORM, {(0, plus): 1, (0, minus): 1},
                      [((0, plus), -1, -1), ((0, minus), -1, 1)])
    s1 = curve.expand_outer(w1, 0, trunc)
    I = {(n, 1): s1.coeff(n - 1) for n in range(1, trunc + 1)}
    base = p1_normalized_data(comp, q, trunc)
    return NormalizedExpansionData(1, I, base.Q, trunc)


def p1_preferred_vacuum(comp, i: int):
    """One-point vacuum of (P^1; point i) in its coordinate, as the genus-0 preferred element."""
    from .vacua import FunctionalVacuum

    cache: dict = {}
    state = {"data": None}

    def value(key):
        (m,) = key
        hit = cache.get(m)
        if hit is not None:
            return hit
        need = m.energy + 4
        if state["data"] is None or state["data"].trunc < need:
            state["data"] = p1_normalized_data(comp, i, max(need, 8))
        v = wedge_value(state["data"], m)
        cache[m] = v
        return v

    return FunctionalVacuum(value, 1, -1)


def preferred_p1(comp, slots, cutoff=None):
    """Preferred element of a marked P^1 on the given outer slots: the
    one-point preferred element at the first slot, propagated to the rest."""
    from .vacua import PropagatedVacuum
    from .curve import NodalSpec

    vac = p1_preferred_vacuum(comp, slots[0])
    for k in range(2, len(slots) + 1):
        vac = PropagatedVacuum(vac, NodalSpec([comp], [], [(0, s) for s in slots[:k]]))
    return vac if cutoff is None else vac.materialize(cutoff)


def preferred_nodal(nodal, cutoff: int):
    """Preferred element of a curve with one node.

    Irreducible case: the wedge of the normalized basis at the single outer
    point.  Two components: the product of the component preferred
    elements (slots of the first component first), reordered to
    (P+, P-, Q...) and restricted through the node vector.
    """
    from .curve import NodalSpec, as_curve
    from .vacua import PermutedVacuum, ProductVacuum, node_restrict

    nodal = as_curve(nodal)
    if len(nodal.glue) != 1:
        raise ValueError("preferred_nodal handles exactly one node")
    (plus, minus) = nodal.glue[0]
    if len(nodal.components) == 1:
        if nodal.n_outer != 1:
            raise ValueError("irreducible case takes one outer point")
        comp = nodal.components[0]
        data = nodal_normalized_data(comp, plus[1], minus[1], nodal.outer[0][1], cutoff + 4)
        return preferred_element(data, cutoff)
    if len(nodal.components) != 2 or plus[0] == minus[0]:
        raise ValueError("two-component case needs the node to join the components")
    parts = []
    order = []
    for ci in (0, 1):
        slots = [s for s in nodal.outer if s[0] == ci]
        glued = plus if plus[0] == ci else minus
        local = [s[1] for s in slots] + [glued[1]]
        parts.append(preferred_p1(nodal.components[ci], local))
        order += slots + [glued]
    prod = ProductVacuum(parts[0], parts[1])
    target = [plus, minus] + list(nodal.outer)
    perm = [order.index(s) for s in target]
    return node_restrict(PermutedVacuum(prod, perm), cutoff)
