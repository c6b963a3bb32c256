"""Marked projective lines, nodal gluings and their global meromorphic data.

Everything lives on P^1 with affine coordinate t.  The base chart at a
finite point a is x = t - a and at infinity x = 1/t; a marked point may
carry a further coordinate change xi = h(x).

Global objects are kept in partial-fraction form

    value(t) = sum_k poly[k] t^k + sum_a sum_k poles[a][k] / (t - a)^k

multiplied by dt for one-forms and by d/dt for vector fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

from . import linalg
from .coordchange import CoordChange
from .errors import TruncationError
from .laurent import INF, LaurentSeries, compose

FUNCTION = "function"
FORM = "form"
FIELD = "field"

INFINITY = "inf"


def parse_point(p):
    if isinstance(p, str) and p.strip().lower() in ("inf", "infinity", "oo"):
        return INFINITY
    return Fraction(str(p))


def point_str(p) -> str:
    return "inf" if p == INFINITY else (str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}")


# ---------------------------------------------------------------------------
# rational objects on one P^1


class RationalObject:
    """Rational function / one-form / vector field on P^1 in partial fractions."""

    __slots__ = ("kind", "poly", "poles")

    def __init__(self, kind: str, poly: Mapping[int, Fraction] | None = None,
                 poles: Mapping[Fraction, Mapping[int, Fraction]] | None = None):
        if kind not in (FUNCTION, FORM, FIELD):
            raise ValueError(f"unknown kind {kind}")
        self.kind = kind
        self.poly = {k: Fraction(c) for k, c in (poly or {}).items() if c}
        self.poles = {}
        for a, parts in (poles or {}).items():
            d = {k: Fraction(c) for k, c in parts.items() if c}
            if d:
                self.poles[Fraction(a)] = d

    @classmethod
    def zero(cls, kind):
        return cls(kind)

    def is_zero(self) -> bool:
        return not self.poly and not self.poles

    def __add__(self, other: "RationalObject") -> "RationalObject":
        if other.kind != self.kind:
            raise ValueError("kind mismatch")
        poly = dict(self.poly)
        for k, c in other.poly.items():
            poly[k] = poly.get(k, 0) + c
        poles = {a: dict(p) for a, p in self.poles.items()}
        for a, p in other.poles.items():
            d = poles.setdefault(a, {})
            for k, c in p.items():
                d[k] = d.get(k, 0) + c
        return RationalObject(self.kind, poly, poles)

    def scale(self, c) -> "RationalObject":
        c = Fraction(c)
        return RationalObject(
            self.kind,
            {k: v * c for k, v in self.poly.items()},
            {a: {k: v * c for k, v in p.items()} for a, p in self.poles.items()},
        )

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return (
            isinstance(other, RationalObject)
            and self.kind == other.kind
            and self.poly == other.poly
            and self.poles == other.poles
        )

    def __repr__(self):
        parts = [f"{c}*t^{k}" for k, c in sorted(self.poly.items())]
        for a, p in sorted(self.poles.items()):
            parts += [f"{c}/(t-{a})^{k}" for k, c in sorted(p.items())]
        twist = {FUNCTION: "", FORM: " dt", FIELD: " d/dt"}[self.kind]
        return f"({' + '.join(parts) or '0'}){twist}"

    def pole_order(self, point) -> int:
        """Pole order in the base chart (negative = forced zero not tracked)."""
        s = self.expand_base(point, 1)
        return max(0, -s.ord) if s.coeffs else 0

    # -- evaluation in the base chart ----------------------------------------
    def _value_series(self, point, order: int) -> LaurentSeries:
        """Expansion of value(t) in the base chart at `point`, known below x^order."""
        out: dict[int, Fraction] = {}

        def add(k, c):
            if k < order and c:
                out[k] = out.get(k, 0) + c

        if point == INFINITY:
            # t = 1/y
            for k, c in self.poly.items():
                add(-k, c)
            for a, p in self.poles.items():
                for k, c in p.items():
                    # 1/(1/y - a)^k = y^k (1 - a y)^(-k)
                    n = 0
                    while k + n < order:
                        add(k + n, c * comb(k + n - 1, n) * a ** n)
                        if a == 0:
                            break
                        n += 1
        else:
            b = point
            for k, c in self.poly.items():
                # (x + b)^k
                for i in range(k + 1):
                    add(i, c * comb(k, i) * b ** (k - i))
            for a, p in self.poles.items():
                for k, c in p.items():
                    if a == b:
                        add(-k, c)
                        continue
                    d = b - a
                    n = 0
                    while n < order:
                        add(n, c * (-1) ** n * comb(k + n - 1, n) / d ** (k + n))
                        n += 1
        return LaurentSeries(out, order)

    def expand_base(self, point, order: int) -> LaurentSeries:
        """Coefficient series in the base chart x (dx / d/dx included for forms / fields)."""
        if point == INFINITY:
            if self.kind == FUNCTION:
                return self._value_series(point, order)
            if self.kind == FORM:
                # dt = -dy / y^2
                return self._value_series(point, order + 2).shift(-2).scale(-1)
            # d/dt = -y^2 d/dy
            return self._value_series(point, order - 2).shift(2).scale(-1)
        return self._value_series(point, order)

    def value_at(self, point) -> Fraction:
        if self.kind != FUNCTION:
            raise ValueError("only functions have values")
        s = self.expand_base(point, 1)
        if s.ord < 0:
            raise ValueError("function has a pole there")
        return s.coeff(0)

    def residue_at(self, point) -> Fraction:
        if self.kind != FORM:
            raise ValueError("only one-forms have residues")
        return self.expand_base(point, 0).coeff(-1)

    def pole_points(self) -> list:
        pts = list(self.poles)
        if self.kind == FUNCTION and any(k > 0 for k in self.poly):
            pts.append(INFINITY)
        if self.kind == FORM and (self.poly or any(1 in p for p in self.poles.values())):
            pts.append(INFINITY)
        if self.kind == FIELD and any(k > 2 for k in self.poly):
            pts.append(INFINITY)
        return pts

    def to_json(self):
        return {
            "kind": self.kind,
            "poly": {str(k): _fs(c) for k, c in sorted(self.poly.items())},
            "poles": {point_str(a): {str(k): _fs(c) for k, c in sorted(p.items())} for a, p in sorted(self.poles.items())},
        }


def _fs(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def pullback_to_coordinate(kind: str, base: LaurentSeries, coord: CoordChange | None, order: int,
                           base_fn=None) -> LaurentSeries:
    """Rewrite a base-chart expansion in the coordinate xi = h(x), known below xi^order.

    ``base_fn(n)`` recomputes the base expansion below x^n when more terms
    are needed.
    """
    if coord is None or coord.is_identity():
        return base.truncate(order)
    extra = 2
    while True:
        lo = min(base.ord, 0) if base.coeffs else 0
        need = order - lo + extra
        src = base_fn(order + extra) if base_fn else base
        k = coord.inverse(need)
        if kind == FUNCTION:
            s = compose(src, k)
        elif kind == FORM:
            s = compose(src, k) * k.derivative()
        else:
            s = compose(src, k) * k.derivative().inverse()
        if s.trunc >= order or base_fn is None:
            if s.trunc < order:
                raise TruncationError("coordinate change needs more terms of the base expansion")
            return s.truncate(order)
        extra += 4


# ---------------------------------------------------------------------------
# curves


@dataclass
class MarkedP1:
    """P^1 with marked points (rationals or 'inf') and optional coordinate changes."""

    points: list
    coords: list = field(default_factory=list)

    def __post_init__(self):
        self.points = [parse_point(p) if not isinstance(p, Fraction) and p != INFINITY else p for p in self.points]
        if len(set(self.points)) != len(self.points):
            raise ValueError("marked points must be distinct")
        if not self.coords:
            self.coords = [None] * len(self.points)
        if len(self.coords) != len(self.points):
            raise ValueError("one coordinate per marked point")

    def coord(self, i: int) -> CoordChange | None:
        return self.coords[i]

    def with_coord(self, i: int, c: CoordChange | None) -> "MarkedP1":
        coords = list(self.coords)
        coords[i] = c
        return MarkedP1(list(self.points), coords)

    def with_point(self, p, c: CoordChange | None = None) -> "MarkedP1":
        return MarkedP1(list(self.points) + [parse_point(p) if not isinstance(p, Fraction) and p != INFINITY else p],
                        list(self.coords) + [c])

    def expand(self, obj: RationalObject, i: int, order: int) -> LaurentSeries:
        p = self.points[i]
        base = obj.expand_base(p, order + 2)
        return pullback_to_coordinate(obj.kind, base, self.coords[i], order,
                                      base_fn=lambda n: obj.expand_base(p, n))

    def to_json(self):
        return {
            "points": [point_str(p) for p in self.points],
            "coords": [None if c is None else c.to_json() for c in self.coords],
        }


Slot = tuple  # (component index, point index)


class NodalSpec:
    """Components glued pairwise at marked points; ``outer`` lists the vacuum slots in order."""

    def __init__(self, components: Sequence[MarkedP1], glue: Sequence[tuple[Slot, Slot]] = (),
                 outer: Sequence[Slot] | None = None):
        self.components = list(components)
        self.glue = [(tuple(a), tuple(b)) for a, b in glue]
        glued = {s for pair in self.glue for s in pair}
        if len(glued) != 2 * len(self.glue):
            raise ValueError("each point can be glued at most once")
        if outer is None:
            outer = [(ci, pi) for ci, c in enumerate(self.components) for pi in range(len(c.points))
                     if (ci, pi) not in glued]
        self.outer = [tuple(s) for s in outer]
        if glued & set(self.outer):
            raise ValueError("glued points cannot be outer points")
        for ci, pi in list(glued) + self.outer:
            if not (0 <= ci < len(self.components) and 0 <= pi < len(self.components[ci].points)):
                raise ValueError(f"no marked point {(ci, pi)}")
        if not self.components:
            raise ValueError("empty curve")
        for ci in range(len(self.components)):
            if not any(s[0] == ci for s in self.outer):
                raise ValueError(f"component {ci} carries no outer point")

    @classmethod
    def single(cls, c: MarkedP1) -> "NodalSpec":
        return cls([c])

    @property
    def n_outer(self) -> int:
        return len(self.outer)

    def glued_slots(self) -> list[Slot]:
        return [s for pair in self.glue for s in pair]

    def charge_total(self) -> int:
        """Sum over connected pieces of (arithmetic genus - 1)."""
        return len(self.glue) - len(self.components)

    def connected_pieces(self) -> list[set[int]]:
        parent = list(range(len(self.components)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for (a, _), (b, _) in self.glue:
            parent[find(a)] = find(b)
        groups: dict[int, set[int]] = {}
        for i in range(len(self.components)):
            groups.setdefault(find(i), set()).add(i)
        return sorted(groups.values(), key=min)

    def arithmetic_genus(self) -> int:
        if len(self.connected_pieces()) != 1:
            raise ValueError("genus of a disconnected curve")
        return self.charge_total() + 1

    def expand(self, obj: "GlobalObject", slot: Slot, order: int) -> LaurentSeries:
        ci, pi = slot
        return self.components[ci].expand(obj.parts[ci], pi, order)

    def expand_outer(self, obj: "GlobalObject", j: int, order: int) -> LaurentSeries:
        return self.expand(obj, self.outer[j], order)

    def normalization(self, node_first: bool = True) -> "NodalSpec":
        """The curve with all glue removed; glued points become outer slots (first)."""
        extra = self.glued_slots()
        outer = extra + self.outer if node_first else self.outer + extra
        return NodalSpec(self.components, [], outer)

    def with_new_point(self, ci: int, p, coord: CoordChange | None = None) -> "NodalSpec":
        comps = list(self.components)
        comps[ci] = comps[ci].with_point(p, coord)
        return NodalSpec(comps, self.glue, self.outer + [(ci, len(comps[ci].points) - 1)])

    def reorder(self, outer: Sequence[Slot]) -> "NodalSpec":
        if sorted(outer) != sorted(self.outer):
            raise ValueError("reorder must permute the outer slots")
        return NodalSpec(self.components, self.glue, outer)

    def to_json(self):
        return {
            "components": [c.to_json() for c in self.components],
            "glue": [[list(a), list(b)] for a, b in self.glue],
            "outer": [list(s) for s in self.outer],
        }

    @classmethod
    def from_json(cls, obj) -> "NodalSpec":
        comps = []
        for c in obj["components"]:
            pts = [parse_point(p) for p in c["points"]]
            coords = []
            for cc in c.get("coords") or [None] * len(pts):
                coords.append(None if cc is None else CoordChange.from_json(cc))
            comps.append(MarkedP1(pts, coords))
        glue = [(tuple(a), tuple(b)) for a, b in obj.get("glue", [])]
        outer = [tuple(s) for s in obj["outer"]] if "outer" in obj else None
        return cls(comps, glue, outer)


def as_curve(c) -> NodalSpec:
    return c if isinstance(c, NodalSpec) else NodalSpec.single(c)


class GlobalObject:
    """One rational object per component."""

    __slots__ = ("kind", "parts")

    def __init__(self, kind: str, parts: Sequence[RationalObject]):
        self.kind = kind
        self.parts = list(parts)

    @classmethod
    def zero(cls, kind, n):
        return cls(kind, [RationalObject(kind) for _ in range(n)])

    def __add__(self, other):
        return GlobalObject(self.kind, [a + b for a, b in zip(self.parts, other.parts)])

    def scale(self, c):
        return GlobalObject(self.kind, [a.scale(c) for a in self.parts])

    def is_zero(self):
        return all(p.is_zero() for p in self.parts)

    def __eq__(self, other):
        return isinstance(other, GlobalObject) and self.kind == other.kind and self.parts == other.parts

    def __repr__(self):
        if len(self.parts) == 1:
            return repr(self.parts[0])
        return "(" + ", ".join(map(repr, self.parts)) + ")"

    def to_json(self):
        return {"kind": self.kind, "parts": [p.to_json() for p in self.parts]}


# ---------------------------------------------------------------------------
# raw bases on one component


def raw_basis(comp: MarkedP1, kind: str, bounds: Mapping[int, int]) -> list[RationalObject]:
    """Objects with poles of order <= bounds[i] at point i and nowhere else.

    Functions: 1, 1/(t-a)^k, t^k.  Forms: dt/(t-a)^k (k >= 2), t^m dt at
    infinity, plus residue pairs against a reference point.  Vector fields:
    t^m d/dt (m <= 2 + bound at infinity) and d/dt/(t-a)^k.
    """
    pts = comp.points
    out: list[RationalObject] = []
    if kind == FUNCTION:
        out.append(RationalObject(FUNCTION, {0: 1}))
        for i, p in enumerate(pts):
            K = bounds.get(i, 0)
            for k in range(1, K + 1):
                if p == INFINITY:
                    out.append(RationalObject(FUNCTION, {k: 1}))
                else:
                    out.append(RationalObject(FUNCTION, {}, {p: {k: 1}}))
        return out
    if kind == FORM:
        simple = []
        for i, p in enumerate(pts):
            K = bounds.get(i, 0)
            if K >= 1:
                simple.append(p)
            for k in range(2, K + 1):
                if p == INFINITY:
                    out.append(RationalObject(FORM, {k - 2: 1}))
                else:
                    out.append(RationalObject(FORM, {}, {p: {k: 1}}))
        if len(simple) >= 2:
            ref = simple[0]
            for p in simple[1:]:
                out.append(_residue_pair(p, ref))
        return out
    if kind == FIELD:
        has_inf = INFINITY in pts
        inf_bound = bounds.get(pts.index(INFINITY), 0) if has_inf else -3
        # t^m d/dt has order m-2 pole at infinity (m <= 2 holomorphic there)
        for m in range(0, 3 + inf_bound):
            out.append(RationalObject(FIELD, {m: 1}))
        for i, p in enumerate(pts):
            if p == INFINITY:
                continue
            for k in range(1, bounds.get(i, 0) + 1):
                out.append(RationalObject(FIELD, {}, {p: {k: 1}}))
        return out
    raise ValueError(kind)


def _residue_pair(p, ref) -> RationalObject:
    """Form with residue +1 at p and -1 at ref, holomorphic elsewhere."""
    if p == INFINITY:
        return RationalObject(FORM, {}, {ref: {1: -1}})
    if ref == INFINITY:
        return RationalObject(FORM, {}, {p: {1: 1}})
    return RationalObject(FORM, {}, {p: {1: 1}, ref: {1: -1}})


# ---------------------------------------------------------------------------
# bases on curves


def _raw_global(curve: NodalSpec, kind: str, bounds: Mapping[Slot, int]) -> list[GlobalObject]:
    n = len(curve.components)
    out = []
    for ci, comp in enumerate(curve.components):
        b = {pi: k for (cj, pi), k in bounds.items() if cj == ci}
        for obj in raw_basis(comp, kind, b):
            parts = [RationalObject(kind) for _ in range(n)]
            parts[ci] = obj
            out.append(GlobalObject(kind, parts))
    return out


def _node_conditions(curve: NodalSpec, kind: str, objs: list[GlobalObject]) -> list[list[Fraction]]:
    rows = []
    for a, b in curve.glue:
        if kind == FUNCTION:
            rows.append([
                curve.components[a[0]].expand(o.parts[a[0]], a[1], 1).coeff(0)
                - curve.components[b[0]].expand(o.parts[b[0]], b[1], 1).coeff(0)
                for o in objs
            ])
        elif kind == FORM:
            rows.append([
                o.parts[a[0]].residue_at(curve.components[a[0]].points[a[1]])
                + o.parts[b[0]].residue_at(curve.components[b[0]].points[b[1]])
                for o in objs
            ])
    return rows


def _combine(objs: list[GlobalObject], vec: Sequence[Fraction], kind: str, n: int) -> GlobalObject:
    out = GlobalObject.zero(kind, n)
    for o, c in zip(objs, vec):
        if c:
            out = out + o.scale(c)
    return out


def global_basis(curve, kind: str, pole_orders, extra_bounds: Mapping[Slot, int] | None = None) -> list[GlobalObject]:
    """Basis of functions / forms with poles bounded at outer points.

    ``pole_orders`` is an int (same bound everywhere) or a list per outer
    slot.  On a nodal curve, functions take equal values at glued pairs and
    forms may have simple poles there with opposite residues.
    """
    curve = as_curve(curve)
    if isinstance(pole_orders, int):
        pole_orders = [pole_orders] * curve.n_outer
    bounds: dict[Slot, int] = {s: k for s, k in zip(curve.outer, pole_orders)}
    node_bound = 1 if kind == FORM else 0
    for s in curve.glued_slots():
        bounds[s] = node_bound
    for s, k in (extra_bounds or {}).items():
        bounds[tuple(s)] = k
    raw = _raw_global(curve, kind, bounds)
    if kind == FIELD or not curve.glue:
        return raw
    rows = _node_conditions(curve, kind, raw)
    n = len(curve.components)
    return [_combine(raw, v, kind, n) for v in linalg.nullspace(rows, len(raw))]


def function_basis(curve, pole_orders) -> list[GlobalObject]:
    return global_basis(curve, FUNCTION, pole_orders)


def form_basis(curve, pole_orders) -> list[GlobalObject]:
    return global_basis(curve, FORM, pole_orders)


def field_basis(curve, pole_orders) -> list[GlobalObject]:
    return global_basis(curve, FIELD, pole_orders)


def expand_at(curve, obj, slot, order: int) -> LaurentSeries:
    """Expansion of a global object at an outer slot index (int) or a (component, point) pair."""
    curve = as_curve(curve)
    if isinstance(obj, RationalObject):
        obj = GlobalObject(obj.kind, [obj] + [RationalObject(obj.kind)] * (len(curve.components) - 1))
    if isinstance(slot, int):
        slot = curve.outer[slot]
    return curve.expand(obj, slot, order)


# ---------------------------------------------------------------------------
# objects with prescribed local data


def solve_object(curve, kind: str, bounds: Mapping[Slot, int],
                 conditions: Iterable[tuple[Slot, int, Fraction]]) -> GlobalObject:
    """A global object with poles bounded by ``bounds`` (all marked points,
    missing = 0; glued points keep their nodal allowance) whose expansion
    coefficients satisfy conditions (slot, exponent, value).

    Free parameters are set to zero, so the answer is deterministic.
    """
    curve = as_curve(curve)
    b = {}
    node_bound = 1 if kind == FORM else 0
    for s in curve.glued_slots():
        b[s] = node_bound
    b.update({tuple(s): k for s, k in bounds.items()})
    raw = _raw_global(curve, kind, b)
    rows = _node_conditions(curve, kind, raw) if curve.glue else []
    rhs = [Fraction(0)] * len(rows)
    conditions = list(conditions)
    by_slot: dict[Slot, list] = {}
    for s, e, v in conditions:
        by_slot.setdefault(tuple(s), []).append((e, Fraction(v)))
    for s, conds in by_slot.items():
        order = max(e for e, _ in conds) + 1
        exps = [curve.expand(o, s, order) for o in raw]
        for e, v in conds:
            rows.append([x.coeff(e) for x in exps])
            rhs.append(v)
    sol = linalg.solve(rows, rhs, len(raw))
    if sol is None:
        raise ValueError(f"no {kind} with the requested local data at the current pole bound")
    return _combine(raw, sol, kind, len(curve.components))


def principal_object(curve, kind: str, slot: Slot, exponent: int, compensate: Slot | None = None) -> GlobalObject:
    """Object whose principal part at ``slot`` is exactly xi^exponent (exponent < 0).

    For a form with a simple pole a compensating simple pole is allowed at
    ``compensate``.  Everywhere else the object is holomorphic (nodal
    allowances aside).
    """
    k = -exponent
    if k < 1:
        raise ValueError("principal part needs a negative exponent")
    bounds = {tuple(slot): k}
    if kind == FORM and k == 1:
        if compensate is None:
            raise ValueError("a simple-pole form needs a compensating point")
        bounds[tuple(compensate)] = 1
    conds = [(slot, e, 1 if e == exponent else 0) for e in range(-k, 0)]
    return solve_object(curve, kind, bounds, conds)


# ---------------------------------------------------------------------------
# sewing data on the normalization


def sewing_vector_field(comp: MarkedP1, plus: int, minus: int, outer: Sequence[int],
                        pole_bound: int = 1, order: int = 10):
    """Vector field with poles only at the outer points whose 1-jets at the
    two node branches are (1/2) x d/dx, together with coordinates z, w at
    the branches in which the field is exactly (1/2) z d/dz and (1/2) w d/dw.

    Returns (field, adjusted MarkedP1, z-coordinate, w-coordinate).
    """
    for bound in range(pole_bound, pole_bound + 6):
        bounds = {(0, i): bound for i in outer}
        bounds[(0, plus)] = 0
        bounds[(0, minus)] = 0
        curve = NodalSpec([comp], [], [(0, i) for i in outer] + [(0, plus), (0, minus)])
        conds = [((0, plus), 0, 0), ((0, plus), 1, Fraction(1, 2)),
                 ((0, minus), 0, 0), ((0, minus), 1, Fraction(1, 2))]
        try:
            obj = solve_object(curve, FIELD, bounds, conds)
        except ValueError:
            continue
        field = obj.parts[0]
        new = comp
        coords = {}
        for i in (plus, minus):
            l = new.expand(field, i, order + 1)
            z = _linearizing_coordinate(l, order)
            old = new.coords[i] or CoordChange.identity()
            coords[i] = old.then(CoordChange(z))
            new = new.with_coord(i, coords[i])
        return field, new, coords[plus], coords[minus]
    raise ValueError("could not realize the sewing vector field; raise the pole bound")


def _linearizing_coordinate(l: LaurentSeries, order: int) -> LaurentSeries:
    """z(xi) = xi + ... with l(xi) z'(xi) = z(xi)/2, known below xi^order."""
    if l.coeff(0) != 0 or l.coeff(1) != Fraction(1, 2):
        raise ValueError("field must vanish with linear part 1/2")
    c = {1: Fraction(1)}
    for n in range(2, order):
        s = Fraction(0)
        for i in range(2, n + 1):
            li = l.coeff(i)
            if li:
                s += li * (n - i + 1) * c.get(n - i + 1, 0)
        c[n] = -s * 2 / (n - 1)
    return LaurentSeries(c, order)


def family_form_lift(curve, plus: Slot, minus: Slot, a: Mapping[tuple[int, int], Fraction],
                     q_order: int) -> list[GlobalObject]:
    """Global forms tau^(n), n < q_order, on the normalization with expansions

        at plus:   -sum_m a[m, n] z^(m-n-1) dz
        at minus:   sum_m a[n, m] w^(m-n-1) dw

    matched exactly below z^(q_order - n - 1), w^(q_order - n - 1), and
    arbitrary poles at the outer points.
    """
    curve = as_curve(curve)
    out = []
    outer = [s for s in curve.outer if s not in (tuple(plus), tuple(minus))]
    for n in range(q_order):
        top = q_order - n - 1
        conds = []
        for e in range(-n - 1, top):
            conds.append((plus, e, -Fraction(a.get((e + n + 1, n), 0))))
            conds.append((minus, e, Fraction(a.get((n, e + n + 1), 0))))
        if all(v == 0 for _, _, v in conds):
            out.append(GlobalObject.zero(FORM, len(curve.components)))
            continue
        need = 2 * len(conds) // 2 + 2
        for extra in range(0, 40, 2):
            bounds = {tuple(plus): n + 1, tuple(minus): n + 1}
            for s in outer:
                bounds[s] = need + extra
            try:
                out.append(solve_object(curve, FORM, bounds, conds))
                break
            except ValueError:
                continue
        else:
            raise ValueError("family form lift failed")
    return out


def family_function_lift(curve, plus: Slot, minus: Slot, b: Mapping[tuple[int, int], Fraction],
                         q_order: int) -> list[GlobalObject]:
    """Global functions h^(n), n < q_order, with expansions

        at plus:   sum_m b[m, n] z^(m-n)
        at minus:  sum_m b[n, m] w^(m-n)

    matched exactly below z^(q_order - n), w^(q_order - n), poles at the outer points.
    """
    curve = as_curve(curve)
    out = []
    outer = [s for s in curve.outer if s not in (tuple(plus), tuple(minus))]
    for n in range(q_order):
        top = q_order - n
        conds = []
        for e in range(-n, top):
            conds.append((plus, e, Fraction(b.get((e + n, n), 0))))
            conds.append((minus, e, Fraction(b.get((n, e + n), 0))))
        if all(v == 0 for _, _, v in conds):
            out.append(GlobalObject.zero(FUNCTION, len(curve.components)))
            continue
        need = len(conds) + 1
        for extra in range(0, 40, 2):
            bounds = {tuple(plus): n, tuple(minus): n}
            for s in outer:
                bounds[s] = need + extra
            try:
                out.append(solve_object(curve, FUNCTION, bounds, conds))
                break
            except ValueError:
                continue
        else:
            raise ValueError("family function lift failed")
    return out


# ---------------------------------------------------------------------------
# canonical bidifferential of P^1 in a local coordinate


def p1_bidifferential(comp: MarkedP1, i: int, order: int):
    """Regular part c_ij of dt1 dt2/(t1-t2)^2 - dxi1 dxi2/(xi1-xi2)^2 at point i.

    With t an affine function (or a Mobius image) of the base chart x and
    x = k(xi), the regular part is d1 d2 log((k(a)-k(b))/(a-b)).
    """
    from .laurent import BiDiffLocal

    coord = comp.coords[i]
    if coord is None or coord.is_identity():
        return BiDiffLocal({}, order)
    k = coord.inverse(order + 3)
    kc = [k.coeff(n) for n in range(order + 3)]
    # K(a,b) = (k(a)-k(b))/(a-b) = sum_n k_n sum_{i+j=n-1} a^i b^j
    K: dict[tuple[int, int], Fraction] = {}
    for n in range(1, order + 3):
        if kc[n]:
            for ii in range(n):
                jj = n - 1 - ii
                if ii + jj < order + 2:
                    K[(ii, jj)] = K.get((ii, jj), 0) + kc[n]
    k0 = K[(0, 0)]
    U = {key: v / k0 for key, v in K.items() if key != (0, 0) and v}
    N = order + 2
    # log(1+U) = sum (-1)^{r+1} U^r / r, bivariate truncated at total degree N
    def mul(A, B):
        out: dict = {}
        for (a1, b1), x in A.items():
            for (a2, b2), y in B.items():
                if a1 + a2 + b1 + b2 < N:
                    key = (a1 + a2, b1 + b2)
                    out[key] = out.get(key, 0) + x * y
        return out
    log: dict = {}
    P = dict(U)
    r = 1
    while P:
        for key, v in P.items():
            log[key] = log.get(key, 0) + (v if r % 2 else -v) / r
        P = mul(P, U)
        r += 1
    reg = {}
    for (a, b), v in log.items():
        if a >= 1 and b >= 1 and v:
            reg[(a - 1, b - 1)] = v * a * b
    return BiDiffLocal(reg, order)
