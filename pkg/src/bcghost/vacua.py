"""Ghost vacua: gauge conditions as an exact linear system, its kernel,
propagation of vacua to new points, slot permutations and the nodal
isomorphism.

Cutoffs are on the total L0 eigenvalue (energy) of a tuple, sum_i
(d_i + p_i(p_i+1)/2).  Energy never increases under the recursions used
here, and each energy level is finite-dimensional across all charges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .curve import (
    FORM,
    FUNCTION,
    GlobalObject,
    NodalSpec,
    as_curve,
    global_basis,
    principal_object,
    solve_object,
)
from .errors import CutoffError, TruncationError
from .fock import (
    PSI,
    PSIBAR,
    ZERO,
    DualFunctional,
    ModeOperator,
    apply_rho_key,
    psi_on,
    psibar_on,
    smear,
    tuple_charge,
    tuple_energy,
    tuple_sort_key,
)
from .linalg import SparseEliminator
from .maya import VACUUM, MayaDiagram, basis_by_energy, charges_up_to_energy, enumerate_basis

KIND_OP = {FORM: PSI, FUNCTION: PSIBAR}


# ---------------------------------------------------------------------------
# tuple enumeration


@lru_cache(maxsize=None)
def _slot_table(max_energy: int) -> dict:
    """(charge, energy) -> diagrams, for energy <= max_energy."""
    table: dict = {}
    for p in charges_up_to_energy(max_energy):
        for e in range(max_energy + 1):
            d = e - p * (p + 1) // 2
            if d >= 0:
                table[(p, e)] = enumerate_basis(p, d)
    return table


def enumerate_tuples(arity: int, max_energy: int, charge_total: int | None = None) -> list[tuple]:
    """All tuples of diagrams with total energy <= max_energy (and fixed charge sum)."""
    if max_energy < 0:
        return []
    table = _slot_table(max_energy)
    keys = sorted(table)
    out: list[tuple] = []

    def rec(i: int, acc: tuple, energy_left: int, charge_acc: int):
        if i == arity - 1:
            for (p, e) in keys:
                if e > energy_left:
                    continue
                if charge_total is not None and charge_acc + p != charge_total:
                    continue
                for m in table[(p, e)]:
                    out.append(acc + (m,))
            return
        for (p, e) in keys:
            if e > energy_left:
                continue
            for m in table[(p, e)]:
                rec(i + 1, acc + (m,), energy_left - e, charge_acc + p)

    if arity == 0:
        return [()] if (charge_total in (None, 0)) else []
    rec(0, (), max_energy, 0)
    out.sort(key=tuple_sort_key)
    return out


# ---------------------------------------------------------------------------
# smeared operators attached to global objects


def local_ops(curve: NodalSpec, obj: GlobalObject, order: int) -> list[ModeOperator]:
    """psi[omega_j] or psibar[f_j] at every outer slot, from expansions below xi^order."""
    kind = KIND_OP[obj.kind]
    return [smear(kind, curve.expand_outer(obj, j, order)) for j in range(curve.n_outer)]


def _op_raise(op: ModeOperator) -> int:
    return op.max_energy_raise() if op.coeffs else -10**9


def expansion_order(max_energy: int) -> int:
    """Series order that makes smeared operators exact on tuples up to this energy."""
    pmax = max(abs(p) for p in charges_up_to_energy(max_energy))
    return max_energy + pmax + 3


# ---------------------------------------------------------------------------
# linear system


@dataclass
class ConstraintSystem:
    curve: NodalSpec
    cutoff: int
    charge_total: int | None
    columns: list
    index: dict
    rows: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    form_bound: int = 0
    function_bound: int = 0


def gauge_row(curve: NodalSpec, ops: Sequence[ModeOperator], v: tuple) -> dict:
    """sum_j rho_j(op_j) v as a map tuple -> coefficient."""
    out: dict = {}
    for j, op in enumerate(ops, start=1):
        if not op.coeffs:
            continue
        for key, c in apply_rho_key(j, op, v):
            out[key] = out.get(key, ZERO) + c
    return {k: c for k, c in out.items() if c}


def assemble(curve, cutoff: int, charge_total: int | None = "auto", form_bound: int | None = None,
             function_bound: int | None = None) -> ConstraintSystem:
    """Rows <Phi| sum_j rho_j(op[g_j]) |v> = 0 for basis forms/functions g and test tuples v.

    ``charge_total="auto"`` restricts the unknowns to the sector
    sum p_i = (#nodes - #components); ``None`` keeps every charge.
    """
    curve = as_curve(curve)
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    if charge_total == "auto":
        charge_total = curve.charge_total()
    N = curve.n_outer
    if form_bound is None:
        form_bound = cutoff + 2
    if function_bound is None:
        function_bound = cutoff + 1
    cols = enumerate_tuples(N, cutoff, charge_total)
    # high energy first: rows then arrive nearly in echelon form
    cols.sort(key=lambda k: (-tuple_energy(k), tuple_sort_key(k)))
    index = {k: i for i, k in enumerate(cols)}
    sys_ = ConstraintSystem(curve, cutoff, charge_total, cols, index, form_bound=form_bound,
                            function_bound=function_bound)
    order = expansion_order(cutoff)
    for kind, bound in ((FORM, form_bound), (FUNCTION, function_bound)):
        shift = 1 if kind == FORM else -1
        tests_by_energy: dict = {}
        for bi, g in enumerate(global_basis(curve, kind, bound)):
            ops = local_ops(curve, g, order)
            top = max(_op_raise(op) for op in ops)
            emax = cutoff - top
            if emax < 0:
                continue
            if emax not in tests_by_energy:
                tests_by_energy[emax] = enumerate_tuples(
                    N, emax, None if charge_total is None else charge_total + shift)
            for v in tests_by_energy[emax]:
                row = gauge_row(curve, ops, v)
                if not row:
                    continue
                sys_.rows.append({index[k]: c for k, c in row.items() if k in index})
                sys_.labels.append((kind, bi, v))
    return sys_


@dataclass
class GhostVacuum:
    functional: DualFunctional
    curve: NodalSpec
    cutoff: int
    charge_total: int | None

    def __call__(self, key: tuple) -> Fraction:
        return self.functional(key)

    def value(self, key: tuple) -> Fraction:
        return self.functional(key)

    @property
    def arity(self) -> int:
        return self.functional.arity

    def to_json(self):
        return {"curve": self.curve.to_json(), "cutoff": self.cutoff, "charge_total": self.charge_total,
                "functional": self.functional.to_json()}


@dataclass
class SolveResult:
    vacua: list
    rank: int
    n_unknowns: int
    n_rows: int


def solve(system: ConstraintSystem, details: bool = False):
    """Kernel of the assembled system, as normalized ghost vacua."""
    elim = SparseEliminator(len(system.columns))
    for row in system.rows:
        elim.add_row(row)
    out = []
    for vec in elim.kernel():
        vals = {system.columns[c]: v for c, v in vec.items() if v}
        phi = DualFunctional(system.curve.n_outer, system.cutoff, vals).normalized()
        out.append(GhostVacuum(phi, system.curve, system.cutoff, system.charge_total))
    out.sort(key=lambda g: tuple_sort_key(min(g.functional.values, key=tuple_sort_key)) if g.functional.values else ())
    if details:
        return SolveResult(out, elim.rank, len(system.columns), len(system.rows))
    return out


def solve_vacuum(curve, cutoff: int, escalate: int = 1, **kw) -> GhostVacuum:
    """Solve, check the kernel is one-dimensional and stable when pole bounds grow by 2."""
    curve = as_curve(curve)
    fb = kw.pop("form_bound", cutoff + 2)
    gb = kw.pop("function_bound", cutoff + 1)
    prev = None
    for step in range(escalate + 1):
        sols = solve(assemble(curve, cutoff, form_bound=fb + 2 * step, function_bound=gb + 2 * step, **kw))
        if len(sols) != 1:
            raise ValueError(f"kernel dimension {len(sols)} at cutoff {cutoff} (expected 1)")
        if prev is not None and prev.functional != sols[0].functional:
            raise ValueError("vacuum changed under pole-bound escalation")
        prev = sols[0]
    return prev


# ---------------------------------------------------------------------------
# residuals


def gauge_residual(vac, obj: GlobalObject, curve=None, cutoff: int | None = None) -> Fraction:
    """max |sum_j vac(rho_j(op[obj_j]) v)| over test tuples v inside the cutoff."""
    curve = as_curve(curve if curve is not None else vac.curve)
    if cutoff is None:
        cutoff = vac.cutoff
    charge_total = getattr(vac, "charge_total", None)
    if charge_total is None:
        charge_total = curve.charge_total()
    shift = 1 if obj.kind == FORM else -1
    ops = local_ops(curve, obj, expansion_order(cutoff))
    top = max(_op_raise(op) for op in ops)
    worst = Fraction(0)
    for v in enumerate_tuples(curve.n_outer, cutoff - top, charge_total + shift):
        s = ZERO
        for k, c in gauge_row(curve, ops, v).items():
            s += c * vac(k)
        worst = max(worst, abs(s))
    return worst


# ---------------------------------------------------------------------------
# lazily evaluated vacua


class LazyVacuum:
    """A vacuum evaluated on demand (memoized)."""

    arity: int
    charge_total: int
    cutoff = math.inf

    def __call__(self, key: tuple) -> Fraction:
        raise NotImplementedError

    def value(self, key):
        return self(key)

    def materialize(self, cutoff: int) -> DualFunctional:
        if cutoff > self.cutoff:
            raise CutoffError("requested cutoff exceeds the exact range of the source")
        vals = {}
        for key in enumerate_tuples(self.arity, cutoff, self.charge_total):
            v = self(key)
            if v:
                vals[key] = v
        return DualFunctional(self.arity, cutoff, vals)


class FunctionalVacuum(LazyVacuum):
    """Wrap a DualFunctional (or any callable) as a lazy vacuum."""

    def __init__(self, fn, arity: int, charge_total: int, cutoff=math.inf):
        self.fn = fn
        self.arity = arity
        self.charge_total = charge_total
        self.cutoff = cutoff

    def __call__(self, key):
        if tuple_charge(key) != self.charge_total:
            return ZERO
        return self.fn(key)


def bra_vacuum(*diagrams: MayaDiagram) -> FunctionalVacuum:
    phi = DualFunctional.bra(*diagrams)
    return FunctionalVacuum(phi, len(diagrams), sum(m.charge for m in diagrams))


class PropagatedVacuum(LazyVacuum):
    """Extension of a vacuum on the first N outer slots of ``curve`` to the
    last slot, with <Phi|u (x) 0> = <phi|u>.

    The value on u (x) w is reduced to states with fewer deviations in the
    last slot: w = s A w' for its outermost fermion A, and A is realized as
    the principal part of a global form/function at the new point.
    """

    def __init__(self, base, curve):
        self.base = base
        self.curve = as_curve(curve)
        self.arity = self.curve.n_outer
        if base.arity != self.arity - 1:
            raise ValueError("curve must have exactly one more outer point than the base vacuum")
        self.charge_total = base.charge_total
        self.cutoff = getattr(base, "cutoff", math.inf)
        self.memo: dict = {}
        self.aux: dict = {}
        self.order = 8

    def _compensator(self):
        new = self.curve.outer[-1]
        for s in self.curve.outer[:-1]:
            if s[0] == new[0]:
                return s
        for s in self.curve.glued_slots():
            if s[0] == new[0]:
                return s
        raise ValueError("new point needs another marked point on its component")

    def _ops(self, kind: str, exponent: int, order: int):
        key = (kind, exponent)
        hit = self.aux.get(key)
        if hit is None or hit[0] < order:
            obj_kind = FORM if kind == PSI else FUNCTION
            obj = self.aux_obj.get(key) if hasattr(self, "aux_obj") else None
            if obj is None:
                obj = principal_object(self.curve, obj_kind, self.curve.outer[-1], exponent,
                                       compensate=self._compensator() if obj_kind == FORM else None)
                self.__dict__.setdefault("aux_obj", {})[key] = obj
            ops = local_ops(self.curve, obj, order)
            last = ops[-1]
            rest = ModeOperator(last.kind, {t: c for t, c in last.coeffs.items() if t > 0}, last.bound)
            hit = (order, ops[:-1], rest)
            self.aux[key] = hit
        return hit[1], hit[2]

    def __call__(self, key: tuple) -> Fraction:
        if tuple_charge(key) != self.charge_total:
            return ZERO
        if tuple_energy(key) > self.cutoff:
            raise CutoffError("tuple outside the exact range of the base vacuum")
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        while True:
            try:
                val = self._eval(key)
                break
            except TruncationError:
                self.order *= 2
                self.aux.clear()
        self.memo[key] = val
        return val

    def _eval(self, key: tuple) -> Fraction:
        u, w = key[:-1], key[-1]
        if w == VACUUM:
            return self.base(u)
        if w.mus:
            x = w.max_particle()
            kind, t = PSIBAR, -x
            w1 = w.without(x)
            s, chk = psibar_on(t, w1)
        else:
            y = w.nus[-1]
            kind, t = PSI, y
            w1 = w.with_(y)
            s, chk = psi_on(t, w1)
        assert chk == w
        # psi_{t/2} <- xi^((t-1)/2) dxi ; psibar_{t/2} <- xi^((t-1)/2)
        exponent = (t - 1) // 2
        ops, rest = self._ops(kind, exponent, max(self.order, tuple_energy(key) + 6))
        total = ZERO
        pu = sum(m.charge for m in u) & 1
        inner = ZERO
        for j, op in enumerate(ops, start=1):
            if not op.coeffs:
                continue
            for u2, c in apply_rho_key(j, op, u):
                inner += c * self(u2 + (w1,))
        total -= -inner if pu else inner
        for w2, c in rest.on_basis(w1):
            total -= c * self(u + (w2,))
        return total if s > 0 else -total


def propagate(base, curve, cutoff: int | None = None):
    """Vacuum on ``curve`` (one more outer point than ``base``, the new one last).

    Returns a lazy vacuum, or a materialized GhostVacuum when a cutoff is given.
    """
    if isinstance(base, GhostVacuum):
        src = FunctionalVacuum(base.functional, base.arity, base.charge_total, base.cutoff)
    elif isinstance(base, DualFunctional):
        src = FunctionalVacuum(base, base.arity, _charge_of(base), base.cutoff)
    else:
        src = base
    lazy = PropagatedVacuum(src, curve)
    if cutoff is None:
        return lazy
    return GhostVacuum(lazy.materialize(cutoff), as_curve(curve), cutoff, lazy.charge_total)


def _charge_of(phi: DualFunctional) -> int:
    charges = {tuple_charge(k) for k in phi.values}
    if len(charges) != 1:
        raise ValueError("functional is not charge-homogeneous")
    return charges.pop()


def restrict_last(phi, cutoff: int | None = None) -> DualFunctional:
    """iota^*: u -> phi(u (x) |0>)."""
    arity = phi.arity - 1
    cut = phi.cutoff if cutoff is None else cutoff
    ct = getattr(phi, "charge_total", None)
    vals = {}
    for key in enumerate_tuples(arity, cut, ct):
        v = phi(key + (VACUUM,))
        if v:
            vals[key] = v
    return DualFunctional(arity, cut, vals)


# ---------------------------------------------------------------------------
# slot permutations


def koszul_sign(charges: Sequence[int], perm: Sequence[int]) -> int:
    """Sign of moving graded factors from order 0..N-1 to order perm[0], perm[1], ..."""
    s = 1
    n = len(perm)
    for a in range(n):
        for b in range(a + 1, n):
            if perm[a] > perm[b] and charges[perm[a]] & 1 and charges[perm[b]] & 1:
                s = -s
    return s


class PermutedVacuum(LazyVacuum):
    """Psi(u_1 .. u_N) = sign * Phi(v) where slot i of Psi is slot perm[i] of Phi."""

    def __init__(self, inner, perm: Sequence[int]):
        self.inner = inner
        self.perm = list(perm)
        self.arity = inner.arity
        self.charge_total = inner.charge_total
        self.cutoff = getattr(inner, "cutoff", math.inf)

    def __call__(self, key):
        v = [None] * len(key)
        for i, pi in enumerate(self.perm):
            v[pi] = key[i]
        v = tuple(v)
        sign = koszul_sign([m.charge for m in v], self.perm)
        val = self.inner(v)
        return val if sign > 0 else -val


def permute_slots(phi, perm: Sequence[int]):
    if isinstance(phi, DualFunctional):
        out = {}
        for key, val in phi.values.items():
            newkey = tuple(key[p] for p in perm)
            sign = koszul_sign([m.charge for m in key], perm)
            out[newkey] = val if sign > 0 else -val
        return DualFunctional(phi.arity, phi.cutoff, out)
    return PermutedVacuum(phi, perm)


# ---------------------------------------------------------------------------
# products


class ProductVacuum(LazyVacuum):
    """phi1 (x) phi2 on the disjoint union, slots of phi1 first."""

    def __init__(self, a, b):
        self.a, self.b = a, b
        self.arity = a.arity + b.arity
        self.charge_total = a.charge_total + b.charge_total
        self.cutoff = min(getattr(a, "cutoff", math.inf), getattr(b, "cutoff", math.inf))

    def __call__(self, key):
        k1, k2 = key[: self.a.arity], key[self.a.arity:]
        if tuple_charge(k1) != self.a.charge_total:
            return ZERO
        x = self.a(k1)
        return x * self.b(k2) if x else ZERO


# ---------------------------------------------------------------------------
# the node


def node_pair_vector():
    """|0_{+,-}> = |0> (x) |-1> - |-1> (x) |0> as a list of (pair, coefficient)."""
    minus = MayaDiagram((), (-1,))
    return [((VACUUM, minus), Fraction(1)), ((minus, VACUUM), Fraction(-1))]


def node_restrict(phi_norm, cutoff: int | None = None, scale=1) -> DualFunctional:
    """<Phi~|0_{+,-} (x) u>, slots (P+, P-, Q...) on the normalization."""
    arity = phi_norm.arity - 2
    cut = getattr(phi_norm, "cutoff", math.inf) if cutoff is None else cutoff
    ct = phi_norm.charge_total + 1
    vals = {}
    for key in enumerate_tuples(arity, cut, ct):
        s = ZERO
        for pair_, c in node_pair_vector():
            s += c * phi_norm(pair_ + key)
        if s:
            vals[key] = s * scale
    return DualFunctional(arity, cut, vals)


class NodeExtension(LazyVacuum):
    """(iota*_{+,-})^{-1}: a vacuum on the nodal curve -> vacuum on the
    normalization with slots (P+, P-, Q_1..Q_N), for one node."""

    def __init__(self, phi, nodal: NodalSpec):
        nodal = as_curve(nodal)
        if len(nodal.glue) != 1:
            raise ValueError("node_extend handles one node at a time")
        self.nodal = nodal
        self.phi = phi if isinstance(phi, LazyVacuum) else FunctionalVacuum(
            phi, phi.arity, nodal.charge_total(), phi.cutoff)
        plus, minus = nodal.glue[0]
        n = nodal.n_outer
        # f = -1 + O(z) at P+, O(w) at P-, poles only at the outer points
        base_curve = NodalSpec(nodal.components, [], list(nodal.outer) + [plus, minus])
        self.norm_curve = NodalSpec(nodal.components, [], [plus, minus] + list(nodal.outer))
        f = None
        for k in range(1, 8):
            try:
                f = solve_object(base_curve, FUNCTION, {s: k for s in nodal.outer},
                                 [(plus, 0, -1), (minus, 0, 0)])
                break
            except ValueError:
                continue
        if f is None:
            raise ValueError("no function with the required values at the node branches")
        self.f = f
        self.outer_curve = NodalSpec(nodal.components, [], list(nodal.outer))
        self._ops = None
        self._order = 8
        self._memo: dict = {}
        cut = getattr(self.phi, "cutoff", math.inf)
        # psibar[f] raises energy by at most the pole order of f
        self.start = FunctionalVacuum(self._start, n, nodal.charge_total() - 1, cut - k)
        c1 = NodalSpec(nodal.components, [], list(nodal.outer) + [plus])
        c2 = NodalSpec(nodal.components, [], list(nodal.outer) + [plus, minus])
        step1 = PropagatedVacuum(self.start, c1)
        step2 = PropagatedVacuum(step1, c2)
        perm = [n, n + 1] + list(range(n))
        self.lazy = PermutedVacuum(step2, perm)
        self.arity = n + 2
        self.charge_total = self.start.charge_total
        self.cutoff = self.start.cutoff

    def _start(self, key):
        """u -> sum_j phi(rho_j(psibar[f_j]) u)."""
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        while True:
            try:
                ops = self._local(max(self._order, tuple_energy(key) + 6))
                s = ZERO
                for j, op in enumerate(ops, start=1):
                    if op.coeffs:
                        for k2, c in apply_rho_key(j, op, key):
                            s += c * self.phi(k2)
                break
            except TruncationError:
                self._order *= 2
                self._ops = None
        self._memo[key] = s
        return s

    def _local(self, order):
        if self._ops is None or self._ops[0] < order:
            self._ops = (order, local_ops(self.outer_curve, self.f, order))
        return self._ops[1]

    def __call__(self, key):
        return self.lazy(key)


def node_extend(phi, nodal, cutoff: int | None = None):
    ext = NodeExtension(phi, nodal)
    if cutoff is None:
        return ext
    return GhostVacuum(ext.materialize(cutoff), ext.norm_curve, cutoff, ext.charge_total)


# ---------------------------------------------------------------------------
# vacua of marked projective lines without solving


def p1_vacuum(curve) -> LazyVacuum:
    """The vacuum of a single marked P^1 (all coordinates allowed), built
    from <-1| at an outer point with an affine coordinate by propagation,
    then reordered to the curve's outer slot order."""
    curve = as_curve(curve)
    if len(curve.components) != 1 or curve.glue:
        raise ValueError("p1_vacuum needs a single smooth component")
    comp = curve.components[0]
    start = None
    for j, (ci, pi) in enumerate(curve.outer):
        c = comp.coords[pi]
        if c is None or (c.series.trunc == math.inf and set(c.series.coeffs) == {1}):
            start = j
            break
    if start is None:
        from .coordchange import p1_preferred_vacuum

        base = p1_preferred_vacuum(comp, curve.outer[0][1])
        start = 0
    else:
        base = bra_vacuum(MayaDiagram((), (-1,)))
    order = [start] + [j for j in range(curve.n_outer) if j != start]
    vac = base
    for m in range(2, curve.n_outer + 1):
        sub = NodalSpec([comp], [], [curve.outer[order[i]] for i in range(m)])
        vac = PropagatedVacuum(vac, sub)
    # vac slot i is curve slot order[i]; want slot j of result = curve slot j
    perm = [order.index(j) for j in range(curve.n_outer)]
    if perm == list(range(curve.n_outer)):
        return vac
    return PermutedVacuum(vac, perm)
