"""Pairings between Fock spaces of opposite charge, dual bases, and the
sewing q-series across a node, with its formal gauge and Fuchsian checks."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .curve import FORM, FUNCTION, MarkedP1, NodalSpec, as_curve, family_form_lift, family_function_lift, p1_bidifferential
from .errors import TruncationError
from .fock import (
    PSI,
    PSIBAR,
    ZERO,
    DualFunctional,
    FockVector,
    TOperator,
    apply_rho_key,
    mode_on,
    smear,
    tuple_energy,
)
from .laurent import central_charge_term, projective_connection
from .maya import MayaDiagram, enumerate_basis, reflect, shift, unshift
from .vacua import LazyVacuum, enumerate_tuples, p1_vacuum


def alpha(n: int) -> int:
    """+1 for n = 1, 2 mod 4 and -1 for n = 0, 3 mod 4."""
    return 1 if n % 4 in (1, 2) else -1


# ---------------------------------------------------------------------------
# pairings


def _linear(fn, v: FockVector) -> FockVector:
    return FockVector({fn(m): c for m, c in v.items()})


def reflect_vec(v: FockVector) -> FockVector:
    return _linear(reflect, v)


def shift_vec(v: FockVector) -> FockVector:
    return _linear(shift, v)


def unshift_vec(v: FockVector) -> FockVector:
    return _linear(unshift, v)


def pair_sym(u: FockVector, v: FockVector) -> Fraction:
    """(u | v) with the Maya basis orthonormal."""
    if len(u.terms) > len(v.terms):
        u, v = v, u
    return sum((c * v.terms.get(m, ZERO) for m, c in u.items()), ZERO)


def _charge(v: FockVector):
    cs = {m.charge for m, _ in v.items()}
    if len(cs) > 1:
        raise ValueError("vector is not charge-homogeneous")
    return cs.pop() if cs else None


def pair_braced(u: FockVector, v: FockVector, variant: str = "plain") -> Fraction:
    """{u | v} = alpha(charge u) (u | r(v)); the plus variant is {u | s(v)}."""
    if variant == "plus":
        return pair_braced(u, shift_vec(v), "plain")
    if variant != "plain":
        raise ValueError(f"unknown pairing variant {variant!r}")
    p, q = _charge(u), _charge(v)
    if p is None or q is None:
        return ZERO
    if p != -q:
        raise ValueError(f"charges {p} and {q} cannot be paired")
    return alpha(p) * pair_sym(u, reflect_vec(v))


def dual_basis_plus(p: int, d: int):
    """Basis v_i of F_d(p) and v^i of F_d(-p-1) with {v_i | v^j}_+ = delta."""
    basis = list(enumerate_basis(p, d))
    a = alpha(p)
    return basis, [FockVector.basis(unshift(reflect(m)), Fraction(a)) for m in basis]


# ---------------------------------------------------------------------------
# exhaustive adjointness checks


def _mode_image(kind: str, t: int, m: MayaDiagram) -> FockVector:
    r = mode_on(kind, t, m)
    return FockVector() if r is None else FockVector.basis(r[1], Fraction(r[0]))


def _window(max_degree: int, max_charge: int):
    return [m for p in range(-max_charge, max_charge + 1) for d in range(max_degree + 1) for m in enumerate_basis(p, d)]


def pairing_checks(max_degree: int = 5, max_charge: int = 3, max_mode: int = 9) -> dict:
    """Counts of failures for the adjointness identities on all basis pairs.

    sym:    (psi_t u | v) = (u | psibar_-t v),  (psibar_t u | v) = (u | psi_-t v)
    braced: {psi_t u | v} = (-1)^(-t-1/2) {u | psi_-t v},
            {psibar_t u | v} = (-1)^(-t+1/2) {u | psibar_-t v}
    plus:   {psi_t u | v}_+ = (-1)^(-t-1/2) {u | psi_(-t-1) v}_+,
            {psibar_t u | v}_+ = (-1)^(-t+1/2) {u | psibar_(-t+1) v}_+
    The psibar signs follow from the psi identities by applying r; the
    keys "*_psibar_sign_flipped" count pairs where the opposite psibar sign
    (-1)^(-t-1/2) would fail.  Modes t range over half-integers with
    |t| <= max_mode/2.
    """
    window = _window(max_degree, max_charge)
    by_charge: dict = {}
    for m in window:
        by_charge.setdefault(m.charge, []).append(m)
    modes = range(-max_mode, max_mode + 1, 2)
    fails = {"sym": 0, "braced": 0, "plus": 0, "gram_sym": 0, "gram_plus": 0}
    checked = {k: 0 for k in fails}
    flipped = {"braced_psibar_sign_flipped": 0, "plus_psibar_sign_flipped": 0}

    def sgn(t):
        return -1 if ((-t - 1) // 2) % 2 else 1

    for u in window:
        uv = FockVector.basis(u)
        for t in modes:
            for kind, dual in ((PSI, PSIBAR), (PSIBAR, PSI)):
                lhs_vec = _mode_image(kind, t, u)
                q = u.charge + (-1 if kind == PSI else 1)
                for v in by_charge.get(q, []):
                    vv = FockVector.basis(v)
                    checked["sym"] += 1
                    if pair_sym(lhs_vec, vv) != pair_sym(uv, _mode_image(dual, -t, v)):
                        fails["sym"] += 1
                for v in by_charge.get(-q, []):
                    vv = FockVector.basis(v)
                    checked["braced"] += 1
                    l = pair_braced(lhs_vec, vv) if lhs_vec else ZERO
                    r_vec = _mode_image(kind, -t, v)
                    r = pair_braced(uv, r_vec) if r_vec else ZERO
                    e = sgn(t) if kind == PSI else -sgn(t)
                    if l != e * r:
                        fails["braced"] += 1
                    if kind == PSIBAR and l != -e * r:
                        flipped["braced_psibar_sign_flipped"] += 1
                for v in by_charge.get(-q - 1, []):
                    vv = FockVector.basis(v)
                    checked["plus"] += 1
                    l = pair_braced(lhs_vec, vv, "plus") if lhs_vec else ZERO
                    t2 = -t - 2 if kind == PSI else -t + 2
                    r_vec = _mode_image(kind, t2, v)
                    r = pair_braced(uv, r_vec, "plus") if r_vec else ZERO
                    e = sgn(t) if kind == PSI else -sgn(t)
                    if l != e * r:
                        fails["plus"] += 1
                    if kind == PSIBAR and l != -e * r:
                        flipped["plus_psibar_sign_flipped"] += 1
    for p in range(-max_charge, max_charge + 1):
        for d in range(max_degree + 1):
            basis = enumerate_basis(p, d)
            for a in basis:
                for b in basis:
                    checked["gram_sym"] += 1
                    if pair_sym(FockVector.basis(a), FockVector.basis(b)) != (1 if a == b else 0):
                        fails["gram_sym"] += 1
            vs, duals = dual_basis_plus(p, d)
            for i, a in enumerate(vs):
                for j, b in enumerate(duals):
                    checked["gram_plus"] += 1
                    if pair_braced(FockVector.basis(a), b, "plus") != (1 if i == j else 0):
                        fails["gram_plus"] += 1
    return {"checked": checked, "failures": fails, "printed_sign_mismatches": flipped}


# ---------------------------------------------------------------------------
# sewing


class SewnCoefficient(LazyVacuum):
    """u -> sum over d + p(p+1)/2 = k of (-1)^(p+d) sum_i Phi(v_i (x) v^i (x) u)."""

    def __init__(self, phi, k: int, arity: int):
        self.phi = phi
        self.k = k
        self.arity = arity
        self.charge_total = phi.charge_total + 1
        self.cutoff = getattr(phi, "cutoff", math.inf)
        if self.cutoff != math.inf:
            self.cutoff -= 2 * k
        self.pairs = []
        p = 0
        while True:
            found = False
            for pp in (p, -p - 1):
                d = k - pp * (pp + 1) // 2
                if d >= 0:
                    found = True
                    sign = -1 if (pp + d) % 2 else 1
                    vs, duals = dual_basis_plus(pp, d)
                    for v, dv in zip(vs, duals):
                        ((w, c),) = dv.items()
                        self.pairs.append((v, w, c * sign))
            if not found:
                break
            p += 1
        self.memo: dict = {}

    def __call__(self, key):
        if sum(m.charge for m in key) != self.charge_total:
            return ZERO
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        s = ZERO
        for v, w, c in self.pairs:
            x = self.phi((v, w) + tuple(key))
            if x:
                s += c * x
        self.memo[key] = s
        return s


# q^0 coefficient = RESTRICTION_SIGN * (restriction through the node vector)
RESTRICTION_SIGN = -1


@dataclass
class SewnSeries:
    """Coefficients of q^k, k < q_order, as lazy functionals on the outer slots."""

    coeffs: list
    q_order: int
    arity: int
    charge_total: int

    def __getitem__(self, k: int):
        if not 0 <= k < self.q_order:
            raise TruncationError(f"q^{k} is outside the computed range q^0..q^{self.q_order - 1}")
        return self.coeffs[k]

    def materialize(self, cutoff: int) -> list[DualFunctional]:
        return [c.materialize(cutoff) for c in self.coeffs]

    def to_json(self, cutoff: int) -> dict:
        return {"q_order": self.q_order, "cutoff": cutoff, "coeffs": [f.to_json() for f in self.materialize(cutoff)]}


def sew(phi, q_order: int) -> SewnSeries:
    """Sewn series from a vacuum on the normalization with slots (P+, P-, Q_1..Q_N)."""
    if phi.arity < 2:
        raise ValueError("need the two branch slots first")
    if q_order < 0:
        raise ValueError("q_order must be nonnegative")
    cut = getattr(phi, "cutoff", math.inf)
    if cut != math.inf and 2 * (q_order - 1) > cut:
        raise TruncationError(f"vacuum cutoff {cut} too small for q^{q_order - 1}; raise it to {2 * (q_order - 1)}")
    n = phi.arity - 2
    coeffs = [SewnCoefficient(phi, k, n) for k in range(q_order)]
    return SewnSeries(coeffs, q_order, n, phi.charge_total + 1)


@dataclass
class SewingSetup:
    """Normalization (P^1 with P+, P-, Q's) prepared for sewing."""

    comp: MarkedP1
    plus: int
    minus: int
    outer: list
    field: object = None

    @property
    def normalization(self) -> NodalSpec:
        return NodalSpec([self.comp], [], [(0, self.plus), (0, self.minus)] + [(0, i) for i in self.outer])

    @property
    def nodal(self) -> NodalSpec:
        return NodalSpec([self.comp], [((0, self.plus), (0, self.minus))], [(0, i) for i in self.outer])


def sewing_setup(comp: MarkedP1, plus: int, minus: int, outer: Sequence[int], adjust: bool = True) -> SewingSetup:
    """With ``adjust``, replace the branch coordinates by those in which the
    sewing vector field is (1/2) z d/dz and (1/2) w d/dw."""
    from .curve import sewing_vector_field

    outer = list(outer)
    if adjust:
        field, new, _, _ = sewing_vector_field(comp, plus, minus, outer)
        return SewingSetup(new, plus, minus, outer, field)
    return SewingSetup(comp, plus, minus, outer, None)


def sew_p1(setup: SewingSetup, q_order: int) -> SewnSeries:
    return sew(p1_vacuum(setup.normalization), q_order)


def sew_restriction_sign(series: SewnSeries, setup: SewingSetup, cutoff: int) -> int:
    """The global sign s with q^0 coefficient = s * <Phi | 0_{+,-} (x) u>; 0 if neither sign fits."""
    from .vacua import node_restrict

    phi = p1_vacuum(setup.normalization)
    restr = node_restrict(phi, cutoff)
    q0 = series[0].materialize(cutoff)
    if q0 == restr:
        return 1
    if q0 == restr.scale(-1):
        return -1
    return 0


# ---------------------------------------------------------------------------
# formal gauge conditions


def random_matrix(rng: random.Random, size: int, span: int = 3) -> dict:
    return {(m, n): Fraction(rng.randint(-span, span), rng.randint(1, span)) for m in range(size) for n in range(size)}


def _series_product_residual(series: SewnSeries, ops_by_n: list, test: list, K: int) -> list[Fraction]:
    """Per k < K: max |coefficient of q^k| of sum_n q^n sum_j Phi~(q)(rho_j(op^(n)_j) u)."""
    worst = [ZERO] * K
    for u in test:
        for k in range(K):
            s = ZERO
            for n in range(k + 1):
                coeff = series[k - n]
                for j, op in enumerate(ops_by_n[n], start=1):
                    if not op.coeffs:
                        continue
                    for key, c in apply_rho_key(j, op, u):
                        s += c * coeff(key)
            worst[k] = max(worst[k], abs(s))
    return worst


def _lift_ops(setup: SewingSetup, objs, kind: str, max_energy: int):
    curve = setup.normalization
    n_out = len(setup.outer)
    order = 2 * max_energy + 12
    while True:
        try:
            ops = []
            for obj in objs:
                ops.append([smear(kind, curve.expand_outer(obj, 2 + j, order)) for j in range(n_out)])
            return ops
        except TruncationError:
            order *= 2


def form_gauge_residual(series: SewnSeries, setup: SewingSetup, a: dict, test_energy: int = 1,
                        per_order: bool = False):
    """First formal gauge condition against the forms lifted from the matrix a."""
    K = series.q_order
    taus = family_form_lift(setup.normalization, (0, setup.plus), (0, setup.minus), a, K)
    ops = _lift_ops(setup, taus, PSI, test_energy)
    test = enumerate_tuples(series.arity, test_energy, series.charge_total + 1)
    res = _series_product_residual(series, ops, test, K)
    return res if per_order else max(res, default=ZERO)


def function_gauge_residual(series: SewnSeries, setup: SewingSetup, b: dict, test_energy: int = 1,
                            per_order: bool = False):
    """Second formal gauge condition against the functions lifted from the matrix b."""
    K = series.q_order
    hs = family_function_lift(setup.normalization, (0, setup.plus), (0, setup.minus), b, K)
    ops = _lift_ops(setup, hs, PSIBAR, test_energy)
    test = enumerate_tuples(series.arity, test_energy, series.charge_total - 1)
    res = _series_product_residual(series, ops, test, K)
    return res if per_order else max(res, default=ZERO)


# ---------------------------------------------------------------------------
# Fuchsian equation


def central_value(setup: SewingSetup, order: int = 12) -> Fraction:
    """b = sum_j Res(l_j S_j dxi_j) over the outer points."""
    curve = setup.normalization
    fields, conns = [], []
    for j, i in enumerate(setup.outer):
        fields.append(setup.comp.expand(setup.field, i, order))
        conns.append(projective_connection(p1_bidifferential(setup.comp, i, order), order))
    return central_charge_term(fields, conns)


def fuchsian_check(series: SewnSeries, setup: SewingSetup, max_energy: int = 1, b: Fraction | None = None,
                   perturb: dict | None = None) -> dict:
    """Residual of q d/dq Phi~ + sum_j Phi~ rho_j(T[l_j]) + (b/6) Phi~ = 0, coefficientwise.

    Returns the per-order maxima and whether the q^0 part (no derivative
    contribution) vanishes.  ``perturb`` maps (k, tuple) to an additive
    change of a coefficient, for negative controls.
    """
    if setup.field is None:
        raise ValueError("setup has no sewing vector field")
    if b is None:
        b = central_value(setup)
    curve = setup.normalization
    n_out = len(setup.outer)
    order = max_energy + 16
    fields = [setup.comp.expand(setup.field, i, order) for i in setup.outer]
    T = [TOperator(f) for f in fields]
    perturb = perturb or {}

    def coeff(k, key):
        return series[k](key) + perturb.get((k, key), ZERO)

    per_order = []
    for k in range(series.q_order):
        worst = ZERO
        for u in enumerate_tuples(n_out, max_energy, series.charge_total):
            s = (k + b / 6) * coeff(k, u)
            for j in range(n_out):
                for key, c in apply_rho_key(j + 1, T[j], u):
                    s += c * coeff(k, key)
            worst = max(worst, abs(s))
        per_order.append(worst)
    return {"b": b, "per_order": per_order, "divisible_by_q": per_order[0] == 0 if per_order else True}
