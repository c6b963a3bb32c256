"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a JSON-ready report:
{"suite": name, "params": {...}, "checks": [{"name", "count", "failures",
"max_residual"}], "pass": bool}.  Randomized suites draw from
``random.Random(seed)`` so reports are reproducible.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

from . import coordchange as cc
from . import sewing as sw
from .curve import FORM, FUNCTION, MarkedP1, NodalSpec, form_basis, function_basis
from .fock import (
    PSI,
    PSIBAR,
    DualFunctional,
    FockVector,
    apply_fermion_left,
    apply_current,
    apply_virasoro,
    basis_window,
    frac_str,
)
from .laurent import LaurentSeries
from .maya import VACUUM, MayaDiagram
from .vacua import (
    GhostVacuum,
    assemble,
    bra_vacuum,
    gauge_residual,
    node_extend,
    node_restrict,
    permute_slots,
    propagate,
    restrict_last,
    solve,
    solve_vacuum,
)

MINUS_ONE = MayaDiagram((), (-1,))


class Report:
    def __init__(self, suite: str, **params):
        self.suite = suite
        self.params = params
        self.checks: list[dict] = []

    def add(self, name: str, count: int, failures: int, max_residual=Fraction(0), **extra):
        entry = {"name": name, "count": count, "failures": failures, "max_residual": frac_str(Fraction(max_residual))}
        entry.update({k: _jsonable(v) for k, v in extra.items()})
        self.checks.append(entry)

    def flag(self, name: str, ok: bool, **extra):
        self.add(name, 1, 0 if ok else 1, **extra)

    @property
    def passed(self) -> bool:
        return all(c["failures"] == 0 for c in self.checks)

    def to_json(self) -> dict:
        return {"suite": self.suite, "params": {k: _jsonable(v) for k, v in self.params.items()},
                "checks": self.checks, "pass": self.passed}


def _jsonable(v):
    if isinstance(v, Fraction):
        return frac_str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def _diff(a: FockVector, b: FockVector) -> Fraction:
    return max((abs(c) for _, c in (a - b).items()), default=Fraction(0))


def _rand_frac(rng: random.Random, span: int = 3) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, span))


# ---------------------------------------------------------------------------
# operator algebra


def anticommutators(max_degree: int = 6, max_charge: int = 3, max_mode: int = 9) -> dict:
    """[A_t, B_u]_+ = delta_{t+u,0} for (A, B) = (psi, psibar), zero otherwise."""
    rep = Report("anticomm", max_degree=max_degree, max_charge=max_charge, max_mode=f"{max_mode}/2")
    modes = range(-max_mode, max_mode + 1, 2)
    window = list(basis_window(max_degree, range(-max_charge, max_charge + 1)))
    for name, ka, kb in (("psi_psi", PSI, PSI), ("psibar_psibar", PSIBAR, PSIBAR), ("psi_psibar", PSI, PSIBAR)):
        count = fails = 0
        worst = Fraction(0)
        for m in window:
            v = FockVector.basis(m)
            for t in modes:
                av = apply_fermion_left(ka, t, v)
                for u in modes:
                    lhs = apply_fermion_left(kb, u, av) + apply_fermion_left(ka, t, apply_fermion_left(kb, u, v))
                    expected = v if (ka != kb and t + u == 0) else FockVector()
                    r = _diff(lhs, expected)
                    count += 1
                    if r:
                        fails += 1
                        worst = max(worst, r)
        rep.add(name, count, fails, worst)
    return rep.to_json()


def virasoro(max_degree: int = 8, max_charge: int = 2, max_n: int = 3, js=(Fraction(0), Fraction(1, 2), Fraction(1))) -> dict:
    """Virasoro, current and mixed commutators with their central terms."""
    rep = Report("virasoro", max_degree=max_degree, max_charge=max_charge, max_n=max_n, js=list(js))
    window = list(basis_window(max_degree, range(-max_charge, max_charge + 1)))
    ns = range(-max_n, max_n + 1)
    for j in js:
        j = Fraction(j)
        central = (6 * j * j - 6 * j + 1) / 6
        count = fails = 0
        worst = Fraction(0)
        for m in window:
            v = FockVector.basis(m)
            Lv = {n: apply_virasoro(j, n, v) for n in ns}
            for n in ns:
                for mm in ns:
                    lhs = apply_virasoro(j, n, Lv[mm]) - apply_virasoro(j, mm, Lv[n])
                    rhs = apply_virasoro(j, n + mm, v).scale(n - mm)
                    if n + mm == 0:
                        rhs = rhs - v.scale(central * (n ** 3 - n))
                    r = _diff(lhs, rhs)
                    count += 1
                    if r:
                        fails += 1
                        worst = max(worst, r)
        rep.add(f"L_L_j={j}", count, fails, worst)
        count = fails = 0
        worst = Fraction(0)
        for m in window:
            v = FockVector.basis(m)
            for n in ns:
                for mm in ns:
                    lhs = apply_virasoro(j, n, apply_current(mm, v)) - apply_current(mm, apply_virasoro(j, n, v))
                    rhs = apply_current(n + mm, v).scale(-mm)
                    if n + mm == 0:
                        rhs = rhs - v.scale(Fraction(2 * j - 1, 2) * (n * n + n))
                    r = _diff(lhs, rhs)
                    count += 1
                    if r:
                        fails += 1
                        worst = max(worst, r)
        rep.add(f"L_J_j={j}", count, fails, worst)
    count = fails = 0
    worst = Fraction(0)
    for m in window:
        v = FockVector.basis(m)
        for n in ns:
            for mm in ns:
                lhs = apply_current(n, apply_current(mm, v)) - apply_current(mm, apply_current(n, v))
                rhs = v.scale(n) if n + mm == 0 else FockVector()
                r = _diff(lhs, rhs)
                count += 1
                if r:
                    fails += 1
                    worst = max(worst, r)
    rep.add("J_J", count, fails, worst)
    _mode_relations(rep, window, ns)
    return rep.to_json()


def _mode_relations(rep: Report, window, ns, max_mode: int = 7):
    """[L_n, psi_t] = -(n + t + 1/2) psi_{n+t} and [L_n, psibar_t] = (1/2 - t) psibar_{n+t} at j = 0."""
    for kind in (PSI, PSIBAR):
        count = fails = 0
        worst = Fraction(0)
        for m in window:
            v = FockVector.basis(m)
            for n in ns:
                for t in range(-max_mode, max_mode + 1, 2):
                    lhs = (apply_virasoro(0, n, apply_fermion_left(kind, t, v))
                           - apply_fermion_left(kind, t, apply_virasoro(0, n, v)))
                    c = -Fraction(2 * n + t + 1, 2) if kind == PSI else Fraction(1 - t, 2)
                    r = _diff(lhs, apply_fermion_left(kind, t + 2 * n, v).scale(c))
                    count += 1
                    if r:
                        fails += 1
                        worst = max(worst, r)
        rep.add(f"L_{kind}", count, fails, worst)


def energy(max_degree: int = 8, max_charge: int = 3) -> dict:
    """L0 (j = 0) acts on |m> by d + p(p+1)/2, and J0 by p."""
    rep = Report("energy", max_degree=max_degree, max_charge=max_charge)
    count = fails = 0
    worst = Fraction(0)
    cf = 0
    for m in basis_window(max_degree, range(-max_charge, max_charge + 1)):
        v = FockVector.basis(m)
        r = _diff(apply_virasoro(0, 0, v), v.scale(m.degree + m.charge * (m.charge + 1) // 2))
        count += 1
        if r:
            fails += 1
            worst = max(worst, r)
        if _diff(apply_current(0, v), v.scale(m.charge)):
            cf += 1
    rep.add("L0_eigenvalue", count, fails, worst)
    rep.add("J0_eigenvalue", count, cf)
    return rep.to_json()


def pairings(max_degree: int = 5, max_charge: int = 3, max_mode: int = 9) -> dict:
    rep = Report("pairings", max_degree=max_degree, max_charge=max_charge, max_mode=f"{max_mode}/2")
    out = sw.pairing_checks(max_degree, max_charge, max_mode)
    for key in out["checked"]:
        rep.add(key, out["checked"][key], out["failures"][key])
    rep.add("r_involution_and_shift_inverse", *_structural_maps(max_degree, max_charge))
    rep.params["printed_sign_mismatches"] = out["printed_sign_mismatches"]
    return rep.to_json()


def _structural_maps(max_degree, max_charge):
    from .maya import reflect, shift, unshift

    count = fails = 0
    for m in basis_window(max_degree, range(-max_charge, max_charge + 1)):
        count += 1
        if reflect(reflect(m)) != m or unshift(shift(m)) != m or shift(unshift(m)) != m:
            fails += 1
        if shift(m).degree != m.degree or reflect(m).degree != m.degree:
            fails += 1
    return count, fails


# ---------------------------------------------------------------------------
# vacua


def standard_curves() -> dict:
    """The curve zoo used by the dimension suite."""
    p1 = MarkedP1(["0", "inf", "1"])
    h = cc.CoordChange.from_coeffs([1, Fraction(1, 2), -1])
    return {
        "P1_one_point": NodalSpec([MarkedP1(["0"])]),
        "P1_two_points": NodalSpec([MarkedP1(["0", "inf"])]),
        "P1_three_points": NodalSpec([MarkedP1(["0", "inf", "1"], [None, None, h])]),
        "nodal_P1": NodalSpec([p1], [((0, 0), (0, 1))], [(0, 2)]),
        "two_glued_P1": NodalSpec([MarkedP1(["0", "inf"]), MarkedP1(["0", "inf"])], [((0, 1), (1, 0))]),
    }


def example_one_point(cutoff: int = 8) -> dict:
    rep = Report("example", cutoff=cutoff)
    sols = solve(assemble(NodalSpec([MarkedP1(["0"])]), cutoff))
    rep.flag("kernel_dimension_1", len(sols) == 1, dimension=len(sols))
    expected = DualFunctional(1, cutoff, {(MINUS_ONE,): Fraction(1)})
    rep.flag("equals_bra_minus_one", bool(sols) and sols[0].functional == expected)
    return rep.to_json()


def _residual_sweep(vac: GhostVacuum, bound: int) -> tuple[int, Fraction]:
    objs = form_basis(vac.curve, bound) + function_basis(vac.curve, bound)
    worst = Fraction(0)
    for g in objs:
        worst = max(worst, gauge_residual(vac, g))
    return len(objs), worst


def dimensions(max_cutoff: int = 6, unrestricted_cutoff: int = 3) -> dict:
    """Kernel dimension 1 and stability under pole-bound escalation."""
    rep = Report("dimension", max_cutoff=max_cutoff, unrestricted_cutoff=unrestricted_cutoff)
    for name, curve in standard_curves().items():
        for D in sorted({1, max_cutoff}):
            try:
                vac = solve_vacuum(curve, D, escalate=2)
                ok = True
            except ValueError:
                ok = False
            rep.flag(f"{name}_D={D}_dim1_stable", ok)
        if ok:
            n, worst = _residual_sweep(solve_vacuum(curve, min(max_cutoff, 3)), 3)
            rep.add(f"{name}_gauge_residuals", n, 1 if worst else 0, worst)
        sols = solve(assemble(curve, unrestricted_cutoff, charge_total=None))
        charges = {sum(c) for s in sols for c in s.functional.support_charges()}
        rep.flag(f"{name}_support_charge", len(sols) == 1 and charges == {curve.charge_total()},
                 charges=sorted(charges), expected=curve.charge_total())
    return rep.to_json()


def propagation(cutoff: int = 5) -> dict:
    rep = Report("propagation", cutoff=cutoff)
    comp = MarkedP1(["0", "inf", "1"], [None, cc.CoordChange.from_coeffs([2, 1]), None])
    one = bra_vacuum(MINUS_ONE)
    two_curve = NodalSpec([comp], [], [(0, 0), (0, 1)])
    prop = propagate(one, two_curve)
    mat = prop.materialize(cutoff)
    direct = solve_vacuum(two_curve, cutoff).functional
    rep.flag("equals_direct_solve", mat.normalized() == direct)
    rep.flag("restriction_recovers_input", restrict_last(mat) == DualFunctional.bra(MINUS_ONE).restrict(cutoff))
    three = NodalSpec([comp], [], [(0, 0), (0, 1), (0, 2)])
    a = propagate(prop, three).materialize(cutoff - 1)
    alt_two = NodalSpec([comp], [], [(0, 0), (0, 2)])
    alt_three = NodalSpec([comp], [], [(0, 0), (0, 2), (0, 1)])
    b = permute_slots(propagate(propagate(one, alt_two), alt_three), [0, 2, 1]).materialize(cutoff - 1)
    rep.flag("transitive", a == b)
    rep.flag("three_point_matches_solve", a.normalized() == solve_vacuum(three, cutoff - 1).functional)
    return rep.to_json()


def nodal(cutoff: int = 4) -> dict:
    rep = Report("nodal", cutoff=cutoff)
    nod = standard_curves()["nodal_P1"]
    phi = solve_vacuum(nod, cutoff)
    ext = node_extend(phi.functional, nod)
    D = ext.cutoff
    rep.flag("restriction_of_extension_is_identity", node_restrict(ext, D) == phi.functional.restrict(D))
    ev = GhostVacuum(ext.materialize(D), ext.norm_curve, D, ext.charge_total)
    n, worst = _residual_sweep(ev, 3)
    rep.add("extension_gauge_residuals", n, 1 if worst else 0, worst)
    rep.flag("extension_matches_normalization_solve", ev.functional.normalized() == solve_vacuum(ext.norm_curve, D).functional)
    c = Fraction(3, 2)
    rep.flag("scaling_node_vector_scales_iso", node_restrict(ext, D, scale=c) == phi.functional.restrict(D).scale(c))
    return rep.to_json()


# ---------------------------------------------------------------------------
# sewing


def sewing(q_order: int = 5, matrices: int = 20, seed: int = 0, test_energy: int = 1) -> dict:
    rep = Report("sewing", q_order=q_order, matrices=matrices, seed=seed, test_energy=test_energy)
    setup = sw.sewing_setup(MarkedP1(["0", "inf", "1"]), 0, 1, [2])
    series = sw.sew_p1(setup, q_order)
    sign = sw.sew_restriction_sign(series, setup, 3)
    rep.flag("q0_equals_restriction_up_to_recorded_sign", sign == sw.RESTRICTION_SIGN, sign=sign)
    rng = random.Random(seed)
    worst = Fraction(0)
    fails = 0
    for _ in range(matrices):
        r = sw.form_gauge_residual(series, setup, sw.random_matrix(rng, q_order), test_energy)
        worst = max(worst, r)
        fails += bool(r)
    rep.add("first_gauge_condition", matrices, fails, worst)
    worst = Fraction(0)
    fails = 0
    for _ in range(matrices):
        r = sw.function_gauge_residual(series, setup, sw.random_matrix(rng, q_order), test_energy)
        worst = max(worst, r)
        fails += bool(r)
    rep.add("second_gauge_condition", matrices, fails, worst)
    return rep.to_json()


def fuchsian(q_order: int = 4, max_energy: int = 2) -> dict:
    rep = Report("fuchsian", q_order=q_order, max_energy=max_energy)
    for name, coord in (("affine_Q", None), ("adjusted_Q", cc.CoordChange.from_coeffs([1, Fraction(1, 2), 2]))):
        comp = MarkedP1(["0", "inf", "1"], [None, None, coord])
        setup = sw.sewing_setup(comp, 0, 1, [2])
        series = sw.sew_p1(setup, q_order)
        out = sw.fuchsian_check(series, setup, max_energy)
        worst = max(out["per_order"])
        rep.add(f"{name}_residual", len(out["per_order"]), sum(1 for x in out["per_order"] if x), worst, b=out["b"])
        rep.flag(f"{name}_divisible_by_q", out["divisible_by_q"])
    return rep.to_json()


# ---------------------------------------------------------------------------
# coordinate changes and preferred elements


def random_unipotent(rng: random.Random, degree: int = 6) -> cc.CoordChange:
    return cc.CoordChange.from_coeffs([1] + [_rand_frac(rng) for _ in range(degree - 1)])


def covariance(samples: int = 10, seed: int = 0, max_energy: int = 4, max_charge: int = 2) -> dict:
    rep = Report("covariance", samples=samples, seed=seed, max_energy=max_energy, max_charge=max_charge)
    rng = random.Random(seed)
    worst = {"psi": Fraction(0), "psibar": Fraction(0), "T": Fraction(0)}
    fails = {k: 0 for k in worst}
    unadjusted = 0
    for _ in range(samples):
        h = random_unipotent(rng)
        f = LaurentSeries({k: _rand_frac(rng) for k in range(-2, 3)})
        g = LaurentSeries({k: _rand_frac(rng) for k in range(-2, 3)})
        l = LaurentSeries({k: _rand_frac(rng) for k in range(-3, 4)})
        res = cc.covariance_check(h, f, g, l, max_energy, max_charge)
        for k in worst:
            worst[k] = max(worst[k], res[k])
            fails[k] += bool(res[k])
        unadjusted += bool(res["T_unadjusted"])
    for k in worst:
        rep.add(f"conjugation_{k}", samples, fails[k], worst[k])
    rep.params["central_term_with_unmoved_field_failures"] = unadjusted
    worst_c = Fraction(0)
    fc = 0
    for _ in range(max(1, samples // 2)):
        r = cc.composition_check(random_unipotent(rng), random_unipotent(rng), max_energy, max_charge)
        worst_c = max(worst_c, r)
        fc += bool(r)
    rep.add("composition_reversed", max(1, samples // 2), fc, worst_c)
    return rep.to_json()


def preferred(samples: int = 6, seed: int = 0, cutoff: int = 5) -> dict:
    """Genus-0 preferred element: G[h]-covariance and point independence."""
    rep = Report("preferred", samples=samples, seed=seed, cutoff=cutoff)
    rng = random.Random(seed)
    base = DualFunctional(1, cutoff, {(MINUS_ONE,): Fraction(1)})
    plain = cc.preferred_element(cc.p1_normalized_data(MarkedP1(["0"]), 0, cutoff + 4), cutoff)
    rep.flag("affine_coordinate_gives_bra_minus_one", plain == base)
    hs = [random_unipotent(rng) for _ in range(samples)]
    hs += [cc.CoordChange.scaling(a) for a in (2, 3, Fraction(1, 2))]
    hs += [cc.CoordChange(random_unipotent(rng).series.scale(a)) for a in (2, Fraction(1, 2))]
    fails = 0
    for h in hs:
        moved = cc.G_apply(h, base, charge_total=-1)
        data = cc.p1_normalized_data(MarkedP1(["0"], [h]), 0, cutoff + 6)
        if moved != cc.preferred_element(data, cutoff):
            fails += 1
    rep.add("G_covariance", len(hs), fails)
    fails = 0
    for h in hs[:3]:
        comp = MarkedP1(["0", "1"], [h, None])
        vac = GhostVacuum(cc.preferred_p1(comp, [0, 1], cutoff), NodalSpec([comp]), cutoff, -1)
        n, worst = _residual_sweep(vac, 3)
        fails += bool(worst)
        other = permute_slots(cc.preferred_p1(comp, [1, 0]), [1, 0]).materialize(cutoff)
        fails += other != vac.functional
    rep.add("gauge_and_point_independence", 3, fails)
    return rep.to_json()


def preferred_nodal(cutoff: int = 4) -> dict:
    rep = Report("preferred_nodal", cutoff=cutoff)
    curves = standard_curves()
    two = cc.preferred_nodal(curves["two_glued_P1"], cutoff)
    val = two((MINUS_ONE, VACUUM))
    rep.flag("two_glued_value_is_unit", val in (1, -1), value=val)
    rep.flag("two_glued_matches_solve", two.normalized() == solve_vacuum(curves["two_glued_P1"], cutoff).functional)
    nod = curves["nodal_P1"]
    pn = cc.preferred_nodal(nod, cutoff)
    n, worst = _residual_sweep(GhostVacuum(pn, nod, cutoff, 0), 3)
    rep.add("irreducible_gauge_residuals", n, 1 if worst else 0, worst)
    ext = node_extend(pn, nod)
    factor = ext((VACUUM, VACUUM, MINUS_ONE))
    rep.flag("genus_sign_factor", factor == -1, value=factor, expected="(-1)^g with g = 1")
    return rep.to_json()


SUITES: dict[str, Callable[..., dict]] = {
    "anticomm": anticommutators,
    "virasoro": virasoro,
    "energy": energy,
    "pairings": pairings,
    "example": example_one_point,
    "dimension": dimensions,
    "propagation": propagation,
    "nodal": nodal,
    "sewing": sewing,
    "fuchsian": fuchsian,
    "covariance": covariance,
    "preferred": preferred,
    "preferred_nodal": preferred_nodal,
}
