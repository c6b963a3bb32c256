from fractions import Fraction

from bcghost.coordchange import CoordChange
from bcghost.curve import MarkedP1, NodalSpec, form_basis, function_basis
from bcghost.fock import DualFunctional
from bcghost.maya import VACUUM, MayaDiagram
from bcghost.vacua import (
    ProductVacuum,
    assemble,
    bra_vacuum,
    enumerate_tuples,
    gauge_residual,
    koszul_sign,
    node_extend,
    node_restrict,
    p1_vacuum,
    permute_slots,
    propagate,
    restrict_last,
    solve,
    solve_vacuum,
)

MINUS_ONE = MayaDiagram((), (-1,))


def test_one_point_vacuum_is_bra_minus_one():
    for D in (2, 4):
        vac = solve_vacuum(NodalSpec([MarkedP1(["0"])]), D)
        assert vac.functional == DualFunctional(1, D, {(MINUS_ONE,): 1})


def test_enumeration_respects_energy_and_charge():
    tuples = enumerate_tuples(2, 3, -1)
    assert len(set(tuples)) == len(tuples)
    for key in tuples:
        assert sum(m.energy for m in key) <= 3 and sum(m.charge for m in key) == -1


def test_unrestricted_charge_solve_two_points():
    sols = solve(assemble(NodalSpec([MarkedP1(["0", "inf"])]), 2, charge_total=None))
    assert len(sols) == 1
    assert {sum(c) for c in sols[0].functional.support_charges()} == {-1}


def test_solved_vacuum_has_zero_gauge_residuals():
    curve = NodalSpec([MarkedP1(["0", "1"], [CoordChange.from_coeffs([1, 2]), None])])
    vac = solve_vacuum(curve, 3)
    for obj in form_basis(curve, 3) + function_basis(curve, 3):
        assert gauge_residual(vac, obj) == 0


def test_propagation_matches_solve_and_restricts_back():
    curve = NodalSpec([MarkedP1(["0", "inf"])])
    prop = propagate(bra_vacuum(MINUS_ONE), curve)
    assert prop.materialize(4).normalized() == solve_vacuum(curve, 4).functional
    assert restrict_last(prop.materialize(4)) == DualFunctional(1, 4, {(MINUS_ONE,): 1})


def test_p1_vacuum_with_coordinates_matches_solve():
    comp = MarkedP1(["0", "inf", "1"], [CoordChange.from_coeffs([1, 1]), None, CoordChange.from_coeffs([3])])
    curve = NodalSpec([comp])
    assert p1_vacuum(curve).materialize(3).normalized() == solve_vacuum(curve, 3).functional


def test_koszul_sign_and_permutation():
    assert koszul_sign([1, 1], [1, 0]) == -1
    assert koszul_sign([1, 2], [1, 0]) == 1
    curve = NodalSpec([MarkedP1(["0", "inf"])])
    phi = solve_vacuum(curve, 3).functional
    swapped = permute_slots(permute_slots(p1_vacuum(curve), [1, 0]), [1, 0]).materialize(3)
    assert swapped.normalized() == phi


def test_product_equals_disjoint_union_solve():
    a = NodalSpec([MarkedP1(["0"])])
    b = NodalSpec([MarkedP1(["0", "inf"])])
    both = NodalSpec([MarkedP1(["0"]), MarkedP1(["0", "inf"])])
    prod = ProductVacuum(p1_vacuum(a), p1_vacuum(b)).materialize(3)
    assert prod.normalized() == solve_vacuum(both, 3).functional


def test_node_round_trip_on_nodal_p1():
    nodal = NodalSpec([MarkedP1(["0", "inf", "1"])], [((0, 0), (0, 1))], [(0, 2)])
    phi = solve_vacuum(nodal, 3).functional
    ext = node_extend(phi, nodal)
    D = ext.cutoff
    assert D == 2
    assert node_restrict(ext, D) == phi.restrict(D)
    assert ext.materialize(D).normalized() == solve_vacuum(ext.norm_curve, D).functional
