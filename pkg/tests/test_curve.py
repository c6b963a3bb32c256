from fractions import Fraction

import pytest

from bcghost.coordchange import CoordChange
from bcghost.curve import FORM, FUNCTION, MarkedP1, NodalSpec, form_basis, function_basis


def test_function_space_dimension_on_p1():
    # functions with poles of order <= n_i at k points: 1 + sum n_i
    for pts in (["0"], ["0", "inf"], ["0", "inf", "1"]):
        curve = NodalSpec([MarkedP1(pts)])
        for n in range(4):
            assert len(function_basis(curve, n)) == 1 + n * len(pts)


def test_form_space_dimension_on_p1():
    # forms with poles of order <= n_i: sum n_i - 1 (n_i >= 1)
    for pts in (["0"], ["0", "inf"], ["0", "inf", "1"]):
        curve = NodalSpec([MarkedP1(pts)])
        for n in range(1, 4):
            assert len(form_basis(curve, n)) == max(n * len(pts) - 1, 0)


def test_residue_theorem_in_local_coordinates():
    comp = MarkedP1(["0", "inf", "1"], [None, CoordChange.from_coeffs([2, 1]), CoordChange.from_coeffs([1, -1])])
    curve = NodalSpec([comp])
    for w in form_basis(curve, 3):
        total = sum(curve.expand_outer(w, j, 4).residue() for j in range(3))
        assert total == 0


def test_nodal_functions_agree_at_glued_points():
    curve = NodalSpec([MarkedP1(["0", "inf", "1"])], [((0, 0), (0, 1))], [(0, 2)])
    assert curve.arithmetic_genus() == 1
    for f in function_basis(curve, 3):
        a = curve.expand(f, (0, 0), 2).coeff(0)
        b = curve.expand(f, (0, 1), 2).coeff(0)
        assert a == b


def test_nodal_forms_have_opposite_residues():
    curve = NodalSpec([MarkedP1(["0", "inf", "1"])], [((0, 0), (0, 1))], [(0, 2)])
    for w in form_basis(curve, 3):
        assert curve.expand(w, (0, 0), 2).residue() == -curve.expand(w, (0, 1), 2).residue()


def test_spec_json_round_trip_and_validation():
    curve = NodalSpec([MarkedP1(["0", "inf"]), MarkedP1(["0", "inf"])], [((0, 1), (1, 0))])
    again = NodalSpec.from_json(curve.to_json())
    assert again.to_json() == curve.to_json()
    assert again.charge_total() == -1
    with pytest.raises(ValueError):
        NodalSpec([MarkedP1(["0", "inf"])], [((0, 0), (0, 1))])  # no outer point left
    with pytest.raises(ValueError):
        MarkedP1(["0", "0"])


def test_coordinate_pullback_of_function():
    comp = MarkedP1(["0"], [CoordChange.from_coeffs([2])])  # eta = 2 x
    curve = NodalSpec([comp])
    f = [g for g in function_basis(curve, 1) if curve.expand_outer(g, 0, 2).coeff(-1)][0]
    s = curve.expand_outer(f, 0, 2)
    base = NodalSpec([MarkedP1(["0"])]).expand_outer(f, 0, 2)
    assert s.coeff(-1) == 2 * base.coeff(-1)
