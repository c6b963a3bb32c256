import random
from fractions import Fraction

import pytest

from bcghost.curve import MarkedP1
from bcghost.coordchange import CoordChange
from bcghost.errors import TruncationError
from bcghost.fock import FockVector
from bcghost.maya import MayaDiagram, basis_by_energy, enumerate_basis
from bcghost.sewing import (
    RESTRICTION_SIGN,
    alpha,
    dual_basis_plus,
    form_gauge_residual,
    fuchsian_check,
    function_gauge_residual,
    pair_braced,
    pair_sym,
    pairing_checks,
    random_matrix,
    sew,
    sew_p1,
    sew_restriction_sign,
    sewing_setup,
)
from bcghost.vacua import FunctionalVacuum, solve_vacuum


def test_alpha_recursion():
    for p in range(-4, 5):
        assert alpha(p) == (-1) ** p * alpha(p - 1)


def test_symmetric_pairing_is_orthonormal():
    for p in (-1, 0, 2):
        for d in range(4):
            basis = enumerate_basis(p, d)
            for a in basis:
                for b in basis:
                    assert pair_sym(FockVector.basis(a), FockVector.basis(b)) == (a == b)


def test_dual_basis_gram_identity():
    for p in (-1, 0, 1):
        for d in range(4):
            vs, duals = dual_basis_plus(p, d)
            for i, v in enumerate(vs):
                for j, w in enumerate(duals):
                    assert pair_braced(FockVector.basis(v), w, "plus") == (i == j)


def test_pairing_identities_small_window():
    out = pairing_checks(3, 2, 5)
    assert all(v == 0 for v in out["failures"].values())
    assert any(out["printed_sign_mismatches"].values())


@pytest.fixture(scope="module")
def setup_and_series():
    setup = sewing_setup(MarkedP1(["0", "inf", "1"]), 0, 1, [2])
    return setup, sew_p1(setup, 4)


def test_q0_is_signed_restriction(setup_and_series):
    setup, series = setup_and_series
    assert sew_restriction_sign(series, setup, 3) == RESTRICTION_SIGN == -1


def test_formal_gauge_conditions(setup_and_series):
    setup, series = setup_and_series
    rng = random.Random(3)
    for _ in range(3):
        assert form_gauge_residual(series, setup, random_matrix(rng, 4)) == 0
        assert function_gauge_residual(series, setup, random_matrix(rng, 4)) == 0


def test_fuchsian_equation_and_negative_control(setup_and_series):
    setup, series = setup_and_series
    out = fuchsian_check(series, setup, 1)
    assert out["divisible_by_q"] and not any(out["per_order"])
    key = (MayaDiagram(),)
    bad = fuchsian_check(series, setup, 1, perturb={(2, key): Fraction(1)})
    assert bad["per_order"][2] != 0


def test_central_value_with_coordinate():
    comp = MarkedP1(["0", "inf", "1"], [None, None, CoordChange.from_coeffs([1, Fraction(1, 2), 2])])
    setup = sewing_setup(comp, 0, 1, [2])
    series = sew_p1(setup, 3)
    out = fuchsian_check(series, setup, 1)
    assert out["b"] != 0 and not any(out["per_order"])
    assert any(fuchsian_check(series, setup, 1, b=Fraction(0))["per_order"])


def test_empty_and_truncated_series():
    setup = sewing_setup(MarkedP1(["0", "inf", "1"]), 0, 1, [2])
    assert sew_p1(setup, 0).materialize(2) == []
    vac = solve_vacuum(setup.normalization, 3)
    phi = FunctionalVacuum(vac.functional, 3, -1, 3)
    with pytest.raises(TruncationError, match="raise it to"):
        sew(phi, 4)
