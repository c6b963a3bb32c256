import itertools
from fractions import Fraction

from hypothesis import given, strategies as st

from bcghost.coordchange import (
    CoordChange,
    G_apply,
    NormalizedExpansionData,
    composition_check,
    covariance_check,
    occupied_slots,
    p1_normalized_data,
    preferred_element,
    wedge_value,
)
from bcghost.curve import MarkedP1
from bcghost.fock import DualFunctional
from bcghost.laurent import LaurentSeries
from bcghost.maya import MayaDiagram, basis_by_energy

MINUS_ONE = MayaDiagram((), (-1,))
fracs = st.fractions(min_value=-2, max_value=2, max_denominator=3)


def wedge_by_expansion(vectors, slots):
    """Coefficient of e_{slots[0]} ^ ... ^ e_{slots[-1]} in v_1 ^ ... ^ v_k, by permutation sum."""
    k = len(vectors)
    total = Fraction(0)
    for perm in itertools.permutations(range(k)):
        sign = (-1) ** sum(1 for i in range(k) for j in range(i + 1, k) if perm[i] > perm[j])
        term = Fraction(sign)
        for row, col in enumerate(perm):
            term *= vectors[row].get(slots[col], 0)
        total += term
    return total


def basis_vectors(data, depth_pairs):
    """The normalized one-forms as dicts slot -> coefficient on a finite window."""
    vecs = []
    for i in range(1, data.g + 1):
        vecs.append({2 * n - 1: data.entry_I(n, i) for n in range(1, data.trunc + 1)})
    for j in range(1, depth_pairs):
        v = {2 * n - 1: data.entry_Q(j, n) for n in range(1, data.trunc + 1)}
        v[-(2 * j + 1)] = Fraction(1)
        vecs.append(v)
    return vecs


@given(st.lists(fracs, min_size=3, max_size=3), st.lists(fracs, min_size=9, max_size=9))
def test_genus_one_wedge_against_exterior_algebra(I, Q):
    data = NormalizedExpansionData(1, {(n + 1, 1): c for n, c in enumerate(I)},
                                   {(n // 3 + 1, n % 3 + 1): c for n, c in enumerate(Q)}, 3)
    for e in range(3):
        for m in basis_by_energy(e, [0]):
            deepest = -min(m.nus) if m.nus else 1
            L = max((deepest + 1) // 2, 1)
            slots = occupied_slots(m, 2 * L + 1)
            if any(s > 5 for s in slots):
                continue
            assert wedge_value(data, m) == wedge_by_expansion(basis_vectors(data, L), slots)
            assert wedge_value(data, m, extra_depth=1) == wedge_value(data, m)


def test_genus_one_unit_data_gives_single_bra():
    data = NormalizedExpansionData(1, {(1, 1): 1}, {}, 8)
    phi = preferred_element(data, 4)
    assert phi == DualFunctional(1, 4, {(MayaDiagram((-1,), (-1,)),): 1})


def test_preferred_element_of_affine_point_is_bra_minus_one():
    phi = preferred_element(p1_normalized_data(MarkedP1(["0"]), 0, 8), 4)
    assert phi == DualFunctional(1, 4, {(MINUS_ONE,): 1})


def test_G_on_bra_frozen():
    phi = G_apply(CoordChange.from_coeffs([1, 1]), DualFunctional(1, 3, {(MINUS_ONE,): 1}), charge_total=-1)
    expected = {
        MINUS_ONE: 1,
        MayaDiagram((-1,), (-3, -1)): 1,
        MayaDiagram((-1,), (-5, -1)): 2,
        MayaDiagram((-3,), (-3, -1)): -4,
    }
    assert phi == DualFunctional(1, 3, {(m,): c for m, c in expected.items()})


def test_G_covariance_of_preferred_element():
    for h in (CoordChange.from_coeffs([1, 1, -1]), CoordChange.scaling(3), CoordChange.from_coeffs([Fraction(1, 2), 2])):
        moved = G_apply(h, DualFunctional(1, 3, {(MINUS_ONE,): 1}), charge_total=-1)
        assert moved == preferred_element(p1_normalized_data(MarkedP1(["0"], [h]), 0, 9), 3)


coord_changes = st.lists(fracs, min_size=1, max_size=3).map(lambda cs: CoordChange.from_coeffs([1] + cs))


@given(coord_changes, st.lists(fracs, min_size=4, max_size=4))
def test_conjugation_identities(h, cs):
    form = LaurentSeries({k - 2: c for k, c in enumerate(cs)})
    func = LaurentSeries({k - 1: c for k, c in enumerate(cs)})
    field = LaurentSeries({k - 1: c for k, c in enumerate(cs)})
    res = covariance_check(h, form, func, field, max_energy=2, max_charge=1)
    assert res["psi"] == res["psibar"] == res["T"] == 0


def test_central_term_needs_moved_field():
    h = CoordChange.from_coeffs([1, 1, Fraction(-1, 3)])
    res = covariance_check(h, LaurentSeries({0: 1}), LaurentSeries({0: 1}), LaurentSeries({-3: 1}), 2, 1)
    assert res["T"] == 0 and res["T_unadjusted"] != 0


@given(coord_changes, coord_changes)
def test_lift_reverses_composition(h1, h2):
    assert composition_check(h1, h2, max_energy=2, max_charge=1) == 0


def test_expansion_data_json_round_trip():
    data = NormalizedExpansionData(1, {(1, 1): Fraction(1, 2)}, {(2, 3): 4}, 5)
    assert NormalizedExpansionData.from_json(data.to_json()) == data
