from fractions import Fraction

from hypothesis import given, strategies as st

from bcghost.fock import (
    PSI,
    PSIBAR,
    DualFunctional,
    FockVector,
    TOperator,
    apply_current,
    apply_fermion_left,
    apply_virasoro,
    basis_window,
    commutator,
    current_op,
    smear,
    virasoro_op,
)
from bcghost.laurent import LaurentSeries
from bcghost.maya import VACUUM, MayaDiagram, enumerate_basis

MINUS_ONE = MayaDiagram((), (-1,))


def vec(terms):
    return FockVector(terms)


def test_frozen_low_energy_actions():
    assert apply_current(-1, FockVector.vacuum()) == vec({MayaDiagram((-1,), (-1,)): 1})
    assert apply_virasoro(0, -1, FockVector.basis(MINUS_ONE)) == vec({MayaDiagram((), (-3,)): -1})
    assert apply_virasoro(0, -2, FockVector.vacuum()) == vec({MayaDiagram((-1,), (-3,)): 1})


def test_annihilation_on_vacuum():
    vac = FockVector.vacuum()
    for t in range(1, 9, 2):
        assert not apply_fermion_left(PSI, t, vac)
        assert not apply_fermion_left(PSIBAR, t, vac)
    for n in range(1, 4):
        assert not apply_current(n, vac)
        assert not apply_virasoro(0, n, vac)


modes = st.integers(-4, 4).map(lambda k: 2 * k + 1)
diagrams = st.builds(lambda p, d, i: enumerate_basis(p, d)[i % len(enumerate_basis(p, d))],
                     st.integers(-2, 2), st.integers(0, 5), st.integers(0, 50))


@given(diagrams, modes, modes)
def test_canonical_anticommutators(m, t, u):
    v = FockVector.basis(m)
    for a, b in ((PSI, PSI), (PSIBAR, PSIBAR), (PSI, PSIBAR), (PSIBAR, PSI)):
        s = apply_fermion_left(a, t, apply_fermion_left(b, u, v)) + apply_fermion_left(b, u, apply_fermion_left(a, t, v))
        expected = v if (a != b and t + u == 0) else FockVector()
        assert s == expected


@given(diagrams, st.integers(-3, 3), st.integers(-3, 3), st.sampled_from([0, Fraction(1, 2), 1]))
def test_virasoro_with_central_term(m, n, k, j):
    v = FockVector.basis(m)
    lhs = commutator(virasoro_op(n, j), virasoro_op(k, j), v)
    rhs = apply_virasoro(j, n + k, v).scale(n - k)
    if n + k == 0:
        rhs = rhs - v.scale(Fraction(6 * j * j - 6 * j + 1, 6) * (n ** 3 - n))
    assert lhs == rhs


@given(diagrams, st.integers(-3, 3), st.integers(-3, 3))
def test_heisenberg(m, n, k):
    v = FockVector.basis(m)
    expected = v.scale(n) if n + k == 0 else FockVector()
    assert commutator(current_op(n), current_op(k), v) == expected


def test_energy_eigenvalues_small_window():
    for m in basis_window(5, range(-3, 4)):
        v = FockVector.basis(m)
        assert apply_virasoro(0, 0, v) == v.scale(m.degree + m.charge * (m.charge + 1) // 2)


def test_dual_functional_json_and_cutoff():
    import pytest

    from bcghost.errors import CutoffError

    phi = DualFunctional(2, 3, {(MINUS_ONE, VACUUM): Fraction(2, 3)})
    assert DualFunctional.from_json(phi.to_json()) == phi
    with pytest.raises(CutoffError) as info:
        phi((MayaDiagram((-1,), ()), MayaDiagram((-5,), ())))
    assert info.value.needed == 4


fields = st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=3), min_size=4, max_size=4).map(
    lambda cs: LaurentSeries({k - 1: c for k, c in enumerate(cs)}))


@given(diagrams, fields, fields)
def test_T_acts_on_psi_by_lie_derivative(m, field, form):
    # [T[l], psi[A dz]] = -psi[(l A' + A l') dz]
    v = FockVector.basis(m)
    lie = field * form.derivative() + form * field.derivative()
    assert commutator(TOperator(field), smear(PSI, form), v) == smear(PSI, lie).apply(v).scale(-1)


@given(diagrams, fields, fields)
def test_T_bracket_sign_and_cocycle(m, a, b):
    # [T[a], T[b]] = -T[a b' - b a'] - (1/6) Res(a''' b)
    v = FockVector.basis(m)
    bracket = a * b.derivative() - b * a.derivative()
    central = (a.derivative().derivative().derivative() * b).residue() / 6
    expected = TOperator(bracket).apply(v).scale(-1) - v.scale(central)
    assert commutator(TOperator(a), TOperator(b), v) == expected
