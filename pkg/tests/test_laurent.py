from fractions import Fraction

from hypothesis import given, strategies as st

from bcghost.laurent import (
    LaurentSeries,
    comp_inverse,
    compose,
    exp_derivation,
    log_coordinate,
    schwarzian,
)

fracs = st.fractions(min_value=-3, max_value=3, max_denominator=4)


def unipotent(cs):
    return LaurentSeries({1: 1, **{k + 2: c for k, c in enumerate(cs)}})


coord_changes = st.lists(fracs, min_size=1, max_size=4).map(unipotent)


def test_schwarzian_frozen():
    s = schwarzian(LaurentSeries({1: 1, 2: 1}), 4)
    assert [s.coeff(k) for k in range(4)] == [-6, 24, -72, 192]


def test_schwarzian_vanishes_on_mobius():
    # x / (1 - x) = x + x^2 + x^3 + ...
    h = LaurentSeries({k: 1 for k in range(1, 14)}, trunc=14)
    s = schwarzian(h, 8)
    assert all(s.coeff(k) == 0 for k in range(8))


def test_inverse_of_laurent_series():
    f = LaurentSeries({-1: 2, 0: 1, 3: Fraction(1, 2)})
    g = f.inverse_to(6)
    prod = f * g
    assert prod.coeff(0) == 1 and all(prod.coeff(k) == 0 for k in range(1, prod.trunc))


@given(coord_changes)
def test_compositional_inverse(h):
    order = 7
    k = comp_inverse(h, order)
    both = compose(h, k)
    assert all(both.coeff(n) == (1 if n == 1 else 0) for n in range(order))


@given(coord_changes, coord_changes)
def test_schwarzian_cocycle(f, g):
    # S(f o g) = (S(f) o g) g'^2 + S(g)
    order = 5
    lhs = schwarzian(compose(f, g).truncate(order + 4), order)
    rhs = compose(schwarzian(f, order + 2), g.truncate(order + 3)) * g.derivative() ** 2 + schwarzian(g, order + 2)
    assert all(lhs.coeff(n) == rhs.coeff(n) for n in range(order))


@given(coord_changes)
def test_log_then_exp_recovers_coordinate(h):
    order = 6
    field = log_coordinate(h, order)
    back = exp_derivation(field, LaurentSeries.xi(), order)
    assert all(back.coeff(n) == h.coeff(n) for n in range(1, order))


def test_json_round_trip():
    s = LaurentSeries({-2: Fraction(1, 3), 0: 5}, trunc=4)
    assert LaurentSeries.from_json(s.to_json()) == s
