from hypothesis import given, strategies as st

from bcghost.maya import (
    VACUUM,
    MayaDiagram,
    brute_force_basis,
    characteristic_degree,
    enumerate_basis,
    from_characteristic,
    from_partition,
    partitions,
    reflect,
    shift,
    to_characteristic,
    unshift,
)

PARTITION_COUNTS = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30]


def test_partition_counts_frozen():
    assert [len(partitions(d)) for d in range(10)] == PARTITION_COUNTS


def test_basis_matches_brute_force_enumeration():
    for p in range(-3, 4):
        for d in range(7):
            assert sorted(enumerate_basis(p, d)) == sorted(brute_force_basis(p, d))
            assert len(enumerate_basis(p, d)) == PARTITION_COUNTS[d]


def test_vacuum_and_minus_one():
    assert VACUUM.charge == 0 and VACUUM.degree == 0 and VACUUM.energy == 0
    m = MayaDiagram((), (-1,))
    assert (m.charge, m.degree, m.energy) == (-1, 0, 0)
    assert MayaDiagram((-1,), ()).energy == 1


def test_rejects_bad_labels():
    import pytest

    for mus, nus in (((2,), ()), ((-3, -1, -3), ()), ((), (1,))):
        with pytest.raises(ValueError):
            MayaDiagram(mus, nus)


diagrams = st.builds(lambda p, d, i: enumerate_basis(p, d)[i % len(enumerate_basis(p, d))],
                     st.integers(-3, 3), st.integers(0, 7), st.integers(0, 100))


@given(diagrams)
def test_energy_formula(m):
    assert m.energy == m.degree + m.charge * (m.charge + 1) // 2


@given(diagrams)
def test_characteristic_round_trip(m):
    assert from_characteristic(m.charge, to_characteristic(m)) == m


@given(diagrams)
def test_reflect_involution_and_shift_inverse(m):
    assert reflect(reflect(m)) == m
    assert reflect(m).charge == -m.charge
    assert unshift(shift(m)) == m and shift(unshift(m)) == m
    assert shift(m).charge == m.charge + 1
    assert shift(m).degree == m.degree == reflect(m).degree


@given(diagrams)
def test_json_round_trip(m):
    assert MayaDiagram.from_json(m.to_json()) == m


def test_partition_labels_are_distinct():
    for p in (-1, 0, 2):
        labels = {from_partition(p, lam) for lam in partitions(6)}
        assert len(labels) == PARTITION_COUNTS[6]


def test_charge_one_degree_five_example():
    # mu(-3/2) = -1/2, mu(-1/2) = 3/2, mu(1/2) = 5/2, identity below
    m = from_characteristic(1, [(-3, -1), (-1, 3), (1, 5)])
    assert (m.charge, m.degree) == (1, 5)
    assert characteristic_degree(m) == 5
    assert m == MayaDiagram((-5, -3), (-3,))  # particles at 3/2, 5/2; hole at -3/2
