import itertools
from fractions import Fraction

from hypothesis import given, strategies as st

from bcghost.linalg import SparseEliminator, det, nullspace

fracs = st.fractions(min_value=-3, max_value=3, max_denominator=3)


def leibniz(m):
    n = len(m)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = Fraction(-1) ** inversions
        for i, j in enumerate(perm):
            term *= m[i][j]
        total += term
    return total


@given(st.integers(0, 5).flatmap(lambda n: st.lists(st.lists(fracs, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_det_matches_leibniz_expansion(m):
    assert det(m) == leibniz(m)


matrices = st.tuples(st.integers(1, 5), st.integers(1, 6)).flatmap(
    lambda rc: st.lists(st.lists(st.sampled_from([0, 0, 1, -1, 2, Fraction(1, 2)]), min_size=rc[1], max_size=rc[1]),
                        min_size=rc[0], max_size=rc[0]))


@given(matrices)
def test_nullspace_vectors_are_annihilated(rows):
    n = len(rows[0])
    for v in nullspace(rows, n):
        assert all(sum(Fraction(a) * b for a, b in zip(r, v)) == 0 for r in rows)


@given(matrices)
def test_sparse_kernel_has_dense_dimension(rows):
    n = len(rows[0])
    elim = SparseEliminator(n)
    for r in rows:
        elim.add_row({i: Fraction(c) for i, c in enumerate(r) if c})
    kernel = elim.kernel()
    assert len(kernel) == len(nullspace(rows, n))
    for v in kernel:
        assert all(sum(Fraction(r[i]) * c for i, c in v.items()) == 0 for r in rows)
