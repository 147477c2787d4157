from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from ctrlrep.errors import AmbientMismatch, FieldMismatch, ShapeMismatch
from ctrlrep.linal import (
    GF,
    QQ,
    Field,
    Mat,
    SparseEchelon,
    Subspace,
    invert,
    kernel_basis,
    meet_join,
    rank,
    rref,
    solve,
    vec_mat,
)


def matrices(field=QQ, max_rows=5, max_cols=5, lo=-3, hi=3):
    @st.composite
    def build(draw):
        r = draw(st.integers(0, max_rows))
        c = draw(st.integers(1, max_cols))
        rows = draw(st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c),
                             min_size=r, max_size=r))
        return Mat.from_rows(field, rows, c)
    return build()


def test_field_tags_round_trip():
    assert Field.from_tag("Q") is QQ
    assert Field.from_tag("Fp:7") == GF(7)
    assert GF(7).tag == "Fp:7"
    with pytest.raises(ValueError):
        Field.from_tag("Fp:6")
    with pytest.raises(ValueError):
        Field.from_tag("R")


def test_field_coercion():
    assert QQ("3/2") == Fraction(3, 2)
    assert GF(5)("3/2") == 4  # 3 * 2^{-1} = 3 * 3 mod 5
    assert GF(5)(-1) == 4
    with pytest.raises(ZeroDivisionError):
        GF(5)(Fraction(1, 5))


def test_prime_field_arithmetic():
    F = GF(7)
    assert F.mul(3, 5) == 1
    assert F.inv(3) == 5
    assert F.div(1, 3) == 5
    with pytest.raises(ZeroDivisionError):
        F.inv(0)


def test_rref_small_example():
    m = Mat.from_rows(QQ, [[2, 4, 2], [1, 3, 2], [3, 7, 4]])
    reduced, r, image = rref(m)
    assert r == 2
    assert reduced.to_rows()[:2] == [[1, 0, -1], [0, 1, 1]]
    assert image.dim == 2


def test_rank_over_prime_field_differs():
    m = [[1, 1], [1, 3]]
    assert rank(Mat.from_rows(QQ, m)) == 2
    assert rank(Mat.from_rows(GF(2), m)) == 1


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_matches_sympy(m):
    assert rank(m) == sympy.Matrix(m.to_rows()).rank()


@settings(max_examples=60, deadline=None)
@given(matrices(field=GF(5)))
def test_rank_nullity_mod_p(m):
    ker = kernel_basis(m)
    assert rank(m) + ker.dim == m.cols
    for x in ker.vectors():
        assert all(v == 0 for v in vec_mat(x, m.transpose()))


@settings(max_examples=60, deadline=None)
@given(matrices(), st.lists(st.integers(-3, 3), min_size=5, max_size=5))
def test_solve_consistent_systems(m, xs):
    x = xs[: m.cols]
    b = vec_mat(x, m.transpose())
    sol = solve(m, b)
    assert sol is not None
    assert vec_mat(sol, m.transpose()) == b


def test_solve_inconsistent():
    m = Mat.from_rows(QQ, [[1, 1], [2, 2]])
    assert solve(m, [1, 3]) is None
    with pytest.raises(ShapeMismatch):
        solve(m, [1])


@settings(max_examples=60, deadline=None)
@given(matrices(max_rows=4, max_cols=5), matrices(max_rows=4, max_cols=5))
def test_zassenhaus_dimension_formula(a, b):
    n = min(a.cols, b.cols)
    u = Subspace.span(QQ, n, (r[:n] for r in a.to_rows()))
    v = Subspace.span(QQ, n, (r[:n] for r in b.to_rows()))
    total, meet = meet_join(u, v)
    assert total.dim + meet.dim == u.dim + v.dim
    assert u.contains_subspace(meet) and v.contains_subspace(meet)
    assert total.contains_subspace(u) and total.contains_subspace(v)


def test_subspace_coordinates_and_membership():
    s = Subspace.span(QQ, 3, [[1, 0, 1], [0, 1, 1]])
    assert s.coordinates([2, 3, 5]) == (2, 3)
    assert s.coordinates([0, 0, 1]) is None
    assert not s.contains([1, 1, 1])


def test_mismatched_subspaces_rejected():
    with pytest.raises(AmbientMismatch):
        Subspace.zero(QQ, 2) + Subspace.zero(QQ, 3)
    with pytest.raises(FieldMismatch):
        Subspace.zero(QQ, 2) + Subspace.zero(GF(3), 2)


def test_annihilator_kills_subspace():
    s = Subspace.span(QQ, 3, [[1, 2, 3]])
    ann = s.annihilator()
    assert ann.cols == 2
    assert (s.basis @ ann).is_zero()


def test_invert():
    m = Mat.from_rows(QQ, [[2, 1], [7, 4]])
    assert m @ invert(m) == Mat.identity(QQ, 2)
    with pytest.raises(ZeroDivisionError):
        invert(Mat.from_rows(QQ, [[1, 2], [2, 4]]))


@settings(max_examples=60, deadline=None)
@given(matrices(max_rows=6, max_cols=6))
def test_sparse_echelon_rank_and_projection(m):
    ech = SparseEchelon(QQ)
    for row in m.to_rows():
        ech.add({j: QQ(x) for j, x in enumerate(row) if x})
    assert ech.rank == rank(m)
    for row in m.to_rows():
        assert ech.contains({j: QQ(x) for j, x in enumerate(row) if x})
    # the residue is unchanged by adding span elements
    probe = {0: QQ(1), m.cols - 1: QQ(2)}
    shifted = dict(probe)
    for row in m.to_rows():
        for j, x in enumerate(row):
            shifted[j] = shifted.get(j, 0) + 3 * x
    assert ech.reduce(probe) == {k: v for k, v in ech.reduce(shifted).items() if v}
