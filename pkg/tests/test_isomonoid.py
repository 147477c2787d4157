import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctrlrep.errors import BranchCountMismatch, Unsupported, ZeroCardinal
from ctrlrep.isomonoid import (
    ALEPH0,
    CONTINUUM,
    INF,
    Fin,
    InfiniteFamily,
    InfSet,
    IsoClass,
    RepType,
    add,
    class_add,
    class_eq,
    ninf_add,
    presentation,
    render,
    rep_type,
    to_json,
    zero_class,
)
from ctrlrep.linal import QQ
from ctrlrep.quiver import NSubRep, Opaque, RigidIndec, catalog_list

N = 3

values = st.one_of(
    st.integers(0, 20).map(Fin),
    st.sets(st.integers(1, N), min_size=1).map(lambda s: InfSet(tuple(s))),
)
ninf = st.one_of(st.integers(0, 20).map(Fin), st.just(INF))
rigid = st.lists(st.tuples(st.sampled_from([c for c, _ in catalog_list(N)]), st.integers(1, 3)),
                 max_size=3).map(lambda xs: tuple({c: m for c, m in xs}.items()))


@st.composite
def classes(draw):
    return IsoClass(N, draw(values), tuple(draw(ninf) for _ in range(N)),
                    tuple(draw(ninf) for _ in range(N)),
                    tuple(sorted(draw(rigid), key=lambda cm: cm[0].j)))


def test_add_examples():
    assert add(Fin(1), InfSet((2,))) == InfSet((2,))
    assert add(InfSet((1,)), InfSet((2,))) == InfSet((1, 2))
    assert add(Fin(2), Fin(3)) == Fin(5)
    with pytest.raises(BranchCountMismatch):
        add(InfSet((4,)), Fin(0), 3)


def test_infset_normal_form():
    assert InfSet((3, 1, 3)) == InfSet((1, 3))
    with pytest.raises(ValueError):
        InfSet(())
    with pytest.raises(ValueError):
        Fin(-1)


@settings(max_examples=200)
@given(values, values, values)
def test_add_is_a_commutative_monoid(a, b, c):
    assert add(a, b) == add(b, a)
    assert add(add(a, b), c) == add(a, add(b, c))
    assert add(a, Fin(0)) == a
    assert isinstance(add(a, b), (Fin, InfSet))


@settings(max_examples=200)
@given(ninf, ninf, ninf)
def test_ninf_add_laws(a, b, c):
    assert ninf_add(a, b) == ninf_add(b, a)
    assert ninf_add(ninf_add(a, b), c) == ninf_add(a, ninf_add(b, c))
    assert ninf_add(a, Fin(0)) == a


@settings(max_examples=200, deadline=None)
@given(classes(), classes(), classes())
def test_class_add_laws(a, b, c):
    assert class_eq(class_add(a, b), class_add(b, a))
    assert class_eq(class_add(class_add(a, b), c), class_add(a, class_add(b, c)))
    assert class_eq(class_add(a, zero_class(N)), a)


def test_class_add_absorbs_root_into_ray():
    a = IsoClass(1, Fin(1), (Fin(0),), (Fin(0),))
    r = IsoClass(1, InfSet((1,)), (Fin(0),), (Fin(0),))
    assert class_add(a, r) == r


def test_rigid_multisets():
    v = ((RigidIndec(2, 1), 1),)
    x = IsoClass(2, Fin(0), (Fin(0),) * 2, (Fin(0),) * 2, v)
    assert class_add(x, x).rigid == ((RigidIndec(2, 1), 2),)
    y = IsoClass(3, Fin(0), (Fin(0),) * 3, (Fin(0),) * 3,
                 ((RigidIndec(3, 1), 1), (RigidIndec(3, 2), 1)))
    z = IsoClass(3, Fin(0), (Fin(0),) * 3, (Fin(0),) * 3,
                 ((RigidIndec(3, 2), 1), (RigidIndec(3, 1), 1)))
    assert class_eq(y, z)
    assert not class_eq(IsoClass(1, Fin(1), (Fin(0),), (Fin(0),)),
                        IsoClass(1, InfSet((1,)), (Fin(0),), (Fin(0),)))


def test_opaque_pairing_uses_rep_iso():
    def four(l):
        return NSubRep.from_vectors(QQ, 2, [[[1, 0]], [[0, 1]], [[1, 1]], [[1, l]]])
    base = (Fin(0),) * 4
    a = IsoClass(4, Fin(0), base, base, ((Opaque(four(2)), 1),))
    b = IsoClass(4, Fin(0), base, base, ((Opaque(four(3)), 1),))
    assert class_eq(a, a)
    assert not class_eq(a, b)
    assert class_eq(a, b, rep_iso=lambda x, y: True)


def test_presentation_counts():
    assert presentation(1).counts == (6, 6)
    assert presentation(2).counts == (12, 12)
    assert presentation(3).counts == (21, 18)
    for n in (1, 2, 3):
        assert len(presentation(n).generators) == 1 + 5 * n + len(catalog_list(n))
    p4 = presentation(4)
    assert p4.counts == (InfiniteFamily(21), 24)
    assert len(p4.relations) == 24


def test_presentation_relations_name_generators():
    p = presentation(2)
    names = set(p.generators)
    for lhs, rhs in p.relations:
        assert set(lhs) | set(rhs) <= names


@pytest.mark.parametrize("card,expected", [
    (1, RepType.FINITE), (3, RepType.FINITE), (4, RepType.TAME), (5, RepType.WILD), (7, RepType.WILD),
])
def test_rep_type(card, expected):
    assert rep_type(Fin(card)) == expected


def test_rep_type_edges():
    assert rep_type(INF) == RepType.WILD
    with pytest.raises(ZeroCardinal):
        rep_type(Fin(0))


def test_rep_type_agrees_with_catalog_finiteness():
    # the rigid catalog is a finite list exactly while the type is finite
    for n in (1, 2, 3):
        assert rep_type(Fin(n)) == RepType.FINITE
        assert isinstance(catalog_list(n), list)
    assert rep_type(Fin(4)) != RepType.FINITE
    with pytest.raises(Unsupported):
        catalog_list(4)


def test_rendering():
    assert [render(x) for x in (Fin(3), INF, InfSet((3, 1)), ALEPH0, CONTINUUM)] == \
        ["3", "inf", "inf{1,3}", "aleph0", "continuum"]
    c = IsoClass(2, InfSet((2,)), (Fin(1), INF), (Fin(0), Fin(0)), ((RigidIndec(2, 1), 2),))
    assert to_json(c) == {"lambda": "inf{2}", "mu": [1, "inf"], "nu": [0, 0],
                          "rigid": [{"id": "V(2,1)", "mult": 2}]}
    assert to_json(presentation(1))["counts"] == [6, 6]
