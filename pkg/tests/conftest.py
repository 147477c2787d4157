import random

import pytest
from hypothesis import strategies as st

from ctrlrep.linal import QQ, Mat, rank
from ctrlrep.quiver import NSubRep, OneSub, catalog_list, catalog_rep, one_sub_rep


def random_rep(rng: random.Random, n: int, max_dim: int = 6, field=QQ) -> NSubRep:
    d0 = rng.randint(0, max_dim)
    spans = [[[rng.randint(-1, 1) for _ in range(d0)] for _ in range(rng.randint(0, d0))]
             for _ in range(n)]
    return NSubRep.from_vectors(field, d0, spans)


def random_invertible(rng: random.Random, d: int, field=QQ) -> Mat:
    while True:
        m = Mat.from_rows(field, [[rng.randint(-2, 2) for _ in range(d)] for _ in range(d)], d)
        if rank(m) == d:
            return m


def finite_indecomposables(n: int) -> list:
    """Every indecomposable n-subspace up to iso for n <= 3, with a representative."""
    ids = [c for c, _ in catalog_list(n)]
    ids += [OneSub(i, "k->k") for i in range(1, n + 1)] + [OneSub(1, "0->k")]
    return [(c, catalog_rep(c) if not isinstance(c, OneSub) else one_sub_rep(c.i, c.kind, n))
            for c in ids]


@st.composite
def reps(draw, n=None, max_dim=4, field=QQ):
    n = draw(st.integers(1, 3)) if n is None else n
    d0 = draw(st.integers(0, max_dim))
    entries = st.integers(-2, 2)
    spans = []
    for _ in range(n):
        k = draw(st.integers(0, d0))
        spans.append(draw(st.lists(st.lists(entries, min_size=d0, max_size=d0),
                                   min_size=k, max_size=k)))
    return NSubRep.from_vectors(field, d0, spans)


@pytest.fixture
def rng():
    return random.Random(20261015)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
