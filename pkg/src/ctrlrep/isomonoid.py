"""Monoids of invariant values, isomorphism classes and elementary presentations."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .errors import BranchCountMismatch, ZeroCardinal
from .quiver import Opaque, catalog_key, catalog_list, indecomposable_iso


@dataclass(frozen=True)
class Fin:
    d: int

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("finite values are nonnegative")

    def __str__(self):
        return str(self.d)


@dataclass(frozen=True)
class Inf:
    def __str__(self):
        return "inf"


INF = Inf()


@dataclass(frozen=True)
class InfSet:
    """The absorbing element ``inf_S`` for a nonempty set of branches."""

    branches: tuple

    def __post_init__(self):
        if not self.branches:
            raise ValueError("InfSet needs a nonempty branch set")
        canon = tuple(sorted(set(self.branches)))
        if canon != self.branches:
            object.__setattr__(self, "branches", canon)

    def __str__(self):
        return "inf{" + ",".join(map(str, self.branches)) + "}"


NInf = Union[Fin, Inf]
NInfN = Union[Fin, InfSet]


def ninf_add(a: NInf, b: NInf) -> NInf:
    if isinstance(a, Inf) or isinstance(b, Inf):
        return INF
    return Fin(a.d + b.d)


def add(a: NInfN, b: NInfN, n: Optional[int] = None) -> NInfN:
    """Sum in the monoid of naturals extended by the ``inf_S`` elements."""
    if n is not None:
        for x in (a, b):
            if isinstance(x, InfSet) and not all(1 <= i <= n for i in x.branches):
                raise BranchCountMismatch(f"{x} has branches outside 1..{n}")
    if isinstance(a, InfSet) and isinstance(b, InfSet):
        return InfSet(tuple(set(a.branches) | set(b.branches)))
    if isinstance(a, InfSet):
        return a
    if isinstance(b, InfSet):
        return b
    return Fin(a.d + b.d)


# Ext cardinals


@dataclass(frozen=True)
class Aleph0:
    def __str__(self):
        return "aleph0"


@dataclass(frozen=True)
class Continuum:
    def __str__(self):
        return "continuum"


ALEPH0 = Aleph0()
CONTINUUM = Continuum()
ExtCard = Union[Fin, Aleph0, Continuum]


# isomorphism classes


@dataclass(frozen=True)
class IsoClass:
    n: int
    lam: NInfN
    mu: tuple
    nu: tuple
    rigid: tuple = ()  # ((CatalogId, multiplicity), ...)

    def __post_init__(self):
        if len(self.mu) != self.n or len(self.nu) != self.n:
            raise BranchCountMismatch("mu and nu need one entry per branch")


def zero_class(n: int) -> IsoClass:
    return IsoClass(n, Fin(0), (Fin(0),) * n, (Fin(0),) * n, ())


def _merge_rigid(x: tuple, y: tuple) -> tuple:
    counts: Counter = Counter()
    for c, m in x + y:
        counts[c] += m
    return tuple(sorted(counts.items(), key=lambda cm: catalog_key(cm[0])))


def class_add(a: IsoClass, b: IsoClass) -> IsoClass:
    if a.n != b.n:
        raise BranchCountMismatch(f"{a.n} vs {b.n}")
    return IsoClass(
        a.n,
        add(a.lam, b.lam, a.n),
        tuple(ninf_add(x, y) for x, y in zip(a.mu, b.mu)),
        tuple(ninf_add(x, y) for x, y in zip(a.nu, b.nu)),
        _merge_rigid(a.rigid, b.rigid),
    )


def class_eq(a: IsoClass, b: IsoClass, rep_iso: Optional[Callable] = None) -> bool:
    """Componentwise equality; opaque rigid summands are paired with ``rep_iso``.

    ``rep_iso`` defaults to the invertible-homomorphism search on indecomposables.
    """
    if a.n != b.n:
        raise BranchCountMismatch(f"{a.n} vs {b.n}")
    if (a.lam, a.mu, a.nu) != (b.lam, b.mu, b.nu):
        return False
    if rep_iso is None:
        rep_iso = indecomposable_iso
    return _pair(a.rigid, b.rigid, rep_iso)


def _pair(x: tuple, y: tuple, rep_iso: Callable) -> bool:
    plain_x = Counter({c: m for c, m in x if not isinstance(c, Opaque)})
    plain_y = Counter({c: m for c, m in y if not isinstance(c, Opaque)})
    if plain_x != plain_y:
        return False
    rest = [[c.rep, m] for c, m in y if isinstance(c, Opaque)]
    for c, m in x:
        if not isinstance(c, Opaque):
            continue
        for entry in rest:
            if entry[1] >= m and rep_iso(c.rep, entry[0]):
                entry[1] -= m
                break
        else:
            return False
    return all(m == 0 for _, m in rest)


# presentations


@dataclass(frozen=True)
class InfiniteFamily:
    """Marker for generator sets containing an infinite rigid family."""

    explicit: int

    def __str__(self):
        return f"InfiniteFamily({self.explicit}+)"


@dataclass(frozen=True)
class Presentation:
    n: int
    generators: tuple
    relations: tuple
    counts: tuple = field(default=())

    def __post_init__(self):
        gens = len(self.generators)
        gen_count = InfiniteFamily(gens) if self.n >= 4 else gens
        expected = (gen_count, len(self.relations))
        if self.counts and self.counts != expected:
            raise ValueError(f"counts {self.counts} disagree with lists {expected}")
        object.__setattr__(self, "counts", expected)


def elementary_names(n: int) -> list:
    names = ["F1_*A"]
    for i in range(1, n + 1):
        names += [f"F{i}_*{x}" for x in ("R", "B", "Binf", "C", "Cinf")]
    return names


def presentation(n: int) -> Presentation:
    if n < 1:
        raise BranchCountMismatch("n must be at least 1")
    gens = elementary_names(n)
    if n <= 3:
        gens += [f"F*{c.label()}" for c, _ in catalog_list(n)]
    rels = []
    for i in range(1, n + 1):
        r, b, binf, c, cinf = (f"F{i}_*{x}" for x in ("R", "B", "Binf", "C", "Cinf"))
        rels += [
            (("F1_*A", r), (r,)),
            ((r, r), (r,)),
            ((b, binf), (binf,)),
            ((binf, binf), (binf,)),
            ((c, cinf), (cinf,)),
            ((cinf, cinf), (cinf,)),
        ]
    return Presentation(n, tuple(gens), tuple(rels))


# representation type


class RepType(enum.Enum):
    FINITE = "Finite"
    TAME = "Tame"
    WILD = "Wild"


def rep_type(card: NInf) -> RepType:
    """Representation type of the algebra attached to a set of ``card`` ends."""
    if isinstance(card, Inf):
        return RepType.WILD
    if card.d < 1:
        raise ZeroCardinal("the end set must be nonempty")
    if card.d < 4:
        return RepType.FINITE
    if card.d == 4:
        return RepType.TAME
    return RepType.WILD


# rendering


def render(x) -> str:
    """Text form: ``3``, ``inf``, ``inf{1,3}``, ``aleph0``, ``continuum``."""
    return str(x)


def to_json(x):
    """JSON-friendly form of monoid values, classes and presentations."""
    if isinstance(x, Fin):
        return x.d
    if isinstance(x, (Inf, InfSet, Aleph0, Continuum, InfiniteFamily)):
        return str(x)
    if isinstance(x, IsoClass):
        return {
            "lambda": to_json(x.lam),
            "mu": [to_json(v) for v in x.mu],
            "nu": [to_json(v) for v in x.nu],
            "rigid": [{"id": c.label(), "mult": m} for c, m in x.rigid],
        }
    if isinstance(x, Presentation):
        return {
            "n": x.n,
            "generators": list(x.generators),
            "relations": [{"lhs": list(l), "rhs": list(r)} for l, r in x.relations],
            "counts": [to_json(c) if not isinstance(c, int) else c for c in x.counts],
        }
    if isinstance(x, RepType):
        return x.value
    raise TypeError(f"cannot serialize {type(x).__name__}")
