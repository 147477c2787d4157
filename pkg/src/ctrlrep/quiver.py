"""Finite-dimensional representations of the n-subspace quiver.

A representation is an ambient space ``V0 = k^dim0`` together with ``n``
subspaces.  Linear maps act on row vectors from the right, so a morphism
``a -> b`` is a ``a.dim0 x b.dim0`` matrix ``F`` with ``V_i(a) F`` contained
in ``V_i(b)`` for every branch ``i``.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Optional, Sequence, Union

import sympy

from .errors import (
    AmbientMismatch,
    BranchCountMismatch,
    BranchOutOfRange,
    DecompositionFailure,
    NegativeResult,
    Unsupported,
)
from .linal import (
    QQ,
    Field,
    Mat,
    Subspace,
    _check_same_field,
    kernel_basis,
    rank,
    rref,
    solve,
    vec_mat,
)


@dataclass(frozen=True)
class DimVector:
    d0: int
    d: tuple

    @property
    def n(self) -> int:
        return len(self.d)

    def __add__(self, other: "DimVector") -> "DimVector":
        if self.n != other.n:
            raise BranchCountMismatch(f"{self.n} vs {other.n}")
        return DimVector(self.d0 + other.d0, tuple(x + y for x, y in zip(self.d, other.d)))

    def as_tuple(self) -> tuple:
        return (self.d0,) + tuple(self.d)


@dataclass(frozen=True)
class NSubRep:
    field: Field
    n: int
    dim0: int
    subspaces: tuple

    def __post_init__(self):
        if self.n < 1:
            raise BranchCountMismatch("a representation needs at least one branch")
        if len(self.subspaces) != self.n:
            raise BranchCountMismatch(f"{len(self.subspaces)} subspaces for n={self.n}")
        for s in self.subspaces:
            _check_same_field(self.field, s.field)
            if s.ambient_dim != self.dim0:
                raise AmbientMismatch(
                    f"subspace in ambient {s.ambient_dim}, expected {self.dim0}")

    @classmethod
    def from_vectors(cls, field: Field, dim0: int, spans: Sequence[Sequence[Sequence]]) -> "NSubRep":
        """Build from one list of spanning vectors per branch."""
        return cls(field, len(spans), dim0,
                   tuple(Subspace.span(field, dim0, vs) for vs in spans))

    @classmethod
    def zero(cls, field: Field, n: int) -> "NSubRep":
        return cls(field, n, 0, tuple(Subspace.zero(field, 0) for _ in range(n)))

    @property
    def dim_vector(self) -> DimVector:
        return DimVector(self.dim0, tuple(s.dim for s in self.subspaces))

    def is_zero(self) -> bool:
        return self.dim0 == 0


def _same_shape(a: NSubRep, b: NSubRep):
    if a.n != b.n:
        raise BranchCountMismatch(f"{a.n} vs {b.n}")
    _check_same_field(a.field, b.field)


def direct_sum(a: NSubRep, b: NSubRep) -> NSubRep:
    _same_shape(a, b)
    F = a.field
    za, zb = [F.zero] * a.dim0, [F.zero] * b.dim0
    subs = []
    for sa, sb in zip(a.subspaces, b.subspaces):
        vecs = [list(v) + zb for v in sa.vectors()] + [za + list(v) for v in sb.vectors()]
        subs.append(Subspace.span(F, a.dim0 + b.dim0, vecs))
    return NSubRep(F, a.n, a.dim0 + b.dim0, tuple(subs))


def direct_sum_all(reps: Sequence[NSubRep], field: Field, n: int) -> NSubRep:
    out = NSubRep.zero(field, n)
    for r in reps:
        out = direct_sum(out, r)
    return out


def base_change(v: NSubRep, p: Mat) -> NSubRep:
    """Image of ``v`` under the invertible map ``x -> x p``."""
    return NSubRep(v.field, v.n, p.cols, tuple(s.image(p) for s in v.subspaces))


def restrict(v: NSubRep, block: Sequence[Sequence]) -> NSubRep:
    """Subrepresentation on the span of ``block`` rows, in block coordinates.

    Only meaningful when the block is a direct summand, i.e. every ``V_i``
    splits along it.  The branch-``i`` subspace is ``{c : c R in V_i}`` for the
    block matrix ``R``.
    """
    F = v.field
    k = len(block)
    if k == 0:
        return NSubRep.zero(F, v.n)
    r = Mat.from_rows(F, block, v.dim0)
    subs = []
    for s in v.subspaces:
        if s.dim == v.dim0:
            subs.append(Subspace.full(F, k))
        elif s.dim == 0:
            subs.append(Subspace.zero(F, k))
        else:
            subs.append(kernel_basis((r @ s.annihilator()).transpose()))
    return NSubRep(F, v.n, k, tuple(subs))


def embed_one(i: int, w: NSubRep, n: int) -> NSubRep:
    """Place a one-subspace representation on branch ``i`` of an n-subspace."""
    if w.n != 1:
        raise BranchCountMismatch("embed_one expects a one-subspace representation")
    if not 1 <= i <= n:
        raise BranchOutOfRange(f"branch {i} outside 1..{n}")
    subs = [Subspace.zero(w.field, w.dim0)] * n
    subs[i - 1] = w.subspaces[0]
    return NSubRep(w.field, n, w.dim0, tuple(subs))


# morphisms and Ext


def hom_basis(a: NSubRep, b: NSubRep) -> list:
    """Basis of Hom(a, b) as ``a.dim0 x b.dim0`` matrices."""
    _same_shape(a, b)
    F = a.field
    da, db = a.dim0, b.dim0
    nvars = da * db
    if nvars == 0:
        return []
    eqs = []
    for sa, sb in zip(a.subspaces, b.subspaces):
        if sa.dim == 0 or sb.dim == db:
            continue
        ann = sb.annihilator()  # db x c, columns cut out V_i(b)
        for u in sa.vectors():
            for c in range(ann.cols):
                row = [F.zero] * nvars
                for r, ur in enumerate(u):
                    if not ur:
                        continue
                    for s in range(db):
                        x = ann[s, c]
                        if x:
                            row[r * db + s] = F.mul(ur, x)
                eqs.append(row)
    system = Mat.from_rows(F, eqs, nvars) if eqs else Mat(F, 0, nvars, ())
    ker = kernel_basis(system)
    return [Mat(F, da, db, v) for v in ker.vectors()]


def euler_form(a: DimVector, b: DimVector) -> int:
    if a.n != b.n:
        raise BranchCountMismatch(f"{a.n} vs {b.n}")
    return (a.d0 * b.d0 + sum(x * y for x, y in zip(a.d, b.d))
            - sum(x * b.d0 for x in a.d))


def ext1_dim(a: NSubRep, b: NSubRep) -> int:
    _same_shape(a, b)
    e = len(hom_basis(a, b)) - euler_form(a.dim_vector, b.dim_vector)
    if e < 0:
        raise NegativeResult(f"dim Ext^1 = {e}")
    return e


def projective_cover(a: NSubRep) -> tuple:
    """Projective ``P`` and a surjection ``P -> a`` given as a matrix.

    ``P`` is a sum of copies of ``(k; k at branch i)`` for each basis vector of
    ``V_i`` followed by ``dim0`` copies of ``(k; 0, ..., 0)``.
    """
    F = a.field
    gens = [(i, v) for i, s in enumerate(a.subspaces) for v in s.vectors()]
    size = len(gens) + a.dim0
    spans = [[] for _ in range(a.n)]
    for j, (i, _) in enumerate(gens):
        spans[i].append([F.one if t == j else F.zero for t in range(size)])
    cover = NSubRep.from_vectors(F, size, spans) if a.n else None
    rows = [list(v) for _, v in gens] + Mat.identity(F, a.dim0).to_rows()
    pi = Mat.from_rows(F, rows, a.dim0) if rows else Mat(F, 0, a.dim0, ())
    return cover, pi


def ext1_cocycle(a: NSubRep, b: NSubRep) -> int:
    """Ext^1(a, b) from the explicit two-term projective resolution of ``a``."""
    _same_shape(a, b)
    F = a.field
    cover, pi = projective_cover(a)
    # left kernel of pi: x pi = 0
    ker = kernel_basis(pi.transpose())
    kernel_rep = restrict(cover, ker.vectors()) if ker.dim else NSubRep.zero(F, a.n)
    if any(s.dim for s in kernel_rep.subspaces):
        raise DecompositionFailure("syzygy of a projective cover must be projective")
    hom_k = hom_basis(kernel_rep, b)
    if not hom_k:
        return 0
    incl = Mat.from_rows(F, ker.vectors(), cover.dim0)
    restricted = [incl @ f for f in hom_basis(cover, b)]
    if restricted:
        img = rank(Mat.from_rows(F, [list(m.entries) for m in restricted]))
    else:
        img = 0
    return len(hom_k) - img


# rigidification


def _sum_all(F: Field, dim0: int, spaces) -> Subspace:
    out = Subspace.zero(F, dim0)
    for s in spaces:
        out = out + s
    return out


def is_rigid(v: NSubRep) -> bool:
    F = v.field
    subs = v.subspaces
    for i, s in enumerate(subs):
        others = _sum_all(F, v.dim0, (t for j, t in enumerate(subs) if j != i))
        if not others.contains_subspace(s):
            return False
    return _sum_all(F, v.dim0, subs).dim == v.dim0


def _extend(F: Field, dim0: int, base: Subspace, candidates) -> list:
    """Greedily pick candidates independent modulo ``base``."""
    acc = base
    picked = []
    for c in candidates:
        if not acc.contains(c):
            picked.append(tuple(c))
            acc = acc + Subspace.span(F, dim0, [c])
    return picked


@dataclass(frozen=True)
class Rigidification:
    rig: NSubRep
    complements: tuple
    witness: Mat


def rigidify(v: NSubRep) -> Rigidification:
    """Split ``v`` as ``(sum_i F^i complement_i) + rig`` with ``rig`` rigid.

    The witness ``P`` is invertible with rows ``[E_1, G, E_2, ..., E_n, rig]``:
    ``E_i`` complements the rigid core inside ``V_i`` and ``G`` complements
    ``sum V_i`` inside ``V0``.  Then
    ``base_change(direct_sum(embed_one(1, c_1), ..., embed_one(n, c_n), rig), P) == v``.
    """
    F, n, d0 = v.field, v.n, v.dim0
    subs = v.subspaces
    cores = []
    for i, s in enumerate(subs):
        others = _sum_all(F, d0, (t for j, t in enumerate(subs) if j != i))
        cores.append(s & others)
    core0 = _sum_all(F, d0, cores)
    total = _sum_all(F, d0, subs)
    comps = [_extend(F, d0, c, s.vectors()) for c, s in zip(cores, subs)]
    unit = Mat.identity(F, d0).to_rows()
    extra = _extend(F, d0, total, unit)

    core_rows = core0.vectors()
    rig = NSubRep(F, n, core0.dim, tuple(
        Subspace.span(F, core0.dim, (core0.coordinates(w) for w in c.vectors()))
        for c in cores))

    one = []
    for i, e in enumerate(comps):
        width = len(e) + (len(extra) if i == 0 else 0)
        sub = Subspace.span(F, width, Mat.identity(F, width).to_rows()[:len(e)])
        one.append(NSubRep(F, 1, width, (sub,)))

    rows = list(comps[0]) + extra
    for e in comps[1:]:
        rows += e
    rows += core_rows
    witness = Mat.from_rows(F, rows, d0) if rows else Mat(F, 0, d0, ())
    return Rigidification(rig, tuple(one), witness)


def reassemble_rigidification(r: Rigidification) -> NSubRep:
    n = r.rig.n
    parts = [embed_one(i + 1, c, n) for i, c in enumerate(r.complements)] + [r.rig]
    return direct_sum_all(parts, r.rig.field, n)


# catalog


@dataclass(frozen=True)
class RigidIndec:
    n: int
    j: int

    def label(self) -> str:
        return f"V({self.n},{self.j})"


@dataclass(frozen=True)
class OneSub:
    i: int
    kind: str  # "k->k" or "0->k"

    def label(self) -> str:
        return f"F{self.i}({self.kind})"


@dataclass(frozen=True)
class Opaque:
    rep: NSubRep

    def label(self) -> str:
        return "Opaque" + str(self.rep.dim_vector.as_tuple())


CatalogId = Union[RigidIndec, OneSub, Opaque]


def catalog_key(c: CatalogId) -> tuple:
    if isinstance(c, RigidIndec):
        return (0, c.n, c.j)
    if isinstance(c, OneSub):
        return (1, c.i, c.kind)
    return (2, c.rep.dim_vector.as_tuple(), repr(c.rep))


def is_rigid_id(c: CatalogId) -> bool:
    if isinstance(c, RigidIndec):
        return True
    if isinstance(c, Opaque):
        return is_rigid(c.rep)
    return False


# (V1, V2, V3) for n = 3, each given by spanning vectors of V0
_CATALOG3 = {
    1: (1, [[[1]], [], [[1]]]),
    2: (1, [[[1]], [[1]], []]),
    3: (1, [[], [[1]], [[1]]]),
    4: (1, [[[1]], [[1]], [[1]]]),
    5: (2, [[[1, 0]], [[0, 1]], [[1, 1]]]),
}


def catalog_rep(cid: CatalogId, field: Field = QQ) -> NSubRep:
    if isinstance(cid, Opaque):
        return cid.rep
    if isinstance(cid, OneSub):
        span = [[1]] if cid.kind == "k->k" else []
        return NSubRep.from_vectors(field, 1, [span])
    if cid.n == 2 and cid.j == 1:
        return NSubRep.from_vectors(field, 1, [[[1]], [[1]]])
    if cid.n == 3 and cid.j in _CATALOG3:
        d0, spans = _CATALOG3[cid.j]
        return NSubRep.from_vectors(field, d0, spans)
    raise Unsupported(f"no catalog entry {cid}")


def one_sub_rep(i: int, kind: str, n: int, field: Field = QQ) -> NSubRep:
    """The image ``F^i(k->k)`` or ``F^i(0->k)`` as an n-subspace."""
    return embed_one(i, catalog_rep(OneSub(1, kind), field), n)


def catalog_list(n: int, field: Field = QQ) -> list:
    """Rigid indecomposables for ``n <= 3`` as ``(CatalogId, representative)``."""
    if n < 1:
        raise BranchCountMismatch("n must be at least 1")
    if n >= 4:
        raise Unsupported(
            f"rigid indecomposables for n={n} form an infinite family; "
            "decompose() reports them as Opaque summands")
    ids = {1: [], 2: [RigidIndec(2, 1)], 3: [RigidIndec(3, j) for j in range(1, 6)]}[n]
    return [(c, catalog_rep(c, field)) for c in ids]


def _identify(piece: NSubRep) -> CatalogId:
    dv = piece.dim_vector
    n = piece.n
    if dv.d0 == 1 and sum(dv.d) == 0:
        return OneSub(1, "0->k")
    if dv.d0 == 1 and sum(dv.d) == 1:
        return OneSub(dv.d.index(1) + 1, "k->k")
    if n <= 3:
        for cid, rep in catalog_list(n, piece.field):
            if rep.dim_vector == dv:
                return cid
        raise DecompositionFailure(f"indecomposable with unexpected dimension vector {dv}")
    return Opaque(piece)


# decomposition


def _integral(f: Mat) -> list:
    """Rows of a nonzero scalar multiple of ``f`` with integer entries."""
    den = lcm(*(x.denominator for x in f.entries)) if f.entries else 1
    return [[x.numerator * (den // x.denominator) for x in f.row(i)] for i in range(f.rows)]


def _int_matmul(a: list, b: list) -> list:
    cols = list(zip(*b))
    out = [[sum(x * y for x, y in zip(r, c)) for c in cols] for r in a]
    g = gcd(*(x for r in out for x in r))
    return [[x // g for x in r] for r in out] if g > 1 else out


def _mat_pow(m: Mat, k: int) -> Mat:
    """``m**k`` up to a nonzero scalar, which is all the Fitting split needs."""
    F = m.field
    if F.is_rational:
        out = None
        base = _integral(m)
        while k:
            if k & 1:
                out = base if out is None else _int_matmul(out, base)
            k >>= 1
            if k:
                base = _int_matmul(base, base)
        return Mat.from_rows(F, out, m.cols) if out is not None else Mat.identity(F, m.rows)
    out = Mat.identity(F, m.rows)
    base = m
    while k:
        if k & 1:
            out = out @ base
        base = base @ base
        k >>= 1
    return out


def _fitting_split(f: Mat) -> Optional[tuple]:
    """``(ker f^N, im f^N)`` with ``N = dim``, or None when one of them is trivial."""
    g = _mat_pow(f, f.rows)
    _, r, image = rref(g)
    if 0 < r < f.rows:
        return kernel_basis(g.transpose()).vectors(), image.vectors()
    return None


def _min_poly(f: Mat) -> list:
    """Coefficients (constant first) of the monic minimal polynomial of ``f``."""
    F = f.field
    powers = [Mat.identity(F, f.rows)]
    while True:
        powers.append(powers[-1] @ f)
        cols = Mat.from_rows(F, [list(p.entries) for p in powers]).transpose()
        ker = kernel_basis(cols)
        if ker.dim:
            c = ker.vectors()[0]
            lead = c[len(powers) - 1]
            if lead:
                return [F.div(x, lead) for x in c]


def _to_sympy_poly(F: Field, coeffs: list, x):
    if F.is_rational:
        return sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)],
                          x, domain="QQ")
    return sympy.Poly([int(c) for c in reversed(coeffs)], x, modulus=F.p)


def _from_sympy(F: Field, c):
    if F.is_rational:
        c = sympy.Rational(c)
        return Fraction(int(c.p), int(c.q))
    return int(c) % F.p


def _poly_eval(F: Field, coeffs: list, f: Mat) -> Mat:
    out = Mat.zeros(F, f.rows, f.cols)
    ident = Mat.identity(F, f.rows)
    for c in reversed(coeffs):
        out = out @ f
        if c:
            out = Mat(F, f.rows, f.cols,
                      tuple(F.add(a, F.mul(c, b)) for a, b in zip(out.entries, ident.entries)))
    return out


def _primary_split(f: Mat) -> Optional[tuple]:
    F = f.field
    coeffs = _min_poly(f)
    x = sympy.Symbol("x")
    _, factors = _to_sympy_poly(F, coeffs, x).factor_list()
    if len(factors) < 2:
        return None
    p1 = [_from_sympy(F, c) for c in reversed(factors[0][0].all_coeffs())]
    return _fitting_split(_poly_eval(F, p1, f))


def _split(f: Mat) -> Optional[tuple]:
    return _fitting_split(f) or _primary_split(f)


def _combine(F: Field, basis: list, coeffs) -> Mat:
    m = basis[0]
    out = [F.zero] * len(m.entries)
    for c, b in zip(coeffs, basis):
        if c:
            c = F(c)
            out = [F.add(o, F.mul(c, x)) for o, x in zip(out, b.entries)]
    return Mat(F, m.rows, m.cols, tuple(out))


_GRID_CAP = 4096
_RANDOM_TRIES = 24


def _candidates(F: Field, basis: list, rng: random.Random, include_basis: bool = True):
    """Basis elements, then seeded random combinations, then a capped grid."""
    if include_basis:
        yield from basis
    d = len(basis)
    if d <= 1:
        return
    if F.is_rational:
        bound = 2 * d + 1
        for _ in range(_RANDOM_TRIES):
            yield _combine(F, basis, [rng.randint(-bound, bound) for _ in range(d)])
        values = range(-bound, bound + 1)
    else:
        for _ in range(_RANDOM_TRIES):
            yield _combine(F, basis, [rng.randrange(F.p) for _ in range(d)])
        values = range(F.p)
    for count, coeffs in enumerate(itertools.product(values, repeat=d)):
        if count >= _GRID_CAP:
            raise _GridExhausted
        yield _combine(F, basis, coeffs)


class _GridExhausted(Exception):
    pass


def _semisimple_rank(basis: list) -> int:
    """Rank of the trace form on End; equals dim End/rad End in characteristic 0."""
    F = basis[0].field
    d = basis[0].rows
    gram = []
    for x in basis:
        row = []
        for y in basis:
            t = F.zero
            for i in range(d):
                for j in range(d):
                    a = x[i, j]
                    if a:
                        b = y[j, i]
                        if b:
                            t = F.add(t, F.mul(a, b))
            row.append(t)
        gram.append(row)
    return rank(Mat.from_rows(F, gram))


def _probe_vectors(piece: NSubRep) -> list:
    """Vectors from small subspaces of the lattice spanned by the ``V_i``.

    In an isotypic piece ``X (x) k^m`` a vector from a one-dimensional subspace
    of ``X`` is a pure tensor, so the endomorphisms killing it are singular
    without being nilpotent.
    """
    F, d0 = piece.field, piece.dim0
    spaces = [s for s in piece.subspaces if s.dim]
    for a, b in itertools.combinations(piece.subspaces, 2):
        m = a & b
        if m.dim:
            spaces.append(m)
    spaces.sort(key=lambda s: s.dim)
    out = []
    for s in spaces:
        out += s.vectors()
    return out + Mat.identity(F, d0).to_rows()


def _killing_elements(piece: NSubRep, end: list, rng: random.Random):
    """Endomorphisms annihilating a probe vector; these are never invertible."""
    F = piece.field
    for w in _probe_vectors(piece):
        images = Mat.from_rows(F, [vec_mat(w, f) for f in end])
        ker = kernel_basis(images.transpose())
        if not ker.dim:
            continue
        kill = [_combine(F, end, c) for c in ker.vectors()]
        yield from kill
        for _ in range(4):
            yield _combine(F, kill, [rng.randint(1, 2 * len(kill) + 1) for _ in kill])


def _decompose_blocks(v: NSubRep, rows: list, rng: random.Random) -> list:
    """Split the summand spanned by ``rows`` into indecomposable blocks."""
    F = v.field
    piece = restrict(v, rows)
    end = hom_basis(piece, piece)
    if not end:
        return []
    if len(end) == 1:
        return [rows]
    parts = next((p for p in map(_fitting_split, end) if p), None)
    if parts is None:
        # End/rad End of dimension one certifies a local ring (characteristic 0)
        if F.is_rational and _semisimple_rank(end) == 1:
            return [rows]
        parts = next((p for p in map(_fitting_split, _killing_elements(piece, end, rng)) if p),
                     None)
    if parts is None:
        exhaustive = not F.is_rational and F.p ** len(end) <= _GRID_CAP
        try:
            for f in _candidates(F, end, rng, include_basis=False):
                parts = _split(f)
                if parts:
                    break
        except _GridExhausted:
            if not F.is_rational and not exhaustive:
                raise DecompositionFailure(
                    f"no splitting endomorphism found within {_GRID_CAP} grid points")
    if not parts:
        return [rows]
    out = []
    basis_mat = Mat.from_rows(F, rows)
    for part in parts:
        out += _decompose_blocks(v, [vec_mat(w, basis_mat) for w in part], rng)
    return out


@dataclass(frozen=True)
class Witness:
    base_change: Mat
    blocks: tuple  # (start, stop, CatalogId) per indecomposable block
    pieces: tuple  # the block representations in block coordinates

    def reassemble(self) -> NSubRep:
        """Direct sum of the pieces carried back to the original coordinates."""
        p = self.pieces[0]
        return base_change(direct_sum_all(self.pieces, p.field, p.n), self.base_change)


@dataclass(frozen=True)
class DecompResult:
    summands: tuple  # ((CatalogId, multiplicity), ...)
    witness: Optional[Witness]

    def counter(self) -> Counter:
        return Counter({c: m for c, m in self.summands})


def _group(ids: list, rep_iso) -> tuple:
    plain = Counter(c for c in ids if not isinstance(c, Opaque))
    classes: list = []
    for c in ids:
        if not isinstance(c, Opaque):
            continue
        for cls in classes:
            if rep_iso(cls[0].rep, c.rep):
                cls[1] += 1
                break
        else:
            classes.append([c, 1])
    items = list(plain.items()) + [(c, m) for c, m in classes]
    return tuple(sorted(items, key=lambda cm: catalog_key(cm[0])))


def decompose(v: NSubRep, seed: int = 0) -> DecompResult:
    F = v.field
    if v.dim0 == 0:
        return DecompResult((), None)
    rng = random.Random(seed)
    blocks = _decompose_blocks(v, Mat.identity(F, v.dim0).to_rows(), rng)
    found = [(b, restrict(v, b)) for b in blocks]
    found = [(b, piece, _identify(piece)) for b, piece in found]
    found.sort(key=lambda t: catalog_key(t[2]))
    rows, spans, pieces, ids = [], [], [], []
    for b, piece, cid in found:
        spans.append((len(rows), len(rows) + len(b), cid))
        rows += b
        pieces.append(piece)
        ids.append(cid)
    witness = Witness(Mat.from_rows(F, rows, v.dim0), tuple(spans), tuple(pieces))
    return DecompResult(_group(ids, indecomposable_iso), witness)


def indecomposable_iso(a: NSubRep, b: NSubRep, seed: int = 0) -> bool:
    """Decide a ~= b for indecomposables by searching Hom(a, b) for an invertible map."""
    if a.dim_vector != b.dim_vector:
        return False
    if a == b:
        return True
    basis = hom_basis(a, b)
    if not basis:
        return False
    rng = random.Random(seed)
    try:
        for f in _candidates(a.field, basis, rng):
            if rank(f) == a.dim0:
                return True
    except _GridExhausted:
        pass
    return False


def iso_test_rep(a: NSubRep, b: NSubRep, seed: int = 0) -> bool:
    _same_shape(a, b)
    if a.dim_vector != b.dim_vector:
        return False
    return summands_equal(decompose(a, seed).summands, decompose(b, seed).summands)


def summands_equal(x: tuple, y: tuple) -> bool:
    """Multiset equality of summand lists, pairing Opaque entries by isomorphism."""
    cx = Counter({c: m for c, m in x if not isinstance(c, Opaque)})
    cy = Counter({c: m for c, m in y if not isinstance(c, Opaque)})
    if cx != cy:
        return False
    ox = [[c.rep, m] for c, m in x if isinstance(c, Opaque)]
    oy = [[c.rep, m] for c, m in y if isinstance(c, Opaque)]
    if sum(m for _, m in ox) != sum(m for _, m in oy):
        return False
    for rep, m in ox:
        for entry in oy:
            if entry[1] and indecomposable_iso(rep, entry[0]):
                if entry[1] < m:
                    return False
                entry[1] -= m
                break
        else:
            return False
    return all(m == 0 for _, m in oy)


__all__ = [
    "DimVector", "NSubRep", "RigidIndec", "OneSub", "Opaque", "CatalogId",
    "DecompResult", "Witness", "Rigidification",
    "direct_sum", "direct_sum_all", "base_change", "restrict", "embed_one",
    "hom_basis", "euler_form", "ext1_dim", "ext1_cocycle", "projective_cover",
    "rigidify", "reassemble_rigidification", "is_rigid",
    "catalog_list", "catalog_rep", "one_sub_rep", "catalog_key", "is_rigid_id",
    "decompose", "iso_test_rep", "indecomposable_iso", "summands_equal",
]
