"""Exact linear algebra over the rationals and over prime fields.

Everything here is immutable and pure.  Dense matrices are stored row-major in a
flat tuple; subspaces are stored as the canonical reduced row-echelon basis of
their row space, so two equal subspaces compare equal as dataclasses.

A small sparse echelon structure is also provided for the truncation engine of
:mod:`ctrlrep.controlled`, where vectors are dictionaries keyed by basis labels.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from sympy import isprime

from .errors import AmbientMismatch, FieldMismatch, ShapeMismatch


class Field:
    """The rationals (``p == 0``) or the prime field with ``p`` elements."""

    __slots__ = ("p",)

    def __init__(self, p: int = 0):
        self.p = p

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return self.tag

    @property
    def tag(self) -> str:
        return "Q" if self.p == 0 else f"Fp:{self.p}"

    @property
    def is_rational(self) -> bool:
        return self.p == 0

    @staticmethod
    def from_tag(tag: str) -> "Field":
        """Parse ``"Q"`` or ``"Fp:<p>"``; raises ``ValueError`` otherwise."""
        if tag == "Q":
            return QQ
        if tag.startswith("Fp:"):
            try:
                p = int(tag[3:])
            except ValueError:
                raise ValueError(f"bad field tag {tag!r}") from None
            return GF(p)
        raise ValueError(f"bad field tag {tag!r}")

    # element handling

    def __call__(self, x):
        """Coerce an int, Fraction or string such as ``"3/2"`` into the field."""
        if isinstance(x, str):
            x = Fraction(x.strip())
        if self.p == 0:
            return x if type(x) is Fraction else Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in {self.tag}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    @property
    def zero(self):
        return Fraction(0) if self.p == 0 else 0

    @property
    def one(self):
        return Fraction(1) if self.p == 0 else 1

    def add(self, a, b):
        return a + b if self.p == 0 else (a + b) % self.p

    def sub(self, a, b):
        return a - b if self.p == 0 else (a - b) % self.p

    def mul(self, a, b):
        return a * b if self.p == 0 else (a * b) % self.p

    def neg(self, a):
        return -a if self.p == 0 else (-a) % self.p

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a if self.p == 0 else pow(a, -1, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def to_str(self, a) -> str:
        return str(a)

    def elements(self):
        """All elements of a prime field (small ``p`` only)."""
        if self.p == 0:
            raise ValueError("the rationals are infinite")
        return range(self.p)


QQ = Field(0)
_QZERO = Fraction(0)


@lru_cache(maxsize=None)
def GF(p: int) -> Field:
    if p < 2 or not isprime(p):
        raise ValueError(f"{p} is not prime")
    return Field(p)


def _check_same_field(*fields):
    first = fields[0]
    for f in fields[1:]:
        if f != first:
            raise FieldMismatch(f"{first.tag} vs {f.tag}")
    return first


@dataclass(frozen=True)
class Mat:
    field: Field
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ShapeMismatch(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix")

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence], cols: Optional[int] = None) -> "Mat":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise ShapeMismatch("ragged rows")
        return cls(field, len(rows), cols, tuple(field(x) for r in rows for x in r))

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Mat":
        return cls(field, rows, cols, (field.zero,) * (rows * cols))

    @classmethod
    def identity(cls, field: Field, n: int) -> "Mat":
        z, o = field.zero, field.one
        return cls(field, n, n, tuple(o if i == j else z for i in range(n) for j in range(n)))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "Mat":
        return Mat(self.field, self.cols, self.rows,
                   tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def __matmul__(self, other: "Mat") -> "Mat":
        F = _check_same_field(self.field, other.field)
        if self.cols != other.rows:
            raise ShapeMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        out = []
        ocols = [other.column(j) for j in range(other.cols)]
        for i in range(self.rows):
            r = self.row(i)
            for c in ocols:
                s = F.zero
                for a, b in zip(r, c):
                    if a and b:
                        s = F.add(s, F.mul(a, b))
                out.append(s)
        return Mat(F, self.rows, other.cols, tuple(out))

    def column(self, j: int) -> tuple:
        return self.entries[j::self.cols] if self.cols else ()

    def is_zero(self) -> bool:
        return not any(self.entries)

    def stack(self, other: "Mat") -> "Mat":
        _check_same_field(self.field, other.field)
        if self.cols != other.cols:
            raise ShapeMismatch("column counts differ")
        return Mat(self.field, self.rows + other.rows, self.cols, self.entries + other.entries)


def vec_mat(v: Sequence, m: Mat) -> tuple:
    """Row vector times matrix."""
    F = m.field
    out = []
    for j in range(m.cols):
        s = F.zero
        for i, a in enumerate(v):
            if a:
                b = m[i, j]
                if b:
                    s = F.add(s, F.mul(a, b))
        out.append(s)
    return tuple(out)


# elimination kernels


def _rref_rational(entries: list, ncols: int) -> tuple:
    int_rows = []
    for row in entries:
        if not any(row):
            continue
        den = lcm(*(x.denominator for x in row))
        int_rows.append([x.numerator * (den // x.denominator) for x in row])
    if not int_rows:
        return [], []
    ech = _bareiss_rank_profile(int_rows, ncols)
    pivots = [next(j for j, x in enumerate(row) if x) for row in ech]
    # integer back substitution, keeping each row primitive
    for i in range(len(ech) - 1, -1, -1):
        c = pivots[i]
        low = ech[i]
        b = low[c]
        for k in range(i):
            a = ech[k][c]
            if a:
                row = [b * x - a * y for x, y in zip(ech[k], low)]
                g = gcd(*row)
                ech[k] = [x // g for x in row] if g > 1 else row
    out = []
    for row, c in zip(ech, pivots):
        p = row[c]
        out.append([Fraction(x, p) if x else _QZERO for x in row])
    return out, pivots


def _bareiss_rank_profile(rows: list, ncols: int) -> list:
    """Row echelon form of an integer matrix via one-step Bareiss elimination."""
    nrows = len(rows)
    r = 0
    prev = 1
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r]
        pc = piv[c]
        tail = piv[c + 1:]
        for i in range(r + 1, nrows):
            row = rows[i]
            a = row[c]
            # every quotient is exact: entries are minors of the input
            if a:
                rows[i] = row[:c] + [0] + [(pc * x - a * y) // prev
                                           for x, y in zip(row[c + 1:], tail)]
            elif pc != prev:
                rows[i] = row[:c + 1] + [pc * x // prev for x in row[c + 1:]]
        prev = pc
        r += 1
    return rows[:r]


def _rref_modp(entries: list, ncols: int, p: int) -> tuple:
    rows = [list(r) for r in entries if any(r)]
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(rows):
            break
        k = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if k is None:
            continue
        rows[r], rows[k] = rows[k], rows[r]
        inv = pow(rows[r][c], -1, p)
        piv = rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r:
                f = rows[i][c]
                if f:
                    rows[i] = [(a - f * b) % p for a, b in zip(rows[i], piv)]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def _rref_lists(field: Field, rows: list, ncols: int) -> tuple:
    if field.is_rational:
        return _rref_rational(rows, ncols)
    return _rref_modp(rows, ncols, field.p)


@dataclass(frozen=True)
class Subspace:
    field: Field
    ambient_dim: int
    basis: Mat

    @classmethod
    def span(cls, field: Field, ambient_dim: int, vectors: Iterable[Sequence]) -> "Subspace":
        rows = []
        for v in vectors:
            v = [field(x) for x in v]
            if len(v) != ambient_dim:
                raise AmbientMismatch(f"vector of length {len(v)} in ambient {ambient_dim}")
            rows.append(v)
        red, _ = _rref_lists(field, rows, ambient_dim)
        return cls(field, ambient_dim, Mat(field, len(red), ambient_dim,
                                          tuple(x for r in red for x in r)))

    @classmethod
    def zero(cls, field: Field, ambient_dim: int) -> "Subspace":
        return cls(field, ambient_dim, Mat(field, 0, ambient_dim, ()))

    @classmethod
    def full(cls, field: Field, ambient_dim: int) -> "Subspace":
        return cls(field, ambient_dim, Mat.identity(field, ambient_dim))

    @property
    def dim(self) -> int:
        return self.basis.rows

    def vectors(self) -> list:
        return [self.basis.row(i) for i in range(self.dim)]

    @property
    def pivots(self) -> list:
        return [next(j for j, x in enumerate(r) if x) for r in self.vectors()]

    def coordinates(self, v: Sequence) -> Optional[tuple]:
        """Coordinates of ``v`` in the canonical basis, or None if ``v`` is outside."""
        F = self.field
        v = [F(x) for x in v]
        if len(v) != self.ambient_dim:
            raise AmbientMismatch("vector length")
        coords = tuple(v[c] for c in self.pivots)
        rest = list(v)
        for c, b in zip(coords, self.vectors()):
            if c:
                rest = [F.sub(x, F.mul(c, y)) for x, y in zip(rest, b)]
        return coords if not any(rest) else None

    def contains(self, v: Sequence) -> bool:
        return self.coordinates(v) is not None

    def contains_subspace(self, other: "Subspace") -> bool:
        self._check(other)
        return all(self.contains(v) for v in other.vectors())

    def _check(self, other: "Subspace"):
        _check_same_field(self.field, other.field)
        if self.ambient_dim != other.ambient_dim:
            raise AmbientMismatch(f"{self.ambient_dim} vs {other.ambient_dim}")

    def __add__(self, other: "Subspace") -> "Subspace":
        return meet_join(self, other)[0]

    def __and__(self, other: "Subspace") -> "Subspace":
        return meet_join(self, other)[1]

    def image(self, m: Mat) -> "Subspace":
        """Image of the subspace under ``x -> x m``."""
        if m.rows != self.ambient_dim:
            raise ShapeMismatch("matrix rows must equal ambient dimension")
        return Subspace.span(self.field, m.cols, (vec_mat(v, m) for v in self.vectors()))

    def complement_basis(self) -> list:
        """Standard basis vectors spanning a complement (the non-pivot coordinates)."""
        piv = set(self.pivots)
        F = self.field
        out = []
        for j in range(self.ambient_dim):
            if j not in piv:
                out.append(tuple(F.one if k == j else F.zero for k in range(self.ambient_dim)))
        return out

    def annihilator(self) -> Mat:
        """Columns spanning ``{y : b . y = 0 for every basis row b}``, as a matrix."""
        ker = kernel_basis(self.basis)
        return ker.basis.transpose()


def rref(m: Mat) -> tuple:
    """Canonical reduced row-echelon form, rank and row space of ``m``."""
    rows = [list(m.row(i)) for i in range(m.rows)]
    red, _ = _rref_lists(m.field, rows, m.cols)
    rank = len(red)
    padded = [x for r in red for x in r] + [m.field.zero] * ((m.rows - rank) * m.cols)
    reduced = Mat(m.field, m.rows, m.cols, tuple(padded))
    image = Subspace(m.field, m.cols, Mat(m.field, rank, m.cols, tuple(x for r in red for x in r)))
    return reduced, rank, image


def rank(m: Mat) -> int:
    return rref(m)[1]


def kernel_basis(m: Mat) -> Subspace:
    """Right kernel ``{x : m x = 0}`` as a subspace of ``k^cols``."""
    F = m.field
    rows = [list(m.row(i)) for i in range(m.rows)]
    red, pivots = _rref_lists(F, rows, m.cols)
    free = [j for j in range(m.cols) if j not in set(pivots)]
    vecs = []
    for f in free:
        x = [F.zero] * m.cols
        x[f] = F.one
        for r, pc in zip(red, pivots):
            x[pc] = F.neg(r[f])
        vecs.append(x)
    return Subspace.span(F, m.cols, vecs)


def solve(m: Mat, b: Sequence) -> Optional[tuple]:
    """Some ``x`` with ``m x = b``, or None when the system is inconsistent."""
    F = m.field
    if len(b) != m.rows:
        raise ShapeMismatch(f"right-hand side of length {len(b)} for {m.rows} rows")
    b = [F(x) for x in b]
    rows = [list(m.row(i)) + [b[i]] for i in range(m.rows)]
    red, pivots = _rref_lists(F, rows, m.cols + 1)
    if pivots and pivots[-1] == m.cols:
        return None
    x = [F.zero] * m.cols
    for r, pc in zip(red, pivots):
        x[pc] = r[m.cols]
    return tuple(x)


def meet_join(u: Subspace, v: Subspace) -> tuple:
    """Sum and intersection of two subspaces by Zassenhaus elimination."""
    u._check(v)
    F, n = u.field, u.ambient_dim
    z = [F.zero] * n
    rows = [list(a) + list(a) for a in u.vectors()] + [list(a) + z for a in v.vectors()]
    red, _ = _rref_lists(F, rows, 2 * n)
    sum_vecs = [r[:n] for r in red if any(r[:n])]
    meet_vecs = [r[n:] for r in red if not any(r[:n])]
    return Subspace.span(F, n, sum_vecs), Subspace.span(F, n, meet_vecs)


def invert(m: Mat) -> Mat:
    if m.rows != m.cols:
        raise ShapeMismatch("only square matrices are invertible")
    F, n = m.field, m.rows
    rows = [list(m.row(i)) + [F.one if i == j else F.zero for j in range(n)] for i in range(n)]
    red, pivots = _rref_lists(F, rows, 2 * n)
    if len(red) < n or pivots[n - 1] != n - 1:
        raise ZeroDivisionError("matrix is singular")
    return Mat(F, n, n, tuple(x for r in red for x in r[n:]))


class SparseEchelon:
    """Incrementally built echelon basis of sparse vectors.

    Vectors are mappings from orderable keys to nonzero field elements.  Each
    stored vector is normalized so that its smallest key (the pivot) has
    coefficient one; :meth:`reduce` is then the linear projection onto the span
    of non-pivot keys along the stored span.
    """

    def __init__(self, field: Field):
        self.field = field
        self.pivots: dict = {}

    def __len__(self):
        return len(self.pivots)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, vec: Mapping[Hashable, object]) -> dict:
        F = self.field
        v = {k: x for k, x in vec.items() if x}
        piv = self.pivots
        heap = [k for k in v if k in piv]
        heapq.heapify(heap)
        while heap:
            k = heapq.heappop(heap)
            c = v.get(k)
            if not c:
                continue
            for key, val in piv[k].items():
                nv = F.sub(v.get(key, F.zero), F.mul(c, val))
                if nv:
                    if key not in v and key in piv:
                        heapq.heappush(heap, key)
                    v[key] = nv
                else:
                    v.pop(key, None)
        return v

    def add(self, vec: Mapping[Hashable, object]) -> bool:
        """Insert ``vec``; return True when it enlarged the span."""
        r = self.reduce(vec)
        if not r:
            return False
        k = min(r)
        inv = self.field.inv(r[k])
        self.pivots[k] = {key: self.field.mul(x, inv) for key, x in r.items()}
        return True

    def contains(self, vec: Mapping[Hashable, object]) -> bool:
        return not self.reduce(vec)


def sparse_rank(field: Field, vectors: Iterable[Mapping]) -> int:
    ech = SparseEchelon(field)
    for v in vectors:
        ech.add(v)
    return ech.rank
