"""Finitely described controlled maps over the tree with ``n`` rays.

A free controlled object has ``root`` basis elements at the root and, on every
branch, a list of *strands*; each strand contributes ``arity(m)`` basis
elements at level ``m``.  Basis elements are keyed ``(0, 0, s)`` at the root
and ``(i, m, s)`` at level ``m >= 1`` of branch ``i``, with slots of earlier
strands first.

A map is a finite set of seed entries plus tail rules acting strand-to-strand
on one branch.  Band rules act on constant-arity strands by block Toeplitz
matrices; Tri rules act on strands of affinely growing arity by
``b(m,s) -> id*e(m,s) + up*e(m+1,s) + down*e(m-1,s)``.

Invariants are computed on truncations with sparse exact elimination.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Optional, Sequence, Union

from .errors import (
    BranchCountMismatch,
    BranchOutOfRange,
    BudgetExceeded,
    InvariantViolation,
    LevelTooSmall,
    ShapeMismatch,
    Unclassified,
    Unsupported,
)
from .isomonoid import (
    ALEPH0,
    CONTINUUM,
    INF,
    Fin,
    Inf,
    InfSet,
    IsoClass,
    class_eq,
)
from .linal import QQ, Field, Mat, SparseEchelon, Subspace, kernel_basis, meet_join
from .quiver import NSubRep, decompose


# profiles and objects


@dataclass(frozen=True)
class Const:
    w: int

    def value(self, m: int) -> int:
        return self.w


@dataclass(frozen=True)
class Affine:
    slope: int
    offset: int

    def value(self, m: int) -> int:
        return self.slope * m + self.offset


Profile = Union[Const, Affine]


@dataclass(frozen=True)
class Strand:
    seed_arities: tuple = ()
    tail: Profile = Const(0)
    start: int = 1

    def __post_init__(self):
        if self.start < 1:
            raise InvariantViolation("strand start level must be at least 1")
        if len(self.seed_arities) != self.start - 1:
            raise InvariantViolation(
                f"{len(self.seed_arities)} seed arities for start level {self.start}")
        if any(a < 0 for a in self.seed_arities):
            raise InvariantViolation("negative seed arity")
        if isinstance(self.tail, Const) and self.tail.w < 0:
            raise InvariantViolation("negative constant arity")
        if isinstance(self.tail, Affine):
            if self.tail.slope < 1:
                raise InvariantViolation("affine arities must strictly increase")
            if self.tail.value(self.start) < 0:
                raise InvariantViolation("negative affine arity at the start level")

    def arity(self, m: int) -> int:
        if m < self.start:
            return self.seed_arities[m - 1]
        return self.tail.value(m)


@dataclass(frozen=True)
class BranchSpec:
    strands: tuple = ()

    def arity(self, m: int) -> int:
        return sum(s.arity(m) for s in self.strands)

    def offset(self, k: int, m: int) -> int:
        return sum(s.arity(m) for s in self.strands[:k])

    def locate(self, m: int, slot: int) -> tuple:
        """Strand index and local slot of global slot ``slot`` at level ``m``."""
        for k, s in enumerate(self.strands):
            a = s.arity(m)
            if slot < a:
                return k, slot
            slot -= a
        raise InvariantViolation(f"slot out of range at level {m}")


@dataclass(frozen=True)
class ControlledObj:
    n: int
    root: int
    branches: tuple

    def __post_init__(self):
        if self.root < 0:
            raise InvariantViolation("negative root count")
        if len(self.branches) != self.n:
            raise BranchCountMismatch(f"{len(self.branches)} branches for n={self.n}")

    @classmethod
    def empty(cls, n: int) -> "ControlledObj":
        return cls(n, 0, tuple(BranchSpec() for _ in range(n)))

    def branch_keys(self, i: int, lo: int, hi: int) -> list:
        spec = self.branches[i - 1]
        return [(i, m, s) for m in range(max(lo, 1), hi + 1) for s in range(spec.arity(m))]

    def keys(self, depth: int) -> list:
        """Root keys then every branch key up to level ``depth``."""
        out = [(0, 0, s) for s in range(self.root)]
        for i in range(1, self.n + 1):
            out += self.branch_keys(i, 1, depth)
        return out

    def has_key(self, key: tuple) -> bool:
        i, m, s = key
        if i == 0:
            return m == 0 and 0 <= s < self.root
        return 1 <= i <= self.n and m >= 1 and 0 <= s < self.branches[i - 1].arity(m)


# tail rules


@dataclass(frozen=True)
class Band:
    """``b(m,s) -> sum_d sum_t blocks[d+D][s][t] e(m+d,t)``."""

    w: int
    D: int
    blocks: tuple

    def __post_init__(self):
        if self.D < 0:
            raise InvariantViolation("negative half-bandwidth")
        if len(self.blocks) != 2 * self.D + 1:
            raise InvariantViolation(f"band needs {2 * self.D + 1} blocks, got {len(self.blocks)}")
        for b in self.blocks:
            if (b.rows, b.cols) != (self.w, self.w):
                raise InvariantViolation(
                    f"band block of shape {b.rows}x{b.cols}, expected {self.w}x{self.w}")


@dataclass(frozen=True)
class Tri:
    coeff_id: object
    coeff_up: object
    coeff_down: object


@dataclass(frozen=True)
class TailRule:
    branch: int
    kind: Optional[Union[Band, Tri]] = None  # None is the zero rule
    start_level: int = 1
    domain_strand: int = 0
    codomain_strand: int = 0


@dataclass(frozen=True)
class ControlledMap:
    field: Field
    domain: ControlledObj
    codomain: ControlledObj
    seeds: tuple = ()  # ((from_key, to_key, value), ...), duplicates merged
    rules: tuple = ()
    _cache: dict = dc_field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.domain.n != self.codomain.n:
            raise BranchCountMismatch("domain and codomain branch counts differ")
        merged: dict = {}
        for src, dst, val in self.seeds:
            src, dst = tuple(src), tuple(dst)
            if not self.domain.has_key(src):
                raise InvariantViolation(f"seed source {src} is not a domain basis element")
            if not self.codomain.has_key(dst):
                raise InvariantViolation(f"seed target {dst} is not a codomain basis element")
            merged[(src, dst)] = self.field.add(merged.get((src, dst), self.field.zero),
                                                self.field(val))
        canon = tuple(sorted((s, d, v) for (s, d), v in merged.items() if v))
        object.__setattr__(self, "seeds", canon)
        for r in self.rules:
            self._check_rule(r)

    def _check_rule(self, r: TailRule):
        if not 1 <= r.branch <= self.domain.n:
            raise BranchOutOfRange(f"rule on branch {r.branch}")
        if r.kind is None:
            return
        dom = self.domain.branches[r.branch - 1].strands
        cod = self.codomain.branches[r.branch - 1].strands
        if not (0 <= r.domain_strand < len(dom) and 0 <= r.codomain_strand < len(cod)):
            raise InvariantViolation(f"rule on branch {r.branch} names a missing strand")
        ds, cs = dom[r.domain_strand], cod[r.codomain_strand]
        if r.start_level < ds.start or r.start_level < cs.start:
            raise InvariantViolation("rules start at or above both strands' tail start")
        if isinstance(r.kind, Band):
            if ds.tail != Const(r.kind.w) or cs.tail != Const(r.kind.w):
                raise InvariantViolation("band rules need constant tails of the band width")
            for b in r.kind.blocks:
                if b.field != self.field:
                    raise InvariantViolation("band block over a different field")
        elif isinstance(r.kind, Tri):
            if not isinstance(ds.tail, Affine) or ds.tail != cs.tail:
                raise InvariantViolation("tri rules need matching affine tails")
        else:
            raise InvariantViolation(f"unknown rule kind {r.kind!r}")

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def seed_bound(self) -> int:
        return max((max(s[1], d[1]) for s, d, _ in self.seeds), default=0)

    @property
    def d_max(self) -> int:
        return max([1] + [r.kind.D for r in self.rules if isinstance(r.kind, Band)])

    def control_modulus(self, m: int) -> int:
        """A level ``M`` with every domain element at level >= M mapping to levels >= m."""
        return m + self.d_max + self.seed_bound

    def image(self, key: tuple) -> dict:
        cache = self._cache
        if key in cache:
            return cache[key]
        F = self.field
        out: dict = {}

        def put(k, c):
            v = F.add(out.get(k, F.zero), c)
            if v:
                out[k] = v
            else:
                out.pop(k, None)

        i, m, s = key
        if i:
            spec = self.domain.branches[i - 1]
            k, local = spec.locate(m, s)
            cod = self.codomain.branches[i - 1]
            for r in self.rules:
                if r.branch != i or r.kind is None or r.domain_strand != k or m < r.start_level:
                    continue
                cs = cod.strands[r.codomain_strand]
                floor = max(1, cs.start)
                kind = r.kind
                if isinstance(kind, Band):
                    for d in range(-kind.D, kind.D + 1):
                        lvl = m + d
                        if lvl < floor:
                            continue
                        block = kind.blocks[d + kind.D]
                        base = cod.offset(r.codomain_strand, lvl)
                        for t in range(kind.w):
                            c = block[local, t]
                            if c:
                                put((i, lvl, base + t), c)
                else:
                    if kind.coeff_id:
                        put((i, m, cod.offset(r.codomain_strand, m) + local), F(kind.coeff_id))
                    if kind.coeff_up:
                        put((i, m + 1, cod.offset(r.codomain_strand, m + 1) + local),
                            F(kind.coeff_up))
                    if kind.coeff_down and m - 1 >= floor and local < cs.arity(m - 1):
                        put((i, m - 1, cod.offset(r.codomain_strand, m - 1) + local),
                            F(kind.coeff_down))
        for src, dst, val in self._seeds_from().get(key, ()):
            put(dst, val)
        cache[key] = out
        return out

    def _seeds_from(self) -> dict:
        table = self._cache.get("__seeds__")
        if table is None:
            table = {}
            for src, dst, val in self.seeds:
                table.setdefault(src, []).append((src, dst, val))
            self._cache["__seeds__"] = table
        return table


# combinators


def _shift_key(obj: ControlledObj, key: tuple) -> tuple:
    i, m, s = key
    if i == 0:
        return (0, 0, s + obj.root)
    return (i, m, s + obj.branches[i - 1].arity(m))


def _concat(a: ControlledObj, b: ControlledObj) -> ControlledObj:
    return ControlledObj(a.n, a.root + b.root, tuple(
        BranchSpec(x.strands + y.strands) for x, y in zip(a.branches, b.branches)))


def dsum(a: ControlledMap, b: ControlledMap) -> ControlledMap:
    """Direct sum of presentations; ``b``'s slots follow ``a``'s at every level."""
    if a.n != b.n:
        raise ShapeMismatch(f"branch counts {a.n} and {b.n}")
    if a.field != b.field:
        raise ShapeMismatch("fields differ")
    seeds = list(a.seeds) + [(_shift_key(a.domain, s), _shift_key(a.codomain, d), v)
                             for s, d, v in b.seeds]
    rules = list(a.rules)
    for r in b.rules:
        i = r.branch - 1
        rules.append(TailRule(r.branch, r.kind, r.start_level,
                              r.domain_strand + len(a.domain.branches[i].strands),
                              r.codomain_strand + len(a.codomain.branches[i].strands)))
    return ControlledMap(a.field, _concat(a.domain, b.domain), _concat(a.codomain, b.codomain),
                         tuple(seeds), tuple(rules))


def add_finite(a: ControlledMap, delta: Iterable) -> ControlledMap:
    """Add a finitely supported map given as ``(from_key, to_key, value)`` entries."""
    return ControlledMap(a.field, a.domain, a.codomain, tuple(a.seeds) + tuple(delta), a.rules)


@dataclass(frozen=True)
class DSum:
    pass


@dataclass(frozen=True)
class AddFinite:
    delta: tuple


def combine(op: Union[DSum, AddFinite], a: ControlledMap, b: Optional[ControlledMap] = None):
    if isinstance(op, DSum):
        if b is None:
            raise ShapeMismatch("direct sum needs two maps")
        return dsum(a, b)
    return add_finite(a, op.delta)


def f_star(i: int, map1: ControlledMap, n: int) -> ControlledMap:
    """Move the single branch of a one-branch map onto branch ``i`` of ``n``."""
    if map1.n != 1:
        raise BranchCountMismatch("f_star expects a one-branch map")
    if not 1 <= i <= n:
        raise BranchOutOfRange(f"branch {i} outside 1..{n}")

    def obj(o: ControlledObj) -> ControlledObj:
        branches = [BranchSpec() for _ in range(n)]
        branches[i - 1] = o.branches[0]
        return ControlledObj(n, o.root, tuple(branches))

    def key(k):
        return k if k[0] == 0 else (i, k[1], k[2])

    seeds = tuple((key(s), key(d), v) for s, d, v in map1.seeds)
    rules = tuple(TailRule(i, r.kind, r.start_level, r.domain_strand, r.codomain_strand)
                  for r in map1.rules)
    return ControlledMap(map1.field, obj(map1.domain), obj(map1.codomain), seeds, rules)


def zero_map(n: int, field: Field = QQ) -> ControlledMap:
    e = ControlledObj.empty(n)
    return ControlledMap(field, e, e)


# elementary modules


ELEMENTARY = ("A", "R", "B", "Binf", "C", "Cinf")


@dataclass(frozen=True)
class ElementaryName:
    name: str
    branch: int = 1

    def __post_init__(self):
        if self.name not in ELEMENTARY:
            raise Unsupported(f"{self.name!r} is not an elementary module")

    @classmethod
    def parse(cls, text: str) -> "ElementaryName":
        """``"B"`` or ``"B@2"`` (module on branch 2)."""
        name, _, branch = text.partition("@")
        return cls(name, int(branch) if branch else 1)


def _line(w: int) -> Strand:
    return Strand((), Const(w), 1)


def _band(F: Field, coeffs: dict) -> Band:
    D = max(abs(d) for d in coeffs)
    blocks = tuple(Mat.from_rows(F, [[coeffs.get(d, 0)]]) for d in range(-D, D + 1))
    return Band(1, D, blocks)


def _elementary1(name: str, F: Field) -> ControlledMap:
    empty = ControlledObj.empty(1)
    line = ControlledObj(1, 0, (BranchSpec((_line(1),)),))
    tri = ControlledObj(1, 0, (BranchSpec((Strand((), Affine(1, 0), 1),)),))
    if name == "A":
        return ControlledMap(F, empty, ControlledObj(1, 1, (BranchSpec(),)))
    if name == "R":
        return ControlledMap(F, empty, line)
    if name == "B":
        return ControlledMap(F, line, line, (), (TailRule(1, _band(F, {0: 1, 1: -1})),))
    if name == "C":
        return ControlledMap(F, line, line, (), (TailRule(1, _band(F, {0: 1, -1: -1})),))
    if name == "Binf":
        return ControlledMap(F, tri, tri, (), (TailRule(1, Tri(1, -1, 0)),))
    if name == "Cinf":
        return ControlledMap(F, tri, tri, (), (TailRule(1, Tri(1, 0, -1)),))
    raise Unsupported(name)


def elementary(name: Union[str, ElementaryName], n: int = 1, field: Field = QQ) -> ControlledMap:
    """Presentation of an elementary module, placed on its branch of ``n``."""
    if isinstance(name, str):
        name = ElementaryName.parse(name)
    if not 1 <= name.branch <= n:
        raise BranchOutOfRange(f"branch {name.branch} outside 1..{n}")
    m1 = _elementary1(name.name, field)
    return m1 if n == 1 else f_star(name.branch, m1, n)


def m_functor(v: NSubRep) -> ControlledMap:
    """Presentation of the controlled module attached to an n-subspace.

    Generators ``e(i,m,j)`` on branch ``i`` carry the basis of ``V_i``; the
    relations ``e(i,m,j) - e(i,m-1,j)`` identify them down the ray, and at
    level one with the root vector of the inclusion ``V_i -> V0``.
    """
    F = v.field
    branches = tuple(BranchSpec((_line(s.dim),)) for s in v.subspaces)
    relations = ControlledObj(v.n, 0, branches)
    generators = ControlledObj(v.n, v.dim0, branches)
    rules, seeds = [], []
    for i, s in enumerate(v.subspaces, start=1):
        w = s.dim
        if not w:
            continue
        ident = Mat.identity(F, w)
        neg = Mat(F, w, w, tuple(F.neg(x) for x in ident.entries))
        rules.append(TailRule(i, Band(w, 1, (neg, ident, Mat.zeros(F, w, w)))))
        for j, vec in enumerate(s.vectors()):
            for t, x in enumerate(vec):
                if x:
                    seeds.append(((i, 1, j), (0, 0, t), F.neg(x)))
    return ControlledMap(F, relations, generators, tuple(seeds), tuple(rules))


# truncation engine


@dataclass(frozen=True)
class Stabilized:
    at_level: int


@dataclass(frozen=True)
class LowerBound:
    value: int


@dataclass(frozen=True)
class DivergentBranches:
    branches: tuple


@dataclass(frozen=True)
class InvariantReport:
    value: object
    status: Union[Stabilized, LowerBound, DivergentBranches]
    trace: tuple = ()

    @property
    def conclusive(self) -> bool:
        return not isinstance(self.status, LowerBound)


def default_window(phi: ControlledMap) -> int:
    return 2 * (phi.d_max + 1) + phi.seed_bound


def _first_level(phi: ControlledMap) -> int:
    return phi.seed_bound + phi.d_max + 1


def _rank(F: Field, vectors: Iterable[dict]) -> int:
    ech = SparseEchelon(F)
    for v in vectors:
        if v:
            ech.add(v)
    return ech.rank


def _lambda_approx(phi: ControlledMap, m: int) -> tuple:
    """``dim A/(X_m + Im)`` and, per branch, the same with every other branch killed."""
    F = phi.field
    dom = phi.domain.keys(phi.control_modulus(m))
    images = [phi.image(b) for b in dom]
    low = [{k: x for k, x in img.items() if k[1] < m} for img in images]
    cod = phi.codomain
    total = cod.root + sum(cod.branches[i].arity(l) for i in range(cod.n) for l in range(1, m))
    q = total - _rank(F, low)
    per_branch = []
    for i in range(1, cod.n + 1):
        size = cod.root + sum(cod.branches[i - 1].arity(l) for l in range(1, m))
        vecs = ({k: x for k, x in v.items() if k[0] in (0, i)} for v in low)
        per_branch.append(size - _rank(F, vecs))
    return q, per_branch


def _strictly_increasing(xs: Sequence[int]) -> bool:
    return all(a < b for a, b in zip(xs, xs[1:]))


def lambda_report(phi: ControlledMap, window: int, max_level: int) -> InvariantReport:
    trace: list = []
    branch_traces: list = [[] for _ in range(phi.n)]
    for m in range(_first_level(phi), max_level + 1):
        q, qs = _lambda_approx(phi, m)
        trace.append(q)
        for t, x in zip(branch_traces, qs):
            t.append(x)
        if len(trace) >= window and len(set(trace[-window:])) == 1:
            return InvariantReport(Fin(q), Stabilized(m - window + 1), tuple(trace))
        if len(trace) > window:
            grow = tuple(i + 1 for i, t in enumerate(branch_traces)
                         if _strictly_increasing(t[-(window + 1):]))
            if grow:
                return InvariantReport(InfSet(grow), DivergentBranches(grow), tuple(trace))
    last = trace[-1] if trace else 0
    return InvariantReport(Fin(last), LowerBound(last), tuple(trace))


def _residual_kernel(F: Field, ech: SparseEchelon, keys: list) -> Subspace:
    """``{c : sum c_j e(keys_j) lies in the span held by ech}`` in key coordinates."""
    residues = [ech.reduce({k: F.one}) for k in keys]
    support = sorted({k for r in residues for k in r})
    if not support:
        return Subspace.full(F, len(keys))
    cols = {k: j for j, k in enumerate(support)}
    rows = []
    for r in residues:
        row = [F.zero] * len(support)
        for k, x in r.items():
            row[cols[k]] = x
        rows.append(row)
    return kernel_basis(Mat.from_rows(F, rows, len(support)).transpose())


def _window_spaces(phi: ControlledMap, i: int, m: int, depth: int) -> tuple:
    """Window keys ``Y`` on branch ``i`` and the subspaces ``P1``, ``P2`` of ``k^Y``.

    ``P1`` holds the window vectors lying in ``A^i_{m'} + Im`` and ``P2`` those
    in ``sum_{j != i} A^j_{m'} + Im``, both judged with the domain cut at
    ``depth``; ``m'`` sits past the window by more than the band width.
    """
    F = phi.field
    w = 2 * (phi.d_max + 1)
    push = m + w + phi.d_max + 1
    keys = phi.codomain.branch_keys(i, m, m + w - 1)
    images = [phi.image(b) for b in phi.domain.keys(depth)]
    own, other = SparseEchelon(F), SparseEchelon(F)
    for img in images:
        a = {k: x for k, x in img.items() if not (k[0] == i and k[1] >= push)}
        b = {k: x for k, x in img.items() if not (k[0] not in (0, i) and k[1] >= push)}
        if a:
            own.add(a)
        if b:
            other.add(b)
    return keys, _residual_kernel(F, own, keys), _residual_kernel(F, other, keys), images


def _mu_depth(phi: ControlledMap, m: int) -> int:
    w = 2 * (phi.d_max + 1)
    return m + 2 * w + 2 * phi.d_max + 1 + phi.seed_bound


def _mu_approx(phi: ControlledMap, i: int, m: int, depth: int) -> int:
    _, p1, p2, _ = _window_spaces(phi, i, m, depth)
    return p1.dim - meet_join(p1, p2)[1].dim


def _nu_approx(phi: ControlledMap, i: int, m: int, slack: int) -> int:
    """``dim U_{p',q}`` at ``q = control_modulus(m)`` with ``p'`` past the stable range."""
    F = phi.field
    w = 2 * (phi.d_max + 1)
    q = phi.control_modulus(m)
    p = q + w + phi.seed_bound
    depth = p + w + phi.d_max + slack
    everything = [phi.image(b) for b in phi.domain.keys(depth)]
    tail = [phi.image(b) for b in phi.domain.branch_keys(i, q, depth)]

    def cut(v):
        return {k: x for k, x in v.items() if not (k[0] == i and k[1] >= p)}

    def meet_dim(vs):
        return _rank(F, vs) - _rank(F, (cut(v) for v in vs))

    return meet_dim(everything) - meet_dim(tail)


def _branch_report(values, window: int, branch: int) -> InvariantReport:
    trace: list = []
    for m, pair in values:
        value, confirmed = pair
        trace.append(value)
        recent = trace[-window:]
        if len(trace) >= window and len(set(recent)) == 1 and confirmed:
            return InvariantReport(Fin(value), Stabilized(m - window + 1), tuple(trace))
        if len(trace) > window and _strictly_increasing(trace[-(window + 1):]):
            return InvariantReport(INF, DivergentBranches((branch,)), tuple(trace))
    last = trace[-1] if trace else 0
    return InvariantReport(Fin(last), LowerBound(last), tuple(trace))


def mu_report(phi: ControlledMap, i: int, window: int, max_level: int) -> InvariantReport:
    w = 2 * (phi.d_max + 1)

    def values():
        for m in range(_first_level(phi), max_level + 1):
            depth = _mu_depth(phi, m)
            a = _mu_approx(phi, i, m, depth)
            b = _mu_approx(phi, i, m, depth + w)
            yield m, (b, a == b)

    return _branch_report(values(), window, i)


def nu_report(phi: ControlledMap, i: int, window: int, max_level: int) -> InvariantReport:
    w = 2 * (phi.d_max + 1)

    def values():
        for m in range(_first_level(phi), max_level + 1):
            a = _nu_approx(phi, i, m, 0)
            b = _nu_approx(phi, i, m, w)
            yield m, (b, a == b)

    return _branch_report(values(), window, i)


@dataclass(frozen=True)
class Invariants:
    lam: InvariantReport
    mu: tuple
    nu: tuple

    def reports(self) -> list:
        return [self.lam, *self.mu, *self.nu]

    @property
    def conclusive(self) -> bool:
        return all(r.conclusive for r in self.reports())


def invariants(phi: ControlledMap, window: Optional[int] = None, max_level: int = 64,
               strict: bool = True) -> Invariants:
    """Reports for lambda, mu^i and nu^i.

    A LowerBound anywhere raises BudgetExceeded carrying the reports unless
    ``strict`` is off, in which case the reports are returned as they stand.
    """
    window = window or default_window(phi)
    if window < 1:
        raise ValueError("window must be at least 1")
    out = Invariants(
        lambda_report(phi, window, max_level),
        tuple(mu_report(phi, i, window, max_level) for i in range(1, phi.n + 1)),
        tuple(nu_report(phi, i, window, max_level) for i in range(1, phi.n + 1)),
    )
    if strict and not out.conclusive:
        raise BudgetExceeded(f"no stabilization up to level {max_level}", out)
    return out


def _s_approx(phi: ControlledMap, m: int, depth: int) -> NSubRep:
    F = phi.field
    reps: list = []
    exact = None
    for i in range(1, phi.n + 1):
        keys, p1, p2, images = _window_spaces(phi, i, m, depth)
        if exact is None:
            exact = SparseEchelon(F)
            for img in images:
                if img:
                    exact.add(img)
        both = meet_join(p1, p2)[1]
        for c in both.vectors():
            vec = {k: x for k, x in zip(keys, c) if x}
            reps.append((i, exact.reduce(vec)))
    if exact is None:
        return NSubRep.zero(F, phi.n)
    support = sorted({k for _, r in reps for k in r})
    cols = {k: j for j, k in enumerate(support)}

    def dense(r):
        row = [F.zero] * len(support)
        for k, x in r.items():
            row[cols[k]] = x
        return row

    total = Subspace.span(F, len(support), (dense(r) for _, r in reps))
    subs = []
    for i in range(1, phi.n + 1):
        coords = [total.coordinates(dense(r)) for j, r in reps if j == i]
        subs.append(Subspace.span(F, total.dim, coords))
    return NSubRep(F, phi.n, total.dim, tuple(subs))


def s_functor(phi: ControlledMap, max_level: int = 64, window: Optional[int] = None) -> NSubRep:
    """The rigid n-subspace attached to the cokernel of ``phi``.

    ``W_i`` is represented by window vectors of branch ``i`` that lie both in
    deep branch-``i`` tails and in the other branches' tails modulo the image;
    all of them are reduced into one quotient by the exact image.
    """
    from .quiver import is_rigid

    window = window or default_window(phi)
    dims: list = []
    for m in range(_first_level(phi), max_level + 1):
        depth = _mu_depth(phi, m)
        rep = _s_approx(phi, m, depth)
        dims.append((rep.dim_vector, is_rigid(rep)))
        recent = dims[-window:]
        if len(dims) >= window and len(set(recent)) == 1 and recent[0][1]:
            return rep
    raise BudgetExceeded(f"S-functor did not stabilize up to level {max_level}", dims)


def classify(phi: ControlledMap, window: Optional[int] = None, max_level: int = 64,
             seed: int = 0) -> IsoClass:
    inv = invariants(phi, window, max_level, strict=False)
    if not inv.conclusive:
        raise Unclassified("some invariant did not stabilize", inv)
    try:
        rigid = decompose(s_functor(phi, max_level, window), seed).summands
    except BudgetExceeded as exc:
        raise Unclassified(str(exc), inv) from exc
    return IsoClass(phi.n, inv.lam.value, tuple(r.value for r in inv.mu),
                    tuple(r.value for r in inv.nu), rigid)


def iso_test_ctrl(a: ControlledMap, b: ControlledMap, window: Optional[int] = None,
                  max_level: int = 64, seed: int = 0) -> bool:
    if a.n != b.n:
        raise BranchCountMismatch(f"{a.n} vs {b.n}")
    return class_eq(classify(a, window, max_level, seed), classify(b, window, max_level, seed))


# lattice expressions on truncations


@dataclass(frozen=True)
class FullA:
    pass


@dataclass(frozen=True)
class BranchTail:
    branch: int
    level: int


@dataclass(frozen=True)
class ImPhi:
    pass


@dataclass(frozen=True)
class ImPhiTail:
    branch: int
    level: int


@dataclass(frozen=True)
class Sum:
    left: object
    right: object


@dataclass(frozen=True)
class Meet:
    left: object
    right: object


@dataclass(frozen=True)
class QuotientDim:
    num: object
    den: object


def _levels(expr) -> list:
    if isinstance(expr, (BranchTail, ImPhiTail)):
        return [expr.level]
    if isinstance(expr, (Sum, Meet)):
        return _levels(expr.left) + _levels(expr.right)
    if isinstance(expr, QuotientDim):
        return _levels(expr.num) + _levels(expr.den)
    return []


def truncated_dim(phi: ControlledMap, expr, L: int) -> int:
    """Dimension of a lattice expression inside the codomain cut at level ``L``.

    Images are projected onto the truncation and the domain is cut at
    ``control_modulus(L)``.  A ``QuotientDim(a, b)`` evaluates
    ``dim a - dim (a meet b)``; any other expression evaluates to its dimension.
    """
    need = max(_levels(expr), default=0) + phi.d_max + phi.seed_bound
    if L < need:
        raise LevelTooSmall(f"level {L} below the required {need}")
    F = phi.field
    keys = phi.codomain.keys(L)
    index = {k: j for j, k in enumerate(keys)}
    size = len(keys)
    top = phi.control_modulus(L)

    def unit(k):
        row = [F.zero] * size
        row[index[k]] = F.one
        return row

    def project(img):
        row = [F.zero] * size
        for k, x in img.items():
            if k in index:
                row[index[k]] = x
        return row

    def ev(e) -> Subspace:
        if isinstance(e, FullA):
            return Subspace.full(F, size)
        if isinstance(e, BranchTail):
            return Subspace.span(F, size, (unit(k) for k in keys
                                           if k[0] == e.branch and k[1] >= e.level))
        if isinstance(e, ImPhi):
            return Subspace.span(F, size, (project(phi.image(b)) for b in phi.domain.keys(top)))
        if isinstance(e, ImPhiTail):
            return Subspace.span(F, size, (project(phi.image(b))
                                           for b in phi.domain.branch_keys(e.branch, e.level, top)))
        if isinstance(e, Sum):
            return meet_join(ev(e.left), ev(e.right))[0]
        if isinstance(e, Meet):
            return meet_join(ev(e.left), ev(e.right))[1]
        raise TypeError(f"not a subspace expression: {e!r}")

    if isinstance(expr, QuotientDim):
        num = ev(expr.num)
        return num.dim - meet_join(num, ev(expr.den))[1].dim
    return ev(expr).dim


# ideals of RCFM(k) on finitely supported matrices


IDEALS = ("AR", "IA_R", "IAt_R", "IBt_R", "R_IA", "R_IAt", "R_IB")


def ideal_membership(m: dict, ideal: str) -> bool:
    """Membership of a finitely supported matrix ``{(i, j): value}`` in an ideal.

    Conditions that only need to hold for almost all rows or columns are
    automatic for finite support.
    """
    entries = {k: v for k, v in m.items() if v}
    if ideal == "AR":
        return not any(i == 0 for i, _ in entries)
    if ideal == "IA_R":
        return _all_sums_vanish(entries, axis=1)
    if ideal == "R_IAt":
        return _all_sums_vanish(entries, axis=0)
    if ideal in ("IAt_R", "IBt_R", "R_IA", "R_IB"):
        return True
    raise Unsupported(f"unknown ideal {ideal!r}")


def _all_sums_vanish(entries: dict, axis: int) -> bool:
    sums: dict = {}
    for key, v in entries.items():
        sums[key[axis]] = sums.get(key[axis], 0) + v
    return not any(sums.values())


def tri_index(k: int) -> int:
    return k * (k + 1) // 2


def b_shift(j: int) -> int:
    """Row of the single 1 in column ``j`` of the staircase matrix B."""
    k = 0
    while tri_index(k + 1) <= j:
        k += 1
    return tri_index(k + 1) + (j - tri_index(k))


def b_unshift(r: int) -> Optional[int]:
    """Column of the single 1 in row ``r`` of B, or None for an empty row."""
    k = 0
    while tri_index(k + 1) <= r:
        k += 1
    pos = r - tri_index(k)
    return tri_index(k - 1) + pos if k >= 1 and pos < k else None


def matrix_row(name: str, r: int) -> dict:
    """Row ``r`` of ``A``, ``I-A``, ``I-A^t``, ``I-B`` or ``I-B^t`` as ``{col: value}``."""
    if name == "A":
        return {r - 1: 1} if r >= 1 else {}
    if name == "I-A":
        return {r: 1, r - 1: -1} if r >= 1 else {r: 1}
    if name == "I-At":
        return {r: 1, r + 1: -1}
    if name == "I-B":
        c = b_unshift(r)
        return {r: 1, c: -1} if c is not None else {r: 1}
    if name == "I-Bt":
        return {r: 1, b_shift(r): -1}
    raise Unsupported(name)


def matrix_col(name: str, c: int) -> dict:
    """Column ``c`` of the same matrices as ``{row: value}``."""
    if name == "A":
        return {c + 1: 1}
    if name == "I-A":
        return {c: 1, c + 1: -1}
    if name == "I-At":
        return {c: 1, c - 1: -1} if c >= 1 else {c: 1}
    if name == "I-B":
        return {c: 1, b_shift(c): -1}
    if name == "I-Bt":
        r = b_unshift(c)
        return {c: 1, r: -1} if r is not None else {c: 1}
    raise Unsupported(name)


# Ext^1 between elementary RCFM(k)-modules


# module R/YR for each elementary name; A uses Y = A, R uses Y = 0
_DEFINING = {"A": "A", "B": "I-A", "C": "I-At", "Binf": "I-B", "Cinf": "I-Bt", "R": None}


def ext_elementary(left: str, right: str):
    """dim Ext^1(left, right) for elementary modules over RCFM(k)."""
    for x in (left, right):
        if x not in ELEMENTARY:
            raise Unsupported(f"{x!r} is not an elementary module")
    if left in ("A", "R"):
        return Fin(0)
    if right == "R":
        return CONTINUUM
    if (left, right) == ("C", "A"):
        return Fin(1)
    if (left, right) == ("Cinf", "A"):
        return ALEPH0
    return Fin(0)


def window_quotient_dim(left: str, right: str, L: int, slack: int = 2) -> int:
    """``dim W_L / (W_L meet G)`` for the quotient ``R/(R Y + Z R)``.

    ``W_L`` holds matrices supported in ``[0, L)^2`` and ``G`` is spanned by
    ``E_ij Y`` and ``Z E_ij`` for ``i, j < L + slack``.  This bounds from above
    the image of the window in the quotient.
    """
    y, z = _DEFINING[left], _DEFINING[right]
    cut = L + slack
    gens = []
    for i in range(cut):
        for j in range(cut):
            if y is not None:
                gens.append({(i, c): v for c, v in matrix_row(y, j).items()})
            if z is not None:
                gens.append({(r, j): v for r, v in matrix_col(z, i).items()})
    F = QQ
    inside = _rank(F, ({k: F(v) for k, v in g.items()} for g in gens))
    outside = _rank(F, ({k: F(v) for k, v in g.items() if not (k[0] < L and k[1] < L)}
                        for g in gens))
    return L * L - (inside - outside)


def periodic_diagonal_rank(left: str, L: int) -> int:
    """Independent classes of ``L``-periodic diagonal matrices in ``R/R Y``.

    The closed-form description of ``R Y`` for ``Y`` in ``I-A``, ``I-A^t`` and
    ``I-B`` turns membership of ``sum_t c_t P_t`` into linear conditions on
    ``c``; they are sampled over a full period of tail rows.
    """
    y = _DEFINING[left]
    conditions: list = []
    if y == "I-A":
        # for every j, sum_{n >= j} r_in = 0 for almost all i
        for i in range(L, 3 * L):
            conditions.append(i % L)
    elif y == "I-At":
        # every row sum vanishes
        for i in range(2 * L):
            conditions.append(i % L)
    elif y == "I-B":
        # for m and j <= m, sum_{n >= m} r_{i, j + T(n)} = 0 for almost all i
        for mm in range(L):
            for j in range(mm + 1):
                for n in range(mm + 2 * L, mm + 4 * L):
                    conditions.append((j + tri_index(n)) % L)
    else:
        raise Unsupported(f"no periodic witness for {left}")
    F = QQ
    rows = [[F.one if t == r else F.zero for t in range(L)] for r in conditions]
    free = kernel_basis(Mat.from_rows(F, rows, L)).dim if rows else L
    return L - free


@dataclass(frozen=True)
class ExtWitness:
    kind: str
    levels: tuple
    values: tuple


def ext_witness(left: str, right: str, levels: Sequence[int]) -> Optional[ExtWitness]:
    """Truncation evidence for a catalog entry, where one is available."""
    if (left, right) in (("C", "A"), ("Cinf", "A")):
        return ExtWitness("window", tuple(levels),
                          tuple(window_quotient_dim(left, right, L) for L in levels))
    if right == "R" and left in ("B", "C", "Binf"):
        return ExtWitness("periodic", tuple(levels),
                          tuple(periodic_diagonal_rank(left, L) for L in levels))
    return None


__all__ = [
    "Const", "Affine", "Strand", "BranchSpec", "ControlledObj", "Band", "Tri", "TailRule",
    "ControlledMap", "DSum", "AddFinite", "combine", "dsum", "add_finite", "f_star",
    "zero_map", "ElementaryName", "ELEMENTARY", "elementary", "m_functor",
    "Stabilized", "LowerBound", "DivergentBranches", "InvariantReport", "Invariants",
    "invariants", "lambda_report", "mu_report", "nu_report", "default_window",
    "s_functor", "classify", "iso_test_ctrl",
    "FullA", "BranchTail", "ImPhi", "ImPhiTail", "Sum", "Meet", "QuotientDim", "truncated_dim",
    "IDEALS", "ideal_membership", "matrix_row", "matrix_col", "b_shift", "b_unshift",
    "ext_elementary", "ext_witness", "ExtWitness", "window_quotient_dim",
    "periodic_diagonal_rank",
]
