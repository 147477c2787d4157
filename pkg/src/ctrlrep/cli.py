"""Command-line front end.

Every verb prints one report (JSON by default, keys sorted) and exits with
0 on success, 2 when an invariant did not settle within budget and 1 on bad
input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import controlled as ctl
from . import isomonoid as iso
from . import quiver as qv
from .errors import ArtifactError, BudgetExceeded, ParseError, Unclassified
from .linal import Field, Mat

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


# parsing


def parse_field(tag: str) -> Field:
    try:
        return Field.from_tag(tag)
    except ValueError as exc:
        raise ParseError(f"field: {exc}") from exc


def _load(source: str):
    """JSON from a path, or from the argument itself when it starts with ``{``."""
    text = source if source.lstrip().startswith(("{", "[")) else None
    if text is None:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ParseError(f"{source}: {exc.strerror}") from exc
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _need(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    return obj[key]


def _scalar(F: Field, x, where: str):
    try:
        return F(x)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ParseError(f"{where}: bad scalar {x!r}") from exc


def parse_rep(data: dict, default_field: Field | None = None) -> qv.NSubRep:
    """``{"field", "n", "dim0", "subspaces": [[row, ...], ...]}``; rows span each V_i."""
    F = parse_field(data["field"]) if "field" in data else default_field
    if F is None:
        raise ParseError("rep: missing field 'field'")
    n = _need(data, "n", "rep")
    dim0 = _need(data, "dim0", "rep")
    subs = _need(data, "subspaces", "rep")
    if not isinstance(subs, list) or len(subs) != n:
        raise ParseError(f"rep: expected {n} subspaces")
    spans = []
    for i, rows in enumerate(subs, start=1):
        span = []
        for r, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != dim0:
                raise ParseError(f"rep: subspaces[{i}] row {r} needs {dim0} entries")
            span.append([_scalar(F, x, f"rep: subspaces[{i}]") for x in row])
        spans.append(span)
    return qv.NSubRep.from_vectors(F, dim0, spans)


def rep_to_json(v: qv.NSubRep) -> dict:
    F = v.field
    return {
        "field": F.tag,
        "n": v.n,
        "dim0": v.dim0,
        "subspaces": [[[F.to_str(x) for x in row] for row in s.vectors()] for s in v.subspaces],
    }


def _profile(data: dict, where: str):
    kind = _need(data, "kind", where)
    if kind == "const":
        return ctl.Const(int(_need(data, "w", where)))
    if kind == "affine":
        return ctl.Affine(int(_need(data, "slope", where)), int(_need(data, "offset", where)))
    raise ParseError(f"{where}: unknown tail kind {kind!r}")


def _strand(data: dict, where: str) -> ctl.Strand:
    return ctl.Strand(tuple(int(a) for a in data.get("seed_arities", [])),
                      _profile(_need(data, "tail", where), f"{where}.tail"),
                      int(data.get("start", 1)))


def _branch(data: dict, where: str) -> ctl.BranchSpec:
    # a branch is either one strand or {"strands": [...]}
    if "strands" in data:
        return ctl.BranchSpec(tuple(_strand(s, f"{where}.strands[{k}]")
                                    for k, s in enumerate(data["strands"])))
    return ctl.BranchSpec((_strand(data, where),))


def _obj(data: dict, n: int, where: str) -> ctl.ControlledObj:
    branches = data.get("branches", [{"strands": []}] * n)
    if len(branches) != n:
        raise ParseError(f"{where}: expected {n} branches, got {len(branches)}")
    return ctl.ControlledObj(n, int(data.get("root", 0)), tuple(
        _branch(b, f"{where}.branches[{i}]") for i, b in enumerate(branches, start=1)))


def _key(k, where: str) -> tuple:
    if isinstance(k, list) and len(k) == 2 and k[0] == "root":
        return (0, 0, int(k[1]))
    if isinstance(k, list) and len(k) == 3 and all(isinstance(x, int) for x in k):
        return tuple(k)
    raise ParseError(f"{where}: key must be [\"root\", slot] or [branch, level, slot]")


def _rule(F: Field, data: dict, where: str) -> ctl.TailRule:
    kind = _need(data, "kind", where)
    common = dict(
        branch=int(_need(data, "branch", where)),
        start_level=int(data.get("start_level", 1)),
        domain_strand=int(data.get("domain_strand", 0)),
        codomain_strand=int(data.get("codomain_strand", 0)),
    )
    if kind == "zero":
        return ctl.TailRule(kind=None, **common)
    if kind == "band":
        w, D = int(_need(data, "w", where)), int(_need(data, "D", where))
        blocks = []
        for b in _need(data, "blocks", where):
            rows = [[_scalar(F, x, where) for x in row] for row in b]
            cols = len(rows[0]) if rows else w
            if any(len(r) != cols for r in rows):
                raise ParseError(f"{where}: ragged band block")
            blocks.append(Mat.from_rows(F, rows, cols))
        return ctl.TailRule(kind=ctl.Band(w, D, tuple(blocks)), **common)
    if kind == "tri":
        return ctl.TailRule(kind=ctl.Tri(*(_scalar(F, data.get(c, 0), where)
                                           for c in ("id", "up", "down"))), **common)
    raise ParseError(f"{where}: unknown rule kind {kind!r}")


def parse_map(data: dict, default_field: Field | None = None) -> ctl.ControlledMap:
    F = parse_field(data["field"]) if "field" in data else default_field
    if F is None:
        raise ParseError("map: missing field 'field'")
    n = int(_need(data, "n", "map"))
    seeds = tuple((_key(_need(e, "from", "seed"), "seed.from"), _key(_need(e, "to", "seed"), "seed.to"),
                   _scalar(F, _need(e, "val", "seed"), "seed.val"))
                  for e in data.get("seed_entries", []))
    rules = tuple(_rule(F, r, f"tail_rules[{k}]") for k, r in enumerate(data.get("tail_rules", [])))
    return ctl.ControlledMap(F, _obj(_need(data, "domain", "map"), n, "domain"),
                             _obj(_need(data, "codomain", "map"), n, "codomain"), seeds, rules)


def _profile_json(p) -> dict:
    if isinstance(p, ctl.Const):
        return {"kind": "const", "w": p.w}
    return {"kind": "affine", "slope": p.slope, "offset": p.offset}


def _obj_json(o: ctl.ControlledObj) -> dict:
    return {"root": o.root, "branches": [
        {"strands": [{"seed_arities": list(s.seed_arities), "tail": _profile_json(s.tail),
                      "start": s.start} for s in b.strands]} for b in o.branches]}


def _key_json(k: tuple) -> list:
    return ["root", k[2]] if k[0] == 0 else list(k)


def map_to_json(phi: ctl.ControlledMap) -> dict:
    F = phi.field
    rules = []
    for r in phi.rules:
        entry = {"branch": r.branch, "start_level": r.start_level,
                 "domain_strand": r.domain_strand, "codomain_strand": r.codomain_strand}
        if r.kind is None:
            entry["kind"] = "zero"
        elif isinstance(r.kind, ctl.Band):
            entry.update(kind="band", w=r.kind.w, D=r.kind.D,
                         blocks=[[[F.to_str(x) for x in row] for row in b.to_rows()]
                                 for b in r.kind.blocks])
        else:
            entry.update(kind="tri", id=F.to_str(F(r.kind.coeff_id)),
                         up=F.to_str(F(r.kind.coeff_up)), down=F.to_str(F(r.kind.coeff_down)))
        rules.append(entry)
    return {
        "field": F.tag,
        "n": phi.n,
        "domain": _obj_json(phi.domain),
        "codomain": _obj_json(phi.codomain),
        "seed_entries": [{"from": _key_json(s), "to": _key_json(d), "val": F.to_str(v)}
                         for s, d, v in phi.seeds],
        "tail_rules": rules,
    }


def parse_matrix(data) -> dict:
    """``{"entries": [[i, j, "v"], ...]}`` or the bare entry list, over the rationals."""
    entries = data.get("entries") if isinstance(data, dict) else data
    if not isinstance(entries, list):
        raise ParseError("matrix: expected a list of [row, col, value] entries")
    out: dict = {}
    for e in entries:
        if not (isinstance(e, list) and len(e) == 3 and isinstance(e[0], int)
                and isinstance(e[1], int) and e[0] >= 0 and e[1] >= 0):
            raise ParseError(f"matrix: bad entry {e!r}")
        try:
            out[(e[0], e[1])] = out.get((e[0], e[1]), 0) + Fraction(str(e[2]))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"matrix: bad value {e[2]!r}") from exc
    return out


def parse_input(source: str, kind: str, default_field: Field | None = None):
    """Load ``source`` as a ``rep``, ``map`` or ``matrix``."""
    data, _ = _load(source)
    # accept a report emitted by this tool, e.g. from ``elementary`` or ``quiver-rigidify``
    if isinstance(data, dict) and isinstance(data.get("result"), dict):
        inner = data["result"]
        data = inner.get("map", inner.get("rigid", data))
    if kind == "rep":
        return parse_rep(data, default_field)
    if kind == "map":
        return parse_map(data, default_field)
    if kind == "matrix":
        return parse_matrix(data)
    raise ValueError(kind)


# reports


def _report_json(r: ctl.InvariantReport) -> dict:
    st = r.status
    if isinstance(st, ctl.Stabilized):
        status = {"kind": "Stabilized", "at_level": st.at_level}
    elif isinstance(st, ctl.LowerBound):
        status = {"kind": "LowerBound", "value": st.value}
    else:
        status = {"kind": "DivergentBranches", "branches": list(st.branches)}
    return {"value": iso.to_json(r.value), "status": status, "trace": list(r.trace)}


def _invariants_json(inv: ctl.Invariants) -> dict:
    return {"lambda": _report_json(inv.lam),
            "mu": [_report_json(r) for r in inv.mu],
            "nu": [_report_json(r) for r in inv.nu]}


def _summands_json(summands) -> list:
    return [{"id": c.label(), "mult": m} for c, m in summands]


def _digest(sources) -> str:
    h = hashlib.sha256()
    for s in sources:
        h.update(_load(s)[1].encode())
    return h.hexdigest()[:16]


def _text(payload, indent: str = "") -> str:
    lines = []
    if isinstance(payload, dict):
        for k in sorted(payload):
            v = payload[k]
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{indent}{k}:")
                lines.append(_text(v, indent + "  "))
            else:
                lines.append(f"{indent}{k}: {_inline(v)}")
    elif isinstance(payload, list):
        for v in payload:
            if isinstance(v, (dict, list)) and not _flat(v):
                lines.append(f"{indent}-")
                lines.append(_text(v, indent + "  "))
            else:
                lines.append(f"{indent}- {_inline(v)}")
    else:
        lines.append(indent + _inline(payload))
    return "\n".join(lines)


def _flat(v) -> bool:
    items = v.values() if isinstance(v, dict) else v
    return all(not isinstance(x, (dict, list)) for x in items)


def _inline(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return "(" + ", ".join(_inline(x) for x in v) + ")"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_inline(v[k])}" for k in sorted(v)) + "}"
    return str(v)


# verbs


def _cmd_quiver_decompose(args) -> dict:
    v = parse_input(args.rep, "rep", args.field)
    res = qv.decompose(v, args.seed)
    return {"dim_vector": list(v.dim_vector.as_tuple()), "summands": _summands_json(res.summands)}


def _cmd_quiver_rigidify(args) -> dict:
    v = parse_input(args.rep, "rep", args.field)
    r = qv.rigidify(v)
    return {"rigid": rep_to_json(r.rig),
            "complement_dims": [c.subspaces[0].dim for c in r.complements],
            "witness": [[v.field.to_str(x) for x in row] for row in r.witness.to_rows()]}


def _cmd_quiver_ext(args) -> dict:
    a = parse_input(args.left, "rep", args.field)
    b = parse_input(args.right, "rep", args.field)
    return {"ext1": qv.ext1_dim(a, b), "hom": len(qv.hom_basis(a, b)),
            "euler": qv.euler_form(a.dim_vector, b.dim_vector)}


def _cmd_invariants(args) -> dict:
    phi = parse_input(args.map, "map", args.field)
    inv = ctl.invariants(phi, args.window, args.max_level, strict=False)
    out = _invariants_json(inv)
    if not inv.conclusive:
        raise _Budget(out)
    return out


def _cmd_classify(args) -> dict:
    phi = parse_input(args.map, "map", args.field)
    try:
        c = ctl.classify(phi, args.window, args.max_level, args.seed)
    except Unclassified as exc:
        raise _Budget({"error": str(exc), "reports": _invariants_json(exc.reports)}) from exc
    return {"class": iso.to_json(c)}


def _cmd_iso(args) -> dict:
    a = parse_input(args.left, "map", args.field)
    b = parse_input(args.right, "map", args.field)
    try:
        same = ctl.iso_test_ctrl(a, b, args.window, args.max_level, args.seed)
    except Unclassified as exc:
        raise _Budget({"error": str(exc), "reports": _invariants_json(exc.reports)}) from exc
    return {"iso": same}


def _cmd_catalog(args) -> dict:
    return {"n": args.n, "entries": [{"id": c.label(), "rep": rep_to_json(qv.catalog_rep(c, args.field))}
                                     for c, _ in qv.catalog_list(args.n, args.field)]}


def _cmd_presentation(args) -> dict:
    return {"presentation": iso.to_json(iso.presentation(args.n))}


def _cmd_rep_type(args) -> dict:
    card = iso.INF if args.card in ("inf", "infinite") else iso.Fin(_int(args.card, "card"))
    return {"card": iso.to_json(card), "type": iso.to_json(iso.rep_type(card))}


def _cmd_ideal_member(args) -> dict:
    m = parse_input(args.matrix, "matrix")
    return {"ideal": args.ideal, "member": ctl.ideal_membership(m, args.ideal)}


def _cmd_ext_elementary(args) -> dict:
    out = {"left": args.left, "right": args.right,
           "ext1": iso.to_json(ctl.ext_elementary(args.left, args.right))}
    if args.witness:
        levels = list(range(args.witness_from, args.witness_from + args.witness))
        w = ctl.ext_witness(args.left, args.right, levels)
        out["witness"] = None if w is None else {
            "kind": w.kind, "levels": list(w.levels), "values": list(w.values)}
    return out


def _cmd_elementary(args) -> dict:
    return {"map": map_to_json(ctl.elementary(args.name, args.n, args.field))}


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ParseError(f"{what}: expected an integer, got {text!r}") from exc


class _Budget(Exception):
    def __init__(self, payload):
        super().__init__("budget")
        self.payload = payload


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default="Q", help="Q or Fp:<prime>; used when inputs omit it")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-level", type=int, default=64)
    common.add_argument("--window", type=int, default=None)
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="ctrlrep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(fn=fn)
        return p

    verb("quiver-decompose", _cmd_quiver_decompose, "indecomposable summands of a rep").add_argument("rep")
    verb("quiver-rigidify", _cmd_quiver_rigidify, "rigid core and witness").add_argument("rep")
    p = verb("quiver-ext", _cmd_quiver_ext, "dim Ext^1 between two reps")
    p.add_argument("left")
    p.add_argument("right")
    verb("classify", _cmd_classify, "isomorphism class of a presented module").add_argument("map")
    p = verb("iso", _cmd_iso, "isomorphism test between two presented modules")
    p.add_argument("left")
    p.add_argument("right")
    verb("invariants", _cmd_invariants, "lambda, mu and nu with stabilization reports").add_argument("map")
    verb("catalog", _cmd_catalog, "rigid indecomposables for n <= 3").add_argument("--n", type=int, required=True)
    verb("presentation", _cmd_presentation, "generators and relations of Iso").add_argument(
        "--n", type=int, required=True)
    verb("rep-type", _cmd_rep_type, "representation type for an end count").add_argument(
        "--card", required=True, help="positive integer or 'inf'")
    p = verb("ideal-member", _cmd_ideal_member, "membership in a one-sided ideal")
    p.add_argument("matrix")
    p.add_argument("--ideal", required=True, choices=ctl.IDEALS)
    p = verb("ext-elementary", _cmd_ext_elementary, "Ext^1 between elementary modules")
    p.add_argument("left", choices=ctl.ELEMENTARY)
    p.add_argument("right", choices=ctl.ELEMENTARY)
    p.add_argument("--witness", type=int, default=0, metavar="LEVELS",
                   help="attach a truncation witness over this many levels")
    p.add_argument("--witness-from", type=int, default=2)
    p = verb("elementary", _cmd_elementary, "emit the presentation of an elementary module")
    p.add_argument("name", help="A, R, B, Binf, C or Cinf, optionally @branch")
    p.add_argument("--n", type=int, default=1)
    return parser


def _emit(payload: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        out.write(_text(payload) + "\n")


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    report = {"verb": args.verb}
    inputs = [getattr(args, k) for k in ("rep", "map", "left", "right", "matrix")
              if isinstance(getattr(args, k, None), str) and args.verb not in ("ext-elementary",)]
    try:
        args.field = parse_field(args.field)
        if inputs:
            report["inputs_digest"] = _digest(inputs)
        report["result"] = args.fn(args)
        code = EXIT_OK
    except _Budget as exc:
        report["result"] = exc.payload
        code = EXIT_BUDGET
    except BudgetExceeded as exc:
        report["result"] = {"error": str(exc)}
        code = EXIT_BUDGET
    except (ArtifactError, ValueError) as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        code = EXIT_INPUT
    report["exit_code"] = code
    _emit(report, args.format, out)
    if code == EXIT_INPUT:
        err.write(report["error"] + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
