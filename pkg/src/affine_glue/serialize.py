"""JSON wire formats for instances and embeddings.

Rationals travel as ``"p/q"`` strings (integers are accepted as shorthand on
input) and are written back in lowest terms.  Output is deterministic: keys
are sorted and arrays keep the order of the in-memory objects.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .embedder import AffinizationResult, Certificate
from .errors import AffineGlueError, ParseError
from .exact import PLFunction, PLPath, scalar
from .mapping import Block, MapPiece, PLMapping
from .space import AFFINE, GLUE, NONE, Arc, EndSpec, PointEntry, SpaceDescription
from .unbounded import ExtendedSpace, UnboundedArc


class NonCanonicalRational(UserWarning):
    """A rational literal was accepted but not written in lowest terms."""


# --------------------------------------------------------------------------
# low-level readers


def _loads(data) -> object:
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8 ({exc.reason} at byte {exc.start})") from None

    def pairs(items):
        out = {}
        for k, v in items:
            if k in out:
                raise ParseError(f"duplicate key {k!r}")
            out[k] = v
        return out

    try:
        return json.loads(data, object_pairs_hook=pairs)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{exc.msg} (line {exc.lineno}, column {exc.colno})") from None


def _obj(x, path, required=(), optional=()) -> dict:
    if not isinstance(x, dict):
        raise ParseError("expected an object", path)
    for k in x:
        if k not in required and k not in optional:
            raise ParseError(f"unknown key {k!r}", path)
    for k in required:
        if k not in x:
            raise ParseError(f"missing key {k!r}", path)
    return x


def _list(x, path) -> list:
    if not isinstance(x, list):
        raise ParseError("expected an array", path)
    return x


def _str(x, path) -> str:
    if not isinstance(x, str):
        raise ParseError("expected a string", path)
    return x


def _bool(x, path) -> bool:
    if not isinstance(x, bool):
        raise ParseError("expected true or false", path)
    return x


def _int(x, path) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError("expected an integer", path)
    return x


def _rat(x, path) -> Fraction:
    if isinstance(x, float):
        raise ParseError(f"floating-point number {x!r}; write rationals as \"p/q\" strings", path)
    try:
        value = scalar(x)
    except (TypeError, ValueError):
        raise ParseError(f"not an exact rational: {x!r}", path) from None
    if isinstance(x, str) and x != str(value):
        warnings.warn(f"{path}: {x!r} normalized to \"{value}\"", NonCanonicalRational, stacklevel=2)
    return value


def _vec(x, path) -> tuple:
    return tuple(_rat(c, f"{path}[{j}]") for j, c in enumerate(_list(x, path)))


def _vecs(x, path) -> list:
    return [_vec(v, f"{path}[{j}]") for j, v in enumerate(_list(x, path))]


def _path(vertices, params, path, left_open, right_open) -> PLPath:
    try:
        if params is None:
            return PLPath.through(vertices, left_open=left_open, right_open=right_open)
        return PLPath(tuple(params), tuple(vertices), left_open, right_open)
    except AffineGlueError as exc:
        raise ParseError(str(exc), path) from None


# --------------------------------------------------------------------------
# instances


def _end(x, path) -> EndSpec:
    d = _obj(x, path, ("limit", "tau"), ("member",))
    limit = _str(d["limit"], f"{path}.limit")
    member = _bool(d["member"], f"{path}.member") if "member" in d else None
    tau = d["tau"]
    if isinstance(tau, dict):
        g = _obj(tau, f"{path}.tau", ("glue",))
        spec = (GLUE, _str(g["glue"], f"{path}.tau.glue"))
    elif tau in (AFFINE, NONE):
        spec = (tau, None)
    else:
        raise ParseError("tau must be \"affine\", \"none\" or {\"glue\": id}", f"{path}.tau")
    return limit, member, spec


def _resolve_end(raw, points, path) -> EndSpec:
    limit, member, (tau, glue) = raw
    if member is None:
        p = points.get(limit)
        if p is None:
            raise ParseError(f"unknown limit point {limit!r}", f"{path}.limit")
        member = p.in_X
    return EndSpec(limit, member, tau, glue)


def parse_instance(data) -> SpaceDescription | ExtendedSpace:
    """Read an instance document; returns an ExtendedSpace when unbounded arcs are present.

    Only the wire format is checked here; run :func:`validate` (or the
    criterion) for the geometry.
    """
    doc = _obj(_loads(data), "$", ("ambient_dim", "points", "arcs"),
               ("scale_R", "declared_K", "unbounded_arcs"))
    n = _int(doc["ambient_dim"], "$.ambient_dim")
    if n < 1:
        raise ParseError("ambient dimension must be positive", "$.ambient_dim")
    R = _rat(doc["scale_R"], "$.scale_R") if "scale_R" in doc else None
    if R is not None and R <= 0:
        raise ParseError("scale must be positive", "$.scale_R")
    K = _int(doc["declared_K"], "$.declared_K") if "declared_K" in doc else None

    points = {}
    for j, p in enumerate(_list(doc["points"], "$.points")):
        at = f"$.points[{j}]"
        d = _obj(p, at, ("id", "coords"), ("in_X", "in_G"))
        pid = _str(d["id"], f"{at}.id")
        coords = _vec(d["coords"], f"{at}.coords")
        if len(coords) != n:
            raise ParseError(f"expected {n} coordinates, got {len(coords)}", f"{at}.coords")
        if pid in points:
            raise ParseError(f"duplicate point id {pid!r}", f"{at}.id")
        in_X = _bool(d.get("in_X", True), f"{at}.in_X")
        in_G = _bool(d.get("in_G", False), f"{at}.in_G")
        points[pid] = PointEntry(pid, coords, in_X, in_G)

    arcs = []
    for j, a in enumerate(_list(doc["arcs"], "$.arcs")):
        at = f"$.arcs[{j}]"
        d = _obj(a, at, ("id", "vertices", "ends"), ("params",))
        aid = _str(d["id"], f"{at}.id")
        verts = _vecs(d["vertices"], f"{at}.vertices")
        if len(verts) < 2:
            raise ParseError("an arc needs at least two vertices", f"{at}.vertices")
        if any(len(v) != n for v in verts):
            raise ParseError(f"vertices must have {n} coordinates", f"{at}.vertices")
        params = _vec(d["params"], f"{at}.params") if "params" in d else None
        if params is not None and len(params) != len(verts):
            raise ParseError("one parameter per vertex expected", f"{at}.params")
        ends = _list(d["ends"], f"{at}.ends")
        if len(ends) != 2:
            raise ParseError("an arc has exactly two ends", f"{at}.ends")
        specs = tuple(_resolve_end(_end(e, f"{at}.ends[{k}]"), points, f"{at}.ends[{k}]")
                      for k, e in enumerate(ends))
        arcs.append(Arc(aid, _path(verts, params, at, True, True), specs))

    space = SpaceDescription(n, tuple(points.values()), tuple(arcs), R, K)
    if "unbounded_arcs" not in doc:
        return space
    rays = []
    for j, u in enumerate(_list(doc["unbounded_arcs"], "$.unbounded_arcs")):
        at = f"$.unbounded_arcs[{j}]"
        d = _obj(u, at, ("prefix", "ray_dir", "shape"), ("id", "end", "ray_dir_low"))
        aid = _str(d["id"], f"{at}.id") if "id" in d else f"u{j}"
        prefix = _vecs(d["prefix"], f"{at}.prefix")
        if not prefix or any(len(v) != n for v in prefix):
            raise ParseError(f"prefix needs vertices with {n} coordinates", f"{at}.prefix")
        shape = _str(d["shape"], f"{at}.shape")
        end = _resolve_end(_end(d["end"], f"{at}.end"), points, f"{at}.end") if "end" in d else None
        low = _vec(d["ray_dir_low"], f"{at}.ray_dir_low") if "ray_dir_low" in d else None
        try:
            rays.append(UnboundedArc(aid, _path(prefix, None, at, False, False),
                                     _vec(d["ray_dir"], f"{at}.ray_dir"), shape, end, low))
        except AffineGlueError as exc:
            raise ParseError(str(exc), at) from None
    return ExtendedSpace(space, tuple(rays))


def _r(x) -> str:
    return str(Fraction(x))


def _rv(v) -> list:
    return [_r(c) for c in v]


def _end_doc(e: EndSpec) -> dict:
    tau = {"glue": e.glue} if e.tau == GLUE else e.tau
    return {"limit": e.limit, "member": e.member, "tau": tau}


def instance_document(space) -> dict:
    """The JSON-ready form of a space (translation ``shift`` is not recorded)."""
    core = space.core if isinstance(space, ExtendedSpace) else space
    doc = {
        "ambient_dim": core.n,
        "points": [{"id": p.id, "coords": _rv(p.coords), "in_X": p.in_X, "in_G": p.in_G}
                   for p in core.points],
        "arcs": [],
    }
    for a in core.arcs:
        rec = {"id": a.id, "vertices": [_rv(v) for v in a.path.vertices],
               "ends": [_end_doc(e) for e in a.ends]}
        if a.path.params != PLPath.through(a.path.vertices).params:
            rec["params"] = _rv(a.path.params)
        doc["arcs"].append(rec)
    if core.R is not None:
        doc["scale_R"] = _r(core.R)
    if core.declared_K is not None:
        doc["declared_K"] = core.declared_K
    if isinstance(space, ExtendedSpace):
        doc["unbounded_arcs"] = []
        for u in space.unbounded:
            rec = {"id": u.id, "prefix": [_rv(v) for v in u.prefix.vertices],
                   "ray_dir": _rv(u.ray_dir), "shape": u.shape}
            if u.end is not None:
                rec["end"] = _end_doc(u.end)
            if u.ray_dir_low is not None:
                rec["ray_dir_low"] = _rv(u.ray_dir_low)
            doc["unbounded_arcs"].append(rec)
    return doc


def _dump(doc) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def serialize_instance(space) -> bytes:
    return _dump(instance_document(space))


# --------------------------------------------------------------------------
# embeddings


@dataclass(frozen=True)
class EmbeddingDocument:
    mapping: PLMapping
    certificate: Certificate

    @property
    def ambient_dim(self) -> int:
        return self.mapping.target_dim

    def result(self) -> AffinizationResult:
        return AffinizationResult(self.mapping, self.certificate)


def _germ_doc(key):
    if key is None:
        return None
    base, arc, end = key
    return {"base": _rv(base), "arc": arc, "end": end}


def _germ_key(x, path):
    if x is None:
        return None
    d = _obj(x, path, ("base", "arc", "end"))
    return (_vec(d["base"], f"{path}.base"), _str(d["arc"], f"{path}.arc"), _str(d["end"], f"{path}.end"))


def _slot(x, path):
    if x is None:
        return None
    s = _list(x, path)
    if len(s) != 2:
        raise ParseError("a slot is a pair [i, k]", path)
    return (_int(s[0], f"{path}[0]"), _int(s[1], f"{path}[1]"))


def _opt(x, fn, path):
    return None if x is None else fn(x, path)


def _block_doc(b: Block) -> dict:
    return {
        "kind": b.kind,
        "params": _rv(b.path.params),
        "vertices": [_rv(v) for v in b.path.vertices],
        "left_open": b.path.left_open,
        "right_open": b.path.right_open,
        "slot": list(b.slot) if b.slot is not None else None,
        "germ": _germ_doc(b.germ),
        "ray_low": _rv(b.ray_low) if b.ray_low is not None else None,
        "ray_high": _rv(b.ray_high) if b.ray_high is not None else None,
    }


def _piece_doc(pc: MapPiece) -> dict:
    if pc.point is not None:
        return {"block": pc.block, "point": pc.point}
    return {
        "block": pc.block,
        "arc": pc.arc,
        "lo": _r(pc.lo) if pc.lo is not None else None,
        "hi": _r(pc.hi) if pc.hi is not None else None,
        "lo_open": pc.lo_open,
        "hi_open": pc.hi_open,
        "corr": {"params": _rv(pc.corr.params), "values": _rv(pc.corr.values)},
    }


def _cert_doc(c: Certificate) -> dict:
    return {
        "n": c.n,
        "K": c.K,
        "N": c.N,
        "u": _r(c.u) if c.u is not None else None,
        "R": _r(c.R) if c.R is not None else None,
        "dimension": c.dimension,
        "core_dimension": c.core_dimension,
        "repairs": [{"germ": _germ_doc(r["germ"]), "from": list(r["from"]), "to": list(r["to"]),
                     "witness": _rv(r["witness"])} for r in c.repairs],
        "checks": [{"name": ch["name"], "ok": ch["ok"]} for ch in c.checks],
        "surgery": [{"germ": _germ_doc(e["germ"]), "slot": list(e["slot"]), "zeta": _rv(e["zeta"]),
                     "q": _rv(e["q"]), "v": _r(e["v"]), "d1": _r(e["d1"]), "d2": _r(e["d2"])}
                    for e in c.surgery],
        "no_limit": [{"germ": _germ_doc(e["germ"]), "slot": list(e["slot"]), "anchor": _rv(e["anchor"])}
                     for e in c.no_limit],
        "faults": list(c.faults),
        "unbounded": [{"arc": r["arc"], "anchor": _rv(r["anchor"]), "direction": r["direction"],
                       "junction": r["junction"]} for r in c.unbounded],
    }


def embedding_document(result: AffinizationResult) -> dict:
    m = result.mapping
    return {
        "ambient_dim": m.target_dim,
        "source_dim": m.source_dim,
        "blocks": [_block_doc(b) for b in m.blocks],
        "map": [_piece_doc(pc) for pc in m.pieces],
        "certificate": _cert_doc(result.certificate),
        "source_shift": _rv(m.shift),
    }


def serialize_embedding(result) -> bytes:
    if isinstance(result, EmbeddingDocument):
        result = result.result()
    return _dump(embedding_document(result))


def _parse_block(x, path) -> Block:
    d = _obj(x, path, ("kind", "params", "vertices", "left_open", "right_open", "slot", "germ",
                       "ray_low", "ray_high"))
    p = _path(_vecs(d["vertices"], f"{path}.vertices"), _vec(d["params"], f"{path}.params"), path,
              _bool(d["left_open"], f"{path}.left_open"), _bool(d["right_open"], f"{path}.right_open"))
    return Block(_str(d["kind"], f"{path}.kind"), p, _slot(d["slot"], f"{path}.slot"),
                 _germ_key(d["germ"], f"{path}.germ"), _opt(d["ray_low"], _vec, f"{path}.ray_low"),
                 _opt(d["ray_high"], _vec, f"{path}.ray_high"))


def _parse_piece(x, path, n_blocks) -> MapPiece:
    if isinstance(x, dict) and "point" in x:
        d = _obj(x, path, ("block", "point"))
    else:
        d = _obj(x, path, ("block", "arc", "lo", "hi", "lo_open", "hi_open", "corr"))
    j = _int(d["block"], f"{path}.block")
    if not 0 <= j < n_blocks:
        raise ParseError(f"no block {j}", f"{path}.block")
    if "point" in d:
        return MapPiece(j, point=_str(d["point"], f"{path}.point"))
    c = _obj(d["corr"], f"{path}.corr", ("params", "values"))
    try:
        corr = PLFunction(_vec(c["params"], f"{path}.corr.params"), _vec(c["values"], f"{path}.corr.values"))
    except (AffineGlueError, ValueError) as exc:
        raise ParseError(str(exc), f"{path}.corr") from None
    return MapPiece(j, arc=_str(d["arc"], f"{path}.arc"), lo=_opt(d["lo"], _rat, f"{path}.lo"),
                    hi=_opt(d["hi"], _rat, f"{path}.hi"), lo_open=_bool(d["lo_open"], f"{path}.lo_open"),
                    hi_open=_bool(d["hi_open"], f"{path}.hi_open"), corr=corr)


def _parse_cert(x, path, shift) -> Certificate:
    keys = ("n", "K", "N", "u", "R", "dimension", "core_dimension", "repairs", "checks", "surgery",
            "no_limit", "faults", "unbounded")
    d = _obj(x, path, keys)
    repairs = []
    for j, r in enumerate(_list(d["repairs"], f"{path}.repairs")):
        at = f"{path}.repairs[{j}]"
        r = _obj(r, at, ("germ", "from", "to", "witness"))
        repairs.append({"germ": _germ_key(r["germ"], f"{at}.germ"), "from": _slot(r["from"], f"{at}.from"),
                        "to": _slot(r["to"], f"{at}.to"), "witness": _vec(r["witness"], f"{at}.witness")})
    checks = []
    for j, ch in enumerate(_list(d["checks"], f"{path}.checks")):
        at = f"{path}.checks[{j}]"
        ch = _obj(ch, at, ("name", "ok"))
        checks.append({"name": _str(ch["name"], f"{at}.name"), "ok": _bool(ch["ok"], f"{at}.ok")})
    surgery = []
    for j, e in enumerate(_list(d["surgery"], f"{path}.surgery")):
        at = f"{path}.surgery[{j}]"
        e = _obj(e, at, ("germ", "slot", "zeta", "q", "v", "d1", "d2"))
        surgery.append({"germ": _germ_key(e["germ"], f"{at}.germ"), "slot": _slot(e["slot"], f"{at}.slot"),
                        "zeta": _vec(e["zeta"], f"{at}.zeta"), "q": _vec(e["q"], f"{at}.q"),
                        "v": _rat(e["v"], f"{at}.v"), "d1": _rat(e["d1"], f"{at}.d1"),
                        "d2": _rat(e["d2"], f"{at}.d2")})
    no_limit = []
    for j, e in enumerate(_list(d["no_limit"], f"{path}.no_limit")):
        at = f"{path}.no_limit[{j}]"
        e = _obj(e, at, ("germ", "slot", "anchor"))
        no_limit.append({"germ": _germ_key(e["germ"], f"{at}.germ"), "slot": _slot(e["slot"], f"{at}.slot"),
                         "anchor": _vec(e["anchor"], f"{at}.anchor")})
    unb = []
    for j, e in enumerate(_list(d["unbounded"], f"{path}.unbounded")):
        at = f"{path}.unbounded[{j}]"
        e = _obj(e, at, ("arc", "anchor", "direction", "junction"))
        unb.append({"arc": _str(e["arc"], f"{at}.arc"), "anchor": _vec(e["anchor"], f"{at}.anchor"),
                    "direction": _int(e["direction"], f"{at}.direction"),
                    "junction": _opt(e["junction"], _str, f"{at}.junction")})
    faults = [_str(f, f"{path}.faults[{j}]") for j, f in enumerate(_list(d["faults"], f"{path}.faults"))]
    return Certificate(
        _int(d["n"], f"{path}.n"), _int(d["K"], f"{path}.K"), _int(d["N"], f"{path}.N"),
        _opt(d["u"], _rat, f"{path}.u"), _opt(d["R"], _rat, f"{path}.R"),
        _int(d["dimension"], f"{path}.dimension"), shift, repairs, checks, surgery, no_limit, faults,
        _opt(d["core_dimension"], _int, f"{path}.core_dimension"), unb)


def parse_embedding(data) -> EmbeddingDocument:
    doc = _obj(_loads(data), "$", ("ambient_dim", "source_dim", "blocks", "map", "certificate",
                                   "source_shift"))
    D = _int(doc["ambient_dim"], "$.ambient_dim")
    n = _int(doc["source_dim"], "$.source_dim")
    shift = _vec(doc["source_shift"], "$.source_shift")
    blocks = tuple(_parse_block(b, f"$.blocks[{j}]") for j, b in enumerate(_list(doc["blocks"], "$.blocks")))
    pieces = tuple(_parse_piece(p, f"$.map[{j}]", len(blocks))
                   for j, p in enumerate(_list(doc["map"], "$.map")))
    cert = _parse_cert(doc["certificate"], "$.certificate", shift)
    return EmbeddingDocument(PLMapping(n, D, blocks, pieces, shift), cert)


# --------------------------------------------------------------------------


def embedding_to_instance(result) -> SpaceDescription:
    """The image Y of a bounded embedding as an instance with affine topology.

    Block end points become table points (in X exactly when some block
    contains them); open ends that Y misses are frontier points with no
    limit.  Nothing is singular, so the criterion accepts it with K = 0.
    """
    m = result.mapping if not isinstance(result, PLMapping) else result
    points = {}
    arcs = []

    def point_for(v):
        if v not in points:
            inside = m.contains(v)
            points[v] = PointEntry(f"y{len(points)}", v, inside, False)
        return points[v]

    for j, b in enumerate(m.blocks):
        if b.ray_low is not None or b.ray_high is not None:
            raise ValueError("unbounded blocks cannot be written as a bounded instance")
        if len(b.path.vertices) == 1:
            point_for(b.path.vertices[0])
    for j, b in enumerate(m.blocks):
        if len(b.path.vertices) == 1:
            continue
        ends = []
        for v in (b.path.vertices[0], b.path.vertices[-1]):
            p = point_for(v)
            ends.append(EndSpec(p.id, p.in_X, AFFINE if p.in_X else NONE))
        path = PLPath(b.path.params, b.path.vertices, True, True)
        arcs.append(Arc(f"b{j}", path, tuple(ends)))
    return SpaceDescription(m.target_dim, tuple(points.values()), tuple(arcs))


__all__ = [
    "EmbeddingDocument",
    "NonCanonicalRational",
    "embedding_document",
    "embedding_to_instance",
    "instance_document",
    "parse_embedding",
    "parse_instance",
    "serialize_embedding",
    "serialize_instance",
]
