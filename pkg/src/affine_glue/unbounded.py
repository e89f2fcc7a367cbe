"""Spaces with unbounded arcs: embed the bounded core, then hang each unbounded
arc as a vertical ray or line in one extra coordinate."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property

from .embedder import AffinizationResult, affinize
from .errors import ArcMeetsCoreInteriorly, CriterionRejected, MalformedArc
from .exact import (
    ZERO,
    PLFunction,
    PLPath,
    Vec,
    add,
    linear_pieces_meet,
    norm1,
    pl_eval,
    scale,
    sub,
    vec,
)
from .mapping import Block, MapPiece, PLMapping
from .space import (
    AFFINE,
    GLUE,
    LOW,
    EndSpec,
    SpaceDescription,
    ValidationReport,
    validate,
)
from .verifier import check_condition_2

HALF = "half"
LINE = "line"


@dataclass(frozen=True)
class UnboundedArc:
    """A finite polyline followed by a ray; lines get a second ray before the prefix.

    Arclength is measured from the first prefix vertex, which is the finite
    end for a half-line and the origin of the (signed) parameter for a line.
    """

    id: str
    prefix: PLPath
    ray_dir: Vec
    shape: str = HALF
    end: EndSpec | None = None
    ray_dir_low: Vec | None = None

    def __post_init__(self):
        if self.shape not in (HALF, LINE):
            raise MalformedArc(f"arc {self.id!r}: shape must be 'half' or 'line'")
        d = vec(self.ray_dir)
        if norm1(d) == 0:
            raise MalformedArc(f"arc {self.id!r}: zero ray direction")
        object.__setattr__(self, "ray_dir", d)
        if self.shape == HALF:
            if self.end is None:
                raise MalformedArc(f"half-line {self.id!r} needs an end specification")
            if self.ray_dir_low is not None:
                raise MalformedArc(f"half-line {self.id!r} has only one ray")
        else:
            if self.end is not None:
                raise MalformedArc(f"line {self.id!r} has no finite end")
            low = vec(self.ray_dir_low) if self.ray_dir_low is not None else scale(d, -1)
            if norm1(low) == 0:
                raise MalformedArc(f"arc {self.id!r}: zero ray direction")
            object.__setattr__(self, "ray_dir_low", low)

    @cached_property
    def lpath(self) -> PLPath:
        return PLPath.through(self.prefix.vertices)

    @property
    def unit_high(self) -> Vec:
        return scale(self.ray_dir, 1 / norm1(self.ray_dir))

    @property
    def unit_low(self) -> Vec | None:
        if self.ray_dir_low is None:
            return None
        return scale(self.ray_dir_low, 1 / norm1(self.ray_dir_low))

    @property
    def ends(self) -> tuple:
        return (self.end, None)

    @property
    def bounds(self) -> tuple:
        return (ZERO, None) if self.shape == HALF else (None, None)

    @property
    def dim(self) -> int:
        return self.prefix.dim

    def at(self, lam) -> Vec:
        lam = Fraction(lam)
        p = self.lpath
        if lam > p.end:
            return add(p.vertices[-1], scale(self.unit_high, lam - p.end))
        if lam < 0:
            if self.shape == HALF:
                raise MalformedArc(f"half-line {self.id!r} has no point at {lam}")
            return add(p.vertices[0], scale(self.unit_low, -lam))
        return pl_eval(p, lam)

    def window(self, lo, hi) -> PLPath:
        cuts = [lo] + [t for t in self.lpath.params if lo < t < hi] + [hi]
        if lo == hi:
            cuts = [lo]
        return PLPath(tuple(cuts), tuple(self.at(t) for t in cuts))

    def linear_pieces(self) -> list:
        p = self.lpath
        out = [(a, sub(b, a), Fraction(1)) for a, b in p.segments]
        out.append((p.vertices[-1], self.ray_dir, None))
        if self.shape == LINE:
            out.append((p.vertices[0], self.ray_dir_low, None))
        return out

    def monotone_coordinate(self):
        """A coordinate that strictly increases or decreases along the whole arc."""
        steps = [sub(b, a) for a, b in self.lpath.segments]
        steps.append(self.ray_dir)
        if self.shape == LINE:
            steps.append(scale(self.ray_dir_low, -1))
        for j in range(self.dim):
            signs = {(s[j] > 0) - (s[j] < 0) for s in steps}
            if len(signs) == 1 and 0 not in signs:
                return j
        return None


@dataclass(frozen=True)
class ExtendedSpace:
    """A bounded core together with unbounded arcs.

    Exposes the same read-only interface as :class:`SpaceDescription` so the
    neighbourhood, shadow and oracle code can run on it unchanged.
    """

    core: SpaceDescription
    unbounded: tuple

    def __post_init__(self):
        object.__setattr__(self, "unbounded", tuple(self.unbounded))

    @property
    def n(self) -> int:
        return self.core.n

    @property
    def points(self) -> tuple:
        return self.core.points

    @property
    def arcs(self) -> tuple:
        return self.core.arcs + self.unbounded

    @property
    def declared_K(self):
        return self.core.declared_K

    def point(self, pid):
        return self.core.point(pid)

    def coords(self, pid):
        return self.core.coords(pid)

    def arc(self, aid):
        for a in self.unbounded:
            if a.id == aid:
                return a
        return self.core.arc(aid)

    def G_ids(self):
        return self.core.G_ids()

    def Z_ids(self):
        return self.core.Z_ids()

    def arc_ends(self):
        yield from self.core.arc_ends()
        for a in self.unbounded:
            if a.end is not None:
                yield a, LOW, a.end

    def validation(self) -> ValidationReport:
        try:
            core, _, _ = split_bounded(self)
        except (MalformedArc, ArcMeetsCoreInteriorly) as exc:
            rep = ValidationReport()
            rep.add("unbounded_arc", str(exc))
            return rep
        return validate(core)


def _only_for_rays(ext: ExtendedSpace) -> set:
    """Frontier points approached by unbounded arcs and nothing in the core."""
    core_limits = {e.limit for _, _, e in ext.core.arc_ends()}
    out = set()
    for a in ext.unbounded:
        if a.end is not None and not ext.core.point(a.end.limit).in_X and a.end.limit not in core_limits:
            out.add(a.end.limit)
    return out


def split_bounded(ext: ExtendedSpace) -> tuple:
    """Separate the bounded core from the unbounded arcs.

    Returns ``(core, arcs, junctions)`` where ``junctions`` maps each arc id
    to the point it is attached to, or None when the arc hangs free.
    """
    n = ext.core.n
    ids = {p.id for p in ext.core.points} | {a.id for a in ext.core.arcs}
    for a in ext.unbounded:
        if a.id in ids:
            raise MalformedArc(f"arc id {a.id!r} already used")
        ids.add(a.id)
        if a.dim != n or len(a.ray_dir) != n:
            raise MalformedArc(f"arc {a.id!r} is not in dimension {n}")
        if a.monotone_coordinate() is None:
            raise MalformedArc(f"arc {a.id!r} is not a graph over any coordinate")
        if a.end is not None:
            try:
                lim = ext.core.point(a.end.limit)
            except KeyError:
                raise MalformedArc(f"arc {a.id!r} ends at unknown point {a.end.limit!r}") from None
            if lim.coords != a.lpath.vertices[0]:
                raise MalformedArc(f"arc {a.id!r} does not start at its limit {a.end.limit!r}")
            if a.end.tau == GLUE:
                raise MalformedArc(f"arc {a.id!r}: unbounded arcs cannot be glued")
            if a.end.tau == AFFINE and not lim.in_X:
                raise MalformedArc(f"arc {a.id!r} converges to {lim.id!r}, which is not in X")
            if a.end.member != lim.in_X:
                raise MalformedArc(f"arc {a.id!r} end membership disagrees with point {lim.id!r}")

    drop = _only_for_rays(ext)
    core = replace(ext.core, points=tuple(p for p in ext.core.points if p.id not in drop))
    for a in ext.unbounded:
        allowed = {a.lpath.vertices[0]} if a.end is not None else set()
        for p in core.points:
            if p.coords in allowed:
                continue
            if _touches(a, p.coords):
                raise ArcMeetsCoreInteriorly(f"arc {a.id!r} passes through point {p.id!r}")
        for c in core.arcs:
            for ao, ad, ahi in a.linear_pieces():
                for s0, s1 in c.path.segments:
                    hit = linear_pieces_meet(ao, ad, ahi, s0, sub(s1, s0), Fraction(1))
                    if hit is None:
                        continue
                    if hit[0] == "point" and add(ao, scale(ad, hit[1])) in allowed:
                        continue
                    raise ArcMeetsCoreInteriorly(f"arc {a.id!r} meets core arc {c.id!r}")
    for i, a in enumerate(ext.unbounded):
        for b in ext.unbounded[i + 1:]:
            shared = set()
            if a.end is not None and b.end is not None and a.end.limit == b.end.limit:
                shared.add(a.lpath.vertices[0])
            for ao, ad, ahi in a.linear_pieces():
                for bo, bd, bhi in b.linear_pieces():
                    hit = linear_pieces_meet(ao, ad, ahi, bo, bd, bhi)
                    if hit is None:
                        continue
                    if hit[0] == "point" and add(ao, scale(ad, hit[1])) in shared:
                        continue
                    raise MalformedArc(f"unbounded arcs {a.id!r} and {b.id!r} meet")
    junctions = {}
    for a in ext.unbounded:
        attached = a.end is not None and a.end.tau == AFFINE
        junctions[a.id] = a.end.limit if attached else None
    return core, list(ext.unbounded), junctions


def _touches(a: UnboundedArc, x: Vec) -> bool:
    zero = (ZERO,) * len(x)
    return any(linear_pieces_meet(o, d, hi, x, zero, ZERO) is not None for o, d, hi in a.linear_pieces())


def core_bound(result: AffinizationResult) -> int:
    """Ceiling of the largest absolute coordinate on the embedded core."""
    top = ZERO
    for b in result.mapping.blocks:
        for v in b.path.vertices:
            for c in v:
                top = max(top, abs(c))
    return math.ceil(top)


def anchor_points(arcs, junctions: dict, images: dict, bound: int, dim: int) -> list:
    """Where each unbounded arc is hung, and in which direction along the new axis.

    Attached arcs hang from the image of their junction (a second arc at the
    same junction hangs downwards); free arcs get fresh points (bound+i, 0, ...).
    """
    out = []
    used = {}
    fresh = 0
    for a in arcs:
        j = junctions.get(a.id)
        if j is not None:
            count = used.get(j, 0)
            if count >= 2:
                raise MalformedArc(f"more than two unbounded arcs attach at {j!r}")
            used[j] = count + 1
            out.append((images[j], 1 if count == 0 else -1))
        else:
            fresh += 1
            out.append((tuple([Fraction(bound + fresh)] + [ZERO] * (dim - 1)), 1))
    return out


def affinize_unbounded(ext: ExtendedSpace, *, faults=frozenset()) -> AffinizationResult:
    """Embed the core, then add one coordinate carrying every unbounded arc."""
    core, arcs, junctions = split_bounded(ext)
    crit = check_condition_2(ext)
    if not crit.ok:
        raise CriterionRejected(crit)
    res = affinize(core, faults=faults)
    cm = res.mapping
    D = cm.target_dim + 1
    blocks = [replace(b, path=PLPath(b.path.params, tuple(v + (ZERO,) for v in b.path.vertices),
                                     b.path.left_open, b.path.right_open)) for b in cm.blocks]
    pieces = list(cm.pieces)
    images = {p.id: cm.image_point(p.id) for p in core.points if p.in_X}
    ordered = sorted(arcs, key=lambda a: a.id)
    anchors = anchor_points(ordered, junctions, images, core_bound(res), cm.target_dim)
    records = []
    for a, (anchor, sign) in zip(ordered, anchors):
        up = (ZERO,) * cm.target_dim + (Fraction(sign),)
        base = anchor + (ZERO,)
        path = PLPath((ZERO, Fraction(1)), (base, add(base, up)), a.shape == HALF, False)
        low = scale(up, -1) if a.shape == LINE else None
        blocks.append(Block("ray", path, None, None, low, up))
        lo = ZERO if a.shape == HALF else None
        pieces.append(MapPiece(len(blocks) - 1, arc=a.id, lo=lo, hi=None, lo_open=a.shape == HALF,
                               hi_open=False, corr=PLFunction.linear(0, 0, 1, 1)))
        records.append(dict(arc=a.id, anchor=anchor, direction=sign, junction=junctions[a.id]))
    mapping = PLMapping(core.n, D, tuple(blocks), tuple(pieces), cm.shift)
    cert = replace(res.certificate, dimension=D, core_dimension=cm.target_dim,
                   checks=res.certificate.checks + [{"name": "split_bounded", "ok": True}],
                   unbounded=records)
    return AffinizationResult(mapping, cert, res.space, res.table, res.plan)
