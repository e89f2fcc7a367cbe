"""Blocks of the embedded space and the piecewise map onto them."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import MappingDomainMismatch
from .exact import (
    ZERO,
    PLFunction,
    PLPath,
    Vec,
    add,
    linear_pieces_meet,
    pl_eval,
    scale,
    sub,
    subpath,
    taxicab,
)

KIND_ORDER = {"point": 0, "residual": 1, "surgery1": 2, "surgery2": 3, "surgery3": 4,
              "no_limit": 5, "ray": 6}


@dataclass(frozen=True)
class Block:
    """One path (or point) of the embedded space.

    ``ray_low``/``ray_high`` continue the path at unit taxicab speed beyond its
    first/last vertex, which makes the block unbounded on that side.
    """

    kind: str
    path: PLPath
    slot: tuple | None = None
    germ: tuple | None = None
    ray_low: Vec | None = None
    ray_high: Vec | None = None

    @property
    def dim(self) -> int:
        return self.path.dim

    @property
    def lo(self):
        return None if self.ray_low is not None else self.path.start

    @property
    def hi(self):
        return None if self.ray_high is not None else self.path.end

    @property
    def lo_open(self) -> bool:
        return self.ray_low is None and self.path.left_open

    @property
    def hi_open(self) -> bool:
        return self.ray_high is None and self.path.right_open

    def at(self, s) -> Vec:
        p = self.path
        if s > p.end and self.ray_high is not None:
            return add(p.vertices[-1], scale(self.ray_high, s - p.end))
        if s < p.start and self.ray_low is not None:
            return add(p.vertices[0], scale(self.ray_low, p.start - s))
        return pl_eval(p, s)

    def window(self, a, b) -> PLPath:
        """Closed sub-path over [a, b], following rays when needed."""
        p = self.path
        if a == b:
            return PLPath((a,), (self.at(a),))
        params = [a] + [t for t in p.params if a < t < b] + [b]
        return PLPath(tuple(params), tuple(self.at(t) for t in params))

    def linear_pieces(self):
        """(origin, direction, length-or-None) triples covering the closed block."""
        p = self.path
        out = []
        if len(p.vertices) == 1:
            out.append((p.vertices[0], (ZERO,) * p.dim, ZERO))
        for a, b in p.segments:
            out.append((a, sub(b, a), Fraction(1)))
        if self.ray_high is not None:
            out.append((p.vertices[-1], self.ray_high, None))
        if self.ray_low is not None:
            out.append((p.vertices[0], self.ray_low, None))
        return out

    def open_ends(self) -> list:
        out = []
        if self.lo_open:
            out.append(self.path.vertices[0])
        if self.hi_open:
            out.append(self.path.vertices[-1])
        return out

    def contains(self, x: Vec) -> bool:
        for o, d, hi in self.linear_pieces():
            hit = linear_pieces_meet(o, d, hi, x, (ZERO,) * len(x), ZERO)
            if hit is not None:
                return x not in self.open_ends()
        return False

    def sort_key(self):
        first = self.germ[0] if self.germ else self.path.vertices[0]
        return (KIND_ORDER[self.kind], first, self.germ or (), self.path.vertices)


def blocks_meet(a: Block, b: Block) -> list:
    """Common points of two blocks, ignoring touches at open ends.

    Returns a list of witness points; a shared segment always counts.
    """
    if a.dim != b.dim:
        return []
    excluded = set(a.open_ends()) | set(b.open_ends())
    out = []
    for ao, ad, ahi in a.linear_pieces():
        for bo, bd, bhi in b.linear_pieces():
            hit = linear_pieces_meet(ao, ad, ahi, bo, bd, bhi)
            if hit is None:
                continue
            if hit[0] == "overlap":
                s0, s1 = hit[1]
                out.append(add(ao, scale(ad, (s0 + s1) / 2)))
                continue
            p = add(ao, scale(ad, hit[1]))
            if p not in excluded and p not in out:
                out.append(p)
    return out


@dataclass(frozen=True)
class MapPiece:
    """Part of the source sent onto one block.

    The source is either a point (``point`` set) or an arclength window of an
    arc; ``corr`` maps arclength increasingly onto the block parameter.  A
    window bound of None means the arc is unbounded there, and ``corr`` is
    extended linearly past its breakpoints.
    """

    block: int
    point: str | None = None
    arc: str | None = None
    lo: Fraction | None = None
    hi: Fraction | None = None
    lo_open: bool = False
    hi_open: bool = False
    corr: PLFunction | None = None

    def sigma(self, lam) -> Fraction:
        c = self.corr
        a, b = c.domain
        if lam > b and self.hi is None:
            return c.values[-1] + (lam - b) * _end_slope(c, -1)
        if lam < a and self.lo is None:
            return c.values[0] - (a - lam) * _end_slope(c, 0)
        return c(lam)

    def lam(self, s) -> Fraction:
        c = self.corr
        if s > c.values[-1] and self.hi is None:
            return c.params[-1] + (s - c.values[-1]) / _end_slope(c, -1)
        if s < c.values[0] and self.lo is None:
            return c.params[0] - (c.values[0] - s) / _end_slope(c, 0)
        return c.inverse(s)

    def covers(self, lam) -> bool:
        if self.lo is not None and (lam < self.lo or (lam == self.lo and self.lo_open)):
            return False
        if self.hi is not None and (lam > self.hi or (lam == self.hi and self.hi_open)):
            return False
        return True


def _end_slope(c: PLFunction, j: int) -> Fraction:
    if len(c.params) == 1:
        return Fraction(1)
    if j == 0:
        return (c.values[1] - c.values[0]) / (c.params[1] - c.params[0])
    return (c.values[-1] - c.values[-2]) / (c.params[-1] - c.params[-2])


@dataclass(frozen=True)
class PLMapping:
    """Piecewise map from a space onto a union of blocks.

    Sources are addressed by point id or by (arc id, arclength), so they do not
    depend on any translation; ``shift`` records the translation applied
    before embedding.
    """

    source_dim: int
    target_dim: int
    blocks: tuple
    pieces: tuple
    shift: Vec

    def point_piece(self, pid: str) -> MapPiece:
        for pc in self.pieces:
            if pc.point == pid:
                return pc
        raise MappingDomainMismatch(f"no piece for point {pid!r}")

    def arc_pieces(self, aid: str) -> list:
        out = [pc for pc in self.pieces if pc.arc == aid]
        out.sort(key=lambda pc: (pc.lo is not None, pc.lo if pc.lo is not None else 0))
        return out

    def piece_at(self, aid: str, lam) -> MapPiece:
        for pc in self.arc_pieces(aid):
            if pc.covers(lam):
                return pc
        raise MappingDomainMismatch(f"arc {aid!r} has no piece at {lam}")

    def image_point(self, pid: str) -> Vec:
        return self.blocks[self.point_piece(pid).block].path.vertices[0]

    def image(self, aid: str, lam) -> Vec:
        pc = self.piece_at(aid, lam)
        return self.blocks[pc.block].at(pc.sigma(lam))

    def limit(self, pc: MapPiece, lam) -> Vec:
        """Image limit inside one piece as arclength tends to ``lam``."""
        return self.blocks[pc.block].at(pc.sigma(lam))

    def contains(self, y: Vec) -> bool:
        return any(b.contains(y) for b in self.blocks)


def coverage_problems(mapping: PLMapping, space) -> list:
    """Ways in which the pieces fail to partition the space (empty when fine)."""
    out = []
    pts = {}
    for pc in mapping.pieces:
        if pc.point is not None:
            pts[pc.point] = pts.get(pc.point, 0) + 1
    for p in space.points:
        if p.in_X and pts.get(p.id, 0) != 1:
            out.append(f"point {p.id!r} covered {pts.get(p.id, 0)} times")
        if not p.in_X and p.id in pts:
            out.append(f"point {p.id!r} is not in X but has a piece")
    known = {a.id for a in space.arcs}
    for pc in mapping.pieces:
        if pc.arc is not None and pc.arc not in known:
            out.append(f"piece for unknown arc {pc.arc!r}")
    for a in space.arcs:
        lo, hi = arc_bounds(a)
        ps = mapping.arc_pieces(a.id)
        if not ps:
            out.append(f"arc {a.id!r} has no pieces")
            continue
        if ps[0].lo != lo or (lo is not None and not ps[0].lo_open):
            out.append(f"arc {a.id!r} does not start with an open piece at {lo}")
        if ps[-1].hi != hi or (hi is not None and not ps[-1].hi_open):
            out.append(f"arc {a.id!r} does not end with an open piece at {hi}")
        for p, q in zip(ps, ps[1:]):
            if p.hi != q.lo or p.hi_open == q.lo_open:
                out.append(f"arc {a.id!r} pieces do not meet cleanly at {p.hi}")
    return out


def arc_bounds(arc) -> tuple:
    """Arclength window of a bounded or unbounded arc (None for infinity)."""
    return arc.bounds


def frontier_points(mapping: PLMapping) -> list:
    """Open block ends that no block contains: points of cl(Y) outside Y."""
    out = []
    for b in mapping.blocks:
        for e in b.open_ends():
            if e not in out and not mapping.contains(e):
                out.append(e)
    return out


def unit_speed(block: Block) -> bool:
    p = block.path
    return all(t1 - t0 == taxicab(a, b)
               for (t0, t1), (a, b) in zip(zip(p.params, p.params[1:]), p.segments))


def sub_block(block: Block, a, b, lo_open: bool, hi_open: bool) -> Block:
    """The part of a bounded block over [a, b] with the given end flags."""
    path = subpath(block.path, a, b, lo_open, hi_open)
    return Block(block.kind, path, block.slot, block.germ)
