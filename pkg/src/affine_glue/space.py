"""Curve complexes with re-glued ends, and their germ decomposition.

A space is a finite table of points plus a list of open arcs.  Each arc end has
an affine limit (always a point of the table) and a topological target: it
either converges to that limit, is glued onto a singular point, or has no
limit at all.  Arcs are internally parametrized by taxicab arclength.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable

from .errors import EmptySingularSet, UnknownPoint, ValidationError
from .exact import (
    ZERO,
    PLPath,
    Vec,
    add,
    pl_eval,
    pl_intersections,
    sub,
    subpath,
    vec,
    _param_on_segment,
)

AFFINE = "affine"
NONE = "none"
GLUE = "glue"

LOW = "low"
HIGH = "high"


@dataclass(frozen=True)
class PointEntry:
    id: str
    coords: Vec
    in_X: bool = True
    in_G: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coords", vec(self.coords))


@dataclass(frozen=True)
class EndSpec:
    """What happens at one end of an arc.

    ``limit`` is the affine limit point, ``member`` whether that point belongs
    to X, ``tau`` one of ``"affine"``, ``"none"`` or ``"glue"`` (then ``glue``
    names the target point).
    """

    limit: str
    member: bool = True
    tau: str = AFFINE
    glue: str | None = None

    def __post_init__(self):
        if self.tau not in (AFFINE, NONE, GLUE):
            raise ValueError(f"unknown end behaviour {self.tau!r}")
        if (self.tau == GLUE) != (self.glue is not None):
            raise ValueError("a glue target is given exactly when tau is 'glue'")


@dataclass(frozen=True)
class Arc:
    id: str
    path: PLPath
    ends: tuple

    @cached_property
    def lpath(self) -> PLPath:
        """The arc reparametrized by taxicab arclength, open at both ends."""
        return PLPath.through(self.path.vertices, left_open=True, right_open=True)

    @property
    def length(self) -> Fraction:
        return self.lpath.end

    def end(self, which: str) -> EndSpec:
        return self.ends[0] if which == LOW else self.ends[1]

    @property
    def bounds(self) -> tuple:
        return ZERO, self.length

    def at(self, lam) -> Vec:
        return pl_eval(self.lpath, lam)

    def window(self, lo, hi) -> PLPath:
        return subpath(self.lpath, lo, hi)


@dataclass(frozen=True)
class SpaceDescription:
    n: int
    points: tuple
    arcs: tuple
    R: Fraction | None = None
    declared_K: int | None = None
    shift: Vec | None = None

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "arcs", tuple(self.arcs))
        if self.R is not None:
            object.__setattr__(self, "R", Fraction(self.R))
        if self.shift is None:
            object.__setattr__(self, "shift", (ZERO,) * self.n)

    @cached_property
    def _points(self) -> dict:
        return {p.id: p for p in self.points}

    @cached_property
    def _arcs(self) -> dict:
        return {a.id: a for a in self.arcs}

    def point(self, pid: str) -> PointEntry:
        try:
            return self._points[pid]
        except KeyError:
            raise UnknownPoint(pid) from None

    def arc(self, aid: str) -> Arc:
        try:
            return self._arcs[aid]
        except KeyError:
            raise UnknownPoint(aid) from None

    def coords(self, pid: str) -> Vec:
        return self.point(pid).coords

    def X_points(self) -> list:
        return [p for p in self.points if p.in_X]

    def G_ids(self) -> list:
        return [p.id for p in self.points if p.in_G]

    def Z_ids(self) -> list:
        """Singular points plus frontier points."""
        return [p.id for p in self.points if p.in_G or not p.in_X]

    def arc_ends(self):
        for a in self.arcs:
            yield a, LOW, a.ends[0]
            yield a, HIGH, a.ends[1]

    def all_coordinates(self) -> Iterable[Vec]:
        for p in self.points:
            yield p.coords
        for a in self.arcs:
            yield from a.path.vertices

    def is_normalized(self) -> bool:
        if self.R is None:
            return False
        return all(0 < c < self.R for v in self.all_coordinates() for c in v)


@dataclass(frozen=True)
class ArcPoint:
    """A point in the interior of an arc, addressed by arclength."""

    arc: str
    lam: Fraction


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    where: tuple = ()
    criterion: bool = False


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def structural(self) -> list:
        return [v for v in self.violations if not v.criterion]

    def add(self, code, message, where=(), criterion=False):
        self.violations.append(Violation(code, message, tuple(where), criterion))


def _show(v) -> str:
    return "(" + ", ".join(str(c) for c in v) + ")"


def validate(space: SpaceDescription) -> ValidationReport:
    """Check the structural invariants; collects every violation found."""
    if hasattr(space, "validation"):
        return space.validation()
    rep = ValidationReport()
    n = space.n
    seen = {}
    for p in space.points:
        if p.id in seen:
            rep.add("duplicate_id", f"point id {p.id!r} used twice", (p.id,))
        seen[p.id] = p
        if len(p.coords) != n:
            rep.add("dimension", f"point {p.id!r} has {len(p.coords)} coordinates, expected {n}", (p.id,))
        if p.in_G and not p.in_X:
            rep.add("singular_not_in_X", f"singular point {p.id!r} is not in X", (p.id,))
    by_coords = {}
    for p in space.points:
        if p.coords in by_coords:
            rep.add("duplicate_point", f"points {by_coords[p.coords]!r} and {p.id!r} coincide at {_show(p.coords)}",
                    (by_coords[p.coords], p.id))
        by_coords.setdefault(p.coords, p.id)

    arc_ids = set()
    used_limits = set()
    for a in space.arcs:
        if a.id in arc_ids or a.id in seen:
            rep.add("duplicate_id", f"arc id {a.id!r} already used", (a.id,))
        arc_ids.add(a.id)
        if a.path.dim != n:
            rep.add("dimension", f"arc {a.id!r} lives in dimension {a.path.dim}, expected {n}", (a.id,))
            continue
        if len(a.path.vertices) < 2:
            rep.add("degenerate_arc", f"arc {a.id!r} has a single vertex", (a.id,))
            continue
        for which, end, vertex in ((LOW, a.ends[0], a.path.vertices[0]), (HIGH, a.ends[1], a.path.vertices[-1])):
            where = (a.id, which)
            lim = seen.get(end.limit)
            if lim is None:
                rep.add("unknown_point", f"arc {a.id!r} {which} end names unknown point {end.limit!r}", where)
                continue
            used_limits.add(lim.id)
            if lim.coords != vertex:
                rep.add("limit_mismatch", f"arc {a.id!r} {which} end stops at {_show(vertex)}, "
                        f"not at its limit {lim.id!r} {_show(lim.coords)}", where)
            if end.member != lim.in_X:
                rep.add("membership", f"arc {a.id!r} {which} end membership disagrees with point {lim.id!r}", where)
            if end.tau == AFFINE and not lim.in_X:
                rep.add("affine_limit_missing", f"arc {a.id!r} {which} end converges to {lim.id!r}, which is not in X",
                        where)
            if end.tau == GLUE:
                tgt = seen.get(end.glue)
                if tgt is None:
                    rep.add("unknown_point", f"arc {a.id!r} {which} end glued to unknown point {end.glue!r}", where)
                elif not tgt.in_G:
                    rep.add("glue_target_not_singular",
                            f"glue target not singular: arc {a.id!r} {which} end is glued to {tgt.id!r}, "
                            f"which is not in G", (tgt.id, a.id, which), criterion=True)
    for p in space.points:
        if not p.in_X and p.id not in used_limits:
            rep.add("stray_frontier_point", f"point {p.id!r} is outside X and no arc approaches it", (p.id,))
    if rep.violations:
        return rep

    _check_arc_geometry(space, rep)
    return rep


def _check_arc_geometry(space: SpaceDescription, rep: ValidationReport) -> None:
    arcs = space.arcs
    for a in arcs:
        lim = {space.coords(a.ends[0].limit), space.coords(a.ends[1].limit)}
        for p in space.points:
            if p.coords in lim:
                continue
            for s0, s1 in a.path.segments:
                if _param_on_segment(s0, s1, p.coords) is not None:
                    rep.add("point_on_arc", f"point {p.id!r} lies inside arc {a.id!r}", (p.id, a.id))
                    break
    for i, a in enumerate(arcs):
        lim_a = {space.coords(a.ends[0].limit), space.coords(a.ends[1].limit)}
        for b in arcs[i + 1:]:
            lim_b = {space.coords(b.ends[0].limit), space.coords(b.ends[1].limit)}
            shared = lim_a & lim_b
            for hit in pl_intersections(a.path, b.path):
                if hit.kind == "point" and hit.points[0] in shared:
                    continue
                rep.add("arcs_cross", f"arcs {a.id!r} and {b.id!r} meet at {_show(hit.points[0])}",
                        (a.id, b.id, hit.points[0]))


def require_valid(space: SpaceDescription) -> ValidationReport:
    rep = validate(space)
    if not rep.ok:
        raise ValidationError(rep)
    return rep


# --------------------------------------------------------------------------
# normalization


def normalize_shift(space: SpaceDescription) -> SpaceDescription:
    """Translate into the open positive orthant and choose a bound R.

    Axis j moves by 1 - min_j when its minimum is not positive.  An explicitly
    given R is kept when it still bounds every coordinate; otherwise R becomes
    the least power of two above (max coordinate + 1).
    """
    coords = list(space.all_coordinates())
    n = space.n
    if not coords:
        return replace(space, R=space.R or Fraction(1))
    mins = [min(c[j] for c in coords) for j in range(n)]
    s = tuple(1 - m if m <= 0 else ZERO for m in mins)
    top = max(c[j] + s[j] for c in coords for j in range(n))
    R = space.R
    if R is None or top >= R:
        R = Fraction(1)
        while R <= top + 1:
            R *= 2

    def mv(v):
        return add(v, s)

    points = tuple(replace(p, coords=mv(p.coords)) for p in space.points)
    arcs = tuple(Arc(a.id, PLPath(a.path.params, tuple(mv(v) for v in a.path.vertices),
                                  a.path.left_open, a.path.right_open), a.ends)
                 for a in space.arcs)
    return SpaceDescription(n, points, arcs, R, space.declared_K, add(space.shift, s))


def unshift(v: Vec, shift: Vec) -> Vec:
    return sub(v, shift)


# --------------------------------------------------------------------------
# germ decomposition


def separating_box(Z: list, R) -> tuple:
    """Half-widths d_j so that the closed box z + [-d, d] meets Z only in z."""
    if not Z:
        raise EmptySingularSet("separating box needs at least one point")
    R = Fraction(R)
    n = len(Z[0])
    out = []
    for j in range(n):
        vals = sorted({z[j] for z in Z})
        if len(vals) == 1:
            out.append(R)
        else:
            out.append(min(b - a for a, b in zip(vals, vals[1:])) / 2)
    return tuple(out)


@dataclass(frozen=True)
class Germ:
    """A short initial piece of an arc end whose limit is a singular or frontier point.

    ``path`` is parametrized by taxicab arclength t in [0, u] starting at the
    base.  ``kind`` is ``"self"`` (converges back to its base), ``"glue"``
    (glued to ``target``) or ``"no"`` (no limit).
    """

    base: str
    base_coords: Vec
    arc: str
    end: str
    path: PLPath
    kind: str
    target: str | None
    shape: int | None = None
    k: int | None = None
    inclusive: bool = True

    @property
    def endpoint(self) -> Vec:
        return self.path.vertices[-1]

    @property
    def key(self) -> tuple:
        return (self.base_coords, self.arc, self.end)

    @property
    def needs_slot(self) -> bool:
        return self.kind in ("glue", "no")

    def arc_param(self, t, L):
        """Arclength on the arc for germ parameter t."""
        return t if self.end == LOW else L - t


@dataclass(frozen=True)
class GermTable:
    germs: tuple
    u: Fraction
    R: Fraction
    K: int
    N: int
    box: tuple
    shapes: tuple = ()

    def by_kind(self, kind: str) -> list:
        return [g for g in self.germs if g.kind == kind]

    def classes(self) -> dict:
        """Germ keys grouped as ``"no"``, ``"self"`` or ``(i, k)``."""
        out = {}
        for g in self.germs:
            label = (g.shape, g.k) if g.kind == "glue" else g.kind
            out.setdefault(label, []).append(g)
        return out


def germ_path(arc: Arc, end: str, t) -> PLPath:
    """The arc restricted to arclength t from the chosen end, starting at that end."""
    if end == LOW:
        return subpath(arc.lpath, 0, t)
    return subpath(_flip(arc.lpath), 0, t)


def _flip(path: PLPath) -> PLPath:
    """Reverse a path and reparametrize it from 0."""
    L = path.end
    return PLPath(tuple(L - t for t in reversed(path.params)), tuple(reversed(path.vertices)),
                  path.right_open, path.left_open)


def _box_exit(path: PLPath, z: Vec, box: tuple) -> Fraction:
    """First parameter where the path reaches the boundary of the open box z+(-d,d)."""
    best = path.end
    for (t0, t1), (a, b) in zip(zip(path.params, path.params[1:]), path.segments):
        for j, d in enumerate(box):
            for side in (z[j] - d, z[j] + d):
                da, db = a[j] - side, b[j] - side
                if da == 0:
                    hit = t0
                elif (da > 0) != (db > 0) or db == 0:
                    hit = t0 + (t1 - t0) * da / (da - db)
                else:
                    continue
                if 0 < hit < best:
                    best = hit
    return best


def _classify(space: SpaceDescription, base: str, end: EndSpec) -> tuple:
    if end.tau == AFFINE:
        return "self", base
    if end.tau == NONE:
        return "no", None
    if end.glue == base:
        return "self", base
    return "glue", end.glue


def _germ_clear(space: SpaceDescription, germs: list, u) -> bool:
    """Each closed germ meets everything else only at its base and its far end."""
    for g in germs:
        arc = space.arc(g.arc)
        gp = germ_path(arc, g.end, u)
        allowed = {g.base_coords, gp.vertices[-1]}
        for p in space.points:
            if p.coords == g.base_coords:
                continue
            for s0, s1 in gp.segments:
                if _param_on_segment(s0, s1, p.coords) is not None:
                    return False
        for other in space.arcs:
            for hit in pl_intersections(gp, other.path):
                if other.id == g.arc:
                    # own arc: the germ is a sub-path, anything beyond u touches only at p
                    continue
                if hit.kind == "overlap" or hit.points[0] not in allowed:
                    return False
        for h in germs:
            if h is g:
                continue
            hp = germ_path(space.arc(h.arc), h.end, u)
            for hit in pl_intersections(gp, hp):
                if hit.kind == "overlap" or hit.points[0] != g.base_coords:
                    return False
    return True


def germ_table(space: SpaceDescription) -> GermTable:
    """Germs at singular/frontier points with a common safe radius, classes and slots."""
    require_valid(space)
    if not space.is_normalized():
        space = normalize_shift(space)
    R = space.R
    Zset = set(space.Z_ids())
    raw = []
    for a, which, end in space.arc_ends():
        if end.limit in Zset:
            raw.append((a, which, end))
    if not raw:
        return GermTable((), R / 2, R, max(1, space.declared_K or 0), 0, ())
    Zc = [space.coords(z) for z in space.Z_ids()]
    box = separating_box(Zc, R)
    u = R / 2
    for a, which, end in raw:
        full = germ_path(a, which, a.length)
        u = min(u, a.length / 3, _box_exit(full, space.coords(end.limit), box) / 2)
    germs = []
    for a, which, end in raw:
        kind, target = _classify(space, end.limit, end)
        germs.append(Germ(end.limit, space.coords(end.limit), a.id, which,
                          germ_path(a, which, u), kind, target))
    while not _germ_clear(space, germs, u):
        u /= 2
        germs = [replace(g, path=germ_path(space.arc(g.arc), g.end, u)) for g in germs]

    shapes = sorted({_shape(g) for g in germs if g.needs_slot})
    index = {s: i + 1 for i, s in enumerate(shapes)}
    germs = [replace(g, shape=index[_shape(g)]) if g.needs_slot else g for g in germs]
    fibers = {}
    for g in germs:
        if g.kind == "glue":
            fibers.setdefault((g.shape, g.target), []).append(g)
    ranks = {}
    for members in fibers.values():
        for k, g in enumerate(sorted(members, key=lambda g: g.key), start=1):
            ranks[g.key] = k
    germs = [replace(g, k=ranks[g.key]) if g.kind == "glue" else
             replace(g, k=1) if g.kind == "no" else g for g in germs]
    fiber_max = max((len(m) for m in fibers.values()), default=0)
    K = max(1, fiber_max, space.declared_K or 0)
    germs.sort(key=lambda g: g.key)
    return GermTable(tuple(germs), u, R, K, len(shapes), box, tuple(shapes))


def _shape(g: Germ) -> tuple:
    return tuple(sub(v, g.base_coords) for v in g.path.vertices)


# --------------------------------------------------------------------------
# neighbourhoods and shadows


@dataclass(frozen=True)
class ArcInterval:
    arc: str
    lo: Fraction
    hi: Fraction
    lo_open: bool
    hi_open: bool
    clipped: bool = False


@dataclass(frozen=True)
class Neighborhood:
    center: Vec
    contains_center: bool
    intervals: tuple

    def closure_pieces(self, space: SpaceDescription) -> list:
        """Closed sub-paths whose union (with the centre) is the affine closure."""
        out = []
        for iv in self.intervals:
            out.append(space.arc(iv.arc).window(iv.lo, iv.hi))
        return out


def attached_ends(space: SpaceDescription, pid: str) -> list:
    """Arc ends that converge to pid in the space's own topology."""
    out = []
    for a, which, end in space.arc_ends():
        if (end.tau == AFFINE and end.limit == pid) or (end.tau == GLUE and end.glue == pid):
            out.append((a, which, end))
    return out


def basic_neighborhood(space: SpaceDescription, x, radii) -> Neighborhood:
    """A member of the fixed neighbourhood basis at x.

    ``radii`` is a single arclength cut or a mapping from ``(arc_id, end)`` to
    a cut, with key ``"default"`` used for ends not listed.  Each cut is
    clipped to half the arc length.
    """
    def cut(aid, which):
        if isinstance(radii, dict):
            return Fraction(radii.get((aid, which), radii["default"]))
        return Fraction(radii)

    if isinstance(x, ArcPoint):
        arc = space.arc(x.arc)
        lo_b, hi_b = arc.bounds
        r = cut(x.arc, "interior")
        lo, hi = x.lam - r, x.lam + r
        clipped = (lo_b is not None and lo <= lo_b) or (hi_b is not None and hi >= hi_b)
        if lo_b is not None:
            lo = max(lo, lo_b)
        if hi_b is not None:
            hi = min(hi, hi_b)
        return Neighborhood(arc.at(x.lam), True,
                            (ArcInterval(arc.id, lo, hi, True, True, clipped),))
    p = space.point(x)
    if not p.in_X:
        raise UnknownPoint(f"{x} is not a point of X")
    intervals = []
    for a, which, _ in attached_ends(space, x):
        r = cut(a.id, which)
        lo_b, hi_b = a.bounds
        clipped = False
        if lo_b is not None and hi_b is not None:
            half = (hi_b - lo_b) / 2
            clipped = r > half
            r = min(r, half)
        if which == LOW:
            intervals.append(ArcInterval(a.id, lo_b, lo_b + r, True, True, clipped))
        else:
            intervals.append(ArcInterval(a.id, hi_b - r, hi_b, True, True, clipped))
    return Neighborhood(p.coords, True, tuple(intervals))


def shadow_set(space: SpaceDescription, x) -> set:
    """The point itself plus the affine limits of every end glued onto it."""
    if isinstance(x, ArcPoint):
        return {space.arc(x.arc).at(x.lam)}
    p = space.point(x)
    if not p.in_X:
        raise UnknownPoint(f"{x} is not a point of X")
    out = {p.coords}
    for a, which, end in attached_ends(space, x):
        out.add(space.coords(end.limit))
    return out


def count_branches(space: SpaceDescription, x) -> int:
    """Number of local branches at x: attached arc ends (2 inside an arc)."""
    if isinstance(x, ArcPoint):
        return 2
    p = space.point(x)
    if not p.in_X:
        raise UnknownPoint(f"{x} is not a point of X")
    return len(attached_ends(space, x))
