"""Deciding the affineness criterion and reading it back off a piecewise map."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MappingDomainMismatch, ValidationError
from .exact import ZERO
from .mapping import PLMapping, arc_bounds, coverage_problems
from .space import (
    AFFINE,
    GLUE,
    HIGH,
    LOW,
    NONE,
    ArcPoint,
    GermTable,
    SpaceDescription,
    count_branches,
    shadow_set,
    validate,
)


@dataclass
class CriterionReport:
    ok: bool
    K: int
    witnesses: list = field(default_factory=list)


def check_condition_2(space: SpaceDescription) -> CriterionReport:
    """Decide whether the topology is affine off G with boundedly many branches on G.

    Structural problems raise :class:`ValidationError`; topological failures
    are returned as witnesses ``(point id, description)``.
    """
    rep = validate(space)
    if rep.structural:
        raise ValidationError(rep)
    witnesses = []
    G = set(space.G_ids())
    for a, which, end in space.arc_ends():
        if end.tau == GLUE and end.glue not in G:
            witnesses.append((end.glue, f"arc {a.id!r} {which} end is glued to {end.glue!r}, "
                                        f"which is not in G"))
            continue
        if end.tau == AFFINE:
            continue
        lim = space.point(end.limit)
        if lim.in_X and not lim.in_G:
            how = f"glued to {end.glue!r}" if end.tau == GLUE else "without a limit"
            witnesses.append((lim.id, f"arc {a.id!r} {which} end leaves {lim.id!r} {how}, "
                                      f"but {lim.id!r} is not in G"))
    counts = {g: count_branches(space, g) for g in sorted(G)}
    K = max(counts.values(), default=0)
    if space.declared_K is not None and space.declared_K < K:
        worst = max(counts, key=lambda g: (counts[g], g))
        witnesses.append((worst, f"{counts[worst]} branches at {worst!r} exceed declared K={space.declared_K}"))
    return CriterionReport(not witnesses, K, witnesses)


@dataclass
class ClaimsReport:
    ok: bool
    witnesses: list = field(default_factory=list)


def check_claims(space: SpaceDescription, table: GermTable) -> ClaimsReport:
    """Consistency of a germ table with its space.

    Shadows of singular points must stay inside the singular set, and within
    each slot no two germs may be glued to the same point.
    """
    witnesses = []
    Zc = {space.coords(z) for z in space.Z_ids()}
    for g in space.G_ids():
        extra = shadow_set(space, g) - Zc
        if extra:
            witnesses.append((g, f"shadow of {g!r} leaves the singular set at {sorted(extra)[0]}"))
    for germ in table.germs:
        if germ.kind == "no" and germ.target is not None:
            witnesses.append((germ.base, f"no-limit germ on arc {germ.arc!r} has a connection point"))
        if germ.kind in ("self", "glue") and germ.target is None:
            witnesses.append((germ.base, f"germ on arc {germ.arc!r} lacks its connection point"))
    slots = {}
    for germ in table.germs:
        if germ.kind == "glue":
            if germ.k is None or not 1 <= germ.k <= table.K:
                witnesses.append((germ.base, f"germ on arc {germ.arc!r} has slot {germ.k} outside 1..{table.K}"))
            slots.setdefault((germ.shape, germ.k), []).append(germ)
    for (i, k), members in sorted(slots.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        seen = {}
        for germ in members:
            if germ.target in seen:
                witnesses.append((germ.target, f"slot ({i}, {k}) glues {seen[germ.target]!r} and "
                                               f"{germ.base!r} to the same point {germ.target!r}"))
            seen.setdefault(germ.target, germ.base)
    fibers = {}
    for germ in table.germs:
        if germ.kind == "glue":
            fibers.setdefault((germ.shape, germ.target), []).append(germ)
    for (i, tgt), members in fibers.items():
        if len(members) > table.K:
            witnesses.append((tgt, f"{len(members)} germs of class {i} glue to {tgt!r}, more than K={table.K}"))
    return ClaimsReport(not witnesses, witnesses)


def expected_locus(space: SpaceDescription) -> set:
    """Points where the glued topology differs from the affine one."""
    out = set()
    for a, which, end in space.arc_ends():
        if end.tau == GLUE and end.glue != end.limit:
            out.add(end.glue)
            if space.point(end.limit).in_X:
                out.add(end.limit)
        elif end.tau == NONE and space.point(end.limit).in_X:
            out.add(end.limit)
    return out


def discontinuity_locus(mapping: PLMapping, space) -> set:
    """Points where f, read with the affine topology on the source, fails to be
    a local homeomorphism.

    Returns point ids, plus :class:`ArcPoint` entries for jumps inside arcs.
    A point is included when an arc end approaching it affinely has a different
    image limit, or when an arc end approaching something else lands on its image.
    """
    problems = coverage_problems(mapping, space)
    if problems:
        raise MappingDomainMismatch(problems[0])
    out = set()
    images = {p.id: mapping.image_point(p.id) for p in space.points if p.in_X}
    by_image = {v: k for k, v in images.items()}
    for a in space.arcs:
        pieces = mapping.arc_pieces(a.id)
        for p, q in zip(pieces, pieces[1:]):
            c = p.hi
            if mapping.limit(p, c) != mapping.limit(q, c):
                out.add(ArcPoint(a.id, c))
        lo, hi = arc_bounds(a)
        ends = ((LOW, lo, pieces[0]), (HIGH, hi, pieces[-1]))
        for which, lam, pc in ends:
            end = a.ends[0] if which == LOW else a.ends[1]
            if lam is None or end is None:
                continue
            got = mapping.limit(pc, lam)
            lim = space.point(end.limit)
            if lim.in_X and got != images[lim.id]:
                out.add(lim.id)
            owner = by_image.get(got)
            if owner is not None and owner != lim.id:
                out.add(owner)
    return out


def identity_like(mapping: PLMapping, space) -> bool:
    """True when f is the inclusion x -> (x + shift, 0)."""
    pad = mapping.target_dim - mapping.source_dim
    for p in space.points:
        if p.in_X and mapping.image_point(p.id) != tuple(c + s for c, s in zip(p.coords, mapping.shift)) + (ZERO,) * pad:
            return False
    for a in space.arcs:
        for pc in mapping.arc_pieces(a.id):
            blk = mapping.blocks[pc.block]
            lams = set(pc.corr.params) | {t for t in a.lpath.params if pc.covers(t)}
            lams |= {pc.lam(t) for t in blk.path.params if pc.corr.values[0] <= t <= pc.corr.values[-1]}
            for lam in lams:
                want = tuple(c + s for c, s in zip(a.at(lam), mapping.shift)) + (ZERO,) * pad
                if blk.at(pc.sigma(lam)) != want:
                    return False
    return True
