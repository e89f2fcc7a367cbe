"""Independent checks of an embedding: bijectivity, continuity both ways, shadows.

Exact checks (junction limits, block intersections, unit speed) carry the
verdict; the sampled neighbourhood checks run over a power-of-two radius
schedule on top of them.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NoCrossing, ScheduleTooCoarse
from .exact import ZERO, PLFunction, Vec, add, phi_rescale, scale, sub, taxicab, zeros
from .mapping import (
    Block,
    MapPiece,
    PLMapping,
    arc_bounds,
    blocks_meet,
    coverage_problems,
    unit_speed,
)
from .space import AFFINE, GLUE, HIGH, LOW, ArcPoint, basic_neighborhood


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    witness: str | None = None


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    density: int | None = None

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, witness: str | None = None) -> None:
        self.checks.append(Check(name, ok, None if ok else witness))

    def failed(self) -> list:
        return [c for c in self.checks if not c.ok]

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        out = VerificationReport(sorted(self.checks + other.checks, key=lambda c: c.name),
                                 self.density or other.density)
        return out


def _show(v) -> str:
    return "(" + ", ".join(str(c) for c in v) + ")"


# --------------------------------------------------------------------------
# bijection


def _expected_dimension(cert) -> int:
    if cert.core_dimension is not None:
        return cert.core_dimension + 1
    return cert.n * (1 + cert.K * cert.N)


def _bbox(block: Block):
    if block.ray_low is not None or block.ray_high is not None:
        return None
    return block.path.bbox()


def _boxes_apart(a, b) -> bool:
    if a is None or b is None:
        return False
    (alo, ahi), (blo, bhi) = a, b
    return any(x1 < y0 or y1 < x0 for x0, x1, y0, y1 in zip(alo, ahi, blo, bhi))


def block_collisions(mapping: PLMapping, limit: int | None = None) -> list:
    """All pairs of blocks meeting outside open ends: (index, index, point)."""
    out = []
    blocks = mapping.blocks
    boxes = [_bbox(b) for b in blocks]
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            if _boxes_apart(boxes[i], boxes[j]):
                continue
            hits = blocks_meet(blocks[i], blocks[j])
            if hits:
                out.append((i, j, hits[0]))
                if limit is not None and len(out) >= limit:
                    return out
    return out


def verify_bijection(space, result) -> VerificationReport:
    """Exact injectivity and surjectivity of the piecewise map onto its blocks."""
    rep = VerificationReport()
    m: PLMapping = result.mapping
    cert = result.certificate
    want = _expected_dimension(cert)
    bad = [j for j, b in enumerate(m.blocks) if b.dim != want]
    rep.add("dimension", cert.dimension == want and m.target_dim == want and not bad,
            f"expected dimension {want}, certificate says {cert.dimension}, "
            f"{len(bad)} blocks disagree" + (f" (first: {m.blocks[bad[0]].kind} in dimension "
                                             f"{m.blocks[bad[0]].dim})" if bad else ""))
    problems = coverage_problems(m, space)
    rep.add("partition", not problems, problems[0] if problems else None)

    mono = None
    for pc in m.pieces:
        blk = m.blocks[pc.block]
        if pc.point is not None:
            if len(blk.path.vertices) != 1 or blk.ray_low or blk.ray_high:
                mono = f"point {pc.point!r} is sent onto a non-point block"
            continue
        c = pc.corr
        if len(c.params) < 2 or not c.is_increasing():
            mono = f"piece on arc {pc.arc!r} is not increasing"
        elif (pc.lo is not None and (c.params[0] != pc.lo or c.values[0] != blk.path.start)) or \
                (pc.hi is not None and (c.params[-1] != pc.hi or c.values[-1] != blk.path.end)):
            mono = f"piece on arc {pc.arc!r} over [{pc.lo}, {pc.hi}] does not fill its block"
        elif (pc.lo is None) != (blk.ray_low is not None) or (pc.hi is None) != (blk.ray_high is not None):
            mono = f"piece on arc {pc.arc!r} and its block disagree on unboundedness"
        elif pc.lo_open != blk.lo_open or pc.hi_open != blk.hi_open:
            mono = f"piece on arc {pc.arc!r} over [{pc.lo}, {pc.hi}] has end flags unlike its block"
        if mono:
            break
    rep.add("monotone", mono is None, mono)

    used = {}
    for pc in m.pieces:
        used[pc.block] = used.get(pc.block, 0) + 1
    odd = [j for j in range(len(m.blocks)) if used.get(j, 0) != 1]
    rep.add("one_to_one", not odd, f"block {odd[0]} ({m.blocks[odd[0]].kind}) is the image of "
                                   f"{used.get(odd[0], 0)} pieces" if odd else None)
    hits = block_collisions(m, limit=1)
    if hits:
        i, j, p = hits[0]
        rep.add("disjoint", False, f"{m.blocks[i].kind} block {i} meets {m.blocks[j].kind} block {j} "
                                   f"at {_show(p)}")
    else:
        rep.add("disjoint", True)
    return rep


# --------------------------------------------------------------------------
# distances to pieces of Y


def _window_pieces(block: Block, a, b):
    """Linear pieces (origin, direction, length or None) covering block parameters [a, b]."""
    p = block.path
    out = []
    if b is None and a is not None and a >= p.end:
        return [(block.at(a), block.ray_high, None)]
    if a is None and b is not None and b <= p.start:
        return [(block.at(b), block.ray_low, None)]
    if a is None:
        out.append((p.vertices[0], block.ray_low, None))
        a = p.start
    if b is None:
        out.append((p.vertices[-1], block.ray_high, None))
        b = p.end
    if a == b:
        out.append((block.at(a), zeros(p.dim), ZERO))
        return out
    cuts = [a] + [t for t in p.params if a < t < b] + [b]
    for s, t in zip(cuts, cuts[1:]):
        x, y = block.at(s), block.at(t)
        out.append((x, sub(y, x), Fraction(1)))
    return out


def _min_dist(c: Vec, o: Vec, d: Vec, hi) -> Fraction:
    cands = {ZERO}
    if hi is not None:
        cands.add(hi)
    for cj, oj, dj in zip(c, o, d):
        if dj != 0:
            s = (cj - oj) / dj
            if s >= 0 and (hi is None or s <= hi):
                cands.add(s)
    return min(taxicab(c, add(o, scale(d, s))) for s in cands)


def _max_dist(c: Vec, o: Vec, d: Vec, hi) -> Fraction:
    return max(taxicab(c, o), taxicab(c, add(o, scale(d, hi))))


# --------------------------------------------------------------------------
# homeomorphism


def _arc_end(arc, which):
    end = arc.ends[0] if which == LOW else arc.ends[1]
    return end


def _neighborhood_windows(space, x, r) -> dict:
    """arc id -> list of (lo, hi) open windows of the basic neighbourhood of x."""
    nb = basic_neighborhood(space, x, r)
    out = {}
    for iv in nb.intervals:
        out.setdefault(iv.arc, []).append((iv.lo, iv.hi))
    return out


def _complement(window_lo, window_hi, holes):
    """Closed hulls of [window] minus the union of open holes (None = infinite)."""
    pieces = [(window_lo, window_hi)]
    for a, b in holes:
        nxt = []
        for lo, hi in pieces:
            left_ok = lo is None or lo < a
            right_ok = hi is None or b < hi
            if (hi is not None and hi <= a) or (lo is not None and lo >= b):
                nxt.append((lo, hi))
                continue
            if left_ok:
                nxt.append((lo, a))
            if right_ok:
                nxt.append((b, hi))
        pieces = nxt
    return pieces


def _image_dist_bounds(m: PLMapping, pc: MapPiece, lo, hi, c: Vec, want_max: bool):
    blk = m.blocks[pc.block]
    a = None if lo is None else pc.sigma(lo)
    b = None if hi is None else pc.sigma(hi)
    pieces = _window_pieces(blk, a, b)
    if want_max:
        return max(_max_dist(c, o, d, h) for o, d, h in pieces)
    return min(_min_dist(c, o, d, h) for o, d, h in pieces)


def _image_of(m: PLMapping, space, x) -> Vec:
    if isinstance(x, ArcPoint):
        return m.image(x.arc, x.lam)
    return m.image_point(x)


def _forward_sup(m: PLMapping, space, x, delta) -> Fraction:
    """Largest distance from f(x) to the closure of f(N_delta(x))."""
    fx = _image_of(m, space, x)
    worst = ZERO
    for aid, windows in _neighborhood_windows(space, x, delta).items():
        for lo, hi in windows:
            for pc in m.arc_pieces(aid):
                plo = pc.lo if pc.lo is not None else lo
                phi = pc.hi if pc.hi is not None else hi
                a, b = max(lo, plo), min(hi, phi)
                if a > b or (a == b and not (pc.covers(a))):
                    continue
                worst = max(worst, _image_dist_bounds(m, pc, a, b, fx, True))
    return worst


def _inverse_gap(m: PLMapping, space, x, r):
    """Distance from f(x) to the closure of f(X minus N_r(x)); zero means f^-1 jumps at f(x)."""
    fx = _image_of(m, space, x)
    holes = _neighborhood_windows(space, x, r)
    best = None
    where = None
    for pc in m.pieces:
        if pc.point is not None:
            if pc.point == x:
                continue
            d = taxicab(fx, m.image_point(pc.point))
            if best is None or d < best:
                best, where = d, f"point {pc.point!r}"
            continue
        for lo, hi in _complement(pc.lo, pc.hi, holes.get(pc.arc, [])):
            if lo is not None and hi is not None and lo > hi:
                continue
            d = _image_dist_bounds(m, pc, lo, hi, fx, False)
            if best is None or d < best:
                best, where = d, f"arc {pc.arc!r} near [{lo}, {hi}]"
    return best, where


def _sample_points(space, m: PLMapping, density: int, seed: int) -> list:
    pts = [p.id for p in space.points if p.in_X]
    for a in space.arcs:
        for pc, nx in zip(m.arc_pieces(a.id), m.arc_pieces(a.id)[1:]):
            pts.append(ArcPoint(a.id, pc.hi))
    rng = random.Random(seed)
    arcs = list(space.arcs)
    for _ in range(density if arcs else 0):
        a = rng.choice(arcs)
        lo, hi = arc_bounds(a)
        lo = lo if lo is not None else (hi - 20 if hi is not None else Fraction(-10))
        hi = hi if hi is not None else lo + 20
        lam = lo + (hi - lo) * Fraction(rng.randrange(1, 2 ** 16), 2 ** 16)
        pts.append(ArcPoint(a.id, lam))
    return pts


def _describe(x) -> str:
    if isinstance(x, ArcPoint):
        return f"arc {x.arc!r} at {x.lam}"
    return f"point {x!r}"


def verify_homeomorphism(space, result, density: int = 12, seed: int = 0) -> VerificationReport:
    """Exact junction limits, unit speed, and continuity of f and f^-1 over radii 2^-1..2^-density."""
    rep = VerificationReport(density=density)
    m: PLMapping = result.mapping
    cert = result.certificate

    bad = None
    for a in space.arcs:
        ps = m.arc_pieces(a.id)
        for p, q in zip(ps, ps[1:]):
            lp, lq = m.limit(p, p.hi), m.limit(q, q.lo)
            if lp != lq:
                bad = f"arc {a.id!r} jumps at {p.hi}: {_show(lp)} vs {_show(lq)}"
                break
        if bad:
            break
    rep.add("cut_limits", bad is None, bad)

    bad = None
    for a in space.arcs:
        ps = m.arc_pieces(a.id)
        lo, hi = arc_bounds(a)
        for which, lam, pc in ((LOW, lo, ps[0]), (HIGH, hi, ps[-1])):
            end = _arc_end(a, which)
            if lam is None or end is None:
                continue
            got = m.limit(pc, lam)
            if end.tau == AFFINE:
                want, tgt = m.image_point(end.limit), end.limit
            elif end.tau == GLUE:
                want, tgt = m.image_point(end.glue), end.glue
            else:
                if m.contains(got):
                    bad = f"arc {a.id!r} {which} end has no limit but its image converges to {_show(got)} in Y"
                continue
            if got != want:
                bad = (f"arc {a.id!r} {which} end should converge to f({tgt}) = {_show(want)}, "
                       f"image tends to {_show(got)}")
        if bad:
            break
    rep.add("end_limits", bad is None, bad)

    bad = None
    for j, b in enumerate(m.blocks):
        if len(b.path.vertices) > 1 and not unit_speed(b):
            bad = f"{b.kind} block {j} is not traversed at unit speed"
            break
    if bad is None:
        for e in cert.surgery:
            q, zeta, v = e["q"], e["zeta"], e["v"]
            lhs = 2 * taxicab(zeros(len(q)), q) + taxicab(zeta, q)
            if lhs != phi_rescale(v, cert.u, cert.n, cert.R):
                bad = f"rerouting of germ at {_show(e['germ'][0])} has length {lhs}, expected the rescaled {v}"
                break
    rep.add("isometry", bad is None, bad)

    pts = _sample_points(space, m, density, seed)
    images = {}
    clash = None
    for x in pts:
        y = _image_of(m, space, x)
        if y in images and images[y] != x:
            clash = f"{_describe(images[y])} and {_describe(x)} share the image {_show(y)}"
            break
        images[y] = x
    rep.add("sample_injective", clash is None, clash)

    radii = [Fraction(1, 2 ** j) for j in range(1, density + 1)]
    fwd = inv = None
    for x in pts:
        for r in radii:
            if fwd is None:
                delta = r
                for _ in range(64):
                    if _forward_sup(m, space, x, delta) < r:
                        break
                    delta /= 2
                else:
                    fwd = f"no neighbourhood of {_describe(x)} maps into the {r}-ball around its image"
            if inv is None:
                gap, where = _inverse_gap(m, space, x, r)
                if gap is not None and gap == 0:
                    inv = (f"images from {where} accumulate at f({_describe(x)}) outside "
                           f"its {r}-neighbourhood")
        if fwd and inv:
            break
    rep.add("forward_continuity", fwd is None, fwd)
    rep.add("inverse_continuity", inv is None, inv)

    if any(pc.lo is None or pc.hi is None for pc in m.pieces if pc.point is None):
        rep.add("properness", *_properness(space, m))
    return rep


def _properness(space, m: PLMapping):
    for pc in m.pieces:
        if pc.point is not None:
            continue
        for side in ("hi", "lo"):
            if getattr(pc, side) is not None:
                continue
            base = pc.lo if side == "hi" else pc.hi
            if base is None:
                base = ZERO
            sign = 1 if side == "hi" else -1
            arc = space.arc(pc.arc)
            src0, img0 = arc.at(base), m.blocks[pc.block].at(pc.sigma(base))
            prev_s = prev_t = ZERO
            for T in (10, 100, 1000):
                lam = base + sign * T
                ds = taxicab(arc.at(lam), src0)
                dt = taxicab(m.blocks[pc.block].at(pc.sigma(lam)), img0)
                if not (ds > prev_s and dt > prev_t):
                    return False, f"arc {pc.arc!r} image stalls at parameter {lam}"
                prev_s, prev_t = ds, dt
    return True, None


def verify(space, result, density: int = 12, seed: int = 0) -> VerificationReport:
    """The whole suite; homeomorphism checks run only after the bijection checks pass."""
    rep = verify_bijection(space, result)
    if rep.ok:
        rep = rep.merge(verify_homeomorphism(space, result, density, seed))
    rep.density = density
    return rep


# --------------------------------------------------------------------------
# shadows and crossings


def brute_force_shadows(space, x, schedule) -> set:
    """Points common to the affine closures of basic neighbourhoods over a shrinking schedule.

    Each closure is a finite union of closed sub-arcs; its vertex set keeps the
    points every closure must contain while the moving cut points drop out.
    """
    schedule = [Fraction(r) for r in schedule]
    if any(a <= b for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly decreasing")
    history = []
    common = None
    nb = None
    for r in schedule:
        nb = basic_neighborhood(space, x, r)
        pts = {nb.center}
        for path in nb.closure_pieces(space):
            pts.update(path.vertices)
        common = pts if common is None else common & pts
        history.append(common)
    if nb is None or any(iv.clipped for iv in nb.intervals):
        raise ScheduleTooCoarse("the smallest radius still reaches the middle of an arc")
    if len(history) < 2 or history[-1] != history[-2]:
        raise ScheduleTooCoarse("closures have not stabilized")
    return common


def bisection_crossing(g: PLFunction, h: PLFunction, u, tol, grid: int = 256) -> Fraction:
    """Leftmost sign change of g - h on (0, u), by a coarse scan then bisection."""
    u, tol = Fraction(u), Fraction(tol)
    if g(0) >= h(0) or g(u) <= h(u):
        raise NoCrossing("need g(0) < h(0) and g(u) > h(u)")

    def d(t):
        return g(t) - h(t)

    a = ZERO
    b = u
    for j in range(1, grid + 1):
        t = u * j / grid
        if d(t) >= 0:
            b = t
            break
        a = t
    while b - a > tol:
        mid = (a + b) / 2
        if d(mid) >= 0:
            b = mid
        else:
            a = mid
    return b
