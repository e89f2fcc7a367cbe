"""Built-in example spaces and a seeded generator of random accepted spaces."""
from __future__ import annotations

import random
from fractions import Fraction

from .exact import PLPath, vec
from .space import AFFINE, GLUE, NONE, Arc, EndSpec, PointEntry, SpaceDescription


def _pt(pid, coords, in_X=True, in_G=False):
    return PointEntry(pid, vec(coords), in_X, in_G)


def _arc(aid, vertices, low: EndSpec, high: EndSpec):
    return Arc(aid, PLPath.through(vertices, left_open=True, right_open=True), (low, high))


def _end(limit, points, tau=AFFINE, glue=None):
    member = next(p.in_X for p in points if p.id == limit)
    return EndSpec(limit, member, tau, glue)


def circle(g_in_G: bool = True) -> SpaceDescription:
    """A square loop whose loose end at z is glued back onto the singular point g."""
    pts = [_pt("g", (1, 1), True, g_in_G), _pt("z", (3, 1), False)]
    arcs = [_arc("a", [(1, 1), (1, 3), (3, 3), (3, 1)],
                 _end("g", pts), _end("z", pts, GLUE, "g"))]
    return SpaceDescription(2, pts, arcs)


def bad_glue() -> SpaceDescription:
    return circle(g_in_G=False)


def figure_eight() -> SpaceDescription:
    """Two arcs leaving g whose far ends are both glued back onto g."""
    pts = [_pt("g", (3, 3), True, True), _pt("z1", (1, 2), False), _pt("z2", (5, 2), False)]
    arcs = [
        _arc("a", [(3, 3), (1, 3), (1, 2)], _end("g", pts), _end("z1", pts, GLUE, "g")),
        _arc("b", [(3, 3), (5, 3), (5, 2)], _end("g", pts), _end("z2", pts, GLUE, "g")),
    ]
    return SpaceDescription(2, pts, arcs)


def no_limit() -> SpaceDescription:
    """An interval [1, 3] whose end at the singular point 1 converges nowhere."""
    pts = [_pt("g", (1,), True, True), _pt("w", (3,), True)]
    arcs = [_arc("a", [(1,), (3,)], _end("g", pts, NONE), _end("w", pts))]
    return SpaceDescription(1, pts, arcs)


def collision() -> SpaceDescription:
    """Two glued germs on the line whose rerouting blocks meet in one slot."""
    pts = [_pt("a", (2,), True, True), _pt("b", (3,), True, True),
           _pt("z2", (5,), False), _pt("e2", (6,), True),
           _pt("z1", (7,), False), _pt("e1", (8,), True)]
    arcs = [
        _arc("s", [(5,), (6,)], _end("z2", pts, GLUE, "a"), _end("e2", pts)),
        _arc("t", [(7,), (8,)], _end("z1", pts, GLUE, "b"), _end("e1", pts)),
    ]
    return SpaceDescription(1, pts, arcs)


def fan(arms: int = 5, declared_K: int | None = 3) -> SpaceDescription:
    """``arms`` arcs whose lower ends are all glued onto one isolated point."""
    pts = [_pt("g", (1, 1), True, True)]
    arcs = []
    for j in range(arms):
        x = 2 * j + 3
        pts += [_pt(f"z{j}", (x, 3), False), _pt(f"e{j}", (x, 4), True)]
    for j in range(arms):
        x = 2 * j + 3
        arcs.append(_arc(f"a{j}", [(x, 3), (x, 4)], _end(f"z{j}", pts, GLUE, "g"), _end(f"e{j}", pts)))
    return SpaceDescription(2, pts, arcs, declared_K=declared_K)


def plain() -> SpaceDescription:
    """No singular points: an L-shaped closed arc, an open segment and an isolated point."""
    pts = [_pt("p", (1, 1)), _pt("q", (2, 2)), _pt("r", (4, 1), False), _pt("s", (5, 2), False),
           _pt("i", (7, 7))]
    arcs = [
        _arc("a", [(1, 1), (2, 1), (2, 2)], _end("p", pts), _end("q", pts)),
        _arc("b", [(4, 1), (4, 2), (5, 2)], _end("r", pts, NONE), _end("s", pts, NONE)),
    ]
    return SpaceDescription(2, pts, arcs)


def self_glued() -> SpaceDescription:
    """A singular point where every end converges affinely: nothing to reroute."""
    pts = [_pt("g", (2, 2), True, True), _pt("e1", (1, 4)), _pt("e2", (4, 3))]
    arcs = [
        _arc("a", [(2, 2), (1, 2), (1, 4)], _end("g", pts), _end("e1", pts)),
        _arc("b", [(2, 2), (4, 2), (4, 3)], _end("g", pts, GLUE, "g"), _end("e2", pts)),
    ]
    return SpaceDescription(2, pts, arcs)


def rays():
    """Two half-lines leaving a missing origin, with no bounded part at all."""
    from .unbounded import ExtendedSpace, UnboundedArc

    pts = [_pt("o", (0, 0), False)]
    core = SpaceDescription(2, pts, [])
    arcs = [
        UnboundedArc("east", PLPath.through([(0, 0), (1, 0)]), vec((1, 0)), "half", _end("o", pts, NONE)),
        UnboundedArc("north", PLPath.through([(0, 0), (0, 1)]), vec((0, 1)), "half", _end("o", pts, NONE)),
    ]
    return ExtendedSpace(core, arcs)


def circle_ray():
    """The glued circle with a half-line attached at the singular point."""
    from .unbounded import ExtendedSpace, UnboundedArc

    core = circle()
    arcs = [UnboundedArc("ray", PLPath.through([(1, 1), (0, 1)]), vec((-1, 0)), "half",
                         _end("g", list(core.points)))]
    return ExtendedSpace(core, arcs)


def line():
    """A full line next to an isolated singular point."""
    from .unbounded import ExtendedSpace, UnboundedArc

    pts = [_pt("g", (5, 1), True, True)]
    core = SpaceDescription(2, pts, [])
    arcs = [UnboundedArc("l", PLPath.through([(0, 0), (1, 1)]), vec((1, 1)), "line")]
    return ExtendedSpace(core, arcs)


UNBOUNDED = {
    "rays": rays,
    "circle-ray": circle_ray,
    "line": line,
}

BOUNDED = {
    "circle": circle,
    "figure-eight": figure_eight,
    "no-limit": no_limit,
    "collision": collision,
    "plain": plain,
    "self": self_glued,
}

REJECTED = {
    "bad-glue": bad_glue,
    "fan": fan,
}


def fuzz_space(seed: int) -> SpaceDescription:
    """A random accepted space in the plane.

    Arcs live in disjoint vertical strips and climb strictly, so they never
    meet; singular points sit isolated to the right.  End behaviours are drawn
    at random among the combinations the criterion accepts.
    """
    rng = random.Random(seed)
    n_arcs = rng.randint(1, 4)
    n_sing = rng.randint(1, 3)
    pts = []
    sing = []
    for m in range(n_sing):
        pid = f"g{m}"
        pts.append(_pt(pid, (4 * (n_arcs + m) + 2, rng.randint(1, 9)), True, True))
        sing.append(pid)
    arcs = []
    pending = []
    for j in range(n_arcs):
        left = 4 * j + 1
        k = rng.randint(2, 4)
        ys = sorted(rng.sample(range(2, 40), k))
        verts = [(left + Fraction(rng.randint(0, 8), 4), Fraction(y)) for y in ys]
        ends = []
        for side, v in (("lo", verts[0]), ("hi", verts[-1])):
            pid = f"{side}{j}"
            kind = rng.choice(["regular", "frontier_glue", "frontier_none", "sing_affine",
                               "sing_none", "sing_glue", "frontier_glue"])
            if kind == "regular":
                pts.append(_pt(pid, v))
                ends.append((pid, AFFINE, None))
            elif kind == "frontier_glue":
                pts.append(_pt(pid, v, False))
                ends.append((pid, GLUE, rng.choice(sing)))
            elif kind == "frontier_none":
                pts.append(_pt(pid, v, False))
                ends.append((pid, NONE, None))
            elif kind == "sing_affine":
                pts.append(_pt(pid, v, True, True))
                ends.append((pid, AFFINE, None))
            elif kind == "sing_none":
                pts.append(_pt(pid, v, True, True))
                ends.append((pid, NONE, None))
            else:
                pts.append(_pt(pid, v, True, True))
                ends.append((pid, GLUE, rng.choice(sing)))
        pending.append((f"a{j}", verts, ends))
    for aid, verts, ends in pending:
        (l_id, l_tau, l_g), (h_id, h_tau, h_g) = ends
        arcs.append(_arc(aid, verts, _end(l_id, pts, l_tau, l_g), _end(h_id, pts, h_tau, h_g)))
    return SpaceDescription(2, pts, arcs)
