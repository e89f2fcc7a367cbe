"""Exact rational geometry in Q^n.

Scalars are :class:`fractions.Fraction`, points are tuples of them.  Nothing in
this module touches floating point; every predicate is decided exactly.
"""
from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DimensionMismatch,
    MalformedPath,
    NoCrossing,
    NotOnPath,
    ParameterOutOfRange,
)

Scalar = Fraction
Vec = tuple

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def scalar(x) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction; floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        if not _RATIONAL_RE.match(x):
            raise ValueError(f"not a rational literal: {x!r}")
        return Fraction(x.replace(" ", ""))
    raise TypeError(f"not an exact rational: {x!r}")


def vec(coords: Iterable) -> Vec:
    return tuple(scalar(c) for c in coords)


def fmt(x: Fraction) -> str:
    return str(x)


def zeros(n: int) -> Vec:
    return (ZERO,) * n


def add(p: Vec, q: Vec) -> Vec:
    return tuple(a + b for a, b in zip(p, q))


def sub(p: Vec, q: Vec) -> Vec:
    return tuple(a - b for a, b in zip(p, q))


def scale(p: Vec, c: Fraction) -> Vec:
    return tuple(a * c for a in p)


def dot(p: Vec, q: Vec) -> Fraction:
    return sum((a * b for a, b in zip(p, q)), ZERO)


def norm1(p: Vec) -> Fraction:
    return sum((abs(a) for a in p), ZERO)


def taxicab(p: Vec, q: Vec) -> Fraction:
    """Sum of absolute coordinate differences."""
    if len(p) != len(q):
        raise DimensionMismatch(f"dimensions {len(p)} and {len(q)} differ")
    return sum((abs(a - b) for a, b in zip(p, q)), ZERO)


def lerp(p: Vec, q: Vec, s: Fraction) -> Vec:
    return tuple(a + (b - a) * s for a, b in zip(p, q))


# --------------------------------------------------------------------------
# piecewise-linear paths


@dataclass(frozen=True)
class PLPath:
    """Parametrized polyline.  ``left_open``/``right_open`` exclude the end vertices."""

    params: tuple
    vertices: tuple
    left_open: bool = False
    right_open: bool = False

    def __post_init__(self):
        params = tuple(scalar(t) for t in self.params)
        vertices = tuple(vec(v) for v in self.vertices)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "vertices", vertices)
        if not vertices or len(params) != len(vertices):
            raise MalformedPath("params and vertices must be non-empty and of equal length")
        dim = len(vertices[0])
        if any(len(v) != dim for v in vertices):
            raise DimensionMismatch("path vertices have mixed dimensions")
        for a, b in zip(params, params[1:]):
            if not a < b:
                raise MalformedPath("params must be strictly increasing")
        for a, b in zip(vertices, vertices[1:]):
            if a == b:
                raise MalformedPath(f"repeated consecutive vertex {_show(a)}")
        if len(vertices) == 1 and (self.left_open or self.right_open):
            raise MalformedPath("a single-point path cannot have open ends")
        hit = _self_intersection(self)
        if hit is not None:
            raise MalformedPath(f"path is not injective near {_show(hit)}")

    @classmethod
    def _derived(cls, params, vertices, left_open=False, right_open=False) -> "PLPath":
        """Build a path known to be injective (cut, reversed or moved from one that is)."""
        obj = cls.__new__(cls)
        for name, value in (("params", tuple(params)), ("vertices", tuple(vertices)),
                            ("left_open", left_open), ("right_open", right_open)):
            object.__setattr__(obj, name, value)
        return obj

    @classmethod
    def through(cls, vertices: Sequence, start=ZERO, left_open=False, right_open=False) -> "PLPath":
        """Polyline parametrized by cumulative taxicab length starting at ``start``."""
        vertices = [vec(v) for v in vertices]
        params = [scalar(start)]
        for a, b in zip(vertices, vertices[1:]):
            params.append(params[-1] + taxicab(a, b))
        return cls(tuple(params), tuple(vertices), left_open, right_open)

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    @property
    def start(self) -> Fraction:
        return self.params[0]

    @property
    def end(self) -> Fraction:
        return self.params[-1]

    @property
    def segments(self):
        return list(zip(self.vertices, self.vertices[1:]))

    def contains_param(self, t: Fraction) -> bool:
        if t < self.start or t > self.end:
            return False
        if t == self.start and self.left_open:
            return False
        if t == self.end and self.right_open:
            return False
        return True

    def taxicab_length(self) -> Fraction:
        return sum((taxicab(a, b) for a, b in self.segments), ZERO)

    def bbox(self):
        lo = tuple(min(c) for c in zip(*self.vertices))
        hi = tuple(max(c) for c in zip(*self.vertices))
        return lo, hi


def _show(v) -> str:
    return "(" + ", ".join(str(c) for c in v) + ")"


def pl_eval(path: PLPath, t) -> Vec:
    """Exact linear interpolation; the open/closed flags are ignored here."""
    t = scalar(t)
    ps = path.params
    if t < ps[0] or t > ps[-1]:
        raise ParameterOutOfRange(f"{t} outside [{ps[0]}, {ps[-1]}]")
    j = bisect_right(ps, t) - 1
    if j >= len(ps) - 1:
        return path.vertices[-1]
    a, b = ps[j], ps[j + 1]
    if t == a:
        return path.vertices[j]
    return lerp(path.vertices[j], path.vertices[j + 1], (t - a) / (b - a))


def pl_limit(path: PLPath, end: str) -> Vec:
    if end == "low":
        return path.vertices[0]
    if end == "high":
        return path.vertices[-1]
    raise ValueError(f"end must be 'low' or 'high', not {end!r}")


def pl_inverse(path: PLPath, x: Vec) -> Fraction:
    """The parameter at which ``path`` passes through ``x``."""
    x = vec(x)
    if len(x) != path.dim:
        raise DimensionMismatch("point and path dimensions differ")
    for j, v in enumerate(path.vertices):
        if v == x:
            return path.params[j]
    for j, (a, b) in enumerate(path.segments):
        s = _param_on_segment(a, b, x)
        if s is not None:
            return path.params[j] + s * (path.params[j + 1] - path.params[j])
    raise NotOnPath(f"{_show(x)} is not on the path")


def subpath(path: PLPath, a, b, left_open=False, right_open=False) -> PLPath:
    """Restriction of ``path`` to the parameter window [a, b]."""
    a, b = scalar(a), scalar(b)
    if a > b or a < path.start or b > path.end:
        raise ParameterOutOfRange(f"[{a}, {b}] not inside [{path.start}, {path.end}]")
    if a == b:
        return PLPath((a,), (pl_eval(path, a),))
    params = [a] + [t for t in path.params if a < t < b] + [b]
    vertices = [pl_eval(path, t) for t in params]
    if a == path.start and b == path.end:
        return PLPath(tuple(params), tuple(vertices), left_open, right_open)
    return PLPath._derived(tuple(params), tuple(vertices), left_open, right_open)


def reverse_path(path: PLPath) -> PLPath:
    """Same image traversed backwards over the same parameter window."""
    s, e = path.start, path.end
    params = tuple(s + e - t for t in reversed(path.params))
    return PLPath._derived(params, tuple(reversed(path.vertices)), path.right_open, path.left_open)


def translate_path(path: PLPath, offset: Vec) -> PLPath:
    return PLPath._derived(path.params, tuple(add(v, offset) for v in path.vertices),
                           path.left_open, path.right_open)


# --------------------------------------------------------------------------
# exact intersection predicates


def _first_nonzero(u: Vec):
    for k, c in enumerate(u):
        if c != 0:
            return k
    return None


def _parallel(u: Vec, w: Vec) -> bool:
    k = _first_nonzero(u)
    if k is None:
        return True
    c = w[k] / u[k]
    return all(wi == c * ui for ui, wi in zip(u, w))


def _param_on_line(o: Vec, d: Vec, x: Vec):
    """s with o + s*d == x, or None."""
    k = _first_nonzero(d)
    if k is None:
        return ZERO if o == x else None
    s = (x[k] - o[k]) / d[k]
    if all(oi + s * di == xi for oi, di, xi in zip(o, d, x)):
        return s
    return None


def _param_on_segment(a: Vec, b: Vec, x: Vec):
    s = _param_on_line(a, sub(b, a), x)
    if s is None or s < 0 or s > 1:
        return None
    return s


def _in_range(s, hi) -> bool:
    return s >= 0 and (hi is None or s <= hi)


def linear_pieces_meet(a0: Vec, u: Vec, a_hi, b0: Vec, w: Vec, b_hi):
    """Intersect {a0 + s*u : 0<=s<=a_hi} with {b0 + t*w : 0<=t<=b_hi}.

    ``a_hi``/``b_hi`` may be None for rays.  Returns None,
    ``("point", s, t)`` or ``("overlap", (s0, s1), (t0, t1))``.
    """
    r = sub(b0, a0)
    uu, ww = dot(u, u), dot(w, w)
    if uu == 0 or ww == 0:
        if uu == 0 and ww == 0:
            return ("point", ZERO, ZERO) if a0 == b0 else None
        if uu == 0:
            t = _param_on_line(b0, w, a0)
            return ("point", ZERO, t) if t is not None and _in_range(t, b_hi) else None
        s = _param_on_line(a0, u, b0)
        return ("point", s, ZERO) if s is not None and _in_range(s, a_hi) else None

    if _parallel(u, w):
        if not _parallel(u, r):
            return None
        # collinear: describe b's extent in a's parameter
        s0 = dot(r, u) / uu
        slope = dot(w, u) / uu  # ds/dt
        if b_hi is None:
            if slope > 0:
                lo, hi = s0, None
            else:
                lo, hi = None, s0
        else:
            s1 = s0 + slope * b_hi
            lo, hi = min(s0, s1), max(s0, s1)
        lo = ZERO if lo is None else max(ZERO, lo)
        if a_hi is not None:
            hi = a_hi if hi is None else min(a_hi, hi)
        if hi is not None and lo > hi:
            return None
        if hi is None:
            # two rays heading the same way: report the start of the overlap only
            hi = lo + 1

        def t_of(s):
            return (s - s0) / slope

        if lo == hi:
            return ("point", lo, t_of(lo))
        return ("overlap", (lo, hi), (t_of(lo), t_of(hi)))

    n = len(u)
    for i in range(n):
        for j in range(i + 1, n):
            det = u[j] * w[i] - u[i] * w[j]
            if det != 0:
                s = (w[i] * r[j] - r[i] * w[j]) / det
                t = (u[i] * r[j] - u[j] * r[i]) / det
                if not (_in_range(s, a_hi) and _in_range(t, b_hi)):
                    return None
                if add(a0, scale(u, s)) != add(b0, scale(w, t)):
                    return None
                return ("point", s, t)
    return None  # unreachable: non-parallel vectors have a non-zero minor


def _boxes_apart(a0, a1, b0, b1) -> bool:
    for x0, x1, y0, y1 in zip(a0, a1, b0, b1):
        if x0 <= x1:
            xlo, xhi = x0, x1
        else:
            xlo, xhi = x1, x0
        if y0 <= y1:
            ylo, yhi = y0, y1
        else:
            ylo, yhi = y1, y0
        if xhi < ylo or yhi < xlo:
            return True
    return False


def segments_meet(a0, a1, b0, b1):
    if _boxes_apart(a0, a1, b0, b1):
        return None
    return linear_pieces_meet(a0, sub(a1, a0), ONE, b0, sub(b1, b0), ONE)


@dataclass(frozen=True)
class Intersection:
    """A common point (``kind == "point"``) or a shared sub-segment (``"overlap"``)."""

    kind: str
    points: tuple
    a_params: tuple
    b_params: tuple


def _path_segments(path: PLPath):
    if len(path.vertices) == 1:
        v = path.vertices[0]
        return [(v, v, path.params[0], path.params[0])]
    return [(path.vertices[j], path.vertices[j + 1], path.params[j], path.params[j + 1])
            for j in range(len(path.vertices) - 1)]


def pl_intersections(a: PLPath, b: PLPath) -> list:
    """All common points of the closed images of ``a`` and ``b``."""
    if a.dim != b.dim:
        raise DimensionMismatch("paths live in different dimensions")
    alo, ahi = a.bbox()
    blo, bhi = b.bbox()
    if _boxes_apart(alo, ahi, blo, bhi):
        return []
    overlaps, points = [], {}
    for a0, a1, ta0, ta1 in _path_segments(a):
        for b0, b1, tb0, tb1 in _path_segments(b):
            hit = segments_meet(a0, a1, b0, b1)
            if hit is None:
                continue
            if hit[0] == "point":
                _, s, t = hit
                p = lerp(a0, a1, s) if a0 != a1 else a0
                points.setdefault(p, (ta0 + s * (ta1 - ta0), tb0 + t * (tb1 - tb0)))
            else:
                _, (s0, s1), (t0, t1) = hit
                overlaps.append(Intersection(
                    "overlap", (lerp(a0, a1, s0), lerp(a0, a1, s1)),
                    (ta0 + s0 * (ta1 - ta0), ta0 + s1 * (ta1 - ta0)),
                    (tb0 + t0 * (tb1 - tb0), tb0 + t1 * (tb1 - tb0))))
    out = list(overlaps)
    for p, (ta, tb) in points.items():
        if any(min(o.a_params) <= ta <= max(o.a_params) for o in overlaps):
            continue
        out.append(Intersection("point", (p,), (ta,), (tb,)))
    out.sort(key=lambda r: (min(r.a_params), r.kind))
    return out


def _self_intersection(path: PLPath):
    segs = path.segments
    m = len(segs)
    closed_loop = m >= 2 and path.vertices[0] == path.vertices[-1]
    steps = [sub(b, a) for a, b in segs]
    for i in range(m - 1):
        # consecutive segments share a vertex; they meet elsewhere only by folding back
        if _parallel(steps[i], steps[i + 1]) and dot(steps[i], steps[i + 1]) < 0:
            return segs[i][1]
    for i in range(m):
        for j in range(i + 2, m):
            hit = segments_meet(segs[i][0], segs[i][1], segs[j][0], segs[j][1])
            if hit is None:
                continue
            if hit[0] == "overlap":
                return lerp(segs[i][0], segs[i][1], hit[1][0])
            _, s, t = hit
            if closed_loop and i == 0 and j == m - 1 and s == 0 and t == 1 \
                    and path.left_open and path.right_open:
                continue
            return lerp(segs[i][0], segs[i][1], s)
    return None


# --------------------------------------------------------------------------
# taxicab staircase connections


def std_connection(p: Vec, q: Vec, *, uniform_segments: bool = False) -> PLPath:
    """Axis-parallel staircase from p to q that fixes the last coordinate first.

    Parametrized at unit taxicab speed over [0, d(p, q)].  ``uniform_segments``
    instead gives every segment an equal share of that window (fault hook).
    """
    p, q = vec(p), vec(q)
    if len(p) != len(q):
        raise DimensionMismatch("endpoints of a standard connection differ in dimension")
    n = len(p)
    pts = [p]
    for j in range(1, n + 1):
        v = p[: n - j] + q[n - j:]
        if v != pts[-1]:
            pts.append(v)
    path = PLPath.through(pts)
    if uniform_segments and len(pts) > 2:
        total = path.end
        m = len(pts) - 1
        path = PLPath(tuple(total * j / m for j in range(m + 1)), path.vertices)
    return path


def psi(t, p: Vec, q: Vec) -> Vec:
    """Point at taxicab distance ``t`` along the standard connection from p to q."""
    t = scalar(t)
    d = taxicab(p, q)
    if t < 0 or t > d:
        raise ParameterOutOfRange(f"psi parameter {t} outside [0, {d}]")
    return pl_eval(std_connection(p, q), t)


def phi_rescale(t, u, n: int, R) -> Fraction:
    """Increasing linear homeomorphism [0, u] -> [0, 3nR]."""
    t, u, R = scalar(t), scalar(u), scalar(R)
    if u <= 0 or R <= 0:
        raise ValueError("u and R must be positive")
    if t < 0 or t > u:
        raise ParameterOutOfRange(f"{t} outside [0, {u}]")
    return 3 * n * R * t / u


def phi_inverse(s, u, n: int, R) -> Fraction:
    s, u, R = scalar(s), scalar(u), scalar(R)
    top = 3 * n * R
    if s < 0 or s > top:
        raise ParameterOutOfRange(f"{s} outside [0, {top}]")
    return s * u / top


# --------------------------------------------------------------------------
# piecewise-linear functions of one variable


@dataclass(frozen=True)
class PLFunction:
    params: tuple
    values: tuple

    def __post_init__(self):
        params = tuple(scalar(t) for t in self.params)
        values = tuple(scalar(v) for v in self.values)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "values", values)
        if not params or len(params) != len(values):
            raise MalformedPath("PLFunction needs matching, non-empty breakpoints")
        for a, b in zip(params, params[1:]):
            if not a < b:
                raise MalformedPath("breakpoints must be strictly increasing")

    @classmethod
    def linear(cls, t0, v0, t1, v1) -> "PLFunction":
        return cls((t0, t1), (v0, v1))

    def __call__(self, t) -> Fraction:
        t = scalar(t)
        ps, vs = self.params, self.values
        if t < ps[0] or t > ps[-1]:
            raise ParameterOutOfRange(f"{t} outside [{ps[0]}, {ps[-1]}]")
        j = bisect_right(ps, t) - 1
        if j >= len(ps) - 1:
            return vs[-1]
        return vs[j] + (vs[j + 1] - vs[j]) * (t - ps[j]) / (ps[j + 1] - ps[j])

    @property
    def domain(self):
        return self.params[0], self.params[-1]

    def is_increasing(self) -> bool:
        return all(a < b for a, b in zip(self.values, self.values[1:]))

    def inverse(self, y) -> Fraction:
        """Preimage of ``y`` under a strictly increasing function."""
        y = scalar(y)
        vs, ps = self.values, self.params
        if len(vs) == 1:
            if y == vs[0]:
                return ps[0]
            raise ParameterOutOfRange(f"{y} not attained")
        if y < vs[0] or y > vs[-1]:
            raise ParameterOutOfRange(f"{y} outside [{vs[0]}, {vs[-1]}]")
        j = bisect_right(vs, y) - 1
        if j >= len(vs) - 1:
            return ps[-1]
        return ps[j] + (ps[j + 1] - ps[j]) * (y - vs[j]) / (vs[j + 1] - vs[j])

    def max_slope(self) -> Fraction:
        return max((abs((b - a) / (q - p)) for p, q, a, b in
                    zip(self.params, self.params[1:], self.values, self.values[1:])), default=ZERO)

    def min_slope(self) -> Fraction:
        return min((abs((b - a) / (q - p)) for p, q, a, b in
                    zip(self.params, self.params[1:], self.values, self.values[1:])), default=ZERO)


def solve_first_crossing(g: PLFunction, h: PLFunction, u) -> Fraction:
    """Smallest t in (0, u) with g(t) == h(t), given g(0) < h(0) and g(u) > h(u)."""
    u = scalar(u)
    if g(0) >= h(0) or g(u) <= h(u):
        raise NoCrossing("need g(0) < h(0) and g(u) > h(u)")
    cuts = sorted({ZERO, u} | {t for t in g.params + h.params if 0 < t < u})
    prev_t, prev_d = cuts[0], g(cuts[0]) - h(cuts[0])
    for t in cuts[1:]:
        d = g(t) - h(t)
        if d >= 0:
            return prev_t + (t - prev_t) * (-prev_d) / (d - prev_d)
        prev_t, prev_d = t, d
    raise NoCrossing("no crossing found")  # unreachable given the endpoint signs
