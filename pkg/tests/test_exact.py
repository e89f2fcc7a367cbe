from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affine_glue.errors import MalformedPath, NoCrossing, ParameterOutOfRange
from affine_glue.exact import (
    PLFunction,
    PLPath,
    linear_pieces_meet,
    phi_inverse,
    phi_rescale,
    pl_eval,
    pl_intersections,
    pl_inverse,
    pl_limit,
    psi,
    scalar,
    std_connection,
    subpath,
    solve_first_crossing,
    taxicab,
)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def points(n):
    return st.tuples(*[rationals] * n)


class TestScalars:
    def test_strings_and_ints(self):
        assert scalar("3/6") == Q(1, 2)
        assert scalar(" -7 ") == -7
        assert scalar(4) == 4

    @pytest.mark.parametrize("bad", [0.5, "0.5", "1e3", True, None, "1/0x"])
    def test_inexact_input_refused(self, bad):
        with pytest.raises((TypeError, ValueError)):
            scalar(bad)


class TestTaxicab:
    def test_examples(self):
        assert taxicab((1, 2), (4, 0)) == 5
        assert taxicab((0, 0), (1, 2)) == 3
        p = (Q(1, 3), Q(-2))
        assert taxicab(p, p) == 0

    @given(points(3), points(3), points(3))
    def test_metric(self, p, q, r):
        assert taxicab(p, q) == taxicab(q, p)
        assert taxicab(p, r) <= taxicab(p, q) + taxicab(q, r)


class TestStd:
    def test_last_coordinate_first(self):
        assert std_connection((0, 0), (1, 2)).vertices == ((0, 0), (0, 2), (1, 2))

    def test_single_point(self):
        path = std_connection((3, 1), (3, 1))
        assert path.vertices == ((3, 1),)

    def test_degenerate_segment_dropped(self):
        path = std_connection((1, 1), (2, 1))
        assert path.vertices == ((1, 1), (2, 1))
        assert sum(taxicab(a, b) for a, b in path.segments) == taxicab((1, 1), (2, 1))

    @given(points(3), points(3))
    def test_length_is_taxicab(self, p, q):
        path = std_connection(p, q)
        assert path.end == taxicab(p, q)
        assert sum((taxicab(a, b) for a, b in path.segments), Q(0)) == taxicab(p, q)
        assert path.vertices[0] == p and path.vertices[-1] == q
        # every step is axis-parallel
        for a, b in path.segments:
            assert sum(1 for x, y in zip(a, b) if x != y) == 1

    def test_uniform_segments_is_not_unit_speed(self):
        path = std_connection((0, 0), (1, 3), uniform_segments=True)
        assert path.params == (0, 2, 4)


class TestPsi:
    def test_examples(self):
        p, q = (0, 0), (1, 2)
        assert psi(0, p, q) == p
        assert psi(taxicab(p, q), p, q) == q
        assert psi(2, p, q) == (0, 2)

    @given(points(2), points(2), st.fractions(0, 1))
    def test_unit_speed(self, p, q, frac):
        t = frac * taxicab(p, q)
        x = psi(t, p, q)
        assert taxicab(p, x) == t
        assert taxicab(x, q) == taxicab(p, q) - t


class TestPhi:
    def test_examples(self):
        assert phi_rescale(0, 1, 1, 10) == 0
        assert phi_rescale(1, 1, 1, 10) == 30
        assert phi_rescale(Q(1, 2), 1, 1, 10) == 15
        assert phi_rescale(Q(3, 4), Q(3, 4), 2, 8) == 3 * 2 * 8

    @given(st.fractions(0, 1), st.integers(1, 4), st.fractions(1, 50))
    def test_inverse(self, frac, n, R):
        u = Q(1, 3)
        t = frac * u
        assert phi_inverse(phi_rescale(t, u, n, R), u, n, R) == t


class TestPaths:
    def test_eval(self):
        assert pl_eval(PLPath((0, 1), ((0, 0), (2, 0))), Q(1, 2)) == (1, 0)
        assert pl_eval(PLPath((0, 2), ((0, 0), (0, 4))), Q(3, 2)) == (0, 3)
        path = PLPath.through([(0, 0), (2, 0), (2, 3)])
        assert pl_eval(path, 2) == (2, 0)
        with pytest.raises(ParameterOutOfRange):
            pl_eval(path, 6)

    def test_limits(self):
        path = PLPath((0, 1), ((1, 1), (2, 2)))
        assert pl_limit(path, "low") == (1, 1)
        assert pl_limit(path, "high") == (2, 2)

    def test_inverse_at_vertices_and_midpoints(self):
        path = PLPath((0, 1, 5), ((0, 0), (1, 0), (1, 2)))
        for t, v in zip(path.params, path.vertices):
            assert pl_inverse(path, v) == t
        assert pl_inverse(path, (1, 1)) == 3

    def test_rejects_self_intersection(self):
        with pytest.raises(MalformedPath):
            PLPath.through([(0, 0), (2, 0), (2, 1), (1, 1), (1, -1)])
        with pytest.raises(MalformedPath):
            PLPath.through([(0, 0), (2, 0), (1, 0)])

    def test_closed_loop_needs_open_ends(self):
        square = [(1, 1), (1, 3), (3, 3), (3, 1), (1, 1)]
        PLPath.through(square, left_open=True, right_open=True)
        with pytest.raises(MalformedPath):
            PLPath.through(square)

    def test_subpath(self):
        path = PLPath.through([(0, 0), (2, 0), (2, 2)])
        s = subpath(path, 1, 3, True, False)
        assert s.vertices == ((1, 0), (2, 0), (2, 1))
        assert s.left_open and not s.right_open


@st.composite
def staircases(draw):
    n = draw(st.integers(2, 6))
    steps = draw(st.lists(st.tuples(st.integers(1, 5), st.integers(1, 5)), min_size=n, max_size=n))
    x = y = 0
    verts = [(0, 0)]
    for j, (a, b) in enumerate(steps):
        x, y = (x + a, y) if j % 2 == 0 else (x, y + b)
        verts.append((x, y))
    return PLPath.through(verts)


@settings(max_examples=60)
@given(staircases(), st.data())
def test_inverse_round_trip(path, data):
    for _ in range(17):
        t = data.draw(st.fractions(path.start, path.end, max_denominator=97))
        assert pl_inverse(path, pl_eval(path, t)) == t


class TestIntersections:
    def test_disjoint_parallel(self):
        a = PLPath.through([(0, 0), (2, 0)])
        b = PLPath.through([(0, 1), (2, 1)])
        assert pl_intersections(a, b) == []

    def test_crossing(self):
        a = PLPath.through([(0, 0), (2, 2)])
        b = PLPath.through([(0, 2), (2, 0)])
        (hit,) = pl_intersections(a, b)
        assert hit.kind == "point" and hit.points == ((1, 1),)

    def test_collinear_overlap_against_grid(self):
        a = PLPath.through([(0, 0), (4, 0)])
        b = PLPath.through([(3, 0), (6, 0)])
        (hit,) = pl_intersections(a, b)
        assert hit.kind == "overlap" and hit.points == ((3, 0), (4, 0))
        # brute force: grid points of a that also lie on b
        on_both = [t for t in (Q(j, 8) for j in range(33))
                   if pl_eval(a, t)[0] >= 3 and pl_eval(a, t)[0] <= 6]
        assert (min(on_both), max(on_both)) == hit.a_params

    def test_rays(self):
        hit = linear_pieces_meet((0, 0), (1, 0), None, (5, -1), (0, 1), None)
        assert hit == ("point", 5, 1)
        assert linear_pieces_meet((0, 0), (1, 0), None, (-5, -1), (0, 1), None) is None


class TestCrossing:
    def test_symmetric(self):
        g = PLFunction.linear(0, 0, 2, 2)
        h = PLFunction.linear(0, 1, 2, -1)
        assert solve_first_crossing(g, h, 2) == Q(1, 2)

    def test_rescaling_against_dprime(self):
        g = PLFunction.linear(0, 0, 1, 30)
        h = PLFunction.linear(0, 10, 1, 13)
        assert solve_first_crossing(g, h, 1) == Q(10, 27)

    def test_touching_only_at_the_boundary(self):
        g = PLFunction.linear(0, 0, 1, 1)
        h = PLFunction.linear(0, 1, 1, 1)
        with pytest.raises(NoCrossing):
            solve_first_crossing(g, h, 1)

    def test_leftmost_of_several(self):
        g = PLFunction((0, 1, 2, 3), (0, 2, 0, 5))
        h = PLFunction.linear(0, 1, 3, 1)
        assert solve_first_crossing(g, h, 3) == Q(1, 2)
