from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

from affine_glue import fixtures as F
from affine_glue.embedder import (
    Layout,
    affinize,
    block_offsets,
    build_no_limit_block,
    build_surgery_blocks,
    compute_dprime,
    compute_v_q,
    no_limit_offsets,
)
from affine_glue.errors import CriterionRejected, IndexOutOfRange
from affine_glue.exact import PLPath, phi_rescale, psi, taxicab, zeros
from affine_glue.mapping import frontier_points, unit_speed
from affine_glue.oracle import block_collisions, bisection_crossing
from affine_glue.exact import PLFunction

from conftest import embedded


def line_germ():
    """gamma(t) = 4 + t on [0, 1]."""
    return PLPath.through([(4,), (5,)])


class TestDprime:
    def test_at_base(self):
        d = compute_dprime(line_germ(), (2,))
        assert d(0) == taxicab((2,), (4,)) + 2 * taxicab((0,), (4,))

    def test_worked_line(self):
        d = compute_dprime(line_germ(), (2,))
        for t in (Q(0), Q(1, 3), Q(1, 2), Q(1)):
            assert d(t) == 10 + 3 * t

    def test_breaks_where_a_coordinate_crosses_zeta(self):
        germ = PLPath.through([(3, 1), (1, 1)])
        d = compute_dprime(germ, (2, 5))
        assert 1 in d.params
        for t in (Q(0), Q(1, 2), Q(1), Q(3, 2), Q(2)):
            x = (3 - t, 1)
            assert d(t) == taxicab((2, 5), x) + 2 * taxicab((0, 0), x)

    def test_below_the_rescaled_bound(self):
        space, res = embedded("circle")
        t = res.table
        for g in t.by_kind("glue"):
            d = compute_dprime(g, space.coords(g.target))
            assert d(t.u) < phi_rescale(t.u, t.u, space.n, t.R)


class TestVQ:
    def test_worked_line(self):
        v, q = compute_v_q(line_germ(), (2,), 1, 1, 10)
        assert v == Q(10, 27)
        assert q == (Q(118, 27),)

    def test_bisection_agrees(self):
        g = PLFunction.linear(0, 0, 1, 30)
        h = compute_dprime(line_germ(), (2,))
        approx = bisection_crossing(g, h, 1, Q(1, 2 ** 40))
        assert abs(approx - Q(10, 27)) <= Q(1, 2 ** 40)

    @pytest.mark.parametrize("seed", range(25))
    def test_strictly_inside_the_germ(self, seed):
        space = F.fuzz_space(seed)
        res = affinize(space)
        for e in res.plan.surgery:
            assert 0 < e.v < res.table.u


class TestOffsets:
    def test_first_and_last(self):
        K, N, n = 3, 2, 2
        assert block_offsets(1, 1, K, N, n) == (0, n * (K * N - 1))
        assert block_offsets(N, K, K, N, n) == (n * (K * N - 1), 0)

    @given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 3), st.data())
    def test_padding_adds_up(self, K, N, n, data):
        i = data.draw(st.integers(1, N))
        k = data.draw(st.integers(1, K))
        m1, m2 = block_offsets(i, k, K, N, n)
        assert m1 + m2 == n * (K * N - 1)
        assert min(m1, m2) >= 0

    @given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 3), st.data())
    def test_no_limit_padding_fills_the_space(self, K, N, n, data):
        i = data.draw(st.integers(1, N))
        m1, m2 = no_limit_offsets(i, K, N, n)
        assert n + m1 + 1 + m2 == n * (1 + K * N)
        w1, w2 = no_limit_offsets(i, K, N, n, wide=True)
        assert n + w1 + 1 + w2 > n * (1 + K * N)

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            block_offsets(0, 1, 1, 1, 1)
        with pytest.raises(IndexOutOfRange):
            block_offsets(1, 3, 2, 1, 1)


class TestSurgeryBlocks:
    def test_circle(self):
        space, res = embedded("circle")
        (e,) = res.plan.surgery
        layout = Layout(2, 1, 1)
        b1, b2, b3 = build_surgery_blocks(e, layout)
        assert all(b.dim == 4 for b in (b1, b2, b3))
        # junctions: f(g) -> slot reaches q -> across to q -> back down to the base copy of q
        assert b1.path.vertices[0] == (1, 1, 0, 0)
        assert b1.path.vertices[-1] == b2.path.vertices[0] == (1, 1) + e.q
        assert b2.path.vertices[-1] == b3.path.vertices[0] == e.q + e.q
        assert b3.path.vertices[-1] == e.q + (0, 0)
        assert all(unit_speed(b) for b in (b1, b2, b3))

    def test_total_length_is_rescaled_v(self):
        for name in ("circle", "figure-eight", "collision"):
            space, res = embedded(name)
            t = res.table
            for e in res.plan.surgery:
                total = 2 * taxicab(zeros(space.n), e.q) + taxicab(e.zeta, e.q)
                assert total == phi_rescale(e.v, t.u, space.n, t.R)

    def test_one_dimensional_blocks_are_intervals(self):
        space, res = embedded("collision")
        for e in res.plan.surgery:
            for b in build_surgery_blocks(e, Layout(1, 2, 1)):
                assert len(b.path.vertices) == 2


class TestNoLimit:
    def test_block(self):
        space, res = embedded("no-limit")
        (e,) = res.plan.no_limit
        u = res.table.u
        blk = build_no_limit_block(e, Layout(1, 1, 1), u)
        p = e.anchor
        assert p == (1 + u,)
        assert blk.path.vertices == (p + (u,), p + (0,))
        assert blk.path.left_open and blk.path.right_open

    def test_frontier(self):
        space, res = embedded("no-limit")
        u = res.table.u
        m = res.mapping
        p = 1 + u
        assert frontier_points(m) == [(p, u)]
        pc = m.arc_pieces("a")[0]
        # towards the base the image runs off to (p, u); at t = u it meets f(p) = (p, 0)
        assert m.limit(pc, 0) == (p, u)
        assert m.limit(pc, u) == (p, 0) == m.image("a", u)


class TestBuildMap:
    def test_identity_without_singular_points(self):
        space, res = embedded("plain")
        assert res.dimension == 2
        m = res.mapping
        assert m.image_point("i") == (7, 7)
        assert m.image("a", Q(3, 2)) == (2, Q(3, 2))

    def test_junction_limits(self):
        space, res = embedded("circle")
        m = res.mapping
        pieces = m.arc_pieces("a")
        assert m.limit(pieces[-1], pieces[-1].hi) == m.image_point("g")
        for p, q in zip(pieces, pieces[1:]):
            assert m.limit(p, p.hi) == m.limit(q, q.lo)

    def test_middle_of_the_crossing_branch(self):
        space, res = embedded("circle")
        (e,) = res.plan.surgery
        t = res.table
        s = e.d1 + e.d2 / 2
        lam_from_end = phi_rescale_inverse(s, t)
        L = space.arc("a").length
        y = res.mapping.image("a", L - lam_from_end)
        assert y[:2] == psi(e.d2 / 2, e.zeta, e.q)
        assert y[2:] == e.q


def phi_rescale_inverse(s, table):
    from affine_glue.exact import phi_inverse
    return phi_inverse(s, table.u, 2, table.R)


class TestRepair:
    def test_circle_needs_none(self):
        space, res = embedded("circle")
        assert res.certificate.repairs == []

    def test_collision(self):
        space, res = embedded("collision")
        cert = res.certificate
        assert len(cert.repairs) == 1
        (r,) = cert.repairs
        assert r["from"] == (1, 1) and r["to"] == (1, 2)
        assert r["germ"][1] == "t"
        assert (cert.K, cert.N, cert.dimension) == (2, 1, 3)
        assert block_collisions(res.mapping) == []
        qs = sorted(e["q"] for e in cert.surgery)
        assert qs == [(5 + Q(13, 189),), (7 + Q(2, 21),)]

    def test_collision_without_repair(self):
        space = F.collision()
        res = affinize(space, faults={"no_repair"})
        assert res.certificate.K == 1
        hits = block_collisions(res.mapping)
        assert hits and hits[0][2] == (3, Q(958, 189))


class TestAffinize:
    def test_rejects(self):
        with pytest.raises(CriterionRejected) as info:
            affinize(F.fan())
        assert info.value.report.witnesses[0][0] == "g"

    def test_dimension_law(self):
        for name in F.BOUNDED:
            space, res = embedded(name)
            c = res.certificate
            assert c.dimension == res.mapping.target_dim == space.n * (1 + c.K * c.N)

    def test_circle_is_a_closed_loop(self):
        space, res = embedded("circle")
        assert res.dimension == 4
        assert frontier_points(res.mapping) == []

    def test_unknown_fault(self):
        with pytest.raises(ValueError):
            affinize(F.circle(), faults={"nope"})

    def test_deterministic(self):
        a = affinize(F.figure_eight())
        b = affinize(F.figure_eight())
        assert a.mapping == b.mapping

    def test_threads_give_the_same_plan(self, monkeypatch):
        space = F.figure_eight()
        plain = affinize(space).mapping
        monkeypatch.setenv("AFFINE_GLUE_THREADS", "4")
        assert affinize(space).mapping == plain
