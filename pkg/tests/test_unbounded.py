from fractions import Fraction as Q

import pytest

from affine_glue import fixtures as F
from affine_glue.errors import ArcMeetsCoreInteriorly, MalformedArc
from affine_glue.exact import PLPath, vec
from affine_glue.mapping import frontier_points
from affine_glue.space import AFFINE, GLUE, NONE, EndSpec, PointEntry, SpaceDescription
from affine_glue.unbounded import (
    ExtendedSpace,
    UnboundedArc,
    affinize_unbounded,
    anchor_points,
    split_bounded,
)
from affine_glue.oracle import verify
from affine_glue.verifier import check_condition_2

from conftest import embedded


def half(aid, verts, direction, limit, tau=AFFINE, member=True):
    return UnboundedArc(aid, PLPath.through(verts), vec(direction), "half", EndSpec(limit, member, tau))


class TestSplit:
    def test_two_rays(self):
        core, arcs, junctions = split_bounded(F.rays())
        assert core.arcs == () and core.points == ()
        assert [a.id for a in arcs] == ["east", "north"]
        assert junctions == {"east": None, "north": None}

    def test_circle_with_ray(self):
        core, arcs, junctions = split_bounded(F.circle_ray())
        assert core == F.circle()
        assert junctions == {"ray": "g"}

    def test_line(self):
        core, (arc,), junctions = split_bounded(F.line())
        assert junctions == {"l": None}
        assert arc.unit_low == (Q(-1, 2), Q(-1, 2))
        assert arc.bounds == (None, None)

    def test_line_through_a_point(self):
        pts = [PointEntry("g", (5, 5), True, True)]
        ext = ExtendedSpace(SpaceDescription(2, pts, []),
                            [UnboundedArc("l", PLPath.through([(0, 0), (1, 1)]), vec((1, 1)), "line")])
        with pytest.raises(ArcMeetsCoreInteriorly):
            split_bounded(ext)

    def test_ray_crossing_the_core(self):
        ext = F.circle_ray()
        bad = half("r2", [(3, 3), (2, 4)], (-1, 0), "g")
        with pytest.raises(MalformedArc):
            split_bounded(ExtendedSpace(ext.core, [bad]))

    def test_glued_rays_refused(self):
        core = F.circle()
        arc = UnboundedArc("r", PLPath.through([(1, 1), (0, 1)]), vec((-1, 0)), "half",
                           EndSpec("g", True, GLUE, "g"))
        with pytest.raises(MalformedArc):
            split_bounded(ExtendedSpace(core, [arc]))

    def test_not_a_graph(self):
        core = SpaceDescription(2, [PointEntry("o", (0, 0), False)], [])
        arc = UnboundedArc("r", PLPath.through([(0, 0), (1, 0), (1, 1), (0, 1)]), vec((-1, 0)), "half",
                           EndSpec("o", False, NONE))
        with pytest.raises(MalformedArc):
            split_bounded(ExtendedSpace(core, [arc]))

    def test_shape_checks(self):
        with pytest.raises(MalformedArc):
            UnboundedArc("x", PLPath.through([(0, 0), (1, 0)]), vec((0, 0)), "half", EndSpec("o"))
        with pytest.raises(MalformedArc):
            UnboundedArc("x", PLPath.through([(0, 0), (1, 0)]), vec((1, 0)), "line", EndSpec("o"))
        with pytest.raises(MalformedArc):
            UnboundedArc("x", PLPath.through([(0, 0), (1, 0)]), vec((1, 0)), "spiral")


class TestAnchors:
    def test_detached(self):
        arcs = [UnboundedArc(a, PLPath.through([(0, 0), (1, 0)]), vec((1, 0)), "line") for a in "ab"]
        out = anchor_points(arcs, {"a": None, "b": None}, {}, 100, 3)
        assert out == [((101, 0, 0), 1), ((102, 0, 0), 1)]

    def test_attached(self):
        space, res = embedded("circle-ray")
        (rec,) = res.certificate.unbounded
        _, core = embedded("circle")
        assert rec["anchor"] == core.mapping.image_point("g")
        assert rec["junction"] == "g"

    def test_third_arc_at_a_junction(self):
        arcs = [half(f"r{j}", [(1, 1), (0, 1)], (-1, 0), "g") for j in range(3)]
        with pytest.raises(MalformedArc):
            anchor_points(arcs, {a.id: "g" for a in arcs}, {"g": (1, 1)}, 10, 2)

    def test_anchors_avoid_the_core(self):
        space, res = embedded("line")
        (rec,) = res.certificate.unbounded
        core = res.mapping.blocks[:-1]
        assert not any(b.contains(rec["anchor"] + (0,)) for b in core)


class TestAffinizeUnbounded:
    @pytest.mark.parametrize("name,core_dim", [("rays", 2), ("circle-ray", 4), ("line", 2)])
    def test_one_extra_coordinate(self, name, core_dim):
        space, res = embedded(name)
        assert res.certificate.core_dimension == core_dim
        assert res.dimension == core_dim + 1

    def test_single_half_line(self):
        core = SpaceDescription(1, [PointEntry("o", (0,), False)], [])
        ext = ExtendedSpace(core, [half("r", [(0,), (1,)], (1,), "o", NONE, member=False)])
        res = affinize_unbounded(ext)
        (blk,) = res.mapping.blocks
        assert blk.kind == "ray" and blk.path.vertices[0] == (1, 0)
        assert res.mapping.image("r", 5) == (1, 5)
        assert frontier_points(res.mapping) == [(1, 0)]
        assert verify(ext, res).ok

    def test_line_is_a_full_line(self):
        space, res = embedded("line")
        m = res.mapping
        ys = [m.image("l", t) for t in (-1000, 0, 1000)]
        assert ys[0][:2] == ys[1][:2] == ys[2][:2]
        assert ys[0][2] < ys[1][2] < ys[2][2]

    def test_criterion_sees_the_rays(self):
        ext = F.circle_ray()
        assert check_condition_2(ext).K == 3

    def test_circle_ray_passes_the_oracle(self):
        space, res = embedded("circle-ray")
        assert verify(space, res).ok
