"""The eleven acceptance criteria, one test each, at their stated tolerances.

Each test prints a PASS/FAIL line; the lines are repeated in the pytest
terminal summary.  Run alone with ``pytest tests/test_acceptance.py``.
"""
import random
import time
from fractions import Fraction as Q

from affine_glue import fixtures as F
from affine_glue.cli import main
from affine_glue.embedder import FAULTS, Layout, affinize, compute_v_q
from affine_glue.exact import PLFunction, PLPath, solve_first_crossing
from affine_glue.mapping import frontier_points
from affine_glue.oracle import block_collisions, bisection_crossing, brute_force_shadows, verify
from affine_glue.serialize import (
    embedding_to_instance,
    parse_embedding,
    parse_instance,
    serialize_embedding,
    serialize_instance,
)
from affine_glue.space import GLUE, HIGH, LOW, ArcPoint, germ_table, shadow_set
from affine_glue.unbounded import affinize_unbounded
from affine_glue.verifier import check_condition_2, discontinuity_locus, identity_like

from conftest import embedded, record

FUZZ = 200
SCHEDULE = [Q(1, 2 ** j) for j in range(1, 13)]
ACCEPTED = sorted(F.BOUNDED) + sorted(F.UNBOUNDED)


def _expected_K(space, cert):
    base = germ_table(space).K if space.G_ids() else 0
    return base + len(cert.repairs)


def test_1_dimension_law():
    spaces = [F.BOUNDED[name]() for name in sorted(F.BOUNDED)] + [F.fuzz_space(s) for s in range(FUZZ)]
    bad = []
    start = time.perf_counter()
    results = [affinize(sp) for sp in spaces]
    elapsed = time.perf_counter() - start
    for sp, res in zip(spaces, results):
        c = res.certificate
        if c.dimension != sp.n * (1 + c.K * c.N) or res.mapping.target_dim != c.dimension:
            bad.append(f"dimension {c.dimension} for n={sp.n}, K={c.K}, N={c.N}")
        elif c.K != _expected_K(sp, c):
            bad.append(f"K={c.K} after {len(c.repairs)} repairs")
    ok = not bad and elapsed < 5
    detail = (f"{len(spaces)} instances embedded in {elapsed:.2f}s (limit 5s), dimension = n(1+K'N)"
              + (f"; {bad[0]}" if bad else ""))
    assert record(1, ok, detail)


def _is_single_loop(mapping):
    ends = {}
    for j, b in enumerate(mapping.blocks):
        if len(b.path.vertices) > 1:
            for v in (b.path.vertices[0], b.path.vertices[-1]):
                ends.setdefault(v, []).append(j)
    if any(len(js) != 2 for js in ends.values()):
        return False
    # walk around the loop and make sure every arc block is visited
    arcs = {j for js in ends.values() for j in js}
    first = min(arcs)
    seen, cur, v = {first}, first, mapping.blocks[first].path.vertices[-1]
    while True:
        nxt = [j for j in ends[v] if j != cur][0]
        if nxt == first:
            break
        seen.add(nxt)
        p = mapping.blocks[nxt].path
        v = p.vertices[-1] if p.vertices[0] == v else p.vertices[0]
        cur = nxt
    return seen == arcs


def test_2_circle_end_to_end():
    space = F.circle()
    res = affinize(space)
    c = res.certificate
    start = time.perf_counter()
    rep = verify(space, res, density=12)
    elapsed = time.perf_counter() - start
    frontier = frontier_points(res.mapping)
    loop = _is_single_loop(res.mapping)
    ok = (c.n, c.K, c.N, c.dimension) == (2, 1, 1, 4) and not frontier and loop and rep.ok and elapsed < 1
    assert record(2, ok, f"circle: n={c.n}, K={c.K}, N={c.N}, Y in Q^{c.dimension}, frontier={frontier}, "
                         f"single closed loop={loop}, oracle {'passes' if rep.ok else 'fails'} at density 12 "
                         f"in {elapsed:.2f}s (limit 1s)")


def _pl_pair(rng):
    u = Q(rng.randint(1, 8), rng.randint(1, 3))
    ts = [u * j / 16 for j in range(17)]
    while True:
        h = [Q(rng.randint(-40, 40), rng.randint(1, 5)) for _ in ts]
        g = [Q(rng.randint(-40, 40), rng.randint(1, 5)) for _ in ts]
        if g[0] < h[0] and g[-1] > h[-1]:
            return PLFunction(tuple(ts), tuple(g)), PLFunction(tuple(ts), tuple(h)), u


def test_3_exact_crossing():
    v, q = compute_v_q(PLPath.through([(4,), (5,)]), (2,), 1, 1, 10)
    tol = Q(1, 2 ** 40)
    rng = random.Random(2024)
    worst = Q(0)
    for _ in range(100):
        g, h, u = _pl_pair(rng)
        exact = solve_first_crossing(g, h, u)
        worst = max(worst, abs(exact - bisection_crossing(g, h, u, tol)))
    ok = v == Q(10, 27) and q == (Q(118, 27),) and worst <= tol
    assert record(3, ok, f"worked instance v={v}, q={q[0]}; max |exact - bisection| over 100 fuzzed pairs "
                         f"= {float(worst):.3g} (tolerance 2^-40)")


def test_4_gluing_limits():
    checked, bad = 0, []
    for name in ACCEPTED:
        space, res = embedded(name)
        m = res.mapping
        for a in space.arcs:
            pieces = m.arc_pieces(a.id)
            lo, hi = a.bounds
            for which, lam, pc in ((LOW, lo, pieces[0]), (HIGH, hi, pieces[-1])):
                end = a.ends[0] if which == LOW else a.ends[1]
                if end is None or end.tau != GLUE:
                    continue
                checked += 1
                if m.limit(pc, lam) != m.image_point(end.glue):
                    bad.append(f"{name}: arc {a.id} {which}")
    ok = checked > 0 and not bad
    assert record(4, ok, f"{checked} glued germs over {len(ACCEPTED)} fixtures land exactly on f(zeta)"
                         + (f"; mismatch at {bad[0]}" if bad else ""))


def _probe_points(space):
    pts = [p.id for p in space.points if p.in_X]
    for a in space.arcs:
        lo, hi = a.bounds
        lo = lo if lo is not None else Q(-3)
        hi = hi if hi is not None else lo + 6
        pts.append(ArcPoint(a.id, (lo + hi) / 2))
    return pts


def test_5_shadow_agreement():
    compared, bad, claim = 0, [], []
    for name in ACCEPTED:
        space = F.BOUNDED.get(name, F.UNBOUNDED.get(name))()
        for x in _probe_points(space):
            compared += 1
            if shadow_set(space, x) != brute_force_shadows(space, x, SCHEDULE):
                bad.append(f"{name}: {x}")
        Z = {space.coords(z) for z in space.Z_ids()}
        for g in space.G_ids():
            if not shadow_set(space, g) <= Z:
                claim.append(f"{name}: {g}")
    ok = not bad and not claim
    assert record(5, ok, f"shadow_set == brute force at {compared} points (radii 2^-1..2^-12); "
                         f"S(x) within Z for every singular x" + (f"; differs at {bad[0]}" if bad else "")
                  + (f"; S leaves Z at {claim[0]}" if claim else ""))


def test_6_block_disjointness():
    hits = []
    for name in sorted(F.BOUNDED):
        _, res = embedded(name)
        if block_collisions(res.mapping):
            hits.append(name)
    for s in range(FUZZ):
        if block_collisions(affinize(F.fuzz_space(s)).mapping):
            hits.append(f"fuzz {s}")
    _, col = embedded("collision")
    repairs = col.certificate.repairs
    ok = not hits and len(repairs) == 1
    assert record(6, ok, f"blocks meet only at designed junctions on {len(F.BOUNDED)} fixtures + {FUZZ} fuzzed "
                         f"instances; collision fixture repaired {len(repairs)} time(s), "
                         f"moving {repairs[0]['from'] if repairs else '-'} -> {repairs[0]['to'] if repairs else '-'}"
                  + (f"; overlap in {hits[0]}" if hits else ""))


def test_7_rejection_path(tmp_path, capsys):
    lines = []
    ok = True
    for name in ("bad-glue", "fan"):
        path = tmp_path / f"{name}.json"
        path.write_bytes(serialize_instance(F.REJECTED[name]()))
        code = main(["check", str(path)])
        out = capsys.readouterr().out
        witness = next((ln for ln in out.splitlines() if ln.startswith("witness")), "")
        ok = ok and code == 1 and witness.startswith("witness g:")
        lines.append(f"{name} exit {code} ({witness})")
    assert record(7, ok, "; ".join(lines))


def test_8_round_trip():
    space = F.plain()
    res = affinize(space)
    identity = identity_like(res.mapping, space)
    locus = discontinuity_locus(res.mapping, space)
    doc = parse_embedding(serialize_embedding(res))
    again = parse_instance(serialize_instance(embedding_to_instance(doc.result())))
    rep = check_condition_2(again)
    ok = identity and locus == set() and res.dimension == space.n and rep.ok and rep.K == 0
    assert record(8, ok, f"G empty: f is identity x 0 ({identity}), discontinuity locus {locus or '{}'}, "
                         f"re-ingested image checks with K={rep.K}")


def test_9_no_limit_frontier():
    space, res = embedded("no-limit")
    c = res.certificate
    layout = Layout(c.n, c.K, c.N)
    frontier = frontier_points(res.mapping)
    want = []
    for e in c.no_limit:
        slot = layout.slot_start(e["slot"][0], 1)
        want.append(layout.lift(e["anchor"])[:slot] + (c.u,) + layout.lift(e["anchor"])[slot + 1:])
    ok = len(c.no_limit) == 1 and sorted(frontier) == sorted(want)
    assert record(9, ok, f"{len(c.no_limit)} no-limit end(s), frontier outside Y = "
                         f"{[tuple(str(x) for x in p) for p in frontier]}, value u={c.u} in the slot coordinate")


def test_10_unbounded_extension():
    notes, ok = [], True
    for name in ("rays", "circle-ray"):
        space = F.UNBOUNDED[name]()
        res = affinize_unbounded(space)
        rep = verify(space, res, density=12)
        checks = {c.name: c.ok for c in rep.checks}
        core = res.certificate.core_dimension
        good = (rep.ok and checks.get("properness") and checks.get("end_limits") and checks.get("cut_limits")
                and res.dimension == core + 1)
        ok = ok and bool(good)
        notes.append(f"{name}: dimension {res.dimension} = {core}+1, "
                     f"{'all checks pass' if rep.ok else 'failed ' + str([c.name for c in rep.failed()])}")
    assert record(10, ok, "; ".join(notes) + " (properness at T = 10, 100, 1000)")


FAULT_TARGETS = {
    "endpoint_for_cut": "circle",
    "raw_t_thresholds": "circle",
    "wide_padding": "no-limit",
    "no_repair": "collision",
    "segment_uniform_psi": "circle",
}


def test_11_fault_injection():
    notes, ok = [], set(FAULT_TARGETS) == FAULTS
    for fault, name in sorted(FAULT_TARGETS.items()):
        space = F.BOUNDED[name]()
        res = affinize(space, faults={fault})
        rep = verify(space, res, density=6)
        failed = [c.name for c in rep.failed()]
        ok = ok and bool(failed)
        notes.append(f"{fault} on {name} -> {','.join(failed) or 'no failure'}")
    assert record(11, ok, "; ".join(notes))
