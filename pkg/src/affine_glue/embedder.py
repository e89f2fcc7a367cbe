"""Building the affine copy Y of a glued curve complex and the homeomorphism f.

Each glued germ is cut at a point q and rerouted through a fresh block of
coordinates (its slot) so that its loose end lands on the image of the glue
target.  Germs without a limit are pulled off into an open interval that
leaves a single frontier point behind.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import CriterionRejected, IndexOutOfRange
from .exact import (
    ZERO,
    PLFunction,
    PLPath,
    Vec,
    pl_eval,
    phi_rescale,
    reverse_path,
    solve_first_crossing,
    std_connection,
    subpath,
    taxicab,
    zeros,
)
from .mapping import Block, MapPiece, PLMapping, blocks_meet, sub_block
from .space import (
    HIGH,
    LOW,
    Germ,
    GermTable,
    SpaceDescription,
    germ_table,
    normalize_shift,
)
from .verifier import check_claims, check_condition_2

FAULTS = frozenset({"endpoint_for_cut", "raw_t_thresholds", "wide_padding", "no_repair", "segment_uniform_psi"})


@dataclass(frozen=True)
class Layout:
    """Coordinate bookkeeping for Q^(n(1+KN)): base coordinates then K*N slots of width n."""

    n: int
    K: int
    N: int

    @property
    def dim(self) -> int:
        return self.n * (1 + self.K * self.N)

    def slot_start(self, i: int, k: int) -> int:
        m1, _ = block_offsets(i, k, self.K, self.N, self.n)
        return self.n + m1

    def lift(self, base: Vec, slot=None, value: Vec = ()) -> Vec:
        out = list(base) + [ZERO] * (self.dim - self.n)
        if slot is not None:
            j = self.slot_start(*slot)
            out[j:j + len(value)] = value
        return tuple(out)


def block_offsets(i: int, k: int, K: int, N: int, n: int) -> tuple:
    """Zero padding before and after slot (i, k)."""
    if not (1 <= i <= N and 1 <= k <= K):
        raise IndexOutOfRange(f"slot ({i}, {k}) outside 1..{N} x 1..{K}")
    return n * ((i - 1) * K + (k - 1)), n * (K * N - i * K + K - k)


def no_limit_offsets(i: int, K: int, N: int, n: int, *, wide: bool = False) -> tuple:
    """Padding around the single interval coordinate of a no-limit block.

    The interval sits on the first coordinate of slot (i, 1).  ``wide`` gives
    the trailing padding nK(N-i+1)+n-1, which overshoots the ambient dimension.
    """
    if not 1 <= i <= N:
        raise IndexOutOfRange(f"class {i} outside 1..{N}")
    m1 = (i - 1) * n * K
    m2 = n * K * (N - i + 1) + (n - 1 if wide else -1)
    return m1, m2


def compute_dprime(germ, zeta: Vec) -> PLFunction:
    """t -> d(zeta, g(t)) + 2 d(0, g(t)) along the germ path, exactly."""
    path = germ.path if isinstance(germ, Germ) else germ
    cuts = set(path.params)
    for (t0, t1), (a, b) in zip(zip(path.params, path.params[1:]), path.segments):
        for j in range(len(zeta)):
            for c in (zeta[j], ZERO):
                da, db = a[j] - c, b[j] - c
                if (da < 0 < db) or (db < 0 < da):
                    cuts.add(t0 + (t1 - t0) * da / (da - db))
    params = sorted(cuts)
    origin = zeros(len(zeta))

    def d(t):
        x = pl_eval(path, t)
        return taxicab(zeta, x) + 2 * taxicab(origin, x)

    return PLFunction(tuple(params), tuple(d(t) for t in params))


def compute_v_q(germ, zeta: Vec, u, n: int, R) -> tuple:
    """First t where the rescaled parameter catches up with d'; and the germ point there."""
    path = germ.path if isinstance(germ, Germ) else germ
    u, R = Fraction(u), Fraction(R)
    if path.end < u:
        raise IndexOutOfRange(f"germ path ends at {path.end}, before u={u}")
    phi = PLFunction.linear(0, 0, u, phi_rescale(u, u, n, R))
    dp = compute_dprime(subpath(path, 0, u), zeta)
    v = solve_first_crossing(phi, dp, u)
    return v, pl_eval(path, v)


@dataclass(frozen=True)
class SurgeryEntry:
    germ: Germ
    slot: tuple
    zeta: Vec
    q: Vec
    v: Fraction
    d1: Fraction
    d2: Fraction


@dataclass(frozen=True)
class NoLimitEntry:
    germ: Germ
    slot: tuple
    anchor: Vec


@dataclass
class SurgeryPlan:
    surgery: list = field(default_factory=list)
    no_limit: list = field(default_factory=list)

    def entry_for(self, key):
        for e in self.surgery + self.no_limit:
            if e.germ.key == key:
                return e
        return None


@dataclass
class Certificate:
    n: int
    K: int
    N: int
    u: Fraction | None
    R: Fraction | None
    dimension: int
    shift: Vec
    repairs: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    surgery: list = field(default_factory=list)
    no_limit: list = field(default_factory=list)
    faults: list = field(default_factory=list)
    core_dimension: int | None = None
    unbounded: list = field(default_factory=list)


@dataclass
class AffinizationResult:
    mapping: PLMapping
    certificate: Certificate
    space: SpaceDescription | None = None
    table: GermTable | None = None
    plan: SurgeryPlan | None = None

    @property
    def blocks(self) -> tuple:
        return self.mapping.blocks

    @property
    def dimension(self) -> int:
        return self.mapping.target_dim


# --------------------------------------------------------------------------
# blocks


def _std(p, q, faults):
    return std_connection(p, q, uniform_segments="segment_uniform_psi" in faults)


def _pinned_base(layout: Layout, base: Vec, slot, path: PLPath, left_open, right_open) -> PLPath:
    """{base} x path-in-slot."""
    verts = tuple(layout.lift(base, slot, v) for v in path.vertices)
    return PLPath(path.params, verts, left_open, right_open)


def _pinned_slot(layout: Layout, path: PLPath, slot, value: Vec, left_open, right_open) -> PLPath:
    """path-in-base x {value in slot}."""
    verts = tuple(layout.lift(v, slot, value) for v in path.vertices)
    return PLPath(path.params, verts, left_open, right_open)


def build_surgery_blocks(entry: SurgeryEntry, layout: Layout, faults=frozenset()) -> tuple:
    """The three blocks rerouting one glued germ, oriented from the glue target towards q."""
    n = layout.n
    origin = zeros(n)
    zeta, q, slot = entry.zeta, entry.q, entry.slot
    key = entry.germ.key
    up = _std(origin, q, faults)
    b1 = Block("surgery1", _pinned_base(layout, zeta, slot, up, True, False), slot, key)
    if "endpoint_for_cut" in faults:
        p = entry.germ.endpoint
        across = _std(zeta, p, faults)
        scale = entry.d2 / across.end
        across = PLPath(tuple(t * scale for t in across.params), across.vertices)
    else:
        across = _std(zeta, q, faults)
    b2 = Block("surgery2", _pinned_slot(layout, across, slot, q, True, False), slot, key)
    down = _std(q, origin, faults)
    b3 = Block("surgery3", _pinned_base(layout, q, slot, down, True, True), slot, key)
    return b1, b2, b3


def build_no_limit_block(entry: NoLimitEntry, layout: Layout, u, faults=frozenset()) -> Block:
    """{anchor} x 0 x (0, u) x 0, traversed from the frontier end towards the anchor."""
    n, K, N = layout.n, layout.K, layout.N
    i = entry.slot[0]
    m1, m2 = no_limit_offsets(i, K, N, n, wide="wide_padding" in faults)
    pad1, pad2 = (ZERO,) * m1, (ZERO,) * m2
    u = Fraction(u)
    verts = (entry.anchor + pad1 + (u,) + pad2, entry.anchor + pad1 + (ZERO,) + pad2)
    return Block("no_limit", PLPath((ZERO, u), verts, True, True), entry.slot, entry.germ.key)


# --------------------------------------------------------------------------
# the map


def _orient(germ: Germ, L, block: Block, t_lo, t_hi, t_hi_open, sigma_lo, sigma_hi):
    """Express a germ-parameter piece in arc arclength, reversing the block for high ends."""
    if germ.end == LOW:
        corr = PLFunction.linear(t_lo, sigma_lo, t_hi, sigma_hi)
        return block, dict(arc=germ.arc, lo=t_lo, hi=t_hi, lo_open=True, hi_open=t_hi_open, corr=corr)
    rev = Block(block.kind, reverse_path(block.path), block.slot, block.germ)
    top = block.path.end
    corr = PLFunction.linear(L - t_hi, top - sigma_hi, L - t_lo, top - sigma_lo)
    return rev, dict(arc=germ.arc, lo=L - t_hi, hi=L - t_lo, lo_open=t_hi_open, hi_open=True, corr=corr)


def _surgery_pieces(entry: SurgeryEntry, blocks3, layout: Layout, u, R, L, faults):
    v = entry.v
    if "raw_t_thresholds" in faults:
        s = PLFunction.linear(0, 0, v, v)
    else:
        s = PLFunction.linear(0, 0, v, phi_rescale(v, u, layout.n, R))
    s_end = s(v)
    out = []
    start = ZERO
    for blk, length in zip(blocks3, (entry.d1, entry.d2, entry.d1)):
        if start >= s_end:
            break
        hi_s = min(start + length, s_end)
        ends_at_v = hi_s == s_end
        part = sub_block(blk, 0, hi_s - start, True, ends_at_v or blk.path.right_open)
        t_lo, t_hi = s.inverse(start), s.inverse(hi_s)
        out.append(_orient(entry.germ, L, part, t_lo, t_hi, ends_at_v, ZERO, hi_s - start))
        start += length
    return out


def _residual_cuts(space: SpaceDescription, plan: SurgeryPlan, u) -> dict:
    cuts = {}
    for e in plan.surgery:
        cuts[(e.germ.arc, e.germ.end)] = e.v
    for e in plan.no_limit:
        cuts[(e.germ.arc, e.germ.end)] = Fraction(u)
    return cuts


def build_map(space: SpaceDescription, table: GermTable, plan: SurgeryPlan, layout: Layout,
              faults=frozenset()) -> PLMapping:
    """Assemble every block of Y and the piece of X sent onto it."""
    staged = []
    for p in space.points:
        if p.in_X:
            staged.append((Block("point", PLPath((ZERO,), (layout.lift(p.coords),))), dict(point=p.id)))
    cuts = _residual_cuts(space, plan, table.u)
    for a in space.arcs:
        L = a.length
        lo = cuts.get((a.id, LOW), ZERO)
        hi = L - cuts.get((a.id, HIGH), ZERO)
        lo_open, hi_open = lo == 0, hi == L
        sub = subpath(a.lpath, lo, hi)
        path = PLPath(sub.params, tuple(layout.lift(v) for v in sub.vertices), lo_open, hi_open)
        corr = PLFunction.linear(lo, lo, hi, hi)
        staged.append((Block("residual", path), dict(arc=a.id, lo=lo, hi=hi, lo_open=lo_open,
                                                      hi_open=hi_open, corr=corr)))
    for e in plan.surgery:
        L = space.arc(e.germ.arc).length
        blocks3 = build_surgery_blocks(e, layout, faults)
        staged.extend(_surgery_pieces(e, blocks3, layout, table.u, table.R, L, faults))
    for e in plan.no_limit:
        L = space.arc(e.germ.arc).length
        blk = build_no_limit_block(e, layout, table.u, faults)
        staged.append(_orient(e.germ, L, blk, ZERO, table.u, True, ZERO, table.u))
    staged.sort(key=lambda bp: bp[0].sort_key())
    blocks = tuple(b for b, _ in staged)
    pieces = tuple(MapPiece(block=j, **info) for j, (_, info) in enumerate(staged))
    return PLMapping(space.n, layout.dim, blocks, pieces, space.shift)


# --------------------------------------------------------------------------
# planning and collision repair


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("AFFINE_GLUE_THREADS", "1")))
    except ValueError:
        return 1


def plan_surgery(space: SpaceDescription, table: GermTable) -> SurgeryPlan:
    n, u, R = space.n, table.u, table.R
    glue = [g for g in table.germs if g.kind == "glue"]

    def one(g):
        zeta = space.coords(g.target)
        v, q = compute_v_q(g, zeta, u, n, R)
        return SurgeryEntry(g, (g.shape, g.k), zeta, q, v, taxicab(zeros(n), q), taxicab(zeta, q))

    workers = _threads()
    if workers > 1 and len(glue) > 1:
        with ThreadPoolExecutor(workers) as pool:
            surgery = list(pool.map(one, glue))
    else:
        surgery = [one(g) for g in glue]
    no_limit = [NoLimitEntry(g, (g.shape, 1), g.endpoint) for g in table.germs if g.kind == "no"]
    return SurgeryPlan(surgery, no_limit)


def _slot_blocks(plan: SurgeryPlan, layout: Layout, u, faults) -> list:
    out = []
    for e in plan.surgery:
        out.append((e, build_surgery_blocks(e, layout, faults)))
    for e in plan.no_limit:
        out.append((e, (build_no_limit_block(e, layout, u, faults),)))
    out.sort(key=lambda eb: eb[0].germ.key)
    return out


def find_collision(plan: SurgeryPlan, layout: Layout, u, faults=frozenset()):
    """First pair of slot blocks from different germs that meet, with a witness point."""
    staged = _slot_blocks(plan, layout, u, faults)
    for x, (ea, ba) in enumerate(staged):
        for eb, bb in staged[x + 1:]:
            if ea.slot[0] != eb.slot[0]:
                continue
            for blk_a in ba:
                for blk_b in bb:
                    hits = blocks_meet(blk_a, blk_b)
                    if hits:
                        return ea, eb, hits[0]
    return None


def repair_collisions(plan: SurgeryPlan, layout: Layout, u, faults=frozenset()) -> tuple:
    """Move colliding rerouted germs into fresh slots until no two slot blocks meet.

    The moved germ is the glued one when a no-limit germ is involved, and
    otherwise the lexicographically later one.  Returns (plan, layout, log).
    """
    log = []
    while True:
        hit = find_collision(plan, layout, u, faults)
        if hit is None:
            return plan, layout, log
        ea, eb, point = hit
        if isinstance(ea, NoLimitEntry) and isinstance(eb, NoLimitEntry):
            raise AssertionError("no-limit blocks cannot collide")
        if isinstance(ea, NoLimitEntry):
            mover = eb
        elif isinstance(eb, NoLimitEntry):
            mover = ea
        else:
            mover = max(ea, eb, key=lambda e: e.germ.key)
        i, k = mover.slot
        new_slot = (i, layout.K + 1)
        layout = replace(layout, K=layout.K + 1)
        plan = SurgeryPlan([replace(e, slot=new_slot, germ=replace(e.germ, k=new_slot[1]))
                            if e is mover else e for e in plan.surgery], plan.no_limit)
        log.append({"germ": mover.germ.key, "from": (i, k), "to": new_slot, "witness": point})


# --------------------------------------------------------------------------
# driver


def _identity(space: SpaceDescription) -> AffinizationResult:
    layout = Layout(space.n, 0, 0)
    plan = SurgeryPlan()
    table = GermTable((), Fraction(1), space.R or Fraction(1), 0, 0, ())
    mapping = build_map(space, table, plan, layout)
    cert = Certificate(space.n, 0, 0, None, space.R, space.n, space.shift,
                       checks=[{"name": "validate", "ok": True}, {"name": "condition_2", "ok": True}])
    return AffinizationResult(mapping, cert, space, None, plan)


def affinize(space: SpaceDescription, *, faults=frozenset()) -> AffinizationResult:
    """Embed an accepted space affinely into Q^(n(1+KN)).

    ``faults`` switches off individual safeguards; it exists so tests can show
    what breaks without them.
    """
    faults = frozenset(faults)
    unknown = faults - FAULTS
    if unknown:
        raise ValueError(f"unknown fault switches {sorted(unknown)}")
    crit = check_condition_2(space)
    if not crit.ok:
        raise CriterionRejected(crit)
    if not space.G_ids():
        return _identity(space)
    norm = normalize_shift(space)
    table = germ_table(norm)
    claims = check_claims(norm, table)
    plan = plan_surgery(norm, table)
    layout = Layout(norm.n, table.K, table.N)
    log = []
    if "no_repair" not in faults:
        plan, layout, log = repair_collisions(plan, layout, table.u, faults)
    mapping = build_map(norm, table, plan, layout, faults)
    n = norm.n
    cert = Certificate(
        n, layout.K, layout.N, table.u, table.R, layout.dim, norm.shift, log,
        [{"name": "validate", "ok": True}, {"name": "condition_2", "ok": True},
         {"name": "claims", "ok": claims.ok},
         {"name": "collision_scan", "ok": "no_repair" not in faults}],
        [dict(germ=e.germ.key, slot=e.slot, zeta=e.zeta, q=e.q, v=e.v, d1=e.d1, d2=e.d2)
         for e in sorted(plan.surgery, key=lambda e: e.germ.key)],
        [dict(germ=e.germ.key, slot=e.slot, anchor=e.anchor)
         for e in sorted(plan.no_limit, key=lambda e: e.germ.key)],
        sorted(faults))
    return AffinizationResult(mapping, cert, norm, table, plan)
