"""Fundamental tails and pieces relative to a repelling cycle.

A level-n tail is known only through membership predicates: forward images
must follow the cycle's basic regions and fundamental-domain labels, ending
in a level-1 tail (unbounded slice of a fundamental domain beyond radius r).
Piece diameters are sample-based lower bounds; all trichotomy verdicts are
horizon-qualified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .addresses import InfiniteAddress, project, shift_by
from .cycles import Cycle
from .exponential import (
    TWO_PI,
    MapModel,
    SingularValueHit,
    evaluate,
    in_fundamental_domain_exact,
    is_escaped,
    singular_values,
    strip_of,
)
from .rays import ESCAPE_THRESHOLD, apply_branches
from .regions import OnArcError, PointLocationError, RayGraph

DEFAULT_HORIZON = 1000
RADIUS_MARGIN = 1.25


class TrappedSingularOrbit(RuntimeError):
    """Singular orbit escapes while following the cycle's regions."""


@dataclass
class RadiusResult:
    status: str  # "radius" | "trapped-unbounded"
    r: float | None
    follow_steps: int            # observed n(s), capped at the horizon
    entered_region_index: int | None  # i(s)
    tracked: list[complex]       # truncation of P_B


@dataclass
class TailContext:
    map: MapModel
    cycle: Cycle
    graph: RayGraph
    b_regions: tuple[int, ...]   # region id of z_i for i = 0..m-1
    r: float
    horizon: int
    cycle_on_graph: bool = False


@dataclass
class TailAddressRecord:
    address: tuple[int, ...]
    level: int
    exists: bool
    witness: complex | None = None
    reason: str = ""
    indeterminate: bool = False


@dataclass
class PieceEstimate:
    diameter: float
    level: int
    n_samples: int
    n_excluded: int
    empty: bool


@dataclass
class PieceMapCheck:
    passed: bool
    level: int
    n_checked: int
    n_excluded: int
    n_failed: int


def choose_radius(m: MapModel, cycle: Cycle, graph: RayGraph,
                  b_regions: tuple[int, ...], horizon: int = DEFAULT_HORIZON,
                  margin: float = RADIUS_MARGIN) -> RadiusResult:
    """Radius r with D_r containing D, the cycle, and the tracked part of P_B.

    Follows each singular value while its itinerary matches the cycle's
    regions.  If the orbit escapes while still conformant the trichotomy
    cannot be in case (3) at this horizon and a trapped/unbounded verdict is
    returned instead of a radius.
    """
    mper = cycle.period
    best = max(m.R, max(abs(z) for z in cycle.points))
    follow = 0
    entered: int | None = None
    tracked_all: list[complex] = []
    for s in singular_values(m):
        try:
            rid = graph.region_near(s)
        except (OnArcError, PointLocationError):
            rid = None
        if rid not in b_regions:
            continue
        i0 = b_regions.index(rid)
        entered = i0
        tracked = [s]
        w = s
        for j in range(1, horizon + 1):
            w = evaluate(m, w)
            if is_escaped(w) or abs(w) > ESCAPE_THRESHOLD:
                return RadiusResult("trapped-unbounded", None, follow, i0, tracked)
            try:
                rw = graph.region_near(w)
            except OnArcError:
                break
            if rw != b_regions[(i0 + j) % mper]:
                break
            tracked.append(w)
            follow = j
        best = max(best, max(abs(t) for t in tracked))
        img = evaluate(m, tracked[-1])
        if not is_escaped(img):
            best = max(best, abs(img))
        tracked_all.extend(tracked)
    return RadiusResult("radius", margin * best, follow, entered, tracked_all)


def make_tail_context(m: MapModel, cycle: Cycle, graph: RayGraph,
                      horizon: int = DEFAULT_HORIZON,
                      r: float | None = None) -> TailContext:
    """TailContext for a repelling cycle whose points sit in graph regions.

    Cycle points lying on the graph (landing points) are assigned the
    adjacent region deterministically and flagged; the construction is meant
    for interior cycle points, so downstream results for on-graph cycles are
    heuristic extensions.
    """
    if not cycle.is_repelling:
        raise ValueError("tails are defined relative to a repelling cycle")
    if graph.p % cycle.period != 0:
        raise ValueError("graph iterate p must be a multiple of the cycle period")
    on_graph = any(graph.on_graph(z) for z in cycle.points)
    b_regions = tuple(graph.region_near(z) for z in cycle.points)
    if r is None:
        res = choose_radius(m, cycle, graph, b_regions, horizon)
        if res.status != "radius":
            raise TrappedSingularOrbit(
                f"singular orbit escapes following the cycle regions "
                f"(followed {res.follow_steps} steps)")
        r = res.r
    if r <= max(abs(z) for z in cycle.points) or r < m.R:
        raise ValueError("need r > |z_i| and r >= R")
    return TailContext(map=m, cycle=cycle, graph=graph, b_regions=b_regions,
                       r=r, horizon=horizon, cycle_on_graph=on_graph)


# ---------------------------------------------------------------------------
# membership predicates

def _on_delta_r(m: MapModel, w: complex, r: float, snap: float = 1e-9) -> bool:
    u = w - m.c
    return u.real < 0.0 and abs(u.imag) <= snap and abs(w) >= r


def tail1_membership(ctx: TailContext, label: int, z: complex) -> bool:
    """z in the level-1 tail of `label`: fundamental-domain slice beyond r.

    Conditions: exact membership in F_label for the r-level slit plane,
    image outside the closed disk of radius r and off delta_r, region equal
    to B_0, and the rightward probe certificate of unboundedness.
    """
    m = ctx.map
    if is_escaped(z):
        return False
    if not in_fundamental_domain_exact(m, z, label, radius=ctx.r):
        return False
    rid, z_loc = ctx.graph.region_near_with_witness(z)
    if rid != ctx.b_regions[0]:
        return False
    # unbounded-component certificate: march right, conditions must persist
    # (the crossing test runs from the located side when z sits on an arc)
    trunc = m.truncation
    if ctx.graph._crossings_all(z_loc, complex(trunc + 1.0, z_loc.imag)) != 0:
        return False
    x_safe = math.log(ctx.r + abs(m.c)) + 0.1
    x = z.real + 0.1
    while x <= min(x_safe, trunc):
        if not in_fundamental_domain_exact(m, complex(x, z.imag), label,
                                           radius=ctx.r):
            return False
        x += 0.1
    return True


def tail_membership(ctx: TailContext, address: tuple[int, ...], z: complex,
                    forward_images: list[complex] | None = None) -> bool:
    """z in the level-n tail of the finite address (length m(n-1)+1).

    Forward images must follow the cycle's regions and the address labels
    index by index, with the final image passing the level-1 test.  Callers
    holding exact forward images (e.g. ray samples, whose images are shifted
    ray samples) may pass them to avoid double-precision overflow in the
    forward iteration.
    """
    mper = ctx.cycle.period
    if (len(address) - 1) % mper != 0:
        raise ValueError(f"address length {len(address)} is not m(n-1)+1 "
                         f"for m={mper}")
    steps = len(address) - 1
    if forward_images is not None and len(forward_images) <= steps:
        raise ValueError("need m(n-1)+1 forward images")
    w = z
    for i in range(steps):
        if is_escaped(w):
            return False
        if strip_of(w) != address[i]:
            return False
        if ctx.graph.region_near(w) != ctx.b_regions[i % mper]:
            return False
        w = forward_images[i + 1] if forward_images is not None else evaluate(ctx.map, w)
    if is_escaped(w):
        return False
    return tail1_membership(ctx, address[-1], w)


def ray_sample_in_tail(ctx: TailContext, s: InfiniteAddress, t: float, n: int,
                       depth: int = 80) -> bool | None:
    """Tail membership of the hair sample at ladder potential t, level n.

    Forward images of a hair sample are shifted hair samples; taking them
    from the pullback chain keeps the test exact where forward iteration
    would overflow.  None when the chain is too short to decide level n
    (potential not deep enough).
    """
    from .rays import ladder_descend
    chain = ladder_descend(ctx.map, s, t, depth)
    steps = ctx.cycle.period * (n - 1)
    if len(chain) <= steps:
        return None
    labels = project(s, n, ctx.cycle.period)
    return tail_membership(ctx, labels, chain[0], forward_images=chain)


def tail_exists(ctx: TailContext, s: InfiniteAddress, n: int) -> TailAddressRecord:
    """Pull a level-1 witness back along the address and verify membership."""
    if n < 1:
        raise ValueError("n must be >= 1")
    labels = project(s, n, ctx.cycle.period)
    last = labels[-1]
    x_w = max(ctx.map.seed_potential, ctx.r + 1.0)
    w1 = complex(x_w, TWO_PI * last)
    try:
        if not tail1_membership(ctx, last, w1):
            return TailAddressRecord(labels, n, False, reason="no-tail1-witness")
    except OnArcError:
        return TailAddressRecord(labels, n, False, reason="on-arc",
                                 indeterminate=True)
    try:
        witness = apply_branches(ctx.map, labels[:-1], w1)
    except SingularValueHit as exc:
        return TailAddressRecord(labels, n, False,
                                 reason="singular-hit" if not exc.on_cut else "cut-hit")
    try:
        ok = tail_membership(ctx, labels, witness)
    except OnArcError:
        return TailAddressRecord(labels, n, False, witness=witness,
                                 reason="on-arc", indeterminate=True)
    return TailAddressRecord(labels, n, ok, witness=witness,
                             reason="" if ok else "membership-failed")


# ---------------------------------------------------------------------------
# fundamental pieces

def _piece_image_samples(ctx: TailContext, label: int,
                         grid_side: int) -> tuple[list[complex], int]:
    """Sample grid of tau_1(label) intersected with the closed disk D_r.

    This is the f^{mn}-image of the level-n piece; pulling the samples back
    yields points of the piece itself.
    """
    m = ctx.map
    r = ctx.r
    x_lo = math.log(max(r - abs(m.c), 1e-6))
    x_hi = r
    y_c = TWO_PI * label
    pts: list[complex] = []
    excluded = 0
    for i in range(grid_side):
        for j in range(grid_side):
            z = complex(x_lo + (i + 0.5) * (x_hi - x_lo) / grid_side,
                        y_c - math.pi + (j + 0.5) * TWO_PI / grid_side)
            if abs(z) > r:
                continue
            try:
                if tail1_membership(ctx, label, z):
                    pts.append(z)
            except OnArcError:
                excluded += 1
    return pts, excluded


def piece_diameter(ctx: TailContext, s: InfiniteAddress, n: int,
                   samples: int = 24) -> PieceEstimate:
    """Sampled diameter of the level-n piece P_n(s) (a lower bound).

    Samples the image set tau_1(sigma^{mn} s) in D_r and pulls each sample
    back mn steps along the address labels.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    mper = ctx.cycle.period
    label = s.entry(mper * n)
    image_pts, excluded = _piece_image_samples(ctx, label, samples)
    cloud: list[complex] = []
    for q in image_pts:
        try:
            cloud.append(apply_branches(ctx.map, s.prefix(mper * n), q))
        except SingularValueHit:
            excluded += 1
    if not cloud:
        return PieceEstimate(0.0, n, 0, excluded, empty=True)
    arr = np.array(cloud)
    d = np.abs(arr[:, None] - arr[None, :])
    return PieceEstimate(float(d.max()), n, len(cloud), excluded, empty=False)


def piece_mapping_check(ctx: TailContext, s: InfiniteAddress, j: int,
                        samples: int = 24) -> PieceMapCheck:
    """Checks f^m(P_j(s)) = P_{j-1}(sigma^m s) on sampled points of P_j."""
    if j < 2:
        raise ValueError("piece mapping needs j >= 2 (P_0 is undefined)")
    mper = ctx.cycle.period
    label = s.entry(mper * j)
    image_pts, excluded = _piece_image_samples(ctx, label, samples)
    sa = shift_by(s, mper)
    checked = 0
    failed = 0
    for q in image_pts:
        try:
            z = apply_branches(ctx.map, s.prefix(mper * j), q)
        except SingularValueHit:
            excluded += 1
            continue
        w = z
        for _ in range(mper):
            w = evaluate(ctx.map, w)
        if is_escaped(w):
            failed += 1
            checked += 1
            continue
        try:
            in_hi = tail_membership(ctx, project(sa, j, mper), w)
            in_lo = tail_membership(ctx, project(sa, j - 1, mper), w)
        except OnArcError:
            excluded += 1
            continue
        checked += 1
        if not (in_hi and not in_lo):
            failed += 1
    return PieceMapCheck(passed=(checked > 0 and failed == 0), level=j,
                         n_checked=checked, n_excluded=excluded,
                         n_failed=failed)


def tail_diagnostics(ctx: TailContext, s: InfiniteAddress, max_level: int,
                     samples: int = 16) -> list[dict]:
    """JSON-friendly per-level record: existence, witness, piece diameter."""
    out = []
    for n in range(1, max_level + 1):
        rec = tail_exists(ctx, s, n)
        entry: dict = {
            "address": list(rec.address),
            "level": n,
            "exists": rec.exists,
            "reason": rec.reason,
        }
        if rec.witness is not None:
            entry["witness"] = [rec.witness.real, rec.witness.imag]
        est = piece_diameter(ctx, s, n, samples=samples)
        entry["piece_diameter"] = est.diameter
        entry["piece_samples"] = est.n_samples
        entry["piece_empty"] = est.empty
        out.append(entry)
    return out
