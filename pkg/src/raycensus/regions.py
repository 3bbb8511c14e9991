"""Graph of landed rays fixed by f^p and basic-region point location.

Regions are operational objects: equivalence classes of a probe grid under
"connected by a segment that crosses no arc", refined by exact
segment-crossing tests.  All region claims are grid-relative; true connected
components of the plane minus the graph are not finitely computable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .addresses import InfiniteAddress, enumerate_periodic
from .cycles import Box, Cycle
from .exponential import MapModel, evaluate, is_escaped
from .rays import (
    ESCAPE_THRESHOLD,
    LandingResult,
    SingularValueHit,
    _ladder_sample,
    landing_point,
)

SNAP_TOL = 1e-9
_X_FAR = 1e7  # horizontal extension of arcs beyond truncation


class OnArcError(ValueError):
    """Query point lies on (or within snap tolerance of) the ray graph."""


class PointLocationError(RuntimeError):
    pass


@dataclass
class Arc:
    address: InfiniteAddress
    vertices: list[complex]  # landing point first, then outward, then extension
    landing: complex


# ---------------------------------------------------------------------------
# segment predicates (scalar twin of the vectorized versions below)

def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px, py):
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def segments_cross(a: complex, b: complex, c: complex, d: complex) -> bool:
    """True when segments ab and cd share any point (touch counts)."""
    d1 = _orient(c.real, c.imag, d.real, d.imag, a.real, a.imag)
    d2 = _orient(c.real, c.imag, d.real, d.imag, b.real, b.imag)
    d3 = _orient(a.real, a.imag, b.real, b.imag, c.real, c.imag)
    d4 = _orient(a.real, a.imag, b.real, b.imag, d.real, d.imag)
    if (d1 > 0) != (d2 > 0) and (d3 > 0) != (d4 > 0) \
            and 0 not in (d1, d2, d3, d4):
        return True
    if d1 == 0 and _on_segment(c.real, c.imag, d.real, d.imag, a.real, a.imag):
        return True
    if d2 == 0 and _on_segment(c.real, c.imag, d.real, d.imag, b.real, b.imag):
        return True
    if d3 == 0 and _on_segment(a.real, a.imag, b.real, b.imag, c.real, c.imag):
        return True
    if d4 == 0 and _on_segment(a.real, a.imag, b.real, b.imag, d.real, d.imag):
        return True
    return False


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        p = self.parent
        while p[i] != i:
            p[i] = p[p[i]]
            i = p[i]
        return i

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            if rj < ri:
                ri, rj = rj, ri
            self.parent[rj] = ri


# ---------------------------------------------------------------------------

@dataclass
class RayGraph:
    map: MapModel
    p: int
    window: int
    depth: int
    box: Box
    grid: int
    arcs: list[Arc]
    failures: list[tuple[InfiniteAddress, str]]
    _segs: np.ndarray = field(default=None, repr=False)  # (n, 4): ax ay bx by
    _cells: dict[tuple[int, int], list[int]] = field(default_factory=dict, repr=False)
    _region_of_probe: list[int] = field(default_factory=list, repr=False)
    _representatives: list[complex] = field(default_factory=list, repr=False)

    # -- grid helpers -------------------------------------------------------
    def _cell_size(self) -> tuple[float, float]:
        xlo, xhi, ylo, yhi = self.box
        return (xhi - xlo) / self.grid, (yhi - ylo) / self.grid

    def _probe(self, ix: int, iy: int) -> complex:
        xlo, _, ylo, _ = self.box
        dx, dy = self._cell_size()
        return complex(xlo + (ix + 0.5) * dx, ylo + (iy + 0.5) * dy)

    def _cell_of(self, z: complex) -> tuple[int, int]:
        xlo, _, ylo, _ = self.box
        dx, dy = self._cell_size()
        ix = min(self.grid - 1, max(0, int((z.real - xlo) / dx)))
        iy = min(self.grid - 1, max(0, int((z.imag - ylo) / dy)))
        return ix, iy

    def _index_segments(self):
        xlo, xhi, ylo, yhi = self.box
        for si in range(len(self._segs)):
            ax, ay, bx, by = self._segs[si]
            x0, x1 = min(ax, bx), max(ax, bx)
            y0, y1 = min(ay, by), max(ay, by)
            if x1 < xlo or x0 > xhi or y1 < ylo or y0 > yhi:
                continue
            a0, b0 = self._cell_of(complex(x0, y0))
            a1, b1 = self._cell_of(complex(x1, y1))
            for ix in range(max(0, a0 - 1), min(self.grid, a1 + 2)):
                for iy in range(max(0, b0 - 1), min(self.grid, b1 + 2)):
                    self._cells.setdefault((ix, iy), []).append(si)

    # -- crossing machinery -------------------------------------------------
    def _crossings_all(self, a: complex, b: complex) -> int:
        """Number of stored segments meeting segment ab (vectorized)."""
        if len(self._segs) == 0:
            return 0
        cx, cy, dx, dy = (self._segs[:, 0], self._segs[:, 1],
                          self._segs[:, 2], self._segs[:, 3])
        d1 = (dx - cx) * (a.imag - cy) - (dy - cy) * (a.real - cx)
        d2 = (dx - cx) * (b.imag - cy) - (dy - cy) * (b.real - cx)
        d3 = (b.real - a.real) * (cy - a.imag) - (b.imag - a.imag) * (cx - a.real)
        d4 = (b.real - a.real) * (dy - a.imag) - (b.imag - a.imag) * (dx - a.real)
        proper = (((d1 > 0) != (d2 > 0)) & ((d3 > 0) != (d4 > 0))
                  & (d1 != 0) & (d2 != 0) & (d3 != 0) & (d4 != 0))

        def onseg(px, py, qx, qy, rx, ry):
            return ((np.minimum(px, qx) <= rx) & (rx <= np.maximum(px, qx))
                    & (np.minimum(py, qy) <= ry) & (ry <= np.maximum(py, qy)))

        touch = (((d1 == 0) & onseg(cx, cy, dx, dy, a.real, a.imag))
                 | ((d2 == 0) & onseg(cx, cy, dx, dy, b.real, b.imag))
                 | ((d3 == 0) & onseg(a.real, a.imag, b.real, b.imag, cx, cy))
                 | ((d4 == 0) & onseg(a.real, a.imag, b.real, b.imag, dx, dy)))
        return int(np.count_nonzero(proper | touch))

    def _edge_crosses(self, a: complex, b: complex) -> bool:
        """Cell-indexed crossing test for short in-box probe edges."""
        c0 = self._cell_of(a)
        c1 = self._cell_of(b)
        cand: set[int] = set()
        for ix in range(min(c0[0], c1[0]), max(c0[0], c1[0]) + 1):
            for iy in range(min(c0[1], c1[1]), max(c0[1], c1[1]) + 1):
                cand.update(self._cells.get((ix, iy), ()))
        for si in sorted(cand):
            ax, ay, bx, by = self._segs[si]
            if segments_cross(a, b, complex(ax, ay), complex(bx, by)):
                return True
        return False

    def _build_regions(self):
        n = self.grid * self.grid
        uf = _UnionFind(n)
        for iy in range(self.grid):
            for ix in range(self.grid):
                i = iy * self.grid + ix
                p = self._probe(ix, iy)
                if ix + 1 < self.grid and not self._edge_crosses(p, self._probe(ix + 1, iy)):
                    uf.union(i, iy * self.grid + ix + 1)
                if iy + 1 < self.grid and not self._edge_crosses(p, self._probe(ix, iy + 1)):
                    uf.union(i, (iy + 1) * self.grid + ix)
        ids: dict[int, int] = {}
        self._region_of_probe = [0] * n
        self._representatives = []
        for i in range(n):
            root = uf.find(i)
            if root not in ids:
                ids[root] = len(ids)
                self._representatives.append(self._probe(i % self.grid, i // self.grid))
            self._region_of_probe[i] = ids[root]

    # -- queries ------------------------------------------------------------
    @property
    def region_count(self) -> int:
        return len(self._representatives)

    def representative(self, region_id: int) -> complex:
        return self._representatives[region_id]

    def distance_to_graph(self, z: complex) -> float:
        if len(self._segs) == 0:
            return math.inf
        ax, ay, bx, by = (self._segs[:, 0], self._segs[:, 1],
                          self._segs[:, 2], self._segs[:, 3])
        ux, uy = bx - ax, by - ay
        denom = ux * ux + uy * uy
        t = ((z.real - ax) * ux + (z.imag - ay) * uy) / np.where(denom == 0, 1.0, denom)
        t = np.clip(t, 0.0, 1.0)
        px, py = ax + t * ux, ay + t * uy
        return float(np.sqrt(np.min((z.real - px) ** 2 + (z.imag - py) ** 2)))

    def basic_region_of(self, z: complex, snap: float = SNAP_TOL) -> int:
        """Region id of z; OnArcError within snap of the graph."""
        if is_escaped(z):
            raise PointLocationError("escaped point has no region")
        if self.distance_to_graph(z) < snap:
            raise OnArcError(f"{z!r} lies on the ray graph")
        cx, cy = self._cell_of(z)
        tried = 0
        for ring in range(0, self.grid):
            cand = []
            for ix in range(cx - ring, cx + ring + 1):
                for iy in range(cy - ring, cy + ring + 1):
                    if max(abs(ix - cx), abs(iy - cy)) != ring:
                        continue
                    if 0 <= ix < self.grid and 0 <= iy < self.grid:
                        cand.append((abs(self._probe(ix, iy) - z), ix, iy))
            for _, ix, iy in sorted(cand):
                probe = self._probe(ix, iy)
                tried += 1
                if self._crossings_all(z, probe) == 0:
                    return self._region_of_probe[iy * self.grid + ix]
                if tried > 600:
                    raise PointLocationError(f"no crossing-free path from {z!r}")
        raise PointLocationError(f"point location failed for {z!r}")

    def region_near_with_witness(self, z: complex,
                                 snap: float = SNAP_TOL) -> tuple[int, complex]:
        """Tolerant region id plus the (possibly offset) point that located it.

        On-arc points resolve to a deterministic side via compass probing.
        """
        try:
            return self.basic_region_of(z, snap), z
        except OnArcError:
            for radius in (1e-6, 1e-5, 1e-4, 1e-3, 1e-2):
                for k in range(8):
                    ang = math.pi * k / 4.0
                    w = z + radius * complex(math.cos(ang), math.sin(ang))
                    try:
                        return self.basic_region_of(w, snap), w
                    except (OnArcError, PointLocationError):
                        continue
            raise

    def region_near(self, z: complex, snap: float = SNAP_TOL) -> int:
        return self.region_near_with_witness(z, snap)[0]

    def on_graph(self, z: complex, snap: float = SNAP_TOL) -> bool:
        return self.distance_to_graph(z) < snap

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "window": self.window,
            "depth": self.depth,
            "box": list(self.box),
            "grid": self.grid,
            "arcs": [{
                "address": str(arc.address),
                "landing": [arc.landing.real, arc.landing.imag],
                "polyline": [[v.real, v.imag] for v in arc.vertices],
            } for arc in self.arcs],
            "failures": [[str(s), status] for s, status in self.failures],
            "regions": [{"id": i, "representative": [r.real, r.imag]}
                        for i, r in enumerate(self._representatives)],
        }


def _arc_polyline(m: MapModel, s: InfiniteAddress, z0: complex, depth: int,
                  land_tol: float, ratio: float = 0.8,
                  max_samples: int = 400) -> list[complex] | None:
    pts: list[complex] = []
    t = m.truncation + 10.0
    for _ in range(max_samples):
        z = _ladder_sample(m, s, t, depth)
        pts.append(z)
        if abs(z - z0) <= land_tol:
            pts.reverse()
            out = [z0] + ([] if pts[0] == z0 else pts)
            out.append(complex(_X_FAR, out[-1].imag))
            return out
        t *= ratio
    return None


def build_ray_graph(m: MapModel, p: int, window: int, depth: int = 40,
                    box: Box = (-3.0, 3.0, -7.0, 7.0), grid: int = 200,
                    land_tol: float = 1e-6,
                    landing_tol: float = 1e-10) -> RayGraph:
    """Graph of the landed rays fixed by f^p with window-bounded addresses.

    Addresses with failed landings are excluded and listed in `failures`
    (this changes region topology; consumers must treat the audit as
    poisoned when failures is nonempty).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    arcs: list[Arc] = []
    failures: list[tuple[InfiniteAddress, str]] = []
    for s in enumerate_periodic(window, p):
        try:
            res: LandingResult = landing_point(m, s, tol=landing_tol)
        except SingularValueHit:
            failures.append((s, "singular-hit"))
            continue
        if not res.landed:
            failures.append((s, res.status))
            continue
        try:
            poly = _arc_polyline(m, s, res.point, depth, land_tol)
        except SingularValueHit:
            failures.append((s, "singular-hit"))
            continue
        if poly is None:
            failures.append((s, "trace-not-converged"))
            continue
        arcs.append(Arc(address=s, vertices=poly, landing=res.point))

    segs = []
    for arc in arcs:
        for a, b in zip(arc.vertices, arc.vertices[1:]):
            segs.append((a.real, a.imag, b.real, b.imag))
    graph = RayGraph(map=m, p=p, window=window, depth=depth, box=box,
                     grid=grid, arcs=arcs, failures=failures,
                     _segs=np.array(segs, dtype=float).reshape(-1, 4))
    graph._index_segments()
    graph._build_regions()
    return graph


# ---------------------------------------------------------------------------

def itinerary(m: MapModel, graph: RayGraph, z: complex, n_steps: int) -> list:
    """Region ids of z, f(z), ..., f^{n_steps}(z) with in-band sentinels."""
    out: list = []
    w = z
    escaped = False
    for _ in range(n_steps + 1):
        if escaped or is_escaped(w) or abs(w) > ESCAPE_THRESHOLD:
            escaped = True
            out.append("escaped")
        else:
            try:
                out.append(graph.basic_region_of(w))
            except OnArcError:
                out.append("on-arc")
        if not escaped:
            w = evaluate(m, w)
    return out


@dataclass
class SeparationAudit:
    regions_to_points: dict[int, list[complex]]
    landing_matches: list[complex]
    on_arc: list[complex]
    violations: list[int]  # region ids holding two or more interior points
    poisoned: bool
    window: int

    @property
    def ok(self) -> bool:
        return not self.violations


def interior_fixed_point_audit(graph: RayGraph, cycles: list[Cycle],
                               match_tol: float = 1e-8) -> SeparationAudit:
    """Checks that no basic region holds two interior fixed points of f^p.

    Fixed points matching a landing point of the graph are not interior.
    A nonempty failure list on the graph poisons the verdict (the graph may
    be missing arcs, which merges regions).
    """
    landings = [arc.landing for arc in graph.arcs]
    regions: dict[int, list[complex]] = {}
    matched: list[complex] = []
    on_arc: list[complex] = []
    for cyc in cycles:
        if graph.p % cyc.period != 0:
            continue
        for z in cyc.points:
            if any(abs(z - w) < match_tol for w in landings):
                matched.append(z)
                continue
            try:
                rid = graph.basic_region_of(z)
            except OnArcError:
                on_arc.append(z)
                continue
            regions.setdefault(rid, []).append(z)
    violations = sorted(rid for rid, pts in regions.items() if len(pts) >= 2)
    return SeparationAudit(regions_to_points=regions, landing_matches=matched,
                           on_arc=on_arc, violations=violations,
                           poisoned=bool(graph.failures), window=graph.window)
