"""Refined Fatou-Shishikura audit.

Counts indifferent cycles and invisible-candidate repelling cycles against
the number of singular orbits outside attracting/parabolic basins.  A finite
search can never certify rational invisibility, so repelling cycles without
a found landing address are always reported as candidates, cross-referenced
with trapped-singular-orbit evidence.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .addresses import InfiniteAddress, enumerate_periodic, period_of
from .cycles import Box, Cycle, CycleSearch, find_cycles
from .exponential import MapModel, evaluate, is_escaped
from .rays import LandingResult, SingularFate, landing_point, singular_escape_status
from .regions import OnArcError, PointLocationError, build_ray_graph
from .tails import choose_radius

SCHEMA_VERSION = "1"
DEFAULT_MATCH_TOL = 1e-6
_BASIN_STREAK = 50


@dataclass
class LandingSearch:
    cycle: Cycle
    addresses: list[InfiniteAddress]          # addresses landing at the cycle
    failures: list[tuple[InfiniteAddress, str]]  # searched addresses that did not land
    equal_period_ok: bool

    @property
    def invisible_candidate(self) -> bool:
        return not self.addresses


def landing_search(m: MapModel, cycle: Cycle, window: int, period_cap: int,
                   match_tol: float = DEFAULT_MATCH_TOL,
                   landing_tol: float = 1e-10,
                   threads: int = 1) -> LandingSearch:
    """All window addresses whose rays land on the cycle (finite search).

    Candidate ray periods are the multiples of the cycle period up to
    period_cap; rays landing at a period-m orbit always have period a
    multiple of m.
    """
    if not cycle.is_repelling:
        raise ValueError("landing search is defined for repelling cycles")
    mper = cycle.period
    candidates: list[InfiniteAddress] = []
    q = 1
    while q * mper <= period_cap:
        candidates.extend(s for s in enumerate_periodic(window, q * mper)
                          if period_of(s) == q * mper)
        q += 1

    def attempt(s: InfiniteAddress) -> LandingResult:
        return landing_point(m, s, tol=landing_tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(attempt, candidates))
    else:
        results = [attempt(s) for s in candidates]

    matched: list[InfiniteAddress] = []
    failures: list[tuple[InfiniteAddress, str]] = []
    for s, res in zip(candidates, results):
        if not res.landed:
            failures.append((s, res.status))
            continue
        if min(abs(res.point - z) for z in cycle.points) < match_tol:
            matched.append(s)
    periods = {period_of(s) for s in matched}
    return LandingSearch(cycle=cycle, addresses=matched, failures=failures,
                         equal_period_ok=len(periods) <= 1)


def _basin_absorbed(m: MapModel, cycles: list[Cycle], horizon: int,
                    tol: float = 1e-6) -> int | None:
    """Index of the non-repelling cycle absorbing the singular orbit, if any.

    Absorption means distance < tol to some cycle point for 50 consecutive
    iterates (attracting or parabolic-suspected targets).
    """
    targets = [(i, cyc) for i, cyc in enumerate(cycles)
               if cyc.is_attracting or cyc.cls == "parabolic-suspected"]
    if not targets:
        return None
    z = m.c
    streaks = {i: 0 for i, _ in targets}
    for _ in range(horizon):
        z = evaluate(m, z)
        if is_escaped(z):
            return None
        for i, cyc in targets:
            if min(abs(z - w) for w in cyc.points) < tol:
                streaks[i] += 1
                if streaks[i] >= _BASIN_STREAK:
                    return i
            else:
                streaks[i] = 0
    return None


@dataclass
class CensusReport:
    config: dict
    map_c: complex
    map_R: float
    cycles: list[Cycle]
    searches: list[LandingSearch]
    fate: SingularFate
    basin_cycle_index: int | None
    n_attracting: int = 0
    n_indifferent: int = 0
    n_parabolic_suspected: int = 0
    n_repelling: int = 0
    n_invisible_candidates: int = 0
    q: int = 1
    q_effective: int = 1
    singular_status: str = "undetermined"
    rays_land_in_window: bool = True
    warnings: list[str] = field(default_factory=list)
    trichotomy: list[dict] = field(default_factory=list)
    verdict: str = "not-applicable"

    def to_json_dict(self) -> dict:
        search_by_cycle = {id(s.cycle): s for s in self.searches}
        cycles_json = []
        for cyc in self.cycles:
            d = cyc.to_json_dict()
            if cyc.is_repelling:
                search = search_by_cycle.get(id(cyc))
                if search is not None:
                    d["landing_addresses"] = [str(a) for a in search.addresses]
                    d["invisible_candidate"] = search.invisible_candidate
                    d["equal_period_ok"] = search.equal_period_ok
            cycles_json.append(d)
        fate_json = {
            "kind": self.fate.kind,
            "horizon": self.fate.horizon,
            "max_modulus": self.fate.max_modulus,
        }
        if self.fate.address is not None:
            fate_json["address"] = str(self.fate.address)
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "map": {"family": "exponential",
                    "c": [self.map_c.real, self.map_c.imag],
                    "R": self.map_R},
            "cycles": cycles_json,
            "counts": {
                "attracting": self.n_attracting,
                "indifferent": self.n_indifferent,
                "parabolic_suspected": self.n_parabolic_suspected,
                "repelling": self.n_repelling,
                "invisible_candidates": self.n_invisible_candidates,
            },
            "q": self.q,
            "q_effective": self.q_effective,
            "singular": {
                "status": self.singular_status,
                "escape": fate_json,
                "basin_cycle_index": self.basin_cycle_index,
            },
            "hypotheses": {
                "periodic_rays_land_in_window": self.rays_land_in_window,
                "singular_escapes_along_periodic_ray":
                    self.fate.kind == "escapes-along-periodic-ray",
            },
            "trichotomy": self.trichotomy,
            "warnings": self.warnings,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return dumps_canonical(self.to_json_dict())

    def to_csv_rows(self) -> list[list[str]]:
        header = ["period", "z0_re", "z0_im", "multiplier_re", "multiplier_im",
                  "abs_multiplier", "class", "landing_addresses",
                  "invisible_candidate"]
        rows = [header]
        search_by_cycle = {id(s.cycle): s for s in self.searches}
        for cyc in self.cycles:
            search = search_by_cycle.get(id(cyc))
            addrs = ";".join(str(a) for a in search.addresses) if search else ""
            inv = str(search.invisible_candidate).lower() if search else ""
            z0 = cyc.points[0]
            rows.append([
                str(cyc.period),
                format(z0.real, ".17g"), format(z0.imag, ".17g"),
                format(cyc.multiplier.real, ".17g"),
                format(cyc.multiplier.imag, ".17g"),
                format(abs(cyc.multiplier), ".17g"),
                cyc.cls, addrs, inv,
            ])
        return rows


def dumps_canonical(doc) -> str:
    """Deterministic JSON: schema-ordered keys, repr floats, no NaN."""
    return json.dumps(doc, indent=2, allow_nan=False)


def _trichotomy_evidence(m: MapModel, cycle: Cycle, window: int, depth: int,
                         horizon: int, box: Box, grid: int) -> dict:
    """choose_radius/itinerary evidence for one invisible candidate."""
    evidence: dict = {"cycle_period": cycle.period,
                      "cycle_z0": [cycle.points[0].real, cycle.points[0].imag]}
    try:
        graph = build_ray_graph(m, cycle.period, window, depth=depth, box=box,
                                grid=grid)
        b_regions = tuple(graph.region_near(z) for z in cycle.points)
        res = choose_radius(m, cycle, graph, b_regions, horizon)
        evidence["graph_failures"] = [[str(s), st] for s, st in graph.failures]
        evidence["radius_status"] = res.status
        evidence["follow_steps"] = res.follow_steps
        if res.r is not None:
            evidence["r"] = res.r
        if res.status == "trapped-unbounded":
            evidence["case"] = "singular orbit escapes while following the " \
                               "cycle regions (case 1/2 evidence at horizon)"
        elif res.follow_steps >= horizon:
            evidence["case"] = "singular orbit follows the cycle regions to " \
                               "the horizon (case 1 evidence, bounded)"
        else:
            evidence["case"] = "no trapped singular orbit observed at this " \
                               "horizon (numerics or window limitation)"
    except (OnArcError, PointLocationError, ValueError) as exc:
        evidence["error"] = str(exc)
    return evidence


def audit(m: MapModel, box: Box, max_period: int, window: int,
          depth: int = 40, horizon: int = 1000, grid: int = 40,
          probe_grid: int = 120, tol: float = 1e-12,
          tol_band: float = 1e-6, landing_tol: float = 1e-10,
          match_tol: float = DEFAULT_MATCH_TOL, threads: int = 1,
          config: dict | None = None) -> CensusReport:
    """Full census pipeline: cycles, landing searches, counts, verdict."""
    search: CycleSearch = find_cycles(m, max_period, box, grid=grid, tol=tol,
                                      tol_band=tol_band)
    cycles = search.cycles
    fate = singular_escape_status(m, horizon)
    basin_idx = _basin_absorbed(m, cycles, horizon)

    report = CensusReport(
        config=config or {}, map_c=m.c, map_R=m.R, cycles=cycles,
        searches=[], fate=fate, basin_cycle_index=basin_idx)
    report.warnings.extend(search.warnings)
    report.n_attracting = sum(c.is_attracting for c in cycles)
    report.n_indifferent = sum(c.cls == "indifferent" for c in cycles)
    report.n_parabolic_suspected = sum(c.cls == "parabolic-suspected" for c in cycles)
    report.n_repelling = sum(c.is_repelling for c in cycles)
    report.q = 1  # the exponential family has one singular orbit
    report.q_effective = 0 if basin_idx is not None else 1

    if basin_idx is not None:
        report.singular_status = "in-attracting-or-parabolic-basin"
    elif fate.kind in ("escapes-along-periodic-ray", "escapes-other"):
        report.singular_status = {"escapes-along-periodic-ray":
                                  "escaping-along-periodic-ray",
                                  "escapes-other": "escaping-other"}[fate.kind]

    if fate.kind == "escapes-along-periodic-ray":
        report.verdict = "not-applicable"
        report.warnings.append(
            f"singular value escapes along periodic ray {fate.address}; "
            "the census requires no such escape")
        return report

    for cyc in cycles:
        if not cyc.is_repelling:
            continue
        ls = landing_search(m, cyc, window, max_period * cyc.period,
                            match_tol=match_tol, landing_tol=landing_tol,
                            threads=threads)
        report.searches.append(ls)
        if not ls.equal_period_ok:
            report.warnings.append(
                f"cycle at {cyc.points[0]!r}: landing addresses of unequal "
                "period (numerics red flag)")
        for s, status in ls.failures:
            report.rays_land_in_window = False
            report.warnings.append(f"address {s} did not land: {status}")

    report.n_invisible_candidates = sum(
        ls.invisible_candidate for ls in report.searches)

    if not report.rays_land_in_window:
        report.verdict = "not-applicable"
        report.warnings.append("landing failures in window; the separation "
                               "structure of the ray graph is not verified")
        return report

    for ls in report.searches:
        if ls.invisible_candidate:
            ev = _trichotomy_evidence(m, ls.cycle, window, depth, horizon,
                                      box, probe_grid)
            report.trichotomy.append(ev)
            if report.singular_status == "undetermined" and \
                    ev.get("follow_steps", 0) >= horizon:
                report.singular_status = f"trapped-case-1(horizon={horizon})"

    lhs = report.n_indifferent + report.n_invisible_candidates
    report.verdict = "satisfied" if lhs <= report.q_effective else "violated"
    if report.verdict == "violated":
        report.warnings.append(
            "inequality violated: treat as a bug or numerics failure; "
            "reproduction parameters are embedded in this report")
    return report
