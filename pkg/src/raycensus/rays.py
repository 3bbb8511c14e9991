"""Dynamic rays by backward iteration: tracing, pullback, landing.

Inverse-branch compositions contract toward periodic points, so the pullback
of a far-out seed along a periodic address converges exactly when the ray
lands (and to the landing point).  All statuses are finite-computation
verdicts: "not-converged" never claims non-landing.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .addresses import InfiniteAddress, period_of
from .exponential import (
    TWO_PI,
    MapModel,
    SingularValueHit,
    evaluate,
    fundamental_domain_of,
    inverse_branch,
    is_escaped,
    strip_of,
)

#: |z| beyond this is treated as escaped in forward orbits
ESCAPE_THRESHOLD = 1e5

#: ladder potentials are not exponentiated past this height
_LADDER_CAP = 600.0

DEFAULT_LANDING_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


class RoundTripError(ArithmeticError):
    """Pullback failed its internal forward re-expansion check."""


@dataclass
class Ray:
    """Sampled dynamic ray: (potential, point) pairs ordered by potential."""

    address: InfiniteAddress
    samples: list[tuple[float, complex]]
    depth: int
    map: MapModel
    kind: str = "sweep"  # "sweep" (ladder potentials) or "seed" (literal formula)
    depth_deltas: list[float] = field(default_factory=list)
    converged: bool = True

    @property
    def points(self) -> list[complex]:
        return [z for _, z in self.samples]


@dataclass
class LandingResult:
    status: str  # landed | not-converged | escaped-pullback | singular-hit
    point: complex | None = None
    psi_derivative: complex | None = None
    multiplier: complex | None = None
    iterations: int = 0
    itinerary_ok: bool | None = None
    detail: str = ""

    @property
    def landed(self) -> bool:
        return self.status == "landed"


def apply_branches(m: MapModel, labels: tuple[int, ...], w: complex) -> complex:
    """L_{labels[0]} o ... o L_{labels[-1]} applied to w (rightmost first)."""
    for k in reversed(labels):
        w = inverse_branch(m, w, k)
    return w


def pullback_sequence(m: MapModel, s: InfiniteAddress, zeta: complex,
                      steps: int) -> list[complex]:
    """[zeta, L_{s_{k}}..L_{s_0}-style partial pullbacks] of length steps+1.

    seq[j] = L_{s_{steps-j}} o ... o L_{s_{steps-1}} (zeta), so seq[-1] is the
    full composition L_{s_0} o ... o L_{s_{steps-1}}(zeta).
    """
    seq = [zeta]
    for i in range(steps - 1, -1, -1):
        seq.append(inverse_branch(m, seq[-1], s.entry(i)))
    return seq


def verify_pullback_roundtrip(m: MapModel, seq: list[complex],
                              tol_scale: float = 1e-8) -> float:
    """Largest stepwise forward-map residual of a recorded pullback chain.

    For each backward step the forward image must return the previous iterate
    within tol_scale * max(1, |previous|); this is the double-precision
    content of f^{nm}(zeta_n) = zeta (the one-shot residual is condition
    limited by prod |f'| and is not asserted here).
    """
    worst = 0.0
    for prev, cur in zip(seq, seq[1:]):
        img = evaluate(m, cur)
        if is_escaped(img):
            raise RoundTripError(f"re-expansion escaped at {cur!r}")
        rel = abs(img - prev) / max(1.0, abs(prev))
        worst = max(worst, rel)
        if rel > tol_scale:
            raise RoundTripError(
                f"round-trip residual {rel:.3e} exceeds {tol_scale:.1e}")
    return worst


def pullback_along_address(m: MapModel, s: InfiniteAddress, zeta: complex,
                           n: int, m_steps: int = 1) -> complex:
    """zeta_n(s): the branch composition over the first n*m_steps labels.

    Raises SingularValueHit when the composition meets c or the cut, and
    RoundTripError when the internal re-expansion check fails.
    """
    if n < 0 or m_steps < 1:
        raise ValueError("n must be >= 0 and m >= 1")
    seq = pullback_sequence(m, s, zeta, n * m_steps)
    verify_pullback_roundtrip(m, seq)
    return seq[-1]


def default_seed(m: MapModel, s: InfiniteAddress) -> complex:
    return complex(m.seed_potential, TWO_PI * s.entry(0))


def _newton_polish(m: MapModel, z: complex, p: int, tol: float) -> complex | None:
    """Newton on f^p(z) - z from an already-close seed; None on failure."""
    for _ in range(30):
        w = z
        d = complex(1.0, 0.0)
        for _ in range(p):
            if w.real > 600.0:
                return None
            e = cmath.exp(w)
            d *= e
            w = e + m.c
        g = w - z
        gp = d - 1.0
        if abs(gp) < 1e-30:
            return None
        step = g / gp
        z = z - step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            return z
    return z if abs(step) < tol else None


def landing_point(m: MapModel, s: InfiniteAddress, zeta: complex | None = None,
                  tol: float = DEFAULT_LANDING_TOL,
                  max_iter: int = DEFAULT_MAX_ITER) -> LandingResult:
    """Pullback-iteration landing decision for a purely periodic address.

    Iterates the one-period inverse composition psi = L_{s_0} o ... o
    L_{s_{p-1}}; on convergence the limit is Newton-polished on f^p(z) - z
    and reported together with psi'(z0) = 1/(f^p)'(z0).
    """
    p = period_of(s)
    if p <= 0:
        raise ValueError("landing_point requires a purely periodic address")
    w = default_seed(m, s) if zeta is None else zeta
    labels = tuple(s.entry(i) for i in range(p))
    for it in range(1, max_iter + 1):
        try:
            w_next = apply_branches(m, labels, w)
        except SingularValueHit as exc:
            return LandingResult("singular-hit", iterations=it,
                                 detail="cut" if exc.on_cut else "singular-value")
        if abs(w_next) > ESCAPE_THRESHOLD:
            return LandingResult("escaped-pullback", iterations=it)
        if abs(w_next - w) < tol:
            w = w_next
            break
        w = w_next
    else:
        return LandingResult("not-converged", iterations=max_iter)

    z0 = _newton_polish(m, w, p, tol)
    if z0 is None or abs(z0 - w) > 1e3 * tol * max(1.0, abs(w)):
        # Newton drifted away from the pullback limit; keep the raw limit.
        z0 = w
    try:
        psi_z0 = apply_branches(m, labels, z0)
    except SingularValueHit as exc:
        return LandingResult("singular-hit", iterations=it,
                             detail="cut" if exc.on_cut else "singular-value")
    if abs(psi_z0 - z0) >= tol * max(1.0, abs(z0)):
        return LandingResult("not-converged", iterations=it,
                             detail="limit is not a psi fixed point")

    orbit = [z0]
    lam = complex(1.0, 0.0)
    itinerary_ok = True
    for j in range(p):
        zj = orbit[-1]
        if strip_of(zj) != s.entry(j):
            itinerary_ok = False
        lam *= cmath.exp(zj)
        orbit.append(evaluate(m, zj))
    if is_escaped(orbit[-1]) or abs(orbit[-1] - z0) > 10.0 * tol * max(1.0, abs(z0)):
        return LandingResult("not-converged", iterations=it,
                             detail="forward orbit does not close")
    return LandingResult("landed", point=z0, psi_derivative=1.0 / lam,
                         multiplier=lam, iterations=it,
                         itinerary_ok=itinerary_ok)


# ---------------------------------------------------------------------------
# tracing

def trace_ray(m: MapModel, s: InfiniteAddress, depth: int,
              t_grid: list[float], conv_tol: float = 1e-9) -> Ray:
    """Literal backward trace: sample(t) = L_{s_0}..L_{s_{N-1}}(t + 2pi i s_N).

    The potential here is the seed height before pullback.  Depth-to-depth
    movement at the deepest level is recorded; the ray is flagged
    non-converged when it exceeds conv_tol anywhere.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if any(t <= 0 for t in t_grid):
        raise ValueError("potentials must be positive")
    samples: list[tuple[float, complex]] = []
    deltas: list[float] = []
    converged = True
    for t in sorted(t_grid):
        seed = complex(t, TWO_PI * s.entry(depth))
        z = apply_branches(m, tuple(s.entry(i) for i in range(depth)), seed)
        if depth > 0:
            seed_prev = complex(t, TWO_PI * s.entry(depth - 1))
            z_prev = apply_branches(
                m, tuple(s.entry(i) for i in range(depth - 1)), seed_prev)
            delta = abs(z - z_prev)
        else:
            delta = math.inf
        samples.append((t, z))
        deltas.append(delta)
        if depth > 0 and delta > conv_tol:
            converged = False
    return Ray(address=s, samples=samples, depth=depth, map=m, kind="seed",
               depth_deltas=deltas, converged=converged)


def ladder_descend(m: MapModel, s: InfiniteAddress, t: float,
                   depth: int) -> list[complex]:
    """Pullback chain of the ladder seed at potential t, deepest point first.

    Returns [z, f(z), f^2(z), ...] up to the seed (exact to round-off, since
    the chain is built backwards through the inverse branches); z is the hair
    sample at potential t.  The flow is F(u) = e^u - 1, climbed until the cap
    (or depth); truncating at the cap costs O(e^-cap), far below roundoff.
    """
    u = t
    j = 0
    while u <= _LADDER_CAP and j < depth:
        u = math.exp(u) - 1.0
        j += 1
    chain = [complex(u, TWO_PI * s.entry(j))]
    for i in range(j - 1, -1, -1):
        chain.append(inverse_branch(m, chain[-1], s.entry(i)))
    chain.reverse()
    return chain


def _ladder_sample(m: MapModel, s: InfiniteAddress, t: float, depth: int) -> complex:
    return ladder_descend(m, s, t, depth)[0]


def sweep_hair(m: MapModel, s: InfiniteAddress, depth: int = 60,
               t_lo: float = 1e-3, t_hi: float | None = None,
               samples: int = 160) -> Ray:
    """Geometric sweep of the hair as a point set, ordered by potential.

    Covers the curve from deep pullbacks (t_lo near 0) out to the seed
    height t_hi; f(sample(t)) equals the shifted-address sample at e^t - 1.
    """
    if t_hi is None:
        t_hi = m.truncation + 10.0
    if not (0.0 < t_lo < t_hi):
        raise ValueError("need 0 < t_lo < t_hi")
    ratio = (t_hi / t_lo) ** (1.0 / (samples - 1))
    pts: list[tuple[float, complex]] = []
    for i in range(samples):
        t = t_lo * ratio**i
        pts.append((t, _ladder_sample(m, s, t, depth)))
    return Ray(address=s, samples=pts, depth=depth, map=m, kind="sweep")


# ---------------------------------------------------------------------------
# singular orbit

@dataclass
class SingularFate:
    kind: str  # escapes-along-periodic-ray | escapes-other | bounded-so-far | enters-D-repeatedly
    address: InfiniteAddress | None
    horizon: int
    orbit: list[complex]
    max_modulus: float
    detail: str = ""


def _periodic_tail(labels: list[int]) -> tuple[int, ...] | None:
    """Smallest q whose repetition matches the observed label tail."""
    n = len(labels)
    if n < 2:
        return None
    for q in range(1, n // 2 + 1):
        span = max(2 * q, min(n, 4))
        tail = labels[-span:]
        if all(tail[i] == tail[i + q] for i in range(len(tail) - q)):
            return tuple(labels[-q:])
    return None


def singular_escape_status(m: MapModel, horizon: int) -> SingularFate:
    """Finite-horizon fate of the singular orbit c, f(c), f^2(c), ...

    Escape verdicts require monotone moduli past the escape threshold with an
    eventually periodic fundamental-domain label tail; every verdict is a
    statement about the first `horizon` iterates only.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    orbit: list[complex] = [m.c]
    escaped = False
    for _ in range(horizon):
        z = evaluate(m, orbit[-1])
        if is_escaped(z) or abs(z) > ESCAPE_THRESHOLD:
            escaped = True
            if not is_escaped(z):
                orbit.append(z)
            break
        orbit.append(z)
    max_mod = max(abs(z) for z in orbit)

    if escaped:
        # walk back to the start of the monotone increasing tail
        k = len(orbit) - 1
        while k > 0 and abs(orbit[k]) > abs(orbit[k - 1]):
            k -= 1
        tail = orbit[k:]
        labels = [fundamental_domain_of(m, z) for z in tail]
        known = [lab for lab in labels if lab is not None]
        if len(known) >= 2 and labels[-len(known):] == known:
            word = _periodic_tail(known)
            if word is not None:
                return SingularFate("escapes-along-periodic-ray",
                                    InfiniteAddress((), word), horizon, orbit,
                                    max_mod)
        return SingularFate("escapes-other", None, horizon, orbit, max_mod,
                            detail="label tail not eventually periodic")

    # bounded at this horizon: look for large excursions that return to D
    reentries = 0
    excursion = False
    for z in orbit:
        if abs(z) > 100.0 * m.R:
            excursion = True
        elif excursion and abs(z) <= m.R:
            reentries += 1
            excursion = False
    if reentries >= 2:
        return SingularFate("enters-D-repeatedly", None, horizon, orbit, max_mod)
    return SingularFate("bounded-so-far", None, horizon, orbit, max_mod)
