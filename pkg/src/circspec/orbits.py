"""Periodic orbits of the deterministic map and the phase partition.

Orbits are located by scanning ``F^p(x) - x - 2 pi m`` on a uniform grid for
every winding offset ``m`` that the sampled displacement allows.  Brackets are
solved with Brent's method and polished with Newton's method on the lift.

The phase partition splits the circle into neighbourhoods of the unstable
orbits, a transient region and neighbourhoods of the stable orbits, in that
block order, so that the discretised transition matrix is close to block
upper triangular.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BifurcationPointError,
    DomainError,
    HypothesisViolationError,
    InvalidOrbitError,
)
from .maps import TWO_PI, CircleMap, angle_diff, circle_distance, wrap_angle

log = logging.getLogger(__name__)

NEUTRAL_BAND = 1e-6
ORBIT_RESIDUAL_TOL = 1e-9
DEDUP_TOL = 1e-8


def classify_multiplier(c: float, band: float = NEUTRAL_BAND) -> str:
    if abs(c) < 1.0 - band:
        return "stable"
    if abs(c) > 1.0 + band:
        return "unstable"
    return "neutral"


@dataclass(frozen=True)
class PeriodicOrbit:
    """A periodic orbit ``x_1 -> x_2 -> ... -> x_p -> x_1``.

    ``derivatives[i]`` is ``f'(points[i])``; the multiplier is their product.
    ``winding`` is the integer ``m`` with ``F^p(x_1) = x_1 + 2 pi m``.
    """

    points: tuple
    period: int
    multiplier: float
    stability: str
    residual: float
    derivatives: tuple
    winding: int = 0

    @property
    def is_stable(self) -> bool:
        return self.stability == "stable"

    @property
    def is_neutral(self) -> bool:
        return self.stability == "neutral"

    def rotated(self, k: int) -> "PeriodicOrbit":
        """Same orbit listed from base point ``points[k]``."""
        k %= self.period
        pts = self.points[k:] + self.points[:k]
        ders = self.derivatives[k:] + self.derivatives[:k]
        return PeriodicOrbit(pts, self.period, float(np.prod(ders)), self.stability,
                             self.residual, ders, self.winding)

    def __repr__(self):
        pts = ", ".join(f"{x:.6f}" for x in self.points)
        return (f"PeriodicOrbit(p={self.period}, [{pts}], c={self.multiplier:.6g}, "
                f"{self.stability})")


def orbit_residual(cmap: CircleMap, points) -> float:
    pts = np.asarray(points, dtype=float)
    return float(np.max(circle_distance(cmap(pts), np.roll(pts, -1))))


def orbit_multiplier(cmap: CircleMap, points) -> float:
    """Product of ``f'`` over a closed orbit, independent of the starting point.

    Raises
    ------
    InvalidOrbitError
        If ``f(x_i)`` misses ``x_{i+1}`` (cyclically) by more than ``1e-6``.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise InvalidOrbitError("empty point list")
    res = orbit_residual(cmap, pts)
    if res > 1e-6:
        raise InvalidOrbitError(f"points do not form a closed orbit (residual {res:.3g})")
    return float(np.prod(cmap.deriv(pts)))


def make_orbit(cmap: CircleMap, x0: float, period: int, winding: int = 0) -> PeriodicOrbit:
    """Build a :class:`PeriodicOrbit` by iterating from ``x0``."""
    pts = [wrap_angle(x0)]
    for _ in range(period - 1):
        pts.append(cmap(pts[-1]))
    ders = tuple(float(d) for d in cmap.deriv(np.array(pts)))
    c = float(np.prod(ders))
    k = int(np.argmin(pts))
    orbit = PeriodicOrbit(tuple(pts), period, c, classify_multiplier(c),
                          orbit_residual(cmap, pts), ders, winding)
    return orbit.rotated(k)


# -- root finding -----------------------------------------------------------

def _newton_polish(cmap, x, p, m, max_iter=100):
    target = TWO_PI * m
    for it in range(max_iter):
        y, d = cmap.lift_iterate(x, p)
        g = y - x - target
        dg = d - 1.0
        if abs(g) <= 4e-15 * max(1.0, abs(y)):
            return x, True
        if abs(dg) < 1e-12:
            # degenerate root: the bracketed value is as good as it gets
            return x, abs(g) < 1e-11
        step = g / dg
        x = x - step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            return x, True
    return x, False


def _candidate_brackets(xs, G, refine_fn):
    """Brackets of sign changes of G, refining cells that may hide extra roots."""
    brackets = []
    n = len(G) - 1
    dG = np.abs(np.diff(G))
    sign_cells = np.nonzero(np.sign(G[:-1]) * np.sign(G[1:]) <= 0)[0]
    # near-touch: |G| has a local minimum smaller than the local variation
    aG = np.abs(G)
    loc = np.zeros(n + 1, dtype=bool)
    loc[1:-1] = (aG[1:-1] <= aG[:-2]) & (aG[1:-1] <= aG[2:])
    var = np.zeros(n + 1)
    var[1:-1] = np.maximum(dG[:-1], dG[1:])
    touch = np.nonzero(loc & (aG < 2.0 * var))[0]
    suspicious = set(sign_cells.tolist())
    for i in touch:
        suspicious.update((i - 1, i))
    # a sign-change cell with a small slope may contain several roots
    for i in sign_cells:
        if i > 0 and i < n - 1 and (dG[i] < 0.5 * max(dG[i - 1], dG[i + 1])):
            suspicious.update((i - 1, i + 1))
    for i in sorted(c for c in suspicious if 0 <= c < n):
        sub_x, sub_g = refine_fn(xs[i], xs[i + 1])
        s = np.nonzero(np.sign(sub_g[:-1]) * np.sign(sub_g[1:]) <= 0)[0]
        for k in s:
            brackets.append((sub_x[k], sub_x[k + 1], sub_g[k], sub_g[k + 1]))
    return brackets


def find_periodic_orbits(cmap: CircleMap, p_max: int, scan_n: int = 4096,
                         refine: int = 32) -> list[PeriodicOrbit]:
    """Locate all periodic orbits of minimal period ``<= p_max``.

    Parameters
    ----------
    cmap : CircleMap
    p_max : int
        Largest period searched (>= 1).
    scan_n : int
        Uniform scan resolution over one period of the circle (>= 256).
    refine : int
        Sub-samples used when a scan cell may contain more than one root.

    Returns
    -------
    list of PeriodicOrbit
        Sorted by period, then by smallest point.  Empty when nothing is found.
    """
    if p_max < 1:
        raise DomainError("p_max must be >= 1")
    if scan_n < 256:
        raise DomainError("scan_n must be >= 256")
    xs = np.linspace(-np.pi, np.pi, scan_n + 1)
    found: list[PeriodicOrbit] = []
    for p in range(1, p_max + 1):
        Fp, _ = cmap.lift_iterate(xs, p)
        g = Fp - xs
        m_lo = int(np.floor(g.min() / TWO_PI)) - 1
        m_hi = int(np.ceil(g.max() / TWO_PI)) + 1
        for m in range(m_lo, m_hi + 1):
            G = g - TWO_PI * m
            if G.min() > 0 or G.max() < 0:
                # still check near-misses at the extremes
                if min(abs(G.min()), abs(G.max())) > 1e-3:
                    continue

            def refine_fn(a, b, m=m):
                sx = np.linspace(a, b, refine + 1)
                return sx, cmap.lift_iterate(sx, p)[0] - sx - TWO_PI * m

            for a, b, ga, gb in _candidate_brackets(xs, G, refine_fn):
                gfun = lambda x, m=m: cmap.lift_iterate(x, p)[0] - x - TWO_PI * m
                if ga == 0.0:
                    x0 = a
                elif gb == 0.0:
                    x0 = b
                else:
                    x0 = brentq(gfun, a, b, xtol=1e-15, maxiter=200)
                x1, ok = _newton_polish(cmap, x0, p, m)
                if not ok:
                    log.warning("Newton polish did not converge for p=%d near x=%.6g; "
                                "candidate dropped", p, x0)
                    continue
                if abs(x1 - x0) > (b - a) + 1e-9:
                    x1 = x0  # Newton left the bracket, keep the bracketed root
                _add_candidate(cmap, found, x1, p, m)
    found.sort(key=lambda o: (o.period, o.points[0]))
    return found


def _add_candidate(cmap, found, x, p, m):
    x = wrap_angle(x)
    for q in range(1, p):
        if p % q == 0:
            y, _ = cmap.iterate(x, q)
            if circle_distance(y, x) <= ORBIT_RESIDUAL_TOL:
                return
    orbit = make_orbit(cmap, x, p, m)
    if orbit.residual > ORBIT_RESIDUAL_TOL:
        log.debug("discarding p=%d candidate with residual %.3g", p, orbit.residual)
        return
    for other in found:
        if other.period == p and np.all(
            circle_distance(np.array(other.points), np.array(orbit.points)) <= DEDUP_TOL
        ):
            return
    found.append(orbit)


# -- phase partition --------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """One block of the phase partition.

    ``kind`` is ``"unstable"``, ``"transient"`` or ``"stable"``.  Orbit regions
    are unions of arcs ``centers[k] +- radii[k]``; the transient region is the
    complement of all orbit regions.
    """

    label: str
    kind: str
    orbit: PeriodicOrbit | None = None
    centers: tuple = ()
    radii: tuple = ()

    def arcs(self):
        return [(wrap_angle(c - r), wrap_angle(c + r)) for c, r in zip(self.centers, self.radii)]


@dataclass(frozen=True)
class PhasePartition:
    regions: tuple
    eta: float
    N: int
    verify_n: int = 4096
    margins: dict = field(default_factory=dict, compare=False)

    def _arc_index(self, x):
        """Per sample: (region index, arc index) or -1 for transient points."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        reg = np.full(x.shape, -1)
        arc = np.full(x.shape, -1)
        for ri, r in enumerate(self.regions):
            for k, (c, rad) in enumerate(zip(r.centers, r.radii)):
                inside = circle_distance(x, c) < rad
                reg[inside] = ri
                arc[inside] = k
        return reg, arc

    def region_index(self, x):
        """Index into :attr:`regions` for each sample point."""
        reg, _ = self._arc_index(x)
        t = self.transient_index
        return np.where(reg < 0, t, reg)

    @property
    def transient_index(self) -> int:
        return next(i for i, r in enumerate(self.regions) if r.kind == "transient")

    @property
    def labels(self):
        return [r.label for r in self.regions]

    def lower_blocks(self):
        """Index pairs ``(i, j)``, ``i > j``: mass moving to an earlier block."""
        n = len(self.regions)
        return [(i, j) for i in range(n) for j in range(n) if i > j]


def _point_weights(orbit: PeriodicOrbit) -> np.ndarray:
    """Relative neighbourhood sizes along an orbit (adapted metric).

    ``w_{k+1} = w_k |f'(x_k)| / |c|^{1/p}`` closes up after one cycle and makes
    every step contract (stable) or expand (unstable) by the same factor.
    """
    p = orbit.period
    rate = abs(orbit.multiplier) ** (1.0 / p)
    w = np.ones(p)
    for k in range(p - 1):
        w[k + 1] = w[k] * abs(orbit.derivatives[k]) / rate
    if not np.all(np.isfinite(w)) or w.max() == 0:
        return np.ones(p)
    return w / w.max()


def _dist_to_arcs(y, centers, radii):
    """Distance from samples to a union of arcs (0 inside)."""
    d = np.full(np.shape(y), np.inf)
    for c, r in zip(centers, radii):
        d = np.minimum(d, np.maximum(0.0, circle_distance(y, c) - r))
    return d


def build_partition(cmap: CircleMap, orbits, verify_n: int = 4096, grid: int = 40,
                    n_max: int = 1000) -> PhasePartition:
    """Split the circle into unstable, transient and stable blocks.

    Every orbit point ``x_k`` gets an arc of radius ``R * w_k`` where ``w_k``
    are the adapted weights of :func:`_point_weights` and ``R`` is one scale
    per stability class.  The two scales are chosen on a grid to maximise the
    separation margin ``eta`` of the partition invariants, checked on
    ``verify_n`` samples:

    (i)   points of later blocks map at least ``eta`` away from every earlier
          unstable block;
    (ii)  a stable arc around ``x_k`` maps at least ``eta`` inside the arc
          around ``x_{k+1}``;
    (iii) every transient sample enters a stable block within ``N`` steps.

    Unstable blocks are ordered to maximise ``eta``.

    Raises
    ------
    BifurcationPointError
        An orbit is neutral.
    HypothesisViolationError
        No radii make (i)-(ii) hold, or a transient sample fails (iii).
    """
    if verify_n < 4096:
        raise DomainError("verify_n must be >= 4096")
    orbits = list(orbits)
    for o in orbits:
        if o.is_neutral:
            raise BifurcationPointError(f"neutral orbit {o!r}")
    stable = [o for o in orbits if o.is_stable]
    unstable = [o for o in orbits if not o.is_stable]
    if not stable:
        raise HypothesisViolationError("no stable orbit: transient points cannot settle")

    xs = -np.pi + (np.arange(verify_n) + 0.5) * TWO_PI / verify_n
    fx = cmap(xs)

    centers, weights, cls, owner = [], [], [], []
    for oi, o in enumerate(unstable + stable):
        w = _point_weights(o)
        centers.extend(o.points)
        weights.extend(w)
        cls.extend([0 if oi < len(unstable) else 1] * o.period)
        owner.extend([oi] * o.period)
    centers = np.array(centers)
    weights = np.array(weights)
    cls = np.array(cls)
    owner = np.array(owner)
    pair_d = circle_distance(centers[:, None], centers[None, :])

    def feasible(Ru, Rs):
        r = weights * np.where(cls == 0, Ru, Rs)
        if np.any(r >= np.pi):
            return None
        iu = np.triu_indices(len(r), 1)
        if np.any(r[iu[0]] + r[iu[1]] >= 0.999 * pair_d[iu]):
            return None
        return r

    def evaluate(radii):
        n_orb = len(unstable) + len(stable)
        arc_of = np.full(verify_n, -1)
        for k, (c, r) in enumerate(zip(centers, radii)):
            arc_of[circle_distance(xs, c) < r] = k
        orb_of = np.where(arc_of >= 0, owner[np.maximum(arc_of, 0)], -1)
        # (ii) stable arcs map inside the successor arc
        eta_ii = np.inf
        for oi in range(len(unstable), n_orb):
            idx = np.nonzero(owner == oi)[0]
            for pos, k in enumerate(idx):
                nxt = idx[(pos + 1) % len(idx)]
                sel = arc_of == k
                if sel.any():
                    m = radii[nxt] - circle_distance(fx[sel], centers[nxt])
                    eta_ii = min(eta_ii, m.min())
        # margins into unstable blocks: M[a, b] = min over x in block a of d(f(x), block b)
        # block ids: 0..U-1 unstable orbits, U transient, U+1 stable (merged)
        U = len(unstable)
        blk = np.where(orb_of < 0, U, np.where(orb_of < U, orb_of, U + 1))
        M = np.full((U + 2, U), np.inf)
        for b in range(U):
            idx = owner == b
            dist = _dist_to_arcs(fx, centers[idx], radii[idx])
            for a in range(U + 2):
                sel = blk == a
                if sel.any():
                    M[a, b] = dist[sel].min()
        best = (-np.inf, None)
        for perm in itertools.permutations(range(U)):
            pos = {b: i for i, b in enumerate(perm)}
            e = eta_ii
            for a in range(U + 2):
                for b in range(U):
                    later = a >= U or pos[a] > pos[b]
                    if later:
                        e = min(e, M[a, b])
            if e > best[0]:
                best = (e, perm)
        return best[0], best[1], arc_of

    def scan(ru_vals, rs_vals):
        out = []
        for Ru in ru_vals:
            for Rs in rs_vals:
                r = feasible(Ru, Rs)
                if r is None:
                    continue
                e, perm, _ = evaluate(r)
                out.append((e, Ru, Rs))
        return out

    ru_vals = np.geomspace(1e-3, np.pi, grid) if unstable else [0.0]
    rs_vals = np.geomspace(1e-3, np.pi, grid)
    results = scan(ru_vals, rs_vals)
    if not results:
        raise HypothesisViolationError("orbit points too close to separate")
    e0, Ru0, Rs0 = max(results)
    # one local refinement pass around the best grid point
    step = (np.pi / 1e-3) ** (1.0 / (grid - 1))
    fine = np.geomspace(1 / step, step, 9)
    ru2 = Ru0 * fine if unstable else [0.0]
    results += scan(ru2, Rs0 * fine)
    eta, Ru, Rs = max(results)
    if not eta > 0:
        worst = _worst_sample(xs, fx, centers, weights * np.where(cls == 0, Ru, Rs))
        raise HypothesisViolationError(
            f"no neighbourhoods satisfy the partition invariants; "
            f"obstruction near x={worst:.6f}", sample=worst)
    radii = feasible(Ru, Rs)
    eta, perm, arc_of = evaluate(radii)

    # (iii) transient samples must settle in a stable block
    stable_ids = set(range(len(unstable), len(unstable) + len(stable)))
    in_stable = lambda a: np.isin(owner[np.maximum(a, 0)], list(stable_ids)) & (a >= 0)
    trans = np.nonzero(arc_of < 0)[0]
    N = 0
    if trans.size:
        y = xs[trans].copy()
        entered = np.full(trans.size, -1)
        for n in range(0, 10 * n_max + 11):
            a = np.full(y.shape, -1)
            for k, (c, r) in enumerate(zip(centers, radii)):
                a[circle_distance(y, c) < r] = k
            hit = in_stable(a)
            entered[(entered < 0) & hit] = n
            # once entered, samples must stay (forward invariance)
            left = (entered >= 0) & ~hit
            if left.any():
                bad = xs[trans][np.argmax(left)]
                raise HypothesisViolationError(
                    f"sample x={bad:.6f} left a stable block", sample=bad)
            if np.all(entered >= 0) and n >= entered.max() + 10:
                break
            y = cmap(y)
        if np.any(entered < 0):
            bad = float(xs[trans][np.argmax(entered < 0)])
            raise HypothesisViolationError(
                f"transient sample x={bad:.6f} does not reach a stable orbit "
                f"within {10 * n_max} iterations", sample=bad)
        N = int(entered.max())

    regions = []
    for b in perm:
        o = unstable[b]
        idx = owner == b
        regions.append(Region(f"unstable[p={o.period}]@{o.points[0]:.4f}", "unstable", o,
                              tuple(centers[idx]), tuple(radii[idx])))
    regions.append(Region("transient", "transient"))
    for si, o in enumerate(stable):
        idx = owner == len(unstable) + si
        regions.append(Region(f"stable[p={o.period}]@{o.points[0]:.4f}", "stable", o,
                              tuple(centers[idx]), tuple(radii[idx])))
    return PhasePartition(tuple(regions), float(eta), N, verify_n)


def _worst_sample(xs, fx, centers, radii):
    """Sample whose image comes closest to an orbit arc it does not start in."""
    best, arg = np.inf, xs[0]
    for c, r in zip(centers, radii):
        outside = circle_distance(xs, c) >= r
        if outside.any():
            d = circle_distance(fx[outside], c) - r
            i = np.argmin(d)
            if d[i] < best:
                best, arg = d[i], xs[outside][i]
    return float(arg)
