"""Stationary phase plane: periodic orbits, chains, loops, annuli, ordering.

The stationary equation u'' + f(u) = 0 is Hamiltonian with energy
H(u, v) = v^2/2 + F(u).  Removing all nonstationary periodic orbits from the
plane leaves finitely many compact "chains", each a level-set arc
v = +/- sqrt(2(c - F(u))) over an interval [p, q].  Everything here is
computed from the potential: the census is analytic up to quadrature error,
and an integration-based sampler is used only as a test oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.spatial import cKDTree

from .errors import HitsSaddle, NoReturn, WindowTooSmall
from .nonlinearity import Equilibrium, Nonlinearity, Potential, find_zeros, potential

LEVEL_TOL = 1e-9
INTERVAL_TOL = 1e-9


def hamiltonian(f: Nonlinearity, u: float, v: float) -> float:
    """Energy v^2/2 + F(u) of a phase point."""
    return 0.5 * float(v) ** 2 + potential(f).refined(float(u))


@dataclass(frozen=True)
class PeriodicOrbit:
    """A nonstationary closed orbit with turning points (p, 0), (q, 0)."""

    p: float
    q: float
    energy: float
    period: float


@dataclass(frozen=True)
class Loop:
    """A Jordan curve inside a chain: one homoclinic lobe or a heteroclinic pair.

    ``left_anchor``/``right_anchor`` are the u-values where the curve meets the
    axis; ``saddle_values`` lists which of them are equilibria (one for a
    homoclinic loop, both for a heteroclinic loop).
    """

    id: int
    chain_id: int
    kind: str  # "homoclinic" | "heteroclinic"
    left_anchor: float
    right_anchor: float
    energy: float
    saddle_values: tuple[float, ...]

    @property
    def interval(self) -> tuple[float, float]:
        return (self.left_anchor, self.right_anchor)


@dataclass(frozen=True)
class Chain:
    """A connected component of the plane minus the periodic orbits."""

    id: int
    trivial: bool
    p: float
    q: float
    energy: float
    saddles: tuple[float, ...]  # equilibria on the chain (slope of f < 0)
    loops: tuple[Loop, ...]

    @property
    def interval(self) -> tuple[float, float]:
        return (self.p, self.q)


@dataclass(frozen=True)
class Annulus:
    """A connected component of the periodic-orbit set.

    Bounded inside by its inner chain and (when bounded) outside by its outer
    loop.  ``u_min``/``u_max`` give the u-extent of the outer loop; they are
    +/-inf for the unbounded component.
    """

    id: int
    inner_chain_id: int
    outer_loop_id: int | None
    u_min: float
    u_max: float


@dataclass
class ChainOrder:
    """Pairwise relation table: inside / contains / separated."""

    relations: dict[tuple[int, int], str]

    def relation(self, i: int, j: int) -> str:
        return self.relations[(i, j)]

    def inside(self, i: int, j: int) -> bool:
        return self.relations.get((i, j)) == "inside"


def _segment_boundaries(zeros: Sequence[Equilibrium], lo: float, hi: float) -> list[float]:
    vals = [z.value for z in zeros if lo < z.value < hi]
    return [lo] + sorted(vals) + [hi]


def _bracket_below(F: Potential, a: float, b: float, level: float, tol: float) -> float:
    """Point in (a, b) with F strictly below level (monotone segment assumed)."""
    for s in np.linspace(a, b, 65)[1:-1]:
        if F.refined(float(s)) < level - tol:
            return float(s)
    raise NoReturn(f"could not bracket the level {level!r} on ({a!r}, {b!r})")


def _walk_level(
    f: Nonlinearity,
    F: Potential,
    zeros: Sequence[Equilibrium],
    start: float,
    level: float,
    direction: int,
    level_tol: float = LEVEL_TOL,
) -> tuple[float, list[Equilibrium]]:
    """Follow {F <= level} from a saddle at ``start`` to its crossing point.

    Moves right (direction=+1) or left (-1) across the monotone segments of F
    delimited by the zeros of f.  Returns the crossing u with F(u) = level and
    any equal-level saddles passed on the way.  Raises NoReturn when the
    window ends below the level.
    """
    lo, hi = f.window
    if direction > 0:
        bounds = [z for z in zeros if z.value > start + INTERVAL_TOL]
        bounds.sort(key=lambda z: z.value)
        edge = hi
    else:
        bounds = [z for z in zeros if z.value < start - INTERVAL_TOL]
        bounds.sort(key=lambda z: -z.value)
        edge = lo

    passed: list[Equilibrium] = []
    prev = start
    for z in bounds:
        Fz = F.refined(z.value)
        if Fz > level + level_tol:
            a, b = (prev, z.value) if direction > 0 else (z.value, prev)
            inner = _bracket_below(F, a, b, level, level_tol)
            seg = (inner, b) if direction > 0 else (a, inner)
            return F.invert_on_segment(level, *seg), passed
        if abs(Fz - level) <= level_tol:
            if z.slope < 0:
                passed.append(z)
                prev = z.value
                continue
            raise HitsSaddle(
                f"level {level!r} touches the equilibrium at u={z.value!r}"
            )
        prev = z.value
    F_edge = F.refined(edge)
    if F_edge > level + level_tol:
        a, b = (prev, edge) if direction > 0 else (edge, prev)
        inner = _bracket_below(F, a, b, level, level_tol)
        seg = (inner, b) if direction > 0 else (a, inner)
        return F.invert_on_segment(level, *seg), passed
    raise NoReturn(
        f"potential never returns to level {level!r} toward the window edge {edge!r}"
    )


def periodic_orbit_through(f: Nonlinearity, p: float) -> PeriodicOrbit:
    """The closed orbit with left turning point (p, 0); f(p) < 0 required.

    The right turning point comes from monotone inversion of the potential
    and the period from endpoint-regularized quadrature.  Raises HitsSaddle
    when the level set contains an equilibrium (a chain, not an orbit) and
    NoReturn when the level never comes back inside the window.
    """
    fp = float(f(p))
    if abs(fp) <= 1e-12:
        raise HitsSaddle(f"p={p!r} is an equilibrium; its level set is a chain")
    if fp > 0:
        raise ValueError(f"f(p) must be negative at a left turning point; got {fp!r}")
    F = potential(f)
    c = F.refined(p)
    zeros = find_zeros(f)
    q, passed = _walk_level(f, F, zeros, p, c, +1)
    if passed:
        raise HitsSaddle(
            f"level set through p={p!r} contains the equilibrium at u={passed[0].value!r}"
        )
    period = _orbit_period(f, F, p, q, c)
    return PeriodicOrbit(float(p), float(q), c, period)


def _orbit_period(f: Nonlinearity, F: Potential, p: float, q: float, c: float) -> float:
    """2 * int_p^q du / sqrt(2(c - F(u))) with sqrt substitutions at both ends."""
    probe = np.linspace(p, q, 257)[1:-1]
    m = float(probe[np.argmin(F(probe))])

    def left(s: float) -> float:
        u = p + s * s
        return 2.0 * s / math.sqrt(max(2.0 * (c - F.refined(u)), 1e-300))

    def right(s: float) -> float:
        u = q - s * s
        return 2.0 * s / math.sqrt(max(2.0 * (c - F.refined(u)), 1e-300))

    tl, _ = quad(left, 0.0, math.sqrt(m - p), epsabs=1e-12, epsrel=1e-10, limit=200)
    tr, _ = quad(right, 0.0, math.sqrt(q - m), epsabs=1e-12, epsrel=1e-10, limit=200)
    return 2.0 * (tl + tr)


def enumerate_chains(
    f: Nonlinearity,
    zeros: Sequence[Equilibrium] | None = None,
    level_tol: float = LEVEL_TOL,
) -> list[Chain]:
    """Build the full chain census from the potential.

    One trivial chain per equilibrium with f' > 0; for each saddle, the
    connected component of {F <= F(saddle)} containing it, with loops cut at
    the equal-level interior saddles.  Chains sharing a component and level
    are deduplicated.  Requires the window to dominate every saddle energy.
    """
    if zeros is None:
        zeros = find_zeros(f)
    F = potential(f)
    saddles = [z for z in zeros if z.slope < 0]
    centers = [z for z in zeros if z.slope > 0]

    lo, hi = f.window
    if saddles:
        top = max(F.refined(z.value) for z in saddles)
        if F.refined(lo) <= top + level_tol or F.refined(hi) <= top + level_tol:
            raise WindowTooSmall(
                "window edge energy does not dominate the saddle energies; widen the window"
            )

    raw: list[tuple[float, float, float, tuple[float, ...]]] = []
    for z in saddles:
        c = F.refined(z.value)
        q, right_saddles = _walk_level(f, F, zeros, z.value, c, +1, level_tol)
        p, left_saddles = _walk_level(f, F, zeros, z.value, c, -1, level_tol)
        on_chain = sorted(
            {round(v, 12) for v in
             [z.value] + [s.value for s in right_saddles] + [s.value for s in left_saddles]}
        )
        raw.append((p, q, c, tuple(on_chain)))

    deduped: list[tuple[float, float, float, tuple[float, ...]]] = []
    for item in raw:
        if not any(
            abs(item[0] - d[0]) < 1e-8 and abs(item[1] - d[1]) < 1e-8 for d in deduped
        ):
            deduped.append(item)

    entries: list[tuple[bool, float, float, float, tuple[float, ...]]] = []
    for z in centers:
        entries.append((True, z.value, z.value, F.refined(z.value), ()))
    for p, q, c, sd in deduped:
        entries.append((False, p, q, c, sd))
    entries.sort(key=lambda e: (e[1], e[2]))

    chains: list[Chain] = []
    loop_id = 0
    for cid, (trivial, p, q, c, sd) in enumerate(entries):
        loops: list[Loop] = []
        if not trivial:
            cuts = [p] + list(sd) + [q]
            for a, b in zip(cuts[:-1], cuts[1:]):
                a_s = a in sd
                b_s = b in sd
                kind = "heteroclinic" if (a_s and b_s) else "homoclinic"
                anchors = tuple(v for v, s in ((a, a_s), (b, b_s)) if s)
                loops.append(Loop(loop_id, cid, kind, a, b, c, anchors))
                loop_id += 1
        chains.append(Chain(cid, trivial, p, q, c, sd, tuple(loops)))
    return chains


def edge_zeros(chain: Chain, zeros: Sequence[Equilibrium]) -> tuple[float, float]:
    """Extreme zeros of f inside the chain interval [p, q].

    Both coincide with p for a trivial chain.  For a nontrivial chain they are
    unstable equilibria of y' = f(y) lying strictly inside (p, q).
    """
    if chain.trivial:
        return (chain.p, chain.p)
    inside = [z.value for z in zeros if chain.p - INTERVAL_TOL <= z.value <= chain.q + INTERVAL_TOL]
    if not inside:
        raise ValueError("chain contains no equilibrium; census is inconsistent")
    return (min(inside), max(inside))


def order_chains(chains: Sequence[Chain], level_tol: float = LEVEL_TOL) -> ChainOrder:
    """Pairwise trichotomy: inside(i, j), inside(j, i), or separated."""
    rel: dict[tuple[int, int], str] = {}
    for ci in chains:
        for cj in chains:
            if ci.id == cj.id:
                continue
            inside = (
                ci.p > cj.p + INTERVAL_TOL
                and ci.q < cj.q - INTERVAL_TOL
                and ci.energy < cj.energy - level_tol
            )
            rel[(ci.id, cj.id)] = "inside" if inside else "pending"
    for ci in chains:
        for cj in chains:
            if ci.id == cj.id:
                continue
            if rel[(ci.id, cj.id)] == "pending":
                rel[(ci.id, cj.id)] = (
                    "contains" if rel[(cj.id, ci.id)] == "inside" else "separated"
                )
    return ChainOrder(rel)


def annuli(chains: Sequence[Chain]) -> list[Annulus]:
    """One annulus per chain: its enclosing minimal loop, or none (unbounded).

    Containment is analytic: chain interval strictly inside the open loop
    interval and chain energy strictly below the loop energy.
    """
    all_loops = [lp for ch in chains for lp in ch.loops]
    out: list[Annulus] = []
    for ch in chains:
        candidates = [
            lp
            for lp in all_loops
            if lp.chain_id != ch.id
            and ch.p > lp.left_anchor + INTERVAL_TOL
            and ch.q < lp.right_anchor - INTERVAL_TOL
            and ch.energy < lp.energy - LEVEL_TOL
        ]
        if candidates:
            outer = min(candidates, key=lambda lp: lp.right_anchor - lp.left_anchor)
            out.append(Annulus(ch.id, ch.id, outer.id, outer.left_anchor, outer.right_anchor))
        else:
            out.append(Annulus(ch.id, ch.id, None, -math.inf, math.inf))
    return out


def membership(
    f: Nonlinearity,
    point: tuple[float, float],
    region: Chain | Loop | Annulus,
    census: "Census | None" = None,
    band: float = 1e-9,
) -> str:
    """Classify a phase point against a region: inside / outside / on_boundary.

    The test is analytic: interval comparison plus an energy band.  The
    interior of a trivial chain is empty, so only the point itself reports
    on_boundary there.
    """
    u, v = float(point[0]), float(point[1])
    H = hamiltonian(f, u, v)

    if isinstance(region, Chain):
        if region.trivial:
            if math.hypot(u - region.p, v) <= max(band, 1e-9):
                return "on_boundary"
            return "outside"
        in_interval = region.p - band <= u <= region.q + band
        if in_interval and abs(H - region.energy) <= band:
            return "on_boundary"
        if region.p < u < region.q and H < region.energy - band:
            return "inside"
        return "outside"

    if isinstance(region, Loop):
        a, b = region.interval
        if a - band <= u <= b + band and abs(H - region.energy) <= band:
            return "on_boundary"
        if a < u < b and H < region.energy - band:
            return "inside"
        return "outside"

    if isinstance(region, Annulus):
        if census is None:
            raise ValueError("annulus membership needs the census for its boundary parts")
        inner = census.chain_by_id(region.inner_chain_id)
        inner_side = membership(f, point, inner, census, band)
        if inner_side == "on_boundary":
            return "on_boundary"
        if region.outer_loop_id is None:
            if inner_side == "inside":
                return "outside"
            return "inside"
        outer = census.loop_by_id(region.outer_loop_id)
        outer_side = membership(f, point, outer, census, band)
        if outer_side == "on_boundary":
            return "on_boundary"
        if outer_side == "inside" and inner_side == "outside":
            return "inside"
        return "outside"

    raise TypeError(f"unsupported region type {type(region)!r}")


def _cos_spaced(a: float, b: float, n: int) -> np.ndarray:
    t = np.linspace(0.0, math.pi, n)
    return a + (b - a) * 0.5 * (1.0 - np.cos(t))


def level_arc_points(
    f: Nonlinearity, a: float, b: float, energy: float, n: int = 4000
) -> np.ndarray:
    """Sample both branches v = +/- sqrt(2(c - F(u))) over [a, b]."""
    if b <= a:
        return np.array([[a, 0.0]])
    F = potential(f)
    u = _cos_spaced(a, b, n)
    vv = np.sqrt(np.maximum(2.0 * (energy - F.refined_vec(u)), 0.0))
    upper = np.column_stack([u, vv])
    lower = np.column_stack([u[::-1], -vv[::-1]])
    return np.vstack([upper, lower])


class Census:
    """The finished stationary decomposition, immutable and shareable."""

    def __init__(self, f: Nonlinearity, zeros: Sequence[Equilibrium] | None = None):
        self.f = f
        self.zeros = list(zeros) if zeros is not None else find_zeros(f)
        self.potential = potential(f)
        self.chains = enumerate_chains(f, self.zeros)
        self.annuli = annuli(self.chains)
        self.order = order_chains(self.chains)
        self._chain_index = {ch.id: ch for ch in self.chains}
        self._loop_index = {lp.id: lp for ch in self.chains for lp in ch.loops}
        self._annulus_index = {an.id: an for an in self.annuli}
        self._trees: dict[tuple[str, int], tuple[cKDTree, np.ndarray]] = {}

    def chain_by_id(self, cid: int) -> Chain:
        return self._chain_index[cid]

    def loop_by_id(self, lid: int) -> Loop:
        return self._loop_index[lid]

    def annulus_by_id(self, aid: int) -> Annulus:
        return self._annulus_index[aid]

    def annulus_of_chain(self, cid: int) -> Annulus:
        return self._annulus_index[cid]

    def boundary_points(self, kind: str, ident: int, n: int = 4000) -> np.ndarray:
        if kind == "chain":
            ch = self.chain_by_id(ident)
            if ch.trivial:
                return np.array([[ch.p, 0.0]])
            return level_arc_points(self.f, ch.p, ch.q, ch.energy, n)
        if kind == "loop":
            lp = self.loop_by_id(ident)
            return level_arc_points(self.f, lp.left_anchor, lp.right_anchor, lp.energy, n)
        raise ValueError(f"unknown boundary kind {kind!r}")

    def boundary_tree(self, kind: str, ident: int, n: int = 4000) -> tuple[cKDTree, np.ndarray]:
        key = (kind, ident)
        if key not in self._trees:
            pts = self.boundary_points(kind, ident, n)
            self._trees[key] = (cKDTree(pts), pts)
        return self._trees[key]

    def membership(self, point, region, band: float = 1e-9) -> str:
        return membership(self.f, point, region, self, band)

    def sample_orbits(self, annulus: Annulus, count: int = 10) -> list[PeriodicOrbit]:
        """Periodic orbits spanning the annulus, by energy interpolation."""
        inner = self.chain_by_id(annulus.inner_chain_id)
        c_in = inner.energy
        if annulus.outer_loop_id is not None:
            c_out = self.loop_by_id(annulus.outer_loop_id).energy
            left_hi = self.loop_by_id(annulus.outer_loop_id).left_anchor
        else:
            lo, hi = self.f.window
            c_out = min(self.potential.refined(lo), self.potential.refined(hi))
            left_hi = lo
        orbits = []
        for lam in np.linspace(0.08, 0.92, count):
            e = c_in + lam * (c_out - c_in)
            p = self.potential.invert_on_segment(e, left_hi + 1e-12, inner.p - 1e-12)
            orbits.append(periodic_orbit_through(self.f, p))
        return orbits


def build_census(f: Nonlinearity, zeros: Sequence[Equilibrium] | None = None) -> Census:
    return Census(f, zeros)
