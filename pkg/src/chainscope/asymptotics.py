"""Long-time diagnostics: trajectories against the census, limits, verdicts.

"Locally uniform" convergence is realized as the sup norm on a fixed probe
window; every verdict records the window and the horizon it was computed on.
A verdict never asserts non-quasiconvergence: the genuinely oscillatory
counterexamples are invisible on a finite grid, so the fallback is always
"inconclusive" with a reason.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TailTooShort, UnsettledEstimate
from .nonlinearity import Nonlinearity
from .pde import Snapshot, boundary_theta
from .phase_plane import Annulus, Census, Chain, Loop, edge_zeros


@dataclass(frozen=True)
class SpatialTrajectory:
    """The planar curve {(u(x), u_x(x))} of one snapshot, interior nodes."""

    points: np.ndarray  # shape (N, 2)
    source_time: float


def spatial_trajectory(snapshot: Snapshot, window: float | None = None) -> SpatialTrajectory:
    sl = slice(1, -1)
    u = snapshot.u[sl]
    ux = snapshot.ux[sl]
    x = snapshot.x[sl]
    if window is not None:
        mask = np.abs(x) <= window
        u, ux = u[mask], ux[mask]
    return SpatialTrajectory(np.column_stack([u, ux]), snapshot.t)


def dist_to_chain(trajectory: SpatialTrajectory, chain: Chain, census: Census) -> float:
    """Sup over trajectory points of the distance to the chain boundary."""
    tree, _ = census.boundary_tree("chain", chain.id)
    d, _ = tree.query(trajectory.points)
    return float(np.max(d))


def dist_to_loop(trajectory: SpatialTrajectory, loop: Loop, census: Census) -> float:
    tree, _ = census.boundary_tree("loop", loop.id)
    d, _ = tree.query(trajectory.points)
    return float(np.max(d))


@dataclass(frozen=True)
class LocateResult:
    annulus_id: int | None
    status: str  # "located" | "on_chain" | "straddle"
    offenders: tuple[tuple[float, float], ...] = ()
    nearest_chain_id: int | None = None


def locate_component(
    trajectory: SpatialTrajectory,
    census: Census,
    band: float = 1e-8,
) -> LocateResult:
    """The unique annulus containing every trajectory point off the boundaries.

    Points inside the boundary tolerance band are ignored.  When every point
    sits on a chain the result is "on_chain" with the nearest chain; when the
    off-band points do not fit one annulus the result is "straddle" with a
    sample of offending points.
    """
    pts = trajectory.points
    u = pts[:, 0]
    H = 0.5 * pts[:, 1] ** 2 + census.potential(u)

    off_band = np.ones(u.size, dtype=bool)
    for ch in census.chains:
        if ch.trivial:
            near = (np.hypot(u - ch.p, pts[:, 1]) <= band)
        else:
            near = (
                (u >= ch.p - band)
                & (u <= ch.q + band)
                & (np.abs(H - ch.energy) <= band)
            )
        off_band &= ~near
    if not off_band.any():
        dists = [
            (float(np.max(census.boundary_tree("chain", ch.id)[0].query(pts)[0])), ch.id)
            for ch in census.chains
        ]
        dists.sort()
        return LocateResult(None, "on_chain", nearest_chain_id=dists[0][1])

    best_cover = -1
    best_outside = np.zeros(0, dtype=bool)
    for an in census.annuli:
        inner = census.chain_by_id(an.inner_chain_id)
        if inner.trivial:
            outside_inner = np.hypot(u - inner.p, pts[:, 1]) > band
        else:
            outside_inner = ~(
                (u >= inner.p - band) & (u <= inner.q + band) & (H <= inner.energy + band)
            )
        if an.outer_loop_id is None:
            inside = outside_inner
        else:
            lp = census.loop_by_id(an.outer_loop_id)
            inside_outer = (
                (u > lp.left_anchor + band)
                & (u < lp.right_anchor - band)
                & (H < lp.energy - band)
            )
            inside = inside_outer & outside_inner
        misses = off_band & ~inside
        if not misses.any():
            return LocateResult(an.id, "located")
        cover = int(np.count_nonzero(off_band & inside))
        if cover > best_cover:
            best_cover = cover
            best_outside = misses

    offenders = [tuple(map(float, p)) for p in pts[best_outside][:8]]
    return LocateResult(None, "straddle", offenders=tuple(offenders))


@dataclass(frozen=True)
class OmegaEstimate:
    """Tail-of-run profile bundle on a fixed probe window."""

    probe_window: float
    sample_times: tuple[float, ...]
    profiles: tuple[Snapshot, ...]
    settle_metric: float
    ut_metric: float
    horizon: float
    total_drift: float = math.inf  # max consecutive change over the whole run


def estimate_omega(
    snapshots: list[Snapshot],
    f: Nonlinearity,
    probe_window: float = 20.0,
    tail_fraction: float = 0.25,
) -> OmegaEstimate:
    """Tail snapshots with settle and u_t-style metrics on the window."""
    n_tail = max(4, int(math.ceil(len(snapshots) * tail_fraction)))
    if len(snapshots) < 4 or n_tail > len(snapshots):
        raise TailTooShort(f"need >= 4 tail snapshots, have {len(snapshots)}")
    tail = snapshots[-n_tail:]
    mask = np.abs(tail[0].x) <= probe_window
    settle = 0.0
    for a, b in zip(tail[:-1], tail[1:]):
        settle = max(settle, float(np.max(np.abs(a.u[mask] - b.u[mask]))))
    drift = 0.0
    for a, b in zip(snapshots[:-1], snapshots[1:]):
        drift = max(drift, float(np.max(np.abs(a.u[mask] - b.u[mask]))))
    ut = 0.0
    for s in tail:
        r = s.uxx[mask][1:-1] + f(s.u[mask][1:-1])
        ut = max(ut, float(np.max(np.abs(r))))
    return OmegaEstimate(
        probe_window=probe_window,
        sample_times=tuple(s.t for s in tail),
        profiles=tuple(tail),
        settle_metric=settle,
        ut_metric=ut,
        horizon=snapshots[-1].t,
        total_drift=drift,
    )


@dataclass(frozen=True)
class Tolerances:
    chain_tol: float = 5e-2
    ut_tol: float = 1e-3
    steady_tol: float = 1e-4
    early_tol: float = 1e-2

    def as_dict(self) -> dict:
        return {
            "chain_tol": self.chain_tol,
            "ut_tol": self.ut_tol,
            "steady_tol": self.steady_tol,
            "early_tol": self.early_tol,
        }


@dataclass(frozen=True)
class Verdict:
    kind: str  # quasiconvergent_to_chain | steady | connecting | inconclusive
    chain_id: int | None = None
    annulus_id: int | None = None
    distances: dict = field(default_factory=dict)
    theta_limits: tuple[float, float] | None = None
    tolerances: dict = field(default_factory=dict)
    probe_window: float | None = None
    horizon: float | None = None
    reason: str | None = None
    proxy: str | None = None


@dataclass(frozen=True)
class FarFieldReport:
    path_residual: float
    limits: tuple[float, float]
    limit_stable: tuple[bool, bool]
    transient: bool
    between_edge_zeros: bool | None = None


def far_field_limits(
    snapshots: list[Snapshot],
    f: Nonlinearity,
    inner_chain: Chain | None = None,
    census: Census | None = None,
    max_step: float = 0.005,
) -> FarFieldReport:
    """Edge paths against the scalar flow, plus the settled edge limits.

    The edge values equal the scalar-ODE path by construction; the report
    carries the observed residual.  The late-time limit is checked to be a
    stable equilibrium (or flagged transient), and against the extreme zeros
    of a nontrivial inner chain when one is supplied.
    """
    t0 = snapshots[0]
    left0, right0 = float(t0.u[0]), float(t0.u[-1])
    resid = 0.0
    for s in snapshots[1:]:
        th_l = boundary_theta(f, left0, s.t, max_step)
        th_r = boundary_theta(f, right0, s.t, max_step)
        resid = max(resid, abs(float(s.u[0]) - th_l), abs(float(s.u[-1]) - th_r))
    last = snapshots[-1]
    lim = (float(last.u[0]), float(last.u[-1]))
    transient = max(abs(float(f(lim[0]))), abs(float(f(lim[1])))) > 1e-6
    stable = tuple(bool(float(f.slope(v)) < 0.0) for v in lim)
    between = None
    if inner_chain is not None and not inner_chain.trivial and census is not None:
        lo, hi = edge_zeros(inner_chain, census.zeros)
        between = bool(lo < lim[0] < hi and lo < lim[1] < hi)
    return FarFieldReport(resid, lim, stable, transient, between)


def quasiconvergence_verdict(
    omega_est: OmegaEstimate,
    census: Census,
    tols: Tolerances = Tolerances(),
) -> Verdict:
    """Single-chain proximity of the settled tail, or an explicit reason why not."""
    trajs = [spatial_trajectory(s, omega_est.probe_window) for s in omega_est.profiles]
    per_chain = {
        ch.id: max(dist_to_chain(tr, ch, census) for tr in trajs) for ch in census.chains
    }
    best_id = min(per_chain, key=lambda cid: per_chain[cid])
    best = per_chain[best_id]
    distances = {
        "per_chain_sup": {str(k): v for k, v in sorted(per_chain.items())},
        "best_chain_sup": best,
        "settle_metric": omega_est.settle_metric,
        "ut_metric": omega_est.ut_metric,
    }
    common = dict(
        distances=distances,
        tolerances=tols.as_dict(),
        probe_window=omega_est.probe_window,
        horizon=omega_est.horizon,
    )
    if omega_est.ut_metric > tols.ut_tol:
        return Verdict(kind="inconclusive", reason="tail unsettled", **common)
    if best > tols.chain_tol:
        return Verdict(kind="inconclusive", reason="no chain within tolerance", **common)
    if omega_est.total_drift <= tols.steady_tol:
        # profiles never moved over the whole run: steady data, not just a
        # settled tail
        return Verdict(kind="steady", chain_id=best_id, **common)
    return Verdict(kind="quasiconvergent_to_chain", chain_id=best_id, **common)


def connection_verdict(
    snapshots: list[Snapshot],
    component: Annulus,
    census: Census,
    tols: Tolerances = Tolerances(),
    probe_window: float | None = None,
    edge_fraction: float = 0.15,
) -> Verdict:
    """Early tail near the inner chain, late tail near the outer loop.

    A forward-run proxy for the entire-solution classification: the verdict
    is tagged as such and the direction is always inner to outer.
    """
    from .pde import residual as _residual

    inner = census.chain_by_id(component.inner_chain_id)
    outer = (
        census.loop_by_id(component.outer_loop_id)
        if component.outer_loop_id is not None
        else None
    )
    k = max(2, int(math.ceil(len(snapshots) * edge_fraction)))
    early = snapshots[:k]
    late = snapshots[-k:]

    res_sup = max(_residual(s, census.f) for s in snapshots)
    d_early = max(
        dist_to_chain(spatial_trajectory(s, probe_window), inner, census) for s in early
    )
    d_late = (
        max(dist_to_loop(spatial_trajectory(s, probe_window), outer, census) for s in late)
        if outer is not None
        else math.inf
    )
    distances = {
        "early_to_inner_chain": d_early,
        "late_to_outer_loop": d_late,
        "residual_sup": res_sup,
    }
    common = dict(
        annulus_id=component.id,
        distances=distances,
        tolerances=tols.as_dict(),
        probe_window=probe_window,
        horizon=snapshots[-1].t,
        proxy="forward-run",
    )
    if res_sup <= tols.steady_tol:
        return Verdict(kind="steady", chain_id=inner.id, **common)
    if d_early <= tols.early_tol and d_late <= tols.chain_tol:
        return Verdict(kind="connecting", chain_id=inner.id, **common)
    return Verdict(kind="inconclusive", reason="tails not pinned to both boundaries", **common)


def morse_partition(
    omega_est: OmegaEstimate,
    census: Census,
    tols: Tolerances = Tolerances(),
) -> list[tuple[int, list[float]]]:
    """Group settled tail profiles by nearest chain, in inclusion order.

    Refuses an unsettled estimate.  A settled scenario is expected to produce
    exactly one nonempty group.
    """
    if omega_est.ut_metric > tols.ut_tol:
        raise UnsettledEstimate(
            f"ut metric {omega_est.ut_metric:.3e} above {tols.ut_tol:.3e}"
        )
    groups: dict[int, list[float]] = {}
    for s in omega_est.profiles:
        tr = spatial_trajectory(s, omega_est.probe_window)
        best = min(census.chains, key=lambda ch: dist_to_chain(tr, ch, census))
        groups.setdefault(best.id, []).append(s.t)

    def sort_key(cid: int) -> tuple:
        inside_count = sum(
            1 for other in groups if other != cid and census.order.inside(cid, other)
        )
        ch = census.chain_by_id(cid)
        return (-inside_count, ch.energy, ch.p)

    ordered = sorted(groups, key=sort_key)
    return [(cid, sorted(groups[cid])) for cid in ordered]
