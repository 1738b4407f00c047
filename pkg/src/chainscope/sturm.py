"""Discrete zero-number machinery and the finiteness condition checkers.

Zeros of differences of solutions, of u_x, and of reflections are the
workhorse diagnostics: their counts never increase along the flow and drop
exactly at multiple zeros.  On a grid we count strict sign changes after
deadbanding tiny values; tangencies are surfaced separately rather than
counted, and anything that only stabilizes with more resolution is reported
as resolution-limited, never as a verified infinity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AllBelowTol, EmptyOverlap
from .pde import Snapshot

REL_DEADBAND = 1e-9
ABS_DEADBAND_FLOOR = 1e-11


@dataclass(frozen=True)
class ZeroReport:
    interval: tuple[float, float]
    count: int
    locations: tuple[float, ...]
    multiples: tuple[float, ...]
    tol_band: float


@dataclass
class DropLog:
    series: list[tuple[float, int]] = field(default_factory=list)
    violations: list[tuple[float, float]] = field(default_factory=list)
    unexplained_drops: list[tuple[float, float]] = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        return not self.violations


def _default_tol(values: np.ndarray) -> float:
    return max(REL_DEADBAND * float(np.max(np.abs(values))), ABS_DEADBAND_FLOOR)


def zero_count(
    values: np.ndarray,
    grid: np.ndarray,
    interval: tuple[float, float] | None = None,
    tol: float | None = None,
    merge_tol: float | None = None,
) -> ZeroReport:
    """Count strict sign changes of a sampled function on an interval.

    Values with |v| <= tol are deadbanded to zero; a zero-run flanked by
    opposite signs counts as one crossing (located by interpolating the
    flanks), a run flanked by equal signs is recorded as a suspected
    tangency.  Crossings closer than merge_tol (default 3 grid steps) are
    merged by parity.  Raises AllBelowTol when every node is deadbanded.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if interval is None:
        a, b = float(grid[0]), float(grid[-1])
        mask = np.ones(grid.size, dtype=bool)
    else:
        a, b = float(interval[0]), float(interval[1])
        mask = (grid > a) & (grid < b)
    x = grid[mask]
    v = values[mask]
    if x.size < 2:
        raise EmptyOverlap("interval captures fewer than two nodes")
    if tol is None:
        tol = _default_tol(v)
    if merge_tol is None:
        merge_tol = 3.0 * float(np.median(np.diff(x)))
    if np.all(np.abs(v) <= tol):
        raise AllBelowTol(f"all {v.size} nodes inside the deadband {tol:.3e}")

    s = np.where(np.abs(v) <= tol, 0, np.sign(v)).astype(int)
    nz = np.nonzero(s)[0]

    i_idx, j_idx = nz[:-1], nz[1:]
    si, sj = s[i_idx], s[j_idx]
    flip = si != sj
    xi, xj = x[i_idx[flip]], x[j_idx[flip]]
    vi, vj = v[i_idx[flip]], v[j_idx[flip]]
    crossings = list((xi + vi * (xj - xi) / (vi - vj)).astype(float))
    gap = (si == sj) & (j_idx > i_idx + 1)  # deadband run with equal flanks
    tangencies = list(0.5 * (x[i_idx[gap] + 1] + x[j_idx[gap] - 1]).astype(float))

    locations, extra_tangencies = _merge_by_parity(crossings, merge_tol)
    tangencies.extend(extra_tangencies)
    return ZeroReport(
        interval=(a, b),
        count=len(locations),
        locations=tuple(locations),
        multiples=tuple(sorted(tangencies)),
        tol_band=float(tol),
    )


def _merge_by_parity(crossings: list[float], merge_tol: float) -> tuple[list[float], list[float]]:
    """Cluster crossings closer than the stencil; odd clusters keep one zero."""
    if not crossings:
        return [], []
    kept: list[float] = []
    tangent: list[float] = []
    cluster = [crossings[0]]
    for c in crossings[1:]:
        if c - cluster[-1] <= merge_tol:
            cluster.append(c)
        else:
            _flush_cluster(cluster, kept, tangent)
            cluster = [c]
    _flush_cluster(cluster, kept, tangent)
    return kept, tangent


def _flush_cluster(cluster: list[float], kept: list[float], tangent: list[float]) -> None:
    mid = cluster[len(cluster) // 2]
    if len(cluster) % 2 == 1:
        kept.append(mid)
    else:
        tangent.append(mid)


def detect_multiple(
    values: np.ndarray,
    dvalues: np.ndarray,
    grid: np.ndarray,
    tol_v: float | None = None,
    tol_dv: float | None = None,
    merge_tol: float | None = None,
) -> list[float]:
    """Nodes where both the function and its slope sit inside tolerance."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    dvalues = np.asarray(dvalues, dtype=float)
    if tol_v is None:
        tol_v = _default_tol(values) * 10.0
    if tol_dv is None:
        tol_dv = _default_tol(dvalues) * 10.0
    if merge_tol is None:
        merge_tol = 3.0 * float(np.median(np.diff(grid)))
    hits = np.nonzero((np.abs(values) <= tol_v) & (np.abs(dvalues) <= tol_dv))[0]
    out: list[float] = []
    for i in hits:
        xi = float(grid[i])
        if out and xi - out[-1] <= merge_tol:
            continue
        out.append(xi)
    return out


def reflect(snapshot: Snapshot, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Reflection difference u(2*lam - x) - u(x) on the overlap sub-grid.

    Linear interpolation supplies u at the mirrored points; the output is odd
    about lam by construction.  Raises EmptyOverlap when no grid point has a
    mirror inside the grid.
    """
    x = snapshot.x
    lo = max(float(x[0]), 2.0 * lam - float(x[-1]))
    hi = min(float(x[-1]), 2.0 * lam - float(x[0]))
    if hi <= lo:
        raise EmptyOverlap(f"reflection about {lam!r} does not meet the grid")
    mask = (x >= lo - 1e-12) & (x <= hi + 1e-12)
    xs = x[mask]
    mirrored = np.interp(2.0 * lam - xs, x, snapshot.u)
    return xs, mirrored - snapshot.u[mask]


def audit_monotonicity(
    series: list[tuple[float, ZeroReport | None]],
) -> DropLog:
    """Check counts never increase over time for one tracked functional.

    Entries with an undefined count (deadbanded snapshots) are skipped.  A
    strict drop not announced by a tangency/multiple detection in the
    preceding report is listed as unexplained -- informational only, since
    drops may happen between snapshots.
    """
    log = DropLog()
    prev: tuple[float, ZeroReport] | None = None
    for t, rep in series:
        if rep is None:
            continue
        log.series.append((t, rep.count))
        if prev is not None:
            t0, r0 = prev
            if rep.count > r0.count:
                log.violations.append((t0, t))
            elif rep.count < r0.count and not r0.multiples and not rep.multiples:
                log.unexplained_drops.append((t0, t))
        prev = (t, rep)
    return log


def check_critical_finiteness(
    snapshots: list[Snapshot],
    tol: float | None = None,
) -> dict:
    """First time the count of critical points is defined and then constant.

    Tracks zeros of u_x per snapshot.  Snapshots whose slope field is fully
    deadbanded (flat profiles) are skipped once a count exists; the check
    fails when counts never stabilize or grow.
    """
    counts: list[tuple[float, int | None]] = []
    for s in snapshots:
        try:
            rep = zero_count(s.ux[1:-1], s.x[1:-1], tol=tol)
            counts.append((s.t, rep.count))
        except AllBelowTol:
            counts.append((s.t, None))
    defined = [(t, c) for t, c in counts if c is not None]
    result: dict = {"series": counts, "holds": False, "holds_at": None, "count": None}
    if not defined:
        result["reason"] = "slope field below tolerance at every snapshot"
        return result
    for i, (t, c) in enumerate(defined):
        if all(c2 == c for _, c2 in defined[i:]):
            result.update(holds=True, holds_at=t, count=c)
            return result
    result["reason"] = "critical-point count never stabilizes"
    return result


def default_lambdas(half_width: float, start: float = 10.0, stride: float = 5.0) -> list[float]:
    """Two arithmetic sequences marching toward +/-(L - 10)."""
    top = half_width - 10.0
    if top < start:
        return []
    vals = np.arange(start, top + 1e-9, stride)
    return [float(v) for v in np.concatenate([-vals[::-1], vals])]


def check_reflection_finiteness(
    snapshots: list[Snapshot],
    lambdas: list[float],
    tol: float | None = None,
) -> dict:
    """Per-reflection-point report: earliest snapshot with a defined count.

    Holds when every reflection point has one by the horizon.  Counts that
    grow over snapshots are flagged as resolution-limited.
    """
    horizon = snapshots[-1].t if snapshots else 0.0
    per_lambda = {}
    for lam in lambdas:
        first_t = None
        first_count = None
        growth = False
        last_count = None
        for s in snapshots:
            try:
                xs, v = reflect(s, lam)
                rep = zero_count(v, xs, tol=tol)
            except (AllBelowTol, EmptyOverlap):
                continue
            if first_t is None:
                first_t, first_count = s.t, rep.count
            if last_count is not None and rep.count > last_count:
                growth = True
            last_count = rep.count
        per_lambda[lam] = {
            "first_defined_t": first_t,
            "count": first_count,
            "resolution_limited": growth,
        }
    holds = all(v["first_defined_t"] is not None for v in per_lambda.values()) and bool(lambdas)
    return {"holds": holds, "horizon": horizon, "per_lambda": per_lambda}
